"""Test-function families along which the energies diverge, and their slopes.

Each family is a one-parameter sequence of densities (or wave functions).  The
energy is evaluated along it, a straight line is fitted to energy against the
logarithm of the parameter on the tail half of the sequence, and the fit is
compared with the slope predicted by the exact scaling identities.

Sign convention: ``slope`` is the coefficient of ``log(param)``.  The family
runs toward ``param -> inf`` (``direction = +1``) or ``param -> 0+``
(``direction = -1``); ``divergence_slope = direction * slope`` is negative
exactly when the energy tends to ``-inf`` along the family.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .closedforms import ANNULUS_BUMP, UNIT_BALL_BUMP, ClosedForm
from .functionals import (FreeEnergyParams, SchrodingerParams, interaction, kinetic,
                          potential_moment, potential_moment_translated, rho_log_rho)
from .grids import GEOMETRIC, GridError, RadialDensity, RadialGrid, WaveFunction, make_radial_grid
from .inequalities import (W_SCALE_DOWN, W_SCALE_UP, W_TRANSLATE, W_TWO_BUBBLE, W_WAVE_SCALE,
                           W_WAVE_TRANSLATE, W_WAVE_TWO_BUBBLE, W_ZETA_LIMIT,
                           classify_free_energy, classify_schrodinger, two_bubble_epsilon,
                           wave_two_bubble_epsilon)

SLOPE_RTOL = 0.05
MIN_MEMBERS = 4


class FamilyKind(str, Enum):
    TRANSLATE = "translate"
    SCALE = "scale"
    TWO_BUBBLE = "two_bubble"
    LATTICE = "lattice"
    ZETA_LIMIT = "zeta_limit"
    WAVE_SCALE = "wave_scale"
    WAVE_TRANSLATE = "wave_translate"
    WAVE_TWO_BUBBLE = "wave_two_bubble"


WAVE_FAMILIES = frozenset({FamilyKind.WAVE_SCALE, FamilyKind.WAVE_TRANSLATE, FamilyKind.WAVE_TWO_BUBBLE})


@dataclass(frozen=True)
class FamilySpec:
    """A family: kind, base profile and the parameter sequence.

    ``params`` are dilation factors (scale families), translation distances,
    lattice sizes ``n`` or ``zeta - 1`` depending on the kind.
    """

    kind: FamilyKind
    params: tuple
    base: ClosedForm = field(default_factory=ClosedForm.rho_star)
    eps: float | None = None
    A: float | None = None
    N: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k = self.kind
        if any(p <= 0 for p in self.params):
            raise ValueError("family parameters must be positive")
        if k in (FamilyKind.TWO_BUBBLE, FamilyKind.WAVE_TWO_BUBBLE):
            if self.base.family != ANNULUS_BUMP:
                raise ValueError("the two-bubble family needs an annulus-supported base")
            if not (self.eps is not None and 0 < self.eps < 1):
                raise ValueError("the two-bubble family needs 0 < eps < 1")
            if max(self.params) >= 0.5:
                raise ValueError("two-bubble dilations must stay below 1/2 so the supports decouple")
        if k == FamilyKind.LATTICE:
            if self.base.family != UNIT_BALL_BUMP:
                raise ValueError("the lattice family needs a base supported in the unit ball")
            if not (self.A is not None and self.A > 1):
                raise ValueError("the lattice family needs A > 1")
            if any(p != int(p) or p < 2 for p in self.params):
                raise ValueError("lattice sizes must be integers >= 2")
        if k == FamilyKind.ZETA_LIMIT and self.base.family not in ("rho_star", "rho_eta"):
            raise ValueError("the zeta limit family is built from rho_zeta")

    @property
    def direction(self) -> int:
        p = self.params
        if len(p) < 2:
            return 1
        return 1 if p[-1] > p[0] else -1

    @property
    def is_wave(self) -> bool:
        return self.kind in WAVE_FAMILIES


# -- grids and member construction --------------------------------------------------


def family_grid(spec: FamilySpec) -> RadialGrid:
    """One geometric grid shared by every member of the family."""
    k, base, ps = spec.kind, spec.base, spec.params
    lo, hi = base.support
    compact = math.isfinite(hi)
    if k in (FamilyKind.SCALE, FamilyKind.WAVE_SCALE):
        reach = (1.25 * hi if compact else (40.0 if base.family == "gaussian" else 100.0))
        R = reach / min(ps)
        r_min = 1e-8 * reach / max(ps)
        return make_radial_grid(spec.N, R, GEOMETRIC, r_min=r_min)
    if k in (FamilyKind.TWO_BUBBLE, FamilyKind.WAVE_TWO_BUBBLE):
        return make_radial_grid(spec.N, 1.1 * hi / min(ps), GEOMETRIC, r_min=1e-3 * lo)
    if k in (FamilyKind.TRANSLATE, FamilyKind.WAVE_TRANSLATE):
        R = 1.25 * hi if compact else max(100.0, 10.0 * max(ps))
        if base.family == "gaussian":
            R = 40.0
        return make_radial_grid(spec.N, R, GEOMETRIC)
    if k == FamilyKind.LATTICE:
        return make_radial_grid(spec.N, 1.0, GEOMETRIC, r_min=1e-6)
    return make_radial_grid(spec.N, 100.0, GEOMETRIC)


def mixture_on_grid(forms, weights, grid: RadialGrid) -> RadialDensity:
    """``sum w_i form_i`` as one radial density (tails and heads are summed)."""
    vals = np.zeros(grid.N)
    tail = head = None
    for f, w in zip(forms, weights):
        d = f.on_grid(grid)
        vals += w * d.values
        if d.tail is not None:
            tail = d.tail * w if tail is None else tail + d.tail * w
        if d.head is not None:
            head = d.head * w if head is None else head + d.head * w
    return RadialDensity(grid, vals, tail=tail, head=head)


@dataclass(frozen=True)
class Member:
    """One family member with what is needed to evaluate energies on it."""

    param: float
    density: RadialDensity
    wave: WaveFunction | None = None
    shift: float = 0.0
    lattice_n: int = 0


def make_family(spec: FamilySpec):
    """Yield the members of ``spec`` lazily; each carries mass ``base.M``."""
    grid = family_grid(spec)
    base, k = spec.base, spec.kind
    for p in spec.params:
        if k in (FamilyKind.SCALE, FamilyKind.WAVE_SCALE):
            form = base.scaled(p)
            rho = form.on_grid(grid)
            wave = form.wave_on_grid(grid) if spec.is_wave else None
            yield Member(p, rho, wave)
        elif k in (FamilyKind.TRANSLATE, FamilyKind.WAVE_TRANSLATE):
            rho = base.on_grid(grid)
            wave = base.wave_on_grid(grid) if spec.is_wave else None
            yield Member(p, rho, wave, shift=p)
        elif k in (FamilyKind.TWO_BUBBLE, FamilyKind.WAVE_TWO_BUBBLE):
            rho = mixture_on_grid([base, base.scaled(p)], [1 - spec.eps, spec.eps], grid)
            wave = WaveFunction(grid, np.sqrt(rho.values)) if spec.is_wave else None
            yield Member(p, rho, wave)
        elif k == FamilyKind.ZETA_LIMIT:
            rho = ClosedForm.rho_eta(1.0 + p, base.M).on_grid(grid)
            yield Member(p, rho)
        elif k == FamilyKind.LATTICE:
            n = int(p)
            eps = n ** (-spec.A)
            bump = base.scaled(1.0 / eps).with_mass(base.M / n ** 2)
            bgrid = make_radial_grid(spec.N, 1.25 * eps, GEOMETRIC, r_min=1e-6 * eps)
            yield Member(p, bump.on_grid(bgrid), lattice_n=n)
        else:
            raise ValueError(f"unsupported family {k}")


# -- energies along a family ----------------------------------------------------------


def lattice_centers(n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    X, Y = np.meshgrid(k, k, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def _lattice_terms(member: Member, M: float) -> dict:
    """Exact-in-structure terms of the lattice density.

    Bumps are disjoint, so entropy adds up; the potential moment of each bump
    uses the exact angular mean about its center; by Newton's theorem the
    cross interaction of two disjoint radial bumps is ``m_p m_q log|c_p - c_q|``.
    """
    bump = member.density
    n = member.lattice_n
    centers = lattice_centers(n)
    m = bump.mass
    total = n * n * m
    ent = n * n * rho_log_rho(bump) - total * math.log(M)
    dist = np.hypot(*centers.T)
    pot = sum(potential_moment_translated(bump, d) for d in dist)
    d = np.hypot(centers[:, None, 0] - centers[None, :, 0], centers[:, None, 1] - centers[None, :, 1])
    off = ~np.eye(len(centers), dtype=bool)
    cross = m * m * float(np.log(d[off]).sum())
    inter = n * n * interaction(bump) + cross
    return {"entropy": ent, "potential_moment": pot, "interaction": inter}


def _density_terms(member: Member, M: float) -> dict:
    rho = member.density
    if member.lattice_n:
        return _lattice_terms(member, M)
    ent = rho_log_rho(rho) - rho.mass * math.log(M)
    if member.shift:
        pot = potential_moment_translated(rho, member.shift)
    else:
        pot = potential_moment(rho)
    return {"entropy": ent, "potential_moment": pot, "interaction": interaction(rho)}


def evaluate_member(member: Member, functional) -> dict:
    """Term breakdown and total energy of one member."""
    if isinstance(functional, FreeEnergyParams):
        t = _density_terms(member, functional.M)
        p = functional
        t["energy"] = p.c * t["entropy"] + p.a * t["potential_moment"] - p.b / p.M * t["interaction"]
        return t
    if isinstance(functional, SchrodingerParams):
        if member.wave is None:
            raise ValueError("the Schrödinger energy needs a wave-function family")
        p = functional
        rho = member.density
        kin = kinetic(member.wave)
        if member.shift:
            trap = 2.0 * potential_moment_translated(rho, member.shift)
        else:
            trap = 2.0 * potential_moment(rho)
        inter = interaction(rho)
        loc = rho_log_rho(rho)
        return {"kinetic": kin, "trap": trap, "interaction": inter, "local": loc,
                "energy": kin + p.alpha * trap - p.beta * inter + p.gamma * loc}
    raise TypeError("functional must be FreeEnergyParams or SchrodingerParams")


def analytic_slope(spec: FamilySpec, functional) -> float | None:
    """Exact coefficient of ``log(param)`` in the energy, or None if not available."""
    k = spec.kind
    M = functional.M
    if isinstance(functional, FreeEnergyParams):
        a, b, c = functional.a, functional.b, functional.c
        if k == FamilyKind.SCALE:
            return M * (2 * c + b) if spec.direction > 0 else M * (2 * c + b - 2 * a)
        if k == FamilyKind.TWO_BUBBLE:
            e = spec.eps
            return 2 * e * M * ((1 - e / 2) * b + c - a)
        if k == FamilyKind.TRANSLATE:
            return 2 * a * M
        if k == FamilyKind.ZETA_LIMIT:
            return c * M if (b == 0 and a == c) else None
        if k == FamilyKind.LATTICE:
            return M * (2 * (spec.A - 1) * c + 2 * a)
        return None
    al, be, ga = functional.alpha, functional.beta, functional.gamma
    if k == FamilyKind.WAVE_SCALE:
        return M * (M * be + 2 * ga - 4 * al) if spec.direction < 0 else None
    if k == FamilyKind.WAVE_TRANSLATE:
        return 4 * al * M
    if k == FamilyKind.WAVE_TWO_BUBBLE:
        e = spec.eps
        return 2 * e * M * (ga - 2 * al + M * be * (1 - e / 2))
    return None


@dataclass(frozen=True)
class SlopeEstimate:
    """Fitted and analytic slopes of the energy along a family."""

    family: str
    functional: str
    params: dict
    log_param: tuple
    energies: tuple
    terms: tuple
    direction: int
    slope: float
    analytic_slope: float | None
    relative_error: float | None
    divergence_slope: float
    term_slopes: dict
    confirmed: bool
    family_params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _fit(x, y) -> float:
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def measure_slope(spec: FamilySpec, functional, rtol: float = SLOPE_RTOL) -> SlopeEstimate:
    """Evaluate the energy along ``spec`` and fit its log-slope on the tail half."""
    if len(spec.params) < MIN_MEMBERS:
        raise ValueError(f"need at least {MIN_MEMBERS} family members to fit a slope")
    if isinstance(functional, SchrodingerParams) != spec.is_wave:
        raise ValueError("wave families go with the Schrödinger energy, density families with F")
    rows = [evaluate_member(m, functional) for m in make_family(spec)]
    logp = np.log(np.array(spec.params))
    energies = np.array([r["energy"] for r in rows])
    half = len(rows) // 2
    sl = slice(half, None)
    slope = _fit(logp[sl], energies[sl])
    term_slopes = {k: _fit(logp[sl], np.array([r[k] for r in rows])[sl]) for k in rows[0] if k != "energy"}
    ana = analytic_slope(spec, functional)
    rel = None
    if ana is not None:
        rel = abs(slope - ana) / abs(ana) if ana != 0 else abs(slope)
    div = spec.direction * slope
    confirmed = bool(div < 0 and rel is not None and rel <= rtol)
    fam_params = {"base": spec.base.label}
    if spec.eps is not None:
        fam_params["eps"] = spec.eps
    if spec.A is not None:
        fam_params["A"] = spec.A
    return SlopeEstimate(spec.kind.value, type(functional).__name__, asdict(functional),
                         tuple(map(float, logp)), tuple(map(float, energies)),
                         tuple({k: float(v) for k, v in r.items()} for r in rows),
                         spec.direction, slope, ana, rel, div, term_slopes, confirmed, fam_params)


# -- default witnesses -------------------------------------------------------------------


def dyadic(k0: int, k1: int, sign: int = 1) -> tuple:
    """``2**(sign*k)`` for ``k = k0..k1``."""
    return tuple(2.0 ** (sign * k) for k in range(k0, k1 + 1))


def witness_family(witness: str, functional=None, M: float = 1.0) -> FamilySpec:
    """The family realizing an unboundedness argument."""
    annulus = ClosedForm.annulus_bump(M)
    if witness == W_TRANSLATE:
        return FamilySpec(FamilyKind.TRANSLATE, tuple(10.0 * 2 ** k for k in range(7)), ClosedForm.rho_star(M))
    if witness == W_SCALE_UP:
        return FamilySpec(FamilyKind.SCALE, dyadic(0, 6), ClosedForm.rho_star(M))
    if witness == W_SCALE_DOWN:
        return FamilySpec(FamilyKind.SCALE, dyadic(0, 6, -1), annulus)
    if witness == W_TWO_BUBBLE:
        eps = two_bubble_epsilon(functional.a, functional.b)
        return FamilySpec(FamilyKind.TWO_BUBBLE, dyadic(2, 8, -1), annulus, eps=eps)
    if witness == W_ZETA_LIMIT:
        return FamilySpec(FamilyKind.ZETA_LIMIT, dyadic(2, 8, -1), ClosedForm.rho_star(M))
    if witness == W_WAVE_TRANSLATE:
        return FamilySpec(FamilyKind.WAVE_TRANSLATE, tuple(10.0 * 2 ** k for k in range(7)),
                          ClosedForm.gaussian(M))
    if witness == W_WAVE_SCALE:
        return FamilySpec(FamilyKind.WAVE_SCALE, dyadic(0, 6, -1), ClosedForm.gaussian(M))
    if witness == W_WAVE_TWO_BUBBLE:
        eps = wave_two_bubble_epsilon(functional)
        return FamilySpec(FamilyKind.WAVE_TWO_BUBBLE, dyadic(2, 8, -1), annulus, eps=eps)
    raise ValueError(f"unknown witness {witness!r}")


def confirm_unbounded(functional) -> SlopeEstimate:
    """Run the witness family named by the classifier for an Unbounded point."""
    if isinstance(functional, FreeEnergyParams):
        region = classify_free_energy(functional.a, functional.b)
    else:
        region = classify_schrodinger(functional)
    if region.witness is None:
        raise ValueError(f"no divergence witness: region is {region.label}")
    return measure_slope(witness_family(region.witness, functional, functional.M), functional)
