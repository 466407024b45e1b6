"""Deficits of the logarithmic inequalities and the two phase diagrams.

Every deficit is arranged as ``lhs - rhs`` so that nonnegativity is the claim.
Classification follows the boundedness theorems verbatim; points where neither
the bounded nor the unbounded conditions apply are labelled ``Unknown``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .closedforms import sharp_constant
from .functionals import (SchrodingerParams, entropy, interaction, interaction_planar, kinetic,
                          potential_moment, rho_log_rho)
from .grids import PlanarDensity, RadialDensity, WaveFunction

EQUALITY_TOL = 1e-4
DERIVED_TOL = 1e-3
CLASSIFY_EPS = 1e-9
LOG_PI = math.log(math.pi)


class Kind(str, Enum):
    LOG_HLS = "log_hls"
    LOG_HLS_TAU = "log_hls_tau"
    POTENTIAL_VS_INTERACTION = "potential_vs_interaction"
    ENTROPY_POTENTIAL = "entropy_potential"
    FREE_ENERGY_BOUND = "free_energy_bound"
    LOGSOB_EUCLIDEAN = "logsob_euclidean"
    LOGSOB_SCALED = "logsob_scaled"
    LOGSOB_WEISSLER = "logsob_weissler"
    KIN_VS_INTERACTION = "kin_vs_interaction"
    KIN_VS_INTERACTION_SCALED = "kin_vs_interaction_scaled"
    SCALE_INVARIANT = "scale_invariant"


WAVE_KINDS = frozenset({Kind.LOGSOB_EUCLIDEAN, Kind.LOGSOB_SCALED, Kind.LOGSOB_WEISSLER,
                        Kind.KIN_VS_INTERACTION, Kind.KIN_VS_INTERACTION_SCALED,
                        Kind.SCALE_INVARIANT})


@dataclass(frozen=True)
class InequalityId:
    """An inequality together with its parameter (tau, eta, lambda or (a, b))."""

    kind: Kind
    tau: float | None = None
    eta: float | None = None
    lam: float | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        k = self.kind
        if k == Kind.LOG_HLS_TAU and not (self.tau is not None and self.tau >= 0):
            raise ValueError("LOG_HLS_TAU needs tau >= 0")
        if k == Kind.ENTROPY_POTENTIAL and not (self.eta is not None and self.eta > 0):
            raise ValueError("ENTROPY_POTENTIAL needs eta > 0")
        if k in (Kind.LOGSOB_SCALED, Kind.KIN_VS_INTERACTION_SCALED) and not (
                self.lam is not None and self.lam > 0):
            raise ValueError(f"{k.value} needs lambda > 0")
        if k == Kind.FREE_ENERGY_BOUND and (self.a is None or self.b is None):
            raise ValueError("FREE_ENERGY_BOUND needs (a, b)")

    @property
    def params(self) -> dict:
        return {k: v for k, v in (("tau", self.tau), ("eta", self.eta), ("lambda", self.lam),
                                  ("a", self.a), ("b", self.b)) if v is not None}

    @property
    def name(self) -> str:
        extra = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.kind.value}({extra})" if extra else self.kind.value


@dataclass(frozen=True)
class DeficitReport:
    """``deficit = lhs - rhs``; ``passed`` iff ``deficit >= -tolerance``.

    ``claim`` is False where the inequality is known to fail for the given
    parameters; such reports carry no verdict.
    """

    id: str
    params: dict
    lhs: float
    rhs: float
    deficit: float
    tolerance: float
    passed: bool
    claim: bool = True
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _provenance(x) -> dict:
    grid = x.grid
    if hasattr(grid, "describe"):
        return grid.describe()
    return {"h": grid.h, "L": grid.L}


def _report(ineq: InequalityId, lhs, rhs, tol, x, claim=True) -> DeficitReport:
    d = lhs - rhs
    return DeficitReport(ineq.name, ineq.params, float(lhs), float(rhs), float(d), tol,
                         bool(d >= -tol), claim, _provenance(x))


def _interaction_of(rho):
    return interaction(rho) if isinstance(rho, RadialDensity) else interaction_planar(rho)


def deficit(ineq: InequalityId, x, M: float | None = None,
            tolerance: float = EQUALITY_TOL) -> DeficitReport:
    """Evaluate one inequality on a density or wave function.

    Parameters
    ----------
    ineq : InequalityId
    x : RadialDensity, PlanarDensity or WaveFunction
        Wave functions are required for the Sobolev-type inequalities and
        rejected for the density ones.
    M : float, optional
        Mass; defaults to the quadrature mass of ``x``.
    tolerance : float
        Allowed negative deficit.
    """
    k = ineq.kind
    is_wave = isinstance(x, WaveFunction)
    if k in WAVE_KINDS and not is_wave:
        raise TypeError(f"{k.value} is an inequality for wave functions")
    if k not in WAVE_KINDS and not isinstance(x, (RadialDensity, PlanarDensity)):
        raise TypeError(f"{k.value} is an inequality for densities")
    M = x.mass if M is None else float(M)
    if abs(x.mass - M) > 1e-6 * M:
        raise ValueError(f"input mass {x.mass!r} differs from M={M!r}")

    if is_wave:
        rho = x.density()
        kin = kinetic(x)
        if k == Kind.LOGSOB_EUCLIDEAN or k == Kind.LOGSOB_SCALED:
            lam = 1.0 if k == Kind.LOGSOB_EUCLIDEAN else ineq.lam
            lhs = lam * lam * kin - M * math.log(lam)
            rhs = 0.5 * entropy(rho, M) + 0.5 * math.log(2 * math.pi * math.e ** 2) * M
            return _report(ineq, lhs, rhs, tolerance, x)
        if k == Kind.LOGSOB_WEISSLER:
            lhs = M * math.log(kin / (math.pi * math.e * M))
            rhs = entropy(rho, M)
            return _report(ineq, lhs, rhs, tolerance, x)
        inter = interaction(rho)
        if k == Kind.KIN_VS_INTERACTION or k == Kind.KIN_VS_INTERACTION_SCALED:
            lam = 1.0 if k == Kind.KIN_VS_INTERACTION else ineq.lam
            lhs = lam * lam * kin - M * math.log(lam)
            rhs = -inter / M + 0.5 * math.log(2 * math.e) * M
            return _report(ineq, lhs, rhs, tolerance, x)
        # SCALE_INVARIANT: -I <= M^2 log(|grad u| / |u|)
        lhs = 0.5 * M * M * math.log(kin / M)
        return _report(ineq, lhs, -inter, tolerance, x)

    ent = entropy(x, M)
    if k == Kind.ENTROPY_POTENTIAL:
        lhs = ent + ineq.eta * potential_moment(x)
        if ineq.eta <= 1:
            return _report(ineq, lhs, math.nan, tolerance, x, claim=False)
        return _report(ineq, lhs, M * math.log((ineq.eta - 1) / math.pi), tolerance, x)
    inter = _interaction_of(x)
    if k == Kind.LOG_HLS:
        lhs = ent + 2.0 / M * inter + M * (1 + LOG_PI)
        return _report(ineq, lhs, 0.0, tolerance, x)
    pot = potential_moment(x)
    if k == Kind.LOG_HLS_TAU:
        t = ineq.tau
        lhs = ent + 2 * t * pot + M * (1 - t + LOG_PI)
        rhs = 2.0 / M * (t - 1) * inter
        return _report(ineq, lhs, rhs, tolerance, x)
    if k == Kind.POTENTIAL_VS_INTERACTION:
        return _report(ineq, 2 * pot - M, 2.0 / M * inter, tolerance, x)
    # FREE_ENERGY_BOUND
    a, b = ineq.a, ineq.b
    lhs = ent + a * pot - b / M * inter
    region = classify_free_energy(a, b)
    best = region.constant if region.constant is not None else region.lower_bound
    if region.label != BOUNDED or best is None:
        return _report(ineq, lhs, math.nan, tolerance, x, claim=False)
    return _report(ineq, lhs, best * M, tolerance, x)


# -- phase diagrams -----------------------------------------------------------------

BOUNDED = "Bounded"
UNBOUNDED = "Unbounded"
UNKNOWN = "Unknown"

W_TRANSLATE = "translate"
W_SCALE_UP = "scale_up"
W_SCALE_DOWN = "scale_down"
W_TWO_BUBBLE = "two_bubble"
W_ZETA_LIMIT = "zeta_limit"
W_WAVE_TRANSLATE = "wave_translate"
W_WAVE_SCALE = "wave_scale"
W_WAVE_TWO_BUBBLE = "wave_two_bubble"


@dataclass(frozen=True)
class RegionLabel:
    """Boundedness verdict with the known constant, best lower bound and witness."""

    label: str
    constant: float | None = None
    lower_bound: float | None = None
    witness: str | None = None
    reason: str = ""


def _eq(x, y, eps=CLASSIFY_EPS):
    return abs(x - y) <= eps


def _lt(x, y, eps=CLASSIFY_EPS):
    return x < y - eps


def _le(x, y, eps=CLASSIFY_EPS):
    return x <= y + eps


def free_energy_lower_bound(a: float, b: float, eps: float = CLASSIFY_EPS) -> float | None:
    """Best lower bound on ``C(a, b)`` (unit mass) from the combination arguments.

    Combines logHLS with the entropy-potential inequality (``-2 < b < 0``), the
    potential-interaction inequality with the entropy-potential one (``b > 0``),
    the sharp values on ``b = 2a - 2`` and ``b = a - 2``, and monotonicity in
    ``a`` (the potential moment is nonnegative).  Not claimed to be sharp.
    """
    cands = []
    if _eq(b, -2, eps) and _le(0.0, a, eps):
        cands.append(-(1 + LOG_PI))
    if -2 + eps < b < -eps and 2 * a - 2 - b > eps:
        cands.append((1 + LOG_PI) * b / 2 + (b + 2) / 2 * math.log((2 * a - 2 - b) / (math.pi * (b + 2))))
    if _eq(b, 0.0, eps) and a > 1 + eps:
        cands.append(math.log((a - 1) / math.pi))
    if b > eps and a - b - 1 > eps:
        cands.append(b / 2 + math.log((a - b - 1) / math.pi))
    # sharp lines reached from below in a: C(a, b) >= C(a', b) for a >= a'
    if -2 - eps <= b < -eps and _le((b + 2) / 2, a, eps):
        cands.append(-math.log(math.e * math.pi / (1 - (b + 2) / 2)))
    if b >= -2 - eps and _le(b + 2, a, eps):
        cands.append(b / 2 - LOG_PI)
    return max(cands) if cands else None


def classify_free_energy(a: float, b: float, eps: float = CLASSIFY_EPS) -> RegionLabel:
    """Bounded / Unbounded / Unknown for ``F_{a,b}`` with the boundedness theorem."""
    a, b = float(a), float(b)
    if (_eq(a, 0, eps) and _eq(b, -2, eps)) or (
            a > eps and _le(-2, b, eps) and _lt(b, a - 1, eps) and _le(b, 2 * a - 2, eps)):
        return RegionLabel(BOUNDED, sharp_constant(a, b, eps), free_energy_lower_bound(a, b, eps),
                           reason="a=0, b=-2 or a>0, -2<=b<a-1, b<=2a-2")
    if a < -eps:
        return RegionLabel(UNBOUNDED, witness=W_TRANSLATE, reason="a<0")
    if b < -2 - eps:
        return RegionLabel(UNBOUNDED, witness=W_SCALE_UP, reason="b<-2")
    if _eq(a, 1, eps) and _eq(b, 0, eps):
        return RegionLabel(UNBOUNDED, witness=W_ZETA_LIMIT, reason="(a,b)=(1,0)")
    if b > 2 * a - 2 + eps:
        return RegionLabel(UNBOUNDED, witness=W_SCALE_DOWN, reason="b>2a-2")
    if b > a - 1 + eps:
        return RegionLabel(UNBOUNDED, witness=W_TWO_BUBBLE, reason="b>a-1")
    return RegionLabel(UNKNOWN, reason="threshold b=a-1>0")


def two_bubble_epsilon(a: float, b: float) -> float:
    """Mixing weight making the two-bubble slope positive when ``b > a - 1``."""
    if b <= 0:
        return 0.5
    return min(0.5, 1.0 - (a - 1.0) / b)


def classify_schrodinger(p: SchrodingerParams, eps: float = CLASSIFY_EPS) -> RegionLabel:
    """Bounded / Unbounded / Unknown for the Schrödinger energy on the mass sphere."""
    al, be, ga, M = p.alpha, p.beta, p.gamma, p.M
    mb = M * be
    if al < -eps:
        return RegionLabel(UNBOUNDED, witness=W_WAVE_TRANSLATE, reason="Theorem 11 (i)(a): alpha<0")
    if mb > min(2 * al - ga, 4 * al - 2 * ga) + eps:
        w = W_WAVE_SCALE if mb > 4 * al - 2 * ga + eps else W_WAVE_TWO_BUBBLE
        return RegionLabel(UNBOUNDED, witness=w,
                           reason="Theorem 11 (i)(b): alpha>=0 and M beta>min(2 alpha-gamma, 4 alpha-2 gamma)")
    if _eq(al, 0, eps) and _le(be, 0, eps) and _le(mb + 2 * ga, 0, eps):
        return RegionLabel(BOUNDED, reason="alpha=0, beta<=0, M beta+2 gamma<=0")
    if al > eps:
        if _le(ga, 0, eps) and _le(mb, 2 * al, eps):
            return RegionLabel(BOUNDED, reason="alpha>0, gamma<=0, M beta<=2 alpha")
        if ga > eps and _le(mb, 4 * al - 2 * ga, eps) and _lt(mb, 2 * al - ga, eps):
            return RegionLabel(BOUNDED, reason="alpha>0, gamma>0, M beta<=4 alpha-2 gamma, M beta<2 alpha-gamma")
    return RegionLabel(UNKNOWN, reason="neither condition of Theorem 11 applies")


def wave_two_bubble_epsilon(p: SchrodingerParams) -> float:
    """Mixing weight making the wave two-bubble slope positive."""
    mb = p.M * p.beta
    if mb <= 0:
        return 0.5
    return min(0.5, 1.0 - (2 * p.alpha - p.gamma) / mb)


# -- scans -------------------------------------------------------------------------------


def parse_range(spec: str | tuple) -> np.ndarray:
    """``"start:stop:step"`` (stop included) or a bare number, into an array."""
    if isinstance(spec, (tuple, list)):
        start, stop, step = map(float, spec)
    else:
        parts = str(spec).split(":")
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {spec!r}")
        start, stop, step = map(float, parts)
    if step <= 0:
        raise ValueError("range step must be positive")
    if stop < start:
        return np.array([])
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


@dataclass(frozen=True)
class PhaseScan:
    """Labels on a rectangular parameter grid."""

    which: str
    x_name: str
    y_name: str
    xs: np.ndarray
    ys: np.ndarray
    labels: tuple  # labels[i][j] for (xs[i], ys[j])
    fixed: dict = field(default_factory=dict)

    def rows(self):
        for i, x in enumerate(self.xs):
            for j, y in enumerate(self.ys):
                yield float(x), float(y), self.labels[i][j]


def scan_phase_diagram(which: str, x_range, y_range, *, alpha: float = 1.0,
                       M: float = 1.0) -> PhaseScan:
    """Label every grid point of a parameter rectangle.

    ``free_energy`` scans ``(a, b)``.  ``schrodinger`` scans ``(gamma, M beta)``
    at fixed ``alpha`` (the two panels are ``alpha = 0`` and ``alpha = 1``).
    """
    xs = parse_range(x_range) if not isinstance(x_range, np.ndarray) else x_range
    ys = parse_range(y_range) if not isinstance(y_range, np.ndarray) else y_range
    labels = []
    if which in ("free_energy", "free-energy"):
        for a in xs:
            labels.append(tuple(classify_free_energy(a, b) for b in ys))
        return PhaseScan("free_energy", "a", "b", xs, ys, tuple(labels))
    if which == "schrodinger":
        for g in xs:
            labels.append(tuple(classify_schrodinger(SchrodingerParams(alpha, mb / M, g, M)) for mb in ys))
        return PhaseScan("schrodinger", "gamma", "M_beta", xs, ys, tuple(labels), {"alpha": alpha, "M": M})
    raise ValueError(f"unknown diagram {which!r}")
