"""Closed-form densities and their exact integral values.

Every family is normalized to unit mass and then multiplied by ``M``.  The
``scale`` field realizes the mass-preserving dilation
``rho -> scale**2 * rho(scale * x)`` used by the divergence families, so the
analytic tails and heads follow the density through scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .grids import GEOMETRIC, GridError, RadialDensity, RadialGrid, WaveFunction, make_radial_grid
from .series import HEAD, TAIL, LogPowerSeries

RHO_STAR = "rho_star"
RHO_ETA = "rho_eta"
K_MINIMIZER = "k_minimizer"
GAUSSIAN = "gaussian"
ANNULUS_BUMP = "annulus_bump"
UNIT_BALL_BUMP = "unit_ball_bump"
FAMILIES = (RHO_STAR, RHO_ETA, K_MINIMIZER, GAUSSIAN, ANNULUS_BUMP, UNIT_BALL_BUMP)

EULER_GAMMA = float(np.euler_gamma)
# Gaussian mass beyond R_max that may be dropped without a tail series
GAUSSIAN_TAIL_CUTOFF = 1e-14
_SERIES_DIGITS = 18


class FamilyError(ValueError):
    """Family parameters outside their admissible range."""


def _n_terms(ratio: float) -> int:
    """Terms of a geometric-type series in ``ratio`` needed for ~1e-18."""
    if ratio >= 0.9:
        raise GridError(f"asymptotic series ratio {ratio:.3g} too close to 1; enlarge the grid")
    if ratio <= 0.0:
        return 1
    return min(400, int(math.ceil(_SERIES_DIGITS * math.log(10) / -math.log(ratio))) + 2)


def _binom_neg(eta: float, k: int) -> float:
    """``binom(-eta, k)``."""
    out = 1.0
    for i in range(k):
        out *= (-eta - i) / (i + 1)
    return out


@lru_cache(maxsize=None)
def _bump_norm(kind: str) -> float:
    lo, hi = (1.0, 2.0) if kind == ANNULUS_BUMP else (0.0, 1.0)
    val, _ = integrate.quad(lambda r: 2 * math.pi * r * _bump_raw(kind, r), lo, hi,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def _bump_raw(kind: str, r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    if kind == ANNULUS_BUMP:
        inside = (r > 1.0) & (r < 2.0)
        x = r[inside]
        out[inside] = np.exp(-1.0 / ((x - 1.0) * (2.0 - x)))
    else:
        inside = r < 1.0
        x = r[inside]
        out[inside] = np.exp(-1.0 / (1.0 - x * x))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ClosedForm:
    """A named radial density ``M * scale**2 * f(scale * r)``.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    M : float
        Mass.
    eta : float
        Decay parameter of ``rho_eta`` (``eta > 1``); ``rho_star`` is ``eta = 2``.
    a, lam : float
        Parameters of the ``k_minimizer`` family (``0 <= a < 1``, ``lam > 0``).
    scale : float
        Dilation factor.
    """

    family: str
    M: float = 1.0
    eta: float = 2.0
    a: float = 0.0
    lam: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise FamilyError(f"unknown family {self.family!r}")
        if not self.M > 0:
            raise FamilyError("mass M must be positive")
        if not self.scale > 0:
            raise FamilyError("scale must be positive")
        if self.family == RHO_STAR:
            object.__setattr__(self, "eta", 2.0)
        if self.family == RHO_ETA and not self.eta > 1:
            raise FamilyError("eta must exceed 1 for rho_eta to have finite mass (Lemma 2)")
        if self.family == K_MINIMIZER:
            if not 0 <= self.a < 1:
                raise FamilyError("the minimizer family needs 0 <= a < 1 (Lemma 8)")
            if not self.lam > 0:
                raise FamilyError("lambda must be positive")

    # -- constructors -------------------------------------------------------

    @classmethod
    def rho_star(cls, M: float = 1.0) -> "ClosedForm":
        return cls(RHO_STAR, M)

    @classmethod
    def rho_eta(cls, eta: float, M: float = 1.0) -> "ClosedForm":
        return cls(RHO_ETA, M, eta=eta)

    @classmethod
    def k_minimizer(cls, a: float, lam: float = 1.0, M: float = 1.0) -> "ClosedForm":
        return cls(K_MINIMIZER, M, a=a, lam=lam)

    @classmethod
    def gaussian(cls, M: float = 1.0) -> "ClosedForm":
        return cls(GAUSSIAN, M)

    @classmethod
    def annulus_bump(cls, M: float = 1.0) -> "ClosedForm":
        return cls(ANNULUS_BUMP, M)

    @classmethod
    def unit_ball_bump(cls, M: float = 1.0) -> "ClosedForm":
        return cls(UNIT_BALL_BUMP, M)

    def scaled(self, lam: float) -> "ClosedForm":
        """``rho_lam(x) = lam**2 rho(lam x)``."""
        return replace(self, scale=self.scale * lam)

    def with_mass(self, M: float) -> "ClosedForm":
        return replace(self, M=M)

    @property
    def label(self) -> str:
        parts = [self.family, f"M={self.M:g}"]
        if self.family == RHO_ETA:
            parts.append(f"eta={self.eta:g}")
        if self.family == K_MINIMIZER:
            parts += [f"a={self.a:g}", f"lambda={self.lam:g}"]
        if self.scale != 1.0:
            parts.append(f"scale={self.scale:g}")
        return ",".join(parts)

    @property
    def support(self) -> tuple[float, float]:
        if self.family == ANNULUS_BUMP:
            return 1.0 / self.scale, 2.0 / self.scale
        if self.family == UNIT_BALL_BUMP:
            return 0.0, 1.0 / self.scale
        return 0.0, math.inf

    # -- pointwise values ---------------------------------------------------

    def _unit(self, s):
        s = np.asarray(s, dtype=float)
        fam = self.family
        if fam in (RHO_STAR, RHO_ETA):
            return (self.eta - 1.0) / math.pi * (1.0 + s * s) ** (-self.eta)
        if fam == GAUSSIAN:
            return np.exp(-0.5 * s * s) / (2.0 * math.pi)
        if fam == K_MINIMIZER:
            a, l2 = self.a, self.lam ** 2
            with np.errstate(divide="ignore"):
                return (1.0 - a) / math.pi * l2 / (s ** (2 * a) * (l2 + s ** (2 * (1 - a))) ** 2)
        return _bump_raw(fam, s) / _bump_norm(fam)

    def __call__(self, r):
        """Density at radius ``r``; the k-minimizer with ``a > 0`` returns inf at 0."""
        return self.M * self.scale ** 2 * self._unit(self.scale * np.asarray(r, dtype=float))

    def cumulative_mass(self, r):
        """Mass inside radius ``r``."""
        s = self.scale * np.asarray(r, dtype=float)
        fam = self.family
        if fam in (RHO_STAR, RHO_ETA):
            frac = 1.0 - (1.0 + s * s) ** (1.0 - self.eta)
        elif fam == GAUSSIAN:
            frac = -np.expm1(-0.5 * s * s)
        elif fam == K_MINIMIZER:
            t = s ** (2 * (1 - self.a))
            frac = t / (self.lam ** 2 + t)
        else:
            lo, hi = (1.0, 2.0) if fam == ANNULUS_BUMP else (0.0, 1.0)

            def one(x):
                if x <= lo:
                    return 0.0
                val, _ = integrate.quad(lambda y: 2 * math.pi * y * _bump_raw(fam, y), lo, min(x, hi),
                                        epsabs=0.0, epsrel=1e-13, limit=200)
                return val / _bump_norm(fam)

            frac = np.vectorize(one)(s)
        return self.M * frac

    def effective_radius(self, fraction: float = 0.99) -> float:
        """Radius enclosing ``fraction`` of the mass."""
        target = fraction * self.M
        hi = 1.0 / self.scale
        while self.cumulative_mass(hi) < target:
            hi *= 2.0
        return float(optimize.brentq(lambda x: self.cumulative_mass(x) - target, 0.0, hi, xtol=1e-14))

    # -- asymptotic series -------------------------------------------------

    def _unit_tail(self, A: float):
        """(tail, log tail) of the unit-scale density for ``s >= A``, or None."""
        fam = self.family
        if fam in (RHO_STAR, RHO_ETA):
            eta, c = self.eta, (self.eta - 1.0) / math.pi
            n = _n_terms(A ** -2)
            tail = [(2 * eta + 2 * k, 0, c * _binom_neg(eta, k)) for k in range(n)]
            log_tail = [(0.0, 0, math.log(c)), (0.0, 1, -2 * eta)]
            log_tail += [(2.0 * m, 0, -eta * (-1.0) ** (m + 1) / m) for m in range(1, n)]
        elif fam == K_MINIMIZER:
            a, l2 = self.a, self.lam ** 2
            c = (1 - a) * l2 / math.pi
            x = l2 * A ** (-2 * (1 - a))
            n = _n_terms(x)
            tail = [((4 - 2 * a) + 2 * k * (1 - a), 0, c * (k + 1) * (-l2) ** k) for k in range(n)]
            log_tail = [(0.0, 0, math.log(c)), (0.0, 1, -(4 - 2 * a))]
            log_tail += [(2.0 * m * (1 - a), 0, -2 * (-1.0) ** (m + 1) / m * l2 ** m) for m in range(1, n)]
        else:
            return None
        return (LogPowerSeries.build(tail, TAIL, A), LogPowerSeries.build(log_tail, TAIL, A))

    def _unit_head(self, A: float):
        if self.family != K_MINIMIZER or self.a == 0.0:
            return None
        a, l2 = self.a, self.lam ** 2
        c = (1 - a) / (math.pi * l2)
        x = A ** (2 * (1 - a)) / l2
        n = _n_terms(x)
        head = [(2 * a - 2 * k * (1 - a), 0, c * (k + 1) * (-1.0 / l2) ** k) for k in range(n)]
        log_head = [(0.0, 0, math.log(c)), (0.0, 1, -2 * a)]
        log_head += [(-2.0 * m * (1 - a), 0, -2 * (-1.0) ** (m + 1) / m / l2 ** m) for m in range(1, n)]
        return (LogPowerSeries.build(head, HEAD, A), LogPowerSeries.build(log_head, HEAD, A))

    def _dress(self, pair):
        if pair is None:
            return None, None
        series, log_series = pair
        fac = self.M * self.scale ** 2
        return (series.scaled_argument(self.scale) * fac,
                log_series.scaled_argument(self.scale) + math.log(fac))

    def tail_series(self, anchor: float):
        """(rho, log rho) series beyond ``anchor``; ``(None, None)`` without a tail."""
        return self._dress(self._unit_tail(anchor * self.scale))

    def head_series(self, anchor: float):
        """(rho, log rho) series inside ``anchor`` for singular heads."""
        return self._dress(self._unit_head(anchor * self.scale))

    # -- discretization ----------------------------------------------------

    def on_grid(self, grid: RadialGrid) -> RadialDensity:
        """Sample on ``grid`` with exact tail and head corrections attached."""
        lo, hi = self.support
        if math.isfinite(hi) and hi > grid.R_max * (1 + 1e-12):
            raise GridError(f"support radius {hi:g} exceeds R_max={grid.R_max:g}")
        if self.family == GAUSSIAN:
            s = self.scale * grid.R_max
            if math.exp(-0.5 * s * s) > GAUSSIAN_TAIL_CUTOFF:
                raise GridError("Gaussian tail beyond R_max is not negligible; enlarge the grid")
        tail, log_tail = self.tail_series(grid.R_max)
        head = log_head = None
        if grid.has_head:
            head, log_head = self.head_series(grid.r_min)
        return RadialDensity(grid, self(grid.nodes), tail=tail, head=head, log_tail=log_tail,
                             log_head=log_head, mass=self.M, label=self.label)

    def wave_on_grid(self, grid: RadialGrid) -> WaveFunction:
        """``u = sqrt(rho)`` with its tail series."""
        rho = self.on_grid(grid)
        tail = None if rho.tail is None else rho.tail.power(0.5)
        return WaveFunction(grid, np.sqrt(rho.values), tail=tail, mass=self.M)


def default_grid_for(form: ClosedForm, N: int = 2048, R_max: float = 100.0) -> RadialGrid:
    """Geometric grid whose extent follows the form's scale."""
    lo, hi = form.support
    R = max(R_max / form.scale, 1.05 * hi if math.isfinite(hi) else 0.0)
    return make_radial_grid(N, R, GEOMETRIC)


# -- exact values ---------------------------------------------------------------


def sharp_constant(a: float, b: float, tol: float = 1e-12) -> float | None:
    """Known optimal ``C(a, b)`` for unit mass, or None where it is not known.

    ``b = 2a - 2`` with ``0 <= a < 1`` gives ``K(a)``; ``b = a - 2`` with
    ``a >= 0`` is attained by ``rho_star``; ``(0, -2)`` is the logHLS constant.
    """
    if abs(a) <= tol and abs(b + 2) <= tol:
        return -(1.0 + math.log(math.pi))
    if abs(b - (2 * a - 2)) <= tol and -tol <= a < 1:
        return -math.log(math.e * math.pi / (1 - a))
    if abs(b - (a - 2)) <= tol and a >= -tol:
        return a / 2 - 1 - math.log(math.pi)
    return None


def _require(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise KeyError(f"missing parameters {missing}")


def analytic_value(quantity: str, **p) -> float:
    """Exact value of a named identity.

    Known ids: ``entropy_rho_zeta`` (zeta, M), ``potential_moment_rho_zeta``
    (zeta, M), ``J_min`` (eta, M), ``K`` (a), ``logHLS_constant`` (M), ``C``
    (a, b), ``entropy_rho_star``, ``interaction_rho_star``,
    ``log_moment_rho_star``, ``kinetic_rho_star``, ``entropy_gaussian``,
    ``interaction_gaussian``, ``potential_moment_gaussian``,
    ``log_moment_gaussian``, ``kinetic_gaussian`` (all with M).
    """
    M = float(p.get("M", 1.0))
    if quantity == "entropy_rho_zeta":
        _require(p, "zeta")
        z = float(p["zeta"])
        if not z > 1:
            raise FamilyError("zeta must exceed 1")
        return M * (math.log((z - 1) / math.pi) - z / (z - 1))
    if quantity == "potential_moment_rho_zeta":
        _require(p, "zeta")
        z = float(p["zeta"])
        if not z > 1:
            raise FamilyError("zeta must exceed 1")
        return M / (z - 1)
    if quantity == "J_min":
        _require(p, "eta")
        eta = float(p["eta"])
        if not eta > 1:
            raise FamilyError("eta must exceed 1 (Lemma 2)")
        return M * math.log((eta - 1) / math.pi)
    if quantity == "K":
        _require(p, "a")
        a = float(p["a"])
        if not 0 <= a < 1:
            raise FamilyError("K(a) is defined for 0 <= a < 1 (Lemma 8)")
        return -math.log(math.e * math.pi / (1 - a))
    if quantity == "logHLS_constant":
        return M * (1.0 + math.log(math.pi))
    if quantity == "C":
        _require(p, "a", "b")
        c = sharp_constant(float(p["a"]), float(p["b"]))
        if c is None:
            raise KeyError(f"no known sharp constant at (a, b) = ({p['a']}, {p['b']})")
        return M * c
    table = {
        "entropy_rho_star": M * (-math.log(math.pi) - 2.0),
        "interaction_rho_star": 0.5 * M * M,
        "log_moment_rho_star": 0.0,
        "potential_moment_rho_star": M,
        "kinetic_rho_star": 2.0 * M / 3.0,
        "entropy_gaussian": -M * (1.0 + math.log(2 * math.pi)),
        "interaction_gaussian": M * M * (math.log(2.0) - EULER_GAMMA / 2),
        "potential_moment_gaussian": M * math.exp(0.5) * float(special.exp1(0.5)),
        "log_moment_gaussian": M * (math.log(2.0) - EULER_GAMMA),
        "kinetic_gaussian": 0.5 * M,
    }
    if quantity not in table:
        raise KeyError(f"unknown quantity {quantity!r}")
    return table[quantity]


# -- Lemma 8 change of variables --------------------------------------------------


def _compose_series(series: LogPowerSeries | None, a: float, log_shift: bool = False):
    """Series in ``s`` rewritten in ``r`` with ``s = r**(1/(1-a))``, times ``r**(2a/(1-a))``.

    ``log_shift`` treats the series as a logarithm: the weight becomes an added
    ``(2a/(1-a)) log r`` instead of a factor.
    """
    if series is None:
        return None
    p = 1.0 / (1.0 - a)
    items = [(q * p, j, c * p ** j) for q, j, c in series.terms]
    w = 2 * a / (1 - a)
    if log_shift:
        items.append((0.0, 1, w))
    else:
        items = [(q - w, j, c) for q, j, c in items]
    return LogPowerSeries.build(items, series.side, series.anchor ** (1 - a))


def radial_substitution(rho: RadialDensity, a: float) -> RadialDensity:
    """``tau(z) = |z|**(2a/(1-a)) * rho(|z|**(1/(1-a)))``.

    On a geometric grid the map sends nodes to nodes: ``tau`` lives on the
    geometric grid with endpoints ``r_min**(1-a)``, ``R_max**(1-a)`` and the same
    node count, so no interpolation is involved.  ``mass(tau) = (1-a) mass(rho)``.
    """
    if not 0 <= a < 1:
        raise FamilyError("the substitution needs 0 <= a < 1 (Lemma 8)")
    g = rho.grid
    if g.grading != GEOMETRIC:
        raise GridError("radial_substitution needs a geometric grid")
    if a == 0:
        return rho
    tg = make_radial_grid(g.N, g.R_max ** (1 - a), GEOMETRIC, r_min=g.r_min ** (1 - a))
    vals = tg.nodes ** (2 * a / (1 - a)) * rho.values
    head = rho.head_series()
    log_head = rho.log_head_series()
    return RadialDensity(
        tg, vals,
        tail=_compose_series(rho.tail, a),
        head=_compose_series(head, a),
        log_tail=_compose_series(rho.log_tail_series(), a, log_shift=True),
        log_head=_compose_series(log_head, a, log_shift=True),
        label=f"tau[{rho.label}],a={a:g}",
    )
