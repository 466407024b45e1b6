"""Radial and planar discretizations with the quadrature rules used everywhere.

Radial grids are uniform in a parameter ``t``: ``t = log r`` for the geometric
grading and ``t = r`` for the uniform one.  Integrals of ``f(r) r dr`` are done
in ``t`` with a composite 8-point Newton-Cotes-type cell rule (each cell
integrated by the interpolating polynomial on the nearest 8 nodes), so the
cumulative integral at every node is available at the same order as the total.

On the geometric grid the disk ``[0, r_min]`` below the first node is the
*head*; by default the integrand is taken constant there, and a
:class:`~loglab.series.LogPowerSeries` head replaces that assumption when a
density is singular at the origin.  Mass beyond ``R_max`` is the *tail*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline

from .series import HEAD, TAIL, LogPowerSeries

GEOMETRIC = "geometric"
UNIFORM = "uniform"

MIN_NODES = 16
DEFAULT_N = 2048
DEFAULT_R_MAX = 100.0
# geometric grids start at R_max * GEOMETRIC_SPAN
GEOMETRIC_SPAN = 1e-8
MASS_RTOL = 1e-6
TINY = 1e-300

_CELL_ORDER = 8
_DIFF_ORDER = 7


class GridError(ValueError):
    """Unusable discretization parameters."""


class QuadratureError(ValueError):
    """Non-finite integrand or an integral the grid cannot resolve."""


def _cell_coefficients(n: int, order: int = _CELL_ORDER):
    """Stencil start and weights integrating each cell ``[t_i, t_i+1]`` (unit step)."""
    p = min(order, n)
    lo = np.empty(n - 1, dtype=int)
    coef = np.empty((n - 1, p))
    cache: dict[int, np.ndarray] = {}
    for i in range(n - 1):
        start = min(max(i - (p // 2 - 1), 0), n - p)
        lo[i] = start
        shift = start - i
        if shift not in cache:
            offs = np.arange(shift, shift + p, dtype=float)
            vand = np.vander(offs, p, increasing=True).T
            cache[shift] = np.linalg.solve(vand, 1.0 / np.arange(1, p + 1))
        coef[i] = cache[shift]
    return lo, coef


def _derivative_coefficients(n: int, order: int = _DIFF_ORDER) -> sp.csr_matrix:
    """Finite-difference d/dt on a unit-step grid, centered where possible."""
    p = min(order, n)
    rows, cols, vals = [], [], []
    cache: dict[int, np.ndarray] = {}
    for i in range(n):
        start = min(max(i - p // 2, 0), n - p)
        shift = start - i
        if shift not in cache:
            offs = np.arange(shift, shift + p, dtype=float)
            vand = np.vander(offs, p, increasing=True).T
            rhs = np.zeros(p)
            rhs[1] = 1.0
            cache[shift] = np.linalg.solve(vand, rhs)
        rows.extend([i] * p)
        cols.extend(range(start, start + p))
        vals.extend(cache[shift])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes and weights for ``int_0^R_max f(r) r dr``.

    ``weights`` already include the head disk ``[0, nodes[0]]`` for the
    geometric grading (integrand taken constant there).
    """

    nodes: np.ndarray
    weights: np.ndarray
    R_max: float
    grading: str
    step: float
    _lo: np.ndarray = field(repr=False)
    _coef: np.ndarray = field(repr=False)
    _jac: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def has_head(self) -> bool:
        return self.grading == GEOMETRIC

    @property
    def head_weight(self) -> float:
        return 0.5 * self.r_min ** 2 if self.has_head else 0.0

    def describe(self) -> dict:
        return {"N": self.N, "R_max": self.R_max, "grading": self.grading, "r_min": self.r_min}

    # -- cumulative integration --------------------------------------------

    def _full(self, f: np.ndarray) -> np.ndarray:
        # uniform grids carry a virtual origin node whose integrand f*r vanishes
        if self.grading == UNIFORM:
            return np.concatenate(([0.0], f))
        return f

    def cell_integrals(self, f: np.ndarray) -> np.ndarray:
        """``int f r dr`` over each cell between consecutive (internal) nodes."""
        g = self._full(np.asarray(f, dtype=float)) * self._jac
        p = self._coef.shape[1]
        idx = self._lo[:, None] + np.arange(p)[None, :]
        return self.step * np.einsum("ij,ij->i", self._coef, g[idx])

    def cumulative(self, f: np.ndarray) -> np.ndarray:
        """``int_0^{r_i} f(s) s ds`` at every node (constant head assumed)."""
        f = np.asarray(f, dtype=float)
        cum = np.concatenate(([0.0], np.cumsum(self.cell_integrals(f))))
        if self.grading == UNIFORM:
            return cum[1:]
        return cum + self.head_weight * f[0]

    @cached_property
    def cumulative_matrix(self) -> np.ndarray:
        """Dense matrix ``C`` with ``C @ f == cumulative(f)``."""
        n = self.N
        full_n = n + 1 if self.grading == UNIFORM else n
        cells = np.zeros((full_n - 1, full_n))
        p = self._coef.shape[1]
        for i in range(full_n - 1):
            sl = slice(self._lo[i], self._lo[i] + p)
            cells[i, sl] = self.step * self._coef[i] * self._jac[sl]
        cum = np.vstack([np.zeros(full_n), np.cumsum(cells, axis=0)])
        if self.grading == UNIFORM:
            return np.ascontiguousarray(cum[1:, 1:])
        cum[:, 0] += self.head_weight
        return cum

    @cached_property
    def derivative_matrix(self) -> sp.csr_matrix:
        """Sparse ``d/dr`` on the nodes (finite differences in ``t``)."""
        d_t = _derivative_coefficients(self.N) / self.step
        drdt = self.nodes if self.grading == GEOMETRIC else np.ones(self.N)
        return sp.diags(1.0 / drdt) @ d_t

    @cached_property
    def log_nodes(self) -> np.ndarray:
        return np.log(self.nodes)


@lru_cache(maxsize=32)
def make_radial_grid(N: int = DEFAULT_N, R_max: float = DEFAULT_R_MAX,
                     grading: str = GEOMETRIC, r_min: float | None = None) -> RadialGrid:
    """Build a radial grid on ``[0, R_max]``.

    Parameters
    ----------
    N : int
        Node count, at least 16.
    R_max : float
        Truncation radius.
    grading : {"geometric", "uniform"}
        ``geometric`` spaces nodes uniformly in ``log r`` from ``r_min`` to
        ``R_max`` and clusters them near the origin.
    r_min : float, optional
        First node of a geometric grid; defaults to ``R_max * 1e-8``.
    """
    if N < MIN_NODES:
        raise GridError(f"need at least {MIN_NODES} radial nodes, got {N}")
    if not R_max > 0:
        raise GridError(f"R_max must be positive, got {R_max}")
    if grading == GEOMETRIC:
        r_min = R_max * GEOMETRIC_SPAN if r_min is None else float(r_min)
        if not 0 < r_min < R_max:
            raise GridError("need 0 < r_min < R_max")
        t = np.linspace(math.log(r_min), math.log(R_max), N)
        step = t[1] - t[0]
        nodes = np.exp(t)
        nodes[-1] = R_max
        jac = nodes ** 2
        lo, coef = _cell_coefficients(N)
    elif grading == UNIFORM:
        step = R_max / N
        t = step * np.arange(N + 1)
        t[-1] = R_max
        nodes = t[1:]
        jac = t.copy()
        lo, coef = _cell_coefficients(N + 1)
    else:
        raise GridError(f"unknown grading {grading!r}")

    full_n = len(jac)
    w_full = np.zeros(full_n)
    p = coef.shape[1]
    for i in range(full_n - 1):
        w_full[lo[i]:lo[i] + p] += coef[i]
    w_full *= step * jac
    if grading == UNIFORM:
        weights = w_full[1:]
    else:
        weights = w_full
        weights[0] += 0.5 * nodes[0] ** 2
    if np.any(weights <= 0):
        raise GridError("quadrature produced non-positive weights")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return RadialGrid(nodes, weights, float(R_max), grading, float(step), lo, coef, jac)


def integrate_radial(grid: RadialGrid, values, tail: LogPowerSeries | None = None,
                     head: LogPowerSeries | None = None) -> float:
    """``2*pi * int f(r) r dr`` over the plane.

    ``tail`` adds the exact integral beyond ``R_max``; ``head`` replaces the
    constant-head assumption on ``[0, r_min]`` of a geometric grid.
    """
    f = np.asarray(values, dtype=float)
    if f.shape != grid.nodes.shape:
        raise QuadratureError("values do not match the grid")
    if not np.all(np.isfinite(f)):
        raise QuadratureError("integrand has non-finite values")
    total = float(grid.weights @ f)
    if head is not None and grid.has_head:
        total += head.reanchor(grid.r_min).integral() - grid.head_weight * f[0]
    if tail is not None:
        total += tail.reanchor(grid.R_max).integral()
    return 2.0 * math.pi * total


def xlogx(x: np.ndarray) -> np.ndarray:
    """``x log x`` with the continuous extension ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > TINY
    out[pos] = x[pos] * np.log(x[pos])
    return out


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Nonnegative radial density sampled on a :class:`RadialGrid`.

    ``tail`` / ``head`` are optional series for the density beyond ``R_max`` and
    inside ``r_min``; ``log_tail`` / ``log_head`` optionally give ``log rho`` on
    the same regions (needed when the density series cannot be log-expanded).
    """

    grid: RadialGrid
    values: np.ndarray
    tail: LogPowerSeries | None = None
    head: LogPowerSeries | None = None
    log_tail: LogPowerSeries | None = None
    log_head: LogPowerSeries | None = None
    mass: float | None = None
    label: str = ""
    mass_rtol: float = MASS_RTOL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError("density values do not match the grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("density has non-finite values")
        if np.any(v < 0):
            raise ValueError("density must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        for name, side, anchor in (("tail", TAIL, self.grid.R_max), ("log_tail", TAIL, self.grid.R_max),
                                   ("head", HEAD, self.grid.r_min), ("log_head", HEAD, self.grid.r_min)):
            s = getattr(self, name)
            if s is None:
                continue
            if s.side != side:
                raise ValueError(f"{name} must be a {side} series")
            object.__setattr__(self, name, s.reanchor(anchor))
        if self.tail is not None and self.tail.lead()[0] <= 2.0:
            raise ValueError("tail exponent must exceed 2 for finite mass")
        quad_mass = integrate_radial(self.grid, v, self.tail, self.head)
        if self.mass is not None and abs(quad_mass - self.mass) > self.mass_rtol * abs(self.mass):
            raise ValueError(f"quadrature mass {quad_mass!r} does not match declared mass {self.mass!r}")
        if not quad_mass > 0:
            raise ValueError("density must have positive mass")
        object.__setattr__(self, "mass", quad_mass)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def head_series(self) -> LogPowerSeries | None:
        """Head used by the functionals: explicit, else constant at the first node."""
        if not self.grid.has_head:
            return None
        if self.head is not None:
            return self.head
        return LogPowerSeries.constant(float(self.values[0]), HEAD, self.grid.r_min)

    def log_head_series(self) -> LogPowerSeries | None:
        if not self.grid.has_head:
            return None
        if self.log_head is not None:
            return self.log_head
        h = self.head_series()
        return h.log() if h.terms else None

    def log_tail_series(self) -> LogPowerSeries | None:
        if self.log_tail is not None:
            return self.log_tail
        return None if self.tail is None else self.tail.log()

    def integrate(self, f, tail=None, head=None) -> float:
        return integrate_radial(self.grid, f, tail, head)

    def cumulative_mass(self) -> np.ndarray:
        """Mass inside each node radius."""
        head = self.head
        cum = self.grid.cumulative(self.values)
        if head is not None and self.grid.has_head:
            cum = cum + head.integral() - self.grid.head_weight * self.values[0]
        return 2.0 * math.pi * cum

    def effective_radius(self, fraction: float = 0.99) -> float:
        """Smallest node radius enclosing ``fraction`` of the mass."""
        cm = self.cumulative_mass()
        idx = int(np.searchsorted(cm, fraction * self.mass))
        if idx >= self.grid.N:
            return math.inf
        return float(self.grid.nodes[idx])

    @cached_property
    def _spline(self):
        return CubicSpline(self.grid.log_nodes, self.values)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (r >= self.grid.r_min) & (r <= self.grid.R_max)
        out[inside] = self._spline(np.log(r[inside]))
        low = r < self.grid.r_min
        if np.any(low):
            h = self.head_series()
            out[low] = h(np.maximum(r[low], TINY)) if h is not None else self.values[0]
        high = r > self.grid.R_max
        if np.any(high) and self.tail is not None:
            out[high] = self.tail(r[high])
        return np.maximum(out, 0.0)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Real radial wave function; ``mass = 2*pi * int u^2 r dr``.

    ``tail`` optionally describes ``u`` beyond ``R_max``.
    """

    grid: RadialGrid
    values: np.ndarray
    tail: LogPowerSeries | None = None
    mass: float | None = None
    mass_rtol: float = MASS_RTOL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape or not np.all(np.isfinite(v)):
            raise ValueError("wave function values must be finite and match the grid")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.tail is not None:
            object.__setattr__(self, "tail", self.tail.reanchor(self.grid.R_max))
        quad_mass = integrate_radial(self.grid, v * v, self.density_tail())
        if self.mass is not None and abs(quad_mass - self.mass) > self.mass_rtol * abs(self.mass):
            raise ValueError(f"quadrature mass {quad_mass!r} does not match declared mass {self.mass!r}")
        if not quad_mass > 0:
            raise ValueError("wave function must have positive mass")
        object.__setattr__(self, "mass", quad_mass)
        du = self.grid.derivative_matrix @ v
        if not np.isfinite(self.grid.weights @ (du * du)):
            raise ValueError("wave function has infinite kinetic energy on this grid")

    def density_tail(self) -> LogPowerSeries | None:
        return None if self.tail is None else self.tail * self.tail

    def density(self) -> RadialDensity:
        return RadialDensity(self.grid, self.values ** 2, tail=self.density_tail())

    def with_values(self, values) -> "WaveFunction":
        return WaveFunction(self.grid, values, tail=None)

    @classmethod
    def from_density(cls, rho: RadialDensity) -> "WaveFunction":
        tail = None
        if rho.tail is not None:
            tail = rho.tail.power(0.5)
        return cls(rho.grid, np.sqrt(rho.values), tail=tail)


# -- planar -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PlanarGrid:
    """Square grid of ``n x n`` cells of side ``h`` covering ``[-L, L]^2``."""

    h: float
    L: float

    def __post_init__(self):
        if not (self.h > 0 and self.L > 0):
            raise GridError("planar grid needs h > 0 and L > 0")
        n = 2.0 * self.L / self.h
        if abs(n - round(n)) > 1e-9 * n:
            raise GridError("2L must be an integer multiple of h")

    @property
    def n(self) -> int:
        return int(round(2.0 * self.L / self.h))

    @cached_property
    def centers(self) -> np.ndarray:
        return -self.L + self.h * (np.arange(self.n) + 0.5)

    def mesh(self):
        c = self.centers
        return np.meshgrid(c, c, indexing="ij")


@dataclass(frozen=True, eq=False)
class PlanarDensity:
    """Cell-center values on a :class:`PlanarGrid`; ``mass = h^2 * sum(values)``."""

    grid: PlanarGrid
    values: np.ndarray
    mass: float | None = None
    mass_rtol: float = MASS_RTOL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError("planar values do not match the grid")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("planar density must be finite and nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        quad_mass = float(self.grid.h ** 2 * v.sum())
        if self.mass is not None and abs(quad_mass - self.mass) > self.mass_rtol * abs(self.mass):
            raise ValueError("planar mass does not match declared mass")
        object.__setattr__(self, "mass", quad_mass)

    @property
    def cell_masses(self) -> np.ndarray:
        return self.grid.h ** 2 * self.values


def sample_planar(profile, center=(0.0, 0.0), grid: PlanarGrid | None = None,
                  mass_fraction: float = 0.99, cutoff: float | None = None,
                  renormalize: bool = True) -> PlanarDensity:
    """Sample a radial profile translated to ``center`` at cell centers.

    ``profile`` is any callable of ``r`` exposing ``mass`` (or ``M``) and
    ``effective_radius(fraction)`` (a :class:`RadialDensity` or a closed form).
    The sampled mass is renormalized to ``profile.mass`` unless
    ``renormalize`` is false.  ``cutoff`` zeroes cells farther than that from
    ``center`` (use it to compare against a radially truncated profile).
    """
    if grid is None:
        raise GridError("a PlanarGrid is required")
    cx, cy = map(float, center)
    reach = profile.effective_radius(mass_fraction)
    if max(abs(cx), abs(cy)) + reach > grid.L:
        raise GridError(
            f"profile reach {reach:.3g} around ({cx:g}, {cy:g}) exceeds the grid half-width {grid.L:g}")
    X, Y = grid.mesh()
    dist = np.hypot(X - cx, Y - cy)
    vals = np.asarray(profile(dist), dtype=float)
    if cutoff is not None:
        vals = np.where(dist <= cutoff, vals, 0.0)
    if not renormalize:
        return PlanarDensity(grid, vals)
    total = grid.h ** 2 * vals.sum()
    if not total > 0:
        raise GridError("profile vanishes on every cell")
    mass = getattr(profile, "mass", None)
    if mass is None:
        mass = profile.M
    return PlanarDensity(grid, vals * (mass / total))
