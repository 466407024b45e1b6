"""Energy terms on discretized densities and wave functions.

Radial integrals combine three pieces: the node quadrature, an exact series
integral beyond ``R_max`` and, when the density carries a head series, an exact
series integral on ``[0, r_min]``.  Interactions of radial densities use
Newton's theorem, ``I = int int rho rho log max(|x|, |y|)``, which turns into
``I = 2 int log|x| m(|x|) rho(x) dx`` with ``m`` the enclosed mass.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, signal

from .grids import (TINY, PlanarDensity, QuadratureError, RadialDensity, RadialGrid,
                    WaveFunction, xlogx)
from .series import HEAD, TAIL, LogPowerSeries

TWO_PI = 2.0 * math.pi
PLANAR_DIRECT_CAP = 4096
MASS_CHECK_RTOL = 1e-6
# truncated tails contributing more than this trigger a warning
TAIL_WARN = 1e-6


@dataclass(frozen=True)
class FreeEnergyParams:
    """Coefficients of ``c*entropy + a*potential_moment - (b/M)*interaction``."""

    a: float
    b: float
    c: float = 1.0
    M: float = 1.0

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("mass M must be positive")


@dataclass(frozen=True)
class SchrodingerParams:
    """Coefficients of the Schrödinger energy with mass constraint ``M``."""

    alpha: float
    beta: float
    gamma: float
    M: float = 1.0

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("mass M must be positive")


@dataclass(frozen=True, eq=False)
class RadialField:
    """Values on a radial grid plus an evaluator valid on all of ``(0, inf)``."""

    grid: RadialGrid
    values: np.ndarray
    _outside: object = None

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.grid.r_min) & (r <= self.grid.R_max)
        out = np.empty_like(r)
        out[inside] = np.interp(np.log(r[inside]), self.grid.log_nodes, self.values)
        if np.any(~inside):
            out[~inside] = self._outside(r[~inside])
        return out


# -- composite radial integration ------------------------------------------------


def _radial(rho_or_grid, nodal, tail: LogPowerSeries | None = None,
            head: LogPowerSeries | None = None) -> float:
    """``2*pi*int f r dr`` from nodal values and optional exact tail/head series."""
    grid = rho_or_grid if isinstance(rho_or_grid, RadialGrid) else rho_or_grid.grid
    nodal = np.asarray(nodal, dtype=float)
    if not np.all(np.isfinite(nodal)):
        raise QuadratureError("integrand has non-finite values")
    total = float(grid.weights @ nodal)
    if tail is not None:
        total += tail.integral()
    if head is not None and grid.has_head:
        total += head.integral() - grid.head_weight * nodal[0]
    return TWO_PI * total


def _mass_reference(rho, M: float | None) -> float:
    if M is None:
        return rho.mass
    if not M > 0:
        raise ValueError("mass M must be positive")
    return float(M)


def _check_mass(rho, M: float):
    if abs(rho.mass - M) > MASS_CHECK_RTOL * M:
        raise ValueError(f"density mass {rho.mass!r} differs from parameter M={M!r}")


# -- entropy, moments ------------------------------------------------------------


def rho_log_rho(rho: RadialDensity | PlanarDensity) -> float:
    """``int rho log rho`` with ``0 log 0 = 0``."""
    if isinstance(rho, PlanarDensity):
        return float(rho.grid.h ** 2 * xlogx(rho.values).sum())
    tail = None
    if rho.tail is not None:
        tail = rho.tail * rho.log_tail_series()
    head = None
    if rho.head is not None:
        head = rho.head * rho.log_head_series()
    return _radial(rho, xlogx(rho.values), tail, head)


def entropy(rho: RadialDensity | PlanarDensity, M: float | None = None) -> float:
    """``int rho log(rho / M)``; ``M`` defaults to the mass of ``rho``."""
    M = _mass_reference(rho, M)
    return rho_log_rho(rho) - rho.mass * math.log(M)


def potential_moment(rho: RadialDensity | PlanarDensity) -> float:
    """``int log(1 + |x|^2) rho``."""
    if isinstance(rho, PlanarDensity):
        X, Y = rho.grid.mesh()
        return float(rho.grid.h ** 2 * (np.log1p(X * X + Y * Y) * rho.values).sum())
    g = rho.grid
    tail = head = None
    if rho.tail is not None:
        tail = rho.tail * LogPowerSeries.log1p_r2(TAIL, g.R_max)
    if rho.head is not None and g.r_min < 1.0:
        head = rho.head * LogPowerSeries.log1p_r2(HEAD, g.r_min)
    return _radial(rho, np.log1p(g.nodes ** 2) * rho.values, tail, head)


def potential_moment_translated(rho: RadialDensity, x0: float) -> float:
    """``int log(1 + |x|^2) rho(x - x0) dx`` for radial ``rho``.

    Uses the exact angular mean
    ``<log(A + B cos t)> = log((A + sqrt(A^2 - B^2)) / 2)`` with
    ``A = 1 + r^2 + |x0|^2`` and ``B = 2 r |x0|``.  Beyond ``R_max`` the
    untranslated weight ``log(1 + r^2)`` is used; the resulting error is of order
    ``|x0|^2 / R_max^2`` times the tail mass and is reported when it matters.
    """
    g = rho.grid
    x0 = abs(float(x0))
    r = g.nodes
    A = 1.0 + r * r + x0 * x0
    B = 2.0 * r * x0
    # A^2 - B^2 = (1 + (r - x0)^2)(1 + (r + x0)^2), avoids cancellation
    disc = np.sqrt((1.0 + (r - x0) ** 2) * (1.0 + (r + x0) ** 2))
    weight = np.log(0.5 * (A + disc))
    tail = None
    if rho.tail is not None:
        tail = rho.tail * LogPowerSeries.log1p_r2(TAIL, g.R_max)
        tail_mass = rho.tail.integral() * TWO_PI
        err = tail_mass * (x0 / g.R_max) ** 2
        if err > TAIL_WARN * max(1.0, abs(rho.mass)):
            warnings.warn(f"translated tail approximation error up to {err:.2e}", RuntimeWarning)
    head = None
    if rho.head is not None:
        head = rho.head * math.log(0.5 * (1.0 + x0 * x0 + math.sqrt((1 + x0 * x0) ** 2)))
    return _radial(rho, weight * rho.values, tail, head)


def log_moment(rho: RadialDensity | PlanarDensity) -> float:
    """``int 2 log|x| rho``."""
    if isinstance(rho, PlanarDensity):
        X, Y = rho.grid.mesh()
        r2 = X * X + Y * Y
        if np.any((r2 == 0) & (rho.values > 0)):
            raise QuadratureError("mass sits on the origin cell center; log moment diverges there")
        with np.errstate(divide="ignore"):
            w = np.where(r2 > 0, np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
        return float(rho.grid.h ** 2 * (w * rho.values).sum())
    g = rho.grid
    tail = None if rho.tail is None else rho.tail.times_log() * 2.0
    head = None if rho.head is None else rho.head.times_log() * 2.0
    if rho.head is None and g.has_head:
        # constant head: int_0^r0 2 log s * rho0 * s ds, exact
        r0 = g.r_min
        head_exact = rho.values[0] * r0 * r0 * (math.log(r0) - 0.5)
        nodal = 2.0 * g.log_nodes * rho.values
        return _radial(rho, nodal, tail) + TWO_PI * (head_exact - g.head_weight * nodal[0])
    return _radial(rho, 2.0 * g.log_nodes * rho.values, tail, head)


# -- Newton-kernel interaction and the Poisson potential -----------------------


def _enclosed(rho: RadialDensity):
    """(mass inside each node, tail mass series, head mass series)."""
    m = rho.cumulative_mass()
    head_m = None
    if rho.head is not None and rho.grid.has_head:
        head_m = rho.head.head_antiderivative() * TWO_PI
    return m, head_m


def interaction(rho: RadialDensity) -> float:
    """``I = int int rho(x) rho(y) log|x - y|`` for radial ``rho`` (Newton's theorem)."""
    if not isinstance(rho, RadialDensity):
        raise TypeError("interaction needs a RadialDensity; use interaction_planar otherwise")
    g = rho.grid
    m, head_m = _enclosed(rho)
    nodal = 2.0 * g.log_nodes * m * rho.values
    tail = head = None
    if rho.tail is not None:
        outside = rho.tail.tail_antiderivative() * TWO_PI
        tail = rho.tail.times_log() * (outside * -1.0 + rho.mass) * 2.0
    if head_m is not None:
        head = rho.head.times_log() * head_m * 2.0
    return _radial(rho, nodal, tail, head)


def interaction_newton_direct(rho: RadialDensity) -> float:
    """O(N^2) double sum of the Newton kernel ``log max(s, s')`` (cross-check only)."""
    g = rho.grid
    if rho.tail is not None or rho.head is not None:
        raise ValueError("the direct Newton sum ignores tails and heads; pass a compact density")
    w = TWO_PI * g.weights * rho.values
    L = np.maximum.outer(g.log_nodes, g.log_nodes)
    return float(w @ L @ w)


def poisson_potential(rho: RadialDensity) -> RadialField:
    """``W = (-Delta)^{-1} rho`` with the Green kernel ``-log|x - y| / (2 pi)``.

    Radially ``W(r) = -(1/2pi) [ log r m(r) + int_{|y|>r} log|y| rho(y) dy ]``.
    """
    g = rho.grid
    m, head_m = _enclosed(rho)
    logw = g.log_nodes * rho.values
    total_log = 0.5 * log_moment(rho)
    cum_log = TWO_PI * g.cumulative(logw)
    if rho.head is not None and g.has_head:
        cum_log = cum_log + TWO_PI * (rho.head.times_log().integral() - g.head_weight * logw[0])
    elif g.has_head:
        r0 = g.r_min
        cum_log = cum_log + TWO_PI * (rho.values[0] * 0.5 * r0 * r0 * (math.log(r0) - 0.5)
                                      - g.head_weight * logw[0])
    values = -(g.log_nodes * m + (total_log - cum_log)) / TWO_PI

    tail_m = tail_log = None
    if rho.tail is not None:
        tail_m = rho.tail.tail_antiderivative() * TWO_PI
        tail_log = rho.tail.times_log().tail_antiderivative() * TWO_PI
    M = rho.mass
    v0 = rho.values[0]

    def outside(r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        big = r > g.R_max
        if np.any(big):
            rb = r[big]
            mb = M - (tail_m(rb) if tail_m is not None else 0.0)
            lb = tail_log(rb) if tail_log is not None else 0.0
            out[big] = -(np.log(rb) * mb + lb) / TWO_PI
        small = ~big
        if np.any(small):
            rs = np.maximum(r[small], TINY)
            ls = np.log(rs)
            if head_m is not None:
                ms = head_m(rs)
                inner_log = TWO_PI * rho.head.times_log().head_antiderivative()(rs)
            else:
                ms = math.pi * v0 * rs * rs
                inner_log = math.pi * v0 * rs * rs * (ls - 0.5)
            out[small] = -(ls * ms + total_log - inner_log) / TWO_PI
        return out

    return RadialField(g, values, outside)


# -- planar interaction -----------------------------------------------------------


@lru_cache(maxsize=1)
def self_cell_constant() -> float:
    """``c0``: mean of ``log|x - y|`` for independent uniform points in the unit square.

    Computed once by adaptive quadrature over the difference density
    ``(1-|u|)(1-|v|)`` on ``[-1, 1]^2``, folded onto the triangle ``0 <= v <= u <= 1``.
    """
    val, _ = integrate.dblquad(lambda v, u: 4.0 * (1 - u) * (1 - v) * 0.5 * math.log(u * u + v * v),
                               0.0, 1.0, 0.0, lambda u: u, epsabs=1e-14, epsrel=1e-13)
    return 2.0 * val


def _planar_kernel(n: int, h: float) -> np.ndarray:
    k = np.arange(-(n - 1), n, dtype=float)
    KX, KY = np.meshgrid(k, k, indexing="ij")
    d2 = KX * KX + KY * KY
    d2[n - 1, n - 1] = 1.0
    ker = 0.5 * np.log(d2) + math.log(h)
    ker[n - 1, n - 1] = math.log(h) + self_cell_constant()
    return ker


def interaction_planar(rho: PlanarDensity, method: str = "fft",
                       max_cells: int = PLANAR_DIRECT_CAP) -> float:
    """Cell-pair sum ``sum_pq m_p m_q K(p - q)`` of the logarithmic kernel.

    ``K = log(h |p - q|)`` off the diagonal and ``log h + c0`` on it.  The
    ``fft`` method evaluates the same sum as a linear convolution; ``direct``
    loops over pairs and refuses grids above ``max_cells`` cells.
    """
    g = rho.grid
    n = g.n
    m = rho.cell_masses
    if method == "direct":
        if n * n > max_cells:
            raise ValueError(f"{n * n} cells exceed the direct-sum cap of {max_cells}")
        c = g.centers
        X, Y = np.meshgrid(c, c, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        mf = m.ravel()
        total = 0.0
        for i in range(0, len(pts), 256):
            d = np.hypot(pts[i:i + 256, None, 0] - pts[None, :, 0], pts[i:i + 256, None, 1] - pts[None, :, 1])
            with np.errstate(divide="ignore"):
                K = np.where(d > 0, np.log(np.where(d > 0, d, 1.0)), math.log(g.h) + self_cell_constant())
            total += float(mf[i:i + 256] @ K @ mf)
        return total
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    conv = signal.fftconvolve(m, _planar_kernel(n, g.h), mode="valid")
    return float((m * conv).sum())


# -- kinetic energy ------------------------------------------------------------------


def kinetic(u: WaveFunction) -> float:
    """``int |grad u|^2 = 2 pi int u'(r)^2 r dr`` (finite differences in log r)."""
    g = u.grid
    du = g.derivative_matrix @ u.values
    tail = None
    if u.tail is not None:
        d = u.tail.derivative()
        tail = d * d
    return _radial(g, du * du, tail)


# -- composite functionals ------------------------------------------------------------


def free_energy(rho: RadialDensity | PlanarDensity, p: FreeEnergyParams) -> float:
    """``c int rho log(rho/M) + a int log(1+|x|^2) rho - (b/M) I[rho]``."""
    _check_mass(rho, p.M)
    inter = interaction(rho) if isinstance(rho, RadialDensity) else interaction_planar(rho)
    return p.c * entropy(rho, p.M) + p.a * potential_moment(rho) - p.b / p.M * inter


def free_energy_terms(rho, p: FreeEnergyParams) -> dict:
    """Term breakdown of :func:`free_energy`."""
    _check_mass(rho, p.M)
    inter = interaction(rho) if isinstance(rho, RadialDensity) else interaction_planar(rho)
    ent = entropy(rho, p.M)
    pot = potential_moment(rho)
    return {"entropy": ent, "potential_moment": pot, "interaction": inter,
            "energy": p.c * ent + p.a * pot - p.b / p.M * inter}


def g_functional(rho: RadialDensity, a: float) -> float:
    """``int rho log(rho/M) + a int 2 log|x| rho - (2(a-1)/M) I[rho]``.

    At unit mass this is the scale-invariant functional whose infimum is
    ``K(a)``; the ``1/M`` scaling makes it homogeneous of degree one in mass.
    """
    M = rho.mass
    return entropy(rho, M) + a * log_moment(rho) - 2.0 * (a - 1.0) / M * interaction(rho)


def j_functional(rho: RadialDensity | PlanarDensity, eta: float) -> float:
    """``int rho log(rho/M) + eta int log(1+|x|^2) rho``."""
    return entropy(rho) + eta * potential_moment(rho)


def schrodinger_terms(u: WaveFunction, p: SchrodingerParams) -> dict:
    """Kinetic, trap, Poisson and logarithmic terms of the Schrödinger energy."""
    _check_mass(u, p.M)
    rho = u.density()
    kin = kinetic(u)
    trap = 2.0 * potential_moment(rho)
    inter = interaction(rho)
    loc = rho_log_rho(rho)
    # 2 pi beta int W u^2 = -beta I
    return {"kinetic": kin, "trap": trap, "interaction": inter, "local": loc,
            "energy": kin + p.alpha * trap - p.beta * inter + p.gamma * loc}


def schrodinger_energy(u: WaveFunction, p: SchrodingerParams) -> float:
    """``int |grad u|^2 + alpha int V u^2 + 2 pi beta int W u^2 + gamma int u^2 log u^2``."""
    return schrodinger_terms(u, p)["energy"]
