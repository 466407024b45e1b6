"""Radial finite-volume solver for the drift-diffusion gradient flow of ``F_{a,b}``.

    d rho / dt = div( rho grad( log rho + a log(1+|x|^2) + (4 pi b / M) W ) )

Cells are the annuli between midpoints of consecutive grid nodes (the first
cell is the disk around the origin).  Face fluxes use the Scharfetter-Gummel
exponential fitting, whose discrete steady states are exactly
``rho_i ~ exp(-phi_i)``; time stepping is implicit Euler by default, which
keeps the scheme positive and dissipates the discrete free energy for any step
when ``b = 0``.  For ``b != 0`` the Poisson potential is lagged one step and
rejected steps are retried with half the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .functionals import FreeEnergyParams
from .grids import TINY, RadialDensity, RadialGrid, make_radial_grid

IMPLICIT = "implicit"
EXPLICIT = "explicit"
FLOOR = 1e-300
CFL_SAFETY = 0.25
MONOTONE_TOL = 1e-8


class FlowError(RuntimeError):
    """Unstable or invalid flow configuration."""


@dataclass(frozen=True, eq=False)
class FVMesh:
    """Finite-volume cells built from the nodes of a radial grid."""

    grid: RadialGrid
    faces: np.ndarray
    volumes: np.ndarray
    areas: np.ndarray
    spacing: np.ndarray
    kernel: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def n(self) -> int:
        return self.grid.N


def _cell_kernel(faces: np.ndarray) -> np.ndarray:
    """Cell-averaged Newton kernel ``<log max(|x|, |y|)>`` over pairs of annuli.

    Off the diagonal the outer annulus decides, so the entry is the area mean of
    ``log s`` over the outer cell; the diagonal has a closed form in ``u = s^2``.
    """
    A = faces[:-1] ** 2
    B = faces[1:] ** 2

    def u_log_u(u):
        return np.where(u > 0, u * np.log(np.maximum(u, TINY)), 0.0)

    # mean of log s = (1/2) mean of log u over [A, B] in u
    mean_log = 0.5 * ((u_log_u(B) - B) - (u_log_u(A) - A)) / (B - A)

    def prim(u, a):
        # int log(u) (u - a) du
        return 0.5 * u_log_u(u) * u - 0.25 * u * u - a * (u_log_u(u) - u)

    diag = 0.5 * 2.0 * (prim(B, A) - prim(A, A)) / (B - A) ** 2
    n = len(A)
    idx = np.arange(n)
    K = mean_log[np.maximum.outer(idx, idx)]
    K[idx, idx] = diag
    return K


def make_mesh(grid: RadialGrid) -> FVMesh:
    r = grid.nodes
    faces = np.concatenate(([0.0], 0.5 * (r[1:] + r[:-1]), [grid.R_max]))
    if grid.R_max <= r[-1]:
        faces[-1] = r[-1] + 0.5 * (r[-1] - r[-2])
    volumes = math.pi * (faces[1:] ** 2 - faces[:-1] ** 2)
    areas = 2.0 * math.pi * faces[1:-1]
    spacing = np.diff(r)
    return FVMesh(grid, faces, volumes, areas, spacing, _cell_kernel(faces))


def default_flow_grid(N: int = 400, R_max: float = 100.0, r_min: float = 1e-3) -> RadialGrid:
    return make_radial_grid(N, R_max, "geometric", r_min=r_min)


# -- discrete energy, potentials and fluxes ------------------------------------------------


def _bernoulli(x: np.ndarray) -> np.ndarray:
    """``B(x) = x / (exp(x) - 1)`` with the removable singularity at 0."""
    out = np.empty_like(x)
    small = np.abs(x) < 1e-8
    out[small] = 1.0 - 0.5 * x[small]
    xs = x[~small]
    out[~small] = xs / np.expm1(xs)
    return out


def discrete_potential(mesh: FVMesh, rho: np.ndarray) -> np.ndarray:
    """``W`` at the cells, consistent with the cell-averaged kernel."""
    return -(mesh.kernel @ (mesh.volumes * rho)) / (2.0 * math.pi)


def total_potential(mesh: FVMesh, rho: np.ndarray, p: FreeEnergyParams) -> np.ndarray:
    """``phi = a log(1+r^2) + (4 pi b / M) W`` divided by the entropy weight ``c``."""
    phi = p.a * np.log1p(mesh.r ** 2)
    if p.b != 0.0:
        phi = phi + 4.0 * math.pi * p.b / p.M * discrete_potential(mesh, rho)
    return phi / p.c


def discrete_free_energy(mesh: FVMesh, rho: np.ndarray, p: FreeEnergyParams) -> float:
    """``sum V [c rho log(rho/M) + a log(1+r^2) rho] - (b/M) sum m_i m_j K_ij``."""
    V = mesh.volumes
    r = np.maximum(rho, FLOOR)
    ent = float(V @ (rho * np.log(r / p.M)))
    pot = float(V @ (np.log1p(mesh.r ** 2) * rho))
    out = p.c * ent + p.a * pot
    if p.b != 0.0:
        m = V * rho
        out -= p.b / p.M * float(m @ mesh.kernel @ m)
    return out


def _chemical(mesh, rho, p):
    return np.log(np.maximum(rho, FLOOR)) + total_potential(mesh, rho, p)


def drift_field(mesh: FVMesh, rho: np.ndarray, p: FreeEnergyParams) -> np.ndarray:
    """``d/dr (log rho + phi)`` at the interior faces."""
    mu = _chemical(mesh, rho, p)
    return np.diff(mu) / mesh.spacing


def face_fluxes(mesh: FVMesh, rho: np.ndarray, phi: np.ndarray, c: float = 1.0) -> np.ndarray:
    """Outward Scharfetter-Gummel fluxes across the interior faces."""
    d = np.diff(phi)
    return c * (_bernoulli(d) * rho[:-1] - _bernoulli(-d) * rho[1:]) / mesh.spacing


def dissipation(mesh: FVMesh, rho: np.ndarray, p: FreeEnergyParams) -> float:
    """Discrete ``int rho |grad(log rho + phi)|^2``: ``sum_f A_f J_f (mu_i - mu_{i+1})``."""
    phi = total_potential(mesh, rho, p)
    J = face_fluxes(mesh, rho, phi, p.c)
    mu = np.log(np.maximum(rho, FLOOR)) + phi
    return float(np.sum(mesh.areas * J * (mu[:-1] - mu[1:])))


def _operator_bands(mesh: FVMesh, phi: np.ndarray, c: float):
    """Banded form of ``L`` with ``V d rho/dt = -L rho``."""
    d = np.diff(phi)
    g = mesh.areas * c / mesh.spacing
    bp = g * _bernoulli(d)      # weight of rho_i in the flux i -> i+1
    bm = g * _bernoulli(-d)     # weight of rho_{i+1}
    n = mesh.n
    diag = np.zeros(n)
    diag[:-1] += bp
    diag[1:] += bm
    upper = -bm                 # L[i, i+1]
    lower = -bp                 # L[i+1, i]
    return diag, upper, lower


# -- configuration and state -----------------------------------------------------------------


@dataclass(frozen=True)
class FlowConfig:
    """Parameters of a flow run.

    ``dt`` is the initial step; implicit runs grow it by ``growth`` up to
    ``dt_max`` after accepted steps.  A run stops when ``|dF| / (dt max(1, |F|))``
    drops below ``stop`` or at ``t_max`` or after ``steps`` steps.
    """

    params: FreeEnergyParams
    dt: float = 1e-3
    steps: int = 4000
    grid: RadialGrid = field(default_factory=default_flow_grid)
    stop: float = 1e-12
    t_max: float = 1e7
    scheme: str = IMPLICIT
    growth: float = 1.25
    dt_max: float = 1e5
    cfl_safety: float = CFL_SAFETY

    def __post_init__(self):
        if not self.dt > 0:
            raise FlowError("dt must be positive")
        if self.scheme not in (IMPLICIT, EXPLICIT):
            raise FlowError(f"unknown scheme {self.scheme!r}")
        if self.params.c <= 0:
            raise FlowError("the flow needs a positive entropy coefficient c")
        if self.scheme == EXPLICIT:
            h = float(np.min(np.diff(np.concatenate(([0.0], self.grid.nodes)))))
            limit = self.cfl_safety * h * h
            if self.dt > limit:
                raise FlowError(f"explicit step {self.dt:g} violates the CFL bound {limit:.3g}")

    def describe(self) -> dict:
        d = {k: getattr(self, k) for k in ("dt", "steps", "stop", "t_max", "scheme", "growth", "dt_max")}
        d["params"] = {k: getattr(self.params, k) for k in ("a", "b", "c", "M")}
        d["grid"] = self.grid.describe()
        return d


@dataclass(frozen=True, eq=False)
class FlowState:
    """Cell values at ``time`` with the history of ``(t, F, D, mass)``."""

    time: float
    values: np.ndarray
    mesh: FVMesh
    history: tuple = ()
    dt: float = 0.0
    steps: int = 0
    converged: bool = False
    message: str = ""

    @property
    def mass(self) -> float:
        return float(self.mesh.volumes @ self.values)

    @property
    def density(self) -> RadialDensity:
        return RadialDensity(self.mesh.grid, np.maximum(self.values, 0.0))

    @property
    def free_energy(self) -> float:
        return self.history[-1][1] if self.history else math.nan


def initial_state(config: FlowConfig, profile) -> FlowState:
    """Cell values of ``profile`` (callable of r) renormalized to mass ``M``."""
    mesh = make_mesh(config.grid)
    vals = np.maximum(np.asarray(profile(mesh.r), dtype=float), FLOOR)
    vals *= config.params.M / float(mesh.volumes @ vals)
    p = config.params
    F = discrete_free_energy(mesh, vals, p)
    D = dissipation(mesh, vals, p)
    return FlowState(0.0, vals, mesh, ((0.0, F, D, float(mesh.volumes @ vals)),), config.dt)


def _implicit_step(mesh, rho, p, dt):
    phi = total_potential(mesh, rho, p)
    diag, upper, lower = _operator_bands(mesh, phi, p.c)
    V = mesh.volumes
    ab = np.zeros((3, mesh.n))
    ab[0, 1:] = dt * upper
    ab[1] = V + dt * diag
    ab[2, :-1] = dt * lower
    return solve_banded((1, 1), ab, V * rho)


def _explicit_step(mesh, rho, p, dt):
    phi = total_potential(mesh, rho, p)
    J = mesh.areas * face_fluxes(mesh, rho, phi, p.c)
    change = np.zeros_like(rho)
    change[:-1] -= J
    change[1:] += J
    return rho + dt * change / mesh.volumes


def flow_step(state: FlowState, config: FlowConfig, dt: float | None = None) -> FlowState:
    """Advance by one accepted step, halving the step while ``F`` would increase."""
    p = config.params
    mesh = state.mesh
    dt = state.dt if dt is None else dt
    F0 = state.history[-1][1]
    for _ in range(40):
        if config.scheme == IMPLICIT:
            new = _implicit_step(mesh, state.values, p, dt)
        else:
            new = _explicit_step(mesh, state.values, p, dt)
        if np.all(np.isfinite(new)) and np.all(new >= 0):
            new = np.maximum(new, FLOOR)
            F1 = discrete_free_energy(mesh, new, p)
            if F1 <= F0 + MONOTONE_TOL * max(1.0, abs(F0)):
                D = dissipation(mesh, new, p)
                t = state.time + dt
                hist = state.history + ((t, F1, D, float(mesh.volumes @ new)),)
                return replace(state, time=t, values=new, history=hist, dt=dt, steps=state.steps + 1)
        if config.scheme == EXPLICIT:
            break
        dt *= 0.5
    raise FlowError(f"free energy increased at t={state.time:g}; step {dt:g} rejected")


def flow_run(config: FlowConfig, initial) -> FlowState:
    """Run the flow from ``initial`` (a FlowState or a callable profile)."""
    state = initial if isinstance(initial, FlowState) else initial_state(config, initial)
    dt = config.dt
    for _ in range(config.steps):
        F0 = state.history[-1][1]
        state = flow_step(state, config, dt)
        F1 = state.history[-1][1]
        rate = abs(F1 - F0) / (state.dt * max(1.0, abs(F1)))
        if rate < config.stop:
            return replace(state, converged=True, message="steady state reached")
        if state.time >= config.t_max:
            return replace(state, message="t_max reached")
        dt = state.dt
        if config.scheme == IMPLICIT:
            dt = min(dt * config.growth, config.dt_max)
    return replace(state, message="step cap reached")


def dissipation_check(state: FlowState, config: FlowConfig, dt: float) -> dict:
    """Compare ``-dF/dt`` over steps ``dt`` and ``dt/2`` with the dissipation ``D``.

    Returns the two finite-difference rates, their Richardson extrapolation and
    the dissipation at the starting state.
    """
    p = config.params
    D = dissipation(state.mesh, state.values, p)
    F0 = discrete_free_energy(state.mesh, state.values, p)
    rates = []
    for h in (dt, 0.5 * dt):
        if config.scheme == IMPLICIT:
            new = _implicit_step(state.mesh, state.values, p, h)
        else:
            new = _explicit_step(state.mesh, state.values, p, h)
        rates.append(-(discrete_free_energy(state.mesh, new, p) - F0) / h)
    return {"D": D, "rate_dt": rates[0], "rate_half": rates[1], "richardson": 2 * rates[1] - rates[0]}


def relative_l1(state: FlowState, profile) -> float:
    """``sum V |rho - profile| / M`` on the cells."""
    ref = np.asarray(profile(state.mesh.r), dtype=float)
    V = state.mesh.volumes
    return float(V @ np.abs(state.values - ref)) / float(V @ ref)
