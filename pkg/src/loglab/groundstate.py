"""Mass-constrained minimization of the Schrödinger energy.

The energy is discretized on the finite-volume cells of :mod:`loglab.flow`:

    E_h(u) = sum_f A_f (u_{i+1}-u_i)^2 / d_f + alpha sum V_i Vtrap_i u_i^2
             - beta sum m_i m_j K_ij + gamma sum V_i u_i^2 log u_i^2,   m = V u^2,

with ``Vtrap = 2 log(1+r^2)`` and ``K`` the cell-averaged Newton kernel, so
``-beta sum m m K`` is the discrete ``-beta I``.  ``energy_gradient`` is the
exact L2 gradient of ``E_h``.  Descent directions come from the lowest
eigenvector of the frozen (self-consistent) Hamiltonian; a projected gradient
step is the fallback.  Every trial is renormalized to mass ``M`` and accepted by
Armijo backtracking, so the energy trace is non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .flow import FVMesh, make_mesh
from .functionals import SchrodingerParams, schrodinger_energy
from .grids import RadialGrid, WaveFunction, make_radial_grid
from .inequalities import BOUNDED, UNBOUNDED, UNKNOWN, classify_schrodinger

LOG_FLOOR = 1e-300
ARMIJO_C = 1e-4
MIN_STEP = 1e-12


class GroundStateError(ValueError):
    """Parameters outside the region where the energy is bounded below."""


def default_ground_grid(N: int = 600, R_max: float = 30.0, r_min: float = 1e-3) -> RadialGrid:
    return make_radial_grid(N, R_max, "geometric", r_min=r_min)


@dataclass(frozen=True)
class MinimizeOptions:
    """Controls of :func:`minimize`.

    ``step`` is the initial trial step of the line search, ``tol`` the
    EL-residual stopping threshold and ``initial`` an optional starting profile
    (callable of r); the default start is the Gaussian ``sqrt(M mu)``.
    """

    step: float = 1.0
    max_iter: int = 500
    tol: float = 1e-7
    initial: object = None
    grid: RadialGrid = field(default_factory=default_ground_grid)
    allow_unknown: bool = False
    allow_unbounded: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def describe(self) -> dict:
        return {"step": self.step, "max_iter": self.max_iter, "tol": self.tol,
                "allow_unknown": self.allow_unknown, "grid": self.grid.describe()}


@dataclass(frozen=True, eq=False)
class GroundStateReport:
    """Outcome of a minimization; ``energy`` is the discrete energy ``E_h``."""

    params: SchrodingerParams
    values: np.ndarray
    mesh: FVMesh
    energy: float
    theta: float
    residual: float
    trace: tuple
    converged: bool
    message: str
    label: str

    @property
    def minimizer(self) -> WaveFunction:
        return WaveFunction(self.mesh.grid, self.values)

    @property
    def mass(self) -> float:
        return float(self.mesh.volumes @ self.values ** 2)

    def quadrature_energy(self) -> float:
        """Energy of the minimizer re-evaluated with the radial quadrature.

        The profile is first rescaled to quadrature mass ``M``.
        """
        w = self.minimizer
        w = w.with_values(w.values * math.sqrt(self.params.M / w.mass))
        return schrodinger_energy(w, self.params)

    def to_dict(self) -> dict:
        p = self.params
        return {"params": {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "M": p.M},
                "energy": self.energy, "theta": self.theta, "residual": self.residual,
                "converged": self.converged, "message": self.message, "label": self.label,
                "iterations": len(self.trace) - 1, "trace": list(self.trace)}


# -- discrete energy -----------------------------------------------------------------------


def trap(r: np.ndarray) -> np.ndarray:
    return 2.0 * np.log1p(r * r)


def _local(u):
    u2 = np.maximum(u * u, LOG_FLOOR)
    return np.log(u2)


def _stiffness(mesh: FVMesh):
    g = mesh.areas / mesh.spacing
    diag = np.zeros(mesh.n)
    diag[:-1] += g
    diag[1:] += g
    return diag, -g


def discrete_energy_terms(mesh: FVMesh, u: np.ndarray, p: SchrodingerParams) -> dict:
    V = mesh.volumes
    kin = float(np.sum(mesh.areas * np.diff(u) ** 2 / mesh.spacing))
    tr = float(V @ (trap(mesh.r) * u * u))
    m = V * u * u
    inter = float(m @ mesh.kernel @ m)
    loc = float(V @ (u * u * _local(u)))
    return {"kinetic": kin, "trap": tr, "interaction": inter, "local": loc,
            "energy": kin + p.alpha * tr - p.beta * inter + p.gamma * loc}


def discrete_energy(mesh: FVMesh, u: np.ndarray, p: SchrodingerParams) -> float:
    return discrete_energy_terms(mesh, u, p)["energy"]


def _potential(mesh, u, p):
    """Diagonal potential of the frozen Hamiltonian (gradient / 2 = H u)."""
    m = mesh.volumes * u * u
    q = p.alpha * trap(mesh.r)
    if p.beta != 0.0:
        q = q - 2.0 * p.beta * (mesh.kernel @ m)   # 4 pi beta W
    if p.gamma != 0.0:
        q = q + p.gamma * (_local(u) + 1.0)
    return q


def energy_gradient(mesh: FVMesh, u: np.ndarray, p: SchrodingerParams) -> np.ndarray:
    """L2 gradient of ``E_h``: ``2(-Delta_h u + alpha Vtrap u + 4 pi beta W u + gamma(log u^2+1) u)``."""
    diag, off = _stiffness(mesh)
    Su = diag * u
    Su[:-1] += off * u[1:]
    Su[1:] += off * u[:-1]
    return 2.0 * (Su / mesh.volumes + _potential(mesh, u, p) * u)


def multiplier(mesh: FVMesh, u: np.ndarray, p: SchrodingerParams) -> float:
    """``theta = <gradient, u> / (2M)``."""
    g = energy_gradient(mesh, u, p)
    return float(mesh.volumes @ (g * u)) / (2.0 * float(mesh.volumes @ (u * u)))


def projected_gradient(mesh: FVMesh, u: np.ndarray, p: SchrodingerParams) -> np.ndarray:
    g = energy_gradient(mesh, u, p)
    V = mesh.volumes
    return g - (V @ (g * u)) / (V @ (u * u)) * u


def el_residual(mesh: FVMesh, u: np.ndarray, p: SchrodingerParams) -> float:
    """``||projected gradient||_2 / ||u||_2``; zero exactly at discrete critical points."""
    V = mesh.volumes
    pg = projected_gradient(mesh, u, p)
    return math.sqrt(float(V @ (pg * pg)) / float(V @ (u * u)))


# -- minimization --------------------------------------------------------------------------


def _normalize(mesh, u, M):
    return u * math.sqrt(M / float(mesh.volumes @ (u * u)))


def _eigen_direction(mesh, u, p):
    """Lowest eigenvector of the frozen Hamiltonian, aligned with ``u``."""
    diag, off = _stiffness(mesh)
    s = np.sqrt(mesh.volumes)
    d = diag / mesh.volumes + _potential(mesh, u, p)
    e = off / (s[:-1] * s[1:])
    _, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    v = vec[:, 0] / s
    if mesh.volumes @ (v * u) < 0:
        v = -v
    return _normalize(mesh, v, p.M)


def check_admissible(p: SchrodingerParams, allow_unknown: bool = False,
                     allow_unbounded: bool = False) -> str:
    label = classify_schrodinger(p)
    if label.label == UNBOUNDED and not allow_unbounded:
        raise GroundStateError(f"energy is unbounded below on the mass sphere ({label.reason}); "
                               "a minimization would diverge")
    if label.label == UNKNOWN and not allow_unknown:
        raise GroundStateError(f"boundedness is not established ({label.reason}); "
                               "pass allow_unknown to run anyway")
    return label.label


def gaussian_trial(mesh: FVMesh, M: float = 1.0) -> np.ndarray:
    """Cell values of ``sqrt(M mu)`` with ``mu = exp(-r^2/2)/(2 pi)``, renormalized."""
    return _normalize(mesh, np.exp(-0.25 * mesh.r ** 2), M)


def minimize(p: SchrodingerParams, opts: MinimizeOptions | None = None) -> GroundStateReport:
    """Minimize ``E_h`` on the mass sphere ``sum V u^2 = M``."""
    opts = opts or MinimizeOptions()
    label = check_admissible(p, opts.allow_unknown, opts.allow_unbounded)
    mesh = make_mesh(opts.grid)
    V = mesh.volumes
    if opts.initial is None:
        u = gaussian_trial(mesh, p.M)
    else:
        u = _normalize(mesh, np.abs(np.asarray(opts.initial(mesh.r), dtype=float)), p.M)
    E = discrete_energy(mesh, u, p)
    trace = [E]
    res = el_residual(mesh, u, p)
    message = "iteration cap reached"
    converged = False
    for _ in range(opts.max_iter):
        if res < opts.tol:
            converged, message = True, "EL residual below tolerance"
            break
        g = projected_gradient(mesh, u, p)
        directions = [_eigen_direction(mesh, u, p) - u, -g / max(1.0, math.sqrt(V @ (g * g)))]
        accepted = False
        for d in directions:
            slope = float(V @ (g * d))
            if not slope < 0:
                continue
            s = opts.step
            while s > MIN_STEP:
                # E_h(|v|) <= E_h(v), so folding the sign keeps descent
                trial = _normalize(mesh, np.abs(u + s * d), p.M)
                Et = discrete_energy(mesh, trial, p)
                if Et <= E + ARMIJO_C * s * slope:
                    accepted = True
                    break
                s *= 0.5
            if accepted:
                break
        if not accepted:
            message = "line search failed to find descent"
            break
        u, E = trial, Et
        trace.append(E)
        res = el_residual(mesh, u, p)
    else:
        if res < opts.tol:
            converged, message = True, "EL residual below tolerance"
    return GroundStateReport(p, u, mesh, E, multiplier(mesh, u, p), res, tuple(trace),
                             converged, message, label)


def gausson_scan(gammas, M: float = 1.0, grid: RadialGrid | None = None) -> tuple[float, list]:
    """EL residual of ``sqrt(M mu)`` for ``alpha = beta = 0`` over ``gammas``.

    Returns the minimizing gamma and the ``(gamma, residual)`` pairs.
    """
    mesh = make_mesh(grid or default_ground_grid())
    u = gaussian_trial(mesh, M)
    rows = [(float(g), el_residual(mesh, u, SchrodingerParams(0.0, 0.0, float(g), M))) for g in gammas]
    best = min(rows, key=lambda t: t[1])[0]
    return best, rows


def bulk_quadratic_fit(report: GroundStateReport, fraction: float = 0.99) -> float:
    """R^2 of a fit ``log u^2 ~ c0 + c2 r^2`` over the radius holding ``fraction`` of the mass."""
    mesh = report.mesh
    m = np.cumsum(mesh.volumes * report.values ** 2) / report.mass
    k = int(np.searchsorted(m, fraction)) + 1
    r2 = mesh.r[:k] ** 2
    y = _local(report.values[:k])
    X = np.column_stack([np.ones_like(r2), r2])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    ss_res = float(np.sum((y - X @ coef) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot
