"""Verification suites: equality cases, inequality corpus, scaling laws and identities.

Every check is a :class:`Check` with the measured value, the expected value
or bound and the tolerance used, so reports name which tolerance broke.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .closedforms import ClosedForm, analytic_value, default_grid_for
from .functionals import (entropy, interaction, log_moment, poisson_potential,
                          potential_moment)
from .inequalities import EQUALITY_TOL, WAVE_KINDS, InequalityId, Kind, deficit

SUITES = ("equalities", "inequalities", "scaling", "identities")
IDENTITY_TOL = 1e-6
POISSON_TOL = 1e-5
SCALING_TOL = 1e-9


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    expected: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _close(suite, name, value, expected, tol, **details) -> Check:
    ok = bool(np.isfinite(value) and abs(value - expected) <= tol)
    return Check(suite, name, float(value), float(expected), tol, ok, details)


def _guarded(suite, name, fn) -> list[Check]:
    """Run ``fn``; a numerical error becomes one failing check naming the error."""
    try:
        return fn()
    except (ValueError, ArithmeticError) as exc:
        return [Check(suite, name, math.nan, 0.0, 0.0, False, {"error": str(exc)})]


def _on(form: ClosedForm, N: int, R_max: float):
    return form.on_grid(default_grid_for(form, N, R_max))


def _wave(form: ClosedForm, N: int, R_max: float):
    return form.wave_on_grid(default_grid_for(form, N, R_max))


def equality_suite(N: int = 2048, R_max: float = 100.0, tol: float = EQUALITY_TOL) -> list[Check]:
    """Deficits that vanish at the optimizers."""
    star = lambda: _on(ClosedForm.rho_star(), N, R_max)  # noqa: E731
    cases = [(InequalityId(Kind.LOG_HLS), star)]
    cases += [(InequalityId(Kind.LOG_HLS_TAU, tau=t), star) for t in (0.0, 0.5, 1.0, 2.0)]
    cases.append((InequalityId(Kind.POTENTIAL_VS_INTERACTION), star))
    for eta in (1.5, 2.0, 3.0, 5.0):
        cases.append((InequalityId(Kind.ENTROPY_POTENTIAL, eta=eta),
                      lambda eta=eta: _on(ClosedForm.rho_eta(eta), N, R_max)))
    cases.append((InequalityId(Kind.LOGSOB_WEISSLER), lambda: _wave(ClosedForm.gaussian(), N, R_max)))
    out = []
    for ineq, make in cases:
        def one(ineq=ineq, make=make):
            rep = deficit(ineq, make(), tolerance=tol)
            return [_close("equalities", ineq.name, rep.deficit, 0.0, tol,
                           lhs=rep.lhs, rhs=rep.rhs, density=rep.provenance)]
        out += _guarded("equalities", ineq.name, one)
    return out


def inequality_corpus(seed: int = 0, N: int = 2048, R_max: float = 100.0) -> list:
    """Closed-form densities with randomized dilations, drawn reproducibly from ``seed``."""
    rng = np.random.default_rng(seed)
    forms = [ClosedForm.rho_star(), ClosedForm.gaussian(), ClosedForm.rho_eta(1.5), ClosedForm.rho_eta(3.0),
             ClosedForm.k_minimizer(0.5), ClosedForm.annulus_bump(), ClosedForm.unit_ball_bump()]
    out = []
    for f in forms:
        lam = float(np.exp(rng.uniform(-0.7, 0.7)))
        M = float(np.round(rng.uniform(0.5, 2.0), 6))
        g = f.scaled(lam).with_mass(M)
        out.append(g)
    return out


def inequality_suite(seed: int = 0, N: int = 2048, R_max: float = 100.0,
                     tol: float = EQUALITY_TOL) -> list[Check]:
    """Every claimed inequality is nonnegative (up to ``tol``) on the corpus."""
    kinds = [InequalityId(Kind.LOG_HLS), InequalityId(Kind.LOG_HLS_TAU, tau=1.0),
             InequalityId(Kind.POTENTIAL_VS_INTERACTION), InequalityId(Kind.ENTROPY_POTENTIAL, eta=2.0),
             InequalityId(Kind.LOGSOB_EUCLIDEAN), InequalityId(Kind.LOGSOB_WEISSLER),
             InequalityId(Kind.LOGSOB_SCALED, lam=2.0), InequalityId(Kind.KIN_VS_INTERACTION),
             InequalityId(Kind.SCALE_INVARIANT)]
    out = []
    for form in inequality_corpus(seed, N, R_max):
        def one(form=form):
            grid = default_grid_for(form, N, R_max)
            rho, wave, rows = form.on_grid(grid), None, []
            for ineq in kinds:
                if ineq.kind in WAVE_KINDS:
                    wave = wave or form.wave_on_grid(grid)
                rep = deficit(ineq, wave if ineq.kind in WAVE_KINDS else rho, tolerance=tol)
                if rep.claim:
                    rows.append(Check("inequalities", f"{ineq.name}@{form.label}", rep.deficit, 0.0, tol,
                                      bool(rep.passed), {"lhs": rep.lhs, "rhs": rep.rhs}))
            return rows
        out += _guarded("inequalities", f"corpus@{form.label}", one)
    return out


def scaling_suite(N: int = 2048, R_max: float = 100.0, tol: float = SCALING_TOL) -> list[Check]:
    """Dilation laws ``rho_lam = lam^2 rho(lam x)``: entropy +2M log lam,
    interaction -M^2 log lam, log moment (of log|x|^2) -2M log lam."""
    out = []
    for form in (ClosedForm.rho_star(2.0), ClosedForm.gaussian(), ClosedForm.annulus_bump()):
        def one(form=form):
            M, rows = form.M, []
            base = _on(form, N, R_max)
            e0, i0, l0 = entropy(base), interaction(base), log_moment(base)
            for lam in (0.5, 2.0):
                x = _on(form.scaled(lam), N, R_max)
                L = math.log(lam)
                tag = f"{form.label},lambda={lam:g}"
                rows.append(_close("scaling", f"entropy@{tag}", entropy(x) - e0, 2 * M * L, tol))
                rows.append(_close("scaling", f"interaction@{tag}", interaction(x) - i0, -M * M * L, tol))
                rows.append(_close("scaling", f"log_moment@{tag}", log_moment(x) - l0, -2 * M * L, tol))
            return rows
        out += _guarded("scaling", form.label, one)
    return out


def identity_suite(N: int = 2048, R_max: float = 100.0) -> list[Check]:
    """Closed-form integrals of the rho_zeta family, log moment and potential of rho_star."""
    return _guarded("identities", "closed-form identities", lambda: _identities(N, R_max))


def _identities(N, R_max):
    out = []
    for z in (1.2, 1.5, 2.0, 3.0, 6.0):
        x = _on(ClosedForm.rho_eta(z), N, R_max)
        out.append(_close("identities", f"potential_moment(rho_zeta,zeta={z:g})", potential_moment(x),
                          analytic_value("potential_moment_rho_zeta", zeta=z), IDENTITY_TOL))
        out.append(_close("identities", f"entropy(rho_zeta,zeta={z:g})", entropy(x),
                          analytic_value("entropy_rho_zeta", zeta=z), IDENTITY_TOL))
    star = _on(ClosedForm.rho_star(), N, R_max)
    out.append(_close("identities", "log_moment(rho_star)", log_moment(star), 0.0, IDENTITY_TOL))
    W = poisson_potential(star)
    r = np.linspace(0.0, 10.0, 2001)
    err = float(np.max(np.abs(W(r) + np.log1p(r * r) / (4 * math.pi))))
    out.append(_close("identities", "poisson_potential(rho_star) sup error on r<=10", err, 0.0, POISSON_TOL))
    return out


def run_suite(name: str, N: int = 2048, R_max: float = 100.0, seed: int = 0) -> list[Check]:
    if name == "all":
        return [c for s in SUITES for c in run_suite(s, N, R_max, seed)]
    if name == "equalities":
        return equality_suite(N, R_max)
    if name == "inequalities":
        return inequality_suite(seed, N, R_max)
    if name == "scaling":
        return scaling_suite(N, R_max)
    if name == "identities":
        return identity_suite(N, R_max)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
