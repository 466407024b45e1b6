"""Acceptance criteria 1-9, one PASS/FAIL line each (printed in the terminal summary).

Tolerances are the ones stated with each criterion.  Criteria that cannot hold
as stated are evaluated faithfully and allowed to fail; see the project notes.
"""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE
from loglab.closedforms import ClosedForm, analytic_value, default_grid_for
from loglab.divergence import FamilyKind, FamilySpec, confirm_unbounded, dyadic, measure_slope
from loglab.flow import FlowConfig, dissipation_check, flow_run, initial_state, relative_l1
from loglab.functionals import (FreeEnergyParams, SchrodingerParams, free_energy, g_functional,
                                interaction, interaction_planar, schrodinger_energy)
from loglab.grids import PlanarGrid, RadialDensity, make_radial_grid, sample_planar
from loglab.groundstate import (GroundStateError, default_ground_grid, discrete_energy,
                                energy_gradient, minimize)
from loglab.flow import make_mesh
from loglab.inequalities import (BOUNDED, UNBOUNDED, UNKNOWN, InequalityId, Kind, classify_schrodinger,
                                 deficit, parse_range, scan_phase_diagram)
from loglab.verify import equality_suite, identity_suite

LOG2_GAMMA = math.log(2) - np.euler_gamma / 2


def record(n, passed, detail):
    ACCEPTANCE[n] = (bool(passed), detail)
    print(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, detail


def test_criterion_1_equality_suite():
    checks = [c for c in equality_suite() if not c.name.startswith("logsob")]
    worst = max(abs(c.value) for c in checks)
    record(1, all(c.passed for c in checks) and worst <= 1e-4,
           f"{len(checks)} equality deficits, max |deficit| = {worst:.2e} (tol 1e-4)")


def test_criterion_2_sharp_constants():
    rows = []
    for a in (0.0, 0.25, 0.5, 0.75):
        K = analytic_value("K", a=a)
        for lam in (0.5, 1.0, 2.0):
            form = ClosedForm.k_minimizer(a, lam)
            rho = form.on_grid(default_grid_for(form))
            F = free_energy(rho, FreeEnergyParams(a, 2 * a - 2))
            G = g_functional(rho, a)
            rows.append((a, lam, F - K, G - K))
    bad = [(a, lam, d) for a, lam, d, _ in rows if abs(d) > 1e-4]
    spread = max(max(d for a2, _, d, _ in rows if a2 == a) - min(d for a2, _, d, _ in rows if a2 == a)
                 for a in (0.0, 0.25, 0.5, 0.75))
    g_err = max(abs(g) for *_, g in rows)
    detail = (f"F_(a,2a-2) - K(a) exceeds 1e-4 at {len(bad)}/12 points "
              f"(worst {max((abs(d) for *_, d in bad), default=0):.4f}); max lambda spread of F {spread:.3f}; "
              f"the scale-invariant G_a equals K(a) to {g_err:.1e} at all 12 points")
    record(2, not bad and spread <= 1e-4, detail)


def test_criterion_3_identities():
    checks = identity_suite()
    worst = {c.name.split("(")[0]: 0.0 for c in checks}
    for c in checks:
        key = c.name.split("(")[0]
        worst[key] = max(worst[key], abs(c.value - c.expected))
    record(3, all(c.passed for c in checks),
           "; ".join(f"{k} err {v:.1e}" for k, v in worst.items()) + " (tol 1e-6, Poisson 1e-5)")


def _chi2_oracle():
    # |X - Y|^2 = 2 chi2_2 for independent planar standard normals; E log chi2_2 = log 2 - gamma
    return 0.5 * (math.log(2) + math.log(2) - np.euler_gamma)


def _monte_carlo_oracle(n=4_000_000, seed=12345):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((n, 2)) - rng.standard_normal((n, 2))
    vals = 0.5 * np.log(np.einsum("ij,ij->i", d, d))
    return float(vals.mean()), float(vals.std() / math.sqrt(n))


def test_criterion_4_oracles():
    pg = PlanarGrid(0.05, 30.0)
    g = ClosedForm.gaussian()
    radial_g = interaction(g.on_grid(default_grid_for(g)))
    planar_g = interaction_planar(sample_planar(g, (0.0, 0.0), pg))
    # rho_star keeps 1.1e-3 of its mass beyond L; both sums use rho_star restricted to |x| <= L
    s = ClosedForm.rho_star()
    rg = make_radial_grid(2048, 30.0)
    radial_s = interaction(RadialDensity(rg, s(rg.nodes)))
    planar_s = interaction_planar(sample_planar(s, (0.0, 0.0), pg, cutoff=30.0, renormalize=False))
    full_s = interaction_planar(sample_planar(s, (0.0, 0.0), pg))
    mc, se = _monte_carlo_oracle()
    chi = _chi2_oracle()
    rel_g = abs(planar_g / radial_g - 1)
    rel_s = abs(planar_s / radial_s - 1)
    ok = rel_g <= 0.01 and rel_s <= 0.01 and abs(radial_g - chi) <= 1e-3 and abs(radial_g - mc) <= 1e-3
    record(4, ok, f"planar/radial rel diff: Gaussian {rel_g:.1e}, rho_star on |x|<=30 {rel_s:.1e} "
                  f"(renormalized full-plane rho_star {abs(full_s / 0.5 - 1):.1e}); Gaussian I = {radial_g:.6f} "
                  f"vs chi2 {chi:.6f}, Monte Carlo {mc:.6f} +- {se:.1e}")


def test_criterion_5_nonattainment():
    u = ClosedForm.gaussian().wave_on_grid(default_grid_for(ClosedForm.gaussian()))
    si = deficit(InequalityId(Kind.SCALE_INVARIANT), u).deficit
    we = deficit(InequalityId(Kind.LOGSOB_WEISSLER), u).deficit
    ok = abs(si - 0.05797) <= 1e-3 and si > 0 and abs(we) <= 1e-4
    record(5, ok, f"SCALE_INVARIANT deficit {si:.5f} (target 0.05797 +- 1e-3, > 0); Weissler deficit {we:.1e}")


def test_criterion_6_divergence_slopes():
    parts = []
    est = measure_slope(FamilySpec(FamilyKind.SCALE, dyadic(0, 6)), FreeEnergyParams(0.0, -3.0))
    parts.append(("scale up", est.slope, -1.0, abs(est.slope + 1) <= 0.05))
    est = measure_slope(FamilySpec(FamilyKind.SCALE, dyadic(0, 6, -1), ClosedForm.annulus_bump()),
                        FreeEnergyParams(0.0, 0.0))
    parts.append(("scale down", est.slope, 2.0, abs(est.slope - 2) <= 0.1 and est.divergence_slope < 0))
    est = measure_slope(FamilySpec(FamilyKind.TWO_BUBBLE, dyadic(2, 8, -1), ClosedForm.annulus_bump(), eps=0.3),
                        FreeEnergyParams(2.0, 1.5))
    parts.append(("two-bubble", est.slope, 0.165, abs(est.slope / 0.165 - 1) <= 0.05))
    est = measure_slope(FamilySpec(FamilyKind.WAVE_SCALE, dyadic(0, 6, -1), ClosedForm.gaussian()),
                        SchrodingerParams(0.0, 1.0, 0.0))
    kin = est.term_slopes["kinetic"]
    parts.append(("wave scale", est.slope, 1.0, abs(est.slope - 1) <= 0.05 and abs(kin) <= 0.05))
    lat = measure_slope(FamilySpec(FamilyKind.LATTICE, tuple(range(2, 9)), ClosedForm.unit_ball_bump(), A=4.0),
                        FreeEnergyParams(0.0, 0.0, c=-1.0))
    decreasing = all(b < a for a, b in zip(lat.energies, lat.energies[1:]))
    ent = -lat.term_slopes["entropy"]  # c * entropy with c = -1
    parts.append(("lattice entropy term", ent, -3.0, decreasing and abs(ent / -3.0 - 1) <= 0.15))
    detail = "; ".join(f"{n} {m:.4g} vs {t:g} {'ok' if ok else 'off'}" for n, m, t, ok in parts)
    detail += f"; lattice total strictly decreasing: {decreasing}; wave-scale kinetic slope {kin:.1e}"
    record(6, all(ok for *_, ok in parts), detail)


def _expected_free_energy(a, b, e=1e-9):
    if a < -e or b < -2 - e or b > min(a - 1, 2 * a - 2) + e or (abs(a - 1) <= e and abs(b) <= e):
        return UNBOUNDED
    if abs(a) <= e and abs(b + 2) <= e:
        return BOUNDED
    if a > e and b >= -2 - e and b < a - 1 - e and b <= 2 * a - 2 + e:
        return BOUNDED
    return UNKNOWN


def _expected_schrodinger(al, mb, ga, e=1e-9):
    if al < -e or mb > min(2 * al - ga, 4 * al - 2 * ga) + e:
        return UNBOUNDED
    if abs(al) <= e and mb <= e and mb + 2 * ga <= e:
        return BOUNDED
    if al > e and ga <= e and mb <= 2 * al + e:
        return BOUNDED
    if al > e and ga > e and mb <= 4 * al - 2 * ga + e and mb < 2 * al - ga - e:
        return BOUNDED
    return UNKNOWN


def _lines_between(p, q, lines, e=1e-9):
    """True if one of the boundary functions changes sign (or vanishes) between p and q."""
    return any(f(*p) * f(*q) <= e for f in lines)


def test_criterion_7_phase_diagrams():
    fe = scan_phase_diagram("free_energy", "-1:3:0.05", "-3:3:0.05")
    mism = sum(lab.label != _expected_free_energy(a, b) for a, b, lab in fe.rows())
    fe_lines = [lambda a, b: b + 2, lambda a, b: b - (a - 1), lambda a, b: b - (2 * a - 2), lambda a, b: a,
                lambda a, b: (a - 1) ** 2 + b ** 2 - 1e-12]
    L = [[lab.label for lab in row] for row in fe.labels]
    stray = 0
    for i in range(len(fe.xs)):
        for j in range(len(fe.ys)):
            for di, dj in ((1, 0), (0, 1)):
                if i + di < len(fe.xs) and j + dj < len(fe.ys) and L[i][j] != L[i + di][j + dj]:
                    p, q = (fe.xs[i], fe.ys[j]), (fe.xs[i + di], fe.ys[j + dj])
                    stray += not _lines_between(p, q, fe_lines)
    unknown_fe = sorted({(a, b) for a, b, lab in fe.rows() if lab.label == UNKNOWN})
    ray_ok = all(abs(b - (a - 1)) < 1e-9 and b > 0 for a, b in unknown_fe)
    sch_mism, strip = 0, 0
    for alpha in (0.0, 1.0):
        sc = scan_phase_diagram("schrodinger", "-3:3:0.05", "-3:3:0.05", alpha=alpha)
        for g, mb, lab in sc.rows():
            sch_mism += lab.label != _expected_schrodinger(alpha, mb, g)
            strip += alpha == 1.0 and lab.label == UNKNOWN
    # witnesses on a deterministic sample of Unbounded cells of both diagrams
    fe_unb = [(a, b) for a, b, lab in fe.rows() if lab.label == UNBOUNDED]
    sample = fe_unb[::97] + [(1.0, 0.0)]
    failures = [ab for ab in sample if not confirm_unbounded(FreeEnergyParams(*ab)).divergence_slope < 0]
    sc_unb = []
    for alpha in (0.0, 1.0):
        sc = scan_phase_diagram("schrodinger", "-3:3:0.25", "-3:3:0.25", alpha=alpha)
        sc_unb += [(alpha, mb, g) for g, mb, lab in sc.rows() if lab.label == UNBOUNDED]
    sc_sample = sc_unb[::9]
    failures += [p for p in sc_sample
                 if not confirm_unbounded(SchrodingerParams(p[0], p[1], p[2])).divergence_slope < 0]
    ok = mism == 0 and stray == 0 and ray_ok and (1.0, 0.0) not in unknown_fe and sch_mism == 0 \
        and strip > 0 and not failures
    record(7, ok, f"free-energy mismatches {mism}, label changes off the boundary lines {stray}, "
                  f"Unknown cells {len(unknown_fe)} all on b=a-1>0: {ray_ok}; Schrodinger mismatches {sch_mism}, "
                  f"Unknown strip cells (alpha=1) {strip}; witnesses run on {len(sample) + len(sc_sample)} "
                  f"Unbounded cells, non-negative slopes {len(failures)}")


def test_criterion_8_gradient_flow():
    cfg = FlowConfig(FreeEnergyParams(2.0, 0.0, M=1.0))
    st = flow_run(cfg, ClosedForm.gaussian())
    F = np.array([h[1] for h in st.history])
    mass = np.array([h[3] for h in st.history])
    mono = bool(np.all(np.diff(F) <= 0))
    drift = float(np.max(np.abs(mass - 1.0)))
    dF = abs(st.free_energy + math.log(math.pi))
    l1 = relative_l1(st, ClosedForm.rho_star())
    st0 = initial_state(cfg, ClosedForm.gaussian())
    chk = dissipation_check(st0, cfg, 1e-3)
    rel = abs(chk["rate_half"] / chk["D"] - 1)
    ok = mono and drift <= 1e-8 and dF <= 1e-3 and l1 <= 1e-2 and rel <= 0.1 and st.converged
    record(8, ok, f"monotone {mono}, mass drift {drift:.1e}, |F_end + log pi| {dF:.1e}, "
                  f"L1 to rho_star {l1:.1e}, -dF/dt vs D at dt/2 rel {rel:.1e} (at dt {abs(chk['rate_dt'] / chk['D'] - 1):.1e})")


def test_criterion_9_ground_state():
    mesh = make_mesh(default_ground_grid())
    g = ClosedForm.gaussian()
    trial_wave = g.wave_on_grid(default_grid_for(g))
    details, ok = [], True
    for p in ((1, 0, -1, 1), (1, 0, 0, 1)):
        P = SchrodingerParams(*p)
        rep = minimize(P)
        mono = bool(np.all(np.diff(rep.trace) <= 0))
        trial = schrodinger_energy(trial_wave, P)
        e = rep.quadrature_energy()
        ok &= mono and rep.residual < 1e-4 and e < trial
        details.append(f"{p}: residual {rep.residual:.1e}, E {e:.5f} < trial {trial:.5f}, monotone {mono}")
    rng = np.random.default_rng(0)
    worst = 0.0
    for p in ((1, 1, -1, 1), (0.5, -1, 1, 2), (-1, 0.5, 0.5, 1), (0, -2, -1, 1)):
        P = SchrodingerParams(*p)
        u = np.exp(-mesh.r ** 2 / rng.uniform(2, 6))
        d = np.exp(-mesh.r ** 2 / 4) * np.cos(rng.uniform(0.5, 3) * mesh.r)
        h = 1e-5
        fd = (discrete_energy(mesh, u + h * d, P) - discrete_energy(mesh, u - h * d, P)) / (2 * h)
        an = mesh.volumes @ (energy_gradient(mesh, u, P) * d)
        worst = max(worst, abs(an - fd) / abs(fd))
    ok &= worst <= 1e-4
    rejected = 0
    for p in ((0, 1, 1, 1), (-1, 0, 0, 1), (1, 3, 0.5, 1)):
        try:
            minimize(SchrodingerParams(*p))
        except GroundStateError as exc:
            rejected += "Theorem 11 (i)" in str(exc)
    ok &= rejected == 3 and classify_schrodinger(SchrodingerParams(0, 1, 1, 1)).label == UNBOUNDED
    record(9, ok, "; ".join(details) + f"; gradient FD rel err {worst:.1e}; Unbounded rejected citing "
                  f"Theorem 11 (i): {rejected}/3")
