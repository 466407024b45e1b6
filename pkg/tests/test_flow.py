import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loglab.closedforms import ClosedForm
from loglab.flow import (EXPLICIT, FlowConfig, FlowError, default_flow_grid, discrete_free_energy,
                         dissipation, dissipation_check, drift_field, flow_run, flow_step,
                         initial_state, make_mesh, relative_l1)
from loglab.functionals import FreeEnergyParams

P = FreeEnergyParams(2.0, 0.0)


@pytest.fixture(scope="module")
def terminal():
    return flow_run(FlowConfig(P), ClosedForm.gaussian())


def test_drift_vanishes_at_rho_star():
    mesh = make_mesh(default_flow_grid())
    rho = ClosedForm.rho_star()(mesh.r)
    assert np.max(np.abs(drift_field(mesh, rho, P))) < 1e-9
    assert dissipation(mesh, rho, P) == pytest.approx(0.0, abs=1e-20)


def test_kernel_is_symmetric_and_matches_newton_form():
    mesh = make_mesh(default_flow_grid(100, 20.0))
    K = mesh.kernel
    assert np.allclose(K, K.T)
    # off-diagonal entries equal the outer-cell mean of log s
    i, j = 10, 40
    f0, f1 = mesh.faces[j], mesh.faces[j + 1]
    s = np.linspace(f0, f1, 20001)
    ref = np.trapezoid(np.log(s) * 2 * s, s) / (f1 ** 2 - f0 ** 2)
    assert K[i, j] == pytest.approx(ref, rel=1e-7)


def test_terminal_state(terminal):
    assert terminal.converged
    assert terminal.free_energy == pytest.approx(-math.log(math.pi), abs=1e-3)
    assert relative_l1(terminal, ClosedForm.rho_star()) < 1e-2


def test_monotone_and_mass(terminal):
    F = np.array([h[1] for h in terminal.history])
    m = np.array([h[3] for h in terminal.history])
    assert np.all(np.diff(F) <= 1e-12)
    assert np.max(np.abs(m - 1.0)) < 1e-8


@pytest.mark.parametrize("dt", [1e-3, 1e-4])
def test_dissipation_identity(dt):
    st = initial_state(FlowConfig(P), ClosedForm.gaussian())
    chk = dissipation_check(st, FlowConfig(P), dt)
    assert chk["rate_half"] == pytest.approx(chk["D"], rel=0.1)
    assert abs(chk["rate_half"] - chk["D"]) <= abs(chk["rate_dt"] - chk["D"])


@given(b=st.floats(-1.0, 0.9))
def test_energy_decreases_with_interaction(b):
    cfg = FlowConfig(FreeEnergyParams(2.0, b), steps=15, grid=default_flow_grid(200, 50.0))
    s = flow_run(cfg, ClosedForm.gaussian())
    F = [h[1] for h in s.history]
    assert all(f2 <= f1 + 1e-8 * max(1, abs(f1)) for f1, f2 in zip(F, F[1:]))
    assert s.mass == pytest.approx(1.0, rel=1e-9)


def test_discrete_energy_consistent_with_potential():
    mesh = make_mesh(default_flow_grid(120, 30.0))
    p = FreeEnergyParams(2.0, 0.7)
    rho = ClosedForm.gaussian()(mesh.r)
    # multiplicative perturbation keeps rho positive in the far tail
    d = rho * np.sin(mesh.r)
    d -= rho * (mesh.volumes @ d) / (mesh.volumes @ rho)
    h = 1e-6
    fd = (discrete_free_energy(mesh, rho + h * d, p) - discrete_free_energy(mesh, rho - h * d, p)) / (2 * h)
    from loglab.flow import total_potential
    mu = np.log(rho) + total_potential(mesh, rho, p)
    assert fd == pytest.approx(mesh.volumes @ (mu * d), rel=1e-6)


def test_explicit_cfl_guard():
    with pytest.raises(FlowError):
        FlowConfig(P, dt=1.0, scheme=EXPLICIT)
    grid = default_flow_grid(60, 10.0, r_min=0.05)
    cfg = FlowConfig(P, dt=5e-6, scheme=EXPLICIT, grid=grid, steps=20)
    s = flow_run(cfg, ClosedForm.gaussian())
    F = [h[1] for h in s.history]
    assert F[-1] < F[0]


def test_invalid_config():
    with pytest.raises(FlowError):
        FlowConfig(P, dt=0.0)
    with pytest.raises(FlowError):
        FlowConfig(FreeEnergyParams(2.0, 0.0, c=-1.0))
    st0 = initial_state(FlowConfig(P), ClosedForm.gaussian())
    assert flow_step(st0, FlowConfig(P)).steps == 1
