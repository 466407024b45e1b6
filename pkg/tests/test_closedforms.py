import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loglab.closedforms import (ClosedForm, FamilyError, analytic_value, default_grid_for,
                                radial_substitution, sharp_constant)
from loglab.functionals import entropy, g_functional, interaction, kinetic, log_moment, potential_moment

ALL = [ClosedForm.rho_star(), ClosedForm.rho_eta(1.5), ClosedForm.k_minimizer(0.5, 2.0),
       ClosedForm.gaussian(), ClosedForm.annulus_bump(), ClosedForm.unit_ball_bump()]


def on(form, N=2048, R=100.0):
    return form.on_grid(default_grid_for(form, N, R))


@pytest.mark.parametrize("form", ALL, ids=lambda f: f.label)
def test_mass_is_M(form):
    for M in (1.0, 2.5):
        assert on(form.with_mass(M)).mass == pytest.approx(M, rel=1e-8)


@pytest.mark.parametrize("form", ALL, ids=lambda f: f.label)
def test_cumulative_mass_and_effective_radius(form):
    r = form.effective_radius(0.9)
    assert form.cumulative_mass(r) == pytest.approx(0.9 * form.M, rel=1e-9)


def test_k_minimizer_at_a0_is_rho_star():
    r = np.geomspace(1e-3, 1e3, 50)
    assert np.allclose(ClosedForm.k_minimizer(0.0)(r), ClosedForm.rho_star()(r), rtol=1e-14)


@pytest.mark.parametrize("bad", [dict(family="rho_eta", eta=1.0), dict(family="k_minimizer", a=1.0),
                                 dict(family="k_minimizer", a=-0.1), dict(family="k_minimizer", lam=0.0),
                                 dict(family="gaussian", M=0.0), dict(family="nope")])
def test_invalid_parameters(bad):
    with pytest.raises(FamilyError):
        ClosedForm(**bad)


def test_eta_error_names_condition():
    with pytest.raises(FamilyError, match="Lemma 2"):
        ClosedForm.rho_eta(0.5)


@given(z=st.floats(1.1, 8.0))
def test_rho_zeta_identities(z):
    x = on(ClosedForm.rho_eta(z))
    assert potential_moment(x) == pytest.approx(1 / (z - 1), abs=1e-6)
    assert entropy(x) == pytest.approx(math.log((z - 1) / math.pi) - z / (z - 1), abs=1e-6)


def test_rho_star_values():
    x = on(ClosedForm.rho_star())
    assert entropy(x) == pytest.approx(-math.log(math.pi) - 2, abs=1e-10)
    assert potential_moment(x) == pytest.approx(1.0, abs=1e-10)
    assert log_moment(x) == pytest.approx(0.0, abs=1e-10)
    assert interaction(x) == pytest.approx(0.5, abs=1e-10)
    assert kinetic(ClosedForm.rho_star().wave_on_grid(default_grid_for(ClosedForm.rho_star()))) == \
        pytest.approx(2 / 3, abs=1e-10)


def test_gaussian_values():
    x = on(ClosedForm.gaussian())
    assert entropy(x) == pytest.approx(-(1 + math.log(2 * math.pi)), abs=1e-10)
    assert interaction(x) == pytest.approx(math.log(2) - np.euler_gamma / 2, abs=1e-10)
    assert analytic_value("interaction_gaussian") == pytest.approx(0.404539, abs=1e-6)


@pytest.mark.parametrize("a", [0.0, 0.25, 0.5, 0.75])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_g_functional_at_minimizer_is_K(a, lam):
    x = on(ClosedForm.k_minimizer(a, lam))
    assert g_functional(x, a) == pytest.approx(analytic_value("K", a=a), abs=1e-9)


@pytest.mark.parametrize("a", [0.25, 0.5, 0.75])
def test_substitution_maps_minimizer_to_rho_star_profile(a):
    rho = on(ClosedForm.k_minimizer(a))
    tau = radial_substitution(rho, a)
    assert tau.mass == pytest.approx(1 - a, rel=1e-10)
    ref = (1 - a) / math.pi / (1 + tau.grid.nodes ** 2) ** 2
    assert np.allclose(tau.values, ref, rtol=1e-12)


def test_sharp_constants():
    assert sharp_constant(0.0, -2.0) == pytest.approx(-(1 + math.log(math.pi)))
    assert sharp_constant(0.5, -1.0) == pytest.approx(-math.log(math.e * math.pi / 0.5))
    assert sharp_constant(2.0, 0.0) == pytest.approx(-math.log(math.pi))
    assert sharp_constant(1.0, 1.0) is None
