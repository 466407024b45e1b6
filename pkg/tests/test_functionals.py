import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from loglab.closedforms import ClosedForm, default_grid_for
from loglab.functionals import (FreeEnergyParams, SchrodingerParams, entropy, free_energy,
                                free_energy_terms, interaction, interaction_newton_direct,
                                interaction_planar, kinetic, log_moment, poisson_potential,
                                potential_moment, potential_moment_translated, schrodinger_energy,
                                self_cell_constant)
from loglab.grids import PlanarGrid, make_radial_grid, sample_planar

LOG2_GAMMA = math.log(2) - np.euler_gamma / 2


def on(form, N=2048, R=100.0):
    return form.on_grid(default_grid_for(form, N, R))


def test_self_cell_constant_closed_form():
    assert self_cell_constant() == pytest.approx(math.log(2) / 3 + math.pi / 3 - 25 / 12, abs=1e-12)


def test_poisson_potential_of_rho_star():
    W = poisson_potential(on(ClosedForm.rho_star()))
    r = np.linspace(0, 10, 1001)
    assert np.max(np.abs(W(r) + np.log1p(r * r) / (4 * math.pi))) < 1e-5
    assert W(np.array([1.0]))[0] == pytest.approx(-math.log(2) / (4 * math.pi), abs=1e-6)


def test_potential_pairs_with_interaction():
    # I = -2 pi int rho W
    x = on(ClosedForm.gaussian())
    W = poisson_potential(x)
    g = x.grid
    val = 2 * math.pi * (g.weights @ (x.values * W(g.nodes)))
    assert -2 * math.pi * val == pytest.approx(interaction(x), abs=1e-9)


def test_newton_matches_direct_pair_sum():
    # the direct sum treats the kink of log max(s, s') crudely, so it converges slowly
    from loglab.grids import RadialDensity
    form = ClosedForm.annulus_bump()
    g = make_radial_grid(4096, 2.02)
    x = RadialDensity(g, form(g.nodes))
    assert interaction_newton_direct(x) == pytest.approx(interaction(x), rel=1e-4)


@given(M=st.floats(0.2, 5.0))
def test_interaction_homogeneous_in_mass(M):
    assert interaction(on(ClosedForm.gaussian(M))) == pytest.approx(M * M * LOG2_GAMMA, rel=1e-10)


def test_planar_fft_matches_direct():
    pg = PlanarGrid(0.25, 6.0)
    x = sample_planar(ClosedForm.gaussian(), (0.3, -0.2), pg)
    assert interaction_planar(x, "fft") == pytest.approx(interaction_planar(x, "direct"), rel=1e-10)
    with pytest.raises(ValueError):
        interaction_planar(x, "direct", max_cells=100)


def test_planar_translation_invariance():
    pg = PlanarGrid(0.1, 8.0)
    a = interaction_planar(sample_planar(ClosedForm.gaussian(), (0.0, 0.0), pg))
    b = interaction_planar(sample_planar(ClosedForm.gaussian(), (1.5, -2.0), pg))
    assert a == pytest.approx(b, rel=1e-6)
    assert a == pytest.approx(LOG2_GAMMA, rel=2e-3)


@pytest.mark.parametrize("x0", [0.0, 0.7, 3.0])
def test_translated_moment_against_quadrature(x0):
    form = ClosedForm.gaussian()
    x = on(form)

    def ang(r):
        return quad(lambda t: math.log1p(r * r + x0 * x0 + 2 * r * x0 * math.cos(t)), 0, math.pi)[0] / math.pi

    ref = quad(lambda r: 2 * math.pi * r * form(np.array([r]))[0] * ang(r), 0, 12, limit=200)[0]
    assert potential_moment_translated(x, x0) == pytest.approx(ref, rel=1e-8)


def test_kinetic_of_gaussian_wave():
    u = ClosedForm.gaussian().wave_on_grid(default_grid_for(ClosedForm.gaussian()))
    assert kinetic(u) == pytest.approx(0.5, abs=1e-10)


def test_free_energy_examples():
    star = on(ClosedForm.rho_star())
    assert free_energy(star, FreeEnergyParams(4.0, 2.0)) == pytest.approx(1 - math.log(math.pi), abs=1e-9)
    assert free_energy(star, FreeEnergyParams(2.0, 0.0)) == pytest.approx(-math.log(math.pi), abs=1e-9)
    t = free_energy_terms(star, FreeEnergyParams(1.0, 1.0))
    assert t["energy"] == pytest.approx(t["entropy"] + t["potential_moment"] - t["interaction"], abs=1e-14)


def test_free_energy_mass_check():
    with pytest.raises(ValueError):
        free_energy(on(ClosedForm.rho_star(2.0)), FreeEnergyParams(1.0, 0.0, M=1.0))


def test_schrodinger_gaussian_example():
    u = ClosedForm.gaussian().wave_on_grid(default_grid_for(ClosedForm.gaussian()))
    E = schrodinger_energy(u, SchrodingerParams(0.0, 1.0, 0.0))
    assert E == pytest.approx(0.5 - LOG2_GAMMA, abs=1e-9)


def test_log_moment_gaussian():
    assert log_moment(on(ClosedForm.gaussian())) == pytest.approx(math.log(2) - np.euler_gamma, abs=1e-10)


def test_entropy_on_plain_grid_without_series():
    g = make_radial_grid(2048, 12.0)
    from loglab.grids import RadialDensity
    x = RadialDensity(g, np.exp(-g.nodes ** 2 / 2) / (2 * math.pi))
    assert entropy(x) == pytest.approx(-(1 + math.log(2 * math.pi)), abs=1e-8)
    assert potential_moment(x) > 0
