import pytest

from loglab.closedforms import ClosedForm
from loglab.divergence import (FamilyKind, FamilySpec, analytic_slope, confirm_unbounded, dyadic,
                               evaluate_member, make_family, measure_slope)
from loglab.functionals import FreeEnergyParams, SchrodingerParams


def test_scale_up_slope():
    est = measure_slope(FamilySpec(FamilyKind.SCALE, dyadic(0, 6)), FreeEnergyParams(0.0, -3.0))
    assert est.analytic_slope == pytest.approx(-1.0)
    assert est.relative_error < 1e-6 and est.confirmed


def test_scale_down_slope():
    est = measure_slope(FamilySpec(FamilyKind.SCALE, dyadic(0, 6, -1), ClosedForm.annulus_bump()),
                        FreeEnergyParams(0.0, 0.0))
    assert est.slope == pytest.approx(2.0, rel=1e-6)
    assert est.divergence_slope < 0 and est.confirmed


def test_two_bubble_slope():
    est = measure_slope(FamilySpec(FamilyKind.TWO_BUBBLE, dyadic(2, 8, -1), ClosedForm.annulus_bump(), eps=0.3),
                        FreeEnergyParams(2.0, 1.5))
    assert est.analytic_slope == pytest.approx(0.165)
    assert est.relative_error < 0.05 and est.confirmed


def test_wave_scale_kinetic_is_sublogarithmic():
    est = measure_slope(FamilySpec(FamilyKind.WAVE_SCALE, dyadic(0, 6, -1), ClosedForm.gaussian()),
                        SchrodingerParams(0.0, 1.0, 0.0))
    assert est.confirmed
    assert abs(est.term_slopes["kinetic"]) < 0.05


def test_lattice_entropy_term_and_monotonicity():
    spec = FamilySpec(FamilyKind.LATTICE, tuple(range(2, 9)), ClosedForm.unit_ball_bump(), A=4.0)
    est = measure_slope(spec, FreeEnergyParams(0.0, 0.0, c=-1.0))
    energies = est.energies
    assert all(e2 < e1 for e1, e2 in zip(energies, energies[1:]))
    # exact entropy scaling: -c * 2(A-1) log n
    assert est.term_slopes["entropy"] == pytest.approx(6.0, rel=1e-3)


def test_members_carry_mass():
    spec = FamilySpec(FamilyKind.TWO_BUBBLE, dyadic(2, 4, -1), ClosedForm.annulus_bump(2.0), eps=0.25)
    for m in make_family(spec):
        assert m.density.mass == pytest.approx(2.0, rel=1e-6)


def test_spec_validation():
    with pytest.raises(ValueError):
        FamilySpec(FamilyKind.TWO_BUBBLE, (0.1, 0.2), ClosedForm.rho_star(), eps=0.3)
    with pytest.raises(ValueError):
        FamilySpec(FamilyKind.TWO_BUBBLE, (0.6,), ClosedForm.annulus_bump(), eps=0.3)
    with pytest.raises(ValueError):
        FamilySpec(FamilyKind.LATTICE, (2, 3), ClosedForm.unit_ball_bump(), A=0.5)
    with pytest.raises(ValueError):
        measure_slope(FamilySpec(FamilyKind.SCALE, (1.0, 2.0)), FreeEnergyParams(0.0, -3.0))


def test_wave_family_needs_schrodinger():
    spec = FamilySpec(FamilyKind.WAVE_SCALE, dyadic(0, 6, -1), ClosedForm.gaussian())
    with pytest.raises(ValueError):
        measure_slope(spec, FreeEnergyParams(0.0, 0.0))
    member = next(make_family(FamilySpec(FamilyKind.SCALE, (1.0,))))
    with pytest.raises(ValueError):
        evaluate_member(member, SchrodingerParams(1.0, 0.0, 0.0))


@pytest.mark.parametrize("p", [FreeEnergyParams(-0.5, 0.0), FreeEnergyParams(1.0, -3.0), FreeEnergyParams(1.0, 0.0),
                               FreeEnergyParams(0.5, 0.0), FreeEnergyParams(3.0, 2.5),
                               SchrodingerParams(-1.0, 0.0, 0.0), SchrodingerParams(0.0, 1.0, 1.0),
                               SchrodingerParams(1.0, 3.0, 0.5)])
def test_confirm_unbounded_witnesses(p):
    assert confirm_unbounded(p).confirmed


def test_confirm_unbounded_rejects_bounded():
    with pytest.raises(ValueError):
        confirm_unbounded(FreeEnergyParams(2.0, 0.0))


def test_analytic_slope_unknown_family():
    spec = FamilySpec(FamilyKind.ZETA_LIMIT, dyadic(2, 8, -1))
    assert analytic_slope(spec, FreeEnergyParams(2.0, 0.0)) is None
