import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chargedmass import catalog as cat
from chargedmass.asymptotics import DEFAULT_LADDER, adm_mass, adm_mass_at, charge_flux_at, extrapolate, flux_charge
from chargedmass.conformal import rescale
from chargedmass.fields import MetricField, ScalarField
from chargedmass.quadrature import SphereQuadrature

from conftest import catalog_entries, entry_id

QUAD = SphereQuadrature()
FLAT = MetricField.euclidean()


def linear_conformal(c):
    """``(1 + c/r) delta``, whose mass is c/2."""
    return MetricField.conformally_flat(ScalarField.from_formula(lambda x, y, z, r: 1 + c / r, decay=1.0))


# ------------------------------------------------------------- extrapolation


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-50, 50), st.floats(-500, 500))
def test_extrapolation_exact_on_model(v, c1, c2):
    radii = np.array(DEFAULT_LADDER)
    est = extrapolate(radii, v + c1 / radii + c2 / radii**2)
    assert est.value == pytest.approx(v, abs=1e-9 * (1 + abs(c1) + abs(c2)))
    assert est.error_estimate >= 0 and est.order == 3


def test_free_exponent_fit():
    radii = np.array(DEFAULT_LADDER)
    est = extrapolate(radii, 2.0 + 3.0 * radii**-0.5, p="auto")
    assert est.value == pytest.approx(2.0, abs=1e-8)
    assert est.diagnostics["p_fitted"] == pytest.approx(0.5, abs=1e-6)


def test_extrapolation_input_validation():
    with pytest.raises(ValueError):
        extrapolate([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        extrapolate([1.0, 3.0, 2.0], [0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        extrapolate([1.0, 2.0, 3.0], [0.0, 0.0, 0.0], order=3)


def test_non_monotone_tail_is_flagged_not_fatal():
    radii = np.array(DEFAULT_LADDER)
    vals = 1.0 + np.array([1e-4, -1e-3, 1e-2, -3e-2, 5e-2])
    est = extrapolate(radii, vals)
    assert not est.monotone_tail and est.diagnostics["flag"] == "non-monotone tail"
    assert math.isfinite(est.value)


# ------------------------------------------------------------------ ADM mass


def test_flat_mass_is_zero():
    assert abs(adm_mass(FLAT, quad=QUAD).value) < 1e-10


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_schwarzschild_mass(m):
    est = adm_mass(cat.schwarzschild_isotropic(m).metric, quad=QUAD)
    assert abs(est.value - m) < 1e-3
    assert est.monotone_tail


@pytest.mark.parametrize("c", [0.6, 1.0])
def test_linear_conformal_mass(c):
    assert abs(adm_mass(linear_conformal(c), quad=QUAD).value - c / 2) < 1e-3


@pytest.mark.parametrize("a, b", [(0.3, 0.7), (0.7, 0.3), (0.3, 0.3), (0.7, 0.7)])
def test_mass_linear_in_perturbation(a, b):
    m = lambda c: adm_mass(linear_conformal(c), quad=QUAD).value
    assert abs(m(a + b) - m(a) - m(b)) < 1e-4


@pytest.mark.parametrize("entry", catalog_entries(), ids=entry_id)
def test_induced_measure_agrees(entry):
    eucl = adm_mass(entry.metric, quad=QUAD).value
    induced = adm_mass(entry.metric, quad=QUAD, measure="induced").value
    assert abs(eucl - induced) < 1e-3
    assert abs(eucl - entry.known_invariants["mass"]) < 1e-3


def test_raw_deviation_is_first_order():
    g = cat.schwarzschild_isotropic(1.0).metric
    dev = {r: abs(adm_mass_at(g, r, QUAD) - 1.0) for r in (8.0, 16.0)}
    assert 1.5 <= dev[8.0] / dev[16.0] <= 2.5


def test_workers_do_not_change_bits():
    g = cat.rn_slice(2.0, 1.0).metric
    assert adm_mass(g, quad=QUAD).raw == adm_mass(g, quad=QUAD, workers=3).raw


def test_ladder_must_be_in_domain():
    with pytest.raises(ValueError):
        adm_mass(cat.rn_slice(2.0, 1.0).metric, radii=(3.0, 16.0, 32.0))
    with pytest.raises(ValueError):
        adm_mass(FLAT, radii=(16.0, 32.0))


# ------------------------------------------------------------------- charge


@pytest.mark.parametrize("q0", [1.0, -2.5])
def test_coulomb_flux_exact_at_every_radius(q0):
    est = flux_charge(FLAT, cat.coulomb(q0), quad=QUAD)
    assert max(abs(v - q0) for v in est.raw) < 1e-10
    assert abs(est.value - q0) < 1e-10


@pytest.mark.parametrize("m, q, p", [(2.0, 1.0, 0.0), (3.0, 1.0, 2.0), (2.0, 0.0, 1.0)])
def test_rn_charges(m, q, p):
    e = cat.rn_slice(m, q, p)
    assert abs(flux_charge(e.metric, e.E, quad=QUAD).value - q) < 1e-8
    assert abs(flux_charge(e.metric, e.B, quad=QUAD).value - p) < 1e-8
    assert abs(charge_flux_at(e.metric, e.E, 20.0, QUAD) - q) < 1e-12


def test_coulomb_in_conformal_metric():
    gbar = rescale(FLAT, cat.radial_conformal(0.7), 1.0)
    assert abs(flux_charge(gbar, cat.coulomb(1.0), quad=QUAD).value - 1.0) < 1e-6


@pytest.mark.parametrize("a", [-0.5, 0.5])
@pytest.mark.parametrize("tau", [0.5, 1.0])
def test_charge_conformal_invariance(a, tau):
    f = cat.radial_conformal(a, tau)
    base = cat.rn_slice(2.0, 1.0)
    q_g = flux_charge(base.metric, base.E, quad=QUAD, p=tau).value
    for c in (1.0, 2.0):
        q_c = flux_charge(rescale(base.metric, f, c), base.E, quad=QUAD, p=tau).value
        assert abs(q_c - q_g) < 1e-4
