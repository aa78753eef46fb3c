import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chargedmass import catalog as cat
from chargedmass import jets as J
from chargedmass.conformal import (
    ConformalTriple,
    eq2_residual,
    eq2_sides,
    mass_additivity,
    mass_difference_identity,
    power_rescale,
    rescale,
    scalar_relation_residual,
    scalar_relation_sides,
    transform_residuals,
)
from chargedmass.errors import DomainError
from chargedmass.fields import MetricField, ScalarField
from chargedmass.geometry import scalar_curvature
from chargedmass.quadrature import SphereQuadrature

from conftest import annulus_points, catalog_entries, entry_id

QUAD = SphereQuadrature()
FLAT = MetricField.euclidean()
FAMILY = [cat.radial_conformal(0.5), cat.radial_conformal(-0.5)]


# ------------------------------------------------------------------ rescale


def test_rescale_examples():
    f = cat.radial_conformal(2.0)
    assert rescale(FLAT, f, 0.0) is FLAT
    gp = rescale(FLAT, f, 1.0)
    assert float(gp.component(0, 0)((2.0, 0.0, 0.0))) == pytest.approx(math.e, rel=1e-15)
    assert float(gp.component(0, 1)((2.0, 0.0, 0.0))) == 0.0
    assert gp.has_exact_jet


@settings(max_examples=25, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_rescale_composes(c1, c2):
    g = cat.schwarzschild_isotropic(1.0).metric
    f = cat.radial_conformal(0.5)
    pts = annulus_points(2.0, 20.0, 8)
    np.testing.assert_allclose(rescale(rescale(g, f, c1), f, c2)(pts), rescale(g, f, c1 + c2)(pts), rtol=1e-13)


def test_power_rescale_matches_exponential():
    phi = cat.harmonic_hair(1.0)
    log_phi = ScalarField.from_formula(lambda x, y, z, r: 4.0 * J.log(1.0 / r))
    pts = annulus_points(2.0, 20.0, 8)
    np.testing.assert_allclose(power_rescale(FLAT, phi)(pts), rescale(FLAT, log_phi, 1.0)(pts), rtol=1e-13)


def test_triple_conventions():
    f = FAMILY[0]
    t = ConformalTriple(FLAT, f)
    p = (3.0, 0.0, 0.0)
    assert float(t.g_prime.component(0, 0)(p)) == pytest.approx(math.exp(2 * 0.5 / 3))
    assert float(t.g_bar.component(0, 0)(p)) == pytest.approx(math.exp(0.5 / 3))
    assert ConformalTriple(FLAT, f, "ef").g_bar is None
    with pytest.raises(ValueError):
        ConformalTriple(FLAT, f, "e4f")


# ------------------------------------------------ scalar curvature relation


@pytest.mark.parametrize("a", [0.5, -0.5, 1.3])
def test_eq2_flat_closed_form(a):
    f = cat.radial_conformal(a)
    pts = annulus_points(1.0, 30.0, 64)
    r = np.linalg.norm(pts, axis=-1)
    expected = -0.5 * np.exp(-a / r) * a**2 / r**4
    lhs, rhs = eq2_sides(FLAT, f, pts)
    np.testing.assert_allclose(lhs, expected, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(rhs, expected, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("f", FAMILY, ids=["a=+0.5", "a=-0.5"])
@pytest.mark.parametrize("entry", catalog_entries(), ids=entry_id)
def test_eq2_residual_grid(entry, f):
    pts = annulus_points(entry.r_min + 1.0, 60.0, 200, seed=3)
    assert np.max(np.abs(eq2_residual(entry.metric, f, pts))) < 1e-5


def test_eq2_residual_with_fd_route():
    g = cat.rn_slice(2.0, 1.0).metric.without_exact_jet()
    pts = annulus_points(5.0, 40.0, 32)
    assert np.max(np.abs(eq2_residual(g, FAMILY[0].without_exact_jet(), pts))) < 1e-5


# ------------------------------------------------ field transformation laws


@pytest.mark.parametrize("convention", ["contravariant", "covariant"])
@pytest.mark.parametrize("E", [cat.coulomb(1.0), cat.rn_slice(2.0, 1.0).E], ids=["coulomb", "rn"])
def test_transform_laws(convention, E):
    g = cat.schwarzschild_isotropic(1.0).metric
    f = cat.radial_conformal(0.7)
    p = (2.0, 1.0, 2.0) if E.r_min < 3.0 else (4.0, 2.0, 4.0)
    norm_res, div_res = transform_residuals(g, f, E, p, convention)
    assert abs(float(norm_res)) < 1e-12
    assert abs(float(div_res)) < 1e-12


def test_transform_law_on_grid():
    pts = annulus_points(2.0, 30.0, 64)
    E = cat.coulomb(-2.0)
    norm_res, div_res = transform_residuals(FLAT, cat.radial_conformal(-0.5), E, pts)
    assert np.max(np.abs(norm_res)) < 1e-12 and np.max(np.abs(div_res)) < 1e-12
    with pytest.raises(ValueError):
        transform_residuals(FLAT, FAMILY[0], E, pts, "mixed")


# ------------------------------------------------------------ mass additivity


def test_mass_additivity_flat():
    res = mass_additivity(FLAT, cat.radial_conformal(0.5), quad=QUAD)
    assert res.m_g.value == pytest.approx(0.0, abs=1e-10)
    assert res.m_g_prime.value == pytest.approx(0.5, abs=1e-3)
    assert res.m_g_bar.value == pytest.approx(0.25, abs=1e-3)
    assert abs(res.residual) < 1e-3


@pytest.mark.parametrize("f", FAMILY, ids=["a=+0.5", "a=-0.5"])
@pytest.mark.parametrize("entry", catalog_entries(), ids=entry_id)
def test_mass_additivity_grid(entry, f):
    assert abs(mass_additivity(entry.metric, f, quad=QUAD).residual) < 1e-3


# --------------------------------------------- inner-boundary mass identity


@pytest.mark.parametrize("a", [0.4, -0.4])
def test_mass_difference_flat_closed_form(a):
    md = mass_difference_identity(FLAT, cat.radial_conformal(a), 1.0, quad=QUAD)
    assert md.lhs == pytest.approx(a / 2, abs=1e-3)
    assert md.boundary_term == pytest.approx(0.5 * a * math.exp(a / 4), abs=1e-9)
    assert md.bulk_term == pytest.approx(0.5 * a * (1 - math.exp(a / 4)), abs=1e-6)
    assert abs(md.residual) < 1e-3
    assert md.convention == "ef" and md.normal_orientation == "decreasing-r"


def test_mass_difference_schwarzschild():
    md = mass_difference_identity(cat.schwarzschild_isotropic(1.0).metric, cat.radial_conformal(0.4), 1.0, quad=QUAD)
    assert abs(md.residual) < 5e-3


def test_truncation_error_halves():
    f = cat.radial_conformal(0.4)
    res = []
    for top in (128.0, 256.0, 512.0):
        radii = tuple(top / 2**k for k in range(4, -1, -1))
        res.append(mass_difference_identity(FLAT, f, 1.0, radii, QUAD, tail="none").residual)
    for coarse, fine in zip(res[:-1], res[1:]):
        assert 0.5 * 2.0 <= coarse / fine <= 1.5 * 2.0


def test_mass_difference_validation():
    f = cat.radial_conformal(0.4)
    with pytest.raises(DomainError):
        mass_difference_identity(FLAT, f, 20.0)
    with pytest.raises(DomainError):
        mass_difference_identity(cat.rn_slice(2.0, 1.0).metric, f, 3.0)
    with pytest.raises(ValueError):
        mass_difference_identity(FLAT, f, 1.0, tail="spline")


# ------------------------------------------------------ conformal scalar field


def test_scalar_relation_schwarzschild_from_flat():
    phi = ScalarField.from_formula(lambda x, y, z, r: 1.0 + 0.5 / r)
    pts = annulus_points(1.0, 30.0, 64)
    direct, relation = scalar_relation_sides(FLAT, phi, pts)
    assert np.max(np.abs(direct)) < 1e-10 and np.max(np.abs(relation)) < 1e-12


def test_scalar_relation_nonharmonic_closed_form():
    a = 0.3
    phi = ScalarField.from_formula(lambda x, y, z, r: 1.0 + a / r**2)
    pts = annulus_points(1.0, 30.0, 64)
    r = np.linalg.norm(pts, axis=-1)
    expected = -16.0 * a / r**4 / (1.0 + a / r**2) ** 5
    direct, relation = scalar_relation_sides(FLAT, phi, pts)
    np.testing.assert_allclose(relation, expected, rtol=1e-12)
    np.testing.assert_allclose(direct, expected, rtol=1e-8, atol=1e-14)


def test_unit_field_leaves_curvature_unchanged():
    g = cat.rn_slice(2.0, 1.0).metric
    pts = annulus_points(5.0, 40.0, 32)
    direct, relation = scalar_relation_sides(g, ScalarField.constant(1.0), pts)
    np.testing.assert_allclose(direct, scalar_curvature(g, pts), atol=1e-14)
    np.testing.assert_allclose(relation, scalar_curvature(g, pts), atol=1e-14)


@pytest.mark.parametrize("entry", catalog_entries(), ids=entry_id)
def test_scalar_relation_residual_catalog(entry):
    phi = ScalarField.from_formula(lambda x, y, z, r: 1.0 + 0.5 / r + 0.2 / r**2)
    pts = annulus_points(entry.r_min + 1.0, 60.0, 200, seed=5)
    assert np.max(np.abs(scalar_relation_residual(entry.metric, phi, pts))) < 1e-5


def test_scalar_relation_requires_positive_field():
    with pytest.raises(DomainError):
        scalar_relation_sides(FLAT, cat.harmonic_hair(-1.0), annulus_points(2.0, 10.0, 16))
