import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chargedmass import catalog as cat
from chargedmass import jets as J
from chargedmass.errors import DomainError, EvaluationError
from chargedmass.fields import (
    ChartPoint,
    MetricField,
    ScalarField,
    VectorField,
    combine,
    decay_report,
    field_jet,
    is_positive_definite,
    jet,
    metric_jet,
    vector_decay_report,
)

from conftest import annulus_points, catalog_entries, entry_id

coords = st.floats(-20, 20, allow_nan=False)
far_point = st.tuples(coords, coords, coords).filter(lambda p: np.linalg.norm(p) > 3.0)


def test_chart_point_radius():
    p = ChartPoint(3.0, 4.0, 12.0)
    assert p.r == 13.0
    np.testing.assert_array_equal(p.as_array(), [3, 4, 12])


@pytest.mark.parametrize("exact", [True, False], ids=["exact", "fd"])
def test_inverse_radius_jet(exact):
    f = cat.harmonic_hair(1.0)
    f = f if exact else f.without_exact_jet()
    val, grad, hess = jet(f, ChartPoint(2.0, 0.0, 0.0))
    assert val == pytest.approx(0.5)
    np.testing.assert_allclose(grad, [-0.25, 0, 0], atol=1e-10)
    # d2(1/r) = (3 x_i x_j - r^2 delta_ij) / r^5
    np.testing.assert_allclose(hess, np.diag([0.25, -0.125, -0.125]), atol=1e-7)


@pytest.mark.parametrize("p", [(1.0, 2.0, 3.0), (50.0, -1.0, 0.0)])
def test_constant_field_has_zero_derivatives(p):
    for f in (ScalarField.constant(2.5), ScalarField.constant(2.5).without_exact_jet()):
        val, grad, hess = jet(f, p)
        assert val == 2.5
        np.testing.assert_array_equal(grad, 0.0)
        np.testing.assert_array_equal(hess, 0.0)


def test_fd_jet_of_schwarzschild_component_matches_exact():
    comp = cat.schwarzschild_isotropic(1.0).metric.component(0, 0)
    pts = 10.0 * np.array([[1, 0, 0], [0.6, 0, 0.8], [0.48, -0.6, 0.64]])
    for a, b in zip(jet(comp, pts), jet(comp.without_exact_jet(), pts)):
        assert np.max(np.abs(a - b)) < 1e-8


@settings(max_examples=50, deadline=None)
@given(far_point)
def test_exact_jet_value_equals_evaluator(p):
    for comp in cat.rn_slice(1.5, 1.0, 0.5).metric.components:  # r_+ = 2.5
        j = field_jet(comp, p)
        assert j.val == pytest.approx(float(comp(p)), rel=1e-15, abs=1e-15)
        np.testing.assert_allclose(j.hess, np.swapaxes(j.hess, -1, -2), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(far_point)
def test_product_rule_consistency(p):
    f = cat.radial_conformal(0.7).without_exact_jet()
    g = cat.schwarzschild_isotropic(1.0).metric.component(0, 1).without_exact_jet()
    prod = combine(lambda a, b: a * b, f, g)
    assert prod.exact_jet is None
    _, grad, _ = jet(prod, p)
    fv, fg, _ = jet(f, p)
    gv, gg, _ = jet(g, p)
    np.testing.assert_allclose(grad, fv * gg + gv * fg, atol=1e-6)


def test_fd_gradient_converges_at_fourth_order():
    f = ScalarField.from_formula(lambda x, y, z, r: J.exp(0.3 * x) * J.sin(0.2 * y) + z * z * x / r)
    p = np.array([1.1, 2.3, -0.7])
    exact = field_jet(f, p).grad
    errors = [np.linalg.norm(field_jet(f.without_exact_jet(), p, h_rel=h).grad - exact) for h in (0.04, 0.02, 0.01)]
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    for ratio in ratios:
        assert 12.0 < ratio < 20.0, ratios


def test_domain_checks():
    f = cat.schwarzschild_isotropic(1.0).metric.component(0, 0)
    with pytest.raises(DomainError):
        f((0.2, 0.0, 0.0))
    # on the boundary sphere exact jets work, the FD stencil does not
    field_jet(f, (0.5, 0.0, 0.0))
    with pytest.raises(DomainError):
        field_jet(f.without_exact_jet(), (0.5 + 1e-5, 0.0, 0.0))


def test_non_finite_values_raise():
    f = ScalarField.from_formula(lambda x, y, z, r: J.log(x - 1.0))
    with np.errstate(all="ignore"), pytest.raises(EvaluationError):
        f((1.0, 0.0, 0.0))


def test_vector_and_metric_shapes():
    V = cat.coulomb(1.0)
    pts = np.ones((4, 2, 3))
    assert V(pts).shape == (4, 2, 3)
    assert VectorField.zero()(pts).shape == (4, 2, 3)
    g = cat.rn_slice(2.0, 1.0).metric
    gij, dg, ddg = metric_jet(g, 5 * pts)
    assert gij.shape == (4, 2, 3, 3) and dg.shape == (4, 2, 3, 3, 3) and ddg.shape == (4, 2, 3, 3, 3, 3)
    np.testing.assert_allclose(gij, np.swapaxes(gij, -1, -2))
    np.testing.assert_allclose(g(5 * pts), gij)


@pytest.mark.parametrize("entry", catalog_entries(), ids=entry_id)
def test_catalog_metrics_positive_definite(entry):
    pts = annulus_points(entry.r_min + 1.0, 100.0, 1000, seed=11)
    assert np.all(is_positive_definite(entry.metric, pts))


def test_decay_report_euclidean_is_zero():
    rep = decay_report(MetricField.euclidean(), [16, 32, 64], tau=1.0)
    assert np.all(rep.scaled == 0) and rep.bounded


def test_decay_report_schwarzschild_tends_to_2m():
    rep = decay_report(cat.schwarzschild_isotropic(1.0).metric, [16, 32, 64, 128, 256], tau=1.0)
    assert rep.bounded
    assert rep.scaled[-1] == pytest.approx(2.0, rel=0.01)
    assert np.all(np.abs(np.diff(rep.scaled)) < 0.1)
    assert [row["radius"] for row in rep.rows()] == [16, 32, 64, 128, 256]


def test_decay_report_linear_conformal_factor():
    g = MetricField.conformally_flat(ScalarField.from_formula(lambda x, y, z, r: 1 + 1 / r, decay=1.0))
    rep = decay_report(g, [16, 64, 256])
    np.testing.assert_allclose(rep.scaled, 1.0, rtol=1e-12)


def test_decay_report_detects_slow_decay():
    g = MetricField.conformally_flat(ScalarField.from_formula(lambda x, y, z, r: 1 + r**-0.25, decay=1.0))
    assert not decay_report(g, [16, 64, 256, 1024]).bounded


def test_vector_decay_report_for_coulomb():
    rep = vector_decay_report(cat.coulomb(1.0), [16, 32, 64, 128])
    np.testing.assert_allclose(rep.scaled, 1.0, rtol=1e-12)
    assert rep.bounded
