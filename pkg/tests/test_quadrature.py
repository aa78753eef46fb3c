import math

import numpy as np
import pytest
from scipy.special import sph_harm_y

from chargedmass.quadrature import SphereQuadrature, compensated_sum, gauss_legendre_interval


@pytest.mark.parametrize("orders", [(4, 8), (16, 32), (32, 64)])
def test_weights_sum_to_sphere_area(orders):
    q = SphereQuadrature(*orders)
    assert abs(q.weights.sum() - 4 * math.pi) < 1e-12
    np.testing.assert_allclose(np.linalg.norm(q.nodes, axis=-1), 1.0, atol=1e-15)
    assert len(q) == orders[0] * orders[1]


@pytest.mark.parametrize("l, m", [(l, m) for l in (0, 1, 2, 5) for m in (0, 1) if m <= l])
def test_spherical_harmonics(l, m):
    q = SphereQuadrature()
    y = sph_harm_y(l, m, q.theta, q.phi)
    expected = math.sqrt(4 * math.pi) if (l, m) == (0, 0) else 0.0
    assert abs(q.integrate(y.real) - expected) < 1e-10
    assert abs(q.integrate(y.imag)) < 1e-10


def test_polynomial_exactness_up_to_degree():
    q = SphereQuadrature(8, 16)
    assert q.degree == 15
    z = q.nodes[:, 2]
    assert q.integrate(z**14) == pytest.approx(4 * math.pi / 15, rel=1e-13)


def test_compensated_sum_is_order_independent_on_cancellation():
    terms = [1e16, 1.0, -1e16, 1.0]
    assert compensated_sum(terms) == 2.0


def test_gauss_legendre_interval():
    x, w = gauss_legendre_interval(1.0, 3.0, 5)
    assert w.sum() == pytest.approx(2.0)
    assert (w * x**9).sum() == pytest.approx((3**10 - 1) / 10, rel=1e-13)
