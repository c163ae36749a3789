import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilience_uq.errors import DimensionTooLarge, NonFiniteValue
from resilience_uq.orthopoly import hermite_eval
from resilience_uq.quadrature import gauss_hermite, integrate_mean, tensor_gauss_legendre


def test_midpoint_rule():
    r = tensor_gauss_legendre(1, 1)
    assert r.nodes.shape == (1, 1)
    assert r.nodes[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert r.weights[0] == pytest.approx(2.0)


def test_tensor_structure():
    r = tensor_gauss_legendre(2, 3)
    assert r.nodes.shape == (9, 2)
    assert r.weights.sum() == pytest.approx(4.0, rel=1e-12)


def test_x8_exact():
    r = tensor_gauss_legendre(1, 5)
    assert r.weights @ r.nodes[:, 0] ** 8 == pytest.approx(2 / 9, rel=1e-12)


def test_mapped_interval_volume():
    r = tensor_gauss_legendre(3, 4, a=0.0, b=2.5)
    assert r.weights.sum() == pytest.approx(2.5**3, rel=1e-12)
    assert r.nodes.min() > 0 and r.nodes.max() < 2.5


@pytest.mark.parametrize("d, p", [(1, 6), (2, 4), (3, 3)])
def test_monomial_exactness(d, p):
    a, b = -0.5, 2.0
    r = tensor_gauss_legendre(d, p, a, b)
    top = 2 * p - 1
    for degs in np.ndindex(*([top + 1] * d)):
        q = r.weights @ np.prod(r.nodes ** np.array(degs), axis=1)
        exact = math.prod((b ** (k + 1) - a ** (k + 1)) / (k + 1) for k in degs)
        assert q == pytest.approx(exact, rel=1e-10, abs=1e-12)


def test_node_budget():
    with pytest.raises(DimensionTooLarge):
        tensor_gauss_legendre(6, 20)
    with pytest.raises(DimensionTooLarge):
        tensor_gauss_legendre(2, 10, node_budget=99)


@pytest.mark.parametrize("h, expected", [
    (lambda u: np.ones(len(u)), 1.0),
    (lambda u: u[:, 0], 0.0),
    (lambda u: u[:, 0] ** 2, 1 / 3),
])
def test_integrate_mean_examples(h, expected):
    assert integrate_mean(tensor_gauss_legendre(1, 8), h) == pytest.approx(expected, abs=1e-14)


def test_integrate_mean_nonfinite():
    with pytest.raises(NonFiniteValue):
        integrate_mean(tensor_gauss_legendre(1, 4), lambda u: np.where(u[:, 0] > 0, np.inf, 1.0))


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 5), st.integers(0, 5))
def test_integrate_mean_linear(alpha, beta, j, k):
    r = tensor_gauss_legendre(2, 5, 0.0, 1.0)
    h1 = lambda u: u[:, 0] ** j  # noqa: E731
    h2 = lambda u: np.cos(u[:, 1]) * u[:, 0] ** k  # noqa: E731
    lhs = integrate_mean(r, lambda u: alpha * h1(u) + beta * h2(u))
    rhs = alpha * integrate_mean(r, h1) + beta * integrate_mean(r, h2)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_gauss_hermite_one_point():
    r = gauss_hermite(1)
    assert r.nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert r.weights[0] == pytest.approx(1.0)


def test_gauss_hermite_moments():
    assert gauss_hermite(3).expect(lambda z: z**4) == pytest.approx(3.0, rel=1e-12)
    assert gauss_hermite(10).expect(lambda z: hermite_eval(3, z) ** 2) == pytest.approx(6.0, rel=1e-12)


@pytest.mark.parametrize("points", [1, 2, 5, 12, 20])
def test_gauss_hermite_raw_moments(points):
    r = gauss_hermite(points)
    assert r.weights.sum() == pytest.approx(1.0, rel=1e-13)
    for k in range(2 * points):
        exact = 0.0 if k % 2 else float(math.prod(range(k - 1, 0, -2)))
        got = r.expect(lambda z: z**k)
        # odd moments vanish; judge them against the scale of E|z|^k
        scale = r.expect(lambda z: np.abs(z) ** k)
        assert abs(got - exact) <= 1e-10 * max(scale, 1.0)
