import math

import numpy as np
import pytest

from qdphonons.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureError,
    integrate,
    trapezoid,
)


def test_rule_constants():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    np.testing.assert_allclose(NODES, -NODES[::-1], atol=0)
    assert np.count_nonzero(GAUSS_WEIGHTS) == 7


@pytest.mark.parametrize("k", range(0, 23))
def test_kronrod_exact_to_degree_22(k):
    exact = 0.0 if k % 2 else 2.0 / (k + 1)
    assert float(KRONROD_WEIGHTS @ NODES**k) == pytest.approx(exact, abs=2e-15)


@pytest.mark.parametrize("k", range(0, 14))
def test_gauss_exact_to_degree_13(k):
    exact = 0.0 if k % 2 else 2.0 / (k + 1)
    assert float(GAUSS_WEIGHTS @ NODES**k) == pytest.approx(exact, abs=2e-15)


def test_smooth_integrals():
    assert integrate(np.exp, 0.0, 1.0).value == pytest.approx(math.e - 1, rel=1e-14)
    r = integrate(lambda x: np.cos(50 * x), 0.0, 3.0, rel_tol=1e-12)
    assert r.value == pytest.approx(math.sin(150) / 50, abs=1e-12)


def test_peaked_integrand_refines():
    r = integrate(lambda x: 1e-3 / (x**2 + 1e-6), -1.0, 1.0, rel_tol=1e-10)
    assert r.value == pytest.approx(2 * math.atan(1e3), rel=1e-10)
    assert r.rounds > 1


def test_max_step_respected():
    r = integrate(np.sin, 0.0, 10.0, max_step=0.1)
    assert r.n_panels >= 100


def test_vector_integrand():
    w = np.array([0.0, 1.0, 2.0])
    r = integrate(lambda x: np.cos(np.outer(x, w)), 0.0, 1.0, n_components=3)
    np.testing.assert_allclose(r.value, [1.0, math.sin(1.0), math.sin(2.0) / 2], rtol=1e-13)


def test_depth_limit():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.where(x > 1 / 3, 1.0, 0.0), 0.0, 1.0, rel_tol=1e-15, max_depth=3)
    assert info.value.error > 0


def test_degenerate_interval_and_bad_limits():
    assert integrate(np.exp, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(np.exp, 1.0, 0.0)


def test_deterministic():
    f = lambda x: np.exp(-x) * np.cos(37 * x) ** 2
    a = integrate(f, 0.0, 5.0, rel_tol=1e-12)
    b = integrate(f, 0.0, 5.0, rel_tol=1e-12)
    assert a == b


def test_trapezoid():
    x = np.linspace(0, 1, 1001)
    assert trapezoid(x**2, x[1]) == pytest.approx(1 / 3, abs=2e-7)
    assert trapezoid([1.0], 0.1) == 0.0
