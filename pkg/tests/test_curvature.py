import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushin_lab.curvature import (
    bakry_emery,
    bakry_emery_assembled,
    connection_coeffs,
    fd_frame_connection,
    fd_gauss_curvature,
    gauss_curvature,
    hessian_weight,
    metric_at,
    negativity_check,
    negativity_eigenvalues,
    ricci,
    weighted_data,
)
from grushin_lab.errors import BadDimension, SingularLocus

X_LOG_GRID = np.geomspace(0.1, 10, 21)


def test_examples():
    assert gauss_curvature((1, 0)) == pytest.approx(-2.0, abs=1e-15)
    assert gauss_curvature((-2, 5)) == pytest.approx(-0.5, abs=1e-15)
    assert fd_gauss_curvature((1, 0)) == pytest.approx(-2.0, abs=1e-4)
    be = bakry_emery((1, 0), 4).frame_components()
    assert np.allclose(be, [[-1.5, 0], [0, -1.0]], atol=1e-15)
    assert weighted_data((2, 0), 3).V == pytest.approx(-math.log(2))


@pytest.mark.parametrize("x", np.linspace(0.5, 3, 11))
def test_fd_gauss_matches_closed_form(x):
    assert abs(fd_gauss_curvature((x, 0.3)) + 2 / x**2) <= 1e-4


def test_fd_gauss_flat_sanity():
    # polar-like metric dr^2 + r^2 dth^2 is flat
    K = fd_gauss_curvature((1.3, 0.2), E=lambda a, b: 1.0, G=lambda a, b: a * a)
    assert abs(K) <= 1e-6


@pytest.mark.parametrize("x", [0.3, 1.0, -2.5, 7.0])
def test_connection_matches_christoffel(x):
    exact = connection_coeffs((x, 0.4))
    fd = fd_frame_connection((x, 0.4))
    for name in ("d11", "d12", "d21", "d22"):
        assert np.allclose(getattr(exact, name), getattr(fd, name), atol=1e-6)


@pytest.mark.parametrize("x", [0.2, 1.0, 4.0])
def test_hessian_of_weight_in_coordinates(x):
    # Hess V = d^2 V - Gamma^k_ij d_k V with V = -log x; coordinate form diag(1/x^2, 1/x^4)
    H = hessian_weight((x, 0)).components
    assert np.allclose(H, [[1 / x**2, 0], [0, 1 / x**4]], rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 20), st.floats(2.01, 100))
def test_assembled_equals_closed_form(x, N):
    a = bakry_emery_assembled((x, 0), N).components
    b = bakry_emery((x, 0), N).components
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12 / x**4)


@pytest.mark.parametrize("N", [2.001, 2.5, 3, 4, 5, 10, 50, 100])
def test_negativity_grid(N):
    for x in X_LOG_GRID:
        assert negativity_check((x, 0), N)
        ev = negativity_eigenvalues((x, 0), N)
        expected = sorted([-1 / (x * x * (N - 2)), 0.0])
        assert np.allclose(ev, expected, atol=1e-10)


def test_ricci_is_isotropic():
    R = ricci((2, 1)).frame_components()
    assert np.allclose(R, -0.5 * np.eye(2))
    assert np.allclose(metric_at((2, 1)).frame_components(), np.eye(2))


def test_errors():
    with pytest.raises(SingularLocus):
        gauss_curvature((0, 1))
    with pytest.raises(SingularLocus):
        fd_gauss_curvature((1e-4, 0))
    with pytest.raises(BadDimension):
        bakry_emery((1, 0), 2)


def test_plain_fd_is_second_order():
    e1 = abs(fd_gauss_curvature((1, 0), 2e-3, richardson=False) + 2)
    e2 = abs(fd_gauss_curvature((1, 0), 1e-3, richardson=False) + 2)
    assert e1 / e2 == pytest.approx(4, rel=0.05)
    assert fd_gauss_curvature((0.5, 0), 1e-4, richardson=False) == pytest.approx(-8, abs=1e-3)


def test_connection_is_metric_compatible():
    # X_k g(Xi, Xj) = g(nabla_k Xi, Xj) + g(Xi, nabla_k Xj); frame is orthonormal so the
    # left side vanishes and the coefficients must be antisymmetric in (i, j)
    for x in np.linspace(0.5, 3, 6):
        c = fd_frame_connection((x, 0))
        for k in ("1", "2"):
            d_k1, d_k2 = np.array(getattr(c, f"d{k}1")), np.array(getattr(c, f"d{k}2"))
            assert abs(d_k1[0]) <= 1e-5 and abs(d_k2[1]) <= 1e-5
            assert abs(d_k1[1] + d_k2[0]) <= 1e-5
