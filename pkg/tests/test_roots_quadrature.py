import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, optimize

from goodwin.quadrature import tanh_sinh
from goodwin.roots import RootFindingError, bracketed_root, expand_upper


@given(st.floats(0.05, 20.0))
def test_bracketed_root_matches_brentq(c):
    f = lambda x: x ** 3 + x - c  # noqa: E731
    ours = bracketed_root(f, 0.0, 10.0, fprime=lambda x: 3 * x ** 2 + 1)
    ref = optimize.brentq(f, 0.0, 10.0, xtol=1e-15)
    assert abs(ours - ref) <= 1e-12 * max(1.0, ref)


def test_bracketed_root_vectorised():
    c = np.array([0.1, 1.0, 4.0, 9.0])
    r = bracketed_root(lambda x: x * x - c, np.zeros(4), np.full(4, 5.0))
    np.testing.assert_allclose(r, np.sqrt(c), rtol=1e-12)


def test_bracketed_root_rejects_bad_bracket():
    with pytest.raises(RootFindingError):
        bracketed_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_expand_upper_finds_sign_change():
    hi = expand_upper(lambda x: np.log1p(x) - 5.0, 0.0, target_sign=1.0, limit=math.inf)
    assert math.log1p(hi) > 5.0


@pytest.mark.parametrize("f, a, b, exact", [
    (lambda x: np.exp(x), 0.0, 1.0, math.e - 1.0),
    (lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, 2.0),
    (lambda x: np.log(x), 0.0, 1.0, -1.0),
    (lambda x: x * x, -1.0, 2.0, 3.0),
])
def test_tanh_sinh_known_integrals(f, a, b, exact):
    res = tanh_sinh(f, a, b, tol=1e-11)
    assert abs(res.value - exact) < 1e-9


def test_tanh_sinh_endpoint_distances_match_quad():
    # 1/sqrt(d) singular at both ends, evaluated from the exact distances
    g = lambda x, dl, dr: 1.0 / np.sqrt(dl) + 1.0 / np.sqrt(dr) + np.cos(x)  # noqa: E731
    res = tanh_sinh(g, 0.3, 2.0, endpoint_distances=True, tol=1e-11)
    ref = 4.0 * math.sqrt(1.7) + math.sin(2.0) - math.sin(0.3)
    assert abs(res.value - ref) < 1e-9


def test_tanh_sinh_arcsine_from_distances():
    res = tanh_sinh(lambda x, dl, dr: 1.0 / np.sqrt(dl * dr), -1.0, 1.0,
                    endpoint_distances=True, tol=1e-12)
    assert abs(res.value - math.pi) < 1e-10


@given(st.floats(0.1, 5.0), st.floats(-2.0, 2.0))
def test_tanh_sinh_smooth_against_scipy(k, a):
    f = lambda x: np.sin(k * x) * np.exp(-x * x)  # noqa: E731
    ref, _ = integrate.quad(f, a, a + 1.5, epsabs=1e-13)
    assert abs(tanh_sinh(f, a, a + 1.5, tol=1e-11).value - ref) < 1e-9
