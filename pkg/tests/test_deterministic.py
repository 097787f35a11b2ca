import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from goodwin.deterministic import (NoReturnError, _growth_branches, integrate_ode, level_extent,
                                   linearized_period, orbit_period, period_by_return,
                                   ray_return_time)
from goodwin.model import PRESET, CurveSet, GoodwinModel

P0 = PRESET.replace(sigma0=0.0)
M0 = GoodwinModel.from_params(P0)
E0 = M0.equilibria


def test_equilibrium_is_fixed_point():
    tr = integrate_ode((E0.x_hat, E0.y_hat), 5.0, M0)
    assert np.all(tr.x == E0.x_hat)
    assert np.all(np.abs(tr.y - E0.y_hat) < 1e-15)


def test_trajectory_invariants():
    xu = level_extent(0.05, M0)[0]
    tr = integrate_ode((float(xu), E0.y_hat), 30.0, M0, record_stride=7)
    assert np.all(np.diff(tr.times) > 0)
    assert np.all(tr.x > 0) and np.all((tr.y > 0) & (tr.y < 1))
    assert len(tr) == 30000 // 7 + 1


@pytest.mark.parametrize("v0", [1e-4, 0.01, 0.1, 0.5])
def test_conservation_over_one_period(v0):
    r = orbit_period(v0, M0)
    tr = integrate_ode((r.x_under, E0.y_hat), r.t_formula, M0)
    assert np.max(np.abs(tr.V - v0)) / v0 < 1e-6


def test_time_reversal_returns_to_start():
    r = orbit_period(0.01, M0)
    n = round(r.t_formula / 1e-3)
    fwd = integrate_ode((r.x_under, E0.y_hat), r.t_formula, M0, dt=r.t_formula / n)
    back = integrate_ode((fwd.x[-1], fwd.y[-1]), r.t_formula, M0, dt=r.t_formula / n, reverse=True)
    assert math.hypot(back.x[-1] - r.x_under, back.y[-1] - E0.y_hat) < 1e-6


def test_closed_orbit_returns_after_formula_period():
    r = orbit_period(0.01, M0)
    n = round(r.t_formula / 1e-3)
    tr = integrate_ode((r.x_under, E0.y_hat), r.t_formula, M0, dt=r.t_formula / n)
    assert math.hypot(tr.x[-1] - r.x_under, tr.y[-1] - E0.y_hat) < 1e-5


def test_level_extent_residuals():
    xu, xb, yu, yb = (float(v) for v in level_extent(0.01, M0))
    assert 0 < xu < E0.x_hat < xb
    assert yu < E0.y_hat < yb < 1
    for val in (M0.V1(xu), M0.V1(xb), M0.V2(yu), M0.V2(yb)):
        assert abs(val - 0.01) < 1e-11


def test_level_extent_shrinks_to_equilibrium():
    ext = np.array([float(v) for v in level_extent(1e-14, M0)])
    np.testing.assert_allclose(ext, [E0.x_hat, E0.x_hat, E0.y_hat, E0.y_hat], atol=1e-6)


def test_level_equality_sweep():
    v0 = np.random.default_rng(3).uniform(1e-6, 1.0, 100)
    xu, xb, yu, yb = level_extent(v0, M0)
    assert np.max(np.abs(M0.V1(xu) - M0.V1(xb))) < 1e-11
    assert np.max(np.abs(M0.V2(yu) - M0.V2(yb))) < 1e-11


def test_growth_branches_monotone():
    g = np.linspace(0.0, 0.05, 200)
    up, um = _growth_branches(M0, g)
    assert up[0] == 0.0 and um[0] == 0.0
    assert np.all(np.diff(up) > 0) and np.all(np.diff(um) < 0)


def test_level_profile_vanishes_at_extent():
    # G(z) = v0 - V1(exp z) is zero at both ends and peaks at log x_hat
    r = orbit_period(0.02, M0)
    for x in (r.x_under, r.x_bar):
        assert abs(0.02 - M0.V1(x)) < 1e-10
    zs = np.linspace(math.log(r.x_under), math.log(r.x_bar), 2001)
    G = 0.02 - M0.V1(np.exp(zs))
    assert abs(zs[np.argmax(G)] - math.log(E0.x_hat)) < 2 * (zs[1] - zs[0])
    assert abs(G.max() - 0.02) < 1e-6


def test_period_frozen_value():
    # frozen after agreement with the return-time oracle to 1e-9
    r = orbit_period(0.01, M0)
    assert r.t_formula == pytest.approx(10.073474198057337, rel=1e-10)
    assert r.quad_error < 1e-9


def test_period_matches_return_oracle():
    r = orbit_period(0.01, M0)
    t = period_by_return((r.x_under, E0.y_hat), M0)
    assert abs(t - r.t_formula) / r.t_formula < 1e-3


def test_small_level_limit():
    lin = linearized_period(M0)
    assert abs(orbit_period(1e-6, M0).t_formula / lin - 1) < 0.01
    xu = float(level_extent(1e-8, M0)[0])
    assert abs(period_by_return((xu, E0.y_hat), M0) / lin - 1) < 1e-3


def test_linearized_closed_form():
    phi_p = 2 * P0.phi1 / (1 - E0.y_hat) ** 3
    ref = 2 * math.pi / math.sqrt(E0.x_hat * phi_p * E0.y_hat / P0.nu)
    assert linearized_period(M0) == pytest.approx(ref, rel=1e-14)


def scaled_phillips(scale):
    """Preset curves with Phi' scaled about the fixed equilibrium level alpha."""
    a = P0.alpha
    phi = lambda y: a + scale * (P0.phi1 / (1 - np.asarray(y)) ** 2 + P0.phi0 - a)  # noqa: E731
    return CurveSet(phi, lambda y: scale * 2 * P0.phi1 / (1 - np.asarray(y)) ** 3,
                    lambda x: (1 - np.asarray(x)) / P0.nu,
                    lambda x: np.full_like(np.asarray(x, dtype=float), -1 / P0.nu),
                    lambda y: 0.0 * np.asarray(y), alpha=a, gamma=P0.gamma)


def test_scaling_phillips_slope_halves_period():
    base = GoodwinModel(scaled_phillips(1.0))
    fast = GoodwinModel(scaled_phillips(4.0))
    assert fast.equilibria.y_hat == pytest.approx(base.equilibria.y_hat, rel=1e-12)
    assert linearized_period(fast) == pytest.approx(linearized_period(base) / 2, rel=1e-10)
    assert linearized_period(base) == pytest.approx(linearized_period(M0), rel=1e-10)


def test_generic_curves_period():
    g = GoodwinModel(scaled_phillips(1.0))
    assert orbit_period(0.01, g).t_formula == pytest.approx(orbit_period(0.01, M0).t_formula,
                                                            rel=1e-7)


def test_return_is_step_size_consistent():
    xu = float(level_extent(0.01, M0)[0])
    a = period_by_return((xu, E0.y_hat), M0, dt=1e-3)
    b = period_by_return((xu, E0.y_hat), M0, dt=5e-4)
    assert abs(a - b) / b < 1e-4


def test_return_is_phase_independent():
    xu, xb = (float(v) for v in level_extent(0.01, M0)[:2])
    a = period_by_return((xu, E0.y_hat), M0)
    b = period_by_return((xb, E0.y_hat), M0)
    assert abs(a - b) / a < 1e-4


@settings(max_examples=15)
@given(st.floats(1e-4, 0.3), st.floats(0.0, 2 * math.pi))
def test_return_matches_formula_from_any_phase(v0, angle):
    # start on the level set along an arbitrary ray from the equilibrium
    r = orbit_period(v0, M0)
    ux, uy = math.cos(angle), math.sin(angle) * 0.05
    lo, hi = 0.0, 1.0
    while True:
        x, y = E0.x_hat + hi * ux, E0.y_hat + hi * uy
        if x <= 0 or not 0 < y < 1 or M0.V(x, y) > v0:
            break
        hi *= 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        x, y = E0.x_hat + mid * ux, E0.y_hat + mid * uy
        if x > 0 and 0 < y < 1 and M0.V(x, y) < v0:
            lo = mid
        else:
            hi = mid
    start = (E0.x_hat + lo * ux, E0.y_hat + lo * uy)
    t = period_by_return(start, M0, t_max=2 * r.t_formula)
    assert abs(t - r.t_formula) / r.t_formula < 1e-3


def test_no_return_error():
    xu = float(level_extent(0.01, M0)[0])
    with pytest.raises(NoReturnError):
        period_by_return((xu, E0.y_hat), M0, t_max=3.0)
    with pytest.raises(ValueError):
        period_by_return((E0.x_hat, E0.y_hat), M0)


def test_ray_return_interpolates():
    t = np.linspace(0, 2 * math.pi + 0.3, 4000)
    x, y = np.cos(t), np.sin(t)
    assert ray_return_time(t, x, y, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(2 * math.pi, abs=1e-6)


def test_period_increasing_and_concave():
    levels = np.linspace(1e-4, 0.5, 20)
    T = np.array([orbit_period(v, M0).t_formula for v in levels])
    assert T[0] > linearized_period(M0)
    assert np.all(np.diff(T) > 0)
    assert np.all(np.diff(T, 2) < 0)


def test_trajectory_csv(tmp_path):
    tr = integrate_ode((0.8, 0.97), 0.01, M0)
    tr.to_csv(tmp_path / "t.csv")
    with open(tmp_path / "t.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x", "y", "V"]
    assert len(rows) == len(tr) + 1
    assert float(rows[-1][1]) == tr.x[-1]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        orbit_period(0.0, M0)
    with pytest.raises(ValueError):
        level_extent(-1.0, M0)
    with pytest.raises(ValueError):
        integrate_ode((0.8, 0.9), 1.0, M0, dt=0.0)
