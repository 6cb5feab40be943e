import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BASELINE, random_full_params
from coinfection.dynamics import (
    State2,
    change_of_variables,
    fast_equilibrium,
    fast_field,
    inverse_change_of_variables,
    rhs_complete,
    rhs_fast,
    rhs_primary,
    rhs_rescaled,
    simulate_complete,
    simulate_reduced,
)
from coinfection.integrator import NegativeStateError, StiffnessError, integrate
from coinfection.params import FullParams, ParameterError, compute_thresholds, reduce


@pytest.fixture
def rp(baseline):
    return reduce(baseline)


def test_primary_rhs_vanishes_at_origin_and_carrying_capacity(rp):
    assert rhs_primary((0.0, 0.0), rp) == (0.0, 0.0)
    s1 = compute_thresholds(rp).s1_star
    dS, dI = rhs_primary((s1, 0.0), rp)
    assert dS == pytest.approx(0.0, abs=1e-12) and dI == 0.0


def test_primary_rhs_by_hand_at_unit_state(rp):
    # r + a r - m - (c_SS + c_SI) - beta + gamma ; -m - (c_IS + c_II) + beta - gamma - mu
    dS, dI = rhs_primary((1.0, 1.0), rp)
    assert dS == pytest.approx(26 + 0.8 * 26 - 12 - (3.8 + 0.5) - 6 + 0.1)
    assert dI == pytest.approx(-12 - (1.55 + 2.275) + 6 - 0.1 - 0.4)
    th = compute_thresholds(rp)
    assert rhs_rescaled((1.0, 1.0), th, rp) == pytest.approx((dS, dI), rel=1e-12)


def test_rescaled_rhs_special_points(rp):
    th = compute_thresholds(rp)
    assert rhs_rescaled((th.a_bar_thr, 2.0), th, rp).I == pytest.approx(-rp.c_bar_II * 4.0, rel=1e-12)
    assert rhs_rescaled((th.s1_star, 0.0), th, rp) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_rescaled_rhs_requires_thresholds(baseline):
    rp = reduce(baseline.replace(r=10.0))
    with pytest.raises(ParameterError):
        rhs_rescaled((1.0, 1.0), compute_thresholds(rp), rp)


@settings(max_examples=300)
@given(seed=st.integers(0, 2**32 - 1), S=st.floats(0, 50), I=st.floats(0, 50))
def test_rescaled_form_equals_primary_form(seed, S, I):  # noqa: E741
    rp = reduce(random_full_params(np.random.default_rng(seed)))
    th = compute_thresholds(rp)
    if th.s1_star is None or th.a_bar_thr is None:
        return
    a = np.array(rhs_primary((S, I), rp))
    b = np.array(rhs_rescaled((S, I), th, rp))
    # both forms sum terms of size ~|coefficient * state|; compare on that scale
    scale = 1.0 + (rp.r + rp.m + rp.beta_bar + rp.c_SS + rp.c_bar_SI + rp.c_bar_IS + rp.c_bar_II) * (S + I) ** 2 + (S + I) * 50
    assert np.all(np.abs(a - b) <= 1e-12 * scale)


@pytest.mark.parametrize("u, v, lam, delta", [(1.0, 0.0, 2.0, 1.0), (0.0, 0.0, 2.0, 1.0), (3.0, 3.0, 2.0, 1.0)])
def test_fast_rhs_zeros(u, v, lam, delta):
    assert rhs_fast(u, v, lam, delta) == (0.0, 0.0)


@given(u=st.floats(0, 1e3), v=st.floats(0, 1e3), lam=st.floats(0.01, 10), delta=st.floats(0.01, 10))
def test_fast_process_conserves_infected(u, v, lam, delta):
    du, dv = rhs_fast(u, v, lam, delta)
    assert du + dv == 0.0


def test_complete_rhs_examples(baseline):
    assert tuple(rhs_complete((0.0, 0.0, 0.0), baseline)) == (0.0, 0.0, 0.0)
    assert rhs_complete((2.0, 1.5, 0.0), baseline).V == 0.0


def test_complete_rhs_is_pure_fast_flow_at_fast_equilibrium(baseline):
    # the slow terms carry a factor epsilon, so as it shrinks only the fast flow remains,
    # and that flow vanishes where V = nu* I
    nu = reduce(baseline).nu_star
    s = fast_equilibrium((3.0, 2.0), nu)
    for eps in (1e-3, 1e-6, 1e-9):
        d = np.array(rhs_complete(s, baseline.replace(epsilon=eps)))
        assert np.max(np.abs(d)) < 200 * eps


@settings(max_examples=100)
@given(seed=st.integers(0, 2**32 - 1), S=st.floats(0, 20), U=st.floats(0, 20))
def test_complete_rhs_without_coinfection_matches_primary(seed, S, U):
    p = random_full_params(np.random.default_rng(seed))
    p = p.replace(delta=p.lambda_ * 2)
    d = rhs_complete((S, U, 0.0), p)
    dS, dI = rhs_primary((S, U), reduce(p))
    assert d.S == pytest.approx(p.epsilon * dS, rel=1e-12, abs=1e-12)
    assert d.U == pytest.approx(p.epsilon * dI, rel=1e-12, abs=1e-12)
    assert d.V == 0.0


def test_change_of_variables():
    (s, v) = change_of_variables((1.0, 2.0, 3.0))
    assert s == State2(1.0, 5.0) and v == 3.0
    assert change_of_variables((0.0, 0.0, 0.0)) == (State2(0.0, 0.0), 0.0)
    with pytest.raises(ParameterError):
        inverse_change_of_variables((1.0, 2.0), 3.0)


@given(S=st.floats(0, 1e3), U=st.integers(0, 10**6), V=st.integers(0, 10**6))
def test_change_of_variables_round_trip(S, U, V):
    # integer-valued densities keep U + V - V exact
    s, v = change_of_variables((S, float(U), float(V)))
    assert inverse_change_of_variables(s, v) == (S, float(U), float(V))


def test_integrator_exponential():
    tr = integrate(lambda t, y: -y, [1.0], (0.0, 1.0))
    assert tr.final[0] == pytest.approx(math.exp(-1), rel=1e-7)
    assert np.all(np.diff(tr.times) > 0)


def test_integrator_dense_output():
    ts = np.linspace(0.0, 6.0, 41)
    tr = integrate(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], (0.0, 6.0), t_eval=ts,
                   nonnegative=False)
    assert np.array_equal(tr.times, ts)
    assert np.max(np.abs(tr.states[:, 0] - np.sin(ts))) < 1e-6


def test_integrator_clamps_small_negatives():
    tr = integrate(lambda t, y: np.array([-1e-12, -y[1]]), [0.0, 1.0], (0.0, 10.0))
    assert np.all(tr.states >= 0)
    assert tr.final[0] == 0.0


def test_integrator_rejects_large_negatives():
    with pytest.raises(NegativeStateError):
        integrate(lambda t, y: np.array([-1.0]), [1.0], (0.0, 3.0))


def test_integrator_reports_stiffness_with_time():
    with pytest.raises(StiffnessError) as info:
        integrate(lambda t, y: y * y, [1.0], (0.0, 2.0))
    assert info.value.t == pytest.approx(1.0, abs=1e-3)
    assert "t=" in str(info.value)


@pytest.mark.parametrize("kwargs", [dict(rtol=0.0), dict(t_span=(1.0, 1.0)), dict(y0=[-1.0]),
                                    dict(t_eval=[0.5, 0.2]), dict(t_eval=[2.0])])
def test_integrator_input_validation(kwargs):
    args = dict(rhs=lambda t, y: -y, y0=[1.0], t_span=(0.0, 1.0))
    args.update(kwargs)
    with pytest.raises(ValueError):
        integrate(**args)


def test_steady_state_stop():
    tr = integrate(lambda t, y: -y, [1.0], (0.0, 1e4), stop_at_steady_state=True)
    assert tr.meta["steady"] and tr.meta["t_final"] < 1e4


def test_fast_fraction_converges(rng):
    field = fast_field(4.0, 1.0)
    for _ in range(5):
        tr = integrate(field, rng.uniform(0.1, 5, size=2), (0.0, 40.0))
        u, v = tr.final
        assert v / (u + v) == pytest.approx(0.75, abs=1e-6)
        assert u + v == pytest.approx(float(np.sum(tr.states[0])), rel=1e-9)


def test_extinction_when_births_do_not_cover_deaths(rng):
    rp = reduce(FullParams(**dict(BASELINE, r=10.0)))
    for _ in range(5):
        tr = simulate_reduced(rp, rng.uniform(0, 5, size=2), 30.0)
        assert np.hypot(*tr.final) < 1e-4


def test_total_population_bound(rng):
    for _ in range(10):
        p = random_full_params(rng)
        if p.r <= p.m:
            continue
        rp = reduce(p)
        y0 = rng.uniform(0, 10, size=2)
        tr = simulate_reduced(rp, y0, 20.0)
        w = tr.states.sum(axis=1)
        assert np.all(w <= max(y0.sum(), (rp.r - rp.m) / rp.c_min) + 1e-6)
        assert np.all(tr.states >= 0)


def test_complete_simulation_reports_slow_time(baseline):
    tr = simulate_complete(baseline.replace(epsilon=0.01), (3.0, 1.0, 1.0), 2.0, t_eval=[0.0, 1.0, 2.0])
    assert tr.times.tolist() == [0.0, 1.0, 2.0]
    assert tr.labels == ("S", "U", "V")
    assert tr.meta["t_final"] == pytest.approx(2.0)


def test_trajectory_csv(tmp_path, rp):
    tr = simulate_reduced(rp, (3.0, 1.0), 1.0, t_eval=np.linspace(0, 1, 5))
    tr.to_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["t", "S", "I"]
    assert len(rows) == 6
    assert float(rows[-1][1]) == tr.final[0]  # 17 digits round-trip exactly


def test_complete_system_against_scipy_radau(baseline):
    solve_ivp = pytest.importorskip("scipy.integrate").solve_ivp
    p = baseline.replace(epsilon=0.05)
    ts = np.linspace(0.0, 2.0, 9)
    ours = simulate_complete(p, (3.0, 1.0, 0.5), 2.0, rtol=1e-10, atol=1e-12, t_eval=ts)
    ref = solve_ivp(lambda t, y: np.array(rhs_complete(y, p)), (0.0, 2.0 / p.epsilon), [3.0, 1.0, 0.5],
                    method="Radau", t_eval=ts / p.epsilon, rtol=1e-11, atol=1e-13)
    assert np.max(np.abs(ours.states - ref.y.T)) < 1e-7
