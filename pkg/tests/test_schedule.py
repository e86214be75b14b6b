import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msqw.ising import IsingProblem, brute_force_spectrum, sk_generate
from msqw.schedule import (EXAMPLE_TABLE, HardwareSchedule, WalkSchedule, build_schedule,
                           default_alpha, delta_e, first_branch_time, gamma_schedule,
                           hardware_stage_times, hardware_time, second_branch_time, stage_times)
from msqw.stats import delta_sq, estimate_spread

from .oracles import random_problem


def test_gamma_single_stage():
    assert gamma_schedule(8.0, 2, 1) == pytest.approx([2.0], rel=1e-15)


def test_gamma_two_stages():
    g = gamma_schedule(8.0, 2, 2)
    assert g == pytest.approx([2 * math.sqrt(3), 2 / math.sqrt(3)], rel=1e-14)


def test_gamma_twenty_stages_decreasing():
    g = gamma_schedule(3.3, 7, 20)
    assert len(g) == 20
    assert all(x > 0 for x in g)
    assert all(b < a for a, b in zip(g, g[1:]))


def test_gamma_errors():
    with pytest.raises(ValueError):
        gamma_schedule(0.0, 3, 1)
    with pytest.raises(ValueError):
        gamma_schedule(1.0, 3, 0)


def test_delta_e_single_stage():
    for n in (1, 4, 11):
        assert delta_e([0.7], n, 1) == 2 * n


def test_delta_e_two_stage_example():
    g = [math.sqrt(3), 1 / math.sqrt(3)]
    assert delta_e(g, 2, 1) == pytest.approx(2.0, rel=1e-14)
    assert delta_e(g, 2, 2) == pytest.approx(2 * math.sqrt(3), rel=1e-14)
    assert delta_e(g, 2, 2) == pytest.approx(3.464, abs=1e-3)


def test_delta_e_index_errors():
    with pytest.raises(ValueError):
        delta_e([1.0, 0.5], 3, 0)
    with pytest.raises(ValueError):
        delta_e([1.0, 0.5], 3, 3)


def _g(x):
    return x / math.sqrt(1 + x * x)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=30), st.integers(1, 20))
def test_delta_e_sum_identity(gammas, n):
    # the sum skips every other term, leaving 1 + g(gamma_1) - g(gamma_m)
    total = sum(delta_e(gammas, n, i) for i in range(1, len(gammas) + 1))
    expected = 2 * n * (1 + _g(gammas[0]) - _g(gammas[-1]))
    assert total == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100), st.integers(1, 20), st.integers(1, 40))
def test_delta_e_positive_for_schedule(spread, n, m):
    g = gamma_schedule(spread, n, m)
    assert all(delta_e(g, n, i) > 0 for i in range(1, m + 1))


def test_stage_time_worked():
    # large gamma makes the second branch negligible
    t = stage_times([1e6], 2, 37.0)
    assert t == pytest.approx([math.sqrt(8 / 37)], rel=1e-15)
    assert t[0] == pytest.approx(0.465, abs=1e-3)
    # first branch with dE = 2n is sqrt(4n/dsq)
    assert first_branch_time(4.0, 37.0) == pytest.approx(math.sqrt(4 * 2 / 37.0), rel=1e-15)


def test_stage_time_second_branch_dominates_for_small_gamma():
    n, dsq, g = 3, 20.0, 1e-4
    t = stage_times([g], n, dsq)[0]
    assert t == pytest.approx(math.sqrt(2 * n / (g * math.sqrt(2 * n * dsq / math.pi))), rel=1e-14)


def test_stage_time_errors():
    with pytest.raises(ValueError):
        stage_times([1.0], 3, 0.0)
    with pytest.raises(ValueError):
        stage_times([1.0, 0.0], 3, 1.0)


def test_single_stage_matches_direct_formulas(rng):
    for _ in range(10):
        p = random_problem(rng, int(rng.integers(2, 12)))
        sch = build_schedule(p, 1)
        n, dsq = p.n, delta_sq(p)
        spread = estimate_spread(p, "gumbel").value
        gamma = spread / (2 * n)
        t_s = math.sqrt(4 * n / dsq)
        sum_flip = gamma * math.sqrt(2 * n * dsq / math.pi)
        t_f = math.sqrt(2 * n / sum_flip)
        assert sch.gammas == pytest.approx([gamma], rel=1e-14)
        assert sch.times == pytest.approx([max(t_s, t_f)], rel=1e-13)


def test_first_branch_halves_when_problem_doubles(rng):
    p = random_problem(rng, 6)
    gammas = [0.5, 0.2]
    t1 = [first_branch_time(delta_e(gammas, 6, i), delta_sq(p)) for i in (1, 2)]
    t2 = [first_branch_time(delta_e(gammas, 6, i), delta_sq(p.scaled(2.0))) for i in (1, 2)]
    assert delta_sq(p.scaled(2.0)) == pytest.approx(4 * delta_sq(p), rel=1e-14)
    np.testing.assert_allclose(t2, np.array(t1) / 2, rtol=1e-14)


def test_second_branch_formula():
    assert second_branch_time(4.0, 1.0, 2, 37.0) == pytest.approx(
        math.sqrt(4.0 / math.sqrt(4 / math.pi * 37.0)), rel=1e-15)


def test_exact_spread_option(rng):
    p = random_problem(rng, 9)
    sch = build_schedule(p, 3, "exact")
    assert sch.spread_used == pytest.approx(brute_force_spectrum(p).spread, rel=1e-15)
    assert sch.spread_method == "exact"


def test_build_schedule_twenty_stages():
    p = sk_generate(10, 1, 1)[0]
    sch = build_schedule(p, 20)
    assert sch.m == 20
    assert all(b < a for a, b in zip(sch.gammas, sch.gammas[1:]))
    assert all(math.isfinite(t) and t > 0 for t in sch.times)
    rows = sch.rows()
    assert [r[0] for r in rows] == list(range(1, 21))
    assert all(r[3] > 0 for r in rows)


def test_mean_first_branch_time_sk():
    # the first branch averages near sqrt(2/(n+1)) for SK instances
    n = 10
    times = [math.sqrt(4 * n / delta_sq(p)) for p in sk_generate(n, 3, 1000)]
    assert np.mean(times) == pytest.approx(math.sqrt(2 / (n + 1)), rel=0.05)


def test_walk_schedule_validation():
    with pytest.raises(ValueError):
        WalkSchedule(2, (), 1.0, 1.0)
    with pytest.raises(ValueError):
        WalkSchedule(2, ((1.0, -0.1),), 1.0, 1.0)
    sch = WalkSchedule(2, ((1.0, 0.5), (0.5, 0.25)), 1.0, 1.0)
    assert sch.with_times([1, 2]).times == [1.0, 2.0]
    assert sch.with_gammas([3, 2]).gammas == [3.0, 2.0]
    with pytest.raises(ValueError):
        sch.with_times([1.0])


# ---- hardware ----------------------------------------------------------

def _toy_table(A=1 / (2 * math.pi)):
    s = np.linspace(0, 1, 11)
    return HardwareSchedule(s, np.full_like(s, A), 0.1 + s)


def _one_stage(gamma, t, n=2):
    return WalkSchedule(n, ((gamma, t),), 1.0, 1.0)


def test_hardware_unit_convention():
    hw = _toy_table()
    assert hardware_time(_one_stage(1.0, 1.0), hw, alpha=1.0) == pytest.approx(1.0, rel=1e-12)


def test_hardware_alpha_linear():
    s = np.linspace(0, 1, 21)
    hw = HardwareSchedule(s, 3.0 * (1 - s) + 0.01, 0.2 + 5 * s)
    sch = _one_stage(0.8, 0.4)
    t1 = hardware_time(sch, hw, alpha=2.0)
    # keep the located point fixed so only the prefactor changes
    t2 = hardware_time(sch.with_gammas([1.6]), hw, alpha=4.0)
    assert t2 == pytest.approx(2 * t1, rel=1e-12)


def test_hardware_constant_A_linear_in_alpha():
    hw = _toy_table(A=0.7)
    sch = _one_stage(2.0, 1.3)
    assert hardware_time(sch, hw, 2.0) == pytest.approx(2 * hardware_time(sch, hw, 1.0), rel=1e-12)


def test_hardware_locate_inverts_ratio():
    s = np.linspace(0, 1, 51)
    A = 5 * np.exp(-4 * s) * (1 - s)
    B = 0.3 + 8 * s**2
    hw = HardwareSchedule(s, A, B)
    for ratio in (0.01, 0.3, 2.0, 10.0):
        s_star = hw.locate(ratio)
        a = np.interp(s_star, s, A)
        b = np.interp(s_star, s, B)
        assert a / b == pytest.approx(ratio, rel=2e-2)


def test_hardware_ratio_out_of_range():
    hw = _toy_table()
    with pytest.raises(ValueError):
        hw.locate(100.0)


def test_hardware_flat_ratio():
    s = np.linspace(0, 1, 5)
    hw = HardwareSchedule(s, np.ones(5), np.ones(5))
    with pytest.raises(ValueError):
        hw.locate(1.0)


def test_hardware_validation():
    with pytest.raises(ValueError):
        HardwareSchedule([0, 0.5, 0.4], [1, 1, 1], [1, 1, 1])
    with pytest.warns(UserWarning):
        HardwareSchedule([0, 0.5, 1], [1, 2, 0], [1, 2, 3])


def test_hardware_table_parsing(tmp_path):
    path = tmp_path / "sched.txt"
    path.write_text("s A B\n0.0 2.0 0.1\n0.5 1.0 1.0\n1.0 0.0 3.0\n")
    hw = HardwareSchedule.from_text(path)
    assert list(hw.s) == [0.0, 0.5, 1.0]
    path.write_text("0,2,0.1\n1,0,3\n")
    assert list(HardwareSchedule.from_text(path).A) == [2.0, 0.0]


def test_default_alpha():
    assert default_alpha(8) == pytest.approx(2 * math.sqrt(math.log(8)))


def test_hardware_order_of_magnitude_eight_qubits():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        hw = HardwareSchedule.from_text(EXAMPLE_TABLE)
    problems = sk_generate(8, 1, 20)
    for m in (2, 5, 10):
        med = np.median([hardware_time(build_schedule(p, m), hw) for p in problems])
        assert 0.3 <= med <= 30
    per_stage = hardware_stage_times(build_schedule(problems[0], 3), hw)
    s_stars = [x[0] for x in per_stage]
    # smaller gamma means a later point in the anneal
    assert s_stars == sorted(s_stars)
