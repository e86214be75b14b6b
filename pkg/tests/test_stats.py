import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msqw.ising import IsingProblem, all_energies, brute_force_spectrum, sk_generate, symmetry_expand
from msqw.special import EULER_GAMMA
from msqw.stats import (delta_sq, estimate_spread, gumbel_parameters, moments, spin_stats,
                        spread_erf_sk, spread_gumbel, spread_normal_fit)

from .oracles import (erfinv_bisect, flip_sums, naive_energies, random_problem,
                      upper_normal_quantile_bisect)


def enumerated_moments(p):
    e = naive_energies(p)
    return [np.mean(e**k) for k in (2, 3, 4, 5)]


def test_moments_two_spin():
    m2, m3, _, _ = moments(IsingProblem([0, 0], [[0, 0], [1, 0]]))
    assert m2 == pytest.approx(1.0)
    assert m3 == pytest.approx(0.0, abs=1e-15)


def test_moments_zero():
    assert moments(IsingProblem(np.zeros(3), np.zeros((3, 3)))) == (0.0, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("fields", [False, True])
def test_moments_match_enumeration(rng, fields):
    for n in range(2, 11):
        p = random_problem(rng, n, fields)
        closed = moments(p)
        brute = enumerated_moments(p)
        for c, b in zip(closed, brute):
            assert c == pytest.approx(b, rel=1e-9, abs=1e-9 * brute[0] ** (1.5))


def test_odd_moment_sign_follows_energy():
    # ferromagnetic triangle: two states at -3, six at +1
    p = IsingProblem(np.zeros(3), np.tril(np.ones((3, 3)), -1))
    e = naive_energies(p)
    assert np.mean(e**3) == -6.0
    assert moments(p)[1] == pytest.approx(np.mean(e**3))


def test_moments_invariant_under_expand(rng):
    p = random_problem(rng, 6)
    np.testing.assert_allclose(moments(symmetry_expand(p)), moments(p), rtol=1e-12)


def test_delta_sq_worked(worked):
    assert delta_sq(worked) == 37.0
    e = naive_energies(worked)
    assert sorted(flip_sums(e, 2)) == [13.0, 29.0, 45.0, 61.0]


def test_delta_sq_trivial():
    assert delta_sq(IsingProblem(np.zeros(3), np.zeros((3, 3)))) == 0.0
    assert delta_sq(IsingProblem([2.0], [])) == 16.0


@pytest.mark.parametrize("n", [2, 5, 8, 10])
def test_delta_sq_matches_enumeration(rng, n):
    p = random_problem(rng, n)
    assert delta_sq(p) == pytest.approx(flip_sums(naive_energies(p), n).mean(), rel=1e-9)


def test_delta_sq_under_expand_gains_field_term(rng):
    # the extra spin's flips contribute 4 sum h^2 on top of the original value
    p = random_problem(rng, 7)
    expanded = symmetry_expand(p)
    assert delta_sq(expanded) == pytest.approx(delta_sq(p) + 4 * np.sum(p.h**2), rel=1e-12)
    assert delta_sq(expanded) == pytest.approx(flip_sums(all_energies(expanded), 8).mean(), rel=1e-9)


def test_delta_sq_sk_mean():
    n = 10
    vals = np.array([delta_sq(p) for p in sk_generate(n, 5, 1000)])
    target = 2 * n * (n + 1)
    assert abs(vals.mean() - target) <= 3 * vals.std(ddof=1) / math.sqrt(vals.size)


def test_delta_sq_gives_mean_stage_time():
    # 4n / <delta_sq> = 2/(n+1) when couplings have variance 1/2 and fields variance 1
    n = 10
    expected_dsq = 8 * (n * (n - 1) / 2) * 0.5 + 4 * n * 1.0
    assert math.sqrt(4 * n / expected_dsq) == pytest.approx(math.sqrt(2 / (n + 1)))


def test_erf_heuristic_values():
    assert spread_erf_sk(5).value == pytest.approx(0.887 * math.sqrt(80) * erfinv_bisect(31 / 32), rel=1e-12)
    assert spread_erf_sk(5).value == pytest.approx(12.083, abs=1e-3)
    assert spread_erf_sk(1).value == pytest.approx(1.19654, abs=1e-5)
    vals = [spread_erf_sk(n).value for n in range(1, 22)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def _unit_variance_problem(n):
    # single field of size 1 on spin 0 gives m2 = 1 for any n
    h = np.zeros(n)
    h[0] = 1.0
    return IsingProblem(h, np.zeros((n, n)))


def test_normal_fit_value():
    p = _unit_variance_problem(10)
    expected = 2 * math.sqrt(2) * erfinv_bisect(1 - 2**-10)
    assert spread_normal_fit(p).value == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(6.594387, abs=1e-6)


def test_gumbel_value():
    mu, beta = gumbel_parameters(1.0, 10)
    assert mu == pytest.approx(upper_normal_quantile_bisect(2**-10), rel=1e-12)
    assert beta == pytest.approx(upper_normal_quantile_bisect(2**-10 / math.e) - mu, rel=1e-10)
    assert (mu, beta) == pytest.approx((3.097269, 0.285146), abs=1e-6)
    spread = spread_gumbel(_unit_variance_problem(10)).value
    assert spread == pytest.approx(2 * (mu + EULER_GAMMA * beta))
    assert spread == pytest.approx(6.523720, abs=1e-6)


def test_gumbel_beta_positive():
    for n in range(2, 25):
        assert gumbel_parameters(1.0, n)[1] > 0


def test_spread_errors():
    zero = IsingProblem(np.zeros(4), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        spread_normal_fit(zero)
    with pytest.raises(ValueError):
        spread_gumbel(IsingProblem([1.0], []))
    with pytest.raises(ValueError):
        estimate_spread(zero, "bogus")


@settings(max_examples=25, deadline=None)
@given(st.floats(-20, 20).filter(lambda c: abs(c) > 1e-3), st.integers(0, 2**31))
def test_spread_homogeneous(c, seed):
    p = random_problem(np.random.default_rng(seed), 6)
    for fn in (spread_normal_fit, spread_gumbel):
        assert fn(p.scaled(c)).value == pytest.approx(abs(c) * fn(p).value, rel=1e-12)


def test_stats_invariants(rng):
    for _ in range(20):
        s = spin_stats(random_problem(rng, int(rng.integers(2, 9))))
        assert s.m2 >= 0 and s.m4 >= 0 and s.delta_sq >= 0
        assert s.m4 >= s.m2**2


def test_kurtosis_diagnostic_near_three_for_large_sk():
    p = sk_generate(200, 3, 1)[0]
    assert abs(spin_stats(p).kurtosis - 3.0) < 0.1


@pytest.mark.parametrize("method", ["normal-fit", "gumbel"])
def test_spread_median_ratio(method):
    ratios = []
    for p in sk_generate(10, 11, 100):
        ratios.append(estimate_spread(p, method).value / brute_force_spectrum(p, keep=False).spread)
    assert 0.8 <= np.median(ratios) <= 1.2
