from fractions import Fraction as F

import numpy as np
import pytest

from l2translates import (
    CoefficientWindow,
    EmptyAverageError,
    EmptyRegionError,
    IntervalSet,
    WindowExceededError,
    bernstein_modulus,
    boundedness_profile,
    boundedness_profiles,
    fat_cantor,
    fejer_mean,
    parse_set,
    partial_sum,
    sup_on_set,
    u_norm_estimate,
    z_order,
)


def ones(n):
    return CoefficientWindow(np.ones(2 * n + 1))


def test_z_order():
    assert list(z_order(3)) == [0, 1, -1, 2, -2, 3, -3]


def test_window_basics():
    f = CoefficientWindow.from_mapping({0: 1, 2: 3j})
    assert f.n == 2 and f[2] == 3j and f[-2] == 0 and f[9] == 0
    assert f.reflected()[-2] == 3j
    with pytest.raises(Exception):
        CoefficientWindow(np.ones(4))


def test_partial_sum_examples():
    const = CoefficientWindow.from_mapping({0: 1}, n=5)
    for n in range(6):
        assert partial_sum(const, n, 0.37) == 1
    for n in (0, 3, 10):
        assert partial_sum(ones(n), n, 0.0) == pytest.approx(2 * n + 1)
    f = CoefficientWindow.indicator(parse_set("0..1/2"), 1)
    value = partial_sum(f, 1, 0.25)
    direct = sum(f[k] * np.exp(2j * np.pi * k * 0.25) for k in (-1, 0, 1))
    assert value == pytest.approx(0.5 + 2 / np.pi, abs=1e-15)
    assert value == pytest.approx(direct, abs=1e-15)


def test_partial_sum_window_exceeded():
    with pytest.raises(WindowExceededError):
        partial_sum(ones(2), 3, 0.1)


def test_partial_sum_vectorized_shape():
    xi = np.linspace(0, 1, 7).reshape(7, 1)
    assert partial_sum(ones(2), 2, xi).shape == (7, 1)


def test_fejer_examples():
    c = CoefficientWindow.from_mapping({0: 2.5}, n=4)
    for n in range(1, 6):
        assert fejer_mean(c, n, 0.3) == pytest.approx(2.5)
    assert fejer_mean(ones(2), 3, 0.0) == pytest.approx(3.0)
    f = CoefficientWindow.indicator(parse_set("0..1/2"), 64)
    assert abs(fejer_mean(f, 64, 0.25)) <= 1.0
    with pytest.raises(EmptyAverageError):
        fejer_mean(ones(2), 0, 0.1)
    with pytest.raises(WindowExceededError):
        fejer_mean(ones(2), 4, 0.1)


def test_fejer_equals_mean_of_partial_sums():
    f = CoefficientWindow.indicator(parse_set("1/8..1/3"), 9)
    xi = np.linspace(0, 1, 33)
    for n in (1, 4, 10):
        mean = sum(partial_sum(f, h, xi) for h in range(n)) / n
        assert np.allclose(fejer_mean(f, n, xi), mean, atol=1e-14)


def test_sup_on_set_constant():
    est = sup_on_set(lambda x: np.ones_like(x), parse_set("1/3..1/2"), 6, 0.0)
    assert est.value == 1 and est.certified_bound == 1


def test_sup_on_set_dirichlet_peak():
    n = 12
    D = ones(n)
    est = sup_on_set(lambda x: partial_sum(D, n, x), IntervalSet.full(), 8, bernstein_modulus(D, n))
    assert 2 * n + 1 - 1e-9 <= est.value <= 2 * n + 1 + 1e-9


def test_sup_on_set_against_dense_scan():
    f = CoefficientWindow.indicator(parse_set("1/4..1/2"), 8)
    region = parse_set("0..1/8")
    mod = bernstein_modulus(f, 8)
    est = sup_on_set(lambda x: partial_sum(f, 8, x), region, 10, mod)
    scan = np.abs(partial_sum(f, 8, np.linspace(0, 0.125, 10**6)))
    assert np.isfinite(est.value)
    assert est.value <= scan.max() + 1e-12
    assert scan.max() <= est.certified_bound


def test_sup_on_set_includes_off_grid_endpoints():
    f = CoefficientWindow.from_mapping({1: 1})
    est = sup_on_set(lambda x: np.real(partial_sum(f, 1, x)), parse_set("0..1/3"), 2, 2 * np.pi)
    # cos(2 pi xi) on [0, 1/3] peaks at 0; endpoint 1/3 is an extra point
    assert est.value == pytest.approx(1.0)
    assert est.grid_points == 3


def test_sup_on_set_empty_region():
    with pytest.raises(EmptyRegionError):
        sup_on_set(lambda x: x, IntervalSet.empty(), 4, 1.0)


def test_sup_monotone_refinement():
    f = CoefficientWindow.indicator(parse_set("1/4..1/2"), 16)
    region = parse_set("0..1/8, 5/8..1")
    prev_v, prev_b = -np.inf, np.inf
    for level in range(4, 14):
        est = sup_on_set(lambda x: partial_sum(f, 16, x), region, level, bernstein_modulus(f, 16))
        assert est.value >= prev_v
        assert est.certified_bound <= prev_b + 1e-12
        prev_v, prev_b = est.value, est.certified_bound


def test_profile_matches_pointwise_sup():
    f = CoefficientWindow.indicator(parse_set("1/4..1/2"), 40)
    region = parse_set("0..1/8, 3/5..7/9")
    prof = boundedness_profile(f, region, [0, 1, 5, 40], level=9)
    for n, s in zip(prof.schedule, prof.sups):
        ref = sup_on_set(lambda x: partial_sum(f, n, x), region, 9, bernstein_modulus(f, n))
        assert s.value == ref.value
        assert s.grid_points == ref.grid_points


def test_profile_localization_example():
    f = CoefficientWindow.indicator(parse_set("1/4..1/2"), 256)
    prof = boundedness_profile(f, parse_set("0..1/8"), range(1, 257))
    # f_hat(k) = 0 for k = 0 mod 4, so single orders oscillate; the envelope
    # over dyadic blocks is what decreases
    blocks = [prof.values[(1 << j) - 1 : (1 << (j + 1)) - 1].max() for j in range(8)]
    assert all(b < a for a, b in zip(blocks, blocks[1:]))
    assert blocks[-1] < blocks[0] / 10
    assert prof.status == "evidence"


def test_profile_constant():
    f = CoefficientWindow.from_mapping({0: 1}, n=8)
    prof = boundedness_profile(f, parse_set("1/5..2/5"), [0, 2, 8])
    assert list(prof.values) == [1.0, 1.0, 1.0]


def test_profile_fat_cantor_reported():
    A = fat_cantor(4, F(1, 4))
    f = CoefficientWindow.indicator(A, 4096)
    prof = boundedness_profile(f, ~A, [1 << i for i in range(13)], level=14)
    assert len(prof.sups) == 13
    assert np.all(np.isfinite(prof.certified_bounds))


def test_profile_schedule_validation():
    f = ones(4)
    for bad in ([], [2, 2], [3, 1], [0, 5]):
        with pytest.raises(Exception):
            boundedness_profile(f, IntervalSet.full(), bad, level=4)


def test_u_norm_examples():
    assert u_norm_estimate(CoefficientWindow.from_mapping({0: 1}), 6).value == pytest.approx(1.0)
    c = 0.3 - 0.4j
    assert u_norm_estimate(CoefficientWindow.from_mapping({7: c}), 6).value == pytest.approx(abs(c))


def test_u_norm_brute_force_small():
    rng = np.random.default_rng(1)
    f = CoefficientWindow(rng.normal(size=9) + 1j * rng.normal(size=9))
    level = 5
    xi = np.arange(32) / 32
    best = 0.0
    for a in range(-4, 5):
        for b in range(a, 5):
            s = sum(f[k] * np.exp(2j * np.pi * k * xi) for k in range(a, b + 1))
            best = max(best, np.abs(s).max())
    assert u_norm_estimate(f, level).value == pytest.approx(best, rel=1e-12)


def test_u_norm_dominates_symmetric_sums():
    f = CoefficientWindow.indicator(parse_set("0..1/4"), 32)
    level = 9
    u = u_norm_estimate(f, level)
    prof = boundedness_profile(f, IntervalSet.full(), range(33), level=level)
    assert u.value >= prof.values.max()


def test_workers_bit_identical():
    f = CoefficientWindow.indicator(fat_cantor(3, F(1, 4)), 300)
    regions = [IntervalSet.full(), ~fat_cantor(3, F(1, 4))]
    serial = boundedness_profiles(f, regions, [1, 10, 100, 300], level=16, workers=1)
    parallel = boundedness_profiles(f, regions, [1, 10, 100, 300], level=16, workers=4)
    for a, b in zip(serial, parallel):
        assert [s.value for s in a.sups] == [s.value for s in b.sups]
