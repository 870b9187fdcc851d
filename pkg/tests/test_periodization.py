import random
from fractions import Fraction as F

import numpy as np
import pytest

from l2translates import (
    DecayEnvelope,
    DegenerateSpectrumError,
    IndistinguishableZeroError,
    IntervalSet,
    NonintegrableEnvelopeError,
    ParseError,
    PeriodizationGrid,
    SpectrumDescriptor,
    SpectrumPiece,
    classify,
    fat_cantor,
    haar_spectrum,
    indicator_spectrum,
    parse_set,
    parse_spectrum,
    periodization_grid,
    periodize,
    sinc_spectrum,
    sine_bump_spectrum,
    spectrum_from_set,
)


def haar_direct(xi, K):
    # independent oracle: |psi_hat(x)|^2 = sinc^2(x), summed over |k| <= K
    k = np.arange(-K, K + 1, dtype=float)
    return float(np.sum(np.sinc(xi + k) ** 2))


def test_spectrum_from_set_examples():
    p = periodization_grid(spectrum_from_set(parse_set("0..1/2")), 8, 1.0)
    assert list(p.values) == [1, 1, 1, 1, 0, 0, 0, 0]
    assert p.tail_error == 0
    full = periodization_grid(spectrum_from_set(IntervalSet.full()), 16, 1.0)
    assert np.all(full.values == 1)
    with pytest.raises(DegenerateSpectrumError):
        spectrum_from_set(IntervalSet.empty())


def test_spectrum_from_cantor_complement_pointwise():
    Ac = ~fat_cantor(3, F(1, 4))
    psi = spectrum_from_set(Ac)
    rng = random.Random(7)
    for _ in range(100):
        xi = F(rng.randrange(0, 10**6), 10**6)
        value, tail = periodize(psi, xi, 1e-9)
        assert tail == 0
        assert value == (1.0 if Ac.contains(xi) else 0.0)


def test_periodize_examples():
    for xi in (0, 0.1, F(1, 3), 0.5, 0.99):
        assert periodize(sinc_spectrum(), xi, 1e-6) == (1.0, 0.0)
    value, tail = periodize(sine_bump_spectrum(), F(1, 4), 1e-9)
    assert value == pytest.approx(0.5, abs=1e-15) and tail == 0


def test_periodize_haar_against_direct_sum():
    value, tail = periodize(haar_spectrum(), F(1, 3), 1e-6)
    assert tail <= 1e-6
    assert value <= 1 <= value + tail
    oracle = haar_direct(1 / 3, 10**6)
    # oracle truncation is below 2/(pi^2 10^6)
    assert abs(value - oracle) < 1e-6


def test_periodize_haar_methods_agree():
    for xi in (F(1, 3), F(1, 7), 0.3):
        a, ta = periodize(haar_spectrum(), xi, 1e-5, method="closed")
        b, tb = periodize(haar_spectrum(), xi, 1e-5, method="direct")
        assert ta == tb
        assert a == pytest.approx(b, abs=1e-12)


def test_periodize_rejects_slow_decay():
    piece = SpectrumPiece(None, None, "modsinc", (1.0, 0.0, 1.0))
    psi = SpectrumDescriptor((piece,), DecayEnvelope(1.0, 0.5, 1.0))
    with pytest.raises(NonintegrableEnvelopeError):
        periodize(psi, 0.2, 1e-3)


def test_grid_examples():
    g = periodization_grid(indicator_spectrum([(F(0), F(1))]), 8, 1e-8)
    assert np.all(g.values == 1)
    haar = periodization_grid(haar_spectrum(), 64, 1e-8)
    assert np.max(np.abs(haar.values - 1)) < 1e-7
    assert haar.tail_error <= 1e-8
    assert np.all(haar.values <= 1) and np.all(haar.values + haar.tail_error >= 1 - 1e-15)


def test_grid_mean_is_squared_norm():
    A = parse_set("1/8..1/3, 1/2..7/8")
    g = periodization_grid(spectrum_from_set(A), 4096, 1.0)
    assert g.mean == pytest.approx(float(A.measure), abs=2 / 4096)
    shifted = periodization_grid(indicator_spectrum([(F(-3, 2), F(-1, 3))]), 4096, 1.0)
    assert shifted.mean == pytest.approx(7 / 6, abs=2 / 4096)


def test_shifted_indicator_wraps():
    g = periodization_grid(indicator_spectrum([(F(-1, 2), F(1, 2))]), 8, 1.0)
    assert np.all(g.values == 1)
    two = periodization_grid(indicator_spectrum([(F(0), F(2))]), 8, 1.0)
    assert np.all(two.values == 2)


def test_classify_truth_table():
    one = classify(PeriodizationGrid.from_function(np.ones_like, 1024), 1e-6)
    assert one.positive_ae and one.minimal_flag and not one.zero_set_approx
    sin2 = classify(PeriodizationGrid.from_function(lambda x: np.sin(np.pi * x) ** 2, 1024), 1e-6)
    assert sin2.positive_ae and not sin2.minimal_flag and sin2.divergence_diagnostic
    half = classify(periodization_grid(spectrum_from_set(parse_set("0..1/2")), 1024, 1.0), 1e-6)
    assert not half.positive_ae
    assert half.zero_set_approx == parse_set("1/2..1")
    assert half.l2_independent_sufficient == half.positive_ae


@pytest.mark.parametrize("offset", [0.0, 0.25, 0.5, 0.9])
def test_classify_quadratic_zero_between_samples(offset):
    M = 1024
    g = PeriodizationGrid.from_function(lambda x: np.sin(np.pi * (x + offset / M)) ** 2, M)
    rep = classify(g, 1e-6)
    assert rep.positive_ae and rep.divergence_diagnostic and not rep.minimal_flag


def test_classify_integrable_reciprocal_is_minimal():
    # 1/|sin|^(1/2) is integrable, so the diagnostic should stay quiet
    g = PeriodizationGrid.from_function(lambda x: np.abs(np.sin(np.pi * x)) ** 0.5, 1024)
    rep = classify(g, 1e-6)
    assert rep.positive_ae and rep.minimal_flag


def test_classify_tau_guard():
    g = periodization_grid(haar_spectrum(), 16, 1e-3)
    with pytest.raises(IndistinguishableZeroError):
        classify(g, 1e-4)


def test_classify_monotone_in_tau():
    g = PeriodizationGrid.from_function(lambda x: np.sin(3 * np.pi * x) ** 2, 256)
    prev = None
    for tau in (1e-8, 1e-4, 1e-2, 0.1, 0.5):
        Z = classify(g, tau).zero_set_approx
        if prev is not None:
            assert prev.issubset(Z)
        prev = Z


def test_parse_spectrum_grammar(tmp_path):
    assert parse_spectrum("haar").label == "haar"
    assert periodize(parse_spectrum("sinc"), 0.3, 1e-6)[0] == 1
    assert periodize(parse_spectrum("indicator(0/1..1/2)"), 0.7, 1e-6)[0] == 0
    assert periodize(parse_spectrum("set(~0..1/2)"), 0.7, 1e-6)[0] == 1
    assert periodize(parse_spectrum("sine_bump(0..1)"), F(1, 4), 1e-6)[0] == pytest.approx(0.5)
    path = tmp_path / "haar.txt"
    path.write_text(
        "# Haar scaling function\n"
        "piece -inf inf\n"
        "sinc 1 -1/2 1\n"
        "decay 0.3183098861837907 1 1\n"
    )
    custom = parse_spectrum(f"custom({path})")
    a, ta = periodize(custom, F(1, 3), 1e-6)
    b, tb = periodize(haar_spectrum(), F(1, 3), 1e-6)
    assert a == pytest.approx(b, abs=1e-12)
    for bad in ("wavelet", "indicator()", "sine_bump(1..0)", "custom(/no/such/file)"):
        with pytest.raises((ParseError, DegenerateSpectrumError)):
            parse_spectrum(bad)


def test_grid_cell_constant_flag():
    assert periodization_grid(spectrum_from_set(parse_set("0..1/2")), 8, 1.0).cell_constant
    assert not periodization_grid(spectrum_from_set(parse_set("0..1/3")), 8, 1.0).cell_constant
    assert not periodization_grid(haar_spectrum(), 8, 1e-3).cell_constant
    assert not periodization_grid(sine_bump_spectrum(), 8, 1.0).cell_constant
