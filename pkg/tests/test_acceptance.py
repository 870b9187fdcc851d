"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are written
past pytest's capture) or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import csv
import io
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from l2translates import (
    CoefficientWindow,
    IntervalSet,
    PeriodizationGrid,
    boundedness_profile,
    boundedness_profiles,
    cesaro_independence_probe,
    classify,
    combination_norm,
    dependence_witness,
    fat_cantor,
    fejer_mean,
    haar_spectrum,
    parse_set,
    periodization_grid,
    sinc_spectrum,
    spectrum_from_set,
    time_domain_norm_oracle,
)
from l2translates.cli import main as cli_main

HALF = parse_set("0..1/2")
J = parse_set("5/8..7/8")
LOCAL = parse_set("1/4..1/2")
BOUND = 2.0


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_oracle_equivalence(report):
    start = time.perf_counter()
    psi = spectrum_from_set(HALF)
    grid = periodization_grid(psi, 4096, 1.0)
    c = CoefficientWindow.indicator(J, 8).reflected()
    worst = 0.0
    for n in (1, 2, 4, 8):
        value = combination_norm(c, n, grid)
        oracle = time_domain_norm_oracle(c, n, psi)
        worst = max(worst, abs(value - oracle) / oracle)
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-5 and elapsed < 30, f"max relative gap {worst:.2e} (tol 1e-5), {elapsed:.1f}s (limit 30s)")


def test_criterion_2_witness_decay(report):
    start = time.perf_counter()
    schedule = [1 << i for i in range(9)]
    f = CoefficientWindow.indicator(J, schedule[-1])
    w = dependence_witness(parse_set("1/2..1"), f, schedule, M=4096)
    elapsed = time.perf_counter() - start
    positive = all(v > 0 for v in w.norms)
    ok = positive and w.decay_ratio < 0.1 and elapsed < 60
    report(2, ok, f"norms positive={positive}, final/first={w.decay_ratio:.4f} (< 0.1), {elapsed:.1f}s (limit 60s)")


def test_criterion_3_orthonormal_rigidity(report):
    rng = np.random.default_rng(20240601)
    details = []
    ok = True
    for name, psi in (("haar", haar_spectrum()), ("sinc", sinc_spectrum())):
        dev = float(np.max(np.abs(periodization_grid(psi, 64, 1e-8).values - 1)))
        grid = periodization_grid(psi, 1024, 1e-8)
        gap = 0.0
        for _ in range(20):
            n = int(rng.integers(0, 17))
            c = CoefficientWindow(rng.normal(size=2 * n + 1) + 1j * rng.normal(size=2 * n + 1))
            gap = max(gap, abs(combination_norm(c, n, grid) - c.l2_norm()))
        ok &= dev < 1e-7 and gap < 1e-6
        details.append(f"{name}: grid deviation {dev:.2e}, norm gap {gap:.2e}")
    report(3, ok, "; ".join(details))


def test_criterion_4_classification_truth_table(report):
    M = 1024
    one = classify(PeriodizationGrid.from_function(np.ones_like, M), 1e-6)
    sin2 = classify(PeriodizationGrid.from_function(lambda x: np.sin(np.pi * x) ** 2, M), 1e-6)
    half = classify(periodization_grid(spectrum_from_set(HALF), M, 1.0), 1e-6)
    zero_measure = float(half.zero_set_measure)
    rows = [
        one.minimal_flag and one.positive_ae,
        sin2.positive_ae and not sin2.minimal_flag and sin2.divergence_diagnostic,
        not half.positive_ae and 0.49 <= zero_measure <= 0.51,
    ]
    detail = (
        f"p=1 minimal={one.minimal_flag}; sin^2 positive={sin2.positive_ae} minimal={sin2.minimal_flag} "
        f"diagnostic={sin2.divergence_diagnostic}; indicator positive={half.positive_ae} zero measure={zero_measure}"
    )
    report(4, all(rows), detail)


def test_criterion_5_localization_boundedness(report):
    start = time.perf_counter()
    f = CoefficientWindow.indicator(LOCAL, 4096)
    prof = boundedness_profile(f, parse_set("0..1/8"), range(1, 4097))
    elapsed = time.perf_counter() - start
    tail = [prof.sups[n - 1].value for n in (1024, 2048, 4096)]
    decreasing = tail[0] > tail[1] > tail[2]
    ok = prof.observed_bound < BOUND and decreasing and elapsed < 120
    detail = (
        f"max certified bound {prof.observed_bound:.3f} (< {BOUND}), sups at 1024/2048/4096 = "
        + "/".join(f"{v:.2e}" for v in tail)
        + f", {elapsed:.1f}s (limit 120s)"
    )
    report(5, ok, detail)


def test_criterion_6_restricted_versus_full_circle(report):
    eta = F(1, 64)
    f = CoefficientWindow.indicator(LOCAL, 4096)
    jumps = IntervalSet([(F(1, 4) - eta, F(1, 4) + eta), (F(1, 2) - eta, F(1, 2) + eta)])
    restricted, full = boundedness_profiles(f, [~jumps, IntervalSet.full()], range(1, 4097))
    late = full.values[1024:]
    gibbs = float(late.min())
    ok = restricted.observed_bound < BOUND and gibbs >= 1.08
    detail = (
        f"restricted certified max {restricted.observed_bound:.3f} (< {BOUND}); "
        f"full-circle sups for n > 1024 in [{late.min():.4f}, {late.max():.4f}] (Gibbs ~1.0895)"
    )
    report(6, ok, detail)


def test_criterion_7_fejer_and_cesaro(report):
    sets = [HALF, J, LOCAL, fat_cantor(4, F(1, 4)), parse_set("1/7..2/7, 3/7..6/7"), parse_set("0..1/1000")]
    xi = np.arange(4096) / 4096
    worst = 0.0
    for A in sets:
        f = CoefficientWindow.indicator(A, 512)
        for n in (1, 2, 3, 8, 64, 200, 512, 513):
            worst = max(worst, float(np.abs(fejer_mean(f, n, xi)).max()))
    grid = periodization_grid(spectrum_from_set(HALF), 2048, 1.0)
    c = CoefficientWindow.indicator(J, 256).reflected()
    schedule = [1, 2, 3, 4, 8, 16, 32, 64, 128, 256, 257]
    ces = cesaro_independence_probe(c, grid, schedule)
    partial = [combination_norm(c, h, grid) for h in range(257)]
    dominated = all(v <= max(partial[:n]) + 1e-12 for n, v in zip(schedule, ces))
    ok = worst <= 1 + 1e-6 and dominated
    report(7, ok, f"max |Fejer mean| {worst:.9f} (<= 1+1e-6); Cesaro dominated on all {len(schedule)} entries: {dominated}")


def test_criterion_8_cantor_probe_schema(report, tmp_path):
    out = tmp_path / "cantor.csv"
    code = cli_main(["cantor-probe", "--depth", "5", "--remove", "1/4", "--width", "2048", "--level", "12", "--out", str(out)])
    text = out.read_text()
    lines = text.splitlines()
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    quantities = {r["quantity"] for r in rows}
    regions = {r["region"] for r in rows if r["quantity"] == "sup"}
    finite = all(math.isfinite(float(r["value"])) and math.isfinite(float(r["certified_bound"])) for r in rows)
    ok = (
        code == 0
        and lines[0].startswith("#")
        and "status=evidence" in lines[0]
        and lines[1] == "quantity,region,n,value,certified_bound"
        and quantities == {"u_norm", "sup"}
        and regions == {"complement", "full"}
        and finite
    )
    u = next(float(r["value"]) for r in rows if r["quantity"] == "u_norm")
    report(8, ok, f"exploratory, schema valid={ok}; {len(rows)} rows, windowed-sum estimate {u:.4f} (evidence only)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
