"""Norms of finite combinations of integer translates, and the probes built on them.

Conventions: a coefficient sequence ``c`` acts through the symbol
``m_c(xi) = sum_{|k|<=n} c_k e^{-2 pi i k xi}``, and

    || sum_{|k|<=n} c_k psi(. - k) ||_2^2 = int_0^1 |m_c|^2 p_psi.

Taking ``c_k = f_hat(-k)`` turns ``m_c`` into the partial sum ``S_n f``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import sici

from .errors import PreconditionError, ResolutionError, UnsupportedOracleError, ValidationError
from .fourier import (
    BoundednessProfile,
    CoefficientWindow,
    SupEstimate,
    _check_schedule,
    boundedness_profiles,
    fejer_coefficients,
    u_norm_estimate,
)
from .periodization import PeriodizationGrid, SpectrumDescriptor, periodization_grid, spectrum_from_set
from .sets import IntervalSet, indicator_fourier_coefficients


def _symbol_quadrature(coeffs: np.ndarray, grid: PeriodizationGrid) -> tuple[float, float]:
    """``int_0^1 |m(xi)|^2 p(xi) dxi`` with ``p`` held constant on grid cells.

    ``|m|^2 = sum_d a_d e^{-2 pi i d xi}`` is integrated exactly over each
    cell ``[j/M, (j+1)/M)``, so the only error comes from ``p`` varying
    inside a cell; it vanishes when the grid is flagged ``cell_constant``.  Returns ``(integral, error_estimate)``.  The estimate charges
    each cell its ``|m|^2`` mass times the jump of ``p`` to the next sample,
    which bounds the error whenever ``p`` is monotone inside cells, plus
    the tail contribution.
    """
    M = grid.M
    n = (coeffs.size - 1) // 2
    # a_d = sum_k c_k conj(c_{k-d}), d = -2n..2n
    a = np.convolve(coeffs, np.conj(coeffs[::-1]))
    d = np.arange(-2 * n, 2 * n + 1)
    w = np.empty(d.size, dtype=complex)
    nz = d != 0
    w[nz] = (1 - np.exp(-2j * np.pi * d[nz] / M)) / (2j * np.pi * d[nz])
    w[~nz] = 1.0 / M
    b = np.zeros(M, dtype=complex)
    np.add.at(b, np.mod(d, M), a * w)
    # cell masses int_{cell j} |m|^2
    cells = np.maximum(np.fft.fft(b).real, 0.0)
    vals = grid.values
    total = float(np.sum(np.abs(coeffs) ** 2))
    err = grid.tail_error * total
    if not grid.cell_constant:
        err += float(np.sum(cells * np.abs(np.roll(vals, -1) - vals)))
    return max(float(np.dot(cells, vals)), 0.0), err


def _check_resolution(n: int, grid: PeriodizationGrid) -> None:
    if grid.M < 2 * (2 * n + 1):
        raise ResolutionError(f"grid of {grid.M} points cannot resolve order {n}; need at least {2 * (2 * n + 1)}")


def combination_norm(c: CoefficientWindow, n: int, grid: PeriodizationGrid, return_error: bool = False):
    """``|| sum_{|k|<=n} c_k T_k psi ||_2`` computed on the frequency side.

    With ``return_error=True`` returns ``(norm, error_estimate)``.
    """
    if n < 0 or n > c.n:
        raise ValidationError(f"order {n} outside window of half-width {c.n}")
    _check_resolution(n, grid)
    sq, err = _symbol_quadrature(c.truncated(n).coeffs, grid)
    value = math.sqrt(sq)
    if not return_error:
        return value
    return value, (err / (2 * value) if value > 0 else math.sqrt(err))


def _oracle_pieces(psi: SpectrumDescriptor):
    if psi.compact_support is None:
        raise UnsupportedOracleError("time-domain oracle needs a compactly supported spectrum")
    pieces = []
    for p in psi.pieces:
        if not p.is_constant:
            raise UnsupportedOracleError("time-domain oracle supports piecewise constant spectra only")
        pieces.append((float(p.lo), float(p.hi), complex(p.params[0][1][0])))
    return pieces


def _psi_time(pieces, x: np.ndarray) -> np.ndarray:
    """Inverse transform of ``sum amp 1_[lo,hi)``, stable at ``x = 0``."""
    out = np.zeros(x.shape, dtype=complex)
    for lo, hi, amp in pieces:
        width = hi - lo
        out += amp * np.exp(1j * np.pi * (lo + hi) * x) * width * np.sinc(width * x)
    return out


_GL = {order: np.polynomial.legendre.leggauss(order) for order in (24, 32)}


def _panel_integral(func, a: float, b: float, panels: int, order: int) -> float:
    nodes, weights = _GL[order]
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    total = 0.0
    step = max(1, (1 << 20) // order)
    for s in range(0, panels, step):
        x = mid[s : s + step, None] + half[s : s + step, None] * nodes[None, :]
        total += float(np.sum(func(x) * (half[s : s + step, None] * weights[None, :])))
    return total


@dataclass(frozen=True)
class OracleResult:
    value: float
    truncation_bound: float
    quadrature_error: float
    half_width: float


def time_domain_norm_oracle(
    c: CoefficientWindow, n: int, psi: SpectrumDescriptor, rtol: float = 1e-8, detail: bool = False
):
    """``|| sum_{|k|<=n} c_k psi(. - k) ||_2`` by quadrature on the real line.

    ``psi`` is synthesized in closed form from the piecewise constant
    spectrum and integrated with composite Gauss-Legendre rules on
    ``[-L, L]``, refining the panels until two rule orders agree.  Outside
    ``[-L, L]``, ``g(x) = h0(x)/x + h1(x)/x^2 + r(x)`` where ``h0, h1`` are
    finite exponential sums fixed by the jump points of the spectrum; the
    tail of ``|h0/x + h1/x^2|^2`` is integrated exactly with sine and
    cosine integrals and the rest is bounded by ``truncation_bound``.
    ``L`` doubles until that bound is below ``rtol`` times the squared
    norm.
    """
    if n < 0 or n > c.n:
        raise ValidationError(f"order {n} outside window of half-width {c.n}")
    pieces = _oracle_pieces(psi)
    coeffs = c.truncated(n).coeffs
    ks = np.arange(-n, n + 1)

    near = n + 2.0

    def g_near(x):
        acc = np.zeros(x.shape, dtype=complex)
        for k, ck in zip(ks, coeffs):
            if ck != 0:
                acc += ck * _psi_time(pieces, x - k)
        return acc

    # g(x) = sum_t e^{2 pi i t x} sum_k v[t, k] / (x - k) away from the translates,
    # where t runs over jump points of the spectrum and v carries the jump sizes
    jumps: dict[float, complex] = {}
    for lo, hi, amp in pieces:
        jumps[hi] = jumps.get(hi, 0) + amp
        jumps[lo] = jumps.get(lo, 0) - amp
    ts = np.array(sorted(jumps))
    v = np.array([jumps[t] * coeffs * np.exp(-2j * np.pi * t * ks) / (2j * np.pi) for t in ts])
    weights = v.T
    fmax = max(abs(t) for t in ts)
    per_unit = max(1, math.ceil(2 * fmax)) / 2

    def g2(x):
        flat = x.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        close = np.abs(flat) < near
        out[close] = g_near(flat[close])
        far = flat[~close]
        if far.size:
            kernel = 1.0 / (far[:, None] - ks[None, :])
            out[~close] = np.sum((kernel @ weights) * np.exp(2j * np.pi * far[:, None] * ts[None, :]), axis=1)
        return (np.abs(out) ** 2).reshape(x.shape)

    # 1/(x-k) = 1/x + k/x^2 + k^2/(x^2 (x-k)):  g = h0/x + h1/x^2 + r,
    # |r| <= rho2 / (x^2 (|x| - n))
    b0 = v.sum(axis=1)
    b1 = (v * ks).sum(axis=1)
    H0 = float(np.sum(np.abs(b0)))
    H1 = float(np.sum(np.abs(b1)))
    rho2 = float(np.sum(np.abs(v) * ks**2))
    omega = 2 * np.pi * (ts[:, None] - ts[None, :])

    def main_tail(L):
        # integrals over |x| > L of e^{i w x} / x^2, / x^3, / x^4
        w = np.abs(omega)
        with np.errstate(invalid="ignore"):
            si = sici(w * L)[0]
        J2 = np.where(w == 0, 1.0 / L, np.cos(w * L) / L - w * (np.pi / 2 - si))
        S3 = np.sin(omega * L) / (2 * L**2) + omega / 2 * J2
        C4 = np.cos(omega * L) / (3 * L**3) - omega / 3 * S3
        t00 = np.sum(b0[:, None] * np.conj(b0[None, :]) * 2 * J2)
        t01 = 2 * np.real(np.sum(b0[:, None] * np.conj(b1[None, :]) * 2j * S3))
        t11 = np.sum(b1[:, None] * np.conj(b1[None, :]) * 2 * C4)
        return float(np.real(t00 + t11) + t01)

    def remainder(L):
        d = L - n
        return 2 * (H0 * rho2 / (L**2 * d) + 2 * H1 * rho2 / (3 * L**3 * d) + rho2**2 / (3 * L**3 * d**2))

    L = float(max(64, 16 * (n + 1)))
    inner = 0.0
    prev_L = 0.0
    quad_err = 0.0
    while True:
        # integrate the new shells [-L, -prev_L] and [prev_L, L]
        for a, b in ((-L, -prev_L), (prev_L, L)):
            panels = max(1, int(round((b - a) * per_unit)))
            lo_rule = _panel_integral(g2, a, b, panels, 24)
            hi_rule = _panel_integral(g2, a, b, panels, 32)
            while abs(hi_rule - lo_rule) > 1e-13 * max(1.0, abs(hi_rule)) and panels < (1 << 26):
                panels *= 2
                lo_rule = _panel_integral(g2, a, b, panels, 24)
                hi_rule = _panel_integral(g2, a, b, panels, 32)
            inner += hi_rule
            quad_err += abs(hi_rule - lo_rule)
        sq = inner + main_tail(L)
        bound = remainder(L)
        if bound <= rtol * max(sq, 1e-300) or L > 2**22:
            break
        prev_L, L = L, 2 * L
    value = math.sqrt(max(sq, 0.0))
    if detail:
        return OracleResult(value, bound, quad_err, L)
    return value


@dataclass(frozen=True)
class DependenceWitness:
    """Norms of ``sum_{|k|<=n} c_k T_k psi`` with ``c_k = f_hat(-k)`` and
    ``psi_hat`` the indicator of the complement of ``A``.

    Decay of ``norms`` toward 0 exhibits a nonzero square-summable
    sequence whose translate series converges to zero.  ``leakage`` is
    ``int_{A^c} |f|^2`` when the support of ``f`` is known (exactly 0 for
    an indicator of a subset of ``A``), else ``None``.
    """

    A: IntervalSet
    f_coeffs: CoefficientWindow
    schedule: tuple[int, ...]
    norms: tuple[float, ...]
    oracle_norms: tuple[float | None, ...] | None
    quadrature_errors: tuple[float, ...]
    leakage: Fraction | None
    M: int
    status: str = field(default="evidence")

    @property
    def decay_ratio(self) -> float:
        return self.norms[-1] / self.norms[0] if self.norms[0] > 0 else math.nan


def dependence_witness(
    A: IntervalSet,
    f: CoefficientWindow,
    schedule: Sequence[int],
    M: int | None = None,
    oracle_max_n: int = 0,
) -> DependenceWitness:
    """Translate-combination norms built from a function supported in ``A``.

    ``f`` holds the Fourier coefficients of that function.  ``M`` is the
    periodization grid size (default: 4096, or larger if the schedule needs
    it).  Schedule entries up to ``oracle_max_n`` are cross-checked with
    the time-domain oracle.
    """
    if A.measure == 0 or A.measure == 1:
        raise PreconditionError(f"need 0 < |A| < 1, got |A| = {A.measure}")
    if f.support is not None and not f.support.issubset(A):
        raise PreconditionError(f"f is supported on {f.support}, not inside A = {A}")
    schedule = _check_schedule(schedule, f.n)
    Ac = A.complement()
    psi = spectrum_from_set(Ac)
    if M is None:
        M = 4096
        while M < 2 * (2 * schedule[-1] + 1):
            M *= 2
    grid = periodization_grid(psi, M, 1.0)
    c = f.reflected()
    norms, errs, oracle = [], [], []
    for n in schedule:
        value, err = combination_norm(c, n, grid, return_error=True)
        norms.append(value)
        errs.append(err)
        oracle.append(time_domain_norm_oracle(c, n, psi) if n <= oracle_max_n else None)
    leakage = None if f.support is None else f.support.intersection(Ac).measure
    return DependenceWitness(
        A, c, schedule, tuple(norms), tuple(oracle) if oracle_max_n > 0 else None, tuple(errs), leakage, M
    )


def cesaro_independence_probe(
    c: CoefficientWindow, grid: PeriodizationGrid, schedule: Sequence[int]
) -> list[float]:
    """``|| (1/n) sum_{h<n} S_h ||_2`` for each ``n`` in the schedule, where
    ``S_h = sum_{|k|<=h} c_k T_k psi``; the average has symbol
    ``sum_{|k|<n} (1 - |k|/n) c_k e^{-2 pi i k xi}``."""
    schedule = _check_schedule(schedule, c.n + 1)
    if schedule[0] < 1:
        raise ValidationError("Cesàro averages start at n = 1")
    out = []
    for n in schedule:
        _check_resolution(n - 1, grid)
        sq, _ = _symbol_quadrature(fejer_coefficients(c, n), grid)
        out.append(math.sqrt(sq))
    return out


def set_integral_of_square(f: CoefficientWindow, E: IntervalSet) -> float:
    """``int_E |S_n f|^2`` exactly, from the indicator coefficients of ``E``."""
    n = f.n
    r = np.convolve(f.coeffs, np.conj(f.coeffs[::-1]))
    d = np.arange(-2 * n, 2 * n + 1)
    # int_E e^{2 pi i d xi} = indicator coefficient at -d
    moments = indicator_fourier_coefficients(E, -d)
    return max(float(np.sum(r * moments).real), 0.0)


@dataclass(frozen=True)
class NiceFunctionReport:
    """How close a candidate comes to a nonzero function supported in ``A``
    whose partial sums stay bounded.  Measurements only, never an
    existence claim."""

    A: IntervalSet
    width: int
    degenerate: bool
    leakage: float
    leakage_method: str
    truncated_leakage: float
    u_norm: SupEstimate
    profile_complement: BoundednessProfile | None
    profile_full: BoundednessProfile
    status: str = field(default="evidence")


def nice_function_probe(
    A: IntervalSet,
    candidate: CoefficientWindow,
    level: int,
    schedule: Sequence[int] | None = None,
) -> NiceFunctionReport:
    """Measure a candidate against the support and boundedness conditions.

    Reports leakage of the candidate outside ``A`` (exact when the
    candidate carries its support, otherwise from the truncated series),
    the windowed-sum norm estimate, and boundedness profiles on the
    complement of ``A`` and on the whole circle, all at grid ``level``.
    The default schedule is the powers of two up to the window width.
    """
    Ac = A.complement()
    if schedule is None:
        schedule = [0] + [1 << i for i in range(candidate.n.bit_length()) if (1 << i) <= candidate.n]
    truncated = set_integral_of_square(candidate, Ac) if Ac else 0.0
    if candidate.support is not None:
        leakage = float(candidate.support.intersection(Ac).measure)
        method = "exact-support"
    else:
        leakage = truncated
        method = "truncated-series"
    regions = [IntervalSet.full()] + ([Ac] if Ac else [])
    profiles = boundedness_profiles(candidate, regions, schedule, level)
    return NiceFunctionReport(
        A=A,
        width=candidate.n,
        degenerate=candidate.is_zero,
        leakage=leakage,
        leakage_method=method,
        truncated_leakage=truncated,
        u_norm=u_norm_estimate(candidate, level),
        profile_complement=profiles[1] if Ac else None,
        profile_full=profiles[0],
    )
