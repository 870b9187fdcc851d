"""Periodization ``p(xi) = sum_k |psi_hat(xi + k)|^2`` and independence classification.

A spectrum is described piecewise on the real line.  Pieces with finite
support contribute finitely many shifts, which are found exactly with
rational arithmetic, so compactly supported spectra periodize with zero
tail.  Unbounded pieces are summed over ``|k| <= K`` and the remainder is
bounded through the decay envelope ``|psi_hat(x)| <= C |x|^-alpha`` for
``|x| >= radius``:

    tail(xi) <= C^2 [zeta(2 alpha, K + 1 + xi) + zeta(2 alpha, K + 1 - xi)]

with ``zeta`` the Hurwitz zeta function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import polygamma, zeta

from .errors import (
    DegenerateSpectrumError,
    IndistinguishableZeroError,
    NonintegrableEnvelopeError,
    ParseError,
    ValidationError,
)
from .sets import IntervalSet, as_fraction, parse_ranges, parse_set

SHIFT_CHUNK = 1 << 20


@dataclass(frozen=True)
class SpectrumPiece:
    """``psi_hat`` restricted to ``[lo, hi)``; ``None`` bounds are infinite.

    Kinds:

    ``"trig"``
        ``params`` is a tuple of ``(freq, poly)`` terms and the value is
        ``sum poly(x) exp(2 pi i freq x)`` with ``poly`` listing
        coefficients in increasing degree.
    ``"modsinc"``
        ``params = (amp, freq, width)`` and the value is
        ``amp exp(2 pi i freq x) sinc(width x)`` with
        ``sinc(t) = sin(pi t)/(pi t)``.
    """

    lo: Fraction | None
    hi: Fraction | None
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in ("trig", "modsinc"):
            raise ValidationError(f"unknown spectrum piece kind {self.kind!r}")
        lo = None if self.lo is None else as_fraction(self.lo)
        hi = None if self.hi is None else as_fraction(self.hi)
        if lo is not None and hi is not None and lo >= hi:
            raise ValidationError(f"empty spectrum piece [{lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    def value(self, x: np.ndarray) -> np.ndarray:
        """Closed-form value, ignoring the support restriction."""
        x = np.asarray(x, dtype=float)
        if self.kind == "modsinc":
            amp, freq, width = self.params
            return amp * np.exp(2j * np.pi * freq * x) * np.sinc(width * x)
        out = np.zeros(x.shape, dtype=complex)
        for freq, poly in self.params:
            out += np.polynomial.polynomial.polyval(x, poly) * np.exp(2j * np.pi * freq * x)
        return out

    def abs2(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "modsinc":
            amp, _, width = self.params
            return abs(amp) ** 2 * np.sinc(width * np.asarray(x, dtype=float)) ** 2
        return np.abs(self.value(x)) ** 2

    @property
    def is_constant(self) -> bool:
        return self.kind == "trig" and len(self.params) == 1 and self.params[0][0] == 0 and len(self.params[0][1]) == 1

    @property
    def shift_periodic(self) -> bool:
        """True when ``|value(xi + k)|^2 = s(xi) / (xi + k)^2`` for integer ``k``."""
        if self.kind != "modsinc" or self.bounded:
            return False
        width = self.params[2]
        return self.lo is None and self.hi is None and float(width).is_integer() and width != 0


@dataclass(frozen=True)
class DecayEnvelope:
    """``|psi_hat(x)| <= C |x|^-alpha`` whenever ``|x| >= radius``."""

    C: float
    alpha: float
    radius: float = 1.0


@dataclass(frozen=True)
class SpectrumDescriptor:
    pieces: tuple[SpectrumPiece, ...]
    decay: DecayEnvelope | None = None
    label: str = ""
    exact: bool = False

    def __post_init__(self):
        pieces = tuple(sorted(self.pieces, key=lambda p: (-math.inf if p.lo is None else p.lo)))
        for a, b in zip(pieces, pieces[1:]):
            if a.hi is None or b.lo is None or a.hi > b.lo:
                raise ValidationError("spectrum pieces overlap")
        if any(not p.bounded for p in pieces) and self.decay is None:
            raise ValidationError("unbounded spectrum piece needs a decay envelope")
        object.__setattr__(self, "pieces", pieces)

    @property
    def compact_support(self) -> tuple[Fraction, Fraction] | None:
        if not self.pieces or any(not p.bounded for p in self.pieces):
            return None
        return self.pieces[0].lo, self.pieces[-1].hi

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for p in self.pieces:
            mask = np.ones(x.shape, dtype=bool)
            if p.lo is not None:
                mask &= x >= float(p.lo)
            if p.hi is not None:
                mask &= x < float(p.hi)
            out[mask] = p.value(x[mask])
        return out


def indicator_spectrum(ranges, label: str = "") -> SpectrumDescriptor:
    pieces = tuple(SpectrumPiece(lo, hi, "trig", ((0.0, (1.0,)),)) for lo, hi in ranges)
    return SpectrumDescriptor(pieces, label=label or "indicator", exact=True)


def spectrum_from_set(Ac: IntervalSet) -> SpectrumDescriptor:
    """Spectrum equal to 1 on ``Ac`` and 0 elsewhere; its periodization is
    exactly the indicator of ``Ac``."""
    if Ac.measure == 0:
        raise DegenerateSpectrumError("spectrum_from_set needs a set of positive measure")
    return indicator_spectrum(Ac.intervals, label=f"indicator({Ac})")


def haar_spectrum() -> SpectrumDescriptor:
    """Haar scaling function: ``e^{-pi i x} sin(pi x)/(pi x)``."""
    piece = SpectrumPiece(None, None, "modsinc", (1.0, -0.5, 1.0))
    return SpectrumDescriptor((piece,), DecayEnvelope(1 / math.pi, 1.0, 1.0), label="haar")


def sinc_spectrum() -> SpectrumDescriptor:
    return indicator_spectrum([(Fraction(-1, 2), Fraction(1, 2))], label="sinc")


def sine_bump_spectrum(a: Fraction = Fraction(0), b: Fraction = Fraction(1)) -> SpectrumDescriptor:
    """``sin(pi (x - a)/(b - a))`` on ``[a, b)``."""
    a, b = as_fraction(a), as_fraction(b)
    width = float(b - a)
    shift = math.pi * float(a) / width
    freq = 1 / (2 * width)
    terms = (
        (freq, (np.exp(-1j * shift) / 2j,)),
        (-freq, (-np.exp(1j * shift) / 2j,)),
    )
    return SpectrumDescriptor((SpectrumPiece(a, b, "trig", terms),), label=f"sine_bump({a}..{b})")


def _shift_range(piece: SpectrumPiece, K: int) -> tuple[int, int]:
    """Shifts ``k`` with ``xi + k`` possibly in the piece for some ``xi`` in [0, 1)."""
    k_lo = -K if piece.lo is None else math.floor(piece.lo) - 1
    k_hi = K if piece.hi is None else math.ceil(piece.hi)
    return k_lo, k_hi


def _member(piece: SpectrumPiece, num: np.ndarray, den: int) -> np.ndarray:
    """Exact test ``lo <= num/den < hi`` for integer arrays ``num``."""
    mask = np.ones(num.shape, dtype=bool)
    big = max(abs(int(num.max())), abs(int(num.min())), 1) if num.size else 1
    for bound, is_lo in ((piece.lo, True), (piece.hi, False)):
        if bound is None:
            continue
        p, q = bound.numerator, bound.denominator
        if big * q < 2**62 and abs(p) * den < 2**62:
            lhs = num * q
            rhs = p * den
        else:
            lhs = np.array([int(v) * q for v in num], dtype=object)
            rhs = p * den
        mask &= (lhs >= rhs) if is_lo else (lhs < rhs)
    return mask


def required_shift(psi: SpectrumDescriptor, eps: float) -> int:
    """Smallest truncation ``K`` whose certified tail is at most ``eps``.

    Returns 0 for compactly supported spectra.
    """
    if psi.compact_support is not None:
        return 0
    env = psi.decay
    if env.alpha <= 0.5:
        raise NonintegrableEnvelopeError(
            f"decay exponent {env.alpha} <= 1/2: sum of |psi_hat(xi+k)|^2 is not certified to converge"
        )
    if eps <= 0:
        raise ValidationError(f"tail tolerance must be positive, got {eps}")
    finite = [abs(b) for p in psi.pieces for b in (p.lo, p.hi) if b is not None]
    K0 = max([math.ceil(env.radius)] + [math.ceil(b) + 1 for b in finite])

    def bound(K):
        return tail_bound(env, K)

    if bound(K0) <= eps:
        return K0
    hi = K0
    while bound(hi) > eps:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def tail_bound(env: DecayEnvelope, K: int, xi=None):
    """Envelope bound on ``sum_{|k|>K} |psi_hat(xi+k)|^2``; sup over [0,1) if ``xi`` is None."""
    s = 2 * env.alpha
    if xi is None:
        return env.C**2 * float(zeta(s, K + 1) + zeta(s, K))
    xi = np.asarray(xi, dtype=float)
    return env.C**2 * (zeta(s, K + 1 + xi) + zeta(s, K + 1 - xi))


def _periodic_modsinc_sum(piece: SpectrumPiece, xi: np.ndarray, k_lo: int, k_hi: int) -> np.ndarray:
    """``sum_{k_lo <= k <= k_hi} |amp sinc(w (xi + k))|^2`` via trigamma differences.

    For integer ``w`` the numerator ``sin^2(pi w (xi + k))`` does not depend on
    ``k``, and ``sum_{k=a}^{b} (xi + k)^-2 = psi1(xi + a) - psi1(xi + b + 1)``
    when ``xi + a > 0``.  The value is the same finite sum as direct
    summation, evaluated in closed form.
    """
    amp, _, width = piece.params
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape)
    at_int = xi == np.round(xi)
    # integer xi: only the k = -xi term is nonzero, and it equals |amp|^2
    out[at_int] = abs(amp) ** 2 * ((-np.round(xi[at_int]) >= k_lo) & (-np.round(xi[at_int]) <= k_hi))
    x = xi[~at_int]
    if x.size:
        base = np.floor(x)
        frac = x - base
        # shift so that the summation variable is m = k + base, xi + k = frac + m
        a = k_lo + base
        b = k_hi + base
        pos = np.where(b >= 0, polygamma(1, frac + np.maximum(a, 0)) - polygamma(1, frac + b + 1), 0.0)
        pos = np.where(a > b, 0.0, pos)
        # m <= -1: (frac + m)^2 = (|m| - frac)^2, |m| from max(1, -b) to -a
        neg_lo = np.maximum(1, -b)
        neg_hi = -a
        neg = np.where(neg_hi >= neg_lo, polygamma(1, neg_lo - frac) - polygamma(1, neg_hi + 1 - frac), 0.0)
        sin2 = np.sin(np.pi * width * frac) ** 2
        out[~at_int] = abs(amp) ** 2 * sin2 / (np.pi * width) ** 2 * (pos + neg)
    return out


def _piece_sum(piece: SpectrumPiece, xi_num: np.ndarray, den: int, K: int, method: str) -> np.ndarray:
    """``sum_k |piece(xi + k)|^2`` over shifts within ``|k| <= K`` for
    rational points ``xi = xi_num/den`` in [0, 1)."""
    xi = np.asarray(xi_num / den, dtype=float)
    k_lo, k_hi = _shift_range(piece, K)
    if method == "closed" and piece.shift_periodic:
        return _periodic_modsinc_sum(piece, xi, k_lo, k_hi)
    out = np.zeros(xi.shape)
    if piece.bounded:
        for k in range(k_lo, k_hi + 1):
            num = xi_num + k * den
            mask = _member(piece, num, den)
            if mask.any():
                out[mask] += piece.abs2(np.asarray(num[mask] / den, dtype=float))
        return out
    # unbounded piece: chunked direct sum, exact membership on the bounded side
    for start in range(k_lo, k_hi + 1, SHIFT_CHUNK):
        ks = np.arange(start, min(start + SHIFT_CHUNK, k_hi + 1))
        for i, (n_i, x_i) in enumerate(zip(xi_num, xi)):
            vals = piece.abs2(x_i + ks)
            if piece.lo is not None or piece.hi is not None:
                shifted = n_i + (ks.astype(object) if xi_num.dtype == object else ks) * den
                vals = vals * _member(piece, shifted, den)
            out[i] += math.fsum(vals) if vals.size < 4096 else float(np.sum(vals))
    return out


def _as_rational_points(xi) -> tuple[np.ndarray, int]:
    fr = [as_fraction(x) for x in np.atleast_1d(xi)]
    fr = [x - math.floor(x) for x in fr]
    den = math.lcm(*[x.denominator for x in fr]) if fr else 1
    return np.array([x.numerator * (den // x.denominator) for x in fr], dtype=object if den > 2**40 else np.int64), den


def periodize(psi: SpectrumDescriptor, xi, eps: float, method: str = "closed") -> tuple[float, float]:
    """``(value, tail)`` with ``value <= p(xi) <= value + tail`` and ``tail <= eps``.

    ``value`` is the exact finite sum over ``|k| <= K(eps)``.  With
    ``method="direct"`` every term is evaluated individually; the default
    uses closed-form window sums where a piece admits one.
    """
    if eps <= 0:
        raise ValidationError(f"tail tolerance must be positive, got {eps}")
    K = required_shift(psi, eps)
    num, den = _as_rational_points(xi)
    value = sum(_piece_sum(p, num, den, K, method) for p in psi.pieces)
    x = float(num[0]) / den
    tail = 0.0 if psi.compact_support is not None else float(tail_bound(psi.decay, K, x))
    return float(value[0]), tail


@dataclass(frozen=True, eq=False)
class PeriodizationGrid:
    """Samples ``values[j] ~ p(j / M)``; true values lie in ``[v, v + tail_error]``.

    ``cell_constant`` records that ``p`` is known to be constant on every
    cell ``[j/M, (j+1)/M)``, as for indicator spectra with endpoints on the
    grid.
    """

    M: int
    values: np.ndarray
    tail_error: float = 0.0
    source: str = ""
    cell_constant: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.size != self.M or self.M < 1:
            raise ValidationError(f"grid of size {self.M} got {vals.size} values")
        if np.any(vals < 0) or self.tail_error < 0:
            raise ValidationError("periodization samples and tail must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], M: int, source: str = "") -> PeriodizationGrid:
        return cls(M, np.asarray(func(np.arange(M) / M), dtype=float), 0.0, source)

    @property
    def xi(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


@lru_cache(maxsize=32)
def _grid_cached(psi: SpectrumDescriptor, M: int, eps: float, method: str) -> PeriodizationGrid:
    K = required_shift(psi, eps)
    num = np.arange(M, dtype=np.int64)
    values = np.zeros(M)
    for p in psi.pieces:
        values += _piece_sum(p, num, M, K, method)
    tail = 0.0 if psi.compact_support is not None else tail_bound(psi.decay, K)
    aligned = psi.compact_support is not None and all(
        p.is_constant and (p.lo * M).denominator == 1 and (p.hi * M).denominator == 1 for p in psi.pieces
    )
    return PeriodizationGrid(M, values, tail, psi.label, aligned)


def periodization_grid(psi: SpectrumDescriptor, M: int, eps: float, method: str = "closed") -> PeriodizationGrid:
    """``p`` sampled at ``j / M`` for ``j < M`` with one shared tail bound.

    Jumps of ``psi_hat`` at rational points are resolved exactly, with the
    half-open convention: a piece ``[lo, hi)`` contains ``lo``.
    """
    if not isinstance(M, int) or M < 1:
        raise ValidationError(f"grid size must be a positive integer, got {M!r}")
    if eps <= 0:
        raise ValidationError(f"tail tolerance must be positive, got {eps}")
    return _grid_cached(psi, M, float(eps), method)


@dataclass(frozen=True)
class ClassificationReport:
    """Independence evidence read off a sampled periodization.

    ``positive_ae`` means the estimated zero set is no larger than one
    grid cell; ``l2_independent_sufficient`` equals it because positivity
    almost everywhere is the known sufficient condition.  ``minimal_flag``
    estimates integrability of ``1/p``: it requires ``positive_ae`` and no
    divergence diagnostic.

    ``reciprocal_integral`` is the floor-regularized mean of
    ``1/max(p, tau_zero)``.  ``floor_growth`` is its ratio under
    ``tau_zero/10``; it can reach 10 only when every sample is below the
    floor.  ``resolution_growth`` compares the Riemann sum of ``1/p`` over
    samples above ``tau_zero`` with the smallest such sum over the
    ``COARSEN`` offset subgrids of spacing ``COARSEN/M``.  Riemann sums of
    an integrable reciprocal agree, so the ratio tends to 1; near a
    quadratic zero they scale like the inverse spacing, wherever the zero
    falls between samples.
    """

    ess_inf_est: float
    ess_sup_est: float
    positive_ae: bool
    zero_set_approx: IntervalSet
    minimal_flag: bool
    l2_independent_sufficient: bool
    tau_zero: float
    M: int
    reciprocal_integral: float
    floor_growth: float
    resolution_growth: float
    divergence_diagnostic: bool
    status: str = field(default="evidence")

    @property
    def zero_set_measure(self) -> Fraction:
        return self.zero_set_approx.measure


FLOOR_GROWTH_LIMIT = 10.0
RESOLUTION_GROWTH_LIMIT = 2.0
COARSEN = 8


def _reciprocal_mean(values: np.ndarray, floor: float) -> float:
    # periodic trapezoid rule is the plain mean of the samples
    return float(np.mean(1.0 / np.maximum(values, floor)))


def _offzero_mean(values: np.ndarray, tau: float) -> float:
    kept = values[values > tau]
    return float(np.mean(1.0 / kept)) if kept.size else math.inf


def classify(grid: PeriodizationGrid, tau_zero: float) -> ClassificationReport:
    if tau_zero <= grid.tail_error:
        raise IndistinguishableZeroError(
            f"tau_zero={tau_zero} does not exceed the grid tail bound {grid.tail_error}"
        )
    M = grid.M
    vals = grid.values
    zero_cells = np.flatnonzero(vals <= tau_zero)
    zero_set = IntervalSet((Fraction(int(j), M), Fraction(int(j) + 1, M)) for j in zero_cells)
    positive_ae = zero_set.measure <= Fraction(1, M)

    coarse = _reciprocal_mean(vals, tau_zero)
    floor_growth = _reciprocal_mean(vals, tau_zero / 10) / coarse
    step = min(COARSEN, M // 2)
    fine_mean = _offzero_mean(vals, tau_zero)
    coarse_mean = min(_offzero_mean(vals[r::step], tau_zero) for r in range(step)) if step > 1 else fine_mean
    if math.isinf(fine_mean) or math.isinf(coarse_mean):
        resolution_growth = math.inf
    else:
        resolution_growth = fine_mean / coarse_mean
    divergent = floor_growth >= FLOOR_GROWTH_LIMIT or resolution_growth >= RESOLUTION_GROWTH_LIMIT
    minimal = bool(positive_ae and not divergent)
    return ClassificationReport(
        ess_inf_est=float(vals.min()),
        ess_sup_est=float(vals.max() + grid.tail_error),
        positive_ae=bool(positive_ae),
        zero_set_approx=zero_set,
        minimal_flag=minimal,
        l2_independent_sufficient=bool(positive_ae),
        tau_zero=float(tau_zero),
        M=M,
        reciprocal_integral=coarse,
        floor_growth=floor_growth,
        resolution_growth=resolution_growth,
        divergence_diagnostic=bool(divergent),
    )


def _num(tok: str) -> float:
    return float(Fraction(tok)) if "/" in tok else float(tok)


def _parse_custom(path: str) -> SpectrumDescriptor:
    """Read a piecewise spectrum file.

    Lines (``#`` starts a comment)::

        piece <lo> <hi>            # rationals, or -inf / inf
        term <freq> <a0> [a1 ...]  # adds poly(x) exp(2 pi i freq x) to the piece
        sinc <amp> <freq> <width>  # makes the piece amp e^{2 pi i freq x} sinc(width x)
        decay <C> <alpha> <radius>
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read spectrum file {path!r}: {exc}") from exc
    pieces = []
    current = None
    decay = None

    def bound(tok):
        if tok in ("-inf", "inf", "+inf"):
            return None
        return Fraction(tok)

    def flush():
        if current is not None:
            lo, hi, kind, params = current
            if kind is None:
                raise ParseError(f"piece {lo}..{hi} has no term or sinc line")
            pieces.append(SpectrumPiece(lo, hi, kind, tuple(params) if kind == "trig" else params))

    try:
        for lineno, raw in enumerate(text.splitlines(), 1):
            tokens = raw.split("#", 1)[0].split()
            if not tokens:
                continue
            head, args = tokens[0].lower(), tokens[1:]
            if head == "piece" and len(args) == 2:
                flush()
                current = [bound(args[0]), bound(args[1]), None, []]
            elif head == "term" and current is not None and len(args) >= 2:
                if current[2] == "modsinc":
                    raise ParseError(f"line {lineno}: cannot mix term and sinc in one piece")
                current[2] = "trig"
                current[3].append((_num(args[0]), tuple(complex(a) for a in args[1:])))
            elif head == "sinc" and current is not None and len(args) == 3 and current[2] is None:
                current[2] = "modsinc"
                current[3] = (complex(args[0]), _num(args[1]), _num(args[2]))
            elif head == "decay" and len(args) == 3:
                decay = DecayEnvelope(*(_num(a) for a in args))
            else:
                raise ParseError(f"line {lineno}: cannot parse {raw.strip()!r}")
        flush()
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad number in spectrum file {path!r}: {exc}") from exc
    if not pieces:
        raise ParseError(f"spectrum file {path!r} defines no pieces")
    return SpectrumDescriptor(tuple(pieces), decay, label=f"custom({path})")


def parse_spectrum(text: str) -> SpectrumDescriptor:
    """Parse ``indicator(a..b, ...)``, ``set(<set literal>)``, ``haar``,
    ``sinc``, ``sine_bump(a..b)``, or ``custom(<file>)``."""
    text = text.strip()
    low = text.lower()
    if low == "haar":
        return haar_spectrum()
    if low == "sinc":
        return sinc_spectrum()
    name, sep, rest = text.partition("(")
    if not sep or not rest.rstrip().endswith(")"):
        raise ParseError(f"unknown spectrum {text!r}")
    body = rest.rstrip()[:-1]
    name = name.strip().lower()
    if name == "indicator":
        ranges = parse_ranges(body)
        if not ranges:
            raise DegenerateSpectrumError("indicator() of nothing")
        for lo, hi in ranges:
            if lo >= hi:
                raise ParseError(f"empty range {lo}..{hi}")
        if all(0 <= lo and hi <= 1 for lo, hi in ranges):
            return spectrum_from_set(IntervalSet(ranges))
        return indicator_spectrum(ranges, label=f"indicator({body.strip()})")
    if name == "set":
        return spectrum_from_set(parse_set(body))
    if name == "sine_bump":
        ranges = parse_ranges(body)
        if len(ranges) != 1 or ranges[0][0] >= ranges[0][1]:
            raise ParseError("sine_bump needs one range a..b with a < b")
        return sine_bump_spectrum(*ranges[0])
    if name == "custom":
        return _parse_custom(body.strip())
    raise ParseError(f"unknown spectrum {text!r}")
