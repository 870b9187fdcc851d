"""Finite unions of half-open rational intervals in [0, 1).

These stand in for measurable subsets of the unit interval modulo null
sets.  Every quantity computed downstream (measure, Fourier coefficients
of indicators, periodized spectra) ignores null sets, so a set of
irrationals such as ``[0, 1/2] \\ Q`` is represented by its hull
``[0, 1/2)``.

Endpoints are exact ``Fraction`` values.  Floats are accepted and
converted exactly (a float is a dyadic rational); callers who need an
irrational endpoint must round it themselves, and the induced change in
measure is at most the rounding error per endpoint.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DegenerateSpecError, MalformedIntervalError, ParseError

Rational = Fraction | int | str | float

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value: Rational) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise MalformedIntervalError(f"not a rational endpoint: {value!r}")
    if isinstance(value, float) and not math.isfinite(value):
        raise MalformedIntervalError(f"non-finite endpoint: {value!r}")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise MalformedIntervalError(f"not a rational endpoint: {value!r}") from exc


def _merge(raw: Iterable[tuple[Rational, Rational]]) -> tuple[tuple[Fraction, Fraction], ...]:
    pairs = []
    for item in raw:
        try:
            lo, hi = item
        except (TypeError, ValueError) as exc:
            raise MalformedIntervalError(f"expected (lo, hi) pair, got {item!r}") from exc
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo >= hi:
            raise MalformedIntervalError(f"interval with lo >= hi: [{lo}, {hi})")
        if lo < 0 or hi > 1:
            raise MalformedIntervalError(f"interval [{lo}, {hi}) not inside [0, 1]")
        pairs.append((lo, hi))
    pairs.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in pairs:
        # touching intervals merge too: [a,b) u [b,c) = [a,c)
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True, init=False)
class IntervalSet:
    """Sorted, disjoint, non-adjacent half-open intervals ``[lo, hi)``.

    The constructor accepts any iterable of ``(lo, hi)`` pairs and
    normalizes it, so ``IntervalSet(raw)`` and ``normalize(raw)`` agree.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __init__(self, intervals: Iterable[tuple[Rational, Rational]] = ()):
        object.__setattr__(self, "intervals", _merge(intervals))

    @classmethod
    def empty(cls) -> IntervalSet:
        return cls(())

    @classmethod
    def full(cls) -> IntervalSet:
        return cls([(ZERO, ONE)])

    @classmethod
    def parse(cls, text: str) -> IntervalSet:
        return parse_set(text)

    def __iter__(self) -> Iterator[tuple[Fraction, Fraction]]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return ", ".join(f"{lo}..{hi}" for lo, hi in self.intervals)

    def __repr__(self) -> str:
        return f"IntervalSet({str(self)!r})"

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), ZERO)

    @property
    def endpoints(self) -> list[Fraction]:
        return [x for pair in self.intervals for x in pair]

    def complement(self) -> IntervalSet:
        gaps = []
        cursor = ZERO
        for lo, hi in self.intervals:
            if lo > cursor:
                gaps.append((cursor, lo))
            cursor = hi
        if cursor < ONE:
            gaps.append((cursor, ONE))
        return IntervalSet(gaps)

    def union(self, other: IntervalSet) -> IntervalSet:
        return IntervalSet(self.intervals + other.intervals)

    def intersection(self, other: IntervalSet) -> IntervalSet:
        out = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def difference(self, other: IntervalSet) -> IntervalSet:
        return self.intersection(other.complement())

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def __invert__(self) -> IntervalSet:
        return self.complement()

    def issubset(self, other: IntervalSet) -> bool:
        return self.difference(other).measure == 0

    def contains(self, x: Rational) -> bool:
        x = as_fraction(x)
        return any(lo <= x < hi for lo, hi in self.intervals)

    def indicator(self, xi) -> np.ndarray:
        """Evaluate the indicator at float points, reduced modulo 1."""
        xi = np.mod(np.asarray(xi, dtype=float), 1.0)
        out = np.zeros(xi.shape, dtype=float)
        for lo, hi in self.intervals:
            out[(xi >= float(lo)) & (xi < float(hi))] = 1.0
        return out


def normalize(raw: Iterable[tuple[Rational, Rational]]) -> IntervalSet:
    return IntervalSet(raw)


def measure(A: IntervalSet) -> Fraction:
    return A.measure


def complement(A: IntervalSet) -> IntervalSet:
    return A.complement()


@dataclass(frozen=True)
class CantorSpec:
    """Middle-interval removal schedule.

    At stage ``i`` the open middle ``removal_fractions[i]`` of every
    remaining interval is deleted, so the stage-``depth`` set has
    ``2**depth`` intervals and measure ``prod(1 - r)``.  A constant
    fraction gives a null set in the limit; a summable schedule such as
    ``r_i = 4**-(i+1)`` gives a fat (Smith-Volterra-Cantor type) set.
    """

    depth: int
    removal_fractions: tuple[Fraction, ...]

    def __post_init__(self):
        if not isinstance(self.depth, int) or self.depth < 0:
            raise DegenerateSpecError(f"depth must be a nonnegative integer, got {self.depth!r}")
        fractions = tuple(as_fraction(r) for r in self.removal_fractions)
        if len(fractions) != self.depth:
            raise DegenerateSpecError(
                f"need one removal fraction per stage: depth {self.depth}, got {len(fractions)}"
            )
        for r in fractions:
            if not 0 < r < 1:
                raise DegenerateSpecError(f"removal fraction {r} outside (0, 1) leaves no positive measure")
        object.__setattr__(self, "removal_fractions", fractions)

    @classmethod
    def uniform(cls, depth: int, remove: Rational) -> CantorSpec:
        return cls(depth, (as_fraction(remove),) * depth)

    @property
    def residual_measure(self) -> Fraction:
        out = ONE
        for r in self.removal_fractions:
            out *= 1 - r
        return out


def fat_cantor(spec: CantorSpec | int, remove: Rational | Sequence[Rational] | None = None) -> IntervalSet:
    """Depth-truncated Cantor-like set.

    Accepts a ``CantorSpec`` or ``(depth, remove)`` where ``remove`` is a
    single fraction or one fraction per stage.  The result is a superset
    of every deeper stage; the infinite-depth set itself is never built.
    """
    if not isinstance(spec, CantorSpec):
        if remove is None:
            raise DegenerateSpecError("fat_cantor(depth, remove) needs a removal fraction")
        if isinstance(remove, (list, tuple)):
            spec = CantorSpec(spec, tuple(remove))
        else:
            spec = CantorSpec.uniform(spec, remove)
    pieces = [(ZERO, ONE)]
    for r in spec.removal_fractions:
        keep = (1 - r) / 2
        nxt = []
        for lo, hi in pieces:
            side = (hi - lo) * keep
            nxt.append((lo, lo + side))
            nxt.append((hi - side, hi))
        pieces = nxt
    out = IntervalSet(pieces)
    if out.measure != spec.residual_measure:
        raise AssertionError("fat_cantor measure disagrees with the product formula")
    return out


def _phase_fraction(k: np.ndarray, x: Fraction) -> np.ndarray:
    """``(k * x) mod 1`` as floats, reduced exactly in integers."""
    q = x.denominator
    p = x.numerator % q
    if q < 2**31:
        return np.remainder(np.remainder(k, q) * p, q) / q
    return np.array([(int(v) * p) % q / q for v in k], dtype=float)


def _cis_exact(frac) -> np.ndarray:
    """``exp(2 pi i frac)`` with quarter turns returned exactly."""
    frac = np.asarray(frac, dtype=float)
    out = np.exp(2j * np.pi * frac)
    quarter = frac * 4
    exact = quarter == np.round(quarter)
    if np.any(exact):
        table = np.array([1, 1j, -1, -1j])
        out = np.where(exact, table[np.round(quarter).astype(np.int64) % 4], out)
    return out


def indicator_fourier_coefficients(A: IntervalSet, ks) -> np.ndarray:
    """Fourier coefficients ``int_A exp(-2 pi i k t) dt`` for integer ``ks``.

    Each interval contributes ``exp(-i pi k (lo+hi)) sin(pi k len)/(pi k)``;
    both phases are reduced modulo 1 (resp. 2) exactly before conversion
    to floating point, so accuracy does not degrade with ``|k|``.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    out = np.zeros(ks.shape, dtype=complex)
    nonzero = ks != 0
    k = ks[nonzero]
    acc = np.zeros(k.shape, dtype=complex)
    for lo, hi in A.intervals:
        mid_frac = _phase_fraction(k, (lo + hi) / 2)
        half_len_frac = _phase_fraction(k, (hi - lo) / 2)
        # sin(pi k len) = sin(2 pi * frac(k len / 2))
        sine = _cis_exact(half_len_frac).imag
        acc += _cis_exact(-mid_frac) * sine
    out[nonzero] = acc / (np.pi * k)
    out[~nonzero] = float(A.measure)
    return out


def indicator_fourier_coefficient(A: IntervalSet, k: int) -> complex:
    return complex(indicator_fourier_coefficients(A, [k])[0])


_RANGE = re.compile(r"^\s*([-+]?[0-9]+(?:/[0-9]+)?)\s*\.\.\s*([-+]?[0-9]+(?:/[0-9]+)?)\s*$")
_CANTOR = re.compile(r"^\s*cantor\s*\((.*)\)\s*$", re.IGNORECASE)


def parse_ranges(text: str) -> list[tuple[Fraction, Fraction]]:
    """Parse ``"a..b, c..d"`` into rational pairs without range checks."""
    out = []
    for chunk in text.split(","):
        if not chunk.strip():
            continue
        m = _RANGE.match(chunk)
        if not m:
            raise ParseError(f"bad range {chunk.strip()!r}; expected p/q..r/s")
        try:
            out.append((Fraction(m.group(1)), Fraction(m.group(2))))
        except ZeroDivisionError as exc:
            raise ParseError(f"zero denominator in {chunk.strip()!r}") from exc
    return out


def _parse_cantor(body: str) -> IntervalSet:
    kwargs = {}
    for item in body.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"cantor argument {item.strip()!r} is not key=value")
        kwargs[key.strip().lower()] = value.strip()
    if set(kwargs) != {"depth", "remove"}:
        raise ParseError("cantor(...) needs exactly depth= and remove=")
    try:
        depth = int(kwargs["depth"])
        fractions = [Fraction(r) for r in kwargs["remove"].split(":")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad cantor arguments {body!r}") from exc
    if len(fractions) == 1:
        return fat_cantor(CantorSpec.uniform(depth, fractions[0]))
    return fat_cantor(CantorSpec(depth, tuple(fractions)))


def parse_set(text: str) -> IntervalSet:
    """Parse a set literal.

    Grammar: ``"0/1..1/2, 5/8..7/8"``, ``"empty"``, ``"cantor(depth=4, remove=1/4)"``
    (one fraction for every stage, or ``remove=1/4:1/16:...`` per stage), and
    ``"~<literal>"`` for the complement.
    """
    text = text.strip()
    if text.startswith("~"):
        return parse_set(text[1:]).complement()
    if text.lower() in ("", "empty"):
        return IntervalSet.empty()
    m = _CANTOR.match(text)
    if m:
        return _parse_cantor(m.group(1))
    return IntervalSet(parse_ranges(text))
