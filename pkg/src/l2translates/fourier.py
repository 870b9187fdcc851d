"""Symmetric partial sums, Fejér means, and certified sup estimates.

Coefficients are summed in the integer ordering 0, 1, -1, 2, -2, ...
with Kahan compensation, so that the running sum after processing
``+-n`` *is* the symmetric partial sum ``S_n``.  That lets
``boundedness_profile`` obtain every ``S_n`` on a grid in a single sweep.

Sup estimates are grid maxima made rigorous by Bernstein's inequality:
a trigonometric polynomial of degree ``n`` has derivative at most
``2 pi n sum |c_k|``, so the sup over a region is at most the grid
maximum plus that modulus times the grid spacing.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import EmptyAverageError, EmptyRegionError, ValidationError, WindowExceededError
from .sets import IntervalSet, _cis_exact, indicator_fourier_coefficients

cis = _cis_exact

CHUNK = 1 << 15


def z_order(n: int) -> Iterator[int]:
    """Integers ``0, 1, -1, 2, -2, ..., n, -n``."""
    yield 0
    for k in range(1, n + 1):
        yield k
        yield -k


@dataclass(frozen=True, eq=False)
class CoefficientWindow:
    """Fourier coefficients ``c_k`` for ``|k| <= n``, stored at ``coeffs[k + n]``.

    ``support`` is the known support of the underlying function when the
    window was built from an indicator; it is ``None`` otherwise.
    """

    coeffs: np.ndarray
    support: IntervalSet | None = None

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex).reshape(-1)
        if arr.size % 2 != 1:
            raise ValidationError(f"coefficient window needs odd length 2n+1, got {arr.size}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def n(self) -> int:
        return (self.coeffs.size - 1) // 2

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.n:
            return 0j
        return complex(self.coeffs[k + self.n])

    def __len__(self) -> int:
        return self.coeffs.size

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    @classmethod
    def indicator(cls, A: IntervalSet, n: int) -> CoefficientWindow:
        return cls(indicator_fourier_coefficients(A, np.arange(-n, n + 1)), support=A)

    @classmethod
    def from_mapping(cls, values: dict[int, complex], n: int | None = None) -> CoefficientWindow:
        width = max((abs(k) for k in values), default=0) if n is None else n
        arr = np.zeros(2 * width + 1, dtype=complex)
        for k, v in values.items():
            if abs(k) > width:
                raise WindowExceededError(f"coefficient index {k} outside window of half-width {width}")
            arr[k + width] = v
        return cls(arr)

    @classmethod
    def zeros(cls, n: int) -> CoefficientWindow:
        return cls(np.zeros(2 * n + 1, dtype=complex))

    def truncated(self, m: int) -> CoefficientWindow:
        if m > self.n or m < 0:
            raise WindowExceededError(f"cannot truncate half-width {self.n} window to {m}")
        return CoefficientWindow(self.coeffs[self.n - m : self.n + m + 1], support=self.support)

    def reflected(self) -> CoefficientWindow:
        """Window of ``k -> c_{-k}``."""
        return CoefficientWindow(self.coeffs[::-1].copy())

    def abs_sum(self, m: int | None = None) -> float:
        m = self.n if m is None else m
        return float(np.sum(np.abs(self.coeffs[self.n - m : self.n + m + 1])))

    def l2_norm(self, m: int | None = None) -> float:
        m = self.n if m is None else m
        return float(np.linalg.norm(self.coeffs[self.n - m : self.n + m + 1]))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def bernstein_modulus(f: CoefficientWindow, n: int) -> float:
    """Derivative bound ``2 pi n sum_{|k|<=n} |c_k|`` for ``S_n``."""
    return 2 * math.pi * n * f.abs_sum(n)


def _kahan_add(s: np.ndarray, comp: np.ndarray, term: np.ndarray) -> np.ndarray:
    term -= comp
    t = s + term
    np.subtract(t, s, out=comp)
    comp -= term
    return t


def _ordered_sum(coeffs: np.ndarray, n: int, xi) -> np.ndarray:
    """Compensated sum of ``coeffs[k+n] e^{2 pi i k xi}`` in integer order."""
    xi = np.asarray(xi, dtype=float)
    s = np.zeros(xi.shape, dtype=complex)
    comp = np.zeros(xi.shape, dtype=complex)
    s = _kahan_add(s, comp, coeffs[n] * np.ones(xi.shape, dtype=complex))
    for k in range(1, n + 1):
        e = cis(np.mod(k * xi, 1.0))
        s = _kahan_add(s, comp, coeffs[n + k] * e)
        s = _kahan_add(s, comp, coeffs[n - k] * np.conj(e))
    return s


def _scalar_or_array(value: np.ndarray, xi):
    return complex(value) if np.ndim(xi) == 0 else value


def partial_sum(f: CoefficientWindow, n: int, xi):
    """Symmetric partial sum ``S_n(xi) = sum_{|k|<=n} c_k e^{2 pi i k xi}``.

    ``xi`` may be a scalar or an array; the result has the same shape.
    """
    if n < 0 or n > f.n:
        raise WindowExceededError(f"partial sum of order {n} requested from a half-width {f.n} window")
    return _scalar_or_array(_ordered_sum(f.coeffs[f.n - n : f.n + n + 1], n, xi), xi)


def fejer_coefficients(f: CoefficientWindow, n: int) -> np.ndarray:
    """Triangularly weighted coefficients ``(1 - |k|/n) c_k`` for ``|k| < n``."""
    if n <= 0:
        raise EmptyAverageError("Fejér mean of order 0 averages no partial sums")
    if n > f.n + 1:
        raise WindowExceededError(f"Fejér mean of order {n} needs a half-width {n - 1} window, have {f.n}")
    m = n - 1
    ks = np.arange(-m, m + 1)
    return (1 - np.abs(ks) / n) * f.coeffs[f.n - m : f.n + m + 1]


def fejer_mean(f: CoefficientWindow, n: int, xi):
    """Mean of ``S_0, ..., S_{n-1}`` at ``xi``."""
    return _scalar_or_array(_ordered_sum(fejer_coefficients(f, n), n - 1, xi), xi)


@dataclass(frozen=True)
class SupEstimate:
    """Grid maximum of ``|g|`` with a Bernstein-certified upper bound."""

    value: float
    grid_points: int
    refinement_level: int
    modulus_bound: float

    @property
    def spacing(self) -> float:
        return 2.0 ** -self.refinement_level

    @property
    def certified_bound(self) -> float:
        return self.value + self.modulus_bound * self.spacing


@dataclass(frozen=True)
class RegionGrid:
    """Dyadic grid points ``j / 2**level`` in the closure of a region, plus
    the region's endpoints when they are off the grid."""

    level: int
    indices: np.ndarray
    extras: np.ndarray

    @property
    def size(self) -> int:
        return self.indices.size + self.extras.size

    def points(self) -> np.ndarray:
        return np.concatenate([self.indices / float(1 << self.level), self.extras])


def region_grid(region: IntervalSet, level: int) -> RegionGrid:
    if not region:
        raise EmptyRegionError("sup over an empty region")
    if level < 0:
        raise ValidationError(f"refinement level must be nonnegative, got {level}")
    N = 1 << level
    idx = []
    extras = set()
    for lo, hi in region:
        first = math.ceil(lo * N)
        last = math.floor(hi * N)
        idx.append(np.arange(first, last + 1) % N)
        for end in (lo, hi):
            if (end * N).denominator != 1:
                extras.add(float(end))
    indices = np.unique(np.concatenate(idx)).astype(np.int64)
    return RegionGrid(level, indices, np.array(sorted(extras), dtype=float))


def sup_on_set(
    evaluator: Callable[[np.ndarray], np.ndarray],
    region: IntervalSet,
    level: int,
    modulus: float,
) -> SupEstimate:
    """Maximum of ``|evaluator|`` over the closed region on a dyadic grid.

    ``modulus`` must bound ``|evaluator'|`` on the region; the certified
    upper bound is ``value + modulus * 2**-level``.
    """
    grid = region_grid(region, level)
    pts = grid.points()
    value = 0.0
    for start in range(0, pts.size, CHUNK):
        value = max(value, float(np.max(np.abs(evaluator(pts[start : start + CHUNK])))))
    return SupEstimate(value, grid.size, level, float(modulus))


def _roots(level: int) -> np.ndarray:
    N = 1 << level
    return cis(np.arange(N) / N)


def _sweep_chunk(coeffs, n_max, record, indices, extras, level, roots, masks):
    N = 1 << level
    n_idx = indices.size
    npts = n_idx + extras.size
    s = np.zeros(npts, dtype=complex)
    comp = np.zeros(npts, dtype=complex)
    out = np.zeros((len(record), len(masks)))
    slot = {n: i for i, n in enumerate(record)}
    tmp = np.empty(n_idx, dtype=np.int64)
    e = np.empty(npts, dtype=complex)
    for k in range(n_max + 1):
        np.multiply(indices, k, out=tmp)
        np.bitwise_and(tmp, N - 1, out=tmp)
        np.take(roots, tmp, out=e[:n_idx])
        if extras.size:
            e[n_idx:] = cis(np.mod(k * extras, 1.0))
        if k == 0:
            s = _kahan_add(s, comp, coeffs[n_max] * e)
        else:
            s = _kahan_add(s, comp, coeffs[n_max + k] * e)
            s = _kahan_add(s, comp, coeffs[n_max - k] * np.conj(e))
        if k in slot:
            mag = np.abs(s)
            for r, mask in enumerate(masks):
                if mask is None:
                    out[slot[k], r] = mag.max() if mag.size else 0.0
                else:
                    sel = mag[mask]
                    out[slot[k], r] = sel.max() if sel.size else 0.0
    return out


def sweep_maxima(
    f: CoefficientWindow,
    grid: RegionGrid,
    record: Sequence[int],
    masks: Sequence[np.ndarray | None] = (None,),
    workers: int = 1,
) -> np.ndarray:
    """``max |S_n|`` over grid points for every ``n`` in ``record``.

    Returns an array of shape ``(len(record), len(masks))``; each mask
    selects a subset of ``grid.points()``.  Work is split over point
    chunks and recombined with ``max``, so the result does not depend on
    ``workers``.
    """
    record = sorted(record)
    n_max = record[-1]
    coeffs = f.coeffs[f.n - n_max : f.n + n_max + 1]
    roots = _roots(grid.level)
    pts_idx = np.arange(grid.size)
    jobs = []
    for start in range(0, grid.size, CHUNK):
        sel = pts_idx[start : start + CHUNK]
        in_idx = sel[sel < grid.indices.size]
        in_ext = sel[sel >= grid.indices.size] - grid.indices.size
        sub_masks = [None if m is None else m[sel] for m in masks]
        jobs.append((coeffs, n_max, record, grid.indices[in_idx], grid.extras[in_ext], grid.level, roots, sub_masks))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _sweep_chunk(*job), jobs))
    else:
        parts = [_sweep_chunk(*job) for job in jobs]
    return np.maximum.reduce(parts)


@dataclass(frozen=True)
class BoundednessProfile:
    """Observed ``sup_region |S_n|`` along a schedule.

    A finite schedule is evidence about uniform boundedness, never a
    verification of it; ``observed_bound`` is the largest certified bound
    seen, the empirical stand-in for the constant in the boundedness
    condition.
    """

    schedule: tuple[int, ...]
    sups: tuple[SupEstimate, ...]
    region: IntervalSet
    status: str = field(default="evidence")

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.sups])

    @property
    def certified_bounds(self) -> np.ndarray:
        return np.array([s.certified_bound for s in self.sups])

    @property
    def observed_bound(self) -> float:
        return float(self.certified_bounds.max())


def _check_schedule(schedule: Sequence[int], limit: int) -> tuple[int, ...]:
    schedule = tuple(int(n) for n in schedule)
    if not schedule:
        raise ValidationError("schedule is empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValidationError(f"schedule must be strictly increasing: {schedule}")
    if schedule[0] < 0 or schedule[-1] > limit:
        raise WindowExceededError(f"schedule {schedule[0]}..{schedule[-1]} outside window 0..{limit}")
    return schedule


def auto_level(f: CoefficientWindow, n_max: int, slack: float = 1.0, max_level: int = 18) -> int:
    """Smallest dyadic level whose Bernstein slack at order ``n_max`` is at
    most ``slack``, but fine enough to resolve ``S_n`` (4 points per
    oscillation) and capped at ``max_level``."""
    resolve = max(3, math.ceil(math.log2(4 * (2 * n_max + 1))))
    modulus = bernstein_modulus(f, n_max)
    need = math.ceil(math.log2(modulus / slack)) if modulus > slack else 0
    return min(max(resolve, need), max_level)


def boundedness_profiles(
    f: CoefficientWindow,
    regions: Sequence[IntervalSet],
    schedule: Sequence[int],
    level: int | None = None,
    workers: int = 1,
) -> list[BoundednessProfile]:
    """``boundedness_profile`` for several regions from one shared sweep."""
    schedule = _check_schedule(schedule, f.n)
    if level is None:
        level = auto_level(f, schedule[-1])
    grids = [region_grid(r, level) for r in regions]
    union_idx = np.unique(np.concatenate([g.indices for g in grids]))
    union_ext = np.unique(np.concatenate([g.extras for g in grids]))
    union = RegionGrid(level, union_idx, union_ext)
    masks = []
    for g in grids:
        m_idx = np.isin(union_idx, g.indices)
        m_ext = np.isin(union_ext, g.extras)
        masks.append(np.concatenate([m_idx, m_ext]))
    maxima = sweep_maxima(f, union, schedule, masks, workers=workers)
    profiles = []
    for r, (region, g) in enumerate(zip(regions, grids)):
        sups = tuple(
            SupEstimate(float(maxima[i, r]), g.size, level, bernstein_modulus(f, n))
            for i, n in enumerate(schedule)
        )
        profiles.append(BoundednessProfile(schedule, sups, region))
    return profiles


def boundedness_profile(
    f: CoefficientWindow,
    region: IntervalSet,
    schedule: Sequence[int],
    level: int | None = None,
    workers: int = 1,
) -> BoundednessProfile:
    """Certified ``sup_region |S_n(f)|`` for each ``n`` in ``schedule``.

    With ``level=None`` the grid is chosen by ``auto_level`` so that the
    certification slack stays below 1 at the largest order.
    """
    return boundedness_profiles(f, [region], schedule, level, workers)[0]


def _diameter(points: np.ndarray) -> float:
    """Largest pairwise distance in a planar point set (complex numbers)."""
    if points.size <= 256:
        return float(np.max(np.abs(points[:, None] - points[None, :])))
    xy = np.column_stack([points.real, points.imag])
    try:
        hull = ConvexHull(xy)
    except QhullError:
        # collinear or coincident: extremes along the common direction
        far = points[np.argmax(np.abs(points - points[0]))]
        direction = far - points[0]
        if direction == 0:
            return 0.0
        proj = ((points - points[0]) * np.conj(direction)).real
        return float(abs(points[np.argmax(proj)] - points[np.argmin(proj)]))
    verts = points[hull.vertices]
    return float(np.max(np.abs(verts[:, None] - verts[None, :])))


def u_norm_estimate(f: CoefficientWindow, level: int) -> SupEstimate:
    """Windowed-sum norm ``sup |sum_{a<=k<=b} c_k e^{2 pi i k xi}|`` on a grid.

    For each grid point the windowed sums are differences of prefix sums,
    so their maximum is the diameter of the prefix-sum path, found through
    its convex hull.  The symmetric partial sums from the integer-order
    sweep are folded in, which makes the estimate dominate any
    ``boundedness_profile`` on ``[0, 1)`` at the same level exactly, not
    only up to rounding.  The value is a lower bound for the true norm;
    ``certified_bound`` is an upper bound.
    """
    N = 1 << level
    n = f.n
    grid = RegionGrid(level, np.arange(N, dtype=np.int64), np.zeros(0))
    value = float(sweep_maxima(f, grid, range(n + 1)).max())
    roots = _roots(level)
    ks = np.arange(-n, n + 1)
    rows = max(1, (1 << 21) // (2 * n + 2))
    for start in range(0, N, rows):
        js = np.arange(start, min(start + rows, N), dtype=np.int64)
        phases = roots[np.bitwise_and(np.outer(js, ks), N - 1)]
        prefix = np.zeros((js.size, 2 * n + 2), dtype=complex)
        np.cumsum(phases * f.coeffs, axis=1, out=prefix[:, 1:])
        for row in prefix:
            value = max(value, _diameter(row))
    return SupEstimate(value, N, level, bernstein_modulus(f, n))
