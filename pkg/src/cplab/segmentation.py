"""Known-K change-point estimation by minimising the penalized sum over cuts.

Windows are zero-based and half-open internally: window ``(s, e)`` holds
rows ``s .. e - 1``, i.e. observations ``s + 1 .. e``. A changepoint ``l``
ends a segment at observation ``l``, so cut positions and window ends
coincide.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import (
    ConfigurationError,
    Dataset,
    PenaltySpec,
    Segmentation,
    SegmentFit,
    ceil_power,
    segment_slices,
    validate_changepoints,
)
from .solvers import DEFAULT_SETTINGS, SolverSettings, segment_cost

EXHAUSTIVE_GUARD = 60


@dataclass(frozen=True)
class SegmentationConfig:
    """Search settings for :func:`fit_known_k`.

    ``min_segment_length`` defaults to ``ceil(n ** u)`` when ``u`` is given
    and to ``2 * p`` otherwise.
    """

    k: int = 0
    min_segment_length: int | None = None
    penalty: PenaltySpec = field(default_factory=PenaltySpec)
    solver: SolverSettings = DEFAULT_SETTINGS
    u: float | None = None

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 0):
            raise ConfigurationError(f"k must be a nonnegative integer, got {self.k}")
        if self.min_segment_length is not None and self.min_segment_length < 1:
            raise ConfigurationError(f"min_segment_length must be >= 1, got {self.min_segment_length}")

    def min_length(self, n: int, p: int) -> int:
        if self.min_segment_length is not None:
            return int(self.min_segment_length)
        if self.u is not None:
            return ceil_power(n, self.u)
        return 2 * p

    def check(self, n: int, p: int) -> int:
        ml = self.min_length(n, p)
        if (self.k + 1) * ml > n:
            raise ConfigurationError(
                f"{self.k + 1} segments of length >= {ml} do not fit in n={n}"
            )
        return ml


class SegmentCostCache:
    """Lazily memoised segment fits keyed by window bounds ``(s, e)``."""

    def __init__(self, dataset: Dataset, penalty: PenaltySpec, solver: SolverSettings = DEFAULT_SETTINGS):
        self.dataset = dataset
        self.penalty = penalty
        self.solver = solver
        self._fits: dict[tuple[int, int], SegmentFit] = {}

    def __len__(self):
        return len(self._fits)

    def fit(self, s: int, e: int) -> SegmentFit:
        key = (s, e)
        fit = self._fits.get(key)
        if fit is None:
            fit, _ = segment_cost(self.dataset.x[s:e], self.dataset.y[s:e], self.penalty, self.solver)
            self._fits[key] = fit
        return fit

    def cost(self, s: int, e: int) -> float:
        return self.fit(s, e).objective


def _needed_windows(n, k, ml):
    # windows reachable by some feasible cut vector
    for j in range(k + 1, 0, -1):
        if j == k + 1:
            starts = range(0, 1)
        else:
            starts = range((k + 1 - j) * ml, n - j * ml + 1)
        for s in starts:
            if j == 1:
                yield s, n
            else:
                for e in range(s + ml, n - (j - 1) * ml + 1):
                    yield s, e


def _segmentation(dataset, changepoints, fits):
    return Segmentation(tuple(changepoints), tuple(fits), float(sum(f.objective for f in fits)))


def _check_segments(dataset, changepoints, ml):
    cps = validate_changepoints(changepoints, dataset.n)
    edges = (0, *cps, dataset.n)
    for a, b in zip(edges, edges[1:]):
        if b - a < ml:
            raise ConfigurationError(
                f"segment {a + 1}..{b} is shorter than the minimum length {ml}"
            )
    return cps


def total_penalized_sum(dataset: Dataset, changepoints, config: SegmentationConfig) -> float:
    """Sum of minimised segment objectives for the given changepoints."""
    ml = config.min_length(dataset.n, dataset.p)
    cps = _check_segments(dataset, changepoints, ml)
    total = 0.0
    for sl in segment_slices(cps, dataset.n):
        _, value = segment_cost(dataset.x[sl], dataset.y[sl], config.penalty, config.solver)
        total += value
    return total


def fit_known_k(dataset: Dataset, config: SegmentationConfig, cache: SegmentCostCache | None = None) -> Segmentation:
    """Optimal partition into ``config.k + 1`` segments by dynamic programming.

    Among exactly tied optima the lexicographically smallest changepoint
    vector is returned.
    """
    n = dataset.n
    ml = config.check(n, dataset.p)
    if cache is None:
        cache = SegmentCostCache(dataset, config.penalty, config.solver)
    k = config.k
    if k == 0:
        return _segmentation(dataset, (), [cache.fit(0, n)])

    C = np.full((n + 1, n + 1), np.inf)
    for s, e in _needed_windows(n, k, ml):
        C[s, e] = cache.cost(s, e)
    B, A = kernels.dp_suffix(C, k, ml)
    if not np.isfinite(B[k + 1, 0]):
        raise ConfigurationError("no feasible segmentation")

    cps = []
    s = 0
    for j in range(k + 1, 1, -1):
        e = int(A[j, s])
        cps.append(e)
        s = e
    edges = (0, *cps, n)
    fits = [cache.fit(a, b) for a, b in zip(edges, edges[1:])]
    return _segmentation(dataset, cps, fits)


def feasible_changepoints(n: int, k: int, min_len: int):
    """All cut vectors with every segment at least ``min_len`` long, in lexicographic order."""
    if k == 0:
        yield ()
        return
    for cps in itertools.combinations(range(min_len, n - min_len + 1), k):
        edges = (0, *cps, n)
        if all(b - a >= min_len for a, b in zip(edges, edges[1:])):
            yield cps


def exhaustive_oracle(dataset: Dataset, config: SegmentationConfig, guard: int = EXHAUSTIVE_GUARD) -> Segmentation:
    """Global minimiser by enumerating every feasible cut vector (test oracle)."""
    n = dataset.n
    if n > guard:
        raise ConfigurationError(f"exhaustive search refused for n={n} > guard {guard}")
    ml = config.check(n, dataset.p)
    best_total, best = np.inf, None
    for cps in feasible_changepoints(n, config.k, ml):
        fits = []
        total = 0.0
        for sl in segment_slices(cps, n):
            fit, value = segment_cost(dataset.x[sl], dataset.y[sl], config.penalty, config.solver)
            fits.append(fit)
            total += value
        if total < best_total:
            best_total, best = total, (cps, fits)
    return _segmentation(dataset, best[0], best[1])
