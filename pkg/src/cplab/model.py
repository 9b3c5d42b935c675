"""Shared domain types, segment bookkeeping and design diagnostics.

Index convention
----------------
Observations are numbered ``1..n``. A changepoint list ``[l_1, ..., l_K]``
splits the sample into ``K + 1`` segments where segment ``r`` covers the
closed range ``l_{r-1} + 1 .. l_r`` with ``l_0 = 0`` and ``l_{K+1} = n``.
In zero-based numpy terms segment ``r`` is ``x[l_{r-1}:l_r]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Invalid or infeasible configuration."""


class ShapeError(ValueError):
    """Array dimensions do not agree."""


def ceil_power(n: float, exponent: float) -> int:
    """``ceil(n ** exponent)``, snapping values within rounding error of an integer."""
    value = float(n) ** exponent
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value)


def floor_power(n: float, exponent: float) -> int:
    """``floor(n ** exponent)``, snapping values within rounding error of an integer."""
    value = float(n) ** exponent
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return math.floor(value)


def as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise ShapeError(f"design must be 2-D, got shape {x.shape}")
    return x


def as_vector(v, length: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if length is not None and v.shape[0] != length:
        raise ShapeError(f"{name} has length {v.shape[0]}, expected {length}")
    return v


@dataclass(frozen=True)
class Dataset:
    """Observed sample: design ``x`` (n x p, row i is X_i') and response ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.x)
        y = as_vector(self.y, name="y")
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ShapeError("dataset needs n >= 1 and p >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ConfigurationError("dataset contains non-finite entries")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def window(self, start: int, end: int) -> "Dataset":
        """Rows ``start .. end - 1`` (zero-based, half-open)."""
        return Dataset(self.x[start:end], self.y[start:end])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None


@dataclass(frozen=True)
class PenaltySpec:
    """Bridge penalty ``lambda * sum_u |phi_u| ** gamma`` with ``lambda = scale_c * sqrt(m)``.

    ``m`` is the number of observations in the segment being fitted.
    """

    gamma: float = 1.0
    scale_c: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigurationError(f"gamma must be > 0, got {self.gamma}")
        if not (math.isfinite(self.scale_c) and self.scale_c >= 0):
            raise ConfigurationError(f"scale_c must be >= 0, got {self.scale_c}")

    def tuning(self, m: int) -> float:
        """Tuning parameter for a segment with ``m`` observations."""
        return self.scale_c * math.sqrt(m)

    def norm(self, phi) -> float:
        """``sum_u |phi_u| ** gamma``."""
        phi = np.asarray(phi, dtype=float)
        if self.gamma == 1.0:
            return float(np.sum(np.abs(phi)))
        if self.gamma == 2.0:
            return float(np.dot(phi, phi))
        return float(np.sum(np.abs(phi) ** self.gamma))


@dataclass(frozen=True)
class SegmentFit:
    phi_hat: np.ndarray
    rss: float
    penalty_value: float
    objective: float
    converged: bool = True
    iterations: int = 0


@dataclass(frozen=True)
class Segmentation:
    changepoints: tuple[int, ...]
    fits: tuple[SegmentFit, ...]
    total_s: float

    def __post_init__(self):
        if len(self.fits) != len(self.changepoints) + 1:
            raise ConfigurationError("segment count must equal changepoint count + 1")


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. zero-mean errors with standard deviation ``sigma``."""

    distribution: Literal["gaussian", "laplace", "student_t"] = "gaussian"
    sigma: float = 1.0
    df: float = 5.0

    def __post_init__(self):
        if self.distribution not in ("gaussian", "laplace", "student_t"):
            raise ConfigurationError(f"unknown noise distribution {self.distribution!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")
        if self.distribution == "student_t" and not self.df > 2:
            raise ConfigurationError(f"student_t needs df > 2 for finite variance, got {self.df}")


@dataclass(frozen=True)
class TrueModel:
    """Piecewise regression truth with minimum segment spacing enforced at construction.

    Every segment, including the first and the last, must contain at least
    ``c0 * ceil(n ** u)`` observations.
    """

    n: int
    phis: tuple[np.ndarray, ...]
    changepoints: tuple[int, ...] = ()
    u: float = 0.75
    c0: float = 1.0

    def __post_init__(self):
        phis = tuple(as_vector(phi, name="phi") for phi in self.phis)
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "changepoints", tuple(int(c) for c in self.changepoints))
        if not phis:
            raise ConfigurationError("need at least one coefficient vector")
        p = phis[0].shape[0]
        if any(phi.shape[0] != p for phi in phis):
            raise ShapeError("coefficient vectors must share a common length")
        if len(phis) != len(self.changepoints) + 1:
            raise ConfigurationError(
                f"{len(self.changepoints)} changepoints need {len(self.changepoints) + 1} "
                f"coefficient vectors, got {len(phis)}"
            )
        if not 0.75 <= self.u <= 1.0:
            raise ConfigurationError(f"u must lie in [3/4, 1], got {self.u}")
        if not self.c0 > 0:
            raise ConfigurationError(f"c0 must be > 0, got {self.c0}")
        for r in range(len(phis) - 1):
            if np.array_equal(phis[r], phis[r + 1]):
                raise ConfigurationError(f"adjacent segments {r + 1} and {r + 2} share coefficients")
        bounds = segment_bounds(self.changepoints, self.n)
        min_len = self.c0 * ceil_power(self.n, self.u)
        for start, end in bounds:
            if end - start + 1 < min_len:
                raise ConfigurationError(
                    f"segment {start}..{end} has {end - start + 1} observations, "
                    f"spacing requires at least {min_len:g}"
                )

    @property
    def p(self) -> int:
        return self.phis[0].shape[0]

    @property
    def k(self) -> int:
        return len(self.changepoints)


def validate_changepoints(changepoints: Sequence[int], n: int) -> tuple[int, ...]:
    cps = tuple(int(c) for c in changepoints)
    if n < 1:
        raise ConfigurationError(f"sample size must be >= 1, got {n}")
    for c in cps:
        if not 0 < c < n:
            raise ConfigurationError(f"changepoint {c} outside (0, {n})")
    for a, b in zip(cps, cps[1:]):
        if b <= a:
            raise ConfigurationError(f"changepoints must be strictly increasing, got {list(cps)}")
    return cps


def segment_bounds(changepoints: Sequence[int], n: int) -> list[tuple[int, int]]:
    """One-based closed ``(start, end)`` pairs for each segment.

    >>> segment_bounds([3, 7], 10)
    [(1, 3), (4, 7), (8, 10)]
    """
    cps = validate_changepoints(changepoints, n)
    edges = (0, *cps, n)
    return [(edges[r] + 1, edges[r + 1]) for r in range(len(edges) - 1)]


def segment_slices(changepoints: Sequence[int], n: int) -> list[slice]:
    """Zero-based numpy slices matching :func:`segment_bounds`."""
    return [slice(start - 1, end) for start, end in segment_bounds(changepoints, n)]


@dataclass(frozen=True)
class SegmentDiagnostics:
    start: int
    end: int
    gram: np.ndarray
    eig_min: float
    eig_max: float


@dataclass(frozen=True)
class Diagnostics:
    max_norm_term: float
    segments: list[SegmentDiagnostics] = field(default_factory=list)


def assumption_diagnostics(dataset: Dataset, changepoints: Sequence[int] = ()) -> Diagnostics:
    """Finite-sample versions of the design conditions.

    Returns ``max_i(X_i'X_i) / n`` and, per segment, the length-normalised
    Gram matrix ``C = (1/m) sum X_i X_i'`` with its extreme eigenvalues.
    """
    x = dataset.x
    row_norms = np.einsum("ij,ij->i", x, x)
    segments = []
    for start, end in segment_bounds(changepoints, dataset.n):
        xs = x[start - 1:end]
        if xs.shape[0] == 0:
            raise ConfigurationError(f"empty segment {start}..{end}")
        gram = xs.T @ xs / xs.shape[0]
        gram = 0.5 * (gram + gram.T)
        eigs = np.linalg.eigvalsh(gram)
        segments.append(SegmentDiagnostics(start, end, gram, float(eigs[0]), float(eigs[-1])))
    return Diagnostics(float(row_norms.max() / dataset.n), segments)
