"""Synthetic data for the piecewise model and the two-segment lemma design.

Random streams come from numpy's Philox4x64 counter-based generator. A
stream is identified by a nonnegative integer seed plus an optional key
tuple, e.g. ``(master_seed, n, replication)``, through
``numpy.random.SeedSequence(seed, spawn_key=key)``; streams for distinct
keys are independent and reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .model import (
    ConfigurationError,
    Dataset,
    NoiseSpec,
    ShapeError,
    TrueModel,
    as_vector,
    ceil_power,
    floor_power,
    segment_slices,
)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    if not (isinstance(seed, (int, np.integer)) and seed >= 0):
        raise ConfigurationError(f"seed must be a nonnegative integer, got {seed!r}")
    if any(int(k) < 0 for k in key):
        raise ConfigurationError(f"stream key entries must be nonnegative, got {key}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DesignSpec:
    """How regressors are drawn.

    ``iid_gaussian`` draws standard normal entries, ``bounded_uniform`` draws
    uniform entries on ``[-sqrt(3), sqrt(3)]`` (unit variance) and
    ``fixed_matrix`` uses ``matrix`` verbatim.
    """

    kind: Literal["iid_gaussian", "bounded_uniform", "fixed_matrix"] = "iid_gaussian"
    p: int = 2
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("iid_gaussian", "bounded_uniform", "fixed_matrix"):
            raise ConfigurationError(f"unknown design kind {self.kind!r}")
        if self.kind == "fixed_matrix":
            if self.matrix is None:
                raise ConfigurationError("fixed_matrix design needs a matrix")
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[1] != self.p:
                raise ShapeError(f"fixed matrix must have p={self.p} columns, got shape {m.shape}")
            object.__setattr__(self, "matrix", m)
        elif not (isinstance(self.p, int) and self.p >= 1):
            raise ConfigurationError(f"p must be a positive integer, got {self.p}")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "iid_gaussian":
            return rng.standard_normal((n, self.p))
        if self.kind == "bounded_uniform":
            r3 = math.sqrt(3.0)
            return rng.uniform(-r3, r3, size=(n, self.p))
        if self.matrix.shape[0] != n:
            raise ShapeError(f"fixed matrix has {self.matrix.shape[0]} rows, need {n}")
        return self.matrix.copy()


def draw_errors(n: int, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ConfigurationError(f"n must be >= 0, got {n}")
    if noise.sigma == 0:
        return np.zeros(n)
    if noise.distribution == "gaussian":
        return noise.sigma * rng.standard_normal(n)
    if noise.distribution == "laplace":
        return rng.laplace(0.0, noise.sigma / math.sqrt(2.0), size=n)
    scale = noise.sigma * math.sqrt((noise.df - 2.0) / noise.df)
    return scale * rng.standard_t(noise.df, size=n)


def gen_errors(n: int, noise: NoiseSpec, seed: int) -> np.ndarray:
    """I.i.d. mean-zero errors with standard deviation ``noise.sigma``."""
    return draw_errors(n, noise, make_rng(seed))


def simulate(model: TrueModel, design: DesignSpec, noise: NoiseSpec, seed: int, *key: int) -> Dataset:
    """Draw ``y_i = x_i'phi_r + e_i`` with ``r`` the segment containing ``i``.

    The design is drawn before the errors from the same stream.
    """
    if design.p != model.p:
        raise ShapeError(f"design has p={design.p} but coefficients have length {model.p}")
    rng = make_rng(seed, *key)
    x = design.draw(model.n, rng)
    eps = draw_errors(model.n, noise, rng)
    y = np.empty(model.n)
    for sl, phi in zip(segment_slices(model.changepoints, model.n), model.phis):
        y[sl] = x[sl] @ phi
    return Dataset(x, y + eps)


@dataclass(frozen=True)
class TwoSegmentSpec:
    """Two-segment design: a long first regime followed by a short one.

    ``n`` is a rate parameter; the realised sample has ``n1 = ceil(n**u)``
    rows from the first regime and ``n2 = floor(n**v)`` from the second.
    Under the ``local`` alternative the second regime drifts toward the
    first as ``phi2 = phi1 + phi3 * n**(-1/4)``; under ``fixed`` it is
    ``fixed_phi2``.
    """

    n: int
    phi1: tuple[float, ...] = (1.0, 0.0)
    phi3: tuple[float, ...] = (1.0, 1.0)
    u: float = 0.8
    v: float = 0.2
    delta: float = 0.05
    alternative: Literal["local", "fixed"] = "local"
    fixed_phi2: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi1", tuple(float(a) for a in self.phi1))
        object.__setattr__(self, "phi3", tuple(float(a) for a in self.phi3))
        if self.fixed_phi2 is not None:
            object.__setattr__(self, "fixed_phi2", tuple(float(a) for a in self.fixed_phi2))
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        if not 0.75 <= self.u <= 1.0:
            raise ConfigurationError(f"u must lie in [3/4, 1], got {self.u}")
        if not 0.0 <= self.v < 0.25:
            raise ConfigurationError(f"v must lie in [0, 1/4), got {self.v}")
        if not 0.0 < self.delta < self.u - 3.0 * self.v:
            raise ConfigurationError(
                f"delta must lie in (0, u - 3v) = (0, {self.u - 3 * self.v:g}), got {self.delta}"
            )
        if self.alternative not in ("local", "fixed"):
            raise ConfigurationError(f"alternative must be 'local' or 'fixed', got {self.alternative!r}")
        if len(self.phi1) == 0:
            raise ConfigurationError("phi1 must be non-empty")
        if self.alternative == "local" and len(self.phi3) != len(self.phi1):
            raise ShapeError("phi3 must have the same length as phi1")
        if self.alternative == "fixed":
            if self.fixed_phi2 is None:
                raise ConfigurationError("fixed alternative needs fixed_phi2")
            if len(self.fixed_phi2) != len(self.phi1):
                raise ShapeError("fixed_phi2 must have the same length as phi1")

    @property
    def p(self) -> int:
        return len(self.phi1)

    @property
    def n1(self) -> int:
        return ceil_power(self.n, self.u)

    @property
    def n2(self) -> int:
        return floor_power(self.n, self.v)

    @property
    def phi2(self) -> np.ndarray:
        phi1 = np.array(self.phi1)
        if self.alternative == "fixed":
            return np.array(self.fixed_phi2)
        return phi1 + np.array(self.phi3) * float(self.n) ** -0.25

    @property
    def bound(self) -> float:
        """Deterministic error bound ``n ** (-(u - v - delta) / 2)``."""
        return float(self.n) ** (-(self.u - self.v - self.delta) / 2.0)


class TwoSegmentSample(NamedTuple):
    dataset: Dataset
    phi2: np.ndarray
    n1: int
    n2: int


def make_two_segment(spec: TwoSegmentSpec, design: DesignSpec, noise: NoiseSpec, seed: int, *key: int) -> TwoSegmentSample:
    """Draw ``n1 + n2`` rows: ``x'phi1 + e`` followed by ``x'phi2 + e``."""
    if design.p != spec.p:
        raise ShapeError(f"design has p={design.p} but phi1 has length {spec.p}")
    n1, n2 = spec.n1, spec.n2
    phi1 = as_vector(spec.phi1)
    phi2 = spec.phi2
    rng = make_rng(seed, *key)
    x = design.draw(n1 + n2, rng)
    eps = draw_errors(n1 + n2, noise, rng)
    y = np.concatenate([x[:n1] @ phi1, x[n1:] @ phi2]) + eps
    return TwoSegmentSample(Dataset(x, y), phi2, n1, n2)
