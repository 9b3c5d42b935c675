"""Two-segment contamination lemma: objective pieces and Monte Carlo checks.

Setting: ``n1`` observations from ``phi1`` followed by ``n2`` from ``phi2``,
fitted by one pooled coefficient vector. The pooled objective is

    A(phi) = Z(phi) + lam1 * P1(phi) + T(phi) + lam2 * P2(phi)

with ``Z`` and ``T`` the residual-square differences against the true
coefficients on the first and second block, ``P_r(phi) = sum_k |phi_k|**g -
|phi_r_k|**g`` and ``lam_r = scale_c * sqrt(block length)``.
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .model import ConfigurationError, Dataset, NoiseSpec, PenaltySpec, SegmentFit, ShapeError, as_matrix, as_vector
from .simulation import DesignSpec, TwoSegmentSpec, make_two_segment
from .solvers import DEFAULT_SETTINGS, SolverSettings, bridge_fit

DEFAULT_LEVELS = (0.5, 0.9, 0.95)


def _xy(data):
    if isinstance(data, Dataset):
        return data.x, data.y
    x, y = data
    x = as_matrix(x)
    y = as_vector(y, name="y")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
    return x, y


def _sq_diff(x, y, phi, ref):
    # sum_i (y_i - x_i'phi)^2 - (y_i - x_i'ref)^2, factored to avoid cancellation
    if x.shape[0] == 0:
        return 0.0
    a = y - x @ phi
    c = y - x @ ref
    return float(np.dot(a - c, a + c))


def _pen_diff(phi, ref, gamma):
    return float(np.sum(np.abs(phi) ** gamma - np.abs(ref) ** gamma))


def _vectors(x, *vs):
    return [as_vector(v, x.shape[1], name="coefficient vector") for v in vs]


def z_n(prefix, phi, phi1_0) -> float:
    """Residual-square difference on the first block against ``phi1_0``."""
    x, y = _xy(prefix)
    phi, phi1_0 = _vectors(x, phi, phi1_0)
    return _sq_diff(x, y, phi, phi1_0)


def t_n(suffix, phi, phi1_0, phi2_0=None) -> float:
    """Second-block difference ``sum (e - x'(phi - phi2))^2 - (e - x'(phi1 - phi2))^2``.

    With ``e = y - x'phi2`` this equals ``sum (y - x'phi)^2 - (y - x'phi1)^2``,
    which is what is computed when ``phi2_0`` is omitted. Passing ``phi2_0``
    evaluates the error form literally.
    """
    x, y = _xy(suffix)
    phi, phi1_0 = _vectors(x, phi, phi1_0)
    if x.shape[0] == 0:
        return 0.0
    if phi2_0 is None:
        return _sq_diff(x, y, phi, phi1_0)
    (phi2_0,) = _vectors(x, phi2_0)
    eps = y - x @ phi2_0
    a = eps - x @ (phi - phi2_0)
    c = eps - x @ (phi1_0 - phi2_0)
    return float(np.dot(a - c, a + c))


def z_n_s(prefix, phi, phi1_0, penalty: PenaltySpec) -> float:
    """:func:`z_n` plus ``lam1 * sum_k (|phi_k|**g - |phi1_k|**g)``."""
    x, _ = _xy(prefix)
    phi, phi1_0 = _vectors(x, phi, phi1_0)
    return z_n(prefix, phi, phi1_0) + penalty.tuning(x.shape[0]) * _pen_diff(phi, phi1_0, penalty.gamma)


def t_n_s(suffix, phi, phi1_0, phi2_0, penalty: PenaltySpec) -> float:
    """:func:`t_n` plus ``lam2 * sum_k (|phi_k|**g - |phi1_k|**g)``.

    The penalty offset is taken against ``phi1_0`` on both blocks, so both
    pieces vanish at ``phi1_0``.
    """
    x, _ = _xy(suffix)
    phi, phi1_0 = _vectors(x, phi, phi1_0)
    if x.shape[0] == 0:
        return 0.0
    return t_n(suffix, phi, phi1_0) + penalty.tuning(x.shape[0]) * _pen_diff(phi, phi1_0, penalty.gamma)


def _split(dataset, n1):
    if not 0 <= n1 <= dataset.n:
        raise ShapeError(f"n1={n1} outside [0, {dataset.n}]")
    x, y = dataset.x, dataset.y
    return (x[:n1], y[:n1]), (x[n1:], y[n1:])


def pooled_objective(dataset: Dataset, n1: int, phi, phi1_0, phi2_0, penalty: PenaltySpec) -> float:
    """Pooled two-block objective, each block measured against its own truth."""
    phi, phi1_0, phi2_0 = _vectors(dataset.x, phi, phi1_0, phi2_0)
    (x1, y1), (x2, y2) = _split(dataset, n1)
    g = penalty.gamma
    total = _sq_diff(x1, y1, phi, phi1_0) + penalty.tuning(n1) * _pen_diff(phi, phi1_0, g)
    n2 = dataset.n - n1
    if n2 > 0:
        total += _sq_diff(x2, y2, phi, phi2_0) + penalty.tuning(n2) * _pen_diff(phi, phi2_0, g)
    return total


def pooled_tuning(n1: int, n2: int, penalty: PenaltySpec) -> float:
    return penalty.tuning(n1) + (penalty.tuning(n2) if n2 > 0 else 0.0)


def pooled_estimate(dataset: Dataset, n1: int, phi1_0, phi2_0, penalty: PenaltySpec,
                    solver: SolverSettings | None = None) -> SegmentFit:
    """Minimiser of :func:`pooled_objective`.

    The pooled objective equals the stacked penalized residual sum of squares
    with tuning ``lam1 + lam2`` up to a term free of ``phi``, so the stacked
    problem is solved instead. The returned fit reports the stacked objective.
    """
    _vectors(dataset.x, phi1_0, phi2_0)
    _split(dataset, n1)
    w = pooled_tuning(n1, dataset.n - n1, penalty)
    return bridge_fit(dataset.x, dataset.y, penalty, solver, weight=w)


def check_counterexample(a: float = 2.0, b: float = 1.0) -> tuple[float, float]:
    """``(|a^2 - b^2|, (a - b)^2)``; the pair violates the inequality when lhs > rhs."""
    return abs(a * a - b * b), (a - b) ** 2


def scan_counterexamples(values: Sequence[float]) -> list[tuple[float, float]]:
    """All pairs from ``values`` with ``|a^2 - b^2| > (a - b)^2``."""
    out = []
    for a in values:
        for b in values:
            lhs, rhs = check_counterexample(a, b)
            if lhs > rhs:
                out.append((a, b))
    return out


@dataclass(frozen=True)
class LemmaRunConfig:
    spec: TwoSegmentSpec
    n_grid: tuple[int, ...] = (1024, 4096, 16384)
    replications: int = 200
    penalty: PenaltySpec = field(default_factory=PenaltySpec)
    solver: SolverSettings = DEFAULT_SETTINGS
    master_seed: int = 0
    quantile_levels: tuple[float, ...] = DEFAULT_LEVELS
    design: DesignSpec | None = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "quantile_levels", tuple(float(q) for q in self.quantile_levels))
        if not self.n_grid:
            raise ConfigurationError("n_grid must be non-empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigurationError(f"n_grid must be strictly increasing, got {list(self.n_grid)}")
        if not (isinstance(self.replications, int) and self.replications >= 1):
            raise ConfigurationError(f"replications must be a positive integer, got {self.replications}")
        if not self.quantile_levels or any(not 0 < q < 1 for q in self.quantile_levels):
            raise ConfigurationError(f"quantile levels must lie in (0, 1), got {self.quantile_levels}")
        if any(b <= a for a, b in zip(self.quantile_levels, self.quantile_levels[1:])):
            raise ConfigurationError("quantile levels must be strictly increasing")
        if self.design is None:
            object.__setattr__(self, "design", DesignSpec("iid_gaussian", self.spec.p))
        for n in self.n_grid:
            replace(self.spec, n=n)  # validates every grid point up front


@dataclass(frozen=True)
class SummaryRow:
    n: int
    n1: int
    n2: int
    replications: int
    bound: float
    satisfaction_fraction: float
    err_quantiles: tuple[float, ...]
    zs_quantiles: tuple[float, ...]
    nonconverged: int = 0


@dataclass(frozen=True)
class ExperimentSummary:
    kind: str
    quantile_levels: tuple[float, ...]
    rows: tuple[SummaryRow, ...]


def _worker_count(requested):
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("CPLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"CPLAB_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def run_replication(config: LemmaRunConfig, n: int, r: int) -> tuple[float, float, bool]:
    """One draw at rate parameter ``n``: ``(error norm, |Z^s(phi_hat)|, converged)``."""
    spec = replace(config.spec, n=n)
    sample = make_two_segment(spec, config.design, config.noise, config.master_seed, n, r)
    phi1 = np.array(spec.phi1)
    fit = pooled_estimate(sample.dataset, sample.n1, phi1, sample.phi2, config.penalty, config.solver)
    err = float(np.linalg.norm(fit.phi_hat - phi1))
    x, y = sample.dataset.x, sample.dataset.y
    zs = abs(z_n_s((x[:sample.n1], y[:sample.n1]), fit.phi_hat, phi1, config.penalty))
    return err, zs, fit.converged


def _run(config: LemmaRunConfig, kind: str) -> ExperimentSummary:
    tasks = [(n, r) for n in config.n_grid for r in range(config.replications)]
    workers = _worker_count(config.workers)
    if workers == 1:
        results = [run_replication(config, n, r) for n, r in tasks]
    else:
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda t: run_replication(config, *t), tasks))
    levels = np.array(config.quantile_levels)
    rows = []
    R = config.replications
    for i, n in enumerate(config.n_grid):
        chunk = results[i * R:(i + 1) * R]
        errs = np.array([c[0] for c in chunk])
        zs = np.array([c[1] for c in chunk])
        spec = replace(config.spec, n=n)
        bound = spec.bound
        rows.append(SummaryRow(
            n=n,
            n1=spec.n1,
            n2=spec.n2,
            replications=R,
            bound=bound,
            satisfaction_fraction=float(np.mean(errs <= bound)),
            err_quantiles=tuple(float(q) for q in np.quantile(errs, levels)),
            zs_quantiles=tuple(float(q) for q in np.quantile(zs, levels)),
            nonconverged=sum(1 for c in chunk if not c[2]),
        ))
    return ExperimentSummary(kind, config.quantile_levels, tuple(rows))


def run_rate_experiment(config: LemmaRunConfig) -> ExperimentSummary:
    """Estimation error of the pooled estimator against ``n**(-(u - v - delta)/2)``."""
    return _run(config, "rate")


def run_boundedness_experiment(config: LemmaRunConfig) -> ExperimentSummary:
    """Distribution of ``|Z^s(phi_hat)|`` across the grid."""
    return _run(config, "boundedness")


def satisfaction_by_seed(config: LemmaRunConfig, master_seeds: Sequence[int]) -> np.ndarray:
    """Satisfaction fractions, one row per master seed and one column per grid point."""
    out = []
    for seed in master_seeds:
        summary = run_rate_experiment(replace(config, master_seed=int(seed)))
        out.append([row.satisfaction_fraction for row in summary.rows])
    return np.array(out)
