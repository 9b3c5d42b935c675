"""Per-segment penalized least squares.

Every solver minimises

    sum_i (y_i - x_i'phi)**2 + lam * sum_u |phi_u| ** gamma

over ``phi`` for one segment, where ``lam = scale_c * sqrt(m)`` and ``m`` is
the number of rows. Writing the penalty as ``(lam / m) * sum_u |phi_u|**gamma``
added to each of the ``m`` squared residuals gives the same total. The
penalty is applied to every coordinate, intercept included; center the data
first if the intercept should stay unpenalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ConfigurationError, PenaltySpec, SegmentFit, ShapeError, as_matrix, as_vector

METHODS = ("auto", "closed_form", "coordinate_descent", "proximal_gradient", "multistart")


@dataclass(frozen=True)
class SolverSettings:
    max_iterations: int = 10000
    tolerance: float = 1e-10
    multistart_count: int = 8
    step_shrink: float = 0.5

    def __post_init__(self):
        if not (isinstance(self.max_iterations, int) and self.max_iterations > 0):
            raise ConfigurationError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if not 0 < self.tolerance < 1:
            raise ConfigurationError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if not (isinstance(self.multistart_count, int) and self.multistart_count > 0):
            raise ConfigurationError(f"multistart_count must be a positive integer, got {self.multistart_count}")
        if not 0 < self.step_shrink < 1:
            raise ConfigurationError(f"step_shrink must lie in (0, 1), got {self.step_shrink}")


DEFAULT_SETTINGS = SolverSettings()


def _check(x, y):
    x = as_matrix(x)
    y = as_vector(y, name="y")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
    if x.shape[0] < 1:
        raise ShapeError("segment must contain at least one observation")
    return x, y


def _penalty(phi, gamma):
    a = np.abs(phi)
    if gamma == 1.0:
        return float(np.sum(a))
    if gamma == 2.0:
        return float(np.dot(phi, phi))
    return float(np.sum(a ** gamma))


def _assemble(x, y, phi, weight, gamma, converged=True, iterations=0):
    phi = np.asarray(phi, dtype=float) + 0.0  # drops negative zeros
    resid = y - x @ phi
    rss = float(np.dot(resid, resid))
    pen = weight * _penalty(phi, gamma) if weight > 0 else 0.0
    return SegmentFit(phi, rss, pen, rss + pen, bool(converged), int(iterations))


def segment_objective(x, y, phi, spec: PenaltySpec, *, weight: float | None = None) -> float:
    """Penalized residual sum of squares of one segment at ``phi``.

    ``weight`` overrides the tuning parameter ``spec.tuning(m)``.
    """
    x, y = _check(x, y)
    phi = as_vector(phi, x.shape[1], name="phi")
    w = spec.tuning(x.shape[0]) if weight is None else float(weight)
    return _assemble(x, y, phi, w, spec.gamma).objective


def ols_fit(x, y) -> SegmentFit:
    """Least squares; the minimum-norm minimizer when ``x`` is rank deficient."""
    x, y = _check(x, y)
    phi, *_ = np.linalg.lstsq(x, y, rcond=None)
    return _assemble(x, y, phi, 0.0, 1.0)


def _ridge_solve(G, b, w):
    return np.linalg.solve(G + w * np.eye(G.shape[0]), b)


def _lipschitz_step(G):
    top = float(np.linalg.eigvalsh(G)[-1])
    return 1.0 / (2.0 * top) if top > 0 else 0.0


def _run_prox_grad(G, b, w, gamma, start, step0, settings, hist=None):
    return kernels.prox_grad(
        G, b, w, gamma, start, step0, settings.step_shrink,
        settings.max_iterations, settings.tolerance, hist,
    )


def bridge_fit(
    x,
    y,
    spec: PenaltySpec,
    settings: SolverSettings | None = None,
    *,
    weight: float | None = None,
    method: str = "auto",
    return_history: bool = False,
):
    """Minimise the bridge-penalized residual sum of squares of one segment.

    Parameters
    ----------
    x, y : array_like
        Segment design (m x p) and response (m).
    spec : PenaltySpec
        Exponent ``gamma`` and tuning scale.
    settings : SolverSettings, optional
    weight : float, optional
        Explicit tuning parameter, replacing ``spec.tuning(m)``.
    method : str
        ``"auto"`` dispatches on ``gamma``: least squares when the penalty
        is off, the ridge closed form for ``gamma == 2``, coordinate descent
        for ``gamma == 1``, proximal gradient for other ``gamma > 1`` and
        multistart proximal descent for ``gamma < 1``. The other names force
        one route.
    return_history : bool
        Also return the objective after every iteration (iterative routes
        only; ``None`` otherwise).

    Returns
    -------
    SegmentFit, or ``(SegmentFit, history)`` when ``return_history`` is set.
    For ``gamma < 1`` the problem is non-convex and ``converged`` only
    certifies local stationarity of the best start.
    """
    settings = settings or DEFAULT_SETTINGS
    if method not in METHODS:
        raise ConfigurationError(f"unknown solver method {method!r}")
    x, y = _check(x, y)
    m, p = x.shape
    gamma = float(spec.gamma)
    w = spec.tuning(m) if weight is None else float(weight)
    if w < 0:
        raise ConfigurationError(f"tuning parameter must be >= 0, got {w}")
    if method == "auto":
        if w == 0.0:
            method = "ols"
        elif gamma == 2.0:
            method = "closed_form"
        elif gamma == 1.0:
            method = "coordinate_descent"
        elif gamma > 1.0:
            method = "proximal_gradient"
        else:
            method = "multistart"

    G = x.T @ x
    b = x.T @ y
    history = None
    hist = np.empty(settings.max_iterations + 1) if return_history else None

    if method == "ols":
        fit = ols_fit(x, y)
    elif method == "closed_form":
        if gamma != 2.0:
            raise ConfigurationError("closed-form solve needs gamma == 2")
        phi = _ridge_solve(G, b, w) if w > 0 else ols_fit(x, y).phi_hat
        fit = _assemble(x, y, phi, w, gamma)
    elif method == "coordinate_descent":
        if gamma != 1.0:
            raise ConfigurationError("coordinate descent needs gamma == 1")
        phi, it, conv, nh = kernels.cd_lasso(G, b, w, np.zeros(p), settings.max_iterations,
                                             settings.tolerance, hist)
        fit = _assemble(x, y, phi, w, gamma, conv, it)
        history = hist[:nh] if hist is not None else None
    elif method == "proximal_gradient":
        step0 = _lipschitz_step(G)
        if step0 == 0.0:
            fit = _assemble(x, y, np.zeros(p), w, gamma)
        else:
            phi, it, conv, nh = _run_prox_grad(G, b, w, gamma, np.zeros(p), step0, settings, hist)
            fit = _assemble(x, y, phi, w, gamma, conv, it)
            history = hist[:nh] if hist is not None else None
    else:
        fit = _multistart(x, y, G, b, w, gamma, settings)

    if not fit.converged:
        for candidate in (np.zeros(p), ols_fit(x, y).phi_hat):
            alt = _assemble(x, y, candidate, w, gamma, False, fit.iterations)
            if alt.objective < fit.objective:
                fit = alt
    if return_history:
        return fit, history
    return fit


def _multistart(x, y, G, b, w, gamma, settings):
    p = x.shape[1]
    step0 = _lipschitz_step(G)
    if step0 == 0.0:
        return _assemble(x, y, np.zeros(p), w, gamma)
    ols = ols_fit(x, y).phi_hat
    starts = [np.zeros(p), ols, _ridge_solve(G, b, w)]
    rng = np.random.default_rng(0)
    scale = max(1.0, float(np.max(np.abs(ols))))
    while len(starts) < settings.multistart_count:
        starts.append(ols + scale * rng.standard_normal(p))
    best = None
    for start in starts[: settings.multistart_count]:
        phi, it, conv, _ = _run_prox_grad(G, b, w, gamma, start, step0, settings)
        fit = _assemble(x, y, phi, w, gamma, conv, it)
        if best is None or fit.objective < best.objective:
            best = fit
    return best


def segment_cost(x, y, spec: PenaltySpec, settings: SolverSettings | None = None, *,
                 weight: float | None = None):
    """``inf_phi`` of the segment objective; returns ``(fit, value)``."""
    fit = bridge_fit(x, y, spec, settings, weight=weight)
    return fit, fit.objective
