from dataclasses import replace

import numpy as np
import pytest

from cplab.lemma import (
    LemmaRunConfig,
    check_counterexample,
    pooled_estimate,
    pooled_objective,
    pooled_tuning,
    run_boundedness_experiment,
    run_rate_experiment,
    satisfaction_by_seed,
    scan_counterexamples,
    t_n,
    t_n_s,
    z_n,
    z_n_s,
)
from cplab.model import ConfigurationError, Dataset, NoiseSpec, PenaltySpec, ShapeError
from cplab.simulation import DesignSpec, TwoSegmentSpec, make_two_segment
from cplab.solvers import segment_objective
from oracles import direct_objective


def two_blocks(seed, n1=30, n2=4, p=2):
    rng = np.random.default_rng(seed)
    phi1 = rng.uniform(-2, 2, size=p)
    phi2 = phi1 + rng.uniform(-1, 1, size=p)
    x = rng.normal(size=(n1 + n2, p))
    y = np.r_[x[:n1] @ phi1, x[n1:] @ phi2] + rng.normal(size=n1 + n2)
    return Dataset(x, y), phi1, phi2, rng


def ssr(x, y, phi):
    return direct_objective(x, y, phi, 0.0, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_z_n_matches_direct(seed):
    d, phi1, _, rng = two_blocks(seed)
    phi = rng.normal(size=2)
    expected = ssr(d.x, d.y, phi) - ssr(d.x, d.y, phi1)
    assert z_n(d, phi, phi1) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_t_n_error_form_agrees(seed):
    d, phi1, phi2, rng = two_blocks(seed)
    suffix = (d.x[30:], d.y[30:])
    phi = rng.normal(size=2)
    assert t_n(suffix, phi, phi1, phi2) == pytest.approx(t_n(suffix, phi, phi1), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_vanish_at_truth(gamma):
    d, phi1, phi2, _ = two_blocks(1)
    pen = PenaltySpec(gamma, 1.3)
    prefix, suffix = (d.x[:30], d.y[:30]), (d.x[30:], d.y[30:])
    assert z_n(prefix, phi1, phi1) == 0.0
    assert z_n_s(prefix, phi1, phi1, pen) == 0.0
    assert t_n(suffix, phi1, phi1, phi2) == 0.0
    assert t_n_s(suffix, phi1, phi1, phi2, pen) == 0.0


def test_penalized_adds_tuning_times_offset():
    d, phi1, _, _ = two_blocks(2)
    pen = PenaltySpec(1.5, 0.8)
    phi = np.array([0.3, -0.4])
    off = np.sum(np.abs(phi) ** 1.5 - np.abs(phi1) ** 1.5)
    assert z_n_s(d, phi, phi1, pen) == pytest.approx(z_n(d, phi, phi1) + 0.8 * np.sqrt(d.n) * off, rel=1e-12)


def test_empty_second_block():
    d, phi1, phi2, _ = two_blocks(3, n2=0)
    empty = (d.x[:0], d.y[:0])
    pen = PenaltySpec()
    assert t_n(empty, [1.0, 1.0], phi1) == 0.0
    assert t_n_s(empty, [1.0, 1.0], phi1, phi2, pen) == 0.0
    assert pooled_tuning(30, 0, pen) == pen.tuning(30)
    phi = np.array([0.1, 0.2])
    assert pooled_objective(d, 30, phi, phi1, phi2, pen) == pytest.approx(z_n_s(d, phi, phi1, pen), rel=1e-12)


def test_shape_checks():
    d, phi1, phi2, _ = two_blocks(4)
    with pytest.raises(ShapeError):
        z_n(d, [1.0], phi1)
    with pytest.raises(ShapeError):
        pooled_objective(d, d.n + 1, phi1, phi1, phi2, PenaltySpec())
    with pytest.raises(ShapeError):
        z_n((np.ones((3, 2)), np.ones(4)), phi1, phi1)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.5, 2.0])
@pytest.mark.parametrize("seed", range(4))
def test_pooled_decomposes_up_to_constant(gamma, seed):
    d, phi1, phi2, rng = two_blocks(seed)
    pen = PenaltySpec(gamma, 1.0)
    prefix, suffix = (d.x[:30], d.y[:30]), (d.x[30:], d.y[30:])
    w = pooled_tuning(30, 4, pen)
    pieces, stacked = [], []
    for _ in range(6):
        phi = rng.normal(size=2) * 2
        a = pooled_objective(d, 30, phi, phi1, phi2, pen)
        pieces.append(a - z_n_s(prefix, phi, phi1, pen) - t_n_s(suffix, phi, phi1, phi2, pen))
        stacked.append(a - direct_objective(d.x, d.y, phi, w, gamma))
    scale = 1 + abs(direct_objective(d.x, d.y, phi1, w, gamma))
    assert np.ptp(pieces) <= 1e-8 * scale
    assert np.ptp(stacked) <= 1e-8 * scale


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("seed", range(4))
def test_pooled_estimate_beats_grid(gamma, seed):
    d, phi1, phi2, _ = two_blocks(seed, n1=12, n2=3, p=1)
    pen = PenaltySpec(gamma, 1.0)
    fit = pooled_estimate(d, 12, phi1, phi2, pen)
    grid = np.linspace(-5, 5, 20001)
    vals = [pooled_objective(d, 12, [g], phi1, phi2, pen) for g in grid]
    best = min(vals)
    got = pooled_objective(d, 12, fit.phi_hat, phi1, phi2, pen)
    assert got <= best + 1e-6
    w = pooled_tuning(12, 3, pen)
    assert fit.objective == pytest.approx(segment_objective(d.x, d.y, fit.phi_hat, pen, weight=w), rel=1e-12)


def test_noiseless_null_recovers_truth():
    spec = TwoSegmentSpec(4096, phi1=(0.7, -1.2), phi3=(0.0, 0.0))
    s = make_two_segment(spec, DesignSpec("iid_gaussian", 2), NoiseSpec(sigma=0.0), 5)
    fit = pooled_estimate(s.dataset, s.n1, spec.phi1, s.phi2, PenaltySpec(1.0, 0.0))
    np.testing.assert_allclose(fit.phi_hat, spec.phi1, atol=1e-10)


class TestCounterexample:
    def test_default(self):
        assert check_counterexample() == (3.0, 1.0)

    def test_scan(self):
        bad = scan_counterexamples([-1.0, 0.0, 1.0, 2.0])
        assert (2.0, 1.0) in bad
        assert (1.0, -1.0) not in bad  # |1 - 1| = 0
        assert all(a * b > 0 for a, b in bad)


def small_config(**kw):
    base = dict(spec=TwoSegmentSpec(256), n_grid=(256, 1024), replications=12, workers=1)
    base.update(kw)
    return LemmaRunConfig(**base)


class TestExperiments:
    def test_summary_shape(self):
        s = run_rate_experiment(small_config())
        assert s.kind == "rate"
        assert [r.n for r in s.rows] == [256, 1024]
        for r in s.rows:
            assert len(r.err_quantiles) == len(r.zs_quantiles) == 3
            assert 0.0 <= r.satisfaction_fraction <= 1.0
            assert list(r.err_quantiles) == sorted(r.err_quantiles)
            assert list(r.zs_quantiles) == sorted(r.zs_quantiles)
            assert r.replications == 12 and r.nonconverged == 0

    def test_deterministic_and_thread_independent(self):
        a = run_boundedness_experiment(small_config())
        b = run_boundedness_experiment(small_config(workers=4))
        assert a == b
        assert a != run_boundedness_experiment(small_config(master_seed=1))

    def test_fixed_alternative_runs(self):
        spec = TwoSegmentSpec(256, alternative="fixed", fixed_phi2=(2.0, -1.0))
        s = run_rate_experiment(small_config(spec=spec))
        assert len(s.rows) == 2

    def test_seed_table(self):
        tab = satisfaction_by_seed(small_config(replications=4), [0, 1, 2])
        assert tab.shape == (3, 2)

    @pytest.mark.parametrize("kw", [
        dict(n_grid=()), dict(n_grid=(1024, 256)), dict(replications=0),
        dict(quantile_levels=(0.5, 1.0)), dict(quantile_levels=(0.9, 0.5)), dict(n_grid=(0,)),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ConfigurationError):
            small_config(**kw)

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv("CPLAB_THREADS", "many")
        with pytest.raises(ConfigurationError):
            run_rate_experiment(replace(small_config(), workers=None))
