import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cplab.model import (
    ConfigurationError,
    Dataset,
    NoiseSpec,
    PenaltySpec,
    ShapeError,
    TrueModel,
    assumption_diagnostics,
    ceil_power,
    floor_power,
    segment_bounds,
)


def test_segment_bounds_examples():
    assert segment_bounds([], 10) == [(1, 10)]
    assert segment_bounds([3, 7], 10) == [(1, 3), (4, 7), (8, 10)]


@pytest.mark.parametrize("cps", [[3, 3], [7, 3], [0], [10], [-1, 4]])
def test_segment_bounds_rejects(cps):
    with pytest.raises(ConfigurationError):
        segment_bounds(cps, 10)


def test_segment_bounds_partition_exhaustive():
    for n in range(1, 31):
        for k in range(3):
            for cps in itertools.combinations(range(1, n), k):
                bounds = segment_bounds(cps, n)
                covered = [i for s, e in bounds for i in range(s, e + 1)]
                assert covered == list(range(1, n + 1))
                assert len(bounds) == k + 1


@given(st.integers(1, 500), st.floats(0.0, 1.0))
def test_power_helpers_bracket(n, u):
    c, f = ceil_power(n, u), floor_power(n, u)
    assert c >= n ** u - 1e-9 * n ** u
    assert f <= n ** u + 1e-9 * n ** u
    assert c - f <= 1


def test_power_helpers_exact_powers():
    assert ceil_power(1024, 0.8) == 256
    assert floor_power(1024, 0.2) == 4
    assert ceil_power(4096, 0.8) == 777
    assert floor_power(4096, 0.2) == 5


def test_dataset_validation():
    with pytest.raises(ShapeError):
        Dataset(np.ones((3, 2)), np.ones(4))
    with pytest.raises(ConfigurationError):
        Dataset(np.array([[np.nan]]), np.array([1.0]))
    d = Dataset([1.0, 2.0], [3.0, 4.0])
    assert d.x.shape == (2, 1)
    with pytest.raises(ValueError):
        d.x[0, 0] = 5.0


def test_penalty_spec():
    with pytest.raises(ConfigurationError):
        PenaltySpec(0.0, 1.0)
    with pytest.raises(ConfigurationError):
        PenaltySpec(1.0, -1.0)
    spec = PenaltySpec(1.5, 2.0)
    assert spec.tuning(9) == 6.0
    assert spec.norm([1.0, -4.0]) == pytest.approx(1.0 + 8.0)


def test_noise_spec_rejects_heavy_tails():
    with pytest.raises(ConfigurationError):
        NoiseSpec("student_t", 1.0, df=2.0)
    with pytest.raises(ConfigurationError):
        NoiseSpec("cauchy", 1.0)


class TestTrueModel:
    def test_valid(self):
        m = TrueModel(100, ([1.0], [2.0]), (50,), u=0.75, c0=1.0)
        assert m.k == 1 and m.p == 1

    def test_spacing_rejected(self):
        # ceil(100 ** 0.75) = 32
        with pytest.raises(ConfigurationError):
            TrueModel(100, ([1.0], [2.0]), (31,), u=0.75)
        TrueModel(100, ([1.0], [2.0]), (32,), u=0.75)

    def test_equal_neighbours_rejected(self):
        with pytest.raises(ConfigurationError):
            TrueModel(100, ([1.0], [1.0]), (50,))

    def test_count_mismatch(self):
        with pytest.raises(ConfigurationError):
            TrueModel(100, ([1.0],), (50,))

    def test_u_range(self):
        with pytest.raises(ConfigurationError):
            TrueModel(100, ([1.0],), (), u=0.5)


class TestDiagnostics:
    def test_constant_design(self):
        d = Dataset(np.ones((4, 1)), np.zeros(4))
        diag = assumption_diagnostics(d, [])
        assert diag.max_norm_term == 0.25
        np.testing.assert_array_equal(diag.segments[0].gram, [[1.0]])

    def test_two_column_gram(self):
        x = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
        d = Dataset(x, np.zeros(3))
        diag = assumption_diagnostics(d)
        # hand Gram: [[2, 1], [1, 5]] / 3, eigenvalues (7 -+ sqrt(13)) / 6
        np.testing.assert_allclose(diag.segments[0].gram, np.array([[2, 1], [1, 5]]) / 3)
        assert diag.segments[0].eig_min == pytest.approx((7 - np.sqrt(13)) / 6)
        assert diag.segments[0].eig_max == pytest.approx((7 + np.sqrt(13)) / 6)
        assert diag.max_norm_term == pytest.approx(4 / 3)

    def test_single_row_segment(self):
        x = np.array([[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]])
        diag = assumption_diagnostics(Dataset(x, np.zeros(3)), [1])
        np.testing.assert_allclose(diag.segments[0].gram, np.outer(x[0], x[0]))

    def test_psd_symmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(5, 30))
            d = Dataset(rng.normal(size=(n, 3)), rng.normal(size=n))
            cps = sorted(rng.choice(np.arange(1, n), size=2, replace=False))
            for seg in assumption_diagnostics(d, cps).segments:
                np.testing.assert_array_equal(seg.gram, seg.gram.T)
                assert seg.eig_min >= -1e-10
