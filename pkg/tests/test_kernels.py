import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cplab import _kernels_py, kernels
from oracles import scalar_prox_oracle

try:
    from cplab import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _kernels_c is not None:
    BACKENDS.append(pytest.param(_kernels_c, id="cython"))

needs_c = pytest.mark.skipif(_kernels_c is None, reason="compiled kernels not built")


def test_backend_selected():
    assert kernels.BACKEND in ("python", "cython")


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8, 1.0, 1.3, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("v, a", [(2.0, 1.0), (-0.7, 0.4), (5.0, 0.05), (0.1, 3.0), (-3.0, 2.5)])
def test_prox_matches_grid(impl, gamma, v, a):
    t = impl.bridge_prox(v, a, gamma)
    _, f_grid = scalar_prox_oracle(v, a, gamma)
    f = 0.5 * (t - v) ** 2 + a * abs(t) ** gamma
    assert f <= f_grid + 1e-9


@pytest.mark.parametrize("impl", BACKENDS)
def test_prox_closed_forms(impl):
    assert impl.bridge_prox(2.0, 1.0, 1.0) == 1.0
    assert impl.bridge_prox(-0.5, 1.0, 1.0) == 0.0
    assert impl.bridge_prox(3.0, 1.0, 2.0) == 1.0
    assert impl.bridge_prox(1.5, 0.0, 0.5) == 1.5


@needs_c
@settings(max_examples=300, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 10), st.sampled_from([0.2, 0.5, 0.9, 1.0, 1.2, 1.5, 2.0, 2.5, 4.0]))
def test_prox_backends_identical(v, a, gamma):
    assert _kernels_c.bridge_prox(v, a, gamma) == _kernels_py.bridge_prox(v, a, gamma)


def _problem(seed, m=6, p=3):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(m, p))
    y = x @ rng.uniform(-2, 2, size=p) + rng.normal(size=m)
    return x.T @ x, x.T @ y


@needs_c
@pytest.mark.parametrize("seed", range(10))
def test_cd_backends_identical(seed):
    G, b = _problem(seed)
    hist_c = np.empty(10001)
    hist_p = np.empty(10001)
    out_c = _kernels_c.cd_lasso(G, b, 1.5, np.zeros(3), 10000, 1e-10, hist_c)
    out_p = _kernels_py.cd_lasso(G, b, 1.5, np.zeros(3), 10000, 1e-10, hist_p)
    np.testing.assert_array_equal(out_c[0], out_p[0])
    assert out_c[1:] == out_p[1:]
    np.testing.assert_array_equal(hist_c[:out_c[3]], hist_p[:out_p[3]])


@needs_c
@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.5, 2.0])
def test_prox_grad_backends_identical(seed, gamma):
    G, b = _problem(seed)
    step0 = 1.0 / (2.0 * np.linalg.eigvalsh(G)[-1])
    start = np.linspace(-1, 1, 3)
    out_c = _kernels_c.prox_grad(G, b, 0.8, gamma, start, step0, 0.5, 5000, 1e-10)
    out_p = _kernels_py.prox_grad(G, b, 0.8, gamma, start, step0, 0.5, 5000, 1e-10)
    np.testing.assert_array_equal(out_c[0], out_p[0])
    assert out_c[1:] == out_p[1:]


@needs_c
@pytest.mark.parametrize("seed", range(5))
def test_dp_backends_identical(seed):
    rng = np.random.default_rng(seed)
    n = 25
    C = np.triu(rng.uniform(0, 5, size=(n + 1, n + 1)), 2)
    C[C == 0] = np.inf
    for k in range(4):
        Bc, Ac = _kernels_c.dp_suffix(C, k, 2)
        Bp, Ap = _kernels_py.dp_suffix(C, k, 2)
        np.testing.assert_array_equal(Bc, Bp)
        np.testing.assert_array_equal(Ac, Ap)


@pytest.mark.parametrize("impl", BACKENDS)
def test_dp_small_brute_force(impl):
    rng = np.random.default_rng(11)
    n, k, ml = 9, 2, 2
    C = rng.uniform(0, 5, size=(n + 1, n + 1))
    B, A = impl.dp_suffix(C, k, ml)
    best = min(
        C[0, a] + C[a, b] + C[b, n]
        for a in range(ml, n + 1)
        for b in range(a + ml, n - ml + 1)
    )
    assert B[k + 1, 0] == pytest.approx(best, rel=1e-14)


@pytest.mark.parametrize("impl", BACKENDS)
def test_dp_prefers_smallest_cut_on_ties(impl):
    n = 8
    C = np.ones((n + 1, n + 1))
    _, A = impl.dp_suffix(C, 2, 2)
    assert A[3, 0] == 2
    assert A[2, 2] == 4
