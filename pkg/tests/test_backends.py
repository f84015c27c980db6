import numpy as np
import pytest

import nwomp as nw
from nwomp.omp import RankDeficiencyError, available_backends

from conftest import random_cs_matrix

needs_both = pytest.mark.skipif(
    set(available_backends()) < {"cython", "python"},
    reason="compiled kernel not built",
)


def test_python_backend_always_present():
    assert "python" in available_backends()


@needs_both
def test_backends_agree_on_random_instances():
    for seed in range(30):
        rng = np.random.default_rng((500, seed))
        m = int(rng.integers(4, 24))
        n = int(rng.integers(m + 1, 48))
        k = int(rng.integers(1, min(m, 6) + 1))
        a = random_cs_matrix(m, n, (501, seed))
        x = nw.sample_sparse_signal(n, k, (502, seed))
        y = nw.measure(a, x, 0.1, (503, seed)).observations
        t_py = nw.omp_recover(a, y, k, backend="python")
        t_cy = nw.omp_recover(a, y, k, backend="cython")
        assert np.array_equal(t_py.selected_indices, t_cy.selected_indices)
        assert np.allclose(t_py.estimate, t_cy.estimate, rtol=1e-9, atol=1e-12)
        assert np.allclose(t_py.residual_norms, t_cy.residual_norms, rtol=1e-9, atol=1e-12)


@needs_both
def test_backends_agree_on_rank_deficiency():
    rng = np.random.default_rng(18)
    plane = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
    a = nw.normalize_frobenius(np.vstack([plane, np.zeros((1, 6))]))
    y = np.array([0.2 - 0.4j, 0.9, 1.0])
    for backend in ("python", "cython"):
        with pytest.raises(RankDeficiencyError):
            nw.omp_recover(a, y, 3, backend=backend)


@needs_both
def test_backends_agree_on_early_exit():
    a = random_cs_matrix(8, 16, 19)
    y = 1.5 * a.entries[:, 6]
    for backend in ("python", "cython"):
        trace = nw.omp_recover(a, y, 4, residual_tol=1e-9, backend=backend)
        assert list(trace.selected_indices) == [6]
