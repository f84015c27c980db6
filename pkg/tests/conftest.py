import numpy as np
import pytest

import nwomp as nw


def random_cs_matrix(m, n, seed):
    """Frobenius-normalized complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return nw.normalize_frobenius(raw)


def coherence_double_loop(matrix):
    """Literal definition of mutual coherence: O(N^2) loop over column pairs."""
    a = matrix.entries
    d = matrix.column_norms
    n = matrix.n_cols
    mu = 0.0
    for j in range(n):
        for l in range(n):
            if j == l:
                continue
            mu = max(mu, abs(np.vdot(a[:, j], a[:, l])) / (d[j] * d[l]))
    return mu


@pytest.fixture(scope="session")
def stock_matrix():
    """The stock example: Zadoff-Chu codeword, N=32, M=20."""
    return nw.build_cs_matrix(nw.zadoff_chu(32), 20, shift_seed=(42, 1))
