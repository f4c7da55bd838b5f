import numpy as np
import scipy.sparse as sparse

from rivercomp.linsolve import factorize


def test_tridiagonal_solve_matches_dense():
    rng = np.random.default_rng(7)
    n = 40
    main = 4.0 + rng.random(n)
    off = rng.random(n - 1)
    m = sparse.diags([off, main, off * 0.5], offsets=[-1, 0, 1], format="csr")
    b = rng.standard_normal(n)
    x = factorize(m).solve(b)
    np.testing.assert_allclose(m @ x, b, atol=1e-12)


def test_factorization_reusable():
    m = sparse.diags([[1.0, 1.0], [3.0, 3.0, 3.0], [1.0, 1.0]], offsets=[-1, 0, 1], format="csr")
    f = factorize(m)
    for seed in range(3):
        b = np.random.default_rng(seed).random(3)
        np.testing.assert_allclose(m @ f.solve(b), b, atol=1e-13)


def test_wider_bandwidth_takes_sparse_path():
    # pentadiagonal falls back to sparse LU, same answers
    rng = np.random.default_rng(11)
    n = 30
    m = sparse.diags(
        [rng.random(n - 2), rng.random(n - 1), 5.0 + rng.random(n), rng.random(n - 1), rng.random(n - 2)],
        offsets=[-2, -1, 0, 1, 2],
        format="csr",
    )
    b = rng.standard_normal(n)
    np.testing.assert_allclose(m @ factorize(m).solve(b), b, atol=1e-11)
