"""Factor-once linear solves for the matrices this package builds.

1-D transport matrices are tridiagonal, so LAPACK's banded solver is the
right tool; everything else (2-D Kronecker sums, coupled Newton systems)
goes through a sparse LU factorization that is reused across solves.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .errors import SolverError

__all__ = ["Factorization", "factorize"]


class Factorization:
    """A reusable solve for A x = b."""

    def __init__(self, matrix: sparse.spmatrix, banded: bool):
        self._banded = banded
        if banded:
            m = matrix.todia()
            n = m.shape[0]
            ab = np.zeros((3, n))
            for offset, data in zip(m.offsets, m.data):
                if offset == 1:
                    ab[0] = data
                elif offset == 0:
                    ab[1] = data
                elif offset == -1:
                    ab[2] = data
                else:
                    raise SolverError("banded factorization expects a tridiagonal matrix")
            self._ab = ab
        else:
            try:
                self._lu = spla.splu(matrix.tocsc())
            except RuntimeError as exc:
                raise SolverError(f"sparse factorization failed: {exc}") from None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._banded:
            return scipy.linalg.solve_banded((1, 1), self._ab, rhs)
        return self._lu.solve(rhs)


def factorize(matrix: sparse.spmatrix) -> Factorization:
    """Pick the cheapest factorization the sparsity pattern allows."""
    m = matrix.tocoo()
    banded = m.shape[0] == m.shape[1] and np.all(np.abs(m.row - m.col) <= 1)
    return Factorization(matrix, banded=bool(banded))
