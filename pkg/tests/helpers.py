"""Random checkerboard generators shared by the tests."""
import numpy as np

from qmd.core import CheckerboardCopula, ravel_cells


def random_copula(rng, rho, N, parts=3):
    """Mixture of permutation copulas with integer weights (exact masses)."""
    w = rng.integers(1, 6, size=parts)
    cells, weights = [], []
    for wt in w:
        pts = np.stack([rng.permutation(N) for _ in range(rho)], axis=1)
        cells.append(pts)
        weights.append(np.full(N, wt, dtype=np.int64))
    return _build(np.concatenate(cells), np.concatenate(weights), N, rho, int(w.sum()) * N)


def random_linkage(rng, d, N, parts=3):
    """Linkage checkerboard: every predictor cell carries 1/N**d.

    Each part assigns a response cell to every predictor cell so that every
    response cell is hit ``N**(d-1)`` times.
    """
    w = rng.integers(1, 6, size=parts)
    grid = np.indices((N,) * d).reshape(d, -1).T
    cells, weights = [], []
    for wt in w:
        k = rng.permutation(np.repeat(np.arange(N), N ** (d - 1)))
        cells.append(np.column_stack([grid, k]))
        weights.append(np.full(grid.shape[0], wt, dtype=np.int64))
    return _build(np.concatenate(cells), np.concatenate(weights), N, d + 1,
                  int(w.sum()) * N ** d)


def _build(cells, weights, N, rho, denom):
    keys = ravel_cells(cells, N)
    order = np.argsort(keys, kind="stable")
    keys, weights = keys[order], weights[order]
    uniq, starts = np.unique(keys, return_index=True)
    return CheckerboardCopula(rho, N, uniq, np.add.reduceat(weights, starts), denom)


# "criterion k: PASS|FAIL ..." lines collected by the acceptance tests
ACCEPTANCE = []
