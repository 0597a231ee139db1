"""Domain types shared by the rest of the package.

The central object is :class:`CheckerboardCopula`, a copula that spreads its
mass uniformly over the cells of a regular ``N**rho`` grid.  Only the occupied
cells are stored, keyed by their row-major linear index.  Cell coordinates
are zero-based throughout: along every axis the cells are ``0, ..., N-1`` and
cell ``c`` covers ``(c/N, (c+1)/N]`` (with 0 adjoined to cell 0).

Masses are held either as exact integer numerators over a common
denominator, or as plain float64 masses.  Reference copulas and tie-free
empirical checkerboards use the exact form, which keeps downstream
dependence values bit-stable under axis permutations and reflections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

#: invariant tolerance for single objects
MASS_TOL = 1e-12
#: tolerance for comparisons between different computation paths
CROSS_TOL = 1e-9
#: dense ``N**rho`` arrays are refused above this many cells
DENSE_CELL_CAP = 10**8
_INT_LIMIT = 2**53


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(MemoryError):
    """A requested grid would exceed the memory cap."""


TIE_POLICIES = ("midrank", "random")


@dataclass(frozen=True)
class Sample:
    """Raw ``n x rho`` observation table with a designated response column."""

    values: np.ndarray
    column_names: tuple
    response_index: int

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ValueError("sample values must be a 2-d table")
        n, rho = values.shape
        if n < 2:
            raise ValueError(f"need at least 2 observations, got {n}")
        if rho < 2:
            raise ValueError(f"need at least 2 columns, got {rho}")
        if not np.all(np.isfinite(values)):
            bad = np.flatnonzero(~np.all(np.isfinite(values), axis=1))
            raise ValueError(f"non-finite entries in rows {bad[:10].tolist()}")
        names = tuple(str(c) for c in self.column_names)
        if len(names) != rho:
            raise ValueError("column_names must match the number of columns")
        if len(set(names)) != rho:
            raise ValueError("column names must be unique")
        if not 0 <= self.response_index < rho:
            raise ValueError(f"response_index {self.response_index} out of range")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "response_index", int(self.response_index))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def rho(self) -> int:
        return self.values.shape[1]

    @property
    def d(self) -> int:
        return self.rho - 1

    @property
    def predictor_indices(self) -> tuple:
        return tuple(a for a in range(self.rho) if a != self.response_index)

    @classmethod
    def from_columns(cls, predictors, response, names=None) -> "Sample":
        """Build a sample with the response stored as the last column."""
        x = np.asarray(predictors, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(response, dtype=np.float64).reshape(-1, 1)
        if names is None:
            names = [f"X{a + 1}" for a in range(x.shape[1])] + ["Y"]
        return cls(np.hstack([x, y]), tuple(names), x.shape[1])


@dataclass(frozen=True)
class PseudoSample:
    """Column-wise normalised ranks ``rank/n`` of a :class:`Sample`."""

    ranks: np.ndarray
    tie_policy: str = "midrank"
    seed: Optional[int] = None
    response_index: int = -1
    column_names: tuple = ()

    def __post_init__(self):
        ranks = np.array(self.ranks, dtype=np.float64, copy=True)
        if ranks.ndim != 2 or ranks.shape[0] < 1:
            raise ValueError("ranks must be a non-empty 2-d table")
        if self.tie_policy not in TIE_POLICIES:
            raise ValueError(f"unknown tie policy {self.tie_policy!r}")
        if np.any(ranks <= 0.0) or np.any(ranks > 1.0):
            raise DomainError("pseudo-observations must lie in (0, 1]")
        rho = ranks.shape[1]
        resp = self.response_index % rho
        names = tuple(self.column_names) or tuple(f"V{a + 1}" for a in range(rho))
        ranks.flags.writeable = False
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "response_index", resp)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def rho(self) -> int:
        return self.ranks.shape[1]

    def select(self, columns: Sequence[int]) -> "PseudoSample":
        """Keep ``columns`` in the given order; the last one becomes the response."""
        cols = list(columns)
        return PseudoSample(self.ranks[:, cols], self.tie_policy, self.seed,
                            len(cols) - 1, tuple(self.column_names[c] for c in cols))


def _check_linear_size(resolution: int, dimension: int) -> int:
    size = resolution ** dimension
    if size >= 2**62:
        raise ResourceError(f"grid {resolution}^{dimension} cannot be linearised")
    return size


def ravel_cells(cells: np.ndarray, resolution: int) -> np.ndarray:
    """Row-major linear index of zero-based multi-indices (last axis fastest)."""
    cells = np.asarray(cells, dtype=np.int64)
    out = np.zeros(cells.shape[:-1], dtype=np.int64)
    for a in range(cells.shape[-1]):
        out = out * resolution + cells[..., a]
    return out


def unravel_index(index: np.ndarray, resolution: int, dimension: int) -> np.ndarray:
    index = np.asarray(index, dtype=np.int64)
    out = np.empty(index.shape + (dimension,), dtype=np.int64)
    rest = index.copy()
    for a in range(dimension - 1, -1, -1):
        out[..., a] = rest % resolution
        rest //= resolution
    return out


def aggregate(keys: np.ndarray, values: np.ndarray):
    """Sum ``values`` per key; returns sorted unique keys and their sums.

    Values sharing a key are added in their input order, so the result is
    reproducible bit for bit.
    """
    keys = np.asarray(keys, dtype=np.int64)
    if keys.size == 0:
        return keys, np.asarray(values)[:0]
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    starts = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1]])
    sums = np.add.reduceat(np.asarray(values)[order], starts)
    return sk[starts], sums


@dataclass(frozen=True, eq=False)
class CheckerboardCopula:
    """Copula with uniform density on each cell of the ``N**rho`` grid.

    Parameters
    ----------
    dimension : int
        Number of coordinates ``rho``.
    resolution : int
        Grid size ``N`` per axis.
    index : ndarray of int64
        Sorted, unique row-major indices of the occupied cells.
    weights : ndarray
        Cell weights aligned with ``index``.  Integer numerators when
        ``denominator`` is set, float masses otherwise.
    denominator : int or None
        Common denominator of integer weights.
    """

    dimension: int
    resolution: int
    index: np.ndarray
    weights: np.ndarray
    denominator: Optional[int] = None
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        rho, N = int(self.dimension), int(self.resolution)
        if rho < 1 or N < 1:
            raise ValueError("dimension and resolution must be positive")
        size = _check_linear_size(N, rho)
        index = np.array(self.index, dtype=np.int64, copy=True).ravel()
        if self.denominator is not None:
            weights = np.array(self.weights, dtype=np.int64, copy=True).ravel()
            denom = int(self.denominator)
            if denom <= 0 or denom >= _INT_LIMIT:
                raise ValueError("denominator must be a positive integer below 2**53")
        else:
            weights = np.array(self.weights, dtype=np.float64, copy=True).ravel()
            denom = None
        if index.shape != weights.shape:
            raise ValueError("index and weights must have the same length")
        keep = weights != 0
        index, weights = index[keep], weights[keep]
        if index.size and (index[0] < 0 or index[-1] >= size
                           or np.any(np.diff(index) <= 0)):
            raise ValueError("cell indices must be sorted, unique and inside the grid")
        for arr in (index, weights):
            arr.flags.writeable = False
        object.__setattr__(self, "dimension", rho)
        object.__setattr__(self, "resolution", N)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "denominator", denom)
        if self.validate:
            self.check()

    # construction -------------------------------------------------------
    @classmethod
    def from_dense(cls, masses, denominator=None, validate=True) -> "CheckerboardCopula":
        arr = np.asarray(masses)
        N = arr.shape[0]
        if any(s != N for s in arr.shape):
            raise ValueError("dense masses must have equal extent on every axis")
        flat = arr.ravel()
        idx = np.flatnonzero(flat)
        return cls(arr.ndim, N, idx, flat[idx], denominator, validate)

    @classmethod
    def from_cells(cls, cells: Mapping[tuple, float] | Iterable, resolution: int,
                   dimension: Optional[int] = None, denominator=None,
                   validate=True) -> "CheckerboardCopula":
        """Build from ``{zero-based cell tuple: weight}``."""
        items = list(cells.items()) if isinstance(cells, Mapping) else list(cells)
        if not items:
            raise ValueError("no cells given")
        multi = np.array([c for c, _ in items], dtype=np.int64)
        if dimension is None:
            dimension = multi.shape[1]
        if np.any(multi < 0) or np.any(multi >= resolution):
            raise ValueError("cell coordinates out of range")
        w = np.array([v for _, v in items])
        keys, sums = aggregate(ravel_cells(multi, resolution), w)
        return cls(dimension, resolution, keys, sums, denominator, validate)

    # views ----------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.denominator is not None

    @property
    def mass(self) -> np.ndarray:
        if self.denominator is None:
            return self.weights
        return self.weights / float(self.denominator)

    @property
    def cells(self) -> np.ndarray:
        """Zero-based multi-indices of the occupied cells, shape ``(nnz, rho)``."""
        return unravel_index(self.index, self.resolution, self.dimension)

    @property
    def n_cells(self) -> int:
        return self.resolution ** self.dimension

    def mass_of(self, cell: Sequence[int]) -> float:
        key = int(ravel_cells(np.asarray(cell)[None, :], self.resolution)[0])
        pos = np.searchsorted(self.index, key)
        if pos < self.index.size and self.index[pos] == key:
            return float(self.mass[pos])
        return 0.0

    def to_dense(self, numerators: bool = False) -> np.ndarray:
        if self.n_cells > DENSE_CELL_CAP:
            raise ResourceError(
                f"dense grid of {self.n_cells} cells exceeds cap {DENSE_CELL_CAP}")
        src = self.weights if numerators else self.mass
        out = np.zeros(self.n_cells, dtype=src.dtype)
        out[self.index] = src
        return out.reshape((self.resolution,) * self.dimension)

    def as_float(self) -> "CheckerboardCopula":
        if self.denominator is None:
            return self
        return CheckerboardCopula(self.dimension, self.resolution, self.index,
                                  self.mass, None, validate=False)

    # invariants -----------------------------------------------------------
    def slab_masses(self, axis: int) -> np.ndarray:
        coord = (self.index // self.resolution ** (self.dimension - 1 - axis)) % self.resolution
        if self.exact:
            out = np.zeros(self.resolution, dtype=np.int64)
            np.add.at(out, coord, self.weights)
            return out
        return np.bincount(coord, weights=self.weights, minlength=self.resolution)

    def check(self, tol: float = MASS_TOL) -> None:
        """Raise :class:`DomainError` unless masses form a copula."""
        if np.any(self.weights < 0):
            raise DomainError("negative cell mass")
        N = self.resolution
        if self.exact:
            D = self.denominator
            if int(self.weights.sum()) != D:
                raise DomainError("total mass differs from 1")
            if D % N:
                raise DomainError("denominator incompatible with uniform margins")
            for a in range(self.dimension):
                if np.any(self.slab_masses(a) != D // N):
                    raise DomainError(f"margin {a} is not uniform")
            return
        if abs(math.fsum(self.weights) - 1.0) > tol:
            raise DomainError("total mass differs from 1")
        for a in range(self.dimension):
            if np.max(np.abs(self.slab_masses(a) - 1.0 / N)) > tol:
                raise DomainError(f"margin {a} is not uniform")

    def __repr__(self):
        kind = f"exact/{self.denominator}" if self.exact else "float"
        return (f"CheckerboardCopula(dimension={self.dimension}, resolution="
                f"{self.resolution}, nnz={self.index.size}, {kind})")


@dataclass(frozen=True)
class ConditionalCdf:
    """Piecewise-linear conditional distribution function of the response.

    ``cumulative[j]`` is the value at ``j/N``; the function is linear in
    between.  ``empty`` marks a conditioning cell without mass, for which the
    uniform distribution function is used.
    """

    resolution: int
    cumulative: np.ndarray
    empty: bool = False

    def __post_init__(self):
        cum = np.array(self.cumulative, dtype=np.float64, copy=True)
        if cum.shape != (self.resolution + 1,):
            raise ValueError("cumulative must have N+1 entries")
        if cum[0] != 0.0 or cum[-1] != 1.0 or np.any(np.diff(cum) < 0):
            raise DomainError("cumulative must be nondecreasing from 0 to 1")
        cum.flags.writeable = False
        object.__setattr__(self, "cumulative", cum)

    def __call__(self, y):
        grid = np.linspace(0.0, 1.0, self.resolution + 1)
        return np.interp(y, grid, self.cumulative)


@dataclass(frozen=True)
class DependenceEstimate:
    """Estimated dependence of the response on a predictor subset."""

    value: float
    n: int
    N: int
    s: Optional[float]
    predictor_indices: tuple
    response_index: int
    seed: Optional[int] = None
    tie_policy: str = "midrank"
    predictors: tuple = ()
    response: str = ""

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"dependence value {self.value} outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "n": self.n,
            "N": self.N,
            "s": self.s,
            "predictors": list(self.predictors),
            "response": self.response,
            "seed": self.seed,
            "tie_policy": self.tie_policy,
        }


def cell_of(point, resolution: int) -> tuple:
    """Zero-based cell containing ``point``.

    Cells are left-open and right-closed, with 0 adjoined to the first
    cell, so a boundary coordinate ``k/N`` belongs to cell ``k-1``.
    """
    x = np.asarray(point, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("point must be a vector")
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError(f"coordinates must lie in (0, 1], got {x.tolist()}")
    return tuple(int(c) for c in cells_of(x[None, :], resolution)[0])


def cells_of(points: np.ndarray, resolution: int) -> np.ndarray:
    """Vectorised :func:`cell_of` for an ``(m, k)`` array (no domain check)."""
    x = np.asarray(points, dtype=np.float64)
    c = np.ceil(x * resolution).astype(np.int64)
    # float rounding can push N*x across a boundary the point itself sits on
    c -= ((c - 1) / resolution >= x) & (c > 1)
    np.clip(c, 1, resolution, out=c)
    return c - 1


def marginalize(cb: CheckerboardCopula, keep_axes: Sequence[int]) -> CheckerboardCopula:
    """Marginal checkerboard on ``keep_axes`` (zero-based, strictly increasing)."""
    axes = list(keep_axes)
    if not axes:
        raise ValueError("keep_axes must not be empty")
    if any(b <= a for a, b in zip(axes, axes[1:])):
        raise ValueError("keep_axes must be strictly increasing")
    if axes[0] < 0 or axes[-1] >= cb.dimension:
        raise ValueError(f"axes {axes} out of range for dimension {cb.dimension}")
    if axes == list(range(cb.dimension)):
        return cb
    return _project(cb, axes)


def permute_axes(cb: CheckerboardCopula, order: Sequence[int]) -> CheckerboardCopula:
    """Reorder axes: output axis ``k`` is input axis ``order[k]``."""
    order = list(order)
    if sorted(order) != list(range(cb.dimension)):
        raise ValueError("order must be a permutation of the axes")
    if order == list(range(cb.dimension)):
        return cb
    return _project(cb, order)


def reflect_axis(cb: CheckerboardCopula, axis: int) -> CheckerboardCopula:
    """Image of ``cb`` under ``u_axis -> 1 - u_axis``."""
    cells = cb.cells
    cells[:, axis] = cb.resolution - 1 - cells[:, axis]
    keys, w = aggregate(ravel_cells(cells, cb.resolution), cb.weights)
    return CheckerboardCopula(cb.dimension, cb.resolution, keys, w, cb.denominator,
                              validate=False)


def _project(cb, axes):
    cells = cb.cells[:, axes]
    keys, w = aggregate(ravel_cells(cells, cb.resolution), cb.weights)
    return CheckerboardCopula(len(axes), cb.resolution, keys, w, cb.denominator,
                              validate=False)


def move_response_last(cb: CheckerboardCopula, response_axis: int) -> CheckerboardCopula:
    response_axis = response_axis % cb.dimension
    order = [a for a in range(cb.dimension) if a != response_axis] + [response_axis]
    return permute_axes(cb, order)
