"""Sparse complex operators and the fixed set of spin matrices.

The public contract of :class:`SparseComplexOperator` is a coordinate list:
sorted ``(row, col)`` pairs with duplicates merged at construction. Arithmetic
is delegated to :mod:`scipy.sparse`, and a compressed-row view is cached for
matrix-vector products, which are the hot path of every time integration.

Basis conventions
-----------------
* Spin-1/2: index 0 is spin up (``sigma^z = +1``), index 1 is spin down.
* Spin-1: the ordering is ``(+1, 0, -1)`` from top to bottom, so that
  ``S^z = diag(1, 0, -1)``. The correlator translation tables in
  :mod:`rampdiss.rg` rely on this ordering.
* Tensor products put site 0 in the leftmost (slowest varying) factor.
* The raising and lowering Pauli matrices are ``sigma^pm = (sigma^x pm i sigma^y)/2``,
  so ``sigma^+ = [[0, 1], [0, 0]]``.
"""

from __future__ import annotations

from enum import Enum
from functools import cached_property, lru_cache
from typing import Iterable, Union

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

__all__ = [
    "SparseComplexOperator",
    "SpinKind",
    "pauli",
    "spin1",
    "spin_matrix",
    "site_operator",
    "identity",
    "kron",
    "commutator",
]


Number = Union[int, float, complex]


class SpinKind(str, Enum):
    """Local Hilbert space of a site: spin-1/2 (``half``) or spin-1 (``one``)."""

    HALF = "half"
    ONE = "one"

    @property
    def dim(self) -> int:
        return 2 if self is SpinKind.HALF else 3


class SparseComplexOperator:
    """Immutable sparse complex matrix in coordinate form.

    Parameters
    ----------
    dim_rows, dim_cols : int
        Matrix shape; both must be positive.
    rows, cols : array_like of int
        Coordinates of the stored entries.
    values : array_like of complex
        Entry values. Repeated coordinates are summed and exact zeros dropped.

    Notes
    -----
    Instances are never mutated after construction and can be shared freely
    between threads.
    """

    def __init__(self, dim_rows: int, dim_cols: int, rows: Iterable[int] = (),
                 cols: Iterable[int] = (), values: Iterable[Number] = ()):
        dim_rows = int(dim_rows)
        dim_cols = int(dim_cols)
        if dim_rows <= 0 or dim_cols <= 0:
            raise DimensionError(f"dimensions must be positive, got {dim_rows}x{dim_cols}")
        r = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype=np.int64).ravel()
        c = np.asarray(list(cols) if not isinstance(cols, np.ndarray) else cols, dtype=np.int64).ravel()
        v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                       dtype=np.complex128).ravel()
        if not (r.size == c.size == v.size):
            raise DimensionError("rows, cols and values must have equal length")
        if r.size and (r.min() < 0 or r.max() >= dim_rows or c.min() < 0 or c.max() >= dim_cols):
            raise DimensionError("entry coordinates out of bounds")
        coo = sp.coo_matrix((v, (r, c)), shape=(dim_rows, dim_cols))
        coo.sum_duplicates()
        coo.eliminate_zeros()
        # sum_duplicates leaves entries sorted row-major
        order = np.lexsort((coo.col, coo.row))
        self.dim_rows = dim_rows
        self.dim_cols = dim_cols
        self._rows = coo.row[order].astype(np.int64)
        self._cols = coo.col[order].astype(np.int64)
        self._vals = coo.data[order].astype(np.complex128)
        for arr in (self._rows, self._cols, self._vals):
            arr.flags.writeable = False

    # ------------------------------------------------------------------ constructors
    @classmethod
    def from_dense(cls, matrix) -> "SparseComplexOperator":
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2:
            raise DimensionError("from_dense expects a 2-D array")
        r, c = np.nonzero(m)
        return cls(m.shape[0], m.shape[1], r, c, m[r, c])

    @classmethod
    def from_scipy(cls, matrix) -> "SparseComplexOperator":
        coo = sp.coo_matrix(matrix)
        return cls(coo.shape[0], coo.shape[1], coo.row, coo.col, coo.data)

    @classmethod
    def diagonal(cls, values) -> "SparseComplexOperator":
        v = np.asarray(values, dtype=np.complex128).ravel()
        idx = np.arange(v.size)
        return cls(v.size, v.size, idx, idx, v)

    # ------------------------------------------------------------------ views
    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim_rows, self.dim_cols)

    @property
    def nnz(self) -> int:
        return int(self._vals.size)

    @property
    def entries(self) -> list[tuple[int, int, complex]]:
        """Coordinate-sorted ``(row, col, value)`` triples."""
        return [(int(r), int(c), complex(v)) for r, c, v in zip(self._rows, self._cols, self._vals)]

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def cols(self) -> np.ndarray:
        return self._cols

    @property
    def values(self) -> np.ndarray:
        return self._vals

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Compressed-row view used for fast products (read-only by convention)."""
        return sp.csr_matrix((self._vals, (self._rows, self._cols)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        out[self._rows, self._cols] = self._vals
        return out

    def diagonal_values(self) -> np.ndarray:
        return self.csr.diagonal()

    def is_diagonal(self) -> bool:
        return bool(np.all(self._rows == self._cols))

    # ------------------------------------------------------------------ algebra
    def _check_same_shape(self, other: "SparseComplexOperator") -> None:
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, SparseComplexOperator):
            return NotImplemented
        self._check_same_shape(other)
        return SparseComplexOperator(
            self.dim_rows, self.dim_cols,
            np.concatenate([self._rows, other._rows]),
            np.concatenate([self._cols, other._cols]),
            np.concatenate([self._vals, other._vals]),
        )

    def __sub__(self, other):
        if not isinstance(other, SparseComplexOperator):
            return NotImplemented
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return SparseComplexOperator(self.dim_rows, self.dim_cols, self._rows, self._cols,
                                         self._vals * complex(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return self * (1.0 / complex(scalar))
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, SparseComplexOperator):
            if self.dim_cols != other.dim_rows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            return SparseComplexOperator.from_scipy(self.csr @ other.csr)
        vec = np.asarray(other)
        if vec.shape[0] != self.dim_cols:
            raise DimensionError(f"operand of length {vec.shape[0]} for operator {self.shape}")
        return self.csr @ vec

    def apply(self, vector) -> np.ndarray:
        """Matrix-vector (or matrix-matrix with dense right operand) product."""
        return self @ vector

    def adjoint(self) -> "SparseComplexOperator":
        return SparseComplexOperator(self.dim_cols, self.dim_rows, self._cols, self._rows,
                                     np.conj(self._vals))

    def transpose(self) -> "SparseComplexOperator":
        return SparseComplexOperator(self.dim_cols, self.dim_rows, self._cols, self._rows, self._vals)

    def conj(self) -> "SparseComplexOperator":
        return SparseComplexOperator(self.dim_rows, self.dim_cols, self._rows, self._cols,
                                     np.conj(self._vals))

    def kron(self, other: "SparseComplexOperator") -> "SparseComplexOperator":
        """Tensor product with ``self`` as the left (slow) factor."""
        return SparseComplexOperator.from_scipy(sp.kron(self.csr, other.csr, format="coo"))

    def submatrix(self, row_index, col_index=None) -> "SparseComplexOperator":
        """Restriction to the given row and column index lists (in that order)."""
        row_index = np.asarray(row_index, dtype=np.int64)
        col_index = row_index if col_index is None else np.asarray(col_index, dtype=np.int64)
        sub = self.csr[row_index][:, col_index]
        return SparseComplexOperator.from_scipy(sub)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._vals))) if self.nnz else 0.0

    def allclose(self, other: "SparseComplexOperator", atol: float = 0.0) -> bool:
        """Entrywise comparison; ``atol = 0`` demands exact equality."""
        if self.shape != other.shape:
            return False
        return (self - other).max_abs() <= atol

    def __eq__(self, other):
        if not isinstance(other, SparseComplexOperator):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self._rows, other._rows)
                and np.array_equal(self._cols, other._cols) and np.array_equal(self._vals, other._vals))

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseComplexOperator(shape={self.shape}, nnz={self.nnz})"


# ---------------------------------------------------------------------- operator zoo

_SQ2 = np.sqrt(2.0)

_PAULI = {
    "x": [[0, 1], [1, 0]],
    "y": [[0, -1j], [1j, 0]],
    "z": [[1, 0], [0, -1]],
    "0": [[1, 0], [0, 1]],
    "plus": [[0, 1], [0, 0]],
    "minus": [[0, 0], [1, 0]],
}

_SPIN1 = {
    "z": [[1, 0, 0], [0, 0, 0], [0, 0, -1]],
    "plus": [[0, _SQ2, 0], [0, 0, _SQ2], [0, 0, 0]],
    "minus": [[0, 0, 0], [_SQ2, 0, 0], [0, _SQ2, 0]],
    "x": [[0, 1 / _SQ2, 0], [1 / _SQ2, 0, 1 / _SQ2], [0, 1 / _SQ2, 0]],
    "y": [[0, -1j / _SQ2, 0], [1j / _SQ2, 0, -1j / _SQ2], [0, 1j / _SQ2, 0]],
}

_ALIASES = {"+": "plus", "-": "minus", "p": "plus", "m": "minus", "i": "0", "id": "0", "identity": "0"}


def _canonical(kind: str) -> str:
    key = str(kind).lower()
    return _ALIASES.get(key, key)


@lru_cache(maxsize=None)
def pauli(kind: str) -> SparseComplexOperator:
    """Return a 2x2 Pauli-type matrix.

    ``kind`` is one of ``x, y, z, 0, plus, minus``. ``pauli('0')`` is the
    identity and ``pauli('plus') = (sigma^x + i sigma^y)/2``.
    """
    key = _canonical(kind)
    if key not in _PAULI:
        raise ValueError(f"unknown Pauli index {kind!r}")
    return SparseComplexOperator.from_dense(_PAULI[key])


@lru_cache(maxsize=None)
def spin1(kind: str) -> SparseComplexOperator:
    """Return a 3x3 spin-1 matrix in the ``(+1, 0, -1)`` basis.

    ``kind`` is one of ``x, y, z, plus, minus``.
    """
    key = _canonical(kind)
    if key not in _SPIN1:
        raise ValueError(f"unknown spin-1 index {kind!r}")
    return SparseComplexOperator.from_dense(_SPIN1[key])


def spin_matrix(spin: SpinKind | str, kind: str) -> SparseComplexOperator:
    """Spin operator ``S^kind`` for either spin kind.

    For spin-1/2 this is the spin operator ``s = sigma/2`` for ``x, y, z`` and
    ``s^pm = sigma^pm`` for the ladder operators, so both kinds obey
    ``[S^z, S^pm] = pm S^pm`` and ``[S^+, S^-] = 2 S^z``.
    """
    spin = SpinKind(spin)
    key = _canonical(kind)
    if spin is SpinKind.ONE:
        return spin1(key)
    if key in ("x", "y", "z"):
        return 0.5 * pauli(key)
    if key in ("plus", "minus"):
        return pauli(key)
    raise ValueError(f"unknown spin operator {kind!r}")


@lru_cache(maxsize=None)
def identity(dim: int) -> SparseComplexOperator:
    return SparseComplexOperator.diagonal(np.ones(int(dim)))


def kron(*ops: SparseComplexOperator) -> SparseComplexOperator:
    """Tensor product of several operators, leftmost factor first."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    out = ops[0]
    for op in ops[1:]:
        out = out.kron(op)
    return out


def site_operator(op: SparseComplexOperator, site: int, n_sites: int) -> SparseComplexOperator:
    """Embed a single-site operator at ``site`` of an ``n_sites`` tensor product.

    Site 0 is the leftmost factor; all other factors are identities.
    """
    if op.dim_rows != op.dim_cols:
        raise DimensionError("site_operator needs a square operator")
    if not (0 <= int(site) < int(n_sites)):
        raise DimensionError(f"site {site} out of range for {n_sites} sites")
    d = op.dim_rows
    left = d ** int(site)
    right = d ** (int(n_sites) - int(site) - 1)
    out = op
    if left > 1:
        out = identity(left).kron(out)
    if right > 1:
        out = out.kron(identity(right))
    return out


def commutator(a: SparseComplexOperator, b: SparseComplexOperator) -> SparseComplexOperator:
    return a @ b - b @ a
