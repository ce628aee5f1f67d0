"""Exact matrices and canonical subspaces over a finite field.

Matrices hold numpy arrays of element codes and are immutable after
construction.  Subspaces carry their reduced row-echelon basis, so equal
subspaces have bit-identical representations and equality needs no
tolerances.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, FieldMismatch, NotContained, NotInvertible
from .fields import FieldEmbedding, FiniteField


class Matrix:
    """A dense rows x cols matrix of field-element codes."""

    __slots__ = ("field", "data")

    def __init__(self, field: FiniteField, data):
        arr = np.ascontiguousarray(np.asarray(data, dtype=np.int64))
        if arr.ndim != 2:
            raise DimensionMismatch(f"matrix data must be 2-d, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise ValueError("entries are not valid field codes")
        arr.setflags(write=False)
        self.field = field
        self.data = arr

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, field: FiniteField, rows: int, cols: int) -> "Matrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def eye(cls, field: FiniteField, n: int) -> "Matrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @classmethod
    def from_literal(cls, field: FiniteField, rows: Sequence[Sequence]) -> "Matrix":
        """Build from nested lists; entries are codes, or prime-field
        coordinate tuples when the field is non-prime."""
        conv = []
        for row in rows:
            out = []
            for entry in row:
                if isinstance(entry, (list, tuple)):
                    out.append(field.from_coords(entry))
                else:
                    out.append(int(entry))
            conv.append(out)
        arr = np.asarray(conv, dtype=np.int64) if conv else np.zeros((0, 0), dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(len(conv), -1)
        return cls(field, arr)

    # -- shape ----------------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    # -- algebra ----------------------------------------------------------------

    def _check(self, other: "Matrix") -> None:
        if self.field != other.field:
            raise FieldMismatch("matrices live over different fields")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return Matrix(self.field, self.field.arr_add(self.data, other.data))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return Matrix(self.field, self.field.arr_sub(self.data, other.data))

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, self.field.arr_neg(self.data))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        return Matrix(self.field, self.field.arr_matmul(self.data, other.data))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"Matrix({self.field!r}, {self.rows}x{self.cols})"

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Matrix-vector product on a 1-d code array."""
        vec = np.asarray(vector, dtype=np.int64).reshape(-1, 1)
        return self.field.arr_matmul(self.data, vec)[:, 0]


def hstack(blocks: Sequence[Matrix]) -> Matrix:
    field = blocks[0].field
    return Matrix(field, np.concatenate([b.data for b in blocks], axis=1))


def vstack(blocks: Sequence[Matrix]) -> Matrix:
    field = blocks[0].field
    return Matrix(field, np.concatenate([b.data for b in blocks], axis=0))


# ---------------------------------------------------------------------------
# row reduction
# ---------------------------------------------------------------------------


def _rref_array(field: FiniteField, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """In-place reduced row echelon form; returns (array, pivot columns)."""
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        pv = int(a[r, c])
        if pv != 1:
            a[r] = field.arr_mul(np.int64(field.inv(pv)), a[r])
        col = a[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit] = field.arr_sub(a[hit], field.arr_mul(col[hit, None], a[r][None, :]))
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m: Matrix) -> tuple[Matrix, int]:
    """Canonical reduced row-echelon form and rank."""
    a, pivots = _rref_array(m.field, m.data.copy())
    return Matrix(m.field, a), len(pivots)


def rank(m: Matrix) -> int:
    return rref(m)[1]


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise NotInvertible("only square matrices can be inverted")
    n = m.rows
    aug = np.concatenate([m.data.copy(), np.eye(n, dtype=np.int64)], axis=1)
    red, pivots = _rref_array(m.field, aug)
    if pivots[:n] != list(range(n)):
        raise NotInvertible("matrix is singular")
    return Matrix(m.field, red[:, n:])


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------


class Subspace:
    """A subspace of K^n held by its reduced row-echelon basis.

    The representation is canonical: two subspaces are equal exactly when
    their basis arrays are identical.
    """

    __slots__ = ("field", "ambient", "basis", "pivots", "_constraints")

    def __init__(self, field: FiniteField, ambient: int, basis: Matrix, pivots: Sequence[int]):
        self.field = field
        self.ambient = ambient
        self.basis = basis
        self.pivots = tuple(pivots)
        self._constraints: Matrix | None = None

    @classmethod
    def from_rows(cls, field: FiniteField, rows) -> "Subspace":
        if isinstance(rows, Matrix):
            if rows.field != field:
                raise FieldMismatch("row matrix lives over a different field")
            arr = rows.data.copy()
        else:
            arr = np.asarray(rows, dtype=np.int64)
            if arr.ndim == 1:
                arr = arr.reshape(1, -1)
            if arr.size == 0 and arr.ndim != 2:
                arr = arr.reshape(0, 0)
            arr = arr.copy()
        red, pivots = _rref_array(field, arr)
        return cls(field, arr.shape[1], Matrix(field, red[: len(pivots)]), pivots)

    @classmethod
    def zero(cls, field: FiniteField, ambient: int) -> "Subspace":
        return cls(field, ambient, Matrix.zeros(field, 0, ambient), ())

    @classmethod
    def full(cls, field: FiniteField, ambient: int) -> "Subspace":
        return cls(field, ambient, Matrix.eye(field, ambient), range(ambient))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subspace)
            and self.field == other.field
            and self.ambient == other.ambient
            and self.basis == other.basis
        )

    def __repr__(self) -> str:
        return f"Subspace(dim {self.dim} of {self.field!r}^{self.ambient})"

    def reduce_vector(self, vector: np.ndarray) -> np.ndarray:
        """Residue of a vector after elimination against the basis."""
        v = np.asarray(vector, dtype=np.int64).copy()
        if self.dim:
            coeffs = v[list(self.pivots)]
            v = self.field.arr_sub(v, self.field.arr_matmul(coeffs[None, :], self.basis.data)[0])
        return v

    def contains_vector(self, vector) -> bool:
        return not self.reduce_vector(np.asarray(vector, dtype=np.int64)).any()

    def contains(self, other: "Subspace") -> bool:
        if self.ambient != other.ambient or self.field != other.field:
            raise DimensionMismatch("subspaces live in different ambients")
        return all(self.contains_vector(row) for row in other.basis.data)

    def constraints(self) -> Matrix:
        """Rows spanning the annihilator: S = {v : constraints() @ v = 0}."""
        if self._constraints is None:
            self._constraints = kernel(self.basis).basis
        return self._constraints


def kernel(m: Matrix) -> Subspace:
    """Canonical basis of {v : M v = 0}."""
    red, pivots = _rref_array(m.field, m.data.copy())
    n = m.cols
    free = [c for c in range(n) if c not in set(pivots)]
    if not free:
        return Subspace.zero(m.field, n)
    basis = np.zeros((len(free), n), dtype=np.int64)
    basis[np.arange(len(free)), free] = 1
    if pivots:
        block = red[: len(pivots)][:, free]  # rank x len(free)
        basis[:, pivots] = m.field.arr_neg(block.T)
    return Subspace.from_rows(m.field, basis)


def preimage(m: Matrix, s: Subspace) -> Subspace:
    """Canonical form of {v : M v in S}."""
    if s.field != m.field:
        raise FieldMismatch("subspace and matrix fields differ")
    if s.ambient != m.rows:
        raise DimensionMismatch(f"subspace ambient {s.ambient} != matrix rows {m.rows}")
    return kernel(s.constraints() @ m)


def intersect(s: Subspace, t: Subspace) -> Subspace:
    if s.field != t.field:
        raise FieldMismatch("subspaces live over different fields")
    if s.ambient != t.ambient:
        raise DimensionMismatch(f"ambients differ: {s.ambient} vs {t.ambient}")
    stacked = vstack([s.constraints(), t.constraints()])
    return kernel(stacked)


def codim_within(u: Subspace, s: Subspace) -> int:
    """dim(U/S) for S <= U; raises NotContained otherwise."""
    if u.ambient != s.ambient or u.field != s.field:
        raise DimensionMismatch("subspaces live in different ambients")
    if not u.contains(s):
        raise NotContained("second subspace is not contained in the first")
    return u.dim - s.dim


def image(m: Matrix) -> Subspace:
    """Column space of M, canonicalized as a row subspace."""
    return Subspace.from_rows(m.field, m.data.T.copy())


# ---------------------------------------------------------------------------
# scalar-change maps on matrices
# ---------------------------------------------------------------------------


def block_expand(m: Matrix, e: FieldEmbedding) -> Matrix:
    """Replace each entry over e.target with its multiplication matrix over
    e.source; realizes the same linear map on re-blocked coordinates."""
    if m.field != e.target:
        raise FieldMismatch("matrix is not over the embedding's target field")
    reps = e.rep_table()[m.data]  # (rows, cols, deg, deg)
    deg = e.degree
    out = reps.transpose(0, 2, 1, 3).reshape(m.rows * deg, m.cols * deg)
    return Matrix(e.source, out)


def entry_embed(m: Matrix, e: FieldEmbedding) -> Matrix:
    """Push every entry through the embedding; shape and rank are kept."""
    if m.field != e.source:
        raise FieldMismatch("matrix is not over the embedding's source field")
    return Matrix(e.target, e.apply_array(m.data))


def kronecker(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; realizes the tensor of the two linear maps."""
    if a.field != b.field:
        raise FieldMismatch("operands live over different fields")
    prod = a.field.arr_mul(a.data[:, None, :, None], b.data[None, :, None, :])
    return Matrix(a.field, prod.reshape(a.rows * b.rows, a.cols * b.cols))


# ---------------------------------------------------------------------------
# randomized helpers (deterministic under a seeded generator)
# ---------------------------------------------------------------------------


def random_matrix(field: FiniteField, rng: np.random.Generator, rows: int, cols: int) -> Matrix:
    return Matrix(field, field.random_codes(rng, (rows, cols)))


def random_invertible(field: FiniteField, rng: np.random.Generator, n: int) -> Matrix:
    while True:
        cand = random_matrix(field, rng, n, n)
        if rank(cand) == n:
            return cand
