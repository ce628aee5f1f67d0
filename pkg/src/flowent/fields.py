"""Exact arithmetic for finite fields and towers of field embeddings.

Every field is presented over its prime field: an element of GF(p^d) is a
length-d coefficient vector over GF(p), packed into an integer code in
``range(p**d)`` whose base-p digits run from the constant term upward.
Bulk operations act on numpy arrays of codes; matrix products route
through per-digit integer BLAS so that everything stays exact.

All values here are immutable after construction and every operation is a
pure function, so unrestricted concurrent use is safe.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from .errors import Mismatch, NotPrime, Reducible

# Largest extension-field order that gets dense multiplication tables.
_TABLE_CAP = 1024
# Desk-scale cap on prime characteristics.
_PRIME_CAP = 1 << 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# ---------------------------------------------------------------------------
# small dense Gaussian elimination over GF(p), used while building towers
# ---------------------------------------------------------------------------


def _prime_rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    a = a.astype(np.int64) % p
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
        inv = pow(int(a[r, c]), p - 2, p) if p > 2 else 1
        a[r] = (a[r] * inv) % p
        other = np.nonzero(a[:, c])[0]
        other = other[other != r]
        if other.size:
            a[other] = (a[other] - np.outer(a[other, c], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def _prime_rank(a: np.ndarray, p: int) -> int:
    return len(_prime_rref(a, p)[1])


def _prime_inv(a: np.ndarray, p: int) -> np.ndarray:
    n = a.shape[0]
    aug = np.concatenate([a % p, np.eye(n, dtype=np.int64)], axis=1)
    red, pivots = _prime_rref(aug, p)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular over the prime field")
    return red[:, n:]


def _prime_solve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return (_prime_inv(a, p) @ (b % p)) % p


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class FiniteField:
    """A finite field GF(p^d) presented as GF(p)[x]/(modulus).

    Two instances compare equal iff they share characteristic and modulus;
    their element codes are then interchangeable.
    """

    def __init__(self, p: int, modulus: Sequence[int], descriptor: dict | None = None):
        if not _is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if p >= _PRIME_CAP:
            raise ValueError(f"characteristic {p} exceeds the desk-scale cap {_PRIME_CAP}")
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) < 2 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree >= 1")
        self.p = p
        self.d = len(modulus) - 1
        self.q = p**self.d
        self.modulus = modulus
        self.zero = 0
        self.one = 1
        # x itself when the field is a proper extension, else 1
        self.generator = p if self.d > 1 else 1
        self.descriptor = descriptor if descriptor is not None else {"p": p, "tower": []}
        self._mul_table: np.ndarray | None = None
        self._inv_table: np.ndarray | None = None
        if self.d > 1:
            ppow = p ** np.arange(self.d, dtype=np.int64)
            self._ppow = ppow
            codes = np.arange(self.q, dtype=np.int64)
            self._digits = (codes[:, None] // ppow[None, :]) % p
            self._red = self._reduction_rows()
            if not _poly_is_irreducible(FiniteField(p, (0, 1)), modulus):
                raise Reducible(f"modulus {modulus} is reducible over GF({p})")

    # -- identity ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FiniteField)
            and self.p == other.p
            and self.modulus == other.modulus
        )

    def __hash__(self) -> int:
        return hash((self.p, self.modulus))

    def __repr__(self) -> str:
        return f"GF({self.q})"

    # -- element coding ----------------------------------------------------

    def coords(self, a: int) -> tuple[int, ...]:
        """Prime-field coefficient vector of ``a``, constant term first."""
        if self.d == 1:
            return (int(a),)
        return tuple(int(v) for v in self._digits[a])

    def from_coords(self, coeffs: Iterable[int]) -> int:
        coeffs = [int(c) % self.p for c in coeffs]
        if len(coeffs) > self.d:
            if any(coeffs[self.d :]):
                raise ValueError("coefficient vector longer than field degree")
            coeffs = coeffs[: self.d]
        code = 0
        for i, c in enumerate(coeffs):
            code += c * self.p**i
        return code

    def coords_array(self, a: np.ndarray) -> np.ndarray:
        """Digits of an array of codes; shape ``a.shape + (d,)``."""
        a = np.asarray(a, dtype=np.int64)
        if self.d == 1:
            return a[..., None]
        return self._digits[a]

    def encode_array(self, digits: np.ndarray) -> np.ndarray:
        digits = np.asarray(digits, dtype=np.int64) % self.p
        if self.d == 1:
            return digits[..., 0]
        return digits @ self._ppow

    def elements(self) -> range:
        return range(self.q)

    # -- scalar arithmetic ---------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.d == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return int(self.encode_array((self._digits[a] + self._digits[b]) % self.p))

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.d == 1:
            return (-a) % self.p
        return int(self.encode_array((-self._digits[a]) % self.p))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.d == 1:
            return (a * b) % self.p
        if self._mul_table is not None:
            return int(self._mul_table[a, b])
        return int(self.arr_mul(np.int64(a), np.int64(b)))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        if self.d == 1:
            return pow(a, self.p - 2, self.p)
        self._ensure_tables()
        if self._inv_table is not None:
            return int(self._inv_table[a])
        # square-and-multiply a**(q-2) without tables
        acc, base, e = 1, a, self.q - 2
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def power(self, a: int, k: int) -> int:
        acc = 1
        for _ in range(k):
            acc = self.mul(acc, a)
        return acc

    # -- array arithmetic ----------------------------------------------------

    def arr_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.d == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self.encode_array(self.coords_array(a) + self.coords_array(b))

    def arr_neg(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a.copy()
        if self.d == 1:
            return (-a) % self.p
        return self.encode_array(-self.coords_array(a))

    def arr_sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.arr_add(a, self.arr_neg(b))

    def arr_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product with numpy broadcasting."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.d == 1:
            return (a * b) % self.p
        if self.q <= _TABLE_CAP:
            self._ensure_tables()
        if self._mul_table is not None:
            return self._mul_table[a, b].astype(np.int64)
        da = self.coords_array(a)
        db = self.coords_array(b)
        shape = np.broadcast_shapes(a.shape, b.shape)
        planes = np.zeros(shape + (2 * self.d - 1,), dtype=np.int64)
        for i in range(self.d):
            for j in range(self.d):
                planes[..., i + j] += da[..., i] * db[..., j]
        return self.encode_array(self._reduce_planes(planes % self.p))

    def prepare_right(self, b: np.ndarray):
        """Pre-decode a matrix for repeated use as a right matmul operand."""
        b = np.asarray(b, dtype=np.int64)
        if self.d == 1:
            return (b.shape, b.astype(np.float64))
        planes = np.moveaxis(self.coords_array(b), -1, 0).astype(np.float64)
        return (b.shape, planes)

    def matmul_prepared(self, a: np.ndarray, prepared, out_cols: int | None = None) -> np.ndarray:
        """Product against a prepared right operand.

        ``a`` may have fewer columns than the prepared matrix has rows; the
        missing rows are treated as multiplied by zero.  ``out_cols`` trims
        the result to a leading column block.
        """
        shape, right = prepared
        a = np.asarray(a, dtype=np.int64)
        inner = a.shape[-1]
        if inner > shape[0]:
            raise ValueError(f"matmul shape mismatch {a.shape} @ {shape}")
        cols = shape[1] if out_cols is None else min(out_cols, shape[1])
        if inner == 0:
            return np.zeros((a.shape[0], cols), dtype=np.int64)
        # float64 BLAS stays exact while products fit in 53 bits
        assert inner * (self.p - 1) ** 2 < 2**53
        if self.d == 1:
            return (a.astype(np.float64) @ right[:inner, :cols]).astype(np.int64) % self.p
        da = np.moveaxis(self.coords_array(a), -1, 0).astype(np.float64)
        planes = np.zeros((2 * self.d - 1, a.shape[0], cols), dtype=np.int64)
        for i in range(self.d):
            for j in range(self.d):
                planes[i + j] += (da[i] @ right[j][:inner, :cols]).astype(np.int64)
        planes %= self.p
        low = self._reduce_planes(np.moveaxis(planes, 0, -1))
        return self.encode_array(low)

    def arr_matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact matrix product of two code arrays."""
        return self.matmul_prepared(a, self.prepare_right(b))

    def random_codes(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    # -- internals -----------------------------------------------------------

    def _reduction_rows(self) -> np.ndarray:
        """Digit rows of x^(d+t) mod modulus, for t = 0 .. d-2."""
        p, d = self.p, self.d
        rows = np.zeros((max(d - 1, 0), d), dtype=np.int64)
        top = (-np.asarray(self.modulus[:d], dtype=np.int64)) % p  # x^d
        cur = top
        for t in range(d - 1):
            rows[t] = cur
            nxt = np.zeros(d, dtype=np.int64)
            nxt[1:] = cur[:-1]
            nxt = (nxt + cur[d - 1] * top) % p
            cur = nxt
        return rows

    def _reduce_planes(self, planes: np.ndarray) -> np.ndarray:
        """Fold digit planes of degree < 2d-1 down to degree < d."""
        d = self.d
        low = planes[..., :d].copy()
        high = planes[..., d:]
        if high.shape[-1]:
            low += np.tensordot(high, self._red[: high.shape[-1]], axes=([-1], [0]))
        return low % self.p

    def _ensure_tables(self) -> None:
        if self._mul_table is not None or self.d == 1 or self.q > _TABLE_CAP:
            return
        d, q = self.d, self.q
        dig = self._digits
        planes = np.zeros((q, q, 2 * d - 1), dtype=np.int64)
        for i in range(d):
            for j in range(d):
                planes[:, :, i + j] += np.multiply.outer(dig[:, i], dig[:, j])
        table = self.encode_array(self._reduce_planes(planes % self.p)).astype(np.int32)
        self._mul_table = table
        inv = np.zeros(q, dtype=np.int32)
        rows, cols = np.nonzero(table == 1)
        inv[rows] = cols
        self._inv_table = inv


# ---------------------------------------------------------------------------
# polynomial helpers over an arbitrary FiniteField (coefficient lists of codes)
# ---------------------------------------------------------------------------


def _poly_trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mul(field: FiniteField, f: Sequence[int], g: Sequence[int]) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            out[i + j] = field.add(out[i + j], field.mul(a, b))
    return _poly_trim(out)


def _poly_rem(field: FiniteField, f: Sequence[int], g: Sequence[int]) -> list[int]:
    f = _poly_trim(list(f))
    g = _poly_trim(list(g))
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    lead_inv = field.inv(g[-1])
    while len(f) >= len(g):
        coeff = field.mul(f[-1], lead_inv)
        shift = len(f) - len(g)
        for i, b in enumerate(g):
            f[shift + i] = field.sub(f[shift + i], field.mul(coeff, b))
        f = _poly_trim(f)
        if not f:
            break
    return f


def _poly_is_irreducible(field: FiniteField, coeffs: Sequence[int]) -> bool:
    """Trial division by all monic polynomials of degree <= deg/2."""
    coeffs = list(coeffs)
    deg = len(coeffs) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for e in range(1, deg // 2 + 1):
        for lower in itertools.product(field.elements(), repeat=e):
            divisor = list(lower) + [1]
            if not _poly_rem(field, coeffs, divisor):
                return False
    return True


def is_irreducible(field: FiniteField, coeffs: Sequence[int]) -> bool:
    """Whether a monic polynomial (codes over ``field``) is irreducible."""
    coeffs = [int(c) for c in coeffs]
    if coeffs[-1] != field.one:
        raise ValueError("polynomial must be monic")
    return _poly_is_irreducible(field, coeffs)


def least_irreducible(field: FiniteField, degree: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of the given degree.

    Coefficient tuples (constant term first, codes ordered as integers)
    are scanned in ascending lexicographic order; deterministic.
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    for lower in itertools.product(field.elements(), repeat=degree):
        cand = list(lower) + [1]
        if _poly_is_irreducible(field, cand):
            return tuple(cand)
    raise RuntimeError("no irreducible polynomial found")  # unreachable


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


class FieldEmbedding:
    """An arithmetic-preserving inclusion of one finite field in another.

    Attributes:
        source, target: the two fields.
        matrix: prime-linear matrix (target.d x source.d) sending source
            coordinates to target coordinates.
        basis: the ``[target:source]`` target codes of the chosen basis of
            the target as a source-vector-space; ``basis[0]`` is 1.
        degree: ``[target:source]``.
    """

    def __init__(
        self,
        source: FiniteField,
        target: FiniteField,
        matrix: np.ndarray,
        basis: Sequence[int],
    ):
        if source.p != target.p:
            raise Mismatch("embeddings require equal characteristic")
        if target.d % source.d != 0 or len(basis) * source.d != target.d:
            raise Mismatch("degree arithmetic is inconsistent")
        self.source = source
        self.target = target
        self.matrix = np.asarray(matrix, dtype=np.int64) % source.p
        self.matrix.setflags(write=False)
        self.basis = tuple(int(b) for b in basis)
        self.degree = len(basis)
        self.gen_image = self.apply(source.generator)
        self._spread_inv = self._build_spread_inverse()
        self._rep_all: np.ndarray | None = None
        self._validate_hom()

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FieldEmbedding)
            and self.source == other.source
            and self.target == other.target
            and np.array_equal(self.matrix, other.matrix)
            and self.basis == other.basis
        )

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.basis, self.matrix.tobytes()))

    def __repr__(self) -> str:
        return f"{self.source!r} -> {self.target!r} (degree {self.degree})"

    # -- maps ----------------------------------------------------------------

    def apply(self, a: int) -> int:
        vec = (self.matrix @ np.asarray(self.source.coords(a), dtype=np.int64)) % self.source.p
        return int(self.target.encode_array(vec))

    def apply_array(self, a: np.ndarray) -> np.ndarray:
        digits = self.source.coords_array(np.asarray(a, dtype=np.int64))
        out = np.tensordot(digits, self.matrix, axes=([-1], [1])) % self.source.p
        return self.target.encode_array(out)

    def coords_in_basis(self, alpha: int) -> np.ndarray:
        """Source-field coordinates of a target element in ``self.basis``."""
        flat = (self._spread_inv @ np.asarray(self.target.coords(alpha), dtype=np.int64)) % self.source.p
        return self.source.encode_array(flat.reshape(self.degree, self.source.d))

    def rep(self, alpha: int) -> np.ndarray:
        """Matrix of multiplication-by-alpha on the target as a source space.

        Column j holds the source coordinates of ``alpha * basis[j]``, so
        ``coords(alpha * beta) = rep(alpha) @ coords(beta)`` for every beta.
        """
        cols = [self.coords_in_basis(self.target.mul(alpha, b)) for b in self.basis]
        return np.stack(cols, axis=1)

    def rep_table(self) -> np.ndarray:
        """All regular-representation matrices, shape (target.q, deg, deg)."""
        if self._rep_all is None:
            tgt, src = self.target, self.source
            codes = np.arange(tgt.q, dtype=np.int64)
            prods = tgt.arr_mul(codes[:, None], np.asarray(self.basis, dtype=np.int64)[None, :])
            digits = tgt.coords_array(prods)  # (q, deg, target.d)
            flat = np.tensordot(digits, self._spread_inv, axes=([-1], [1])) % src.p
            coords = src.encode_array(flat.reshape(tgt.q, self.degree, self.degree, src.d))
            self._rep_all = np.ascontiguousarray(np.swapaxes(coords, 1, 2))
            self._rep_all.setflags(write=False)
        return self._rep_all

    # -- internals -------------------------------------------------------------

    def _source_power_code(self, i: int) -> int:
        return self.source.p**i if self.source.d > 1 else 1

    def _build_spread_inverse(self) -> np.ndarray:
        d_t, d_s = self.target.d, self.source.d
        spread = np.zeros((d_t, d_t), dtype=np.int64)
        for j, b in enumerate(self.basis):
            for i in range(d_s):
                elt = self.target.mul(b, self.apply(self._source_power_code(i)))
                spread[:, j * d_s + i] = self.target.coords(elt)
        try:
            return _prime_inv(spread, self.source.p)
        except ValueError as exc:  # pragma: no cover - guarded by constructors
            raise Mismatch("basis is not free over the source field") from exc

    def _validate_hom(self) -> None:
        src, tgt = self.source, self.target
        if self.apply(src.one) != tgt.one:
            raise Mismatch("embedding does not preserve 1")
        if src.q <= 256:
            codes = np.arange(src.q, dtype=np.int64)
            pairs_a, pairs_b = np.meshgrid(codes, codes, indexing="ij")
        else:
            rng = np.random.default_rng(0)
            pairs_a = src.random_codes(rng, 256)
            pairs_b = src.random_codes(rng, 256)
        img_a = self.apply_array(pairs_a)
        img_b = self.apply_array(pairs_b)
        ok_add = np.array_equal(self.apply_array(src.arr_add(pairs_a, pairs_b)), tgt.arr_add(img_a, img_b))
        ok_mul = np.array_equal(self.apply_array(src.arr_mul(pairs_a, pairs_b)), tgt.arr_mul(img_a, img_b))
        if not (ok_add and ok_mul):
            raise Mismatch("embedding is not a ring homomorphism")


def regular_representation(e: FieldEmbedding, alpha: int) -> np.ndarray:
    """Source-coefficient matrix of multiplication-by-alpha on e.target."""
    if not 0 <= alpha < e.target.q:
        raise ValueError("element outside the target field")
    return e.rep(alpha)


def identity_embedding(field: FiniteField) -> FieldEmbedding:
    return FieldEmbedding(field, field, np.eye(field.d, dtype=np.int64), (field.one,))


def compose(inner: FieldEmbedding, outer: FieldEmbedding) -> FieldEmbedding:
    """Composite embedding F -> L of F -> K and K -> L.

    The composite basis at index ``j * inner.degree + i`` is
    ``outer(inner.basis[i]) * outer.basis[j]``, matching nested block
    expansion of coordinates.
    """
    if inner.target != outer.source:
        raise Mismatch("inner.target and outer.source differ")
    matrix = (outer.matrix @ inner.matrix) % inner.source.p
    basis = [
        outer.target.mul(outer.apply(bi), bj)
        for bj in outer.basis
        for bi in inner.basis
    ]
    return FieldEmbedding(inner.source, outer.target, matrix, basis)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def make_prime_field(p: int) -> FiniteField:
    """The field of p elements, presented with modulus x."""
    if not _is_prime(int(p)):
        raise NotPrime(f"{p} is not prime")
    return FiniteField(int(p), (0, 1))


def make_extension(base: FiniteField, modulus: Sequence[int]) -> tuple[FiniteField, FieldEmbedding]:
    """Extension of ``base`` by a monic irreducible modulus over ``base``.

    Returns the extension field (always re-presented over the prime field)
    together with the canonical embedding whose basis is the power basis
    ``{1, y, ..., y^(deg-1)}`` of the modulus root y.
    """
    coeffs = [int(c) for c in modulus]
    if any(not 0 <= c < base.q for c in coeffs):
        raise ValueError("modulus coefficients must be base-field codes")
    deg = len(coeffs) - 1
    if deg < 2:
        raise ValueError("extension degree must be at least 2")
    if coeffs[-1] != base.one:
        raise ValueError("modulus must be monic")
    if not _poly_is_irreducible(base, coeffs):
        raise Reducible(f"modulus {tuple(coeffs)} is reducible over {base!r}")

    descriptor = {
        "p": base.p,
        "tower": list(base.descriptor["tower"]) + [[list(base.coords(c)) for c in coeffs]],
    }
    if base.d == 1:
        ext = FiniteField(base.p, coeffs, descriptor)
        matrix = np.zeros((deg, 1), dtype=np.int64)
        matrix[0, 0] = 1
        basis = tuple(base.p**j for j in range(deg))
        return ext, FieldEmbedding(base, ext, matrix, basis)
    return _relative_extension(base, coeffs, descriptor)


def _relative_extension(
    base: FiniteField, coeffs: list[int], descriptor: dict
) -> tuple[FiniteField, FieldEmbedding]:
    """Extension over a non-prime base, rebuilt on a prime-field modulus."""
    p = base.p
    deg = len(coeffs) - 1
    d = deg * base.d

    def flat(vec: tuple[int, ...]) -> np.ndarray:
        out = np.zeros(d, dtype=np.int64)
        for j, c in enumerate(vec):
            out[j * base.d : (j + 1) * base.d] = base.coords(c)
        return out

    def kmul(u: tuple[int, ...], v: tuple[int, ...]) -> tuple[int, ...]:
        prod = _poly_mul(base, list(u), list(v))
        rem = _poly_rem(base, prod, coeffs) if len(prod) > deg else prod
        rem = list(rem) + [0] * (deg - len(rem))
        return tuple(rem)

    def power_matrix(gamma: tuple[int, ...], count: int) -> np.ndarray:
        rows = []
        cur = (base.one,) + (base.zero,) * (deg - 1)
        for _ in range(count):
            rows.append(flat(cur))
            cur = kmul(cur, gamma)
        return np.stack(rows, axis=1)  # columns are gamma powers

    y = tuple(base.one if j == 1 else base.zero for j in range(deg))
    gamma = None
    candidates = itertools.chain([y], (_unflatten_codes(t, base, deg) for t in range(base.q**deg)))
    for cand in candidates:
        if _prime_rank(power_matrix(cand, d), p) == d:
            gamma = cand
            break
    assert gamma is not None  # a primitive element always exists
    g_mat = power_matrix(gamma, d)
    # flat coordinates of gamma**d
    cur = (base.one,) + (base.zero,) * (deg - 1)
    for _ in range(d):
        cur = kmul(cur, gamma)
    c = _prime_solve(g_mat, flat(cur), p)
    minpoly = tuple(int((-v) % p) for v in c) + (1,)
    ext = FiniteField(p, minpoly, descriptor)
    psi = _prime_inv(g_mat, p)  # flat base coords -> power-basis-of-gamma coords
    emb_matrix = psi[:, : base.d]
    basis = tuple(int(ext.encode_array(psi[:, j * base.d] % p)) for j in range(deg))
    return ext, FieldEmbedding(base, ext, emb_matrix, basis)


def _unflatten_codes(t: int, base: FiniteField, deg: int) -> tuple[int, ...]:
    out = []
    for _ in range(deg):
        out.append(t % base.q)
        t //= base.q
    return tuple(out)


# ---------------------------------------------------------------------------
# field descriptors (configuration-file format)
# ---------------------------------------------------------------------------


class Tower:
    """A chain of fields F_0 <= F_1 <= ... with single-step embeddings."""

    def __init__(self, fields: Sequence[FiniteField], steps: Sequence[FieldEmbedding]):
        self.fields = tuple(fields)
        self.steps = tuple(steps)

    @property
    def top(self) -> FiniteField:
        return self.fields[-1]

    def embedding(self, lo: int, hi: int) -> FieldEmbedding:
        """Composite embedding fields[lo] -> fields[hi]."""
        if not 0 <= lo <= hi < len(self.fields):
            raise ValueError("tower indices out of range")
        emb = identity_embedding(self.fields[lo])
        for step in self.steps[lo:hi]:
            emb = compose(emb, step)
        return emb


def tower_from_descriptor(desc: dict) -> Tower:
    """Build the full tower named by a field descriptor.

    The descriptor holds ``p`` and ``tower``, a list of modulus coefficient
    lists (innermost first).  Coefficients are integers reduced mod p, or
    prime-field coordinate lists when the base of that step is non-prime.
    """
    if "p" not in desc:
        raise ValueError("field descriptor needs a key 'p'")
    fields = [make_prime_field(int(desc["p"]))]
    steps: list[FieldEmbedding] = []
    for coeffs in desc.get("tower", []):
        base = fields[-1]
        codes = [_coeff_to_code(base, c) for c in coeffs]
        ext, emb = make_extension(base, codes)
        fields.append(ext)
        steps.append(emb)
    return Tower(fields, steps)


def field_from_descriptor(desc: dict) -> FiniteField:
    return tower_from_descriptor(desc).top


def _coeff_to_code(base: FiniteField, c) -> int:
    if isinstance(c, (int, np.integer)):
        return int(c) % base.p
    return base.from_coords(c)
