"""Dense vectors and matrices over GF(q), backed by uint64 arrays.

Elimination uses a fixed pivot rule (first nonzero row, top-down, in the
leftmost unresolved column) so reduced forms and null-space bases are
reproducible bit for bit.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .field import FieldElement, FieldError, FieldModulus, ModulusMismatchError, sample_array
from .rng import SeededRng


class DimensionError(FieldError):
    pass


class SingularMatrixError(FieldError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.uint64)
    arr.setflags(write=False)
    return arr


class FieldVector:
    __slots__ = ("values", "modulus")

    def __init__(self, values, modulus: FieldModulus):
        arr = np.asarray(values)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError("a field vector needs a non-empty 1-d value array")
        if arr.dtype != np.uint64:
            ints = [int(v) for v in arr.tolist()]
            if any(not 0 <= v < modulus.q for v in ints):
                raise FieldError("vector entries must be canonical residues")
            arr = np.array(ints, dtype=np.uint64)
        elif (arr >= np.uint64(modulus.q)).any():
            raise FieldError("vector entries must be canonical residues")
        self.values = arr if not arr.flags.writeable else _frozen(arr.copy())
        self.modulus = modulus

    @classmethod
    def of(cls, modulus: FieldModulus, ints: Iterable[int]) -> FieldVector:
        return cls(np.array([int(v) % modulus.q for v in ints], dtype=np.uint64), modulus)

    @classmethod
    def zeros(cls, modulus: FieldModulus, dim: int) -> FieldVector:
        return cls(np.zeros(dim, dtype=np.uint64), modulus)

    @classmethod
    def unit(cls, modulus: FieldModulus, dim: int, index: int) -> FieldVector:
        arr = np.zeros(dim, dtype=np.uint64)
        arr[index] = 1
        return cls(arr, modulus)

    @classmethod
    def random(cls, modulus: FieldModulus, dim: int, rng: SeededRng) -> FieldVector:
        return cls(sample_array(modulus, dim, rng), modulus)

    @classmethod
    def from_elements(cls, elements: Sequence[FieldElement]) -> FieldVector:
        if not elements:
            raise DimensionError("empty element sequence")
        modulus = elements[0].modulus
        for e in elements:
            if e.modulus != modulus:
                raise ModulusMismatchError("elements of different fields")
        return cls(np.array([e.value for e in elements], dtype=np.uint64), modulus)

    @property
    def dim(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return FieldVector(self.values[i], self.modulus)
        return FieldElement(int(self.values[i]), self.modulus)

    def __iter__(self):
        for v in self.values.tolist():
            yield FieldElement(v, self.modulus)

    def ints(self) -> tuple[int, ...]:
        return tuple(self.values.tolist())

    def is_zero(self) -> bool:
        return not self.values.any()

    def _check(self, other: FieldVector):
        if not isinstance(other, FieldVector):
            raise TypeError(f"expected FieldVector, got {type(other).__name__}")
        if other.modulus != self.modulus:
            raise ModulusMismatchError("vectors over different fields")
        if other.dim != self.dim:
            raise DimensionError(f"dimension {self.dim} vs {other.dim}")

    def __add__(self, other: FieldVector) -> FieldVector:
        self._check(other)
        return FieldVector(kernels.addmod(self.values, other.values, self.modulus.q), self.modulus)

    def __sub__(self, other: FieldVector) -> FieldVector:
        self._check(other)
        return FieldVector(kernels.submod(self.values, other.values, self.modulus.q), self.modulus)

    def __neg__(self) -> FieldVector:
        return FieldVector(kernels.submod(np.zeros_like(self.values), self.values, self.modulus.q),
                           self.modulus)

    def __rmul__(self, scalar) -> FieldVector:
        if isinstance(scalar, FieldElement):
            if scalar.modulus != self.modulus:
                raise ModulusMismatchError("scalar from a different field")
            s = scalar.value
        elif isinstance(scalar, (int, np.integer)):
            s = int(scalar) % self.modulus.q
        else:
            return NotImplemented
        return FieldVector(kernels.mulmod(self.values, np.uint64(s), self.modulus.q), self.modulus)

    __mul__ = __rmul__

    def dot(self, other: FieldVector) -> FieldElement:
        self._check(other)
        v = kernels.matvec_mod(self.values[None, :], other.values, self.modulus.q)[0]
        return FieldElement(int(v), self.modulus)

    def concat(self, other: FieldVector) -> FieldVector:
        if other.modulus != self.modulus:
            raise ModulusMismatchError("vectors over different fields")
        return FieldVector(np.concatenate([self.values, other.values]), self.modulus)

    def __eq__(self, other):
        if not isinstance(other, FieldVector):
            return NotImplemented
        return (self.modulus == other.modulus and self.dim == other.dim
                and bool(np.array_equal(self.values, other.values)))

    def __hash__(self):
        return hash((self.modulus.q, self.values.tobytes()))

    def __repr__(self):
        return f"FieldVector({list(self.ints())}, q={self.modulus.q})"

    def to_bytes(self) -> bytes:
        return self.values.astype(">u8").tobytes()


class FieldMatrix:
    __slots__ = ("values", "modulus")

    def __init__(self, values, modulus: FieldModulus):
        arr = np.asarray(values, dtype=np.uint64)
        if arr.ndim != 2 or 0 in arr.shape:
            raise DimensionError("a field matrix needs a non-empty 2-d array")
        if (arr >= np.uint64(modulus.q)).any():
            raise FieldError("matrix entries must be canonical residues")
        self.values = _frozen(arr.copy()) if arr.flags.writeable else arr
        self.modulus = modulus

    @classmethod
    def from_rows(cls, rows: Sequence[FieldVector]) -> FieldMatrix:
        if not rows:
            raise DimensionError("matrix needs at least one row")
        rows = list(rows)
        for r in rows[1:]:
            rows[0]._check(r)
        return cls(np.stack([r.values for r in rows]), rows[0].modulus)

    @classmethod
    def of(cls, modulus: FieldModulus, rows: Iterable[Iterable[int]]) -> FieldMatrix:
        return cls(np.array([[int(v) % modulus.q for v in r] for r in rows], dtype=np.uint64),
                   modulus)

    @classmethod
    def identity(cls, modulus: FieldModulus, n: int) -> FieldMatrix:
        return cls(np.eye(n, dtype=np.uint64), modulus)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def rows(self) -> list[FieldVector]:
        return [FieldVector(r, self.modulus) for r in self.values]

    def __matmul__(self, other):
        if isinstance(other, FieldVector):
            if other.modulus != self.modulus:
                raise ModulusMismatchError("operands over different fields")
            if other.dim != self.shape[1]:
                raise DimensionError(f"{self.shape} @ ({other.dim},)")
            return FieldVector(kernels.matvec_mod(self.values, other.values, self.modulus.q),
                               self.modulus)
        if isinstance(other, FieldMatrix):
            if other.modulus != self.modulus:
                raise ModulusMismatchError("operands over different fields")
            if other.shape[0] != self.shape[1]:
                raise DimensionError(f"{self.shape} @ {other.shape}")
            return FieldMatrix(kernels.matmul_mod(self.values, other.values, self.modulus.q),
                               self.modulus)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.modulus == other.modulus and bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.modulus.q, self.shape, self.values.tobytes()))

    def __repr__(self):
        return f"FieldMatrix({self.values.tolist()}, q={self.modulus.q})"


def dot(a: FieldVector, b: FieldVector) -> FieldElement:
    return a.dot(b)


def vec_add(a: FieldVector, b: FieldVector) -> FieldVector:
    return a + b


def scalar_mul(s: FieldElement, a: FieldVector) -> FieldVector:
    return s * a


def linear_combination(coeffs: Sequence[FieldElement], vectors: Sequence[FieldVector]) -> FieldVector:
    """Sum of coeffs[i] * vectors[i], computed as one matrix product."""
    if len(coeffs) != len(vectors) or not vectors:
        raise DimensionError(f"{len(coeffs)} coefficients for {len(vectors)} vectors")
    mat = FieldMatrix.from_rows(vectors)
    c = FieldVector.from_elements(list(coeffs))
    if c.modulus != mat.modulus:
        raise ModulusMismatchError("coefficients from a different field")
    out = kernels.matmul_mod(c.values[None, :], mat.values, mat.modulus.q)[0]
    return FieldVector(out, mat.modulus)


def rref(m: FieldMatrix) -> tuple[FieldMatrix, int, tuple[int, ...]]:
    reduced, rank, pivots = kernels.rref_mod(m.values, m.modulus.q)
    return FieldMatrix(reduced, m.modulus), int(rank), tuple(int(p) for p in pivots)


def rank(m: FieldMatrix) -> int:
    return rref(m)[1]


def null_space_basis(m: FieldMatrix) -> list[FieldVector]:
    """One basis vector per free column, free variable set to 1, in column order."""
    reduced, r, pivots = rref(m)
    q = m.modulus.q
    n_cols = m.shape[1]
    pivot_set = set(pivots)
    red = reduced.values
    basis = []
    for f in range(n_cols):
        if f in pivot_set:
            continue
        u = np.zeros(n_cols, dtype=np.uint64)
        u[f] = 1
        for row, p in enumerate(pivots):
            u[p] = (q - int(red[row, f])) % q
        basis.append(FieldVector(u, m.modulus))
    return basis


def solve(m: FieldMatrix, rhs: Sequence[FieldVector]) -> list[FieldVector]:
    """Rows of X with M @ X = B, where ``rhs`` lists the rows of B."""
    n_rows, n_cols = m.shape
    if n_rows != n_cols:
        raise DimensionError(f"solve needs a square matrix, got {m.shape}")
    b = FieldMatrix.from_rows(rhs)
    if b.modulus != m.modulus:
        raise ModulusMismatchError("right-hand side over a different field")
    if b.shape[0] != n_rows:
        raise DimensionError(f"{b.shape[0]} right-hand rows for a {n_rows}x{n_rows} system")
    aug = np.concatenate([m.values, b.values], axis=1)
    reduced, r, pivots = kernels.rref_mod(aug, m.modulus.q)
    if r < n_rows or int(pivots[-1]) >= n_cols:
        raise SingularMatrixError("coefficient matrix is singular")
    return [FieldVector(row, m.modulus) for row in reduced[:, n_cols:]]
