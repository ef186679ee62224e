"""Exact arithmetic in a prime field GF(q) with a runtime modulus."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng import SeededRng

MAX_MODULUS = 1 << 62
MERSENNE_61 = (1 << 61) - 1
DEFAULT_Q = MERSENNE_61

# Deterministic for every n < 3.3e24, which covers n < 2**62.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class FieldError(ValueError):
    pass


class ModulusMismatchError(FieldError):
    pass


@lru_cache(maxsize=256)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 2**64."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldModulus:
    q: int

    def __post_init__(self):
        q = int(self.q)
        if not 2 <= q < MAX_MODULUS:
            raise FieldError(f"modulus {q} outside [2, 2**62)")
        if not is_prime(q):
            raise FieldError(f"modulus {q} is not prime")
        object.__setattr__(self, "q", q)

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value % self.q, self)

    @property
    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    @property
    def one(self) -> FieldElement:
        return FieldElement(1, self)

    @property
    def rejection_bound(self) -> int:
        """Largest multiple of q not exceeding 2**64; draws at or above it are rejected."""
        return (1 << 64) // self.q * self.q

    def elements(self):
        for v in range(self.q):
            yield FieldElement(v, self)


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: FieldModulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.q:
            raise FieldError(f"{self.value} is not a canonical residue mod {self.modulus.q}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ModulusMismatchError(
                    f"mod {self.modulus.q} vs mod {other.modulus.q}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.modulus.q
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement((self.value + b) % self.modulus.q, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement((self.value - b) % self.modulus.q, self.modulus)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement((b - self.value) % self.modulus.q, self.modulus)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.value * b % self.modulus.q, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.modulus.q, self.modulus)

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        r, base, q = 1, self.value, self.modulus.q
        while e:
            if e & 1:
                r = r * base % q
            base = base * base % q
            e >>= 1
        return FieldElement(r, self.modulus)

    def inv(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse in GF(q)")
        return self ** (self.modulus.q - 2)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self * FieldElement(b, self.modulus).inv()

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.modulus.q})"

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(8, "big")


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inv()


def power(a: FieldElement, e: int) -> FieldElement:
    if e < 0:
        raise FieldError("exponent must be non-negative")
    return a ** e


def sample_uniform(modulus: FieldModulus, rng: SeededRng) -> FieldElement:
    """Uniform element by rejection sampling on 64-bit draws."""
    bound = modulus.rejection_bound
    while True:
        x = rng.next_u64()
        if x < bound:
            return FieldElement(x % modulus.q, modulus)


def sample_array(modulus: FieldModulus, shape, rng: SeededRng) -> np.ndarray:
    """Vectorised ``sample_uniform``: consumes the stream exactly as repeated scalar draws would."""
    n = int(np.prod(shape, dtype=np.int64))
    bound = np.uint64(modulus.rejection_bound) if modulus.rejection_bound < (1 << 64) else None
    out = np.empty(n, dtype=np.uint64)
    filled = 0
    while filled < n:
        draw = rng.u64_array(n - filled)
        if bound is not None:
            draw = draw[draw < bound]
        out[filled:filled + draw.size] = draw
        filled += draw.size
    return (out % np.uint64(modulus.q)).reshape(shape)
