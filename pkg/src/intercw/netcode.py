"""Random linear network coding for storage: augment, encode, decode."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .field import FieldElement, FieldModulus, sample_array
from .linalg import (DimensionError, FieldMatrix, FieldVector, SingularMatrixError,
                     linear_combination, solve)
from .rng import SeededRng


@dataclass(frozen=True)
class SourceFile:
    blocks: tuple[FieldVector, ...]

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise DimensionError("a source file needs at least one block")
        for b in blocks[1:]:
            blocks[0]._check(b)
        object.__setattr__(self, "blocks", blocks)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def xi(self) -> int:
        return self.blocks[0].dim

    @property
    def modulus(self) -> FieldModulus:
        return self.blocks[0].modulus


@dataclass(frozen=True)
class AugmentedBlock:
    vector: FieldVector
    index: int  # 1-based


@dataclass(frozen=True)
class CodedBlock:
    vector: FieldVector
    m: int
    server: Optional[int] = None
    slot: Optional[int] = None

    @property
    def coefficients(self) -> FieldVector:
        """Accumulated coefficients carried in the last m coordinates."""
        return self.vector[self.vector.dim - self.m:]

    @property
    def payload(self) -> FieldVector:
        return self.vector[:self.vector.dim - self.m]


def augment(f: SourceFile) -> list[AugmentedBlock]:
    mod, m = f.modulus, f.m
    return [AugmentedBlock(v.concat(FieldVector.unit(mod, m, i)), i + 1)
            for i, v in enumerate(f.blocks)]


def encode(blocks: Sequence[AugmentedBlock], rng: Optional[SeededRng] = None,
           coefficients: Optional[Sequence[FieldElement]] = None,
           server: Optional[int] = None, slot: Optional[int] = None) -> CodedBlock:
    """Random linear combination of the augmented blocks.

    Coefficients are drawn uniformly (zero included) unless given.
    """
    if not blocks:
        raise DimensionError("nothing to encode")
    mod = blocks[0].vector.modulus
    if coefficients is None:
        if rng is None:
            raise ValueError("encode needs an rng or explicit coefficients")
        coefficients = list(FieldVector.random(mod, len(blocks), rng))
    vec = linear_combination(list(coefficients), [b.vector for b in blocks])
    return CodedBlock(vec, len(blocks), server, slot)


def decode(coded: Sequence[CodedBlock]) -> SourceFile:
    """Recover the source file from exactly m coded blocks with independent tails."""
    if not coded:
        raise DimensionError("nothing to decode")
    m = coded[0].m
    if len(coded) != m:
        raise DimensionError(f"decode needs exactly {m} coded blocks, got {len(coded)}")
    coeffs = FieldMatrix.from_rows([c.coefficients for c in coded])
    try:
        augmented = solve(coeffs, [c.vector for c in coded])
    except SingularMatrixError:
        raise SingularMatrixError("coded blocks have dependent coefficient tails") from None
    return SourceFile(tuple(w[:w.dim - m] for w in augmented))


def full_rank_probability(q: int, m: int) -> float:
    """Probability that m uniform vectors in GF(q)^m are independent."""
    p = 1.0
    for i in range(1, m + 1):
        p *= 1.0 - float(q) ** -i
    return p


def full_rank_rate(modulus: FieldModulus, m: int, trials: int, rng: SeededRng) -> float:
    """Empirical fraction of uniform m x m coefficient matrices with full rank."""
    if trials < 1:
        raise ValueError("trials must be positive")
    hits = 0
    batch = 50_000
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        mats = sample_array(modulus, (n, m, m), rng)
        hits += int(np.count_nonzero(kernels.batch_rank_mod(mats, modulus.q) == m))
        done += n
    return hits / trials
