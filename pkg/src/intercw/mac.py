"""Inner-product, Carter-Wegman, Inter and InterCW message authentication codes.

All four tag a vector message M over GF(q) with an inner product against a
secret vector; CW variants add the PRF mask f_k(r) for a fresh nonce r, and
Inter variants hand the verifier k1 + k1' where k1' is orthogonal to the
keyed message span, so the verifier never sees k1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from . import prf
from .field import FieldElement, FieldError
from .linalg import DimensionError, FieldMatrix, FieldVector, null_space_basis, rank
from .prf import PrfKey
from .rng import SeededRng

MAX_MASK_RETRIES = 8


class KeyGenError(FieldError):
    pass


class DependentMessagesError(KeyGenError):
    pass


class DegenerateMaskError(KeyGenError):
    pass


class MissingKeyError(ValueError):
    pass


class SchemeId(str, enum.Enum):
    INNER_PRODUCT = "inner-product"
    CARTER_WEGMAN = "carter-wegman"
    INTER = "inter"
    INTER_CW = "intercw"

    @property
    def uses_nonce(self) -> bool:
        return self in (SchemeId.CARTER_WEGMAN, SchemeId.INTER_CW)

    @property
    def hides_key(self) -> bool:
        return self in (SchemeId.INTER, SchemeId.INTER_CW)


@dataclass(frozen=True)
class VerifierKeys:
    """Everything an untrusted verifier holds: k1'' and (optionally) the PRF key k2."""

    k1_verifier: FieldVector
    prf_key: Optional[PrfKey] = None

    @property
    def modulus(self):
        return self.k1_verifier.modulus


@dataclass(frozen=True)
class KeySet:
    k1: FieldVector
    k1_mask: Optional[FieldVector] = None
    k1_verifier: Optional[FieldVector] = None
    prf_key: Optional[PrfKey] = None
    # Seed of the orthogonal mask; client-private like k1 and k1_mask.
    mask_prf_key: Optional[PrfKey] = None

    def __post_init__(self):
        for v in (self.k1_mask, self.k1_verifier):
            if v is not None:
                self.k1._check(v)
        if (self.k1_mask is None) != (self.k1_verifier is None):
            raise KeyGenError("mask and verifier key come as a pair")
        if self.k1_mask is not None and self.k1 + self.k1_mask != self.k1_verifier:
            raise KeyGenError("verifier key must equal k1 + mask")

    @property
    def modulus(self):
        return self.k1.modulus

    @property
    def dim(self) -> int:
        return self.k1.dim

    def verifier_view(self) -> VerifierKeys:
        if self.k1_verifier is None:
            raise MissingKeyError("key set has no orthogonal split")
        return VerifierKeys(self.k1_verifier, self.prf_key)


@dataclass(frozen=True)
class TagValue:
    t: FieldElement
    nonce: Optional[bytes] = None


def _check_dim(m: FieldVector, key: FieldVector):
    if m.dim != key.dim:
        raise DimensionError(f"message dim {m.dim} vs key dim {key.dim}")


def _nonce_for(tag: TagValue, expected_nonce: Optional[bytes]) -> Optional[bytes]:
    """Nonce the receiver checks against, or None if the tag must be refused."""
    if expected_nonce is None:
        if tag.nonce is None:
            raise MissingKeyError("tag carries no nonce and none was delivered")
        return tag.nonce
    if tag.nonce is not None and tag.nonce != expected_nonce:
        return None
    return expected_nonce


# -- inner-product -----------------------------------------------------------

def ip_keygen(dim: int, modulus, rng: SeededRng) -> KeySet:
    if dim < 1:
        raise KeyGenError("key dimension must be positive")
    return KeySet(FieldVector.random(modulus, dim, rng))


def ip_tag(m: FieldVector, ks: KeySet) -> TagValue:
    _check_dim(m, ks.k1)
    return TagValue(m.dot(ks.k1))


def ip_verify(m: FieldVector, tag: TagValue, ks: KeySet) -> bool:
    _check_dim(m, ks.k1)
    return tag.t == m.dot(ks.k1)


# -- Carter-Wegman -----------------------------------------------------------

def cw_keygen(dim: int, modulus, rng: SeededRng) -> KeySet:
    if dim < 1:
        raise KeyGenError("key dimension must be positive")
    k1 = FieldVector.random(modulus, dim, rng)
    return KeySet(k1, prf_key=PrfKey.generate(rng))


def _masked_tag(m: FieldVector, k1: FieldVector, prf_key: Optional[PrfKey],
                rng: SeededRng, nonce: Optional[bytes]) -> TagValue:
    if prf_key is None:
        raise MissingKeyError("scheme needs a PRF key")
    _check_dim(m, k1)
    r = prf.fresh_nonce(rng) if nonce is None else nonce
    return TagValue(m.dot(k1) + prf.eval_nonce(prf_key, r, m.modulus), r)


def _masked_verify(m: FieldVector, tag: TagValue, key: FieldVector, prf_key: Optional[PrfKey],
                   expected_nonce: Optional[bytes]) -> bool:
    if prf_key is None:
        raise MissingKeyError("scheme needs a PRF key")
    _check_dim(m, key)
    r = _nonce_for(tag, expected_nonce)
    if r is None:
        return False
    return tag.t == m.dot(key) + prf.eval_nonce(prf_key, r, m.modulus)


def cw_tag(m: FieldVector, ks: KeySet, rng: SeededRng, nonce: Optional[bytes] = None) -> TagValue:
    return _masked_tag(m, ks.k1, ks.prf_key, rng, nonce)


def cw_verify(m: FieldVector, tag: TagValue, ks: KeySet,
              expected_nonce: Optional[bytes] = None) -> bool:
    """Check t = M.k + f(r).

    ``expected_nonce`` is the r the receiver got out of band for the
    current transmission; a tag bound to any other nonce is refused.
    """
    return _masked_verify(m, tag, ks.k1, ks.prf_key, expected_nonce)


# -- orthogonal key split ----------------------------------------------------

def _message_matrix(messages: Sequence[FieldVector]) -> FieldMatrix:
    if not messages:
        raise KeyGenError("need at least one message")
    mat = FieldMatrix.from_rows(messages)
    if rank(mat) != len(messages):
        raise DependentMessagesError("messages are linearly dependent")
    return mat


def orthogonal_gen(messages: Sequence[FieldVector], k_prf: PrfKey) -> FieldVector:
    """k1' = sum_x f(k_prf, x) * b_x over the canonical null-space basis b_1..b_z."""
    mat = _message_matrix(messages)
    basis = null_space_basis(mat)
    mod = mat.modulus
    mask = FieldVector.zeros(mod, mat.shape[1])
    for x, b in enumerate(basis, start=1):
        mask = mask + prf.eval_counter(k_prf, x, mod) * b
    return mask


def inter_keygen(messages: Sequence[FieldVector], rng: SeededRng) -> KeySet:
    mat = _message_matrix(messages)
    k1 = FieldVector.random(mat.modulus, mat.shape[1], rng)
    for _ in range(1 + MAX_MASK_RETRIES):
        k_prf = PrfKey.generate(rng)
        mask = orthogonal_gen(messages, k_prf)
        if not mask.is_zero():
            return KeySet(k1, mask, k1 + mask, mask_prf_key=k_prf)
    raise DegenerateMaskError("orthogonal mask stayed zero after retries")


def inter_tag(m: FieldVector, ks: KeySet) -> TagValue:
    return ip_tag(m, ks)


def inter_verify(m: FieldVector, tag: TagValue, verifier_key: FieldVector) -> bool:
    """Accept iff t = M.(k1 + k1'); guaranteed only for M in the keyed span."""
    _check_dim(m, verifier_key)
    return tag.t == m.dot(verifier_key)


# -- InterCW -----------------------------------------------------------------

def intercw_keygen(messages: Sequence[FieldVector], rng: SeededRng) -> KeySet:
    base = inter_keygen(messages, rng)
    return KeySet(base.k1, base.k1_mask, base.k1_verifier, PrfKey.generate(rng), base.mask_prf_key)


def intercw_tag(m: FieldVector, ks: KeySet, rng: SeededRng,
                nonce: Optional[bytes] = None) -> TagValue:
    return _masked_tag(m, ks.k1, ks.prf_key, rng, nonce)


def intercw_verify(m: FieldVector, tag: TagValue, verifier_key: FieldVector, prf_key: PrfKey,
                   expected_nonce: Optional[bytes] = None) -> bool:
    return _masked_verify(m, tag, verifier_key, prf_key, expected_nonce)


# -- uniform front end -------------------------------------------------------

def keygen(scheme: SchemeId, messages: Sequence[FieldVector], rng: SeededRng) -> KeySet:
    """Key generation for any scheme; non-Inter schemes only use the message dimension."""
    scheme = SchemeId(scheme)
    dim, mod = messages[0].dim, messages[0].modulus
    if scheme is SchemeId.INNER_PRODUCT:
        return ip_keygen(dim, mod, rng)
    if scheme is SchemeId.CARTER_WEGMAN:
        return cw_keygen(dim, mod, rng)
    if scheme is SchemeId.INTER:
        return inter_keygen(messages, rng)
    return intercw_keygen(messages, rng)


def tag(scheme: SchemeId, m: FieldVector, ks: KeySet, rng: SeededRng) -> TagValue:
    scheme = SchemeId(scheme)
    if scheme is SchemeId.INNER_PRODUCT:
        return ip_tag(m, ks)
    if scheme is SchemeId.CARTER_WEGMAN:
        return cw_tag(m, ks, rng)
    if scheme is SchemeId.INTER:
        return inter_tag(m, ks)
    return intercw_tag(m, ks, rng)


def verify(scheme: SchemeId, m: FieldVector, t: TagValue, ks: KeySet,
           expected_nonce: Optional[bytes] = None) -> bool:
    """Verify with the key material the scheme's receiver legitimately holds."""
    scheme = SchemeId(scheme)
    if scheme is SchemeId.INNER_PRODUCT:
        return ip_verify(m, t, ks)
    if scheme is SchemeId.CARTER_WEGMAN:
        return cw_verify(m, t, ks, expected_nonce)
    vk = ks.verifier_view()
    if scheme is SchemeId.INTER:
        return inter_verify(m, t, vk.k1_verifier)
    return intercw_verify(m, t, vk.k1_verifier, vk.prf_key, expected_nonce)
