"""Keyed pseudorandom function into GF(q): HMAC-SHA256 with rejection reduction.

Instantiation (bit-exact):

    digest_0 = HMAC-SHA256(key, data)
    digest_j = HMAC-SHA256(key, data || j)       j = 1, 2, ... (one byte)

Each digest is split into four 8-byte big-endian windows; the first window
below floor(2**64 / q) * q is accepted and reduced mod q.

Callers never pass raw data directly for protocol roles; one context byte
is prepended: 0x01 for per-transmission nonces, 0x02 for (server, slot)
index pairs, 0x03 for key-generation counters.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from .field import FieldElement, FieldModulus
from .rng import SeededRng

KEY_BYTES = 32
NONCE_BYTES = 16

CTX_NONCE = b"\x01"
CTX_INDEX = b"\x02"
CTX_COUNTER = b"\x03"

_MAX_INDEX = (1 << 64) - 1


class PrfError(ValueError):
    pass


@dataclass(frozen=True)
class PrfKey:
    key: bytes

    def __post_init__(self):
        if not isinstance(self.key, (bytes, bytearray)) or len(self.key) != KEY_BYTES:
            raise PrfError(f"PRF key must be exactly {KEY_BYTES} bytes")
        object.__setattr__(self, "key", bytes(self.key))

    @classmethod
    def generate(cls, rng: SeededRng) -> PrfKey:
        return cls(rng.bytes(KEY_BYTES))

    def __repr__(self):
        return f"PrfKey({self.key[:4].hex()}...)"


def eval(key: PrfKey, data: bytes, modulus: FieldModulus) -> FieldElement:  # noqa: A001
    bound = modulus.rejection_bound
    for j in range(256):
        msg = data if j == 0 else data + bytes([j])
        digest = hmac.new(key.key, msg, hashlib.sha256).digest()
        for w in range(0, 32, 8):
            x = int.from_bytes(digest[w:w + 8], "big")
            if x < bound:
                return FieldElement(x % modulus.q, modulus)
    # 1024 consecutive rejections has probability below 2**-1024.
    raise PrfError("rejection sampling exhausted")


def encode_index_pair(u: int, v: int) -> bytes:
    for name, x in (("server index", u), ("slot index", v)):
        if not 1 <= x <= _MAX_INDEX:
            raise PrfError(f"{name} {x} out of range")
    return u.to_bytes(8, "big") + v.to_bytes(8, "big")


def eval_nonce(key: PrfKey, nonce: bytes, modulus: FieldModulus) -> FieldElement:
    return eval(key, CTX_NONCE + nonce, modulus)


def eval_index_pair(key: PrfKey, u: int, v: int, modulus: FieldModulus) -> FieldElement:
    return eval(key, CTX_INDEX + encode_index_pair(u, v), modulus)


def eval_counter(key: PrfKey, x: int, modulus: FieldModulus) -> FieldElement:
    if not 1 <= x <= _MAX_INDEX:
        raise PrfError(f"counter {x} out of range")
    return eval(key, CTX_COUNTER + x.to_bytes(8, "big"), modulus)


def fresh_nonce(rng: SeededRng) -> bytes:
    return rng.bytes(NONCE_BYTES)
