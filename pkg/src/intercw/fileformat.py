"""Bit-exact on-disk artifacts.

Every binary artifact starts with a 32-byte header

    magic  b"ICWM"   4 bytes
    version          u16
    kind             u16
    q                u64
    dims             4 x u32 (meaning depends on kind)

followed by 8-byte big-endian field elements in row-major order and, for key
files, raw 32-byte PRF keys. All integers are big-endian.

    kind 1 client key     dims (2, c, xi, m)  k1, k1'  | k_prf, k2
    kind 2 verifier key   dims (1, c, xi, m)  k1''     | k2
    kind 3 source blocks  dims (m, xi, 0, 0)  v_1 .. v_m
    kind 4 server state   dims (d, c, u, m)   c_u1 .. c_ud, t_u1 .. t_ud

The manifest is a ``key=value`` text file.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import FieldElement, FieldModulus
from .linalg import FieldVector
from .mac import KeySet, TagValue, VerifierKeys
from .netcode import CodedBlock, SourceFile
from .prf import KEY_BYTES, PrfKey

MAGIC = b"ICWM"
VERSION = 1
HEADER = struct.Struct(">4sHHQ4I")

KIND_CLIENT = 1
KIND_VERIFIER = 2
KIND_SOURCE = 3
KIND_SERVER = 4

MANIFEST = "manifest.txt"
CLIENT_KEY = "client.key"
VERIFIER_KEY = "verifier.key"
SOURCE = "source.blk"


class FormatError(ValueError):
    pass


def server_filename(u: int) -> str:
    return f"server_{u:03d}.blk"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _header(kind: int, q: int, dims) -> bytes:
    return HEADER.pack(MAGIC, VERSION, kind, q, *dims)


def _elements(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype=np.uint64).astype(">u8").tobytes()


def _read(path: Path, kind: int):
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, got_kind, q, *dims = HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise FormatError(f"{path}: not a version-{VERSION} artifact")
    if got_kind != kind:
        raise FormatError(f"{path}: kind {got_kind}, expected {kind}")
    try:
        mod = FieldModulus(q)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return mod, dims, data[HEADER.size:]


def _take_elements(body: bytes, count: int, mod: FieldModulus, path) -> tuple[np.ndarray, bytes]:
    n = 8 * count
    if len(body) < n:
        raise FormatError(f"{path}: truncated payload")
    arr = np.frombuffer(body[:n], dtype=">u8").astype(np.uint64)
    if (arr >= np.uint64(mod.q)).any():
        raise FormatError(f"{path}: non-canonical field element")
    return arr, body[n:]


def _take_key(body: bytes, path) -> tuple[PrfKey, bytes]:
    if len(body) < KEY_BYTES:
        raise FormatError(f"{path}: truncated key")
    return PrfKey(body[:KEY_BYTES]), body[KEY_BYTES:]


def _done(rest: bytes, path):
    if rest:
        raise FormatError(f"{path}: {len(rest)} trailing bytes")


def write_client_key(path: Path, ks: KeySet, xi: int, m: int):
    c = ks.dim
    Path(path).write_bytes(
        _header(KIND_CLIENT, ks.modulus.q, (2, c, xi, m))
        + _elements(ks.k1.values) + _elements(ks.k1_mask.values)
        + ks.mask_prf_key.key + ks.prf_key.key)


def read_client_key(path: Path) -> tuple[KeySet, int, int]:
    mod, (rows, c, xi, m), body = _read(path, KIND_CLIENT)
    if rows != 2:
        raise FormatError(f"{path}: bad row count")
    k1, body = _take_elements(body, c, mod, path)
    mask, body = _take_elements(body, c, mod, path)
    k_prf, body = _take_key(body, path)
    k2, body = _take_key(body, path)
    _done(body, path)
    k1v, maskv = FieldVector(k1, mod), FieldVector(mask, mod)
    return KeySet(k1v, maskv, k1v + maskv, k2, k_prf), xi, m


def write_verifier_key(path: Path, vk: VerifierKeys, xi: int, m: int):
    Path(path).write_bytes(
        _header(KIND_VERIFIER, vk.modulus.q, (1, vk.k1_verifier.dim, xi, m))
        + _elements(vk.k1_verifier.values) + vk.prf_key.key)


def read_verifier_key(path: Path) -> tuple[VerifierKeys, int, int]:
    mod, (rows, c, xi, m), body = _read(path, KIND_VERIFIER)
    if rows != 1:
        raise FormatError(f"{path}: bad row count")
    k, body = _take_elements(body, c, mod, path)
    k2, body = _take_key(body, path)
    _done(body, path)
    return VerifierKeys(FieldVector(k, mod), k2), xi, m


def write_source(path: Path, f: SourceFile):
    arr = np.stack([b.values for b in f.blocks])
    Path(path).write_bytes(_header(KIND_SOURCE, f.modulus.q, (f.m, f.xi, 0, 0)) + _elements(arr))


def read_source(path: Path) -> SourceFile:
    mod, (m, xi, _, _), body = _read(path, KIND_SOURCE)
    arr, body = _take_elements(body, m * xi, mod, path)
    _done(body, path)
    arr = arr.reshape(m, xi)
    return SourceFile(tuple(FieldVector(r, mod) for r in arr))


def write_server(path: Path, server_id: int, blocks, tags, m: int):
    mod = blocks[0].vector.modulus
    arr = np.stack([b.vector.values for b in blocks])
    t = np.array([tg.t.value for tg in tags], dtype=np.uint64)
    Path(path).write_bytes(_header(KIND_SERVER, mod.q, (len(blocks), arr.shape[1], server_id, m))
                           + _elements(arr) + _elements(t))


def read_server(path: Path):
    """Returns (server_id, blocks, tags)."""
    mod, (d, c, u, m), body = _read(path, KIND_SERVER)
    if d < 1 or m < 1 or m >= c:
        raise FormatError(f"{path}: inconsistent dims")
    arr, body = _take_elements(body, d * c, mod, path)
    t, body = _take_elements(body, d, mod, path)
    _done(body, path)
    arr = arr.reshape(d, c)
    blocks = tuple(CodedBlock(FieldVector(row, mod), m, u, v)
                   for v, row in enumerate(arr, start=1))
    tags = tuple(TagValue(FieldElement(int(x), mod)) for x in t)
    return u, blocks, tags


# -- byte packing ------------------------------------------------------------

def bytes_per_element(q: int) -> int:
    return (q.bit_length() - 1) // 8


def pack_bytes(data: bytes, mod: FieldModulus, m: int) -> SourceFile:
    """Split ``data`` into m blocks of field elements, bpe big-endian bytes each, zero-padded."""
    bpe = bytes_per_element(mod.q)
    if bpe < 1:
        raise FormatError(f"q={mod.q} cannot hold a whole byte per element")
    n_elems = max(1, -(-len(data) // bpe))
    xi = -(-n_elems // m)
    padded = data.ljust(m * xi * bpe, b"\x00")
    raw = np.frombuffer(padded, dtype=np.uint8).reshape(m * xi, bpe).astype(np.uint64)
    vals = np.zeros(m * xi, dtype=np.uint64)
    for j in range(bpe):
        vals = (vals << np.uint64(8)) | raw[:, j]
    vals = vals.reshape(m, xi)
    return SourceFile(tuple(FieldVector(r, mod) for r in vals))


def unpack_bytes(f: SourceFile, length: int) -> bytes:
    bpe = bytes_per_element(f.modulus.q)
    vals = np.concatenate([b.values for b in f.blocks])
    if (vals >> np.uint64(8 * bpe)).any():
        raise FormatError("element exceeds the packing width")
    out = np.empty((vals.size, bpe), dtype=np.uint8)
    for j in range(bpe - 1, -1, -1):
        out[:, j] = (vals & np.uint64(0xFF)).astype(np.uint8)
        vals = vals >> np.uint64(8)
    data = out.tobytes()
    if length > len(data):
        raise FormatError("recorded length exceeds decoded payload")
    return data[:length]


# -- manifest ----------------------------------------------------------------

@dataclass
class Manifest:
    version: int
    q: int
    xi: int
    m: int
    seed: int
    file_length: int
    n: int = 0
    d: int = 0
    digests: dict = None

    def __post_init__(self):
        if self.digests is None:
            self.digests = {}

    def dumps(self) -> str:
        lines = [f"format_version={self.version}", f"q={self.q}", f"xi={self.xi}",
                 f"m={self.m}", f"n={self.n}", f"d={self.d}", f"seed={self.seed}",
                 f"file_length={self.file_length}",
                 f"bytes_per_element={bytes_per_element(self.q)}"]
        lines += [f"sha256.{name}={h}" for name, h in sorted(self.digests.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Manifest:
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"manifest line without '=': {line!r}")
            k, v = line.split("=", 1)
            kv[k] = v
        try:
            man = cls(int(kv["format_version"]), int(kv["q"]), int(kv["xi"]), int(kv["m"]),
                      int(kv["seed"]), int(kv["file_length"]), int(kv.get("n", 0)),
                      int(kv.get("d", 0)))
        except (KeyError, ValueError) as exc:
            raise FormatError(f"malformed manifest: {exc}") from None
        man.digests = {k[len("sha256."):]: v for k, v in kv.items() if k.startswith("sha256.")}
        return man

    def save(self, state_dir: Path):
        (Path(state_dir) / MANIFEST).write_text(self.dumps())

    @classmethod
    def load(cls, state_dir: Path) -> Manifest:
        path = Path(state_dir) / MANIFEST
        if not path.is_file():
            raise FormatError(f"no manifest in {state_dir}")
        return cls.loads(path.read_text())

    def check_digest(self, state_dir: Path, name: str):
        want = self.digests.get(name)
        if want is None:
            raise FormatError(f"manifest has no digest for {name}")
        path = Path(state_dir) / name
        if not path.is_file():
            raise FormatError(f"missing artifact {name}")
        if sha256_file(path) != want:
            raise FormatError(f"{name} does not match its manifest digest")
