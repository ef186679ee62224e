"""Single-process simulator of delegated storage auditing with InterCW tags.

A trusted client network-codes its file, tags every coded block with

    t_uv = c_uv . k1 + f_k2(u || v)

and spreads the blocks over n untrusted servers (d slots each). A third-party
verifier holding only (k1'', k2) challenges a server with coefficients beta
and checks the aggregated response

    t_S == c_S . k1'' + sum_v beta_v f_k2(u || v)

Adversaries here only ever touch transcript-visible data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels, mac, prf
from .field import DEFAULT_Q, FieldElement, FieldModulus, sample_array, sample_uniform
from .linalg import FieldMatrix, FieldVector, linear_combination, rank
from .mac import KeySet, SchemeId, TagValue, VerifierKeys
from .netcode import AugmentedBlock, CodedBlock, SourceFile, augment, encode
from .rng import SeededRng


class AuditError(ValueError):
    pass


def _randbelow(rng: SeededRng, n: int) -> int:
    bound = (1 << 64) // n * n
    while True:
        x = rng.next_u64()
        if x < bound:
            return x % n


# -- transcript --------------------------------------------------------------

EVENT_KINDS = ("Transmit", "Capture", "Drop", "Replay", "Corrupt",
               "ChallengeIssued", "ResponseReceived", "VerifyOutcome")


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    scheme: str
    outcome: str = "-"
    detail: tuple[tuple[str, str], ...] = ()

    def to_line(self) -> str:
        extra = "".join(f" {k}={v}" for k, v in self.detail)
        return f"seq={self.seq:04d} kind={self.kind} scheme={self.scheme}{extra} outcome={self.outcome}"


@dataclass
class Transcript:
    events: list[Event] = field(default_factory=list)

    def record(self, kind: str, scheme: str, outcome: str = "-", **detail) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        ev = Event(len(self.events) + 1, kind, str(scheme),
                   outcome, tuple((k, str(v)) for k, v in detail.items()))
        self.events.append(ev)
        return ev

    def outcomes(self) -> list[str]:
        return [e.outcome for e in self.events if e.kind == "VerifyOutcome"]

    @property
    def final_outcome(self) -> Optional[str]:
        out = self.outcomes()
        return out[-1] if out else None

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)


def _verdict(ok: bool) -> str:
    return "ACCEPT" if ok else "REJECT"


# -- protocol state ----------------------------------------------------------

@dataclass(frozen=True)
class ServerState:
    server_id: int
    blocks: tuple[CodedBlock, ...]
    tags: tuple[TagValue, ...]

    def __post_init__(self):
        if not self.blocks or len(self.blocks) != len(self.tags):
            raise AuditError("a server holds d >= 1 (block, tag) pairs")

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def slots(self) -> list[tuple[CodedBlock, TagValue]]:
        return list(zip(self.blocks, self.tags))


@dataclass(frozen=True)
class Challenge:
    server_id: int
    coefficients: tuple[FieldElement, ...]

    def __post_init__(self):
        if not any(c.value for c in self.coefficients):
            raise AuditError("all-zero challenge audits nothing")


@dataclass(frozen=True)
class AuditResponse:
    combined_block: FieldVector
    combined_tag: FieldElement


class Deployment(NamedTuple):
    client: KeySet
    verifier: VerifierKeys
    servers: list[ServerState]


def tag_block(vector: FieldVector, client: KeySet, u: int, v: int) -> TagValue:
    if client.prf_key is None:
        raise mac.MissingKeyError("storage tagging needs k2")
    return TagValue(vector.dot(client.k1) + prf.eval_index_pair(client.prf_key, u, v, vector.modulus))


def setup(f: SourceFile, n: int, d: int, rng: SeededRng) -> Deployment:
    if n < 1 or d < 1:
        raise AuditError("need n >= 1 servers and d >= 1 slots")
    augmented = augment(f)
    client = mac.intercw_keygen([w.vector for w in augmented], rng)
    servers = distribute(augmented, client, n, d, rng)
    return Deployment(client, client.verifier_view(), servers)


def distribute(augmented: Sequence[AugmentedBlock], client: KeySet, n: int, d: int,
               rng: SeededRng) -> list[ServerState]:
    """Fresh coded block and tag for every (server u, slot v)."""
    servers = []
    for u in range(1, n + 1):
        blocks, tags = [], []
        for v in range(1, d + 1):
            c = encode(augmented, rng, server=u, slot=v)
            blocks.append(c)
            tags.append(tag_block(c.vector, client, u, v))
        servers.append(ServerState(u, tuple(blocks), tuple(tags)))
    return servers


def issue_challenge(server_id: int, d: int, modulus: FieldModulus, rng: SeededRng) -> Challenge:
    while True:
        beta = tuple(sample_uniform(modulus, rng) for _ in range(d))
        if any(b.value for b in beta):
            return Challenge(server_id, beta)


def respond(server: ServerState, ch: Challenge) -> AuditResponse:
    if len(ch.coefficients) != server.d:
        raise AuditError(f"{len(ch.coefficients)} coefficients for {server.d} slots")
    beta = list(ch.coefficients)
    block = linear_combination(beta, [b.vector for b in server.blocks])
    t = beta[0].modulus.zero
    for bv, tg in zip(beta, server.tags):
        t = t + bv * tg.t
    return AuditResponse(block, t)


def expected_tag(combined_block: FieldVector, ch: Challenge, vk: VerifierKeys) -> FieldElement:
    mod = vk.modulus
    acc = combined_block.dot(vk.k1_verifier)
    for v, b in enumerate(ch.coefficients, start=1):
        if b.value:
            acc = acc + b * prf.eval_index_pair(vk.prf_key, ch.server_id, v, mod)
    return acc


def verify_server(resp: AuditResponse, ch: Challenge, vk: VerifierKeys) -> bool:
    if resp.combined_block.dim != vk.k1_verifier.dim or resp.combined_block.modulus != vk.modulus:
        return False
    return resp.combined_tag == expected_tag(resp.combined_block, ch, vk)


def audit_server(server: ServerState, vk: VerifierKeys, rng: SeededRng,
                 transcript: Optional[Transcript] = None) -> bool:
    """One challenge-response round, optionally logged."""
    ch = issue_challenge(server.server_id, server.d, vk.modulus, rng)
    if transcript is not None:
        transcript.record("ChallengeIssued", SchemeId.INTER_CW.value, server=server.server_id,
                          beta=",".join(str(b.value) for b in ch.coefficients))
    resp = respond(server, ch)
    if transcript is not None:
        transcript.record("ResponseReceived", SchemeId.INTER_CW.value, server=server.server_id,
                          tag=resp.combined_tag.value)
    ok = verify_server(resp, ch, vk)
    if transcript is not None:
        transcript.record("VerifyOutcome", SchemeId.INTER_CW.value, _verdict(ok),
                          server=server.server_id)
    return ok


def challenge_outcomes(server: ServerState, vk: VerifierKeys, trials: int,
                       rng: SeededRng) -> np.ndarray:
    """Accept/reject verdicts for ``trials`` independent uniform nonzero challenges.

    Batched twin of issue_challenge/respond/verify_server: one matrix
    product per side instead of a Python loop per trial.
    """
    mod = vk.modulus
    q = mod.q
    d = server.d
    beta = sample_array(mod, (trials, d), rng)
    zero_rows = ~beta.any(axis=1)
    while zero_rows.any():
        beta[zero_rows] = sample_array(mod, (int(zero_rows.sum()), d), rng)
        zero_rows = ~beta.any(axis=1)
    blocks = np.stack([b.vector.values for b in server.blocks])
    tags = np.array([t.t.value for t in server.tags], dtype=np.uint64)
    prf_terms = np.array([prf.eval_index_pair(vk.prf_key, server.server_id, v, mod).value
                          for v in range(1, d + 1)], dtype=np.uint64)
    combined = kernels.matmul_mod(beta, blocks, q)
    got = kernels.matvec_mod(beta, tags, q)
    want = kernels.addmod(kernels.matvec_mod(combined, vk.k1_verifier.values, q),
                          kernels.matvec_mod(beta, prf_terms, q), q)
    return got == want


def detection_rate(server: ServerState, vk: VerifierKeys, trials: int, rng: SeededRng) -> float:
    """Fraction of uniform nonzero challenges this server fails."""
    return 1.0 - float(np.count_nonzero(challenge_outcomes(server, vk, trials, rng))) / trials


# -- adversaries -------------------------------------------------------------

def adversary_corrupt(server: ServerState, slot: int, rng: SeededRng, target: str = "block",
                      coordinate: Optional[int] = None) -> ServerState:
    """Overwrite one stored field element (block coordinate or tag) with a different value."""
    if not 1 <= slot <= server.d:
        raise AuditError(f"slot {slot} outside 1..{server.d}")
    block, tg = server.blocks[slot - 1], server.tags[slot - 1]
    mod = block.vector.modulus

    def fresh(old: int) -> int:
        x = _randbelow(rng, mod.q - 1)
        return x if x < old else x + 1

    if target == "block":
        dim = block.vector.dim
        j = _randbelow(rng, dim) if coordinate is None else coordinate
        if not 0 <= j < dim:
            raise AuditError(f"coordinate {j} outside 0..{dim - 1}")
        vals = block.vector.values.copy()
        vals[j] = fresh(int(vals[j]))
        new_block = replace(block, vector=FieldVector(vals, mod))
        blocks = server.blocks[:slot - 1] + (new_block,) + server.blocks[slot:]
        return replace(server, blocks=blocks)
    if target == "tag":
        new_tag = TagValue(FieldElement(fresh(tg.t.value), mod), tg.nonce)
        return replace(server, tags=server.tags[:slot - 1] + (new_tag,) + server.tags[slot:])
    raise AuditError(f"unknown corruption target {target!r}")


def adversary_replay(scheme: SchemeId, rng: SeededRng, modulus: Optional[FieldModulus] = None,
                     dim: int = 4, n_messages: int = 2) -> Transcript:
    """Two transmissions; the attacker drops the second and replays the first.

    Nonces reach the receiver out of band, so the receiver checks the
    replayed pair against the second transmission's nonce.
    """
    scheme = SchemeId(scheme)
    mod = modulus or FieldModulus(DEFAULT_Q)
    if n_messages < 2 or n_messages >= dim:
        raise AuditError("need 2 <= messages < dim so the orthogonal mask exists")
    while True:
        messages = [FieldVector.random(mod, dim, rng) for _ in range(n_messages)]
        if rank(FieldMatrix.from_rows(messages)) == n_messages:
            break
    keys = mac.keygen(scheme, messages, rng)
    tr = Transcript()
    s = scheme.value

    m1 = messages[0]
    t1 = mac.tag(scheme, m1, keys, rng)
    tr.record("Transmit", s, round=1, tag=t1.t.value, **_nonce_detail(t1.nonce))
    tr.record("Capture", s, round=1)
    ok1 = mac.verify(scheme, m1, t1, keys, expected_nonce=t1.nonce)
    tr.record("VerifyOutcome", s, _verdict(ok1), round=1, tag=t1.t.value,
              **_nonce_detail(t1.nonce, "expected_nonce"))

    m2 = messages[1]
    t2 = mac.tag(scheme, m2, keys, rng)
    tr.record("Transmit", s, round=2, tag=t2.t.value, **_nonce_detail(t2.nonce))
    tr.record("Drop", s, round=2)
    tr.record("Replay", s, round=2, replayed_round=1, tag=t1.t.value)
    ok2 = mac.verify(scheme, m1, t1, keys, expected_nonce=t2.nonce)
    tr.record("VerifyOutcome", s, _verdict(ok2), round=2, tag=t1.t.value,
              **_nonce_detail(t2.nonce, "expected_nonce"))
    return tr


def _nonce_detail(nonce: Optional[bytes], key: str = "nonce") -> dict:
    return {key: nonce.hex()} if nonce is not None else {}


# -- key hiding --------------------------------------------------------------

@dataclass(frozen=True)
class KeySearchResult:
    checked: int
    consistent: int
    true_key_consistent: Optional[bool] = None


def key_search_experiment(vk: VerifierKeys, budget: int, true_keys: Optional[KeySet] = None,
                          observations: Sequence[tuple[FieldVector, FieldElement, int, int]] = (),
                          ) -> KeySearchResult:
    """Count candidate tagging keys k1 consistent with what the verifier has seen.

    Each candidate k1 pairs with k1' = k1'' - k1, so the key material alone
    rules nothing out. An observation (block, tag, u, v) adds the linear
    constraint block . k1 = tag - f_k2(u || v).
    """
    mod = vk.modulus
    q, c = mod.q, vk.k1_verifier.dim
    space = q ** c
    if budget < 0 or budget > space:
        raise AuditError(f"budget {budget} outside 0..{space}")
    if budget == 0:
        return KeySearchResult(0, 0, None)
    idx = np.arange(budget, dtype=np.int64)
    digits = np.empty((budget, c), dtype=np.uint64)
    for j in range(c - 1, -1, -1):
        digits[:, j] = idx % q
        idx //= q
    ok = np.ones(budget, dtype=bool)
    for vec, t, u, v in observations:
        target = (t - prf.eval_index_pair(vk.prf_key, u, v, mod)).value
        ok &= kernels.matvec_mod(digits, vec.values, q) == np.uint64(target)
    true_ok = None
    if true_keys is not None:
        pos = 0
        for x in true_keys.k1.ints():
            pos = pos * q + x
        true_ok = bool(ok[pos]) if pos < budget else None
    return KeySearchResult(budget, int(ok.sum()), true_ok)


def enumerate_vectors(modulus: FieldModulus, dim: int):
    """Every vector of GF(q)^dim in lexicographic order; desk-scale only."""
    for t in itertools.product(range(modulus.q), repeat=dim):
        yield FieldVector.of(modulus, t)
