"""Pure-numpy modular kernels over uint64 arrays, for moduli q < 2**62."""

import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_U32 = np.uint64(32)


def _shl_mod(x, bits, q):
    # x < q < 2**62, so shifting by (64 - bitlen(q)) never overflows.
    step = 64 - int(q).bit_length()
    while bits > 0:
        s = min(step, bits)
        x = (x << np.uint64(s)) % q
        bits -= s
    return x


def mulmod(a, b, q):
    q = np.uint64(q)
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    if q <= _MASK32:
        return (a * b) % q
    a1, a0 = a >> _U32, a & _MASK32
    b1, b0 = b >> _U32, b & _MASK32
    hi = a1 * b1
    mid = a1 * b0 + a0 * b1
    lo = a0 * b0
    r = _shl_mod(hi % q, 32, q)
    r = (r + mid % q) % q
    r = _shl_mod(r, 32, q)
    return (r + lo % q) % q


def addmod(a, b, q):
    q = np.uint64(q)
    return (np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)) % q


def submod(a, b, q):
    q = np.uint64(q)
    return (np.asarray(a, dtype=np.uint64) + (q - np.asarray(b, dtype=np.uint64))) % q


def powmod(a, e, q):
    q = np.uint64(q)
    base = np.asarray(a, dtype=np.uint64) % q
    out = np.ones_like(base)
    e = int(e)
    while e:
        if e & 1:
            out = mulmod(out, base, q)
        base = mulmod(base, base, q)
        e >>= 1
    return out


def summod(x, q, axis=-1):
    """Sum reduced residues along ``axis`` without wrapping uint64."""
    q = np.uint64(q)
    x = np.moveaxis(np.asarray(x, dtype=np.uint64), axis, -1)
    n = x.shape[-1]
    chunk = max(1, (2**64 - 1) // int(q) - 1)
    acc = np.zeros(x.shape[:-1], dtype=np.uint64)
    for i in range(0, n, chunk):
        acc = (acc + x[..., i:i + chunk].sum(axis=-1, dtype=np.uint64)) % q
    return acc


def matvec_mod(a, x, q):
    return summod(mulmod(a, x[None, :], q), q, axis=-1)


def matmul_mod(a, b, q):
    return summod(mulmod(a[:, :, None], b[None, :, :], q), q, axis=1)


def rref_mod(a, q):
    q = np.uint64(q)
    r_mat = np.array(a, dtype=np.uint64, copy=True)
    n_rows, n_cols = r_mat.shape
    pivots = []
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        nz = np.flatnonzero(r_mat[rank:, col])
        if nz.size == 0:
            continue
        p = rank + nz[0]
        if p != rank:
            r_mat[[rank, p]] = r_mat[[p, rank]]
        inv = powmod(r_mat[rank, col], int(q) - 2, q)
        r_mat[rank] = mulmod(r_mat[rank], inv, q)
        factors = r_mat[:, col].copy()
        factors[rank] = 0
        r_mat = submod(r_mat, mulmod(factors[:, None], r_mat[rank][None, :], q), q)
        pivots.append(col)
        rank += 1
    return r_mat, rank, np.asarray(pivots, dtype=np.int64)


def batch_rank_mod(a, q):
    """Rank of every matrix in a (batch, rows, cols) stack."""
    q = np.uint64(q)
    r_mat = np.array(a, dtype=np.uint64, copy=True)
    batch, n_rows, n_cols = r_mat.shape
    rank = np.zeros(batch, dtype=np.int64)
    row_idx = np.arange(n_rows)
    all_b = np.arange(batch)
    for col in range(n_cols):
        cand = (r_mat[:, :, col] != 0) & (row_idx[None, :] >= rank[:, None])
        has = cand.any(axis=1) & (rank < n_rows)
        if not has.any():
            continue
        b = all_b[has]
        p = np.argmax(cand[b], axis=1)
        tgt = rank[b]
        pivot_rows = r_mat[b, p].copy()
        r_mat[b, p] = r_mat[b, tgt]
        inv = powmod(pivot_rows[:, col], int(q) - 2, q)
        pivot_rows = mulmod(pivot_rows, inv[:, None], q)
        r_mat[b, tgt] = pivot_rows
        sub = r_mat[b]
        factors = sub[:, :, col].copy()
        factors[np.arange(b.size), tgt] = 0
        sub = submod(sub, mulmod(factors[:, :, None], pivot_rows[:, None, :], q), q)
        r_mat[b] = sub
        rank[b] += 1
    return rank
