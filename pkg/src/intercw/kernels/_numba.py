"""numba-compiled modular kernels; same contracts as the numpy backend.

Every scalar is kept in uint64: mixing uint64 with int64 in numba promotes
to float64, which would silently destroy exactness.
"""

import numpy as np
from numba import njit

_MASK32 = np.uint64(0xFFFFFFFF)
_U32 = np.uint64(32)
_ZERO = np.uint64(0)
_ONE = np.uint64(1)


@njit(cache=True)
def _bitlen(q):
    n = 0
    while q:
        q >>= _ONE
        n += 1
    return n


@njit(cache=True)
def _shl_mod(x, bits, q, step):
    while bits > 0:
        s = step if step < bits else bits
        x = (x << np.uint64(s)) % q
        bits -= s
    return x


@njit(cache=True)
def _mul(a, b, q, step):
    if q <= _MASK32:
        return (a * b) % q
    a1 = a >> _U32
    a0 = a & _MASK32
    b1 = b >> _U32
    b0 = b & _MASK32
    r = _shl_mod((a1 * b1) % q, 32, q, step)
    r = (r + (a1 * b0 + a0 * b1) % q) % q
    r = _shl_mod(r, 32, q, step)
    return (r + (a0 * b0) % q) % q


@njit(cache=True)
def _pow(a, e, q, step):
    out = _ONE
    base = a % q
    while e:
        if e & _ONE:
            out = _mul(out, base, q, step)
        base = _mul(base, base, q, step)
        e >>= _ONE
    return out


@njit(cache=True)
def _mulmod_flat(a, b, q):
    step = 64 - _bitlen(q)
    out = np.empty_like(a)
    for i in range(a.size):
        out[i] = _mul(a[i], b[i], q, step)
    return out


def mulmod(a, b, q):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
    shape = a.shape
    out = _mulmod_flat(np.ascontiguousarray(a).ravel(), np.ascontiguousarray(b).ravel(), np.uint64(q))
    return out.reshape(shape)


def addmod(a, b, q):
    q = np.uint64(q)
    return (np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)) % q


def submod(a, b, q):
    q = np.uint64(q)
    return (np.asarray(a, dtype=np.uint64) + (q - np.asarray(b, dtype=np.uint64))) % q


@njit(cache=True)
def _powmod_flat(a, e, q):
    step = 64 - _bitlen(q)
    out = np.empty_like(a)
    for i in range(a.size):
        out[i] = _pow(a[i], e, q, step)
    return out


def powmod(a, e, q):
    a = np.asarray(a, dtype=np.uint64)
    out = _powmod_flat(np.ascontiguousarray(a).ravel(), np.uint64(e), np.uint64(q))
    return out.reshape(a.shape)


@njit(cache=True)
def _matmul(a, b, q):
    step = 64 - _bitlen(q)
    n, k = a.shape
    c = b.shape[1]
    out = np.zeros((n, c), dtype=np.uint64)
    for i in range(n):
        for j in range(k):
            aij = a[i, j]
            if aij == _ZERO:
                continue
            for l in range(c):
                out[i, l] = (out[i, l] + _mul(aij, b[j, l], q, step)) % q
    return out


def matmul_mod(a, b, q):
    return _matmul(np.ascontiguousarray(a, dtype=np.uint64),
                   np.ascontiguousarray(b, dtype=np.uint64), np.uint64(q))


def matvec_mod(a, x, q):
    x = np.ascontiguousarray(x, dtype=np.uint64).reshape(-1, 1)
    return matmul_mod(a, x, q)[:, 0]


def summod(x, q, axis=-1):
    x = np.moveaxis(np.asarray(x, dtype=np.uint64), axis, -1)
    flat = np.ascontiguousarray(x).reshape(-1, x.shape[-1])
    ones = np.ones(flat.shape[1], dtype=np.uint64)
    return matvec_mod(flat, ones, q).reshape(x.shape[:-1])


@njit(cache=True)
def _rref_inplace(r, q, pivots):
    """Reduce ``r`` in place; fills ``pivots`` and returns the rank."""
    step = 64 - _bitlen(q)
    n_rows, n_cols = r.shape
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        p = -1
        for i in range(rank, n_rows):
            if r[i, col] != _ZERO:
                p = i
                break
        if p < 0:
            continue
        if p != rank:
            for l in range(n_cols):
                tmp = r[rank, l]
                r[rank, l] = r[p, l]
                r[p, l] = tmp
        inv = _pow(r[rank, col], q - np.uint64(2), q, step)
        for l in range(n_cols):
            r[rank, l] = _mul(r[rank, l], inv, q, step)
        for i in range(n_rows):
            if i == rank:
                continue
            f = r[i, col]
            if f == _ZERO:
                continue
            for l in range(n_cols):
                r[i, l] = (r[i, l] + q - _mul(f, r[rank, l], q, step)) % q
        pivots[rank] = col
        rank += 1
    return rank


def rref_mod(a, q):
    r = np.array(a, dtype=np.uint64, copy=True, order="C")
    pivots = np.empty(min(r.shape), dtype=np.int64)
    rank = _rref_inplace(r, np.uint64(q), pivots)
    return r, rank, pivots[:rank].copy()


@njit(cache=True)
def _batch_rank(a, q):
    batch = a.shape[0]
    ranks = np.empty(batch, dtype=np.int64)
    pivots = np.empty(min(a.shape[1], a.shape[2]), dtype=np.int64)
    for b in range(batch):
        ranks[b] = _rref_inplace(a[b], q, pivots)
    return ranks


def batch_rank_mod(a, q):
    return _batch_rank(np.array(a, dtype=np.uint64, copy=True, order="C"), np.uint64(q))
