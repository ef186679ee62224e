"""Hot modular-arithmetic kernels over uint64 arrays.

The numba backend is used when numba imports cleanly; setting the
environment variable ``INTERCW_DISABLE_NUMBA=1`` (checked at import time)
forces the pure-numpy backend. Both backends are exact for any modulus
q < 2**62 and share one contract:

    mulmod, addmod, submod   elementwise, broadcasting
    powmod(a, e, q)          elementwise a**e mod q
    summod(x, q, axis)       reduction without uint64 wrap-around
    matvec_mod, matmul_mod   dense products
    rref_mod(a, q)           -> (reduced matrix, rank, pivot columns)
    batch_rank_mod(a, q)     ranks of a (batch, rows, cols) stack
"""

import os

from . import _numpy

_FLAG = "INTERCW_DISABLE_NUMBA"


def _select():
    if os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on"):
        return _numpy, "numpy"
    try:
        from . import _numba
    except ImportError:
        return _numpy, "numpy"
    return _numba, "numba"


_backend, BACKEND = _select()

mulmod = _backend.mulmod
addmod = _backend.addmod
submod = _backend.submod
powmod = _backend.powmod
summod = _backend.summod
matvec_mod = _backend.matvec_mod
matmul_mod = _backend.matmul_mod
rref_mod = _backend.rref_mod
batch_rank_mod = _backend.batch_rank_mod

__all__ = [
    "BACKEND", "mulmod", "addmod", "submod", "powmod", "summod",
    "matvec_mod", "matmul_mod", "rref_mod", "batch_rank_mod",
]
