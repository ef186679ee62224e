"""Explicit, seedable randomness source shared by every sampling routine."""

import numpy as np


class SeededRng:
    """64-bit word stream from PCG64; single owner, never global.

    Every consumer draws whole 64-bit words, so a given seed pins every
    key, coefficient, nonce and challenge in a run.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self._bitgen = np.random.PCG64(np.random.SeedSequence(self.seed))

    def next_u64(self) -> int:
        return int(self._bitgen.random_raw())

    def u64_array(self, n: int) -> np.ndarray:
        return np.asarray(self._bitgen.random_raw(n), dtype=np.uint64)

    def bytes(self, n: int) -> bytes:
        words = self.u64_array((n + 7) // 8)
        return words.astype(">u8").tobytes()[:n]

    def spawn(self, index: int) -> "SeededRng":
        """Independent child stream derived from (seed, index)."""
        child = SeededRng.__new__(SeededRng)
        child.seed = self.seed
        child._bitgen = np.random.PCG64(np.random.SeedSequence([self.seed, int(index)]))
        return child
