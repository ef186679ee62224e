"""Both kernel backends against Python big-int arithmetic."""

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intercw import kernels
from intercw.kernels import _numba, _numpy

import oracles

BACKENDS = [pytest.param(_numpy, id="numpy"), pytest.param(_numba, id="numba")]
MODULI = [13, 65521, 4294967311, (1 << 61) - 1, (1 << 62) - 57]


def test_backend_flag_values():
    assert kernels.BACKEND in ("numba", "numpy")


def test_backend_flag_forces_numpy(monkeypatch):
    import importlib

    monkeypatch.setenv("INTERCW_DISABLE_NUMBA", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "numpy"
        assert mod.mulmod is _numpy.mulmod
    finally:
        monkeypatch.delenv("INTERCW_DISABLE_NUMBA")
        importlib.reload(kernels)


@pytest.mark.parametrize("be", BACKENDS)
@pytest.mark.parametrize("q", MODULI)
def test_elementwise(be, q):
    r = random.Random(q)
    a = [r.randrange(q) for _ in range(500)] + [q - 1, 0, 1]
    b = [r.randrange(q) for _ in range(500)] + [q - 1, q - 1, 0]
    A, B = np.array(a, np.uint64), np.array(b, np.uint64)
    assert be.mulmod(A, B, q).tolist() == [x * y % q for x, y in zip(a, b)]
    assert be.addmod(A, B, q).tolist() == [(x + y) % q for x, y in zip(a, b)]
    assert be.submod(A, B, q).tolist() == [(x - y) % q for x, y in zip(a, b)]
    assert be.powmod(A[:40], q - 2, q).tolist() == [pow(x, q - 2, q) for x in a[:40]]


@pytest.mark.parametrize("be", BACKENDS)
@pytest.mark.parametrize("q", MODULI)
def test_products_and_sums(be, q):
    r = random.Random(q + 1)
    a = [[r.randrange(q) for _ in range(9)] for _ in range(4)]
    b = [[r.randrange(q) for _ in range(3)] for _ in range(9)]
    A, B = np.array(a, np.uint64), np.array(b, np.uint64)
    assert be.matmul_mod(A, B, q).tolist() == oracles.matmul(a, b, q)
    x = [row[0] for row in b]
    assert be.matvec_mod(A, np.array(x, np.uint64), q).tolist() == [oracles.dot(row, x, q) for row in a]
    assert be.summod(A, q).tolist() == [sum(row) % q for row in a]
    assert be.summod(A, q, axis=0).tolist() == [sum(col) % q for col in zip(*a)]


@pytest.mark.parametrize("q", MODULI)
def test_rref_backends_agree(q):
    r = random.Random(q + 2)
    for shape in [(3, 5), (5, 3), (4, 4)]:
        a = np.array([[r.randrange(q) if r.random() < 0.7 else 0 for _ in range(shape[1])]
                      for _ in range(shape[0])], np.uint64)
        x, y = _numpy.rref_mod(a, q), _numba.rref_mod(a, q)
        assert np.array_equal(x[0], y[0])
        assert x[1] == y[1]
        assert x[2].tolist() == y[2].tolist()


@pytest.mark.parametrize("be", BACKENDS)
def test_rank_matches_span_enumeration(be):
    r = random.Random(9)
    for _ in range(60):
        rows, cols = r.randint(1, 3), r.randint(1, 3)
        a = [[r.randrange(3) for _ in range(cols)] for _ in range(rows)]
        assert be.rref_mod(np.array(a, np.uint64), 13)[1] == oracles.rank_by_span(a, 13)


@pytest.mark.parametrize("be", BACKENDS)
def test_batch_rank_matches_single(be):
    r = random.Random(4)
    stack = np.array([[[r.randrange(3) for _ in range(3)] for _ in range(3)]
                      for _ in range(400)], np.uint64)
    single = [_numpy.rref_mod(s, 13)[1] for s in stack]
    assert be.batch_rank_mod(stack, 13).tolist() == single


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, (1 << 62) - 58), min_size=1, max_size=20),
       st.sampled_from(MODULI))
def test_mulmod_property(vals, q):
    a = np.array([v % q for v in vals], np.uint64)
    b = a[::-1].copy()
    expect = [int(x) * int(y) % q for x, y in zip(a, b)]
    assert _numpy.mulmod(a, b, q).tolist() == expect
    assert _numba.mulmod(a, b, q).tolist() == expect
