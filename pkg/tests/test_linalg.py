import random

import pytest
from hypothesis import given, settings, strategies as st

from intercw.field import FieldModulus, MERSENNE_61, ModulusMismatchError, sample_array
from intercw.linalg import (DimensionError, FieldMatrix, FieldVector, SingularMatrixError, dot,
                            null_space_basis, rank, rref, scalar_mul, solve, vec_add)
from intercw.rng import SeededRng

import oracles


def V(mod, *xs):
    return FieldVector.of(mod, xs)


def test_dot_examples(q13):
    assert dot(V(q13, 2, 3), V(q13, 4, 5)).value == 10
    assert dot(V(q13, 0, 0), V(q13, 7, 11)).value == 0
    assert dot(V(q13, 3, 1), V(q13, 1, 10)).value == 0


def test_dot_errors(q13):
    with pytest.raises(DimensionError):
        dot(V(q13, 1, 2), V(q13, 1, 2, 3))
    with pytest.raises(ModulusMismatchError):
        dot(V(q13, 1, 2), V(FieldModulus(17), 1, 2))


def test_linear_combination_example(q13):
    out = vec_add(scalar_mul(q13(2), V(q13, 1, 2, 1, 0)), scalar_mul(q13(5), V(q13, 3, 4, 0, 1)))
    assert out.ints() == (4, 11, 2, 5)
    a = V(q13, 6, 7, 8)
    assert scalar_mul(q13.one, a) == a
    assert vec_add(a, FieldVector.zeros(q13, 3)) == a


def test_vectors_are_immutable(q13):
    v = V(q13, 1, 2)
    with pytest.raises(ValueError):
        v.values[0] = 5


def test_rref_examples(q13):
    eye = FieldMatrix.identity(q13, 3)
    red, r, piv = rref(eye)
    assert red == eye and r == 3 and piv == (0, 1, 2)

    m = FieldMatrix.of(q13, [[1, 2, 1, 0], [3, 4, 0, 1]])
    red, r, piv = rref(m)
    assert r == 2 and piv == (0, 1)
    # hand reduction: R2 <- (R2 - 3 R1) * 11^-1, then R1 <- R1 - 2 R2
    assert red.values.tolist() == [[1, 0, 11, 1], [0, 1, 8, 6]]
    assert oracles.rank_by_span([[1, 2, 1, 0], [3, 4, 0, 1]], 13) == 2

    zero = FieldMatrix.of(q13, [[0, 0], [0, 0]])
    assert rref(zero)[1:] == (0, ())


def test_rref_pivot_rule_first_nonzero_row(q13):
    m = FieldMatrix.of(q13, [[0, 1], [2, 0], [3, 0]])
    red, r, piv = rref(m)
    assert piv == (0, 1)
    assert red.values.tolist() == [[1, 0], [0, 1], [0, 0]]


def test_null_space_single_row(q13):
    basis = null_space_basis(FieldMatrix.of(q13, [[3, 1]]))
    # free column 1 set to 1, pivot column solved from u0 = -9 = 4
    assert [b.ints() for b in basis] == [(4, 1)]
    assert set(map(tuple, [b.ints() for b in basis])) <= oracles.null_space_by_enumeration([[3, 1]], 13)


def test_null_space_two_rows_against_enumeration(q13):
    rows = [[1, 2, 1, 0], [3, 4, 0, 1]]
    basis = null_space_basis(FieldMatrix.of(q13, rows))
    assert [b.ints() for b in basis] == [(2, 5, 1, 0), (12, 7, 0, 1)]
    assert oracles.span_by_enumeration([b.ints() for b in basis], 13) == \
        oracles.null_space_by_enumeration(rows, 13)


def test_null_space_identity_empty(q13):
    assert null_space_basis(FieldMatrix.identity(q13, 4)) == []


def test_null_space_matches_enumeration_small_dims(q13):
    r = random.Random(2)
    for _ in range(40):
        rows_n, cols = r.randint(1, 3), r.randint(1, 3)
        rows = [[r.randrange(13) for _ in range(cols)] for _ in range(rows_n)]
        m = FieldMatrix.of(q13, rows)
        basis = null_space_basis(m)
        assert len(basis) == cols - rank(m)
        expect = oracles.null_space_by_enumeration(rows, 13)
        if basis:
            assert oracles.span_by_enumeration([b.ints() for b in basis], 13) == expect
        else:
            assert expect == {(0,) * cols}


def test_solve_identity(q13):
    rhs = [V(q13, 1, 2, 3), V(q13, 4, 5, 6)]
    assert solve(FieldMatrix.identity(q13, 2), rhs) == rhs


def test_solve_recovers_augmented_blocks(q13):
    w = [V(q13, 1, 2, 1, 0), V(q13, 3, 4, 0, 1)]
    coeffs = FieldMatrix.of(q13, [[2, 5], [1, 1]])
    coded = FieldMatrix.from_rows(w)
    coded = (coeffs @ coded).rows
    assert [c.ints() for c in coded] == [(4, 11, 2, 5), (4, 6, 1, 1)]
    assert solve(coeffs, coded) == w


def test_solve_singular(q13):
    with pytest.raises(SingularMatrixError):
        solve(FieldMatrix.of(q13, [[1, 2], [1, 2]]), [V(q13, 1), V(q13, 2)])
    with pytest.raises(SingularMatrixError):
        solve(FieldMatrix.of(q13, [[1, 2], [2, 4]]), [V(q13, 1), V(q13, 2)])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**32), st.sampled_from([13, MERSENNE_61]))
def test_rref_idempotent_and_rank_nullity(rows, cols, seed, q):
    mod = FieldModulus(q)
    m = FieldMatrix(sample_array(mod, (rows, cols), SeededRng(seed)), mod)
    red, r, piv = rref(m)
    assert rref(red) == (red, r, piv)
    basis = null_space_basis(m)
    assert len(basis) == cols - r
    for b in basis:
        assert (m @ b).is_zero()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32))
def test_solve_inverts_product(n, width, seed):
    mod = FieldModulus(MERSENNE_61)
    rng = SeededRng(seed)
    a = FieldMatrix.from_rows([FieldVector.random(mod, n, rng) for _ in range(n)])
    if rank(a) < n:
        return
    x = [FieldVector.random(mod, width, rng) for _ in range(n)]
    b = (a @ FieldMatrix.from_rows(x)).rows
    assert solve(a, b) == x
