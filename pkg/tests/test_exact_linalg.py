from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import dim_and_vectors, vectors
from flagstab.errors import InputError
from flagstab.exact_linalg import (
    Subspace,
    format_rational,
    intersect,
    kernel,
    member,
    parse_rational,
    rank,
    solve,
    span,
    subspace_sum,
)

F = Fraction


def e(i, n):
    return tuple(F(int(j == i)) for j in range(n))


def test_span_of_nothing_is_zero():
    S = span([], 3)
    assert S.dim == 0 and S.basis == () and S.ambient_dim == 3


def test_span_hand_example():
    S = span([(1, 1, 0), (0, 1, 1), (1, 2, 1)], 3)
    assert S.basis == ((1, 0, -1), (0, 1, 1))


def test_span_of_standard_basis_is_full():
    assert span([e(i, 4) for i in range(4)], 4) == Subspace.full(4)


def test_span_rejects_wrong_length():
    with pytest.raises(InputError):
        span([(1, 2)], 3)


def test_sum_examples():
    e1, e2 = span([e(0, 3)], 3), span([e(1, 3)], 3)
    assert subspace_sum(e1, e2) == span([e(0, 3), e(1, 3)], 3)
    assert subspace_sum(e1, Subspace.zero(3)) == e1
    assert subspace_sum(span([(1, 1)], 2), span([(1, -1)], 2)) == Subspace.full(2)


def test_sum_rejects_ambient_mismatch():
    with pytest.raises(InputError):
        subspace_sum(Subspace.zero(2), Subspace.zero(3))


def test_intersect_examples():
    A = span([e(0, 3), e(1, 3)], 3)
    B = span([e(1, 3), e(2, 3)], 3)
    assert intersect(A, B) == span([e(1, 3)], 3)
    assert intersect(A, Subspace.full(3)) == A
    assert intersect(span([e(0, 3)], 3), span([e(1, 3)], 3)).is_zero()


def test_member_examples():
    A = span([e(0, 3), e(1, 3)], 3)
    assert member((1, 1, 0), A)
    assert member((0, 0, 0), A)
    assert not member(e(2, 3), A)
    with pytest.raises(InputError):
        member((1, 0), A)


def test_kernel_examples():
    assert kernel([e(i, 3) for i in range(3)]).is_zero()
    assert kernel([[0, 0, 0], [0, 0, 0]]) == Subspace.full(3)
    assert kernel([[1, 1, 0]]) == span([(1, -1, 0), (0, 0, 1)], 3)


def test_rationals_reject_floats_and_round_trip():
    assert parse_rational("3/6") == F(1, 2)
    assert format_rational(F(-4, 6)) == "-2/3"
    assert format_rational(F(5)) == "5"
    with pytest.raises(InputError):
        parse_rational(0.5)
    with pytest.raises(InputError):
        parse_rational(True)


def test_from_json_validates_rref():
    good = {"ambient_dim": 3, "basis": [["1", "0", "-1"], ["0", "1", "1"]]}
    assert Subspace.from_json(good) == span([(1, 1, 0), (0, 1, 1)], 3)
    with pytest.raises(InputError):
        Subspace.from_json({"ambient_dim": 2, "basis": [["2", "0"]]})
    with pytest.raises(InputError):
        Subspace.from_json({"ambient_dim": 2, "basis": [["0", "1"], ["1", "0"]]})


def test_solve_sets_free_coefficients_to_zero():
    cols = [(1, 0), (0, 1), (1, 1)]
    assert solve(cols, (2, 3), 2) == [2, 3, 0]
    assert solve([(1, 1)], (1, 0), 2) is None


def _sympy_rref(n, vecs):
    if not vecs:
        return ()
    M, pivots = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in v] for v in vecs]).rref()
    rows = []
    for i in range(len(pivots)):
        rows.append(tuple(F(int(x.p), int(x.q)) for x in M.row(i)))
    return tuple(rows)


@given(dim_and_vectors())
def test_span_matches_sympy_rref(data):
    n, vecs = data
    assert span(vecs, n).basis == _sympy_rref(n, vecs)


@given(dim_and_vectors())
def test_kernel_matches_sympy_nullspace(data):
    n, vecs = data
    if not vecs:
        return
    K = kernel(vecs)
    ns = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in v] for v in vecs]).nullspace()
    oracle = span([[F(int(x.p), int(x.q)) for x in col] for col in ns], n)
    assert K == oracle
    assert K.dim == n - rank(vecs)


@given(dim_and_vectors(), st.data())
def test_modular_law_and_idempotence(data, draw):
    n, va = data
    vb = draw.draw(vectors(n))
    A, B = span(va, n), span(vb, n)
    assert A.dim + B.dim == subspace_sum(A, B).dim + intersect(A, B).dim
    assert subspace_sum(A, A) == A and intersect(A, A) == A
    assert span(A.basis, n) == A
    assert Subspace.from_json(A.to_json()) == A
