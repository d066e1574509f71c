import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bintope.intlinalg import (
    DimensionError,
    IntMatrix,
    det_exact,
    format_matrix_text,
    parse_matrix_text,
    smith_normal_form,
    unimodular_check,
    xgcd,
)

from oracles import cofactor_det, rational_rank


def matrices(max_n=6, max_m=6, bound=10):
    return st.integers(1, max_n).flatmap(
        lambda n: st.integers(1, max_m).flatmap(
            lambda m: st.lists(
                st.lists(st.integers(-bound, bound), min_size=m, max_size=m),
                min_size=n,
                max_size=n,
            )
        )
    )


def check_snf(A: IntMatrix, res):
    assert res.P @ A @ res.Q == res.diagonal_form()
    assert abs(det_exact(res.P)) == 1
    assert abs(det_exact(res.Q)) == 1
    assert res.rank == rational_rank(A.tolist())
    assert all(d > 0 for d in res.divisors)


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_snf_properties(rows):
    A = IntMatrix(rows)
    check_snf(A, smith_normal_form(A))


@settings(max_examples=100, deadline=None)
@given(matrices(5, 5, 20))
def test_divisibility_chain(rows):
    A = IntMatrix(rows)
    res = smith_normal_form(A, divisibility=True)
    check_snf(A, res)
    d = res.divisors
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))


@settings(max_examples=60, deadline=None)
@given(matrices(5, 5))
def test_divisor_product_invariant(rows):
    # the product of divisors is the gcd of the maximal minors (up to sign);
    # for a square nonsingular matrix that is |det A|
    A = IntMatrix(rows)
    res = smith_normal_form(A)
    if A.nrows == A.ncols and res.rank == A.nrows:
        prod = 1
        for v in res.divisors:
            prod *= v
        assert prod == abs(cofactor_det(A.tolist()))


def test_identity_has_unit_divisors():
    res = smith_normal_form(IntMatrix.identity(4))
    assert res.divisors == (1, 1, 1, 1)
    assert res.rank == 4


def test_column_vector_gcd():
    A = IntMatrix([[4], [6]])
    res = smith_normal_form(A)
    assert res.divisors == (2,)
    assert res.P @ A @ res.Q == IntMatrix([[2], [0]])


def test_zero_matrix_rank_zero():
    res = smith_normal_form(IntMatrix.zeros(3, 2))
    assert res.rank == 0
    assert res.divisors == ()
    assert res.P_r is None and res.P_0 == res.P


def test_divisibility_fixes_two_three():
    A = IntMatrix([[2, 0], [0, 3]])
    assert sorted(smith_normal_form(A).divisors) == [2, 3]
    res = smith_normal_form(A, divisibility=True)
    assert res.divisors == (1, 6)
    check_snf(A, res)


def test_threaded_matches_sequential():
    rng = random.Random(5)
    for _ in range(10):
        n, m = rng.randint(8, 30), rng.randint(8, 30)
        A = IntMatrix([[rng.randint(-9, 9) for _ in range(m)] for _ in range(n)])
        a = smith_normal_form(A)
        b = smith_normal_form(A, workers=4)
        assert (a.P, a.Q, a.divisors) == (b.P, b.Q, b.divisors)


def test_det_exact_against_cofactors():
    rng = random.Random(11)
    for _ in range(50):
        n = rng.randint(1, 6)
        M = [[rng.randint(-7, 7) for _ in range(n)] for _ in range(n)]
        assert det_exact(M) == cofactor_det(M)


def test_det_requires_square():
    with pytest.raises(DimensionError):
        det_exact([[1, 2, 3], [4, 5, 6]])


def test_unimodular_check():
    assert unimodular_check([[2, 1], [1, 1]])
    assert not unimodular_check([[2, 0], [0, 1]])


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_xgcd(a, b):
    g, s, t = xgcd(a, b)
    assert g >= 0 and s * a + t * b == g
    if a or b:
        assert a % g == 0 and b % g == 0


def test_matrix_text_roundtrip():
    A = IntMatrix([[1, -2, 3], [0, 5, -6]])
    assert parse_matrix_text(format_matrix_text(A)) == A
    assert parse_matrix_text("2 2\n1 0\n0 1\n") == IntMatrix.identity(2)


@pytest.mark.parametrize("text", ["", "2", "2 2 1 2 3", "2 x 1 2", "0 0"])
def test_matrix_text_rejects_bad_input(text):
    with pytest.raises(ValueError):
        parse_matrix_text(text)


def test_intmatrix_rejects_ragged():
    with pytest.raises(DimensionError):
        IntMatrix([[1, 2], [3]])


def test_slices():
    A = IntMatrix([[1, 1, 0], [0, 1, 1]])
    res = smith_normal_form(A)
    assert res.rank == 2
    assert res.P_0 is None and res.Q_0.shape == (3, 1)
    assert (A @ res.Q_0) == IntMatrix.zeros(2, 1)
