import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scrollres.ffield import (
    FieldError,
    PrimeFieldMatrix,
    det_mod,
    is_prime,
    kernel_mod,
    mat_kernel,
    mat_rank,
    mat_solve,
    mul_mod,
    rank_mod,
    same_subspace,
    solve_mod,
)

P = 10007


def test_prime_checks():
    assert is_prime(P)
    assert not is_prime(10006)
    with pytest.raises(FieldError):
        PrimeFieldMatrix.from_rows([[1]], 10006)


def test_rank_identity():
    m = PrimeFieldMatrix.identity(3, P)
    assert mat_rank(m) == 3


def test_rank_zero_matrix():
    m = PrimeFieldMatrix.zeros(4, 2, P)
    assert mat_rank(m) == 0


def test_rank_dependent_rows():
    # [[1,2],[2,4]] row-reduces to [[1,2],[0,0]] by hand
    m = PrimeFieldMatrix.from_rows([[1, 2], [2, 4]], P)
    assert mat_rank(m) == 1


def test_kernel_identity_empty():
    assert mat_kernel(PrimeFieldMatrix.identity(5, P)) == []


def test_kernel_single_row():
    m = PrimeFieldMatrix.from_rows([[1, 1]], P)
    (v,) = mat_kernel(m)
    # proportional to (1, p-1)
    assert v[0] * (P - 1) % P == v[1] % P
    assert (m.array @ v) % P == 0


def test_kernel_substitution_oracle():
    m = PrimeFieldMatrix.from_rows([[1, 2], [2, 4]], P)
    basis = mat_kernel(m)
    assert len(basis) == 1
    for v in basis:
        assert np.all(mul_mod(m.array, v.reshape(-1, 1), P) == 0)


def test_solve_identity():
    m = PrimeFieldMatrix.identity(4, P)
    b = np.array([3, 1, 4, 1])
    x = mat_solve(m, b)
    assert np.array_equal(x, b)


def test_solve_no_solution():
    m = PrimeFieldMatrix.zeros(3, 3, P)
    assert mat_solve(m, [1, 0, 0]) is None


def test_solve_construct_then_solve():
    rng = np.random.default_rng(7)
    while True:
        a = rng.integers(0, P, size=(6, 6))
        if rank_mod(a, P) == 6:
            break
    x0 = rng.integers(0, P, size=6)
    b = mul_mod(a, x0, P)
    m = PrimeFieldMatrix(P, a % P)
    x = mat_solve(m, b)
    assert x is not None
    assert np.array_equal(mul_mod(a, x, P), b % P)


def test_det_mod_matches_numpy_small():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.integers(0, 7, size=(4, 4))
        expected = round(float(np.linalg.det(a))) % P
        assert det_mod(a, P) == expected


def test_same_subspace_detects_reordering():
    a = np.array([[1, 2, 3], [0, 1, 1]])
    b = np.array([[2, 4, 6], [1, 3, 4]])  # row ops of a
    c = np.array([[1, 0, 0], [0, 1, 0]])
    assert same_subspace(a, b, P)
    assert not same_subspace(a, c, P)


matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(0, P - 1), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        )
    )
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_kernel_dimension_formula(rows):
    a = np.array(rows, dtype=np.int64)
    k = kernel_mod(a, P)
    assert rank_mod(a, P) + len(k) == a.shape[1]


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_kernel_vectors_annihilate(rows):
    a = np.array(rows, dtype=np.int64)
    for v in kernel_mod(a, P):
        assert np.all(mul_mod(a, v.reshape(-1, 1), P) == 0)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_transpose_invariant(rows):
    a = np.array(rows, dtype=np.int64)
    assert rank_mod(a, P) == rank_mod(a.T, P)


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_solve_in_span_roundtrip(rows):
    a = np.array(rows, dtype=np.int64)
    rng = np.random.default_rng(int(a.sum()) % 2**31)
    x0 = rng.integers(0, P, size=a.shape[1])
    b = mul_mod(a, x0, P)
    x = solve_mod(a, b, P)
    assert x is not None
    assert np.array_equal(mul_mod(a, x, P), b)
