from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwkirch.corpus import rp2_double, rp2_min, theta
from cwkirch.linalg import (
    LatticeBasis,
    Matrix,
    det,
    gram_determinant,
    hermite_column_basis,
    image_lattice_basis,
    inclusion_index,
    inverse,
    kernel_lattice_basis,
    nullspace,
    primitive,
    rank,
    rref,
    snf,
    solve,
    torsion_order_cokernel,
)

from oracles import leibniz_det, sympy_invariant_factors, sympy_rank


def int_matrices(max_rows=5, max_cols=5, bound=9):
    return st.integers(0, max_rows).flatmap(
        lambda r: st.integers(0, max_cols).flatmap(
            lambda c: st.lists(
                st.lists(st.integers(-bound, bound), min_size=c, max_size=c), min_size=r, max_size=r
            ).map(lambda rows, c=c, r=r: Matrix(rows, (r, c)))
        )
    )


def square_matrices(max_n=5, bound=9):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n), min_size=n, max_size=n).map(
            lambda rows, n=n: Matrix(rows, (n, n))
        )
    )


# --- Matrix basics ---------------------------------------------------------


def test_matrix_normalizes_integral_fractions():
    m = Matrix([[Fraction(4, 2), Fraction(1, 3)]])
    assert type(m[0, 0]) is int and m[0, 0] == 2
    assert m[0, 1] == Fraction(1, 3)
    assert not m.is_integral()


def test_matrix_products_and_shapes():
    a = Matrix([[1, 2], [3, 4]])
    b = Matrix([[0, 1], [1, 0]])
    assert (a @ b).tolist() == [[2, 1], [4, 3]]
    assert a @ (1, 1) == (3, 7)
    assert a.T.tolist() == [[1, 3], [2, 4]]
    assert Matrix.zeros(0, 3).shape == (0, 3)
    assert (Matrix.zeros(2, 0) @ Matrix.zeros(0, 3)).tolist() == [[0, 0, 0], [0, 0, 0]]


def test_determinant_of_empty_matrix_is_one():
    assert det(Matrix.zeros(0, 0)) == 1


@given(square_matrices())
def test_bareiss_determinant_matches_leibniz(m):
    assert det(m) == leibniz_det(m.tolist())


@given(int_matrices())
def test_rank_matches_sympy(m):
    assert rank(m) == sympy_rank(m.tolist(), m.shape)


def test_rref_and_solve():
    a = Matrix([[1, 2], [2, 4]])
    red, piv = rref(a)
    assert piv == [0] and red.tolist() == [[1, 2], [0, 0]]
    assert solve(a, Matrix([[1], [3]])) is None
    x = solve(a, Matrix([[3], [6]]))
    assert (a @ x).tolist() == [[3], [6]]


def test_inverse_and_nullspace():
    a = Matrix([[2, 1], [1, 1]])
    assert (a @ inverse(a)) == Matrix.identity(2)
    with pytest.raises(ZeroDivisionError):
        inverse(Matrix([[1, 2], [2, 4]]))
    ns = nullspace(Matrix([[1, 1, 1]]))
    assert len(ns) == 2 and all(sum(v) == 0 for v in ns)


def test_primitive():
    assert primitive((Fraction(-1, 2), Fraction(1, 3))) == (3, -2)
    with pytest.raises(ValueError):
        primitive((0, 0))


# --- Smith normal form -------------------------------------------------------


def test_snf_examples():
    assert snf(Matrix([[2]])).S.tolist() == [[2]]
    assert snf(Matrix([[2, 4], [-2, 6]])).S.tolist() == [[2, 0], [0, 10]]
    z = snf(Matrix.zeros(2, 3))
    assert z.S.is_zero() and z.rank == 0


@settings(max_examples=150)
@given(int_matrices())
def test_snf_certificate(m):
    res = snf(m)
    U, S, V = res.U, res.S, res.V
    assert U @ m @ V == S
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    diag = [S[i, i] for i in range(min(S.shape))]
    assert all(S[i, j] == 0 for i in range(S.rows) for j in range(S.cols) if i != j)
    nz = [d for d in diag if d != 0]
    assert all(d > 0 for d in nz)
    assert diag[: len(nz)] == nz  # nonzero entries come first
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@settings(max_examples=150)
@given(int_matrices())
def test_snf_invariant_factors_match_sympy(m):
    assert sorted(snf(m).invariant_factors) == sympy_invariant_factors(m.tolist(), m.shape)


def test_torsion_order_cokernel_examples():
    assert torsion_order_cokernel(Matrix([[0]])) == 1
    assert torsion_order_cokernel(theta().boundary(1)) == 1
    assert torsion_order_cokernel(Matrix.identity(4)) == 1
    assert torsion_order_cokernel(Matrix([[2]])) == 2
    assert torsion_order_cokernel(Matrix([[2, 0], [0, 3]])) == 6


# --- Lattices ----------------------------------------------------------------


def test_image_lattice_examples():
    assert image_lattice_basis(Matrix([[2], [0]])).vectors == ((2, 0),)
    vecs = image_lattice_basis(theta().boundary(1)).vectors
    assert vecs in (((-1, 1),), ((1, -1),))
    assert image_lattice_basis(rp2_min().boundary(2)).vectors == ((2,),)


def test_kernel_lattice_examples():
    assert kernel_lattice_basis(Matrix([[2]])).vectors == ()
    k = kernel_lattice_basis(rp2_double().boundary(2)).vectors
    assert k in (((1, -1),), ((-1, 1),))
    assert sorted(kernel_lattice_basis(Matrix.zeros(1, 3)).vectors) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


@settings(max_examples=100)
@given(int_matrices())
def test_hermite_basis_spans_same_lattice(m):
    h = hermite_column_basis(m)
    assert h.cols == rank(m)
    # every column of m is an integer combination of h and vice versa
    if h.cols:
        x = solve(h, m)
        assert x is not None and x.is_integral()
        y = solve(m, h)
        assert y is not None
    assert rank(h) == h.cols


@settings(max_examples=100)
@given(int_matrices())
def test_kernel_basis_is_saturated(m):
    k = kernel_lattice_basis(m)
    assert k.rank == m.cols - rank(m)
    if k.rank:
        K = k.matrix
        assert (m @ K).is_zero()
        # saturated: Z^n / K is torsion free
        assert torsion_order_cokernel(K) == 1


def test_gram_determinant_examples():
    assert gram_determinant([(-1, 1)]) == 2
    assert gram_determinant([]) == 1
    assert gram_determinant(LatticeBasis(1, ((2,),))) == 4
    assert gram_determinant([(1, 1)], metric=[2, 3]) == 5
    with pytest.raises(ValueError):
        gram_determinant([(1, 1), (2, 2)])


def test_gram_determinant_invariant_under_unimodular_change():
    b = LatticeBasis(3, ((1, 2, 0), (0, 1, 3)))
    u = Matrix([[1, 4], [0, 1]])
    assert gram_determinant(b) == gram_determinant(b.transform(u)) == 46


def test_inclusion_index_examples():
    assert inclusion_index(LatticeBasis(1, ((2,),)), LatticeBasis(1, ((1,),))) == 2
    b = LatticeBasis(2, ((1, 1), (0, 1)))
    assert inclusion_index(b, b) == 1
    std = LatticeBasis(2, ((1, 0), (0, 1)))
    assert inclusion_index(LatticeBasis(2, ((2, 0), (0, 3))), std) == 6
    with pytest.raises(ValueError):
        inclusion_index(LatticeBasis(2, ((1, 0),)), std)


@settings(max_examples=200)
@given(square_matrices(max_n=6))
def test_det_equals_cokernel_order(m):
    d = det(m)
    if d != 0:
        assert abs(d) == torsion_order_cokernel(m)
