import itertools
import random
from fractions import Fraction

import pytest

from cwkirch.corpus import BUILDERS, k4, rp2_double, rp2_min, theta, torus_min
from cwkirch.linalg import LatticeBasis, Matrix, det, gram_determinant, image_lattice_basis
from cwkirch.matrix_tree import (
    HypothesisError,
    NotGoodError,
    SubgroupSpec,
    WeightAssignment,
    boundary_lattice,
    gamma_A,
    gamma_X,
    goodness_violation,
    hypothesis_check,
    laplacian,
    laplacian_A,
    low_temperature_check,
    mu_X,
    theta_X,
    verify_generalized,
    verify_matrix_tree,
    verify_sum_decomposition,
    verify_tree_local,
)
from cwkirch.trees import make_tree

from oracles import gram_det, graph_laplacian_cofactor

# (det L, γ_X) unweighted, from the oracles in test_unweighted_values_against_oracles.
EXPECTED = {
    "circle": (1, 1),
    "fan_234": (29, 1),
    "k4": (64, 4),
    "moore_2": (4, 1),
    "moore_3": (9, 1),
    "moore_5": (25, 1),
    "rp2_double": (8, 1),
    "rp2_min": (4, 1),
    "rp2_six": (5184, 1296),
    "segment": (2, 2),
    "sphere_tetra": (64, 16),
    "theta": (6, 2),
    "torus_min": (1, 1),
}


def random_weights(rng, n):
    return tuple(Fraction(rng.randint(1, 12), rng.randint(1, 7)) for _ in range(n))


def unimodular(n, rng):
    m = Matrix.identity(n).tolist()
    for _ in range(6):
        if n > 1:
            i, j = rng.sample(range(n), 2)
            f = rng.randint(-3, 3)
            m[i] = [a + f * b for a, b in zip(m[i], m[j])]
    return Matrix(m, (n, n))


def test_weight_assignment():
    w = WeightAssignment((1, Fraction(1, 2)))
    assert w.power(3).values == (1, Fraction(1, 8))
    with pytest.raises(ValueError):
        WeightAssignment((1, 0))


def test_laplacian_examples():
    L = laplacian(theta())
    assert L.basis.vectors in (((-1, 1),), ((1, -1),))
    assert L.matrix.tolist() == [[6]] and L.det == 6
    L = laplacian(rp2_min())
    assert L.basis.vectors == ((2,),) and L.matrix.tolist() == [[4]] and L.det == 4
    L = laplacian(torus_min())
    assert L.matrix.shape == (0, 0) and L.det == 1


def test_gamma_examples():
    assert gamma_X(k4()) == 4 and mu_X(k4()) == 4
    assert gamma_X(rp2_min()) == 1 and mu_X(rp2_min()) == 4 and theta_X(rp2_min()) == 2
    assert gamma_X(theta()) == 2


def test_matrix_tree_examples():
    r = verify_matrix_tree(k4())
    assert r.holds and r.lhs == 64 == r.rhs
    r = verify_matrix_tree(rp2_min())
    assert r.holds and r.lhs == 4
    r = verify_matrix_tree(theta(), (2, 3, 5))
    assert r.holds and r.lhs == Fraction(31, 15)


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_unweighted_values_against_oracles(name):
    c = BUILDERS[name]()
    B = image_lattice_basis(c.boundary(c.dim))
    assert mu_X(c) == gram_det(B.vectors)
    assert (laplacian(c).det, gamma_X(c)) == EXPECTED[name]


def test_graph_laplacian_against_classical_cofactor():
    rng = random.Random(4)
    edges = list(itertools.combinations(range(4), 2))
    for _ in range(3):
        r = random_weights(rng, 6)
        cof = graph_laplacian_cofactor(4, edges, [1 / x for x in r])
        # μ_X = number of vertices for a connected graph
        assert laplacian(k4(), r).det == 4 * cof


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_theorem_c_with_random_weights(name):
    c = BUILDERS[name]()
    rng = random.Random(f"C-{name}")
    n = c.count(c.dim)
    for r in [None] + [random_weights(rng, n) for _ in range(3)]:
        rep = verify_matrix_tree(c, r)
        assert rep.holds, rep
        assert rep.lhs > 0


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_laplacian_det_basis_invariant(name):
    c = BUILDERS[name]()
    rng = random.Random(f"U-{name}")
    r = random_weights(rng, c.count(c.dim))
    base = laplacian(c, r)
    for _ in range(3):
        b = base.basis.transform(unimodular(base.basis.rank, rng))
        assert laplacian(c, r, basis=b).det == base.det


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_tree_local_factorization(name):
    c = BUILDERS[name]()
    r = random_weights(random.Random(f"L-{name}"), c.count(c.dim))
    rep = verify_tree_local(c, r)
    assert rep.holds, rep.failures


def test_sum_decomposition_examples():
    rep = verify_sum_decomposition(theta())
    assert rep.holds and rep.lhs == 6 and rep.details["mu_T"] == [2, 2, 2]
    rep = verify_sum_decomposition(rp2_double())
    assert rep.holds and rep.lhs == 8 and rep.details["mu_T"] == [4, 4]
    rep = verify_sum_decomposition(rp2_min())
    assert rep.holds and rep.lhs == 4 == rep.details["sum_mu"]


def test_hypothesis_examples():
    c = theta()
    full = SubgroupSpec(boundary_lattice(c).vectors)
    h = hypothesis_check(c, full)
    assert h.passes and h.t == 1 and h.p_matrix == Matrix.identity(1)
    h = hypothesis_check(c, SubgroupSpec(((1, -1),)))
    assert h.passes and h.t == 1
    # A = Z v_1: the projection of v_2 - v_1 onto span(v_1) is -v_1, integral
    h = hypothesis_check(c, SubgroupSpec(((1, 0),)))
    assert h.passes and h.t == 1
    # A = Z (2 v_1): coordinate -1/2, not integral
    h = hypothesis_check(c, SubgroupSpec(((2, 0),)))
    assert not h.passes and h.reason
    with pytest.raises(ValueError):
        gamma_A(c, SubgroupSpec(((2, 0),)))


def test_generalized_examples():
    c = rp2_min()
    a = SubgroupSpec(((1,),))
    assert hypothesis_check(c, a).t == 2
    assert gamma_A(c, a) == 1
    rep = verify_generalized(c, a=a)
    assert rep.holds and rep.lhs == 4
    # default A = B_{d-1} reduces to the matrix-tree theorem
    rep = verify_generalized(k4())
    assert rep.holds and rep.lhs == verify_matrix_tree(k4()).lhs
    a = SubgroupSpec(((1, 0),))
    rep = verify_generalized(theta(), a=a)
    assert rep.holds and rep.lhs == 3 == laplacian_A(theta(), a)
    with pytest.raises(HypothesisError):
        verify_generalized(theta(), a=SubgroupSpec(((2, 0),)))


def coordinate_subgroups(c, rng, limit=3):
    """Up to `limit` coordinate subgroups A_S of full rank that pass the hypothesis.

    Index sets are tried in a seeded random order so large complexes stay cheap.
    """
    n = c.count(c.dim - 1)
    r = boundary_lattice(c).rank
    subsets = list(itertools.combinations(range(n), r))
    rng.shuffle(subsets)
    found = 0
    for cells in subsets:
        a = SubgroupSpec.coordinate(cells, n)
        if hypothesis_check(c, a):
            yield a
            found += 1
            if found == limit:
                return


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_generalized_identity_on_corpus(name):
    c = BUILDERS[name]()
    rng = random.Random(f"G-{name}")
    r = random_weights(rng, c.count(c.dim))
    default = SubgroupSpec(boundary_lattice(c).vectors)
    assert verify_generalized(c, r, default).holds
    assert verify_sum_decomposition(c, r, default).holds
    found = 0
    for a in coordinate_subgroups(c, rng):
        found += 1
        rep = verify_generalized(c, r, a)
        assert rep.holds, rep.failures
        assert verify_sum_decomposition(c, r, a).holds
        assert gram_determinant(a.vectors) == 1
    assert found >= 1


def test_low_temperature_examples():
    c = rp2_double()
    rep = low_temperature_check(c, make_tree(c, (0,)), (1, 64), range(1, 13))
    assert rep.ratios[0] == Fraction(64, 65)
    for beta, ratio in zip(rep.betas, rep.ratios):
        assert ratio == 1 / (1 + Fraction(1, 64 ** beta))
    assert rep.monotone and rep.converged and rep.ok
    with pytest.raises(NotGoodError) as e:
        low_temperature_check(c, make_tree(c, (0,)), (1, 1), [0, 1])
    assert e.value.cell == 1
    M = 10 ** 4
    rep = low_temperature_check(theta(), make_tree(theta(), (0,)), (1, M, M), [1, 2, 3])
    assert rep.ok


def test_goodness_multiplicative_form():
    c = theta()
    assert goodness_violation(c, (0,), (1, 5, 5)) is None
    assert goodness_violation(c, (0,), (2, 5, Fraction(1, 4))) == 2
    assert goodness_violation(c, (1,), (3, 2, 3)) is None
