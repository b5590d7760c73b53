import random
from fractions import Fraction

import pytest

from cwkirch.complex import CellComplex, ChainVector
from cwkirch.corpus import BUILDERS, rp2_double, rp2_min, theta
from cwkirch.linalg import Matrix, kernel_lattice_basis
from cwkirch.network import (
    NetworkInputError,
    NetworkProblem,
    NetworkSolution,
    branch_current,
    branch_current_direct,
    projection_direct,
    projection_tree_formula,
    solve_by_trees,
    solve_direct,
    tree_operator_sum,
    verify_solution,
)

from oracles import projector

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


def random_weights(rng, n):
    return tuple(Fraction(rng.randint(1, 12), rng.randint(1, 7)) for _ in range(n))


def test_projection_examples():
    assert projection_direct(rp2_min()).is_zero()
    assert projection_tree_formula(rp2_min()).is_zero()
    expected = Matrix([[HALF, -HALF], [-HALF, HALF]])
    assert projection_direct(rp2_double()) == expected
    assert projection_tree_formula(rp2_double()) == expected
    F, delta = tree_operator_sum(rp2_double())
    assert delta == 8
    P = projection_direct(theta())
    assert P.rank() == 2
    for i in range(3):
        for j in range(3):
            v = [0, 0, 0]
            v[i] += 1
            v[j] -= 1
            assert P @ v == tuple(Fraction(x) for x in v)
    c = theta().with_weights(1, (2, 3, 6))
    assert projection_tree_formula(c) == projection_direct(c)


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_projection_properties(name):
    c = BUILDERS[name]()
    rng = random.Random(name)
    n = c.count(c.dim)
    for r in [None, random_weights(rng, n)]:
        rr = c.resistances() if r is None else r
        P = projection_direct(c, r)
        R = Matrix.diag(rr)
        assert P @ P == P
        assert P.T @ R == R @ P
        assert (c.boundary(c.dim) @ P).is_zero()
        for z in kernel_lattice_basis(c.boundary(c.dim)).vectors:
            assert P @ z == tuple(Fraction(x) for x in z)
        # sympy oracle
        oracle = projector(list(kernel_lattice_basis(c.boundary(c.dim)).vectors), rr)
        assert P.tolist() == oracle
        # tree formula, self-adjointness of F and F z = Δ z
        F, delta = tree_operator_sum(c, r)
        assert F.T @ R == R @ F
        for z in kernel_lattice_basis(c.boundary(c.dim)).vectors:
            assert F @ z == tuple(delta * x for x in z)
        assert F.scale(1 / delta) == P


def test_solve_direct_examples():
    c = theta()
    prob = NetworkProblem(c, ChainVector(0, (-1, 1)), ChainVector.zero(1, 3))
    s = solve_direct(prob)
    assert s.J.coords == (THIRD, THIRD, THIRD)
    assert verify_solution(prob, s).ok
    zero = NetworkProblem(c, ChainVector.zero(0, 2), ChainVector.zero(1, 3))
    s = solve_direct(zero)
    assert all(x == 0 for x in s.J) and all(x == 0 for x in s.V)
    w = c.with_weights(1, (2, 3, 6))
    s = solve_direct(NetworkProblem(w, ChainVector(0, (-1, 1)), ChainVector.zero(1, 3)))
    assert s.J.coords == (HALF, THIRD, Fraction(1, 6))


def test_hand_solution_and_perturbation():
    c = theta()
    prob = NetworkProblem(c, ChainVector(0, (-1, 1)), ChainVector.zero(1, 3))
    hand = NetworkSolution(ChainVector(1, (THIRD,) * 3), ChainVector(1, (THIRD,) * 3))
    assert verify_solution(prob, hand).ok
    bad = NetworkSolution(hand.V, ChainVector(1, (THIRD, THIRD, Fraction(1, 2))))
    res = verify_solution(prob, bad)
    assert not res.ok
    assert any(x != 0 for x in res.current)


def test_problem_validation():
    c = theta()
    with pytest.raises(NetworkInputError):
        NetworkProblem(c, ChainVector(0, (1, 1)), ChainVector.zero(1, 3))  # not a boundary
    with pytest.raises(NetworkInputError):
        NetworkProblem(c, ChainVector(0, (-1, 1)), ChainVector(1, (1, 0, 0)))  # not a cycle
    with pytest.raises(NetworkInputError):
        NetworkProblem(c, ChainVector(1, (0, 0, 0)), ChainVector.zero(1, 3))


def test_branch_current_examples():
    c = theta()
    assert branch_current(c, (0, 0, 0)).coords == (0, 0, 0)
    assert branch_current(c, (1, 0, 0)).coords == (Fraction(2, 3), -THIRD, -THIRD)
    assert branch_current(rp2_min(), (5,)).coords == (0,)


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_branch_current_and_two_solvers(name):
    c = BUILDERS[name]()
    rng = random.Random(f"net-{name}")
    n = c.count(c.dim)
    for _ in range(3):
        r = random_weights(rng, n)
        cw = c.with_weights(c.dim, r)
        V = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n))
        z = branch_current(cw, V)
        assert z == branch_current_direct(cw, V)
        # z is a cycle and V - Rz pairs to zero with every cycle
        assert all(x == 0 for x in c.boundary(c.dim) @ z.coords)
        for cyc in kernel_lattice_basis(c.boundary(c.dim)).vectors:
            assert sum((v - rb * zb) * x for v, rb, zb, x in zip(V, r, z, cyc)) == 0
        # random boundary current and cycle voltage
        J0 = [rng.randint(-5, 5) for _ in range(n)]
        p = ChainVector(c.dim - 1, c.boundary(c.dim) @ J0)
        cycles = kernel_lattice_basis(c.boundary(c.dim)).vectors
        q = [Fraction(0)] * n
        for cyc in cycles:
            f = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            q = [a + f * b for a, b in zip(q, cyc)]
        prob = NetworkProblem(cw, p, ChainVector(c.dim, q))
        s = solve_direct(prob)
        assert verify_solution(prob, s).ok
        assert solve_by_trees(prob) == s


def test_solution_invariant_under_cell_reordering():
    c = BUILDERS["fan_234"]()
    r = (Fraction(1), Fraction(2), Fraction(5, 3))
    perm = (2, 0, 1)
    D = c.boundary(2)
    Dp = D.select_columns(perm)
    cp = CellComplex(c.cell_counts, (c.boundary(1), Dp), {2: tuple(r[i] for i in perm)})
    cw = c.with_weights(2, r)
    q = (5, -2, -1)
    assert all(x == 0 for x in D @ q)
    p = ChainVector(1, (Fraction(7),))
    s = solve_direct(NetworkProblem(cw, p, ChainVector(2, q)))
    sp = solve_direct(NetworkProblem(cp, p, ChainVector(2, tuple(q[i] for i in perm))))
    assert sp.J.coords == tuple(s.J.coords[i] for i in perm)
