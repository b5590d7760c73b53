"""Higher-dimensional resistive networks.

A network problem on a d-complex prescribes a boundary current p in
B_{d-1} and a cycle voltage q in Z_d.  A solution (V, J) obeys Ohm's law
V = RJ, the current law ∂J = p, and the voltage law <V, z> = <q, z> for
every d-cycle z.  Everything is exact over Q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .complex import CellComplex, ChainVector
from .linalg import Matrix, inverse, kernel_lattice_basis, solve, solve_vector
from .trees import SpanningTree, enumerate_spanning_trees


class NetworkInputError(ValueError):
    """p is not a boundary or q is not a cycle (or shapes disagree)."""


def _resistances(c: CellComplex, r: Optional[Sequence]) -> tuple:
    r = c.resistances() if r is None else tuple(Fraction(x) for x in r)
    if len(r) != c.cell_counts[-1]:
        raise ValueError("one resistance per top cell is required")
    if any(x <= 0 for x in r):
        raise ValueError("resistances must be positive")
    return r


@dataclass(frozen=True)
class NetworkProblem:
    complex: CellComplex
    p: ChainVector
    q: ChainVector

    def __post_init__(self):
        c = self.complex
        d = c.dim
        if d < 1:
            raise NetworkInputError("network problems need a complex of dimension >= 1")
        p = self.p if isinstance(self.p, ChainVector) else ChainVector(d - 1, self.p)
        q = self.q if isinstance(self.q, ChainVector) else ChainVector(d, self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if p.degree != d - 1 or len(p) != c.cell_counts[d - 1]:
            raise NetworkInputError("p must be a (d-1)-chain")
        if q.degree != d or len(q) != c.cell_counts[d]:
            raise NetworkInputError("q must be a d-chain")
        D = c.boundary(d)
        if solve_vector(D, p.coords) is None:
            raise NetworkInputError("p is not a boundary: p ∉ B_{d-1}")
        if any(x != 0 for x in D @ q.coords):
            raise NetworkInputError("q is not a cycle: ∂q != 0")


@dataclass(frozen=True)
class NetworkSolution:
    V: ChainVector
    J: ChainVector


def cycle_basis(c: CellComplex) -> list[tuple[int, ...]]:
    """Integer basis of Z_d(X)."""
    return list(kernel_lattice_basis(c.boundary(c.dim)).vectors)


def projection_direct(c: CellComplex, r: Optional[Sequence] = None) -> Matrix:
    """R-orthogonal projection of C_d onto Z_d: K (KᵀRK)⁻¹ KᵀR."""
    r = _resistances(c, r)
    n = c.cell_counts[-1]
    basis = cycle_basis(c)
    if not basis:
        return Matrix.zeros(n, n)
    K = Matrix.from_columns(basis, n)
    KtR = K.T.scale_columns(r)
    return K @ inverse(KtR @ K) @ KtR


def tree_operator_sum(
    c: CellComplex, r: Optional[Sequence] = None, trees: Optional[Iterable[SpanningTree]] = None
) -> tuple[Matrix, Fraction]:
    """F = Σ_T w_T T̄ and Δ = Σ_T w_T over all spanning trees."""
    r = _resistances(c, r)
    n = c.cell_counts[-1]
    trees = enumerate_spanning_trees(c) if trees is None else trees
    acc = [[Fraction(0)] * n for _ in range(n)]
    delta = Fraction(0)
    for t in trees:
        w = t.weight(r)
        delta += w
        tb = t.tbar
        for b in t.t_values:  # nonzero columns only
            for i in range(n):
                x = tb[i, b]
                if x:
                    acc[i][b] += w * x
    return Matrix(acc, (n, n)), delta


def projection_tree_formula(
    c: CellComplex, r: Optional[Sequence] = None, trees: Optional[Iterable[SpanningTree]] = None
) -> Matrix:
    """(1/Δ) Σ_T w_T T̄."""
    F, delta = tree_operator_sum(c, r, trees)
    return F.scale(1 / delta)


def branch_current(
    c: CellComplex, V, r: Optional[Sequence] = None, trees: Optional[Iterable[SpanningTree]] = None
) -> ChainVector:
    """The unique cycle z with V - Rz ∈ B^d, by the spanning-tree sum

    <z, b> = (1/Δ) Σ_T (w_T / r_b) <V, T̄(b)>.
    """
    r = _resistances(c, r)
    v = tuple(Fraction(x) for x in V)
    n = c.cell_counts[-1]
    if len(v) != n:
        raise ValueError("V must be a d-chain")
    trees = list(enumerate_spanning_trees(c) if trees is None else trees)
    z = [Fraction(0)] * n
    delta = Fraction(0)
    for t in trees:
        w = t.weight(r)
        delta += w
        tb = t.tbar
        for b in t.t_values:
            pairing = sum((v[i] * tb[i, b] for i in range(n)), Fraction(0))
            z[b] += w / r[b] * pairing
    return ChainVector(c.dim, tuple(x / delta for x in z))


def branch_current_direct(c: CellComplex, V, r: Optional[Sequence] = None) -> ChainVector:
    """Same cycle computed as P·R⁻¹·V with the direct projection."""
    r = _resistances(c, r)
    v = [Fraction(x) / rb for x, rb in zip(V, r)]
    return ChainVector(c.dim, projection_direct(c, r) @ v)


def solve_direct(problem: NetworkProblem) -> NetworkSolution:
    """J = J0 + J1 with J0 ∈ B^d_R, ∂J0 = p and J1 the R-projection of R⁻¹q onto Z_d."""
    c = problem.complex
    r = c.resistances()
    D = c.boundary(c.dim)
    Rinv_Dt = D.T.scale_rows([1 / x for x in r])  # ∂*_R = R⁻¹ Dᵀ
    y = solve(D @ Rinv_Dt, Matrix.from_columns([problem.p.coords], D.rows))
    if y is None:  # pragma: no cover - excluded by NetworkProblem validation
        raise NetworkInputError("p is not a boundary")
    J0 = Rinv_Dt @ y.column(0)
    J1 = projection_direct(c, r) @ [Fraction(x) / rb for x, rb in zip(problem.q.coords, r)]
    J = tuple(a + b for a, b in zip(J0, J1))
    V = tuple(rb * j for rb, j in zip(r, J))
    return NetworkSolution(ChainVector(c.dim, V), ChainVector(c.dim, J))


def solve_by_trees(problem: NetworkProblem) -> NetworkSolution:
    """Independent route: J = (I - P) J' + P R⁻¹ q with any J' satisfying ∂J' = p.

    P is the spanning-tree projection; I - P projects onto B^d_R.
    """
    c = problem.complex
    r = c.resistances()
    n = c.cell_counts[-1]
    D = c.boundary(c.dim)
    particular = solve_vector(D, problem.p.coords)
    if particular is None:  # pragma: no cover
        raise NetworkInputError("p is not a boundary")
    P = projection_tree_formula(c, r)
    Pp = P @ particular
    Pq = P @ [Fraction(x) / rb for x, rb in zip(problem.q.coords, r)]
    J = tuple(particular[i] - Pp[i] + Pq[i] for i in range(n))
    V = tuple(rb * j for rb, j in zip(r, J))
    return NetworkSolution(ChainVector(c.dim, V), ChainVector(c.dim, J))


@dataclass(frozen=True)
class Residuals:
    ohm: tuple
    current: tuple
    voltage: tuple

    @property
    def ok(self) -> bool:
        return all(x == 0 for x in self.ohm + self.current + self.voltage)


def verify_solution(problem: NetworkProblem, s: NetworkSolution) -> Residuals:
    """Exact residuals of Ohm's law, the current law and the voltage law."""
    c = problem.complex
    r = c.resistances()
    n = c.cell_counts[-1]
    if len(s.V) != n or len(s.J) != n:
        raise ValueError("solution chains have the wrong length")
    ohm = tuple(v - rb * j for v, rb, j in zip(s.V, r, s.J))
    current = tuple(a - b for a, b in zip(c.boundary(c.dim) @ s.J.coords, problem.p.coords))
    voltage = tuple(
        sum(((v - q) * zi for v, q, zi in zip(s.V, problem.q, z)), Fraction(0)) for z in cycle_basis(c)
    )
    return Residuals(ohm, current, voltage)
