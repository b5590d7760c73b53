"""Weighted restricted Laplacians and matrix-tree identities.

The operator ∂ R⁻¹ ∂* maps C_{d-1} into B_{d-1}; its restriction to B_{d-1}
is invertible and its determinant counts spanning trees, weighted by
θ_T² ∏ 1/r_b, up to a prefactor built from lattice data.  Resistances are
kept as exact rationals r = e^W; no logarithm is ever taken.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .complex import CellComplex
from .linalg import (
    LatticeBasis,
    Matrix,
    det,
    gram_determinant,
    image_lattice_basis,
    inclusion_index,
    rank,
    solve,
    torsion_order_cokernel,
)
from .trees import SpanningTree, enumerate_spanning_trees, _cells


@dataclass(frozen=True)
class WeightAssignment:
    """Positive rational resistances r_b, one per top cell."""

    values: tuple

    def __post_init__(self):
        vals = tuple(Fraction(x) for x in self.values)
        if any(x <= 0 for x in vals):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def power(self, beta: int) -> "WeightAssignment":
        """Weights for βW, i.e. r_b ** β."""
        return WeightAssignment(tuple(x ** beta for x in self.values))


Weights = Union[WeightAssignment, Sequence, None]


def _weights(c: CellComplex, w: Weights) -> WeightAssignment:
    if w is None:
        w = c.resistances()
    w = w if isinstance(w, WeightAssignment) else WeightAssignment(tuple(w))
    if len(w) != c.cell_counts[-1]:
        raise ValueError("one weight per top cell is required")
    return w


@dataclass(frozen=True)
class RestrictedLaplacian:
    """Matrix of an operator on a lattice's real span, in that lattice's basis."""

    basis: LatticeBasis
    matrix: Matrix
    det: Fraction


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of an exact identity plus supporting values."""

    name: str
    lhs: Fraction
    rhs: Fraction
    details: dict = field(default_factory=dict)
    failures: tuple = ()

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs and not self.failures


def weighted_operator(c: CellComplex, w: Weights = None, cells: Optional[Sequence[int]] = None) -> Matrix:
    """D_T diag(1/r) D_Tᵀ on C_{d-1}; T defaults to all top cells."""
    w = _weights(c, w)
    D = c.boundary(c.dim)
    idx = list(range(D.cols)) if cells is None else list(cells)
    DT = D.select_columns(idx)
    return DT.scale_columns([1 / w[b] for b in idx]) @ DT.T


def boundary_lattice(c: CellComplex) -> LatticeBasis:
    """Hermite basis of B_{d-1}(X; Z)."""
    return image_lattice_basis(c.boundary(c.dim))


def _restrict(op: Matrix, basis: LatticeBasis) -> Matrix:
    B = basis.matrix
    m = solve(B, op @ B)
    if m is None:
        raise ValueError("operator does not preserve the span of the basis")
    return m


def laplacian(
    c: CellComplex,
    w: Weights = None,
    cells: Optional[Sequence[int]] = None,
    basis: Optional[LatticeBasis] = None,
) -> RestrictedLaplacian:
    """The restricted Laplacian on B_{d-1}(X; R) in a Z-basis of B_{d-1}(X; Z).

    With ``cells`` given, only those top cells contribute (the tree operator
    L^T).  A 0x0 result has determinant 1.
    """
    if c.dim < 1:
        raise ValueError("laplacian needs a complex of dimension >= 1")
    basis = boundary_lattice(c) if basis is None else basis
    m = _restrict(weighted_operator(c, w, cells), basis)
    return RestrictedLaplacian(basis, m, Fraction(det(m)))


def mu_X(c: CellComplex) -> int:
    """Squared covolume of B_{d-1}(X; Z) in the standard metric."""
    return gram_determinant(boundary_lattice(c))


def theta_X(c: CellComplex) -> int:
    """Order of the torsion subgroup of H_{d-1}(X; Z)."""
    return torsion_order_cokernel(c.boundary(c.dim))


def gamma_X(c: CellComplex) -> Fraction:
    return Fraction(mu_X(c), theta_X(c) ** 2)


def _trees(c: CellComplex, trees) -> list[SpanningTree]:
    return list(enumerate_spanning_trees(c)) if trees is None else list(trees)


def verify_matrix_tree(c: CellComplex, w: Weights = None, trees=None) -> IdentityReport:
    """det L(W) against γ_X Σ_T w_T, via full tree enumeration."""
    w = _weights(c, w)
    trees = _trees(c, trees)
    lhs = laplacian(c, w).det
    total = sum((t.weight(w.values) for t in trees), Fraction(0))
    g = gamma_X(c)
    return IdentityReport(
        "matrix-tree",
        lhs,
        g * total,
        {"gamma_X": g, "mu_X": mu_X(c), "theta_X": theta_X(c), "tree_weight_sum": total, "trees": len(trees)},
    )


# ---------------------------------------------------------------------------
# Subgroups A of C_{d-1}(X; Z)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupSpec:
    """Integer basis vectors of a subgroup A ⊂ C_{d-1}(X; Z)."""

    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(tuple(int(x) for x in v) for v in self.vectors))

    def basis(self, ambient_dim: int) -> LatticeBasis:
        return LatticeBasis(ambient_dim, self.vectors)

    @classmethod
    def coordinate(cls, cells: Sequence[int], ambient_dim: int) -> "SubgroupSpec":
        """A_S: the subgroup spanned by the cells in S."""
        return cls(tuple(tuple(int(i == s) for i in range(ambient_dim)) for s in cells))


@dataclass(frozen=True)
class HypothesisResult:
    passes: bool
    p_matrix: Optional[Matrix]
    t: Optional[int]
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passes


def _project_coords(A: Matrix, Y: Matrix) -> Matrix:
    """Coordinates in the A-basis of the orthogonal projection of Y's columns onto span(A)."""
    x = solve(A.T @ A, A.T @ Y)
    if x is None:  # pragma: no cover - AᵀA is invertible for independent A
        raise ValueError("subgroup basis is dependent")
    return x


def hypothesis_check(c: CellComplex, a: SubgroupSpec) -> HypothesisResult:
    """Is the orthogonal projection B_{d-1}(R) → A_R induced by a real isomorphism B(Z) → A?"""
    n = c.cell_counts[c.dim - 1]
    A = a.basis(n).matrix
    if rank(A) != A.cols:
        return HypothesisResult(False, None, None, "subgroup basis is not independent")
    B = boundary_lattice(c)
    if A.cols != B.rank:
        return HypothesisResult(False, None, None, f"rank of A is {A.cols}, rank of B is {B.rank}")
    p = _project_coords(A, B.matrix)
    if not p.is_integral():
        return HypothesisResult(False, p, None, "projection of B(Z) is not integral in A")
    d = det(p)
    if d == 0:
        return HypothesisResult(False, p, None, "projection B(Z) -> A is not injective")
    return HypothesisResult(True, p, abs(d))


def laplacian_A(c: CellComplex, a: SubgroupSpec, w: Weights = None, cells=None) -> Fraction:
    """det of L_A = P_A ∂R⁻¹∂*|_{A_R} in the A-basis (tree operator when cells given)."""
    n = c.cell_counts[c.dim - 1]
    A = a.basis(n).matrix
    m = _project_coords(A, weighted_operator(c, w, cells) @ A)
    return Fraction(det(m))


def gamma_A(c: CellComplex, a: SubgroupSpec, hyp: Optional[HypothesisResult] = None) -> Fraction:
    hyp = hypothesis_check(c, a) if hyp is None else hyp
    if not hyp:
        raise ValueError(f"hypothesis fails for A: {hyp.reason}")
    mu_a = gram_determinant(a.vectors)
    return Fraction(mu_a * hyp.t ** 2, theta_X(c) ** 2)


class HypothesisError(ValueError):
    pass


def verify_generalized(
    c: CellComplex, w: Weights = None, a: Optional[SubgroupSpec] = None, trees=None
) -> IdentityReport:
    """det L_A against γ_A Σ_T w_T, plus per-tree checks of the prefactor.

    A defaults to B_{d-1}(X; Z), which reduces to ``verify_matrix_tree``.

    For each tree T: γ_A = μ(A) t(p_A^T)²/θ_T², t(p_A^T)/t(p_A) equals the
    index of B(T; Z) in B(X; Z) and θ_T/θ_X, and det L_A^T = γ_A w_T.
    """
    if a is None:
        a = SubgroupSpec(boundary_lattice(c).vectors)
    hyp = hypothesis_check(c, a)
    if not hyp:
        raise HypothesisError(hyp.reason)
    w = _weights(c, w)
    trees = _trees(c, trees)
    n = c.cell_counts[c.dim - 1]
    A = a.basis(n).matrix
    D = c.boundary(c.dim)
    g = gamma_A(c, a, hyp)
    mu_a = gram_determinant(a.vectors)
    thX = theta_X(c)
    BX = boundary_lattice(c)
    failures = []
    total = Fraction(0)
    for t in trees:
        wt = t.weight(w.values)
        total += wt
        DT = D.select_columns(t.cells)
        pT = _project_coords(A, DT)
        tT = abs(det(pT))
        if Fraction(mu_a * tT ** 2, t.theta ** 2) != g:
            failures.append(f"tree {list(t.cells)}: tree-local prefactor differs")
        index = inclusion_index(LatticeBasis.from_matrix(DT), BX)
        if not (Fraction(tT, hyp.t) == index == Fraction(t.theta, thX)):
            failures.append(f"tree {list(t.cells)}: t-ratio relation fails")
        if laplacian_A(c, a, w, t.cells) != g * wt:
            failures.append(f"tree {list(t.cells)}: det L_A^T != γ_A w_T")
    return IdentityReport(
        "generalized matrix-tree",
        laplacian_A(c, a, w),
        g * total,
        {"gamma_A": g, "mu_A": mu_a, "t_pA": hyp.t, "theta_X": thX, "trees": len(trees)},
        tuple(failures),
    )


def verify_sum_decomposition(
    c: CellComplex, w: Weights = None, a: Optional[SubgroupSpec] = None, trees=None
) -> IdentityReport:
    """det L_A against Σ_T det L_A^T; A defaults to B_{d-1}(X; Z).

    For the default A the per-tree terms are also compared with
    μ_T ∏_{b∈T} 1/r_b, μ_T the squared covolume of B_{d-1}(T; Z).
    """
    w = _weights(c, w)
    trees = _trees(c, trees)
    if a is not None:
        hyp = hypothesis_check(c, a)
        if not hyp:
            raise HypothesisError(hyp.reason)
        lhs = laplacian_A(c, a, w)
        terms = [laplacian_A(c, a, w, t.cells) for t in trees]
        return IdentityReport("sum decomposition", lhs, sum(terms, Fraction(0)), {"terms": terms})
    lhs = laplacian(c, w).det
    terms = [laplacian(c, w, t.cells).det for t in trees]
    D = c.boundary(c.dim)
    mus = [gram_determinant(D.select_columns(t.cells).columns()) for t in trees]
    failures = []
    for t, term, mu in zip(trees, terms, mus):
        scale = Fraction(1)
        for b in t.cells:
            scale /= w[b]
        if term != mu * scale:
            failures.append(f"tree {list(t.cells)}: det L^T != μ_T ∏ 1/r_b")
    return IdentityReport(
        "sum decomposition",
        lhs,
        sum(terms, Fraction(0)),
        {"terms": terms, "mu_T": mus, "sum_mu": sum(mus)},
        tuple(failures),
    )


def verify_tree_local(c: CellComplex, w: Weights = None, trees=None) -> IdentityReport:
    """Per tree: det L^T = (w_T/θ_T²) det(∂_T∂_T*) and μ(B(T; Z)) = det(∂_Tᵀ∂_T).

    lhs/rhs are the numbers of trees checked and trees passing.
    """
    w = _weights(c, w)
    trees = _trees(c, trees)
    D = c.boundary(c.dim)
    failures = []
    for t in trees:
        DT = D.select_columns(t.cells)
        unweighted = laplacian(c, [1] * len(w), t.cells).det
        if laplacian(c, w, t.cells).det != t.weight(w.values) / t.theta ** 2 * unweighted:
            failures.append(f"tree {list(t.cells)}: weighted factorization fails")
        if gram_determinant(DT.columns()) != det(DT.T @ DT) or det(DT.T @ DT) != unweighted:
            failures.append(f"tree {list(t.cells)}: μ_T != det(∂_Tᵀ∂_T)")
    n = len(trees)
    return IdentityReport("tree-local factorization", Fraction(n), Fraction(n - len(failures)), {}, tuple(failures))


# ---------------------------------------------------------------------------
# Low temperature limit
# ---------------------------------------------------------------------------


class NotGoodError(ValueError):
    """W is not good for the chosen tree; ``cell`` is a violating top cell."""

    def __init__(self, cell: int, message: str):
        super().__init__(message)
        self.cell = cell


def goodness_violation(c: CellComplex, tree, w: Weights) -> Optional[int]:
    """First top cell γ ∉ T with r_γ (min_{α∈T} r_α)^k <= ∏_{α∈T} r_α, or None.

    This is the goodness condition W_γ > Σ_T W_α - k min_T W_α in the
    multiplicative variable r = e^W, with k the number of top cells.
    """
    w = _weights(c, w)
    cells = _cells(tree)
    k = c.cell_counts[-1]
    inside = set(cells)
    if cells:
        low = min(w[a] for a in cells)
        prod = Fraction(1)
        for a in cells:
            prod *= w[a]
    else:
        low, prod = Fraction(1), Fraction(1)
    for g in range(k):
        if g not in inside and not w[g] * low ** k > prod:
            return g
    return None


@dataclass(frozen=True)
class LowTemperatureReport:
    betas: tuple
    ratios: tuple
    deviations: tuple
    tolerance: Fraction

    @property
    def monotone(self) -> bool:
        return all(a > b for a, b in zip(self.deviations, self.deviations[1:]))

    @property
    def converged(self) -> bool:
        return bool(self.deviations) and self.deviations[-1] < self.tolerance

    @property
    def ok(self) -> bool:
        return self.monotone and self.converged


def low_temperature_check(
    c: CellComplex,
    tree,
    w: Weights,
    betas: Sequence[int],
    tolerance: Fraction = Fraction(1, 10 ** 6),
) -> LowTemperatureReport:
    """det L^T(βW) / det L(βW) for each β, with r_b ** β standing in for e^{βW_b}."""
    w = _weights(c, w)
    cells = _cells(tree)
    bad = goodness_violation(c, cells, w)
    if bad is not None:
        raise NotGoodError(bad, f"weights are not good for the tree: top cell {bad} violates the bound")
    ratios = []
    for beta in betas:
        wb = w.power(beta)
        ratios.append(laplacian(c, wb, cells).det / laplacian(c, wb).det)
    devs = tuple(abs(x - 1) for x in ratios)
    return LowTemperatureReport(tuple(betas), tuple(ratios), devs, Fraction(tolerance))
