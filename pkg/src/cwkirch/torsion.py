"""Squared Reidemeister torsion of a cellular chain complex, four ways.

* ``milnor_torsion_squared``: the alternating product of change-of-basis
  determinants, with explicit boundary bases and splittings.
* ``torsion_squared_laplacian``: alternating products of Laplacian
  determinants, cell weights and harmonic homology covolumes η_k.
* ``torsion_squared_tree``: Laplacian determinants replaced by weighted
  spanning-tree counts on the skeleta.
* ``torsion_squared_truncation``: one spanning tree and one homology
  truncation per degree.

Only τ² is computed; τ itself is defined up to sign.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .complex import CellComplex, betti, skeleton, torsion_order
from .linalg import (
    Matrix,
    det,
    gram_determinant,
    image_lattice_basis,
    inverse,
    kernel_lattice_basis,
    rank,
    snf,
    solve,
    torsion_order_cokernel,
)
from .trees import find_spanning_tree, fundamental_cycle, spanning_tree_cells


class DegenerateBasisError(ValueError):
    """The homology basis does not consist of cycles completing a basis of Z_k / B_k."""


class InvalidTruncationError(ValueError):
    pass


def _inv(x):
    return 1 / Fraction(x)


# ---------------------------------------------------------------------------
# Combinatorial homology bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CombinatorialBasis:
    """Per degree, a matrix whose columns are integer cycles representing h_k."""

    cycles: tuple[Matrix, ...]

    def __getitem__(self, k: int) -> Matrix:
        return self.cycles[k]

    def __len__(self):
        return len(self.cycles)

    def transform(self, k: int, u: Matrix) -> "CombinatorialBasis":
        """Replace h_k by h_k @ u."""
        cyc = list(self.cycles)
        cyc[k] = cyc[k] @ u
        return CombinatorialBasis(tuple(cyc))


def integral_homology(c: CellComplex, k: int) -> tuple[tuple[int, ...], Matrix]:
    """Torsion coefficients of H_k(X; Z) and cycle representatives of a free basis.

    Z_k(Z) has a saturated basis K; boundaries are K·A for an integer A.  In
    the SNF ``U A V = S`` the trailing coordinates of U give the free part.
    """
    n = c.count(k)
    K = kernel_lattice_basis(c.boundary(k)).matrix
    if K.cols == 0:
        return (), Matrix.zeros(n, 0)
    A = solve(K, c.boundary(k + 1))
    if A is None or not A.is_integral():  # pragma: no cover - K is saturated
        raise ArithmeticError("boundaries are not integral combinations of cycles")
    res = snf(A)
    torsion = tuple(x for x in res.invariant_factors if x != 1)
    Uinv = inverse(res.U)
    free = Uinv.select_columns(range(res.rank, K.cols))
    return torsion, K @ free


def default_combinatorial_basis(c: CellComplex) -> CombinatorialBasis:
    """Cycles whose classes freely generate H_k(X; Z)_0 in every degree."""
    return CombinatorialBasis(tuple(integral_homology(c, k)[1] for k in range(c.dim + 1)))


def _check_basis(c: CellComplex, h: CombinatorialBasis) -> None:
    if len(h) != c.dim + 1:
        raise DegenerateBasisError("one homology basis per degree is required")
    for k in range(c.dim + 1):
        hk = h[k]
        if hk.rows != c.count(k) or hk.cols != betti(c, k):
            raise DegenerateBasisError(f"degree {k}: expected {betti(c, k)} classes in C_{k}")
        if not (c.boundary(k) @ hk).is_zero():
            raise DegenerateBasisError(f"degree {k}: basis vectors are not cycles")
        B = _boundary_basis(c, k)
        if hk.cols and rank(B.hstack(hk)) != B.cols + hk.cols:
            raise DegenerateBasisError(f"degree {k}: classes are dependent modulo boundaries")


def _boundary_basis(c: CellComplex, k: int) -> Matrix:
    """Columns: Hermite Z-basis of B_k(X; Z) (empty for k = dim)."""
    return image_lattice_basis(c.boundary(k + 1)).matrix


# ---------------------------------------------------------------------------
# Milnor's definition
# ---------------------------------------------------------------------------


def random_unimodular(n: int, rng: random.Random, steps: int = 8) -> Matrix:
    """Random integer matrix of determinant ±1 from elementary operations."""
    m = Matrix.identity(n).tolist()
    if n == 0:
        return Matrix.zeros(0, 0)
    for _ in range(steps):
        if n > 1:
            i, j = rng.sample(range(n), 2)
            f = rng.randint(-2, 2)
            m[i] = [a + f * b for a, b in zip(m[i], m[j])]
        if rng.random() < 0.3:
            i = rng.randrange(n)
            m[i] = [-a for a in m[i]]
        if n > 1 and rng.random() < 0.3:
            i, j = rng.sample(range(n), 2)
            m[i], m[j] = m[j], m[i]
    return Matrix(m, (n, n))


def milnor_torsion_squared(
    c: CellComplex, h: Optional[CombinatorialBasis] = None, rng: Optional[random.Random] = None
) -> Fraction:
    """τ² from change-of-basis determinants det[b_k h_k s(b_{k-1}) / c_k].

    b_k is a Z-basis of B_k, s lifts b_{k-1} through ∂ by an echelon solve,
    and h_k is taken as given.  With ``rng`` the bases b_k get a random
    unimodular change and the lifts get random cycles added, which must not
    change the result.
    """
    h = default_combinatorial_basis(c) if h is None else h
    _check_basis(c, h)
    bases = []
    for k in range(c.dim + 1):
        b = _boundary_basis(c, k)
        if rng is not None:
            b = b @ random_unimodular(b.cols, rng)
        bases.append(b)
    tau = Fraction(1)
    for k in range(c.dim + 1):
        n = c.count(k)
        cols = bases[k].columns() + h[k].columns()
        if k >= 1:
            lifts = solve(c.boundary(k), bases[k - 1])
            if lifts is None:  # pragma: no cover
                raise ArithmeticError("boundary basis does not lift")
            if rng is not None:
                cyc = kernel_lattice_basis(c.boundary(k)).matrix
                if cyc.cols:
                    shift = Matrix(
                        [[rng.randint(-3, 3) for _ in range(lifts.cols)] for _ in range(cyc.cols)],
                        (cyc.cols, lifts.cols),
                    )
                    lifts = lifts + cyc @ shift
            cols += lifts.columns()
        if len(cols) != n:
            raise DegenerateBasisError(f"degree {k}: {len(cols)} basis vectors for {n} cells")
        dk = det(Matrix.from_columns(cols, n))
        if dk == 0:
            raise DegenerateBasisError(f"degree {k}: b_k, h_k, s(b_(k-1)) is not a basis")
        tau *= Fraction(dk) if k % 2 == 0 else _inv(dk)
    return tau * tau


# ---------------------------------------------------------------------------
# Laplacian formula
# ---------------------------------------------------------------------------


def _all_weights(c: CellComplex, w: Optional[Mapping[int, Sequence]]) -> dict[int, tuple]:
    out = {}
    for k in range(c.dim + 1):
        vals = (1,) * c.count(k) if w is None or k not in w else w[k]
        vals = tuple(Fraction(x) for x in vals)
        if len(vals) != c.count(k) or any(x <= 0 for x in vals):
            raise ValueError(f"degree {k}: need {c.count(k)} positive weights")
        out[k] = vals
    return out


def laplacian_k(c: CellComplex, k: int, w: Optional[Mapping[int, Sequence]] = None) -> Matrix:
    """L_k(W) = ∂ e^{-W_{k+1}} ∂* e^{W_k} on B_k(X; R), in the Hermite basis of B_k(Z)."""
    w = _all_weights(c, w)
    B = _boundary_basis(c, k)
    if B.cols == 0:
        return Matrix.zeros(0, 0)
    D = c.boundary(k + 1)
    op = D.scale_columns([_inv(x) for x in w[k + 1]]) @ D.T.scale_columns(w[k])
    m = solve(B, op @ B)
    if m is None:  # pragma: no cover
        raise ArithmeticError("Laplacian does not preserve B_k")
    return m


def harmonic_representatives(c: CellComplex, k: int, h: CombinatorialBasis, metric: Sequence) -> Matrix:
    """Project the cycles h_k R-orthogonally away from B_k."""
    hk = h[k]
    B = _boundary_basis(c, k)
    if B.cols == 0 or hk.cols == 0:
        return hk
    BtR = B.T.scale_columns(metric)
    coeff = solve(BtR @ B, BtR @ hk)
    return hk - B @ coeff


def eta(c: CellComplex, k: int, h: CombinatorialBasis, w: Optional[Mapping[int, Sequence]] = None) -> Fraction:
    """Squared covolume of the h_k lattice in the harmonic metric."""
    metric = _all_weights(c, w)[k]
    reps = harmonic_representatives(c, k, h, metric)
    return Fraction(gram_determinant(reps.columns(), metric))


def eta_by_gram_ratio(c: CellComplex, k: int, h: CombinatorialBasis, w=None) -> Fraction:
    """η_k as Gram(b_k ∪ h_k) / Gram(b_k), avoiding explicit projections."""
    metric = _all_weights(c, w)[k]
    B = _boundary_basis(c, k).columns()
    return Fraction(gram_determinant(B + h[k].columns(), metric), gram_determinant(B, metric))


@dataclass(frozen=True)
class LaplacianTerms:
    det_L: tuple
    eta: tuple
    cell_products: tuple

    @property
    def tau2(self) -> Fraction:
        out = Fraction(1)
        for k, (dl, et, cp) in enumerate(zip(self.det_L, self.eta, self.cell_products)):
            # even k: det L_k η_k / ∏ r ; odd k: the reciprocal
            term = dl * et / cp
            out *= term if k % 2 == 0 else 1 / term
        return out


def laplacian_terms(
    c: CellComplex, h: Optional[CombinatorialBasis] = None, w: Optional[Mapping[int, Sequence]] = None
) -> LaplacianTerms:
    h = default_combinatorial_basis(c) if h is None else h
    _check_basis(c, h)
    ws = _all_weights(c, w)
    dets, etas, prods = [], [], []
    for k in range(c.dim + 1):
        dets.append(Fraction(det(laplacian_k(c, k, ws))))
        etas.append(eta(c, k, h, ws))
        p = Fraction(1)
        for x in ws[k]:
            p *= x
        prods.append(p)
    return LaplacianTerms(tuple(dets), tuple(etas), tuple(prods))


def torsion_squared_laplacian(
    c: CellComplex, h: Optional[CombinatorialBasis] = None, w: Optional[Mapping[int, Sequence]] = None
) -> Fraction:
    """τ² = ∏_k (det L_k(W) · η_k / ∏_{b∈X_k} r_b)^{(-1)^k}."""
    return laplacian_terms(c, h, w).tau2


def torsion_squared_laplacian_gram(
    c: CellComplex, h: Optional[CombinatorialBasis] = None, w: Optional[Mapping[int, Sequence]] = None
) -> Fraction:
    """Second evaluation of the Laplacian formula through Gram determinants.

    det L_k = det(Bᵀ R_k L_k B) / det(Bᵀ R_k B) since L_k is R_k-self-adjoint,
    and η_k comes from a Gram ratio.
    """
    h = default_combinatorial_basis(c) if h is None else h
    _check_basis(c, h)
    ws = _all_weights(c, w)
    out = Fraction(1)
    for k in range(c.dim + 1):
        B = _boundary_basis(c, k)
        if B.cols:
            D = c.boundary(k + 1)
            op = D.scale_columns([_inv(x) for x in ws[k + 1]]) @ D.T.scale_columns(ws[k])
            BtR = B.T.scale_columns(ws[k])
            dl = Fraction(det(BtR @ op @ B), det(BtR @ B))
        else:
            dl = Fraction(1)
        p = Fraction(1)
        for x in ws[k]:
            p *= x
        term = dl * eta_by_gram_ratio(c, k, h, ws) / p
        out *= term if k % 2 == 0 else 1 / term
    return out


# ---------------------------------------------------------------------------
# Spanning-tree formula
# ---------------------------------------------------------------------------


def mu_k(c: CellComplex, k: int) -> int:
    """Squared covolume of B_k(X; Z) in the standard metric (1 when B_k = 0)."""
    return gram_determinant(_boundary_basis(c, k).columns())


def delta_k(c: CellComplex, k: int, h: Optional[CombinatorialBasis] = None) -> Fraction:
    """δ_k = η_k μ_k / θ_k² (unweighted)."""
    h = default_combinatorial_basis(c) if h is None else h
    return eta(c, k, h) * mu_k(c, k) / torsion_order(c, k) ** 2


def skeleton_tree_sum(c: CellComplex, k: int) -> int:
    """Σ θ_T² over spanning trees T of X^(k+1); for k = dim the only tree is X."""
    if k >= c.dim:
        return torsion_order(c, c.dim) ** 2
    sk = skeleton(c, k + 1)
    D = sk.boundary(k + 1)
    return sum(torsion_order_cokernel(D.select_columns(cells)) ** 2 for cells in spanning_tree_cells(sk))


def torsion_squared_tree(c: CellComplex, h: Optional[CombinatorialBasis] = None) -> Fraction:
    """τ² = ∏_{k=0}^{d} (δ_k Σ_{T ∈ T_{k+1}} θ_T²)^{(-1)^k} (unweighted)."""
    h = default_combinatorial_basis(c) if h is None else h
    _check_basis(c, h)
    out = Fraction(1)
    for k in range(c.dim + 1):
        term = delta_k(c, k, h) * skeleton_tree_sum(c, k)
        out *= term if k % 2 == 0 else 1 / term
    return out


# ---------------------------------------------------------------------------
# Homology truncations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationData:
    """Per degree k: top cells of T^k ⊂ X^(k) and of V^k, with T^k ⊆ V^k.

    T^0 is empty and V^0 is a single vertex.  Lower-dimensional cells are
    always the full (k-1)-skeleton.
    """

    trees: tuple[tuple[int, ...], ...]
    truncations: tuple[tuple[int, ...], ...]


def _tree_cells_for_skeleton(c: CellComplex, k: int) -> tuple[int, ...]:
    return find_spanning_tree(skeleton(c, k)).cells


def find_truncation(c: CellComplex, trees: Optional[Mapping[int, Sequence[int]]] = None) -> TruncationData:
    """Extend each T^k by β_k cells whose fundamental cycles are independent in H_k(X; R)."""
    tree_cells = [()]
    for k in range(1, c.dim + 1):
        given = None if trees is None else trees.get(k)
        if given is None:
            given = _tree_cells_for_skeleton(c, k)
        tree_cells.append(tuple(sorted(given)))
    truncs = [(0,)]
    for k in range(1, c.dim + 1):
        sk = skeleton(c, k)
        T = tree_cells[k]
        B = _boundary_basis(c, k)
        chosen = list(T)
        current = B.columns()
        r = len(current)
        need = betti(c, k)
        for b in range(c.count(k)):
            if need == 0:
                break
            if b in T:
                continue
            z = fundamental_cycle(sk, T, b)
            if rank(Matrix.from_columns(current + [z], c.count(k))) > r:
                current.append(z)
                r += 1
                chosen.append(b)
                need -= 1
        truncs.append(tuple(sorted(chosen)))
    td = TruncationData(tuple(tree_cells), tuple(truncs))
    check_truncation(c, td)
    return td


def check_truncation(c: CellComplex, td: TruncationData) -> None:
    """Rank checks that V^k ⊇ T^k and i_*: H_*(V^k; R) → H_*(X; R) is an iso for * <= k."""
    if len(td.trees) != c.dim + 1 or len(td.truncations) != c.dim + 1:
        raise InvalidTruncationError("need tree and truncation data in every degree")
    if td.trees[0] != () or len(td.truncations[0]) != 1:
        raise InvalidTruncationError("T^0 must be empty and V^0 a single vertex")
    for k in range(1, c.dim + 1):
        T, V = set(td.trees[k]), set(td.truncations[k])
        if not T <= V:
            raise InvalidTruncationError(f"degree {k}: T^k is not contained in V^k")
        Dk = c.boundary(k)
        if len(T) != rank(Dk) or rank(Dk.select_columns(sorted(T))) != len(T):
            raise InvalidTruncationError(f"degree {k}: T^k is not a spanning tree of X^({k})")
        DV = Dk.select_columns(sorted(V))
        # degree k-1: V^k keeps the (k-1)-skeleton, so equal Betti numbers suffice
        if rank(DV) != rank(Dk):
            raise InvalidTruncationError(f"degree {k}: H_{k - 1}(V^k) differs from H_{k - 1}(X)")
        ZV = _embed(kernel_lattice_basis(DV).matrix, sorted(V), c.count(k))
        B = _boundary_basis(c, k)
        if ZV.cols != betti(c, k) or rank(B.hstack(ZV)) != B.cols + ZV.cols:
            raise InvalidTruncationError(f"degree {k}: H_{k}(V^k) -> H_{k}(X) is not an isomorphism")


def _embed(m: Matrix, rows: Sequence[int], n: int) -> Matrix:
    """Place the rows of m at positions ``rows`` of an n-row zero matrix."""
    out = [[0] * m.cols for _ in range(n)]
    for i, r in enumerate(rows):
        out[r] = list(m.row(i))
    return Matrix(out, (n, m.cols))


@dataclass(frozen=True)
class TruncationTerms:
    theta_T: tuple
    theta_V: tuple
    t_q: tuple
    chi: tuple

    @property
    def tau2(self) -> Fraction:
        out = Fraction(1)
        for k, (tt, tv, tq, ch) in enumerate(zip(self.theta_T, self.theta_V, self.t_q, self.chi)):
            term = Fraction(tt * tt * tq * tq) / (tv * tv * ch)
            out *= term if k % 2 == 0 else 1 / term
        return out


def truncation_terms(
    c: CellComplex, td: Optional[TruncationData] = None, h: Optional[CombinatorialBasis] = None
) -> TruncationTerms:
    h = default_combinatorial_basis(c) if h is None else h
    _check_basis(c, h)
    td = find_truncation(c) if td is None else td
    check_truncation(c, td)
    d = c.dim
    tT, tV, tq, chi = [], [], [], []
    for k in range(d + 1):
        if k == 0:
            tT.append(1)
            tV.append(1)
        else:
            Dk = c.boundary(k)
            tT.append(torsion_order_cokernel(Dk.select_columns(td.trees[k])))
            tV.append(torsion_order_cokernel(Dk.select_columns(td.truncations[k])))
        # q_k: B_k(T^{k+1}; Z) -> C_k(X / V^k; Z), coordinate projection
        if k < d:
            cols = c.boundary(k + 1).select_columns(td.trees[k + 1])
            outside = [i for i in range(c.count(k)) if i not in set(td.truncations[k])]
            q = cols.select_rows(outside)
            if q.rows != q.cols or det(q) == 0:
                raise InvalidTruncationError(f"degree {k}: q_k is not a real isomorphism")
            tq.append(abs(det(q)))
        else:
            tq.append(1)
        # χ_k: squared determinant of H_k(V^k; Z) -> H_k(X) in the basis h_k
        V = td.truncations[k]
        if k == 0:
            ZV = Matrix.from_columns([tuple(int(i == V[0]) for i in range(c.count(0)))], c.count(0))
        else:
            ZV = _embed(kernel_lattice_basis(c.boundary(k).select_columns(V)).matrix, V, c.count(k))
        B = _boundary_basis(c, k)
        coords = solve(h[k].hstack(B), ZV)
        if coords is None:
            raise InvalidTruncationError(f"degree {k}: cycles of V^k are not in span(h_k, B_k)")
        a = coords.select_rows(range(h[k].cols))
        if a.rows != a.cols:
            raise InvalidTruncationError(f"degree {k}: rank of H_k(V^k) is wrong")
        dk = det(a)
        if dk == 0:
            raise InvalidTruncationError(f"degree {k}: i_* is not an isomorphism")
        chi.append(Fraction(dk) ** 2)
    return TruncationTerms(tuple(tT), tuple(tV), tuple(tq), tuple(chi))


def torsion_squared_truncation(
    c: CellComplex, td: Optional[TruncationData] = None, h: Optional[CombinatorialBasis] = None
) -> Fraction:
    """τ² = ∏_k (θ_{T^k}² t(q_k)² / (θ_{V^k}² χ_k))^{(-1)^k}."""
    return truncation_terms(c, td, h).tau2


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionReport:
    tau2_milnor: Fraction
    tau2_laplacian: Fraction
    tau2_tree: Optional[Fraction]
    tau2_truncation: Fraction
    intermediates: dict = field(default_factory=dict)

    @property
    def values(self) -> dict:
        out = {
            "milnor": self.tau2_milnor,
            "laplacian": self.tau2_laplacian,
            "truncation": self.tau2_truncation,
        }
        if self.tau2_tree is not None:
            out["tree"] = self.tau2_tree
        return out

    @property
    def agree(self) -> bool:
        return len(set(self.values.values())) == 1


def torsion_report(
    c: CellComplex,
    h: Optional[CombinatorialBasis] = None,
    td: Optional[TruncationData] = None,
    w: Optional[Mapping[int, Sequence]] = None,
    seed: int = 0,
) -> TorsionReport:
    """Run every method; the tree formula only applies when W = 0.

    Milnor's value is computed twice, the second time with randomized
    bases and splittings, and the two must agree.
    """
    h = default_combinatorial_basis(c) if h is None else h
    milnor = milnor_torsion_squared(c, h)
    again = milnor_torsion_squared(c, h, random.Random(seed))
    if again != milnor:
        raise ArithmeticError(f"Milnor torsion depends on choices: {milnor} != {again}")
    weighted = w is not None and any(Fraction(x) != 1 for vals in w.values() for x in vals)
    lap = laplacian_terms(c, h, w)
    tree = None if weighted else torsion_squared_tree(c, h)
    td = find_truncation(c) if td is None else td
    trunc = truncation_terms(c, td, h)
    unweighted = laplacian_terms(c, h) if weighted else lap
    inter = {
        "det_L": lap.det_L,
        "eta": lap.eta,
        "mu": tuple(mu_k(c, k) for k in range(c.dim + 1)),
        "theta": tuple(torsion_order(c, k) for k in range(c.dim + 1)),
        "delta": tuple(
            unweighted.eta[k] * mu_k(c, k) / torsion_order(c, k) ** 2 for k in range(c.dim + 1)
        ),
        "tree_sums": tuple(skeleton_tree_sum(c, k) for k in range(c.dim + 1)),
        "theta_T": trunc.theta_T,
        "theta_V": trunc.theta_V,
        "t_q": trunc.t_q,
        "chi": trunc.chi,
        "truncation": {"trees": td.trees, "truncations": td.truncations},
    }
    return TorsionReport(milnor, lap.tau2, tree, trunc.tau2, inter)
