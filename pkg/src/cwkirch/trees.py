"""Higher-dimensional spanning trees.

A spanning tree of a d-dimensional complex X keeps the whole (d-1)-skeleton
and a set of d-cells whose boundary columns form a basis of the column
matroid of D_d: the columns are independent (no d-cycles) and span the
boundary space (the (d-1)-st Betti number is unchanged).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Optional, Sequence

from .complex import CellComplex, SubcomplexSpec
from .linalg import Matrix, kernel_lattice_basis, rank, torsion_order_cokernel


class NotSpanningTreeError(ValueError):
    pass


def _top(c: CellComplex) -> Matrix:
    if c.dim < 1:
        raise ValueError("spanning trees need a complex of dimension >= 1")
    return c.boundary(c.dim)


def _cells(t) -> tuple[int, ...]:
    if isinstance(t, SpanningTree):
        return t.top_cells.top_cells
    if isinstance(t, SubcomplexSpec):
        return t.top_cells
    return tuple(sorted(set(t)))


def is_spanning_tree(c: CellComplex, cells) -> bool:
    cells = _cells(cells)
    d = _top(c)
    r = rank(d)
    return len(cells) == r and rank(d.select_columns(cells)) == r


def _require_tree(c: CellComplex, cells) -> tuple[int, ...]:
    cells = _cells(cells)
    if not is_spanning_tree(c, cells):
        raise NotSpanningTreeError(f"cells {list(cells)} do not form a spanning tree")
    return cells


def is_essential(c: CellComplex, b: int) -> bool:
    """True iff some real d-cycle has nonzero coefficient on top cell b."""
    d = _top(c)
    if not 0 <= b < d.cols:
        raise IndexError(f"top cell {b} out of range")
    others = [j for j in range(d.cols) if j != b]
    return rank(d.select_columns(others)) == rank(d)


def tree_theta(c: CellComplex, t) -> int:
    """Order of the torsion subgroup of H_{d-1}(T; Z)."""
    cells = _require_tree(c, t)
    return torsion_order_cokernel(_top(c).select_columns(cells))


def fundamental_cycle(c: CellComplex, cells: Sequence[int], b: int) -> tuple[int, ...]:
    """Primitive integer generator of Z_d(T ∪ b; Z) as a vector over all d-cells.

    Sign: the first nonzero coordinate is positive.
    """
    d = _top(c)
    sub = sorted(set(cells) | {b})
    ker = kernel_lattice_basis(d.select_columns(sub))
    if ker.rank != 1:
        raise NotSpanningTreeError(f"T ∪ {b} has {ker.rank} independent cycles, expected 1")
    gen = ker.vectors[0]
    full = [0] * d.cols
    for j, x in zip(sub, gen):
        full[j] = x
    lead = next(x for x in full if x != 0)
    if lead < 0:
        full = [-x for x in full]
    return tuple(full)


def tbar_matrix(c: CellComplex, t) -> tuple[Matrix, dict[int, int]]:
    """The operator T̄ as an n_d x n_d rational matrix, and the values t_b.

    Column b is zero for b in T and c/t_b otherwise, where c generates the
    cycles of T ∪ b and t_b is its b-coordinate.
    """
    cells = _require_tree(c, t)
    n = c.cell_counts[-1]
    cols = []
    tvals: dict[int, int] = {}
    inside = set(cells)
    for b in range(n):
        if b in inside:
            cols.append((0,) * n)
            continue
        cyc = fundamental_cycle(c, cells, b)
        tb = cyc[b]
        tvals[b] = tb
        cols.append(tuple(Fraction(x, tb) for x in cyc))
    return Matrix.from_columns(cols, n), tvals


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree of ``complex``; derived quantities are computed lazily."""

    complex: CellComplex
    top_cells: SubcomplexSpec

    @cached_property
    def theta(self) -> int:
        return torsion_order_cokernel(_top(self.complex).select_columns(self.top_cells.top_cells))

    @cached_property
    def _tbar(self) -> tuple[Matrix, dict[int, int]]:
        return tbar_matrix(self.complex, self.top_cells)

    @property
    def tbar(self) -> Matrix:
        return self._tbar[0]

    @property
    def t_values(self) -> dict[int, int]:
        return dict(self._tbar[1])

    @property
    def cells(self) -> tuple[int, ...]:
        return self.top_cells.top_cells

    def weight(self, r: Optional[Sequence] = None) -> Fraction:
        return tree_weight(self.complex, self, r)


def make_tree(c: CellComplex, cells) -> SpanningTree:
    return SpanningTree(c, SubcomplexSpec(_require_tree(c, cells)))


def tree_weight(c: CellComplex, t, r: Optional[Sequence] = None) -> Fraction:
    """w_T = θ_T² · ∏_{b ∈ T} 1/r_b, with r defaulting to the complex's d-weights."""
    cells = _cells(t)
    theta = t.theta if isinstance(t, SpanningTree) else tree_theta(c, cells)
    r = c.resistances() if r is None else r
    w = Fraction(theta * theta)
    for b in cells:
        w /= Fraction(r[b])
    return w


def find_spanning_tree(c: CellComplex) -> SpanningTree:
    """Remove essential top cells (lowest index first) until no cycles remain."""
    d = _top(c)
    cells = list(range(d.cols))
    target = rank(d)
    while len(cells) > target:
        for b in cells:
            rest = [j for j in cells if j != b]
            if rank(d.select_columns(rest)) == target:
                cells = rest
                break
        else:  # pragma: no cover - impossible for a valid complex
            raise RuntimeError("no essential cell found")
    return SpanningTree(c, SubcomplexSpec(cells))


class _Echelon:
    """Incremental row-echelon basis over Q for independence tests."""

    __slots__ = ("rows",)

    def __init__(self, rows=()):
        self.rows = list(rows)  # (pivot, vector) pairs

    def reduce(self, v):
        v = list(v)
        for p, row in self.rows:
            if v[p] != 0:
                f = Fraction(v[p], 1) / row[p]
                v = [x - f * y for x, y in zip(v, row)]
        return v

    def extended(self, v) -> Optional["_Echelon"]:
        w = self.reduce(v)
        p = next((i for i, x in enumerate(w) if x != 0), None)
        if p is None:
            return None
        return _Echelon(self.rows + [(p, w)])


def spanning_tree_cells(c: CellComplex) -> Iterator[tuple[int, ...]]:
    """Bases of the column matroid of D_d, in lexicographic order."""
    d = _top(c)
    target = rank(d)
    n = d.cols
    columns = d.columns()

    def rec(start: int, chosen: tuple[int, ...], ech: _Echelon):
        need = target - len(chosen)
        if need == 0:
            yield chosen
            return
        for j in range(start, n - need + 1):
            nxt = ech.extended(columns[j])
            if nxt is not None:
                yield from rec(j + 1, chosen + (j,), nxt)

    yield from rec(0, (), _Echelon())


def enumerate_spanning_trees(c: CellComplex) -> Iterator[SpanningTree]:
    """Every spanning tree exactly once, lexicographic in the sorted cell sets."""
    for cells in spanning_tree_cells(c):
        yield SpanningTree(c, SubcomplexSpec(cells))


def count_spanning_trees(c: CellComplex) -> int:
    return sum(1 for _ in spanning_tree_cells(c))


def theta_squared_sum(c: CellComplex) -> int:
    """Σ_T θ_T² over all spanning trees."""
    d = _top(c)
    return sum(torsion_order_cokernel(d.select_columns(cells)) ** 2 for cells in spanning_tree_cells(c))
