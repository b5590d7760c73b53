"""Finite CW complexes given by integer boundary matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .linalg import Matrix, as_matrix, rank, torsion_order_cokernel


class InvalidComplexError(ValueError):
    """Raised when a complex fails validation where a valid one is required."""


@dataclass(frozen=True)
class ChainVector:
    """Rational chain in a fixed degree, in the cell basis."""

    degree: int
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(x) for x in self.coords))

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    @classmethod
    def zero(cls, degree: int, n: int) -> "ChainVector":
        return cls(degree, (0,) * n)


@dataclass(frozen=True)
class SubcomplexSpec:
    """The d-cells kept in a subcomplex; all lower cells are always kept."""

    top_cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "top_cells", tuple(sorted(set(int(i) for i in self.top_cells))))

    def __iter__(self):
        return iter(self.top_cells)

    def __len__(self):
        return len(self.top_cells)

    def __contains__(self, b) -> bool:
        return b in self.top_cells


@dataclass(frozen=True)
class CellComplex:
    """A finite CW complex of dimension ``len(cell_counts) - 1``.

    ``boundaries[k-1]`` is the integer matrix of the boundary map from
    k-chains to (k-1)-chains, of shape ``cell_counts[k-1] x cell_counts[k]``.
    ``weights[k]`` holds one positive rational per k-cell (the resistance);
    missing degrees default to all ones.
    """

    cell_counts: tuple[int, ...]
    boundaries: tuple[Matrix, ...]
    weights: Mapping[int, tuple] = field(default_factory=dict)
    name: str = ""
    cell_names: Optional[Mapping[int, tuple]] = None

    def __post_init__(self):
        counts = tuple(int(n) for n in self.cell_counts)
        object.__setattr__(self, "cell_counts", counts)
        bds = []
        for k, m in enumerate(self.boundaries, start=1):
            if isinstance(m, Matrix):
                bds.append(m)
            else:
                shape = (counts[k - 1], counts[k]) if k < len(counts) else None
                bds.append(as_matrix(m, shape))
        object.__setattr__(self, "boundaries", tuple(bds))
        w = {}
        for k in range(len(counts)):
            given = self.weights.get(k) if self.weights else None
            w[k] = tuple(Fraction(x) for x in given) if given is not None else (Fraction(1),) * counts[k]
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return len(self.cell_counts) - 1

    def boundary(self, k: int) -> Matrix:
        """D_k; zero matrices outside 1..dim."""
        if 1 <= k <= self.dim:
            return self.boundaries[k - 1]
        if k == 0:
            return Matrix.zeros(0, self.cell_counts[0])
        if k == self.dim + 1:
            return Matrix.zeros(self.cell_counts[self.dim], 0)
        raise IndexError(f"no boundary map in degree {k}")

    def count(self, k: int) -> int:
        return self.cell_counts[k] if 0 <= k <= self.dim else 0

    def resistances(self, k: Optional[int] = None) -> tuple:
        return self.weights[self.dim if k is None else k]

    def with_weights(self, degree: int, values: Sequence) -> "CellComplex":
        w = dict(self.weights)
        w[degree] = tuple(Fraction(x) for x in values)
        return CellComplex(self.cell_counts, self.boundaries, w, self.name, self.cell_names)

    def unweighted(self) -> "CellComplex":
        return CellComplex(self.cell_counts, self.boundaries, {}, self.name, self.cell_names)

    def is_weighted(self) -> bool:
        return any(x != 1 for ws in self.weights.values() for x in ws)


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


def validate(c: CellComplex) -> ValidationReport:
    """Check shapes, ∂∂ = 0, weight positivity and connectedness."""
    problems = []
    n = c.cell_counts
    if not n or n[0] < 1:
        problems.append("complex needs at least one vertex")
    if any(x < 0 for x in n):
        problems.append("negative cell count")
    if len(c.boundaries) != c.dim:
        problems.append(f"expected {c.dim} boundary matrices, got {len(c.boundaries)}")
        return ValidationReport(tuple(problems))
    shapes_ok = True
    for k, m in enumerate(c.boundaries, start=1):
        if m.shape != (n[k - 1], n[k]):
            problems.append(f"D_{k} has shape {m.shape}, expected {(n[k - 1], n[k])}")
            shapes_ok = False
        elif not m.is_integral():
            problems.append(f"D_{k} has non-integer entries")
            shapes_ok = False
    if shapes_ok:
        for k in range(2, c.dim + 1):
            prod = c.boundary(k - 1) @ c.boundary(k)
            bad = [(i, j) for i in range(prod.rows) for j in range(prod.cols) if prod[i, j] != 0]
            for i, j in bad:
                problems.append(
                    f"D_{k - 1}·D_{k} != 0 at ({k - 2}-cell {i}, {k}-cell {j}): value {prod[i, j]}"
                )
    for k in range(c.dim + 1):
        ws = c.weights.get(k, ())
        if len(ws) != n[k]:
            problems.append(f"degree {k} has {len(ws)} weights for {n[k]} cells")
        for i, x in enumerate(ws):
            if x <= 0:
                problems.append(f"weight of {k}-cell {i} is not positive: {x}")
    if shapes_ok and n and n[0] >= 1:
        if c.dim == 0 and n[0] != 1:
            problems.append("a 0-dimensional complex must be a single vertex")
        elif c.dim >= 1 and rank(c.boundary(1)) != n[0] - 1:
            problems.append("complex is not connected")
    return ValidationReport(tuple(problems))


def require_valid(c: CellComplex) -> CellComplex:
    report = validate(c)
    if not report.ok:
        raise InvalidComplexError("; ".join(report.problems))
    return c


def skeleton(c: CellComplex, k: int) -> CellComplex:
    """The k-skeleton X^(k)."""
    if k < 0 or k > c.dim:
        raise ValueError(f"skeleton degree {k} outside 0..{c.dim}")
    names = None if c.cell_names is None else {j: v for j, v in c.cell_names.items() if j <= k}
    return CellComplex(
        c.cell_counts[: k + 1],
        c.boundaries[:k],
        {j: c.weights[j] for j in range(k + 1)},
        c.name,
        names,
    )


def restrict_top(c: CellComplex, s) -> CellComplex:
    """Subcomplex with the full (d-1)-skeleton and only the top cells in ``s``."""
    if c.dim < 1:
        raise ValueError("restrict_top needs a complex of dimension >= 1")
    cells = tuple(s.top_cells if isinstance(s, SubcomplexSpec) else sorted(set(s)))
    nd = c.cell_counts[-1]
    for b in cells:
        if not 0 <= b < nd:
            raise IndexError(f"top cell {b} out of range 0..{nd - 1}")
    d = c.dim
    weights = dict(c.weights)
    weights[d] = tuple(c.weights[d][b] for b in cells)
    names = None
    if c.cell_names is not None:
        names = dict(c.cell_names)
        if d in names:
            names[d] = tuple(names[d][b] for b in cells)
    return CellComplex(
        c.cell_counts[:-1] + (len(cells),),
        c.boundaries[:-1] + (c.boundaries[-1].select_columns(cells),),
        weights,
        c.name,
        names,
    )


def boundary_rank(c: CellComplex, k: int) -> int:
    if k < 1 or k > c.dim:
        return 0
    return rank(c.boundary(k))


def betti(c: CellComplex, k: int) -> int:
    """Rational Betti number n_k - rank D_k - rank D_{k+1}."""
    if k < 0 or k > c.dim:
        raise ValueError(f"degree {k} outside 0..{c.dim}")
    return c.cell_counts[k] - boundary_rank(c, k) - boundary_rank(c, k + 1)


def betti_numbers(c: CellComplex) -> tuple[int, ...]:
    return tuple(betti(c, k) for k in range(c.dim + 1))


def euler_characteristic(c: CellComplex) -> int:
    return sum((-1) ** k * n for k, n in enumerate(c.cell_counts))


def torsion_order(c: CellComplex, k: int) -> int:
    """Order of the torsion subgroup of H_k(X; Z).

    C_k / Z_k is free, so this is the torsion of coker D_{k+1}.
    """
    if k < 0 or k > c.dim:
        raise ValueError(f"degree {k} outside 0..{c.dim}")
    if k == c.dim:
        return 1
    return torsion_order_cokernel(c.boundary(k + 1))
