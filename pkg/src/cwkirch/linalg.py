"""Exact integer and rational linear algebra.

Everything here works on :class:`Matrix`, a small immutable dense matrix whose
entries are Python ints or :class:`fractions.Fraction`.  No floating point is
used anywhere.  Matrices carry their shape explicitly so that empty matrices
(0 rows or 0 columns) behave correctly, which matters for degenerate chain
complexes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from numbers import Rational
from typing import Iterable, Optional, Sequence



def _normalize(x):
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, Rational):
        return _normalize(Fraction(x.numerator, x.denominator))
    if isinstance(x, str):
        return _normalize(Fraction(x))
    raise TypeError(f"non-exact matrix entry {x!r} of type {type(x).__name__}")


class Matrix:
    """Dense exact matrix with an explicit shape.

    Entries are normalized so that integral fractions are stored as ``int``.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Iterable] = (), shape: Optional[tuple[int, int]] = None):
        rows = tuple(tuple(_normalize(x) for x in row) for row in data)
        if shape is None:
            if not rows:
                raise ValueError("shape is required for a matrix without rows")
            shape = (len(rows), len(rows[0]))
        r, c = shape
        if len(rows) != r or any(len(row) != c for row in rows):
            raise ValueError(f"entries do not match shape {shape}")
        self.rows = r
        self.cols = c
        self._data = rows

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls([[0] * cols for _ in range(rows)], (rows, cols))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], (n, n))

    @classmethod
    def diag(cls, values: Sequence, shape: Optional[tuple[int, int]] = None) -> "Matrix":
        n = len(values)
        r, c = shape or (n, n)
        m = [[0] * c for _ in range(r)]
        for i, v in enumerate(values):
            m[i][i] = v
        return cls(m, (r, c))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "Matrix":
        columns = [tuple(col) for col in columns]
        for col in columns:
            if len(col) != nrows:
                raise ValueError("column length does not match nrows")
        return cls([[col[i] for col in columns] for i in range(nrows)], (nrows, len(columns)))

    # -- access -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self._data)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list]:
        return [list(row) for row in self._data]

    def select_columns(self, idx: Sequence[int]) -> "Matrix":
        return Matrix([[row[j] for j in idx] for row in self._data], (self.rows, len(idx)))

    def select_rows(self, idx: Sequence[int]) -> "Matrix":
        return Matrix([self._data[i] for i in idx], (len(idx), self.cols))

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row counts differ")
        return Matrix([a + b for a, b in zip(self._data, other._data)], (self.rows, self.cols + other.cols))

    @property
    def T(self) -> "Matrix":
        return Matrix([self.column(j) for j in range(self.cols)], (self.cols, self.rows))

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for row in self._data for x in row)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self._data for x in row)

    # -- arithmetic ---------------------------------------------------------

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            ocols = other.columns()
            return Matrix(
                [[sum((a * b for a, b in zip(row, col)), 0) for col in ocols] for row in self._data],
                (self.rows, other.cols),
            )
        vec = tuple(other)
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(_normalize(sum((a * b for a, b in zip(row, vec)), 0)) for row in self._data)

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._data, other._data)], self.shape)

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self._data, other._data)], self.shape)

    def __neg__(self) -> "Matrix":
        return Matrix([[-a for a in row] for row in self._data], self.shape)

    def scale(self, s) -> "Matrix":
        return Matrix([[s * a for a in row] for row in self._data], self.shape)

    def scale_columns(self, factors: Sequence) -> "Matrix":
        return Matrix([[a * f for a, f in zip(row, factors)] for row in self._data], self.shape)

    def scale_rows(self, factors: Sequence) -> "Matrix":
        return Matrix([[a * f for a in row] for row, f in zip(self._data, factors)], self.shape)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.shape, self._data))

    def __repr__(self) -> str:
        return f"Matrix({self.tolist()!r}, shape={self.shape})"

    # -- derived quantities -------------------------------------------------

    def det(self):
        return det(self)

    def rank(self) -> int:
        return rank(self)


def as_matrix(m, shape: Optional[tuple[int, int]] = None) -> Matrix:
    if isinstance(m, Matrix):
        return m
    return Matrix(m, shape)


def column_matrix(vectors: Sequence[Sequence], ambient_dim: int) -> Matrix:
    """Matrix whose columns are ``vectors``."""
    return Matrix.from_columns(vectors, ambient_dim)


# ---------------------------------------------------------------------------
# Rational elimination
# ---------------------------------------------------------------------------


def det(m: Matrix):
    """Exact determinant by fraction-free (Bareiss) elimination.

    The determinant of a 0x0 matrix is 1.
    """
    n = m.rows
    if m.cols != n:
        raise ValueError(f"determinant of non-square matrix {m.shape}")
    if n == 0:
        return 1
    a = m.tolist()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                v = row_i[j] * akk - aik * row_k[j]
                row_i[j] = v // prev if isinstance(v, int) and isinstance(prev, int) else v / prev
            row_i[k] = 0
        prev = akk
    return _normalize(sign * a[n - 1][n - 1])


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q and the pivot column indices."""
    a = [[Fraction(x) for x in row] for row in m.tolist()]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        p = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return Matrix(a, m.shape), pivots


def rank(m: Matrix) -> int:
    """Rank over Q."""
    return len(rref(m)[1])


def solve(a: Matrix, b: Matrix) -> Optional[Matrix]:
    """A particular solution X of ``a @ X == b`` over Q, or None if inconsistent.

    Free variables are set to zero.
    """
    if a.rows != b.rows:
        raise ValueError("row counts differ")
    red, pivots = rref(a.hstack(b))
    n = a.cols
    if any(p >= n for p in pivots):
        return None
    x = [[Fraction(0)] * b.cols for _ in range(n)]
    for i, p in enumerate(pivots):
        for j in range(b.cols):
            x[p][j] = red[i, n + j]
    return Matrix(x, (n, b.cols))


def solve_vector(a: Matrix, v: Sequence) -> Optional[tuple]:
    x = solve(a, Matrix.from_columns([tuple(v)], a.rows))
    return None if x is None else x.column(0)


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ValueError("inverse of non-square matrix")
    red, pivots = rref(m.hstack(Matrix.identity(m.rows)))
    if pivots != list(range(m.rows)):
        raise ZeroDivisionError("matrix is singular")
    return red.select_columns(range(m.rows, 2 * m.rows))


def nullspace(m: Matrix) -> list[tuple]:
    """A Q-basis of ker(m), one vector per free column of the RREF."""
    red, pivots = rref(m)
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i, f]
        basis.append(tuple(_normalize(x) for x in v))
    return basis


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to a primitive integer vector.

    The first nonzero coordinate of the result is positive.
    """
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SNFResult:
    """``U @ M @ V == S`` with U, V unimodular and S diagonal.

    The nonzero diagonal entries of S are positive and each divides the next.
    """

    U: Matrix
    S: Matrix
    V: Matrix

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        k = min(self.S.shape)
        return tuple(self.S[i, i] for i in range(k) if self.S[i, i] != 0)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)


def snf(m: Matrix) -> SNFResult:
    """Smith normal form with transforms.

    Pivots are always the nonzero entry of least absolute value in the
    remaining block, ties broken by (row, column) order, so the output is
    deterministic.
    """
    if not m.is_integral():
        raise ValueError("Smith normal form needs an integer matrix")
    r, c = m.shape
    a = m.tolist()
    U = Matrix.identity(r).tolist()
    V = Matrix.identity(c).tolist()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):  # col_dst += f * col_src
        for row in a:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    t = 0
    while t < min(r, c):
        best = None
        for i in range(t, r):
            for j in range(t, c):
                x = a[i][j]
                if x != 0 and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, pi, pj = best
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, r):
                if a[i][t] != 0:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, c):
                if a[t][j] != 0:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                # a remainder is now smaller than the pivot; move it into place
                best = None
                for i in range(t, r):
                    x = a[i][t]
                    if x != 0 and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, t)
                for j in range(t, c):
                    x = a[t][j]
                    if x != 0 and (best is None or abs(x) < best[0]):
                        best = (abs(x), t, j)
                _, bi, bj = best
                swap_rows(t, bi)
                swap_cols(t, bj)
                continue
            # pivot must divide the rest of the block
            bad = next(
                ((i, j) for i in range(t + 1, r) for j in range(t + 1, c) if a[i][j] % p != 0),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return SNFResult(Matrix(U, (r, r)), Matrix(a, (r, c)), Matrix(V, (c, c)))


def invariant_factors(m: Matrix) -> tuple[int, ...]:
    return snf(m).invariant_factors


def torsion_order_cokernel(m: Matrix) -> int:
    """Order of the torsion subgroup of coker(m): product of invariant factors."""
    out = 1
    for d in invariant_factors(m):
        out *= d
    return out


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeBasis:
    """Q-linearly independent integer vectors in Z^ambient_dim."""

    ambient_dim: int
    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(tuple(int(x) for x in v) for v in self.vectors))
        for v in self.vectors:
            if len(v) != self.ambient_dim:
                raise ValueError("vector length does not match ambient dimension")

    @property
    def rank(self) -> int:
        return len(self.vectors)

    @property
    def matrix(self) -> Matrix:
        """Basis vectors as columns."""
        return Matrix.from_columns(self.vectors, self.ambient_dim)

    @classmethod
    def from_matrix(cls, m: Matrix) -> "LatticeBasis":
        return cls(m.rows, tuple(m.columns()))

    def transform(self, u: Matrix) -> "LatticeBasis":
        """New basis ``B @ u`` (u square, integer)."""
        return LatticeBasis.from_matrix(self.matrix @ u)


def hermite_column_basis(m: Matrix) -> Matrix:
    """Column-style Hermite normal form of the column lattice of m.

    Returns a matrix whose columns are a Z-basis of m(Z^cols), in echelon
    form: pivots move strictly downward, are positive, and the entries left
    of each pivot in its row are reduced into ``[0, pivot)``.
    """
    if not m.is_integral():
        raise ValueError("Hermite normal form needs an integer matrix")
    pool = [list(col) for col in m.columns() if any(col)]
    basis: list[list[int]] = []
    for i in range(m.rows):
        live = [v for v in pool if v[i] != 0]
        rest = [v for v in pool if v[i] == 0]
        while len(live) > 1:
            live.sort(key=lambda v: abs(v[i]))
            piv = live[0]
            nxt = [piv]
            for v in live[1:]:
                q = v[i] // piv[i]
                w = [x - q * y for x, y in zip(v, piv)]
                if w[i] != 0:
                    nxt.append(w)
                elif any(w):
                    rest.append(w)
            live = nxt
        if live:
            g = live[0]
            if g[i] < 0:
                g = [-x for x in g]
            for b in basis:
                q = b[i] // g[i]
                if q:
                    b[:] = [x - q * y for x, y in zip(b, g)]
            basis.append(g)
        pool = rest
    return Matrix.from_columns(basis, m.rows)


def image_lattice_basis(m: Matrix) -> LatticeBasis:
    """Z-basis of the image lattice m(Z^cols) in Hermite normal form."""
    return LatticeBasis.from_matrix(hermite_column_basis(m))


def kernel_lattice_basis(m: Matrix) -> LatticeBasis:
    """Saturated Z-basis of ker(m) ∩ Z^cols.

    Taken from the trailing columns of the right SNF transform and then put
    in Hermite normal form, so Z^cols / kernel is torsion free.
    """
    res = snf(m)
    k = res.rank
    raw = res.V.select_columns(range(k, m.cols))
    return LatticeBasis.from_matrix(hermite_column_basis(raw)) if raw.cols else LatticeBasis(m.cols, ())


def gram_matrix(vectors: Sequence[Sequence], metric: Optional[Sequence] = None) -> Matrix:
    """Pairwise inner products under a diagonal metric (default: standard)."""
    n = len(vectors)
    vs = [tuple(v) for v in vectors]
    dim = len(vs[0]) if vs else 0
    w = [1] * dim if metric is None else list(metric)
    return Matrix(
        [[sum((a * wk * b for a, wk, b in zip(vi, w, vj)), 0) for vj in vs] for vi in vs],
        (n, n),
    )


def gram_determinant(basis, metric: Optional[Sequence] = None):
    """Squared covolume of a lattice: determinant of its Gram matrix.

    ``basis`` is a LatticeBasis or a sequence of (possibly rational) vectors.
    ``metric`` holds the positive diagonal of the inner product.  The empty
    basis has Gram determinant 1.
    """
    vectors = basis.vectors if isinstance(basis, LatticeBasis) else [tuple(v) for v in basis]
    if metric is not None and any(Fraction(x) <= 0 for x in metric):
        raise ValueError("metric must be positive")
    g = det(gram_matrix(vectors, metric))
    if g == 0:
        raise ValueError("vectors are linearly dependent; covolume is undefined")
    return g


def inclusion_index(sub: LatticeBasis, sup: LatticeBasis) -> int:
    """Index [sup : sub] for a full-rank sublattice ``sub`` of ``sup``."""
    if sub.ambient_dim != sup.ambient_dim or sub.rank != sup.rank:
        raise ValueError("lattices must have equal rank in the same ambient space")
    if sub.rank == 0:
        return 1
    x = solve(sup.matrix, sub.matrix)
    if x is None:
        raise ValueError("sub is not contained in the rational span of sup")
    if not x.is_integral():
        raise ValueError("sub is not a sublattice of sup")
    d = det(x)
    if d == 0:
        raise ValueError("sub does not have full rank in sup")
    return abs(d)
