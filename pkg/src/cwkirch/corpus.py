"""Builders for the bundled example complexes.

The JSON files shipped in ``cwkirch/data`` are generated from these builders
(``cwkirch corpus --export DIR``) and a test keeps the two in sync.
"""

from __future__ import annotations

import itertools
import os
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .complex import CellComplex
from .linalg import Matrix

CORPUS_ENV = "CWKIRCH_CORPUS"


def graph(n_vertices: int, edges: Sequence[tuple[int, int]], name: str = "") -> CellComplex:
    """1-complex with edge (i, j) oriented from i to j."""
    d1 = [[0] * len(edges) for _ in range(n_vertices)]
    for e, (i, j) in enumerate(edges):
        d1[i][e] -= 1
        d1[j][e] += 1
    return CellComplex((n_vertices, len(edges)), (Matrix(d1, (n_vertices, len(edges))),), name=name)


def complete_graph(n: int, name: str = "") -> CellComplex:
    return graph(n, list(itertools.combinations(range(n), 2)), name or f"k{n}")


def simplicial_complex(facets: Sequence[Sequence[int]], name: str = "") -> CellComplex:
    """Cellular chain complex of the simplicial complex generated by ``facets``.

    Simplices are ordered lexicographically in each degree and oriented by
    increasing vertex label.
    """
    simplices: set[tuple[int, ...]] = set()
    for f in facets:
        f = tuple(sorted(f))
        for k in range(1, len(f) + 1):
            simplices.update(itertools.combinations(f, k))
    dim = max(len(s) for s in simplices) - 1
    by_deg = [sorted(s for s in simplices if len(s) == k + 1) for k in range(dim + 1)]
    index = [{s: i for i, s in enumerate(level)} for level in by_deg]
    boundaries = []
    for k in range(1, dim + 1):
        m = [[0] * len(by_deg[k]) for _ in by_deg[k - 1]]
        for j, s in enumerate(by_deg[k]):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                m[index[k - 1][face]][j] += (-1) ** i
        boundaries.append(Matrix(m, (len(by_deg[k - 1]), len(by_deg[k]))))
    names = {k: tuple("".join(map(str, s)) if max(s) < 10 else "-".join(map(str, s)) for s in level)
             for k, level in enumerate(by_deg)}
    return CellComplex(tuple(len(level) for level in by_deg), tuple(boundaries), name=name, cell_names=names)


def moore(n: int, name: str = "") -> CellComplex:
    """One vertex, one loop, one 2-cell attached by degree n."""
    return CellComplex((1, 1, 1), ([[0]], [[n]]), name=name or f"moore_{n}")


def segment() -> CellComplex:
    return graph(2, [(0, 1)], "segment")


def circle() -> CellComplex:
    return CellComplex((1, 1), ([[0]],), name="circle")


def theta() -> CellComplex:
    return graph(2, [(0, 1)] * 3, "theta")


def k4() -> CellComplex:
    return complete_graph(4, "k4")


def rp2_min() -> CellComplex:
    return CellComplex((1, 1, 1), ([[0]], [[2]]), name="rp2_min")


def rp2_double() -> CellComplex:
    return CellComplex((1, 1, 2), ([[0]], [[2, 2]]), name="rp2_double")


def torus_min() -> CellComplex:
    return CellComplex((1, 2, 1), ([[0, 0]], [[0], [0]]), name="torus_min")


# Six-vertex triangulation of the projective plane (10 triangles).
RP2_SIX_FACETS = (
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
)


def rp2_six() -> CellComplex:
    return simplicial_complex(RP2_SIX_FACETS, "rp2_six")


def sphere_tetra() -> CellComplex:
    """Boundary of a tetrahedron."""
    return simplicial_complex(list(itertools.combinations(range(4), 3)), "sphere_tetra")


def fan_234() -> CellComplex:
    """One vertex, one loop, three 2-cells attached by degrees 2, 3, 4."""
    return CellComplex((1, 1, 3), ([[0]], [[2, 3, 4]]), name="fan_234")


BUILDERS: dict[str, Callable[[], CellComplex]] = {
    "circle": circle,
    "fan_234": fan_234,
    "k4": k4,
    "moore_2": lambda: moore(2),
    "moore_3": lambda: moore(3),
    "moore_5": lambda: moore(5),
    "rp2_double": rp2_double,
    "rp2_min": rp2_min,
    "rp2_six": rp2_six,
    "segment": segment,
    "sphere_tetra": sphere_tetra,
    "theta": theta,
    "torus_min": torus_min,
}


def build(name: str) -> CellComplex:
    return BUILDERS[name]()


def all_complexes() -> list[CellComplex]:
    return [BUILDERS[name]() for name in sorted(BUILDERS)]


def graphs() -> list[CellComplex]:
    return [c for c in all_complexes() if c.dim == 1]


def corpus_dir() -> Path:
    """Directory holding the corpus documents; CWKIRCH_CORPUS overrides."""
    override = os.environ.get(CORPUS_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("cwkirch") / "data"))
