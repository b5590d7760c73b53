"""JSON documents for complexes and network problems.

Complex documents store boundary matrices as sparse ``[k, row, col, value]``
triplets.  Rationals are written as lowest-terms ``"p/q"`` strings and
integers as ``"n"``.  ``canonical`` produces the normal form used for
round-trip comparisons and golden files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .complex import CellComplex, ChainVector, InvalidComplexError, validate
from .corpus import corpus_dir
from .linalg import Matrix

COMPLEX_FORMAT = "cwkirch-complex"
PROBLEM_FORMAT = "cwkirch-problem"
KNOWN_CHECKS = ("A", "B", "C", "C2", "general", "lowtemp", "torsion")

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*[+-]?\d+)?\s*$")


class DocumentError(ValueError):
    """A document does not parse or does not describe a valid object."""


def format_rational(x) -> str:
    return str(Fraction(x))


def parse_rational(x) -> Fraction:
    """Accept JSON integers and "n" or "p/q" strings; reject floats and decimals."""
    if isinstance(x, bool):
        raise DocumentError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str) and _RATIONAL.match(x):
        try:
            return Fraction(x.replace(" ", ""))
        except ZeroDivisionError:
            raise DocumentError(f"zero denominator in {x!r}") from None
    raise DocumentError(f"not an exact rational: {x!r} (use \"p/q\")")


def _int(x, what: str) -> int:
    v = parse_rational(x)
    if v.denominator != 1:
        raise DocumentError(f"{what} must be an integer, got {x!r}")
    return int(v)


def loads(text: str, source: str = "<string>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise DocumentError(f"{source}: top level must be an object")
    return data


def _format(x: Any, indent: int) -> str:
    """JSON with lists of scalars (and of short scalar lists) kept on one line."""
    pad = "  " * (indent + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_format(v, indent + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(x, list):
        if all(not isinstance(v, (dict, list)) for v in x):
            return json.dumps(x, ensure_ascii=False)
        items = [f"{pad}{_format(v, indent + 1)}" for v in x]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return json.dumps(x, ensure_ascii=False)


def dumps(doc: dict) -> str:
    return _format(doc, 0) + "\n"


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------


def complex_to_document(c: CellComplex) -> dict:
    triplets = []
    for k in range(1, c.dim + 1):
        D = c.boundary(k)
        for i in range(D.rows):
            for j in range(D.cols):
                if D[i, j]:
                    triplets.append([k, i, j, int(D[i, j])])
    doc: dict[str, Any] = {
        "format": COMPLEX_FORMAT,
        "name": c.name,
        "dimension": c.dim,
        "cell_counts": list(c.cell_counts),
        "boundaries": triplets,
    }
    weights = {
        str(k): [format_rational(x) for x in c.weights[k]]
        for k in sorted(c.weights)
        if any(x != 1 for x in c.weights[k])
    }
    if weights:
        doc["weights"] = weights
    if c.cell_names:
        doc["cell_names"] = {str(k): list(v) for k, v in sorted(c.cell_names.items())}
    return doc


def complex_from_document(doc: dict, source: str = "<document>") -> CellComplex:
    fmt = doc.get("format", COMPLEX_FORMAT)
    if fmt != COMPLEX_FORMAT:
        raise DocumentError(f"{source}: expected format {COMPLEX_FORMAT!r}, got {fmt!r}")
    try:
        counts = tuple(_int(x, "cell count") for x in doc["cell_counts"])
        dim = _int(doc.get("dimension", len(counts) - 1), "dimension")
        triplets = doc.get("boundaries", [])
    except KeyError as e:
        raise DocumentError(f"{source}: missing field {e.args[0]!r}") from None
    if dim != len(counts) - 1 or any(n < 0 for n in counts) or not counts:
        raise DocumentError(f"{source}: dimension {dim} does not match cell_counts {list(counts)}")
    mats = [[[0] * counts[k] for _ in range(counts[k - 1])] for k in range(1, dim + 1)]
    for t in triplets:
        if not isinstance(t, list) or len(t) != 4:
            raise DocumentError(f"{source}: boundary entries are [k, row, col, value], got {t!r}")
        k, i, j, v = (_int(x, "boundary entry") for x in t)
        if not 1 <= k <= dim or not 0 <= i < counts[k - 1] or not 0 <= j < counts[k]:
            raise DocumentError(f"{source}: boundary entry {t!r} out of range")
        mats[k - 1][i][j] += v
    boundaries = tuple(Matrix(m, (counts[k], counts[k + 1])) for k, m in enumerate(mats))
    weights = {}
    for k, vals in (doc.get("weights") or {}).items():
        kk = _int(k, "weight degree")
        weights[kk] = tuple(parse_rational(x) for x in vals)
    names = {_int(k, "name degree"): tuple(str(x) for x in v) for k, v in (doc.get("cell_names") or {}).items()}
    try:
        c = CellComplex(counts, boundaries, weights=weights or None, name=str(doc.get("name", "")), cell_names=names or None)
    except (InvalidComplexError, ValueError) as e:
        raise DocumentError(f"{source}: {e}") from None
    report = validate(c)
    if not report.ok:
        raise DocumentError(f"{source}: invalid complex: " + "; ".join(report.problems))
    return c


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------


@dataclass
class ProblemDocument:
    """A network problem or verification input attached to a complex.

    ``complex_ref`` is a corpus name or a path relative to the document.
    ``weights`` are top-degree resistances; ``subgroup`` lists integer
    basis vectors of A ⊂ C_{d-1}; ``tree`` names top cells of a spanning
    tree for the low-temperature check.  ``checks`` names the theorems
    that ``verify --all`` runs on the document.
    """

    complex_ref: str
    name: str = ""
    p: dict = field(default_factory=dict)
    q: dict = field(default_factory=dict)
    weights: Optional[tuple] = None
    subgroup: Optional[tuple] = None
    truncation: Optional[dict] = None
    tree: Optional[tuple] = None
    beta_schedule: Optional[tuple] = None
    tolerance: Optional[Fraction] = None
    checks: Optional[tuple] = None

    def chains(self, c: CellComplex) -> tuple[ChainVector, ChainVector]:
        d = c.dim
        p = [Fraction(0)] * c.count(d - 1)
        q = [Fraction(0)] * c.count(d)
        for vec, store, deg in ((self.p, p, d - 1), (self.q, q, d)):
            for i, v in vec.items():
                if not 0 <= i < len(store):
                    raise DocumentError(f"index {i} out of range for a {deg}-chain")
                store[i] = v
        return ChainVector(d - 1, p), ChainVector(d, q)


def _sparse(vec: dict) -> list:
    return [[i, format_rational(v)] for i, v in sorted(vec.items()) if v != 0]


def _parse_sparse(items, source: str, what: str) -> dict:
    out: dict[int, Fraction] = {}
    for it in items or []:
        if not isinstance(it, list) or len(it) != 2:
            raise DocumentError(f"{source}: {what} entries are [index, value], got {it!r}")
        i = _int(it[0], f"{what} index")
        out[i] = out.get(i, Fraction(0)) + parse_rational(it[1])
    return {i: v for i, v in out.items() if v != 0}


def problem_to_document(p: ProblemDocument) -> dict:
    doc: dict[str, Any] = {"format": PROBLEM_FORMAT, "name": p.name, "complex": p.complex_ref}
    if p.p:
        doc["p"] = _sparse(p.p)
    if p.q:
        doc["q"] = _sparse(p.q)
    if p.weights is not None:
        doc["weights"] = [format_rational(x) for x in p.weights]
    if p.subgroup is not None:
        doc["subgroup"] = [list(v) for v in p.subgroup]
    if p.truncation is not None:
        doc["truncation"] = {
            "trees": [list(x) for x in p.truncation["trees"]],
            "truncations": [list(x) for x in p.truncation["truncations"]],
        }
    if p.tree is not None:
        doc["tree"] = list(p.tree)
    if p.beta_schedule is not None:
        doc["beta_schedule"] = list(p.beta_schedule)
    if p.tolerance is not None:
        doc["tolerance"] = format_rational(p.tolerance)
    if p.checks is not None:
        doc["checks"] = list(p.checks)
    return doc


def problem_from_document(doc: dict, source: str = "<document>") -> ProblemDocument:
    if doc.get("format") != PROBLEM_FORMAT:
        raise DocumentError(f"{source}: expected format {PROBLEM_FORMAT!r}")
    if not isinstance(doc.get("complex"), str):
        raise DocumentError(f"{source}: missing complex reference")
    trunc = doc.get("truncation")
    if trunc is not None:
        try:
            trunc = {
                "trees": tuple(tuple(_int(x, "cell") for x in t) for t in trunc["trees"]),
                "truncations": tuple(tuple(_int(x, "cell") for x in t) for t in trunc["truncations"]),
            }
        except (KeyError, TypeError):
            raise DocumentError(f"{source}: truncation needs 'trees' and 'truncations' lists") from None
    w = doc.get("weights")
    sub = doc.get("subgroup")
    tree = doc.get("tree")
    betas = doc.get("beta_schedule")
    tol = doc.get("tolerance")
    checks = doc.get("checks")
    if checks is not None and (not isinstance(checks, list) or not all(isinstance(x, str) for x in checks)):
        raise DocumentError(f"{source}: checks must be a list of theorem names")
    if checks is not None and not set(checks) <= set(KNOWN_CHECKS):
        raise DocumentError(f"{source}: unknown checks {sorted(set(checks) - set(KNOWN_CHECKS))}")
    return ProblemDocument(
        complex_ref=doc["complex"],
        name=str(doc.get("name", "")),
        p=_parse_sparse(doc.get("p"), source, "p"),
        q=_parse_sparse(doc.get("q"), source, "q"),
        weights=None if w is None else tuple(parse_rational(x) for x in w),
        subgroup=None if sub is None else tuple(tuple(_int(x, "subgroup entry") for x in v) for v in sub),
        truncation=trunc,
        tree=None if tree is None else tuple(_int(x, "tree cell") for x in tree),
        beta_schedule=None if betas is None else tuple(_int(x, "beta") for x in betas),
        tolerance=None if tol is None else parse_rational(tol),
        checks=None if checks is None else tuple(checks),
    )


# ---------------------------------------------------------------------------
# Files and corpus lookup
# ---------------------------------------------------------------------------


def canonical(doc: dict) -> dict:
    """Normal form of a complex or problem document."""
    if doc.get("format") == PROBLEM_FORMAT:
        return problem_to_document(problem_from_document(doc))
    return complex_to_document(complex_from_document(doc))


def resolve(ref: str, base: Optional[Path] = None) -> Path:
    """A path, a path relative to ``base``, or a corpus name."""
    candidates = [Path(ref)]
    if base is not None:
        candidates.append(base / ref)
        candidates.append(base / f"{ref}.json")
    candidates.append(corpus_dir() / f"{ref}.json")
    candidates.append(corpus_dir() / ref)
    for p in candidates:
        if p.is_file():
            return p
    raise DocumentError(f"no such document or corpus entry: {ref!r}")


def read_document(ref: str, base: Optional[Path] = None) -> tuple[Path, dict]:
    path = resolve(ref, base)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"{path}: {e.strerror}") from None
    return path, loads(text, str(path))


@dataclass
class Loaded:
    """A complex, plus the problem document it came from (if any)."""

    complex: CellComplex
    problem: Optional[ProblemDocument] = None
    path: Optional[Path] = None


def load(ref: str, base: Optional[Path] = None) -> Loaded:
    path, doc = read_document(ref, base)
    if doc.get("format") == PROBLEM_FORMAT:
        prob = problem_from_document(doc, str(path))
        inner = load(prob.complex_ref, path.parent)
        c = inner.complex
        if prob.weights is not None:
            if len(prob.weights) != c.count(c.dim):
                raise DocumentError(f"{path}: expected {c.count(c.dim)} weights")
            try:
                c = c.with_weights(c.dim, prob.weights)
            except ValueError as e:
                raise DocumentError(f"{path}: {e}") from None
        return Loaded(c, prob, path)
    return Loaded(complex_from_document(doc, str(path)), None, path)


def load_weights(ref: str, c: CellComplex) -> dict[int, tuple]:
    """Weights file: a list (top degree) or {"weights": list | {degree: list}}."""
    path = Path(ref)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"{path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if isinstance(data, dict):
        data = data.get("weights", data)
    if isinstance(data, list):
        data = {c.dim: data}
    if not isinstance(data, dict):
        raise DocumentError(f"{path}: weights must be a list or a map degree -> list")
    out = {}
    for k, vals in data.items():
        kk = _int(k, "weight degree")
        if not 0 <= kk <= c.dim or len(vals) != c.count(kk):
            raise DocumentError(f"{path}: degree {kk} needs {c.count(kk) if 0 <= kk <= c.dim else 0} weights")
        vv = tuple(parse_rational(x) for x in vals)
        if any(x <= 0 for x in vv):
            raise DocumentError(f"{path}: weights must be positive")
        out[kk] = vv
    return out
