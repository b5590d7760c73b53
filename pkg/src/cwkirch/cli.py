"""Command-line front end.

Exit codes: 0 success, 1 an identity failed, 2 input or precondition error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import corpus
from .complex import CellComplex, ChainVector, betti_numbers, euler_characteristic, torsion_order
from .io import (
    KNOWN_CHECKS,
    PROBLEM_FORMAT,
    DocumentError,
    Loaded,
    ProblemDocument,
    complex_to_document,
    dumps,
    load,
    load_weights,
    parse_rational,
    problem_to_document,
    read_document,
)
from .linalg import Matrix, image_lattice_basis
from .matrix_tree import (
    HypothesisError,
    NotGoodError,
    SubgroupSpec,
    gamma_X,
    hypothesis_check,
    laplacian,
    low_temperature_check,
    mu_X,
    theta_X,
    verify_generalized,
    verify_matrix_tree,
    verify_sum_decomposition,
)
from .network import (
    NetworkInputError,
    NetworkProblem,
    branch_current,
    branch_current_direct,
    projection_direct,
    projection_tree_formula,
    solve_by_trees,
    solve_direct,
    verify_solution,
)
from .torsion import (
    DegenerateBasisError,
    InvalidTruncationError,
    TruncationData,
    default_combinatorial_basis,
    delta_k,
    eta,
    mu_k,
    torsion_report,
    torsion_squared_laplacian_gram,
)
from .trees import NotSpanningTreeError, enumerate_spanning_trees, make_tree

THEOREMS = KNOWN_CHECKS
COMPLEX_CHECKS = ("A", "B", "C", "C2", "general", "torsion")
DEFAULT_BETAS = tuple(range(1, 13))
DEFAULT_TOLERANCE = Fraction(1, 10 ** 6)


class InputError(Exception):
    """Input or precondition failure; maps to exit code 2."""


INPUT_ERRORS = (
    DocumentError,
    NetworkInputError,
    NotGoodError,
    HypothesisError,
    NotSpanningTreeError,
    DegenerateBasisError,
    InvalidTruncationError,
    InputError,
)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def plain(x: Any) -> Any:
    """JSON-ready form: rationals become "p/q" strings."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    if isinstance(x, Matrix):
        return [[str(Fraction(v)) for v in row] for row in x.tolist()]
    if isinstance(x, ChainVector):
        return [str(v) for v in x.coords]
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    return str(x)


def _inline(v: Any) -> Optional[str]:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, list) and all(isinstance(x, (str, bool)) for x in v):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return None


def render_text(obj: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            s = _inline(v)
            if s is not None:
                out.append(f"{pad}{k}: {s}")
            elif isinstance(v, (dict, list)) and not v:
                out.append(f"{pad}{k}: {'{}' if isinstance(v, dict) else '[]'}")
            else:
                out.append(f"{pad}{k}:")
                out.extend(render_text(v, indent + 1))
    elif isinstance(obj, list):
        for v in obj:
            s = _inline(v)
            if s is not None:
                out.append(f"{pad}- {s}")
            else:
                out.append(f"{pad}-")
                out.extend(render_text(v, indent + 1))
    else:
        out.append(f"{pad}{obj}")
    return out


def emit(report: dict, fmt: str, stream=None) -> None:
    stream = sys.stdout if stream is None else stream
    data = plain(report)
    if fmt == "structured":
        stream.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    else:
        stream.write("\n".join(render_text(data)) + "\n")


# ---------------------------------------------------------------------------
# Options
# ---------------------------------------------------------------------------


def parse_betas(text: Optional[str]) -> Optional[tuple[int, ...]]:
    if text is None:
        return None
    try:
        betas = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"bad beta schedule {text!r}; expected e.g. 1,2,4,8") from None
    if not betas or any(b < 0 for b in betas):
        raise InputError("beta schedule must list non-negative integers")
    return betas


def parse_tolerance(text: Optional[str]) -> Optional[Fraction]:
    if text is None:
        return None
    tol = parse_rational(text)
    if tol <= 0:
        raise InputError("tolerance must be positive")
    return tol


class Context:
    """A loaded complex with command-line overrides applied."""

    def __init__(self, loaded: Loaded, args: argparse.Namespace):
        self.loaded = loaded
        self.problem: Optional[ProblemDocument] = loaded.problem
        c = loaded.complex
        self.all_weights: Optional[dict] = None
        path = getattr(args, "weights", None)
        if isinstance(path, str):
            self.all_weights = load_weights(path, c)
            if c.dim in self.all_weights:
                c = c.with_weights(c.dim, self.all_weights[c.dim])
        elif c.is_weighted():
            self.all_weights = {k: v for k, v in c.weights.items()}
        self.complex = c
        p = self.problem
        self.betas = parse_betas(getattr(args, "beta_schedule", None)) or (p and p.beta_schedule) or DEFAULT_BETAS
        self.tolerance = parse_tolerance(getattr(args, "tolerance", None)) or (p and p.tolerance) or DEFAULT_TOLERANCE

    @property
    def name(self) -> str:
        if self.problem is not None and self.problem.name:
            return self.problem.name
        return self.complex.name or (self.loaded.path.stem if self.loaded.path else "")


# ---------------------------------------------------------------------------
# info / trees
# ---------------------------------------------------------------------------


def info_report(c: CellComplex) -> dict:
    d = c.dim
    h = default_combinatorial_basis(c)
    rep: dict[str, Any] = {
        "name": c.name,
        "dimension": d,
        "cell_counts": list(c.cell_counts),
        "betti": list(betti_numbers(c)),
        "euler_characteristic": euler_characteristic(c),
        "theta": [torsion_order(c, k) for k in range(d + 1)],
        "mu": [mu_k(c, k) for k in range(d + 1)],
        "eta": [eta(c, k, h) for k in range(d + 1)],
        "delta": [delta_k(c, k, h) for k in range(d + 1)],
    }
    if d >= 1:
        rep["theta_X"] = theta_X(c)
        rep["mu_X"] = mu_X(c)
        rep["gamma_X"] = gamma_X(c)
        rep["det_L"] = laplacian(c.unweighted()).det
        rep["spanning_trees"] = sum(1 for _ in enumerate_spanning_trees(c))
    return rep


def cmd_info(ctx: Context, args) -> tuple[dict, bool]:
    return info_report(ctx.complex), True


def cmd_trees(ctx: Context, args) -> tuple[dict, bool]:
    c = ctx.complex
    if c.dim < 1:
        raise InputError("spanning trees need a complex of dimension >= 1")
    trees = list(enumerate_spanning_trees(c))
    rep: dict[str, Any] = {"name": ctx.name, "count": len(trees)}
    mode = "list" if args.list else "weights" if args.weights is not None else "count"
    if mode in ("list", "weights"):
        r = c.resistances()
        rows = []
        for t in trees:
            row = {"cells": list(t.cells), "theta": t.theta, "theta_squared": t.theta ** 2}
            if mode == "weights":
                row["w"] = t.weight(r)
            rows.append(row)
        rep["trees"] = rows
        if mode == "weights":
            rep["resistances"] = list(r)
            rep["delta_sum"] = sum((t.weight(r) for t in trees), Fraction(0))
            rep["gamma_X"] = gamma_X(c)
            rep["det_L"] = laplacian(c).det
    return rep, True


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _problem_or_none(ctx: Context) -> Optional[NetworkProblem]:
    p = ctx.problem
    if p is None:
        return None
    P, Q = p.chains(ctx.complex)
    return NetworkProblem(ctx.complex, P, Q)


def check_A(ctx: Context) -> tuple[dict, bool]:
    c = ctx.complex
    if c.dim < 1:
        raise InputError("theorem A needs dimension >= 1")
    tree = projection_tree_formula(c)
    direct = projection_direct(c)
    return {"theorem": "A", "tree_formula": tree, "direct": direct}, tree == direct


def check_B(ctx: Context) -> tuple[dict, bool]:
    c = ctx.complex
    if c.dim < 1:
        raise InputError("theorem B needs dimension >= 1")
    prob = _problem_or_none(ctx)
    n = c.count(c.dim)
    if prob is None:
        prob = NetworkProblem(c, ChainVector.zero(c.dim - 1, c.count(c.dim - 1)), ChainVector.zero(c.dim, n))
    s = solve_direct(prob)
    s2 = solve_by_trees(prob)
    res = verify_solution(prob, s)
    probe = tuple(range(1, n + 1))  # a fixed non-trivial voltage for the branch-current check
    z_tree = branch_current(c, probe)
    z_direct = branch_current_direct(c, probe)
    ok = res.ok and s2.J == s.J and z_tree == z_direct
    rep = {
        "theorem": "B",
        "V": s.V,
        "J": s.J,
        "J_tree_route": s2.J,
        "z": branch_current(c, s.V),
        "residuals": {"ohm": res.ohm, "current": res.current, "voltage": res.voltage},
        "branch_current": {"V": probe, "tree_formula": z_tree, "direct": z_direct},
    }
    return rep, ok


def _identity(rep, theorem: str) -> tuple[dict, bool]:
    out = {"theorem": theorem, "identity": rep.name, "lhs": rep.lhs, "rhs": rep.rhs}
    out.update(rep.details)
    if rep.failures:
        out["failures"] = list(rep.failures)
    return out, rep.holds


def _need_dim(c: CellComplex, theorem: str):
    if c.dim < 1:
        raise InputError(f"theorem {theorem} needs dimension >= 1")


def check_C(ctx: Context) -> tuple[dict, bool]:
    _need_dim(ctx.complex, "C")
    return _identity(verify_matrix_tree(ctx.complex), "C")


def _subgroup(ctx: Context) -> Optional[SubgroupSpec]:
    if ctx.problem is not None and ctx.problem.subgroup is not None:
        return SubgroupSpec(ctx.problem.subgroup)
    return None


def check_C2(ctx: Context) -> tuple[dict, bool]:
    c = ctx.complex
    _need_dim(c, "C2")
    rep, ok = _identity(verify_sum_decomposition(c), "C2")
    a = _subgroup(ctx)
    if a is not None:
        sub, ok2 = _identity(verify_sum_decomposition(c, a=a), "C2")
        rep = {"theorem": "C2", "default_subgroup": rep, "given_subgroup": sub}
        ok = ok and ok2
    return rep, ok


def check_general(ctx: Context) -> tuple[dict, bool]:
    c = ctx.complex
    _need_dim(c, "general")
    a = _subgroup(ctx)
    if a is None:
        a = SubgroupSpec(image_lattice_basis(c.boundary(c.dim)).vectors)
    hyp = hypothesis_check(c, a)
    if not hyp:
        raise HypothesisError(f"hypothesis fails for A: {hyp.reason}")
    rep, ok = _identity(verify_generalized(c, a=a), "general")
    rep["subgroup"] = [list(v) for v in a.vectors]
    return rep, ok


def _default_lowtemp_tree(c: CellComplex):
    """Tree with the least resistance product, ties broken lexicographically."""
    r = c.resistances()

    def prod(t):
        out = Fraction(1)
        for b in t.cells:
            out *= r[b]
        return out

    return min(enumerate_spanning_trees(c), key=lambda t: (prod(t), t.cells))


def check_lowtemp(ctx: Context) -> tuple[dict, bool]:
    c = ctx.complex
    _need_dim(c, "lowtemp")
    tree_cells = ctx.problem.tree if ctx.problem is not None else None
    tree = make_tree(c, tree_cells) if tree_cells is not None else _default_lowtemp_tree(c)
    rep = low_temperature_check(c, tree, c.resistances(), ctx.betas, ctx.tolerance)
    out = {
        "theorem": "lowtemp",
        "tree": list(tree.cells),
        "resistances": list(c.resistances()),
        "betas": list(rep.betas),
        "ratios": list(rep.ratios),
        "deviations": list(rep.deviations),
        "tolerance": rep.tolerance,
        "monotone": rep.monotone,
        "converged": rep.converged,
    }
    return out, rep.converged


def check_torsion(ctx: Context) -> tuple[dict, bool]:
    c = ctx.complex
    td = None
    if ctx.problem is not None and ctx.problem.truncation is not None:
        td = TruncationData(ctx.problem.truncation["trees"], ctx.problem.truncation["truncations"])
    rep = torsion_report(c, td=td, w=ctx.all_weights)
    out: dict[str, Any] = {"theorem": "torsion"}
    out.update({f"tau2_{k}": v for k, v in rep.values.items()})
    ok = rep.agree
    if ctx.all_weights is not None:
        gram = torsion_squared_laplacian_gram(c, w=ctx.all_weights)
        out["tau2_laplacian_gram"] = gram
        ok = ok and gram == rep.tau2_laplacian
    inter = dict(rep.intermediates)
    trunc = inter.pop("truncation")
    out["intermediates"] = inter
    out["truncation"] = {"trees": [list(t) for t in trunc["trees"]], "truncations": [list(t) for t in trunc["truncations"]]}
    out["agree"] = ok
    return out, ok


CHECKS: dict[str, Callable[[Context], tuple[dict, bool]]] = {
    "A": check_A,
    "B": check_B,
    "C": check_C,
    "C2": check_C2,
    "general": check_general,
    "lowtemp": check_lowtemp,
    "torsion": check_torsion,
}


def cmd_verify(ctx: Context, args) -> tuple[dict, bool]:
    rep, ok = CHECKS[args.theorem](ctx)
    return {"name": ctx.name, "result": "pass" if ok else "FAIL", **rep}, ok


def _checks_for(ctx: Context) -> Sequence[str]:
    if ctx.problem is None:
        return COMPLEX_CHECKS if ctx.complex.dim >= 1 else ("torsion",)
    return ctx.problem.checks or ("B",)


def verify_all(args) -> tuple[dict, int]:
    """Run every applicable check over every corpus document, sorted by name."""
    directory = corpus.corpus_dir()
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise DocumentError(f"no corpus documents in {directory}")
    entries = []
    code = 0
    for path in paths:
        entry: dict[str, Any] = {}
        try:
            ctx = Context(load(str(path)), args)
            entry["name"] = ctx.name
            entry["kind"] = "problem" if ctx.problem is not None else "complex"
            if ctx.problem is None:
                entry["info"] = info_report(ctx.complex)
            results = {}
            for th in _checks_for(ctx):
                try:
                    rep, ok = CHECKS[th](ctx)
                except INPUT_ERRORS as e:
                    results[th] = {"result": "ERROR", "error": str(e)}
                    code = 2
                    continue
                results[th] = {"result": "pass" if ok else "FAIL", **rep}
                if not ok and code == 0:
                    code = 1
            entry["checks"] = results
        except INPUT_ERRORS as e:
            entry.setdefault("name", path.stem)
            entry["error"] = str(e)
            code = 2
        entries.append(entry)
    entries.sort(key=lambda e: e["name"])
    summary = {
        e["name"]: {th: r["result"] for th, r in e.get("checks", {}).items()} or "ERROR" for e in entries
    }
    return {"corpus": str(directory), "summary": summary, "documents": entries}, code


# ---------------------------------------------------------------------------
# solve / corpus
# ---------------------------------------------------------------------------


def cmd_solve(ctx: Context, args) -> tuple[dict, bool]:
    prob = _problem_or_none(ctx)
    if prob is None:
        raise InputError("solve needs a problem document")
    s = solve_direct(prob)
    res = verify_solution(prob, s)
    rep = {
        "name": ctx.name,
        "resistances": list(ctx.complex.resistances()),
        "V": s.V,
        "J": s.J,
        "z": branch_current_direct(ctx.complex, s.V.coords),
        "residuals": {"ohm": res.ohm, "current": res.current, "voltage": res.voltage},
    }
    return rep, res.ok


def bundled_problems() -> list[ProblemDocument]:
    """Problem documents shipped with the corpus."""
    return [
        ProblemDocument("theta", "theta_problem", p={0: Fraction(-1), 1: Fraction(1)}, checks=("B",)),
        ProblemDocument(
            "theta", "theta_weighted_problem", p={0: Fraction(-1), 1: Fraction(1)},
            weights=(Fraction(2), Fraction(3), Fraction(6)), checks=("A", "B", "C", "C2"),
        ),
        ProblemDocument("theta", "theta_zero_problem", checks=("B",)),
        ProblemDocument("theta", "theta_subgroup", subgroup=((1, 0),), checks=("C2", "general")),
        ProblemDocument("rp2_min", "rp2_min_subgroup", subgroup=((1,),), checks=("C2", "general")),
        ProblemDocument(
            "rp2_double", "rp2_double_lowtemp", weights=(Fraction(1), Fraction(64)), tree=(0,),
            beta_schedule=DEFAULT_BETAS, tolerance=DEFAULT_TOLERANCE, checks=("lowtemp",),
        ),
        ProblemDocument(
            "theta", "theta_lowtemp", weights=(Fraction(1), Fraction(1000), Fraction(1000)), tree=(0,),
            beta_schedule=(1, 2, 3, 4), tolerance=Fraction(1, 10 ** 6), checks=("lowtemp",),
        ),
        ProblemDocument(
            "rp2_min", "rp2_min_truncation",
            truncation={"trees": ((), (), (0,)), "truncations": ((0,), (), (0,))}, checks=("torsion",),
        ),
    ]


def export_corpus(directory: Path) -> list[str]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for c in corpus.all_complexes():
        (directory / f"{c.name}.json").write_text(dumps(complex_to_document(c)), encoding="utf-8")
        written.append(c.name)
    for p in bundled_problems():
        (directory / f"{p.name}.json").write_text(dumps(problem_to_document(p)), encoding="utf-8")
        written.append(p.name)
    return sorted(written)


def cmd_corpus(args) -> tuple[dict, int]:
    if args.export:
        names = export_corpus(Path(args.export))
        return {"exported": args.export, "documents": names}, 0
    directory = corpus.corpus_dir()
    docs = []
    for path in sorted(directory.glob("*.json")):
        _, doc = read_document(str(path))
        kind = "problem" if doc.get("format") == PROBLEM_FORMAT else "complex"
        docs.append({"name": path.stem, "kind": kind})
    return {"corpus": str(directory), "documents": docs}, 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--beta-schedule", help="comma-separated betas for lowtemp, e.g. 1,2,4,8")
    common.add_argument("--tolerance", help="rational tolerance p/q for lowtemp")

    parser = argparse.ArgumentParser(prog="cwkirch", description="Exact higher-dimensional Kirchhoff computations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, weights_flag=True):
        p = sub.add_parser(name, help=help_text, parents=[common])
        if weights_flag:
            p.add_argument("--weights", metavar="PATH", help="weights file (list or degree -> list of p/q)")
        return p

    p = add("info", "Betti numbers, torsion orders and lattice invariants")
    p.add_argument("document", help="complex or problem file, or a corpus name")

    p = sub.add_parser("trees", help="spanning trees", parents=[common])
    p.add_argument("document")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--count", action="store_true", help="print the number of trees (default)")
    mode.add_argument("--list", action="store_true", help="list trees with θ_T")
    mode.add_argument(
        "--weights", nargs="?", const=True, default=None, metavar="PATH",
        help="list trees with w_T and Δ; optionally read resistances from PATH",
    )

    p = add("verify", "check an identity exactly")
    p.add_argument("document", nargs="?")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--theorem", choices=THEOREMS)
    group.add_argument("--all", action="store_true", help="every check on every corpus document")

    p = add("solve", "solve a network problem")
    p.add_argument("document", help="problem file or corpus name")

    p = sub.add_parser("corpus", help="list or export the bundled corpus", parents=[common])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--list", action="store_true")
    g.add_argument("--export", metavar="DIR")
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    fmt = args.format
    try:
        if args.command == "corpus":
            rep, code = cmd_corpus(args)
            emit(rep, fmt, stdout)
            return code
        if args.command == "verify" and args.all:
            rep, code = verify_all(args)
            emit(rep, fmt, stdout)
            return code
        if getattr(args, "document", None) is None:
            raise InputError("a document is required")
        ctx = Context(load(args.document), args)
        handler = {"info": cmd_info, "trees": cmd_trees, "verify": cmd_verify, "solve": cmd_solve}[args.command]
        rep, ok = handler(ctx, args)
    except INPUT_ERRORS as e:
        kind = "precondition" if isinstance(e, (NotGoodError, HypothesisError)) else "input"
        stderr.write(f"cwkirch: {kind} error: {e}\n")
        return 2
    emit(rep, fmt, stdout)
    return 0 if ok else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
