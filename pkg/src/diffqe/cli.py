"""
Command-line interface for diffqe.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from diffqe import __version__
from diffqe.algebra.fields import Field
from diffqe.config import DEFAULT_CATALOG_PATH, DEFAULT_LIMITS, Limits
from diffqe.data import ArtifactBundle, load
from diffqe.errors import DiffQEError, UnsupportedField
from diffqe.harness.evaluator import frobenius_scan
from diffqe.harness.metrics import GridCell, parse_grid
from diffqe.harness.subassignments import (
    FormulaSubassignment,
    ImageSubassignment,
    StratificationSubassignment,
)
from diffqe.logic.semantics import realisations
from diffqe.logic.syntax import to_json as formula_json
from diffqe.logic.syntax import to_text
from diffqe.logic.translate import galois_to_fo
from diffqe.points import DiffField, enumerate_realisations, render_points
from diffqe.presentations import direct_decompose
from diffqe.qe.direct_image import direct_image
from diffqe.qe.eliminate import quantifier_eliminate
from diffqe.stratifications import evaluate

logger = logging.getLogger(__name__)


def _setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _limits(args) -> Limits:
    changes = {}
    if getattr(args, "budget", None) is not None:
        changes["budget"] = args.budget
    if getattr(args, "m_max", None) is not None:
        changes["m_max"] = args.m_max
    return DEFAULT_LIMITS.replace(**changes)


def _grid(text: str, base: Field, m: int) -> List[GridCell]:
    """
    ``qmin:qmax`` selects the prime powers in that range admissible for ``base``,
    each with m = 1..m; otherwise the text is a list of ``q`` or ``q:m`` entries.
    """
    ms = tuple(range(1, m + 1))
    parts = text.split(":")
    if len(parts) == 2 and "," not in text:
        qmin, qmax = int(parts[0]), int(parts[1])
        cells = []
        for q in range(max(qmin, 2), qmax + 1):
            try:
                DiffField.from_q(base, q, 1)
            except UnsupportedField:
                continue
            cells.extend((q, k) for k in ms)
        return cells
    return parse_grid(text, ms)


def _field(args, base: Field) -> DiffField:
    return DiffField.from_q(base, args.q, args.m)


def cmd_validate(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    if args.name:
        section, _ = bundle.find(args.name)
        errors = bundle.errors_of(section, args.name, _limits(args))
        report = {f"/{section}/{args.name}": errors} if errors else {}
    else:
        report = bundle.validate(_limits(args), verbose=args.verbose)
    return {"valid": not report, "errors": report}


def cmd_decompose(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    P = bundle.check("presentations", args.name, _limits(args))
    components = direct_decompose(P, _limits(args))
    return {"components": [W.to_json() for W in components]}


def cmd_points(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    P = bundle.check("presentations", args.name, _limits(args))
    K = _field(args, P.field)
    return {"points": render_points(enumerate_realisations(P, K, _limits(args)), K)}


def cmd_frobscan(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    limits = _limits(args)
    section, obj = bundle.find(args.name)
    if section == "presentations":
        bundle.check(section, args.name, limits)
        report = frobenius_scan(obj, _grid(args.grid, obj.field, args.m), args.name, limits, args.verbose)
    elif section == "tasks":
        bundle.check(section, args.name, limits)
        output = direct_image(obj, limits)
        pair = (StratificationSubassignment(output), ImageSubassignment(obj.morphism, obj.stratification))
        report = frobenius_scan(pair, _grid(args.grid, obj.morphism.source.field, args.m), args.name, limits, args.verbose)
    elif section == "formulas":
        A = quantifier_eliminate(obj.formula, obj.field, obj.variables, limits)
        pair = (
            StratificationSubassignment(A, len(obj.variables)),
            FormulaSubassignment(obj.formula, obj.variables, obj.witness_degree, args.name, obj.field),
        )
        report = frobenius_scan(pair, _grid(args.grid, obj.field, args.m), args.name, limits, args.verbose)
    else:
        raise DiffQEError(f"Cannot scan a {section[:-1]}", stage="cli.frobscan")
    return report.to_json()


def cmd_eval_galois(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    A = bundle.check("stratifications", args.name, _limits(args))
    K = _field(args, A.ambient.field)
    return evaluate(A, K, _limits(args), verbose=args.verbose).to_json()


def cmd_eval_formula(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    entry = bundle.get("formulas", args.name)
    K = _field(args, entry.field)
    degree = args.witness_degree or entry.witness_degree
    points = realisations(entry.formula, entry.variables, K, _limits(args), degree)
    return {**K.to_json(), "variables": list(entry.variables), "points": render_points(points, K)}


def cmd_gal2fo(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    A = bundle.check("stratifications", args.name, _limits(args))
    formula = galois_to_fo(A)
    return {"formula": to_text(formula), "ast": formula_json(formula), "variables": list(A.ambient.variables)}


def _with_evaluation(result: Dict[str, Any], A, args) -> Dict[str, Any]:
    if args.q is not None:
        result["evaluation"] = evaluate(A, _field(args, A.ambient.field), _limits(args)).to_json()
    return result


def cmd_image(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    task = bundle.check("tasks", args.name, _limits(args))
    output = direct_image(task, _limits(args))
    return _with_evaluation({"stratification": output.to_json(), "depth": task.depth}, output, args)


def cmd_qe(bundle: ArtifactBundle, args) -> Dict[str, Any]:
    entry = bundle.get("formulas", args.name)
    A = quantifier_eliminate(entry.formula, entry.field, entry.variables, _limits(args))
    return _with_evaluation({"stratification": A.to_json()}, A, args)


HANDLERS = {
    "validate": cmd_validate,
    "decompose": cmd_decompose,
    "points": cmd_points,
    "frobscan": cmd_frobscan,
    "eval-galois": cmd_eval_galois,
    "eval-formula": cmd_eval_formula,
    "gal2fo": cmd_gal2fo,
    "image": cmd_image,
    "qe": cmd_qe,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffqe",
        description="diffqe: Galois stratifications and quantifier elimination for difference fields",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"diffqe {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    subparsers.add_parser("info", help="Display the supported fragment")

    def command(name: str, help_text: str, needs_name: bool = True, field_flags: bool = False):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("bundle", type=str, help="Path to an artifact bundle")
        sub.add_argument("name", type=str, nargs=None if needs_name else "?", default=None, help="Object name")
        sub.add_argument("--budget", type=int, default=None, help="Enumeration budget")
        sub.add_argument("--m-max", type=int, default=None, help="Largest witness extension degree")
        sub.add_argument("--out", type=str, default=None, help="Also write the JSON result to this path")
        sub.add_argument("--verbose", action="store_true", help="Debug logging and progress bars")
        if field_flags:
            sub.add_argument("--q", type=int, default=None, required=name in ("points", "eval-galois", "eval-formula"), help="Frobenius q")
            sub.add_argument("--m", type=int, default=1, help="Extension degree of F_q")
        return sub

    command("validate", "Validate a bundle or one object", needs_name=False)
    command("decompose", "Direct decomposition of a presentation")
    command("points", "Realisations of a presentation", field_flags=True)
    scan = command("frobscan", "Empirical Frobenius threshold", field_flags=True)
    scan.add_argument("--grid", type=str, default="2:13", help="qmin:qmax or a list of q or q:m entries")
    command("eval-galois", "Evaluate a Galois stratification", field_flags=True)
    formula = command("eval-formula", "Brute-force realisations of a formula", field_flags=True)
    formula.add_argument("--witness-degree", type=int, default=None, help="Quantifier extension degree")
    command("gal2fo", "First-order formula of a Galois stratification")
    command("image", "Direct image of a task's stratification", field_flags=True)
    command("qe", "Eliminate quantifiers from a formula", field_flags=True)
    return parser


def print_info():
    """Print the supported fragment."""
    table = Table(show_header=True, header_style="bold")
    table.add_column("Stage")
    table.add_column("Supported")
    table.add_row("Fields", "Q, F_p, F_{p^b}; evaluation over (F_{q^m}, x -> x^q)")
    table.add_row("Formulas", "Polynomial equations in s(...), connectives, E and A; σ-depth reduced by prolongation")
    table.add_row("Finite étale images", "One fibre coordinate, monic fibre polynomial, trivial input covers")
    table.add_row("Fibration images", "Pushforward of covers descending to the target or with trivial closure")
    table.add_row("Evaluation", "Brute force within the enumeration budget")
    table.add_row("Catalog", str(DEFAULT_CATALOG_PATH))
    Console().print(Panel(table, title=f"diffqe {__version__}", expand=False))


def _emit(result: Dict[str, Any], out: Optional[str]):
    text = json.dumps(result, sort_keys=True, separators=(",", ":"))
    print(text)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the diffqe CLI; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if args.command == "info":
        print_info()
        return 0
    _setup_logging(args.verbose)
    try:
        bundle = load(args.bundle)
        result = HANDLERS[args.command](bundle, args)
    except DiffQEError as exc:
        logger.error("%s failed at %s: %s", args.command, exc.stage, exc.detail)
        _emit(exc.to_json(), None)
        return 1
    _emit(result, args.out)
    if args.command == "validate" and not result["valid"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
