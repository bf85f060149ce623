"""Command-line front end.

Exit status is 0 when every requested check passes, 1 when a check fails and
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from qutrit_rg import gedik, hadamard, rules, universality
from qutrit_rg.diagram import DiagramError, DiagramParseError, load, save, to_text
from qutrit_rg.semantics import RG, ZERO, evaluate
from qutrit_rg.tensor import default_tol

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def format_entry(z: complex) -> str:
    """``a+bi`` with six significant digits."""
    re, im = float(np.real(z)), float(np.imag(z))
    sign = "-" if im < 0 or (im == 0 and np.signbit(im)) else "+"
    return f"{re:.6g}{sign}{abs(im):.6g}i"


def format_matrix(m: np.ndarray) -> str:
    m = np.array(np.atleast_2d(m), dtype=complex)
    # hide rounding noise relative to the largest entry
    cutoff = 1e-12 * max(1.0, float(np.max(np.abs(m), initial=0.0)))
    m.real[np.abs(m.real) < cutoff] = 0.0
    m.imag[np.abs(m.imag) < cutoff] = 0.0
    rows = [[format_entry(z) for z in row] for row in m]
    width = max((len(x) for row in rows for x in row), default=0)
    return "\n".join("  ".join(x.rjust(width) for x in row) for row in rows)


def matrix_json(m: np.ndarray) -> dict:
    m = np.atleast_2d(m)
    return {"shape": list(m.shape), "real": m.real.tolist(), "imag": m.imag.tolist()}


def _emit(args, lines: list[str], payload: dict) -> None:
    if args.exact_json:
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))


# --------------------------------------------------------------------------
# Commands


def cmd_rules(args) -> int:
    names = None
    if args.only:
        names = [n.strip() for n in args.only.split(",") if n.strip()]
        unknown = sorted(set(names) - set(rules.RULE_NAMES))
        if unknown:
            raise UsageError(f"unknown rule name(s): {', '.join(unknown)}; known: {', '.join(rules.RULE_NAMES)}")
    choice = ZERO if args.functor == "zero" else RG
    reports = rules.sweep(choice, names, tol=default_tol(), seed=args.seed)
    ok = all(r.passed for r in reports)
    payload = {"functor": choice.value, "passed": ok,
               "rules": [{"rule": r.rule, "variant": r.variant, "residual": r.residual, "passed": r.passed}
                         for r in reports]}
    _emit(args, [r.line() for r in reports] + [f"SUMMARY {sum(r.passed for r in reports)}/{len(reports)} PASS"],
          payload)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_euler(args) -> int:
    tol = default_tol()
    uniq = hadamard.check_nonuniqueness(tol)
    nd = hadamard.check_nonderivability(tol)
    ok = uniq.passed and nd.passed
    payload = {
        "paper_residual": uniq.paper_residual,
        "solutions": {p: [list(t.angles()) for t in s] for p, s in uniq.solutions.items()},
        "symmetric": uniq.symmetric,
        "zero_rules_sound": nd.rules_sound,
        "separation_residual": nd.separation_residual,
        "control_residual": nd.control_residual,
        "passed": ok,
    }
    _emit(args, uniq.lines() + nd.lines(), payload)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gedik(args) -> int:
    tol = default_tol()
    if args.perm:
        try:
            p = gedik.Permutation3.parse(args.perm)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows = [(p.cycles, p)]
    else:
        rows = list(gedik.TABLE)
    ok = True
    lines, entries = [], []
    for label, p in rows:
        try:
            rep = gedik.run_parity(p, tol)
        except gedik.ClassificationError as exc:
            ok = False
            lines.append(f"{label:<10} {p}  ERROR {exc}")
            continue
        expected = "Even" if p.sign == 1 else "Odd"
        ok = ok and rep.parity == expected
        lines.append(f"{label:<10} {p}  {rep.parity:<4}  residual={rep.residual:.3e}")
        entries.append({"permutation": str(p), "cycles": label, "parity": rep.parity,
                        "output": rep.output_label, "residual": rep.residual})
    _emit(args, lines, {"rows": entries, "passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_universality(args) -> int:
    if args.dim < 2:
        raise UsageError("--dim must be at least 2")
    try:
        rep = universality.run_universality(args.dim, args.max_iter, args.samples, args.seed)
    except universality.ClosureIncompleteError as exc:
        print(f"CLOSURE d={args.dim} dim={exc.dim} expected={args.dim ** 2} FAIL ({exc})")
        return EXIT_FAIL
    payload = {
        "d": rep.d, "closure_dim": rep.closure_dim, "iterations": rep.iterations,
        "abs_sum": rep.counterexample.abs_sum if rep.counterexample else None,
        "min_residual": rep.min_residual,
        "bracket_lines": [{"line": bl.key, "printed": bl.printed, "passed": bl.passed, "flagged": bl.flagged,
                           "computed": bl.oracle} for bl in rep.bracket_lines],
        "passed": rep.passed,
    }
    _emit(args, rep.lines() + ([""] + rep.text().splitlines() if args.verbose else []), payload)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_eval(args) -> int:
    d = load(args.file)
    m = evaluate(d, ZERO if args.functor == "zero" else RG, keep_scalars=args.keep_scalars)
    if args.exact_json:
        print(json.dumps(matrix_json(m)))
    else:
        print(f"# {m.shape[0]}x{m.shape[1]} matrix ({d.n_in} in, {d.n_out} out)")
        print(format_matrix(m))
    return EXIT_OK


def cmd_simplify(args) -> int:
    d = load(args.file)
    out, steps = rules.simplify(d, return_steps=True)
    if args.output:
        save(out, args.output)
        print(f"simplified {len(d.nodes)} -> {len(out.nodes)} nodes in {steps} steps; wrote {args.output}",
              file=sys.stderr)
    else:
        sys.stdout.write(to_text(out))
    return EXIT_OK


# --------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qutrit-rg", description="Qutrit red-green calculus checks and tools.")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps (default 0)")
    parser.add_argument("--exact-json", action="store_true", help="full-precision JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rules", help="soundness sweep over the rule library")
    p.add_argument("--functor", choices=["rg", "zero"], default="rg")
    p.add_argument("--only", help="comma-separated rule names, e.g. S1,K2")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("euler", help="Euler decomposition of H and its non-derivability")
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("gedik", help="single-qutrit permutation parity table")
    p.add_argument("--perm", help="one permutation as its image, e.g. 021")
    p.set_defaults(func=cmd_gedik)

    p = sub.add_parser("universality", help="qudit phase-gate obstruction and Lie closure")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("-v", "--verbose", action="store_true", help="also print the detailed report")
    p.set_defaults(func=cmd_universality)

    p = sub.add_parser("eval", help="print the matrix of a diagram file")
    p.add_argument("file", type=Path)
    p.add_argument("--functor", choices=["rg", "zero"], default="rg")
    p.add_argument("--keep-scalars", action="store_true", help="keep closed components")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simplify", help="simplify a diagram file")
    p.add_argument("file", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_simplify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except DiagramParseError as exc:
        print(f"error: {getattr(args, 'file', '')}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DiagramError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except universality.ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
