"""Command-line front end.

Exit codes: 0 = analysis completed and every `expect` assertion matched,
1 = an assertion (or selftest) failed, 2 = load/validation error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .brackets import rank1_from_vector_field
from .documents import DocumentError, load_document, run_classify, _fmt_flag
from .multivec import jacobi_bracket
from .operators import is_quasi_derivation
from .selftest import (
    DEFAULT_SEED,
    RANK1_SWEEP_EXPECTED_JACOBI,
    reverify_bracket_verdicts,
    run_rank1_sweep,
    run_sn_equivalence,
)


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None
    try:
        return load_document(text)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _document_bracket(doc):
    if doc.kind == "bracket":
        return doc.bracket
    if doc.kind == "jacobi_structure":
        return jacobi_bracket(doc.bivector, doc.field)
    if doc.kind == "vector_field":
        return rank1_from_vector_field(doc.field)
    return None


def _cmd_check(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return 2
    report = run_classify(doc)
    sys.stdout.write(report.render())

    bracket = _document_bracket(doc)
    if bracket is not None:
        notes = reverify_bracket_verdicts(
            bracket, random.Random(DEFAULT_SEED), trials=20, max_degree=args.max_degree
        )
        if notes:
            for note in notes:
                print(f"internal error: {note}", file=sys.stderr)
            return 1

    if not doc.expect:
        return 0
    failures = 0
    print("== expect ==")
    for name, expected in doc.expect:
        actual = report.flag_value(name)
        if actual == expected:
            print(f"expect {name} = {_fmt_flag(expected)}: ok")
        else:
            failures += 1
            print(
                f"expect {name} = {_fmt_flag(expected)}: FAILED (got {_fmt_flag(actual)})"
            )
    return 1 if failures else 0


def _cmd_anchors(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return 2
    names = doc.variables
    if doc.kind == "operator":
        verdict = is_quasi_derivation(doc.operator)
        if not verdict.ok:
            w = verdict.witness
            print(
                "error: operator is not a quasi-derivation "
                f"({w.kind} at f={names[w.var]}, defect {w.defect.format(names)})",
                file=sys.stderr,
            )
            return 1
        print(f"universal anchor: {verdict.anchor.format(names)}")
        return 0
    from .brackets import left_qd_check, right_qd_check
    from .documents import _anchor_extras
    from .brackets import classify

    bracket = _document_bracket(doc)
    rqd = right_qd_check(bracket)
    lqd = left_qd_check(bracket)
    if not (rqd.ok and lqd.ok):
        side = "right" if not rqd.ok else "left"
        probe = (rqd if not rqd.ok else lqd).witness
        print(
            f"error: bracket fails the {side}-slot quasi-derivation check "
            f"(X = {probe.x.format(names)}, f = {probe.f.format(names)}, "
            f"Y = {probe.y.format(names)}, defect {probe.defect.format(names)})",
            file=sys.stderr,
        )
        return 1
    report = classify(bracket)
    for label, value in _anchor_extras(report, names):
        print(f"{label}: {value}")
    return 0


def _cmd_selftest(args) -> int:
    ok = True

    sweep = run_rank1_sweep()
    print(
        f"rank-1 sweep: {sweep.total} brackets, "
        f"{sweep.jacobi_count} jacobi structures, "
        f"{len(sweep.non_skew_jacobi)} non-skew jacobi brackets"
    )
    if sweep.qd_failures:
        print(f"FAIL: {sweep.qd_failures} rank-1 brackets failed a slot check")
        ok = False
    if sweep.non_skew_jacobi:
        print("FAIL: jacobi brackets that are not skew-symmetric:")
        for item in sweep.non_skew_jacobi:
            print(f"  C={item[0]}, L={item[1]}, R={item[2]}, M={item[3]}")
        ok = False
    if sweep.jacobi_count != RANK1_SWEEP_EXPECTED_JACOBI:
        print(
            f"FAIL: jacobi structure count {sweep.jacobi_count} != "
            f"frozen {RANK1_SWEEP_EXPECTED_JACOBI}"
        )
        ok = False

    equiv = run_sn_equivalence(cases=args.cases, seed=args.seed)
    print(
        f"sn equivalence: {equiv.cases} cases "
        f"({equiv.positives} compatible, {equiv.negatives} not), "
        f"{len(equiv.mismatches)} mismatches, "
        f"{len(equiv.anchor_mismatches)} anchor mismatches"
    )
    if not equiv.ok:
        for case, pair_ok, jac_ok in equiv.mismatches:
            print(
                f"FAIL: case {case}: conditions say {pair_ok}, jacobiator says {jac_ok}"
            )
        for case in equiv.anchor_mismatches:
            print(f"FAIL: case {case}: anchor mismatch")
        ok = False

    print("selftest: " + ("ok" if ok else "FAILED"))
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="algebroids",
        description=(
            "Exact structure checks for bracket documents: quasi-derivation "
            "slots, anchors, skew-symmetry, and the Jacobi identity."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="classify a document and print the report")
    p_check.add_argument("file")
    p_check.add_argument(
        "--max-degree",
        type=int,
        default=3,
        help="degree envelope for the randomized re-verification (default 3)",
    )
    p_check.set_defaults(func=_cmd_check)

    p_anchors = sub.add_parser("anchors", help="print extracted anchor data only")
    p_anchors.add_argument("file")
    p_anchors.set_defaults(func=_cmd_anchors)

    p_self = sub.add_parser(
        "selftest",
        help="run the exhaustive rank-1 sweep and the equivalence corpus",
    )
    p_self.add_argument("--cases", type=int, default=300)
    p_self.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
