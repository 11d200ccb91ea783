"""Structure documents: JSON schema, validation, and report rendering.

A document declares the variable names and the module rank, then carries
exactly one payload:

* ``bracket`` - sparse entries for the (C, L, R, M) tensors,
* ``jacobi_structure`` - a bivector and a vector field,
* ``operator`` - sparse entries for a first-order operator's (A, B) tensors,
* ``vector_field`` - components of a vector field (a rank-1 bracket seed).

Tensor entries are objects ``{"indices": [...], "poly": "..."}`` with
0-based indices.  An optional ``expect`` object asserts classification
flags.  Loading validates everything and parses all polynomials to
canonical form; rendering is deterministic, so identical documents always
produce byte-identical reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .brackets import (
    BidiffBracket,
    ClassificationReport,
    ReportWitness,
    classify,
)
from .multivec import (
    Multivector,
    jacobi_bracket,
    jacobi_pair_check,
    recovered_jacobi_pair,
)
from .operators import FirstOrderOperator, Section, is_quasi_derivation
from .parsing import ParseError, is_valid_var_name, parse_poly
from .poly import Derivation, Poly

PAYLOAD_KINDS = ("bracket", "jacobi_structure", "operator", "vector_field")

BRACKET_FLAGS = ClassificationReport.FLAG_NAMES
JACOBI_FLAGS = BRACKET_FLAGS + ("sn_compatible",)
OPERATOR_FLAGS = ("is_quasi_derivation",)


class DocumentError(ValueError):
    """Schema violation, carrying the document path of the offending node."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class StructureDocument:
    variables: tuple[str, ...]
    rank: int
    kind: str
    bracket: BidiffBracket | None
    bivector: Multivector | None
    field: Derivation | None
    operator: FirstOrderOperator | None
    expect: tuple[tuple[str, bool | None], ...]

    @property
    def num_vars(self) -> int:
        return len(self.variables)


def _expected_flags(kind: str) -> tuple[str, ...]:
    if kind == "operator":
        return OPERATOR_FLAGS
    if kind == "jacobi_structure":
        return JACOBI_FLAGS
    return BRACKET_FLAGS


def _require(condition: bool, path: str, reason: str):
    if not condition:
        raise DocumentError(path, reason)


def _parse_entries(
    node, path: str, bounds: Sequence[int], variables: Sequence[str]
) -> list[tuple[tuple[int, ...], Poly]]:
    _require(isinstance(node, list), path, "expected a list of entries")
    out = []
    seen = set()
    for pos, raw in enumerate(node):
        epath = f"{path}[{pos}]"
        _require(isinstance(raw, dict), epath, "expected an entry object")
        _require(
            set(raw) == {"indices", "poly"},
            epath,
            'entry must have exactly the keys "indices" and "poly"',
        )
        indices = raw["indices"]
        _require(isinstance(indices, list), f"{epath}.indices", "expected a list")
        _require(
            len(indices) == len(bounds),
            f"{epath}.indices",
            f"expected {len(bounds)} indices, got {len(indices)}",
        )
        for axis, (idx, bound) in enumerate(zip(indices, bounds)):
            _require(
                isinstance(idx, int) and not isinstance(idx, bool),
                f"{epath}.indices[{axis}]",
                "indices must be integers",
            )
            _require(
                0 <= idx < bound,
                f"{epath}.indices[{axis}]",
                f"index {idx} out of range [0, {bound})",
            )
        key = tuple(indices)
        _require(key not in seen, f"{epath}.indices", f"duplicate entry {list(key)}")
        seen.add(key)
        _require(
            isinstance(raw["poly"], str), f"{epath}.poly", "expected a string"
        )
        try:
            poly = parse_poly(raw["poly"], variables)
        except ParseError as exc:
            raise DocumentError(
                f"{epath}.poly", f"{exc.reason} (offset {exc.offset})"
            ) from exc
        out.append((key, poly))
    return out


def load_document(text: str) -> StructureDocument:
    """Parse and fully validate a structure document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"not valid document text: {exc}") from exc
    _require(isinstance(data, dict), "$", "top level must be an object")

    known = {"variables", "rank", "expect", *PAYLOAD_KINDS}
    for key in data:
        _require(key in known, f"$.{key}", "unknown key")

    _require("variables" in data, "$.variables", "missing")
    variables = data["variables"]
    _require(isinstance(variables, list), "$.variables", "expected a list")
    for pos, name in enumerate(variables):
        _require(
            isinstance(name, str) and is_valid_var_name(name),
            f"$.variables[{pos}]",
            "variable names must be identifiers",
        )
    _require(
        len(set(variables)) == len(variables), "$.variables", "duplicate names"
    )
    variables = tuple(variables)
    n = len(variables)

    _require("rank" in data, "$.rank", "missing")
    rank = data["rank"]
    _require(
        isinstance(rank, int) and not isinstance(rank, bool) and rank >= 1,
        "$.rank",
        "rank must be an integer >= 1",
    )

    present = [kind for kind in PAYLOAD_KINDS if kind in data]
    _require(
        len(present) == 1,
        "$",
        f"exactly one payload of {list(PAYLOAD_KINDS)} is required",
    )
    kind = present[0]

    bracket = bivector = field = operator = None
    if kind == "bracket":
        node = data["bracket"]
        _require(isinstance(node, dict), "$.bracket", "expected an object")
        for key in node:
            _require(key in ("C", "L", "R", "M"), f"$.bracket.{key}", "unknown key")
        k = rank
        c_entries = _parse_entries(node.get("C", []), "$.bracket.C", (k, k, k), variables)
        l_entries = _parse_entries(
            node.get("L", []), "$.bracket.L", (k, k, k, n), variables
        )
        r_entries = _parse_entries(
            node.get("R", []), "$.bracket.R", (k, k, k, n), variables
        )
        m_entries = _parse_entries(
            node.get("M", []), "$.bracket.M", (k, k, k, n, n), variables
        )
        bracket = BidiffBracket.from_entries(
            n, k, c_entries=c_entries, l_entries=l_entries,
            r_entries=r_entries, m_entries=m_entries,
        )
    elif kind == "jacobi_structure":
        node = data["jacobi_structure"]
        _require(isinstance(node, dict), "$.jacobi_structure", "expected an object")
        for key in node:
            _require(
                key in ("bivector", "vector_field"),
                f"$.jacobi_structure.{key}",
                "unknown key",
            )
        _require(
            rank == 1, "$.rank", "a jacobi_structure payload requires rank 1"
        )
        biv_entries = _parse_entries(
            node.get("bivector", []), "$.jacobi_structure.bivector", (n, n), variables
        )
        for pos, (idx, _) in enumerate(biv_entries):
            _require(
                idx[0] < idx[1],
                f"$.jacobi_structure.bivector[{pos}].indices",
                "bivector indices must be strictly increasing",
            )
        gamma_entries = _parse_entries(
            node.get("vector_field", []),
            "$.jacobi_structure.vector_field",
            (n,),
            variables,
        )
        bivector = Multivector(n, 2, {idx: p for idx, p in biv_entries})
        comps = [Poly.zero(n) for _ in range(n)]
        for (i,), p in gamma_entries:
            comps[i] = p
        field = Derivation(comps)
    elif kind == "operator":
        node = data["operator"]
        _require(isinstance(node, dict), "$.operator", "expected an object")
        for key in node:
            _require(key in ("A", "B"), f"$.operator.{key}", "unknown key")
        k = rank
        a_entries = _parse_entries(node.get("A", []), "$.operator.A", (k, k), variables)
        b_entries = _parse_entries(
            node.get("B", []), "$.operator.B", (k, k, n), variables
        )
        a_rows = [[Poly.zero(n) for _ in range(k)] for _ in range(k)]
        for (c, a), p in a_entries:
            a_rows[c][a] = p
        b_rows = [[[Poly.zero(n) for _ in range(n)] for _ in range(k)] for _ in range(k)]
        for (c, a, i), p in b_entries:
            b_rows[c][a][i] = p
        operator = FirstOrderOperator(n, k, a_rows, b_rows)
    else:  # vector_field
        _require(rank == 1, "$.rank", "a vector_field payload requires rank 1")
        gamma_entries = _parse_entries(
            data["vector_field"], "$.vector_field", (n,), variables
        )
        comps = [Poly.zero(n) for _ in range(n)]
        for (i,), p in gamma_entries:
            comps[i] = p
        field = Derivation(comps)

    expect: list[tuple[str, bool | None]] = []
    if "expect" in data:
        node = data["expect"]
        _require(isinstance(node, dict), "$.expect", "expected an object")
        allowed = _expected_flags(kind)
        for name in sorted(node):
            _require(
                name in allowed,
                f"$.expect.{name}",
                f"unknown flag (valid for this payload: {', '.join(allowed)})",
            )
            value = node[name]
            if value is None or value == "not-applicable":
                expect.append((name, None))
            elif isinstance(value, bool):
                expect.append((name, value))
            else:
                raise DocumentError(
                    f"$.expect.{name}",
                    'flag assertions must be true, false, or "not-applicable"',
                )

    return StructureDocument(
        variables=variables,
        rank=rank,
        kind=kind,
        bracket=bracket,
        bivector=bivector,
        field=field,
        operator=operator,
        expect=tuple(expect),
    )


def _entry_obj(indices, poly: Poly, names) -> dict:
    return {"indices": list(indices), "poly": poly.format(names)}


def _canonical_payload(doc: StructureDocument) -> dict:
    names = doc.variables
    n, k = doc.num_vars, doc.rank
    if doc.kind == "bracket":
        br = doc.bracket
        tensors: dict[str, list] = {"C": [], "L": [], "R": [], "M": []}
        for c in range(k):
            for a in range(k):
                for b in range(k):
                    if not br.c_t[c][a][b].is_zero():
                        tensors["C"].append(_entry_obj((c, a, b), br.c_t[c][a][b], names))
                    for i in range(n):
                        if not br.l_t[c][a][b][i].is_zero():
                            tensors["L"].append(
                                _entry_obj((c, a, b, i), br.l_t[c][a][b][i], names)
                            )
                        if not br.r_t[c][a][b][i].is_zero():
                            tensors["R"].append(
                                _entry_obj((c, a, b, i), br.r_t[c][a][b][i], names)
                            )
                        for j in range(n):
                            if not br.m_t[c][a][b][i][j].is_zero():
                                tensors["M"].append(
                                    _entry_obj(
                                        (c, a, b, i, j), br.m_t[c][a][b][i][j], names
                                    )
                                )
        return {"bracket": tensors}
    if doc.kind == "jacobi_structure":
        biv = [
            _entry_obj(idx, doc.bivector.components[idx], names)
            for idx in sorted(doc.bivector.components)
        ]
        gamma = [
            _entry_obj((i,), doc.field.components[i], names)
            for i in range(n)
            if not doc.field.components[i].is_zero()
        ]
        return {"jacobi_structure": {"bivector": biv, "vector_field": gamma}}
    if doc.kind == "operator":
        op = doc.operator
        a_list = []
        b_list = []
        for c in range(k):
            for a in range(k):
                if not op.a_part[c][a].is_zero():
                    a_list.append(_entry_obj((c, a), op.a_part[c][a], names))
                for i in range(n):
                    if not op.b_part[c][a][i].is_zero():
                        b_list.append(_entry_obj((c, a, i), op.b_part[c][a][i], names))
        return {"operator": {"A": a_list, "B": b_list}}
    gamma = [
        _entry_obj((i,), doc.field.components[i], names)
        for i in range(n)
        if not doc.field.components[i].is_zero()
    ]
    return {"vector_field": gamma}


def _entry_list_lines(key: str, entries: list, indent: str, comma: str) -> list[str]:
    if not entries:
        return [f'{indent}"{key}": []{comma}']
    lines = [f'{indent}"{key}": [']
    for pos, entry in enumerate(entries):
        tail = "," if pos < len(entries) - 1 else ""
        lines.append(f"{indent}  {json.dumps(entry)}{tail}")
    lines.append(f"{indent}]{comma}")
    return lines


def canonical_document_text(doc: StructureDocument) -> str:
    """Canonical re-print; loading it again gives an identical document.

    One sparse entry per line, entries in index order, polynomials in
    canonical form.
    """
    payload = _canonical_payload(doc)[doc.kind]
    lines = ["{"]
    lines.append(f'  "variables": {json.dumps(list(doc.variables))},')
    lines.append(f'  "rank": {doc.rank},')
    payload_comma = "," if doc.expect else ""
    if doc.kind == "vector_field":
        lines.extend(_entry_list_lines(doc.kind, payload, "  ", payload_comma))
    else:
        lines.append(f'  "{doc.kind}": {{')
        keys = list(payload)
        for pos, key in enumerate(keys):
            comma = "," if pos < len(keys) - 1 else ""
            lines.extend(_entry_list_lines(key, payload[key], "    ", comma))
        lines.append("  }" + payload_comma)
    if doc.expect:
        exp = {
            name: ("not-applicable" if value is None else value)
            for name, value in doc.expect
        }
        lines.append(f'  "expect": {json.dumps(exp)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fmt_flag(value: bool | None) -> str:
    if value is None:
        return "not-applicable"
    return "true" if value else "false"


def _fmt_obj(obj, names) -> str:
    if isinstance(obj, (Poly, Section, Derivation, Multivector)):
        return obj.format(names)
    return str(obj)


@dataclass(frozen=True)
class ReportDocument:
    """Deterministic classification report for one document."""

    kind: str
    variables: tuple[str, ...]
    rank: int
    structure_echo: str
    flags: tuple[tuple[str, bool | None], ...]
    witnesses: tuple[tuple[str, tuple[tuple[str, str], ...], str], ...]
    extras: tuple[tuple[str, str], ...]
    notes: tuple[str, ...]

    def flag_value(self, name: str):
        for flag, value in self.flags:
            if flag == name:
                return value
        raise KeyError(name)

    def render(self) -> str:
        lines: list[str] = []
        lines.append("== structure ==")
        lines.append(f"kind: {self.kind}")
        lines.append(
            "variables: " + (", ".join(self.variables) if self.variables else "(none)")
        )
        lines.append(f"rank: {self.rank}")
        lines.append(self.structure_echo.rstrip("\n"))
        lines.append("")
        lines.append("== flags ==")
        for name, value in self.flags:
            lines.append(f"{name}: {_fmt_flag(value)}")
        lines.append("")
        lines.append("== witnesses ==")
        if not self.witnesses:
            lines.append("(none)")
        else:
            for check, inputs, defect in self.witnesses:
                lines.append(f"- check: {check}")
                for label, value in inputs:
                    lines.append(f"  {label} = {value}")
                lines.append(f"  defect = {defect}")
        if self.extras:
            lines.append("")
            lines.append("== recovered data ==")
            for label, value in self.extras:
                lines.append(f"{label}: {value}")
        for note in self.notes:
            lines.append("")
            lines.append(note)
        lines.append("")
        lines.append("== machine ==")
        machine = {
            "flags": {
                name: ("not-applicable" if v is None else v) for name, v in self.flags
            },
            "witnesses": [check for check, _, _ in self.witnesses],
        }
        lines.append(json.dumps(machine, sort_keys=True))
        lines.append("")
        return "\n".join(lines)


def _render_witness(w: ReportWitness, names):
    inputs = tuple((label, _fmt_obj(value, names)) for label, value in w.inputs)
    return (w.check, inputs, _fmt_obj(w.defect, names))


def _anchor_extras(report: ClassificationReport, names) -> list[tuple[str, str]]:
    extras = []
    for label, data in (
        ("left anchor", report.left_anchor_data),
        ("right anchor", report.right_anchor_data),
    ):
        if data is None:
            continue
        for a in range(data.rank):
            rho_der = Derivation(tuple(data.rho[a][i] for i in range(data.num_vars)))
            extras.append((f"{label} of e{a + 1}", rho_der.format(names)))
            for j in range(data.num_vars):
                if any(not data.m[a][j][i].is_zero() for i in range(data.num_vars)):
                    part = Derivation(
                        tuple(data.m[a][j][i] for i in range(data.num_vars))
                    )
                    extras.append(
                        (
                            f"{label} differential part of e{a + 1} along d_{names[j]}",
                            part.format(names),
                        )
                    )
    return extras


def _classification_report_doc(
    doc: StructureDocument,
    bracket: BidiffBracket,
    extra_flags: tuple[tuple[str, bool | None], ...] = (),
    extra_witnesses=(),
    notes: tuple[str, ...] = (),
) -> ReportDocument:
    names = doc.variables
    report = classify(bracket)
    flags = tuple((name, getattr(report, name)) for name in report.FLAG_NAMES)
    flags += extra_flags
    witnesses = tuple(_render_witness(w, names) for w in report.witnesses)
    witnesses += tuple(extra_witnesses)
    extras = _anchor_extras(report, names)
    if report.rank1_jacobi_form:
        bivector, gamma = recovered_jacobi_pair(bracket)
        extras.append(("recovered bivector", bivector.format(names)))
        extras.append(("recovered vector field", gamma.format(names)))
    return ReportDocument(
        kind=doc.kind,
        variables=doc.variables,
        rank=doc.rank,
        structure_echo=canonical_document_text(doc),
        flags=flags,
        witnesses=witnesses,
        extras=tuple(extras),
        notes=notes,
    )


def run_classify(doc: StructureDocument) -> ReportDocument:
    """Dispatch a document to the appropriate checks and build its report."""
    names = doc.variables
    if doc.kind == "bracket":
        return _classification_report_doc(doc, doc.bracket)
    if doc.kind == "vector_field":
        from .brackets import rank1_from_vector_field

        return _classification_report_doc(doc, rank1_from_vector_field(doc.field))
    if doc.kind == "jacobi_structure":
        pair = jacobi_pair_check(doc.bivector, doc.field)
        extra_witnesses = []
        if not pair.ok:
            extra_witnesses.append(
                (
                    "sn_compatibility",
                    (("condition", pair.failed_condition),),
                    pair.defect.format(names),
                )
            )
        bracket = jacobi_bracket(doc.bivector, doc.field)
        report = _classification_report_doc(
            doc,
            bracket,
            extra_flags=(("sn_compatible", pair.ok),),
            extra_witnesses=tuple(extra_witnesses),
        )
        agree = report.flag_value("satisfies_jacobi") == pair.ok
        notes = (f"sn conditions agree with the bracket jacobiator: {str(agree).lower()}",)
        return ReportDocument(
            kind=report.kind,
            variables=report.variables,
            rank=report.rank,
            structure_echo=report.structure_echo,
            flags=report.flags,
            witnesses=report.witnesses,
            extras=report.extras,
            notes=notes,
        )
    # operator
    verdict = is_quasi_derivation(doc.operator)
    witnesses = []
    extras = []
    if verdict.ok:
        extras.append(("universal anchor", verdict.anchor.format(names)))
    else:
        w = verdict.witness
        var_name = names[w.var]
        witnesses.append(
            (
                "quasi_derivation",
                (
                    ("f", var_name),
                    ("source basis index", str(w.source + 1)),
                    ("target basis index", str(w.target + 1)),
                    ("kind", w.kind),
                ),
                w.defect.format(names),
            )
        )
    return ReportDocument(
        kind=doc.kind,
        variables=doc.variables,
        rank=doc.rank,
        structure_echo=canonical_document_text(doc),
        flags=(("is_quasi_derivation", verdict.ok),),
        witnesses=tuple(witnesses),
        extras=tuple(extras),
        notes=(),
    )
