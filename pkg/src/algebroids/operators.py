"""First-order operators on the free module of sections E = A^k.

An operator is stored by its coefficient tensors: a zeroth-order k x k
matrix ``A`` and a first-order k x k x n tensor ``B``, acting by

    (D X)^c = sum_a A[c][a] X^a  +  sum_{a,i} B[c][a][i] dX^a/dx_i.

An operator is a quasi-derivation exactly when its commutator with every
module multiplication f_E is again a module multiplication.  At the tensor
level this says the B tensor factors through the identity: B[c][a][i] is
zero off the diagonal c != a and the diagonal values share a common vector
b[i], the coefficients of the attached derivation (the universal anchor).
Probing f over the coordinate variables is enough to decide this because
all coefficients are polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import Derivation, Poly, ShapeError, default_var_names, join_signed, scaled_symbol


class NotQuasiDerivation(ValueError):
    """An anchor was requested for an operator that has none."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SecondOrderCommutator(ValueError):
    """The commutator of the given operators leaves first-order form."""


class Section:
    """Element of E = A^k: a k-vector of polynomials over n variables."""

    __slots__ = ("num_vars", "rank", "components")

    def __init__(self, num_vars: int, components: Sequence[Poly]):
        components = tuple(components)
        if not components:
            raise ValueError("sections need rank >= 1")
        for comp in components:
            if comp.num_vars != num_vars:
                raise ShapeError(
                    f"section component over {comp.num_vars} variables, expected {num_vars}"
                )
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "rank", len(components))
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("Section is immutable")

    @classmethod
    def zero(cls, num_vars: int, rank: int) -> "Section":
        return cls(num_vars, tuple(Poly.zero(num_vars) for _ in range(rank)))

    @classmethod
    def basis(cls, num_vars: int, rank: int, index: int) -> "Section":
        if not 0 <= index < rank:
            raise IndexError(f"basis index {index} out of range for rank {rank}")
        return cls(
            num_vars,
            tuple(
                Poly.one(num_vars) if a == index else Poly.zero(num_vars)
                for a in range(rank)
            ),
        )

    @classmethod
    def monomial(cls, num_vars: int, rank: int, index: int, exponents) -> "Section":
        """x^exponents times the index-th basis section."""
        comp = Poly.monomial(tuple(exponents), 1)
        if comp.num_vars != num_vars:
            raise ShapeError("exponent tuple length does not match num_vars")
        return cls(
            num_vars,
            tuple(comp if a == index else Poly.zero(num_vars) for a in range(rank)),
        )

    def _check_compatible(self, other: "Section"):
        if self.num_vars != other.num_vars or self.rank != other.rank:
            raise ShapeError("section shapes differ")

    def __add__(self, other: "Section") -> "Section":
        self._check_compatible(other)
        return Section(
            self.num_vars, tuple(a + b for a, b in zip(self.components, other.components))
        )

    def __sub__(self, other: "Section") -> "Section":
        self._check_compatible(other)
        return Section(
            self.num_vars, tuple(a - b for a, b in zip(self.components, other.components))
        )

    def __neg__(self) -> "Section":
        return Section(self.num_vars, tuple(-c for c in self.components))

    def scale(self, f: Poly | int | Fraction) -> "Section":
        if not isinstance(f, Poly):
            f = Poly.constant(f, self.num_vars)
        return Section(self.num_vars, tuple(f * c for c in self.components))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.rank == other.rank
            and self.components == other.components
        )

    def __hash__(self) -> int:
        return hash((self.num_vars, self.rank, self.components))

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = default_var_names(self.num_vars)
        pieces = []
        for a, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            pieces.append(scaled_symbol(comp.format(names), f"e{a + 1}"))
        return join_signed(pieces)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Section({self.format()!r})"


AMatrix = tuple  # [c][a] -> Poly
BTensor = tuple  # [c][a][i] -> Poly


class FirstOrderOperator:
    """First-order operator on sections, stored by its (A, B) tensors."""

    __slots__ = ("num_vars", "rank", "a_part", "b_part")

    def __init__(self, num_vars: int, rank: int, a_part, b_part):
        a_part = tuple(tuple(row) for row in a_part)
        b_part = tuple(tuple(tuple(vec) for vec in row) for row in b_part)
        if len(a_part) != rank or any(len(row) != rank for row in a_part):
            raise ShapeError("A part must be a rank x rank matrix")
        if len(b_part) != rank or any(
            len(row) != rank or any(len(vec) != num_vars for vec in row)
            for row in b_part
        ):
            raise ShapeError("B part must be a rank x rank x num_vars tensor")
        for row in a_part:
            for p in row:
                if p.num_vars != num_vars:
                    raise ShapeError("A coefficient over the wrong variable count")
        for row in b_part:
            for vec in row:
                for p in vec:
                    if p.num_vars != num_vars:
                        raise ShapeError("B coefficient over the wrong variable count")
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "a_part", a_part)
        object.__setattr__(self, "b_part", b_part)

    def __setattr__(self, name, value):
        raise AttributeError("FirstOrderOperator is immutable")

    @classmethod
    def zero(cls, num_vars: int, rank: int) -> "FirstOrderOperator":
        z = Poly.zero(num_vars)
        a = tuple(tuple(z for _ in range(rank)) for _ in range(rank))
        b = tuple(
            tuple(tuple(z for _ in range(num_vars)) for _ in range(rank))
            for _ in range(rank)
        )
        return cls(num_vars, rank, a, b)

    @classmethod
    def componentwise(cls, d: Derivation, rank: int) -> "FirstOrderOperator":
        """Apply the vector field ``d`` to every component of a section."""
        n = d.num_vars
        z = Poly.zero(n)
        a = tuple(tuple(z for _ in range(rank)) for _ in range(rank))
        zero_vec = tuple(z for _ in range(n))
        b = tuple(
            tuple(d.components if col == row else zero_vec for col in range(rank))
            for row in range(rank)
        )
        return cls(n, rank, a, b)

    def apply(self, x: Section) -> Section:
        if x.num_vars != self.num_vars or x.rank != self.rank:
            raise ShapeError("operator and section shapes differ")
        n, k = self.num_vars, self.rank
        dx = [[x.components[a].diff(i) for i in range(n)] for a in range(k)]
        comps = []
        for c in range(k):
            acc = Poly.zero(n)
            arow = self.a_part[c]
            brow = self.b_part[c]
            for a in range(k):
                if not arow[a].is_zero() and not x.components[a].is_zero():
                    acc = acc + arow[a] * x.components[a]
                bvec = brow[a]
                for i in range(n):
                    if not bvec[i].is_zero() and not dx[a][i].is_zero():
                        acc = acc + bvec[i] * dx[a][i]
            comps.append(acc)
        return Section(n, comps)

    def __call__(self, x: Section) -> Section:
        return self.apply(x)

    def _check_compatible(self, other: "FirstOrderOperator"):
        if self.num_vars != other.num_vars or self.rank != other.rank:
            raise ShapeError("operator shapes differ")

    def __add__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        self._check_compatible(other)
        a = tuple(
            tuple(p + q for p, q in zip(r1, r2))
            for r1, r2 in zip(self.a_part, other.a_part)
        )
        b = tuple(
            tuple(
                tuple(p + q for p, q in zip(v1, v2)) for v1, v2 in zip(r1, r2)
            )
            for r1, r2 in zip(self.b_part, other.b_part)
        )
        return FirstOrderOperator(self.num_vars, self.rank, a, b)

    def __sub__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        return self + (-other)

    def __neg__(self) -> "FirstOrderOperator":
        a = tuple(tuple(-p for p in row) for row in self.a_part)
        b = tuple(tuple(tuple(-p for p in vec) for vec in row) for row in self.b_part)
        return FirstOrderOperator(self.num_vars, self.rank, a, b)

    def premultiply(self, f: Poly | int | Fraction) -> "FirstOrderOperator":
        """The operator f*D = f_E after D (scaling every output component)."""
        if not isinstance(f, Poly):
            f = Poly.constant(f, self.num_vars)
        a = tuple(tuple(f * p for p in row) for row in self.a_part)
        b = tuple(tuple(tuple(f * p for p in vec) for vec in row) for row in self.b_part)
        return FirstOrderOperator(self.num_vars, self.rank, a, b)

    def is_zero(self) -> bool:
        return all(p.is_zero() for row in self.a_part for p in row) and all(
            p.is_zero() for row in self.b_part for vec in row for p in vec
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, FirstOrderOperator):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.rank == other.rank
            and self.a_part == other.a_part
            and self.b_part == other.b_part
        )

    def __repr__(self) -> str:
        return f"FirstOrderOperator(n={self.num_vars}, k={self.rank})"


def op_apply(op: FirstOrderOperator, x: Section) -> Section:
    return op.apply(x)


def module_action(f: Poly, rank: int) -> FirstOrderOperator:
    """The operator f_E with f_E(X) = f*X."""
    n = f.num_vars
    z = Poly.zero(n)
    a = tuple(tuple(f if c == col else z for col in range(rank)) for c in range(rank))
    b = tuple(
        tuple(tuple(z for _ in range(n)) for _ in range(rank)) for _ in range(rank)
    )
    return FirstOrderOperator(n, rank, a, b)


@dataclass(frozen=True)
class OperatorWitness:
    """Concrete failure of the quasi-derivation property.

    ``var`` names the probe function f = x_var.  For an off-diagonal entry,
    [D, f_E](e_source) has a nonzero component along e_target (target !=
    source).  For a diagonal mismatch the scalars produced on e_source and
    e_target differ.  ``defect`` is the nonzero polynomial either way.
    """

    var: int
    source: int
    target: int
    kind: str  # "off-diagonal" | "diagonal-mismatch"
    defect: Poly


@dataclass(frozen=True)
class OperatorQDVerdict:
    ok: bool
    anchor: Derivation | None
    witness: OperatorWitness | None


def is_quasi_derivation(op: FirstOrderOperator) -> OperatorQDVerdict:
    """Decide the quasi-derivation property of a first-order operator.

    Yes exactly when B[c][a][i] = 0 for c != a and the diagonal B[a][a][i]
    does not depend on a; the common diagonal is the coefficient vector of
    the universal anchor.  On failure the witness names the smallest
    coordinate variable and index pair exhibiting the defect.
    """
    n, k = op.num_vars, op.rank
    for i in range(n):
        for c in range(k):
            for a in range(k):
                if c == a:
                    continue
                entry = op.b_part[c][a][i]
                if not entry.is_zero():
                    return OperatorQDVerdict(
                        False,
                        None,
                        OperatorWitness(i, a, c, "off-diagonal", entry),
                    )
        for a in range(k):
            for c in range(a + 1, k):
                diff = op.b_part[a][a][i] - op.b_part[c][c][i]
                if not diff.is_zero():
                    return OperatorQDVerdict(
                        False,
                        None,
                        OperatorWitness(i, a, c, "diagonal-mismatch", diff),
                    )
    anchor = Derivation(tuple(op.b_part[0][0][i] for i in range(n)))
    return OperatorQDVerdict(True, anchor, None)


def operator_witness_defect(op: FirstOrderOperator, w: OperatorWitness) -> Poly:
    """Re-evaluate a witness from scratch: the returned polynomial is the
    defect computed through [D, f_E] itself, not through the tensors."""
    f = Poly.variable(w.var, op.num_vars)
    e_src = Section.basis(op.num_vars, op.rank, w.source)
    delta_src = op.apply(e_src.scale(f)) - op.apply(e_src).scale(f)
    if w.kind == "off-diagonal":
        return delta_src.components[w.target]
    e_tgt = Section.basis(op.num_vars, op.rank, w.target)
    delta_tgt = op.apply(e_tgt.scale(f)) - op.apply(e_tgt).scale(f)
    return delta_src.components[w.source] - delta_tgt.components[w.target]


def universal_anchor(op: FirstOrderOperator) -> Derivation:
    """The derivation attached to a quasi-derivation by commuting with f_E."""
    verdict = is_quasi_derivation(op)
    if not verdict.ok:
        w = verdict.witness
        raise NotQuasiDerivation(
            f"operator is not a quasi-derivation ({w.kind} at f=x{w.var + 1}, "
            f"indices ({w.source}, {w.target}))",
            witness=w,
        )
    return verdict.anchor


def _compose0(d: FirstOrderOperator, e: FirstOrderOperator):
    """Zeroth-order coefficients of the composition d after e."""
    n, k = d.num_vars, d.rank
    out = []
    for c in range(k):
        row = []
        for b in range(k):
            acc = Poly.zero(n)
            for a in range(k):
                if not d.a_part[c][a].is_zero():
                    acc = acc + d.a_part[c][a] * e.a_part[a][b]
                for i in range(n):
                    coeff = d.b_part[c][a][i]
                    if not coeff.is_zero():
                        acc = acc + coeff * e.a_part[a][b].diff(i)
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _compose1(d: FirstOrderOperator, e: FirstOrderOperator):
    """First-order coefficients of the composition d after e."""
    n, k = d.num_vars, d.rank
    out = []
    for c in range(k):
        row = []
        for b in range(k):
            vec = []
            for j in range(n):
                acc = Poly.zero(n)
                for a in range(k):
                    if not d.a_part[c][a].is_zero():
                        acc = acc + d.a_part[c][a] * e.b_part[a][b][j]
                    if not d.b_part[c][a][j].is_zero():
                        acc = acc + d.b_part[c][a][j] * e.a_part[a][b]
                    for i in range(n):
                        coeff = d.b_part[c][a][i]
                        if not coeff.is_zero():
                            acc = acc + coeff * e.b_part[a][b][j].diff(i)
                vec.append(acc)
            row.append(tuple(vec))
        out.append(tuple(row))
    return tuple(out)


def op_commutator(d1: FirstOrderOperator, d2: FirstOrderOperator) -> FirstOrderOperator:
    """Commutator [d1, d2] as a first-order operator.

    The composition of two first-order operators is second order; in the
    commutator the second-order parts cancel whenever either operator has a
    diagonally factorized B tensor (in particular for quasi-derivations and
    module actions).  The cancellation is checked exactly on the coefficient
    tensors and :class:`SecondOrderCommutator` is raised if it fails, since
    the result would then not be representable here.
    """
    d1._check_compatible(d2)
    n, k = d1.num_vars, d1.rank
    # second-order obstruction: symmetrized sum over a of
    #   B1[c][a][i] B2[a][b][j] - B2[c][a][i] B1[a][b][j]
    for c in range(k):
        for b in range(k):
            for i in range(n):
                for j in range(i, n):
                    acc = Poly.zero(n)
                    for a in range(k):
                        acc = (
                            acc
                            + d1.b_part[c][a][i] * d2.b_part[a][b][j]
                            - d2.b_part[c][a][i] * d1.b_part[a][b][j]
                        )
                        if i != j:
                            acc = (
                                acc
                                + d1.b_part[c][a][j] * d2.b_part[a][b][i]
                                - d2.b_part[c][a][j] * d1.b_part[a][b][i]
                            )
                    if not acc.is_zero():
                        raise SecondOrderCommutator(
                            "commutator is genuinely second order "
                            f"(obstruction at component {c}, argument {b}, "
                            f"directions ({i}, {j}))"
                        )
    a12 = _compose0(d1, d2)
    a21 = _compose0(d2, d1)
    b12 = _compose1(d1, d2)
    b21 = _compose1(d2, d1)
    a = tuple(
        tuple(p - q for p, q in zip(r1, r2)) for r1, r2 in zip(a12, a21)
    )
    b = tuple(
        tuple(tuple(p - q for p, q in zip(v1, v2)) for v1, v2 in zip(r1, r2))
        for r1, r2 in zip(b12, b21)
    )
    return FirstOrderOperator(n, k, a, b)


def leibniz_qder_check(
    d1: FirstOrderOperator, d2: FirstOrderOperator, f: Poly
) -> FirstOrderOperator:
    """Defect of the module Leibniz rule for the commutator bracket.

    Returns [d1, f*d2] - f*[d1, d2] - d1_hat(f)*d2, which is the zero
    operator whenever d1 is a quasi-derivation.
    """
    anchor = universal_anchor(d1)
    lhs = op_commutator(d1, d2.premultiply(f))
    rhs = op_commutator(d1, d2).premultiply(f) + d2.premultiply(anchor.apply(f))
    return lhs - rhs
