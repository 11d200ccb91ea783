"""Multivector fields on the polynomial base and their graded calculus.

A degree-p multivector is a map from strictly increasing p-tuples of
direction indices to polynomial coefficients; degree 0 is a single
polynomial and degree 1 matches :class:`~algebroids.poly.Derivation`.

The graded bracket on multivectors extends the commutator of vector fields
through the decomposable rule

    [V_1^...^V_p, W_1^...^W_q]
        = sum_{s,t} (-1)^{s+t} [V_s, W_t] ^ V_1^..s^..^V_p ^ W_1^..t^..^W_q

(hats mark omitted factors, indices counted from 1) together with
[f, Q] = -i_df Q for functions.  Every stored term c * d_{i1}^...^d_{ip} is
decomposable with the coefficient attached to its first factor, which is
consistent: the same bracket results from any other placement.  These
conventions are pinned down by the equivalence of the compatibility
equations with the Jacobi identity of the induced rank-1 bracket, which the
acceptance suite verifies on a large randomized corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .brackets import BidiffBracket, _require_anchor
from .poly import (
    Derivation,
    Poly,
    ShapeError,
    default_var_names,
    join_signed,
    scaled_symbol,
)

IndexTuple = tuple[int, ...]


def _merge_sign(left: IndexTuple, right: IndexTuple) -> tuple[int, IndexTuple] | None:
    """Sort the concatenation of two increasing tuples, tracking the sign.

    Returns None when an index repeats (the wedge vanishes).
    """
    merged = list(left) + list(right)
    sign = 1
    # insertion sort; each swap of adjacent distinct entries flips the sign
    for i in range(1, len(merged)):
        j = i
        while j > 0 and merged[j - 1] > merged[j]:
            merged[j - 1], merged[j] = merged[j], merged[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and merged[j - 1] == merged[j]:
            return None
    return sign, tuple(merged)


class Multivector:
    """Skew multivector field with polynomial components."""

    __slots__ = ("num_vars", "degree", "components")

    def __init__(
        self,
        num_vars: int,
        degree: int,
        components: Mapping[IndexTuple, Poly] | Iterable = (),
    ):
        if degree < 0:
            raise ValueError("multivector degree must be non-negative")
        items = components.items() if isinstance(components, Mapping) else components
        clean: dict[IndexTuple, Poly] = {}
        for idx, poly in items:
            idx = tuple(idx)
            if len(idx) != degree:
                raise ShapeError(f"index tuple {idx} does not have length {degree}")
            if any(not 0 <= i < num_vars for i in idx):
                raise ShapeError(f"direction index out of range in {idx}")
            if any(idx[t] >= idx[t + 1] for t in range(len(idx) - 1)):
                raise ValueError(f"index tuple {idx} is not strictly increasing")
            if poly.num_vars != num_vars:
                raise ShapeError("component over the wrong variable count")
            if poly.is_zero():
                continue
            if idx in clean:
                total = clean[idx] + poly
                if total.is_zero():
                    del clean[idx]
                else:
                    clean[idx] = total
            else:
                clean[idx] = poly
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "components", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @classmethod
    def zero(cls, num_vars: int, degree: int) -> "Multivector":
        return cls(num_vars, degree, {})

    @classmethod
    def from_poly(cls, f: Poly) -> "Multivector":
        return cls(f.num_vars, 0, {(): f})

    @classmethod
    def from_derivation(cls, d: Derivation) -> "Multivector":
        return cls(
            d.num_vars,
            1,
            {(i,): d.components[i] for i in range(d.num_vars)},
        )

    def to_derivation(self) -> Derivation:
        if self.degree != 1:
            raise ValueError("only degree-1 multivectors are vector fields")
        return Derivation(
            tuple(
                self.components.get((i,), Poly.zero(self.num_vars))
                for i in range(self.num_vars)
            )
        )

    def to_poly(self) -> Poly:
        if self.degree != 0:
            raise ValueError("only degree-0 multivectors are functions")
        return self.components.get((), Poly.zero(self.num_vars))

    def matrix_entry(self, i: int, j: int) -> Poly:
        """Skew-matrix extension of a degree-2 multivector."""
        if self.degree != 2:
            raise ValueError("matrix entries only exist in degree 2")
        if i == j:
            return Poly.zero(self.num_vars)
        if i < j:
            return self.components.get((i, j), Poly.zero(self.num_vars))
        return -self.components.get((j, i), Poly.zero(self.num_vars))

    def is_zero(self) -> bool:
        return not self.components

    def _check_compatible(self, other: "Multivector"):
        if self.num_vars != other.num_vars:
            raise ShapeError("multivectors over different variable counts")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check_compatible(other)
        if self.degree != other.degree:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise ShapeError("cannot add multivectors of different degrees")
        out = dict(self.components)
        for idx, poly in other.components.items():
            if idx in out:
                total = out[idx] + poly
                if total.is_zero():
                    del out[idx]
                else:
                    out[idx] = total
            else:
                out[idx] = poly
        return Multivector(self.num_vars, self.degree, out)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def __neg__(self) -> "Multivector":
        return Multivector(
            self.num_vars, self.degree, {i: -p for i, p in self.components.items()}
        )

    def scale(self, f: Poly | int) -> "Multivector":
        if not isinstance(f, Poly):
            f = Poly.constant(f, self.num_vars)
        return Multivector(
            self.num_vars, self.degree, {i: f * p for i, p in self.components.items()}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.degree == other.degree
            and self.components == other.components
        )

    def __hash__(self) -> int:
        return hash(
            (self.num_vars, self.degree, frozenset(self.components.items()))
        )

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = default_var_names(self.num_vars)
        if not self.components:
            return "0"
        pieces = []
        for idx in sorted(self.components):
            poly = self.components[idx]
            body = poly.format(names)
            basis = "^".join(f"d_{names[i]}" for i in idx)
            if not basis:
                pieces.append(body)
            else:
                pieces.append(scaled_symbol(body, basis))
        return join_signed(pieces)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Multivector(deg={self.degree}, {self.format()!r})"


def wedge(p: Multivector, q: Multivector) -> Multivector:
    """Exterior product; graded commutative with shuffle signs."""
    p._check_compatible(q)
    out = Multivector.zero(p.num_vars, p.degree + q.degree)
    terms: dict[IndexTuple, Poly] = {}
    for pi, pp in p.components.items():
        for qi, qp in q.components.items():
            merged = _merge_sign(pi, qi)
            if merged is None:
                continue
            sign, idx = merged
            contrib = pp * qp if sign > 0 else -(pp * qp)
            if idx in terms:
                total = terms[idx] + contrib
                if total.is_zero():
                    del terms[idx]
                else:
                    terms[idx] = total
            else:
                terms[idx] = contrib
    return Multivector(p.num_vars, p.degree + q.degree, terms) if terms else out


def _contract_df(f: Poly, q: Multivector) -> Multivector:
    """Interior contraction i_df Q, lowering the degree by one."""
    if q.degree == 0:
        raise ValueError("cannot contract a function")
    terms: dict[IndexTuple, Poly] = {}
    for idx, poly in q.components.items():
        for t, direction in enumerate(idx):
            df = f.diff(direction)
            if df.is_zero():
                continue
            rest = idx[:t] + idx[t + 1 :]
            contrib = poly * df if t % 2 == 0 else -(poly * df)
            if rest in terms:
                total = terms[rest] + contrib
                if total.is_zero():
                    del terms[rest]
                else:
                    terms[rest] = total
            else:
                terms[rest] = contrib
    return Multivector(q.num_vars, q.degree - 1, terms)


def interior_df(f: Poly, bivector: Multivector) -> Derivation:
    """i_df applied to a bivector: component j is sum_i (df/dx_i) L^{ij}."""
    if bivector.degree != 2:
        raise ShapeError("interior_df expects a degree-2 multivector")
    if f.num_vars != bivector.num_vars:
        raise ShapeError("function and bivector over different variable counts")
    return _contract_df(f, bivector).to_derivation()


def _basis_mv(num_vars: int, idx: IndexTuple, coeff: Poly) -> Multivector:
    return Multivector(num_vars, len(idx), {idx: coeff})


def sn_bracket(p: Multivector, q: Multivector) -> Multivector:
    """Graded bracket of multivector fields.

    Restricts to the commutator in degree (1, 1); the result has degree
    p + q - 1 (degree 0 for two functions, where it vanishes).
    """
    p._check_compatible(q)
    n = p.num_vars
    dp, dq = p.degree, q.degree
    if dp == 0 and dq == 0:
        return Multivector.zero(n, 0)
    if dp == 0:
        total = Multivector.zero(n, dq - 1)
        for _, f in p.components.items():
            total = total - _contract_df(f, q)
        return total
    if dq == 0:
        # [P, f] = (-1)^p [f, P]
        total = Multivector.zero(n, dp - 1)
        for _, f in q.components.items():
            total = total - _contract_df(f, p)
        return total if dp % 2 == 0 else -total
    one = Poly.one(n)
    total = Multivector.zero(n, dp + dq - 1)
    for pi, pp in p.components.items():
        for qi, qp in q.components.items():
            # factor the terms as (pp d_{pi[0]}) ^ d_{pi[1]} ^ ... and
            # (qp d_{qi[0]}) ^ d_{qi[1]} ^ ...
            for s in range(dp):
                v_coeff = pp if s == 0 else one
                v_rest_coeff = one if s == 0 else pp
                v_field = Derivation(
                    tuple(
                        v_coeff if t == pi[s] else Poly.zero(n) for t in range(n)
                    )
                )
                v_rest = pi[:s] + pi[s + 1 :]
                for t in range(dq):
                    w_coeff = qp if t == 0 else one
                    w_rest_coeff = one if t == 0 else qp
                    w_field = Derivation(
                        tuple(
                            w_coeff if u == qi[t] else Poly.zero(n)
                            for u in range(n)
                        )
                    )
                    w_rest = qi[:t] + qi[t + 1 :]
                    comm = v_field.commutator(w_field)
                    if comm.is_zero():
                        continue
                    rest = wedge(
                        _basis_mv(n, v_rest, v_rest_coeff),
                        _basis_mv(n, w_rest, w_rest_coeff),
                    )
                    if rest.is_zero():
                        continue
                    term = wedge(Multivector.from_derivation(comm), rest)
                    if (s + t) % 2 == 1:
                        term = -term
                    total = total + term
    return total


@dataclass(frozen=True)
class PairCheckResult:
    """Verdict of the bivector/vector-field compatibility equations."""

    ok: bool
    failed_condition: str | None  # "vector_field_compat" | "self_compat"
    defect: Multivector | None


def jacobi_pair_check(bivector: Multivector, gamma: Derivation) -> PairCheckResult:
    """Check [Gamma, Lambda] = 0 and [Lambda, Lambda] + 2 Lambda^Gamma = 0.

    Both conditions together are equivalent to the Jacobi identity of the
    induced rank-1 bracket; the equivalence is verified by the acceptance
    corpus rather than assumed.
    """
    if bivector.degree != 2:
        raise ShapeError("expected a degree-2 multivector")
    if bivector.num_vars != gamma.num_vars:
        raise ShapeError("bivector and vector field over different variable counts")
    gamma_mv = Multivector.from_derivation(gamma)
    first = sn_bracket(gamma_mv, bivector)
    if not first.is_zero():
        return PairCheckResult(False, "vector_field_compat", first)
    second = sn_bracket(bivector, bivector) + wedge(bivector, gamma_mv).scale(2)
    if not second.is_zero():
        return PairCheckResult(False, "self_compat", second)
    return PairCheckResult(True, None, None)


def jacobi_bracket(bivector: Multivector, gamma: Derivation) -> BidiffBracket:
    """The rank-1 bracket [f, g] = Lambda(df, dg) + f*Gamma(g) - g*Gamma(f)."""
    if bivector.degree != 2:
        raise ShapeError("expected a degree-2 multivector")
    if bivector.num_vars != gamma.num_vars:
        raise ShapeError("bivector and vector field over different variable counts")
    n = bivector.num_vars
    m_entries = []
    for i in range(n):
        for j in range(n):
            entry = bivector.matrix_entry(i, j)
            if not entry.is_zero():
                m_entries.append(((0, 0, 0, i, j), entry))
    l_entries = [((0, 0, 0, i), -gamma.components[i]) for i in range(n)]
    r_entries = [((0, 0, 0, i), gamma.components[i]) for i in range(n)]
    return BidiffBracket.from_entries(
        n, 1, l_entries=l_entries, r_entries=r_entries, m_entries=m_entries
    )


def hamiltonian_anchor(bivector: Multivector, gamma: Derivation, f: Poly) -> Derivation:
    """The derivation i_df Lambda + f*Gamma attached to the function f."""
    return interior_df(f, bivector) + gamma.scale(f)


def poisson_skew_identity_check(
    bracket: BidiffBracket, f: Poly, g: Poly, h: Poly
) -> Poly:
    """Defect of the squared-argument skew-symmetry identity.

    For a rank-1 bracket satisfying the Jacobi identity and the Leibniz
    rules, [[f^2, g] + [g, f^2], h] equals 2([f, g] + [g, f])[f, h]; the
    returned polynomial is their difference.  With f = g = h this forces
    [f, f] = 0, i.e. skew-symmetry needs no separate axiom.
    """
    if bracket.rank != 1:
        raise ShapeError("the identity is about rank-1 brackets")
    n = bracket.num_vars

    def br(u: Poly, v: Poly) -> Poly:
        return bracket.eval(Section(n, (u,)), Section(n, (v,))).components[0]

    f2 = f * f
    lhs = br(br(f2, g) + br(g, f2), h)
    rhs = (br(f, g) + br(g, f)) * br(f, h) * 2
    return lhs - rhs


def recovered_jacobi_pair(bracket: BidiffBracket) -> tuple[Multivector, Derivation]:
    """Read (Lambda, Gamma) back off a rank-1 bracket's anchor data.

    The skew part of the differential anchor tensor is the bivector and the
    tensorial part is the vector field; the symmetric part must vanish for
    a skew bracket and is asserted.
    """
    if bracket.rank != 1:
        raise ShapeError("recovery applies to rank-1 brackets")
    anchor = _require_anchor(bracket, "right")
    n = bracket.num_vars
    entries: dict[IndexTuple, Poly] = {}
    for i in range(n):
        for j in range(i + 1, n):
            sym = anchor.m[0][i][j] + anchor.m[0][j][i]
            assert sym.is_zero(), "symmetric differential part on a skew bracket"
            if not anchor.m[0][i][j].is_zero():
                entries[(i, j)] = anchor.m[0][i][j]
    bivector = Multivector(n, 2, entries)
    gamma = Derivation(tuple(anchor.rho[0][i] for i in range(n)))
    return bivector, gamma
