"""First-order bidifferential brackets on sections and their structure checks.

A candidate bracket on E = A^k is stored through four coefficient tensors::

    [X, Y]^c = sum_{a,b} ( C[c][a][b] X^a Y^b
                         + sum_i L[c][a][b][i] (dX^a/dx_i) Y^b
                         + sum_i R[c][a][b][i] X^a (dY^b/dx_i)
                         + sum_{i,j} M[c][a][b][i][j] (dX^a/dx_i)(dY^b/dx_j) )

Every check here is an exact decision over the rationals.  The bracket is a
quasi-derivation in its right slot exactly when the R and M tensors factor
through the identity on the output/right indices; the factored data is the
left anchor X -> X_hat with [X, fY] = f[X, Y] + X_hat(f) Y.  Mirrored
conditions on L and M give the right anchor.  Skew-symmetry and the Jacobi
identity are decided by evaluating on monomial section grids: the defect of
each identity is a multi-differential operator of bounded order per slot, so
its values on monomials up to that order determine all of its coefficients
triangularly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .operators import (
    FirstOrderOperator,
    NotQuasiDerivation,
    Section,
)
from .poly import Derivation, Poly, ShapeError, monomials_upto

SKEW_GRID_DEGREE = 1
JACOBI_GRID_DEGREE = 2


class BidiffBracket:
    """Bracket on A^k given by the (C, L, R, M) coefficient tensors."""

    __slots__ = ("num_vars", "rank", "c_t", "l_t", "r_t", "m_t", "_nonzero")

    def __init__(self, num_vars: int, rank: int, c_t, l_t, r_t, m_t):
        if rank < 1:
            raise ShapeError("bracket rank must be >= 1")
        c_t = tuple(tuple(tuple(row) for row in plane) for plane in c_t)
        l_t = tuple(
            tuple(tuple(tuple(vec) for vec in row) for row in plane) for plane in l_t
        )
        r_t = tuple(
            tuple(tuple(tuple(vec) for vec in row) for row in plane) for plane in r_t
        )
        m_t = tuple(
            tuple(
                tuple(tuple(tuple(mj) for mj in vec) for vec in row) for row in plane
            )
            for plane in m_t
        )
        k, n = rank, num_vars

        def bad(shape_ok):
            if not shape_ok:
                raise ShapeError("bracket tensor has the wrong shape")

        bad(len(c_t) == k and all(len(p) == k and all(len(r) == k for r in p) for p in c_t))
        bad(
            len(l_t) == k
            and all(
                len(p) == k
                and all(len(r) == k and all(len(v) == n for v in r) for r in p)
                for p in l_t
            )
        )
        bad(
            len(r_t) == k
            and all(
                len(p) == k
                and all(len(r) == k and all(len(v) == n for v in r) for r in p)
                for p in r_t
            )
        )
        bad(
            len(m_t) == k
            and all(
                len(p) == k
                and all(
                    len(r) == k
                    and all(len(v) == n and all(len(m) == n for m in v) for v in r)
                    for r in p
                )
                for p in m_t
            )
        )
        for plane in c_t:
            for row in plane:
                for p in row:
                    if p.num_vars != n:
                        raise ShapeError("C coefficient over the wrong variable count")
        for tensor in (l_t, r_t):
            for plane in tensor:
                for row in plane:
                    for vec in row:
                        for p in vec:
                            if p.num_vars != n:
                                raise ShapeError(
                                    "L/R coefficient over the wrong variable count"
                                )
        for plane in m_t:
            for row in plane:
                for vec in row:
                    for mj in vec:
                        for p in mj:
                            if p.num_vars != n:
                                raise ShapeError(
                                    "M coefficient over the wrong variable count"
                                )
        object.__setattr__(self, "num_vars", n)
        object.__setattr__(self, "rank", k)
        object.__setattr__(self, "c_t", c_t)
        object.__setattr__(self, "l_t", l_t)
        object.__setattr__(self, "r_t", r_t)
        object.__setattr__(self, "m_t", m_t)
        object.__setattr__(self, "_nonzero", None)

    def __setattr__(self, name, value):
        raise AttributeError("BidiffBracket is immutable")

    @classmethod
    def zero(cls, num_vars: int, rank: int) -> "BidiffBracket":
        z = Poly.zero(num_vars)
        k, n = rank, num_vars
        c = [[[z] * k for _ in range(k)] for _ in range(k)]
        l = [[[[z] * n for _ in range(k)] for _ in range(k)] for _ in range(k)]
        r = [[[[z] * n for _ in range(k)] for _ in range(k)] for _ in range(k)]
        m = [
            [[[[z] * n for _ in range(n)] for _ in range(k)] for _ in range(k)]
            for _ in range(k)
        ]
        return cls(num_vars, rank, c, l, r, m)

    @classmethod
    def from_entries(
        cls, num_vars: int, rank: int, c_entries=(), l_entries=(), r_entries=(), m_entries=()
    ) -> "BidiffBracket":
        """Build from sparse entry lists of (indices, Poly) pairs."""
        k, n = rank, num_vars
        z = Poly.zero(n)
        c = [[[z] * k for _ in range(k)] for _ in range(k)]
        l = [[[[z] * n for _ in range(k)] for _ in range(k)] for _ in range(k)]
        r = [[[[z] * n for _ in range(k)] for _ in range(k)] for _ in range(k)]
        m = [
            [[[[z] * n for _ in range(n)] for _ in range(k)] for _ in range(k)]
            for _ in range(k)
        ]
        for (ci, ai, bi), p in c_entries:
            c[ci][ai][bi] = c[ci][ai][bi] + p
        for (ci, ai, bi, i), p in l_entries:
            l[ci][ai][bi][i] = l[ci][ai][bi][i] + p
        for (ci, ai, bi, i), p in r_entries:
            r[ci][ai][bi][i] = r[ci][ai][bi][i] + p
        for (ci, ai, bi, i, j), p in m_entries:
            m[ci][ai][bi][i][j] = m[ci][ai][bi][i][j] + p
        return cls(num_vars, rank, c, l, r, m)

    def _nonzero_entries(self):
        cached = self._nonzero
        if cached is None:
            k, n = self.rank, self.num_vars
            czs = [
                (c, a, b, self.c_t[c][a][b])
                for c in range(k)
                for a in range(k)
                for b in range(k)
                if not self.c_t[c][a][b].is_zero()
            ]
            lzs = [
                (c, a, b, i, self.l_t[c][a][b][i])
                for c in range(k)
                for a in range(k)
                for b in range(k)
                for i in range(n)
                if not self.l_t[c][a][b][i].is_zero()
            ]
            rzs = [
                (c, a, b, i, self.r_t[c][a][b][i])
                for c in range(k)
                for a in range(k)
                for b in range(k)
                for i in range(n)
                if not self.r_t[c][a][b][i].is_zero()
            ]
            mzs = [
                (c, a, b, i, j, self.m_t[c][a][b][i][j])
                for c in range(k)
                for a in range(k)
                for b in range(k)
                for i in range(n)
                for j in range(n)
                if not self.m_t[c][a][b][i][j].is_zero()
            ]
            cached = (czs, lzs, rzs, mzs)
            object.__setattr__(self, "_nonzero", cached)
        return cached

    def eval(self, x: Section, y: Section) -> Section:
        if (
            x.num_vars != self.num_vars
            or y.num_vars != self.num_vars
            or x.rank != self.rank
            or y.rank != self.rank
        ):
            raise ShapeError("bracket and section shapes differ")
        n, k = self.num_vars, self.rank
        czs, lzs, rzs, mzs = self._nonzero_entries()
        dx = [[x.components[a].diff(i) for i in range(n)] for a in range(k)]
        dy = [[y.components[b].diff(j) for j in range(n)] for b in range(k)]
        comps = [Poly.zero(n) for _ in range(k)]
        for c, a, b, p in czs:
            if not x.components[a].is_zero() and not y.components[b].is_zero():
                comps[c] = comps[c] + p * x.components[a] * y.components[b]
        for c, a, b, i, p in lzs:
            if not dx[a][i].is_zero() and not y.components[b].is_zero():
                comps[c] = comps[c] + p * dx[a][i] * y.components[b]
        for c, a, b, i, p in rzs:
            if not x.components[a].is_zero() and not dy[b][i].is_zero():
                comps[c] = comps[c] + p * x.components[a] * dy[b][i]
        for c, a, b, i, j, p in mzs:
            if not dx[a][i].is_zero() and not dy[b][j].is_zero():
                comps[c] = comps[c] + p * dx[a][i] * dy[b][j]
        return Section(n, comps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BidiffBracket):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.rank == other.rank
            and self.c_t == other.c_t
            and self.l_t == other.l_t
            and self.r_t == other.r_t
            and self.m_t == other.m_t
        )

    def __repr__(self) -> str:
        return f"BidiffBracket(n={self.num_vars}, k={self.rank})"


def bracket_eval(bracket: BidiffBracket, x: Section, y: Section) -> Section:
    return bracket.eval(x, y)


@dataclass(frozen=True)
class AnchorData:
    """Extracted anchor coefficients for one slot of a QD bracket.

    The derivation attached to a section X has direction-i component

        sum_a rho[a][i] X^a + sum_{a,j} m[a][j][i] dX^a/dx_j

    so ``rho`` is the tensorial part and ``m`` the differential part (index
    order: section index, section-derivative direction, field direction).
    The m tensor can only be nonzero in rank 1.
    """

    num_vars: int
    rank: int
    rho: tuple  # [a][i] -> Poly
    m: tuple  # [a][j][i] -> Poly

    def anchor_of(self, x: Section) -> Derivation:
        if x.num_vars != self.num_vars or x.rank != self.rank:
            raise ShapeError("anchor data and section shapes differ")
        n, k = self.num_vars, self.rank
        comps = []
        for i in range(n):
            acc = Poly.zero(n)
            for a in range(k):
                if not self.rho[a][i].is_zero():
                    acc = acc + self.rho[a][i] * x.components[a]
                for j in range(n):
                    if not self.m[a][j][i].is_zero():
                        acc = acc + self.m[a][j][i] * x.components[a].diff(j)
            comps.append(acc)
        return Derivation(comps)

    def is_tensorial(self) -> bool:
        return all(p.is_zero() for plane in self.m for row in plane for p in row)


@dataclass(frozen=True)
class SlotProbe:
    """Concrete inputs exhibiting a failed quasi-derivation slot check.

    For the right slot the defect lives in delta = [x, f*y] - f*[x, y]; for
    the left slot in delta = [f*x, y] - f*[x, y].  ``spurious`` is a
    component index where delta sticks out of the module line; ``compare``
    is a pair of component indices on which the extracted scalars disagree.
    Exactly one of the two is set.
    """

    side: str  # "right" | "left"
    x: Section
    f: Poly
    y: Section
    spurious: int | None
    compare: tuple[int, int] | None
    defect: Poly


@dataclass(frozen=True)
class QDCheckResult:
    ok: bool
    anchor: AnchorData | None
    witness: SlotProbe | None


def slot_probe_defect(bracket: BidiffBracket, probe: SlotProbe) -> Poly:
    """Re-evaluate a slot probe through bracket_eval; nonzero iff sound."""
    if probe.side == "right":
        delta = bracket.eval(probe.x, probe.y.scale(probe.f)) - bracket.eval(
            probe.x, probe.y
        ).scale(probe.f)
    else:
        delta = bracket.eval(probe.x.scale(probe.f), probe.y) - bracket.eval(
            probe.x, probe.y
        ).scale(probe.f)
    if probe.spurious is not None:
        return delta.components[probe.spurious]
    u, v = probe.compare
    return delta.components[u] - delta.components[v]


def right_qd_check(bracket: BidiffBracket) -> QDCheckResult:
    """Decide whether the bracket is a quasi-derivation in its right slot.

    On success returns the left-anchor data: [X, fY] - f[X, Y] = X_hat(f) Y
    with X_hat read off the factored R and M tensors.
    """
    n, k = bracket.num_vars, bracket.rank
    r_t, m_t = bracket.r_t, bracket.m_t
    basis = lambda a: Section.basis(n, k, a)

    for i in range(n):
        for c in range(k):
            for b in range(k):
                if c == b:
                    continue
                for a in range(k):
                    if not r_t[c][a][b][i].is_zero():
                        return QDCheckResult(
                            False,
                            None,
                            SlotProbe(
                                "right",
                                basis(a),
                                Poly.variable(i, n),
                                basis(b),
                                c,
                                None,
                                r_t[c][a][b][i],
                            ),
                        )
    for i in range(n):
        for j in range(n):
            for c in range(k):
                for b in range(k):
                    if c == b:
                        continue
                    for a in range(k):
                        if not m_t[c][a][b][i][j].is_zero():
                            x = Section.monomial(
                                n, k, a, tuple(1 if t == i else 0 for t in range(n))
                            )
                            return QDCheckResult(
                                False,
                                None,
                                SlotProbe(
                                    "right",
                                    x,
                                    Poly.variable(j, n),
                                    basis(b),
                                    c,
                                    None,
                                    m_t[c][a][b][i][j],
                                ),
                            )
    for i in range(n):
        for a in range(k):
            for b in range(k):
                for b2 in range(b + 1, k):
                    diff = r_t[b][a][b][i] - r_t[b2][a][b2][i]
                    if not diff.is_zero():
                        return QDCheckResult(
                            False,
                            None,
                            SlotProbe(
                                "right",
                                basis(a),
                                Poly.variable(i, n),
                                basis(b) + basis(b2),
                                None,
                                (b, b2),
                                diff,
                            ),
                        )
    for i in range(n):
        for j in range(n):
            for a in range(k):
                for b in range(k):
                    for b2 in range(b + 1, k):
                        diff = m_t[b][a][b][i][j] - m_t[b2][a][b2][i][j]
                        if not diff.is_zero():
                            x = Section.monomial(
                                n, k, a, tuple(1 if t == i else 0 for t in range(n))
                            )
                            return QDCheckResult(
                                False,
                                None,
                                SlotProbe(
                                    "right",
                                    x,
                                    Poly.variable(j, n),
                                    basis(b) + basis(b2),
                                    None,
                                    (b, b2),
                                    diff,
                                ),
                            )
    rho = tuple(tuple(r_t[0][a][0][i] for i in range(n)) for a in range(k))
    m = tuple(
        tuple(tuple(m_t[0][a][0][i][j] for j in range(n)) for i in range(n))
        for a in range(k)
    )
    return QDCheckResult(True, AnchorData(n, k, rho, m), None)


def left_qd_check(bracket: BidiffBracket) -> QDCheckResult:
    """Mirror image of :func:`right_qd_check` on the left slot.

    On success returns the right-anchor data: [fX, Y] - f[X, Y] =
    Y_tilde(f) X with Y_tilde read off the factored L and M tensors.
    """
    n, k = bracket.num_vars, bracket.rank
    l_t, m_t = bracket.l_t, bracket.m_t
    basis = lambda a: Section.basis(n, k, a)

    for i in range(n):
        for c in range(k):
            for a in range(k):
                if c == a:
                    continue
                for b in range(k):
                    if not l_t[c][a][b][i].is_zero():
                        return QDCheckResult(
                            False,
                            None,
                            SlotProbe(
                                "left",
                                basis(a),
                                Poly.variable(i, n),
                                basis(b),
                                c,
                                None,
                                l_t[c][a][b][i],
                            ),
                        )
    for i in range(n):
        for j in range(n):
            for c in range(k):
                for a in range(k):
                    if c == a:
                        continue
                    for b in range(k):
                        if not m_t[c][a][b][i][j].is_zero():
                            y = Section.monomial(
                                n, k, b, tuple(1 if t == j else 0 for t in range(n))
                            )
                            return QDCheckResult(
                                False,
                                None,
                                SlotProbe(
                                    "left",
                                    basis(a),
                                    Poly.variable(i, n),
                                    y,
                                    c,
                                    None,
                                    m_t[c][a][b][i][j],
                                ),
                            )
    for i in range(n):
        for b in range(k):
            for a in range(k):
                for a2 in range(a + 1, k):
                    diff = l_t[a][a][b][i] - l_t[a2][a2][b][i]
                    if not diff.is_zero():
                        return QDCheckResult(
                            False,
                            None,
                            SlotProbe(
                                "left",
                                basis(a) + basis(a2),
                                Poly.variable(i, n),
                                basis(b),
                                None,
                                (a, a2),
                                diff,
                            ),
                        )
    for i in range(n):
        for j in range(n):
            for b in range(k):
                for a in range(k):
                    for a2 in range(a + 1, k):
                        diff = m_t[a][a][b][i][j] - m_t[a2][a2][b][i][j]
                        if not diff.is_zero():
                            y = Section.monomial(
                                n, k, b, tuple(1 if t == j else 0 for t in range(n))
                            )
                            return QDCheckResult(
                                False,
                                None,
                                SlotProbe(
                                    "left",
                                    basis(a) + basis(a2),
                                    Poly.variable(i, n),
                                    y,
                                    None,
                                    (a, a2),
                                    diff,
                                ),
                            )
    # right-anchor data: direction index is the L/M derivative hitting f
    rho = tuple(tuple(l_t[0][0][b][i] for i in range(n)) for b in range(k))
    m = tuple(
        tuple(tuple(m_t[0][0][b][i][j] for i in range(n)) for j in range(n))
        for b in range(k)
    )
    return QDCheckResult(True, AnchorData(n, k, rho, m), None)


def _require_anchor(bracket: BidiffBracket, side: str) -> AnchorData:
    check = right_qd_check(bracket) if side == "right" else left_qd_check(bracket)
    if not check.ok:
        raise NotQuasiDerivation(
            f"bracket fails the {side}-slot quasi-derivation check",
            witness=check.witness,
        )
    return check.anchor


def left_anchor(bracket: BidiffBracket, x: Section) -> Derivation:
    """X_hat with [X, fY] = f[X, Y] + X_hat(f) Y."""
    return _require_anchor(bracket, "right").anchor_of(x)


def right_anchor(bracket: BidiffBracket, y: Section) -> Derivation:
    """Y_tilde with [fX, Y] = f[X, Y] + Y_tilde(f) X."""
    return _require_anchor(bracket, "left").anchor_of(y)


def anchors_tensorial(bracket: BidiffBracket) -> bool:
    """True when both anchor maps are A-linear (both m tensors vanish).

    For rank > 1 this is forced by the factorization conditions, so a False
    there would mean the engine is inconsistent; asserted.
    """
    left = _require_anchor(bracket, "right")
    right = _require_anchor(bracket, "left")
    result = left.is_tensorial() and right.is_tensorial()
    if bracket.rank > 1:
        assert result, "rank > 1 QD bracket with a differential anchor"
    return result


def eq3_identity_check(
    bracket: BidiffBracket, f: Poly, g: Poly, x: Section, y: Section
) -> Section:
    """Defect of the two-way expansion identity for QD brackets.

    Returns (hat(gX) - g hat(X))(f) Y - (tilde(fY) - f tilde(Y))(g) X,
    which vanishes identically for every bracket passing both slot checks.
    """
    left_data = _require_anchor(bracket, "right")
    right_data = _require_anchor(bracket, "left")
    lhs_der = left_data.anchor_of(x.scale(g)) - left_data.anchor_of(x).scale(g)
    rhs_der = right_data.anchor_of(y.scale(f)) - right_data.anchor_of(y).scale(f)
    return y.scale(lhs_der.apply(f)) - x.scale(rhs_der.apply(g))


@dataclass(frozen=True)
class PairWitness:
    x: Section
    y: Section
    defect: Section


@dataclass(frozen=True)
class SkewResult:
    ok: bool
    witness: PairWitness | None


def monomial_sections(num_vars: int, rank: int, max_degree: int) -> list[Section]:
    """The decision grid: x^beta e_a for |beta| <= max_degree, graded order."""
    out = []
    for exps in monomials_upto(num_vars, max_degree):
        for a in range(rank):
            out.append(Section.monomial(num_vars, rank, a, exps))
    return out


def skew_check(bracket: BidiffBracket) -> SkewResult:
    """Decide [X, Y] + [Y, X] = 0 for all sections.

    The symmetrized bracket is bidifferential of order <= 1 per slot, so its
    values on the degree <= 1 monomial grid determine it completely.
    """
    grid = monomial_sections(bracket.num_vars, bracket.rank, SKEW_GRID_DEGREE)
    for x in grid:
        for y in grid:
            defect = bracket.eval(x, y) + bracket.eval(y, x)
            if not defect.is_zero():
                return SkewResult(False, PairWitness(x, y, defect))
    return SkewResult(True, None)


@dataclass(frozen=True)
class TripleWitness:
    x: Section
    y: Section
    z: Section
    defect: Section


@dataclass(frozen=True)
class JacobiResult:
    ok: bool
    witness: TripleWitness | None


def jacobiator(bracket: BidiffBracket, x: Section, y: Section, z: Section) -> Section:
    """[[X,Y],Z] - [X,[Y,Z]] + [Y,[X,Z]]."""
    return (
        bracket.eval(bracket.eval(x, y), z)
        - bracket.eval(x, bracket.eval(y, z))
        + bracket.eval(y, bracket.eval(x, z))
    )


def jacobiator_is_zero(bracket: BidiffBracket) -> JacobiResult:
    """Decide the Jacobi identity.

    The jacobiator is a tridifferential operator of order <= 2 per slot
    (one derivative from each bracket layer), so the degree <= 2 monomial
    grid determines it; the first failing triple in grid order is the
    witness.
    """
    grid = monomial_sections(bracket.num_vars, bracket.rank, JACOBI_GRID_DEGREE)
    for x in grid:
        for y in grid:
            xy = bracket.eval(x, y)
            for z in grid:
                defect = (
                    bracket.eval(xy, z)
                    - bracket.eval(x, bracket.eval(y, z))
                    + bracket.eval(y, bracket.eval(x, z))
                )
                if not defect.is_zero():
                    return JacobiResult(False, TripleWitness(x, y, z, defect))
    return JacobiResult(True, None)


@dataclass(frozen=True)
class AnchorHomWitness:
    x: Section
    y: Section
    defect: Derivation


@dataclass(frozen=True)
class AnchorHomResult:
    ok: bool
    witness: AnchorHomWitness | None


def anchor_homomorphism_check(bracket: BidiffBracket) -> AnchorHomResult:
    """Check hat([X, Y]) = [hat(X), hat(Y)] on the degree <= 2 grid.

    Whenever the jacobiator vanishes this must pass; it is verified
    independently rather than assumed.  The defect is bidifferential of
    order <= 2 per slot, so the grid is decisive.
    """
    left_data = _require_anchor(bracket, "right")
    _require_anchor(bracket, "left")
    grid = monomial_sections(bracket.num_vars, bracket.rank, JACOBI_GRID_DEGREE)
    for x in grid:
        hat_x = left_data.anchor_of(x)
        for y in grid:
            hat_y = left_data.anchor_of(y)
            defect = left_data.anchor_of(bracket.eval(x, y)) - hat_x.commutator(hat_y)
            if not defect.is_zero():
                return AnchorHomResult(False, AnchorHomWitness(x, y, defect))
    return AnchorHomResult(True, None)


@dataclass(frozen=True)
class AnchorSignWitness:
    section_index: int
    direction: int
    defect: Poly


@dataclass(frozen=True)
class AnchorSignResult:
    ok: bool
    witness: AnchorSignWitness | None


def loday_anchor_sign_check(bracket: BidiffBracket) -> AnchorSignResult:
    """Check that the right anchor is minus the left anchor, tensor-wise.

    Meaningful for brackets with tensorial anchors satisfying the Jacobi
    identity; the qd/tensoriality preconditions are enforced, the Jacobi
    precondition is the caller's responsibility.
    """
    left_data = _require_anchor(bracket, "right")
    right_data = _require_anchor(bracket, "left")
    if not (left_data.is_tensorial() and right_data.is_tensorial()):
        raise NotQuasiDerivation("anchor sign check needs tensorial anchors")
    for a in range(bracket.rank):
        for i in range(bracket.num_vars):
            defect = left_data.rho[a][i] + right_data.rho[a][i]
            if not defect.is_zero():
                return AnchorSignResult(False, AnchorSignWitness(a, i, defect))
    return AnchorSignResult(True, None)


@dataclass(frozen=True)
class PointSkewResult:
    """Outcome of the pointwise skew-symmetry check at a rational point.

    When the left anchor vanishes at the point the check is not triggered
    and non-skew fibers are allowed; otherwise every symmetrized
    coefficient must vanish at the point.
    """

    point: tuple
    anchor_nonzero: bool
    violations: tuple  # ((tensor, indices, value), ...)

    @property
    def ok(self) -> bool:
        return (not self.anchor_nonzero) or not self.violations


def pointwise_skew_at(bracket: BidiffBracket, point: Sequence) -> PointSkewResult:
    """Evaluate the symmetrized bracket coefficients at a rational point.

    Asserts they vanish whenever the left anchor is nonzero at the point.
    """
    n, k = bracket.num_vars, bracket.rank
    if len(point) != n:
        raise ShapeError(f"point has {len(point)} coordinates, expected {n}")
    point = tuple(Fraction(p) for p in point)
    left_data = _require_anchor(bracket, "right")
    anchor_nonzero = any(
        left_data.rho[a][i].eval_at(point) != 0 for a in range(k) for i in range(n)
    ) or any(
        left_data.m[a][j][i].eval_at(point) != 0
        for a in range(k)
        for j in range(n)
        for i in range(n)
    )
    violations = []
    for c in range(k):
        for a in range(k):
            for b in range(k):
                val = (bracket.c_t[c][a][b] + bracket.c_t[c][b][a]).eval_at(point)
                if val != 0:
                    violations.append(("C", (c, a, b), val))
                for i in range(n):
                    val = (
                        bracket.l_t[c][a][b][i] + bracket.r_t[c][b][a][i]
                    ).eval_at(point)
                    if val != 0:
                        violations.append(("L+R", (c, a, b, i), val))
                    for j in range(n):
                        val = (
                            bracket.m_t[c][a][b][i][j] + bracket.m_t[c][b][a][j][i]
                        ).eval_at(point)
                        if val != 0:
                            violations.append(("M", (c, a, b, i, j), val))
    return PointSkewResult(point, anchor_nonzero, tuple(violations))


@dataclass(frozen=True)
class ReportWitness:
    """A failed check with re-checkable inputs, for reports."""

    check: str
    inputs: tuple  # ((label, formattable object), ...)
    defect: object  # Poly | Section | Derivation


def _conj(*values):
    """Three-valued conjunction: False dominates, then None, else True."""
    if any(v is False for v in values):
        return False
    if any(v is None for v in values):
        return None
    return True


@dataclass(frozen=True)
class ClassificationReport:
    num_vars: int
    rank: int
    is_right_qd: bool | None
    is_left_qd: bool | None
    anchors_tensorial: bool | None
    is_skew: bool | None
    satisfies_jacobi: bool | None
    is_algebroid: bool | None
    is_loday_algebroid: bool | None
    is_lie_algebroid: bool | None
    is_lie_qd_algebroid: bool | None
    rank1_jacobi_form: bool | None
    witnesses: tuple  # of ReportWitness
    left_anchor_data: AnchorData | None
    right_anchor_data: AnchorData | None
    recovered_bivector: tuple | None  # skew matrix [i][j] -> Poly, rank-1 Lie only
    recovered_field: Derivation | None

    FLAG_NAMES = (
        "is_right_qd",
        "is_left_qd",
        "anchors_tensorial",
        "is_skew",
        "satisfies_jacobi",
        "is_algebroid",
        "is_loday_algebroid",
        "is_lie_algebroid",
        "is_lie_qd_algebroid",
        "rank1_jacobi_form",
    )

    def flags(self) -> dict[str, bool | None]:
        return {name: getattr(self, name) for name in self.FLAG_NAMES}


def classify(bracket: BidiffBracket) -> ClassificationReport:
    """Run every structure check in dependency order and fill the report.

    Failures become report witnesses, never exceptions.
    """
    witnesses: list[ReportWitness] = []
    n, k = bracket.num_vars, bracket.rank

    rqd = right_qd_check(bracket)
    if not rqd.ok:
        p = rqd.witness
        witnesses.append(
            ReportWitness(
                "right_qd", (("X", p.x), ("f", p.f), ("Y", p.y)), p.defect
            )
        )
    lqd = left_qd_check(bracket)
    if not lqd.ok:
        p = lqd.witness
        witnesses.append(
            ReportWitness(
                "left_qd", (("X", p.x), ("f", p.f), ("Y", p.y)), p.defect
            )
        )

    both_qd = rqd.ok and lqd.ok
    tensorial: bool | None = None
    if both_qd:
        tensorial = rqd.anchor.is_tensorial() and lqd.anchor.is_tensorial()
        if k > 1:
            assert tensorial, "rank > 1 QD bracket with a differential anchor"

    skew = skew_check(bracket)
    if not skew.ok:
        w = skew.witness
        witnesses.append(ReportWitness("skew", (("X", w.x), ("Y", w.y)), w.defect))

    jac = jacobiator_is_zero(bracket)
    if not jac.ok:
        w = jac.witness
        witnesses.append(
            ReportWitness("jacobi", (("X", w.x), ("Y", w.y), ("Z", w.z)), w.defect)
        )

    if both_qd and jac.ok:
        hom = anchor_homomorphism_check(bracket)
        if not hom.ok:
            w = hom.witness
            witnesses.append(
                ReportWitness(
                    "anchor_homomorphism", (("X", w.x), ("Y", w.y)), w.defect
                )
            )
        if tensorial:
            sign = loday_anchor_sign_check(bracket)
            if not sign.ok:
                w = sign.witness
                witnesses.append(
                    ReportWitness(
                        "anchor_sign",
                        (
                            ("section index", w.section_index + 1),
                            ("direction", w.direction + 1),
                        ),
                        w.defect,
                    )
                )

    is_algebroid = _conj(rqd.ok, lqd.ok, tensorial)
    is_loday = _conj(is_algebroid, jac.ok)
    is_lie_qd = _conj(rqd.ok, lqd.ok, skew.ok, jac.ok)
    is_lie = _conj(is_algebroid, skew.ok, jac.ok)

    rank1_form: bool | None = None
    recovered_bivector = None
    recovered_field = None
    if k == 1:
        rank1_form = _conj(rqd.ok, lqd.ok, skew.ok, jac.ok)
        if rank1_form:
            m = rqd.anchor.m[0]  # [j][i]: derivative dir, field dir
            for i in range(n):
                for j in range(n):
                    sym = m[i][j] + m[j][i]
                    assert sym.is_zero(), "skew rank-1 bracket with symmetric m part"
            recovered_bivector = tuple(
                tuple(m[i][j] for j in range(n)) for i in range(n)
            )
            recovered_field = Derivation(tuple(rqd.anchor.rho[0][i] for i in range(n)))

    return ClassificationReport(
        num_vars=n,
        rank=k,
        is_right_qd=rqd.ok,
        is_left_qd=lqd.ok,
        anchors_tensorial=tensorial,
        is_skew=skew.ok,
        satisfies_jacobi=jac.ok,
        is_algebroid=is_algebroid,
        is_loday_algebroid=is_loday,
        is_lie_algebroid=is_lie,
        is_lie_qd_algebroid=is_lie_qd,
        rank1_jacobi_form=rank1_form,
        witnesses=tuple(witnesses),
        left_anchor_data=rqd.anchor,
        right_anchor_data=lqd.anchor,
        recovered_bivector=recovered_bivector,
        recovered_field=recovered_field,
    )


def tangent_algebroid(num_vars: int) -> BidiffBracket:
    """The canonical bracket of vector fields on the n-dimensional base.

    Rank equals num_vars; under the identification of sections with vector
    fields, bracket_eval agrees with the commutator.
    """
    if num_vars < 1:
        raise ValueError("the tangent bracket needs at least one variable")
    n = k = num_vars
    one = Poly.one(n)
    l_entries = [((a, a, b, b), -one) for a in range(k) for b in range(k)]
    r_entries = [((b, a, b, a), one) for a in range(k) for b in range(k)]
    return BidiffBracket.from_entries(n, k, l_entries=l_entries, r_entries=r_entries)


def rank1_from_vector_field(gamma: Derivation) -> BidiffBracket:
    """The rank-1 bracket [f, g] = f*gamma(g) - g*gamma(f)."""
    n = gamma.num_vars
    l_entries = [((0, 0, 0, i), -gamma.components[i]) for i in range(n)]
    r_entries = [((0, 0, 0, i), gamma.components[i]) for i in range(n)]
    return BidiffBracket.from_entries(n, 1, l_entries=l_entries, r_entries=r_entries)


def ad_operator(bracket: BidiffBracket, x: Section) -> FirstOrderOperator:
    """The adjoint operator ad_X(Y) = [X, Y] as a first-order operator."""
    if x.num_vars != bracket.num_vars or x.rank != bracket.rank:
        raise ShapeError("bracket and section shapes differ")
    n, k = bracket.num_vars, bracket.rank
    dx = [[x.components[a].diff(i) for i in range(n)] for a in range(k)]
    a_part = []
    b_part = []
    for c in range(k):
        arow = []
        brow = []
        for b in range(k):
            acc = Poly.zero(n)
            for a in range(k):
                if not bracket.c_t[c][a][b].is_zero():
                    acc = acc + bracket.c_t[c][a][b] * x.components[a]
                for i in range(n):
                    if not bracket.l_t[c][a][b][i].is_zero():
                        acc = acc + bracket.l_t[c][a][b][i] * dx[a][i]
            arow.append(acc)
            vec = []
            for j in range(n):
                acc = Poly.zero(n)
                for a in range(k):
                    if not bracket.r_t[c][a][b][j].is_zero():
                        acc = acc + bracket.r_t[c][a][b][j] * x.components[a]
                    for i in range(n):
                        if not bracket.m_t[c][a][b][i][j].is_zero():
                            acc = acc + bracket.m_t[c][a][b][i][j] * dx[a][i]
                vec.append(acc)
            brow.append(tuple(vec))
        a_part.append(tuple(arow))
        b_part.append(tuple(brow))
    return FirstOrderOperator(n, k, a_part, b_part)
