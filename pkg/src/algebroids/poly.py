"""Exact sparse multivariate polynomials over the rationals, and their derivations.

A polynomial in ``n`` variables is a finite map from exponent tuples (length
``n``, non-negative entries) to nonzero ``Fraction`` coefficients.  The map is
kept canonical at all times, so two polynomials are equal exactly when their
term maps are equal.  No floating point is used anywhere.

A :class:`Derivation` is a vector field: ``n`` polynomial components, acting
on polynomials by ``D(f) = sum_i D_i * df/dx_i``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

Rational = Fraction

Exponents = tuple[int, ...]


class ShapeError(ValueError):
    """Raised when operands have incompatible variable counts or ranks."""


def term_order_key(exponents: Exponents) -> tuple:
    """Graded-lex key: total degree first, then exponents left to right."""
    return (sum(exponents), exponents)


def default_var_names(num_vars: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(num_vars))


def scaled_symbol(body: str, symbol: str) -> str:
    """Format ``body * symbol`` with sane signs and parentheses."""
    if body == "1":
        return symbol
    if body == "-1":
        return f"-{symbol}"
    if ("+" in body) or (" - " in body):
        return f"({body})*{symbol}"
    if body.startswith("-"):
        return f"-{body[1:]}*{symbol}"
    return f"{body}*{symbol}"


def join_signed(pieces: list[str]) -> str:
    """Join formatted terms, folding leading minus signs into separators."""
    if not pieces:
        return "0"
    out = pieces[0]
    for piece in pieces[1:]:
        if piece.startswith("-"):
            out += " - " + piece[1:]
        else:
            out += " + " + piece
    return out


def monomials_upto(num_vars: int, max_degree: int) -> list[Exponents]:
    """All exponent tuples with total degree <= max_degree.

    Ordered by degree, then with earlier variables carrying higher powers
    first (1, x1, x2, ..., x1^2, x1*x2, x2^2, ...).  Deterministic; used by
    the decision-procedure grids and for witness ordering.
    """
    out: list[Exponents] = []
    for total in range(max_degree + 1):
        if num_vars == 0:
            if total == 0:
                out.append(())
            continue
        for combo in combinations_with_replacement(range(num_vars), total):
            exps = [0] * num_vars
            for idx in combo:
                exps[idx] += 1
            out.append(tuple(exps))
    return out


def _coerce_coeff(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"coefficient must be an int or Fraction, got {type(value).__name__}")


class Poly:
    """Sparse polynomial with exact rational coefficients.

    ``terms`` maps exponent tuples to nonzero coefficients.  Instances are
    immutable after construction and safe to share between threads.
    """

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Mapping[Exponents, object] | Iterable = ()):
        if num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Exponents, Fraction] = {}
        for exps, coeff in items:
            exps = tuple(exps)
            if len(exps) != num_vars:
                raise ShapeError(f"exponent tuple {exps} does not have length {num_vars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            val = clean.get(exps, Fraction(0)) + _coerce_coeff(coeff)
            if val:
                clean[exps] = val
            elif exps in clean:
                del clean[exps]
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def _raw(cls, num_vars: int, terms: dict[Exponents, Fraction]) -> "Poly":
        # internal fast path: keys/values already canonical apart from zeros
        self = object.__new__(cls)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", {e: c for e, c in terms.items() if c})
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int) -> "Poly":
        return cls._raw(num_vars, {})

    @classmethod
    def one(cls, num_vars: int) -> "Poly":
        return cls.constant(Fraction(1), num_vars)

    @classmethod
    def constant(cls, value, num_vars: int) -> "Poly":
        c = _coerce_coeff(value)
        if not c:
            return cls.zero(num_vars)
        return cls._raw(num_vars, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, index: int, num_vars: int) -> "Poly":
        if not 0 <= index < num_vars:
            raise IndexError(f"variable index {index} out of range for {num_vars} variables")
        exps = tuple(1 if i == index else 0 for i in range(num_vars))
        return cls._raw(num_vars, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff=1) -> "Poly":
        return cls(len(exponents), {tuple(exponents): coeff})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get((0,) * self.num_vars, Fraction(0))

    def total_degree(self) -> int:
        """Degree of the zero polynomial is reported as -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def _check_compatible(self, other: "Poly"):
        if self.num_vars != other.num_vars:
            raise ShapeError(
                f"polynomials over {self.num_vars} and {other.num_vars} variables"
            )

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check_compatible(other)
            return other
        return Poly.constant(other, self.num_vars)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            val = out.get(e)
            if val is None:
                out[e] = c
            else:
                val = val + c
                if val:
                    out[e] = val
                else:
                    del out[e]
        return Poly._raw(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return (-self) + self._coerce(other)

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.num_vars)
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                val = out.get(e)
                if val is None:
                    out[e] = c1 * c2
                else:
                    val = val + c1 * c2
                    if val:
                        out[e] = val
                    else:
                        del out[e]
        return Poly._raw(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Poly.one(self.num_vars)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.num_vars, frozenset(self.terms.items())))

    # -- calculus ----------------------------------------------------------

    def diff(self, index: int) -> "Poly":
        """Formal partial derivative with respect to variable ``index``."""
        if not 0 <= index < self.num_vars:
            raise IndexError(
                f"variable index {index} out of range for {self.num_vars} variables"
            )
        out: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            d = list(e)
            d[index] = k - 1
            out[tuple(d)] = c * k
        return Poly._raw(self.num_vars, out)

    def eval_at(self, point: Sequence) -> Fraction:
        if len(point) != self.num_vars:
            raise ShapeError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        coords = [_coerce_coeff(p) for p in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            val = c
            for x, k in zip(coords, e):
                for _ in range(k):
                    val *= x
            total += val
        return total

    # -- printing ----------------------------------------------------------

    def format(self, names: Sequence[str] | None = None) -> str:
        """Canonical string, graded-lex leading term first.

        The output re-parses to the same polynomial with the same variable
        names (print/parse round trip is a fixed point).
        """
        if names is None:
            names = default_var_names(self.num_vars)
        elif len(names) != self.num_vars:
            raise ShapeError(f"{len(names)} names for {self.num_vars} variables")
        if not self.terms:
            return "0"
        pieces: list[str] = []
        for exps in sorted(self.terms, key=term_order_key, reverse=True):
            coeff = self.terms[exps]
            factors = []
            for name, k in zip(names, exps):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = str(mag) + "*" + "*".join(factors)
            if not pieces:
                pieces.append(("-" if coeff < 0 else "") + body)
            else:
                pieces.append((" - " if coeff < 0 else " + ") + body)
        return "".join(pieces)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Poly({self.num_vars}, {self.format()!r})"


def poly_derivative(f: Poly, index: int) -> Poly:
    """Partial derivative of ``f`` with respect to the ``index``-th variable."""
    return f.diff(index)


class Derivation:
    """A derivation of the polynomial algebra: a polynomial vector field.

    Component ``i`` is the coefficient of d/dx_i; applying the derivation to
    ``f`` gives ``sum_i components[i] * df/dx_i``, which obeys the Leibniz
    rule by construction.
    """

    __slots__ = ("num_vars", "components")

    def __init__(self, components: Sequence[Poly]):
        components = tuple(components)
        for comp in components:
            if not isinstance(comp, Poly):
                raise TypeError("derivation components must be Poly values")
            if comp.num_vars != len(components):
                raise ShapeError(
                    f"component over {comp.num_vars} variables in a "
                    f"{len(components)}-variable derivation"
                )
        object.__setattr__(self, "num_vars", len(components))
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("Derivation is immutable")

    @classmethod
    def zero(cls, num_vars: int) -> "Derivation":
        return cls(tuple(Poly.zero(num_vars) for _ in range(num_vars)))

    @classmethod
    def basis(cls, index: int, num_vars: int) -> "Derivation":
        """The coordinate field d/dx_index."""
        if not 0 <= index < num_vars:
            raise IndexError(f"direction {index} out of range for {num_vars} variables")
        return cls(
            tuple(
                Poly.one(num_vars) if i == index else Poly.zero(num_vars)
                for i in range(num_vars)
            )
        )

    def _check_compatible(self, other: "Derivation"):
        if self.num_vars != other.num_vars:
            raise ShapeError(
                f"derivations over {self.num_vars} and {other.num_vars} variables"
            )

    def apply(self, f: Poly) -> Poly:
        if f.num_vars != self.num_vars:
            raise ShapeError(
                f"derivation over {self.num_vars} variables applied to a "
                f"{f.num_vars}-variable polynomial"
            )
        out = Poly.zero(self.num_vars)
        for i, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            out = out + comp * f.diff(i)
        return out

    def __call__(self, f: Poly) -> Poly:
        return self.apply(f)

    def commutator(self, other: "Derivation") -> "Derivation":
        self._check_compatible(other)
        return Derivation(
            tuple(
                self.apply(other.components[i]) - other.apply(self.components[i])
                for i in range(self.num_vars)
            )
        )

    def __add__(self, other: "Derivation") -> "Derivation":
        self._check_compatible(other)
        return Derivation(
            tuple(a + b for a, b in zip(self.components, other.components))
        )

    def __sub__(self, other: "Derivation") -> "Derivation":
        self._check_compatible(other)
        return Derivation(
            tuple(a - b for a, b in zip(self.components, other.components))
        )

    def __neg__(self) -> "Derivation":
        return Derivation(tuple(-c for c in self.components))

    def scale(self, f: Poly | int | Fraction) -> "Derivation":
        """The derivation f*D (module action of the coefficient algebra)."""
        if not isinstance(f, Poly):
            f = Poly.constant(f, self.num_vars)
        return Derivation(tuple(f * c for c in self.components))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.num_vars == other.num_vars and self.components == other.components

    def __hash__(self) -> int:
        return hash((self.num_vars, self.components))

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = default_var_names(self.num_vars)
        pieces = []
        for name, comp in zip(names, self.components):
            if comp.is_zero():
                continue
            pieces.append(scaled_symbol(comp.format(names), f"d_{name}"))
        return join_signed(pieces)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Derivation({self.format()!r})"


def der_apply(d: Derivation, f: Poly) -> Poly:
    """Action of a derivation on a polynomial."""
    return d.apply(f)


def der_commutator(d1: Derivation, d2: Derivation) -> Derivation:
    """Commutator [d1, d2]; applied to any f it equals d1(d2(f)) - d2(d1(f))."""
    return d1.commutator(d2)
