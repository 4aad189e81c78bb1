"""Expression language and the hidden semantic oracle.

Expressions are sums of signed terms; a term is a positive rational
coefficient times an ordered product of atoms (variables, square roots of
integers, parenthesized groups), with an optional denominator term list on
the whole expression.  Nothing here auto-simplifies: simplification is the
job of the explicit manipulation rules.  This module only supplies the exact
machinery used to *check* them: full expansion to a canonical polynomial
over the surd field, cross-multiplied equality, and exact evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import UnboundVariableError, ZeroDenominatorError
from .surds import SurdNumber, square_free_split

#: Variable indices 0..9 are the ten calendar stems; 10 is the reserved diagonal.
MAX_LABEL_INDEX = 10
DIAGONAL_INDEX = 10


# ---------------------------------------------------------------------------
# atoms, terms, expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index <= MAX_LABEL_INDEX:
            raise ValueError(f"variable index out of range: {self.index}")


@dataclass(frozen=True)
class SqrtAtom:
    """Square root of a square-free integer >= 2; rational roots never reach an atom."""

    radicand: int

    def __post_init__(self) -> None:
        s, m = square_free_split(self.radicand)
        if s != 1 or m < 2:
            raise ValueError(f"radicand must be square-free and >= 2, got {self.radicand}")


@dataclass(frozen=True)
class Group:
    """A parenthesized subexpression kept unexpanded as a single factor."""

    inner: "Expr"

    def __post_init__(self) -> None:
        if not self.inner.num:
            raise ValueError("group inner expression must be non-empty")


Atom = Union[Variable, SqrtAtom, Group]
Factor = tuple[Atom, int]


@dataclass(frozen=True)
class Term:
    sign: int
    coeff: Fraction
    factors: tuple[Factor, ...]

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError("term sign must be +1 or -1")
        if self.coeff <= 0:
            raise ValueError("term coefficient must be strictly positive")
        seen = []
        for atom, power in self.factors:
            if power < 1:
                raise ValueError("factor powers must be >= 1")
            if any(atom == other for other in seen):
                raise ValueError("duplicate atom in factor list")
            seen.append(atom)


@dataclass(frozen=True)
class Expr:
    num: tuple[Term, ...]
    den: tuple[Term, ...] = ()

    @property
    def is_zero_literal(self) -> bool:
        return not self.num


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr


ZERO_EXPR = Expr(())


def make_term(sign: int, coeff: Fraction | int, factors: Iterable[Factor]) -> Term:
    """Build a term, folding even square-root powers into the coefficient and
    merging repeated atoms.  First-occurrence order of atoms is preserved."""
    coeff = Fraction(coeff)
    if coeff < 0:
        sign, coeff = -sign, -coeff
    if coeff == 0:
        raise ValueError("zero coefficient cannot form a term")
    merged: list[tuple[Atom, int]] = []
    for atom, power in factors:
        for i, (existing, p) in enumerate(merged):
            if existing == atom:
                merged[i] = (existing, p + power)
                break
        else:
            merged.append((atom, power))
    folded: list[Factor] = []
    for atom, power in merged:
        if isinstance(atom, SqrtAtom):
            coeff *= Fraction(atom.radicand) ** (power // 2)
            power %= 2
            if power == 0:
                continue
        folded.append((atom, power))
    return Term(sign, coeff, tuple(folded))


def const_term(value: Fraction | int) -> Term:
    return make_term(1, Fraction(value), ())


def var_term(index: int, coeff: Fraction | int = 1, sign: int = 1) -> Term:
    return make_term(sign, coeff, ((Variable(index), 1),))


def sqrt_parts(n: int) -> tuple[Fraction, Atom | None]:
    """Normalize sqrt(n): returns (rational multiplier, optional SqrtAtom)."""
    if n == 0:
        return Fraction(0), None
    s, m = square_free_split(n)
    return Fraction(s), (SqrtAtom(m) if m >= 2 else None)


def term_mul(a: Term, b: Term) -> Term:
    return make_term(a.sign * b.sign, a.coeff * b.coeff, a.factors + b.factors)


def term_negate(t: Term) -> Term:
    return Term(-t.sign, t.coeff, t.factors)


def expr_negate(e: Expr) -> Expr:
    return Expr(tuple(term_negate(t) for t in e.num), e.den)


# ---------------------------------------------------------------------------
# structural normal form (order-insensitive comparison)
# ---------------------------------------------------------------------------
#
# Two expressions are *structurally* equal when they differ only by
# commutative reordering, by the nesting of single-term groups, and by folded
# square-root powers.  No distribution or like-term merging happens here;
# that distinction is what lets the checker tell "same presentation" apart
# from "merely semantically equal".

Key = tuple


def _atom_key(atom: Atom) -> Key:
    if isinstance(atom, Variable):
        return (0, atom.index)
    if isinstance(atom, SqrtAtom):
        return (1, atom.radicand)
    return (2, expr_key(atom.inner))


def _flatten_term(t: Term) -> tuple[int, Fraction, list[tuple[Atom, int]]]:
    """Recursively splice single-term denominator-free groups into the parent."""
    sign, coeff = t.sign, t.coeff
    flat: list[tuple[Atom, int]] = []
    for atom, power in t.factors:
        if isinstance(atom, Group) and len(atom.inner.num) == 1 and not atom.inner.den:
            s2, c2, inner = _flatten_term(atom.inner.num[0])
            sign *= s2 if power % 2 else 1
            coeff *= c2**power
            for a2, p2 in inner:
                flat.append((a2, p2 * power))
        else:
            flat.append((atom, power))
    # merge repeats and fold sqrt powers
    merged: list[tuple[Atom, int]] = []
    for atom, power in flat:
        for i, (existing, p) in enumerate(merged):
            if existing == atom:
                merged[i] = (existing, p + power)
                break
        else:
            merged.append((atom, power))
    final: list[tuple[Atom, int]] = []
    for atom, power in merged:
        if isinstance(atom, SqrtAtom):
            coeff *= Fraction(atom.radicand) ** (power // 2)
            power %= 2
            if power == 0:
                continue
        final.append((atom, power))
    return sign, coeff, final


def term_key(t: Term) -> Key:
    sign, coeff, factors = _flatten_term(t)
    fkeys = sorted((_atom_key(a), p) for a, p in factors)
    return (sign, coeff, tuple(fkeys))


def term_shape_key(t: Term) -> Key:
    """Like-term key: the factor multiset only, ignoring sign and coefficient."""
    _, _, factors = _flatten_term(t)
    return tuple(sorted((_atom_key(a), p) for a, p in factors))


def expr_key(e: Expr) -> Key:
    return (
        tuple(sorted(term_key(t) for t in e.num)),
        tuple(sorted(term_key(t) for t in e.den)),
    )


def structurally_equal(a: Expr | Equation, b: Expr | Equation) -> bool:
    if isinstance(a, Equation) != isinstance(b, Equation):
        return False
    if isinstance(a, Equation):
        assert isinstance(b, Equation)
        return expr_key(a.lhs) == expr_key(b.lhs) and expr_key(a.rhs) == expr_key(b.rhs)
    assert isinstance(b, Expr)
    return expr_key(a) == expr_key(b)


# ---------------------------------------------------------------------------
# canonical polynomials over the surd field
# ---------------------------------------------------------------------------

#: monomial: sorted ((variable index, power), ...); () is the constant monomial
Monomial = tuple[tuple[int, int], ...]
Poly = dict[Monomial, SurdNumber]

_ONE_POLY: Poly = {(): SurdNumber.from_rational(1)}


def poly_is_zero(p: Poly) -> bool:
    return not p


def poly_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for mono, c in b.items():
        s = out.get(mono)
        s = c if s is None else s + c
        if s.is_zero:
            out.pop(mono, None)
        else:
            out[mono] = s
    return out


def poly_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    powers: dict[int, int] = {}
    for idx, p in m1 + m2:
        powers[idx] = powers.get(idx, 0) + p
    return tuple(sorted(powers.items()))


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            mono = _mono_mul(m1, m2)
            c = c1 * c2
            s = out.get(mono)
            s = c if s is None else s + c
            if s.is_zero:
                out.pop(mono, None)
            else:
                out[mono] = s
    return out


def poly_scale(a: Poly, c: SurdNumber) -> Poly:
    if c.is_zero:
        return {}
    return {m: q * c for m, q in a.items()}


def poly_pow(a: Poly, n: int) -> Poly:
    acc = dict(_ONE_POLY)
    base = a
    while n:
        if n & 1:
            acc = poly_mul(acc, base)
        base = poly_mul(base, base)
        n >>= 1
    return acc


FracPoly = tuple[Poly, Poly]  # (numerator, denominator); denominator never zero


def _frac_add(a: FracPoly, b: FracPoly) -> FracPoly:
    n1, d1 = a
    n2, d2 = b
    if d1 == _ONE_POLY and d2 == _ONE_POLY:
        return poly_add(n1, n2), dict(_ONE_POLY)
    return poly_add(poly_mul(n1, d2), poly_mul(n2, d1)), poly_mul(d1, d2)


def _frac_mul(a: FracPoly, b: FracPoly) -> FracPoly:
    return poly_mul(a[0], b[0]), poly_mul(a[1], b[1])


def _frac_pow(a: FracPoly, n: int) -> FracPoly:
    return poly_pow(a[0], n), poly_pow(a[1], n)


def _expand_atom(atom: Atom) -> FracPoly:
    if isinstance(atom, Variable):
        return {((atom.index, 1),): SurdNumber.from_rational(1)}, dict(_ONE_POLY)
    if isinstance(atom, SqrtAtom):
        return {(): SurdNumber.sqrt_int(atom.radicand)}, dict(_ONE_POLY)
    return _expand_expr(atom.inner)


def _expand_term(t: Term) -> FracPoly:
    acc: FracPoly = ({(): SurdNumber.from_rational(t.sign * t.coeff)}, dict(_ONE_POLY))
    for atom, power in t.factors:
        acc = _frac_mul(acc, _frac_pow(_expand_atom(atom), power))
    return acc


def _expand_sum(terms: Sequence[Term]) -> FracPoly:
    acc: FracPoly = ({}, dict(_ONE_POLY))
    for t in terms:
        acc = _frac_add(acc, _expand_term(t))
    return acc


def _expand_expr(e: Expr) -> FracPoly:
    num = _expand_sum(e.num)
    if not e.den:
        return num
    dn, dd = _expand_sum(e.den)
    if poly_is_zero(dn):
        raise ZeroDenominatorError("denominator expands to the zero polynomial")
    return poly_mul(num[0], dd), poly_mul(num[1], dn)


@dataclass(frozen=True)
class CanonicalPoly:
    """Fully expanded rational-function normal form used as the equality oracle."""

    num: tuple[tuple[Monomial, SurdNumber], ...]
    den: tuple[tuple[Monomial, SurdNumber], ...]

    def num_dict(self) -> Poly:
        return dict(self.num)

    def den_dict(self) -> Poly:
        return dict(self.den)


def _freeze(p: Poly) -> tuple[tuple[Monomial, SurdNumber], ...]:
    return tuple(sorted(p.items(), key=lambda kv: kv[0]))


def canonical_form(e: Expr) -> CanonicalPoly:
    """Expand to a canonical numerator/denominator pair; constant denominators
    are absorbed into the numerator."""
    n, d = _expand_expr(e)
    if poly_is_zero(d):
        raise ZeroDenominatorError("denominator expands to the zero polynomial")
    if set(d) <= {()}:
        c = d[()]
        n = poly_scale(n, c.inverse())
        d = dict(_ONE_POLY)
    return CanonicalPoly(_freeze(n), _freeze(d))


def semantically_equal(e1: Expr, e2: Expr) -> bool:
    """Exact equality of the underlying rational functions (cross-multiplied)."""
    n1, d1 = _expand_expr(e1)
    n2, d2 = _expand_expr(e2)
    if poly_is_zero(d1) or poly_is_zero(d2):
        raise ZeroDenominatorError("denominator expands to the zero polynomial")
    diff = poly_add(poly_mul(n1, d2), poly_neg(poly_mul(n2, d1)))
    return poly_is_zero(diff)


def _equation_frac(q: Equation) -> FracPoly:
    ln, ld = _expand_expr(q.lhs)
    rn, rd = _expand_expr(q.rhs)
    if poly_is_zero(ld) or poly_is_zero(rd):
        raise ZeroDenominatorError("denominator expands to the zero polynomial")
    return poly_add(poly_mul(ln, rd), poly_neg(poly_mul(rn, ld))), poly_mul(ld, rd)


def _proportional(p: Poly, q: Poly) -> bool:
    if poly_is_zero(p) and poly_is_zero(q):
        return True
    if poly_is_zero(p) or poly_is_zero(q):
        return False
    if set(p) != set(q):
        return False
    mono = min(q)
    ratio = p[mono] / q[mono]
    return all((p[m] - q[m] * ratio).is_zero for m in q)


def equation_equivalent(q1: Equation, q2: Equation) -> bool:
    """True when lhs - rhs of the two equations agree up to a nonzero scalar."""
    n1, d1 = _equation_frac(q1)
    n2, d2 = _equation_frac(q2)
    return _proportional(poly_mul(n1, d2), poly_mul(n2, d1))


def equation_fingerprint(q: Equation) -> tuple[tuple[Monomial, SurdNumber], ...] | None:
    """Scale-normalized canonical form of lhs - rhs; None for the trivial 0 = 0."""
    n, d = _equation_frac(q)
    if poly_is_zero(n):
        return None
    lead = n[min(n)]
    return _freeze(poly_scale(n, lead.inverse()))


def equation_residual_poly(q: Equation) -> Poly:
    """Numerator polynomial of lhs - rhs after cross-multiplication."""
    n, _ = _equation_frac(q)
    return n


def poly_univariate(p: Poly, bindings: Mapping[int, SurdNumber], var: int) -> dict[int, SurdNumber]:
    """Substitute bindings for every variable except `var`; returns the
    resulting coefficients keyed by the power of `var`."""
    out: dict[int, SurdNumber] = {}
    for mono, coeff in p.items():
        value = coeff
        power = 0
        for idx, pw in mono:
            if idx == var:
                power = pw
                continue
            if idx not in bindings:
                raise UnboundVariableError(f"no binding for variable index {idx}")
            value = value * bindings[idx] ** pw
        acc = out.get(power)
        acc = value if acc is None else acc + value
        if acc.is_zero:
            out.pop(power, None)
        else:
            out[power] = acc
    return out


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _eval_sum(terms: Sequence[Term], bindings: Mapping[int, SurdNumber]) -> SurdNumber:
    total = SurdNumber()
    for t in terms:
        value = SurdNumber.from_rational(t.sign * t.coeff)
        for atom, power in t.factors:
            if isinstance(atom, Variable):
                if atom.index not in bindings:
                    raise UnboundVariableError(f"no binding for variable index {atom.index}")
                base = bindings[atom.index]
            elif isinstance(atom, SqrtAtom):
                base = SurdNumber.sqrt_int(atom.radicand)
            else:
                base = evaluate(atom.inner, bindings)
            value = value * base**power
        total = total + value
    return total


def evaluate(e: Expr, bindings: Mapping[int, SurdNumber]) -> SurdNumber:
    """Exact value of the expression under the given variable bindings."""
    num = _eval_sum(e.num, bindings)
    if not e.den:
        return num
    den = _eval_sum(e.den, bindings)
    if den.is_zero:
        raise ZeroDenominatorError("denominator evaluates to zero")
    return num / den


def variables_of(obj: Expr | Equation) -> set[int]:
    out: set[int] = set()

    def walk_expr(e: Expr) -> None:
        for t in e.num + e.den:
            for atom, _ in t.factors:
                if isinstance(atom, Variable):
                    out.add(atom.index)
                elif isinstance(atom, Group):
                    walk_expr(atom.inner)

    if isinstance(obj, Equation):
        walk_expr(obj.lhs)
        walk_expr(obj.rhs)
    else:
        walk_expr(obj)
    return out


# ---------------------------------------------------------------------------
# re-embedding a canonical form as an expression
# ---------------------------------------------------------------------------

def _poly_terms(p: Iterable[tuple[Monomial, SurdNumber]]) -> Iterator[Term]:
    for mono, coeff in sorted(p, key=lambda kv: kv[0]):
        for rad in coeff.radicands():
            q = coeff.coefficients[rad]
            factors: list[Factor] = []
            if rad > 1:
                factors.append((SqrtAtom(rad), 1))
            for idx, power in mono:
                factors.append((Variable(idx), power))
            yield make_term(1 if q > 0 else -1, abs(q), factors)


def canonical_to_expr(cp: CanonicalPoly) -> Expr:
    """Deterministic expression embedding of a canonical form (monomial order,
    then radicand order)."""
    num = tuple(_poly_terms(cp.num))
    den = tuple(_poly_terms(cp.den))
    if den and len(den) == 1 and den[0] == const_term(1):
        den = ()
    return Expr(num, den)
