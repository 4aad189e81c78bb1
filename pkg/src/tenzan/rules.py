"""The nine tenzan jutsu manipulation rules, plus move-left/cancel.

Every rule is an explicit, selector-driven transformation: the selector names
the target terms and the factor/identity being used, the engine computes the
result, and `verify_application` compares a stated result against it.  The
engine never searches for a derivation; it only checks one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence, Union

from .errors import (
    BadSelectorError,
    BadSplitSpecError,
    NoCommonFactorError,
    NoFractionPresentError,
    NonZeroRhsError,
    NotAnIdentityError,
    NotCommonFactorError,
    NothingToSplitError,
    NotLikeTermsError,
    NotUnitPairError,
    PatternMismatchError,
    RhsMismatchError,
    RuleError,
    UndefinedSubstitutionError,
    UnsupportedInputError,
    ZeroDenominatorError,
    ZeroFactorError,
)
from .exprs import (
    Equation,
    Expr,
    Factor,
    Group,
    SqrtAtom,
    Term,
    Variable,
    const_term,
    expr_key,
    make_term,
    semantically_equal,
    equation_equivalent,
    structurally_equal,
    term_mul,
    term_negate,
    term_shape_key,
    variables_of,
    evaluate,
)
from .surds import SurdNumber

Target = Union[Expr, Equation]


class RuleId(Enum):
    SELF_MULTIPLY = "self_multiply"
    PUT_TOGETHER = "put_together"
    SPLIT = "split"
    ELIMINATE_SURPLUS = "eliminate_surplus"
    ADD_SAME_SUBTRACT_DIFFERENT = "add_same_subtract_different"
    CONVERT = "convert"
    SQRT_CONVERT = "sqrt_convert"
    MUL_DIV_TOGETHER = "mul_div_together"
    ADD_SUB_TOGETHER = "add_sub_together"

    @property
    def kanji(self) -> str:
        return _RULE_KANJI[self]


_RULE_KANJI = {
    RuleId.SELF_MULTIPLY: "自乘",
    RuleId.PUT_TOGETHER: "括之",
    RuleId.SPLIT: "解之",
    RuleId.ELIMINATE_SURPLUS: "遍省過乘",
    RuleId.ADD_SAME_SUBTRACT_DIFFERENT: "同加異減",
    RuleId.CONVERT: "變換",
    RuleId.SQRT_CONVERT: "開平方商變換",
    RuleId.MUL_DIV_TOGETHER: "乗除括之",
    RuleId.ADD_SUB_TOGETHER: "加減括之",
}

RULE_BY_NAME = {rule.value: rule for rule in RuleId}


@dataclass(frozen=True)
class Selector:
    """Names the targets of a rule application.

    term_indices address terms in reading order: for an equation, left-hand
    terms first, then right-hand terms.
    """

    term_indices: tuple[int, ...] = ()
    factor: Expr | None = None
    substitution: tuple[int, Expr] | None = None
    split_spec: tuple[int, int] | None = None


@dataclass(frozen=True)
class RuleApplication:
    rule: RuleId
    selector: Selector
    target: Target
    stated: Target

    def __post_init__(self) -> None:
        if isinstance(self.target, Equation) != isinstance(self.stated, Equation):
            raise ValueError("target and stated result must both be expressions or both equations")


# ---------------------------------------------------------------------------
# term-level helpers
# ---------------------------------------------------------------------------

def _flatten(t: Term) -> Term:
    """Splice single-term denominator-free groups and fold sqrt powers,
    preserving first-occurrence factor order."""
    from .exprs import _flatten_term  # shared with the structural key machinery

    sign, coeff, factors = _flatten_term(t)
    return Term(sign, coeff, tuple(factors))


def _atom_matches(a, b) -> bool:
    from .exprs import _atom_key

    return _atom_key(a) == _atom_key(b)


def _term_div(t: Term, f: Term) -> Term | None:
    """Structural quotient of flattened terms; None when f's atoms are not
    all present in t with sufficient powers."""
    t = _flatten(t)
    f = _flatten(f)
    remaining: list[Factor] = list(t.factors)
    for atom, power in f.factors:
        for i, (cand, p) in enumerate(remaining):
            if _atom_matches(cand, atom) and p >= power:
                if p == power:
                    remaining.pop(i)
                else:
                    remaining[i] = (cand, p - power)
                break
        else:
            return None
    return make_term(t.sign * f.sign, t.coeff / f.coeff, remaining)


def _single_term(e: Expr) -> Term | None:
    if len(e.num) == 1 and not e.den:
        return e.num[0]
    return None


def _product_parts(e: Expr) -> tuple[int, Fraction, tuple[Factor, ...]]:
    """View an expression as one multiplicative part: its own term when it is
    a single term, otherwise a group."""
    t = _single_term(e)
    if t is not None:
        return t.sign, t.coeff, t.factors
    return 1, Fraction(1), ((Group(e), 1),)


def _merge_like(terms: Sequence[Term], positions: set[int] | None = None) -> list[Term]:
    """Merge like terms (same atoms and powers) at the given positions,
    keeping first-occurrence order; cancelled terms disappear."""
    chosen = set(range(len(terms))) if positions is None else positions
    buckets: dict[object, int] = {}
    totals: dict[int, Fraction] = {}
    order: list[tuple[int, Term, bool]] = []
    for i, t in enumerate(terms):
        if i not in chosen:
            order.append((i, t, False))
            continue
        key = term_shape_key(t)
        if key in buckets:
            totals[buckets[key]] += t.sign * t.coeff
        else:
            buckets[key] = i
            totals[i] = t.sign * t.coeff
            order.append((i, t, True))
    out: list[Term] = []
    for i, t, merged in order:
        if not merged:
            out.append(t)
            continue
        total = totals[i]
        if total == 0:
            continue
        out.append(make_term(1 if total > 0 else -1, abs(total), _flatten(t).factors))
    return out


def _expand_term(t: Term) -> list[Term]:
    """Distribute every denominator-free group factor, recursively."""
    result: list[Term] = [make_term(t.sign, t.coeff, ())]
    for atom, power in t.factors:
        for _ in range(power):
            if isinstance(atom, Group) and not atom.inner.den:
                inner_terms: list[Term] = []
                for it in atom.inner.num:
                    inner_terms.extend(_expand_term(it))
                result = [term_mul(r, it) for r in result for it in inner_terms]
            else:
                unit = Term(1, Fraction(1), ((atom, 1),))
                result = [term_mul(r, unit) for r in result]
    return result


def _check_indices(indices: Sequence[int], size: int) -> None:
    for i in indices:
        if not 0 <= i < size:
            raise BadSelectorError(f"term index {i} out of range for {size} terms")
    if len(set(indices)) != len(indices):
        raise BadSelectorError("duplicate term indices in selector")


def _is_literal_zero(e: Expr) -> bool:
    return not e.num


_ONE_EXPR = Expr((const_term(1),))


def _is_unit(e: Expr) -> bool:
    try:
        return semantically_equal(e, _ONE_EXPR)
    except ZeroDenominatorError:
        return False


def _den_product(old: tuple[Term, ...], extra: Expr) -> tuple[Term, ...]:
    """Denominator term list for (sum old) * extra."""
    if not old:
        return extra.num if not extra.den else (Term(1, Fraction(1), ((Group(extra), 1),)),)
    s1, c1, f1 = _product_parts(Expr(old))
    s2, c2, f2 = _product_parts(extra)
    return (make_term(s1 * s2, c1 * c2, f1 + f2),)


# ---------------------------------------------------------------------------
# the rules
# ---------------------------------------------------------------------------

def self_multiply(e: Expr) -> Expr:
    """Square an expression and expand the result fully."""
    if e.den:
        raise UnsupportedInputError("cannot square an expression with a denominator")
    flat: list[Term] = []
    for t in e.num:
        flat.extend(_expand_term(t))
    products = [term_mul(a, b) for a in flat for b in flat]
    return Expr(tuple(_merge_like(products)))


def put_together(e: Expr, sel: Selector) -> Expr:
    """Combine terms: merge like terms, or pull a stated common factor out
    into a grouped product.  In factor mode the remaining terms are also
    merged, which is how the historical rule tidies whole lines at once."""
    indices = sel.term_indices
    _check_indices(indices, len(e.num))
    if not indices:
        return e
    if sel.factor is None:
        return Expr(tuple(_merge_like(e.num, set(indices))), e.den)

    f = sel.factor
    selected = [e.num[i] for i in indices]
    selected_expr = Expr(tuple(selected))

    candidates: list[Term] = []
    ft = _single_term(f)
    if ft is not None:
        quotients = [_term_div(t, ft) for t in selected]
        if all(q is not None for q in quotients):
            q_expr = Expr(tuple(q for q in quotients if q is not None))
            candidates.append(_combine_product(q_expr, f))
    if ft is not None:
        candidates.append(term_mul(ft, ft))
    else:
        candidates.append(Term(1, Fraction(1), ((Group(f), 2),)))
        for s in selected:
            for fterm in f.num:
                q0 = _term_div(s, fterm)
                if q0 is not None:
                    candidates.append(_combine_product(Expr((q0,)), f))

    winner: Term | None = None
    for cand in candidates:
        if semantically_equal(Expr((cand,)), selected_expr):
            winner = cand
            break
    if winner is None:
        raise NoCommonFactorError("the stated factor does not account for the selected terms")

    first = min(indices)
    rest_positions: set[int] = set()
    out: list[Term] = []
    for i, t in enumerate(e.num):
        if i == first:
            out.append(winner)
        elif i in indices:
            continue
        else:
            rest_positions.add(len(out))
            out.append(t)
    return Expr(tuple(_merge_like(out, rest_positions)), e.den)


def _combine_product(q: Expr, f: Expr) -> Term:
    sq, cq, fq = _product_parts(q)
    sf, cf, ff = _product_parts(f)
    plain = [fac for fac in fq + ff if not isinstance(fac[0], Group)]
    groups = [fac for fac in fq + ff if isinstance(fac[0], Group)]
    return make_term(sq * sf, cq * cf, tuple(plain + groups))


def split(e: Expr, sel: Selector, definitions: Mapping[int, Expr] | None = None) -> Expr:
    """Opposite of put_together: distribute grouped factors, or substitute a
    defined variable by its defining expression."""
    if sel.substitution is not None:
        var, repl = sel.substitution
        recorded = (definitions or {}).get(var)
        if recorded is None:
            raise UndefinedSubstitutionError(f"variable index {var} has no recorded definition")
        if not semantically_equal(repl, recorded):
            raise UndefinedSubstitutionError(
                f"substitution for variable index {var} differs from its recorded definition"
            )
        indices = set(sel.term_indices) if sel.term_indices else None
        out: list[Term] = []
        for i, t in enumerate(e.num):
            if indices is not None and i not in indices:
                out.append(t)
            else:
                out.extend(_substitute_var(t, var, repl))
        return Expr(tuple(out), e.den)

    indices = sel.term_indices
    _check_indices(indices, len(e.num))
    if not indices:
        raise NothingToSplitError("no terms selected and no substitution named")
    hit = False
    out = []
    for i, t in enumerate(e.num):
        if i in set(indices):
            if any(isinstance(a, Group) and not a.inner.den for a, _ in t.factors):
                hit = True
                expanded = _expand_term(t)
                out.extend(_merge_like(expanded))
            else:
                out.append(t)
        else:
            out.append(t)
    if not hit:
        raise NothingToSplitError("selected terms contain no grouped factor to distribute")
    return Expr(tuple(out), e.den)


def _substitute_var(t: Term, var: int, repl: Expr) -> list[Term]:
    if not any(isinstance(a, Variable) and a.index == var for a, _ in t.factors):
        return [t]
    if (
        len(t.factors) == 1
        and t.coeff == 1
        and t.factors[0][1] == 1
        and not repl.den
    ):
        return [Term(t.sign * rt.sign, rt.coeff, rt.factors) for rt in repl.num]
    new_factors: list[Factor] = []
    for atom, power in t.factors:
        if isinstance(atom, Variable) and atom.index == var:
            new_factors.append((Group(repl), power))
        else:
            new_factors.append((atom, power))
    return [make_term(t.sign, t.coeff, new_factors)]


def eliminate_surplus(q: Equation, factor: Expr | None) -> Equation:
    """Divide every left-hand term of an ... = 0 equation by a shared factor."""
    if factor is None:
        raise BadSelectorError("eliminate_surplus needs a factor")
    if not _is_literal_zero(q.rhs):
        raise NonZeroRhsError("right-hand side must be 0")
    try:
        factor_is_zero = semantically_equal(factor, Expr(()))
    except ZeroDenominatorError:
        raise ZeroFactorError("the stated factor is degenerate") from None
    if factor_is_zero:
        raise ZeroFactorError("cannot divide an equation by a zero factor")
    new_terms: list[Term] = []
    ft = _single_term(factor)
    for t in q.lhs.num:
        divided: Term | None
        if ft is not None:
            divided = _term_div(t, ft)
        else:
            divided = _remove_group_factor(t, factor)
        if divided is None:
            raise NotCommonFactorError(
                "the stated factor does not divide every left-hand term"
            )
        new_terms.append(divided)
    result = Equation(Expr(tuple(new_terms), q.lhs.den), q.rhs)
    if not equation_equivalent(q, result):
        raise NotCommonFactorError("division by the stated factor does not rescale the equation")
    return result


def _remove_group_factor(t: Term, f: Expr) -> Term | None:
    flat = _flatten(t)
    target = expr_key(f)
    remaining = list(flat.factors)
    for i, (atom, power) in enumerate(remaining):
        if isinstance(atom, Group) and expr_key(atom.inner) == target:
            if power == 1:
                remaining.pop(i)
            else:
                remaining[i] = (atom, power - 1)
            return make_term(flat.sign, flat.coeff, remaining)
    return None


def add_same_subtract_different(e: Expr, sel: Selector) -> Expr:
    """Merge like terms: same signs add, different signs subtract."""
    indices = sel.term_indices
    _check_indices(indices, len(e.num))
    if len(indices) < 2:
        raise BadSelectorError("select at least two terms to combine")
    keys = {term_shape_key(e.num[i]) for i in indices}
    if len(keys) != 1:
        raise NotLikeTermsError("selected terms are not like terms")
    return Expr(tuple(_merge_like(e.num, set(indices))), e.den)


def convert(e: Expr, sel: Selector) -> Expr:
    """Rewrite a value into an equivalent form: replace selected terms by a
    stated equal form, or multiply them by a factor that is exactly 1."""
    if sel.factor is None:
        raise BadSelectorError("convert needs a factor or rewrite target")
    f = sel.factor
    indices = sel.term_indices
    _check_indices(indices, len(e.num))
    selected_expr = Expr(tuple(e.num[i] for i in indices))

    if indices and not f.den and semantically_equal(selected_expr, f):
        # rewrite-target mode: swap the selected terms for the stated form
        first = min(indices)
        out: list[Term] = []
        for i, t in enumerate(e.num):
            if i == first:
                out.extend(f.num)
            elif i in set(indices):
                continue
            else:
                out.append(t)
        return Expr(tuple(out), e.den)

    if not _is_unit(f):
        if not variables_of(f):
            raise NotAnIdentityError("the supplied factor is not exactly 1")
        raise PatternMismatchError("factor neither equals 1 nor matches the selected terms")

    if f.den:
        # quotient-shaped unit: numerator multiplies the terms, denominator
        # multiplies the whole expression, so every term must be selected
        if set(indices) != set(range(len(e.num))):
            raise PatternMismatchError("a quotient unit factor must be applied to every term")
        p = Expr(f.num)
        q_den = Expr(f.den)
        new_terms = tuple(_multiply_term(t, p) for t in e.num)
        return Expr(new_terms, _den_product(e.den, q_den))

    new_list = list(e.num)
    for i in indices:
        new_list[i] = _multiply_term(new_list[i], f)
    return Expr(tuple(new_list), e.den)


def _multiply_term(t: Term, f: Expr) -> Term:
    sf, cf, ff = _product_parts(f)
    return make_term(t.sign * sf, t.coeff * cf, t.factors + ff)


def sqrt_convert(e: Expr, sel: Selector) -> Expr:
    """Expand a square root using a conjugate pair whose product is exactly 1,
    or swap it for a stated equivalent product form."""
    indices = sel.term_indices
    _check_indices(indices, len(e.num))
    if not indices:
        raise BadSelectorError("sqrt_convert needs selected terms")
    new_list = list(e.num)
    for i in indices:
        t = e.num[i]
        radicand = _first_sqrt_radicand(t)
        if radicand is None:
            raise BadSelectorError("selected term has no square-root factor")
        root = SurdNumber.sqrt_int(radicand)
        if sel.substitution is not None:
            _, x_expr = sel.substitution
            if variables_of(x_expr) or x_expr.den:
                raise NotUnitPairError("the offset must be a constant")
            xv = evaluate(x_expr, {})
            if (root + xv) * (root - xv) != SurdNumber.from_rational(1):
                raise NotUnitPairError(
                    f"(sqrt({radicand}) + x)(sqrt({radicand}) - x) is not exactly 1"
                )
            sqrt_term = make_term(1, 1, ((SqrtAtom(radicand), 1),))
            plus = Expr((sqrt_term,) + x_expr.num)
            minus = Expr((sqrt_term,) + tuple(term_negate(xt) for xt in x_expr.num))
            new_list[i] = make_term(
                t.sign, t.coeff, t.factors + ((Group(plus), 1), (Group(minus), 1))
            )
        elif sel.factor is not None:
            f = sel.factor
            if variables_of(f):
                raise NotUnitPairError("the rewrite form must be constant")
            if evaluate(f, {}) != root:
                raise NotUnitPairError(f"the stated form does not equal sqrt({radicand})")
            flat = _flatten(t)
            remaining = [fac for fac in flat.factors
                         if not (isinstance(fac[0], SqrtAtom) and fac[0].radicand == radicand)]
            kept_power = next(p for a, p in flat.factors
                              if isinstance(a, SqrtAtom) and a.radicand == radicand) - 1
            if kept_power:
                remaining.append((SqrtAtom(radicand), kept_power))
            sf, cf, ff = _product_parts(f)
            new_list[i] = make_term(flat.sign * sf, flat.coeff * cf, tuple(remaining) + ff)
        else:
            raise BadSelectorError("sqrt_convert needs an offset (with x=...) or a rewrite form")
    return Expr(tuple(new_list), e.den)


def _first_sqrt_radicand(t: Term) -> int | None:
    for atom, _ in _flatten(t).factors:
        if isinstance(atom, SqrtAtom):
            return atom.radicand
    return None


def mul_div_together(e: Expr) -> Expr:
    """Put every term of the expression over one common denominator."""
    bodies: list[tuple[Term, Expr | None]] = []
    any_fraction = bool(e.den)
    for t in e.num:
        body, den = _quotient_parts(t)
        if den is not None or body.coeff.denominator != 1:
            any_fraction = True
        bodies.append((body, den))
    if not any_fraction:
        raise NoFractionPresentError("no fraction present in the expression")
    if all(den is None and body.coeff.denominator == 1 for body, den in bodies):
        return e  # already a single fraction over the top-level denominator

    d_rat = lcm(*(body.coeff.denominator for body, _ in bodies)) if bodies else 1
    sym_dens: list[Expr] = []
    seen_keys: list[object] = []
    for _, den in bodies:
        if den is None:
            continue
        key = expr_key(den)
        if key not in seen_keys:
            seen_keys.append(key)
            sym_dens.append(den)

    new_terms: list[Term] = []
    for body, den in bodies:
        coeff = body.coeff * d_rat
        factors = list(body.factors)
        own_key = expr_key(den) if den is not None else None
        for other in sym_dens:
            if own_key is not None and expr_key(other) == own_key:
                continue
            s, c, f = _product_parts(other)
            coeff *= c * s
            factors.extend(f)
        new_terms.append(make_term(body.sign, coeff, factors))

    den_factors: list[Factor] = []
    den_coeff = Fraction(d_rat)
    for d in sym_dens:
        s, c, f = _product_parts(d)
        den_coeff *= c * s
        den_factors.extend(f)
    den_term = make_term(1, den_coeff, den_factors)
    return Expr(tuple(new_terms), _den_product(e.den, Expr((den_term,))) if e.den else (den_term,))


def _quotient_parts(t: Term) -> tuple[Term, Expr | None]:
    """Split a parsed quotient term  (num/den)  into its numerator body and
    denominator expression; plain terms pass through."""
    if (
        t.coeff == 1
        and len(t.factors) == 1
        and isinstance(t.factors[0][0], Group)
        and t.factors[0][1] == 1
        and t.factors[0][0].inner.den
    ):
        inner = t.factors[0][0].inner
        if len(inner.num) == 1:
            it = inner.num[0]
            body = Term(t.sign * it.sign, it.coeff, it.factors)
        else:
            body = Term(t.sign, Fraction(1), ((Group(Expr(inner.num)), 1),))
        return body, Expr(inner.den)
    return t, None


def add_sub_together(e: Expr, sel: Selector) -> Expr:
    """Split one term t into k*t - (k-1)*t, creating a negative partner."""
    if sel.split_spec is None:
        raise BadSplitSpecError("add_sub_together needs a split specification")
    index, k = sel.split_spec
    if not 0 <= index < len(e.num):
        raise BadSplitSpecError(f"term index {index} out of range")
    if k < 2:
        raise BadSplitSpecError("split multiplier must be at least 2")
    t = e.num[index]
    grown = make_term(t.sign, t.coeff * k, t.factors)
    shrunk = make_term(-t.sign, t.coeff * (k - 1), t.factors)
    out = list(e.num)
    out[index : index + 1] = [grown, shrunk]
    return Expr(tuple(out), e.den)


def cancel(q1: Equation, q2: Equation) -> Equation:
    """Move left and cancel: both equations name the same right-hand quantity,
    so their left sides subtract to zero."""
    if not structurally_equal(q1.rhs, q2.rhs):
        raise RhsMismatchError("the two equations do not share a right-hand side")
    if q1.lhs.den or q2.lhs.den:
        s1, c1, f1 = _product_parts(q1.lhs)
        s2, c2, f2 = _product_parts(q2.lhs)
        diff = Expr((make_term(s1, c1, f1), make_term(-s2, c2, f2)))
    else:
        diff = Expr(q1.lhs.num + tuple(term_negate(t) for t in q2.lhs.num))
    return Equation(diff, Expr(()))


# ---------------------------------------------------------------------------
# routing and verification
# ---------------------------------------------------------------------------

def _has_fraction(e: Expr) -> bool:
    if e.den:
        return True
    for t in e.num:
        if t.coeff.denominator != 1:
            return True
        _, den = _quotient_parts(t)
        if den is not None:
            return True
    return False


def _split_indices(eq: Equation, indices: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n = len(eq.lhs.num)
    total = n + len(eq.rhs.num)
    _check_indices(indices, total)
    lhs = tuple(i for i in indices if i < n)
    rhs = tuple(i - n for i in indices if i >= n)
    return lhs, rhs


def apply_rule(
    rule: RuleId,
    sel: Selector,
    target: Target,
    definitions: Mapping[int, Expr] | None = None,
) -> Target:
    """Apply a rule to an expression or an equation.

    Expression rules address an equation's terms in reading order (left-hand
    terms first) and transform each side independently; squaring applies to
    both sides; eliminate_surplus consumes the equation as a whole.
    """
    if isinstance(target, Equation):
        if rule is RuleId.ELIMINATE_SURPLUS:
            return eliminate_surplus(target, sel.factor)
        if rule is RuleId.SELF_MULTIPLY:
            return Equation(self_multiply(target.lhs), self_multiply(target.rhs))
        if rule is RuleId.MUL_DIV_TOGETHER:
            did = False
            lhs, rhs = target.lhs, target.rhs
            if _has_fraction(lhs):
                lhs = mul_div_together(lhs)
                did = True
            if _has_fraction(rhs):
                rhs = mul_div_together(rhs)
                did = True
            if not did:
                raise NoFractionPresentError("no fraction present in the equation")
            return Equation(lhs, rhs)
        if rule is RuleId.SPLIT and sel.substitution is not None and not sel.term_indices:
            return Equation(
                split(target.lhs, sel, definitions), split(target.rhs, sel, definitions)
            )
        if rule is RuleId.ADD_SUB_TOGETHER:
            if sel.split_spec is None:
                raise BadSplitSpecError("add_sub_together needs a split specification")
            index, k = sel.split_spec
            n = len(target.lhs.num)
            if index < n:
                return Equation(
                    add_sub_together(target.lhs, Selector(split_spec=(index, k))), target.rhs
                )
            return Equation(
                target.lhs, add_sub_together(target.rhs, Selector(split_spec=(index - n, k)))
            )
        lhs_idx, rhs_idx = _split_indices(target, sel.term_indices)
        lhs, rhs = target.lhs, target.rhs
        if lhs_idx or not rhs_idx:
            lhs = _apply_expr_rule(rule, _local(sel, lhs_idx), lhs, definitions)
        if rhs_idx:
            rhs = _apply_expr_rule(rule, _local(sel, rhs_idx), rhs, definitions)
        return Equation(lhs, rhs)

    if rule is RuleId.ELIMINATE_SURPLUS:
        raise UnsupportedInputError("eliminate_surplus applies to equations")
    return _apply_expr_rule(rule, sel, target, definitions)


def _local(sel: Selector, indices: tuple[int, ...]) -> Selector:
    return Selector(indices, sel.factor, sel.substitution, sel.split_spec)


def _apply_expr_rule(
    rule: RuleId, sel: Selector, e: Expr, definitions: Mapping[int, Expr] | None
) -> Expr:
    if rule is RuleId.SELF_MULTIPLY:
        return self_multiply(e)
    if rule is RuleId.PUT_TOGETHER:
        return put_together(e, sel)
    if rule is RuleId.SPLIT:
        return split(e, sel, definitions)
    if rule is RuleId.ADD_SAME_SUBTRACT_DIFFERENT:
        return add_same_subtract_different(e, sel)
    if rule is RuleId.CONVERT:
        return convert(e, sel)
    if rule is RuleId.SQRT_CONVERT:
        return sqrt_convert(e, sel)
    if rule is RuleId.MUL_DIV_TOGETHER:
        return mul_div_together(e)
    if rule is RuleId.ADD_SUB_TOGETHER:
        return add_sub_together(e, sel)
    raise UnsupportedInputError(f"rule {rule.value} cannot apply to an expression")


# -- verification -----------------------------------------------------------

_PRIMARY_PROBE: dict[int, Fraction] = {
    0: Fraction(7, 3), 1: Fraction(5, 11), 2: Fraction(2, 7), 3: Fraction(3, 13),
    4: Fraction(4, 17), 5: Fraction(6, 19), 6: Fraction(8, 23), 7: Fraction(9, 29),
    8: Fraction(10, 31), 9: Fraction(12, 37), 10: Fraction(14, 41),
}
_SECONDARY_PROBE: dict[int, Fraction] = {
    0: Fraction(5, 2), 1: Fraction(3, 7), 2: Fraction(7, 11), 3: Fraction(2, 9),
    4: Fraction(9, 13), 5: Fraction(11, 23), 6: Fraction(13, 29), 7: Fraction(15, 31),
    8: Fraction(17, 37), 9: Fraction(19, 41), 10: Fraction(21, 43),
}


def probe_bindings(
    which: str = "primary", definitions: Mapping[int, Expr] | None = None
) -> dict[int, SurdNumber]:
    table = _PRIMARY_PROBE if which == "primary" else _SECONDARY_PROBE
    bindings = {i: SurdNumber.from_rational(q) for i, q in table.items()}
    for var, definition in (definitions or {}).items():
        bindings[var] = evaluate(definition, bindings)
    return bindings


@dataclass(frozen=True)
class Witness:
    """A numeric counterexample: variable bindings plus labeled side values."""

    bindings: tuple[tuple[int, SurdNumber], ...]
    values: tuple[tuple[str, SurdNumber], ...]


@dataclass(frozen=True)
class Verdict:
    status: str  # "ok" | "rule-mismatch" | "semantic-fail" | "precondition"
    message: str = ""
    engine_result: Target | None = None
    witness: Witness | None = None

    @property
    def is_error(self) -> bool:
        return self.status in ("semantic-fail", "precondition")


def _semantic_match(a: Target, b: Target) -> bool:
    if isinstance(a, Equation):
        assert isinstance(b, Equation)
        return semantically_equal(a.lhs, b.lhs) and semantically_equal(a.rhs, b.rhs)
    assert isinstance(b, Expr)
    return semantically_equal(a, b)


def difference_witness(
    engine: Target, stated: Target, definitions: Mapping[int, Expr] | None = None
) -> Witness | None:
    """Bind every variable to a fixed rational probe and report where the
    engine result and the stated result take different values."""
    for which in ("primary", "secondary"):
        try:
            bindings = probe_bindings(which, definitions)
            if isinstance(engine, Equation):
                assert isinstance(stated, Equation)
                pairs = (
                    ("engine lhs", engine.lhs), ("stated lhs", stated.lhs),
                    ("engine rhs", engine.rhs), ("stated rhs", stated.rhs),
                )
            else:
                assert isinstance(stated, Expr)
                pairs = (("engine", engine), ("stated", stated))
            values = tuple((label, evaluate(expr, bindings)) for label, expr in pairs)
        except ZeroDenominatorError:
            continue
        used = variables_of(engine) | variables_of(stated)
        trimmed = tuple(sorted((i, v) for i, v in bindings.items() if i in used))
        return Witness(trimmed, values)
    return None


def verify_application(
    app: RuleApplication, definitions: Mapping[int, Expr] | None = None
) -> Verdict:
    """Check a stated rule result: ok on a structural match, a warning when
    the result is merely semantically equal, a hard failure otherwise."""
    try:
        engine = apply_rule(app.rule, app.selector, app.target, definitions)
    except RuleError as exc:
        return Verdict("precondition", str(exc))
    except ZeroDenominatorError as exc:
        return Verdict("precondition", str(exc))
    if structurally_equal(engine, app.stated):
        return Verdict("ok", engine_result=engine)
    try:
        if _semantic_match(engine, app.stated):
            return Verdict(
                "rule-mismatch",
                "stated result differs in form from the rule's result but is semantically equal",
                engine_result=engine,
            )
    except ZeroDenominatorError as exc:
        return Verdict("semantic-fail", f"stated result is degenerate: {exc}", engine_result=engine)
    return Verdict(
        "semantic-fail",
        "stated result is not semantically equal to the rule's result",
        engine_result=engine,
        witness=difference_witness(engine, app.stated, definitions),
    )
