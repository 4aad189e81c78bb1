"""Linear transcription grammar and traditional renderings.

The grammar is a plain ASCII front end for the side-writing notation:
terms joined by + and -, explicit * for products, sqrt(n) for roots,
^ for powers, parentheses for grouped factors, / for quotients.  Labels
may be written as ASCII letters (a..j, x), romanized stem names, or the
calendar-stem kanji themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from math import floor
from typing import Union

from .errors import (
    MalformedLengthError,
    MalformedNumeralError,
    NegativeLengthError,
    ParseError,
    RepeatedUnitError,
    UnknownLabelError,
    UnrenderableCoefficientError,
)
from .exprs import (
    Atom,
    Expr,
    Factor,
    Group,
    SqrtAtom,
    Term,
    Variable,
    make_term,
    sqrt_parts,
)
from .surds import SurdNumber

# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------

#: (index, kanji, ascii letter, romanized name); index 10 is the reserved diagonal.
_STEM_TABLE: tuple[tuple[int, str, str, str], ...] = (
    (0, "甲", "a", "ko"),
    (1, "乙", "b", "otsu"),
    (2, "丙", "c", "hei"),
    (3, "丁", "d", "tei"),
    (4, "戊", "e", "bo"),
    (5, "己", "f", "ki"),
    (6, "庚", "g", "kanoe"),
    (7, "辛", "h", "shin"),
    (8, "壬", "i", "jin"),
    (9, "癸", "j", "mizunoto"),
    (10, "方斜", "x", "hosha"),
)


class LabelMap:
    """Bijective mapping between kanji stems, romanized names, ASCII letters
    and label indices."""

    def __init__(self) -> None:
        self._by_text: dict[str, int] = {}
        self._kanji: dict[int, str] = {}
        self._ascii: dict[int, str] = {}
        self._romaji: dict[int, str] = {}
        for index, kanji, letter, romaji in _STEM_TABLE:
            self._kanji[index] = kanji
            self._ascii[index] = letter
            self._romaji[index] = romaji
            for text in (kanji, letter, romaji):
                self._by_text[text] = index

    def index_for(self, text: str) -> int | None:
        return self._by_text.get(text)

    def kanji_for(self, index: int) -> str:
        return self._kanji[index]

    def ascii_for(self, index: int) -> str:
        return self._ascii[index]

    def romaji_for(self, index: int) -> str:
        return self._romaji[index]


LABELS = LabelMap()


# ---------------------------------------------------------------------------
# expression tokenizer / parser
# ---------------------------------------------------------------------------

_PUNCT = set("+-*/^()=")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "punct" | "end"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(_Token("num", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < len(text) and text[j].isalpha():
                j += 1
            tokens.append(_Token("name", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, line, start_col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, start_col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_punct(self, ch: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != ch:
            raise ParseError(f"expected {ch!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)
        return self.take()

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    # expr := ["+"|"-"] term (("+"|"-") term)*
    def parse_expr(self) -> Expr:
        raw_terms: list[tuple[int, Fraction, list[Factor], list[Factor]]] = []
        sign = 1
        tok = self.peek()
        if tok.kind == "punct" and tok.text in "+-":
            self.take()
            sign = -1 if tok.text == "-" else 1
        raw_terms.append(self.parse_term(sign))
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text in "+-":
                self.take()
                raw_terms.append(self.parse_term(-1 if tok.text == "-" else 1))
            else:
                break
        return _assemble(raw_terms)

    # term := factor (("*"|"/") factor)*  — each "/" binds a single factor
    def parse_term(self, sign: int) -> tuple[int, Fraction, list[Factor], list[Factor]]:
        coeff = Fraction(1)
        num_factors: list[Factor] = []
        den_factors: list[Factor] = []

        def absorb(payload: tuple[str, object], power: int, side: str) -> None:
            nonlocal coeff
            kind, value = payload
            if kind == "scaled-atom":
                mult, atom = value  # type: ignore[misc]
                absorb(("const", mult), power, side)
                absorb(("atom", atom), power, side)
                return
            if kind == "const":
                assert isinstance(value, Fraction)
                scaled = value**power
                if side == "num":
                    coeff *= scaled
                else:
                    if scaled == 0:
                        raise self.fail("division by zero constant")
                    coeff /= scaled
            else:
                assert isinstance(value, (Variable, SqrtAtom, Group))
                target = num_factors if side == "num" else den_factors
                target.append((value, power))

        payload, power = self.parse_factor()
        absorb(payload, power, "num")
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text in "*/":
                self.take()
                payload, power = self.parse_factor()
                absorb(payload, power, "num" if tok.text == "*" else "den")
            else:
                break
        return sign, coeff, num_factors, den_factors

    # factor := primary ("^" int)?
    def parse_factor(self) -> tuple[tuple[str, object], int]:
        payload = self.parse_primary()
        power = 1
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "^":
            self.take()
            ptok = self.peek()
            if ptok.kind != "num":
                raise self.fail("expected an integer exponent after '^'")
            self.take()
            power = int(ptok.text)
            if power < 1:
                raise ParseError("exponent must be >= 1", ptok.line, ptok.column)
        return payload, power

    def parse_primary(self) -> tuple[str, object]:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return ("const", Fraction(int(tok.text)))
        if tok.kind == "name":
            self.take()
            if tok.text == "sqrt":
                self.expect_punct("(")
                ntok = self.peek()
                if ntok.kind != "num":
                    raise self.fail("sqrt expects an integer radicand")
                self.take()
                self.expect_punct(")")
                mult, atom = sqrt_parts(int(ntok.text))
                if atom is None:
                    return ("const", mult)
                if mult != 1:
                    # sqrt of a non-square-free integer: s*sqrt(m), s folded in
                    return ("scaled-atom", (mult, atom))
                return ("atom", atom)
            index = LABELS.index_for(tok.text)
            if index is None:
                raise UnknownLabelError(f"unknown label {tok.text!r}", tok.line, tok.column)
            return ("atom", Variable(index))
        if tok.kind == "punct" and tok.text == "(":
            self.take()
            inner = self.parse_expr()
            self.expect_punct(")")
            if not inner.num:
                return ("const", Fraction(0))
            return ("atom", Group(inner))
        raise self.fail(f"expected a number, label, sqrt(...) or '(', found {tok.text or 'end of input'!r}")


def _assemble(raw_terms: list[tuple[int, Fraction, list[Factor], list[Factor]]]) -> Expr:
    have_den = [bool(den) for _, _, _, den in raw_terms]
    if len(raw_terms) == 1 and have_den[0]:
        sign, coeff, num_factors, den_factors = raw_terms[0]
        return Expr(_splice_product(sign, coeff, num_factors), _den_terms(den_factors))
    terms: list[Term] = []
    for (sign, coeff, num_factors, den_factors) in raw_terms:
        if coeff == 0:
            continue
        if den_factors:
            inner = Expr(_splice_product(1, coeff, num_factors), _den_terms(den_factors))
            terms.append(Term(sign, Fraction(1), ((Group(inner), 1),)))
        else:
            terms.append(make_term(sign, coeff, num_factors))
    return Expr(tuple(terms))


def _splice_product(sign: int, coeff: Fraction, factors: list[Factor]) -> tuple[Term, ...]:
    """Numerator of a quotient: a sole parenthesized sum is spliced into the
    term list so that "(a + b)/c" keeps its two numerator terms."""
    if coeff == 0:
        return ()
    if (
        sign == 1
        and coeff == 1
        and len(factors) == 1
        and isinstance(factors[0][0], Group)
        and factors[0][1] == 1
        and not factors[0][0].inner.den
    ):
        return factors[0][0].inner.num
    return (make_term(sign, coeff, factors),)


def _den_terms(factors: list[Factor]) -> tuple[Term, ...]:
    if (
        len(factors) == 1
        and isinstance(factors[0][0], Group)
        and factors[0][1] == 1
        and not factors[0][0].inner.den
    ):
        return factors[0][0].inner.num
    return (make_term(1, Fraction(1), factors),)


def parse_expr(text: str) -> Expr:
    """Parse linear transcription text into an expression."""
    parser = _Parser(text)
    tok = parser.peek()
    if tok.kind == "end":
        raise ParseError("empty expression", tok.line, tok.column)
    expr = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "end":
        raise ParseError(f"unexpected trailing input {tail.text!r}", tail.line, tail.column)
    return expr


# ---------------------------------------------------------------------------
# modern (linear) rendering
# ---------------------------------------------------------------------------

def _render_atom(atom: Atom, power: int) -> str:
    if isinstance(atom, Variable):
        base = LABELS.ascii_for(atom.index)
    elif isinstance(atom, SqrtAtom):
        base = f"sqrt({atom.radicand})"
    else:
        base = f"({render_modern(atom.inner)})"
    return base if power == 1 else f"{base}^{power}"


def _is_simple_quotient_term(t: Term) -> bool:
    return (
        t.coeff == 1
        and len(t.factors) == 1
        and isinstance(t.factors[0][0], Group)
        and t.factors[0][1] == 1
        and bool(t.factors[0][0].inner.den)
    )


def _render_term_body(t: Term) -> str:
    if _is_simple_quotient_term(t):
        group = t.factors[0][0]
        assert isinstance(group, Group)
        return render_modern(group.inner)
    parts: list[str] = []
    if t.coeff.numerator != 1 or not t.factors:
        parts.append(str(t.coeff.numerator))
    for atom, power in t.factors:
        parts.append(_render_atom(atom, power))
    body = "*".join(parts)
    if t.coeff.denominator != 1:
        body += f"/{t.coeff.denominator}"
    return body


def _render_sum(terms: tuple[Term, ...]) -> str:
    pieces: list[str] = []
    for i, t in enumerate(terms):
        body = _render_term_body(t)
        if i == 0:
            pieces.append(body if t.sign > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if t.sign > 0 else f"- {body}")
    return " ".join(pieces)


def _render_den(den: tuple[Term, ...]) -> str:
    if len(den) == 1:
        t = den[0]
        if (
            t.sign == 1
            and t.coeff == 1
            and len(t.factors) == 1
            and t.factors[0][1] == 1
            and isinstance(t.factors[0][0], (Variable, SqrtAtom))
        ):
            return _render_atom(t.factors[0][0], 1)
    return f"({_render_sum(den)})"


def render_modern(e: Expr) -> str:
    """Linear text; parsing the result reproduces the expression structurally."""
    if not e.num:
        return "0"
    num = _render_sum(e.num)
    if not e.den:
        return num
    if len(e.num) > 1:
        num = f"({num})"
    return f"{num}/{_render_den(e.den)}"


def render_equation(q) -> str:
    return f"{render_modern(q.lhs)} == {render_modern(q.rhs)}"


# ---------------------------------------------------------------------------
# kanji numerals
# ---------------------------------------------------------------------------

_KANJI_DIGITS = "一二三四五六七八九"
_DIGIT_VALUE = {ch: i + 1 for i, ch in enumerate(_KANJI_DIGITS)}
_SCALES = (("千", 1000), ("百", 100), ("十", 10))


def render_kanji_numeral(n: int) -> str:
    """Kanji numeral for 1..9999, largest place first (15 -> 十五)."""
    if not 1 <= n <= 9999:
        raise MalformedNumeralError(f"numeral out of supported range: {n}")
    out: list[str] = []
    for marker, scale in _SCALES:
        digit = n // scale
        n %= scale
        if digit == 0:
            continue
        if digit > 1:
            out.append(_KANJI_DIGITS[digit - 1])
        out.append(marker)
    if n:
        out.append(_KANJI_DIGITS[n - 1])
    return "".join(out)


def parse_kanji_numeral(text: str) -> int:
    """Value of a kanji numeral in 1..9999; larger places must come first."""
    if not text:
        raise MalformedNumeralError("empty numeral")
    value = 0
    i = 0
    last_scale = 10000
    for marker, scale in _SCALES:
        digit = 1
        j = i
        if j < len(text) and text[j] in _DIGIT_VALUE:
            digit = _DIGIT_VALUE[text[j]]
            j += 1
        if j < len(text) and text[j] == marker:
            if scale >= last_scale:
                raise MalformedNumeralError(f"misordered numeral {text!r}")
            value += digit * scale
            last_scale = scale
            i = j + 1
    if i < len(text):
        if len(text) - i != 1 or text[i] not in _DIGIT_VALUE:
            raise MalformedNumeralError(f"malformed numeral {text!r}")
        value += _DIGIT_VALUE[text[i]]
    if value == 0:
        raise MalformedNumeralError(f"malformed numeral {text!r}")
    return value


# ---------------------------------------------------------------------------
# traditional length units (sun / bu / rin / mo)
# ---------------------------------------------------------------------------

_UNITS = (("寸", "sun"), ("分", "bu"), ("厘", "rin"), ("毛", "mo"))


@dataclass(frozen=True)
class TraditionalLength:
    sun: int
    bu: int
    rin: int
    mo: int

    def __post_init__(self) -> None:
        if self.sun < 0 or not all(0 <= d <= 9 for d in (self.bu, self.rin, self.mo)):
            raise MalformedLengthError("length digits out of range")

    @property
    def value_in_sun(self) -> Fraction:
        return self.sun + Fraction(self.bu, 10) + Fraction(self.rin, 100) + Fraction(self.mo, 1000)

    def kanji(self) -> str:
        parts: list[str] = []
        if self.sun:
            parts.append(render_kanji_numeral(self.sun) + "寸")
        for digit, unit in ((self.bu, "分"), (self.rin, "厘"), (self.mo, "毛")):
            if digit:
                parts.append(_KANJI_DIGITS[digit - 1] + unit)
        return "".join(parts) if parts else "零"

    def ascii(self) -> str:
        parts: list[str] = []
        if self.sun:
            parts.append(f"{self.sun} sun")
        for digit, unit in ((self.bu, "bu"), (self.rin, "rin"), (self.mo, "mo")):
            if digit:
                parts.append(f"{digit} {unit}")
        return " ".join(parts) if parts else "0"


def parse_traditional_length(text: str) -> TraditionalLength:
    """Parse a kanji length such as 五分八厘五毛; units must strictly decrease."""
    if not text:
        raise MalformedLengthError("empty length")
    values = {"sun": 0, "bu": 0, "rin": 0, "mo": 0}
    seen_rank = -1
    i = 0
    while i < len(text):
        j = i
        while j < len(text) and text[j] not in dict(_UNITS):
            j += 1
        if j == len(text):
            raise MalformedLengthError(f"trailing digits without a unit in {text!r}")
        digits, unit_ch = text[i:j], text[j]
        rank = next(k for k, (ch, _) in enumerate(_UNITS) if ch == unit_ch)
        name = _UNITS[rank][1]
        if rank <= seen_rank:
            if values[name]:
                raise RepeatedUnitError(f"unit {unit_ch} repeated in {text!r}")
            raise MalformedLengthError(f"units out of order in {text!r}")
        seen_rank = rank
        if not digits:
            raise MalformedLengthError(f"missing digit before {unit_ch} in {text!r}")
        if name == "sun":
            values[name] = parse_kanji_numeral(digits)
        else:
            if len(digits) != 1 or digits not in _DIGIT_VALUE:
                raise MalformedLengthError(f"expected a single digit before {unit_ch} in {text!r}")
            values[name] = _DIGIT_VALUE[digits]
        i = j + 1
    return TraditionalLength(values["sun"], values["bu"], values["rin"], values["mo"])


LengthValue = Union[SurdNumber, Fraction, Decimal, int]


def _mo_floor(value: LengthValue) -> int:
    """floor(value * 1000), computed exactly for rationals."""
    if isinstance(value, SurdNumber):
        if value.is_rational:
            return floor(value.rational_part * 1000)
        with localcontext() as ctx:
            ctx.prec = 50
            scaled = value.to_decimal(40) * 1000
            return int(scaled.to_integral_value(rounding=ROUND_FLOOR))
    if isinstance(value, Decimal):
        value = Fraction(value)
    return floor(Fraction(value) * 1000)


def format_traditional_length(value: LengthValue) -> TraditionalLength:
    """Truncate (never round) a nonnegative length in sun at the mo digit."""
    if isinstance(value, SurdNumber):
        negative = value.is_negative()
    else:
        negative = value < 0
    if negative:
        raise NegativeLengthError("length must be nonnegative")
    total = _mo_floor(value)
    return TraditionalLength(total // 1000, total // 100 % 10, total // 10 % 10, total % 10)


# ---------------------------------------------------------------------------
# side-writing rendering
# ---------------------------------------------------------------------------

_GLYPHS = {
    "kanji": {
        "cross": "乂",
        "stroke": "|",
        "root": "商",
        "plus": "加",
        "minus": "去",
        "zero": "合",
    },
    "ascii": {
        "cross": "X",
        "stroke": "|",
        "root": "V",
        "plus": "+",
        "minus": "-",
        "zero": "0",
    },
}


def _numeral(n: int, mode: str) -> str:
    if n > 9999:
        raise UnrenderableCoefficientError(f"coefficient part {n} too large for tally layout")
    return render_kanji_numeral(n) if mode == "kanji" else str(n)


def _label_glyph(index: int, mode: str) -> str:
    return LABELS.kanji_for(index) if mode == "kanji" else LABELS.ascii_for(index)


def _atom_cells(atom: Atom, mode: str) -> list[str]:
    g = _GLYPHS[mode]
    if isinstance(atom, Variable):
        return [_label_glyph(atom.index, mode)]
    if isinstance(atom, SqrtAtom):
        return [_numeral(atom.radicand, mode), g["root"]]
    return _group_cells(atom.inner, mode)


def _term_cells(t: Term, mode: str) -> list[str]:
    """Glyph cells of one term inside a group column (coefficient as numeral)."""
    cells: list[str] = []
    if t.coeff.numerator != 1 or not t.factors:
        cells.append(_numeral(t.coeff.numerator, mode))
    for atom, power in t.factors:
        for _ in range(power):
            cells.extend(_atom_cells(atom, mode))
    if t.coeff.denominator != 1:
        cells.append(_numeral(t.coeff.denominator, mode))
    return cells


def _group_cells(inner: Expr, mode: str) -> list[str]:
    g = _GLYPHS[mode]
    cells: list[str] = []
    for i, t in enumerate(inner.num):
        if i > 0 or t.sign < 0:
            cells.append(g["plus"] if t.sign > 0 else g["minus"])
        cells.extend(_term_cells(t, mode))
    if inner.den:
        for t in inner.den:
            cells.extend(_term_cells(t, mode))
    return cells


def _den_label(terms: tuple[Term, ...], mode: str) -> str:
    g = _GLYPHS[mode]
    parts: list[str] = []
    for i, t in enumerate(terms):
        if i > 0 or t.sign < 0:
            parts.append(g["plus"] if t.sign > 0 else g["minus"])
        parts.append("".join(_term_cells(t, mode)))
    return "".join(parts)


def render_sidewriting(e: Expr, glyph_mode: str = "kanji") -> str:
    """Schematic column layout: one column per term, tally strokes for the
    coefficient (crossed for negation), factor glyphs top to bottom, and
    denominators written to the left of the stroke."""
    if glyph_mode not in _GLYPHS:
        raise ValueError(f"unknown glyph mode {glyph_mode!r}")
    g = _GLYPHS[glyph_mode]
    if not e.num:
        return g["zero"]

    columns: list[list[str]] = []
    shared_den = _den_label(e.den, glyph_mode) if e.den else ""
    for t in e.num:
        den_prefix = shared_den
        body = t
        if _is_simple_quotient_term(t):
            group = t.factors[0][0]
            assert isinstance(group, Group)
            den_prefix += _den_label(group.inner.den, glyph_mode)
            inner_num = group.inner.num
            if len(inner_num) == 1:
                body = Term(t.sign * inner_num[0].sign, inner_num[0].coeff, inner_num[0].factors)
            else:
                body = Term(t.sign, Fraction(1), ((Group(Expr(inner_num)), 1),))
        numerator = body.coeff.numerator
        if body.coeff.denominator != 1:
            den_prefix += _numeral(body.coeff.denominator, glyph_mode)
        if numerator <= 9:
            strokes = g["stroke"] * numerator
        else:
            strokes = _numeral(numerator, glyph_mode) + g["stroke"]
        cross = g["cross"] if body.sign < 0 else ""
        cells = [den_prefix + cross + strokes]
        for atom, power in body.factors:
            for _ in range(power):
                cells.extend(_atom_cells(atom, glyph_mode))
        columns.append(cells)

    height = max(len(c) for c in columns)
    widths = [max(len(cell) for cell in c) for c in columns]
    lines: list[str] = []
    for row in range(height):
        cells = []
        for c, w in zip(columns, widths):
            cell = c[row] if row < len(c) else ""
            cells.append(cell.ljust(w))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)
