"""Embedded derivation scripts and the conversion-identity table.

The Katayamahiko scripts replay the 1810 tenzan jutsu solution to the
shrine problem: one script transcribes the derivation exactly as written
(its final rearrangement carries a sign error), one carries the corrected
rearrangement, and one follows the modern route through the rationalized
fraction.  A fourth script exercises each manipulation rule once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exprs import Expr, evaluate, variables_of
from .notation import parse_expr
from .surds import SurdNumber

SCRIPTS: dict[str, str] = {}

SCRIPTS["katayamahiko-ohara"] = """\
problem "Katayamahiko problem 14, solution as written"
var a = ko "diameter of circle ko (the large circle)"
var b = otsu "diameter of circle otsu (the small circle)"
var x = hosha "diagonal of the square"

# Put otsu, multiply by the diagonal ratio, add ko and otsu: one reading of x.
s1: given sqrt(2)*b + a + b == x
# Put ko, multiply by the diagonal ratio, add ko: the other reading of x.
s2: given sqrt(2)*a + a == x
# Move left and cancel to find the equation.
s3: cancel s1, s2 => sqrt(2)*b + a + b - sqrt(2)*a - a == 0
# Different terms put together.
s4: apply put_together to s3 select terms 0, 2 factor sqrt(2) + 1 => b*(sqrt(2) + 1) - sqrt(2)*a == 0
# Convert: multiply the root term by a conjugate product equal to one.
s5: apply convert to s4 select terms 1 factor (sqrt(2) - 1)*(sqrt(2) + 1) => b*(sqrt(2) + 1) - a*(sqrt(2)*((sqrt(2) - 1)*(sqrt(2) + 1))) == 0
# Eliminate the surplus factor shared by both terms.
s6: apply eliminate_surplus to s5 factor sqrt(2) + 1 => b - a*(sqrt(2)*(sqrt(2) - 1)) == 0
# Splitting: expand the grouped product.
s7: apply split to s6 select terms 1 => b - 2*a + sqrt(2)*a == 0
# Final rearrangement as transcribed; the isolated side has the wrong sign.
s8: rearrange s7 => -2*a + sqrt(2)*a == b
"""

SCRIPTS["katayamahiko-corrected"] = """\
problem "Katayamahiko problem 14, corrected rearrangement"
var a = ko "diameter of circle ko (the large circle)"
var b = otsu "diameter of circle otsu (the small circle)"
var x = hosha "diagonal of the square"

s1: given sqrt(2)*b + a + b == x
s2: given sqrt(2)*a + a == x
s3: cancel s1, s2 => sqrt(2)*b + a + b - sqrt(2)*a - a == 0
s4: apply put_together to s3 select terms 0, 2 factor sqrt(2) + 1 => b*(sqrt(2) + 1) - sqrt(2)*a == 0
s5: apply convert to s4 select terms 1 factor (sqrt(2) - 1)*(sqrt(2) + 1) => b*(sqrt(2) + 1) - a*(sqrt(2)*((sqrt(2) - 1)*(sqrt(2) + 1))) == 0
s6: apply eliminate_surplus to s5 factor sqrt(2) + 1 => b - a*(sqrt(2)*(sqrt(2) - 1)) == 0
s7: apply split to s6 select terms 1 => b - 2*a + sqrt(2)*a == 0
# The rearrangement with the sign put right.
s8: rearrange s7 => 2*a - sqrt(2)*a == b
"""

SCRIPTS["katayamahiko-modern"] = """\
problem "Katayamahiko problem 14, modern route"
var a = ko "diameter of circle ko (the large circle)"
var b = otsu "diameter of circle otsu (the small circle)"

# Both diagonal readings in one line.
m1: given a + sqrt(2)*a == b*(sqrt(2) + 1) + a
# Solve for b, leaving the fraction in place.
m2: rearrange m1 => b == sqrt(2)*a/(sqrt(2) + 1)
# Rationalize the denominator with the conjugate.
m3: apply convert to m2 select terms 1 factor (sqrt(2) - 1)/(sqrt(2) - 1) => b == sqrt(2)*a*(sqrt(2) - 1)/((sqrt(2) + 1)*(sqrt(2) - 1))
# The denominator is now one.
m4: rearrange m3 => b == sqrt(2)*(sqrt(2) - 1)*a
# Expand the product.
m5: apply split to m4 select terms 1 => b == 2*a - sqrt(2)*a
"""

SCRIPTS["rule-examples"] = """\
problem "Rule catalogue micro-derivations"
var a = ko "first quantity"
var b = otsu "second quantity"
var c = hei "third quantity"
var d = tei "fourth quantity"
var x = hosha "stand-in for the worked line"

define x := a + b

# squaring applies to both sides
r1: given 2*a == x
r2: apply self_multiply to r1 => 4*a^2 == x^2
r3: given a + b == x
r4: apply self_multiply to r3 => a^2 + 2*a*b + b^2 == x^2
# put together: factor a shared piece out
r5: given a*b + a*c == x
r6: apply put_together to r5 select terms 0, 1 factor a => a*(b + c) == x
# splitting, the reverse: distribute the group
r7: apply split to r6 select terms 0 => a*b + a*c == x
# splitting as substitution of a defined variable
r8: given d + c == x
r9: apply split to r8 with x=a+b => d + c == a + b
# eliminate the surplus multiplier three
r10: given 3*x*(a + b + c) - 6*a*b == 0
r11: apply eliminate_surplus to r10 factor 3 => x*(a + b + c) - 2*a*b == 0
# same signs add
r12: given 2*a*b + 2*a*b == x
r13: apply add_same_subtract_different to r12 select terms 0, 1 => 4*a*b == x
# conversion to an equal form of a different shape
r14: given a^2 - b^2 == x
r15: apply convert to r14 select terms 0, 1 factor (a + b)*(a - b) => (a + b)*(a - b) == x
# square root conversion by a conjugate pair with product one
r16: given sqrt(2)*a == x
r17: apply sqrt_convert to r16 select terms 0 with x=1 => sqrt(2)*a*(sqrt(2) + 1)*(sqrt(2) - 1) == x
# one fraction pulls the rest over a common denominator
r18: given a^2/b + 2*a + b == x
r19: apply mul_div_together to r18 => (a^2 + 2*a*b + b^2)/b == x
# addition and subtraction together create a negative partner
r20: given a^2 + a*b + b^2 == x
r21: apply add_sub_together to r20 split term 1 by 2 => a^2 + 2*a*b - a*b + b^2 == x
r22: apply put_together to r21 select terms 0, 1, 3 factor a + b => (a + b)^2 - a*b == x
"""


# ---------------------------------------------------------------------------
# conversion identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityEntry:
    """One row of the conversion tables: a claimed value and a product form.

    Entries the historical text flags as coming out positive only when the
    parts are negative carry the sign caveat.
    """

    claimed: Expr
    product: Expr
    sign_caveat: bool

    def __post_init__(self) -> None:
        if variables_of(self.product) or variables_of(self.claimed):
            raise ValueError("identity entries must be constant")

    @property
    def claimed_value(self) -> SurdNumber:
        return evaluate(self.claimed, {})

    @property
    def computed_value(self) -> SurdNumber:
        return evaluate(self.product, {})

    def status(self) -> str:
        """"exact", "sign-flip", or "disagree" by exact surd arithmetic."""
        computed = self.computed_value
        claimed = self.claimed_value
        if computed == claimed:
            return "exact"
        if computed == -claimed:
            return "sign-flip"
        return "disagree"


_IDENTITY_ROWS: tuple[tuple[str, str, bool], ...] = (
    ("1", "(sqrt(2) - 1)*(sqrt(2) + 1)", False),
    ("1", "(sqrt(2) - 1)^2*(sqrt(2) + 1)^2", False),
    ("1", "(sqrt(3) - 2)*(sqrt(3) + 2)", False),
    ("1", "(sqrt(5) - 2)*(sqrt(5) + 2)", False),
    ("2", "(sqrt(2) - 1)^2*(sqrt(2) + 2)^2", False),
    ("2", "(sqrt(3) - 1)*(sqrt(3) + 1)", False),
    ("sqrt(2)", "(sqrt(2) - 1)*(sqrt(2) + 2)", False),
    ("sqrt(2)", "(sqrt(2) - 2)^2*(sqrt(2) + 1)^2", False),
    ("4", "(sqrt(5) - 1)*(sqrt(5) + 1)", False),
    ("2", "(sqrt(2) - 2)*(sqrt(2) + 2)", True),
    ("2", "(sqrt(3) - 2)*(sqrt(3) + 1)^2", True),
    ("sqrt(2)", "(sqrt(2) - 2)*(sqrt(2) + 1)", True),
)


def identity_table() -> tuple[IdentityEntry, ...]:
    """All twelve conversion identities: nine plain rows, three caveated."""
    return tuple(
        IdentityEntry(parse_expr(claimed), parse_expr(product), caveat)
        for claimed, product, caveat in _IDENTITY_ROWS
    )


def script_names() -> tuple[str, ...]:
    return tuple(sorted(SCRIPTS))


def script_text(name: str) -> str:
    return SCRIPTS[name]
