"""tenzan: a term-rewriting engine and derivation checker for the Edo-period
tenzan jutsu calculation system."""

from .errors import TenzanError
from .exprs import (
    CanonicalPoly,
    Equation,
    Expr,
    Group,
    SqrtAtom,
    Term,
    Variable,
    canonical_form,
    canonical_to_expr,
    equation_equivalent,
    equation_fingerprint,
    evaluate,
    semantically_equal,
    structurally_equal,
)
from .surds import SurdNumber
from .notation import (
    LabelMap,
    LABELS,
    TraditionalLength,
    format_traditional_length,
    parse_expr,
    parse_kanji_numeral,
    parse_traditional_length,
    render_kanji_numeral,
    render_modern,
    render_sidewriting,
)
from .rules import (
    RuleApplication,
    RuleId,
    Selector,
    Verdict,
    add_same_subtract_different,
    add_sub_together,
    apply_rule,
    cancel,
    convert,
    eliminate_surplus,
    mul_div_together,
    put_together,
    self_multiply,
    split,
    sqrt_convert,
    verify_application,
)
from .derivation import (
    CheckReport,
    DerivationScript,
    Step,
    check_script,
    final_value,
    parse_script,
    render_report_structured,
    render_report_text,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalPoly", "CheckReport", "DerivationScript", "Equation", "Expr",
    "Group", "LabelMap", "LABELS", "RuleApplication", "RuleId", "Selector",
    "SqrtAtom", "Step", "SurdNumber", "TenzanError", "Term", "TraditionalLength",
    "Variable", "Verdict",
    "add_same_subtract_different", "add_sub_together", "apply_rule",
    "cancel", "canonical_form", "canonical_to_expr", "check_script", "convert",
    "eliminate_surplus", "equation_equivalent", "equation_fingerprint",
    "evaluate", "final_value", "format_traditional_length", "mul_div_together",
    "parse_expr", "parse_kanji_numeral", "parse_script",
    "parse_traditional_length", "put_together", "render_kanji_numeral",
    "render_modern", "render_report_structured", "render_report_text",
    "render_sidewriting", "self_multiply", "semantically_equal", "split",
    "sqrt_convert", "structurally_equal", "verify_application",
]
