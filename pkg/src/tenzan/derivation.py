"""Derivation scripts: a line-oriented proof format and its checker.

A script lists the given equations and every manipulation step with its
stated result, exactly as a written derivation does.  The checker replays
each step through the rules engine and the semantic oracle; stated results
are validated, never searched for.  On a failure the checker keeps going
with the stated result, so a single bad step reports exactly one error.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .errors import (
    DanglingReferenceError,
    DuplicateStepIdError,
    NotSolvedFormError,
    RuleError,
    ScriptError,
    UnboundVariableError,
    ZeroDenominatorError,
)
from .exprs import (
    Equation,
    Expr,
    Variable,
    equation_equivalent,
    equation_residual_poly,
    evaluate,
    poly_univariate,
    semantically_equal,
    structurally_equal,
    variables_of,
)
from .notation import LABELS, parse_expr, render_equation, render_modern
from .rules import (
    RULE_BY_NAME,
    RuleApplication,
    RuleId,
    Selector,
    Verdict,
    Witness,
    cancel,
    difference_witness,
    verify_application,
)
from .surds import SurdNumber


# ---------------------------------------------------------------------------
# script structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    id: str
    kind: str  # "given" | "cancel" | "apply" | "rearrange"
    stated: Equation
    refs: tuple[str, ...] = ()
    rule: RuleId | None = None
    selector: Selector | None = None


@dataclass(frozen=True)
class DerivationScript:
    title: str
    declarations: tuple[tuple[int, str, str], ...]  # (label index, name, description)
    definitions: tuple[tuple[int, Expr], ...]
    steps: tuple[Step, ...]

    @cached_property
    def definitions_map(self) -> dict[int, Expr]:
        return dict(self.definitions)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_VAR_RE = re.compile(r'^var\s+(\S+)\s*=\s*(\S+)\s+"(.*)"\s*$')
_PROBLEM_RE = re.compile(r'^problem\s+"(.*)"\s*$')
_DEFINE_RE = re.compile(r"^define\s+(\S+)\s*:=\s*(.+)$")
_STEP_RE = re.compile(r"^(\w[\w-]*)\s*:\s*(.+)$")
_CLAUSE_RE = re.compile(r"\b(select|factor|with|split)\b")


def _strip_comment(line: str) -> str:
    in_quotes = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quotes = not in_quotes
        elif ch == "#" and not in_quotes:
            return line[:i]
    return line


def _parse_equation(text: str, lineno: int) -> Equation:
    sides = text.split("==")
    if len(sides) != 2:
        raise ScriptError("expected exactly one '==' in the equation", lineno)
    return Equation(parse_expr(sides[0]), parse_expr(sides[1]))


def _label_index(token: str, lineno: int) -> int:
    index = LABELS.index_for(token)
    if index is None:
        raise ScriptError(f"unknown label {token!r}", lineno)
    return index


def _parse_selector(clause_text: str, lineno: int) -> Selector:
    term_indices: tuple[int, ...] = ()
    factor: Expr | None = None
    substitution: tuple[int, Expr] | None = None
    split_spec: tuple[int, int] | None = None

    marks = list(_CLAUSE_RE.finditer(clause_text))
    if marks and clause_text[: marks[0].start()].strip():
        raise ScriptError(f"unexpected text before clause: {clause_text!r}", lineno)
    if not marks and clause_text.strip():
        raise ScriptError(f"unrecognized clause: {clause_text!r}", lineno)
    for i, mark in enumerate(marks):
        end = marks[i + 1].start() if i + 1 < len(marks) else len(clause_text)
        body = clause_text[mark.end() : end].strip()
        keyword = mark.group(1)
        if keyword == "select":
            if not body.startswith("terms"):
                raise ScriptError("expected 'select terms <ints>'", lineno)
            ints = body[len("terms") :].replace(",", " ").split()
            if not ints:
                raise ScriptError("no term indices after 'select terms'", lineno)
            try:
                term_indices = tuple(int(s) for s in ints)
            except ValueError:
                raise ScriptError(f"bad term index list {body!r}", lineno) from None
        elif keyword == "factor":
            factor = parse_expr(body)
        elif keyword == "with":
            if "=" not in body:
                raise ScriptError("expected 'with <label>=<expr>'", lineno)
            label, expr_text = body.split("=", 1)
            substitution = (_label_index(label.strip(), lineno), parse_expr(expr_text))
        elif keyword == "split":
            parts = body.split()
            if len(parts) != 4 or parts[0] != "term" or parts[2] != "by":
                raise ScriptError("expected 'split term <index> by <k>'", lineno)
            try:
                split_spec = (int(parts[1]), int(parts[3]))
            except ValueError:
                raise ScriptError(f"bad split specification {body!r}", lineno) from None
    return Selector(term_indices, factor, substitution, split_spec)


def parse_script(text: str) -> DerivationScript:
    """Parse a derivation script; all expressions use the transcription grammar."""
    title = ""
    declarations: list[tuple[int, str, str]] = []
    definitions: list[tuple[int, Expr]] = []
    steps: list[Step] = []
    ids: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("problem"):
            m = _PROBLEM_RE.match(line)
            if not m:
                raise ScriptError("malformed problem line", lineno)
            title = m.group(1)
            continue
        if line.startswith("var "):
            m = _VAR_RE.match(line)
            if not m:
                raise ScriptError("malformed var line", lineno)
            declarations.append((_label_index(m.group(1), lineno), m.group(2), m.group(3)))
            continue
        if line.startswith("define "):
            m = _DEFINE_RE.match(line)
            if not m:
                raise ScriptError("malformed define line", lineno)
            definitions.append((_label_index(m.group(1), lineno), parse_expr(m.group(2))))
            continue
        m = _STEP_RE.match(line)
        if not m:
            raise ScriptError(f"unrecognized line: {line!r}", lineno)
        step_id, rest = m.group(1), m.group(2).strip()
        if step_id in ids:
            raise DuplicateStepIdError(f"step id {step_id!r} already used", lineno)
        ids.add(step_id)
        steps.append(_parse_step(step_id, rest, ids, lineno))

    script = DerivationScript(title, tuple(declarations), tuple(definitions), tuple(steps))
    _validate_declarations(script)
    return script


def _parse_step(step_id: str, rest: str, known_ids: set[str], lineno: int) -> Step:
    def ref(token: str) -> str:
        token = token.strip().rstrip(",")
        if token not in known_ids:
            raise DanglingReferenceError(f"step {step_id!r} references unknown step {token!r}", lineno)
        return token

    if rest.startswith("given"):
        return Step(step_id, "given", _parse_equation(rest[len("given") :], lineno))

    if "=>" not in rest:
        raise ScriptError("expected '=>' before the stated result", lineno)
    clause, stated_text = rest.split("=>", 1)
    stated = _parse_equation(stated_text, lineno)
    clause = clause.strip()

    if clause.startswith("cancel"):
        parts = clause[len("cancel") :].split(",")
        if len(parts) != 2:
            raise ScriptError("expected 'cancel <id>, <id>'", lineno)
        return Step(step_id, "cancel", stated, refs=(ref(parts[0]), ref(parts[1])))

    if clause.startswith("rearrange"):
        return Step(step_id, "rearrange", stated, refs=(ref(clause[len("rearrange") :]),))

    if clause.startswith("apply"):
        m = re.match(r"^apply\s+(\S+)\s+to\s+(\S+)\s*(.*)$", clause)
        if not m:
            raise ScriptError("expected 'apply <rule> to <id> ...'", lineno)
        rule_name, target, clause_tail = m.group(1), m.group(2), m.group(3)
        rule = RULE_BY_NAME.get(rule_name)
        if rule is None:
            raise ScriptError(f"unknown rule {rule_name!r}", lineno)
        selector = _parse_selector(clause_tail, lineno)
        return Step(step_id, "apply", stated, refs=(ref(target),), rule=rule, selector=selector)

    raise ScriptError(f"unknown step kind in {clause!r}", lineno)


def _validate_declarations(script: DerivationScript) -> None:
    declared = {index for index, _, _ in script.declarations}
    used: set[int] = set()
    for _, definition in script.definitions:
        used |= variables_of(definition)
    for step in script.steps:
        used |= variables_of(step.stated)
        if step.selector is not None:
            if step.selector.factor is not None:
                used |= variables_of(step.selector.factor)
            if step.selector.substitution is not None:
                used |= variables_of(step.selector.substitution[1])
    missing = sorted(used - declared)
    if missing:
        names = ", ".join(LABELS.ascii_for(i) for i in missing)
        raise ScriptError(f"undeclared variables: {names}")


# ---------------------------------------------------------------------------
# checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepResult:
    step: Step
    verdict: Verdict

    @property
    def category(self) -> str:
        status = self.verdict.status
        if status == "ok":
            return "ok"
        if status == "rule-mismatch":
            return "warning:rule-mismatch"
        return f"error:{status}"


@dataclass(frozen=True)
class CheckReport:
    script: DerivationScript
    results: tuple[StepResult, ...]

    @property
    def ok_count(self) -> int:
        return sum(1 for r in self.results if r.verdict.status == "ok")

    @property
    def warning_count(self) -> int:
        return sum(1 for r in self.results if r.verdict.status == "rule-mismatch")

    @property
    def error_count(self) -> int:
        return sum(1 for r in self.results if r.verdict.is_error)

    @property
    def passed(self) -> bool:
        return self.error_count == 0

    @property
    def final_equation(self) -> Equation | None:
        if not self.script.steps:
            return None
        return self.script.steps[-1].stated

    def summary_line(self) -> str:
        total = len(self.results)
        parts = [f"{self.ok_count}/{total} ok"]
        if self.warning_count:
            noun = "warning" if self.warning_count == 1 else "warnings"
            parts.append(f"{self.warning_count} {noun}")
        if self.error_count:
            noun = "error" if self.error_count == 1 else "errors"
            parts.append(f"{self.error_count} {noun}")
        return ", ".join(parts)


def check_script(script: DerivationScript) -> CheckReport:
    """Replay every step; given equations are recorded as-is, cancel and rule
    steps are recomputed and compared, rearrangements are checked for
    equation equivalence.  Failed steps do not stop the run."""
    definitions = script.definitions_map
    effective: dict[str, Equation] = {}
    results: list[StepResult] = []

    for step in script.steps:
        if step.kind == "given":
            verdict = Verdict("ok")
        elif step.kind == "cancel":
            q1, q2 = effective[step.refs[0]], effective[step.refs[1]]
            verdict = _check_cancel(q1, q2, step.stated, definitions)
        elif step.kind == "apply":
            assert step.rule is not None and step.selector is not None
            app = RuleApplication(step.rule, step.selector, effective[step.refs[0]], step.stated)
            verdict = verify_application(app, definitions)
        else:  # rearrange
            verdict = _check_rearrange(effective[step.refs[0]], step.stated)
        results.append(StepResult(step, verdict))
        effective[step.id] = step.stated  # stated result feeds later steps even on failure

    return CheckReport(script, tuple(results))


def _check_cancel(
    q1: Equation, q2: Equation, stated: Equation, definitions: Mapping[int, Expr]
) -> Verdict:
    try:
        engine = cancel(q1, q2)
    except RuleError as exc:
        return Verdict("precondition", str(exc))
    if structurally_equal(engine, stated):
        return Verdict("ok", engine_result=engine)
    try:
        if semantically_equal(engine.lhs, stated.lhs) and semantically_equal(engine.rhs, stated.rhs):
            return Verdict(
                "rule-mismatch",
                "stated result differs in form from the cancel result but is semantically equal",
                engine_result=engine,
            )
    except ZeroDenominatorError as exc:
        return Verdict("semantic-fail", f"stated result is degenerate: {exc}", engine_result=engine)
    return Verdict(
        "semantic-fail",
        "stated result is not semantically equal to the cancel result",
        engine_result=engine,
        witness=difference_witness(engine, stated, definitions),
    )


def _check_rearrange(source: Equation, stated: Equation) -> Verdict:
    try:
        if equation_equivalent(source, stated):
            return Verdict("ok", engine_result=source)
    except ZeroDenominatorError as exc:
        return Verdict("precondition", str(exc))
    return Verdict(
        "semantic-fail",
        "stated equation is not equivalent to the step input",
        engine_result=source,
        witness=_rearrange_witness(source, stated),
    )


def _rearrange_witness(source: Equation, stated: Equation) -> Witness | None:
    """Find a binding satisfying the source equation under which the stated
    equation's two sides take different values."""
    resid = equation_residual_poly(source)
    resid_vars = sorted({idx for mono in resid for idx, _ in mono})
    solve_var = resid_vars[-1] if resid_vars else None
    all_vars = sorted(variables_of(source) | variables_of(stated))

    for base in (1, 2):
        bindings: dict[int, SurdNumber] = {}
        value = base
        for v in all_vars:
            if v == solve_var:
                continue
            bindings[v] = SurdNumber.from_rational(value)
            value += 1
        if solve_var is not None:
            coeffs = poly_univariate(resid, bindings, solve_var)
            linear = coeffs.get(1)
            constant = coeffs.get(0, SurdNumber())
            if set(coeffs) <= {0, 1} and linear is not None and not linear.is_zero:
                bindings[solve_var] = (-constant) / linear
            else:
                bindings[solve_var] = SurdNumber.from_rational(value)
        try:
            lhs_value = evaluate(stated.lhs, bindings)
            rhs_value = evaluate(stated.rhs, bindings)
        except (ZeroDenominatorError, UnboundVariableError):
            continue
        if lhs_value != rhs_value:
            trimmed = tuple(sorted((i, v) for i, v in bindings.items() if i in set(all_vars)))
            return Witness(trimmed, (("lhs", lhs_value), ("rhs", rhs_value)))
    return None


# ---------------------------------------------------------------------------
# final value extraction
# ---------------------------------------------------------------------------

def _lone_variable(e: Expr) -> int | None:
    if e.den or len(e.num) != 1:
        return None
    t = e.num[0]
    if t.sign == 1 and t.coeff == 1 and len(t.factors) == 1:
        atom, power = t.factors[0]
        if isinstance(atom, Variable) and power == 1:
            return atom.index
    return None


def final_value(
    script: DerivationScript, report: CheckReport, bindings: Mapping[int, SurdNumber]
) -> SurdNumber:
    """Evaluate the solved side of a passing script's final equation."""
    if not report.passed:
        raise NotSolvedFormError("the script does not pass, so its final equation is untrusted")
    final = report.final_equation
    if final is None:
        raise NotSolvedFormError("the script has no steps")
    if _lone_variable(final.rhs) is not None:
        return evaluate(final.lhs, bindings)
    if _lone_variable(final.lhs) is not None:
        return evaluate(final.rhs, bindings)
    raise NotSolvedFormError("the final equation does not isolate a single variable")


# ---------------------------------------------------------------------------
# report rendering
# ---------------------------------------------------------------------------

def _format_binding_value(v: SurdNumber) -> str:
    if v.is_rational and v.rational_part.denominator == 1:
        return str(v.rational_part.numerator)
    return f"{v} ({v.decimal_str(9)})"


def _render_witness(witness: Witness) -> str:
    bound = ", ".join(
        f"{LABELS.ascii_for(i)} = {_format_binding_value(v)}" for i, v in witness.bindings
    )
    values = ", ".join(f"{label} = {v.decimal_str(9)}" for label, v in witness.values)
    return f"witness: {bound}; {values}"


def render_report_text(report: CheckReport) -> str:
    lines: list[str] = []
    if report.script.title:
        lines.append(f"script: {report.script.title}")
    for result in report.results:
        step = result.step
        name = step.kind if step.rule is None else f"apply {step.rule.value}"
        stated = render_equation(step.stated)
        lines.append(f"  {step.id:<4} {name:<34} {result.category:<22} {stated}")
        verdict = result.verdict
        if verdict.status not in ("ok",) and verdict.message:
            lines.append(f"         note: {verdict.message}")
        if verdict.status == "rule-mismatch" and verdict.engine_result is not None:
            engine = verdict.engine_result
            rendered = (
                render_equation(engine) if isinstance(engine, Equation) else render_modern(engine)
            )
            lines.append(f"         engine result: {rendered}")
        if verdict.status == "semantic-fail":
            if isinstance(verdict.engine_result, Equation) and step.kind == "rearrange":
                lines.append(f"         input: {render_equation(verdict.engine_result)}")
            elif isinstance(verdict.engine_result, Equation):
                lines.append(f"         engine result: {render_equation(verdict.engine_result)}")
            if verdict.witness is not None:
                lines.append(f"         {_render_witness(verdict.witness)}")
    lines.append(f"summary: {report.summary_line()}")
    lines.append(f"result: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines)


def render_report_structured(report: CheckReport) -> str:
    lines: list[str] = []
    for result in report.results:
        step = result.step
        record: dict[str, object] = {
            "type": "step",
            "id": step.id,
            "kind": step.kind,
            "rule": step.rule.value if step.rule else None,
            "verdict": result.category,
            "stated": render_equation(step.stated),
        }
        verdict = result.verdict
        if verdict.message:
            record["note"] = verdict.message
        if verdict.engine_result is not None and verdict.status in ("rule-mismatch", "semantic-fail"):
            engine = verdict.engine_result
            record["engine"] = (
                render_equation(engine) if isinstance(engine, Equation) else render_modern(engine)
            )
        if verdict.witness is not None:
            record["witness"] = {
                "bindings": {
                    LABELS.ascii_for(i): str(v) for i, v in verdict.witness.bindings
                },
                "values": {label: v.decimal_str(9) for label, v in verdict.witness.values},
            }
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
    summary = {
        "type": "summary",
        "steps": len(report.results),
        "ok": report.ok_count,
        "warnings": report.warning_count,
        "errors": report.error_count,
        "pass": report.passed,
    }
    lines.append(json.dumps(summary, sort_keys=True, ensure_ascii=False))
    return "\n".join(lines)
