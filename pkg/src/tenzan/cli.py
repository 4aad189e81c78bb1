"""Command-line front end: check, identities, render, eval, units, export-corpus."""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from . import corpus
from .derivation import (
    check_script,
    parse_script,
    render_report_structured,
    render_report_text,
)
from .errors import (
    MalformedLengthError,
    MalformedNumeralError,
    NonSquarefreeRadicandError,
    ParseError,
    TenzanError,
    UnknownLabelError,
)
from .exprs import evaluate, variables_of
from .notation import (
    LABELS,
    format_traditional_length,
    parse_expr,
    parse_traditional_length,
    render_modern,
    render_sidewriting,
)
from .surds import SurdNumber


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps the per-subcommand copies of the global flags from
    # clobbering values already parsed before the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("text", "structured"), default=argparse.SUPPRESS,
        help="output style: human-readable text or line-delimited records",
    )
    common.add_argument("--ascii", action="store_true", default=argparse.SUPPRESS,
                        help="ASCII-only output")
    common.add_argument(
        "--precision", type=int, default=argparse.SUPPRESS, metavar="N",
        help="significant figures for decimal output (default 9)",
    )

    parser = argparse.ArgumentParser(
        prog="tenzan",
        parents=[common],
        description="Term rewriting and derivation checking for the tenzan jutsu system.",
    )
    parser.set_defaults(format="text", ascii=False, precision=9)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check a derivation script")
    p.add_argument("script", help="path to a script file, or corpus:<name>")

    sub.add_parser("identities", parents=[common], help="audit the conversion-identity tables")

    p = sub.add_parser("render", parents=[common], help="render an expression")
    p.add_argument("expr", help="inline expression text, or a path to a file holding one")
    p.add_argument("--style", choices=("modern", "sidewriting", "all"), default="modern")
    p.add_argument("--glyphs", choices=("kanji", "ascii"), default="kanji")

    p = sub.add_parser("eval", parents=[common], help="evaluate an expression exactly")
    p.add_argument("expr")
    p.add_argument("bindings", nargs="*", metavar="label=value",
                   help="variable bindings such as a=1 or b=7/3")

    p = sub.add_parser("units", parents=[common],
                       help="convert between kanji lengths and decimal sun")
    p.add_argument("value", help="a kanji length (五分八厘五毛) or a decimal number of sun")

    p = sub.add_parser("export-corpus", parents=[common], help="write the embedded scripts out")
    p.add_argument("--dir", default="corpus", help="target directory (default ./corpus)")

    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_check(args: argparse.Namespace) -> int:
    name = args.script
    if name.startswith("corpus:"):
        key = name[len("corpus:") :]
        if key not in corpus.SCRIPTS:
            print(f"error: unknown corpus script {key!r}; "
                  f"available: {', '.join(corpus.script_names())}", file=sys.stderr)
            return 2
        text = corpus.SCRIPTS[key]
    else:
        path = Path(name)
        if not path.is_file():
            print(f"error: no such script file: {name}", file=sys.stderr)
            return 2
        text = path.read_text(encoding="utf-8")
    script = parse_script(text)
    report = check_script(script)
    if args.format == "structured":
        print(render_report_structured(report))
    else:
        print(render_report_text(report))
    return 0 if report.passed else 1


def _cmd_identities(args: argparse.Namespace) -> int:
    entries = corpus.identity_table()
    counts = {"exact": 0, "caveated": 0, "flagged": 0}
    lines: list[str] = []
    for entry in entries:
        claimed = render_modern(entry.claimed)
        product = render_modern(entry.product)
        status = entry.status()
        computed = str(entry.computed_value)
        if status == "exact":
            counts["exact"] += 1
            note = f"exact (computed {computed})"
        elif status == "sign-flip" and entry.sign_caveat:
            counts["caveated"] += 1
            note = f"matches up to sign, as the caveat says (computed {computed})"
        else:
            counts["flagged"] += 1
            note = f"DISAGREES with the source table (computed {computed})"
        caveat = "  [sign caveat]" if entry.sign_caveat else ""
        if args.format == "structured":
            lines.append(json.dumps({
                "type": "identity", "claimed": claimed, "product": product,
                "caveat": entry.sign_caveat, "computed": computed, "status": status,
            }, sort_keys=True))
        else:
            lines.append(f"{claimed} = {product}{caveat}  ->  {note}")
    if args.format == "structured":
        lines.append(json.dumps({
            "type": "summary", "products": len(entries), **counts}, sort_keys=True))
    else:
        lines.append(
            f"summary: {len(entries)} products: {counts['exact']} exact, "
            f"{counts['caveated']} sign-flips (caveated), {counts['flagged']} flagged"
        )
    print("\n".join(lines))
    return 0


def _read_expr_argument(text: str) -> str:
    path = Path(text)
    try:
        if path.is_file():
            return path.read_text(encoding="utf-8").strip()
    except OSError:
        pass
    return text


def _cmd_render(args: argparse.Namespace) -> int:
    expr = parse_expr(_read_expr_argument(args.expr))
    glyphs = "ascii" if args.ascii else args.glyphs
    blocks: list[tuple[str, str]] = []
    if args.style in ("sidewriting", "all"):
        blocks.append(("side-writing", render_sidewriting(expr, glyphs)))
    if args.style == "all" and glyphs == "kanji":
        blocks.append(("transcription", render_sidewriting(expr, "ascii")))
    if args.style in ("modern", "all"):
        blocks.append(("modern", render_modern(expr)))
    if args.format == "structured":
        print(json.dumps({name: text for name, text in blocks}, sort_keys=True, ensure_ascii=False))
        return 0
    if len(blocks) == 1:
        print(blocks[0][1])
    else:
        print("\n\n".join(f"{name}:\n{text}" for name, text in blocks))
    return 0


def _parse_bindings(pairs: list[str]) -> dict[int, SurdNumber]:
    bindings: dict[int, SurdNumber] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ParseError(f"binding {pair!r} is not of the form label=value")
        label, value_text = pair.split("=", 1)
        index = LABELS.index_for(label.strip())
        if index is None:
            raise UnknownLabelError(f"unknown label {label!r}")
        value_expr = parse_expr(value_text)
        if variables_of(value_expr):
            raise ParseError(f"binding value {value_text!r} must be constant")
        bindings[index] = evaluate(value_expr, {})
    return bindings


def _cmd_eval(args: argparse.Namespace) -> int:
    expr = parse_expr(_read_expr_argument(args.expr))
    bindings = _parse_bindings(args.bindings)
    value = evaluate(expr, bindings)
    exact = str(value)
    decimal = value.decimal_str(args.precision)
    if args.format == "structured":
        print(json.dumps({"decimal": decimal, "exact": exact}, sort_keys=True))
    elif exact == decimal:
        print(exact)
    else:
        print(f"{exact} = {decimal}")
    return 0


def _format_sun(value: Fraction) -> str:
    text = format(Decimal(value.numerator) / Decimal(value.denominator), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def _cmd_units(args: argparse.Namespace) -> int:
    text = args.value.strip()
    if not text:
        raise MalformedLengthError("empty value")
    if all(ch.isdigit() or ch in "./" for ch in text):
        try:
            value = Fraction(Decimal(text)) if "." in text else Fraction(text)
        except (ValueError, ArithmeticError):
            raise MalformedLengthError(f"bad decimal value {text!r}") from None
        length = format_traditional_length(value)
        rendered = length.ascii() if args.ascii else length.kanji()
        if args.format == "structured":
            print(json.dumps({"kanji": length.kanji(), "ascii": length.ascii(),
                              "sun": _format_sun(length.value_in_sun)},
                             sort_keys=True, ensure_ascii=False))
        else:
            print(rendered)
        return 0
    length = parse_traditional_length(text)
    if args.format == "structured":
        print(json.dumps({"kanji": length.kanji(), "ascii": length.ascii(),
                          "sun": _format_sun(length.value_in_sun)},
                         sort_keys=True, ensure_ascii=False))
    else:
        print(f"{_format_sun(length.value_in_sun)} sun")
    return 0


def _cmd_export_corpus(args: argparse.Namespace) -> int:
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    for name in corpus.script_names():
        path = target / f"{name}.tzn"
        path.write_text(corpus.SCRIPTS[name], encoding="utf-8")
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "check": _cmd_check,
    "identities": _cmd_identities,
    "render": _cmd_render,
    "eval": _cmd_eval,
    "units": _cmd_units,
    "export-corpus": _cmd_export_corpus,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, MalformedLengthError, MalformedNumeralError,
            NonSquarefreeRadicandError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TenzanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
