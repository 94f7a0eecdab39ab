"""Command-line interface.

Exit codes: 0 sat/true/success, 1 unsat/false, 2 unknown or budget
exhausted, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .formula import agents_of, build_axiom
from .kripke import KripkeModel, close_frame, model_check
from .logic import FrameCondition, LogicSpec
from .oracle import (
    NoModelUpTo,
    SearchBudget,
    Witness,
    bounded_sat,
    generate_corpus,
    sample_corpus,
)
from .syntax import FormulaSyntaxError, parse
from .tableau import Sat, TableauBounds, TableauError, Unsat, run_tableau
from .transfer import plan
from .translations import TRANSLATION_NAMES, TranslationError, translate

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _logic(text: str) -> LogicSpec:
    try:
        return LogicSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _agents(text: str) -> list[str]:
    names = [a.strip() for a in text.split(",") if a.strip()]
    if not names:
        raise UsageError("agent list is empty")
    return names


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _seed(args) -> int:
    env = os.environ.get("MUMOD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MUMOD_SEED must be an integer, got {env!r}") from None
    return args.seed


# ---------------------------------------------------------------- commands

def cmd_parse(args) -> int:
    agents = _agents(args.agents) if args.agents else None
    print(parse(args.formula, agents))
    return EXIT_OK


def cmd_mc(args) -> int:
    model = KripkeModel.load(args.model)
    f = parse(args.formula, model.agents)
    if args.state is None:
        if model.designated is None:
            raise UsageError("model has no designated state; pass --state")
        state = model.designated
    else:
        key = args.state
        if key.isdigit() and key not in model.states:
            key = int(key)
        state = model.index(key)
    result = model_check(model, state, f)
    print("true" if result else "false")
    return EXIT_OK if result else EXIT_NO


def cmd_sat(args) -> int:
    spec = _logic(args.logic)
    f = parse(args.formula, spec.agents)
    if args.engine == "oracle":
        return _report_oracle(bounded_sat(f, spec, SearchBudget(args.max_states, args.max_props, args.cap)), args)
    bounds = TableauBounds(kappa=args.kappa, prefix_cap=args.prefix_cap)
    verdict = run_tableau(f, spec, bounds)
    if isinstance(verdict, Sat):
        print("sat")
        text = json.dumps(verdict.model.to_json(), indent=2, ensure_ascii=False) + "\n"
        if args.out:
            _write(args.out, text)
            print(f"witness: {args.out}")
        else:
            print(text, end="")
        _write(args.transcript, "\n".join(verdict.transcript) + "\n")
        return EXIT_OK
    if isinstance(verdict, Unsat):
        note = " (closure relies on the kappa bound)" if verdict.depends_on_kappa else ""
        print(f"unsat{note}")
        if args.out:
            _write(args.out, verdict.proof.dumps() + "\n")
            print(f"proof: {args.out}")
        _write(args.transcript, "\n".join(verdict.transcript) + "\n")
        return EXIT_NO
    print(f"unknown: {verdict.reason}")
    _write(args.transcript, "\n".join(verdict.transcript) + "\n")
    return EXIT_UNKNOWN


def _report_oracle(result, args) -> int:
    if isinstance(result, Witness):
        print(result.describe())
        text = json.dumps(result.model.to_json(), indent=2, ensure_ascii=False) + "\n"
        if args.out:
            _write(args.out, text)
            print(f"witness: {args.out}")
        else:
            print(text, end="")
        return EXIT_OK
    print(result.describe())
    return EXIT_NO if isinstance(result, NoModelUpTo) else EXIT_UNKNOWN


def cmd_oracle(args) -> int:
    spec = _logic(args.logic)
    f = parse(args.formula, spec.agents)
    return _report_oracle(bounded_sat(f, spec, SearchBudget(args.max_states, args.max_props, args.cap)), args)


def _translation_options(args) -> dict:
    options = {}
    if args.name == "transitive" and args.literal:
        options["literal"] = True
    if args.name == "embed":
        options["labels"] = args.labels
        options["anchor"] = not args.no_anchor
    return options


def cmd_translate(args) -> int:
    A = _agents(args.agents)
    f = parse(args.formula)
    universe = _agents(args.all_agents) if args.all_agents else sorted(set(A) | agents_of(f))
    missing = (set(A) | agents_of(f)) - set(universe)
    if missing:
        raise UsageError(f"agents {sorted(missing)} missing from --all-agents")
    print(translate(args.name, f, A, universe, args.condition, **_translation_options(args)))
    return EXIT_OK


def cmd_closure(args) -> int:
    model = KripkeModel.load(args.model)
    if args.agent not in model.agents:
        raise UsageError(f"model has no agent {args.agent!r}")
    closed = close_frame(model, args.agent, FrameCondition.parse(args.condition))
    text = json.dumps(closed.to_json(), indent=2, ensure_ascii=False) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_axioms(args) -> int:
    arg = parse(args.arg) if args.arg else None
    print(build_axiom(FrameCondition.parse(args.condition), args.agent, arg))
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    target = _logic(args.target)
    A = _agents(args.agents)
    p = plan(args.name, A, target, args.condition, **_translation_options(args))
    props_ = _agents(args.props)
    kind = {"one-step": dict(recursion_free=True), "symmetric": dict(mu_free=True)}.get(args.name, {})
    corpus = generate_corpus(args.size, target.agents, props_, _seed(args), args.count, **kind)
    if args.sample:
        corpus = sample_corpus(corpus, args.sample, _seed(args))
    target_states = args.target_states or (3 * args.source_states if args.name == "embed" else args.source_states)
    report = p.cross_check(corpus, SearchBudget(args.source_states, args.max_props, args.cap),
                           SearchBudget(target_states, args.max_props + 2, args.cap))
    text = report.to_jsonl()
    if args.out:
        _write(args.out, text)
    else:
        print(text, end="")
    summary = report.summary()
    print(f"{args.name} {p.source} -> {p.target}: " + ", ".join(f"{k} {v}" for k, v in summary.items()),
          file=sys.stderr)
    return EXIT_NO if summary["disagree"] else EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mumod", description="Multi-agent modal mu-calculus workbench.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="print the normalised formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--agents", help="comma-separated agent names to accept")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("mc", help="model check a formula on a JSON model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--state", help="state name or index (default: the designated state)")
    p.set_defaults(func=cmd_mc)

    def budget_flags(p):
        p.add_argument("--max-states", type=int, default=3)
        p.add_argument("--max-props", type=int, default=3)
        p.add_argument("--cap", type=int, default=4_000_000, help="enumeration cap (models per size)")

    p = sub.add_parser("sat", help="decide satisfiability")
    p.add_argument("--formula", required=True)
    p.add_argument("--logic", required=True, help='e.g. "a:K; b:S5" or "a:{D,4}"')
    p.add_argument("--engine", choices=("tableau", "oracle"), default="tableau")
    p.add_argument("--kappa", type=int)
    p.add_argument("--prefix-cap", type=int)
    budget_flags(p)
    p.add_argument("--out", help="write the witness model or proof JSON here")
    p.add_argument("--transcript", help="write the tableau transcript here")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("oracle", help="bounded model search")
    p.add_argument("--formula", required=True)
    p.add_argument("--logic", required=True)
    budget_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    def translation_flags(p):
        p.add_argument("--name", required=True, choices=TRANSLATION_NAMES)
        p.add_argument("--agents", required=True, help="the agent subset A, comma-separated")
        p.add_argument("--condition", help="frame condition for the one-step translation")
        p.add_argument("--literal", action="store_true", help="transitive: all-agents invariance")
        p.add_argument("--labels", default="cycle3", choices=("cycle3", "cycle2", "all"))
        p.add_argument("--no-anchor", action="store_true", help="embed: omit the root label")

    p = sub.add_parser("translate", help="apply a translation")
    translation_flags(p)
    p.add_argument("--formula", required=True)
    p.add_argument("--all-agents", help="the full agent set (default: A plus the formula's agents)")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("closure", help="close one agent's relation under a frame condition")
    p.add_argument("--model", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--condition", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("axioms", help="print an axiom schema")
    p.add_argument("--condition", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--arg", help="formula to instantiate the schema with (default: p)")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("crosscheck", help="oracle cross-check of a translation on a corpus")
    translation_flags(p)
    p.add_argument("--target", required=True, help="target logic; the source adds the translation's condition")
    p.add_argument("--size", type=int, default=4, help="exhaustive corpus up to this many symbols")
    p.add_argument("--count", type=int, default=0, help="extra seeded random formulas")
    p.add_argument("--sample", type=int, default=0, help="keep a seeded sample of this many formulas")
    p.add_argument("--props", default="p")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source-states", type=int, default=3)
    p.add_argument("--target-states", type=int, help="default: source bound (three times it for embed)")
    p.add_argument("--max-props", type=int, default=2)
    p.add_argument("--cap", type=int, default=4_000_000)
    p.add_argument("--out", help="write the JSON-lines report here")
    p.set_defaults(func=cmd_crosscheck)
    return ap


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormulaSyntaxError, TranslationError, TableauError, ValueError, OSError) as exc:
        print(f"mumod {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: list[str] | None = None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
