"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input parse or validation error,
3 horizon exceeded (only with --strict), 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import forcing
from .jump import check_approx, jump_approx, jump_report
from .machine import AssemblyError, Program, assemble, disassemble
from .ordinal import format_ordinal
from .programs import (STDLIB_SOURCES, IllFounded, UnknownProgram, count_through_contract, order_type,
                       stdlib, stdlib_program, well_founded)
from .runner import (Diverges, Halted, HorizonExceeded, RunConfig, check_witness, classify_eventual,
                     dumps_trace, history_lines, outcome_to_dict, replay_check, run, trace_from_dict,
                     trace_to_dict)
from .tape import ExpressionError, Tape, format_tape, parse_generator, parse_spec, parse_tape

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_HORIZON, EXIT_INVARIANT = 0, 1, 2, 3, 4


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _horizon_flags(p):
    p.add_argument("--max-steps", type=_positive, default=4096,
                   help="segments per block at every level (default 4096)")
    p.add_argument("--tower", type=_positive, default=4,
                   help="highest limit level omega^k reachable (default 4)")
    p.add_argument("--max-history", type=_positive, default=512,
                   help="snapshots remembered per block for repeat detection (default 512)")
    p.add_argument("--strict", action="store_true", help="exit 3 when the horizon is exceeded")


def _format_flag(p):
    p.add_argument("--format", choices=("text", "structured"), default="text",
                   help="text lines or JSON (default text)")


def _config(args) -> RunConfig:
    return RunConfig(args.max_steps, args.tower, args.max_history)


def _load_program(ref: str) -> Program:
    if ref in STDLIB_SOURCES or ref == "count-through-semi":
        return stdlib_program(ref)
    if not os.path.exists(ref):
        raise _Fail(EXIT_INPUT, f"no stdlib program or file named {ref!r}")
    with open(ref) as fh:
        text = fh.read()
    try:
        return assemble(text)
    except AssemblyError as exc:
        raise _Fail(EXIT_INPUT, f"{ref}: {exc}") from None


def _tape(text: str) -> Tape:
    try:
        return parse_tape(text)
    except (ExpressionError, ValueError) as exc:
        raise _Fail(EXIT_INPUT, f"bad tape expression: {exc}") from None


def outcome_text(o) -> str:
    if isinstance(o, Halted):
        return f"HALTED stage={format_ordinal(o.stage)} output={format_tape(o.output)}"
    if isinstance(o, Diverges):
        out = "oscillating" if o.stabilized_output is None else format_tape(o.stabilized_output)
        return f"DIVERGES level={o.witness.level} output={out}"
    return f"HORIZON stage={format_ordinal(o.stage_reached)}"


def _emit(args, text: str, data) -> None:
    if args.format == "structured":
        print(json.dumps(data, indent=1, sort_keys=True))
    else:
        print(text)


def _horizon_exit(args, outcome) -> int:
    return EXIT_HORIZON if args.strict and isinstance(outcome, HorizonExceeded) else EXIT_OK


# -- subcommands -------------------------------------------------------------------

def cmd_asm(args) -> int:
    p = _load_program(args.file)
    if args.format == "structured":
        rules = [{"state": s, "scanned": list(sc), "write": list(a.write), "move": a.move, "next": a.next}
                 for (s, sc), a in sorted(p.transitions.items())]
        _emit(args, "", {"states": list(p.states), "uses_oracle": p.uses_oracle, "rules": rules})
    else:
        sys.stdout.write(disassemble(p))
    return EXIT_OK


def _run(args):
    p = _load_program(args.program)
    x = _tape(args.input)
    oracle = None
    if args.oracle is not None:
        try:
            oracle = parse_generator(args.oracle)
        except (ExpressionError, ValueError) as exc:
            raise _Fail(EXIT_INPUT, f"bad oracle expression: {exc}") from None
    if p.uses_oracle != (oracle is not None):
        raise _Fail(EXIT_INPUT, "--oracle must be given exactly when the program scans an oracle")
    outcome, trace = run(p, x, oracle, _config(args))
    if replay_check(p, trace):
        raise _Fail(EXIT_INVARIANT, "trace does not replay: " + "; ".join(replay_check(p, trace)[:3]))
    if isinstance(outcome, Diverges) and not check_witness(outcome.witness):
        raise _Fail(EXIT_INVARIANT, "divergence witness does not regenerate its entry")
    return outcome, trace


def cmd_run(args) -> int:
    outcome, trace = _run(args)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(dumps_trace(trace) + "\n")
    _emit(args, outcome_text(outcome), trace_to_dict(trace)["outcome"])
    return _horizon_exit(args, outcome)


def cmd_classify(args) -> int:
    outcome, _ = _run(args)
    kind, tape = classify_eventual(outcome)
    text = kind if tape is None else f"{kind} {format_tape(tape)}"
    _emit(args, text, {"class": kind, "output": None if tape is None else format_tape(tape)})
    return _horizon_exit(args, outcome)


def cmd_jump(args) -> int:
    a = jump_approx(_tape(args.input), range(args.start, args.start + args.count), _config(args),
                    workers=args.workers)
    if args.verify and check_approx(a):
        raise _Fail(EXIT_INVARIANT, "; ".join(check_approx(a)[:3]))
    report = jump_report(a, args.format == "structured")
    _emit(args, report, report)
    return EXIT_HORIZON if args.strict and a.unknown else EXIT_OK


def cmd_wo(args) -> int:
    try:
        spec = parse_spec(args.spec)
    except ExpressionError as exc:
        raise _Fail(EXIT_INPUT, f"bad order spec: {exc}") from None
    wf = well_founded(spec)
    data = {"well_founded": wf}
    lines = [f"oracle well_founded={str(wf).lower()}"]
    try:
        ot = format_ordinal(order_type(spec))
        data["order_type"] = ot
        lines[0] += f" order_type={ot}"
    except IllFounded:
        data["order_type"] = None
    code = EXIT_OK
    if args.run_count_through:
        verdict = count_through_contract(spec, _config(args))
        data["engine"] = outcome_to_dict(verdict.outcome)
        data["verdict"] = verdict.label
        lines.append(f"engine {outcome_text(verdict.outcome)}")
        lines.append(f"verdict {verdict.label}")
        if not verdict.sound:
            code = EXIT_INVARIANT
        elif args.strict and isinstance(verdict.outcome, HorizonExceeded):
            code = EXIT_HORIZON
    _emit(args, "\n".join(lines), data)
    return code


def cmd_force(args) -> int:
    p = _load_program(args.program)
    if p.uses_oracle:
        raise _Fail(EXIT_INPUT, "forcing needs a program without an oracle")
    cfg = _config(args)
    lines, tables = [], []
    try:
        t = forcing.initial_table(p, args.window, args.depth)
        history = [t]
        while len(history) <= args.stages and not t.all_halted():
            t = forcing.boolean_step(p, t)
            history.append(t)
        tables = list(history)
        try:
            lasso_at = next(k for k in range(1, len(history))
                            if any(history[n].branches == history[k].branches for n in range(k)))
            tables.append(forcing.boolean_limit(history[:lasso_at + 1]))
        except StopIteration:
            pass
    except forcing.ForcingHorizon as exc:
        raise _Fail(EXIT_HORIZON if args.strict else EXIT_INPUT, f"forcing horizon: {exc}") from None
    for t in tables:
        problems = forcing.validate_table(t)
        if problems:
            raise _Fail(EXIT_INVARIANT, f"stage {format_ordinal(t.stage)}: {problems[0]}")
        lines += forcing.dump_table(t)
    data = {"tables": [{"stage": format_ordinal(t.stage),
                        "facts": {forcing.format_fact(f): list(a) for f, a in t.entries.items()},
                        "generic": {str(n): list(a) for n, a in t.generic.items()}} for t in tables]}
    code = EXIT_OK
    if args.check is not None:
        report = forcing.collapse_check(p, _tape(args.check), cfg, args.stages, args.window, args.depth)
        data["collapse"] = {"passed": report.passed, "problems": list(report.problems),
                            "aborted": report.aborted, "limit_checked": report.limit_checked}
        lines.append("COLLAPSE " + ("PASS" if report.passed else "FAIL")
                     + f"\tstages={report.stages_checked}\tlimit={str(report.limit_checked).lower()}")
        lines += [f"PROBLEM\t{msg}" for msg in report.problems]
        if report.aborted:
            lines.append(f"ABORTED\t{report.aborted}")
        if report.problems:
            code = EXIT_INVARIANT
    _emit(args, "\n".join(lines), data)
    return code


def cmd_stdlib(args) -> int:
    entries = stdlib()
    if args.name:
        matches = [e for e in entries if e.name == args.name]
        if not matches:
            raise _Fail(EXIT_INPUT, f"unknown stdlib program {args.name!r}")
        sys.stdout.write(disassemble(matches[0].program))
        return EXIT_OK
    rows = [(e.name, len(e.program.states), e.behavior) for e in entries]
    _emit(args, "\n".join(f"{n}\t{k}\t{b}" for n, k, b in rows),
          [{"name": n, "states": k, "behavior": b} for n, k, b in rows])
    return EXIT_OK


def cmd_history(args) -> int:
    try:
        with open(args.trace) as fh:
            trace = trace_from_dict(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise _Fail(EXIT_INPUT, f"cannot read trace {args.trace}: {exc}") from None
    lines = history_lines(trace)
    _emit(args, "\n".join(lines), lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ittm", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("asm", help="validate and disassemble a .itm file")
    p.add_argument("file")
    _format_flag(p)
    p.set_defaults(func=cmd_asm)

    for name, func, text in (("run", cmd_run, "run a program on an input tape"),
                             ("classify", cmd_classify, "halts / stabilizes / oscillates / unknown")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--program", required=True, help="stdlib name or .itm file")
        p.add_argument("--input", default="const(0)", help="tape expression, e.g. 'periodic(1;01){3:1}'")
        p.add_argument("--oracle", help="oracle generator expression for oracle programs")
        if name == "run":
            p.add_argument("--trace", help="write the structured trace (JSON) here")
        _horizon_flags(p)
        _format_flag(p)
        p.set_defaults(func=func)

    p = sub.add_parser("jump", help="approximate the set of programs halting on an input")
    p.add_argument("--input", default="const(0)")
    p.add_argument("--start", type=int, default=0, help="first program index")
    p.add_argument("--count", type=_positive, default=100, help="number of indices")
    p.add_argument("--workers", type=int, default=0, help="worker processes (0: run in-process)")
    p.add_argument("--verify", action="store_true", help="replay every verdict")
    _horizon_flags(p)
    _format_flag(p)
    p.set_defaults(func=cmd_jump)

    p = sub.add_parser("wo", help="native well-foundedness verdict for an order spec")
    p.add_argument("--spec", required=True, help="e.g. 'sum(omega,omega)'")
    p.add_argument("--run-count-through", action="store_true", help="also run count-through-semi")
    _horizon_flags(p)
    _format_flag(p)
    p.set_defaults(func=cmd_wo)

    p = sub.add_parser("force", help="forced-fact tables over a generic input")
    p.add_argument("--program", required=True)
    p.add_argument("--stages", type=_positive, default=50, help="successor stages (default 50)")
    p.add_argument("--window", type=_positive, default=forcing.DEFAULT_WINDOW)
    p.add_argument("--depth", type=_positive, default=forcing.DEFAULT_DEPTH)
    p.add_argument("--check", metavar="INPUT", help="collapse check against this concrete tape")
    _horizon_flags(p)
    _format_flag(p)
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("stdlib", help="list the standard programs, or show one")
    p.add_argument("name", nargs="?")
    _format_flag(p)
    p.set_defaults(func=cmd_stdlib)

    p = sub.add_parser("history", help="export the history of a structured trace file")
    p.add_argument("trace")
    _format_flag(p)
    p.set_defaults(func=cmd_history)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"ittm: {exc}", file=sys.stderr)
        return exc.code
    except UnknownProgram as exc:
        print(f"ittm: unknown program {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
