"""Command-line interface.

Subcommands: run, trace, compile, exec, verify, quickcheck.

Exit codes: 0 success, 1 parse/input error, 2 fuel exhausted, 3 stack
underflow, 4 counterexample found, 5 verdict unknown.  Setting IMP_COLOR=0
disables output styling.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bigstep import FuelExhausted, big_step
from .harness import DEFAULT_SEED, GenConfig, SuiteResult, suite_compiler, suite_hoare, suite_small_big
from .hoare import (
    CounterexampleFound,
    MissingAnnotationError,
    Mode,
    Unknown,
    Valid,
    erase,
    verify,
)
from .machine import (
    Load,
    MachineConfig,
    StopReason,
    Store,
    StuckOrExhausted,
    ccomp,
    execute,
)
from .parser import (
    ParseError,
    parse_annotated_com,
    parse_asm,
    parse_assertion,
    pretty_asm,
    pretty_assertion,
)
from .smallstep import ProgConfig, TraceStatus, star_run, trace_records
from .syntax import State, vars_of

EXIT_OK = 0
EXIT_PARSE_ERROR = 1
EXIT_FUEL_EXHAUSTED = 2
EXIT_STACK_UNDERFLOW = 3
EXIT_COUNTEREXAMPLE = 4
EXIT_UNKNOWN = 5

_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


def _color_enabled() -> bool:
    if os.environ.get("IMP_COLOR", "") == "0":
        return False
    return hasattr(sys.stdout, "isatty") and sys.stdout.isatty()


def _style(text: str, code: str) -> str:
    if _color_enabled():
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _good(text: str) -> str:
    return _style(text, "32")


def _bad(text: str) -> str:
    return _style(text, "31")


def parse_state_spec(spec: str) -> State:
    """Parse `x=1,y=-2` into a state; duplicate names are rejected."""
    pairs: list[tuple[str, int]] = []
    seen: set[str] = set()
    if not spec.strip():
        return State()
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if "=" not in chunk:
            raise ValueError(f"bad state binding {chunk!r}, expected name=value")
        name, _, value_text = chunk.partition("=")
        name = name.strip()
        value_text = value_text.strip()
        if not name or name[0].isdigit() or not set(name) <= _IDENT_CHARS:
            raise ValueError(f"bad identifier {name!r} in state spec")
        if name in seen:
            raise ValueError(f"duplicate identifier {name!r} in state spec")
        seen.add(name)
        try:
            value = int(value_text)
        except ValueError:
            raise ValueError(f"bad integer {value_text!r} for {name!r} in state spec") from None
        pairs.append((name, value))
    return State(pairs)


def _read_file(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _print_state_lines(names: set[str], state: State) -> None:
    for name in sorted(names):
        print(f"{name}={state.read(name)}")


def _fail(message: str) -> int:
    print(_bad(message), file=sys.stderr)
    return EXIT_PARSE_ERROR


# --- subcommands ----------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    try:
        text = _read_file(args.file)
        command = erase(parse_annotated_com(text))
        initial = parse_state_spec(args.state)
    except (OSError, ParseError, ValueError) as err:
        return _fail(f"{args.file}: {err}")
    outcome = big_step(command, initial, args.fuel)
    if type(outcome) is FuelExhausted:
        print(f"fuel exhausted after {args.fuel} rule applications", file=sys.stderr)
        return EXIT_FUEL_EXHAUSTED
    _print_state_lines(vars_of(command) | initial.bound_names(), outcome.final)
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    try:
        text = _read_file(args.file)
        command = erase(parse_annotated_com(text))
        initial = parse_state_spec(args.state)
    except (OSError, ParseError, ValueError) as err:
        return _fail(f"{args.file}: {err}")
    trace = star_run(ProgConfig(command, initial), args.max_steps)
    records = trace_records(trace)
    if args.format == "machine-readable":
        for record in records:
            print(json.dumps(record, sort_keys=True))
        print(json.dumps({"status": trace.status.value}, sort_keys=True))
    else:
        for record in records:
            bindings = ", ".join(f"{k}={v}" for k, v in sorted(record["state_bindings"].items()))
            print(f"{record['step_index']}: {record['command_text']} | {bindings}")
        print(f"status: {trace.status.value}")
    if trace.status is TraceStatus.FUEL_EXHAUSTED:
        return EXIT_FUEL_EXHAUSTED
    return EXIT_OK


def cmd_compile(args: argparse.Namespace) -> int:
    try:
        text = _read_file(args.file)
        command = erase(parse_annotated_com(text))
    except (OSError, ParseError) as err:
        return _fail(f"{args.file}: {err}")
    asm_text = pretty_asm(ccomp(command))
    if args.output:
        Path(args.output).write_text(asm_text, encoding="utf-8")
    else:
        sys.stdout.write(asm_text)
    return EXIT_OK


def cmd_exec(args: argparse.Namespace) -> int:
    try:
        text = _read_file(args.file)
        program = parse_asm(text)
        initial = parse_state_spec(args.state)
    except (OSError, ParseError, ValueError) as err:
        return _fail(f"{args.file}: {err}")
    start = MachineConfig(args.pc, initial, ())
    outcome = execute(program, start, args.max_steps)
    if type(outcome) is StuckOrExhausted:
        if outcome.reason is StopReason.STACK_UNDERFLOW:
            print(
                f"stack underflow at pc={outcome.last.pc}"
                f" after {outcome.steps_taken} steps",
                file=sys.stderr,
            )
            return EXIT_STACK_UNDERFLOW
        print(
            f"fuel exhausted after {outcome.steps_taken} steps at pc={outcome.last.pc}",
            file=sys.stderr,
        )
        return EXIT_FUEL_EXHAUSTED
    names = {
        instr.name for instr in program if type(instr) in (Load, Store)
    } | initial.bound_names()
    print(f"pc={outcome.final.pc}")
    _print_state_lines(names, outcome.final.state)
    print(f"stack={list(outcome.final.stack)}")
    return EXIT_OK


def _verdict_lines(verdict) -> tuple[str, list[str]]:
    t = type(verdict)
    if t is Valid:
        return _good("valid"), []
    if t is CounterexampleFound:
        bindings = ", ".join(f"{k}={v}" for k, v in verdict.state.items()) or "all variables = 0"
        return _bad("counterexample"), [f"  counterexample: {bindings}"]
    return _bad("unknown"), [f"  detail: {verdict.detail}"]


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        text = _read_file(args.file)
        annotated = parse_annotated_com(text)
        pre = parse_assertion(args.pre)
        post = parse_assertion(args.post)
    except (OSError, ParseError) as err:
        return _fail(f"{args.file}: {err}")
    mode = Mode.TOTAL if args.total else Mode.PARTIAL
    try:
        report = verify(annotated, pre, post, args.bound, args.fuel, mode)
    except MissingAnnotationError as err:
        return _fail(f"{args.file}: {err}")
    print(f"mode: {report.mode.value}")
    print(f"bound: {report.bound}")
    print(f"computed precondition: {pretty_assertion(report.precondition)}")
    saw_counterexample = False
    saw_unknown = False
    for entry in report.vcs:
        word, extra = _verdict_lines(entry.verdict)
        print(f"vc {entry.label}: {pretty_assertion(entry.formula)} -- {word}")
        for line in extra:
            print(line)
        saw_counterexample |= type(entry.verdict) is CounterexampleFound
        saw_unknown |= type(entry.verdict) is Unknown
    word, extra = _verdict_lines(report.triple_verdict)
    print(f"triple: {word}")
    for line in extra:
        print(line)
    saw_counterexample |= type(report.triple_verdict) is CounterexampleFound
    saw_unknown |= type(report.triple_verdict) is Unknown
    if saw_counterexample:
        return EXIT_COUNTEREXAMPLE
    if saw_unknown:
        return EXIT_UNKNOWN
    return EXIT_OK


def _print_suite(name: str, result: SuiteResult) -> None:
    line = (
        f"[{name}] run={result.cases_run} passed={result.cases_passed}"
        f" skipped-divergent={result.cases_skipped_divergent}"
        f" failures={len(result.failures)}"
    )
    print(line if not result.failures else _bad(line))
    for failure in result.failures:
        print(f"  failure case={failure.case_index} seed={failure.seed}")
        print(f"    program: {failure.program_text}")
        print(f"    initial state: {failure.initial_state!r}")
        print(f"    expected: {failure.expectation}")
        print(f"    observed: {failure.observed}")


def cmd_quickcheck(args: argparse.Namespace) -> int:
    cfg = GenConfig(seed=args.seed)
    chosen = ("small-big", "compiler", "hoare") if args.suite == "all" else (args.suite,)
    total_failures = 0
    for name in chosen:
        if name == "small-big":
            result = suite_small_big(args.cases, cfg)
        elif name == "compiler":
            result = suite_compiler(args.cases, cfg)
        else:
            result = suite_hoare(args.cases, cfg)
        _print_suite(name, result)
        total_failures += len(result.failures)
    return EXIT_OK if total_failures == 0 else EXIT_COUNTEREXAMPLE


# --- argument parsing ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imptool",
        description="Run, trace, compile, execute, and verify IMP programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evaluate a program with the big-step semantics")
    run_p.add_argument("file")
    run_p.add_argument("--state", default="", help="initial bindings, e.g. x=1,y=-2")
    run_p.add_argument("--fuel", type=int, default=1_000_000)
    run_p.set_defaults(func=cmd_run)

    trace_p = sub.add_parser("trace", help="print the small-step trace of a program")
    trace_p.add_argument("file")
    trace_p.add_argument("--state", default="")
    trace_p.add_argument("--max-steps", type=int, default=10_000)
    trace_p.add_argument("--format", choices=("text", "machine-readable"), default="text")
    trace_p.set_defaults(func=cmd_trace)

    compile_p = sub.add_parser("compile", help="compile a program to stack-machine assembly")
    compile_p.add_argument("file")
    compile_p.add_argument("-o", "--output", default=None)
    compile_p.set_defaults(func=cmd_compile)

    exec_p = sub.add_parser("exec", help="execute a stack-machine assembly file")
    exec_p.add_argument("file")
    exec_p.add_argument("--state", default="")
    exec_p.add_argument("--max-steps", type=int, default=1_000_000)
    exec_p.add_argument("--pc", type=int, default=0)
    exec_p.set_defaults(func=cmd_exec)

    verify_p = sub.add_parser("verify", help="check Hoare triples for an annotated program")
    verify_p.add_argument("file")
    verify_p.add_argument("--pre", default="true")
    verify_p.add_argument("--post", default="true")
    verify_p.add_argument("--bound", type=int, default=5)
    verify_p.add_argument("--fuel", type=int, default=10_000)
    verify_p.add_argument("--total", action="store_true")
    verify_p.set_defaults(func=cmd_verify)

    quick_p = sub.add_parser("quickcheck", help="run the differential property suites")
    quick_p.add_argument("--suite", choices=("small-big", "compiler", "hoare", "all"), default="all")
    quick_p.add_argument("--cases", type=int, default=100)
    quick_p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    quick_p.set_defaults(func=cmd_quickcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
