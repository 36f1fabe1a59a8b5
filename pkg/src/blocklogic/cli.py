"""Command-line entry point: run, assert, verify and fuzz."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .assertion import Bounds, check
from .harness import GenParams, fuzz_axiom, fuzz_frame_lemmas, fuzz_frame_rule
from .hoare import AXIOMS, axiom_id, check_proof
from .interp import DEFAULT_FUEL, Fault, Final, describe_outcome, exec_command, trace
from .state import EMPTY, StateFormatError, parse_state
from .syntax import DanglingReference, ParseError, parse_assertion, parse_program, parse_proof_script

EXIT_OK, EXIT_FAIL, EXIT_FUEL, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    """Bad flags, unreadable input or malformed text: exit status 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2, which we reserve for OutOfFuel
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {v}")
    return v


def _positive(text: str) -> int:
    v = _nonneg(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _value_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        pair = (int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not sep or pair[0] > pair[1]:
        raise argparse.ArgumentTypeError(f"expected LO:HI with LO <= HI, got {text!r}")
    return pair


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="also write the report to PATH")
    common.add_argument("--quiet", action="store_true", help="print nothing; rely on the exit status")

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--extra-locs", type=_nonneg, default=2, metavar="N")
    bounds.add_argument("--extra-blocs", type=_nonneg, default=2, metavar="N")
    bounds.add_argument("--max-file-len", type=_nonneg, default=4, metavar="N")
    bounds.add_argument("--value-range", type=_value_range, default=(-8, 8), metavar="LO:HI")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--trials", type=_positive, default=500, metavar="N")
    seeded.add_argument("--seed", type=_nonneg, default=0, metavar="N")

    p = _Parser(prog="blocklogic", description="Executable two-tier heap logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", parents=[common], help="execute a program")
    r.add_argument("program")
    r.add_argument("--state", metavar="PATH", help="initial state (default: everything empty)")
    r.add_argument("--trace", action="store_true", help="print one line per atomic step")
    r.add_argument("--fuel", type=_nonneg, default=DEFAULT_FUEL, metavar="N")

    a = sub.add_parser("assert", parents=[common, bounds], help="check an assertion in a state")
    a.add_argument("state")
    a.add_argument("assertion")

    v = sub.add_parser("verify", parents=[common, bounds], help="check a proof script")
    v.add_argument("script")
    v.add_argument("--trials", type=_positive, default=120, metavar="N",
                   help="candidate states per bounded entailment (default 120)")
    v.add_argument("--seed", type=_nonneg, default=0, metavar="N")
    v.add_argument("--fuel", type=_nonneg, default=200, metavar="N")

    f = sub.add_parser("fuzz", parents=[common, bounds, seeded], help="run a soundness suite")
    f.add_argument("suite", help="axioms, axiom:<id>, frame-lemmas, frame-rule or all")
    f.add_argument("--fuel", type=_nonneg, default=200, metavar="N")
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _bounds(ns) -> Bounds:
    return Bounds(ns.extra_locs, ns.extra_blocs, ns.max_file_len, tuple(ns.value_range))


def _cmd_run(ns) -> tuple[int, str]:
    prog = parse_program(_read(ns.program))
    start = parse_state(_read(ns.state)) if ns.state else EMPTY
    if ns.trace:
        t = trace(prog, start, ns.fuel)
        out, text = t.outcome, t.render()
    else:
        out = exec_command(prog, start, ns.fuel)
        text = describe_outcome(out)
    code = EXIT_OK if isinstance(out, Final) else EXIT_FAIL if isinstance(out, Fault) else EXIT_FUEL
    return code, text


def _cmd_assert(ns) -> tuple[int, str]:
    st = parse_state(_read(ns.state))
    p = parse_assertion(_read(ns.assertion))
    rep = check(st, p, _bounds(ns))
    lines = ["true" if rep.value else "false"]
    if rep.bounded:
        b = _bounds(ns)
        lines.append(f"caveat: quantifiers searched within bounds extra_locs={b.extra_locs} "
                     f"extra_blocs={b.extra_blocs} max_file_len={b.max_file_len} "
                     f"value_range={b.value_range[0]}:{b.value_range[1]}")
    lines += [f"note: {d}" for d in rep.diagnostics + rep.warnings]
    return (EXIT_OK if rep.value else EXIT_FAIL), "\n".join(lines)


def _cmd_verify(ns) -> tuple[int, str, Optional[str]]:
    script = parse_proof_script(_read(ns.script))
    rep = check_proof(script, _bounds(ns), trials=ns.trials, seed=ns.seed, fuel=ns.fuel)
    return (EXIT_OK if rep.accepted else EXIT_FAIL), rep.render(), rep.to_json()


def _suite_reports(name: str, params: GenParams, bounds: Bounds, fuel: int) -> list:
    if name == "axioms":
        return [fuzz_axiom(aid, params, bounds) for aid in AXIOMS]
    if name.startswith("axiom:"):
        aid = axiom_id(name.split(":", 1)[1])
        if aid is None:
            raise UsageError(f"unknown axiom in suite {name!r}")
        return [fuzz_axiom(aid, params, bounds)]
    if name == "frame-lemmas":
        return [fuzz_frame_lemmas(params, fuel)]
    if name == "frame-rule":
        return [fuzz_frame_rule(params, bounds)]
    if name == "all":
        return (_suite_reports("axioms", params, bounds, fuel)
                + _suite_reports("frame-lemmas", params, bounds, fuel)
                + _suite_reports("frame-rule", params, bounds, fuel))
    raise UsageError(f"unknown suite {name!r} (expected axioms, axiom:<id>, frame-lemmas, frame-rule or all)")


def _cmd_fuzz(ns) -> tuple[int, str]:
    params = GenParams(seed=ns.seed, trials=ns.trials)
    reports = _suite_reports(ns.suite, params, _bounds(ns), ns.fuel)
    ok = all(r.ok for r in reports)
    text = "\n".join(r.render() for r in reports)
    text += f"\n{'PASS' if ok else 'FAIL'}: {sum(r.trials for r in reports)} trials, " \
            f"{sum(len(r.failures) for r in reports)} failures"
    return (EXIT_OK if ok else EXIT_FAIL), text


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    artifact = None
    try:
        if ns.command == "run":
            code, text = _cmd_run(ns)
        elif ns.command == "assert":
            code, text = _cmd_assert(ns)
        elif ns.command == "verify":
            code, text, artifact = _cmd_verify(ns)
        else:
            code, text = _cmd_fuzz(ns)
    except (UsageError, ParseError, DanglingReference, StateFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not ns.quiet:
        print(text)
    if ns.out:
        try:
            Path(ns.out).write_text((artifact or text) + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {ns.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
