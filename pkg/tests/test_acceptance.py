"""Acceptance checks; each prints one PASS/FAIL line with its runtime.

Run under pytest (``pytest tests/test_acceptance.py -s`` shows the lines) or
directly with ``python3 tests/test_acceptance.py``.
"""

import json
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import read  # noqa: E402

from blocklogic.assertion import sat  # noqa: E402
from blocklogic.ast import (  # noqa: E402
    And, BlkEq, BoolAnd, BoolConst, BoolNot, BoolOr, BNum, BVar, Cmp, Const, FIndex, Not, Num, Or,
    Pair, Var,
)
from blocklogic.harness import GenParams, fuzz_axiom, fuzz_frame_lemmas, fuzz_frame_rule, gen_state  # noqa: E402
from blocklogic.hoare import AXIOMS, check_proof, holds_partial, transfer  # noqa: E402
from blocklogic.interp import Fault, FaultKind, Final, bool_value, exec_command, trace  # noqa: E402
from blocklogic.state import EMPTY, parse_state  # noqa: E402
from blocklogic.syntax import (  # noqa: E402
    parse_assertion, parse_bool, parse_program, parse_proof_script, parse_triple, pretty_print,
    print_script,
)

TRUE_V, TRUE_B = Const("V", True), Const("B", True)


def criterion_1():
    t = trace(parse_program(read("appendix_a.bcss")), EMPTY)
    assert isinstance(t.outcome, Final)
    s = t.outcome.state
    assert s == parse_state(read("states/appendix_a_final.st"))
    (blk1,), (blk2,) = s.sF["f1"], s.sF["f2"]
    assert blk1 != blk2
    for a in (blk1, blk2):
        assert tuple(s.hV[c] for c in s.hB[a]) == (1011, 1012)
    assert (s.sV["i"], s.sV["x"]) == (3, 1012)
    guards = [(g.guard, g.guard_value) for g in t.guards]
    assert guards == [("1 <= 2", True), ("2 <= 2", True), ("3 <= 2", False)]
    return f"{len(t.steps)} atomic steps, guards {guards}"


def criterion_2():
    script = parse_proof_script(read("transfer.bpf"))
    rep = check_proof(script)
    assert rep.accepted, rep.render()
    loop = next(s for s in rep.steps if s.id == "18")
    assert loop.ok and loop.justification.startswith("while")
    conseqs = [s for s in rep.steps if s.justification.startswith("conseq")]
    assert all(s.ok for s in conseqs)
    manifest = json.loads(read("mutations/manifest.json"))
    wrong = []
    for m in manifest:
        mrep = check_proof(parse_proof_script(read(f"mutations/{m['file']}")))
        if mrep.accepted or mrep.first_failure != m["failing_step"]:
            wrong.append(f"{m['file']}: got {mrep.first_failure}")
    assert not wrong, wrong
    summary = (f"{len(rep.steps)} steps accepted, {len(manifest)}/{len(manifest)} mutations rejected "
               f"at the right step, {len(rep.caveats)} bounded caveats")
    admitted = [s.id for s in conseqs if any("admitted lemma" in c for c in s.caveats)]
    assert not admitted, (
        f"{summary}; but consequence step(s) {', '.join(admitted)} rest on admitted lemma(s) "
        f"{', '.join(rep.admitted)} instead of a BoundedValid entailment (invalid in general; "
        f"see /root/notes/decisions.md)")
    return summary


def criterion_3():
    params = GenParams(seed=0, trials=500)
    worst = 0.0
    for aid in AXIOMS:
        r = fuzz_axiom(aid, params)
        assert not r.failures, r.render()
        assert r.vacuous_fraction < 0.5, r.render()
        worst = max(worst, r.vacuous_fraction)
    return f"{len(AXIOMS)} axioms x 500 trials, 0 failures, worst vacuity {worst:.0%}"


def criterion_4():
    r = fuzz_frame_lemmas(GenParams(seed=0, trials=500))
    assert not r.failures, r.render()
    return f"500 trials, 0 failures, {r.vacuous} vacuous, {r.skipped} skipped"


def criterion_5():
    r = fuzz_frame_rule(GenParams(seed=0, trials=500))
    assert not r.failures, r.render()
    return f"500 trials, 0 failures, {r.vacuous} vacuous"


def _random_bool(rng, depth=3):
    locs = [Var("x"), Var("y"), Num(rng.randint(-2, 3))]
    blks = [BVar("b1"), BVar("b2"), FIndex("f1", Num(1)), BNum(1)]
    r = rng.random()
    if depth == 0 or r < 0.35:
        k = rng.randrange(4)
        if k == 0:
            return Cmp(rng.choice(["=", "<="]), rng.choice(locs), rng.choice(locs))
        if k == 1:
            return BlkEq(rng.choice(blks), rng.choice(blks))
        return BoolConst(rng.random() < 0.5)
    if r < 0.55:
        return BoolNot(_random_bool(rng, depth - 1))
    ctor = BoolAnd if r < 0.8 else BoolOr
    return ctor(_random_bool(rng, depth - 1), _random_bool(rng, depth - 1))


def _homomorphic(be) -> bool:
    out = transfer(be)
    if isinstance(be, BoolNot):
        return out == Not(transfer(be.arg)) and _homomorphic(be.arg)
    if isinstance(be, (BoolAnd, BoolOr)):
        ctor = And if isinstance(be, BoolAnd) else Or
        return out == ctor(transfer(be.left), transfer(be.right)) and _homomorphic(be.left) and _homomorphic(be.right)
    return True


def criterion_6():
    table = {
        "x = y": Pair(Cmp("=", Var("x"), Var("y")), TRUE_B),
        "x <= y": Pair(Cmp("<=", Var("x"), Var("y")), TRUE_B),
        "b1 == b2": Pair(TRUE_V, BlkEq(BVar("b1"), BVar("b2"))),
        "true": Const("G", True),
        "false": Const("G", False),
        "!(x = y)": Not(Pair(Cmp("=", Var("x"), Var("y")), TRUE_B)),
        "x = y && b1 == b2": And(Pair(Cmp("=", Var("x"), Var("y")), TRUE_B), Pair(TRUE_V, BlkEq(BVar("b1"), BVar("b2")))),
        "x = y || x <= y": Or(Pair(Cmp("=", Var("x"), Var("y")), TRUE_B), Pair(Cmp("<=", Var("x"), Var("y")), TRUE_B)),
    }
    for text, expected in table.items():
        assert transfer(parse_bool(text)) == expected, text
    rng = random.Random(0)
    agreed = 0
    for k in range(1000):
        be = _random_bool(rng)
        assert _homomorphic(be), pretty_print(be)
        s = gen_state(GenParams(seed=k), rng, ("x", "y", "b1", "b2", "f1"))
        try:
            expected = bool_value(be, s)
        except Exception:
            continue
        assert sat(s, transfer(be)) == expected, pretty_print(be)
        agreed += 1
    return f"{len(table)} table fixtures, 1000 expressions homomorphic, {agreed} agree semantically"


def criterion_7():
    prog = parse_program(read("all_commands.bcss"))
    assert parse_program(pretty_print(prog)) == prog
    lines = [ln.split("//")[0].strip() for ln in read("assertions/constructors.bas").splitlines()]
    lines = [ln for ln in lines if ln]
    for ln in lines:
        p = parse_assertion(ln)
        assert parse_assertion(pretty_print(p)) == p, ln
    script = parse_proof_script(read("transfer.bpf"))
    assert parse_proof_script(print_script(script)) == script
    return f"all command forms, {len(lines)} assertions, {len(script.steps)}-step proof script round-trip"


FAULT_FIXTURES = {
    "deref_bad": FaultKind.DerefUnallocatedLoc,
    "unknown_block": FaultKind.UnknownBlockAddr,
    "index_out_of_range": FaultKind.IndexOutOfRange,
    "content_not_in_heap": FaultKind.BlockContentNotInHeap,
    "unbound": FaultKind.UnboundVariable,
    "sort_error": FaultKind.SortError,
}


def criterion_8():
    for name, kind in FAULT_FIXTURES.items():
        out = exec_command(parse_program(read(f"faults/{name}.bcss")), EMPTY)
        assert isinstance(out, Fault) and out.kind is kind, (name, out)
    t = parse_triple("{true} x := [0] {true}")
    empties = [EMPTY, parse_state("sV: x=4"), parse_state("sV: y=0; sB: b=1")]
    rep = holds_partial(t, empties)
    assert len(rep.counterexamples) == len(empties)
    return f"{len(FAULT_FIXTURES)} fault fixtures, tight interpretation falsified on {len(empties)} states"


CRITERIA = [
    (1, "copy program golden trace", criterion_1, 1),
    (2, "transfer proof accepted, mutations rejected", criterion_2, 60),
    (3, "axiom soundness fuzzing", criterion_3, 300),
    (4, "frame lemmas", criterion_4, 120),
    (5, "frame rule", criterion_5, 120),
    (6, "transfer table and homomorphism", criterion_6, None),
    (7, "parser round trip", criterion_7, None),
    (8, "fault discipline", criterion_8, None),
]


def evaluate(num, title, fn, budget):
    start = time.perf_counter()
    try:
        detail, ok = fn(), True
    except AssertionError as exc:
        detail, ok = f"{exc}".splitlines()[0] if str(exc) else "assertion failed", False
    elapsed = time.perf_counter() - start
    if ok and budget is not None and elapsed > budget:
        ok, detail = False, f"{detail}; over the {budget}s budget"
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {title} ({elapsed:.2f}s) - {detail}"
    return ok, line


ADMITTED_GAP = pytest.mark.xfail(
    strict=True, reason="the copied contents are recovered through an admitted lemma, not a checked entailment")


@pytest.mark.parametrize("num,title,fn,budget", [
    pytest.param(*c, marks=ADMITTED_GAP) if c[0] == 2 else c for c in CRITERIA
], ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_acceptance(num, title, fn, budget, capsys):
    ok, line = evaluate(num, title, fn, budget)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
