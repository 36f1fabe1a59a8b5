import random

import pytest
from hypothesis import given, settings, strategies as st

from blocklogic.ast import BNum, BVar, FAppend, FIndex, FVar, Nil, Num, While, BoolConst, Skip
from blocklogic.harness import GenParams, gen_command, gen_state
from blocklogic.interp import (
    DEFAULT_FUEL, Fault, FaultKind, Final, OutOfFuel, describe_outcome, eval_block, eval_file,
    eval_loc, exec_command, trace,
)
from blocklogic.state import EMPTY, parse_state
from blocklogic.syntax import parse_bool, parse_loc_expr, parse_program

from conftest import read

CMD_NAMES = ("x", "y", "z", "k", "b", "b1", "f", "f1")


@pytest.fixture(scope="module")
def appendix_trace():
    return trace(parse_program(read("appendix_a.bcss")), EMPTY)


@pytest.fixture(scope="module")
def final_state():
    return parse_state(read("states/appendix_a_final.st"))


def test_copy_program_reaches_expected_final_state(appendix_trace, final_state):
    assert appendix_trace.outcome == Final(final_state)


def test_copy_program_trace_shape(appendix_trace):
    assert [e.label for e in appendix_trace.steps] == [
        "L2", "L3", "L4", "L5", "L7", "L8", "L9", "L7", "L8", "L9", "L11", "L12"]
    guards = [(g.guard, g.guard_value) for g in appendix_trace.guards]
    assert guards == [("1 <= 2", True), ("2 <= 2", True), ("3 <= 2", False)]
    assert [g.label for g in appendix_trace.guards] == ["L6"] * 3


def test_copy_program_intermediate_states(appendix_trace):
    by_index = appendix_trace.steps
    assert by_index[2].state.hB[3] == ()
    assert by_index[5].state.hB[3] == (4,)
    assert by_index[5].state.hV[4] == 1011
    assert by_index[10].state.sF["f2"] == ()


def test_trace_render_ends_with_outcome(appendix_trace):
    lines = appendix_trace.render().splitlines()
    assert lines[0].startswith("L2 | ")
    assert "guard [[1 <= 2]] = true" in lines[4]
    assert lines[-1].startswith("Final | ")


def test_expression_evaluation(final_state):
    s = final_state
    assert eval_loc(parse_loc_expr("#b1"), s) == 2
    assert eval_loc(parse_loc_expr("2 + 3 * 4"), s) == 14
    assert eval_file(Nil(), s) == ()
    assert eval_file(FAppend(FVar("f1"), BVar("b2")), s) == (1, 3)
    assert eval_block(FIndex("f1", Num(1)), s) == 1
    bad = eval_block(FIndex("f1", Num(5)), s)
    assert isinstance(bad, Fault) and bad.kind is FaultKind.IndexOutOfRange
    assert isinstance(eval_block(BNum(2), s), Fault)


@pytest.mark.parametrize("name,kind", [
    ("deref_bad", FaultKind.DerefUnallocatedLoc),
    ("unknown_block", FaultKind.UnknownBlockAddr),
    ("index_out_of_range", FaultKind.IndexOutOfRange),
    ("content_not_in_heap", FaultKind.BlockContentNotInHeap),
    ("unbound", FaultKind.UnboundVariable),
    ("sort_error", FaultKind.SortError),
])
def test_fault_fixtures(name, kind):
    out = exec_command(parse_program(read(f"faults/{name}.bcss")), EMPTY)
    assert isinstance(out, Fault)
    assert out.kind is kind
    assert describe_outcome(out).startswith(f"Fault({kind.value})")


def test_divergence_runs_out_of_fuel():
    prog = parse_program(read("faults/diverge.bcss"))
    assert exec_command(prog, EMPTY, fuel=50) == OutOfFuel()
    assert describe_outcome(OutOfFuel()) == "OutOfFuel"


def test_false_loop_records_only_its_guard():
    t = trace(While(BoolConst(False), Skip(), line=1), EMPTY)
    assert t.steps == []
    assert [g.guard_value for g in t.guards] == [False]
    assert t.outcome == Final(EMPTY)


def test_deleting_a_file_keeps_its_blocks():
    out = exec_command(parse_program("b := allocate(3); f := create(b); delete f"), EMPTY)
    assert out.state.sF["f"] == ()
    assert out.state.hB[out.state.sB["b"]] != ()


def test_zero_fuel_still_runs_loop_free_code():
    out = exec_command(parse_program("x := 1; y := x + 1"), EMPTY, fuel=0)
    assert out.state.sV == {"x": 1, "y": 2}


def test_negative_fuel_rejected():
    with pytest.raises(ValueError):
        exec_command(Skip(), EMPTY, fuel=-1)


def test_reserved_addresses_are_skipped_by_the_allocator():
    prog = parse_program("x := cons(1); b := allocate(2)")
    plain = exec_command(prog, EMPTY).state
    held = exec_command(prog, EMPTY, reserved=(frozenset({0, 2}), frozenset({1}))).state
    assert plain.sV["x"] == 0 and plain.sB["b"] == 1
    assert held.sV["x"] not in {0, 2}
    assert held.sB["b"] != 1


def test_guard_sees_current_state():
    s = parse_state("sV: x=4")
    assert exec_command(parse_program("if x <= 3 then { y := 1 } else { y := 2 }"), s).state.sV["y"] == 2
    assert parse_bool("x = 4")


def _program_and_state(seed):
    rng = random.Random(seed)
    cmd = gen_command(rng, size=4, depth=2)
    if rng.random() < 0.2:
        cmd = parse_program("while true do { skip }")
    s = gen_state(GenParams(seed=seed), rng, CMD_NAMES)
    return cmd, s


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_execution_is_deterministic(seed):
    cmd, s = _program_and_state(seed)
    assert exec_command(cmd, s, fuel=30) == exec_command(cmd, s, fuel=30)
    assert trace(cmd, s, 30).outcome == exec_command(cmd, s, fuel=30)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 20), st.integers(0, 20))
def test_more_fuel_never_changes_a_settled_outcome(seed, n, extra):
    cmd, s = _program_and_state(seed)
    small = exec_command(cmd, s, fuel=n)
    big = exec_command(cmd, s, fuel=n + extra)
    if not isinstance(small, OutOfFuel):
        assert big == small
    if isinstance(big, OutOfFuel):
        assert isinstance(small, OutOfFuel)


def test_default_fuel():
    assert DEFAULT_FUEL == 10_000
