import pytest
from hypothesis import given, settings, strategies as st
import random

from blocklogic.ast import *  # noqa: F403
from blocklogic.harness import gen_command
from blocklogic.syntax import (
    DanglingReference, ParseError, SortError, parse_assertion, parse_bool, parse_program,
    parse_proof_script, pretty_print, print_script, tokenize,
)

from conftest import read


def _assertions(text):
    for line in text.splitlines():
        line = line.split("//")[0].strip()
        if line:
            yield line


def test_all_command_forms_parse_and_round_trip():
    prog = parse_program(read("all_commands.bcss"))
    kinds = set()

    def walk(c):
        kinds.add(type(c).__name__)
        for sub in (getattr(c, a, None) for a in ("first", "second", "then", "orelse", "body")):
            if sub is not None:
                walk(sub)
    walk(prog)
    forms = {"Skip", "Assign", "Cons", "Lookup", "Mutate", "Dispose", "Create", "Attach",
             "DeleteFile", "Allocate", "Append", "BlockLookup", "BAssign", "DeleteBlock",
             "SetFileBlock", "If", "While"}
    assert forms <= kinds
    assert parse_program(pretty_print(prog)) == prog


@pytest.mark.parametrize("text", list(_assertions(read("assertions/constructors.bas"))))
def test_assertion_round_trip(text):
    a = parse_assertion(text)
    assert parse_assertion(pretty_print(a)) == a


def test_golden_script_round_trip():
    script = parse_proof_script(read("transfer.bpf"))
    again = parse_proof_script(print_script(script))
    assert again == script
    assert print_script(again) == print_script(script)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_random_programs_round_trip(seed):
    c = gen_command(random.Random(seed), size=4, depth=2)
    assert parse_program(pretty_print(c)) == c


def test_precedence_and_associativity():
    # * binds tighter than &&
    a = parse_assertion("<x = 1 && x = 2 * emp_V, true_B>")
    assert isinstance(a.loc, And) and isinstance(a.loc.right, Star)
    p = parse_program("x := 1 - 2 - 3")
    assert p.expr == BinOp("-", BinOp("-", Num(1), Num(2)), Num(3))


def test_file_expressions():
    a = parse_assertion("<true_V, f = f2 ++ b3 ++ f3>")
    assert a.blk.right == FConcat(FAppend(FVar("f2"), BVar("b3")), FVar("f3"))
    a = parse_assertion("<true_V, f = (b1)>")
    assert a.blk.right == FTuple((BVar("b1"),))


def test_sorts_follow_name_prefix():
    assert parse_program("b := allocate()") == Allocate("b", ())
    assert parse_program("x := {b.1}") == BlockLookup("x", BVar("b"), Num(1))
    with pytest.raises(ParseError):
        parse_program("x := allocate()")
    with pytest.raises(SortError):
        parse_assertion("<b = 2, true_B>")


def test_transfer_program_example():
    prog = parse_program(read("appendix_a.bcss"))
    assert isinstance(prog, Seq)


def test_bool_parsing():
    assert parse_bool("!(x <= 1) && b1 == b2") == BoolAnd(
        BoolNot(Cmp("<=", Var("x"), Num(1))), BlkEq(BVar("b1"), BVar("b2")))


def test_one_step_script():
    s = parse_proof_script("step 1: {<emp_V, emp_B>} skip {<emp_V, emp_B>} by SKIP\ngoal: step 1")
    assert len(s.steps) == 1 and s.goal == "1"


def test_golden_script_shape():
    s = parse_proof_script(read("transfer.bpf"))
    assert s.goal == s.steps[-1].id
    assert [lem.mode for lem in s.lemmas] == ["admit"]


def test_dangling_step_reference():
    text = "step 1: {<emp_V, emp_B>} skip {<emp_V, emp_B>} by conseq(99)"
    with pytest.raises(DanglingReference, match="99"):
        parse_proof_script(text)


def test_dangling_lemma_reference():
    text = ("step 1: {<emp_V, emp_B>} skip {<emp_V, emp_B>} by SKIP\n"
            "step 2: {<emp_V, emp_B>} skip {<emp_V, emp_B>} by conseq(1, nope)")
    with pytest.raises(DanglingReference, match="nope"):
        parse_proof_script(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_program("x := 1;\ny := ")
    assert info.value.line == 2


def test_comments_ignored():
    assert parse_program("// hi\nskip // there") == Skip()


def test_labels_tokenize():
    kinds = [t.kind for t in tokenize("4a 12 x")][:3]
    assert kinds == ["label", "num", "ident"]
