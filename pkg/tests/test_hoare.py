import random

import pytest

from blocklogic.assertion import sat
from blocklogic.ast import ProofScript
from blocklogic.harness import axiom_instance, candidate_states, gen_state, GenParams
from blocklogic.hoare import (
    AXIOMS, MatchError, axiom_id, check_proof, holds_partial, holds_total, match_axiom, modifies,
    transfer,
)
from blocklogic.state import EMPTY
from blocklogic.syntax import (
    parse_assertion as A, parse_bool, parse_program, parse_proof_script, parse_triple, pretty_print,
)

from conftest import read


@pytest.fixture(scope="module")
def transfer_steps():
    return {s.id: s for s in parse_proof_script(read("transfer.bpf")).steps}


@pytest.mark.parametrize("be,expected", [
    ("x = 1", "<x = 1, true_B>"),
    ("x <= y", "<x <= y, true_B>"),
    ("b1 == b2", "<true_V, b1 == b2>"),
    ("true", "true"),
    ("false", "false"),
    ("!(x = 1)", "!<x = 1, true_B>"),
    ("x = 1 && b == b'", "<x = 1, true_B> && <true_V, b == b'>"),
    ("x = 1 || x <= 0", "<x = 1, true_B> || <x <= 0, true_B>"),
])
def test_transfer_table(be, expected):
    assert transfer(parse_bool(be)) == A(expected)


def test_modifies_examples(transfer_steps):
    assert modifies(parse_program("x := y + 1")).V == {"x"}
    m = modifies(parse_program("[x] := 3; dispose(x); append(b, 1); delete b"))
    assert m.all() == frozenset()
    m = modifies(transfer_steps["26"].triple.cmd)
    assert (m.V, m.B, m.F) == ({"i", "x"}, {"b1", "b2"}, {"f"})


def test_axiom_names_resolve():
    assert axiom_id("ba") == "A10"
    assert axiom_id("A21") == "A21"
    assert axiom_id("nope") is None
    assert len(AXIOMS) == 21


def test_skip_axiom_matches_any_triple_with_equal_conditions():
    assert match_axiom("SKIP", parse_triple("{<x = 1, emp_B>} skip {<x = 1, emp_B>}")) == {"p": "<x = 1, emp_B>"}
    with pytest.raises(MatchError):
        match_axiom("A1", parse_triple("{<x = 1, emp_B>} skip {<x = 2, emp_B>}"))


def test_file_creation_axiom_binds_block_formula(transfer_steps):
    sub = match_axiom("A7", transfer_steps["3"].triple)
    assert sub


def test_assignment_axiom_demands_the_substitution():
    good = "{<x = x' && emp_V, emp_B>} x := y + 1 {<x = y + 1 && emp_V, emp_B>}"
    bad = "{<x = x' && emp_V, emp_B>} x := y + 1 {<x = x' && emp_V, emp_B>}"
    match_axiom("SA", parse_triple(good))
    with pytest.raises(MatchError):
        match_axiom("SA", parse_triple(bad))


def test_wrong_command_form_is_rejected():
    with pytest.raises(MatchError):
        match_axiom("BA", parse_triple("{<emp_V, emp_B>} skip {<emp_V, emp_B>}"))


@pytest.mark.parametrize("aid", sorted(AXIOMS, key=lambda a: int(a[1:])))
def test_generated_axiom_instances_match_their_schema(aid):
    rng = random.Random(aid)
    for _ in range(5):
        t, _s = axiom_instance(aid, rng)
        match_axiom(aid, t)


def test_skip_preserves_empty_heaps():
    t = parse_triple("{<emp_V, emp_B>} skip {<emp_V, emp_B>}")
    rep = holds_partial(t, [EMPTY])
    assert rep.checked == 1 and not rep.counterexamples


def test_reading_unallocated_memory_is_unsafe():
    t = parse_triple("{true} x := [0] {true}")
    rep = holds_partial(t, [EMPTY])
    assert rep.counterexamples


def test_block_allocation_instance_is_sound():
    t = parse_triple("{<emp_V, emp_B>} b := allocate(1011, 1012) {exists @l. <@l ~> (1011, 1012), b |-> @l>}")
    pool = list(candidate_states(t.pre, t.post, 500, seed=3, cmd=t.cmd))
    rep = holds_partial(t, pool)
    assert rep.checked >= 1
    assert not rep.counterexamples


def test_divergence_is_vacuous_for_partial_but_not_total_correctness():
    t = parse_triple("{true} while true do { skip } {false}")
    assert not holds_partial(t, [EMPTY], fuel=20).counterexamples
    total = holds_total(t, [EMPTY], fuel=20)
    assert total.unknown == 1 or total.counterexamples


FRAME_SCRIPT = """
step 1: {<y = y' && emp_V, emp_B>}
  y := 2
  {<y = 2 && emp_V, emp_B>}
  by SA

step 2: {<y = y' && emp_V, emp_B> * <{var} = 5, emp_B>}
  y := 2
  {<y = 2 && emp_V, emp_B> * <{var} = 5, emp_B>}
  by frame(1)

goal: step 2
"""


def test_frame_rule_checks_modified_variables():
    ok = check_proof(parse_proof_script(FRAME_SCRIPT.replace("{var}", "z")), trials=30)
    bad = check_proof(parse_proof_script(FRAME_SCRIPT.replace("{var}", "y")), trials=30)
    assert ok.steps[1].ok, ok.render()
    assert not bad.steps[1].ok
    assert "y" in bad.steps[1].message


def test_empty_script_is_rejected():
    rep = check_proof(ProofScript((), (), None))
    assert not rep.accepted
    assert "no steps" in rep.goal_message


def test_goal_must_be_the_final_step():
    text = FRAME_SCRIPT.replace("{var}", "z").replace("goal: step 2", "goal: step 1")
    rep = check_proof(parse_proof_script(text), trials=30)
    assert not rep.accepted
    assert "not the final step" in rep.goal_message


def test_consequence_step_between_allocation_forms(transfer_steps):
    script = ProofScript((), (transfer_steps["4"], transfer_steps["5"], transfer_steps["6"]), "6")
    # step 4 cites 4b, which is missing here; later steps still get their own entailments checked
    rep = check_proof(script, trials=60)
    by_id = {s.id: s for s in rep.steps}
    assert not by_id["4"].ok
    assert "unknown step 4b" in by_id["4"].message
    assert by_id["6"].message == "depends on rejected step 5"
    assert any("BoundedValid" in c for c in by_id["6"].caveats)


def test_report_serializes(transfer_steps):
    script = ProofScript((), (transfer_steps["1"],), "1")
    rep = check_proof(script, trials=20)
    assert rep.accepted
    assert '"accepted": true' in rep.to_json()
    assert rep.render().endswith("ACCEPTED")


def test_triples_print_back():
    t = parse_triple("{<emp_V, emp_B>} b := allocate(3) {exists @l. <@l ~> (3), b |-> @l>}")
    assert parse_triple(f"{{{pretty_print(t.pre)}}} {pretty_print(t.cmd)} {{{pretty_print(t.post)}}}") == t


def test_transfer_is_homomorphic_on_negation():
    rng = random.Random(5)
    s = gen_state(GenParams(), rng, ("x", "y"))
    for text in ("x = y", "x <= 1", "!(x = 1) || y <= x"):
        be = parse_bool(text)
        assert sat(s, transfer(parse_bool(f"!({text})"))) == (not sat(s, transfer(be)))
