import random

import pytest
from hypothesis import given, settings, strategies as st

from blocklogic.assertion import (
    Bounds, BoundedValid, CounterExample, SubstError, check, entails_bounded, expand_sugar,
    free_vars, sat, substitute,
)
from blocklogic.ast import And, BVar, Const, Emp, Nil, Pair, Star, Var
from blocklogic.harness import GenParams, gen_state
from blocklogic.hoare import transfer
from blocklogic.interp import bool_value
from blocklogic.state import EMPTY, parse_state
from blocklogic.syntax import parse_assertion as A, parse_bool, parse_proof_script, pretty_print

from conftest import read

NAMES = ("x", "y", "i", "b1", "b2", "f1")
INVARIANT = ("exists b3, b4, b5. <i <= #b1 + 1 && #b3 = i - 1 && #b4 = #b1 - i + 1 && true_V, "
             "b1 == b3 (*) b4 && b2 == b5 && true_B * b4 ~> b4 * b5 ~> b3>")


def states(n, seed=0):
    rng = random.Random(seed)
    return [gen_state(GenParams(seed=seed), rng, NAMES) for _ in range(n)]


# a small pool of atoms, combined freely below
LOC_ATOMS = ["emp_V", "true_V", "x |-> y", "x |-> -", "y |-> 3", "x = y", "x <= 2", "x --> y"]
BLK_ATOMS = ["emp_B", "true_B", "b1 == b2", "b1 ~> b2", "f1 = (b1)", "b1 |-> ()", "#b1 = 1"]


def _layer(atoms):
    leaf = st.sampled_from(atoms)
    return st.recursive(leaf, lambda inner: st.tuples(inner, st.sampled_from([" * ", " && ", " || "]), inner)
                        .map(lambda t: f"({t[0]}{t[1]}{t[2]})"), max_leaves=3)


global_assertions = st.builds(lambda a, b: A(f"<{a}, {b}>"), _layer(LOC_ATOMS), _layer(BLK_ATOMS))


def test_emp_holds_exactly_on_empty_heaps():
    assert sat(EMPTY, A("emp"))
    assert not sat(parse_state("hV: 0=1"), A("emp"))


def test_allocated_block_satisfies_its_allocation_postcondition():
    s = parse_state("sB: b1=1; hB: 1=(0,2); hV: 0=1011, 2=1012")
    assert sat(s, A("exists @l. <@l ~> (1011, 1012), b1 |-> @l>"))
    assert not sat(s, A("exists @l. <@l ~> (1011, 1013), b1 |-> @l>"))


def test_points_to_demands_a_singleton_heap():
    s = parse_state("sV: x=0; hV: 0=5, 2=6")
    assert not sat(s, A("<x |-> 5, true_B>"))
    assert sat(s, A("<x |-> 5 * true_V, true_B>"))


def test_unbound_variable_is_false_with_diagnostic():
    rep = check(EMPTY, A("<q = 1, true_B>"))
    assert rep.value is False
    assert rep.diagnostics


def test_quantified_verdicts_are_marked_bounded():
    assert check(EMPTY, A("exists x. <x = 1, true_B>")).bounded
    assert not check(EMPTY, A("<emp_V, emp_B>")).bounded


def test_copy_program_final_state_assertions(corpus):
    final = parse_state(read("states/appendix_a_final.st"))
    # the unframed form is exact and therefore false: other cells and blocks remain
    assert not sat(final, A(read("assertions/copy_block.bas")))
    assert sat(final, A(read("assertions/copy_block_framed.bas")))


def test_free_variables():
    fv = free_vars(A("<x = 1, b == b'>"))
    assert (fv.loc, fv.blk, fv.file) == ({"x"}, {"b", "b'"}, set())
    fv = free_vars(A("exists b. <true_V, b == b'>"))
    assert (fv.loc, fv.blk, fv.file) == (set(), {"b'"}, set())
    fv = free_vars(A(INVARIANT))
    assert (fv.loc, fv.blk, fv.file) == ({"i"}, {"b1", "b2"}, set())


def test_substitution_examples():
    assert pretty_print(substitute(A("<x = y + 1, true_B>"), {"x": Var("x'")})) == "<x' = y + 1, true_B>"
    assert pretty_print(substitute(A("<true_V, f = f2>"), {"f": Nil()})) == "<true_V, nil = f2>"


def test_substitution_avoids_capture():
    out = substitute(A("exists b. <true_V, b == b2>"), {"b2": BVar("b")})
    assert out.var != "b"
    assert free_vars(out).blk == {"b"}


def test_substitution_is_simultaneous():
    out = substitute(A("<x = y, true_B>"), {"x": Var("y"), "y": Var("x")})
    assert pretty_print(out) == "<y = x, true_B>"


def test_substitution_respects_sorts():
    with pytest.raises(SubstError):
        substitute(A("<x = 1, true_B>"), {"x": BVar("b")})


def test_sugar_expansions():
    assert pretty_print(expand_sugar(A("b ~> (5)"))) == "exists x1. <x1 |-> 5, b |-> (x1)>"
    assert pretty_print(expand_sugar(A("<x --> 3, true_B>"))) == "<x |-> 3 * true_V, true_B>"
    assert pretty_print(expand_sugar(A("<x |-> (1, 2), emp_B>"))) == "<x |-> 1 * x + 2 |-> 2, emp_B>"


@pytest.mark.parametrize("sugar,plain", [
    ("<x --> y, true_B>", "<x |-> y * true_V, true_B>"),
    ("<x |-> (y, 3), emp_B>", "<x |-> y * x + 2 |-> 3, emp_B>"),
    ("b1 ~> (3)", "exists z. <z |-> 3, b1 |-> (z)>"),
])
def test_sugar_agrees_with_hand_expansion(sugar, plain):
    extra = [parse_state("sV: x=0, y=3; sB: b1=1; hB: 1=(4); hV: 0=3, 2=3, 4=3"),
             parse_state("sV: x=0, y=3; sB: b1=1; hB: 1=(4); hV: 4=3")]
    for s in states(80) + extra:
        assert sat(s, A(sugar)) == sat(s, A(plain)), s


def test_entailment_examples():
    p = A("<x = 1 && emp_V, emp_B>")
    assert isinstance(entails_bounded(p, p), BoundedValid)
    assert isinstance(entails_bounded(p, A("<x = 2 && emp_V, emp_B>")), CounterExample)


def test_allocation_postcondition_entails_block_split():
    steps = {s.id: s.triple for s in parse_proof_script(read("transfer.bpf")).steps}
    verdict = entails_bounded(steps["5"].post, steps["6"].post, trials=80)
    assert isinstance(verdict, BoundedValid)
    assert verdict.witnesses >= 1


def test_self_copy_needs_an_allocated_block():
    assert not sat(EMPTY.replace(sB={"b": 1}), A("<true_V, b ~> b>"))


@settings(max_examples=120, deadline=None)
@given(global_assertions, st.integers(0, 10**6))
def test_emp_is_a_unit_for_star(p, seed):
    (s,) = states(1, seed)
    assert sat(s, Star(p, Pair(Emp("V"), Emp("B")))) == sat(s, p)
    assert sat(s, Pair(Const("V", True), Const("B", True)))


@settings(max_examples=120, deadline=None)
@given(global_assertions, global_assertions, st.integers(0, 10**6))
def test_star_is_symmetric(p, q, seed):
    (s,) = states(1, seed)
    assert sat(s, Star(p, q)) == sat(s, Star(q, p))


@settings(max_examples=120, deadline=None)
@given(_layer(LOC_ATOMS), _layer(BLK_ATOMS), st.integers(0, 10**6))
def test_pair_decomposes(alpha, beta, seed):
    (s,) = states(1, seed)
    whole = sat(s, A(f"<{alpha}, {beta}>"))
    assert whole == (sat(s, A(f"<{alpha}, true_B>")) and sat(s, A(f"<true_V, {beta}>")))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_self_copy_holds_on_well_formed_blocks(seed):
    (s,) = states(1, seed)
    for name, a in s.sB.items():
        if a in s.hB and all(c in s.hV for c in s.hB[a]) and len(set(s.hB[a])) == len(s.hB[a]):
            assert sat(s, A(f"<true_V, {name} ~> {name}>"))


def test_wider_bounds_keep_existentials_true():
    s = parse_state("sV: x=0; hV: 0=7")
    p = A("exists y. <x |-> y, true_B>")
    assert sat(s, p, Bounds(0, 0, 0, (0, 0)))
    assert sat(s, p, Bounds(3, 3, 4, (-9, 9)))


# Boolean expressions over the store used by generated states
_cmp = st.builds(lambda a, op, b: f"{a} {op} {b}", st.sampled_from(["x", "y", "i", "1", "x + y", "#f1"]),
                 st.sampled_from(["=", "<="]), st.sampled_from(["x", "y", "0", "2", "i - 1"]))
_beq = st.sampled_from(["b1 == b2", "b1 == b1", "f1.1 == b2"])
bool_texts = st.recursive(
    st.one_of(_cmp, _beq, st.sampled_from(["true", "false"])),
    lambda inner: st.one_of(
        inner.map(lambda e: f"!({e})"),
        st.tuples(inner, st.sampled_from(["&&", "||"]), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})")),
    max_leaves=4)


@settings(max_examples=1000, deadline=None)
@given(bool_texts, st.integers(0, 10**6))
def test_transfer_agrees_with_evaluation(text, seed):
    be = parse_bool(text)
    (s,) = states(1, seed)
    try:
        expected = bool_value(be, s)
    except Exception:
        return  # faulting guards have no truth value
    assert sat(s, transfer(be)) == expected


def test_conjunction_of_pure_facts():
    s = parse_state("sV: x=1")
    assert sat(s, And(A("<x = 1, true_B>"), A("<x <= 1, true_B>")))
    assert not sat(s, And(A("<x = 1, true_B>"), A("<x = 2, true_B>")))
