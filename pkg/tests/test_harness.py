import random

import pytest
from hypothesis import given, settings, strategies as st

import blocklogic.harness as harness
from blocklogic.assertion import sat
from blocklogic.harness import (
    GenParams, SCHEMA_MUTATIONS, fuzz_axiom, fuzz_frame_lemmas, fuzz_frame_rule, gen_command,
    gen_state, gen_state_satisfying,
)
from blocklogic.hoare import AXIOMS
from blocklogic.interp import Fault, FaultKind, Final, exec_command
from blocklogic.state import is_bloc, is_loc
from blocklogic.syntax import parse_assertion

CMD_NAMES = ("x", "y", "z", "b", "b1", "f", "f1")


def test_params_are_validated():
    with pytest.raises(ValueError):
        GenParams(trials=0)
    with pytest.raises(ValueError):
        GenParams(value_range=(3, 1))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_states_respect_sorts(seed):
    s = gen_state(GenParams(seed=seed))
    assert not s.sort_errors()
    assert all(is_loc(a) for a in s.hV)
    assert all(is_bloc(a) for a in s.hB)
    assert all(is_bloc(a) for a in s.sB.values())


def test_generation_is_deterministic():
    a = [gen_state(GenParams(seed=7)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    c1 = gen_command(random.Random("same"))
    c2 = gen_command(random.Random("same"))
    assert c1 == c2


def test_fuzz_reports_are_reproducible():
    p = GenParams(seed=4, trials=40)
    assert fuzz_axiom("A14", p).render() == fuzz_axiom("A14", p).render()
    assert fuzz_frame_lemmas(p).render() == fuzz_frame_lemmas(p).render()


def test_satisfying_state_synthesis_for_lookup_precondition():
    p = parse_assertion("exists @l. <@l ~> (1, y | 2 >-> x), b1 |-> @l>")
    s = gen_state_satisfying(p)
    assert s is not None
    assert sat(s, p)


def test_unsatisfiable_precondition_yields_nothing():
    assert gen_state_satisfying(parse_assertion("false"), GenParams(trials=20)) is None


@pytest.mark.parametrize("aid", sorted(AXIOMS, key=lambda a: int(a[1:])))
def test_axioms_survive_fuzzing(aid):
    rep = fuzz_axiom(aid, GenParams(trials=60))
    assert not rep.failures, rep.render()
    assert rep.vacuous_fraction < 0.5


@pytest.mark.parametrize("aid", sorted(SCHEMA_MUTATIONS, key=lambda a: int(a[1:])))
def test_broken_schemas_are_caught(aid):
    rep = fuzz_axiom(aid, GenParams(trials=200), transform=SCHEMA_MUTATIONS[aid])
    assert rep.failures, f"mutation of {aid} went unnoticed"
    assert not rep.ok


def test_frame_lemmas_hold():
    rep = fuzz_frame_lemmas(GenParams(trials=150))
    assert not rep.failures, rep.render()
    assert rep.ok


def test_frame_rule_holds():
    rep = fuzz_frame_rule(GenParams(trials=120))
    assert not rep.failures, rep.render()


def test_frame_lemma_suite_notices_nonlocal_writes(monkeypatch):
    real = harness.exec_command

    def leaky(c, s, fuel=200, reserved=((), ())):
        out = real(c, s, fuel, reserved)
        if isinstance(out, Final) and out.state.hV:
            top = max(out.state.hV)
            hV = dict(out.state.hV)
            hV[top] += 1
            return Final(out.state.replace(hV=hV))
        return out

    monkeypatch.setattr(harness, "exec_command", leaky)
    rep = fuzz_frame_lemmas(GenParams(trials=150))
    assert rep.failures
    assert "small run * frame" in rep.failures[0].expected


def test_frame_lemma_suite_notices_unsafe_extension(monkeypatch):
    real = harness.exec_command

    def picky(c, s, fuel=200, reserved=((), ())):
        if len(s.hV) > 3:
            return Fault(FaultKind.DerefUnallocatedLoc, "too big")
        return real(c, s, fuel, reserved)

    monkeypatch.setattr(harness, "exec_command", picky)
    rep = fuzz_frame_lemmas(GenParams(trials=150))
    assert any("safe run" in f.expected for f in rep.failures)


def test_command_generator_reaches_every_fault():
    seen = set()
    for k in range(2000):
        rng = random.Random(k)
        c = gen_command(rng)
        s = gen_state(GenParams(seed=k), rng, CMD_NAMES)
        out = exec_command(c, s, 50)
        if isinstance(out, Fault):
            seen.add(out.kind)
    assert seen == set(FaultKind)


def test_failure_rendering_names_the_seed():
    rep = fuzz_axiom("A5", GenParams(trials=30), transform=SCHEMA_MUTATIONS["A5"])
    text = rep.failures[0].render()
    assert "A5:0:" in text
