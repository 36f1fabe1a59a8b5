import pytest
from hypothesis import given, strategies as st

from blocklogic.state import (
    EMPTY, OverlapError, State, StateFormatError, footprint, format_state, fresh_bloc,
    fresh_locs, heap_union, parse_state,
)

locs = st.integers(0, 30).map(lambda n: 2 * n)
blocs = st.integers(0, 30).map(lambda n: 2 * n + 1)
names = st.sampled_from(["x", "y", "i", "x1"])

states = st.builds(
    State,
    sF=st.dictionaries(st.sampled_from(["f", "f1"]), st.lists(blocs, max_size=3).map(tuple)),
    sB=st.dictionaries(st.sampled_from(["b", "b1"]), blocs),
    sV=st.dictionaries(names, st.integers(-50, 50)),
    hB=st.dictionaries(blocs, st.lists(locs, max_size=3).map(tuple)),
    hV=st.dictionaries(locs, st.integers(-50, 50)),
)


@given(states)
def test_format_parse_round_trip(s):
    assert parse_state(format_state(s)) == s


@given(states)
def test_generated_states_are_well_sorted(s):
    assert s.sort_errors() == []


def test_empty_state_formats_with_all_components():
    assert format_state(EMPTY) == "sF:; sB:; sV:; hB:; hV:"
    assert parse_state("") == EMPTY


def test_sort_errors_reported():
    bad = State(sB={"b": 4}, hV={3: 1})
    errs = bad.sort_errors()
    assert any("sB[b]" in e for e in errs) and any("hV key 3" in e for e in errs)


def test_states_are_hashable_values():
    a = State(sV={"x": 1}, hV={0: 5})
    b = parse_state("hV: 0=5; sV: x=1")
    assert a == b and hash(a) == hash(b)


def test_fresh_locs_skips_allocated_cells():
    assert fresh_locs({}, 2) == (0, 2)
    assert fresh_locs({0: 1, 4: 1}, 2) == (6, 8)
    assert fresh_locs({0: 1}, 0) == ()


def test_fresh_bloc_is_odd_and_unused():
    assert fresh_bloc({}) == 1
    assert fresh_bloc({1: (), 3: ()}) == 5
    assert fresh_bloc({1: ()}, avoid=[3]) == 5


def test_heap_union_rejects_overlap():
    assert heap_union({0: 1}, {2: 3}) == {0: 1, 2: 3}
    with pytest.raises(OverlapError):
        heap_union({0: 1}, {0: 2})


def test_footprint_collects_addresses():
    s = parse_state("sF: f=(5); sB: b=1; sV: x=8; hB: 1=(0,2); hV: 0=3")
    fp = footprint(s)
    assert fp.locs == {0, 2, 8} and fp.blocs == {1, 5} and fp.max_len == 2


@pytest.mark.parametrize("text", ["zz: x=1", "sV: x=", "hB: 1=(0,"])
def test_malformed_state_text(text):
    with pytest.raises(StateFormatError):
        parse_state(text)
