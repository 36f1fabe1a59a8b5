"""Two-tier storage state: three stores and two heaps.

Addresses are sorted by parity: even non-negative integers are value cells
(Loc), odd non-negative integers are block addresses (BLoc), negative
integers are atoms, and -1 doubles as ``nil``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

NIL = -1


class AddrSort(Enum):
    LOC = "Loc"
    BLOC = "BLoc"
    ATOM = "Atom"


def addr_sort(v: int) -> AddrSort:
    if v < 0:
        return AddrSort.ATOM
    return AddrSort.LOC if v % 2 == 0 else AddrSort.BLOC


def is_loc(v: int) -> bool:
    return v >= 0 and v % 2 == 0


def is_bloc(v: int) -> bool:
    return v >= 0 and v % 2 == 1


class OverlapError(ValueError):
    """Raised when two heaps with intersecting domains are combined."""


def _freeze(m: Mapping) -> Mapping:
    return MappingProxyType(dict(m))


@dataclass(frozen=True, eq=False)
class State:
    """Immutable 5-tuple (sF, sB, sV, hB, hV)."""

    sF: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    sB: Mapping[str, int] = field(default_factory=dict)
    sV: Mapping[str, int] = field(default_factory=dict)
    hB: Mapping[int, tuple[int, ...]] = field(default_factory=dict)
    hV: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sF", _freeze({k: tuple(v) for k, v in self.sF.items()}))
        object.__setattr__(self, "sB", _freeze(self.sB))
        object.__setattr__(self, "sV", _freeze(self.sV))
        object.__setattr__(self, "hB", _freeze({k: tuple(v) for k, v in self.hB.items()}))
        object.__setattr__(self, "hV", _freeze(self.hV))

    def _key(self):
        cached = self.__dict__.get("_key_cache")
        if cached is not None:
            return cached
        key = (
            tuple(sorted(self.sF.items())),
            tuple(sorted(self.sB.items())),
            tuple(sorted(self.sV.items())),
            tuple(sorted(self.hB.items())),
            tuple(sorted(self.hV.items())),
        )
        object.__setattr__(self, "_key_cache", key)
        return key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"State({format_state(self)})"

    def replace(self, **changes) -> "State":
        parts = dict(sF=self.sF, sB=self.sB, sV=self.sV, hB=self.hB, hV=self.hV)
        parts.update(changes)
        return State(**parts)

    def with_heaps(self, hV: Mapping[int, int], hB: Mapping[int, tuple[int, ...]]) -> "State":
        return self.replace(hV=hV, hB=hB)

    def sort_errors(self) -> list[str]:
        """Violations of the address-sort discipline, empty when well sorted."""
        errs = []
        for b, v in self.sB.items():
            if not is_bloc(v):
                errs.append(f"sB[{b}]={v} is not a block address")
        for f, seq in self.sF.items():
            if any(not is_bloc(v) for v in seq):
                errs.append(f"sF[{f}] holds a non-block address")
        for a, seq in self.hB.items():
            if not is_bloc(a):
                errs.append(f"hB key {a} is not a block address")
            if any(not is_loc(v) for v in seq):
                errs.append(f"hB[{a}] holds a non-location")
        for a in self.hV:
            if not is_loc(a):
                errs.append(f"hV key {a} is not a location")
        return errs


EMPTY = State()


def heap_disjoint(h: Mapping, h2: Mapping) -> bool:
    return not (h.keys() & h2.keys())


def heap_union(h: Mapping, h2: Mapping) -> dict:
    if not heap_disjoint(h, h2):
        raise OverlapError(f"overlapping addresses {sorted(h.keys() & h2.keys())}")
    out = dict(h)
    out.update(h2)
    return out


def map_override(f: Mapping, f2: Mapping) -> dict:
    out = dict(f)
    out.update(f2)
    return out


def fresh_locs(hV: Mapping[int, int], n: int) -> tuple[int, ...]:
    """Smallest run of n consecutive even addresses outside dom(hV)."""
    if n <= 0:
        return ()
    start = 0
    while True:
        run = tuple(range(start, start + 2 * n, 2))
        clash = [a for a in run if a in hV]
        if not clash:
            return run
        start = max(clash) + 2


def fresh_bloc(hB: Mapping[int, object], avoid: Iterable[int] = ()) -> int:
    taken = set(hB) | set(avoid)
    a = 1
    while a in taken:
        a += 2
    return a


@dataclass(frozen=True)
class Footprint:
    locs: frozenset[int]
    blocs: frozenset[int]
    max_len: int


def footprint(s: State) -> Footprint:
    locs = set(s.hV)
    for seq in s.hB.values():
        locs.update(seq)
    locs.update(v for v in s.sV.values() if is_loc(v))
    blocs = set(s.hB) | set(s.sB.values())
    for seq in s.sF.values():
        blocs.update(seq)
    lens = [len(x) for x in s.sF.values()] + [len(x) for x in s.hB.values()]
    return Footprint(frozenset(locs), frozenset(blocs), max(lens, default=0))


def _seq(seq: Sequence[int]) -> str:
    return "(" + ",".join(str(v) for v in seq) + ")"


def format_state(s: State) -> str:
    """Canonical one-line rendering with sorted keys."""
    parts = [
        "sF: " + ", ".join(f"{k}={_seq(v)}" for k, v in sorted(s.sF.items())),
        "sB: " + ", ".join(f"{k}={v}" for k, v in sorted(s.sB.items())),
        "sV: " + ", ".join(f"{k}={v}" for k, v in sorted(s.sV.items())),
        "hB: " + ", ".join(f"{k}={_seq(v)}" for k, v in sorted(s.hB.items())),
        "hV: " + ", ".join(f"{k}={v}" for k, v in sorted(s.hV.items())),
    ]
    return "; ".join(p.rstrip() for p in parts)


_ENTRY = re.compile(r"\s*([^=\s]+)\s*=\s*(\([^)]*\)|-?\d+)\s*")


class StateFormatError(ValueError):
    pass


def _parse_int_seq(text: str) -> tuple[int, ...]:
    inner = text.strip()[1:-1].strip()
    return tuple(int(x) for x in inner.split(",")) if inner else ()


def parse_state(text: str) -> State:
    """Inverse of :func:`format_state`; components may be omitted or reordered."""
    comps: dict[str, dict] = {k: {} for k in ("sF", "sB", "sV", "hB", "hV")}
    body = " ".join(line.split("//")[0] for line in text.splitlines()).strip()
    if not body:
        return EMPTY
    for chunk in body.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, sep, rest = chunk.partition(":")
        name = name.strip()
        if not sep or name not in comps:
            raise StateFormatError(f"unknown state component {name!r}")
        pos = 0
        rest = rest.strip()
        while pos < len(rest):
            m = _ENTRY.match(rest, pos)
            if not m:
                raise StateFormatError(f"bad entry in {name}: {rest[pos:]!r}")
            key, val = m.group(1), m.group(2)
            is_seq = val.startswith("(")
            if (name in ("sF", "hB")) != is_seq:
                raise StateFormatError(f"{name} entry {key} has the wrong shape")
            parsed = _parse_int_seq(val) if is_seq else int(val)
            comps[name][key if name.startswith("s") else int(key)] = parsed
            pos = m.end()
            if pos < len(rest):
                if rest[pos] != ",":
                    raise StateFormatError(f"expected ',' in {name}")
                pos += 1
    st = State(**comps)
    errs = st.sort_errors()
    if errs:
        raise StateFormatError("; ".join(errs))
    return st
