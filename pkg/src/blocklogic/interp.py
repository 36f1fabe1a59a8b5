"""Big-step execution of commands over the two-tier state."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

from .ast import *  # noqa: F401,F403
from .syntax import pretty_print
from .state import State, fresh_bloc, fresh_locs, format_state, is_bloc

DEFAULT_FUEL = 10_000


class FaultKind(Enum):
    DerefUnallocatedLoc = "DerefUnallocatedLoc"
    UnknownBlockAddr = "UnknownBlockAddr"
    IndexOutOfRange = "IndexOutOfRange"
    BlockContentNotInHeap = "BlockContentNotInHeap"
    UnboundVariable = "UnboundVariable"
    SortError = "SortError"


class ExecFault(Exception):
    def __init__(self, kind: FaultKind, detail: str = ""):
        super().__init__(f"{kind.value}: {detail}" if detail else kind.value)
        self.kind = kind
        self.detail = detail


@dataclass(frozen=True)
class Final:
    state: State


@dataclass(frozen=True)
class Fault:
    kind: FaultKind
    detail: str = field(default="", compare=False)


@dataclass(frozen=True)
class OutOfFuel:
    pass


Outcome = Union[Final, Fault, OutOfFuel]


def _unbound(name: str):
    raise ExecFault(FaultKind.UnboundVariable, name)


# ------------------------------------------------------------------ raising evaluators

def loc_value(e, s: State) -> int:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name not in s.sV:
            _unbound(e.name)
        return s.sV[e.name]
    if isinstance(e, BinOp):
        a, b = loc_value(e.left, s), loc_value(e.right, s)
        return a + b if e.op == "+" else a - b if e.op == "-" else a * b
    if isinstance(e, FileLen):
        return len(file_value(e.file, s))
    if isinstance(e, BlockLen):
        a = block_value(e.block, s)
        if a not in s.hB:
            raise ExecFault(FaultKind.UnknownBlockAddr, f"#{a}")
        return len(s.hB[a])
    raise TypeError(f"not a location expression: {e!r}")


def file_value(fe, s: State) -> tuple[int, ...]:
    if isinstance(fe, Nil):
        return ()
    if isinstance(fe, FVar):
        if fe.name not in s.sF:
            _unbound(fe.name)
        return s.sF[fe.name]
    if isinstance(fe, FAppend):
        return file_value(fe.file, s) + (block_value(fe.block, s),)
    if isinstance(fe, FConcat):
        return file_value(fe.left, s) + file_value(fe.right, s)
    if isinstance(fe, FTuple):
        return tuple(block_value(b, s) for b in fe.items)
    raise TypeError(f"not a file expression: {fe!r}")


def block_value(bk, s: State) -> int:
    if isinstance(bk, BNum):
        if not is_bloc(bk.value):
            raise ExecFault(FaultKind.SortError, f"{bk.value} is not a block address")
        return bk.value
    if isinstance(bk, BVar):
        if bk.name not in s.sB:
            _unbound(bk.name)
        return s.sB[bk.name]
    if isinstance(bk, FIndex):
        if bk.file not in s.sF:
            _unbound(bk.file)
        seq = s.sF[bk.file]
        i = loc_value(bk.index, s)
        if not 1 <= i <= len(seq):
            raise ExecFault(FaultKind.IndexOutOfRange, f"{bk.file}.{i} with length {len(seq)}")
        return seq[i - 1]
    raise TypeError(f"not a block expression: {bk!r}")


def bool_value(be, s: State) -> bool:
    if isinstance(be, BoolConst):
        return be.value
    if isinstance(be, Cmp):
        a, b = loc_value(be.left, s), loc_value(be.right, s)
        return a == b if be.op == "=" else a <= b
    if isinstance(be, BlkEq):
        return block_value(be.left, s) == block_value(be.right, s)
    if isinstance(be, BoolNot):
        return not bool_value(be.arg, s)
    if isinstance(be, BoolAnd):
        return bool_value(be.left, s) and bool_value(be.right, s)
    if isinstance(be, BoolOr):
        return bool_value(be.left, s) or bool_value(be.right, s)
    raise TypeError(f"not a boolean expression: {be!r}")


def _catching(fn):
    def wrapper(expr, s: State):
        try:
            return fn(expr, s)
        except ExecFault as exc:
            return Fault(exc.kind, exc.detail)
    wrapper.__name__ = fn.__name__
    return wrapper


eval_loc = _catching(loc_value)
eval_file = _catching(file_value)
eval_block = _catching(block_value)
eval_bool = _catching(bool_value)


def render_guard(be, s: State) -> str:
    """The guard with every comparison operand replaced by its value."""
    if isinstance(be, BoolConst):
        return "true" if be.value else "false"
    if isinstance(be, Cmp):
        return f"{loc_value(be.left, s)} {be.op} {loc_value(be.right, s)}"
    if isinstance(be, BlkEq):
        return f"{block_value(be.left, s)} == {block_value(be.right, s)}"
    if isinstance(be, BoolNot):
        return f"!({render_guard(be.arg, s)})"
    op = "&&" if isinstance(be, BoolAnd) else "||"
    # mirror short-circuiting so rendering never faults where evaluation does not
    skipped = bool_value(be.left, s) != isinstance(be, BoolAnd)
    right = pretty_print(be.right) if skipped else render_guard(be.right, s)
    return f"({render_guard(be.left, s)} {op} {right})"


# ------------------------------------------------------------------ commands

def _well_formed(s: State, bloc: int) -> None:
    if bloc not in s.hB:
        raise ExecFault(FaultKind.UnknownBlockAddr, str(bloc))
    missing = [l for l in s.hB[bloc] if l not in s.hV]
    if missing:
        raise ExecFault(FaultKind.BlockContentNotInHeap, f"block {bloc} cell {missing[0]}")


def _set(m, k, v) -> dict:
    out = dict(m)
    out[k] = v
    return out


def _without(m, k) -> dict:
    out = dict(m)
    del out[k]
    return out


def step_atomic(c, s: State, reserved: tuple = ((), ())) -> State:
    """Execute one non-compound command, raising ExecFault on a fault.

    ``reserved`` holds (locations, block addresses) the allocator must not hand
    out even though they are absent from the heaps.
    """
    taken_locs = set(s.hV).union(reserved[0]) if reserved[0] else s.hV
    if isinstance(c, Skip):
        return s
    if isinstance(c, Assign):
        return s.replace(sV=_set(s.sV, c.var, loc_value(c.expr, s)))
    if isinstance(c, Cons):
        vals = [loc_value(e, s) for e in c.args]
        locs = fresh_locs(taken_locs, max(len(vals), 1))
        hV = dict(s.hV)
        hV.update(zip(locs, vals))
        return s.replace(sV=_set(s.sV, c.var, locs[0]), hV=hV)
    if isinstance(c, Lookup):
        a = loc_value(c.addr, s)
        if a not in s.hV:
            raise ExecFault(FaultKind.DerefUnallocatedLoc, str(a))
        return s.replace(sV=_set(s.sV, c.var, s.hV[a]))
    if isinstance(c, Mutate):
        a = loc_value(c.addr, s)
        v = loc_value(c.value, s)
        if a not in s.hV:
            raise ExecFault(FaultKind.DerefUnallocatedLoc, str(a))
        return s.replace(hV=_set(s.hV, a, v))
    if isinstance(c, Dispose):
        a = loc_value(c.addr, s)
        if a not in s.hV:
            raise ExecFault(FaultKind.DerefUnallocatedLoc, str(a))
        return s.replace(hV=_without(s.hV, a))
    if isinstance(c, Create):
        blocs = tuple(block_value(b, s) for b in c.blocks)
        for a in blocs:
            _well_formed(s, a)
        return s.replace(sF=_set(s.sF, c.file, blocs))
    if isinstance(c, Attach):
        if c.file not in s.sF:
            _unbound(c.file)
        blocs = tuple(block_value(b, s) for b in c.blocks)
        for a in blocs:
            _well_formed(s, a)
        return s.replace(sF=_set(s.sF, c.file, s.sF[c.file] + blocs))
    if isinstance(c, DeleteFile):
        return s.replace(sF=_set(s.sF, c.file, ()))
    if isinstance(c, Allocate):
        vals = [loc_value(e, s) for e in c.args]
        locs = fresh_locs(taken_locs, len(vals))
        a = fresh_bloc(s.hB, reserved[1])
        hV = dict(s.hV)
        hV.update(zip(locs, vals))
        return s.replace(sB=_set(s.sB, c.var, a), hB=_set(s.hB, a, locs), hV=hV)
    if isinstance(c, Append):
        a = block_value(c.block, s)
        _well_formed(s, a)
        v = loc_value(c.value, s)
        (loc,) = fresh_locs(taken_locs, 1)
        return s.replace(hB=_set(s.hB, a, s.hB[a] + (loc,)), hV=_set(s.hV, loc, v))
    if isinstance(c, BlockLookup):
        a = block_value(c.block, s)
        if a not in s.hB:
            raise ExecFault(FaultKind.UnknownBlockAddr, str(a))
        seq = s.hB[a]
        i = loc_value(c.index, s)
        if not 1 <= i <= len(seq):
            raise ExecFault(FaultKind.IndexOutOfRange, f"{{{a}.{i}}} with length {len(seq)}")
        loc = seq[i - 1]
        if loc not in s.hV:
            raise ExecFault(FaultKind.BlockContentNotInHeap, f"block {a} cell {loc}")
        return s.replace(sV=_set(s.sV, c.var, s.hV[loc]))
    if isinstance(c, BAssign):
        return s.replace(sB=_set(s.sB, c.var, block_value(c.block, s)))
    if isinstance(c, DeleteBlock):
        a = block_value(c.block, s)
        if a not in s.hB:
            raise ExecFault(FaultKind.UnknownBlockAddr, str(a))
        return s.replace(hB=_without(s.hB, a))
    if isinstance(c, SetFileBlock):
        if c.file not in s.sF:
            _unbound(c.file)
        seq = s.sF[c.file]
        i = loc_value(c.index, s)
        if not 1 <= i <= len(seq):
            raise ExecFault(FaultKind.IndexOutOfRange, f"{c.file}.{i} with length {len(seq)}")
        a = block_value(c.block, s)
        return s.replace(sF=_set(s.sF, c.file, seq[: i - 1] + (a,) + seq[i:]))
    raise TypeError(f"not an atomic command: {c!r}")


class _NoFuel(Exception):
    pass


@dataclass
class TraceEntry:
    label: str
    state: Optional[State] = None
    guard: Optional[str] = None  # rendered guard, e.g. "1 <= 2"
    guard_value: Optional[bool] = None

    @property
    def is_step(self) -> bool:
        return self.guard is None

    def render(self) -> str:
        if self.is_step:
            return f"{self.label} | {format_state(self.state)}"
        return f"{self.label} | guard [[{self.guard}]] = {'true' if self.guard_value else 'false'}"


def _label(c) -> str:
    line = getattr(c, "line", 0)
    return f"L{line}" if line else type(c).__name__.lower()


class _Runner:
    def __init__(self, fuel: int, on_step: Optional[Callable[[TraceEntry], None]],
                 reserved: tuple = ((), ())):
        self.fuel = fuel
        self.on_step = on_step
        self.reserved = reserved

    def guard(self, c, s: State) -> bool:
        value = bool_value(c.cond, s)
        if self.on_step:
            self.on_step(TraceEntry(_label(c), guard=render_guard(c.cond, s), guard_value=value))
        return value

    def run(self, c, s: State) -> State:
        if isinstance(c, Seq):
            return self.run(c.second, self.run(c.first, s))
        if isinstance(c, If):
            return self.run(c.then if self.guard(c, s) else c.orelse, s)
        if isinstance(c, While):
            while self.guard(c, s):
                if self.fuel <= 0:
                    raise _NoFuel()
                self.fuel -= 1
                s = self.run(c.body, s)
            return s
        s = step_atomic(c, s, self.reserved)
        if self.on_step:
            self.on_step(TraceEntry(_label(c), state=s))
        return s


def exec_command(c, s: State, fuel: int = DEFAULT_FUEL, reserved: tuple = ((), ())) -> Outcome:
    """Run ``c`` from ``s``; fuel bounds the total number of loop iterations."""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    try:
        return Final(_Runner(fuel, None, reserved).run(c, s))
    except ExecFault as exc:
        return Fault(exc.kind, exc.detail)
    except _NoFuel:
        return OutOfFuel()


@dataclass
class Trace:
    entries: list
    outcome: Outcome

    @property
    def steps(self) -> list:
        return [e for e in self.entries if e.is_step]

    @property
    def guards(self) -> list:
        return [e for e in self.entries if not e.is_step]

    def render(self) -> str:
        lines = [e.render() for e in self.entries]
        lines.append(describe_outcome(self.outcome))
        return "\n".join(lines)


def trace(c, s: State, fuel: int = DEFAULT_FUEL) -> Trace:
    entries: list[TraceEntry] = []
    try:
        out: Outcome = Final(_Runner(fuel, entries.append).run(c, s))
    except ExecFault as exc:
        out = Fault(exc.kind, exc.detail)
    except _NoFuel:
        out = OutOfFuel()
    return Trace(entries, out)


def describe_outcome(out: Outcome) -> str:
    if isinstance(out, Final):
        return f"Final | {format_state(out.state)}"
    if isinstance(out, Fault):
        return f"Fault({out.kind.value})" + (f" | {out.detail}" if out.detail else "")
    return "OutOfFuel"
