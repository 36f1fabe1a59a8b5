"""Random states, commands and axiom instances, and the soundness fuzz suites."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .assertion import DEFAULT_BOUNDS, Bounds, _consts, names_in, sat, substitute
from .ast import *  # noqa: F401,F403
from .ast import var_sort
from .hoare import (
    AXIOMS, EMP_B, EMP_V, TRUE_B, TRUE_V, command_names, flatten_seq, holds_partial,
    match_axiom, MatchError, modifies,
)
from .interp import Fault, Final, OutOfFuel, exec_command, loc_value, trace
from .state import State, format_state, heap_disjoint

# ------------------------------------------------------------------ params


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    max_cells: int = 3
    max_blocks: int = 3
    max_block_len: int = 3
    max_files: int = 2
    value_range: tuple[int, int] = (-3, 9)
    trials: int = 500

    def __post_init__(self):
        counts = (self.max_cells, self.max_blocks, self.max_block_len, self.max_files)
        if min(counts) < 0:
            raise ValueError("counts must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.value_range[0] > self.value_range[1]:
            raise ValueError("empty value range")


@dataclass
class Failure:
    trial: int
    seed: str
    state: str
    command: str
    expected: str
    actual: str

    def render(self) -> str:
        return (f"trial {self.trial} (seed {self.seed}): {self.command}\n"
                f"  state:    {self.state}\n  expected: {self.expected}\n  actual:   {self.actual}")


@dataclass
class FuzzReport:
    suite: str
    trials: int = 0
    vacuous: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    caveats: list = field(default_factory=list)

    @property
    def vacuous_fraction(self) -> float:
        return self.vacuous / self.trials if self.trials else 0.0

    @property
    def ok(self) -> bool:
        return not self.failures and self.vacuous_fraction < 0.5

    def render(self) -> str:
        head = (f"{self.suite}: {self.trials} trials, {len(self.failures)} failures, "
                f"{self.vacuous} vacuous ({self.vacuous_fraction:.0%})"
                + (f", {self.skipped} skipped" if self.skipped else ""))
        lines = [head] + [f.render() for f in self.failures]
        lines += [f"  note: {c}" for c in self.caveats]
        return "\n".join(lines)


# ----------------------------------------------------------- state building

class _Builder:
    """Incrementally assembles a sort-correct state."""

    def __init__(self, rng: random.Random, value_range=(-3, 9)):
        self.rng = rng
        self.lo, self.hi = value_range
        self.sF: dict = {}
        self.sB: dict = {}
        self.sV: dict = {}
        self.hB: dict = {}
        self.hV: dict = {}
        self._cells: set = set()

    def value(self) -> int:
        return self.rng.randint(self.lo, self.hi)

    def cells(self, n: int) -> list:
        out: list = []
        while len(out) < n:
            a = 2 * self.rng.randint(0, 12 + 4 * n)
            if a not in self._cells and a not in out:
                out.append(a)
        self._cells.update(out)
        return out

    def cell(self, value: Optional[int] = None) -> int:
        (a,) = self.cells(1)
        self.hV[a] = self.value() if value is None else value
        return a

    def bloc(self) -> int:
        while True:
            a = 2 * self.rng.randint(0, 10) + 1
            if a not in self.hB:
                return a

    def block(self, values, well_formed: bool = True, cells=None) -> int:
        cells = list(cells) if cells is not None else self.cells(len(values))
        a = self.bloc()
        self.hB[a] = tuple(cells)
        if well_formed:
            self.hV.update(zip(cells, values))
        return a

    def state(self) -> State:
        return State(sF=self.sF, sB=self.sB, sV=self.sV, hB=self.hB, hV=self.hV)

    def eval(self, e) -> int:
        return loc_value(e, self.state())

    def complete(self, names: Iterable[str]) -> None:
        """Bind every listed variable that is still unbound."""
        blocs = sorted(self.hB) or [self.bloc()]
        for n in sorted(names):
            s = var_sort(n)
            if s == "V" and n not in self.sV:
                self.sV[n] = self.value()
            elif s == "B" and n not in self.sB:
                self.sB[n] = self.rng.choice(blocs + [self.bloc()])
            elif s == "F" and n not in self.sF:
                self.sF[n] = tuple(self.rng.choice(blocs) for _ in range(self.rng.randint(0, 2)))


def _sorted_names(names, sort):
    return sorted(n for n in names if var_sort(n) == sort)


def _random_state(rng: random.Random, names: set, consts: set, wf_prob: float = 0.85,
                  max_blocks: Optional[int] = None, max_len: int = 3, max_cells: int = 2,
                  value_range=(-3, 9)) -> State:
    """A state biased towards the shapes proof assertions talk about.

    Block variables are bound in name order to the blocks created first, later
    blocks often copy a prefix of the first block's values, and location
    variables favour block lengths, stored values and constants.
    """
    b = _Builder(rng, value_range)
    bvars, fvars = _sorted_names(names, "B"), _sorted_names(names, "F")
    lvars = _sorted_names(names, "V")
    pool_vals = sorted(set(range(-1, 4)) | {c for c in consts if abs(c) < 10_000})
    nb_max = max_blocks if max_blocks is not None else min(4, len(bvars) + 1)
    contents: list = []
    for j in range(rng.randint(0, nb_max) if rng.random() < 0.15 else rng.randint(min(1, nb_max), nb_max)):
        n = rng.randint(0, max_len)
        if j and contents and contents[0][1] and rng.random() < 0.5:
            k = rng.randint(0, min(n, len(contents[0][1])))
            vals = list(contents[0][1][:k]) + [rng.choice(pool_vals) for _ in range(n - k)]
        else:
            vals = [rng.choice(pool_vals) for _ in range(n)]
        cells = b.cells(n)
        r = rng.random()
        if n and r < 0.05:
            cells[-1] = cells[0]  # repeated cell
        elif n and contents and r < 0.12:
            other = rng.choice(contents)[2]
            if other:
                cells[0] = rng.choice(other)  # cell shared with another block
        wf = rng.random() < wf_prob
        a = b.bloc()
        b.hB[a] = tuple(cells)
        for i, (c, v) in enumerate(zip(cells, vals)):
            if wf or i != len(cells) - 1:
                b.hV.setdefault(c, v)
        contents.append((a, vals, cells))
    for _ in range(rng.randint(0, max_cells)):
        b.cell(rng.choice(pool_vals))
    blocs = [c[0] for c in contents]
    for i, n in enumerate(bvars):
        if i < len(blocs) and rng.random() < 0.75:
            b.sB[n] = blocs[i]
        else:
            b.sB[n] = rng.choice(blocs + [b.bloc()])
    for n in fvars:
        r = rng.random()
        if r < 0.35 and bvars:
            b.sF[n] = (b.sB[bvars[0]],)
        elif r < 0.55:
            b.sF[n] = ()
        else:
            b.sF[n] = tuple(rng.choice(blocs or [1]) for _ in range(rng.randint(0, 2)))
    lens = {len(c[1]) for c in contents}
    loc_pool = sorted(set(pool_vals) | {n + d for n in lens for d in (-1, 0, 1, 2)}
                      | set(b.hV.values()) | set(b.hV))
    for n in lvars:
        b.sV[n] = rng.choice(loc_pool)
    return b.state()


def candidate_states(p, q, trials: int = 200, seed: int = 0, cmd=None) -> Iterator[State]:
    """Deterministic stream of states for bounded checks involving ``p`` and ``q``."""
    names = {n for n in names_in(p) | names_in(q) if var_sort(n) != "S"}
    if cmd is not None:
        names |= command_names(cmd)
    consts = _consts(p) | _consts(q)
    rng = random.Random(f"candidates:{seed}")
    for _ in range(trials):
        yield _random_state(rng, names, consts)


def _seq_fold(cmds: list):
    c = cmds[-1]
    for x in reversed(cmds[:-1]):
        c = Seq(x, c)
    return c


def reachable_states(script: ProofScript, seed: int = 0, fuel: int = 200, per_pre: int = 6,
                     budget: int = 60, cap: int = 400) -> list:
    """States met while running the goal program from generated pre-states.

    Every step whose command is a contiguous run of the goal program's
    top-level sequence contributes states satisfying its precondition; the
    rest of the program is executed from each and all intermediate states
    are collected.
    """
    if not script.steps:
        return []
    goal = next((s for s in script.steps if s.id == script.goal), script.steps[-1]).triple
    prog = flatten_seq(goal.cmd)
    starts: dict = {}
    for st in script.steps:
        parts = flatten_seq(st.triple.cmd)
        for k in range(len(prog) - len(parts) + 1):
            if prog[k:k + len(parts)] == parts:
                starts.setdefault((k, st.triple.pre), None)
                break
    out: list = []
    seen: set = set()

    def add(s):
        if s not in seen and len(out) < cap:
            seen.add(s)
            out.append(s)

    for (k, pre) in starts:
        found = 0
        base = _Builder(random.Random(f"reachable:{seed}:{k}"))
        base.complete(command_names(goal.cmd) | {n for n in names_in(pre) if var_sort(n) != "S"})
        for s in itertools.chain([base.state()], candidate_states(pre, pre, budget, seed, cmd=goal.cmd)):
            if found >= per_pre:
                break
            if not sat(s, pre):
                continue
            found += 1
            add(s)
            for e in trace(_seq_fold(prog[k:]), s, fuel).entries:
                if e.state is not None:
                    add(e.state)
    return out


def gen_state(params: GenParams = GenParams(), rng: Optional[random.Random] = None,
              names: Iterable[str] = ("x", "y", "z", "i", "b1", "b2", "f1", "f2")) -> State:
    """Sort-correct random state; each block is well formed with probability one half."""
    rng = rng or random.Random(params.seed)
    return _random_state(rng, set(names), set(), wf_prob=0.5, max_blocks=params.max_blocks,
                         max_len=params.max_block_len, max_cells=params.max_cells,
                         value_range=params.value_range) if params.max_blocks or params.max_cells \
        else _store_only(rng, names, params)


def _store_only(rng, names, params) -> State:
    b = _Builder(rng, params.value_range)
    b.complete(names)
    return b.state()


# --------------------------------------------------- template synthesis

def _template(p, rng: random.Random) -> Optional[State]:
    """Build a state for the common precondition shapes, or None."""
    b = _Builder(rng)
    lv = None
    body = p
    if isinstance(body, Exists) and var_sort(body.var) == "S":
        lv, body = body.var, body.body
    if not isinstance(body, Pair):
        return None
    loc_parts = _flat_and(body.loc)
    blk = body.blk
    eqs = [c for c in loc_parts if isinstance(c, Cmp) and c.op == "=" and isinstance(c.left, Var)]
    for c in eqs:
        if isinstance(c.right, Var):
            v = b.sV.get(c.right.name, b.sV.get(c.left.name, b.value()))
            b.sV[c.left.name] = b.sV[c.right.name] = v
    seq_corr = [c for c in loc_parts if isinstance(c, SeqCorr)]
    if lv is not None:
        if not (isinstance(blk, BlkPointsTo) and blk.seq == SeqVar(lv) and len(seq_corr) == 1):
            return None
        rhs = seq_corr[0].rhs
        b.complete(n for n in names_in(p) if var_sort(n) in "VF" and n != lv)
        st = b.state()
        if rhs is None:
            vals = [b.value() for _ in range(rng.randint(0, 3))]
        elif isinstance(rhs, Override):
            vals = [loc_value(e, st) for e in rhs.values]
            i = loc_value(rhs.index, st)
            if not 1 <= i <= len(vals):
                return None
            vals[i - 1] = loc_value(rhs.value, st)
        else:
            vals = [loc_value(e, st) for e in rhs]
        a = b.block(vals)
        if isinstance(blk.block, BVar):
            b.sB[blk.block.name] = a
        else:
            return None
    else:
        for c in loc_parts:
            if isinstance(c, PointsTo):
                b.complete(names_in(c.addr))
                addr = b.eval(c.addr)
                if addr < 0 or addr % 2:
                    return None
                b.hV[addr] = b.eval(c.value) if c.value is not None else b.value()
        if blk not in (EMP_B, TRUE_B):
            return None
    b.complete(n for n in names_in(p) if var_sort(n) != "S")
    return b.state()


def _flat_and(p) -> list:
    if isinstance(p, And):
        return _flat_and(p.left) + _flat_and(p.right)
    return [p]


def gen_state_satisfying(p, params: GenParams = GenParams(), bounds: Bounds = DEFAULT_BOUNDS,
                         budget: Optional[int] = None) -> Optional[State]:
    """A state satisfying ``p``: template synthesis first, then rejection sampling."""
    rng = random.Random(f"satisfying:{params.seed}")
    for _ in range(4):
        s = _template(p, rng)
        if s is not None and sat(s, p, bounds):
            return s
    for s in candidate_states(p, p, budget or params.trials, params.seed):
        if sat(s, p, bounds):
            return s
    return None


# ------------------------------------------------------ axiom instances
# Each generator returns (triple, state) with the state built to satisfy the
# precondition. Names: x, x1, x2, y, z, k (locations), b, b1, b2 (blocks),
# f, f1, f2, f3 (files); bound names use b3.., l, @l.

_LV = ("x", "y", "z")


def _expr(rng, names=_LV, depth: int = 1):
    """Random location expression whose evaluation cannot fault."""
    r = rng.random()
    if depth <= 0 or r < 0.35:
        return Num(rng.randint(-2, 6)) if rng.random() < 0.5 else Var(rng.choice(names))
    if r < 0.7:
        return Var(rng.choice(names))
    return BinOp(rng.choice("+-"), _expr(rng, names, depth - 1), _expr(rng, names, depth - 1))


def _addr_expr(rng, b: _Builder, names=("y",)):
    """An expression denoting an even address; binds the variables it uses."""
    a = 2 * rng.randint(0, 10)
    r = rng.random()
    if r < 0.4:
        b.sV[names[0]] = a
        return Var(names[0]), a
    if r < 0.7:
        b.sV[names[0]] = a - 2
        return BinOp("+", Var(names[0]), Num(2)), a
    return Num(a), a


def _sub(node, old, new):
    return substitute(node, {old: new})


def _and_all(parts):
    out = parts[0]
    for x in parts[1:]:
        out = And(out, x)
    return out


def _noise(b: _Builder, rng, cells: int = 2, blocks: int = 1):
    for _ in range(rng.randint(0, cells)):
        b.cell()
    for _ in range(rng.randint(0, blocks)):
        n = rng.randint(0, 2)
        b.block([b.value() for _ in range(n)], well_formed=rng.random() < 0.5)


def _finish(b: _Builder, t: Triple):
    b.complete(n for n in names_in(t.pre) | names_in(t.post) | command_names(t.cmd) if var_sort(n) != "S")
    return t, b.state()


def _i_skip(rng):
    b = _Builder(rng)
    b.complete(_LV)
    r = rng.random()
    if r < 0.3:
        p = Pair(EMP_V, EMP_B)
    elif r < 0.6:
        p = Pair(And(Cmp("=", Var("x"), Num(b.sV["x"])), TRUE_V), TRUE_B)
        _noise(b, rng)
    else:
        v = b.value()
        a = b.block([v])
        b.sB["b"] = a
        p = Exists("@l", Pair(SeqCorr(SeqVar("@l"), (Num(v),)), BlkPointsTo(BVar("b"), SeqVar("@l"))))
    return _finish(b, Triple(p, Skip(), p))


def _eq_pre(b, rng, x="x", x1="x1"):
    b.sV[x] = b.sV[x1] = b.value()
    return Pair(And(Cmp("=", Var(x), Var(x1)), EMP_V), EMP_B)


def _i_sa(rng):
    b = _Builder(rng)
    b.complete(("y", "z"))
    e = _expr(rng, ("x", "y", "z"), 2)
    pre = _eq_pre(b, rng)
    post = Pair(And(Cmp("=", Var("x"), _sub(e, "x", Var("x1"))), EMP_V), EMP_B)
    return _finish(b, Triple(pre, Assign("x", e), post))


def _i_la(rng):
    b = _Builder(rng)
    b.complete(("y", "z"))
    args = tuple(_expr(rng, ("x", "y", "z")) for _ in range(rng.randint(0, 3)))
    pre = _eq_pre(b, rng)
    a2 = tuple(_sub(a, "x", Var("x1")) for a in args)
    body = EMP_V if not a2 else PointsTo(Var("x"), a2[0]) if len(a2) == 1 else PointsToList(Var("x"), a2)
    return _finish(b, Triple(pre, Cons("x", args), Pair(body, EMP_B)))


def _i_ll(rng):
    b = _Builder(rng)
    if rng.random() < 0.3:
        a = 2 * rng.randint(0, 10)
        b.sV["x"] = b.sV["x1"] = a
        e = Var("x")
    else:
        e, a = _addr_expr(rng, b)
        b.sV["x"] = b.sV["x1"] = b.value()
    b.sV["z"] = b.value()
    b.hV[a] = b.sV["z"]
    pre = Pair(And(Cmp("=", Var("x"), Var("x1")), PointsTo(e, Var("z"))), EMP_B)
    post = Pair(And(Cmp("=", Var("x"), Var("z")), PointsTo(_sub(e, "x", Var("x1")), Var("z"))), EMP_B)
    return _finish(b, Triple(pre, Lookup("x", e), post))


def _i_lm(rng):
    b = _Builder(rng)
    e, a = _addr_expr(rng, b)
    b.hV[a] = b.value()
    v = _expr(rng, ("x", "y", "z"))
    return _finish(b, Triple(Pair(PointsTo(e, None), EMP_B), Mutate(e, v), Pair(PointsTo(e, v), EMP_B)))


def _i_dl(rng):
    b = _Builder(rng)
    e, a = _addr_expr(rng, b)
    b.hV[a] = b.value()
    return _finish(b, Triple(Pair(PointsTo(e, None), EMP_B), Dispose(e), Pair(EMP_V, EMP_B)))


def _wf_blocks(b: _Builder, rng, names=("b1", "b2")):
    for n in names:
        b.sB[n] = b.block([b.value() for _ in range(rng.randint(0, 3))])


def _alpha(b: _Builder, rng, extra=()):
    opts = [TRUE_V, And(Cmp("=", Var("y"), Num(b.sV.setdefault("y", b.value()))), TRUE_V)] + list(extra)
    return rng.choice(opts)


def _i_fc(rng):
    b = _Builder(rng)
    _wf_blocks(b, rng)
    bks = tuple(BVar(rng.choice(("b1", "b2"))) for _ in range(rng.randint(0, 2)))
    beta = [BlkCorr(x, x) for x in dict.fromkeys(bks)]
    if rng.random() < 0.3:
        beta.append(BlkEq(BVar("b1"), BVar("b1")))
    with_nil = rng.random() < 0.5
    if with_nil:
        b.sF["f"] = ()
    pre_b = ([FileEq(FVar("f"), Nil())] if with_nil else []) + beta
    pre_b = pre_b or [TRUE_B]
    post_b = [FileEq(FVar("f"), FTuple(bks))] + (beta or ([] if with_nil else [TRUE_B]))
    a = _alpha(b, rng)
    _noise(b, rng)
    return _finish(b, Triple(Pair(a, _and_all(pre_b)), Create("f", bks), Pair(a, _and_all(post_b))))


def _file_of_blocks(b: _Builder, rng, n_max=2):
    blocs = [b.sB[n] for n in ("b1", "b2") if n in b.sB] or [b.bloc()]
    return tuple(rng.choice(blocs) for _ in range(rng.randint(0, n_max)))


def _i_attach(rng, with_len: bool = False):
    b = _Builder(rng)
    _wf_blocks(b, rng)
    b.sF["f"] = b.sF["f1"] = _file_of_blocks(b, rng)
    choices = [BVar("b1"), BVar("b2")]
    if b.sF["f"]:
        choices.append(FIndex("f", Num(1)))
    bks = tuple(rng.choice(choices) for _ in range(rng.randint(0, 2)))
    beta = [BlkCorr(x, x) for x in dict.fromkeys(bks)]
    if rng.random() < 0.3:
        b.sF["f2"] = b.sF["f"]
        beta.append(FileEq(FVar("f"), FVar("f2")))
    alpha = [TRUE_V]
    if not with_len and rng.random() < 0.4:
        alpha = [Cmp("=", FileLen(FVar("f")), Num(len(b.sF["f"]))), TRUE_V]
    sf = lambda n: _sub(n, "f", FVar("f1"))  # noqa: E731
    head = FileEq(FVar("f"), FVar("f1"))
    newf = FileEq(FVar("f"), FConcat(FVar("f1"), FTuple(tuple(sf(x) for x in bks))))
    if with_len:
        m = Num(len(b.sF["f"])) if rng.random() < 0.5 else Var("k")
        b.sV["k"] = len(b.sF["f"])
        pre_a = [Cmp("=", FileLen(FVar("f")), m)] + alpha
        post_a = [Cmp("=", FileLen(FVar("f")), BinOp("+", m, Num(len(bks))))] + [sf(x) for x in alpha]
    else:
        pre_a, post_a = alpha, [sf(x) for x in alpha]
    pre = Pair(_and_all(pre_a), _and_all([head] + beta))
    post = Pair(_and_all(post_a), _and_all([newf] + [sf(x) for x in beta]))
    _noise(b, rng)
    return _finish(b, Triple(pre, Attach("f", bks), post))


def _i_fd(rng):
    b = _Builder(rng)
    _wf_blocks(b, rng)
    b.sF["f"] = b.sF["f1"] = _file_of_blocks(b, rng)
    alpha = rng.choice([TRUE_V, And(Cmp("=", FileLen(FVar("f")), Num(len(b.sF["f"]))), TRUE_V)])
    beta = []
    if rng.random() < 0.5:
        b.sF["f2"] = b.sF["f"]
        beta.append(FileEq(FVar("f"), FVar("f2")))
    sf = lambda n: _sub(n, "f", FVar("f1"))  # noqa: E731
    pre = Pair(alpha, _and_all([FileEq(FVar("f"), FVar("f1"))] + beta))
    post = Pair(sf(alpha), _and_all([FileEq(FVar("f"), Nil())] + [sf(x) for x in beta]))
    return _finish(b, Triple(pre, DeleteFile("f"), post))


def _i_ba(rng):
    b = _Builder(rng)
    b.complete(("x", "y"))
    es = tuple(_expr(rng, ("x", "y")) for _ in range(rng.randint(0, 3)))
    post = Exists("@l", Pair(SeqCorr(SeqVar("@l"), es), BlkPointsTo(BVar("b"), SeqVar("@l"))))
    return _finish(b, Triple(Pair(EMP_V, EMP_B), Allocate("b", es), post))


def _i_baalt(rng):
    b = _Builder(rng)
    b.complete(("x", "y"))
    es = tuple(_expr(rng, ("x", "y")) for _ in range(rng.randint(0, 3)))
    post = Exists("b9", Pair(TRUE_V, And(BlkEq(BVar("b"), BVar("b9")), BlkCorr(BVar("b9"), BVar("b9")))))
    return _finish(b, Triple(Pair(EMP_V, EMP_B), Allocate("b", es), post))


def _i_bca(rng):
    b = _Builder(rng)
    b.complete(("x", "y"))
    es = tuple(_expr(rng, ("x", "y")) for _ in range(rng.randint(0, 3)))
    st = b.state()
    a = b.block([loc_value(e, st) for e in es])
    bk = BVar("b")
    b.sB["b"] = a
    if rng.random() < 0.3:
        b.sF["f"] = (a,)
        bk = FIndex("f", Num(1))
    e = _expr(rng, ("x", "y"))
    lv = SeqVar("@l")
    corr = SeqCorr(lv, es)
    pre = Exists("@l", Pair(corr, BlkPointsTo(bk, lv)))
    post = Exists("@l", Exists("l", Pair(Star(corr, PointsTo(Var("l"), e)),
                                         BlkPointsTo(bk, SeqCat(lv, SeqLit((Var("l"),)))))))
    return _finish(b, Triple(pre, Append(bk, e), post))


def _i_bcaalt(rng):
    b = _Builder(rng)
    b.complete(("x", "y"))
    a = b.block([b.value() for _ in range(rng.randint(0, 3))])
    b.sB["b"] = a
    _noise(b, rng)
    e = _expr(rng, ("x", "y"))
    bk, b3, b4 = BVar("b"), BVar("b3"), BVar("b4")
    pre = Exists("b3", Pair(TRUE_V, And(BlkEq(bk, b3), BlkCorr(b3, b3))))
    post = Exists("b3", Exists("b4", Exists("l", Pair(
        Star(TRUE_V, PointsTo(Var("l"), e)),
        And(BlkCat(bk, (b3, b4)), Star(Star(TRUE_B, BlkCorr(b3, b3)), BlkPointsTo(b4, SeqLit((Var("l"),)))))))))
    return _finish(b, Triple(pre, Append(bk, e), post))


def _lookup_setup(b: _Builder, rng):
    n = rng.randint(1, 3)
    k = rng.randint(1, n)
    if rng.random() < 0.5:
        i = Num(k)
    else:
        i = Var("k")
        b.sV["k"] = k
    r = rng.random()
    if r < 0.3:
        e = Var("x")
        b.sV["x"] = b.sV["x1"] = k
    else:
        b.sV["x"] = b.sV["x1"] = b.value()
        if r < 0.65:
            e = Var("z")
            b.sV["z"] = k
        else:
            e = Num(k)
    return n, k, i, e


def _i_bcl(rng):
    b = _Builder(rng)
    b.complete(("y",))
    n, k, i, e = _lookup_setup(b, rng)
    es = tuple(_expr(rng, ("x", "y")) for _ in range(n))
    b.sV["x2"] = b.value()
    st = b.state()
    vals = [loc_value(v, st) for v in es]
    vals[k - 1] = b.sV["x2"]
    b.sB["b"] = b.block(vals)
    lv = SeqVar("@l")
    sx = lambda t: _sub(t, "x", Var("x1"))  # noqa: E731
    pre = Exists("@l", Pair(_and_all([Cmp("=", Var("x"), Var("x1")), Cmp("=", e, i),
                                      SeqCorr(lv, Override(es, i, Var("x2")))]),
                            BlkPointsTo(BVar("b"), lv)))
    post = Exists("@l", Pair(_and_all([Cmp("=", Var("x"), Var("x2")), Cmp("=", sx(e), i),
                                       SeqCorr(lv, Override(tuple(sx(v) for v in es), i, Var("x2")))]),
                             BlkPointsTo(BVar("b"), lv)))
    return _finish(b, Triple(pre, BlockLookup("x", BVar("b"), e), post))


def _i_bclalt(rng):
    b = _Builder(rng)
    n, k, i, e = _lookup_setup(b, rng)
    cells = b.cells(n)
    b.sV["x2"] = b.value()
    for j, c in enumerate(cells):
        if j == k - 1:
            b.hV[c] = b.sV["x2"]
        elif rng.random() < 0.8:
            b.hV[c] = b.value()
    b.sB["b"] = b.block([], well_formed=False, cells=cells)
    _noise(b, rng)
    B3, B4, B5, L = BVar("b3"), BVar("b4"), BVar("b5"), Var("l")
    bcat = BlkCat(BVar("b"), (B3, B4, B5))
    hook = BlkHook(B4, SeqLit((L,)))
    len_c = Cmp("=", BlockLen(B3), BinOp("-", i, Num(1)))
    pre_l = _and_all([len_c, Cmp("=", Var("x"), Var("x1")), Cmp("=", e, i), Hook(L, Var("x2"))])
    post_l = _and_all([len_c, Cmp("=", Var("x"), Var("x2")), Cmp("=", _sub(e, "x", Var("x1")), i),
                       Hook(L, Var("x2"))])

    def q(body):
        return Exists("b3", Exists("b4", Exists("b5", Exists("l", body))))
    pre = q(Pair(pre_l, And(bcat, hook)))
    post = q(Pair(post_l, And(bcat, hook)))
    return _finish(b, Triple(pre, BlockLookup("x", BVar("b"), e), post))


def _i_bassign(rng):
    b = _Builder(rng)
    _wf_blocks(b, rng, ("b", "b2"))
    b.sB["b1"] = b.sB["b"]
    bk = BVar(rng.choice(("b", "b1", "b2")))
    alpha = rng.choice([TRUE_V, And(Cmp("=", BlockLen(BVar("b")), Num(len(b.hB[b.sB["b"]]))), TRUE_V)])
    beta = rng.choice([[], [BlkCorr(BVar("b"), BVar("b"))], [BlkEq(BVar("b2"), BVar("b2"))]])
    sb = lambda t: _sub(t, "b", BVar("b1"))  # noqa: E731
    pre = Pair(alpha, _and_all([BlkEq(BVar("b"), BVar("b1"))] + beta))
    post = Pair(sb(alpha), _and_all([BlkEq(BVar("b"), sb(bk))] + [sb(x) for x in beta]))
    _noise(b, rng)
    return _finish(b, Triple(pre, BAssign("b", bk), post))


def _file_split(b: _Builder, rng):
    blocs = [b.sB["b1"], b.sB["b2"]]
    if rng.random() < 0.5:
        f2 = Nil()
        v2: tuple = ()
    else:
        f2 = FVar("f2")
        v2 = b.sF["f2"] = tuple(rng.choice(blocs) for _ in range(rng.randint(0, 2)))
    r = rng.random()
    if r < 0.3:
        f3, v3 = None, ()
    elif r < 0.6:
        f3, v3 = Nil(), ()
    else:
        f3 = FVar("f3")
        v3 = b.sF["f3"] = tuple(rng.choice(blocs) for _ in range(rng.randint(0, 2)))
    return f2, v2, f3, v3


def _split_expr(f2, bk, f3):
    inner = FAppend(f2, bk)
    return inner if f3 is None else FConcat(inner, f3)


def _index_expr(b: _Builder, rng, k: int):
    if rng.random() < 0.5:
        return Num(k)
    b.sV["k"] = k
    return Var("k")


def _i_baaalt(rng):
    b = _Builder(rng)
    _wf_blocks(b, rng)
    f2, v2, f3, v3 = _file_split(b, rng)
    b.sF["f"] = v2 + (b.sB["b1"],) + v3
    i = _index_expr(b, rng, len(v2) + 1)
    beta = rng.choice([[], [BlkCorr(BVar("b1"), BVar("b1"))]])
    head_a = Cmp("=", FileLen(f2), BinOp("-", i, Num(1)))
    split = FileEq(FVar("f"), _split_expr(f2, BVar("b1"), f3))
    pre = Pair(And(head_a, TRUE_V), _and_all([split] + beta))
    post = Pair(And(head_a, TRUE_V), _and_all([split, BlkEq(BVar("b"), BVar("b1"))] + beta))
    return _finish(b, Triple(pre, BAssign("b", FIndex("f", i)), post))


def _i_barf(rng):
    b = _Builder(rng)
    _wf_blocks(b, rng)
    f2, v2, f3, v3 = _file_split(b, rng)
    b.sF["f"] = v2 + (b.sB["b1"],) + v3
    e = _index_expr(b, rng, len(v2) + 1)
    bk = BVar(rng.choice(("b1", "b2")))
    alpha = rng.choice([[TRUE_V], [Cmp("=", FileLen(FVar("f")), Num(len(b.sF["f"]))), TRUE_V]])
    head_a = Cmp("=", FileLen(f2), BinOp("-", e, Num(1)))
    pre = Pair(_and_all([head_a] + alpha), FileEq(FVar("f"), _split_expr(f2, BVar("b1"), f3)))
    post = Pair(_and_all([head_a] + alpha), FileEq(FVar("f"), _split_expr(f2, bk, f3)))
    return _finish(b, Triple(pre, SetFileBlock("f", e, bk), post))


def _i_bd(rng):
    b = _Builder(rng)
    b.complete(("x", "y"))
    if rng.random() < 0.5:
        rhs = None
        vals = [b.value() for _ in range(rng.randint(0, 3))]
    else:
        rhs = tuple(_expr(rng, ("x", "y")) for _ in range(rng.randint(0, 3)))
        st = b.state()
        vals = [loc_value(e, st) for e in rhs]
    b.sB["b"] = b.block(vals)
    lv = SeqVar("@l")
    pre = Exists("@l", Pair(SeqCorr(lv, rhs), BlkPointsTo(BVar("b"), lv)))
    post = Exists("@l", Pair(SeqCorr(lv, rhs), EMP_B))
    return _finish(b, Triple(pre, DeleteBlock(BVar("b")), post))


def _i_baap(rng):
    return _i_attach(rng, with_len=True)


def _i_bclbw(rng):
    b = _Builder(rng)
    b.complete(("y",))
    n, k, i, e = _lookup_setup(b, rng)
    es = tuple(_expr(rng, ("y",)) for _ in range(n))
    st = b.state()
    vals = [loc_value(v, st) for v in es]
    vals[k - 1] = b.value()
    a = b.block(vals)
    b.sB["b"] = a
    lv = SeqVar("@l")
    if rng.random() < 0.5:
        b.sV["z"] = vals[k - 1] if rng.random() < 0.85 else b.value()
        p = Pair(And(Cmp("=", Var("x"), Var("z")), TRUE_V), TRUE_B)
        if rng.random() < 0.5:
            b.cell()
    else:
        p = Exists("@l", Pair(SeqCorr(lv, Override(es, i, Var("x"))), BlkPointsTo(BVar("b"), lv)))
    block = Pair(SeqCorr(lv, Override(es, i, Var("x1"))), BlkPointsTo(BVar("b"), lv))
    pre = And(Pair(Cmp("=", e, i), TRUE_B),
              Exists("@l", Exists("x1", Star(block, Wand(block, _sub(p, "x", Var("x1")))))))
    if isinstance(e, Var) and e.name == "x":
        # the index variable is overwritten by the lookup; keep it out of p
        pass
    return _finish(b, Triple(pre, BlockLookup("x", BVar("b"), e), p))


INSTANCE_GENERATORS: dict[str, Callable] = {
    "A1": _i_skip, "A2": _i_sa, "A3": _i_la, "A4": _i_ll, "A5": _i_lm, "A6": _i_dl,
    "A7": _i_fc, "A8": _i_attach, "A9": _i_fd, "A10": _i_ba, "A11": _i_baalt,
    "A12": _i_bca, "A13": _i_bcaalt, "A14": _i_bcl, "A15": _i_bclalt, "A16": _i_bassign,
    "A17": _i_baaalt, "A18": _i_barf, "A19": _i_bd, "A20": _i_baap, "A21": _i_bclbw,
}


def axiom_instance(aid: str, rng: random.Random) -> tuple[Triple, State]:
    return INSTANCE_GENERATORS[aid](rng)


def _negate_post(t: Triple) -> Triple:
    return Triple(t.pre, t.cmd, Not(t.post))


def _a5_self(t: Triple) -> Triple:
    return Triple(t.pre, t.cmd, Pair(PointsTo(t.cmd.addr, t.cmd.addr), EMP_B))


def _a2_nosubst(t: Triple) -> Triple:
    return Triple(t.pre, t.cmd, Pair(And(Cmp("=", Var("x"), BinOp("+", t.cmd.expr, Num(1))), EMP_V), EMP_B))


def _a10_shift(t: Triple) -> Triple:
    vals = tuple(BinOp("+", e, Num(1)) for e in t.cmd.args) or (Num(0),)
    lv = SeqVar("@l")
    return Triple(t.pre, t.cmd, Exists("@l", Pair(SeqCorr(lv, vals), BlkPointsTo(BVar(t.cmd.var), lv))))


def _keep_pre(t: Triple) -> Triple:
    return Triple(t.pre, t.cmd, t.pre)


# A catalogue of schema mutations; each should be caught by fuzz_axiom.
SCHEMA_MUTATIONS: dict[str, Callable] = {aid: _negate_post for aid in INSTANCE_GENERATORS}
SCHEMA_MUTATIONS.update({"A5": _a5_self, "A2": _a2_nosubst, "A10": _a10_shift, "A19": _keep_pre})


def _trial_seed(suite: str, seed: int, k: int) -> str:
    return f"{suite}:{seed}:{k}"


def fuzz_axiom(aid: str, params: GenParams = GenParams(), bounds: Bounds = DEFAULT_BOUNDS,
               transform: Optional[Callable] = None) -> FuzzReport:
    """Random instances of one axiom executed from states satisfying their precondition.

    ``transform`` tampers with each instance before checking (used to show
    the suite notices broken schemas).
    """
    from .hoare import axiom_id
    from .syntax import pretty_print

    canon = axiom_id(aid)
    if canon is None:
        raise KeyError(aid)
    rep = FuzzReport(f"axiom:{canon}/{AXIOMS[canon].mnemonic}")
    for k in range(params.trials):
        tseed = _trial_seed(canon, params.seed, k)
        t, s = axiom_instance(canon, random.Random(tseed))
        rep.trials += 1
        if transform is None:
            try:
                match_axiom(canon, t)
            except MatchError as exc:
                rep.failures.append(Failure(k, tseed, format_state(s), pretty_print(t),
                                            "a schema instance", f"generator produced a non-instance: {exc}"))
                continue
        else:
            t = transform(t)
        res = holds_partial(t, [s], fuel=100, bounds=bounds, limit=1)
        if res.checked == 0:
            rep.vacuous += 1
        elif res.counterexamples:
            _, why = res.counterexamples[0]
            rep.failures.append(Failure(k, tseed, format_state(s), pretty_print(t),
                                        "normal termination in a postcondition state", why))
    return rep


def fuzz_axioms(params: GenParams = GenParams(), bounds: Bounds = DEFAULT_BOUNDS) -> list:
    return [fuzz_axiom(aid, params, bounds) for aid in AXIOMS]


# ------------------------------------------------------ command generator

_CMD_LOC = ("x", "y", "z")
_CMD_BLK = ("b", "b1")
_CMD_FILE = ("f", "f1")


def _gen_loc(rng, names=_CMD_LOC):
    r = rng.random()
    if r < 0.015:
        return Var("w")  # never bound: unbound-variable faults
    if r < 0.06:
        return BlockLen(BVar(rng.choice(_CMD_BLK)))
    if r < 0.35:
        return Num(rng.randint(0, 8))
    if r < 0.8:
        return Var(rng.choice(names))
    return BinOp(rng.choice("+-"), Var(rng.choice(names)), Num(rng.choice((0, 2))))


def _gen_addr(rng):
    """Mostly a variable, which command-fuzz states bind to allocated cells."""
    return Var(rng.choice(_CMD_LOC)) if rng.random() < 0.85 else _gen_loc(rng)


def _gen_blk(rng):
    r = rng.random()
    if r < 0.04:
        return BNum(rng.choice((2, 3, 5)))  # even literals are sort errors
    if r < 0.12:
        return FIndex(rng.choice(_CMD_FILE), Num(1 if rng.random() < 0.8 else 2))
    return BVar(rng.choice(_CMD_BLK))


def gen_atomic(rng: random.Random, avoid: frozenset = frozenset()):
    """One random atomic command that never assigns a variable in ``avoid``."""
    locs = [n for n in _CMD_LOC if n not in avoid]
    blks = [n for n in _CMD_BLK if n not in avoid]
    files = [n for n in _CMD_FILE if n not in avoid]
    while True:
        kind = rng.randrange(15)
        if kind == 0:
            return Skip()
        if kind == 1 and locs:
            return Assign(rng.choice(locs), _gen_loc(rng))
        if kind == 2 and locs:
            return Cons(rng.choice(locs), tuple(_gen_loc(rng) for _ in range(rng.randint(0, 2))))
        if kind == 3 and locs:
            return Lookup(rng.choice(locs), _gen_addr(rng))
        if kind == 4:
            return Mutate(_gen_addr(rng), _gen_loc(rng))
        if kind == 5:
            return Dispose(_gen_addr(rng))
        if kind == 6 and files:
            return Create(rng.choice(files), tuple(_gen_blk(rng) for _ in range(rng.randint(0, 2))))
        if kind == 7 and files:
            return Attach(rng.choice(files), tuple(_gen_blk(rng) for _ in range(rng.randint(0, 2))))
        if kind == 8 and files:
            return DeleteFile(rng.choice(files))
        if kind == 9 and blks:
            return Allocate(rng.choice(blks), tuple(_gen_loc(rng) for _ in range(rng.randint(0, 2))))
        if kind == 10:
            return Append(_gen_blk(rng), _gen_loc(rng))
        if kind == 11 and locs:
            return BlockLookup(rng.choice(locs), _gen_blk(rng), Num(1 if rng.random() < 0.8 else 2))
        if kind == 12 and blks:
            return BAssign(rng.choice(blks), _gen_blk(rng))
        if kind == 13:
            return DeleteBlock(_gen_blk(rng))
        if kind == 14 and files:
            return SetFileBlock(rng.choice(files), Num(1 if rng.random() < 0.8 else 3), _gen_blk(rng))


def _gen_bool(rng):
    r = rng.random()
    if r < 0.45:
        return Cmp(rng.choice(("=", "<=")), _gen_loc(rng), _gen_loc(rng))
    if r < 0.6:
        return BlkEq(_gen_blk(rng), _gen_blk(rng))
    if r < 0.7:
        return BoolConst(rng.random() < 0.5)
    if r < 0.8:
        return BoolNot(_gen_bool(rng))
    return (BoolAnd if rng.random() < 0.5 else BoolOr)(_gen_bool(rng), _gen_bool(rng))


def gen_command(rng: random.Random, size: int = 3, depth: int = 2, avoid: frozenset = frozenset()):
    """Straight-line code with conditionals and loops of constant trip count."""
    parts = []
    for _ in range(max(1, rng.randint(1, size))):
        r = rng.random()
        if depth and r < 0.12:
            parts.append(If(_gen_bool(rng), gen_command(rng, 2, depth - 1, avoid),
                            gen_command(rng, 2, depth - 1, avoid)))
        elif depth and r < 0.22:
            counter = "k"
            body = gen_command(rng, 2, depth - 1, avoid | {counter})
            n = rng.randint(0, 3)
            parts.append(Seq(Assign(counter, Num(0)),
                             While(Cmp("<=", Var(counter), Num(n - 1)),
                                   Seq(body, Assign(counter, BinOp("+", Var(counter), Num(1)))))))
        else:
            parts.append(gen_atomic(rng, avoid))
    return _seq_fold(parts)


# ---------------------------------------------------------- frame lemmas

def _command_state(rng, params: GenParams) -> State:
    """A state where location variables usually hold allocated cells."""
    s = _random_state(rng, set(_CMD_LOC + _CMD_BLK + _CMD_FILE), set(), wf_prob=0.8,
                      max_blocks=params.max_blocks, max_len=params.max_block_len,
                      max_cells=params.max_cells, value_range=params.value_range)
    cells = sorted(s.hV)
    sV = {n: (rng.choice(cells) if cells and rng.random() < 0.7 else v) for n, v in s.sV.items()}
    return s.replace(sV=sV)


def _frame_heaps(rng, s: State) -> tuple[dict, dict]:
    b = _Builder(rng)
    b._cells.update(s.hV)
    for cells in s.hB.values():
        b._cells.update(cells)
    for _ in range(rng.randint(0, 3)):
        b.cell()
    for _ in range(rng.randint(0, 2)):
        while True:
            a = b.bloc()
            if a not in s.hB:
                break
        b.hB[a] = tuple(b.cells(rng.randint(0, 2)))
        for c in b.hB[a]:
            b.hV[c] = b.value()
    return b.hV, b.hB


def _heaps_extend(s: State, hV: dict, hB: dict) -> State:
    nv = dict(s.hV)
    nv.update(hV)
    nb = dict(s.hB)
    nb.update(hB)
    return s.with_heaps(nv, nb)


def _stores_equal_on(a: State, b: State, names) -> list:
    bad = []
    for n in names:
        store = {"V": "sV", "B": "sB", "F": "sF"}[var_sort(n)]
        if getattr(a, store).get(n) != getattr(b, store).get(n):
            bad.append(n)
    return bad


def fuzz_frame_lemmas(params: GenParams = GenParams(), fuel: int = 200) -> FuzzReport:
    """Safety/termination monotonicity, the frame property and write locality."""
    from .syntax import pretty_print

    rep = FuzzReport("frame-lemmas")
    rep.caveats.append("frame property checked against a run whose allocator avoids the frame's "
                       "addresses, i.e. modulo a bijection on fresh addresses")
    for k in range(params.trials):
        tseed = _trial_seed("frame-lemmas", params.seed, k)
        rng = random.Random(tseed)
        c = gen_command(rng)
        s = _command_state(rng, params)
        hV1, hB1 = _frame_heaps(rng, s)
        rep.trials += 1
        if not (heap_disjoint(s.hV, hV1) and heap_disjoint(s.hB, hB1)):
            rep.skipped += 1
            continue
        big = _heaps_extend(s, hV1, hB1)
        small_out = exec_command(c, s, fuel)
        big_out = exec_command(c, big, fuel)

        def fail(expected, actual):
            rep.failures.append(Failure(k, tseed, format_state(s), pretty_print(c), expected, actual))

        if not isinstance(small_out, Final):
            rep.vacuous += isinstance(small_out, Fault)
            continue
        if isinstance(big_out, Fault):
            fail("safe run on the extended heap", f"fault {big_out.kind.value}")
            continue
        if isinstance(big_out, OutOfFuel):
            fail("termination on the extended heap", "out of fuel")
            continue
        unmodified = (set(s.sV) | set(s.sB) | set(s.sF)) - modifies(c).all()
        for label, out in (("small", small_out), ("extended", big_out)):
            bad = _stores_equal_on(s, out.state, unmodified)
            if bad:
                fail(f"{bad[0]} unchanged ({label} run)", "store value changed")
        reserved = exec_command(c, s, fuel, reserved=(frozenset(hV1), frozenset(hB1)))
        if not isinstance(reserved, Final):
            rep.skipped += 1
            rep.caveats.append(f"trial {k}: allocation-dependent control flow, frame property skipped")
            continue
        expect = _heaps_extend(reserved.state, hV1, hB1)
        if expect != big_out.state:
            fail(f"extended run = small run * frame: {format_state(expect)}",
                 format_state(big_out.state))
    return rep


# ------------------------------------------------------------ frame rule

_FRAME_AXIOMS = tuple(AXIOMS)


def _gen_frame(rng, s: State, forbidden: frozenset):
    """A frame assertion r over fresh names plus heap pieces satisfying it."""
    b = _Builder(rng)
    b._cells.update(s.hV)
    for cells in s.hB.values():
        b._cells.update(cells)
    kind = rng.randrange(6)
    store: dict = {}
    if kind == 0:
        return Pair(EMP_V, EMP_B), {}, {}, store
    if kind == 1:
        a = b.cell()
        return Pair(PointsTo(Num(a), Num(b.hV[a])), EMP_B), b.hV, {}, store
    if kind == 2:
        vals = [b.value() for _ in range(rng.randint(0, 2))]
        while True:
            addr = b.bloc()
            if addr not in s.hB:
                break
        cells = b.cells(len(vals))
        b.hB[addr] = tuple(cells)
        b.hV.update(zip(cells, vals))
        store["bw"] = addr
        lv = SeqVar("@m")
        r = Exists("@m", Pair(SeqCorr(lv, tuple(Num(v) for v in vals)), BlkPointsTo(BVar("bw"), lv)))
        return r, b.hV, b.hB, store
    if kind == 3:
        store["w"] = b.value()
        return Pair(And(Cmp("=", Var("w"), Num(store["w"])), EMP_V), EMP_B), {}, {}, store
    if kind == 4:
        a = b.cell()
        return Pair(Star(TRUE_V, PointsTo(Num(a), None)), TRUE_B), b.hV, {}, store
    return Const("G", True), {}, {}, store


def fuzz_frame_rule(params: GenParams = GenParams(), bounds: Bounds = DEFAULT_BOUNDS) -> FuzzReport:
    """Framed axiom instances {p * r} C {q * r} checked semantically."""
    from .syntax import pretty_print

    rep = FuzzReport("frame-rule")
    for k in range(params.trials):
        tseed = _trial_seed("frame-rule", params.seed, k)
        rng = random.Random(tseed)
        aid = _FRAME_AXIOMS[k % len(_FRAME_AXIOMS)]
        t, s = axiom_instance(aid, rng)
        r, hV, hB, store = _gen_frame(rng, s, modifies(t.cmd).all())
        rep.trials += 1
        if modifies(t.cmd).all() & names_in(r):
            rep.skipped += 1  # side condition violated: not a rule instance
            continue
        sv = dict(s.sV)
        sb = dict(s.sB)
        for n, v in store.items():
            (sb if var_sort(n) == "B" else sv)[n] = v
        framed_state = _heaps_extend(s.replace(sV=sv, sB=sb), hV, hB)
        framed = Triple(Star(t.pre, r), t.cmd, Star(t.post, r))
        res = holds_partial(framed, [framed_state], fuel=100, bounds=bounds, limit=1)
        if res.checked == 0:
            rep.vacuous += 1
        elif res.counterexamples:
            _, why = res.counterexamples[0]
            rep.failures.append(Failure(k, tseed, format_state(framed_state),
                                        f"[{aid}] {pretty_print(framed)}",
                                        "framed triple holds", why))
    return rep


SUITES = ("axioms", "frame-lemmas", "frame-rule", "all")
