"""Satisfaction checking for location, block and global assertions.

Quantifiers are finitised: they range over the state's footprint plus a few
fresh addresses and small constants (see :class:`Bounds`). Existentially
bound block variables may also denote a *slice block*: a fresh block address
whose content is a contiguous slice of an allocated block. This is what lets
a single block be described as ``b == b' (*) b''`` with both halves living in
the block heap.
"""

from __future__ import annotations

import functools

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

from .ast import *  # noqa: F401,F403
from .ast import var_sort
from .interp import ExecFault, FaultKind, block_value, file_value, loc_value
from .state import State, footprint

SPLIT_LIMIT = 20


@dataclass(frozen=True)
class Bounds:
    extra_locs: int = 2
    extra_blocs: int = 2
    max_file_len: int = 4
    value_range: tuple[int, int] = (-8, 8)

    def __post_init__(self):
        if min(self.extra_locs, self.extra_blocs, self.max_file_len) < 0:
            raise ValueError("bounds must be non-negative")
        if self.value_range[0] > self.value_range[1]:
            raise ValueError("empty value range")


DEFAULT_BOUNDS = Bounds()


class BoundsExceeded(UserWarning):
    pass


# ------------------------------------------------------------------ free vars

class FreeVars(NamedTuple):
    loc: frozenset
    blk: frozenset
    file: frozenset

    def all(self) -> frozenset:
        return self.loc | self.blk | self.file

    def __or__(self, other):  # type: ignore[override]
        return FreeVars(self.loc | other.loc, self.blk | other.blk, self.file | other.file)


def _names(node, out: set) -> None:
    """Collect every variable name occurring free in an expression or assertion."""
    if isinstance(node, (Var, SeqVar)):
        out.add(node.name)
    elif isinstance(node, BVar):
        out.add(node.name)
    elif isinstance(node, FVar):
        out.add(node.name)
    elif isinstance(node, FIndex):
        out.add(node.file)
        _names(node.index, out)
    elif isinstance(node, (Exists, Forall)):
        inner: set = set()
        _names(node.body, inner)
        inner.discard(node.var)
        out |= inner
    elif isinstance(node, (tuple, list)):
        for x in node:
            _names(x, out)
    elif hasattr(node, "__dataclass_fields__"):
        for name in node.__dataclass_fields__:
            if name == "line":
                continue
            _names(getattr(node, name), out)


def names_in(node) -> set:
    out: set = set()
    _names(node, out)
    return out


def _split_sorts(names: Iterable[str]) -> FreeVars:
    loc, blk, fil = set(), set(), set()
    for n in names:
        s = var_sort(n)
        (blk if s == "B" else fil if s == "F" else loc).add(n)
    return FreeVars(frozenset(loc), frozenset(blk), frozenset(fil))


def free_vars(p) -> FreeVars:
    """Sort-separated free variables; sequence variables count as location variables."""
    return _split_sorts(names_in(p))


# ---------------------------------------------------------------- substitution

class SubstError(ValueError):
    pass


_SORT_TYPES = {
    "V": (Num, Var, BinOp, FileLen, BlockLen),
    "B": (BNum, BVar, FIndex),
    "F": (Nil, FVar, FAppend, FConcat, FTuple),
    "S": (SeqVar, SeqLit, SeqCat),
}


def _fresh_name(base: str, avoid: set) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def substitute(node, subst: dict):
    """Simultaneous capture-avoiding substitution ``node[subst]``."""
    for k, v in subst.items():
        if not isinstance(v, _SORT_TYPES[var_sort(k)]):
            raise SubstError(f"cannot substitute {type(v).__name__} for {k}")
    return _subst(node, dict(subst))


def _subst(node, sub: dict):
    if not sub:
        return node
    if isinstance(node, Var):
        return sub.get(node.name, node)
    if isinstance(node, SeqVar):
        return sub.get(node.name, node)
    if isinstance(node, BVar):
        return sub.get(node.name, node)
    if isinstance(node, FVar):
        return sub.get(node.name, node)
    if isinstance(node, FIndex):
        idx = _subst(node.index, sub)
        if node.file in sub:
            repl = sub[node.file]
            if not isinstance(repl, FVar):
                raise SubstError(f"cannot index the file expression replacing {node.file}")
            return FIndex(repl.name, idx)
        return FIndex(node.file, idx)
    if isinstance(node, (Exists, Forall)):
        v = node.var
        inner = {k: e for k, e in sub.items() if k != v}
        if not inner:
            return node
        body_names = names_in(node.body)
        inner = {k: e for k, e in inner.items() if k in body_names}
        if not inner:
            return node
        incoming = set().union(*(names_in(e) for e in inner.values()))
        if v in incoming:
            avoid = incoming | body_names | set(inner)
            nv = _fresh_name(v, avoid)
            renamed = _subst(node.body, {v: _rename_expr(v, nv)})
            return type(node)(nv, _subst(renamed, inner))
        return type(node)(v, _subst(node.body, inner))
    if isinstance(node, tuple):
        return tuple(_subst(x, sub) for x in node)
    if node is None or isinstance(node, (int, str, bool)):
        return node
    if hasattr(node, "__dataclass_fields__"):
        changes = {}
        for name in node.__dataclass_fields__:
            if name == "line":
                continue
            old = getattr(node, name)
            new = _subst(old, sub)
            if new is not old:
                changes[name] = new
        if not changes:
            return node
        vals = {n: changes.get(n, getattr(node, n)) for n in node.__dataclass_fields__}
        return type(node)(**vals)
    return node


def _rename_expr(old: str, new: str):
    s = var_sort(old)
    return {"V": Var, "B": BVar, "F": FVar, "S": SeqVar}[s](new)


def rename(node, old: str, new: str):
    return substitute(node, {old: _rename_expr(old, new)})


# --------------------------------------------------------------- sugar removal

def _stride(addr, k: int):
    return addr if k == 0 else BinOp("+", addr, Num(2 * k))


def expand_sugar(p):
    """Rewrite abbreviations into core constructs.

    * ``e |-> (e1,...,en)``  becomes ``e |-> e1 * (e+2) |-> e2 * ...``
    * ``e --> e'``           becomes ``e |-> e' * true_V``
    * ``bk --> S``           becomes ``bk |-> S * true_B``
    * ``(x1..xn) ~> (e1..en)`` becomes ``x1 |-> e1 * ... * xn |-> en``
    * ``bk ~> (e1..en)``     becomes ``exists x1..xn. <(x1..xn) ~> (e..), bk |-> (x1..xn)>``
    """
    return _expand(p)


def _star_all(parts, empty):
    if not parts:
        return empty
    out = parts[0]
    for x in parts[1:]:
        out = Star(out, x)
    return out


def _expand(p):
    if isinstance(p, PointsToList):
        return _star_all([PointsTo(_stride(p.addr, k), v) for k, v in enumerate(p.values)], Emp("V"))
    if isinstance(p, Hook):
        return Star(PointsTo(p.addr, p.value), Const("V", True))
    if isinstance(p, BlkHook):
        return Star(BlkPointsTo(p.block, p.seq), Const("B", True))
    if isinstance(p, SeqCorr) and isinstance(p.seq, SeqLit):
        if isinstance(p.rhs, tuple) and len(p.rhs) == len(p.seq.items):
            return _star_all([PointsTo(a, v) for a, v in zip(p.seq.items, p.rhs)], Emp("V"))
        if p.rhs is None:
            return _star_all([PointsTo(a, None) for a in p.seq.items], Emp("V"))
        if isinstance(p.rhs, Override) and isinstance(p.rhs.index, Num) and \
                len(p.rhs.values) == len(p.seq.items) and 1 <= p.rhs.index.value <= len(p.rhs.values):
            vals = list(p.rhs.values)
            vals[p.rhs.index.value - 1] = p.rhs.value
            return _star_all([PointsTo(a, v) for a, v in zip(p.seq.items, vals)], Emp("V"))
        return p
    if isinstance(p, BlkCorrVals):
        avoid = names_in(p)
        xs = []
        for k in range(len(p.values)):
            name = f"x{k + 1}"
            while name in avoid:
                name += "'"
            avoid.add(name)
            xs.append(name)
        locs = SeqLit(tuple(Var(x) for x in xs))
        body = Pair(_expand(SeqCorr(locs, p.values)), BlkPointsTo(p.block, locs))
        for x in reversed(xs):
            body = Exists(x, body)
        return body
    if isinstance(p, (Not,)):
        return Not(_expand(p.arg))
    if isinstance(p, (And, Or, Imp, Star, Wand)):
        return type(p)(_expand(p.left), _expand(p.right))
    if isinstance(p, (Exists, Forall)):
        return type(p)(p.var, _expand(p.body))
    if isinstance(p, Pair):
        return Pair(_expand(p.loc), _expand(p.blk))
    return p


# --------------------------------------------------------------- satisfaction

class _Undef(Exception):
    """An expression inside an atom has no value; the atom is false."""


_PURE = (Cmp, BlkEq, BlkCat, FileEq, BlkCorr, Const)


def is_pure(p) -> bool:
    """True when satisfaction only looks up addresses and never inspects heap domains."""
    if isinstance(p, Const):
        return p.value is True or p.level != "G"
    if isinstance(p, _PURE):
        return True
    if isinstance(p, Not):
        return is_pure(p.arg)
    if isinstance(p, (And, Or, Imp)):
        return is_pure(p.left) and is_pure(p.right)
    if isinstance(p, Pair):
        return is_pure(p.loc) and is_pure(p.blk)
    return False


@dataclass
class SatReport:
    value: bool
    bounded: bool
    diagnostics: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


class Checker:
    """Evaluates assertions against one root state under fixed bounds."""

    def __init__(self, root: State, bounds: Bounds = DEFAULT_BOUNDS, consts: Iterable[int] = ()):
        self.bounds = bounds
        self.root = root
        self.ghosts: set[int] = set()
        self.seqenv: dict[str, tuple] = {}
        self.diagnostics: list[str] = []
        self.warnings: list[str] = []
        self.bounded = False
        fp = footprint(root)
        self.fp = fp
        lo, hi = bounds.value_range
        taken_locs = set(fp.locs)
        extra_locs, a = [], 0
        while len(extra_locs) < bounds.extra_locs:
            if a not in taken_locs:
                extra_locs.append(a)
            a += 2
        extra_blocs, a = [], 1
        while len(extra_blocs) < bounds.extra_blocs:
            if a not in fp.blocs:
                extra_blocs.append(a)
            a += 2
        self.extra_locs = extra_locs
        self.extra_blocs = extra_blocs
        vals = set(range(lo, hi + 1)) | set(fp.locs) | set(extra_locs) | set(consts)
        vals |= set(root.hV.values()) | set(root.sV.values())
        self.loc_domain = sorted(vals)
        self.bloc_domain = sorted(set(fp.blocs) | set(extra_blocs))
        self._ghost_floor = max([*fp.blocs, *extra_blocs, -1]) + 2

    # -- expression evaluation with unbound tracking
    def _ev(self, fn, e, s: State):
        try:
            return fn(e, s)
        except ExecFault as exc:
            if exc.kind is FaultKind.UnboundVariable:
                self.diagnostics.append(f"unbound variable {exc.detail}")
            raise _Undef() from None

    def loc(self, e, s):
        return self._ev(loc_value, e, s)

    def blk(self, e, s):
        return self._ev(block_value, e, s)

    def fil(self, e, s):
        return self._ev(file_value, e, s)

    def seq(self, e, s) -> tuple:
        if isinstance(e, SeqVar):
            if e.name not in self.seqenv:
                self.diagnostics.append(f"unbound variable {e.name}")
                raise _Undef()
            return self.seqenv[e.name]
        if isinstance(e, SeqLit):
            return tuple(self.loc(x, s) for x in e.items)
        if isinstance(e, SeqCat):
            return self.seq(e.left, s) + self.seq(e.right, s)
        raise TypeError(f"not a sequence: {e!r}")

    # -- entry point
    def holds(self, level: str, p, s: State) -> bool:
        try:
            return self._holds(level, p, s)
        except _Undef:
            return False

    def _holds(self, level, p, s):
        if isinstance(p, Const):
            return p.value
        if isinstance(p, Emp):
            if p.level == "V":
                return not s.hV
            if p.level == "B":
                return not s.hB
            return not s.hV and not s.hB
        if isinstance(p, Not):
            return not self.holds(level, p.arg, s)
        if isinstance(p, And):
            return self.holds(level, p.left, s) and self.holds(level, p.right, s)
        if isinstance(p, Or):
            return self.holds(level, p.left, s) or self.holds(level, p.right, s)
        if isinstance(p, Imp):
            return (not self.holds(level, p.left, s)) or self.holds(level, p.right, s)
        if isinstance(p, Exists):
            return self._exists(level, p, s)
        if isinstance(p, Forall):
            return not self._exists(level, Exists(p.var, Not(p.body)), s)
        if isinstance(p, Star):
            return self._star(level, p, s)
        if isinstance(p, Wand):
            return self._wand(level, p, s)
        if isinstance(p, Pair):
            return self.holds("V", p.loc, s) and self.holds("B", p.blk, s)
        if isinstance(p, Abort):
            return False
        return self._atom(p, s)

    def _atom(self, p, s: State) -> bool:
        if isinstance(p, Cmp):
            a, b = self.loc(p.left, s), self.loc(p.right, s)
            return a == b if p.op == "=" else a <= b
        if isinstance(p, PointsTo):
            a = self.loc(p.addr, s)
            if set(s.hV) != {a}:
                return False
            return p.value is None or s.hV[a] == self.loc(p.value, s)
        if isinstance(p, (PointsToList, Hook, BlkHook, BlkCorrVals)):
            return self.holds("G" if isinstance(p, BlkCorrVals) else
                              "B" if isinstance(p, BlkHook) else "V", _expand(p), s)
        if isinstance(p, SeqCorr):
            locs = self.seq(p.seq, s)
            if len(set(locs)) != len(locs) or set(s.hV) != set(locs):
                return False
            if p.rhs is None:
                return True
            if isinstance(p.rhs, Override):
                vals = [self.loc(e, s) for e in p.rhs.values]
                i = self.loc(p.rhs.index, s)
                if not 1 <= i <= len(vals):
                    return False
                vals[i - 1] = self.loc(p.rhs.value, s)
            else:
                vals = [self.loc(e, s) for e in p.rhs]
            return len(vals) == len(locs) and all(s.hV[l] == v for l, v in zip(locs, vals))
        if isinstance(p, BlkEq):
            return self.blk(p.left, s) == self.blk(p.right, s)
        if isinstance(p, BlkCat):
            t = self.blk(p.target, s)
            parts = [self.blk(b, s) for b in p.parts]
            if t not in s.hB or any(b not in s.hB for b in parts):
                return False
            contents = [s.hB[b] for b in parts]
            if s.hB[t] != tuple(itertools.chain.from_iterable(contents)):
                return False
            for i, j in itertools.combinations(range(len(contents)), 2):
                if set(contents[i]) & set(contents[j]):
                    return False
            return True
        if isinstance(p, BlkPointsTo):
            a = self.blk(p.block, s)
            seq = self.seq(p.seq, s)
            return set(s.hB) == {a} and s.hB[a] == seq and all(l in s.hV for l in seq)
        if isinstance(p, FileEq):
            return self.fil(p.left, s) == self.fil(p.right, s)
        if isinstance(p, BlkCorr):
            a, b = self.blk(p.left, s), self.blk(p.right, s)
            if a not in s.hB or b not in s.hB:
                return False
            la, lb = s.hB[a], s.hB[b]
            if p.left == p.right:
                # a block corresponds to itself when it is a proper cell sequence:
                # every cell allocated and no cell repeated
                return len(set(la)) == len(la) and all(l in s.hV for l in la)
            if len(la) != len(lb) or any(l not in s.hV for l in la + lb):
                return False
            return all(s.hV[x] == s.hV[y] for x, y in zip(la, lb))
        raise TypeError(f"not an assertion: {p!r}")

    # -- separating conjunction
    def _exact(self, level, p, s) -> Optional[tuple[frozenset, frozenset]]:
        """Heap domains a precise assertion must occupy, or None when unknown."""
        try:
            if isinstance(p, Emp):
                return frozenset(), frozenset()
            if isinstance(p, PointsTo) and level != "B":
                return frozenset({self.loc(p.addr, s)}), frozenset()
            if isinstance(p, SeqCorr) and level != "B":
                return frozenset(self.seq(p.seq, s)), frozenset()
            if isinstance(p, PointsToList) and level != "B":
                return self._exact(level, _expand(p), s)
            if isinstance(p, BlkPointsTo) and level != "V":
                return frozenset(), frozenset({self.blk(p.block, s)})
            if isinstance(p, Star):
                a = self._exact(level, p.left, s)
                b = self._exact(level, p.right, s)
                if a is None or b is None:
                    return None
                return a[0] | b[0], a[1] | b[1]
            if isinstance(p, Pair) and level == "G":
                a = self._exact("V", p.loc, s)
                b = self._exact("B", p.blk, s)
                if a is None or b is None:
                    return None
                return a[0], b[1]
            if isinstance(p, And):
                return self._exact(level, p.left, s) or self._exact(level, p.right, s)
        except _Undef:
            return None
        return None

    def _splits(self, level, p, s):
        """Yield (left_state, right_state) heap partitions for ``p.left * p.right``."""
        split_v = level in ("V", "G")
        split_b = level in ("B", "G")

        def part(dv, db):
            hv1 = {k: v for k, v in s.hV.items() if k in dv} if split_v else dict(s.hV)
            hv2 = {k: v for k, v in s.hV.items() if k not in dv} if split_v else dict(s.hV)
            hb1 = {k: v for k, v in s.hB.items() if k in db} if split_b else dict(s.hB)
            hb2 = {k: v for k, v in s.hB.items() if k not in db} if split_b else dict(s.hB)
            return s.with_heaps(hv1, hb1), s.with_heaps(hv2, hb2)

        for side in ("left", "right"):
            ex = self._exact(level, getattr(p, side), s)
            if ex is None:
                continue
            dv, db = ex
            if (split_v and not dv <= set(s.hV)) or (split_b and not db <= set(s.hB)):
                return
            a, b = part(dv, db)
            yield (a, b) if side == "left" else (b, a)
            return

        cells = ([("V", k) for k in s.hV] if split_v else []) + ([("B", k) for k in s.hB] if split_b else [])
        max_size = len(cells)
        if len(cells) > SPLIT_LIMIT:
            self.warnings.append(f"BoundsExceeded: {len(cells)} cells to split; partitions truncated")
            self.bounded = True
            max_size = 3
        for size in range(max_size + 1):
            for chosen in itertools.combinations(cells, size):
                dv = {k for t, k in chosen if t == "V"}
                db = {k for t, k in chosen if t == "B"}
                yield part(dv, db)

    def _star(self, level, p, s) -> bool:
        for a, b in self._splits(level, p, s):
            if self.holds(level, p.left, a) and self.holds(level, p.right, b):
                return True
        return False

    # -- magic wand
    def _extensions(self, level, s: State):
        self.bounded = True
        rest_v = {k: v for k, v in self.root.hV.items() if k not in s.hV}
        rest_b = {k: v for k, v in self.root.hB.items() if k not in s.hB}
        cells = []
        if level in ("V", "G"):
            cells += [("V", k) for k in rest_v]
        if level in ("B", "G"):
            cells += [("B", k) for k in rest_b]
        cells = cells[:10]
        seen = set()
        for size in range(len(cells) + 1):
            for chosen in itertools.combinations(cells, size):
                hv = {k: rest_v[k] for t, k in chosen if t == "V"}
                hb = {k: rest_b[k] for t, k in chosen if t == "B"}
                key = (tuple(sorted(hv.items())), tuple(sorted(hb.items())))
                seen.add(key)
                yield hv, hb
        if level in ("V", "G"):
            lo, hi = self.bounds.value_range
            for a in self.extra_locs:
                if a in s.hV:
                    continue
                for v in range(lo, hi + 1):
                    yield {a: v}, {}

    def _wand(self, level, p, s) -> bool:
        for hv, hb in self._extensions(level, s):
            if set(hv) & set(s.hV) or set(hb) & set(s.hB):
                continue
            if level == "V":
                ext = s.with_heaps(hv, s.hB)
            elif level == "B":
                ext = s.with_heaps(s.hV, hb)
            else:
                ext = s.with_heaps(hv, hb)
            if not self.holds(level, p.left, ext):
                continue
            merged = s.with_heaps({**s.hV, **hv}, {**s.hB, **hb})
            if not self.holds(level, p.right, merged):
                return False
        return True

    # -- quantifiers
    def _flatten(self, level, p) -> list:
        if isinstance(p, And):
            return self._flatten(level, p.left) + self._flatten(level, p.right)
        if isinstance(p, Pair) and level == "G":
            return self._flatten("V", p.loc) + self._flatten("B", p.blk)
        return [(level, p)]

    def _exists(self, level, p, s: State) -> bool:
        self.bounded = True
        names, body = [], p
        while isinstance(body, Exists):
            if body.var in names:
                names.remove(body.var)
            names.append(body.var)
            body = body.body
        conj = []
        for lvl, f in self._flatten(level, body):
            fv = names_in(f) & set(names)
            conj.append((lvl, f, frozenset(fv), is_pure(f)))
        saved = {n: self._lookup(n, s) for n in names}
        s0 = s
        for n in names:
            s0 = self._unbind(n, s0)
        for lvl, f, fv, pure in conj:
            if pure and not fv and not self.holds(lvl, f, s0):
                return False
        try:
            return self._search(list(names), set(), conj, s0)
        finally:
            for n, v in saved.items():
                if var_sort(n) == "S":
                    if v is None:
                        self.seqenv.pop(n, None)
                    else:
                        self.seqenv[n] = v

    def _lookup(self, name, s):
        srt = var_sort(name)
        if srt == "S":
            return self.seqenv.get(name)
        return None

    def _unbind(self, name, s: State) -> State:
        srt = var_sort(name)
        if srt == "V" and name in s.sV:
            return s.replace(sV={k: v for k, v in s.sV.items() if k != name})
        if srt == "B" and name in s.sB:
            return s.replace(sB={k: v for k, v in s.sB.items() if k != name})
        if srt == "F" and name in s.sF:
            return s.replace(sF={k: v for k, v in s.sF.items() if k != name})
        if srt == "S":
            self.seqenv.pop(name, None)
        return s

    def _bind(self, name, value, s: State) -> State:
        srt = var_sort(name)
        if srt == "V":
            return s.replace(sV={**s.sV, name: value})
        if srt == "B":
            addr, content = value
            if content is not None:
                return s.replace(sB={**s.sB, name: addr}, hB={**s.hB, addr: content})
            return s.replace(sB={**s.sB, name: addr})
        if srt == "F":
            return s.replace(sF={**s.sF, name: value})
        self.seqenv[name] = value
        return s

    def _search(self, pending: list, assigned: set, conj, s: State) -> bool:
        if not pending:
            return all(self.holds(lvl, f, s) for lvl, f, fv, pure in conj if not pure)
        best = None
        for v in pending:
            cands = self._candidates(v, pending, conj, s)
            if best is None or len(cands) < len(best[1]):
                best = (v, cands)
            if not cands:
                return False
        v, cands = best
        rest = [n for n in pending if n != v]
        now = assigned | {v}
        check = [(lvl, f) for lvl, f, fv, pure in conj if pure and v in fv and fv <= now]
        for val in cands:
            s2 = self._bind(v, val, s)
            ghost = var_sort(v) == "B" and val[1] is not None
            if ghost:
                self.ghosts.add(val[0])
            try:
                if all(self.holds(lvl, f, s2) for lvl, f in check):
                    if self._search(rest, now, conj, s2):
                        return True
            finally:
                if ghost:
                    self.ghosts.discard(val[0])
        if var_sort(v) == "S":
            self.seqenv.pop(v, None)
        return False

    # -- candidate generation
    def _evaluable(self, e, pending) -> bool:
        return not (names_in(e) & set(pending))

    def _try(self, fn, e, s):
        try:
            return fn(e, s)
        except _Undef:
            return None

    def _real_slices(self, s: State) -> list:
        out = {()}
        for a, content in s.hB.items():
            if a in self.ghosts:
                continue
            n = len(content)
            for i in range(n):
                for j in range(i + 1, n + 1):
                    out.add(content[i:j])
        return sorted(out, key=lambda t: (len(t), t))

    def _ghost_addr(self, s: State) -> int:
        taken = set(s.hB) | set(s.sB.values()) | self.ghosts
        for seq in s.sF.values():
            taken.update(seq)
        a = self._ghost_floor
        while a in taken:
            a += 2
        return a

    def _required(self, level, f) -> Iterator[tuple[str, object]]:
        """Atoms that must hold (in some sub-heap) whenever ``f`` holds."""
        if isinstance(f, (And, Star)):
            yield from self._required(level, f.left)
            yield from self._required(level, f.right)
        elif isinstance(f, Pair):
            yield from self._required("V", f.loc)
            yield from self._required("B", f.blk)
        elif isinstance(f, (Hook, BlkHook, PointsToList)):
            yield from self._required(level, _expand(f))
        else:
            yield level, f

    def _candidates(self, v, pending, conj, s: State) -> list:
        srt = var_sort(v)
        atoms = [a for lvl, f, fv, pure in conj if v in fv for a in self._required(lvl, f)]
        ev = lambda e: self._evaluable(e, pending)  # noqa: E731

        if srt == "V":
            forced: Optional[set] = None

            def narrow(vals):
                nonlocal forced
                vals = set(vals)
                forced = vals if forced is None else forced & vals

            for _, a in atoms:
                if isinstance(a, Cmp) and a.op == "=":
                    for x, y in ((a.left, a.right), (a.right, a.left)):
                        if x == Var(v) and ev(y):
                            val = self._try(self.loc, y, s)
                            narrow([] if val is None else [val])
                elif isinstance(a, PointsTo):
                    if a.value == Var(v) and ev(a.addr):
                        addr = self._try(self.loc, a.addr, s)
                        narrow([s.hV[addr]] if addr in s.hV else [])
                    if a.addr == Var(v):
                        narrow(s.hV.keys())
                elif isinstance(a, BlkPointsTo) and isinstance(a.seq, SeqLit) and ev(a.block):
                    addr = self._try(self.blk, a.block, s)
                    content = s.hB.get(addr)
                    for k, item in enumerate(a.seq.items):
                        if item == Var(v):
                            ok = content is not None and len(content) == len(a.seq.items)
                            narrow([content[k]] if ok else [])
                elif isinstance(a, SeqCorr):
                    if isinstance(a.seq, SeqLit) and Var(v) in a.seq.items:
                        narrow(s.hV.keys())
                    if ev(a.seq):
                        locs = self._try(self.seq, a.seq, s)
                        if locs is None:
                            continue
                        if isinstance(a.rhs, tuple) and len(a.rhs) == len(locs):
                            for k, item in enumerate(a.rhs):
                                if item == Var(v):
                                    narrow([s.hV[locs[k]]] if locs[k] in s.hV else [])
                        elif isinstance(a.rhs, Override) and a.rhs.value == Var(v) and ev(a.rhs.index):
                            i = self._try(self.loc, a.rhs.index, s)
                            if i is not None and 1 <= i <= len(locs) and locs[i - 1] in s.hV:
                                narrow([s.hV[locs[i - 1]]])
            if forced is not None:
                return sorted(forced)
            return list(self.loc_domain)

        if srt == "B":
            real = set(self.bloc_domain) | set(s.hB) - self.ghosts
            contents: Optional[set] = None  # allowed contents for slice blocks and real blocks
            must_exist = False
            forced_addr: Optional[set] = None

            def allow(cs):
                nonlocal contents
                cs = set(cs)
                contents = cs if contents is None else contents & cs

            for _, a in atoms:
                if isinstance(a, BlkEq):
                    for x, y in ((a.left, a.right), (a.right, a.left)):
                        if x == BVar(v) and ev(y):
                            val = self._try(self.blk, y, s)
                            forced_addr = {val} if forced_addr is None else forced_addr & {val}
                elif isinstance(a, BlkCat):
                    must_exist = must_exist or BVar(v) in a.parts or a.target == BVar(v)
                    if ev(a.target) and BVar(v) in a.parts:
                        t = self._try(self.blk, a.target, s)
                        if t not in s.hB:
                            return []
                        whole = s.hB[t]
                        off = 0
                        for k, part in enumerate(a.parts):
                            if part == BVar(v):
                                if k == len(a.parts) - 1:
                                    allow([whole[off:]])
                                else:
                                    allow([whole[off:j] for j in range(off, len(whole) + 1)])
                                break
                            if not ev(part):
                                break
                            pa = self._try(self.blk, part, s)
                            if pa not in s.hB:
                                return []
                            off += len(s.hB[pa])
                            if whole[off - len(s.hB[pa]):off] != s.hB[pa]:
                                return []
                elif isinstance(a, Cmp) and a.op == "=":
                    for x, y in ((a.left, a.right), (a.right, a.left)):
                        if x == BlockLen(BVar(v)) and ev(y):
                            n = self._try(self.loc, y, s)
                            must_exist = True
                            allow([c for c in self._real_slices(s) if len(c) == n] +
                                  [c for c in s.hB.values() if len(c) == n])
                elif isinstance(a, (BlkPointsTo,)) and a.block == BVar(v):
                    must_exist = True
                    if ev(a.seq):
                        seq = self._try(self.seq, a.seq, s)
                        allow([] if seq is None else [seq])
                elif isinstance(a, BlkCorr) and BVar(v) in (a.left, a.right):
                    must_exist = True
                    other = a.right if a.left == BVar(v) else a.left
                    if other != BVar(v) and ev(other):
                        oa = self._try(self.blk, other, s)
                        if oa not in s.hB:
                            return []
                        n = len(s.hB[oa])
                        allow([c for c in self._real_slices(s) if len(c) == n] +
                              [c for c in s.hB.values() if len(c) == n])
            if forced_addr is not None:
                return [(a, None) for a in sorted(forced_addr) if a is not None]
            out = []
            for a in sorted(real):
                if must_exist and a not in s.hB:
                    continue
                if contents is not None and s.hB.get(a) not in contents:
                    continue
                out.append((a, None))
            slices = self._real_slices(s)
            if contents is not None:
                slices = [c for c in slices if c in contents]
            g = self._ghost_addr(s)
            out.extend((g, c) for c in slices)
            return out

        if srt == "F":
            for _, a in atoms:
                if isinstance(a, FileEq):
                    for x, y in ((a.left, a.right), (a.right, a.left)):
                        if x == FVar(v) and ev(y):
                            val = self._try(self.fil, y, s)
                            return [] if val is None else [val]
            pool = self.bloc_domain
            out = {tuple(x) for x in s.sF.values()}
            for n in range(self.bounds.max_file_len + 1):
                out.update(itertools.product(pool, repeat=n))
            return sorted(out, key=lambda t: (len(t), t))

        # location sequences
        for _, a in atoms:
            if isinstance(a, BlkPointsTo) and ev(a.block):
                addr = self._try(self.blk, a.block, s)
                if addr not in s.hB:
                    return []
                content = s.hB[addr]
                if a.seq == SeqVar(v):
                    return [content]
                if isinstance(a.seq, SeqCat) and a.seq.left == SeqVar(v) and ev(a.seq.right):
                    tail = self._try(self.seq, a.seq.right, s)
                    if tail is None or len(tail) > len(content) or content[len(content) - len(tail):] != tail:
                        return []
                    return [content[: len(content) - len(tail)]]
        cands = set(self._real_slices(s)) | {c for c in s.hB.values()}
        cands |= {(l,) for l in s.hV}
        whole = any(isinstance(f, SeqCorr) and f.seq == SeqVar(v) for _, f, _, _ in conj)
        if whole and len(s.hV) <= 5:
            # the sequence covers the whole location heap, in some order
            cands |= set(itertools.permutations(sorted(s.hV)))
        for _, a in atoms:
            if isinstance(a, SeqCorr) and a.seq == SeqVar(v) and isinstance(a.rhs, tuple) \
                    and len(a.rhs) <= 4 and len(s.hV) <= 8:
                # cells that need not belong to any block, matched by value where known
                want = [self._try(self.loc, e, s) if ev(e) else None for e in a.rhs]
                options = [[l for l, val in s.hV.items() if w is None or val == w] for w in want]
                cands |= {c for c in itertools.product(*options) if len(set(c)) == len(c)}
        for _, a in atoms:
            if isinstance(a, SeqCorr) and a.seq == SeqVar(v):
                cands = {c for c in cands if set(c) <= set(s.hV) and len(set(c)) == len(c)}
                if whole:
                    cands = {c for c in cands if set(c) == set(s.hV)}
                if isinstance(a.rhs, tuple):
                    cands = {c for c in cands if len(c) == len(a.rhs)}
        return sorted(cands, key=lambda t: (len(t), t))


def _consts(p) -> set:
    out = set()

    def walk(n):
        if isinstance(n, Num):
            out.add(n.value)
        elif isinstance(n, tuple):
            for x in n:
                walk(x)
        elif hasattr(n, "__dataclass_fields__"):
            for name in n.__dataclass_fields__:
                walk(getattr(n, name))
    walk(p)
    return out


@functools.lru_cache(maxsize=1 << 17)
def _check_cached(s: State, p, bounds: Bounds) -> tuple:
    ch = Checker(s, bounds, _consts(p))
    value = ch.holds("G", p, s)
    return value, ch.bounded, tuple(sorted(set(ch.diagnostics))), tuple(sorted(set(ch.warnings)))


def check(s: State, p, bounds: Bounds = DEFAULT_BOUNDS) -> SatReport:
    """Decide ``s |= p`` and report whether finitised quantifiers were involved.

    Verdicts are memoised; states, assertions and bounds are all immutable.
    """
    value, bounded, diags, warns = _check_cached(s, p, bounds)
    return SatReport(value, bounded, list(diags), list(warns))


def sat(s: State, p, bounds: Bounds = DEFAULT_BOUNDS) -> bool:
    return check(s, p, bounds).value


# ------------------------------------------------------------------ entailment

@dataclass(frozen=True)
class CounterExample:
    state: State


@dataclass(frozen=True)
class BoundedValid:
    trials: int
    bounds: Bounds
    witnesses: int = 0  # candidate states that satisfied the antecedent


def entails_bounded(p, q, bounds: Bounds = DEFAULT_BOUNDS, trials: int = 200, seed: int = 0,
                    extra_states: Iterable[State] = ()):
    """Search for a state satisfying ``p`` but not ``q``."""
    from .harness import candidate_states  # local import: harness depends on this module

    witnesses = 0
    for st in itertools.chain(extra_states, candidate_states(p, q, trials, seed)):
        if sat(st, p, bounds):
            witnesses += 1
            if not sat(st, q, bounds):
                return CounterExample(st)
    return BoundedValid(trials, bounds, witnesses)
