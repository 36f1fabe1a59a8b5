"""Hoare triples: axiom schemas, structural rules and a proof-script checker.

A step citing an axiom is first matched literally against the schema. When
that fails, the step may still be accepted as an application of the axiom
*in context*: the command must be the axiom's command, the assertions must
carry the axiom's characteristic atoms, and the whole triple must survive
bounded semantic validation. Such steps are always reported with a caveat.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional

from .assertion import (
    DEFAULT_BOUNDS, Bounds, CounterExample, FreeVars, SubstError,
    _split_sorts, entails_bounded, names_in, sat, substitute,
)
from .ast import *  # noqa: F401,F403
from .ast import var_sort
from .interp import DEFAULT_FUEL, ExecFault, Fault, OutOfFuel, bool_value, exec_command
from .state import State, format_state
from .syntax import pretty_print, step_refs

TRUE_V, TRUE_B = Const("V", True), Const("B", True)
EMP_V, EMP_B = Emp("V"), Emp("B")

# --------------------------------------------------------------- transfer


def transfer(be):
    """Lift a Boolean program expression to a global assertion."""
    if isinstance(be, Cmp):
        return Pair(be, TRUE_B)
    if isinstance(be, BlkEq):
        return Pair(TRUE_V, be)
    if isinstance(be, BoolConst):
        return Const("G", be.value)
    if isinstance(be, BoolNot):
        return Not(transfer(be.arg))
    if isinstance(be, BoolAnd):
        return And(transfer(be.left), transfer(be.right))
    if isinstance(be, BoolOr):
        return Or(transfer(be.left), transfer(be.right))
    raise TypeError(f"not a Boolean expression: {be!r}")


# ------------------------------------------------------- modify / free sets

@dataclass(frozen=True)
class ModSets:
    V: frozenset = frozenset()
    B: frozenset = frozenset()
    F: frozenset = frozenset()

    def all(self) -> frozenset:
        return self.V | self.B | self.F

    def __or__(self, other: "ModSets") -> "ModSets":
        return ModSets(self.V | other.V, self.B | other.B, self.F | other.F)


def modifies(c) -> ModSets:
    """Store variables appearing on the left of an assignment in ``c``."""
    if isinstance(c, (Assign, Cons, Lookup, BlockLookup)):
        return ModSets(V=frozenset({c.var}))
    if isinstance(c, (Allocate, BAssign)):
        return ModSets(B=frozenset({c.var}))
    if isinstance(c, (Create, Attach, DeleteFile, SetFileBlock)):
        return ModSets(F=frozenset({c.file}))
    if isinstance(c, Seq):
        return modifies(c.first) | modifies(c.second)
    if isinstance(c, If):
        return modifies(c.then) | modifies(c.orelse)
    if isinstance(c, While):
        return modifies(c.body)
    return ModSets()


def command_names(c) -> set:
    """Every variable occurring in ``c``, including assigned ones."""
    out = names_in(c)
    for attr in ("var", "file"):
        v = getattr(c, attr, None)
        if isinstance(v, str):
            out.add(v)
    for attr in ("first", "second", "then", "orelse", "body"):
        sub = getattr(c, attr, None)
        if sub is not None:
            out |= command_names(sub)
    return out


def command_free_vars(c) -> FreeVars:
    return _split_sorts(command_names(c))


def flatten_seq(c) -> list:
    if isinstance(c, Seq):
        return flatten_seq(c.first) + flatten_seq(c.second)
    return [c]


# ------------------------------------------------------------ axiom schemas

class MatchError(Exception):
    def __init__(self, axiom: str, message: str):
        super().__init__(f"{axiom}: {message}")
        self.axiom = axiom
        self.message = message


class _Fail(Exception):
    pass


def _need(cond, msg: str) -> None:
    if not cond:
        raise _Fail(msg)


def conjuncts(p) -> list:
    if isinstance(p, And):
        return conjuncts(p.left) + conjuncts(p.right)
    return [p]


def _pair(p, what: str):
    _need(isinstance(p, Pair), f"{what} must be a pair <loc, block>")
    return p.loc, p.blk


def _sub(node, old: str, new):
    try:
        return substitute(node, {old: new})
    except SubstError as exc:
        raise _Fail(str(exc)) from None


def _pp(node) -> str:
    return pretty_print(node)


def _eq(actual, expected, what: str) -> None:
    if actual != expected:
        raise _Fail(f"{what}: expected {_pp(expected)}, found {_pp(actual)}")


def _eq_list(actual: list, expected: list, what: str) -> None:
    if actual != expected:
        a = " && ".join(_pp(x) for x in actual)
        e = " && ".join(_pp(x) for x in expected)
        raise _Fail(f"{what}: expected {e}, found {a}")


def _var_of(e, sort: str, what: str) -> str:
    cls = {"V": Var, "B": BVar, "F": FVar, "S": SeqVar}[sort]
    _need(isinstance(e, cls), f"{what} must be a variable")
    return e.name


def _distinct(names, what: str) -> None:
    _need(len(set(names)) == len(names), f"{what} must be distinct")


def _not_free(name: str, nodes, what: str) -> None:
    for n in nodes:
        if name in names_in(n):
            raise _Fail(f"{name} must not be free in {what}")


def _has_subterm(node, target) -> bool:
    if node == target:
        return True
    if isinstance(node, tuple):
        return any(_has_subterm(x, target) for x in node)
    if hasattr(node, "__dataclass_fields__") and not isinstance(node, (Exists, Forall)):
        return any(_has_subterm(getattr(node, f), target)
                   for f in node.__dataclass_fields__ if f != "line")
    if isinstance(node, (Exists, Forall)):
        return _has_subterm(node.body, target)
    return False


def _file_outside_len(node, f: str) -> bool:
    """Does file variable ``f`` occur anywhere other than directly under ``#``?"""
    if isinstance(node, FileLen) and node.file == FVar(f):
        return False
    if isinstance(node, FVar):
        return node.name == f
    if isinstance(node, FIndex):
        return node.file == f or _file_outside_len(node.index, f)
    if isinstance(node, (Exists, Forall)):
        return node.var != f and _file_outside_len(node.body, f)
    if isinstance(node, tuple):
        return any(_file_outside_len(x, f) for x in node)
    if hasattr(node, "__dataclass_fields__"):
        return any(_file_outside_len(getattr(node, n), f)
                   for n in node.__dataclass_fields__ if n != "line")
    return False


def _simple_eq_pre(loc, x: str, what="precondition") -> str:
    """``x = x' && emp_V``; returns x'."""
    _need(isinstance(loc, And) and isinstance(loc.right, Emp) and loc.right.level == "V",
          f"{what} must be <x = x' && emp_V, emp_B>")
    eq = loc.left
    _need(isinstance(eq, Cmp) and eq.op == "=" and eq.left == Var(x),
          f"{what} must start with {x} = x'")
    x1 = _var_of(eq.right, "V", "x'")
    _need(x1 != x, f"x' must be distinct from {x}")
    return x1


def _m_skip(t):
    _need(isinstance(t.cmd, Skip), "command must be skip")
    _eq(t.post, t.pre, "postcondition")
    return {"p": _pp(t.pre)}


def _m_sa(t):
    c = t.cmd
    _need(isinstance(c, Assign), "command must be x := e")
    loc, blk = _pair(t.pre, "precondition")
    _eq(blk, EMP_B, "precondition block part")
    x1 = _simple_eq_pre(loc, c.var)
    _eq(t.post, Pair(And(Cmp("=", Var(c.var), _sub(c.expr, c.var, Var(x1))), EMP_V), EMP_B),
        "postcondition")
    return {"x": c.var, "x'": x1, "e": _pp(c.expr)}


def _m_la(t):
    c = t.cmd
    _need(isinstance(c, Cons), "command must be x := cons(...)")
    loc, blk = _pair(t.pre, "precondition")
    _eq(blk, EMP_B, "precondition block part")
    x1 = _simple_eq_pre(loc, c.var)
    args = tuple(_sub(a, c.var, Var(x1)) for a in c.args)
    if not args:
        body = EMP_V
    elif len(args) == 1:
        body = PointsTo(Var(c.var), args[0])
    else:
        body = PointsToList(Var(c.var), args)
    _eq(t.post, Pair(body, EMP_B), "postcondition")
    return {"x": c.var, "x'": x1}


def _m_ll(t):
    c = t.cmd
    _need(isinstance(c, Lookup), "command must be x := [e]")
    loc, blk = _pair(t.pre, "precondition")
    _eq(blk, EMP_B, "precondition block part")
    _need(isinstance(loc, And) and isinstance(loc.left, Cmp) and isinstance(loc.right, PointsTo),
          "precondition must be <x = x' && e |-> x'', emp_B>")
    eq, pts = loc.left, loc.right
    _need(eq.op == "=" and eq.left == Var(c.var), f"precondition must start with {c.var} = x'")
    x1 = _var_of(eq.right, "V", "x'")
    _eq(pts.addr, c.addr, "points-to address")
    _need(pts.value is not None, "x'' must be a variable")
    x2 = _var_of(pts.value, "V", "x''")
    _distinct([c.var, x1, x2], "x, x' and x''")
    _eq(t.post, Pair(And(Cmp("=", Var(c.var), Var(x2)),
                         PointsTo(_sub(c.addr, c.var, Var(x1)), Var(x2))), EMP_B),
        "postcondition")
    return {"x": c.var, "x'": x1, "x''": x2}


def _m_lm(t):
    c = t.cmd
    _need(isinstance(c, Mutate), "command must be [e] := e'")
    _eq(t.pre, Pair(PointsTo(c.addr, None), EMP_B), "precondition")
    _eq(t.post, Pair(PointsTo(c.addr, c.value), EMP_B), "postcondition")
    return {"e": _pp(c.addr), "e'": _pp(c.value)}


def _m_dl(t):
    c = t.cmd
    _need(isinstance(c, Dispose), "command must be dispose(e)")
    _eq(t.pre, Pair(PointsTo(c.addr, None), EMP_B), "precondition")
    _eq(t.post, Pair(EMP_V, EMP_B), "postcondition")
    return {"e": _pp(c.addr)}


def _m_fc(t):
    c = t.cmd
    _need(isinstance(c, Create), "command must be f := create(...)")
    f = c.file
    a, b = _pair(t.pre, "precondition")
    a2, b2 = _pair(t.post, "postcondition")
    _eq(a2, a, "postcondition location part")
    beta = conjuncts(b)
    if beta and beta[0] == FileEq(FVar(f), Nil()):
        beta = beta[1:]
    _eq_list(conjuncts(b2), [FileEq(FVar(f), FTuple(c.blocks))] + beta,
             "postcondition block part")
    _not_free(f, [a], "alpha")
    _not_free(f, beta, "beta")
    _not_free(f, c.blocks, "the created blocks")
    return {"f": f, "alpha": _pp(a), "beta": " && ".join(_pp(x) for x in beta) or "(none)"}


def _file_eq_var(b, f: str, what: str):
    cs = conjuncts(b)
    first = cs[0]
    _need(isinstance(first, FileEq) and first.left == FVar(f) and isinstance(first.right, FVar),
          f"{what} must start with {f} = f'")
    f1 = first.right.name
    _need(f1 != f, f"f' must be distinct from {f}")
    return f1, cs[1:]


def _m_attach(t):
    c = t.cmd
    _need(isinstance(c, Attach), "command must be attach(f, ...)")
    f = c.file
    a, b = _pair(t.pre, "precondition")
    f1, beta = _file_eq_var(b, f, "precondition block part")
    a2, b2 = _pair(t.post, "postcondition")
    _eq(a2, _sub(a, f, FVar(f1)), "postcondition location part")
    blocks = tuple(_sub(x, f, FVar(f1)) for x in c.blocks)
    expected = [FileEq(FVar(f), FConcat(FVar(f1), FTuple(blocks)))] + [_sub(x, f, FVar(f1)) for x in beta]
    _eq_list(conjuncts(b2), expected, "postcondition block part")
    return {"f": f, "f'": f1}


def _m_fd(t):
    c = t.cmd
    _need(isinstance(c, DeleteFile), "command must be delete f")
    f = c.file
    a, b = _pair(t.pre, "precondition")
    f1, beta = _file_eq_var(b, f, "precondition block part")
    a2, b2 = _pair(t.post, "postcondition")
    _eq(a2, _sub(a, f, FVar(f1)), "postcondition location part")
    _eq_list(conjuncts(b2), [FileEq(FVar(f), Nil())] + [_sub(x, f, FVar(f1)) for x in beta],
             "postcondition block part")
    return {"f": f, "f'": f1}


def _m_ba(t):
    c = t.cmd
    _need(isinstance(c, Allocate), "command must be b := allocate(...)")
    _eq(t.pre, Pair(EMP_V, EMP_B), "precondition")
    q = t.post
    _need(isinstance(q, Exists) and var_sort(q.var) == "S",
          "postcondition must be exists @l. <@l ~> (e...), b |-> @l>")
    lv = q.var
    _eq(q.body, Pair(SeqCorr(SeqVar(lv), tuple(c.args)), BlkPointsTo(BVar(c.var), SeqVar(lv))),
        "postcondition body")
    _not_free(c.var, c.args, "the allocated values")
    _not_free(lv, c.args, "the allocated values")
    return {"b": c.var, "@l": lv}


def _m_baalt(t):
    c = t.cmd
    _need(isinstance(c, Allocate), "command must be b := allocate(...)")
    _eq(t.pre, Pair(EMP_V, EMP_B), "precondition")
    q = t.post
    _need(isinstance(q, Exists) and var_sort(q.var) == "B",
          "postcondition must be exists b'. <true_V, b == b' && b' ~> b'>")
    b1 = q.var
    _need(b1 != c.var, "b' must be distinct from b")
    _eq(q.body, Pair(TRUE_V, And(BlkEq(BVar(c.var), BVar(b1)), BlkCorr(BVar(b1), BVar(b1)))),
        "postcondition body")
    _not_free(c.var, c.args, "the allocated values")
    return {"b": c.var, "b'": b1}


def _append_side(c, exprs, bound: list) -> None:
    bk_names = names_in(c.block)
    for n in bk_names:
        _not_free(n, exprs, "the appended or existing values")
    for e in exprs:
        _need(not _has_subterm(e, BlockLen(c.block)), f"#{_pp(c.block)} must not appear in the values")
    for v in bound:
        _need(v not in bk_names | names_in(c.value),
              f"bound variable {v} clashes with the command")


def _m_bca(t):
    c = t.cmd
    _need(isinstance(c, Append), "command must be append(bk, e)")
    p = t.pre
    _need(isinstance(p, Exists) and var_sort(p.var) == "S",
          "precondition must be exists @l. <@l ~> (e...), bk |-> @l>")
    lv = p.var
    loc, blk = _pair(p.body, "precondition body")
    _need(isinstance(loc, SeqCorr) and loc.seq == SeqVar(lv) and isinstance(loc.rhs, tuple),
          "precondition location part must be @l ~> (e...)")
    _eq(blk, BlkPointsTo(c.block, SeqVar(lv)), "precondition block part")
    q = t.post
    _need(isinstance(q, Exists) and q.var == lv and isinstance(q.body, Exists)
          and var_sort(q.body.var) == "V",
          f"postcondition must be exists {lv}, l. <...>")
    l = q.body.var
    _eq(q.body.body, Pair(Star(loc, PointsTo(Var(l), c.value)),
                          BlkPointsTo(c.block, SeqCat(SeqVar(lv), SeqLit((Var(l),))))),
        "postcondition body")
    _append_side(c, list(loc.rhs) + [c.value], [lv, l])
    return {"bk": _pp(c.block), "@l": lv, "l": l}


def _m_bcaalt(t):
    c = t.cmd
    _need(isinstance(c, Append), "command must be append(bk, e)")
    p = t.pre
    _need(isinstance(p, Exists) and var_sort(p.var) == "B",
          "precondition must be exists b'. <true_V, bk == b' && b' ~> b'>")
    b1 = p.var
    _eq(p.body, Pair(TRUE_V, And(BlkEq(c.block, BVar(b1)), BlkCorr(BVar(b1), BVar(b1)))),
        "precondition body")
    q = t.post
    _need(isinstance(q, Exists) and q.var == b1 and isinstance(q.body, Exists)
          and isinstance(q.body.body, Exists),
          f"postcondition must be exists {b1}, b'', l. <...>")
    b2, l = q.body.var, q.body.body.var
    _need(var_sort(b2) == "B" and var_sort(l) == "V", "postcondition quantifier sorts")
    _distinct([b1, b2], "b' and b''")
    expected = Pair(
        Star(TRUE_V, PointsTo(Var(l), c.value)),
        And(BlkCat(c.block, (BVar(b1), BVar(b2))),
            Star(Star(TRUE_B, BlkCorr(BVar(b1), BVar(b1))), BlkPointsTo(BVar(b2), SeqLit((Var(l),))))))
    _eq(q.body.body.body, expected, "postcondition body")
    _append_side(c, [c.value], [b1, b2, l])
    return {"bk": _pp(c.block), "b'": b1, "b''": b2, "l": l}


def _lookup_vars(c, eq, what: str) -> str:
    _need(isinstance(eq, Cmp) and eq.op == "=" and eq.left == Var(c.var),
          f"{what} must contain {c.var} = x'")
    return _var_of(eq.right, "V", "x'")


def _m_bcl(t):
    c = t.cmd
    _need(isinstance(c, BlockLookup), "command must be x := {bk.e}")
    x = c.var
    p, q = t.pre, t.post
    _need(isinstance(p, Exists) and var_sort(p.var) == "S", "precondition must be exists @l. <...>")
    lv = p.var
    loc, blk = _pair(p.body, "precondition body")
    cs = conjuncts(loc)
    _need(len(cs) == 3, "precondition location part must be x = x' && e = i && @l ~> (e... | i >-> x'')")
    x1 = _lookup_vars(c, cs[0], "precondition")
    _need(isinstance(cs[1], Cmp) and cs[1].op == "=", "second conjunct must be e = i")
    _eq(cs[1].left, c.index, "lookup index")
    i = cs[1].right
    corr = cs[2]
    _need(isinstance(corr, SeqCorr) and corr.seq == SeqVar(lv) and isinstance(corr.rhs, Override),
          "third conjunct must be @l ~> (e... | i >-> x'')")
    _eq(corr.rhs.index, i, "override index")
    x2 = _var_of(corr.rhs.value, "V", "x''")
    _eq(blk, BlkPointsTo(c.block, SeqVar(lv)), "precondition block part")
    _distinct([x, x1, x2], "x, x' and x''")
    _not_free(x, [i], "i")
    sx = lambda n: _sub(n, x, Var(x1))  # noqa: E731
    expected = Exists(lv, Pair(
        And(And(Cmp("=", Var(x), Var(x2)), Cmp("=", sx(c.index), i)),
            SeqCorr(SeqVar(lv), Override(tuple(sx(e) for e in corr.rhs.values), i, Var(x2)))),
        BlkPointsTo(sx(c.block), SeqVar(lv))))
    _eq(q, expected, "postcondition")
    return {"x": x, "x'": x1, "x''": x2, "i": _pp(i)}


def _m_bclalt(t):
    c = t.cmd
    _need(isinstance(c, BlockLookup), "command must be x := {bk.e}")
    x = c.var
    p, q = t.pre, t.post
    qs = []
    body = p
    while isinstance(body, Exists) and len(qs) < 4:
        qs.append(body.var)
        body = body.body
    _need(len(qs) == 4 and [var_sort(v) for v in qs] == ["B", "B", "B", "V"],
          "precondition must be exists b, b', b'', l. <...>")
    bb, bb1, bb2, l = qs
    loc, blk = _pair(body, "precondition body")
    cs = conjuncts(loc)
    _need(len(cs) == 4, "precondition location part must be #b = i - 1 && x = x' && e = i && l --> x''")
    _need(isinstance(cs[0], Cmp) and cs[0].op == "=" and cs[0].left == BlockLen(BVar(bb))
          and isinstance(cs[0].right, BinOp) and cs[0].right.op == "-"
          and cs[0].right.right == Num(1), "first conjunct must be #b = i - 1")
    i = cs[0].right.left
    x1 = _lookup_vars(c, cs[1], "precondition")
    _eq(cs[2], Cmp("=", c.index, i), "third conjunct")
    _need(isinstance(cs[3], Hook) and cs[3].addr == Var(l), "fourth conjunct must be l --> x''")
    x2 = _var_of(cs[3].value, "V", "x''")
    bcat = BlkCat(c.block, (BVar(bb), BVar(bb1), BVar(bb2)))
    bhook = BlkHook(BVar(bb1), SeqLit((Var(l),)))
    _eq_list(conjuncts(blk), [bcat, bhook], "precondition block part")
    _distinct([x, x1, x2], "x, x' and x''")
    _distinct(qs, "quantified variables")
    _not_free(x, [i], "i")
    clash = set(qs) & ({x, x1, x2} | names_in(c.block) | names_in(c.index) | names_in(i))
    _need(not clash, f"quantified variable {min(clash, default='')} clashes with the command")
    sx = lambda n: _sub(n, x, Var(x1))  # noqa: E731
    post_body = Pair(
        And(And(And(cs[0], Cmp("=", Var(x), Var(x2))), Cmp("=", sx(c.index), i)), cs[3]),
        And(BlkCat(sx(c.block), bcat.parts), bhook))
    expected = Exists(bb, Exists(bb1, Exists(bb2, Exists(l, post_body))))
    _eq(q, expected, "postcondition")
    return {"x": x, "x'": x1, "x''": x2, "i": _pp(i)}


def _m_bassign(t):
    c = t.cmd
    _need(isinstance(c, BAssign), "command must be b := bk")
    _need(isinstance(c.block, (BVar, BNum)),
          "the assigned block must be a variable or literal (use BAAalt for f.i)")
    b = c.var
    a, bl = _pair(t.pre, "precondition")
    cs = conjuncts(bl)
    _need(isinstance(cs[0], BlkEq) and cs[0].left == BVar(b) and isinstance(cs[0].right, BVar),
          f"precondition block part must start with {b} == b'")
    b1 = cs[0].right.name
    _need(b1 != b, "b' must be distinct from b")
    sb = lambda n: _sub(n, b, BVar(b1))  # noqa: E731
    a2, bl2 = _pair(t.post, "postcondition")
    _eq(a2, sb(a), "postcondition location part")
    _eq_list(conjuncts(bl2), [BlkEq(BVar(b), sb(c.block))] + [sb(x) for x in cs[1:]],
             "postcondition block part")
    return {"b": b, "b'": b1}


def _split_file(fe):
    """``f2 ++ bk ++ f3`` or ``f2 ++ bk``; returns (f2, bk, f3 or None)."""
    if isinstance(fe, FConcat) and isinstance(fe.left, FAppend):
        return fe.left.file, fe.left.block, fe.right
    if isinstance(fe, FAppend):
        return fe.file, fe.block, None
    raise _Fail("file must be written f2 ++ bk ++ f3")


def _rebuild_file(f2, bk, f3):
    inner = FAppend(f2, bk)
    return inner if f3 is None else FConcat(inner, f3)


def _len_minus_one(cmp, what: str):
    _need(isinstance(cmp, Cmp) and cmp.op == "=" and isinstance(cmp.left, FileLen)
          and isinstance(cmp.right, BinOp) and cmp.right.op == "-" and cmp.right.right == Num(1),
          f"{what} must start with #f2 = i - 1")
    return cmp.left.file, cmp.right.left


def _m_baaalt(t):
    c = t.cmd
    _need(isinstance(c, BAssign) and isinstance(c.block, FIndex), "command must be b := f.i")
    b, f, idx = c.var, c.block.file, c.block.index
    a, bl = _pair(t.pre, "precondition")
    acs, bcs = conjuncts(a), conjuncts(bl)
    f2, i = _len_minus_one(acs[0], "precondition location part")
    _eq(i, idx, "file index")
    _need(isinstance(bcs[0], FileEq) and bcs[0].left == FVar(f),
          f"precondition block part must start with {f} = f2 ++ b' ++ f3")
    f2b, b1e, f3 = _split_file(bcs[0].right)
    _eq(f2b, f2, "prefix file")
    b1 = _var_of(b1e, "B", "b'")
    _need(b1 != b, "b' must be distinct from b")
    _not_free(b, acs[1:], "alpha")
    _not_free(b, bcs[1:], "beta")
    _not_free(b, [f2, f3, i], "the file decomposition")
    a2, bl2 = _pair(t.post, "postcondition")
    _eq(a2, a, "postcondition location part")
    _eq_list(conjuncts(bl2), [bcs[0], BlkEq(BVar(b), BVar(b1))] + bcs[1:], "postcondition block part")
    return {"b": b, "b'": b1, "f": f}


def _m_barf(t):
    c = t.cmd
    _need(isinstance(c, SetFileBlock), "command must be f.e := bk")
    _need(not isinstance(c.block, FIndex), "the stored block must not itself index a file")
    f = c.file
    a, bl = _pair(t.pre, "precondition")
    acs, bcs = conjuncts(a), conjuncts(bl)
    f2, e = _len_minus_one(acs[0], "precondition location part")
    _eq(e, c.index, "file index")
    _need(isinstance(bcs[0], FileEq) and bcs[0].left == FVar(f),
          f"precondition block part must start with {f} = f2 ++ bk' ++ f3")
    f2b, _old, f3 = _split_file(bcs[0].right)
    _eq(f2b, f2, "prefix file")
    for what, nodes in (("alpha", acs[1:]), ("beta", bcs[1:]), ("the file decomposition", [f2, f3]),
                        ("the index", [e])):
        if any(_file_outside_len(n, f) for n in nodes if n is not None):
            raise _Fail(f"{f} may occur in {what} only as #{f}")
    a2, bl2 = _pair(t.post, "postcondition")
    _eq(a2, a, "postcondition location part")
    _eq_list(conjuncts(bl2), [FileEq(FVar(f), _rebuild_file(f2, c.block, f3))] + bcs[1:],
             "postcondition block part")
    return {"f": f, "e": _pp(e), "bk": _pp(c.block)}


def _m_bd(t):
    c = t.cmd
    _need(isinstance(c, DeleteBlock), "command must be delete bk")
    p = t.pre
    _need(isinstance(p, Exists) and var_sort(p.var) == "S",
          "precondition must be exists @l. <@l ~> -, bk |-> @l>")
    lv = p.var
    loc, blk = _pair(p.body, "precondition body")
    _need(isinstance(loc, SeqCorr) and loc.seq == SeqVar(lv) and not isinstance(loc.rhs, Override),
          "precondition location part must be @l ~> - or @l ~> (e...)")
    _eq(blk, BlkPointsTo(c.block, SeqVar(lv)), "precondition block part")
    if loc.rhs is not None:
        for n in names_in(c.block):
            _not_free(n, loc.rhs, "the cell values")
    _eq(t.post, Exists(lv, Pair(loc, EMP_B)), "postcondition")
    return {"bk": _pp(c.block), "@l": lv}


def _m_baap(t):
    c = t.cmd
    _need(isinstance(c, Attach), "command must be attach(f, ...)")
    f = c.file
    a, bl = _pair(t.pre, "precondition")
    acs = conjuncts(a)
    _need(isinstance(acs[0], Cmp) and acs[0].op == "=" and acs[0].left == FileLen(FVar(f)),
          f"precondition location part must start with #{f} = m")
    m = acs[0].right
    _not_free(f, [m], "m")
    f1, beta = _file_eq_var(bl, f, "precondition block part")
    sf = lambda n: _sub(n, f, FVar(f1))  # noqa: E731
    a2, bl2 = _pair(t.post, "postcondition")
    _eq_list(conjuncts(a2),
             [Cmp("=", FileLen(FVar(f)), BinOp("+", m, Num(len(c.blocks))))] + [sf(x) for x in acs[1:]],
             "postcondition location part")
    blocks = tuple(sf(x) for x in c.blocks)
    _eq_list(conjuncts(bl2), [FileEq(FVar(f), FConcat(FVar(f1), FTuple(blocks)))] + [sf(x) for x in beta],
             "postcondition block part")
    return {"f": f, "f'": f1, "m": _pp(m)}


def _m_bclbw(t):
    c = t.cmd
    _need(isinstance(c, BlockLookup), "command must be x := {bk.e}")
    x = c.var
    p = t.pre
    _need(isinstance(p, And) and isinstance(p.left, Pair),
          "precondition must be <e = i, true_B> && exists @l, x'. (... * (... -* p))")
    _need(p.left.blk == TRUE_B and isinstance(p.left.loc, Cmp) and p.left.loc.op == "="
          and p.left.loc.left == c.index, "first conjunct must be <e = i, true_B>")
    i = p.left.loc.right
    ex = p.right
    _need(isinstance(ex, Exists) and var_sort(ex.var) == "S" and isinstance(ex.body, Exists)
          and var_sort(ex.body.var) == "V", "second conjunct must be exists @l, x'. ...")
    lv, x1 = ex.var, ex.body.var
    st = ex.body.body
    _need(isinstance(st, Star) and isinstance(st.right, Wand), "body must be <...> * (<...> -* p)")
    left = st.left
    loc, blk = _pair(left, "current block description")
    _need(isinstance(loc, SeqCorr) and loc.seq == SeqVar(lv) and isinstance(loc.rhs, Override),
          "current block description must be @l ~> (e... | i >-> x')")
    _eq(loc.rhs.index, i, "override index")
    _eq(loc.rhs.value, Var(x1), "override value")
    _eq(blk, BlkPointsTo(c.block, SeqVar(lv)), "current block")
    es = loc.rhs.values
    _need(x1 != x, "x' must be distinct from x")
    _not_free(x1, [c.index, t.post, i, es, c.block], "e, i, the values, bk or p")
    _not_free(x, [es, c.block], "the values or bk")
    sx = lambda n: _sub(n, x, Var(x1))  # noqa: E731
    wl = Pair(SeqCorr(SeqVar(lv), Override(tuple(sx(e) for e in es), i, Var(x1))),
              BlkPointsTo(sx(c.block), SeqVar(lv)))
    _eq(st.right.left, wl, "wand antecedent")
    _eq(st.right.right, sx(t.post), "wand consequent")
    return {"x": x, "x'": x1, "i": _pp(i), "p": _pp(t.post)}


@dataclass(frozen=True)
class AxiomInfo:
    id: str
    mnemonic: str
    cmd: type
    matcher: Callable
    signature: Callable  # (triple) -> bool: characteristic atoms present


def _contains(node, pred) -> bool:
    if pred(node):
        return True
    if isinstance(node, tuple):
        return any(_contains(x, pred) for x in node)
    if hasattr(node, "__dataclass_fields__"):
        return any(_contains(getattr(node, f), pred) for f in node.__dataclass_fields__ if f != "line")
    return False


def _any(_t):
    return True


AXIOMS: dict[str, AxiomInfo] = {a.id: a for a in [
    AxiomInfo("A1", "SKIP", Skip, _m_skip, _any),
    AxiomInfo("A2", "SA", Assign, _m_sa, _any),
    AxiomInfo("A3", "LA", Cons, _m_la, _any),
    AxiomInfo("A4", "LL", Lookup, _m_ll, _any),
    AxiomInfo("A5", "LM", Mutate, _m_lm, _any),
    AxiomInfo("A6", "DL", Dispose, _m_dl, _any),
    AxiomInfo("A7", "FC", Create, _m_fc, _any),
    AxiomInfo("A8", "ATTACH", Attach, _m_attach, _any),
    AxiomInfo("A9", "FD", DeleteFile, _m_fd, _any),
    AxiomInfo("A10", "BA", Allocate, _m_ba,
              lambda t: _contains(t.post, lambda n: isinstance(n, SeqCorr))),
    AxiomInfo("A11", "BAalt", Allocate, _m_baalt,
              lambda t: _contains(t.post, lambda n: isinstance(n, BlkCorr))),
    AxiomInfo("A12", "BCA", Append, _m_bca,
              lambda t: _contains(t.post, lambda n: isinstance(n, BlkPointsTo) and isinstance(n.seq, SeqCat))),
    AxiomInfo("A13", "BCAalt", Append, _m_bcaalt,
              lambda t: _contains(t.post, lambda n: isinstance(n, BlkCat) and n.target == t.cmd.block)),
    AxiomInfo("A14", "BCL", BlockLookup, _m_bcl,
              lambda t: _contains(t.pre, lambda n: isinstance(n, Override))),
    AxiomInfo("A15", "BCLalt", BlockLookup, _m_bclalt,
              lambda t: _contains(t.pre, lambda n: isinstance(n, BlkCat) and n.target == t.cmd.block)
              and _contains(t.post, lambda n: isinstance(n, BlkCat) and n.target == t.cmd.block)),
    AxiomInfo("A16", "BASSIGN", BAssign, _m_bassign,
              lambda t: not isinstance(t.cmd.block, FIndex)),
    AxiomInfo("A17", "BAAalt", BAssign, _m_baaalt,
              lambda t: isinstance(t.cmd.block, FIndex)),
    AxiomInfo("A18", "BARF", SetFileBlock, _m_barf, _any),
    AxiomInfo("A19", "BD", DeleteBlock, _m_bd, _any),
    AxiomInfo("A20", "BAAp", Attach, _m_baap,
              lambda t: _contains(t.post, lambda n: n == FileLen(FVar(t.cmd.file)))),
    AxiomInfo("A21", "BCLBw", BlockLookup, _m_bclbw,
              lambda t: _contains(t.pre, lambda n: isinstance(n, Wand))),
]}

_BY_NAME = {a.mnemonic.lower(): a.id for a in AXIOMS.values()} | {k.lower(): k for k in AXIOMS}


def axiom_id(name: str) -> Optional[str]:
    """Canonical id for an axiom given by id or mnemonic, or None."""
    return _BY_NAME.get(name.lower())


def _strip_candidates(t: Triple):
    """The triple itself, then versions with common leading quantifiers removed."""
    yield t, ()
    names = command_names(t.cmd)
    pre, post, stripped = t.pre, t.post, []
    while (isinstance(pre, Exists) and isinstance(post, Exists) and pre.var == post.var
           and pre.var not in names):
        stripped.append(pre.var)
        pre, post = pre.body, post.body
        yield Triple(pre, t.cmd, post), tuple(stripped)


def match_axiom(axiom: str, t: Triple) -> dict:
    """Instantiate the named schema against ``t`` or raise :class:`MatchError`.

    Common existential prefixes over variables not free in the command are
    peeled off when the bare triple does not match (auxiliary variable
    elimination applied implicitly).
    """
    aid = axiom_id(axiom)
    if aid is None:
        raise MatchError(axiom, "unknown axiom")
    info = AXIOMS[aid]
    first_err = None
    for cand, stripped in _strip_candidates(t):
        try:
            subst = info.matcher(cand)
        except _Fail as exc:
            first_err = first_err or str(exc)
            continue
        if stripped:
            subst = dict(subst, exintro=", ".join(stripped))
        return subst
    raise MatchError(aid, first_err or "no match")


# --------------------------------------------------------- semantic checks

@dataclass
class TripleReport:
    """Outcome of running a triple on a batch of states."""

    checked: int = 0
    vacuous: int = 0
    unknown: int = 0
    counterexamples: list = field(default_factory=list)  # (State, reason)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    @property
    def verdict(self) -> str:
        if self.counterexamples:
            return "fail"
        return "unknown" if self.unknown else "pass"


def _run_triple(t: Triple, states: Iterable[State], fuel: int, bounds: Bounds, total: bool,
                limit: int) -> TripleReport:
    rep = TripleReport()
    expect_abort = isinstance(t.post, Abort)
    for s in states:
        if not sat(s, t.pre, bounds):
            rep.vacuous += 1
            continue
        rep.checked += 1
        out = exec_command(t.cmd, s, fuel)
        reason = None
        if isinstance(out, OutOfFuel):
            if total:
                rep.unknown += 1
            continue
        if expect_abort:
            if not isinstance(out, Fault):
                reason = "expected a fault, execution finished normally"
        elif isinstance(out, Fault):
            reason = f"execution faulted: {out.kind.value}"
        elif not sat(out.state, t.post, bounds):
            reason = f"postcondition fails in final state {format_state(out.state)}"
        if reason:
            rep.counterexamples.append((s, reason))
            if len(rep.counterexamples) >= limit:
                break
    return rep


def holds_partial(t: Triple, states: Iterable[State], fuel: int = DEFAULT_FUEL,
                  bounds: Bounds = DEFAULT_BOUNDS, limit: int = 5) -> TripleReport:
    """Check ``t`` for partial correctness on the given states; non-termination is vacuous."""
    return _run_triple(t, states, fuel, bounds, False, limit)


def holds_total(t: Triple, states: Iterable[State], fuel: int = DEFAULT_FUEL,
                bounds: Bounds = DEFAULT_BOUNDS, limit: int = 5) -> TripleReport:
    """Like :func:`holds_partial` but running out of fuel is reported as unknown."""
    return _run_triple(t, states, fuel, bounds, True, limit)


# ------------------------------------------------------------ step checker

MIN_WITNESSES = 3


@dataclass
class Verdict:
    ok: bool
    message: str
    caveats: list = field(default_factory=list)
    counterexample: Optional[State] = None


@dataclass
class CheckContext:
    """Settings and shared state threaded through a proof check."""

    bounds: Bounds = DEFAULT_BOUNDS
    trials: int = 120
    seed: int = 0
    fuel: int = 200
    pool: tuple = ()
    lemmas: dict = field(default_factory=dict)  # name -> (Lemma, Verdict)
    _cache: dict = field(default_factory=dict)

    def states(self, p, q) -> list:
        from .harness import candidate_states

        key = (p, q)
        if key not in self._cache:
            self._cache[key] = list(self.pool) + list(candidate_states(p, q, self.trials, self.seed))
        return self._cache[key]

    def entails(self, p, q):
        return entails_bounded(p, q, self.bounds, self.trials, self.seed, extra_states=self.pool)


def _witnesses(n: int) -> str:
    return f"{n} witness" if n == 1 else f"{n} witnesses"


def _reject(msg: str, state: Optional[State] = None) -> Verdict:
    return Verdict(False, msg, counterexample=state)


def _check_axiom(aid: str, t: Triple, ctx: CheckContext) -> Verdict:
    info = AXIOMS[aid]
    try:
        subst = match_axiom(aid, t)
        extra = f" (after eliminating {subst['exintro']})" if "exintro" in subst else ""
        return Verdict(True, f"instance of {aid}/{info.mnemonic}{extra}")
    except MatchError as exc:
        literal = exc.message
    if not isinstance(t.cmd, info.cmd) or not info.signature(t):
        return _reject(f"not an instance of {aid}/{info.mnemonic}: {literal}")
    rep = holds_partial(t, ctx.states(t.pre, t.post), ctx.fuel, ctx.bounds)
    if not rep.ok:
        s, why = rep.counterexamples[0]
        return _reject(f"{aid}/{info.mnemonic} applied in context is invalid: {why} "
                       f"from {format_state(s)}", s)
    if rep.checked < MIN_WITNESSES:
        return _reject(f"not an instance of {aid}/{info.mnemonic} ({literal}) and only "
                       f"{rep.checked} generated states satisfy the precondition")
    return Verdict(True, f"{aid}/{info.mnemonic} applied in context",
                   [f"{aid}/{info.mnemonic} applied in context (schema mismatch: {literal}); "
                    f"validated on {rep.checked} states"])


def _entail_flank(name: str, p, q, lemmas: tuple, ctx: CheckContext) -> tuple[Optional[str], list]:
    """Returns (error or None, caveats)."""
    if p == q:
        return None, []
    for lname in lemmas:
        lem, verdict = ctx.lemmas[lname]
        if (lem.lhs, lem.rhs) == (p, q):
            if not verdict.ok:
                return f"{name}: lemma {lname} was rejected", []
            return None, list(verdict.caveats)
    res = ctx.entails(p, q)
    if isinstance(res, CounterExample):
        return (f"{name} entailment fails: {_pp(p)} does not entail {_pp(q)} "
                f"in {format_state(res.state)}"), []
    note = f"{name} entailment BoundedValid over {res.trials} trials ({_witnesses(res.witnesses)})"
    return None, [note]


def _premises(step: ProofStep, proven: dict) -> list:
    missing = [r for r in step_refs(step.just) if r not in proven]
    _need(not missing, f"cites unknown step {missing[0] if missing else ''}")
    return [proven[r] for r in step_refs(step.just)]


def check_step(script: ProofScript, step: ProofStep, bounds: Bounds = DEFAULT_BOUNDS,
               ctx: Optional[CheckContext] = None, proven: Optional[dict] = None) -> Verdict:
    """Check one step assuming its premises have been established."""
    ctx = ctx or CheckContext(bounds=bounds)
    if not ctx.lemmas and script.lemmas:
        _validate_lemmas(script, ctx)
    if proven is None:
        proven = {s.id: s.triple for s in script.steps}
    t, j = step.triple, step.just
    name = j.name
    try:
        if axiom_id(name):
            if j.args:
                return _reject("axioms take no arguments")
            return _check_axiom(axiom_id(name), t, ctx)
        rule = _RULES.get(name)
        if rule is None:
            return _reject(f"unknown justification {name!r}")
        return rule(t, j, _premises(step, proven), ctx)
    except _Fail as exc:
        return _reject(str(exc))


def _r_seq(t, j, prem, ctx):
    _need(prem, "composition needs at least one premise")
    _eq(prem[0].pre, t.pre, "precondition")
    for a, b in zip(prem, prem[1:]):
        _eq(b.pre, a.post, "intermediate assertion")
    _eq(t.post, prem[-1].post, "postcondition")
    parts = [c for p in prem for c in flatten_seq(p.cmd)]
    _need(flatten_seq(t.cmd) == parts, "command is not the composition of the premises' commands")
    return Verdict(True, f"composition of {len(prem)} steps")


def _r_if(t, j, prem, ctx):
    c = t.cmd
    _need(isinstance(c, If), "command must be an if statement")
    a, b = prem
    tb = transfer(c.cond)
    _eq(a.pre, And(t.pre, tb), "then-branch precondition")
    _eq(b.pre, And(t.pre, Not(tb)), "else-branch precondition")
    _eq(a.cmd, c.then, "then-branch command")
    _eq(b.cmd, c.orelse, "else-branch command")
    _eq(a.post, t.post, "then-branch postcondition")
    _eq(b.post, t.post, "else-branch postcondition")
    return Verdict(True, "conditional rule")


def _r_while(t, j, prem, ctx):
    c = t.cmd
    _need(isinstance(c, While), "command must be a while loop")
    (body,) = prem
    tb = transfer(c.cond)
    inv = t.pre
    _eq(body.pre, And(inv, tb), "loop body precondition")
    _eq(body.post, inv, "loop body postcondition (invariant)")
    _eq(body.cmd, c.body, "loop body")
    _eq(t.post, And(inv, Not(tb)), "loop postcondition")
    return Verdict(True, "while rule")


def _r_conseq(t, j, prem, ctx):
    (p,) = prem
    _eq(t.cmd, p.cmd, "command")
    lemmas = j.args[1:]
    caveats = []
    for flank, a, b in (("precondition", t.pre, p.pre), ("postcondition", p.post, t.post)):
        err, cav = _entail_flank(flank, a, b, lemmas, ctx)
        if err:
            return _reject(err)
        caveats += cav
    return Verdict(True, "consequence", caveats)


def _r_exintro(t, j, prem, ctx):
    (p,) = prem
    _eq(t.cmd, p.cmd, "command")
    _need(isinstance(t.pre, Exists) and isinstance(t.post, Exists) and t.pre.var == t.post.var,
          "pre and postcondition must quantify the same variable")
    x = t.pre.var
    _need(x not in command_names(t.cmd), f"{x} is free in the command")
    _eq(t.pre.body, p.pre, "quantified precondition")
    _eq(t.post.body, p.post, "quantified postcondition")
    return Verdict(True, f"auxiliary variable elimination of {x}")


def _r_rename(t, j, prem, ctx):
    (p,) = prem
    _eq(t.cmd, p.cmd, "command")
    cnames = command_names(t.cmd)
    args = j.args[1:]
    old_names = names_in(p.pre) | names_in(p.post)
    new_names = names_in(t.pre) | names_in(t.post)
    if len(args) == 2:
        pairs = [tuple(args)]
    else:
        pairs = [(x, y) for x in old_names - new_names for y in new_names - old_names
                 if var_sort(x) == var_sort(y)]
    for x, y in pairs:
        if x in cnames or y in cnames or y in old_names:
            continue
        try:
            cls = {"V": Var, "B": BVar, "F": FVar, "S": SeqVar}[var_sort(x)]
            if substitute(p.pre, {x: cls(y)}) == t.pre and substitute(p.post, {x: cls(y)}) == t.post:
                return Verdict(True, f"renamed {x} to {y}")
        except SubstError:
            continue
    return _reject("no renaming x -> y with x, y not free in the command and y fresh explains the step")


def _r_frame(t, j, prem, ctx):
    (p,) = prem
    _eq(t.cmd, p.cmd, "command")
    _need(isinstance(t.pre, Star) and isinstance(t.post, Star),
          "pre and postcondition must be p * r and q * r")
    _eq(t.pre.left, p.pre, "framed precondition")
    _eq(t.post.left, p.post, "framed postcondition")
    r = t.pre.right
    _eq(t.post.right, r, "frame")
    clash = sorted(modifies(t.cmd).all() & names_in(r))
    if clash:
        return _reject(f"frame mentions {clash[0]}, which the command modifies")
    return Verdict(True, "frame rule")


def _r_abort(kind):
    def rule(t, j, prem, ctx):
        c = t.cmd
        _need(isinstance(c, kind), f"command must be {'an if statement' if kind is If else 'a while loop'}")
        _need(isinstance(t.post, Abort), "postcondition must be abort")
        n = 0
        for s in ctx.states(t.pre, t.pre):
            if not sat(s, t.pre, ctx.bounds):
                continue
            n += 1
            try:
                bool_value(c.cond, s)
            except ExecFault:
                continue
            return _reject(f"guard evaluates without fault in {format_state(s)}", s)
        _need(n >= 1, "no generated state satisfies the precondition")
        return Verdict(True, "guard faults on every generated precondition state",
                       [f"guard fault checked on {n} states"])
    return rule


_RULES = {
    "seq": _r_seq, "R1": _r_seq, "if": _r_if, "R2": _r_if, "while": _r_while, "R3": _r_while,
    "conseq": _r_conseq, "R4": _r_conseq, "exintro": _r_exintro, "R5": _r_exintro,
    "rename": _r_rename, "R6": _r_rename, "frame": _r_frame, "R7": _r_frame,
    "ifabort": _r_abort(If), "R2A": _r_abort(If), "whileabort": _r_abort(While), "R3A": _r_abort(While),
}


# ------------------------------------------------------------ whole proofs

@dataclass
class StepReport:
    id: str
    justification: str
    ok: bool
    message: str
    caveats: list = field(default_factory=list)


@dataclass
class LemmaReport:
    name: str
    mode: str
    ok: bool
    message: str


@dataclass
class ProofReport:
    steps: list
    lemmas: list
    accepted: bool
    goal_message: str

    @property
    def first_failure(self) -> Optional[str]:
        for s in self.steps:
            if not s.ok:
                return s.id
        return None

    @property
    def admitted(self) -> list:
        return [lem.name for lem in self.lemmas if lem.mode == "admit"]

    @property
    def caveats(self) -> list:
        return [f"step {s.id}: {c}" for s in self.steps for c in s.caveats]

    def render(self) -> str:
        lines = []
        for lem in self.lemmas:
            lines.append(f"lemma {lem.name} [{lem.mode}]: {'ok' if lem.ok else 'REJECTED'} - {lem.message}")
        for s in self.steps:
            lines.append(f"step {s.id} by {s.justification}: {'ok' if s.ok else 'REJECTED'} - {s.message}")
            lines.extend(f"    caveat: {c}" for c in s.caveats)
        lines.append(f"goal: {self.goal_message}")
        lines.append("ACCEPTED" if self.accepted else f"REJECTED (first failing step: {self.first_failure})"
                     if self.first_failure else "REJECTED")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "goal": self.goal_message,
                "first_failure": self.first_failure,
                "lemmas": [asdict(x) for x in self.lemmas],
                "steps": [asdict(x) for x in self.steps]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _validate_lemmas(script: ProofScript, ctx: CheckContext) -> list:
    reports = []
    for lem in script.lemmas:
        if lem.mode == "admit":
            v = Verdict(True, "admitted without checking", [f"relies on admitted lemma {lem.name}"])
        else:
            res = ctx.entails(lem.lhs, lem.rhs)
            if isinstance(res, CounterExample):
                v = _reject(f"counterexample {format_state(res.state)}", res.state)
            else:
                v = Verdict(True, f"BoundedValid over {res.trials} trials ({_witnesses(res.witnesses)})",
                            [f"lemma {lem.name} BoundedValid over {res.trials} trials"])
        ctx.lemmas[lem.name] = (lem, v)
        reports.append(LemmaReport(lem.name, lem.mode, v.ok, v.message))
    return reports


def _just_text(j: Justification) -> str:
    return j.name + (f"({', '.join(j.args)})" if j.args else "")


def check_proof(script: ProofScript, bounds: Bounds = DEFAULT_BOUNDS, trials: int = 120,
                seed: int = 0, fuel: int = 200) -> ProofReport:
    """Check every step in order and the goal; see :class:`ProofReport`."""
    from .harness import reachable_states

    ctx = CheckContext(bounds=bounds, trials=trials, seed=seed, fuel=fuel)
    ctx.pool = tuple(reachable_states(script, seed=seed, fuel=fuel))
    lemma_reports = _validate_lemmas(script, ctx)
    proven = {s.id: s.triple for s in script.steps}
    status: dict[str, bool] = {}
    reports = []
    for st in script.steps:
        bad = [r for r in step_refs(st.just) if not status.get(r, False)]
        v = check_step(script, st, bounds, ctx, proven)
        ok, msg = v.ok, v.message
        if ok and bad:
            ok, msg = False, f"depends on rejected step {bad[0]}"
        status[st.id] = ok
        reports.append(StepReport(st.id, _just_text(st.just), ok, msg, list(v.caveats)))
    if not script.steps:
        goal_ok, goal_msg = False, "script has no steps"
    elif script.goal is None:
        goal_ok, goal_msg = False, "script declares no goal"
    elif script.goal != script.steps[-1].id:
        goal_ok, goal_msg = False, f"goal step {script.goal} is not the final step {script.steps[-1].id}"
    else:
        goal_ok = status[script.goal]
        goal_msg = f"step {script.goal} " + ("established" if goal_ok else "not established")
    accepted = goal_ok and all(r.ok for r in reports)
    return ProofReport(reports, lemma_reports, accepted, goal_msg)
