"""Concrete syntax: lexer, recursive-descent parser and pretty-printer.

ASCII spellings: ``|->`` points-to, ``-->`` points-to inside a larger heap,
``~>`` content correspondence, ``(*)`` block concatenation, ``-*`` magic
wand, ``++`` file or sequence concatenation, ``>->`` list override,
``<a, b>`` pairs. Products inside assertions must be parenthesised because
``*`` is the separating conjunction there.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import *  # noqa: F401,F403
from .ast import var_sort

KEYWORDS = {
    "skip", "cons", "dispose", "create", "attach", "delete", "allocate", "append",
    "if", "then", "else", "while", "do", "nil", "true", "false", "true_V",
    "false_V", "emp_V", "true_B", "false_B", "emp_B", "emp", "exists", "forall",
    "abort", "lemma", "step", "goal", "by", "admit", "check",
}

_PUNCT = [
    ">->", "|->", "-->", "(*)", ":=", "|=", "<=", "==", "&&", "||", "->", "-*",
    "~>", "++", "<", ">", "(", ")", "[", "]", "{", "}", ",", ";", ".", ":", "=",
    "+", "-", "*", "#", "!", "|",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+|//[^\n]*)"
    r"|(?P<label>\d+[a-z]+(?![A-Za-z0-9_']))"
    r"|(?P<num>\d+)"
    r"|(?P<seqvar>@[A-Za-z_][A-Za-z0-9_]*'*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in _PUNCT) + ")"
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int, expected=()):
        self.line, self.col, self.expected = line, col, tuple(sorted(set(expected)))
        extra = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {msg}{extra}")


class SortError(ParseError):
    pass


class DanglingReference(ValueError):
    """A proof step or goal names a step that is not defined before it."""


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'seqvar', 'label', 'kw', 'punct', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            if kind == "ident" and val in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, val, line, pos - line_start + 1))
        nl = val.count("\n")
        if nl:
            line += nl
            line_start = pos + val.rfind("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.best: tuple[int, str, set] = (-1, "", set())

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "kw") and t.text in texts

    def fail(self, msg: str, expected=()):
        t = self.tok
        if self.i > self.best[0]:
            self.best = (self.i, msg, set(expected))
        elif self.i == self.best[0]:
            self.best[2].update(expected)
        raise ParseError(msg, t.line, t.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"unexpected {self.tok.text or 'end of input'!r}", [text])
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self, sort: str | None = None) -> str:
        t = self.tok
        if t.kind == "seqvar":
            name = t.text
        elif t.kind == "ident":
            name = t.text
        else:
            self.fail(f"expected a variable, found {t.text or 'end of input'!r}", ["<variable>"])
        if sort is not None and var_sort(name) != sort:
            raise SortError(f"variable {name!r} has the wrong sort", t.line, t.col)
        self.i += 1
        return name

    def attempt(self, *alts):
        """Try parse functions in order, restoring position between attempts."""
        start = self.i
        last = None
        for alt in alts:
            try:
                return alt()
            except ParseError as e:
                last = e
                self.i = start
        raise last

    def done(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}", ["end of input"])

    # -- token classification
    def _is_file_start(self, k: int = 0) -> bool:
        t = self.peek(k)
        if t.kind == "kw" and t.text == "nil":
            return True
        return t.kind == "ident" and var_sort(t.text) == "F" and not (
            self.peek(k + 1).kind == "punct" and self.peek(k + 1).text == "."
        )

    def _is_block_start(self, k: int = 0) -> bool:
        t = self.peek(k)
        if t.kind == "ident":
            s = var_sort(t.text)
            return s == "B" or (s == "F" and self.peek(k + 1).text == "." and self.peek(k + 1).kind == "punct")
        return False

    # -- location expressions
    def loc_expr(self, allow_mul: bool = True) -> LocExpr:
        e = self.loc_term(allow_mul)
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.loc_term(allow_mul))
        return e

    def loc_term(self, allow_mul: bool) -> LocExpr:
        e = self.loc_factor()
        while allow_mul and self.at("*"):
            self.i += 1
            e = BinOp("*", e, self.loc_factor())
        return e

    def loc_factor(self) -> LocExpr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(int(t.text))
        if self.at("-") and self.peek().kind == "num":
            self.i += 2
            return Num(-int(self.toks[self.i - 1].text))
        if t.kind == "ident":
            if var_sort(t.text) != "V":
                raise SortError(f"{t.text!r} is not a location variable", t.line, t.col)
            self.i += 1
            return Var(t.text)
        if self.accept("#"):
            if self._is_block_start() or self.tok.kind == "num":
                return BlockLen(self.block_expr())
            return FileLen(self.file_atom())
        if self.accept("("):
            e = self.loc_expr(True)
            self.expect(")")
            return e
        self.fail(f"expected an expression, found {t.text or 'end of input'!r}",
                  ["<number>", "<variable>", "#", "("])

    def index_factor(self) -> LocExpr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(int(t.text))
        if t.kind == "ident" and var_sort(t.text) == "V":
            self.i += 1
            return Var(t.text)
        if self.accept("("):
            e = self.loc_expr(True)
            self.expect(")")
            return e
        self.fail("expected an index", ["<number>", "<variable>", "("])

    def loc_list(self) -> tuple:
        self.expect("(")
        items = []
        if not self.at(")"):
            items.append(self.loc_expr())
            while self.accept(","):
                items.append(self.loc_expr())
        self.expect(")")
        return tuple(items)

    # -- block and file expressions
    def block_expr(self) -> BlockExpr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return BNum(int(t.text))
        if t.kind == "ident":
            s = var_sort(t.text)
            if s == "B":
                self.i += 1
                return BVar(t.text)
            if s == "F" and self.peek().text == ".":
                self.i += 2
                return FIndex(t.text, self.index_factor())
            raise SortError(f"{t.text!r} is not a block expression", t.line, t.col)
        self.fail("expected a block expression", ["<block variable>", "<number>", "f.e"])

    def block_list(self) -> tuple:
        self.expect("(")
        items = []
        if not self.at(")"):
            items.append(self.block_expr())
            while self.accept(","):
                items.append(self.block_expr())
        self.expect(")")
        return tuple(items)

    def file_expr(self) -> FileExpr:
        fe = self.file_atom()
        while self.accept("++"):
            if self._is_block_start() or self.tok.kind == "num":
                fe = FAppend(fe, self.block_expr())
            else:
                fe = FConcat(fe, self.file_atom())
        return fe

    def file_atom(self) -> FileExpr:
        t = self.tok
        if self.accept("nil"):
            return Nil()
        if self._is_file_start():
            self.i += 1
            return FVar(t.text)
        if self.at("("):
            if self._is_file_start(1) or self.peek().text == "(":
                self.i += 1
                fe = self.file_expr()
                self.expect(")")
                return fe
            return FTuple(self.block_list())
        self.fail("expected a file expression", ["nil", "<file variable>", "("])

    # -- sequences of locations
    def seq_expr(self) -> SeqExpr:
        s = self.seq_atom()
        while self.accept("++"):
            s = SeqCat(s, self.seq_atom())
        return s

    def seq_atom(self) -> SeqExpr:
        if self.tok.kind == "seqvar":
            name = self.tok.text
            self.i += 1
            return SeqVar(name)
        if self.at("("):
            return SeqLit(self.loc_list())
        self.fail("expected a location sequence", ["@var", "("])

    # -- boolean expressions
    def bool_expr(self) -> BoolExpr:
        e = self.bool_and()
        while self.accept("||"):
            e = BoolOr(e, self.bool_and())
        return e

    def bool_and(self) -> BoolExpr:
        e = self.bool_not()
        while self.accept("&&"):
            e = BoolAnd(e, self.bool_not())
        return e

    def bool_not(self) -> BoolExpr:
        if self.accept("!"):
            return BoolNot(self.bool_not())
        return self.bool_atom()

    def bool_atom(self) -> BoolExpr:
        if self.accept("true"):
            return BoolConst(True)
        if self.accept("false"):
            return BoolConst(False)

        def paren():
            self.expect("(")
            e = self.bool_expr()
            self.expect(")")
            return e

        def cmp():
            left = self.loc_expr()
            if self.at("=", "<="):
                op = self.tok.text
                self.i += 1
                return Cmp(op, left, self.loc_expr())
            self.fail("expected a comparison", ["=", "<="])

        def beq():
            left = self.block_expr()
            self.expect("==")
            return BlkEq(left, self.block_expr())

        if self._is_block_start():
            return self.attempt(beq, cmp)
        if self.at("("):
            return self.attempt(paren, cmp)
        return self.attempt(cmp, beq)

    # -- commands
    def command(self) -> Command:
        c = self.atomic()
        if self.accept(";"):
            if self.at("}", ")") or self.tok.kind == "eof" or self.at("{"):
                return c
            return Seq(c, self.command())
        return c

    def braced(self) -> Command:
        self.expect("{")
        c = self.command()
        self.expect("}")
        return c

    def atomic(self) -> Command:
        t = self.tok
        ln = t.line
        if self.accept("skip"):
            return Skip(line=ln)
        if self.accept("("):
            c = self.command()
            self.expect(")")
            return c
        if self.accept("if"):
            cond = self.bool_expr()
            self.expect("then")
            th = self.braced()
            self.expect("else")
            return If(cond, th, self.braced(), line=ln)
        if self.accept("while"):
            cond = self.bool_expr()
            self.expect("do")
            return While(cond, self.braced(), line=ln)
        if self.accept("dispose"):
            self.expect("(")
            e = self.loc_expr()
            self.expect(")")
            return Dispose(e, line=ln)
        if self.accept("attach"):
            self.expect("(")
            f = self.ident("F")
            blocks = []
            while self.accept(","):
                blocks.append(self.block_expr())
            self.expect(")")
            return Attach(f, tuple(blocks), line=ln)
        if self.accept("delete"):
            if self._is_file_start() and self.tok.kind == "ident":
                return DeleteFile(self.ident("F"), line=ln)
            return DeleteBlock(self.block_expr(), line=ln)
        if self.accept("append"):
            self.expect("(")
            bk = self.block_expr()
            self.expect(",")
            e = self.loc_expr()
            self.expect(")")
            return Append(bk, e, line=ln)
        if self.accept("["):
            addr = self.loc_expr()
            self.expect("]")
            self.expect(":=")
            return Mutate(addr, self.loc_expr(), line=ln)
        if t.kind != "ident":
            self.fail(f"expected a command, found {t.text or 'end of input'!r}",
                      ["skip", "if", "while", "<variable>", "[", "dispose", "attach",
                       "delete", "append"])
        sort = var_sort(t.text)
        if sort == "F" and self.peek().text == ".":
            self.i += 2
            idx = self.index_factor()
            self.expect(":=")
            return SetFileBlock(t.text, idx, self.block_expr(), line=ln)
        name = self.ident()
        self.expect(":=")
        if sort == "F":
            self.expect("create")
            return Create(name, self.block_list(), line=ln)
        if sort == "B":
            if self.accept("allocate"):
                return Allocate(name, self.loc_list(), line=ln)
            return BAssign(name, self.block_expr(), line=ln)
        if sort != "V":
            raise SortError(f"cannot assign to {name!r}", t.line, t.col)
        if self.accept("cons"):
            return Cons(name, self.loc_list(), line=ln)
        if self.accept("["):
            addr = self.loc_expr()
            self.expect("]")
            return Lookup(name, addr, line=ln)
        if self.accept("{"):
            bk = self.block_expr()
            self.expect(".")
            idx = self.index_factor()
            self.expect("}")
            return BlockLookup(name, bk, idx, line=ln)
        return Assign(name, self.loc_expr(), line=ln)

    # -- assertions (shared connective skeleton, layer-specific atoms)
    def assertion(self, level: str):
        left = self.a_wand(level)
        if self.accept("->"):
            return Imp(left, self.assertion(level))
        return left

    def a_wand(self, level):
        left = self.a_or(level)
        if self.accept("-*"):
            return Wand(left, self.a_wand(level))
        return left

    def a_or(self, level):
        e = self.a_and(level)
        while self.accept("||"):
            e = Or(e, self.a_and(level))
        return e

    def a_and(self, level):
        e = self.a_star(level)
        while self.accept("&&"):
            e = And(e, self.a_star(level))
        return e

    def a_star(self, level):
        e = self.a_unary(level)
        while self.accept("*"):
            e = Star(e, self.a_unary(level))
        return e

    def a_unary(self, level):
        if self.accept("!"):
            return Not(self.a_unary(level))
        if self.at("exists", "forall"):
            q = Exists if self.tok.text == "exists" else Forall
            self.i += 1
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.expect(".")
            body = self.assertion(level)
            for n in reversed(names):
                body = q(n, body)
            return body
        return {"V": self.loc_atom, "B": self.blk_atom, "G": self.glob_atom}[level]()

    def _paren_assertion(self, level):
        def go():
            self.expect("(")
            a = self.assertion(level)
            self.expect(")")
            return a
        return go

    def loc_atom(self):
        t = self.tok
        for kw, node in (("true_V", Const("V", True)), ("false_V", Const("V", False)),
                         ("emp_V", Emp("V"))):
            if self.accept(kw):
                return node

        def corr():
            s = self.seq_expr()
            self.expect("~>")
            if self.accept("-"):
                return SeqCorr(s, None)
            self.expect("(")
            vals = []
            if not self.at(")"):
                vals.append(self.loc_expr())
                while self.accept(","):
                    vals.append(self.loc_expr())
            if self.accept("|"):
                idx = self.loc_expr()
                self.expect(">->")
                val = self.loc_expr()
                self.expect(")")
                return SeqCorr(s, Override(tuple(vals), idx, val))
            self.expect(")")
            return SeqCorr(s, tuple(vals))

        def cmp_or_pts():
            left = self.loc_expr(allow_mul=False)
            if self.at("=", "<="):
                op = self.tok.text
                self.i += 1
                return Cmp(op, left, self.loc_expr(allow_mul=False))
            if self.accept("|->"):
                if self.at("-") and self.peek().kind != "num":
                    self.i += 1
                    return PointsTo(left, None)
                if self.at("("):
                    def lst():
                        vals = self.loc_list()
                        if len(vals) < 2:
                            self.fail("a points-to list needs two or more values")
                        return PointsToList(left, vals)
                    return self.attempt(lst, lambda: PointsTo(left, self.loc_expr(allow_mul=False)))
                return PointsTo(left, self.loc_expr(allow_mul=False))
            if self.accept("-->"):
                return Hook(left, self.loc_expr(allow_mul=False))
            if self.at("=="):
                raise SortError("'==' compares block expressions", self.tok.line, self.tok.col)
            self.fail("expected a location assertion", ["=", "<=", "|->", "-->"])

        if t.kind == "seqvar":
            return corr()
        if self.at("("):
            return self.attempt(self._paren_assertion("V"), corr, cmp_or_pts)
        return cmp_or_pts()

    def blk_atom(self):
        for kw, node in (("true_B", Const("B", True)), ("false_B", Const("B", False)),
                         ("emp_B", Emp("B"))):
            if self.accept(kw):
                return node

        def file_eq():
            left = self.file_expr()
            self.expect("=")
            return FileEq(left, self.file_expr())

        def block_atom():
            bk = self.block_expr()
            if self.accept("=="):
                first = self.block_expr()
                parts = [first]
                while self.accept("(*)"):
                    parts.append(self.block_expr())
                return BlkCat(bk, tuple(parts)) if len(parts) > 1 else BlkEq(bk, first)
            if self.accept("|->"):
                return BlkPointsTo(bk, self.seq_expr())
            if self.accept("-->"):
                return BlkHook(bk, self.seq_expr())
            if self.accept("~>"):
                return BlkCorr(bk, self.block_expr())
            self.fail("expected a block assertion", ["==", "|->", "-->", "~>"])

        def cmp():
            left = self.loc_expr(allow_mul=False)
            if self.at("=", "<="):
                op = self.tok.text
                self.i += 1
                return Cmp(op, left, self.loc_expr(allow_mul=False))
            if self.at("=="):
                raise SortError("'==' compares block expressions", self.tok.line, self.tok.col)
            self.fail("expected a comparison", ["=", "<="])

        if self._is_block_start():
            return self.attempt(block_atom, cmp)
        if self._is_file_start():
            return file_eq()
        if self.at("("):
            return self.attempt(self._paren_assertion("B"), file_eq, cmp)
        if self.tok.kind == "num":
            return self.attempt(block_atom, cmp)
        return cmp()

    def glob_atom(self):
        for kw, node in (("true", Const("G", True)), ("false", Const("G", False)),
                         ("emp", Emp("G")), ("abort", Abort())):
            if self.accept(kw):
                return node
        if self.accept("<"):
            a = self.assertion("V")
            self.expect(",")
            b = self.assertion("B")
            self.expect(">")
            return Pair(a, b)
        if self.at("("):
            return self._paren_assertion("G")()
        if self._is_block_start() or self.tok.kind == "num":
            bk = self.block_expr()
            self.expect("~>")
            return BlkCorrVals(bk, self.loc_list())
        self.fail(f"expected an assertion, found {self.tok.text or 'end of input'!r}",
                  ["<", "true", "false", "emp", "exists", "forall", "!", "("])

    # -- proof scripts
    def label(self) -> str:
        t = self.tok
        if t.kind in ("num", "label"):
            self.i += 1
            return t.text
        self.fail("expected a step label", ["<label>"])

    def triple(self) -> Triple:
        self.expect("{")
        p = self.assertion("G")
        self.expect("}")
        c = self.command()
        self.expect("{")
        q = self.assertion("G")
        self.expect("}")
        return Triple(p, c, q)

    def justification(self) -> Justification:
        t = self.tok
        if t.kind not in ("ident", "kw"):
            self.fail("expected an axiom or rule name", ["<name>"])
        self.i += 1
        args = []
        if self.accept("("):
            if not self.at(")"):
                args.append(self.just_arg())
                while self.accept(","):
                    args.append(self.just_arg())
            self.expect(")")
        return Justification(t.text, tuple(args))

    def just_arg(self) -> str:
        t = self.tok
        if t.kind in ("num", "label", "ident", "seqvar"):
            self.i += 1
            return t.text
        self.fail("expected a step label or name", ["<label>", "<name>"])

    def script(self) -> ProofScript:
        lemmas, steps, goal = [], [], None
        seen: set[str] = set()
        while self.tok.kind != "eof":
            if self.accept("lemma"):
                name = self.ident()
                self.expect(":")
                lhs = self.assertion("G")
                self.expect("|=")
                rhs = self.assertion("G")
                mode = "check"
                if self.at("admit", "check"):
                    mode = self.tok.text
                    self.i += 1
                lemmas.append(Lemma(name, lhs, rhs, mode))
            elif self.at("step"):
                ln = self.tok.line
                self.i += 1
                sid = self.label()
                self.expect(":")
                tr = self.triple()
                self.expect("by")
                just = self.justification()
                if sid in seen:
                    raise ParseError(f"duplicate step {sid}", ln, 1)
                seen.add(sid)
                steps.append(ProofStep(sid, tr, just, line=ln))
            elif self.accept("goal"):
                self.expect(":")
                self.expect("step")
                goal = self.label()
            else:
                self.fail(f"unexpected {self.tok.text!r}", ["lemma", "step", "goal"])
        return ProofScript(tuple(lemmas), tuple(steps), goal)


def _wrap(fn):
    def run(text: str):
        p = Parser(text)
        try:
            out = fn(p)
            p.done()
            return out
        except SortError:
            raise
        except ParseError as e:
            # report the furthest point any alternative reached
            idx, msg, expected = p.best
            if idx >= 0:
                t = p.toks[idx]
                if (t.line, t.col) > (e.line, e.col):
                    raise ParseError(msg, t.line, t.col, expected) from None
            raise
    return run


parse_program = _wrap(lambda p: p.command())
parse_assertion = _wrap(lambda p: p.assertion("G"))
parse_loc_assertion = _wrap(lambda p: p.assertion("V"))
parse_block_assertion = _wrap(lambda p: p.assertion("B"))
parse_bool = _wrap(lambda p: p.bool_expr())
parse_loc_expr = _wrap(lambda p: p.loc_expr())
parse_triple = _wrap(lambda p: p.triple())
_parse_script_raw = _wrap(lambda p: p.script())


def parse_proof_script(text: str) -> ProofScript:
    script = _parse_script_raw(text)
    check_references(script)
    return script


# step-id arguments of each rule; everything else is a variable name
RULE_STEP_ARITY = {
    "seq": None, "R1": None, "if": 2, "R2": 2, "while": 1, "R3": 1, "conseq": 1,
    "R4": 1, "exintro": 1, "R5": 1, "rename": 1, "R6": 1, "frame": 1, "R7": 1,
}


def step_refs(just: Justification) -> tuple[str, ...]:
    n = RULE_STEP_ARITY.get(just.name, 0)
    if n is None:
        return just.args
    return just.args[:n]


def check_references(script: ProofScript) -> None:
    seen: set[str] = set()
    lemma_names = {lem.name for lem in script.lemmas}
    for st in script.steps:
        for ref in step_refs(st.just):
            if ref not in seen:
                raise DanglingReference(f"step {st.id} refers to undefined step {ref}")
        if st.just.name in ("conseq", "R4"):
            for name in st.just.args[1:]:
                if name not in lemma_names:
                    raise DanglingReference(f"step {st.id} refers to undefined lemma {name}")
        seen.add(st.id)
    if script.goal is not None and script.goal not in seen:
        raise DanglingReference(f"goal refers to undefined step {script.goal}")


# ------------------------------------------------------------------- printing

def _loc(e, top: bool = True) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FileLen):
        return "#" + _file_atom(e.file)
    if isinstance(e, BlockLen):
        return "#" + _block(e.block)
    if isinstance(e, BinOp):
        if e.op == "*":
            return f"({_loc(e.left)} * {_loc(e.right)})"
        right = _loc(e.right)
        if isinstance(e.right, BinOp) and e.right.op != "*":
            right = f"({right})"
        return f"{_loc(e.left)} {e.op} {right}"
    raise TypeError(f"not a location expression: {e!r}")


def _index(e) -> str:
    if isinstance(e, (Num, Var)) and not (isinstance(e, Num) and e.value < 0):
        return _loc(e)
    return f"({_loc(e)})"


def _block(b) -> str:
    if isinstance(b, BNum):
        return str(b.value)
    if isinstance(b, BVar):
        return b.name
    if isinstance(b, FIndex):
        return f"{b.file}.{_index(b.index)}"
    raise TypeError(f"not a block expression: {b!r}")


def _file_atom(f) -> str:
    if isinstance(f, (FAppend, FConcat)):
        return f"({_file(f)})"
    return _file(f)


def _file(f) -> str:
    if isinstance(f, Nil):
        return "nil"
    if isinstance(f, FVar):
        return f.name
    if isinstance(f, FTuple):
        return "(" + ", ".join(_block(b) for b in f.items) + ")"
    if isinstance(f, FAppend):
        return f"{_file(f.file)} ++ {_block(f.block)}"
    if isinstance(f, FConcat):
        return f"{_file(f.left)} ++ {_file_atom(f.right)}"
    raise TypeError(f"not a file expression: {f!r}")


def _seq(s) -> str:
    if isinstance(s, SeqVar):
        return s.name
    if isinstance(s, SeqLit):
        return "(" + ", ".join(_loc(e) for e in s.items) + ")"
    if isinstance(s, SeqCat):
        right = _seq(s.right)
        if isinstance(s.right, SeqCat):
            right = f"({right})"
        return f"{_seq(s.left)} ++ {right}"
    raise TypeError(f"not a sequence: {s!r}")


_BOOL_PREC = {BoolOr: 1, BoolAnd: 2, BoolNot: 3}


def _bool(b, prec: int = 0) -> str:
    p = _BOOL_PREC.get(type(b), 4)
    if isinstance(b, BoolConst):
        s = "true" if b.value else "false"
    elif isinstance(b, Cmp):
        s = f"{_loc(b.left)} {b.op} {_loc(b.right)}"
    elif isinstance(b, BlkEq):
        s = f"{_block(b.left)} == {_block(b.right)}"
    elif isinstance(b, BoolNot):
        s = "!" + _bool(b.arg, 3)
    elif isinstance(b, (BoolAnd, BoolOr)):
        op = "&&" if isinstance(b, BoolAnd) else "||"
        s = f"{_bool(b.left, p)} {op} {_bool(b.right, p + 1)}"
    else:
        raise TypeError(f"not a boolean expression: {b!r}")
    return f"({s})" if p < prec else s


def _args(items, fn) -> str:
    return "(" + ", ".join(fn(x) for x in items) + ")"


def _cmd(c) -> str:
    if isinstance(c, Seq):
        first = _cmd(c.first)
        if isinstance(c.first, Seq):
            first = f"({first})"
        return f"{first}; {_cmd(c.second)}"
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Assign):
        return f"{c.var} := {_loc(c.expr)}"
    if isinstance(c, Cons):
        return f"{c.var} := cons{_args(c.args, _loc)}"
    if isinstance(c, Lookup):
        return f"{c.var} := [{_loc(c.addr)}]"
    if isinstance(c, Mutate):
        return f"[{_loc(c.addr)}] := {_loc(c.value)}"
    if isinstance(c, Dispose):
        return f"dispose({_loc(c.addr)})"
    if isinstance(c, Create):
        return f"{c.file} := create{_args(c.blocks, _block)}"
    if isinstance(c, Attach):
        return "attach(" + ", ".join([c.file] + [_block(b) for b in c.blocks]) + ")"
    if isinstance(c, DeleteFile):
        return f"delete {c.file}"
    if isinstance(c, Allocate):
        return f"{c.var} := allocate{_args(c.args, _loc)}"
    if isinstance(c, Append):
        return f"append({_block(c.block)}, {_loc(c.value)})"
    if isinstance(c, BlockLookup):
        return f"{c.var} := {{{_block(c.block)}.{_index(c.index)}}}"
    if isinstance(c, BAssign):
        return f"{c.var} := {_block(c.block)}"
    if isinstance(c, DeleteBlock):
        return f"delete {_block(c.block)}"
    if isinstance(c, SetFileBlock):
        return f"{c.file}.{_index(c.index)} := {_block(c.block)}"
    if isinstance(c, If):
        return f"if {_bool(c.cond)} then {{ {_cmd(c.then)} }} else {{ {_cmd(c.orelse)} }}"
    if isinstance(c, While):
        return f"while {_bool(c.cond)} do {{ {_cmd(c.body)} }}"
    raise TypeError(f"not a command: {c!r}")


_A_PREC = {Imp: 1, Wand: 2, Or: 3, And: 4, Star: 5, Not: 6, Exists: 0, Forall: 0}
_A_OPS = {Imp: "->", Wand: "-*", Or: "||", And: "&&", Star: "*"}
_RIGHT_ASSOC = (Imp, Wand)


def _assert(a, prec: int = 0) -> str:
    p = _A_PREC.get(type(a), 7)
    if isinstance(a, Const):
        s = ("true" if a.value else "false") + ("" if a.level == "G" else "_" + a.level)
    elif isinstance(a, Emp):
        s = "emp" if a.level == "G" else "emp_" + a.level
    elif isinstance(a, Abort):
        s = "abort"
    elif isinstance(a, Not):
        s = "!" + _assert(a.arg, 6)
    elif isinstance(a, (Exists, Forall)):
        kind = type(a)
        names, body = [], a
        while isinstance(body, kind):
            names.append(body.var)
            body = body.body
        word = "exists" if kind is Exists else "forall"
        s = f"{word} {', '.join(names)}. {_assert(body, 0)}"
        # a quantifier body extends to the right, so bracket it when nested
        return f"({s})" if prec > 0 else s
    elif type(a) in _A_OPS:
        op = _A_OPS[type(a)]
        if isinstance(a, _RIGHT_ASSOC):
            s = f"{_assert(a.left, p + 1)} {op} {_assert(a.right, p)}"
        else:
            s = f"{_assert(a.left, p)} {op} {_assert(a.right, p + 1)}"
    elif isinstance(a, Cmp):
        s = f"{_loc(a.left)} {a.op} {_loc(a.right)}"
    elif isinstance(a, BlkEq):
        s = f"{_block(a.left)} == {_block(a.right)}"
    elif isinstance(a, PointsTo):
        s = f"{_loc(a.addr)} |-> " + ("-" if a.value is None else _loc(a.value))
    elif isinstance(a, PointsToList):
        s = f"{_loc(a.addr)} |-> {_args(a.values, _loc)}"
    elif isinstance(a, Hook):
        s = f"{_loc(a.addr)} --> {_loc(a.value)}"
    elif isinstance(a, SeqCorr):
        if a.rhs is None:
            rhs = "-"
        elif isinstance(a.rhs, Override):
            o = a.rhs
            rhs = "(" + ", ".join(_loc(e) for e in o.values) + f" | {_loc(o.index)} >-> {_loc(o.value)})"
        else:
            rhs = _args(a.rhs, _loc)
        s = f"{_seq(a.seq)} ~> {rhs}"
    elif isinstance(a, BlkCat):
        s = f"{_block(a.target)} == " + " (*) ".join(_block(b) for b in a.parts)
    elif isinstance(a, BlkPointsTo):
        s = f"{_block(a.block)} |-> {_seq(a.seq)}"
    elif isinstance(a, BlkHook):
        s = f"{_block(a.block)} --> {_seq(a.seq)}"
    elif isinstance(a, FileEq):
        s = f"{_file(a.left)} = {_file(a.right)}"
    elif isinstance(a, BlkCorr):
        s = f"{_block(a.left)} ~> {_block(a.right)}"
    elif isinstance(a, Pair):
        s = f"<{_assert(a.loc)}, {_assert(a.blk)}>"
    elif isinstance(a, BlkCorrVals):
        s = f"{_block(a.block)} ~> {_args(a.values, _loc)}"
    else:
        raise TypeError(f"not an assertion: {a!r}")
    return f"({s})" if p < prec else s


def pretty_print(node) -> str:
    """Render any AST node in the concrete syntax accepted by the parsers."""
    if isinstance(node, Triple):
        return f"{{{_assert(node.pre)}}} {_cmd(node.cmd)} {{{_assert(node.post)}}}"
    if isinstance(node, ProofScript):
        return print_script(node)
    if isinstance(node, (Skip, Seq, If, While) + tuple(ATOMIC_COMMANDS)):
        return _cmd(node)
    if isinstance(node, (BoolConst, BoolNot, BoolAnd, BoolOr)):
        return _bool(node)
    if isinstance(node, (Num, Var, BinOp, FileLen, BlockLen)):
        return _loc(node)
    if isinstance(node, (BNum, BVar, FIndex)):
        return _block(node)
    if isinstance(node, (Nil, FVar, FAppend, FConcat, FTuple)):
        return _file(node)
    if isinstance(node, (SeqVar, SeqLit, SeqCat)):
        return _seq(node)
    return _assert(node)


def print_script(script: ProofScript) -> str:
    lines = []
    for lem in script.lemmas:
        lines.append(f"lemma {lem.name}: {_assert(lem.lhs)} |= {_assert(lem.rhs)} {lem.mode}")
    for st in script.steps:
        j = st.just.name + (f"({', '.join(st.just.args)})" if st.just.args else "")
        lines.append(f"step {st.id}: {pretty_print(st.triple)} by {j}")
    if script.goal is not None:
        lines.append(f"goal: step {script.goal}")
    return "\n".join(lines) + "\n"
