"""Abstract syntax for programs, assertions and proof scripts.

Variable sorts are fixed by spelling: names starting with ``b`` are block
variables, names starting with ``f`` are file variables, names starting with
``@`` are location-sequence variables, and everything else is a location
variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


def var_sort(name: str) -> str:
    """One of 'V' (location), 'B' (block), 'F' (file) or 'S' (location sequence)."""
    if name.startswith("@"):
        return "S"
    if name.startswith("b"):
        return "B"
    if name.startswith("f"):
        return "F"
    return "V"


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: "LocExpr"
    right: "LocExpr"


@dataclass(frozen=True)
class FileLen:
    file: "FileExpr"


@dataclass(frozen=True)
class BlockLen:
    block: "BlockExpr"


LocExpr = Union[Num, Var, BinOp, FileLen, BlockLen]


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FAppend:
    file: "FileExpr"
    block: "BlockExpr"


@dataclass(frozen=True)
class FConcat:
    left: "FileExpr"
    right: "FileExpr"


@dataclass(frozen=True)
class FTuple:
    """Literal file ``(bk1, ..., bkn)``."""

    items: tuple


FileExpr = Union[Nil, FVar, FAppend, FConcat, FTuple]


@dataclass(frozen=True)
class BNum:
    value: int


@dataclass(frozen=True)
class BVar:
    name: str


@dataclass(frozen=True)
class FIndex:
    file: str
    index: LocExpr


BlockExpr = Union[BNum, BVar, FIndex]


@dataclass(frozen=True)
class SeqVar:
    name: str


@dataclass(frozen=True)
class SeqLit:
    items: tuple


@dataclass(frozen=True)
class SeqCat:
    left: "SeqExpr"
    right: "SeqExpr"


SeqExpr = Union[SeqVar, SeqLit, SeqCat]


# Comparisons double as boolean-expression atoms and assertion atoms.

@dataclass(frozen=True)
class Cmp:
    op: str  # '=' or '<='
    left: LocExpr
    right: LocExpr


@dataclass(frozen=True)
class BlkEq:
    left: BlockExpr
    right: BlockExpr


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class BoolNot:
    arg: "BoolExpr"


@dataclass(frozen=True)
class BoolAnd:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class BoolOr:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[Cmp, BlkEq, BoolConst, BoolNot, BoolAnd, BoolOr]


# ------------------------------------------------------------------- commands

@dataclass(frozen=True)
class Skip:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    var: str
    expr: LocExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Cons:
    var: str
    args: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Lookup:
    var: str
    addr: LocExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Mutate:
    addr: LocExpr
    value: LocExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Dispose:
    addr: LocExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Create:
    file: str
    blocks: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Attach:
    file: str
    blocks: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DeleteFile:
    file: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Allocate:
    var: str
    args: tuple
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Append:
    block: BlockExpr
    value: LocExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BlockLookup:
    var: str
    block: BlockExpr
    index: LocExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BAssign:
    var: str
    block: BlockExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DeleteBlock:
    block: BlockExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SetFileBlock:
    file: str
    index: LocExpr
    block: BlockExpr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class If:
    cond: BoolExpr
    then: "Command"
    orelse: "Command"
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: BoolExpr
    body: "Command"
    line: int = field(default=0, compare=False)


Command = Union[
    Skip, Assign, Cons, Lookup, Mutate, Dispose, Create, Attach, DeleteFile,
    Allocate, Append, BlockLookup, BAssign, DeleteBlock, SetFileBlock, Seq, If, While,
]

ATOMIC_COMMANDS = (
    Skip, Assign, Cons, Lookup, Mutate, Dispose, Create, Attach, DeleteFile,
    Allocate, Append, BlockLookup, BAssign, DeleteBlock, SetFileBlock,
)


# ----------------------------------------------------------------- assertions
# Connectives are shared by the location, block and global layers; which heap
# a ``Star`` splits depends on the layer it is evaluated in.

@dataclass(frozen=True)
class Const:
    level: str  # 'V', 'B' or 'G'
    value: bool


@dataclass(frozen=True)
class Emp:
    level: str


@dataclass(frozen=True)
class Not:
    arg: "Assertion"


@dataclass(frozen=True)
class And:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Or:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Imp:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Star:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Wand:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Assertion"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Assertion"


# location-layer atoms

@dataclass(frozen=True)
class PointsTo:
    """``e |-> e'``; ``value`` of ``None`` is the wildcard ``e |-> -``."""

    addr: LocExpr
    value: Optional[LocExpr]


@dataclass(frozen=True)
class PointsToList:
    """``e |-> (e1, ..., en)``: consecutive cells starting at ``e``."""

    addr: LocExpr
    values: tuple


@dataclass(frozen=True)
class Hook:
    """``e --> e'``: ``e |-> e'`` somewhere inside a larger heap."""

    addr: LocExpr
    value: LocExpr


@dataclass(frozen=True)
class Override:
    """``(e1, ..., en | i >-> x)``: the list with its i-th entry replaced."""

    values: tuple
    index: LocExpr
    value: LocExpr


@dataclass(frozen=True)
class SeqCorr:
    """``S ~> R``: the cells of S hold the values R (``None`` is any value)."""

    seq: SeqExpr
    rhs: Union[tuple, Override, None]


# block-layer atoms

@dataclass(frozen=True)
class BlkCat:
    """``bk == bk1 (*) ... (*) bkn``."""

    target: BlockExpr
    parts: tuple


@dataclass(frozen=True)
class BlkPointsTo:
    block: BlockExpr
    seq: SeqExpr


@dataclass(frozen=True)
class BlkHook:
    block: BlockExpr
    seq: SeqExpr


@dataclass(frozen=True)
class FileEq:
    left: FileExpr
    right: FileExpr


@dataclass(frozen=True)
class BlkCorr:
    left: BlockExpr
    right: BlockExpr


# global-layer atoms

@dataclass(frozen=True)
class Pair:
    loc: "Assertion"
    blk: "Assertion"


@dataclass(frozen=True)
class BlkCorrVals:
    """``bk ~> (e1, ..., en)`` at the global layer."""

    block: BlockExpr
    values: tuple


@dataclass(frozen=True)
class Abort:
    """Postcondition satisfied exactly by faulting executions."""


Assertion = Union[
    Const, Emp, Not, And, Or, Imp, Star, Wand, Exists, Forall, Cmp, BlkEq,
    PointsTo, PointsToList, Hook, SeqCorr, BlkCat, BlkPointsTo, BlkHook, FileEq,
    BlkCorr, Pair, BlkCorrVals, Abort,
]


# -------------------------------------------------------------- proof scripts

@dataclass(frozen=True)
class Triple:
    pre: Assertion
    cmd: Command
    post: Assertion


@dataclass(frozen=True)
class Justification:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Lemma:
    name: str
    lhs: Assertion
    rhs: Assertion
    mode: str = "check"  # 'check' or 'admit'


@dataclass(frozen=True)
class ProofStep:
    id: str
    triple: Triple
    just: Justification
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ProofScript:
    lemmas: tuple
    steps: tuple
    goal: Optional[str]
