"""Term model for choreographies, global types and expressions.

Every node is an immutable dataclass.  Identifier kinds are distinct classes,
so a ``Sess("k")`` never compares equal to a ``Chan("k")``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True, slots=True)
class _Name:
    name: str

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValueError(f"{type(self).__name__} needs a non-empty name")

    def __str__(self) -> str:
        return self.name


class Thread(_Name):
    __slots__ = ()


class Role(_Name):
    __slots__ = ()


class Chan(_Name):
    """Public channel used to start a protocol."""

    __slots__ = ()


class Sess(_Name):
    """Session channel identifying one running protocol instance."""

    __slots__ = ()


class VarName(_Name):
    __slots__ = ()


class Label(_Name):
    __slots__ = ()


class RecVar(_Name):
    """Choreography recursion variable."""

    __slots__ = ()


class TypeVar(_Name):
    """Global type recursion variable."""

    __slots__ = ()


class Sort(enum.Enum):
    BOOL = "bool"
    INT = "int"
    STRING = "string"
    FILE = "file"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# values and expressions


@dataclass(frozen=True, slots=True)
class VBool:
    value: bool


@dataclass(frozen=True, slots=True)
class VInt:
    value: int


@dataclass(frozen=True, slots=True)
class VStr:
    value: str


@dataclass(frozen=True, slots=True)
class VFile:
    value: bytes


Value = Union[VBool, VInt, VStr, VFile]


def sort_of_value(v: Value) -> Sort:
    return {VBool: Sort.BOOL, VInt: Sort.INT, VStr: Sort.STRING, VFile: Sort.FILE}[type(v)]


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int


@dataclass(frozen=True, slots=True)
class StrLit:
    value: str


@dataclass(frozen=True, slots=True)
class FileLit:
    value: bytes


@dataclass(frozen=True, slots=True)
class Var:
    var: VarName


@dataclass(frozen=True, slots=True)
class FnCall:
    fn: str
    args: tuple[Expr, ...] = ()


BINOPS = ("eq", "add", "concat")


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: Expr
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in BINOPS:
            raise ValueError(f"unknown operator {self.op!r}")


Expr = Union[BoolLit, IntLit, StrLit, FileLit, Var, FnCall, BinOp]


def literal(v: Value) -> Expr:
    return {VBool: BoolLit, VInt: IntLit, VStr: StrLit, VFile: FileLit}[type(v)](v.value)


def expr_vars(e: Expr) -> Iterator[VarName]:
    if isinstance(e, Var):
        yield e.var
    elif isinstance(e, FnCall):
        for a in e.args:
            yield from expr_vars(a)
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)


# ---------------------------------------------------------------------------
# choreographies


@dataclass(frozen=True, slots=True)
class Endpoint:
    """A thread playing a role, written ``t[R]``."""

    thread: Thread
    role: Role

    def __str__(self) -> str:
        return f"{self.thread}[{self.role}]"


@dataclass(frozen=True, slots=True)
class Start:
    participants: tuple[Endpoint, ...]
    chan: Chan
    sess: Sess


@dataclass(frozen=True, slots=True)
class Com:
    sender: Endpoint
    expr: Expr
    receiver: Endpoint
    var: VarName
    sess: Sess


@dataclass(frozen=True, slots=True)
class Sel:
    sender: Endpoint
    receiver: Endpoint
    sess: Sess
    label: Label


Eta = Union[Start, Com, Sel]


@dataclass(frozen=True, slots=True)
class Seq:
    eta: Eta
    cont: Choreography


@dataclass(frozen=True, slots=True)
class Cond:
    at: Thread
    guard: Expr
    then: Choreography
    orelse: Choreography


@dataclass(frozen=True, slots=True)
class Rec:
    var: RecVar
    body: Choreography


@dataclass(frozen=True, slots=True)
class Call:
    var: RecVar


@dataclass(frozen=True, slots=True)
class Res:
    sess: Sess
    body: Choreography


@dataclass(frozen=True, slots=True)
class Inact:
    pass


Choreography = Union[Seq, Cond, Rec, Call, Res, Inact]

INACT = Inact()


def seq(*items: Eta | Choreography) -> Choreography:
    """Chain etas right to left; a trailing choreography is the continuation."""
    if items and not isinstance(items[-1], (Start, Com, Sel)):
        *etas, tail = items
    else:
        etas, tail = list(items), INACT
    for eta in reversed(etas):
        tail = Seq(eta, tail)
    return tail


# ---------------------------------------------------------------------------
# global types


@dataclass(frozen=True, slots=True)
class TCom:
    p: Role
    q: Role
    sort: Sort
    cont: GlobalType


@dataclass(frozen=True, slots=True)
class TChoice:
    p: Role
    q: Role
    branches: tuple[tuple[Label, GlobalType], ...]

    def branch(self, label: Label) -> GlobalType | None:
        for lab, g in self.branches:
            if lab == label:
                return g
        return None


@dataclass(frozen=True, slots=True)
class TEnd:
    pass


@dataclass(frozen=True, slots=True)
class TRec:
    var: TypeVar
    body: GlobalType


@dataclass(frozen=True, slots=True)
class TVar:
    var: TypeVar


GlobalType = Union[TCom, TChoice, TEnd, TRec, TVar]

TEND = TEnd()


@dataclass(frozen=True, slots=True)
class Diagnostic:
    path: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"{'/'.join(self.path) or '<root>'}: {self.message}"
