"""Executable reduction relation with event traces.

The stepper is deterministic.  A ``rec`` at the head is unfolded and the
unfolded term is stepped; session binders exposed by the unfolding are
renamed apart from every session already present, so repeated starts of the
same protocol never clash.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Union

from .syntax import (
    BinOp,
    BoolLit,
    Call,
    Chan,
    Choreography,
    Com,
    Cond,
    Endpoint,
    Expr,
    FileLit,
    FnCall,
    Inact,
    IntLit,
    Label,
    Rec,
    Res,
    Sel,
    Seq,
    Sess,
    Sort,
    Start,
    StrLit,
    Thread,
    Value,
    Var,
    VarName,
    VBool,
    VFile,
    VInt,
    VStr,
    sort_of_value,
)
from .terms import all_sessions, is_terminated, substitute, unfold_head


class EvalError(Exception):
    """Expression evaluation failed; ``path`` locates the offending term."""

    def __init__(self, kind: str, message: str, path: tuple[str, ...] = ()):
        self.kind = kind
        self.message = message
        self.path = path
        super().__init__(f"{kind}: {message}")

    def at(self, path: tuple[str, ...]) -> EvalError:
        return EvalError(self.kind, self.message, path)


@dataclass(frozen=True)
class Builtin:
    args: tuple[Sort, ...]
    ret: Sort
    values: tuple[Value, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("a builtin needs at least one scripted value")
        for v in self.values:
            if sort_of_value(v) is not self.ret:
                raise ValueError(f"scripted value {v!r} does not have sort {self.ret}")


def value_from_json(sort: Sort, raw: Any) -> Value:
    if sort is Sort.BOOL and isinstance(raw, bool):
        return VBool(raw)
    if sort is Sort.INT and isinstance(raw, int) and not isinstance(raw, bool):
        return VInt(raw)
    if sort is Sort.STRING and isinstance(raw, str):
        return VStr(raw)
    if sort is Sort.FILE and isinstance(raw, str):
        return VFile(raw.encode("utf-8"))
    raise ValueError(f"{raw!r} is not a {sort} value")


def value_to_json(v: Value) -> Any:
    if isinstance(v, VFile):
        return v.value.decode("utf-8", errors="backslashreplace")
    return v.value


@dataclass(frozen=True)
class BuiltinEnv:
    """Builtin functions with scripted results plus thread-local free variables.

    Scripted values are consumed cyclically; the read position of each
    function lives in ``cursors`` and every consumption returns a new env.
    """

    functions: Mapping[str, Builtin] = field(default_factory=dict)
    bindings: Mapping[tuple[Thread, VarName], Value] = field(default_factory=dict)
    cursors: Mapping[str, int] = field(default_factory=dict)

    def draw(self, fn: str) -> tuple[Value, BuiltinEnv]:
        b = self.functions[fn]
        n = self.cursors.get(fn, 0)
        return b.values[n % len(b.values)], replace(self, cursors={**self.cursors, fn: n + 1})

    def signatures(self) -> dict[str, tuple[tuple[Sort, ...], Sort]]:
        return {name: (b.args, b.ret) for name, b in self.functions.items()}

    def binding_sorts(self) -> dict[tuple[Thread, VarName], Sort]:
        return {key: sort_of_value(v) for key, v in self.bindings.items()}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> BuiltinEnv:
        functions = {}
        for name, entry in doc.get("functions", {}).items():
            sig = list(entry["sig"])
            if sig.count("->") != 1 or sig[-1] == "->":
                raise ValueError(f"bad signature for {name}: {sig}")
            arrow = sig.index("->")
            args = tuple(Sort(s) for s in sig[:arrow])
            ret = Sort(sig[arrow + 1])
            raw = entry["values"]
            raw = raw if isinstance(raw, list) else [raw]
            functions[name] = Builtin(args, ret, tuple(value_from_json(ret, x) for x in raw))
        bindings = {}
        for key, entry in doc.get("bindings", {}).items():
            thread, _, var = key.partition(".")
            if not thread or not var:
                raise ValueError(f"binding key must be thread.var, got {key!r}")
            sort = Sort(entry["sort"])
            bindings[(Thread(thread), VarName(var))] = value_from_json(sort, entry["value"])
        return cls(functions, bindings)

    @classmethod
    def load(cls, path: str | Path) -> BuiltinEnv:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def eval_expr(e: Expr, env: BuiltinEnv, at: Thread) -> tuple[Value, BuiltinEnv]:
    """Evaluate ``e`` at thread ``at``; returns the value and the advanced env."""
    match e:
        case BoolLit(v):
            return VBool(v), env
        case IntLit(v):
            return VInt(v), env
        case StrLit(v):
            return VStr(v), env
        case FileLit(v):
            return VFile(v), env
        case Var(var):
            try:
                return env.bindings[(at, var)], env
            except KeyError:
                raise EvalError("unbound", f"variable {var} is not bound at thread {at}") from None
        case FnCall(fn, args):
            if fn not in env.functions:
                raise EvalError("unknown builtin", f"no builtin named {fn}")
            b = env.functions[fn]
            if len(args) != len(b.args):
                raise EvalError("sort mismatch", f"{fn} expects {len(b.args)} arguments, got {len(args)}")
            for a, want in zip(args, b.args):
                v, env = eval_expr(a, env, at)
                if sort_of_value(v) is not want:
                    raise EvalError("sort mismatch", f"{fn} expects {want}, got {sort_of_value(v)}")
            return env.draw(fn)
        case BinOp(op, left, right):
            lv, env = eval_expr(left, env, at)
            rv, env = eval_expr(right, env, at)
            if op == "eq":
                if type(lv) is not type(rv):
                    raise EvalError("sort mismatch", f"cannot compare {sort_of_value(lv)} with {sort_of_value(rv)}")
                return VBool(lv == rv), env
            want = VInt if op == "add" else VStr
            if not (isinstance(lv, want) and isinstance(rv, want)):
                raise EvalError("sort mismatch", f"{op} needs two {want.__name__[1:].lower()} operands")
            return want(lv.value + rv.value), env
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# events and traces


@dataclass(frozen=True, slots=True)
class EvStart:
    participants: tuple[Endpoint, ...]
    chan: Chan
    sess: Sess


@dataclass(frozen=True, slots=True)
class EvCom:
    sender: Endpoint
    value: Value
    receiver: Endpoint
    var: VarName
    sess: Sess


@dataclass(frozen=True, slots=True)
class EvSel:
    sender: Endpoint
    receiver: Endpoint
    sess: Sess
    label: Label


@dataclass(frozen=True, slots=True)
class EvCond:
    thread: Thread
    result: bool


Event = Union[EvStart, EvCom, EvSel, EvCond]


class Reduction(NamedTuple):
    event: Event
    term: Choreography
    env: BuiltinEnv


def step(c: Choreography, env: BuiltinEnv) -> Reduction | None:
    """One reduction step, or ``None`` when no rule applies."""
    return _step(c, env, all_sessions(c), ())


def _step(c: Choreography, env: BuiltinEnv, avoid: set[Sess], path: tuple[str, ...]) -> Reduction | None:
    match c:
        case Inact() | Call():
            return None
        case Res(sess, body):
            r = _step(body, env, avoid, path + ("body",))
            return None if r is None else r._replace(term=Res(sess, r.term))
        case Rec():
            return _step(unfold_head(c, avoid), env, avoid, path)
        case Cond(at, guard, then, orelse):
            try:
                v, env = eval_expr(guard, env, at)
            except EvalError as err:
                raise err.at(path + ("guard",)) from None
            if not isinstance(v, VBool):
                raise EvalError("sort mismatch", f"guard evaluated to {sort_of_value(v)}, not bool", path + ("guard",))
            return Reduction(EvCond(at, v.value), then if v.value else orelse, env)
        case Seq(Start(parts, chan, sess), cont):
            return Reduction(EvStart(parts, chan, sess), Res(sess, cont), env)
        case Seq(Com(snd, expr, rcv, var, sess), cont):
            try:
                v, env = eval_expr(expr, env, snd.thread)
            except EvalError as err:
                raise err.at(path + ("expr",)) from None
            return Reduction(EvCom(snd, v, rcv, var, sess), substitute(cont, var, v), env)
        case Seq(Sel(snd, rcv, sess, label), cont):
            return Reduction(EvSel(snd, rcv, sess, label), cont, env)
    raise TypeError(f"not a choreography: {c!r}")


@dataclass
class Trace:
    steps: list[tuple[Event, Choreography]]
    fuel_exhausted: bool
    final: Choreography
    env: BuiltinEnv
    error: EvalError | None = None

    @property
    def start_count(self) -> int:
        return sum(isinstance(ev, EvStart) for ev, _ in self.steps)

    @property
    def events(self) -> list[Event]:
        return [ev for ev, _ in self.steps]


def run(c: Choreography, env: BuiltinEnv, fuel: int) -> Trace:
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    steps: list[tuple[Event, Choreography]] = []
    for _ in range(fuel):
        try:
            r = step(c, env)
        except EvalError as err:
            return Trace(steps, False, c, env, err)
        if r is None:
            return Trace(steps, False, c, env)
        steps.append((r.event, r.term))
        c, env = r.term, r.env
    return Trace(steps, not is_terminated(c), c, env)
