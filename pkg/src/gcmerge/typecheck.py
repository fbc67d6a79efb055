"""Checks that every session in a choreography follows its global type.

The checker walks the choreography symbolically, keeping for each running
session the residual global type and the role-to-thread assignment fixed at
its start.  Errors are accumulated rather than raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .syntax import (
    BinOp,
    BoolLit,
    Call,
    Chan,
    Choreography,
    Com,
    Cond,
    Expr,
    FileLit,
    FnCall,
    GlobalType,
    Inact,
    IntLit,
    Rec,
    RecVar,
    Res,
    Role,
    Sel,
    Seq,
    Sess,
    Sort,
    Start,
    StrLit,
    TChoice,
    TCom,
    TEnd,
    Thread,
    Var,
    VarName,
)
from .terms import type_roles, unfold_type

Signatures = Mapping[str, tuple[tuple[Sort, ...], Sort]]


class SortError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        self.message = message
        super().__init__(f"{kind}: {message}")


@dataclass(frozen=True)
class SortEnv:
    vars: Mapping[tuple[Thread, VarName], Sort] = field(default_factory=dict)
    sigs: Signatures = field(default_factory=dict)

    def bind(self, at: Thread, x: VarName, s: Sort) -> SortEnv:
        return SortEnv({**self.vars, (at, x): s}, self.sigs)


def sort_of(e: Expr, env: SortEnv, at: Thread) -> Sort:
    match e:
        case BoolLit():
            return Sort.BOOL
        case IntLit():
            return Sort.INT
        case StrLit():
            return Sort.STRING
        case FileLit():
            return Sort.FILE
        case Var(var):
            if (at, var) not in env.vars:
                raise SortError("unbound", f"variable {var} has no sort at thread {at}")
            return env.vars[(at, var)]
        case FnCall(fn, args):
            if fn not in env.sigs:
                raise SortError("unbound", f"no signature for builtin {fn}")
            params, ret = env.sigs[fn]
            if len(params) != len(args):
                raise SortError("arity", f"{fn} expects {len(params)} arguments, got {len(args)}")
            for a, want in zip(args, params):
                got = sort_of(a, env, at)
                if got is not want:
                    raise SortError("mismatch", f"{fn} expects {want}, got {got}")
            return ret
        case BinOp(op, left, right):
            ls, rs = sort_of(left, env, at), sort_of(right, env, at)
            if op == "eq":
                if ls is not rs:
                    raise SortError("mismatch", f"cannot compare {ls} with {rs}")
                return Sort.BOOL
            want = Sort.INT if op == "add" else Sort.STRING
            if ls is not want or rs is not want:
                raise SortError("mismatch", f"{op} needs {want} operands, got {ls} and {rs}")
            return want
    raise TypeError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class SessionState:
    residual: GlobalType
    cast: Mapping[Role, Thread]


Gamma = Mapping[Chan, GlobalType]
Delta = Mapping[Sess, SessionState]


@dataclass
class TypeReport:
    errors: list[tuple[tuple[str, ...], str]] = field(default_factory=list)
    completed_sessions: set[Sess] = field(default_factory=set)

    @property
    def ok(self) -> bool:
        return not self.errors


def types_equivalent(g1: GlobalType, g2: GlobalType) -> bool:
    """Equality of the regular trees denoted by two types (up to unfolding)."""
    from .typealg import tree_equivalent

    return tree_equivalent(g1, g2)


def typecheck(
    gamma: Gamma,
    c: Choreography,
    delta: Delta | None = None,
    sorts: SortEnv | None = None,
) -> TypeReport:
    report = TypeReport()
    err = report.errors

    def check_cast(path, st: SessionState, k: Sess, p: Role, t: Thread) -> None:
        if st.cast.get(p) != t:
            err.append((path, f"role mismatch on {k}: {p} is played by {st.cast.get(p)}, not {t}"))

    def go(c: Choreography, path: tuple, delta: dict, sorts: SortEnv, snaps: dict) -> None:
        match c:
            case Inact():
                for k, st in delta.items():
                    if not isinstance(unfold_type(st.residual), TEnd):
                        err.append((path, f"session {k} incomplete"))
                    else:
                        report.completed_sessions.add(k)
            case Seq(Start(parts, chan, sess), cont):
                if chan not in gamma:
                    err.append((path, f"no protocol bound to public channel {chan}"))
                    return
                g = gamma[chan]
                roles = {p.role for p in parts}
                if roles != type_roles(g):
                    want = ", ".join(sorted(r.name for r in type_roles(g)))
                    err.append((path, f"role mismatch: {chan} needs roles {{{want}}}"))
                    return
                cast = {p.role: p.thread for p in parts}
                go(cont, path + ("cont",), {**delta, sess: SessionState(g, cast)}, sorts, snaps)
            case Seq(Com(snd, expr, rcv, var, sess), cont):
                st = delta.get(sess)
                if st is None:
                    err.append((path, f"unknown session {sess}"))
                    return
                g = unfold_type(st.residual)
                if not isinstance(g, TCom) or (g.p, g.q) != (snd.role, rcv.role):
                    err.append((path, f"protocol-order mismatch on {sess}: expected {_describe(g)}"))
                    return
                check_cast(path, st, sess, g.p, snd.thread)
                check_cast(path, st, sess, g.q, rcv.thread)
                try:
                    s = sort_of(expr, sorts, snd.thread)
                except SortError as e:
                    err.append((path, f"sort error: {e.message}"))
                    s = g.sort
                if s is not g.sort:
                    err.append((path, f"sort mismatch: expected {g.sort}, got {s}"))
                go(
                    cont,
                    path + ("cont",),
                    {**delta, sess: SessionState(g.cont, st.cast)},
                    sorts.bind(rcv.thread, var, g.sort),
                    snaps,
                )
            case Seq(Sel(snd, rcv, sess, label), cont):
                st = delta.get(sess)
                if st is None:
                    err.append((path, f"unknown session {sess}"))
                    return
                g = unfold_type(st.residual)
                if not isinstance(g, TChoice) or (g.p, g.q) != (snd.role, rcv.role):
                    err.append((path, f"protocol-order mismatch on {sess}: expected {_describe(g)}"))
                    return
                check_cast(path, st, sess, g.p, snd.thread)
                check_cast(path, st, sess, g.q, rcv.thread)
                branch = g.branch(label)
                if branch is None:
                    err.append((path, f"missing label {label} in choice on {sess}"))
                    return
                go(cont, path + ("cont",), {**delta, sess: SessionState(branch, st.cast)}, sorts, snaps)
            case Cond(at, guard, then, orelse):
                try:
                    s = sort_of(guard, sorts, at)
                    if s is not Sort.BOOL:
                        err.append((path, f"sort mismatch: guard has sort {s}, expected bool"))
                except SortError as e:
                    err.append((path, f"sort error: {e.message}"))
                go(then, path + ("then",), delta, sorts, snaps)
                go(orelse, path + ("else",), delta, sorts, snaps)
            case Rec(var, body):
                go(body, path + ("body",), delta, sorts, {**snaps, var: dict(delta)})
            case Call(var):
                if var not in snaps:
                    err.append((path, f"unbound recursion variable {var}"))
                    return
                _check_stable(path, var, snaps[var], delta, err, report)
            case Res(sess, body):
                if sess not in delta:
                    err.append((path, f"restricted session {sess} is not running"))
                go(body, path + ("body",), delta, sorts, snaps)

    go(c, (), dict(delta or {}), sorts or SortEnv(), {})
    return report


def _check_stable(path, var: RecVar, snap: dict, delta: dict, err: list, report: TypeReport) -> None:
    for k, st in delta.items():
        before = snap.get(k)
        if before is None:
            # started inside the loop body: it must be finished before looping
            if not isinstance(unfold_type(st.residual), TEnd):
                err.append((path, f"session {k} incomplete"))
            else:
                report.completed_sessions.add(k)
        elif dict(before.cast) != dict(st.cast) or not types_equivalent(before.residual, st.residual):
            err.append((path, f"non-stable recursion on {var}: session {k} changed across the loop"))


def _describe(g: GlobalType) -> str:
    match g:
        case TCom(p, q, sort, _):
            return f"{p} -> {q} : <{sort}>"
        case TChoice(p, q, branches):
            return f"{p} -> {q} {{{', '.join(lab.name for lab, _ in branches)}}}"
        case TEnd():
            return "end"
    return repr(g)
