"""Seeded random generation of well-formed choreographies and global types."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .semantics import Builtin, BuiltinEnv
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
    FnCall,
    GlobalType,
    Inact,
    IntLit,
    Label,
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
    TRec,
    TVar,
    TypeVar,
    Var,
    VarName,
    VBool,
    VInt,
)

THREADS = ("a", "b", "c", "d")
LABELS = ("ok", "ko", "left", "right")
# one sort per variable name keeps name-global substitution well-sorted
VAR_FOR_SORT = {Sort.INT: VarName("x"), Sort.STRING: VarName("y"), Sort.BOOL: VarName("z")}
SESSION_NAMES = ("k", "k'", "k''")


def builtin_env(seed: int = 0) -> BuiltinEnv:
    """Scripted builtins used by generated terms: ``coin() : bool`` and ``num() : int``."""
    rng = random.Random(seed)
    coins = tuple(VBool(rng.random() < 0.5) for _ in range(5))
    return BuiltinEnv(
        {
            "coin": Builtin((), Sort.BOOL, coins),
            "num": Builtin((), Sort.INT, tuple(VInt(rng.randint(0, 9)) for _ in range(3))),
        }
    )


def term_depth(c: Choreography) -> int:
    match c:
        case Seq(_, cont):
            return 1 + term_depth(cont)
        case Cond(_, _, then, orelse):
            return 1 + max(term_depth(then), term_depth(orelse))
        case Rec(_, body) | Res(_, body):
            return 1 + term_depth(body)
    return 1


@dataclass
class _Open:
    sess: Sess
    cast: dict[Thread, Role]


@dataclass
class _Ctx:
    sessions: list[_Open] = field(default_factory=list)
    vars: dict[tuple[Thread, VarName], Sort] = field(default_factory=dict)
    recs: dict[RecVar, bool] = field(default_factory=dict)  # var -> guarded yet

    def child(self, **kw) -> _Ctx:
        base = _Ctx(list(self.sessions), dict(self.vars), dict(self.recs))
        for k, v in kw.items():
            setattr(base, k, v)
        return base


class _ChorGen:
    def __init__(self, rng: random.Random, max_sessions: int, max_recs: int):
        self.rng = rng
        self.max_sessions = max_sessions
        self.max_recs = max_recs
        self.starts = 0
        self.recs = 0

    def expr(self, at: Thread, ctx: _Ctx, want: Sort | None = None) -> tuple[Expr, Sort]:
        rng = self.rng
        known = [(x, s) for (t, x), s in ctx.vars.items() if t == at and (want is None or s is want)]
        choice = rng.random()
        if known and choice < 0.4:
            x, s = rng.choice(sorted(known, key=lambda p: p[0].name))
            if s is Sort.INT and rng.random() < 0.5:
                return BinOp("add", Var(x), IntLit(rng.randint(0, 3))), s
            return Var(x), s
        sort = want or rng.choice([Sort.BOOL, Sort.INT, Sort.STRING])
        if sort is Sort.BOOL:
            return (FnCall("coin", ()) if rng.random() < 0.6 else BoolLit(rng.random() < 0.5)), sort
        if sort is Sort.INT:
            return (FnCall("num", ()) if rng.random() < 0.5 else IntLit(rng.randint(0, 9))), sort
        return StrLit(rng.choice(["hi", "msg", "pwd"])), sort

    def guard(self, at: Thread, ctx: _Ctx) -> Expr:
        e, _ = self.expr(at, ctx, Sort.BOOL)
        return e

    def gen(self, budget: int, ctx: _Ctx) -> Choreography:
        rng = self.rng
        callable_recs = [x for x, guarded in ctx.recs.items() if guarded]
        if budget <= 1:
            if callable_recs and rng.random() < 0.5:
                return Call(rng.choice(callable_recs))
            return Inact()
        options = ["inact"]
        if self.starts < self.max_sessions:
            options += ["start"] * 3
        if ctx.sessions:
            options += ["com"] * 4 + ["sel"] * 2
        options += ["cond"]
        if self.recs < self.max_recs:
            options.append("rec")
        if callable_recs:
            options.append("call")
        kind = rng.choice(options)
        if kind == "inact":
            return Inact()
        if kind == "call":
            return Call(rng.choice(callable_recs))
        if kind == "start":
            idx = self.starts
            self.starts += 1
            n = rng.choice([2, 2, 3])
            threads = [Thread(t) for t in rng.sample(THREADS, n)]
            roles = [Role(r) for r in ("P", "Q", "R")[:n]]
            sess = Sess(SESSION_NAMES[idx])
            chan = Chan(f"ch{idx}")
            cast = dict(zip(threads, roles))
            parts = tuple(Endpoint(t, cast[t]) for t in threads)
            inner = ctx.child(sessions=ctx.sessions + [_Open(sess, cast)], recs={x: True for x in ctx.recs})
            return Seq(Start(parts, chan, sess), self.gen(budget - 1, inner))
        if kind in ("com", "sel"):
            s = rng.choice(ctx.sessions)
            snd, rcv = rng.sample(sorted(s.cast, key=lambda t: t.name), 2)
            ep_s, ep_r = Endpoint(snd, s.cast[snd]), Endpoint(rcv, s.cast[rcv])
            guarded = ctx.child(recs={x: True for x in ctx.recs})
            if kind == "sel":
                eta = Sel(ep_s, ep_r, s.sess, Label(rng.choice(LABELS)))
                return Seq(eta, self.gen(budget - 1, guarded))
            e, sort = self.expr(snd, ctx)
            x = VAR_FOR_SORT[sort]
            guarded.vars[(rcv, x)] = sort
            return Seq(Com(ep_s, e, ep_r, x, s.sess), self.gen(budget - 1, guarded))
        if kind == "cond":
            pool = sorted({t for s in ctx.sessions for t in s.cast} or {Thread(t) for t in THREADS}, key=lambda t: t.name)
            at = rng.choice(pool)
            g = self.guard(at, ctx)
            return Cond(at, g, self.gen(budget - 1, ctx), self.gen(budget - 1, ctx))
        x = RecVar("X" if self.recs == 0 else "Y")
        self.recs += 1
        return Rec(x, self.gen(budget - 1, ctx.child(recs={**ctx.recs, x: False})))


def random_choreography(
    rng: random.Random,
    *,
    max_sessions: int = 3,
    max_recs: int = 2,
    max_depth: int = 12,
) -> Choreography:
    """A well-formed choreography with bounded sessions, recursion binders and depth."""
    return _ChorGen(rng, max_sessions, max_recs).gen(max_depth, _Ctx())


def random_global_type(
    rng: random.Random,
    *,
    roles: tuple[str, ...] = ("P", "Q", "R"),
    max_depth: int = 5,
    max_recs: int = 1,
) -> GlobalType:
    """A closed, contractive global type over ``roles``."""
    recs = 0

    def go(budget: int, env: dict[TypeVar, bool]) -> GlobalType:
        nonlocal recs
        ready = [t for t, guarded in env.items() if guarded]
        if budget <= 1:
            return TVar(rng.choice(ready)) if ready and rng.random() < 0.5 else TEnd()
        options = ["end", "com", "com", "choice"]
        if recs < max_recs:
            options.append("rec")
        if ready:
            options.append("var")
        kind = rng.choice(options)
        if kind == "end":
            return TEnd()
        if kind == "var":
            return TVar(rng.choice(ready))
        if kind == "rec":
            t = TypeVar("t" if recs == 0 else f"t{recs}")
            recs += 1
            return TRec(t, go(budget - 1, {**env, t: False}))
        p, q = (Role(r) for r in rng.sample(roles, 2))
        guarded = {t: True for t in env}
        if kind == "com":
            return TCom(p, q, rng.choice([Sort.INT, Sort.STRING, Sort.BOOL]), go(budget - 1, guarded))
        labels = rng.sample(LABELS, rng.choice([1, 2, 2]))
        return TChoice(p, q, tuple((Label(lab), go(budget - 1, guarded)) for lab in labels))

    return go(max_depth, {})


def corpus(seed: int, n: int, **kw) -> list[Choreography]:
    rng = random.Random(seed)
    return [random_choreography(rng, **kw) for _ in range(n)]
