"""Session merging: drop every start and run all interactions on one session."""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Call,
    Chan,
    Choreography,
    Com,
    Cond,
    Endpoint,
    Inact,
    Rec,
    Res,
    Role,
    Sel,
    Seq,
    Sess,
    Start,
    Thread,
)
from .terms import free_sessions, threads_in_order


class FreshnessError(ValueError):
    pass


@dataclass(frozen=True)
class MergeResult:
    merged: Choreography
    threads: tuple[Thread, ...]
    session: Sess


def self_role(t: Thread) -> Endpoint:
    """The thread annotated with a role of its own name."""
    return Endpoint(t, Role(t.name))


def simplify_term(c: Choreography, k: Sess) -> Choreography:
    match c:
        case Seq(Start(), cont):
            return simplify_term(cont, k)
        case Seq(Com(snd, expr, rcv, var, _), cont):
            return Seq(Com(self_role(snd.thread), expr, self_role(rcv.thread), var, k), simplify_term(cont, k))
        case Seq(Sel(snd, rcv, _, label), cont):
            return Seq(Sel(self_role(snd.thread), self_role(rcv.thread), k, label), simplify_term(cont, k))
        case Cond(at, guard, then, orelse):
            return Cond(at, guard, simplify_term(then, k), simplify_term(orelse, k))
        case Rec(var, body):
            return Rec(var, simplify_term(body, k))
        case Res(_, body):
            return simplify_term(body, k)
        case Inact() | Call():
            return c
    raise TypeError(f"not a choreography: {c!r}")


def simplify(c: Choreography, k: Sess) -> MergeResult:
    # bound occurrences are erased by the rewrite; only a free k would clash
    if k in free_sessions(c):
        raise FreshnessError(f"session {k} occurs free in the choreography")
    merged = simplify_term(c, k)
    return MergeResult(merged, tuple(threads_in_order(merged)), k)


def synthesize_start(m: MergeResult, chan: Chan) -> Choreography:
    if len(m.threads) < 2:
        return m.merged
    parts = tuple(self_role(t) for t in m.threads)
    return Seq(Start(parts, chan, m.session), m.merged)


def merge(c: Choreography, k: Sess, chan: Chan) -> Choreography:
    return synthesize_start(simplify(c, k), chan)
