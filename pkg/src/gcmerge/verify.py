"""Bounded checks that session merging neither adds nor loses behaviour.

Both checks walk one side step by step and look for a matching step on the
other side.  Start steps of the original have no counterpart after merging,
so they may be skipped (soundness) or matched by no step at all
(completeness); every such weakening is recorded per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from .semantics import (
    BuiltinEnv,
    EvalError,
    EvCom,
    EvCond,
    Event,
    EvSel,
    EvStart,
    Reduction,
    eval_expr,
)
from .syntax import (
    Call,
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
    VBool,
    sort_of_value,
)
from .terms import all_sessions, alpha_equal, etas, map_etas, substitute, unfold_head
from .transform import self_role, simplify_term

Transform = Callable[[Choreography, Sess], Choreography]


# ---------------------------------------------------------------------------
# successor relation


def _successors(c: Choreography, env: BuiltinEnv, avoid: set[Sess]) -> Iterator[Reduction]:
    # every rule instance whose redex is reachable, not just the first
    match c:
        case Res(sess, body):
            for r in _successors(body, env, avoid):
                yield r._replace(term=Res(sess, r.term))
        case Rec():
            yield from _successors(unfold_head(c, avoid), env, avoid)
        case Cond(at, guard, then, orelse):
            v, env2 = eval_expr(guard, env, at)
            if not isinstance(v, VBool):
                raise EvalError("sort mismatch", f"guard evaluated to {sort_of_value(v)}, not bool")
            yield Reduction(EvCond(at, v.value), then if v.value else orelse, env2)
        case Seq(Start(parts, chan, sess), cont):
            yield Reduction(EvStart(parts, chan, sess), Res(sess, cont), env)
        case Seq(Com(snd, expr, rcv, var, sess), cont):
            v, env2 = eval_expr(expr, env, snd.thread)
            yield Reduction(EvCom(snd, v, rcv, var, sess), substitute(cont, var, v), env2)
        case Seq(Sel(snd, rcv, sess, label), cont):
            yield Reduction(EvSel(snd, rcv, sess, label), cont, env)


def reductions(c: Choreography, env: BuiltinEnv) -> list[Reduction]:
    """All one-step successors of ``c`` up to alpha-equivalence (at most one)."""
    out: list[Reduction] = []
    for r in _successors(c, env, all_sessions(c)):
        if not any(alpha_equal(r.term, o.term) and r.event == o.event for o in out):
            out.append(r)
    assert len(out) <= 1, f"reduction is not deterministic: {len(out)} successors"
    return out


def _step(c: Choreography, env: BuiltinEnv) -> Reduction | None:
    rs = reductions(c, env)
    return rs[0] if rs else None


def event_key(ev: Event) -> tuple:
    """An event with role and session names erased."""
    match ev:
        case EvCom(snd, value, rcv, var, _):
            return ("com", snd.thread, value, rcv.thread, var)
        case EvSel(snd, rcv, _, label):
            return ("sel", snd.thread, rcv.thread, label)
        case EvCond(thread, result):
            return ("cond", thread, result)
        case EvStart(parts, chan, _):
            return ("start", frozenset(p.thread for p in parts), chan)
    raise TypeError(f"not an event: {ev!r}")


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Counterexample:
    state: Choreography
    event: Event | None
    explanation: str
    trace: tuple[Event, ...]


@dataclass(frozen=True)
class StepMatch:
    index: int
    event: Event
    kind: str  # direct | pure-start | extra-steps | skipped-starts


@dataclass
class Verdict:
    property: str
    passed: bool
    depth_checked: int
    counterexample: Counterexample | None = None
    matches: list[StepMatch] = field(default_factory=list)

    @property
    def weakenings(self) -> list[StepMatch]:
        return [m for m in self.matches if m.kind != "direct"]


def same_term(c1: Choreography, c2: Choreography) -> bool:
    """Alpha-equivalence after unfolding recursion at the head of both terms."""
    return alpha_equal(c1, c2) or alpha_equal(unfold_head(c1), unfold_head(c2))


def _try_step(c: Choreography, env: BuiltinEnv) -> Reduction | EvalError | None:
    try:
        return _step(c, env)
    except EvalError as err:
        return err


def _default_transform(c: Choreography, k: Sess) -> Choreography:
    return simplify_term(c, k)


def soundness_check(
    c: Choreography,
    k: Sess,
    env: BuiltinEnv,
    depth: int,
    *,
    transform: Transform = _default_transform,
    start_allowance: int = 16,
) -> Verdict:
    """Every step of the merged term is matched by the original after skipping starts."""
    t, env_t = transform(c, k), env
    env_c = env
    trace: list[Event] = []
    verdict = Verdict("soundness", True, 0)
    for i in range(depth):
        rt = _try_step(t, env_t)
        if rt is None:
            break
        # skip start steps of the original, then require one matching step
        cur, env_cur = c, env_c
        matched: Reduction | EvalError | None = None
        for skipped in range(start_allowance + 1):
            rc = _try_step(cur, env_cur)
            if isinstance(rc, EvalError):
                if isinstance(rt, EvalError):
                    matched = rc
                break
            if rc is None or isinstance(rt, EvalError):
                break
            if event_key(rc.event) == event_key(rt.event) and same_term(rt.term, transform(rc.term, k)):
                matched = rc
                break
            if not isinstance(rc.event, EvStart):
                break
            cur, env_cur = rc.term, rc.env
        if matched is None:
            event = None if isinstance(rt, EvalError) else rt.event
            what = f"merged term fails with {rt}" if isinstance(rt, EvalError) else "merged step"
            return Verdict(
                "soundness",
                False,
                i,
                Counterexample(t, event, f"{what} has no matching step of the original", tuple(trace)),
                verdict.matches,
            )
        if isinstance(matched, EvalError):
            verdict.depth_checked = i + 1
            return verdict
        verdict.matches.append(StepMatch(i, rt.event, "direct" if skipped == 0 else "skipped-starts"))
        trace.append(rt.event)
        t, env_t = rt.term, rt.env
        c, env_c = matched.term, matched.env
        verdict.depth_checked = i + 1
    return verdict


def completeness_check(
    c: Choreography,
    k: Sess,
    env: BuiltinEnv,
    depth: int,
    *,
    transform: Transform = _default_transform,
    start_allowance: int = 16,
) -> Verdict:
    """Every step of the original is reflected by at most one step of the merged term."""
    t, env_t = transform(c, k), env
    env_c = env
    trace: list[Event] = []
    verdict = Verdict("completeness", True, 0)

    def fail(i: int, event: Event | None, why: str) -> Verdict:
        return Verdict("completeness", False, i, Counterexample(c, event, why, tuple(trace)), verdict.matches)

    for i in range(depth):
        rc = _try_step(c, env_c)
        if rc is None:
            break
        if isinstance(rc, EvalError):
            if isinstance(_try_step(t, env_t), EvalError):
                verdict.depth_checked = i + 1
                return verdict
            return fail(i, None, f"original fails with {rc} but the merged term does not")
        if isinstance(rc.event, EvStart):
            if not same_term(transform(rc.term, k), t):
                return fail(i, rc.event, "start step changes the merged term")
            verdict.matches.append(StepMatch(i, rc.event, "pure-start"))
        else:
            rt = _try_step(t, env_t)
            if not isinstance(rt, Reduction):
                return fail(i, rc.event, "merged term cannot step")
            if event_key(rt.event) != event_key(rc.event):
                return fail(i, rc.event, f"merged term performs a different step: {rt.event}")
            # C' ->* C'' through start steps only
            target, env_target, extra = rc.term, rc.env, 0
            while not same_term(rt.term, transform(target, k)):
                nxt = _try_step(target, env_target)
                if extra >= start_allowance or not isinstance(nxt, Reduction) or not isinstance(nxt.event, EvStart):
                    return fail(i, rc.event, "no successor of the original matches the merged step")
                target, env_target, extra = nxt.term, nxt.env, extra + 1
            verdict.matches.append(StepMatch(i, rc.event, "direct" if extra == 0 else "extra-steps"))
            t, env_t = rt.term, rt.env
        trace.append(rc.event)
        c, env_c = rc.term, rc.env
        verdict.depth_checked = i + 1
    return verdict


# ---------------------------------------------------------------------------
# seeded mutants of the transformation


def _drop_second_com(c: Choreography, k: Sess) -> Choreography:
    seen = 0

    def fn(eta):
        nonlocal seen
        if isinstance(eta, Com):
            seen += 1
            if seen == 2:
                return None
        return eta

    return map_etas(simplify_term(c, k), fn)


def _swap_sel_labels(c: Choreography, k: Sess) -> Choreography:
    t = simplify_term(c, k)
    labels = list(dict.fromkeys(eta.label for eta in etas(t) if isinstance(eta, Sel)))
    if len(labels) < 2:
        return t
    rot = {lab: labels[(i + 1) % len(labels)] for i, lab in enumerate(labels)}
    return map_etas(t, lambda eta: replace(eta, label=rot[eta.label]) if isinstance(eta, Sel) else eta)


def _swap_first_com_pair(c: Choreography) -> tuple[Choreography, bool]:
    match c:
        case Seq(Com() as a, Seq(Com() as b, rest)):
            return Seq(b, Seq(a, rest)), True
        case Seq(eta, cont):
            new, done = _swap_first_com_pair(cont)
            return Seq(eta, new), done
        case Cond(at, guard, then, orelse):
            new, done = _swap_first_com_pair(then)
            if done:
                return Cond(at, guard, new, orelse), True
            new, done = _swap_first_com_pair(orelse)
            return Cond(at, guard, then, new), done
        case Rec(var, body):
            new, done = _swap_first_com_pair(body)
            return Rec(var, new), done
        case Res(sess, body):
            new, done = _swap_first_com_pair(body)
            return Res(sess, new), done
    return c, False


def _reorder_coms(c: Choreography, k: Sess) -> Choreography:
    return _swap_first_com_pair(simplify_term(c, k))[0]


def _keep_start(c: Choreography, k: Sess) -> Choreography:
    match c:
        case Seq(Start(parts, chan, _), cont):
            return Seq(Start(tuple(self_role(p.thread) for p in parts), chan, k), _keep_start(cont, k))
        case Seq(eta, cont):
            return Seq(simplify_term(Seq(eta, Inact()), k).eta, _keep_start(cont, k))
        case Cond(at, guard, then, orelse):
            return Cond(at, guard, _keep_start(then, k), _keep_start(orelse, k))
        case Rec(var, body):
            return Rec(var, _keep_start(body, k))
        case Res(_, body):
            return _keep_start(body, k)
        case Inact() | Call():
            return c
    raise TypeError(f"not a choreography: {c!r}")


def _rename_role(c: Choreography, k: Sess) -> Choreography:
    done = False

    def fn(eta):
        nonlocal done
        if done or not isinstance(eta, (Com, Sel)):
            return eta
        done = True
        return replace(eta, sender=Endpoint(eta.sender.thread, Role(eta.sender.role.name + "_r")))

    return map_etas(simplify_term(c, k), fn)


MUTANTS: dict[str, Transform] = {
    "drop_com": _drop_second_com,
    "swap_sel_labels": _swap_sel_labels,
    "reorder_coms": _reorder_coms,
    "keep_start": _keep_start,
    "rename_role": _rename_role,
}
