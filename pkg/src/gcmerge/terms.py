"""Operations on terms: substitution, alpha-equivalence, well-formedness."""

from __future__ import annotations

import itertools
from dataclasses import replace
from typing import Callable, Iterator

from .syntax import (
    BinOp,
    Call,
    Choreography,
    Com,
    Cond,
    Diagnostic,
    Endpoint,
    Eta,
    Expr,
    FnCall,
    GlobalType,
    Inact,
    Rec,
    RecVar,
    Res,
    Role,
    Sel,
    Seq,
    Sess,
    Start,
    TChoice,
    TCom,
    TEnd,
    Thread,
    TRec,
    TVar,
    TypeVar,
    Value,
    Var,
    VarName,
    literal,
)

# ---------------------------------------------------------------------------
# substitution


def subst_expr(e: Expr, x: VarName, replacement: Expr) -> Expr:
    match e:
        case Var(var) if var == x:
            return replacement
        case FnCall(fn, args):
            return FnCall(fn, tuple(subst_expr(a, x, replacement) for a in args))
        case BinOp(op, left, right):
            return BinOp(op, subst_expr(left, x, replacement), subst_expr(right, x, replacement))
    return e


def substitute(c: Choreography, x: VarName, v: Value) -> Choreography:
    """Replace free occurrences of ``x`` by the literal of ``v``.

    A ``Com`` binding ``x`` shadows it in its continuation; its own sender
    expression is still rewritten since it is evaluated before the binding.
    """
    lit = literal(v)

    def go(c: Choreography) -> Choreography:
        match c:
            case Seq(Com() as eta, cont):
                eta = replace(eta, expr=subst_expr(eta.expr, x, lit))
                return Seq(eta, cont if eta.var == x else go(cont))
            case Seq(eta, cont):
                return Seq(eta, go(cont))
            case Cond(at, guard, then, orelse):
                return Cond(at, subst_expr(guard, x, lit), go(then), go(orelse))
            case Rec(var, body):
                return Rec(var, go(body))
            case Res(sess, body):
                return Res(sess, go(body))
        return c

    return go(c)


def subst_call(c: Choreography, x: RecVar, target: Choreography) -> Choreography:
    """Replace ``Call(x)`` by ``target``; an inner ``Rec(x, ...)`` shadows."""
    return _replace_calls(c, x, lambda: target)


def _replace_calls(c: Choreography, x: RecVar, make: Callable[[], Choreography]) -> Choreography:
    match c:
        case Call(var) if var == x:
            return make()
        case Seq(eta, cont):
            return Seq(eta, _replace_calls(cont, x, make))
        case Cond(at, guard, then, orelse):
            return Cond(at, guard, _replace_calls(then, x, make), _replace_calls(orelse, x, make))
        case Rec(var, body) if var != x:
            return Rec(var, _replace_calls(body, x, make))
        case Res(sess, body):
            return Res(sess, _replace_calls(body, x, make))
    return c


def rename_session(c: Choreography, old: Sess, new: Sess) -> Choreography:
    """Rename free occurrences of session ``old`` to ``new``."""

    def go(c: Choreography) -> Choreography:
        match c:
            case Seq(Start() as eta, cont):
                # a start binds its session: nothing below it is free
                return c if eta.sess == old else Seq(eta, go(cont))
            case Seq(eta, cont):
                if eta.sess == old:
                    eta = replace(eta, sess=new)
                return Seq(eta, go(cont))
            case Cond(at, guard, then, orelse):
                return Cond(at, guard, go(then), go(orelse))
            case Rec(var, body):
                return Rec(var, go(body))
            case Res(sess, body) if sess != old:
                return Res(sess, go(body))
        return c

    return go(c)


def all_sessions(c: Choreography) -> set[Sess]:
    out: set[Sess] = set()
    for node in walk(c):
        match node:
            case Seq(eta, _):
                out.add(eta.sess)
            case Res(sess, _):
                out.add(sess)
    return out


def fresh_session(base: Sess, avoid: set[Sess]) -> Sess:
    stem = base.name.split("_")[0] if "_" in base.name else base.name
    for i in itertools.count(1):
        cand = Sess(f"{stem}_{i}")
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def freshen_binders(c: Choreography, avoid: set[Sess]) -> Choreography:
    """Alpha-rename every session binder in ``c`` (Start and Res) to a fresh name.

    ``avoid`` is extended in place with the names handed out.
    """

    def go(c: Choreography) -> Choreography:
        match c:
            case Seq(Start() as eta, cont):
                new = fresh_session(eta.sess, avoid)
                avoid.add(new)
                return Seq(replace(eta, sess=new), go(rename_session(cont, eta.sess, new)))
            case Res(sess, body):
                new = fresh_session(sess, avoid)
                avoid.add(new)
                return Res(new, go(rename_session(body, sess, new)))
            case Seq(eta, cont):
                return Seq(eta, go(cont))
            case Cond(at, guard, then, orelse):
                return Cond(at, guard, go(then), go(orelse))
            case Rec(var, body):
                return Rec(var, go(body))
        return c

    return go(c)


def unfold(rec: Rec, avoid: set[Sess] | None = None) -> Choreography:
    """One unfolding ``C[rec X.C / X]``.

    When ``avoid`` is given, session binders in the exposed body and in each
    substituted copy of the loop are renamed apart from it and from each
    other, so the result keeps all started sessions distinct.
    """
    if avoid is None:
        return subst_call(rec.body, rec.var, rec)
    body = freshen_binders(rec.body, avoid)
    # every copy of the loop gets its own binder names as well
    return _replace_calls(body, rec.var, lambda: freshen_binders(rec, avoid))


def unfold_head(c: Choreography, avoid: set[Sess] | None = None) -> Choreography:
    """Unfold recursion at the head until a non-``rec`` term appears.

    An unguarded loop such as ``rec X . X`` has no guarded unfolding; its
    bare ``Call`` is returned instead, which has no reductions.
    """
    while isinstance(c, Rec):
        binders, body = [], c
        while isinstance(body, Rec):
            binders.append(body.var)
            body = body.body
        if isinstance(body, Call) and body.var in binders:
            return body
        c = unfold(c, avoid)
    return c


# ---------------------------------------------------------------------------
# traversal helpers


def walk(c: Choreography) -> Iterator[Choreography]:
    """Pre-order traversal, then-branch before else-branch."""
    stack = [c]
    while stack:
        node = stack.pop()
        yield node
        match node:
            case Seq(_, cont):
                stack.append(cont)
            case Cond(_, _, then, orelse):
                stack.append(orelse)
                stack.append(then)
            case Rec(_, body) | Res(_, body):
                stack.append(body)


def etas(c: Choreography) -> Iterator[Eta]:
    for node in walk(c):
        if isinstance(node, Seq):
            yield node.eta


def node_count(c: Choreography) -> int:
    return sum(1 for _ in walk(c))


def threads_in_order(c: Choreography) -> list[Thread]:
    seen: dict[Thread, None] = {}
    for node in walk(c):
        match node:
            case Seq(Start(parts, _, _), _):
                for p in parts:
                    seen.setdefault(p.thread)
            case Seq(eta, _):
                seen.setdefault(eta.sender.thread)
                seen.setdefault(eta.receiver.thread)
    return list(seen)


def is_terminated(c: Choreography) -> bool:
    while isinstance(c, Res):
        c = c.body
    return isinstance(c, Inact)


# ---------------------------------------------------------------------------
# alpha-equivalence


class _Marker:
    __slots__ = ()


def _canon_expr(e: Expr, at: Thread, venv: dict) -> tuple:
    # bound variables are nameless; free ones keep the evaluating thread
    match e:
        case Var(var):
            return ("var", venv[var]) if var in venv else ("fvar", at.name, var.name)
        case FnCall(fn, args):
            return ("call", fn, tuple(_canon_expr(a, at, venv) for a in args))
        case BinOp(op, left, right):
            return ("bin", op, _canon_expr(left, at, venv), _canon_expr(right, at, venv))
    # literals carry their own class so IntLit(1) != BoolLit(True)
    return (type(e).__name__, e.value)


def _replace_markers(t, mapping: dict) -> object:
    if isinstance(t, _Marker):
        return mapping.get(t, t)
    if isinstance(t, tuple):
        return tuple(_replace_markers(x, mapping) for x in t)
    return t


def _marker_order(t, markers: set, out: list) -> None:
    if isinstance(t, _Marker):
        if t in markers and t not in out:
            out.append(t)
    elif isinstance(t, tuple):
        for x in t:
            _marker_order(x, markers, out)


def canonical(c: Choreography, *, unordered_starts: bool = False) -> tuple:
    """Nameless form of ``c``: bound names become binder ids in traversal order.

    ``Res(k, 0)`` collapses to ``0`` and adjacent ``Res`` binders are
    reordered by first use in their body.
    """
    counter = itertools.count()

    def sref(k: Sess, senv: dict):
        return senv[k] if k in senv else ("fsess", k.name)

    def ep(e: Endpoint) -> tuple:
        return (e.thread.name, e.role.name)

    def go(c: Choreography, venv: dict, senv: dict, renv: dict) -> tuple:
        match c:
            case Inact():
                return ("inact",)
            case Call(var):
                return ("call", renv[var] if var in renv else ("frec", var.name))
            case Rec(var, body):
                b = ("b", next(counter))
                return ("rec", go(body, venv, senv, {**renv, var: b}))
            case Cond(at, guard, then, orelse):
                return (
                    "cond",
                    at.name,
                    _canon_expr(guard, at, venv),
                    go(then, venv, senv, renv),
                    go(orelse, venv, senv, renv),
                )
            case Seq(Start(parts, chan, sess), cont):
                b = ("b", next(counter))
                ps = tuple(ep(p) for p in parts)
                if unordered_starts:
                    ps = tuple(sorted(ps))
                return ("start", ps, chan.name, go(cont, venv, {**senv, sess: b}, renv))
            case Seq(Com(snd, expr, rcv, var, sess), cont):
                head = ("com", ep(snd), _canon_expr(expr, snd.thread, venv), ep(rcv), sref(sess, senv))
                b = ("b", next(counter))
                return head + (go(cont, {**venv, var: b}, senv, renv),)
            case Seq(Sel(snd, rcv, sess, label), cont):
                return ("sel", ep(snd), ep(rcv), sref(sess, senv), label.name, go(cont, venv, senv, renv))
            case Res():
                chain: list[Sess] = []
                while isinstance(c, Res):
                    chain.append(c.sess)
                    c = c.body
                markers = {k: _Marker() for k in chain}
                inner = go(c, venv, {**senv, **markers}, renv)
                if inner == ("inact",):
                    return inner
                order: list[_Marker] = []
                _marker_order(inner, set(markers.values()), order)
                mapping = {m: ("b", next(counter)) for m in order}
                return ("res", len(set(chain)), _replace_markers(inner, mapping))
        raise TypeError(f"not a choreography: {c!r}")

    return go(c, {}, {}, {})


def alpha_equal(c1: Choreography, c2: Choreography, *, unordered_starts: bool = False) -> bool:
    return canonical(c1, unordered_starts=unordered_starts) == canonical(c2, unordered_starts=unordered_starts)


def canonical_type(g: GlobalType) -> tuple:
    counter = itertools.count()

    def go(g: GlobalType, env: dict) -> tuple:
        match g:
            case TEnd():
                return ("end",)
            case TVar(var):
                return ("var", env[var] if var in env else ("free", var.name))
            case TRec(var, body):
                b = next(counter)
                return ("rec", go(body, {**env, var: b}))
            case TCom(p, q, sort, cont):
                return ("com", p.name, q.name, sort.value, go(cont, env))
            case TChoice(p, q, branches):
                bs = tuple(sorted((lab.name, go(b, env)) for lab, b in branches))
                return ("choice", p.name, q.name, bs)
        raise TypeError(f"not a global type: {g!r}")

    return go(g, {})


def alpha_equal_type(g1: GlobalType, g2: GlobalType) -> bool:
    return canonical_type(g1) == canonical_type(g2)


# ---------------------------------------------------------------------------
# well-formedness and free names


def eta_diagnostics(eta: Eta) -> list[str]:
    match eta:
        case Start(parts, _, _):
            msgs = []
            if len(parts) < 2:
                msgs.append("start needs at least two participants")
            threads = [p.thread for p in parts]
            roles = [p.role for p in parts]
            if len(set(threads)) != len(threads):
                msgs.append("start participants must be distinct threads")
            if len(set(roles)) != len(roles):
                msgs.append("start participants must play distinct roles")
            return msgs
        case Com() | Sel():
            if eta.sender.thread == eta.receiver.thread:
                return [f"sender and receiver are the same thread {eta.sender.thread}"]
    return []


def well_formed(c: Choreography) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    started: dict[Sess, tuple[str, ...]] = {}

    def go(c: Choreography, path: tuple[str, ...], bound: frozenset, recs: dict) -> None:
        match c:
            case Seq(eta, cont):
                diags.extend(Diagnostic(path, m) for m in eta_diagnostics(eta))
                if isinstance(eta, Start):
                    k = eta.sess
                    if k in started:
                        diags.append(Diagnostic(path, f"duplicate session {k}"))
                    else:
                        started[k] = path
                    if k in bound:
                        diags.append(Diagnostic(path, f"session {k} is already bound here"))
                    bound = bound | {k}
                go(cont, path + ("cont",), bound, {x: True for x in recs})
            case Cond(_, _, then, orelse):
                guarded = {x: True for x in recs}
                go(then, path + ("then",), bound, guarded)
                go(orelse, path + ("else",), bound, guarded)
            case Rec(var, body):
                go(body, path + ("body",), bound, {**recs, var: False})
            case Call(var):
                if var not in recs:
                    diags.append(Diagnostic(path, f"unbound recursion variable {var}"))
                elif not recs[var]:
                    diags.append(Diagnostic(path, f"unguarded recursion on {var}"))
            case Res(sess, body):
                go(body, path + ("body",), bound | {sess}, recs)

    go(c, (), frozenset(), {})
    return diags


def free_sessions(c: Choreography) -> set[Sess]:
    match c:
        case Seq(Start(_, _, sess), cont):
            return free_sessions(cont) - {sess}
        case Seq(eta, cont):
            return {eta.sess} | free_sessions(cont)
        case Cond(_, _, then, orelse):
            return free_sessions(then) | free_sessions(orelse)
        case Rec(_, body):
            return free_sessions(body)
        case Res(sess, body):
            return free_sessions(body) - {sess}
    return set()


# ---------------------------------------------------------------------------
# global type helpers


def subst_type(g: GlobalType, t: TypeVar, target: GlobalType) -> GlobalType:
    match g:
        case TVar(var) if var == t:
            return target
        case TCom(p, q, sort, cont):
            return TCom(p, q, sort, subst_type(cont, t, target))
        case TChoice(p, q, branches):
            return TChoice(p, q, tuple((lab, subst_type(b, t, target)) for lab, b in branches))
        case TRec(var, body) if var != t:
            return TRec(var, subst_type(body, t, target))
    return g


def unfold_type(g: GlobalType) -> GlobalType:
    """Unfold leading ``rec`` binders until a communication, choice or end shows."""
    seen = 0
    while isinstance(g, TRec):
        g = subst_type(g.body, g.var, g)
        seen += 1
        if seen > 1000:
            raise ValueError("non-contractive global type")
    return g


def type_roles(g: GlobalType) -> set[Role]:
    match g:
        case TCom(p, q, _, cont):
            return {p, q} | type_roles(cont)
        case TChoice(p, q, branches):
            out = {p, q}
            for _, b in branches:
                out |= type_roles(b)
            return out
        case TRec(_, body):
            return type_roles(body)
    return set()


def type_diagnostics(g: GlobalType) -> list[Diagnostic]:
    """Well-formedness of a global type: bound, contractive, distinct labels."""
    diags: list[Diagnostic] = []

    def go(g: GlobalType, path: tuple[str, ...], bound: frozenset, unguarded: frozenset) -> None:
        match g:
            case TVar(var):
                if var not in bound:
                    diags.append(Diagnostic(path, f"unbound type variable {var}"))
                elif var in unguarded:
                    diags.append(Diagnostic(path, f"non-contractive recursion on {var}"))
            case TRec(var, body):
                go(body, path + ("body",), bound | {var}, unguarded | {var})
            case TCom(p, q, _, cont):
                if p == q:
                    diags.append(Diagnostic(path, f"role {p} communicates with itself"))
                go(cont, path + ("cont",), bound, frozenset())
            case TChoice(p, q, branches):
                if p == q:
                    diags.append(Diagnostic(path, f"role {p} communicates with itself"))
                if not branches:
                    diags.append(Diagnostic(path, "choice without branches"))
                labels = [lab for lab, _ in branches]
                if len(set(labels)) != len(labels):
                    diags.append(Diagnostic(path, "duplicate branch label"))
                for lab, b in branches:
                    go(b, path + (lab.name,), bound, frozenset())

    go(g, (), frozenset(), frozenset())
    return diags


def rename_roles(g: GlobalType, mapping: dict[Role, Role]) -> GlobalType:
    def r(x: Role) -> Role:
        return mapping.get(x, x)

    match g:
        case TCom(p, q, sort, cont):
            return TCom(r(p), r(q), sort, rename_roles(cont, mapping))
        case TChoice(p, q, branches):
            return TChoice(r(p), r(q), tuple((lab, rename_roles(b, mapping)) for lab, b in branches))
        case TRec(var, body):
            return TRec(var, rename_roles(body, mapping))
    return g


def map_etas(c: Choreography, fn: Callable[[Eta], Eta | None]) -> Choreography:
    """Rewrite every eta with ``fn``; returning ``None`` drops the prefix."""
    match c:
        case Seq(eta, cont):
            new = fn(eta)
            rest = map_etas(cont, fn)
            return rest if new is None else Seq(new, rest)
        case Cond(at, guard, then, orelse):
            return Cond(at, guard, map_etas(then, fn), map_etas(orelse, fn))
        case Rec(var, body):
            return Rec(var, map_etas(body, fn))
        case Res(sess, body):
            return Res(sess, map_etas(body, fn))
    return c
