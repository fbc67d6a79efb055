"""Property checks over seeded generated instances, shared by the property and acceptance suites."""

from __future__ import annotations

import random

from gcmerge.gen import builtin_env, random_choreography, random_global_type
from gcmerge.parser import format_type, parse_choreography, parse_type, pretty_print
from gcmerge.semantics import EvalError, step
from gcmerge.syntax import (
    Call,
    Choreography,
    Cond,
    Rec,
    RecVar,
    Res,
    Role,
    Seq,
    TChoice,
    TCom,
    TRec,
    TVar,
    VarName,
    VInt,
)
from gcmerge.terms import all_sessions, alpha_equal, alpha_equal_type, etas, freshen_binders, rename_roles, substitute
from gcmerge.typealg import enumerate_paths, mesh_member, paths_automaton
from gcmerge.verify import reductions


def chor(seed: int) -> Choreography:
    return random_choreography(random.Random(seed))


def gtype(seed: int):
    return random_global_type(random.Random(seed))


def rename_recvars(c: Choreography, suffix: str) -> Choreography:
    """Rename every recursion binder and its calls; alpha-equivalent by construction."""

    def go(c, env):
        match c:
            case Rec(x, body):
                y = RecVar(x.name + suffix)
                return Rec(y, go(body, {**env, x: y}))
            case Call(x):
                return Call(env.get(x, x))
            case Seq(eta, cont):
                return Seq(eta, go(cont, env))
            case Cond(at, guard, then, orelse):
                return Cond(at, guard, go(then, env), go(orelse, env))
            case Res(k, body):
                return Res(k, go(body, env))
        return c

    return go(c, {})


def alpha_variant(c: Choreography, salt: str) -> Choreography:
    avoid = all_sessions(c) | {e.sess for e in etas(c)}
    return rename_recvars(freshen_binders(c, avoid), salt)


def rename_tvars(g, suffix: str):
    def go(g, env):
        match g:
            case TRec(x, body):
                y = type(x)(x.name + suffix)
                return TRec(y, go(body, {**env, x: y}))
            case TVar(x):
                return TVar(env.get(x, x))
            case TCom(p, q, s, cont):
                return TCom(p, q, s, go(cont, env))
            case TChoice(p, q, bs):
                return TChoice(p, q, tuple((lab, go(b, env)) for lab, b in bs))
        return g

    return go(g, {})


# ---------------------------------------------------------------------------
# the properties; each raises AssertionError on a counterexample


def prop_parser_round_trip(seed: int) -> None:
    c = chor(seed)
    assert alpha_equal(parse_choreography(pretty_print(c)), c)
    g = gtype(seed)
    assert parse_type(format_type(g)) == g


def prop_substitution_idempotent(seed: int) -> None:
    c = chor(seed)
    for name in ("x", "y", "z"):
        once = substitute(c, VarName(name), VInt(seed))
        assert substitute(once, VarName(name), VInt(seed)) == once


def prop_alpha_laws(seed: int) -> None:
    a = chor(seed)
    b, c = alpha_variant(a, "_b"), alpha_variant(alpha_variant(a, "_b"), "_c")
    other = chor(seed + 1)
    assert alpha_equal(a, a)
    assert alpha_equal(a, b) and alpha_equal(b, a)
    assert alpha_equal(b, c) and alpha_equal(a, c)
    assert alpha_equal(a, other) == alpha_equal(other, a)


def prop_reduction_deterministic(seed: int, steps: int = 8) -> None:
    c, env = chor(seed), builtin_env(seed)
    for _ in range(steps):
        try:
            rs = reductions(c, env)
        except EvalError:
            return
        assert len(rs) <= 1
        r = step(c, env)
        if r is None:
            assert rs == []
            return
        c, env = r.term, r.env


def prop_prefix_closed(seed: int, depth: int = 6) -> None:
    ws = enumerate_paths(paths_automaton(gtype(seed)), depth)
    assert () in ws
    assert all(w[:i] in ws for w in ws for i in range(len(w)))
    assert all(ws[w] for w in ws if len(w) == depth)


def prop_mesh_alpha_closure(seed: int) -> None:
    g, h = gtype(seed), gtype(seed + 7)
    g2 = rename_tvars(g, "_r")
    assert alpha_equal_type(g, g2)
    base = mesh_member(g, [h], 5, 4, 2)
    assert mesh_member(g2, [h], 5, 4, 2).member == base.member
    assert mesh_member(g, [rename_tvars(h, "_s")], 5, 4, 2).member == base.member
    # role renaming of the candidate is absorbed by the injective renaming search
    roles = {Role("P"): Role("X"), Role("Q"): Role("Y"), Role("R"): Role("Z")}
    assert mesh_member(rename_roles(g, roles), [h], 5, 4, 2).member == base.member


def prop_mesh_reflexive(seed: int) -> None:
    g = gtype(seed)
    assert mesh_member(g, [g], 5, 5, 1).member


PROPERTIES = {
    "parser round-trip": prop_parser_round_trip,
    "substitution idempotence": prop_substitution_idempotent,
    "alpha_equal equivalence laws": prop_alpha_laws,
    "reduction determinism": prop_reduction_deterministic,
    "prefix closure of enumerate_paths": prop_prefix_closed,
    "mesh alpha-closure": prop_mesh_alpha_closure,
    "mesh reflexivity": prop_mesh_reflexive,
}
