from __future__ import annotations

import pytest

from conftest import env_with_check
from gcmerge.parser import parse_choreography, parse_type
from gcmerge.semantics import EvCom, EvSel, EvStart, step
from gcmerge.syntax import Chan, FnCall, Inact, IntLit, Role, Sess, Sort, StrLit, Thread
from gcmerge.terms import unfold_type
from gcmerge.transform import merge, simplify
from gcmerge.typecheck import SessionState, SortEnv, SortError, sort_of, typecheck

P = parse_choreography

CHOR1_TEXT = """
rec X {{
  start c[C], u[U] on a as k;
  com u[U].{pwd} -> c[C].pwd over k;
  start c[C], f[F] on b as k';
  com c[C].pwd -> f[F].y over k';
  if check(y) @ f then {then_branch} else {else_branch}
}}
"""
THEN = "sel f[F] -> c[C] : ok over k'; com c[C].file -> f[F].z over k'"
ELSE = "sel f[F] -> c[C] : quit over k'; X"


def chor1_variant(pwd="password()", then_branch=THEN, else_branch=ELSE):
    return P(CHOR1_TEXT.format(pwd=pwd, then_branch=then_branch, else_branch=else_branch))


@pytest.fixture
def gamma(protocols):
    return {Chan("a"): protocols["Ga"], Chan("b"): protocols["Gb"]}


@pytest.fixture
def sorts(env1):
    return SortEnv(env1.binding_sorts(), env1.signatures())


def test_sort_of_examples(sorts):
    assert sort_of(FnCall("password", ()), sorts, Thread("u")) is Sort.STRING
    assert sort_of(IntLit(1), SortEnv(), Thread("t")) is Sort.INT
    with pytest.raises(SortError) as info:
        sort_of(FnCall("check", (IntLit(1),)), sorts, Thread("f"))
    assert info.value.kind == "mismatch"
    with pytest.raises(SortError) as info:
        sort_of(FnCall("check", ()), sorts, Thread("f"))
    assert info.value.kind == "arity"


def test_chor1_typechecks(chor1, gamma, sorts):
    report = typecheck(gamma, chor1, {}, sorts)
    assert report.ok, report.errors
    assert report.completed_sessions == {Sess("k"), Sess("k'")}


def test_trivial():
    assert typecheck({}, Inact(), {}, SortEnv()).ok


def test_sort_mismatch_at_line_2(gamma, sorts):
    report = typecheck(gamma, chor1_variant(pwd="42"), {}, sorts)
    assert [m for _, m in report.errors] == ["sort mismatch: expected string, got int"]
    assert report.errors[0][0] == ("body", "cont")


def test_merged_typechecks_against_g(chor1, protocols, sorts):
    g = protocols["G"]
    assert typecheck({Chan("c"): g}, merge(chor1, Sess("k"), Chan("c")), {}, sorts).ok
    m = simplify(chor1, Sess("k"))
    cast = {Role(t.name): t for t in m.threads}
    assert typecheck({}, m.merged, {Sess("k"): SessionState(g, cast)}, sorts).ok


def test_protocol_order_mismatch(gamma, sorts):
    swapped = chor1_variant(then_branch="com c[C].file -> f[F].z over k'; sel f[F] -> c[C] : ok over k'")
    msgs = [m for _, m in typecheck(gamma, swapped, {}, sorts).errors]
    assert any(m.startswith("protocol-order mismatch") for m in msgs)


def test_missing_label(gamma, sorts):
    bad = chor1_variant(else_branch="sel f[F] -> c[C] : later over k'; X")
    msgs = [m for _, m in typecheck(gamma, bad, {}, sorts).errors]
    assert any(m.startswith("missing label later") for m in msgs)


def test_incomplete_session(gamma, sorts):
    bad = chor1_variant(then_branch="sel f[F] -> c[C] : ok over k'")
    msgs = [m for _, m in typecheck(gamma, bad, {}, sorts).errors]
    assert msgs == ["session k' incomplete"]


def test_role_mismatch_on_start(gamma, sorts):
    bad = P("start c[C], u[V] on a as k; 0")
    msgs = [m for _, m in typecheck(gamma, bad, {}, sorts).errors]
    assert msgs and msgs[0].startswith("role mismatch")


def test_role_mismatch_on_cast(gamma, sorts):
    bad = P("start c[C], u[U] on a as k; com c[U].password() -> u[C].pwd over k")
    msgs = [m for _, m in typecheck(gamma, bad, {}, sorts).errors]
    assert any(m.startswith("role mismatch on k") for m in msgs)


def test_missing_protocol(sorts):
    msgs = [m for _, m in typecheck({}, P("start c[C], u[U] on z as k; 0"), {}, sorts).errors]
    assert msgs == ["no protocol bound to public channel z"]


def test_unknown_session(sorts):
    msgs = [m for _, m in typecheck({}, P("com a[P].1 -> b[Q].x over k"), {}, sorts).errors]
    assert msgs == ["unknown session k"]


def test_non_stable_recursion(sorts):
    # one P->Q prefix, then Q->P forever: the loop body consumes the prefix only once
    g = parse_type("P -> Q : <int>; rec t . Q -> P : <int>; t")
    c = P("rec X { com a[P].1 -> b[Q].x over k; X }")
    delta = {Sess("k"): SessionState(g, {Role("P"): Thread("a"), Role("Q"): Thread("b")})}
    msgs = [m for _, m in typecheck({}, c, delta, sorts).errors]
    assert msgs and msgs[0].startswith("non-stable recursion on X")


def test_recursion_stable_up_to_unfolding(sorts):
    g = parse_type("rec t . P -> Q : <int>; t")
    c = P("rec X { com a[P].1 -> b[Q].x over k; X }")
    delta = {Sess("k"): SessionState(g, {Role("P"): Thread("a"), Role("Q"): Thread("b")})}
    assert typecheck({}, c, delta, sorts).ok


def test_weakening(chor1, gamma, sorts, protocols):
    extra = {**gamma, Chan("zz"): protocols["Bad"]}
    assert typecheck(extra, chor1, {}, sorts).ok
    bad = chor1_variant(pwd="42")
    assert typecheck(extra, bad, {}, sorts).errors == typecheck(gamma, bad, {}, sorts).errors


def test_branch_symmetry(gamma, sorts):
    a = chor1_variant()
    b = P(
        CHOR1_TEXT.format(pwd="password()", then_branch=ELSE, else_branch=THEN).replace(
            "if check(y) @ f", "if check(y) == false @ f"
        )
    )
    assert typecheck(gamma, a, {}, sorts).ok == typecheck(gamma, b, {}, sorts).ok is True


@pytest.mark.parametrize("checks", [[True], [False], [False, True], [False, False, True]])
def test_subject_reduction_on_chor1(chor1, gamma, sorts, checks):
    env = env_with_check(checks)
    c, delta = chor1, {}
    for _ in range(20):
        r = step(c, env)
        if r is None:
            break
        ev = r.event
        if isinstance(ev, EvStart):
            delta = {**delta, ev.sess: SessionState(gamma[ev.chan], {p.role: p.thread for p in ev.participants})}
        elif isinstance(ev, (EvCom, EvSel)):
            st = delta[ev.sess]
            g = unfold_type(st.residual)
            nxt = g.cont if isinstance(ev, EvCom) else g.branch(ev.label)
            delta = {**delta, ev.sess: SessionState(nxt, st.cast)}
        c, env = r.term, r.env
        report = typecheck(gamma, c, delta, sorts)
        assert report.ok, (ev, report.errors)


def test_sort_errors_are_reported(gamma, sorts):
    bad = chor1_variant(pwd="nope()")
    msgs = [m for _, m in typecheck(gamma, bad, {}, sorts).errors]
    assert msgs == ["sort error: no signature for builtin nope"]
    assert StrLit("x") != IntLit(1)
