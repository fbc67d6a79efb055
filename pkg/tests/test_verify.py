from __future__ import annotations

import random

import pytest

from conftest import env_with_check
from gcmerge.gen import builtin_env, random_choreography
from gcmerge.parser import parse_choreography
from gcmerge.semantics import BuiltinEnv, EvalError, EvCom, EvStart, step
from gcmerge.syntax import Chan, Inact, Res, Sess
from gcmerge.terms import alpha_equal
from gcmerge.verify import MUTANTS, completeness_check, event_key, reductions, same_term, soundness_check

P = parse_choreography
K = Sess("kk")
SCRIPTS = [[True], [False], [False, True], [False, False, True]]


def test_reductions_inact():
    assert reductions(Inact(), BuiltinEnv()) == []


def test_reductions_chor1(chor1, env1):
    rs = reductions(chor1, env1)
    assert len(rs) == 1
    assert isinstance(rs[0].event, EvStart) and rs[0].event.chan == Chan("a")
    assert isinstance(rs[0].term, Res)


def test_reductions_agree_with_step_on_generated_terms():
    rng = random.Random(21)
    for i in range(200):
        c, env = random_choreography(rng), builtin_env(i)
        for _ in range(6):
            try:
                rs = reductions(c, env)
                r = step(c, env)
            except EvalError:
                break
            assert len(rs) <= 1
            if r is None:
                assert rs == []
                break
            assert event_key(rs[0].event) == event_key(r.event)
            assert same_term(rs[0].term, r.term)
            c, env = r.term, r.env


@pytest.mark.parametrize("checks", SCRIPTS)
def test_chor1_sound_and_complete(chor1, checks):
    env = env_with_check(checks)
    s = soundness_check(chor1, Sess("k"), env, 12)
    c = completeness_check(chor1, Sess("k"), env, 12)
    assert s.passed and c.passed, (s.counterexample, c.counterexample)
    assert s.depth_checked >= 5 and c.depth_checked >= 7
    # every start step is reported as a weakening, never silently absorbed
    assert {m.kind for m in c.weakenings} == {"pure-start"}
    assert {m.kind for m in s.weakenings} == {"skipped-starts"}


def test_chor2_checks_pass(chor2, env1):
    assert soundness_check(chor2, Sess("m"), env1, 12).passed
    assert completeness_check(chor2, Sess("m"), env1, 12).passed


def test_vacuous(env1):
    for check in (soundness_check, completeness_check):
        v = check(Inact(), Sess("k"), env1, 10)
        assert v.passed and v.depth_checked == 0 and v.counterexample is None


def test_pure_start_completeness(env1):
    c = P("start a[P], b[Q] on x as k1; start c[P], d[Q] on y as k2; 0")
    v = completeness_check(c, Sess("k"), env1, 10)
    assert v.passed and v.depth_checked == 2
    assert [m.kind for m in v.matches] == ["pure-start", "pure-start"]


@pytest.mark.parametrize("name", sorted(MUTANTS))
def test_mutant_detected(chor1, name):
    transform = MUTANTS[name]
    detected = []
    for checks in SCRIPTS:
        env = env_with_check(checks)
        for check in (soundness_check, completeness_check):
            v = check(chor1, Sess("k"), env, 12, transform=transform)
            if not v.passed:
                assert v.counterexample is not None and v.counterexample.explanation
                detected.append(v)
    assert detected, name


def test_mutant_count():
    assert len(MUTANTS) >= 5


def test_drop_com_counterexample_at_first_unmatched_event(chor1, env1):
    v = soundness_check(chor1, Sess("k"), env1, 12, transform=MUTANTS["drop_com"])
    assert not v.passed and v.depth_checked == 0 and v.counterexample.trace == ()
    # the first merged step lands in a state the original cannot reach in one step
    ev = v.counterexample.event
    assert isinstance(ev, EvCom)
    assert (ev.sender.thread.name, ev.receiver.thread.name) == ("u", "c")
    c = completeness_check(chor1, Sess("k"), env1, 12, transform=MUTANTS["drop_com"])
    assert not c.passed and c.counterexample.explanation == "start step changes the merged term"


@pytest.mark.parametrize("checks", SCRIPTS)
def test_verdicts_deterministic(chor1, checks):
    env = env_with_check(checks)
    for check in (soundness_check, completeness_check):
        a, b = check(chor1, Sess("k"), env, 12), check(chor1, Sess("k"), env, 12)
        assert a == b


def test_generated_terms_pass():
    rng = random.Random(4)
    for i in range(100):
        c, env = random_choreography(rng), builtin_env(i)
        s = soundness_check(c, K, env, 12)
        m = completeness_check(c, K, env, 12)
        assert s.passed, (c, s.counterexample)
        assert m.passed, (c, m.counterexample)


def test_same_term_unfolds_head():
    loop = P("rec X { com a[P].1 -> b[Q].x over k; X }")
    once = P("com a[P].1 -> b[Q].x over k; rec X { com a[P].1 -> b[Q].x over k; X }")
    assert not alpha_equal(loop, once)
    assert same_term(loop, once)
