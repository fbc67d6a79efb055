from __future__ import annotations

import random

import pytest

from conftest import env_with_check
from gcmerge.gen import builtin_env, random_choreography
from gcmerge.parser import parse_choreography
from gcmerge.semantics import (
    Builtin,
    BuiltinEnv,
    EvalError,
    EvCom,
    EvCond,
    EvSel,
    EvStart,
    eval_expr,
    run,
    step,
)
from gcmerge.syntax import (
    BinOp,
    Chan,
    FnCall,
    Inact,
    IntLit,
    Label,
    Res,
    Sess,
    Sort,
    StrLit,
    Thread,
    Var,
    VarName,
    VBool,
    VFile,
    VInt,
    VStr,
)
from gcmerge.terms import alpha_equal, free_sessions, well_formed
from gcmerge.transform import merge

P = parse_choreography


def test_eval_builtin(env1):
    v, env2 = eval_expr(FnCall("password", ()), env1, Thread("u"))
    assert v == VStr("pwd123")
    assert env2.cursors == {"password": 1}
    assert env1.cursors == {}


def test_eval_literal_and_ops():
    env = BuiltinEnv()
    assert eval_expr(IntLit(3), env, Thread("t"))[0] == VInt(3)
    assert eval_expr(BinOp("add", IntLit(3), IntLit(4)), env, Thread("t"))[0] == VInt(7)
    assert eval_expr(BinOp("concat", StrLit("a"), StrLit("b")), env, Thread("t"))[0] == VStr("ab")
    assert eval_expr(BinOp("eq", IntLit(3), IntLit(3)), env, Thread("t"))[0] == VBool(True)


@pytest.mark.parametrize(
    "expr, kind",
    [
        (Var(VarName("y")), "unbound"),
        (FnCall("nope", ()), "unknown builtin"),
        (BinOp("add", IntLit(1), StrLit("a")), "sort mismatch"),
        (BinOp("eq", IntLit(1), StrLit("a")), "sort mismatch"),
    ],
)
def test_eval_errors(expr, kind):
    with pytest.raises(EvalError) as info:
        eval_expr(expr, BuiltinEnv(), Thread("f"))
    assert info.value.kind == kind


def test_free_binding_is_thread_local(env1):
    assert eval_expr(Var(VarName("file")), env1, Thread("c"))[0] == VFile(b"report.txt")
    with pytest.raises(EvalError):
        eval_expr(Var(VarName("file")), env1, Thread("f"))


def test_cyclic_builtin():
    env = BuiltinEnv({"coin": Builtin((), Sort.BOOL, (VBool(True), VBool(False)))})
    seen = []
    for _ in range(5):
        v, env = eval_expr(FnCall("coin", ()), env, Thread("t"))
        seen.append(v.value)
    assert seen == [True, False, True, False, True]


def test_builtin_rejects_wrong_sort():
    with pytest.raises(ValueError):
        Builtin((), Sort.BOOL, (VInt(1),))
    with pytest.raises(ValueError):
        Builtin((), Sort.BOOL, ())


def test_env_from_json_signature_forms():
    env = BuiltinEnv.from_json(
        {
            "functions": {
                "password": {"sig": ["->", "string"], "values": ["pwd123"]},
                "check": {"sig": ["string", "->", "bool"], "values": [True]},
            },
            "bindings": {"c.file": {"sort": "file", "value": "r.txt"}},
        }
    )
    assert env.signatures() == {"password": ((), Sort.STRING), "check": ((Sort.STRING,), Sort.BOOL)}
    assert env.binding_sorts() == {(Thread("c"), VarName("file")): Sort.FILE}


def test_reduction_chain(env1):
    c = P("start c[C], u[U] on a as k; com u[U].password() -> c[C].pwd over k; com c[C].pwd -> f[F].y over k")
    r1 = step(c, env1)
    assert isinstance(r1.event, EvStart) and r1.event.sess == Sess("k") and r1.event.chan == Chan("a")
    assert r1.term == Res(Sess("k"), P("com u[U].password() -> c[C].pwd over k; com c[C].pwd -> f[F].y over k"))
    r2 = step(r1.term, r1.env)
    assert isinstance(r2.event, EvCom) and r2.event.value == VStr("pwd123")
    assert r2.term == Res(Sess("k"), P('com c[C]."pwd123" -> f[F].y over k'))


def test_step_inact():
    assert step(Inact(), BuiltinEnv()) is None


def test_step_cond():
    r = step(P("if true @ t then com a[P].1 -> b[Q].x over k else 0"), BuiltinEnv())
    assert r.event == EvCond(Thread("t"), True)
    assert r.term == P("com a[P].1 -> b[Q].x over k")


def test_step_error_carries_path():
    with pytest.raises(EvalError) as info:
        step(Res(Sess("k"), P("com a[P].nope() -> b[Q].x over k")), BuiltinEnv())
    assert info.value.path == ("body", "expr")


def _values(trace):
    out = []
    for ev in trace.events:
        if isinstance(ev, EvCom):
            out.append(("com", ev.value))
        elif isinstance(ev, EvSel):
            out.append(("sel", ev.label))
    return out


def test_run_chor1_check_true(chor1):
    # unfold, C|Start on a, C|Com, C|Start on b, C|Com, C|If (true), C|Sel ok
    env = env_with_check([True])
    t = run(chor1, env, 6)
    kinds = [type(e).__name__ for e in t.events]
    assert kinds == ["EvStart", "EvCom", "EvStart", "EvCom", "EvCond", "EvSel"]
    assert t.events[0].chan == Chan("a") and t.events[2].chan == Chan("b")
    assert t.events[1].value == VStr("pwd123") and t.events[3].value == VStr("pwd123")
    assert t.events[4] == EvCond(Thread("f"), True)
    assert t.events[5].label == Label("ok")
    assert t.fuel_exhausted and t.start_count == 2
    # the ok branch has no X: one more com, then the loop is over
    full = run(chor1, env, 100)
    assert len(full.steps) == 7 and not full.fuel_exhausted
    assert full.events[6].value == VFile(b"report.txt")


def test_run_chor1_loops_on_false(chor1):
    t = run(chor1, env_with_check([False]), 24)
    assert t.fuel_exhausted
    assert t.start_count == 8  # two starts per 6-step iteration
    assert all(well_formed(term) == [] for _, term in t.steps)


def test_run_merged_same_values(chor1):
    env = env_with_check([True])
    merged = merge(chor1, Sess("k"), Chan("c"))
    a, b = run(chor1, env, 100), run(merged, env, 100)
    assert _values(a) == _values(b)
    assert a.start_count == 2 and b.start_count == 1


def test_run_empty():
    t = run(Inact(), BuiltinEnv(), 10)
    assert t.steps == [] and not t.fuel_exhausted


def test_run_records_error():
    t = run(P("com a[P].1 -> b[Q].x over k; com b[Q].nope() -> a[P].y over k"), BuiltinEnv(), 10)
    assert len(t.steps) == 1 and t.error is not None and t.error.kind == "unknown builtin"


def test_run_negative_fuel():
    with pytest.raises(ValueError):
        run(Inact(), BuiltinEnv(), -1)


def test_start_introduces_restriction():
    rng = random.Random(5)
    for i in range(100):
        c = random_choreography(rng)
        env = builtin_env(i)
        for _ in range(15):
            try:
                r = step(c, env)
            except EvalError:
                break
            if r is None:
                break
            if isinstance(r.event, EvStart):
                assert r.event.sess not in free_sessions(r.term)
            assert well_formed(r.term) == []
            c, env = r.term, r.env


def test_fuel_prefix(chor1, env1):
    short, long = run(chor1, env1, 5), run(chor1, env1, 9)
    assert short.events == long.events[:5]
    assert all(alpha_equal(a[1], b[1]) for a, b in zip(short.steps, long.steps))
