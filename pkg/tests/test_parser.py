from __future__ import annotations

import pytest

from conftest import corpus_text
from gcmerge.parser import (
    ParseError,
    format_type,
    parse_choreography,
    parse_global_type,
    parse_type,
    pretty_print,
    tokenize,
)
from gcmerge.syntax import (
    BinOp,
    Call,
    Chan,
    Com,
    Cond,
    Endpoint,
    FileLit,
    FnCall,
    Inact,
    IntLit,
    Label,
    Rec,
    RecVar,
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
from gcmerge.terms import alpha_equal, etas, walk


def ep(t: str, r: str) -> Endpoint:
    return Endpoint(Thread(t), Role(r))


def test_single_com():
    c = parse_choreography("com u[U].password() -> c[C].pwd over k")
    assert c == Seq(Com(ep("u", "U"), FnCall("password", ()), ep("c", "C"), VarName("pwd"), Sess("k")), Inact())


def test_chor1_shape(chor1):
    assert isinstance(chor1, Rec) and chor1.var == RecVar("X")
    kinds = [type(e).__name__ for e in etas(chor1)]
    assert kinds.count("Start") == 2
    assert kinds.count("Com") == 3
    assert kinds.count("Sel") == 2
    assert sum(isinstance(n, Cond) for n in walk(chor1)) == 1
    assert sum(isinstance(n, Call) for n in walk(chor1)) == 1


def test_start_participants(chor1):
    start = chor1.body.eta
    assert start == Start((ep("c", "C"), ep("u", "U")), Chan("a"), Sess("k"))


def test_expressions():
    c = parse_choreography(
        'com a[P].(x + 1) -> b[Q].y over k; com b[Q].("s" ++ "t") -> a[P].z over k; com a[P].b"f.txt" -> b[Q].w over k'
    )
    exprs = [e.expr for e in etas(c)]
    assert exprs[0] == BinOp("add", Var(VarName("x")), IntLit(1))
    assert exprs[1] == BinOp("concat", StrLit("s"), StrLit("t"))
    assert exprs[2] == FileLit(b"f.txt")


def test_sel_and_cond():
    c = parse_choreography("if x == 1 @ a then sel a[P] -> b[Q] : ok over k else 0")
    assert isinstance(c, Cond) and c.at == Thread("a")
    assert c.then == Seq(Sel(ep("a", "P"), ep("b", "Q"), Sess("k"), Label("ok")), Inact())
    assert c.orelse == Inact()


def test_protocols_ga_gb():
    ps = parse_global_type(corpus_text("ab.gt"))
    assert list(ps) == ["Ga", "Gb"]
    assert ps["Ga"] == TCom(Role("U"), Role("C"), Sort.STRING, TEnd())
    gb = ps["Gb"]
    assert gb == TCom(
        Role("C"),
        Role("F"),
        Sort.STRING,
        TChoice(
            Role("F"),
            Role("C"),
            ((Label("ok"), TCom(Role("C"), Role("F"), Sort.FILE, TEnd())), (Label("quit"), TEnd())),
        ),
    )


def test_type_round_trip(protocols):
    for g in protocols.values():
        assert parse_type(format_type(g)) == g


@pytest.mark.parametrize("name", ["chor1.gc", "chor2.gc"])
def test_pretty_round_trip(name):
    c = parse_choreography(corpus_text(name))
    assert alpha_equal(parse_choreography(pretty_print(c)), c)


def test_comments_and_whitespace():
    c = parse_choreography("// leading\n  com a[P].1 -> b[Q].x over k; // trailing\n 0")
    assert isinstance(c, Seq)


def test_tokens_carry_positions():
    toks = tokenize("com\n  a")
    assert [(t.line, t.col) for t in toks[:2]] == [(1, 1), (2, 3)]


@pytest.mark.parametrize(
    "text, line, col, expected",
    [
        ("com u[U].password( -> c[C].pwd over k", 1, 20, {"expression"}),
        ("start c[C] on a as k; 0", 1, 12, {"','"}),
        ("sel a[P] -> b[Q] ok over k", 1, 18, {"':'"}),
        ("if x @ a then 0", 1, 16, {"'else'"}),
        ("rec X { 0 ", 1, 11, {"'}'"}),
    ],
)
def test_parse_error_positions(text, line, col, expected):
    with pytest.raises(ParseError) as info:
        parse_choreography(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert set(info.value.expected) == expected


def test_bad_character_position():
    with pytest.raises(ParseError) as info:
        parse_choreography('\n\n   com a[P]."x -> b[Q].y over k')
    assert (info.value.line, info.value.col) == (3, 13)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("protocol A { U -> U : <int> }", "communicates with itself"),
        ("protocol A { end } protocol A { end }", "duplicate protocol"),
        ("protocol A { rec t . t }", "non-contractive"),
        ("protocol A { P -> Q { l: end, l: end } }", "duplicate branch label"),
        ("protocol A { P -> Q : <real> }", "unknown sort"),
    ],
)
def test_protocol_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_global_type(text)


def test_origin_in_message():
    with pytest.raises(ParseError, match=r"^x\.gc:1:"):
        parse_choreography("com", origin="x.gc")
