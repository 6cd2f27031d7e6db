import random

import pytest

from katrefine import lang
from katrefine.lang import (
    Assume,
    EventCall,
    If,
    Location,
    Num,
    Rel,
    Seq,
    Skip,
    Var,
    While,
    instrument,
    parse,
    pretty,
)

from helpers import random_program_text

SERVER = """
---
left: C2
---
void c1() {
  while (x > 0) {
    m = recv();
    if (l) log(m);
    if (m > 0) {
      n = constructReply();
      send(n);
      if (l) log(n);
    }
    x--;
  }
}
void c2() {
  while (x > 0) {
    m = recv();
    if (m > 0) {
      auth = check(m);
      if (auth > 0) {
        n = constructReply();
        send(n);
      }
    } else { log(m); }
    x--;
  }
}
"""


def test_server_shape():
    bf = lang.parse_file_text(SERVER)
    assert bf.config == {"left": "C2"}
    assert bf.left is bf.c2
    loop = bf.c1.body
    assert isinstance(loop, While)
    body = loop.body
    assert isinstance(body, Seq) and len(body.stmts) == 4
    recv, log_if, send_if, dec = body.stmts
    assert isinstance(recv, EventCall) and recv.name == "recv" and recv.result == "m"
    assert isinstance(log_if, If) and isinstance(log_if.els, Skip)
    assert isinstance(send_if, If) and len(send_if.then.stmts) == 3
    assert lang.show_simple(dec) == "x = x - 1;"


def test_empty_block_is_skip():
    assert isinstance(parse("void f() {}").body, Skip)
    assert isinstance(parse("{ }").body, Skip)


def test_assume_sequence():
    p = parse("assume(d==0); c=d; if (c==0) execB(); else execD();")
    assert isinstance(p.body, Seq) and len(p.body.stmts) == 3
    assert isinstance(p.body.stmts[0], Assume)
    assert isinstance(p.body.stmts[2], If)


def test_locations_unique():
    bf = lang.parse_file_text(SERVER)
    for prog in (bf.c1, bf.c2):
        locs = prog.locations()
        assert len(locs) == len(set(locs))
        assert sorted(locs) == sorted(locs, key=lambda l: (l.path, l.tag))


@pytest.mark.parametrize(
    "src, where",
    [
        ("x = ;", (1, 5)),
        ("if (x > 0 { y = 1; }", (1, 11)),
        ("void f() { x = 1;", None),
        ("x = 1 $ 2;", (1, 7)),
    ],
)
def test_syntax_errors_carry_position(src, where):
    with pytest.raises(lang.LangSyntaxError) as info:
        parse(src)
    if where:
        assert (info.value.line, info.value.column) == where


def test_calls_to_defined_functions_rejected():
    with pytest.raises(lang.LangSyntaxError):
        lang.parse_file_text("void f() { g(); } void g() { skip; }")


def test_conditions():
    p = parse("if (!(x > 0) || y && z != 1) skip;")
    assert lang.show_cond(p.body.cond) == "!(x > 0) || y && z != 1"
    assert lang.negate_cond(Rel("<", Var("x"), Num(0))) == Rel(">=", Var("x"), Num(0))


def test_pretty_roundtrip_random():
    rng = random.Random(7)
    for _ in range(300):
        text = random_program_text(rng, n=rng.randint(1, 4), depth=3)
        p = parse(text)
        printed = pretty(p)
        q = parse(printed)
        assert q.body == p.body, text
        assert pretty(q) == printed


def test_instrument_loop_head_and_before_statement():
    bf = lang.parse_file_text(SERVER)
    auth_if = Location("C2", (0, 1, 0, 1))
    out = instrument(
        bf.c2,
        [(Location("C2"), Rel("==", Var("l"), Num(1))), (auth_if, Rel(">", Var("auth"), Num(0)))],
    )
    text = pretty(out)
    assert "    while (x > 0) {\n        assume(l == 1);\n        m = recv();" in text
    assert "auth = check(m);\n            assume(auth > 0);\n            if (auth > 0)" in text
    # original locations survive
    for loc in bf.c2.locations():
        assert type(out.at(loc)) is type(bf.c2.at(loc))


def test_instrument_commutes_and_is_idempotent():
    rng = random.Random(3)
    for _ in range(100):
        p = parse(random_program_text(rng, n=3, depth=2))
        locs = p.locations()
        asms = [(rng.choice(locs), Rel(">", Var(rng.choice("xyz")), Num(rng.randint(-1, 1)))) for _ in range(3)]
        once = instrument(p, asms)
        assert instrument(p, list(reversed(asms))) == once
        stepwise = p
        for a in asms:
            stepwise = instrument(stepwise, [a])
        assert stepwise == once
        assert instrument(once, asms) == once
        assert instrument(p, []) == p


def test_instrument_unknown_location():
    p = parse("x = 1;")
    with pytest.raises(lang.UnknownLocation):
        instrument(p, [(Location("C1", (5,)), Rel(">", Var("x"), Num(0)))])
