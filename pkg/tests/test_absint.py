import itertools
import random

from katrefine import absint, lang, oracle
from katrefine.absint import INF, AbstractState, Interval, Truth, analyze, eval_cond
from katrefine.lang import Location, Num, Rel, Var, parse

from helpers import random_program_text


def test_assume_then_copy_makes_branch_constant():
    p = parse("assume(d==0); c=d; if (c==0) execB(); else execD();")
    inv = analyze(p)
    at_if = inv[Location("C1", (2,))]
    assert at_if["c"] == Interval(0, 0)
    assert eval_cond(at_if, p.body.stmts[2].cond) is Truth.TRUE
    assert inv[Location("C1", (2, 1))] is None


def test_nondet_is_top():
    inv = analyze(parse("x = 5; x = nondet();"))
    assert inv.exit["x"].is_top


def test_infinite_loop_exit_is_bottom():
    p = parse("i=0; while(true) i=i+1;")
    inv = analyze(p)
    assert inv.exit is None
    assert inv.loop_head(Location("C1", (1,)))["i"] == Interval(0, INF)


def test_counting_loop_narrows():
    inv = analyze(parse("i = 0; while (i < 10) { i = i + 1; } y = i;"))
    assert inv.exit["y"] == Interval(10, 10)
    assert inv[Location("C1", (1, 0))]["i"] == Interval(0, 9)


def test_eval_cond_cases():
    s = AbstractState({"x": Interval(1, 5)})
    assert eval_cond(s, Rel(">", Var("x"), Num(0))) is Truth.TRUE
    assert eval_cond(s, Rel("<", Var("x"), Num(1))) is Truth.FALSE
    assert eval_cond(s, Rel("==", Var("x"), Num(3))) is Truth.UNKNOWN
    assert eval_cond(None, Rel("==", Var("x"), Num(3))) is Truth.UNREACHABLE
    both = lang.parse("if (x > 2 && x < 1) skip;").body.cond
    assert eval_cond(AbstractState(), both) is Truth.FALSE
    taut = lang.parse("if (x > 0 || x <= 0) skip;").body.cond
    assert eval_cond(AbstractState(), taut) is Truth.TRUE


def test_refine_not_equal_trims_endpoint():
    s = AbstractState({"x": Interval(0, 3)})
    assert absint.refine(s, Rel("!=", Var("x"), Num(0)))["x"] == Interval(1, 3)
    assert absint.refine(AbstractState({"x": Interval(2, 2)}), Rel("!=", Var("x"), Num(2))) is None
    assert absint.refine(s, Rel("<", Num(1), Var("x")))["x"] == Interval(2, 3)


def _soundness_case(rng):
    text = random_program_text(rng, n=rng.randint(1, 4), depth=2, bound_loops=True)
    p = parse(text)
    inv = analyze(p)
    seen: dict = {}

    def observe(loc, store):
        seen.setdefault(loc, set()).add(store)

    for x, y, z in itertools.product((-4, 0, 3), repeat=3):
        for run in oracle.executions(p, {"x": x, "y": y, "z": z}, fuel=40, choices=(-4, 0, 4), observe=observe):
            if isinstance(run.outcome, oracle.Final):
                assert absint.contains(inv.exit, dict(run.outcome.store)), text
    for loc, stores in seen.items():
        for st in stores:
            assert absint.contains(inv[loc], dict(st)), (text, loc, st, inv[loc])


def test_soundness_against_interpreter():
    rng = random.Random(11)
    for _ in range(150):
        _soundness_case(rng)


def test_stronger_entry_assume_never_widens():
    rng = random.Random(5)
    for _ in range(100):
        body = random_program_text(rng, n=3, depth=2, bound_loops=True)
        weak = parse(f"assume(x >= -3); {body}")
        strong = parse(f"assume(x >= 0); {body}")
        iw, is_ = analyze(weak), analyze(strong)
        for loc in weak.locations():
            assert absint.leq(is_[loc], iw[loc]), (body, loc)
