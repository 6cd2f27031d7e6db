import random

import pytest

from katrefine import automata, lang, oracle
from katrefine import translate as T
from katrefine.kat import ONE, ZERO, SymbolTable, act, conj, lit, parse_kat, plus, seq
from katrefine.lang import parse_statements

from helpers import random_bool_program_text


def test_skip_keeps_store():
    p = parse_statements("skip;")
    assert oracle.bigstep(p, {"x": 3}) == {oracle.Final((("x", 3),), ())}


def test_branch_trace():
    p = parse_statements("if (x > 0) evA(); else evB();")
    (out,) = oracle.bigstep(p, {"x": 1})
    assert out.trace == ("evA",)


def test_blocked_assume_and_fail():
    assert oracle.bigstep(parse_statements("assume(x > 0);"), {"x": 0}) == set()
    assert oracle.bigstep(parse_statements("A(); fail;"), {}) == {oracle.Fault(("A",))}


def test_running_example_trace_is_in_translation():
    text = open(__file__.replace("test_oracle.py", "data/server.c")).read()
    bf = lang.parse_file_text(text)
    alpha = T.build_abstraction(bf.c1, bf.c2)
    ga = automata.compile(T.translate(bf.c1, alpha).expr)
    runs = [
        r
        for r in oracle.executions(bf.c1, {"x": 1, "l": 0}, event_results=(1,))
        if isinstance(r.outcome, oracle.Final)
    ]
    assert [r.outcome.trace for r in runs] == [("recv", "constructReply", "send")]
    envs, acts = oracle.guarded_string(alpha, "C1", runs[0])
    assert automata.accepts_env_string(ga, envs, acts)


def test_concrete_refinement_basics():
    c = parse_statements("if (x) { y = 1; } else { A(); }")
    assert oracle.concrete_refines(c, c, ["x", "y"])
    faulty = parse_statements("if (x) { fail; } else { A(); }")
    v = oracle.concrete_refines(faulty, c, ["x", "y"])
    assert not v and v.witness[1] == "fault"
    # c2 faulting excuses any behaviour of c1
    assert oracle.concrete_refines(c, parse_statements("fail;"), ["x", "y"])
    # a nondeterministic choice refines into one of its outcomes, not back
    nd = parse_statements("y = nondet();")
    one = parse_statements("y = 1;")
    assert oracle.concrete_refines(one, nd, ["x", "y"])
    assert not oracle.concrete_refines(nd, one, ["x", "y"])


def test_domain_too_large():
    c = parse_statements("skip;")
    with pytest.raises(oracle.DomainTooLarge):
        oracle.concrete_refines(c, c, list("abcdefghijklm"), values=range(3))


def test_kat_refinement_basics():
    t = SymbolTable()
    k = parse_kat("a·A·!a + !a·B·a", t)
    assert oracle.kat_concrete_refines(k, k)
    a = [t.lookup("test", "a")]
    # an everywhere-faulting k2 excuses anything; k1 = 0 needs k2 to fault too
    assert oracle.kat_concrete_refines(k, ZERO, a)
    assert oracle.kat_concrete_refines(ZERO, ZERO, a)
    assert not oracle.kat_concrete_refines(ZERO, k, a)
    k2 = parse_kat("a·A·a + !a·B·a", t)
    v = oracle.kat_concrete_refines(k, k2)
    assert not v and v.reason.startswith("k1 reaches")


def _endpoints_by_language(k, tests):
    """Start/end atom pairs read off bounded language enumeration."""
    lang_ = automata.enumerate_language(k, 8, tests)
    rel = {}
    for s in lang_:
        rel.setdefault(s[0], set()).add(s[-1])
    return rel


def test_endpoint_relation_matches_enumeration():
    rng = random.Random(11)
    from helpers import alphabet, random_kat

    _, tests, actions = alphabet(2, 2)
    ids = [t.id for t in tests]
    envs = list(automata.atoms(ids))
    scope = automata._scope(ZERO, tests)
    masks = {}
    for m in range(1 << len(scope)):
        env = automata._atom_env(m, scope)
        masks[m] = next(i for i, e in enumerate(envs) if e == env)
    for _ in range(80):
        # no stars: the bounded language is then complete
        k = random_kat(rng, tests, actions, 3, star_ok=False)
        got = {i: automata.endpoints(automata.compile(k), envs[i], envs) for i in range(len(envs))}
        want = _endpoints_by_language(k, tests)
        for m, i in masks.items():
            assert got[i] == {masks[e] for e in want.get(m, ())}


def _qualifying_pairs(rng, wanted):
    variables = ("x", "y")
    pairs, tried = [], 0
    while len(pairs) < wanted and tried < 20 * wanted:
        tried += 1
        t1 = random_bool_program_text(rng, variables, n=rng.randint(1, 3))
        if rng.random() < 0.5:
            t2 = random_bool_program_text(rng, variables, n=rng.randint(1, 3))
        else:
            # a nearby program: same text with one extra statement
            t2 = t1 + " " + random_bool_program_text(rng, variables, n=1, depth=1)
        c1, c2 = parse_statements(t1), parse_statements(t2, "C2")
        if oracle.well_behaved(c1, variables) and oracle.well_behaved(c2, variables):
            pairs.append((c1, c2))
    return pairs, tried


def test_program_and_kat_refinement_agree():
    rng = random.Random(42)
    pairs, tried = _qualifying_pairs(rng, 220)
    assert len(pairs) >= 200, f"only {len(pairs)} of {tried} pairs qualified"
    verdicts = {True: 0, False: 0}
    for c1, c2 in pairs:
        ab = oracle.BooleanAbstraction(("x", "y"))
        k1 = oracle.exact_translation(c1, ab)
        k2 = oracle.exact_translation(c2, ab)
        concrete = bool(oracle.concrete_refines(c1, c2, ("x", "y")))
        abstract = bool(oracle.kat_concrete_refines(k1, k2, ab.tests))
        assert concrete == abstract, (lang.pretty_stmt(c1.body), lang.pretty_stmt(c2.body))
        verdicts[concrete] += 1
    # both verdicts must be well represented for the agreement to mean much
    assert min(verdicts.values()) >= 30, verdicts


def test_exact_translation_is_strongly_valid():
    rng = random.Random(3)
    variables = ("x", "y")
    checked = 0
    while checked < 40:
        p = parse_statements(random_bool_program_text(rng, variables, n=2))
        if not oracle.well_behaved(p, variables):
            continue
        checked += 1
        ab = oracle.BooleanAbstraction(variables)
        ga = automata.compile(oracle.exact_translation(p, ab))
        envs = [ab.env(s) for s in ab.stores]
        for i, sigma in enumerate(ab.stores):
            finals = {
                o.store for o in oracle.bigstep(p, sigma, choices=(0, 1)) if isinstance(o, oracle.Final)
            }
            want = {j for j, rho in enumerate(ab.stores) if oracle.freeze(rho) in finals}
            assert automata.endpoints(ga, envs[i], envs) == want
