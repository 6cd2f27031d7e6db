import random

import numpy as np
import pytest

from helpers import alphabet, random_kat
from katrefine.automata import (
    EQUIVALENCE,
    INCLUSION,
    AlphabetTooLarge,
    Counterexamples,
    automaton_language,
    check,
    compile,
    enumerate_language,
    equivalent,
    extract_cex,
    included,
    intersect,
    is_counterexample,
    is_empty,
    member,
)
from katrefine.kat import (
    EMPTY_HYPS,
    ONE,
    ZERO,
    SymbolTable,
    parse_hypotheses,
    parse_kat,
    plus,
    seq,
    star,
)


@pytest.fixture
def table():
    return SymbolTable()


def test_zero_has_empty_language(table):
    assert is_empty(ZERO)
    assert enumerate_language(ZERO, 3) == frozenset()


def test_single_action_language(table):
    E = parse_kat("E", table)
    b = table.test("b")
    lang = enumerate_language(E, 2, [b])
    assert len(lang) == 4
    assert lang == automaton_language(E, 2, [b])
    assert lang == {(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1)}


def test_one_gives_all_atoms(table):
    b, c = table.test("b"), table.test("c")
    assert enumerate_language(ONE, 0, [b, c]) == {(0,), (1,), (2,), (3,)}


def test_guarded_action(table):
    e = parse_kat("b·O", table)
    assert enumerate_language(e, 1) == {(1, 0, 0), (1, 0, 1)}


def test_loop_matches_enumeration(table):
    e = parse_kat("(b·O + !b·1)*", table)
    assert enumerate_language(e, 3) == automaton_language(e, 3)


def test_katdiff_worked_example(table):
    k1 = parse_kat("a·M·(b·F + !b·G)", table)
    k2 = parse_kat("a·M·!b·G", table)
    res = check(k1, k2, EMPTY_HYPS, INCLUSION)
    assert isinstance(res, Counterexamples)
    assert str(res.left_not_right) == "a·M·b·F"


def test_reflexive(table):
    e = parse_kat("(a·(E·(b·O + !b)·X))*·!a", table)
    assert check(e, e, EMPTY_HYPS, EQUIVALENCE)
    assert check(e, e, parse_hypotheses("E=1", table), EQUIVALENCE)


def test_restricted_running_example_equal_under_check_skip(table):
    left = parse_kat("(a·(E·(c·C·S)·X))*·!a", table)
    right = parse_kat("(a·(E·(c·K·C·S)·X))*·!a", table)
    assert not check(left, right, EMPTY_HYPS, EQUIVALENCE)
    assert check(right, left, parse_hypotheses("K=1", table), EQUIVALENCE)


def test_running_example_shortest_cex(table):
    k1 = parse_kat("(a·(E·(b·O + !b)·(c·C·S·(b·L + !b) + !c)·X))*·!a", table)
    k2 = parse_kat("(a·(E·(c·K·(d·C·S + !d) + !c·O)·X))*·!a", table)
    w = extract_cex(compile(k1), compile(k2))
    # the shortest witness skips the log that C2 performs when m <= 0
    assert str(w) == "a·E·!b·!c·X·!a"
    assert is_counterexample(w, k1, k2)
    back = extract_cex(compile(k2), compile(k1))
    assert is_counterexample(back, k2, k1)


def test_intersection_examples(table):
    e = parse_kat("(a·(E·(b·O + !b)·X))*·!a", table)
    assert equivalent(intersect(e, e), e)
    assert intersect(e, ZERO) is ZERO


def test_intersection_with_restriction(table):
    k1 = parse_kat("(a·(E·(b·O + !b)·(c·C·S·(b·L + !b) + !c)·X))*·!a", table)
    r1 = parse_kat("(a·(Any·!b))*·!a", table)
    restricted = intersect(k1, r1)
    scope, acts = table.tests, table.actions
    lang = enumerate_language(restricted, 4, scope, acts)
    assert lang == enumerate_language(k1, 4, scope, acts) & enumerate_language(r1, 4, scope, acts)
    # restricting to !b after every event removes both log events
    names = {str(lang.actions[i]) for layer in lang.layers[1:] for i in set(np.nonzero(layer)[1])}
    assert not names & {"O", "L"}
    assert included(restricted, k1)


def test_enumeration_alphabet_limit(table):
    e = parse_kat("a b c d e f g", table)
    with pytest.raises(AlphabetTooLarge):
        enumerate_language(e, 1)


def _random_pairs(n, seed, depth=4):
    rng = random.Random(seed)
    table, tests, actions = alphabet(3, 3)
    for _ in range(n):
        yield (tests, actions), random_kat(rng, tests, actions, depth), random_kat(rng, tests, actions, depth)


def test_automaton_agrees_with_enumeration():
    for (tests, actions), e, _ in _random_pairs(200, 1):
        assert enumerate_language(e, 3, tests, actions) == automaton_language(e, 3, tests, actions)


def test_check_never_contradicts_bounded_evidence():
    for (tests, actions), e1, e2 in _random_pairs(200, 2):
        l1 = enumerate_language(e1, 3, tests, actions)
        l2 = enumerate_language(e2, 3, tests, actions)
        res = check(e1, e2, EMPTY_HYPS, INCLUSION)
        if res:
            assert l1 <= l2
        else:
            w = res.left_not_right
            assert is_counterexample(w, e1, e2)
            assert member(w, e1) and not member(w, e2)


def test_counterexamples_are_shortest():
    for (tests, actions), e1, e2 in _random_pairs(150, 3):
        res = check(e1, e2, EMPTY_HYPS, INCLUSION)
        if res:
            continue
        n = len(res.left_not_right.actions)
        if n == 0 or n > 3:
            continue
        l1 = enumerate_language(e1, n - 1, tests, actions)
        l2 = enumerate_language(e2, n - 1, tests, actions)
        assert l1 <= l2


def test_intersection_properties():
    for (tests, actions), e1, e2 in _random_pairs(120, 4, depth=3):
        i12 = intersect(e1, e2)
        assert enumerate_language(i12, 3, tests, actions) == (
            enumerate_language(e1, 3, tests, actions) & enumerate_language(e2, 3, tests, actions)
        )
        assert included(i12, e1) and included(i12, e2)
        assert equivalent(i12, intersect(e2, e1))


def test_distribution_lemmas():
    rng = random.Random(9)
    table, tests, actions = alphabet(2, 3)
    for _ in range(60):
        k, o, l, p = (random_kat(rng, tests, actions, 2) for _ in range(4))
        lhs = seq(intersect(k, o), intersect(l, p))
        assert included(lhs, intersect(seq(k, l), seq(o, p)))
        assert included(star(intersect(k, o)), intersect(star(k), star(o)))


def test_dump_format(table):
    text = compile(parse_kat("a·M·(b·F + !b·G)", table)).dump()
    assert text.splitlines()[0].startswith("state 0 accept 0")
    assert "b F -> 2" in text
