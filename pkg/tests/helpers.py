"""Random generators shared by the property tests."""

from __future__ import annotations

import random

from katrefine.kat import (
    ONE,
    ZERO,
    Act,
    SymbolTable,
    conj,
    disj,
    lit,
    neg,
    plus,
    seq,
    star,
)


def alphabet(n_tests: int = 3, n_actions: int = 3):
    table = SymbolTable()
    tests = [table.test(chr(ord("a") + i)) for i in range(n_tests)]
    actions = [table.action(chr(ord("A") + i)) for i in range(n_actions)]
    return table, tests, actions


def random_bool(rng: random.Random, tests, depth: int):
    if depth <= 0 or rng.random() < 0.5:
        r = rng.random()
        if r < 0.08:
            return ZERO
        if r < 0.16:
            return ONE
        return lit(rng.choice(tests), rng.random() < 0.6)
    op = rng.choice("and or not".split())
    if op == "not":
        return neg(random_bool(rng, tests, depth - 1))
    parts = [random_bool(rng, tests, depth - 1) for _ in range(2)]
    return conj(*parts) if op == "and" else disj(*parts)


def random_kat(rng: random.Random, tests, actions, depth: int, star_ok: bool = True):
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.55 or not tests:
            return Act(rng.choice(actions))
        if r < 0.9:
            return random_bool(rng, tests, 1)
        return ONE if r < 0.97 else ZERO
    op = rng.choice(["seq", "seq", "sum", "sum"] + ["star"] * star_ok)
    if op == "star":
        return star(random_kat(rng, tests, actions, depth - 1))
    parts = [random_kat(rng, tests, actions, depth - 1, star_ok) for _ in range(2)]
    return seq(*parts) if op == "seq" else plus(*parts)


def random_cond_text(rng: random.Random, variables) -> str:
    x = rng.choice(variables)
    r = rng.random()
    if r < 0.15:
        return x
    if r < 0.25:
        return "!" + x
    op = rng.choice(["<", "<=", "==", "!=", ">=", ">"])
    rhs = str(rng.randint(-2, 2)) if rng.random() < 0.7 else rng.choice(variables)
    text = f"{x} {op} {rhs}"
    if rng.random() < 0.15:
        text = f"{text} && {random_cond_text(rng, variables)}"
    return text


def random_stmt_text(
    rng: random.Random,
    variables,
    events,
    depth: int,
    loops: bool = True,
    bound_loops: bool = False,
    fail: bool = False,
    assume: bool = True,
) -> str:
    """Source text for one random statement over small integer variables."""
    r = rng.random()
    if depth <= 0 or r < 0.45:
        k = rng.random()
        x = rng.choice(variables)
        if k < 0.3:
            return f"{x} = {rng.randint(-2, 2)};"
        if k < 0.45:
            return f"{x} = {rng.choice(variables)} + {rng.randint(-1, 1)};"
        if k < 0.55:
            return f"{x} = nondet();"
        if k < 0.8 and events:
            return f"{rng.choice(events)}();"
        if k < 0.88 and assume:
            return f"assume({random_cond_text(rng, variables)});"
        if k < 0.93 and fail:
            return "fail;"
        return "skip;"
    sub = lambda: random_stmt_text(rng, variables, events, depth - 1, loops, bound_loops, fail, assume)
    k = rng.random()
    if k < 0.5 or not loops:
        els = f" else {{ {sub()} }}" if rng.random() < 0.6 else ""
        return f"if ({random_cond_text(rng, variables)}) {{ {sub()} {sub()} }}{els}"
    if k < 0.8:
        return f"{{ {sub()} {sub()} }}"
    if bound_loops:
        x = rng.choice(variables)
        return f"while ({x} > 0) {{ {sub()} {x} = {x} - 1; }}"
    return f"while ({random_cond_text(rng, variables)}) {{ {sub()} }}"


def random_program_text(rng: random.Random, variables=("x", "y", "z"), events=("A", "B"), n=3, depth=2, **kw) -> str:
    return " ".join(random_stmt_text(rng, list(variables), list(events), depth, **kw) for _ in range(n))


def random_bool_cond_text(rng: random.Random, variables) -> str:
    v = rng.choice(variables)
    r = rng.random()
    if r < 0.35:
        return v
    if r < 0.6:
        return f"!{v}"
    w = rng.choice(variables)
    if r < 0.8:
        return f"{v} == {w}"
    return f"{v} && !{w}"


def random_bool_stmt_text(rng: random.Random, variables, depth: int, fail: bool = True) -> str:
    """A statement over 0/1 variables; loops always flip their own guard."""
    r = rng.random()
    if depth <= 0 or r < 0.45:
        k = rng.random()
        if k < 0.55:
            val = rng.choice(["0", "1", rng.choice(variables), "nondet()"])
            return f"{rng.choice(variables)} = {val};"
        if k < 0.75:
            return f"{rng.choice('AB')}();"
        if k < 0.85 and fail:
            return "fail;"
        return "skip;"
    c = random_bool_cond_text(rng, variables)
    if r < 0.85:
        t = random_bool_stmt_text(rng, variables, depth - 1, fail)
        e = random_bool_stmt_text(rng, variables, depth - 1, fail)
        return f"if ({c}) {{ {t} }} else {{ {e} }}"
    v = rng.choice(variables)
    body = random_bool_stmt_text(rng, variables, depth - 1, fail)
    return f"while ({v}) {{ {body} {v} = 0; }}"


def random_bool_program_text(rng: random.Random, variables=("x", "y"), n: int = 3, depth: int = 2, **kw) -> str:
    return " ".join(random_bool_stmt_text(rng, variables, depth, **kw) for _ in range(n))


# ------------------------------------------------------------- relations


def everything(actions):
    """(A + B + ...)*: every guarded string over the alphabet."""
    return star(plus(*[Act(a) for a in actions]))


def candidate_hyps(tests, actions):
    from katrefine.kat import ActionEq, ActionIsSkip, TestConst

    hs = [ActionIsSkip(a) for a in actions]
    hs += [TestConst(t, v) for t in tests for v in (False, True)]
    hs += [ActionEq(a, b) for i, a in enumerate(actions) for b in actions[i + 1:]]
    return hs


def random_hyps(rng: random.Random, tests, actions, p: float = 0.25):
    from katrefine.kat import HypothesisSet, InconsistentHypotheses, is_consistent

    while True:
        try:
            A = HypothesisSet(h for h in candidate_hyps(tests, actions) if rng.random() < p)
        except InconsistentHypotheses:
            continue
        if is_consistent(A):
            return A


def random_restriction(rng: random.Random, tests, actions):
    """Everything, or everything starting or ending with a random test."""
    T = everything(actions)
    r = rng.random()
    if r < 0.3:
        return T
    b = random_bool(rng, tests, 1)
    return seq(b, T) if r < 0.65 else seq(T, b)


def random_relation(rng: random.Random, k1, k2, tests, actions, direction="le", tries=30):
    """A relation valid for (k1, k2) with projections inside k1 and k2, or None.

    Candidates are one tuple or a two-way split on a random test; the
    first one that verifies is cut down to the programs.
    """
    from katrefine import algebra, synth

    for _ in range(tries):
        T = everything(actions)
        if rng.random() < 0.6:
            lefts = [T]
        else:
            b = random_bool(rng, tests, 1)
            lefts = [seq(b, T), seq(neg(b), T)]
        tuples = [
            algebra.RelTuple(l, random_restriction(rng, tests, actions), random_hyps(rng, tests, actions))
            for l in lefts
        ]
        rel = algebra.TraceRefinementRelation(tuple(tuples), direction)
        if synth.verify_solution(rel, k1, k2):
            return algebra.restrict_to(rel, k1, k2)
    return None


def valid_instance(rng: random.Random, tests, actions, direction="le", depth=3):
    """(k1, k2, T) with T valid for the pair; k2 is k1 about a third of the time."""
    while True:
        k1 = random_kat(rng, tests, actions, depth)
        k2 = k1 if rng.random() < 0.3 else random_kat(rng, tests, actions, depth)
        rel = random_relation(rng, k1, k2, tests, actions, direction)
        if rel is not None:
            return k1, k2, rel


COMPOSITION_OPS = ("seq", "sum", "union", "star", "trans", "context")


def composition_trials(op: str, n: int, seed: int, direction: str = "le", max_tuples=None):
    """Run ``n`` defined random instances of one composition operator.

    Returns (failures, skipped): failures are (composed relation, pair,
    violation) triples; skipped counts draws where the composition was
    undefined or its hypotheses clashed.
    """
    from katrefine import algebra, synth
    from katrefine.kat import InconsistentHypotheses

    rng = random.Random(seed)
    _, tests, actions = alphabet(2, 3)
    failures, skipped, done = [], 0, 0
    while done < n:
        k1, k2, ta = valid_instance(rng, tests, actions, direction)
        if max_tuples is not None and len(ta) > max_tuples:
            continue
        try:
            if op == "star":
                rel, pair = algebra.compose_star(ta), (star(k1), star(k2))
            elif op == "star-merged":
                rel, pair = algebra.compose_star_merged(ta), (star(k1), star(k2))
            elif op == "context":
                m, l = random_kat(rng, tests, actions, 2), random_kat(rng, tests, actions, 2)
                rel, pair = algebra.embed_context(ta, m, l), (seq(m, k1, l), seq(m, k2, l))
            elif op == "trans":
                tb = None
                while tb is None:
                    k3 = random_kat(rng, tests, actions, 3)
                    tb = random_relation(rng, k2, k3, tests, actions, direction)
                rel, pair = algebra.compose_trans(ta, tb), (k1, k3)
                if not rel:
                    skipped += 1
                    continue
            else:
                l1, l2, tb = valid_instance(rng, tests, actions, direction)
                fn = {"seq": algebra.compose_seq, "sum": algebra.compose_sum, "union": algebra.union}[op]
                rel = fn(ta, tb)
                pair = (seq(k1, l1), seq(k2, l2)) if op == "seq" else (plus(k1, l1), plus(k2, l2))
        except InconsistentHypotheses:
            skipped += 1
            continue
        done += 1
        v = synth.verify_solution(rel, *pair)
        if not v:
            failures.append((rel, pair, v))
    return failures, skipped
