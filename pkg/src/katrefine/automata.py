"""Guarded-string automata for KAT expressions.

States are partial derivatives (Antimirov style), so compilation needs no
atom enumeration.  Atoms are enumerated lazily during comparison, and only
over the tests that the states at hand actually mention.
"""

from __future__ import annotations

import itertools

import numpy as np
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

from .kat import (
    ONE,
    ZERO,
    Act,
    And,
    BoolExpr,
    CexString,
    EMPTY_HYPS,
    HypothesisSet,
    KatExpr,
    Literal,
    Not,
    Or,
    Seq,
    Star,
    Sum,
    Symbol,
    Test,
    conj,
    disj,
    plus,
    rewrite_under_hypotheses,
    seq,
    show,
    star,
    tests_of,
    actions_of,
)

INCLUSION = "le"
EQUIVALENCE = "eq"


class AlphabetTooLarge(ValueError):
    pass


# ---------------------------------------------------------------- derivatives


@lru_cache(maxsize=200_000)
def accept_guard(e: KatExpr) -> BoolExpr:
    """The test under which e accepts the empty (single-atom) string."""
    if e.is_bool:
        return e
    if isinstance(e, Act):
        return ZERO
    if isinstance(e, Sum):
        return disj(*(accept_guard(a) for a in e.args))
    if isinstance(e, Seq):
        return conj(*(accept_guard(a) for a in e.args))
    if isinstance(e, Star):
        return ONE
    raise TypeError(f"unexpected node {e!r}")


Deriv = tuple[BoolExpr, Symbol, KatExpr]


@lru_cache(maxsize=200_000)
def derivatives(e: KatExpr) -> tuple[Deriv, ...]:
    """Partial derivatives: (guard, action, residual) triples, merged and sorted."""
    raw: list[Deriv] = []
    _derive(e, raw)
    merged: dict[tuple[Symbol, KatExpr], list[BoolExpr]] = {}
    for g, a, t in raw:
        if g is ZERO or t is ZERO:
            continue
        merged.setdefault((a, t), []).append(g)
    out = []
    for (a, t), gs in merged.items():
        g = disj(*gs)
        if g is not ZERO:
            out.append((g, a, t))
    out.sort(key=lambda d: (d[1].id, d[2]._key))
    return tuple(out)


def _derive(e: KatExpr, out: list[Deriv]) -> None:
    if e.is_bool:
        return
    if isinstance(e, Act):
        out.append((ONE, e.sym, ONE))
    elif isinstance(e, Sum):
        for a in e.args:
            out.extend(derivatives(a))
    elif isinstance(e, Seq):
        head, rest = e.args[0], seq(*e.args[1:])
        for g, a, t in derivatives(head):
            out.append((g, a, seq(t, rest)))
        eps = accept_guard(head)
        if eps is not ZERO:
            for g, a, t in derivatives(rest):
                out.append((conj(eps, g), a, t))
    elif isinstance(e, Star):
        for g, a, t in derivatives(e.arg):
            out.append((g, a, seq(t, e)))
    else:
        raise TypeError(f"unexpected node {e!r}")


# ------------------------------------------------------------ guard evaluation

Env = dict  # test id -> bool


@lru_cache(maxsize=200_000)
def guard_fn(g: BoolExpr) -> Callable[[Env], bool]:
    if g is ONE:
        return lambda env: True
    if g is ZERO:
        return lambda env: False
    if isinstance(g, Test):
        tid = g.sym.id
        return lambda env: env[tid]
    if isinstance(g, Not):
        f = guard_fn(g.arg)
        return lambda env: not f(env)
    if isinstance(g, And):
        fs = tuple(guard_fn(a) for a in g.args)
        return lambda env: all(f(env) for f in fs)
    if isinstance(g, Or):
        fs = tuple(guard_fn(a) for a in g.args)
        return lambda env: any(f(env) for f in fs)
    raise TypeError(f"not a boolean expression: {g!r}")


def holds(g: BoolExpr, env: Env) -> bool:
    return guard_fn(g)(env)


def satisfiable(g: BoolExpr) -> bool:
    if g is ONE:
        return True
    if g is ZERO:
        return False
    ts = [t.id for t in tests_of(g)]
    f = guard_fn(g)
    return any(f(dict(zip(ts, vals))) for vals in itertools.product((True, False), repeat=len(ts)))


def atoms(test_ids: Sequence[int]) -> Iterable[Env]:
    """All assignments in a fixed order: positive before negative, by id."""
    for vals in itertools.product((True, False), repeat=len(test_ids)):
        yield dict(zip(test_ids, vals))


# ------------------------------------------------------------------ automata


@dataclass(frozen=True)
class GuardedAutomaton:
    exprs: tuple[KatExpr, ...]
    accept: tuple[BoolExpr, ...]
    transitions: tuple[tuple[Deriv, ...], ...]  # targets are state indexes
    state_tests: tuple[tuple[int, ...], ...]
    initial: int = 0

    @property
    def states(self) -> range:
        return range(len(self.exprs))

    def dump(self) -> str:
        lines = []
        for q in self.states:
            lines.append(f"state {q} accept {show(self.accept[q])}  ; {show(self.exprs[q])}")
            for g, a, t in self.transitions[q]:
                lines.append(f"  {show(g)} {a} -> {t}")
        return "\n".join(lines) + "\n"

    def tests_of_states(self, qs: Iterable[int]) -> tuple[int, ...]:
        ids: set[int] = set()
        for q in qs:
            ids.update(self.state_tests[q])
        return tuple(sorted(ids))


def _guard_tests(*gs: BoolExpr) -> tuple[int, ...]:
    ids: set[int] = set()
    for g in gs:
        ids.update(t.id for t in tests_of(g))
    return tuple(sorted(ids))


@lru_cache(maxsize=4096)
def compile(e: KatExpr) -> GuardedAutomaton:
    index: dict[KatExpr, int] = {e: 0}
    order = [e]
    trans: list[tuple[Deriv, ...]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for g, a, t in derivatives(cur):
            if t not in index:
                index[t] = len(order)
                order.append(t)
            row.append((g, a, index[t]))
        trans.append(tuple(row))
        i += 1
    accept = tuple(accept_guard(x) for x in order)
    st = tuple(
        _guard_tests(accept[q], *(g for g, _, _ in trans[q])) for q in range(len(order))
    )
    return GuardedAutomaton(tuple(order), accept, tuple(trans), st)


def _step(ga: GuardedAutomaton, qs: frozenset[int], env: Env) -> dict[Symbol, set[int]]:
    nxt: dict[Symbol, set[int]] = {}
    for q in qs:
        for g, a, t in ga.transitions[q]:
            if holds(g, env):
                nxt.setdefault(a, set()).add(t)
    return nxt


def _accepts(ga: GuardedAutomaton, qs: frozenset[int], env: Env) -> bool:
    return any(holds(ga.accept[q], env) for q in qs)


def _literals(test_ids: Sequence[int], env: Env, by_id: dict[int, Symbol]) -> list[Literal]:
    return [Literal(by_id[t], env[t]) for t in test_ids]


def _symbol_index(*gas: GuardedAutomaton) -> dict[int, Symbol]:
    out: dict[int, Symbol] = {}
    for ga in gas:
        for e in ga.exprs:
            for t in tests_of(e):
                out[t.id] = t
    return out


def extract_cex(ga1: GuardedAutomaton, ga2: GuardedAutomaton) -> Optional[CexString]:
    """A shortest, then lexicographically least, string in L(ga1) minus L(ga2)."""
    by_id = _symbol_index(ga1, ga2)
    start = (frozenset((ga1.initial,)), frozenset((ga2.initial,)))
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (s1, s2), path = queue.popleft()
        rel = tuple(sorted(set(ga1.tests_of_states(s1)) | set(ga2.tests_of_states(s2))))
        successors = []
        for env in atoms(rel):
            if _accepts(ga1, s1, env) and not _accepts(ga2, s2, env):
                return CexString(path + tuple(_literals(rel, env, by_id)))
            n1 = _step(ga1, s1, env)
            if not n1:
                continue
            n2 = _step(ga2, s2, env)
            lits = tuple(_literals(rel, env, by_id))
            for a in sorted(n1):
                successors.append(
                    ((frozenset(n1[a]), frozenset(n2.get(a, ()))), path + lits + (a,))
                )
        for pair, p in successors:
            if pair not in seen:
                seen.add(pair)
                queue.append((pair, p))
    return None


def accepting_strings(
    ga: GuardedAutomaton, max_actions: int, limit: int
) -> list[CexString]:
    """Up to ``limit`` accepted strings in shortest-first order.

    Literals mention only the tests relevant to the visited states, as in
    counterexamples, so every string returned stands for a set of guarded
    strings that are all accepted.
    """
    by_id = _symbol_index(ga)
    out: list[CexString] = []
    queue = deque([(frozenset((ga.initial,)), (), 0)])
    while queue and len(out) < limit:
        qs, path, n = queue.popleft()
        rel = ga.tests_of_states(qs)
        for env in atoms(rel):
            lits = tuple(_literals(rel, env, by_id))
            if _accepts(ga, qs, env):
                out.append(CexString(path + lits))
                if len(out) >= limit:
                    break
            if n >= max_actions:
                continue
            nxt = _step(ga, qs, env)
            for a in sorted(nxt):
                queue.append((frozenset(nxt[a]), path + lits + (a,), n + 1))
    return out


# ----------------------------------------------------- inclusion / equivalence


@dataclass(frozen=True)
class Ok:
    def __bool__(self):
        return True

    def __str__(self):
        return "Ok"


@dataclass(frozen=True)
class Counterexamples:
    direction: str
    left_not_right: Optional[CexString] = None
    right_not_left: Optional[CexString] = None

    def __post_init__(self):
        if self.left_not_right is None and self.right_not_left is None:
            raise ValueError("a failure carries at least one counterexample")

    def __bool__(self):
        return False

    def __str__(self):
        parts = []
        if self.left_not_right is not None:
            parts.append(f"left-not-right: {self.left_not_right}")
        if self.right_not_left is not None:
            parts.append(f"right-not-left: {self.right_not_left}")
        return "; ".join(parts)


def check(
    e1: KatExpr,
    e2: KatExpr,
    A: HypothesisSet = EMPTY_HYPS,
    direction: str = INCLUSION,
) -> Ok | Counterexamples:
    if direction not in (INCLUSION, EQUIVALENCE):
        raise ValueError(f"unknown direction {direction!r}")
    r1 = rewrite_under_hypotheses(e1, A)
    r2 = rewrite_under_hypotheses(e2, A)
    if r1 == r2:
        return Ok()
    g1, g2 = compile(r1), compile(r2)
    left = extract_cex(g1, g2)
    right = extract_cex(g2, g1) if direction == EQUIVALENCE else None
    if left is None and right is None:
        return Ok()
    return Counterexamples(direction, left, right)


def included(e1: KatExpr, e2: KatExpr, A: HypothesisSet = EMPTY_HYPS) -> bool:
    return bool(check(e1, e2, A, INCLUSION))


def equivalent(e1: KatExpr, e2: KatExpr, A: HypothesisSet = EMPTY_HYPS) -> bool:
    return bool(check(e1, e2, A, EQUIVALENCE))


def is_empty(e: KatExpr) -> bool:
    return extract_cex(compile(e), compile(ZERO)) is None


def is_counterexample(
    w: CexString, left: KatExpr, right: KatExpr, A: HypothesisSet = EMPTY_HYPS
) -> bool:
    """w is in L(left) and none of its guarded strings are in L(right), under A."""
    lw = rewrite_under_hypotheses(left, A)
    rw = rewrite_under_hypotheses(right, A)
    wexpr = _cex_expr_under(w, A)
    if wexpr is ZERO:
        return False
    return not is_empty(intersect(wexpr, lw)) and is_empty(intersect(wexpr, rw))


def _cex_expr_under(w: CexString, A: HypothesisSet) -> KatExpr:
    from .kat import element_expr

    return rewrite_under_hypotheses(seq(*(element_expr(el) for el in w)), A)


def member(w: CexString, e: KatExpr, A: HypothesisSet = EMPTY_HYPS) -> bool:
    """Some guarded string described by w is in L(e) under A."""
    wexpr = _cex_expr_under(w, A)
    if wexpr is ZERO:
        return False
    return not is_empty(intersect(wexpr, rewrite_under_hypotheses(e, A)))


# ------------------------------------------------------------- intersection


@lru_cache(maxsize=20_000)
def intersect(e1: KatExpr, e2: KatExpr) -> KatExpr:
    if e1 is ZERO or e2 is ZERO:
        return ZERO
    if e1 == e2:
        return e1
    if e1.is_bool and e2.is_bool:
        return conj(e1, e2)
    g1, g2 = compile(e1), compile(e2)
    index: dict[tuple[int, int], int] = {(0, 0): 0}
    order = [(0, 0)]
    acc: list[BoolExpr] = []
    edges: list[list[tuple[BoolExpr, Symbol, int]]] = []
    i = 0
    while i < len(order):
        p, q = order[i]
        a = conj(g1.accept[p], g2.accept[q])
        acc.append(a if satisfiable(a) else ZERO)
        row = []
        for ga, aa, ta in g1.transitions[p]:
            for gb, ab, tb in g2.transitions[q]:
                if aa != ab:
                    continue
                g = conj(ga, gb)
                if not satisfiable(g):
                    continue
                key = (ta, tb)
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                row.append((g, aa, index[key]))
        edges.append(row)
        i += 1
    return _to_expression(acc, edges)


def _to_expression(acc: list[BoolExpr], edges: list[list[tuple[BoolExpr, Symbol, int]]]) -> KatExpr:
    n = len(acc)
    # trim: keep states that can reach acceptance
    live = {q for q in range(n) if acc[q] is not ZERO}
    changed = True
    while changed:
        changed = False
        for q in range(n):
            if q not in live and any(t in live for _, _, t in edges[q]):
                live.add(q)
                changed = True
    if 0 not in live:
        return ZERO
    rows: list[dict[int, KatExpr]] = []
    out: list[KatExpr] = []
    for q in range(n):
        row: dict[int, list[KatExpr]] = {}
        for g, a, t in edges[q]:
            if t in live:
                row.setdefault(t, []).append(seq(g, Act(a)))
        rows.append({t: plus(*xs) for t, xs in row.items()})
        out.append(acc[q])
    for k in range(n - 1, -1, -1):
        if k not in live:
            continue
        loop = star(rows[k].pop(k, ZERO))
        rows[k] = {j: seq(loop, x) for j, x in rows[k].items()}
        out[k] = seq(loop, out[k])
        if k == 0:
            break
        for i in range(k):
            if i not in live:
                continue
            via = rows[i].pop(k, None)
            if via is None:
                continue
            for j, x in rows[k].items():
                rows[i][j] = plus(rows[i].get(j, ZERO), seq(via, x))
            out[i] = plus(out[i], seq(via, out[k]))
    return out[0]


# ------------------------------------------------------- enumeration oracle

GuardedString = tuple  # (atom, action index, atom, ..., atom); atoms are bitmasks

MAX_ENUM_TESTS = 6


def _scope(e: KatExpr, tests: Optional[Sequence[Symbol]]) -> tuple[Symbol, ...]:
    scope = tuple(sorted(tests)) if tests is not None else tests_of(e)
    if len(scope) > MAX_ENUM_TESTS:
        raise AlphabetTooLarge(f"{len(scope)} tests exceed the enumeration limit")
    return scope


def _atom_env(mask: int, scope: Sequence[Symbol]) -> Env:
    return {s.id: bool(mask >> i & 1) for i, s in enumerate(scope)}


class BoundedLanguage:
    """Guarded strings with at most ``bound`` actions, as boolean tensors.

    ``layers[n]`` has shape (M, K, M, K, ..., M) with n actions, where M is
    the number of atoms over ``scope`` and K the number of ``actions``.
    Strings are tuples (atom, action index, atom, ...).
    """

    def __init__(self, scope, actions, bound, layers):
        self.scope = tuple(scope)
        self.actions = tuple(actions)
        self.bound = bound
        self.layers = layers

    @classmethod
    def empty(cls, scope, actions, bound):
        m, k = 1 << len(scope), len(actions)
        return cls(scope, actions, bound, [np.zeros((m,) + (k, m) * n, bool) for n in range(bound + 1)])

    def _compatible(self, other):
        if (self.scope, self.actions, self.bound) != (other.scope, other.actions, other.bound):
            raise ValueError("bounded languages over different alphabets")

    def __eq__(self, other):
        if isinstance(other, BoundedLanguage):
            self._compatible(other)
            return all(np.array_equal(a, b) for a, b in zip(self.layers, other.layers))
        if isinstance(other, (set, frozenset)):
            return self.strings() == other
        return NotImplemented

    def __le__(self, other):
        self._compatible(other)
        return all(not np.any(a & ~b) for a, b in zip(self.layers, other.layers))

    def __and__(self, other):
        self._compatible(other)
        return BoundedLanguage(self.scope, self.actions, self.bound, [a & b for a, b in zip(self.layers, other.layers)])

    def __or__(self, other):
        self._compatible(other)
        return BoundedLanguage(self.scope, self.actions, self.bound, [a | b for a, b in zip(self.layers, other.layers)])

    def __sub__(self, other):
        self._compatible(other)
        return BoundedLanguage(self.scope, self.actions, self.bound, [a & ~b for a, b in zip(self.layers, other.layers)])

    def __len__(self):
        return int(sum(int(a.sum()) for a in self.layers))

    def __bool__(self):
        return any(a.any() for a in self.layers)

    def strings(self) -> frozenset:
        out = set()
        for layer in self.layers:
            for idx in zip(*np.nonzero(layer)):
                out.add(tuple(int(i) for i in idx))
        return frozenset(out)

    def __iter__(self):
        return iter(sorted(self.strings(), key=lambda s: (len(s), s)))

    def __contains__(self, s):
        n = len(s) // 2
        return n <= self.bound and bool(self.layers[n][tuple(s)])

    def render(self, s) -> str:
        parts = []
        for i, x in enumerate(s):
            if i % 2:
                parts.append(str(self.actions[x]))
            else:
                env = _atom_env(x, self.scope)
                parts.append("·".join(("" if env[t.id] else "!") + str(t) for t in self.scope) or "1")
        return "·".join(p for p in parts if p)


def _fuse(xs, ys, bound):
    """Concatenate bounded languages, joining on the shared atom."""
    out = [None] * (bound + 1)
    for n1, a in enumerate(xs):
        if a is None:
            continue
        for n2, b in enumerate(ys):
            if b is None or n1 + n2 > bound:
                continue
            m = a.shape[-1]
            prod = a.reshape(-1, m)[:, :, None] & b.reshape(m, -1)[None, :, :]
            prod = prod.reshape(a.shape[:-1] + b.shape)
            if prod.any():
                out[n1 + n2] = prod if out[n1 + n2] is None else out[n1 + n2] | prod
    return out


def enumerate_language(
    e: KatExpr,
    max_actions: int,
    tests: Optional[Sequence[Symbol]] = None,
    actions: Optional[Sequence[Symbol]] = None,
) -> BoundedLanguage:
    """All guarded strings of e with at most max_actions actions.

    Direct recursive expansion of the expression; stars are iterated until
    no new bounded string appears.
    """
    scope = _scope(e, tests)
    acts = tuple(sorted(actions)) if actions is not None else actions_of(e)
    act_index = {a: i for i, a in enumerate(acts)}
    m, k = 1 << len(scope), len(acts)
    envs = [_atom_env(x, scope) for x in range(m)]
    bound = max_actions
    memo: dict[KatExpr, list] = {}

    def go(x: KatExpr) -> list:
        r = memo.get(x)
        if r is not None:
            return r
        r = [None] * (bound + 1)
        if x.is_bool:
            f = guard_fn(x)
            vec = np.array([f(env) for env in envs], bool)
            if vec.any():
                r[0] = vec
        elif isinstance(x, Act):
            if bound >= 1:
                arr = np.zeros((m, k, m), bool)
                arr[:, act_index[x.sym], :] = True
                r[1] = arr
        elif isinstance(x, Sum):
            for a in x.args:
                for n, layer in enumerate(go(a)):
                    if layer is not None:
                        r[n] = layer if r[n] is None else r[n] | layer
        elif isinstance(x, Seq):
            r = go(x.args[0])
            for a in x.args[1:]:
                r = _fuse(r, go(a), bound)
        elif isinstance(x, Star):
            body = go(x.arg)
            r[0] = np.ones(m, bool)
            delta = list(r)
            while any(d is not None for d in delta):
                step = _fuse(delta, body, bound)
                delta = [None] * (bound + 1)
                for n, layer in enumerate(step):
                    if layer is None:
                        continue
                    fresh = layer if r[n] is None else layer & ~r[n]
                    if fresh.any():
                        delta[n] = fresh
                        r[n] = fresh if r[n] is None else r[n] | fresh
        else:
            raise TypeError(f"unexpected node {x!r}")
        memo[x] = r
        return r

    layers = go(e)
    full = [
        layer if layer is not None else np.zeros((m,) + (k, m) * n, bool)
        for n, layer in enumerate(layers)
    ]
    return BoundedLanguage(scope, acts, bound, full)


def automaton_language(
    e: KatExpr,
    max_actions: int,
    tests: Optional[Sequence[Symbol]] = None,
    actions: Optional[Sequence[Symbol]] = None,
) -> BoundedLanguage:
    """The bounded language read off the compiled automaton."""
    scope = _scope(e, tests)
    acts = tuple(sorted(actions)) if actions is not None else actions_of(e)
    ga = compile(e)
    m, k, q = 1 << len(scope), len(acts), len(ga.exprs)
    envs = [_atom_env(x, scope) for x in range(m)]
    act_index = {a: i for i, a in enumerate(acts)}
    trans = np.zeros((m, q, k * q), np.float32)
    acc = np.zeros((m, q), bool)
    for x, env in enumerate(envs):
        for s in range(q):
            acc[x, s] = holds(ga.accept[s], env)
            for g, a, t in ga.transitions[s]:
                if holds(g, env):
                    trans[x, s, act_index[a] * q + t] = 1.0
    # reach: shape (P, M, Q) = prefix strings ending in an atom, state set
    reach = np.zeros((1, m, q), np.float32)
    reach[0, :, ga.initial] = 1.0
    layers = []
    shape: tuple = ()
    for n in range(max_actions + 1):
        lang = np.einsum("pmq,mq->pm", reach, acc.astype(np.float32)) > 0
        layers.append(lang.reshape(shape + (m,)))
        if n == max_actions:
            break
        # step over every atom at once: (M, P, Q) @ (M, Q, K*Q)
        nxt = np.matmul(reach.transpose(1, 0, 2), trans) > 0  # (M, P, K*Q)
        nxt = nxt.reshape(m, reach.shape[0], k, q).transpose(1, 0, 2, 3)  # (P, M, K, Q)
        p = reach.shape[0] * m * k
        reach = np.broadcast_to(
            nxt.reshape(p, 1, q), (p, m, q)
        ).astype(np.float32)
        shape = shape + (m, k)
    return BoundedLanguage(scope, acts, max_actions, layers)


def accepts_env_string(ga: GuardedAutomaton, envs: Sequence[Env], actions: Sequence[Symbol]) -> bool:
    """Membership of a guarded string given as explicit environments and actions."""
    qs = frozenset((ga.initial,))
    for env, a in zip(envs, actions):
        qs = frozenset(_step(ga, qs, env).get(a, ()))
        if not qs:
            return False
    return _accepts(ga, qs, envs[-1])


def endpoints(ga: GuardedAutomaton, start: Env, envs: Sequence[Env]) -> set[int]:
    """Indexes into ``envs`` of the atoms that end some string starting in ``start``.

    ``envs`` must list every atom over the tests the automaton reads.
    """
    key = lambda env: tuple(sorted(env.items()))
    seen = {(frozenset((ga.initial,)), key(start))}
    todo = [(frozenset((ga.initial,)), start)]
    ends: set[int] = set()
    while todo:
        qs, env = todo.pop()
        for i, other in enumerate(envs):
            if other == env and _accepts(ga, qs, env):
                ends.add(i)
        for nxt in _step(ga, qs, env).values():
            nq = frozenset(nxt)
            for e2 in envs:
                k = (nq, key(e2))
                if k not in seen:
                    seen.add(k)
                    todo.append((nq, e2))
    return ends
