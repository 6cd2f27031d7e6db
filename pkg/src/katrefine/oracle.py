"""Concrete-semantics oracles.

``bigstep`` runs a program exhaustively over a finite range of
nondeterministic choices.  ``concrete_refines`` checks program refinement
over a finite store space, and ``kat_concrete_refines`` decides the same
two clauses for KAT expressions with start and end tests ranging over
atoms.  Together they let tests compare the two notions on random
boolean programs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from . import automata
from .kat import ONE, ZERO, KatExpr, Symbol, SymbolTable, act, conj, disj, lit, plus, star, tests_of
from .kat import seq as kseq
from .lang import (
    Assign,
    Assume,
    BAnd,
    BConst,
    BinOp,
    BNot,
    BoolCond,
    BOr,
    EventCall,
    Fail,
    If,
    IntExpr,
    Location,
    Neg,
    Nondet,
    Num,
    Program,
    Rel,
    Seq,
    Skip,
    Stmt,
    Var,
    While,
    show_simple,
)

DEFAULT_CHOICES = tuple(range(-2, 3))


class DomainTooLarge(ValueError):
    pass


Store = tuple  # sorted ((var, value), ...)


def freeze(store: Mapping[str, int]) -> Store:
    return tuple(sorted(store.items()))


@dataclass(frozen=True)
class Final:
    store: Store
    trace: tuple[str, ...] = ()

    def __str__(self):
        vals = ", ".join(f"{k}={v}" for k, v in self.store)
        return f"{{{vals}}} via {'·'.join(self.trace) or '1'}"


@dataclass(frozen=True)
class Fault:
    trace: tuple[str, ...] = ()

    def __str__(self):
        return "fault"


@dataclass(frozen=True)
class OutOfFuel:
    def __str__(self):
        return "out of fuel"


Outcome = Union[Final, Fault, OutOfFuel]


@dataclass(frozen=True)
class Step:
    """One executed action: the statement and the store just before it."""

    stmt: Stmt
    before: Store


@dataclass(frozen=True)
class Run:
    outcome: Outcome
    steps: tuple[Step, ...]


# ------------------------------------------------------------- evaluation


def eval_int(e: IntExpr, store: Mapping[str, int]) -> int:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return store.get(e.name, 0)
    if isinstance(e, Neg):
        return -eval_int(e.arg, store)
    if isinstance(e, BinOp):
        a, b = eval_int(e.left, store), eval_int(e.right, store)
        return a + b if e.op == "+" else a - b
    raise ValueError("nondet() has no single value")


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def eval_bool(c: BoolCond, store: Mapping[str, int]) -> bool:
    if isinstance(c, BConst):
        return c.value
    if isinstance(c, Rel):
        return _OPS[c.op](eval_int(c.left, store), eval_int(c.right, store))
    if isinstance(c, BNot):
        return not eval_bool(c.arg, store)
    if isinstance(c, BAnd):
        return eval_bool(c.left, store) and eval_bool(c.right, store)
    return eval_bool(c.left, store) or eval_bool(c.right, store)


def _values(e: IntExpr, store, choices) -> Iterator[int]:
    """All values of an expression; each nondet() ranges over ``choices``."""
    if isinstance(e, Nondet):
        yield from choices
    elif isinstance(e, BinOp):
        for a in _values(e.left, store, choices):
            for b in _values(e.right, store, choices):
                yield a + b if e.op == "+" else a - b
    elif isinstance(e, Neg):
        for a in _values(e.arg, store, choices):
            yield -a
    else:
        yield eval_int(e, store)


# ------------------------------------------------------------- interpreter

Observer = Callable[[Location, Store], None]


class _Interp:
    def __init__(self, choices: Sequence[int], event_results: Sequence[int], observe: Optional[Observer]):
        self.choices = tuple(choices)
        self.event_results = tuple(event_results)
        self.observe = observe

    def run(self, s: Stmt, store: dict, fuel: int, steps: tuple) -> Iterator[tuple]:
        """Yield (kind, store, fuel, steps) with kind in ok / fault / fuel."""
        if self.observe is not None:
            self.observe(s.loc, freeze(store))
        if isinstance(s, Seq):
            yield from self._seq(s.stmts, 0, store, fuel, steps)
            return
        if fuel <= 0:
            yield ("fuel", store, 0, steps)
            return
        fuel -= 1
        if isinstance(s, Skip):
            yield ("ok", store, fuel, steps)
        elif isinstance(s, Fail):
            yield ("fault", store, fuel, steps)
        elif isinstance(s, Assume):
            if eval_bool(s.cond, store):
                yield ("ok", store, fuel, steps)
        elif isinstance(s, Assign):
            step = Step(s, freeze(store))
            for v in dict.fromkeys(_values(s.expr, store, self.choices)):
                yield ("ok", {**store, s.var: v}, fuel, steps + (step,))
        elif isinstance(s, EventCall):
            step = Step(s, freeze(store))
            if s.result:
                for v in self.event_results:
                    yield ("ok", {**store, s.result: v}, fuel, steps + (step,))
            else:
                yield ("ok", store, fuel, steps + (step,))
        elif isinstance(s, If):
            branch = s.then if eval_bool(s.cond, store) else s.els
            yield from self.run(branch, store, fuel, steps)
        elif isinstance(s, While):
            yield from self._loop(s, store, fuel, steps)
        else:
            raise TypeError(type(s).__name__)

    def _loop(self, s: While, store, fuel, steps):
        if not eval_bool(s.cond, store):
            yield ("ok", store, fuel, steps)
            return
        for kind, st, f, sp in self.run(s.body, store, fuel, steps):
            if kind != "ok":
                yield (kind, st, f, sp)
            elif f <= 0:
                yield ("fuel", st, 0, sp)
            else:
                yield from self._loop(s, st, f - 1, sp)

    def _seq(self, stmts, i, store, fuel, steps):
        if i == len(stmts):
            yield ("ok", store, fuel, steps)
            return
        for kind, st, f, sp in self.run(stmts[i], store, fuel, steps):
            if kind == "ok":
                yield from self._seq(stmts, i + 1, st, f, sp)
            else:
                yield (kind, st, f, sp)


def executions(
    p: Program,
    sigma: Mapping[str, int],
    fuel: int = 64,
    choices: Sequence[int] = DEFAULT_CHOICES,
    event_results: Optional[Sequence[int]] = None,
    observe: Optional[Observer] = None,
) -> Iterator[Run]:
    """Every run of ``p`` from ``sigma`` with its executed action steps."""
    interp = _Interp(choices, choices if event_results is None else event_results, observe)
    for kind, store, _fuel, steps in interp.run(p.body, dict(sigma), fuel, ()):
        trace = tuple(s.stmt.name for s in steps if isinstance(s.stmt, EventCall))
        if kind == "ok":
            yield Run(Final(freeze(store), trace), steps)
        elif kind == "fault":
            yield Run(Fault(trace), steps)
        else:
            yield Run(OutOfFuel(), steps)


def bigstep(
    p: Program,
    sigma: Mapping[str, int],
    fuel: int = 64,
    choices: Sequence[int] = DEFAULT_CHOICES,
    event_results: Optional[Sequence[int]] = None,
) -> set[Outcome]:
    """All reachable outcomes; blocked assumes contribute nothing."""
    return {r.outcome for r in executions(p, sigma, fuel, choices, event_results)}


# ------------------------------------------------------------- runs as guarded strings


def concrete_env(alpha, side: str, store: Mapping[str, int]) -> dict:
    """Truth of every bound test of ``side`` in a concrete store (test id -> bool)."""
    env = {}
    for (scope, _key), b in alpha.tests.items():
        if scope in (None, side):
            env[b.sym.id] = eval_bool(b.rel, store)
    return env


def guarded_string(alpha, side: str, run: Run) -> tuple[list[dict], list[Symbol]]:
    """The guarded string a finished run denotes under ``alpha``."""
    if not isinstance(run.outcome, Final):
        raise ValueError("only finished runs denote guarded strings")
    envs = [concrete_env(alpha, side, dict(step.before)) for step in run.steps]
    envs.append(concrete_env(alpha, side, dict(run.outcome.store)))
    actions = [alpha.action_symbol(side, step.stmt) for step in run.steps]
    return envs, actions


# ------------------------------------------------------------- refinement checks

MAX_STORES = 4096


@dataclass(frozen=True)
class Verdict:
    """Outcome of a refinement check; ``witness`` explains a failure."""

    holds: bool
    witness: Optional[tuple] = None
    reason: str = ""

    def __bool__(self):
        return self.holds


def stores(variables: Sequence[str], values: Sequence[int]) -> list[dict]:
    if len(values) ** len(variables) > MAX_STORES:
        raise DomainTooLarge(f"{len(values)}^{len(variables)} stores")
    return [dict(zip(variables, vs)) for vs in itertools.product(values, repeat=len(variables))]


def concrete_refines(
    c1: Program,
    c2: Program,
    variables: Sequence[str],
    values: Sequence[int] = (0, 1),
    fuel: int = 64,
    choices: Optional[Sequence[int]] = None,
) -> Verdict:
    """Does c1 refine c2 over every store of ``variables`` drawn from ``values``?

    c1 may fault only where c2 faults, and every final store of c1 is a
    final store of c2 unless c2 faults from the same start.
    """
    choices = tuple(values) if choices is None else choices
    for sigma in stores(variables, values):
        o1 = bigstep(c1, sigma, fuel, choices)
        o2 = bigstep(c2, sigma, fuel, choices)
        faults2 = any(isinstance(o, Fault) for o in o2)
        if any(isinstance(o, Fault) for o in o1) and not faults2:
            return Verdict(False, (freeze(sigma), "fault"), "c1 faults where c2 does not")
        if faults2:
            continue
        finals2 = {o.store for o in o2 if isinstance(o, Final)}
        for o in o1:
            if isinstance(o, Final) and o.store not in finals2:
                return Verdict(False, (freeze(sigma), o.store), "c1 reaches a store c2 cannot")
    return Verdict(True)


def well_behaved(
    p: Program,
    variables: Sequence[str],
    values: Sequence[int] = (0, 1),
    fuel: int = 64,
    choices: Optional[Sequence[int]] = None,
) -> bool:
    """From every store p either faults or finishes normally, never both, never stuck."""
    choices = tuple(values) if choices is None else choices
    for sigma in stores(variables, values):
        outs = bigstep(p, sigma, fuel, choices)
        if any(isinstance(o, OutOfFuel) for o in outs):
            return False
        fault = any(isinstance(o, Fault) for o in outs)
        final = any(isinstance(o, Final) for o in outs)
        if fault == final:
            return False
    return True


# ------------------------------------------------------------- exact boolean translation


class BooleanAbstraction:
    """One test per variable (``v != 0``); atoms are exactly the boolean stores."""

    def __init__(self, variables: Sequence[str], table=None):
        self.table = table if table is not None else SymbolTable()
        self.variables = tuple(variables)
        self.tests = tuple(self.table.test(v) for v in self.variables)
        self.stores = stores(self.variables, (0, 1))

    def atom(self, store: Mapping[str, int]):
        return conj(*(lit(t, store.get(v, 0) != 0) for v, t in zip(self.variables, self.tests)))

    def env(self, store: Mapping[str, int]) -> dict:
        return {t.id: store.get(v, 0) != 0 for v, t in zip(self.variables, self.tests)}

    def cond(self, c: BoolCond):
        return disj(*(self.atom(s) for s in self.stores if eval_bool(c, s)))

    def action(self, name: str) -> Symbol:
        return self.table.lookup("action", name) or self.table.action(name)


def exact_translation(p: Program, ab: BooleanAbstraction) -> KatExpr:
    """A strongly valid translation of a boolean program.

    Each action is followed by the atom of the store it produces, so the
    start and end atoms of the guarded strings are exactly the program's
    input/output pairs.
    """

    def go(s: Stmt) -> KatExpr:
        if isinstance(s, Seq):
            return kseq(*(go(x) for x in s.stmts))
        if isinstance(s, Skip):
            return ONE
        if isinstance(s, Fail):
            return ZERO
        if isinstance(s, Assume):
            return ab.cond(s.cond)
        if isinstance(s, If):
            b = ab.cond(s.cond)
            nb = ab.cond(BNot(s.cond))
            return plus(kseq(b, go(s.then)), kseq(nb, go(s.els)))
        if isinstance(s, While):
            return kseq(star(kseq(ab.cond(s.cond), go(s.body))), ab.cond(BNot(s.cond)))
        if isinstance(s, (Assign, EventCall)):
            sym = ab.action(show_simple(s))
            terms = []
            for sigma in ab.stores:
                if isinstance(s, Assign):
                    posts = [{**sigma, s.var: v} for v in _values(s.expr, sigma, (0, 1))]
                elif s.result:
                    posts = [{**sigma, s.result: v} for v in (0, 1)]
                else:
                    posts = [sigma]
                for rho in posts:
                    terms.append(kseq(ab.atom(sigma), act(sym), ab.atom(rho)))
            return plus(*terms)
        raise TypeError(type(s).__name__)

    return go(p.body)


def kat_concrete_refines(k1: KatExpr, k2: KatExpr, tests: Optional[Sequence[Symbol]] = None) -> Verdict:
    """Both clauses of concrete KAT refinement, start and end tests ranging over atoms.

    Clause one: an atom that kills k1 kills k2.  Clause two: an end atom
    reachable in k1 from a start atom is reachable in k2 from it, unless
    that start atom kills k2.
    """
    if tests is None:
        tests = sorted(set(tests_of(k1)) | set(tests_of(k2)))
    if len(tests) > 10:
        raise automata.AlphabetTooLarge(f"{len(tests)} tests")
    ids = [t.id for t in tests]
    envs = list(automata.atoms(ids))
    g1, g2 = automata.compile(k1), automata.compile(k2)
    for i, b in enumerate(envs):
        e1 = automata.endpoints(g1, b, envs)
        e2 = automata.endpoints(g2, b, envs)
        if not e1 and e2:
            return Verdict(False, (i, None), "a start atom blocks k1 but not k2")
        if e2 and not e1 <= e2:
            return Verdict(False, (i, min(e1 - e2)), "k1 reaches an end atom k2 cannot")
    return Verdict(True)
