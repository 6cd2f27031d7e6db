"""Forward interval analysis for the mini language.

States map variables to intervals over the extended integers; ``None`` is
the unreachable state.  A variable missing from a state is unconstrained.
Loops are solved by plain iteration for ``WIDEN_DELAY`` rounds, then
widening, then a single narrowing pass; a last pass over the loop body
records the entry state of every statement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional

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
    negate_cond,
)

INF = math.inf
WIDEN_DELAY = 3


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def const(n: int) -> Interval:
        return Interval(n, n)

    def join(self, o: Interval) -> Interval:
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def meet(self, o: Interval) -> Optional[Interval]:
        lo, hi = max(self.lo, o.lo), min(self.hi, o.hi)
        return Interval(lo, hi) if lo <= hi else None

    def widen(self, o: Interval) -> Interval:
        lo = self.lo if o.lo >= self.lo else -INF
        hi = self.hi if o.hi <= self.hi else INF
        return Interval(lo, hi)

    def narrow(self, o: Interval) -> Interval:
        lo = o.lo if self.lo == -INF else self.lo
        hi = o.hi if self.hi == INF else self.hi
        return Interval(lo, hi)

    def __add__(self, o: Interval) -> Interval:
        return Interval(self.lo + o.lo, self.hi + o.hi)

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o: Interval) -> Interval:
        return self + (-o)

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi

    @property
    def is_top(self) -> bool:
        return self.lo == -INF and self.hi == INF

    def __str__(self):
        def end(v):
            if v == INF:
                return "+inf"
            if v == -INF:
                return "-inf"
            return str(int(v))

        return f"[{end(self.lo)}, {end(self.hi)}]"


TOP = Interval(-INF, INF)


class AbstractState:
    """Variable intervals; immutable.  Use ``None`` for the bottom state."""

    __slots__ = ("_env", "_hash")

    def __init__(self, env: Mapping[str, Interval] = ()):
        items = dict(env)
        self._env = tuple(sorted((k, v) for k, v in items.items() if not v.is_top))
        self._hash = hash(self._env)

    def __getitem__(self, var: str) -> Interval:
        for k, v in self._env:
            if k == var:
                return v
        return TOP

    def set(self, var: str, iv: Interval) -> AbstractState:
        env = dict(self._env)
        env[var] = iv
        return AbstractState(env)

    def items(self):
        return self._env

    def __eq__(self, other):
        return isinstance(other, AbstractState) and self._env == other._env

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(f"{k} in {v}" for k, v in self._env) + "}"


State = Optional[AbstractState]


def join(a: State, b: State) -> State:
    if a is None:
        return b
    if b is None:
        return a
    keys = {k for k, _ in a.items()} & {k for k, _ in b.items()}
    return AbstractState({k: a[k].join(b[k]) for k in keys})


def widen(a: State, b: State) -> State:
    if a is None:
        return b
    if b is None:
        return a
    keys = {k for k, _ in a.items()} & {k for k, _ in b.items()}
    return AbstractState({k: a[k].widen(b[k]) for k in keys})


def narrow(a: State, b: State) -> State:
    if a is None or b is None:
        return None
    keys = {k for k, _ in a.items()} | {k for k, _ in b.items()}
    return AbstractState({k: a[k].narrow(b[k]) for k in keys})


def leq(a: State, b: State) -> bool:
    if a is None:
        return True
    if b is None:
        return False
    return all(a[k].lo >= v.lo and a[k].hi <= v.hi for k, v in b.items())


def contains(s: State, store: Mapping[str, int]) -> bool:
    """Whether a concrete store lies in the concretization of ``s``."""
    if s is None:
        return False
    return all(store.get(k, 0) in v for k, v in s.items()) and all(k in store for k, _ in s.items())


# ------------------------------------------------------------- evaluation


def eval_expr(s: AbstractState, e: IntExpr) -> Interval:
    if isinstance(e, Num):
        return Interval.const(e.value)
    if isinstance(e, Var):
        return s[e.name]
    if isinstance(e, Nondet):
        return TOP
    if isinstance(e, Neg):
        return -eval_expr(s, e.arg)
    left, right = eval_expr(s, e.left), eval_expr(s, e.right)
    return left + right if e.op == "+" else left - right


class Truth(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"
    UNREACHABLE = "unreachable"


def _rel_truth(op: str, a: Interval, b: Interval) -> Truth:
    d = a - b  # a op b  <=>  d op 0
    if op == "<":
        yes, no = d.hi < 0, d.lo >= 0
    elif op == "<=":
        yes, no = d.hi <= 0, d.lo > 0
    elif op == ">":
        yes, no = d.lo > 0, d.hi <= 0
    elif op == ">=":
        yes, no = d.lo >= 0, d.hi < 0
    elif op == "==":
        yes, no = d.lo == d.hi == 0, 0 not in d
    else:
        yes, no = 0 not in d, d.lo == d.hi == 0
    if yes:
        return Truth.TRUE
    if no:
        return Truth.FALSE
    return Truth.UNKNOWN


def eval_cond(s: State, c: BoolCond) -> Truth:
    """Three-valued truth of ``c`` over every concretization of ``s``."""
    if s is None:
        return Truth.UNREACHABLE
    if isinstance(c, BConst):
        return Truth.TRUE if c.value else Truth.FALSE
    if isinstance(c, Rel):
        return _rel_truth(c.op, eval_expr(s, c.left), eval_expr(s, c.right))
    if isinstance(c, BNot):
        t = eval_cond(s, c.arg)
        return {Truth.TRUE: Truth.FALSE, Truth.FALSE: Truth.TRUE}.get(t, t)
    left, right = eval_cond(s, c.left), eval_cond(s, c.right)
    if isinstance(c, BAnd):
        if Truth.FALSE in (left, right):
            return Truth.FALSE
        if left == right == Truth.TRUE:
            return Truth.TRUE
        return Truth.FALSE if refine(s, c) is None else Truth.UNKNOWN
    if Truth.TRUE in (left, right):
        return Truth.TRUE
    if left == right == Truth.FALSE:
        return Truth.FALSE
    # refine-based check catches x > 0 || x <= 0 style tautologies
    if refine(s, negate_cond(c)) is None:
        return Truth.TRUE
    return Truth.UNKNOWN


# ------------------------------------------------------------- refinement


def _linear_var(e: IntExpr) -> Optional[tuple[str, int, int]]:
    """Match ``k*x + c`` with k = ±1; returns (x, k, c)."""
    if isinstance(e, Var):
        return e.name, 1, 0
    if isinstance(e, Neg):
        m = _linear_var(e.arg)
        return (m[0], -m[1], -m[2]) if m else None
    if isinstance(e, BinOp):
        if isinstance(e.right, Num):
            m = _linear_var(e.left)
            if m:
                return m[0], m[1], m[2] + (e.right.value if e.op == "+" else -e.right.value)
        if isinstance(e.left, Num) and e.op == "+":
            m = _linear_var(e.right)
            if m:
                return m[0], m[1], m[2] + e.left.value
    return None


def _bound(op: str, iv: Interval) -> Optional[Interval]:
    """Values v with ``v op w`` for some w in iv (integers)."""
    if op == "<":
        return Interval(-INF, iv.hi - 1)
    if op == "<=":
        return Interval(-INF, iv.hi)
    if op == ">":
        return Interval(iv.lo + 1, INF)
    if op == ">=":
        return Interval(iv.lo, INF)
    if op == "==":
        return iv
    return None


_FLIP = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "==": "==", "!=": "!="}


def _refine_side(s: AbstractState, lhs: IntExpr, op: str, rhs_iv: Interval) -> State:
    m = _linear_var(lhs)
    if m is None:
        return s
    x, k, c = m
    # k*x + c op r  =>  x op' (r - c)/k
    target = rhs_iv - Interval.const(c)
    if k == -1:
        target, op = -target, _FLIP[op]
    if op == "!=":
        cur = s[x]
        if target.lo == target.hi:
            v = target.lo
            if cur.lo == v == cur.hi:
                return None
            if cur.lo == v:
                return s.set(x, Interval(v + 1, cur.hi))
            if cur.hi == v:
                return s.set(x, Interval(cur.lo, v - 1))
        return s
    allowed = _bound(op, target)
    new = s[x].meet(allowed)
    return None if new is None else s.set(x, new)


def refine(s: State, c: BoolCond) -> State:
    """Strengthen ``s`` with ``c``; ``None`` when ``c`` is unsatisfiable in ``s``."""
    if s is None:
        return None
    if isinstance(c, BConst):
        return s if c.value else None
    if isinstance(c, BNot):
        return refine(s, negate_cond(c.arg))
    if isinstance(c, BAnd):
        return refine(refine(s, c.left), c.right)
    if isinstance(c, BOr):
        return join(refine(s, c.left), refine(s, c.right))
    t = _rel_truth(c.op, eval_expr(s, c.left), eval_expr(s, c.right))
    if t == Truth.FALSE:
        return None
    if t == Truth.TRUE:
        return s
    out = _refine_side(s, c.left, c.op, eval_expr(s, c.right))
    if out is None:
        return None
    return _refine_side(out, c.right, _FLIP[c.op], eval_expr(out, c.left))


# ------------------------------------------------------------- analysis


class InvariantMap:
    """Entry state of every statement plus the program's exit state."""

    def __init__(self, program: Program, entry: dict, heads: dict, exit_state: State):
        self.program = program
        self._entry = entry
        self._heads = heads
        self.exit = exit_state

    def loop_head(self, loc: Location) -> State:
        """The loop invariant at the condition test of the loop at ``loc``."""
        return self._heads.get(loc)

    def __getitem__(self, loc: Location) -> State:
        if loc in self._entry:
            return self._entry[loc]
        return self._entry[Location(loc.prog, loc.path)]

    def __contains__(self, loc: Location) -> bool:
        return loc in self._entry

    def items(self):
        return sorted(self._entry.items())

    def dump(self) -> str:
        lines = []
        for loc, st in self.items():
            lines.append(f"{loc}: {'bottom' if st is None else st}")
        lines.append(f"exit: {'bottom' if self.exit is None else self.exit}")
        return "\n".join(lines)


class _Analyzer:
    def __init__(self):
        self.entry: dict[Location, State] = {}
        self.heads: dict[Location, State] = {}

    def run(self, s: Stmt, st: State, record: bool) -> State:
        if record:
            prev = self.entry.get(s.loc)
            self.entry[s.loc] = st if prev is None else join(prev, st)
        if st is None:
            if record:
                if isinstance(s, While) and s.loc not in self.heads:
                    self.heads[s.loc] = None
                for c in _children(s):
                    self.run(c, None, True)
            return None
        if isinstance(s, Skip):
            return st
        if isinstance(s, Fail):
            return None
        if isinstance(s, Assign):
            return st.set(s.var, eval_expr(st, s.expr))
        if isinstance(s, EventCall):
            return st.set(s.result, TOP) if s.result else st
        if isinstance(s, Assume):
            return refine(st, s.cond)
        if isinstance(s, Seq):
            for c in s.stmts:
                st = self.run(c, st, record)
            return st
        if isinstance(s, If):
            a = self.run(s.then, refine(st, s.cond), record)
            b = self.run(s.els, refine(st, negate_cond(s.cond)), record)
            return join(a, b)
        if isinstance(s, While):
            return self.loop(s, st, record)
        raise TypeError(type(s).__name__)

    def loop(self, w: While, init: AbstractState, record: bool) -> State:
        head: State = init
        rounds = 0
        while True:
            after = self.run(w.body, refine(head, w.cond), False)
            new = join(init, after)
            if leq(new, head):
                break
            rounds += 1
            head = join(head, new) if rounds <= WIDEN_DELAY else widen(head, new)
        after = self.run(w.body, refine(head, w.cond), False)
        head = narrow(head, join(init, after))
        if record:
            prev = self.heads.get(w.loc)
            self.heads[w.loc] = head if prev is None else join(prev, head)
            self.run(w.body, refine(head, w.cond), True)
        return refine(head, negate_cond(w.cond))


def _children(s: Stmt):
    if isinstance(s, Seq):
        return s.stmts
    if isinstance(s, If):
        return (s.then, s.els)
    if isinstance(s, While):
        return (s.body,)
    return ()


def analyze(p: Program, entry: Optional[AbstractState] = None) -> InvariantMap:
    """Entry invariants for every statement of ``p`` (unknown inputs are top)."""
    a = _Analyzer()
    out = a.run(p.body, entry if entry is not None else AbstractState(), True)
    return InvariantMap(p, a.entry, a.heads, out)
