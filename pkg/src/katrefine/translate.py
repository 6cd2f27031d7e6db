"""Program-to-KAT translation under an abstraction.

An ``Abstraction`` owns the symbol table of both programs plus the
interval invariants of the original programs.  Conditions are reduced to
canonical linear atoms so that ``x > 0`` and ``x <= 0`` become one test
and its negation; the first occurrence of an atom decides which side is
the positive literal.

Translation is the usual structural one (if -> b·s + !b·t,
while -> (b·s)*·!b) followed by pruning with the invariants: decided
branches lose their guard, unreachable code and ``fail`` become 0, and
loops whose guard is always true become 0.

Calls to the same function share one action symbol within a program.
Across programs, a statement kind is shared only when symbol sharing is on
and both programs use exactly the same statement texts for it; otherwise
the two programs get separate symbols suffixed with ``_C1`` / ``_C2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Optional

from . import absint
from .absint import InvariantMap, Truth
from .kat import (
    ONE,
    ZERO,
    BoolExpr,
    KatExpr,
    Symbol,
    SymbolTable,
    act,
    conj,
    disj,
    lit,
    neg,
    plus,
    seq,
    star,
)
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
    show_cond,
    show_simple,
)


class IncompatibleAbstractions(ValueError):
    pass


class UntranslatableCondition(ValueError):
    pass


# ------------------------------------------------------- canonical atoms

Linear = tuple  # ((var, coef), ...) sorted, nonzero coefficients


def _linear(e: IntExpr) -> tuple[dict, int]:
    if isinstance(e, Num):
        return {}, e.value
    if isinstance(e, Var):
        return {e.name: 1}, 0
    if isinstance(e, Neg):
        c, k = _linear(e.arg)
        return {v: -a for v, a in c.items()}, -k
    if isinstance(e, BinOp):
        c1, k1 = _linear(e.left)
        c2, k2 = _linear(e.right)
        sign = 1 if e.op == "+" else -1
        out = dict(c1)
        for v, a in c2.items():
            out[v] = out.get(v, 0) + sign * a
        return out, k1 + sign * k2
    if isinstance(e, Nondet):
        raise UntranslatableCondition("nondet() inside a condition")
    raise TypeError(type(e).__name__)


def _freeze(coefs: dict) -> Linear:
    return tuple(sorted((v, a) for v, a in coefs.items() if a))


def _negated(lin: Linear) -> Linear:
    return tuple((v, -a) for v, a in lin)


@dataclass(frozen=True)
class Atom:
    """``lin <= c`` (kind 'le') or ``lin == c`` (kind 'eq')."""

    kind: str
    lin: Linear
    c: int

    def complement(self) -> Optional[Atom]:
        if self.kind == "le":
            return Atom("le", _negated(self.lin), -self.c - 1)
        return None


def canonical(rel: Rel) -> tuple[Optional[Atom], bool]:
    """Return (atom, positive) with ``rel`` equivalent to atom (or its negation).

    A constant relation yields (None, truth value).
    """
    c1, k1 = _linear(rel.left)
    c2, k2 = _linear(rel.right)
    coefs = dict(c1)
    for v, a in c2.items():
        coefs[v] = coefs.get(v, 0) - a
    k = k1 - k2  # rel  <=>  sum(coefs) + k  op  0
    lin = _freeze(coefs)
    op = rel.op
    if not lin:
        return None, {"<": k < 0, "<=": k <= 0, ">": k > 0, ">=": k >= 0, "==": k == 0, "!=": k != 0}[op]
    g = reduce(math.gcd, (abs(a) for _, a in lin))
    if op in ("==", "!="):
        if lin[0][1] < 0:
            lin, k = _negated(lin), -k
        if k % g:
            return None, op == "!="
        return Atom("eq", tuple((v, a // g) for v, a in lin), -k // g), op == "=="
    if op == "<":
        lin_, c = lin, -k - 1
    elif op == "<=":
        lin_, c = lin, -k
    elif op == ">":
        lin_, c = _negated(lin), k - 1
    else:
        lin_, c = _negated(lin), k
    return Atom("le", tuple((v, a // g) for v, a in lin_), math.floor(c / g)), True


def _atom_key(atom: Atom) -> Atom:
    """One key for an atom and its complement."""
    comp = atom.complement()
    if comp is None:
        return atom
    return min(atom, comp, key=lambda a: (a.lin, a.c))


# ------------------------------------------------------- abstraction

SIDES = ("C1", "C2")


@dataclass(frozen=True)
class TestBinding:
    """The positive literal of ``sym`` stands for ``rel`` (its first occurrence)."""

    sym: Symbol
    atom: Atom
    polarity: bool
    rel: Rel


@dataclass
class Abstraction:
    """Symbol bindings for a pair of programs plus their invariants."""

    table: SymbolTable
    share: bool
    tests: dict = field(default_factory=dict)  # (side|None, key atom) -> TestBinding
    actions: dict = field(default_factory=dict)  # (side|None, kind, name) -> Symbol
    shared_actions: dict = field(default_factory=dict)  # action class -> bool
    invariants: dict = field(default_factory=dict)  # side -> InvariantMap
    provenance: tuple = ()
    origins: dict = field(default_factory=dict)  # Symbol -> source text

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    # ----- tests
    def _test_scope(self, side: str) -> Optional[str]:
        return None if self.share else side

    def bound_test(self, side: str, atom: Atom) -> Optional[TestBinding]:
        return self.tests.get((self._test_scope(side), _atom_key(atom)))

    def _bind_test(self, side: str, rel: Rel) -> Optional[TestBinding]:
        atom, polarity = canonical(rel)
        if atom is None:
            return None
        key = (self._test_scope(side), _atom_key(atom))
        b = self.tests.get(key)
        if b is None:
            origin = show_cond(rel)
            sym = self.table.test(self.table.fresh_test_name(), origin)
            b = TestBinding(sym, atom, polarity, rel)
            self.tests[key] = b
            self.origins[sym] = origin + ("" if self.share else f" [{side}]")
        return b

    def literal(self, side: str, rel: Rel) -> BoolExpr:
        atom, positive = canonical(rel)
        if atom is None:
            return ONE if positive else ZERO
        b = self.bound_test(side, atom)
        if b is None:
            raise KeyError(f"unbound condition {show_cond(rel)} in {side}")
        return lit(b.sym, (atom == b.atom) == (positive == b.polarity))

    def cond_expr(self, side: str, c: BoolCond) -> BoolExpr:
        if isinstance(c, BConst):
            return ONE if c.value else ZERO
        if isinstance(c, Rel):
            return self.literal(side, c)
        if isinstance(c, BNot):
            return neg(self.cond_expr(side, c.arg))
        if isinstance(c, BAnd):
            return conj(self.cond_expr(side, c.left), self.cond_expr(side, c.right))
        return disj(self.cond_expr(side, c.left), self.cond_expr(side, c.right))

    def cond_of_literal(self, sym: Symbol, positive: bool) -> BoolCond:
        """A source condition for a test literal (for instrumentation)."""
        for b in self.tests.values():
            if b.sym == sym:
                return b.rel if positive else negate_cond(b.rel)
        raise KeyError(sym)

    # ----- actions
    def action_symbol(self, side: str, s: Stmt) -> Symbol:
        cls = _action_class(s)
        return self.actions[_action_key(s, side, self.shared_actions.get(cls, False))]

    def symbol_dump(self) -> str:
        lines = []
        for sym in self.table.symbols:
            origin = self.origins.get(sym)
            if origin is not None:
                lines.append(f"{sym}  {origin}")
        return "\n".join(lines)


def _action_class(s: Stmt) -> tuple:
    if isinstance(s, EventCall):
        return ("event", s.name, len(s.args))
    return ("assign", show_simple(s).rstrip(";"))


def _action_key(s: Stmt, side: str, shared: bool) -> tuple:
    return (None if shared else side,) + _action_class(s)


def _conditions(p: Program) -> list[Rel]:
    out: list[Rel] = []

    def atoms(c: BoolCond):
        if isinstance(c, Rel):
            out.append(c)
        elif isinstance(c, (BAnd, BOr)):
            atoms(c.left)
            atoms(c.right)
        elif isinstance(c, BNot):
            atoms(c.arg)

    for s in p.statements():
        if isinstance(s, (If, While, Assume)):
            atoms(s.cond)
    return out


def _actions(p: Program) -> list[Stmt]:
    return [s for s in p.statements() if isinstance(s, (Assign, EventCall))]


def build_abstraction(c1: Program, c2: Program, share: bool = True, table: Optional[SymbolTable] = None) -> Abstraction:
    """Bind every condition and action of both programs and analyze them."""
    alpha = Abstraction(table or SymbolTable(), share)
    progs = {"C1": c1, "C2": c2}
    for side in SIDES:
        for rel in _conditions(progs[side]):
            alpha._bind_test(side, rel)
    texts: dict = {side: {} for side in SIDES}
    for side in SIDES:
        for s in _actions(progs[side]):
            texts[side].setdefault(_action_class(s), set()).add(show_simple(s))
    names: dict = {}
    for side in SIDES:
        for cls in texts[side]:
            if cls[0] == "event":
                names.setdefault(cls[1], set()).add(cls[2])
    for side in SIDES:
        for s in _actions(progs[side]):
            cls = _action_class(s)
            other = texts["C2" if side == "C1" else "C1"]
            shared = share and (cls not in other or other[cls] == texts[side][cls])
            in_both = cls in other
            alpha.shared_actions[cls] = shared
            key = _action_key(s, side, shared)
            if key in alpha.actions:
                continue
            if cls[0] == "event":
                display = cls[1] if len(names[cls[1]]) == 1 else f"{cls[1]}{cls[2]}"
            else:
                display = cls[1]
            if in_both and not shared:
                display = f"{display}_{side}"
            sym = alpha.table.action(display, show_simple(s).rstrip(";"))
            alpha.actions[key] = sym
            alpha.origins.setdefault(sym, _action_origin(progs, cls, shared, side))
    alpha.invariants = {"C1": absint.analyze(c1), "C2": absint.analyze(c2)}
    alpha.provenance = (("build", share),)
    return alpha


def _action_origin(progs, cls, shared, side) -> str:
    sides = SIDES if shared else (side,)
    texts = sorted(
        {show_simple(s).rstrip(";") for sd in sides for s in _actions(progs[sd]) if _action_class(s) == cls}
    )
    return " | ".join(texts)


def refine(alpha: Abstraction, new_conds: Iterable[tuple[str, BoolCond]]) -> Abstraction:
    """Bind fresh tests for unseen conditions; an empty or known set is a no-op."""
    fresh = []
    for side, c in new_conds:
        rels = [c] if isinstance(c, Rel) else _cond_atoms(c)
        for rel in rels:
            atom, _ = canonical(rel)
            if atom is not None and alpha.bound_test(side, atom) is None:
                fresh.append((side, rel))
    if not fresh:
        return alpha
    out = Abstraction(
        alpha.table,
        alpha.share,
        dict(alpha.tests),
        alpha.actions,
        alpha.shared_actions,
        alpha.invariants,
        alpha.provenance + (("refine", tuple(show_cond(r) for _, r in fresh)),),
        dict(alpha.origins),
    )
    for side, rel in fresh:
        out._bind_test(side, rel)
    return out


def _cond_atoms(c: BoolCond) -> list[Rel]:
    if isinstance(c, Rel):
        return [c]
    if isinstance(c, (BAnd, BOr)):
        return _cond_atoms(c.left) + _cond_atoms(c.right)
    if isinstance(c, BNot):
        return _cond_atoms(c.arg)
    return []


def combine(a1: Abstraction, a2: Abstraction) -> Abstraction:
    """Least abstraction refining both (union of bindings)."""
    if a1 is a2:
        return a1
    if a1.table is not a2.table or a1.share != a2.share:
        raise IncompatibleAbstractions("abstractions come from different roots")
    tests = dict(a1.tests)
    for key, b in a2.tests.items():
        if key in tests and tests[key] != b:
            raise IncompatibleAbstractions(f"condition bound to {tests[key].sym} and {b.sym}")
        tests[key] = b
    if tests == a1.tests:
        return a1
    if tests == a2.tests:
        return a2
    invariants = a1.invariants if a1.invariants is a2.invariants else _meet_invariants(a1, a2)
    origins = dict(a1.origins)
    origins.update(a2.origins)
    prov = a1.provenance + tuple(p for p in a2.provenance if p not in a1.provenance)
    return Abstraction(a1.table, a1.share, tests, a1.actions, a1.shared_actions, invariants, prov, origins)


def _meet_invariants(a1: Abstraction, a2: Abstraction) -> dict:
    out = {}
    for side in SIDES:
        m1, m2 = a1.invariants[side], a2.invariants[side]
        entry = {}
        for loc, st in m1.items():
            other = m2[loc] if loc in m2 else st
            entry[loc] = _meet(st, other)
        heads = {loc: _meet(m1.loop_head(loc), m2.loop_head(loc)) for loc in m1._heads}
        out[side] = InvariantMap(m1.program, entry, heads, _meet(m1.exit, m2.exit))
    return out


def _meet(a, b):
    if a is None or b is None:
        return None
    env = {}
    for k in {k for k, _ in a.items()} | {k for k, _ in b.items()}:
        iv = a[k].meet(b[k])
        if iv is None:
            return None
        env[k] = iv
    return absint.AbstractState(env)


# ------------------------------------------------------- translation


@dataclass(frozen=True)
class TranslationResult:
    expr: KatExpr
    alpha: Abstraction

    def origins(self) -> dict:
        from .kat import symbols_of

        return {s: self.alpha.origins.get(s, s.display) for s in sorted(symbols_of(self.expr))}


class _Translator:
    def __init__(self, alpha: Abstraction, side: str, prune: bool = True):
        self.alpha = alpha
        self.side = side
        self.inv: InvariantMap = alpha.invariants[side]
        self.prune = prune
        self.loops = {s.loc for s in self.inv.program.statements() if isinstance(s, While)}

    def state(self, loc: Location):
        try:
            return self.inv[loc]
        except KeyError:
            return absint.AbstractState()

    def truth(self, st, c: BoolCond) -> Truth:
        if not self.prune:
            return Truth.UNKNOWN
        return absint.eval_cond(st, c)

    def assume_state(self, s: Assume):
        if not s.loc.tag:
            return self.state(s.loc)
        anchor = Location(s.loc.prog, s.loc.path)
        if anchor in self.loops:
            w = self.inv.program.at(anchor)
            head = self.inv.loop_head(anchor) if self.prune else absint.AbstractState()
            return absint.refine(head, w.cond)
        return self.state(anchor)

    def tr(self, s: Stmt) -> KatExpr:
        if isinstance(s, Seq):
            if s.loc.tag and self.prune and self.state(Location(s.loc.prog, s.loc.path)) is None:
                return ZERO
            return seq(*(self.tr(c) for c in s.stmts))
        if isinstance(s, Assume):
            st = self.assume_state(s)
        else:
            st = self.state(s.loc)
        if self.prune and st is None:
            return ZERO
        if isinstance(s, Skip):
            return ONE
        if isinstance(s, Fail):
            return ZERO
        if isinstance(s, (Assign, EventCall)):
            return act(self.alpha.action_symbol(self.side, s))
        if isinstance(s, Assume):
            t = self.truth(st, s.cond)
            if t is Truth.TRUE:
                return ONE
            if t in (Truth.FALSE, Truth.UNREACHABLE):
                return ZERO
            return self.alpha.cond_expr(self.side, s.cond)
        if isinstance(s, If):
            t = self.truth(st, s.cond)
            if t is Truth.TRUE:
                return self.tr(s.then)
            if t is Truth.FALSE:
                return self.tr(s.els)
            b = self.alpha.cond_expr(self.side, s.cond)
            return plus(seq(b, self.tr(s.then)), seq(neg(b), self.tr(s.els)))
        if isinstance(s, While):
            head = self.inv.loop_head(s.loc) if self.prune else absint.AbstractState()
            if self.prune and head is None:
                return ZERO
            t = self.truth(head, s.cond)
            if t is Truth.FALSE:
                return ONE
            body = self.tr(s.body)
            if t is Truth.TRUE:
                return ZERO
            b = self.alpha.cond_expr(self.side, s.cond)
            return seq(star(seq(b, body)), neg(b))
        raise TypeError(type(s).__name__)


def translate(p: Program, alpha: Abstraction, prune: bool = True) -> TranslationResult:
    """KAT expression for ``p``; unseen assume conditions extend ``alpha``."""
    new = [(p.name, s.cond) for s in p.statements() if isinstance(s, Assume)]
    alpha2 = refine(alpha, new)
    return TranslationResult(_Translator(alpha2, p.name, prune).tr(p.body), alpha2)
