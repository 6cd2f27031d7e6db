"""Trace-refinement relations as values, their composition operators and JSON form.

A relation is a set of tuples (l1, l2, A).  It is valid for a pair (k1, k2)
when every tuple satisfies l1∩k1 ≤_A l2∩k2 (≡_A for equivalence relations)
and the l1 parts together cover k1; ``synth.verify_solution`` decides that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import automata
from .automata import EQUIVALENCE, INCLUSION
from .kat import (
    ONE,
    ActionEq,
    ActionIsSkip,
    HypothesisSet,
    KatExpr,
    Literal,
    Symbol,
    SymbolTable,
    TestConst,
    TestLitEq,
    check_consistent,
    parse_kat,
    plus,
    seq,
    show,
    star,
    symbols_of,
)

SCHEMA = "katrefine/relation/1"


class MixedDirections(ValueError):
    pass


@dataclass(frozen=True)
class RelTuple:
    left: KatExpr
    right: KatExpr
    hyps: HypothesisSet = field(default_factory=HypothesisSet)

    def __str__(self):
        return f"({show(self.left)}, {show(self.right)}, {self.hyps})"


@dataclass(frozen=True)
class TraceRefinementRelation:
    tuples: tuple[RelTuple, ...]
    direction: str = INCLUSION

    def __post_init__(self):
        if self.direction not in (INCLUSION, EQUIVALENCE):
            raise ValueError(f"unknown direction {self.direction!r}")
        object.__setattr__(self, "tuples", tuple(dict.fromkeys(self.tuples)))

    @classmethod
    def of(cls, items: Iterable, direction: str = INCLUSION) -> TraceRefinementRelation:
        """Build from (l1, l2, A) triples; A may be omitted."""
        out = []
        for it in items:
            if isinstance(it, RelTuple):
                out.append(it)
            elif len(it) == 2:
                out.append(RelTuple(it[0], it[1], HypothesisSet()))
            else:
                out.append(RelTuple(*it))
        return cls(tuple(out), direction)

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def __str__(self):
        return "{" + ", ".join(str(t) for t in self.tuples) + "}"

    @property
    def symbols(self) -> frozenset[Symbol]:
        out: set[Symbol] = set()
        for t in self.tuples:
            out |= symbols_of(t.left) | symbols_of(t.right) | t.hyps.symbols()
        return frozenset(out)


def restrict_to(rel: TraceRefinementRelation, k1: KatExpr, k2: KatExpr) -> TraceRefinementRelation:
    """Cut every projection down to its program: (l1∩k1, l2∩k2, A).

    Validity for (k1, k2) is unchanged.  The composition operators assume
    this shape; synthesized leaves already have it.
    """
    return TraceRefinementRelation(
        tuple(RelTuple(automata.intersect(t.left, k1), automata.intersect(t.right, k2), t.hyps) for t in rel),
        rel.direction,
    )


def within(rel: TraceRefinementRelation, k1: KatExpr, k2: KatExpr) -> bool:
    """Every first projection lies in k1 and every second one in k2."""
    return all(automata.included(t.left, k1) and automata.included(t.right, k2) for t in rel)


UNIT = TraceRefinementRelation((RelTuple(ONE, ONE, HypothesisSet()),))


def _same_direction(ta: TraceRefinementRelation, tb: TraceRefinementRelation) -> str:
    if ta.direction != tb.direction:
        raise MixedDirections(f"cannot combine {ta.direction} with {tb.direction} relations")
    return ta.direction


def _join(a: HypothesisSet, b: HypothesisSet) -> HypothesisSet:
    """A ∪ B; raises InconsistentHypotheses rather than build a tuple that holds vacuously."""
    out = a | b
    check_consistent(out)
    return out


def compose_seq(ta: TraceRefinementRelation, tb: TraceRefinementRelation) -> TraceRefinementRelation:
    """Pairwise concatenation: valid for (k1·l1, k2·l2)."""
    d = _same_direction(ta, tb)
    return TraceRefinementRelation(
        tuple(
            RelTuple(seq(x.left, y.left), seq(x.right, y.right), _join(x.hyps, y.hyps))
            for x in ta
            for y in tb
        ),
        d,
    )


def compose_sum(ta: TraceRefinementRelation, tb: TraceRefinementRelation) -> TraceRefinementRelation:
    """Pairwise sums: valid for (k1+l1, k2+l2)."""
    d = _same_direction(ta, tb)
    return TraceRefinementRelation(
        tuple(
            RelTuple(plus(x.left, y.left), plus(x.right, y.right), _join(x.hyps, y.hyps))
            for x in ta
            for y in tb
        ),
        d,
    )


def union(ta: TraceRefinementRelation, tb: TraceRefinementRelation) -> TraceRefinementRelation:
    """Plain union of the tuple sets: also valid for (k1+l1, k2+l2)."""
    d = _same_direction(ta, tb)
    return TraceRefinementRelation(ta.tuples + tb.tuples, d)


def compose_star(t: TraceRefinementRelation) -> TraceRefinementRelation:
    """Star every tuple."""
    return TraceRefinementRelation(
        tuple(RelTuple(star(x.left), star(x.right), x.hyps) for x in t), t.direction
    )


def compose_star_merged(t: TraceRefinementRelation) -> TraceRefinementRelation:
    """One tuple ((Σo)*, (Σp)*, ∪A).

    Starring tuple by tuple loses the traces whose iterations fall under
    different tuples, so with more than one tuple ``compose_star`` can miss
    coverage of k1*; merging first keeps it.
    """
    hyps = HypothesisSet()
    for x in t:
        hyps = _join(hyps, x.hyps)
    return TraceRefinementRelation(
        (RelTuple(star(plus(*(x.left for x in t))), star(plus(*(x.right for x in t))), hyps),), t.direction
    )


@dataclass(frozen=True)
class Undefined:
    """Transitive composition is undefined; ``tuple`` has no partner."""

    tuple: RelTuple

    def __bool__(self):
        return False

    def __str__(self):
        return f"undefined: no partner for {self.tuple}"


def compose_trans(
    ta: TraceRefinementRelation, tb: TraceRefinementRelation
) -> TraceRefinementRelation | Undefined:
    """Chain k ⊑ l by ta and l ⊑ m by tb into k ⊑ m.

    Each (o1, p1, A1) of ta is joined with every (o2, p2, A2) of tb whose
    o2 language-contains p1; a tuple of ta with no such partner makes the
    composition undefined.  Equivalence relations need o2 ≡ p1, and every
    tuple of tb needs a partner too, or the second projections could stop
    covering m.
    """
    d = _same_direction(ta, tb)
    if d == EQUIVALENCE:
        joins = lambda x, y: automata.equivalent(x.right, y.left)
    else:
        joins = lambda x, y: automata.included(x.right, y.left)
    out = []
    used = set()
    for x in ta:
        partners = [y for y in tb if joins(x, y)]
        if not partners:
            return Undefined(x)
        used.update(partners)
        out.extend(RelTuple(x.left, y.right, _join(x.hyps, y.hyps)) for y in partners)
    if d == EQUIVALENCE:
        for y in tb:
            if y not in used:
                return Undefined(y)
    return TraceRefinementRelation(tuple(out), d)


def embed_context(t: TraceRefinementRelation, m: KatExpr, l: KatExpr) -> TraceRefinementRelation:
    """Put every tuple in the same context m·_·l on both sides."""
    return TraceRefinementRelation(
        tuple(RelTuple(seq(m, x.left, l), seq(m, x.right, l), x.hyps) for x in t), t.direction
    )


# ------------------------------------------------------------- JSON


def hyp_to_json(h) -> dict:
    if isinstance(h, ActionIsSkip):
        return {"kind": "skip", "action": h.action.display}
    if isinstance(h, TestConst):
        return {"kind": "const", "test": h.test.display, "value": h.value}
    if isinstance(h, ActionEq):
        return {"kind": "action-eq", "left": h.left.display, "right": h.right.display}
    return {
        "kind": "test-eq",
        "left": h.left.sym.display,
        "left_positive": h.left.positive,
        "right": h.right.sym.display,
        "right_positive": h.right.positive,
    }


def _sym(table: SymbolTable, kind: str, name: str) -> Symbol:
    s = table.lookup(kind, name)
    if s is None:
        raise KeyError(f"unknown {kind} {name!r}")
    return s


def hyp_from_json(d: dict, table: SymbolTable):
    k = d["kind"]
    if k == "skip":
        return ActionIsSkip(_sym(table, "action", d["action"]))
    if k == "const":
        return TestConst(_sym(table, "test", d["test"]), bool(d["value"]))
    if k == "action-eq":
        return ActionEq(_sym(table, "action", d["left"]), _sym(table, "action", d["right"]))
    if k == "test-eq":
        return TestLitEq(
            Literal(_sym(table, "test", d["left"]), d["left_positive"]),
            Literal(_sym(table, "test", d["right"]), d["right_positive"]),
        )
    raise ValueError(f"unknown hypothesis kind {k!r}")


def symbols_to_json(syms: Iterable[Symbol], origins: Optional[dict] = None) -> list[dict]:
    origins = origins or {}
    out = []
    for s in sorted(syms, key=lambda s: (s.kind, s.display)):
        entry = {"kind": s.kind, "name": s.display}
        if s in origins:
            entry["origin"] = origins[s]
        out.append(entry)
    return out


def table_from_json(entries: Sequence[dict], table: Optional[SymbolTable] = None) -> SymbolTable:
    table = table if table is not None else SymbolTable()
    for e in entries:
        table.intern(e["kind"], e["name"], e.get("origin"))
    return table


def tuple_to_json(t: RelTuple) -> dict:
    return {
        "left": show(t.left),
        "right": show(t.right),
        "hypotheses": [hyp_to_json(h) for h in t.hyps],
    }


def to_json(rel: TraceRefinementRelation, extra_symbols: Iterable[Symbol] = (), origins=None) -> dict:
    """Self-contained JSON value: symbols first, expressions as text."""
    syms = set(rel.symbols) | set(extra_symbols)
    return {
        "schema": SCHEMA,
        "direction": rel.direction,
        "symbols": symbols_to_json(syms, origins),
        "tuples": [tuple_to_json(t) for t in rel],
    }


def tuple_from_json(d: dict, table: SymbolTable) -> RelTuple:
    return RelTuple(
        parse_kat(d["left"], table),
        parse_kat(d["right"], table),
        HypothesisSet(hyp_from_json(h, table) for h in d["hypotheses"]),
    )


def from_json(data: dict, table: Optional[SymbolTable] = None) -> tuple[TraceRefinementRelation, SymbolTable]:
    """Read a relation; symbols resolve by (kind, name) against ``table``."""
    if data.get("schema") != SCHEMA:
        raise ValueError(f"not a relation document (schema {data.get('schema')!r})")
    table = table_from_json(data.get("symbols", ()), table)
    rel = TraceRefinementRelation(
        tuple(tuple_from_json(t, table) for t in data["tuples"]), data.get("direction", INCLUSION)
    )
    return rel, table
