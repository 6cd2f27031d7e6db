"""Counterexample-guided synthesis of trace-refinement relations.

The search keeps the two original programs fixed and describes every node
by the located assumptions instrumented into each side plus the current
hypothesis set.  At a node both restricted programs are translated and
compared; a failed check yields counterexamples, the edit distance proposes
repairs, and each repair becomes a case split (two children) or a larger
hypothesis set (one child).  Leaves are the tuples of the relation.

Orientation: ``left`` is the refining program, checked ``left ≤ right``
(or ``≡`` in equivalence mode).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from . import automata
from .algebra import RelTuple, TraceRefinementRelation
from .automata import EQUIVALENCE, INCLUSION, Counterexamples
from .editdist import DEFAULT_SCORES, CaseSplit, Hypothesize, Remove, Replace, ScoreConfig, distance, to_repairs
from .kat import (
    ZERO,
    ActionEq,
    ActionIsSkip,
    CexString,
    HypothesisSet,
    InconsistentHypotheses,
    KatExpr,
    Literal,
    Symbol,
    TestConst,
    TestLitEq,
    actions_of,
    check_consistent,
    plus,
    rewrite_under_hypotheses,
    show,
    symbols_of,
    tests_of,
)
from .lang import Assume, BoolCond, If, Location, Program, While, cond_atoms, instrument, show_cond
from .translate import Abstraction, build_abstraction, canonical, combine, translate


class NoRepairFound(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    direction: str = INCLUSION
    max_depth: int = 8
    max_solutions: int = 256
    protect: frozenset = frozenset()
    scores: ScoreConfig = DEFAULT_SCORES
    share: bool = True
    alternatives: int = 3  # distinct alignments kept per counterexample
    plans_per_node: int = 6  # repair options explored per node
    max_nodes: int = 4000  # node budget across all deepening rounds
    targets: int = 64  # strings of the other side tried as alignment targets
    timeout: Optional[float] = None  # seconds for the whole search

    def __post_init__(self):
        if self.direction not in (INCLUSION, EQUIVALENCE):
            raise ValueError(f"unknown direction {self.direction!r}")
        object.__setattr__(self, "protect", frozenset(self.protect))


# ------------------------------------------------------------- restrictions


@dataclass(frozen=True, order=True)
class Assumption:
    """``assume(cond)`` inserted at ``loc`` of program ``prog``; ``literal`` is its test."""

    prog: str
    loc: Optional[Location]
    literal: Literal
    cond: Optional[BoolCond] = field(compare=False, default=None)
    line: Optional[int] = field(compare=False, default=None)
    text: str = field(compare=False, default="")

    def __str__(self):
        where = self.prog + (f":{self.line}" if self.line else "")
        return f"asm({self.text or self.literal})@{where}"


@dataclass(frozen=True)
class Restriction:
    """Assumptions added to each side plus hypotheses added to A."""

    left: tuple[Assumption, ...] = ()
    right: tuple[Assumption, ...] = ()
    new_hyps: HypothesisSet = field(default_factory=HypothesisSet)

    def __str__(self):
        parts = [str(a) for a in self.left + self.right]
        if len(self.new_hyps):
            parts.append(str(self.new_hyps))
        return " ∧ ".join(parts) or "no restriction"


@dataclass(frozen=True)
class RepairOption:
    """One way out of a counterexample: a case split or a hypothesis step."""

    kind: str  # "split" or "hyp"
    children: tuple[Restriction, ...]
    score: Fraction

    def __str__(self):
        return " | ".join(str(c) for c in self.children)


Locator = Callable[[str, Symbol], Sequence[Assumption]]


def _consistent_with(A: HypothesisSet, hs) -> Optional[HypothesisSet]:
    try:
        out = A.add(*hs)
        check_consistent(out)
        return out
    except (InconsistentHypotheses, ValueError):
        return None


def _alignments(w: CexString, targets: Sequence[CexString], cfg: SynthConfig):
    """Cheapest distinct alignments of w against the targets."""
    scored = []
    seen = set()
    for i, t in enumerate(targets):
        d = distance(w, t, cfg.scores)
        key = frozenset(d.edits)
        if key in seen:
            continue
        seen.add(key)
        scored.append((d.score, i, d))
    scored.sort(key=lambda x: (x[0], x[1]))
    return [(s, d) for s, _, d in scored[: cfg.alternatives]]


def _as_removals(edits):
    """The same alignment with every replacement read as two removals."""
    out = []
    for t in edits:
        if isinstance(t, Replace):
            out += [Remove(1, t.pos, t.element), Remove(2, t.other, t.replacement)]
        else:
            out.append(t)
    return tuple(out)


def solve_diff(
    k1: KatExpr,
    k2: KatExpr,
    A: HypothesisSet,
    cexs: Counterexamples,
    locate: Optional[Locator] = None,
    cfg: SynthConfig = SynthConfig(),
) -> list[RepairOption]:
    """Repair options for a failed check of k1 against k2 under A.

    The counterexample is aligned with the reverse counterexample (if any)
    and with short strings of the other side.  Removing a test literal
    becomes a case split on that test, located by ``locate(side, sym)``
    where side is "left" or "right"; action edits become hypotheses.
    Splits come first, then hypothesis-only options, each by score.
    """
    if cexs.left_not_right is not None:
        w, wside, other, other_cex = cexs.left_not_right, "left", k2, cexs.right_not_left
    else:
        w, wside, other, other_cex = cexs.right_not_left, "right", k1, None
    oside = "right" if wside == "left" else "left"
    shared = frozenset(actions_of(k1)) & frozenset(actions_of(k2))
    n_actions = len(w.actions)
    targets = [] if other_cex is None else [other_cex]
    ga = automata.compile(rewrite_under_hypotheses(other, A))
    targets += automata.accepting_strings(ga, n_actions + 2, cfg.targets)
    if not targets:
        targets = [CexString(())]

    splits: dict[tuple, RepairOption] = {}
    hyps: dict[HypothesisSet, RepairOption] = {}
    readings = []
    for score, d in _alignments(w, targets, cfg):
        readings.append((score, d.edits))
        split = _as_removals(d.edits)
        if split != d.edits:
            extra = sum(1 for t in d.edits if isinstance(t, Replace) and t.same_kind)
            readings.append((score + extra * (2 * cfg.scores.remove_scr - cfg.scores.replace_scr), split))
    for score, edits in readings:
        repairs = to_repairs(edits, cfg.protect)
        H = [r.hypothesis for r in repairs if isinstance(r, Hypothesize) and r.hypothesis not in A]
        H = [h for h in H if _consistent_with(A, [h]) is not None]
        newA = _consistent_with(A, H) if H else None
        if newA is not None:
            extra = HypothesisSet(h for h in newA if h not in A)
            hyps.setdefault(extra, RepairOption("hyp", (Restriction(new_hyps=extra),), score))
        for r in repairs:
            if not isinstance(r, CaseSplit):
                continue
            first = wside if r.side == 1 else oside
            for side in (first, oside if first == wside else wside):
                places = locate(side, r.literal.sym) if locate else [None]
                for place in places:
                    pos = _assume(place, side, r.literal)
                    neg = _assume(place, side, r.literal.negate())
                    key = (side, pos.loc, r.literal.sym)
                    if key in splits:
                        continue
                    kids = tuple(
                        Restriction(left=(a,)) if side == "left" else Restriction(right=(a,))
                        for a in (pos, neg)
                    )
                    splits[key] = RepairOption("split", kids, score)
                if places:
                    break
    options = sorted([*splits.values(), *hyps.values()], key=lambda o: _rank(o, shared))
    if not options:
        raise NoRepairFound(f"no admissible repair for {w}")
    return options


def _rank(o: RepairOption, shared: frozenset):
    # Equalities between distinct events and skips of events both programs
    # perform are bolder guesses than skipping a one-sided event; each costs
    # one extra removal.
    bold = 0
    for r in o.children:
        for h in r.new_hyps:
            if isinstance(h, (ActionEq, TestLitEq)):
                bold += 1
            elif isinstance(h, ActionIsSkip) and h.action in shared:
                bold += 1
    return (o.kind != "split", o.score + bold)


def _assume(place: Optional[Assumption], side: str, literal: Literal) -> Assumption:
    if place is None:
        return Assumption(side, None, literal, text=str(literal))
    return replace(place, literal=literal)


# ------------------------------------------------------------- locating tests


def _cond_syms(alpha: Abstraction, prog: str, c: BoolCond) -> set[Symbol]:
    out = set()
    for rel in cond_atoms(c):
        atom, _ = canonical(rel)
        if atom is not None:
            b = alpha.bound_test(prog, atom)
            if b is not None:
                out.add(b.sym)
    return out


def test_locations(p: Program, alpha: Abstraction) -> dict[Symbol, list[Location]]:
    """Where each test is branched on or assumed in ``p`` (source order)."""
    out: dict[Symbol, list[Location]] = {}
    for s in p.statements():
        if isinstance(s, (If, While, Assume)) and not s.loc.tag:
            for sym in sorted(_cond_syms(alpha, p.name, s.cond)):
                out.setdefault(sym, []).append(s.loc)
    return out


def restrict(
    c_left: Program, r: Restriction, c_right: Program, A: HypothesisSet, alpha: Abstraction
) -> tuple[Program, Program, Abstraction]:
    """Instrument a restriction into both programs and extend alpha."""
    conds = lambda asms: [(a.loc, a.cond) for a in asms]
    d_left = instrument(c_left, conds(r.left)) if r.left else c_left
    d_right = instrument(c_right, conds(r.right)) if r.right else c_right
    t1 = translate(d_left, alpha)
    t2 = translate(d_right, t1.alpha)
    return d_left, d_right, t2.alpha


def restriction_holds(c: Program, d: Program, alpha: Abstraction) -> bool:
    """translate(D) ≡ translate(C) ∩ r with r rendered as translate(D)."""
    kd = translate(d, alpha).expr
    kc = translate(c, alpha).expr
    return automata.equivalent(kd, automata.intersect(kc, kd))


# ------------------------------------------------------------- solution trees


@dataclass(frozen=True)
class Leaf:
    left: KatExpr
    right: KatExpr
    hyps: HypothesisSet
    left_asms: tuple[Assumption, ...]
    right_asms: tuple[Assumption, ...]

    complete = True


@dataclass(frozen=True)
class Unsolved:
    left_asms: tuple[Assumption, ...]
    right_asms: tuple[Assumption, ...]
    hyps: HypothesisSet
    reason: str

    complete = False


@dataclass(frozen=True)
class Branch:
    """A case split: one child per assumption, in the order positive, negative."""

    split: Assumption
    side: str
    children: tuple[tuple[Assumption, "Tree"], ...]
    covered: bool

    @property
    def complete(self) -> bool:
        return self.covered and all(t.complete for _, t in self.children)


Tree = Union[Leaf, Unsolved, Branch]


def leaves(t: Tree) -> Iterator[Leaf]:
    if isinstance(t, Leaf):
        yield t
    elif isinstance(t, Branch):
        for _, c in t.children:
            yield from leaves(c)


def _has_leaf(t: Tree) -> bool:
    return next(leaves(t), None) is not None


@dataclass(frozen=True)
class Solution:
    tree: Tree

    @property
    def complete(self) -> bool:
        return self.tree.complete

    @property
    def leaves(self) -> tuple[Leaf, ...]:
        return tuple(leaves(self.tree))

    def relation(self, direction: str) -> TraceRefinementRelation:
        return TraceRefinementRelation(
            tuple(RelTuple(l.left, l.right, l.hyps) for l in self.leaves), direction
        )

    def sort_key(self):
        ls = self.leaves
        return (not self.complete, len(ls), sum(len(l.hyps) for l in ls))


# ------------------------------------------------------------- verification


@dataclass(frozen=True)
class Violation:
    kind: str  # "inclusion", "equivalence" or "coverage"
    index: Optional[int]
    cex: Optional[CexString]
    detail: str = ""

    def __bool__(self):
        return False

    def __str__(self):
        where = f" in tuple {self.index + 1}" if self.index is not None else ""
        cex = f": {self.cex}" if self.cex is not None else ""
        return f"{self.kind} violated{where}{cex}"


def verify_solution(
    rel: TraceRefinementRelation, k1: KatExpr, k2: KatExpr
) -> automata.Ok | Violation:
    """Check a relation against (k1, k2) from scratch with the automata layer."""
    eq = rel.direction == EQUIVALENCE
    for i, t in enumerate(rel):
        a = automata.intersect(t.left, k1)
        b = automata.intersect(t.right, k2)
        res = automata.check(a, b, t.hyps, rel.direction)
        if not res:
            cex = res.left_not_right if res.left_not_right is not None else res.right_not_left
            return Violation("equivalence" if eq else "inclusion", i, cex, str(t))
    firsts = plus(*(t.left for t in rel)) if len(rel) else ZERO
    res = automata.check(k1, firsts, HypothesisSet(), INCLUSION)
    if not res:
        return Violation("coverage", None, res.left_not_right, "left projections miss part of k1")
    if eq:
        seconds = plus(*(t.right for t in rel)) if len(rel) else ZERO
        res = automata.check(k2, seconds, HypothesisSet(), INCLUSION)
        if not res:
            return Violation("coverage", None, res.left_not_right, "right projections miss part of k2")
    return automata.Ok()


def trivial_tuple(k1: KatExpr, k2: KatExpr, direction: str = INCLUSION) -> Optional[RelTuple]:
    """(k1, k2, A) with every action ≡ 1 and every test fixed to a constant.

    All-false tests are tried first; the first assignment that makes the
    collapsed expressions compare is used.  None when no assignment works
    (k2 ≡ 0 while k1 is not, for inclusion).
    """
    acts = sorted(set(actions_of(k1)) | set(actions_of(k2)))
    tests = sorted(set(tests_of(k1)) | set(tests_of(k2)))
    base = [ActionIsSkip(a) for a in acts]
    for vals in itertools.product((False, True), repeat=len(tests)):
        A = HypothesisSet(base + [TestConst(t, v) for t, v in zip(tests, vals)])
        if automata.check(k1, k2, A, direction):
            return RelTuple(k1, k2, A)
    return None


def ref_relation(
    solution: Solution, direction: str, alphas: Iterable[Abstraction] = ()
) -> TraceRefinementRelation:
    """The relation of a solution; its abstractions must combine."""
    alphas = list(alphas)
    if alphas:
        common = alphas[0]
        for a in alphas[1:]:
            common = combine(common, a)
    return solution.relation(direction)


def completed_relation(
    solution: Solution, k1: KatExpr, k2: KatExpr, direction: str
) -> Optional[TraceRefinementRelation]:
    """The relation, with the trivial tuple appended when the tree is partial."""
    rel = solution.relation(direction)
    if solution.complete:
        return rel
    t = trivial_tuple(k1, k2, direction)
    if t is None:
        return None
    return TraceRefinementRelation(rel.tuples + (t,), direction)


# ------------------------------------------------------------- search


@dataclass(frozen=True)
class _Node:
    left: frozenset
    right: frozenset
    hyps: HypothesisSet


@dataclass
class SynthResult:
    solutions: list[Solution]
    left: Program
    right: Program
    k_left: KatExpr
    k_right: KatExpr
    alpha: Abstraction
    config: SynthConfig
    stats: dict = field(default_factory=dict)

    @property
    def direction(self) -> str:
        return self.config.direction


class _Search:
    def __init__(self, left: Program, right: Program, alpha: Abstraction, cfg: SynthConfig):
        self.base = {"left": left, "right": right}
        self.alpha = alpha
        self.cfg = cfg
        self.memo: dict[_Node, tuple[int, list[Tree]]] = {}
        self.exprs: dict[tuple, KatExpr] = {}
        self.deadline = None if cfg.timeout is None else time.monotonic() + cfg.timeout
        self.limit = cfg.max_depth
        self.holds: set[_Node] = set()
        self.stats = {"nodes": 0, "checks": 0, "timed_out": False}
        self.places = {}
        for side, p in self.base.items():
            locs = test_locations(p, alpha)
            self.places[side] = {
                sym: [
                    Assumption(p.name, loc, Literal(sym), line=p.line_of(loc))
                    for loc in ls
                ]
                for sym, ls in locs.items()
            }

    # -- helpers
    def locate(self, side: str, sym: Symbol) -> list[Assumption]:
        out = []
        for place in self.places[side].get(sym, []):
            out.append(place)
        return out

    def _with_cond(self, a: Assumption) -> Assumption:
        cond = self.alpha.cond_of_literal(a.literal.sym, a.literal.positive)
        return replace(a, cond=cond, text=show_cond(cond))

    def expr(self, side: str, asms: frozenset) -> KatExpr:
        key = (side, asms)
        e = self.exprs.get(key)
        if e is None:
            p = self.base[side]
            if asms:
                p = instrument(p, [(a.loc, a.cond) for a in sorted(asms)])
            e = translate(p, self.alpha).expr
            self.exprs[key] = e
        return e

    def exprs_of(self, n: _Node) -> tuple[KatExpr, KatExpr]:
        return self.expr("left", n.left), self.expr("right", n.right)

    def exhausted(self) -> bool:
        return self.stats["nodes"] >= self.cfg.max_nodes or self.timed_out()

    def timed_out(self) -> bool:
        if self.deadline is not None and time.monotonic() > self.deadline:
            self.stats["timed_out"] = True
            return True
        return False

    def is_cex(self, w: CexString, wside: str, n: _Node) -> bool:
        kl, kr = self.exprs_of(n)
        if wside == "left":
            return automata.is_counterexample(w, kl, kr, n.hyps)
        return automata.is_counterexample(w, kr, kl, n.hyps)

    # -- children of a repair option
    def children(self, n: _Node, opt: RepairOption, w: CexString, wside: str, H: Optional[HypothesisSet]):
        out = []
        for r in opt.children:
            left = n.left | frozenset(self._with_cond(a) for a in r.left)
            right = n.right | frozenset(self._with_cond(a) for a in r.right)
            hyps = n.hyps.union(r.new_hyps)
            child = _Node(left, right, hyps)
            if opt.kind == "split" and H is not None and self.is_cex(w, wside, child):
                with_h = _Node(left, right, hyps.union(H))
                if not self.is_cex(w, wside, with_h):
                    child = with_h
            out.append(child)
        return out

    def _progress(self, n: _Node, kids: list[_Node], w: CexString, wside: str) -> bool:
        if any(self.exprs_of(k) == self.exprs_of(n) and k.hyps == n.hyps for k in kids):
            return False
        return any(not self.is_cex(w, wside, k) for k in kids)

    # -- main recursion
    def solve(self, n: _Node, depth: int, path: frozenset) -> list[Tree]:
        hit = self.memo.get(n)
        if hit is not None and hit[0] <= depth:
            return hit[1]
        self.stats["nodes"] += 1
        kl, kr = self.exprs_of(n)
        self.stats["checks"] += 1
        res = automata.check(kl, kr, n.hyps, self.cfg.direction)
        if res:
            self.holds.add(n)
            trees: list[Tree] = [Leaf(kl, kr, n.hyps, tuple(sorted(n.left)), tuple(sorted(n.right)))]
        elif depth >= self.limit or self.exhausted():
            trees = []
        else:
            trees = self._repair(n, res, depth, path)
        self.memo[n] = (depth, trees)
        return trees

    def _repair(self, n: _Node, res: Counterexamples, depth: int, path: frozenset) -> list[Tree]:
        kl, kr = self.exprs_of(n)
        try:
            options = solve_diff(kl, kr, n.hyps, res, self.locate, self.cfg)
        except NoRepairFound:
            return []
        w, wside = (
            (res.left_not_right, "left") if res.left_not_right is not None else (res.right_not_left, "right")
        )
        hyp_sets = [o.children[0].new_hyps for o in options if o.kind == "hyp"]
        trees: list[Tree] = []
        tried = 0
        for opt in options:
            if tried >= self.cfg.plans_per_node or len(trees) >= self.cfg.max_solutions:
                break
            if opt.kind == "split":
                a = opt.children[0].left + opt.children[0].right
                key = (a[0].prog, a[0].loc, a[0].literal.sym)
                if key in path:
                    continue
                sub_path = path | {key}
                found = []
                for H in [None] + hyp_sets:
                    kids = self.children(n, opt, w, wside, H)
                    if self._progress(n, kids, w, wside):
                        found = kids
                        break
                if not found:
                    continue
                tried += 1
                trees.extend(self._split_trees(n, opt, found, depth, sub_path))
            else:
                kids = self.children(n, opt, w, wside, None)
                if not self._progress(n, kids, w, wside):
                    continue
                tried += 1
                trees.extend(self.solve(kids[0], depth + 1, path))
        return _dedupe(trees)[: self.cfg.max_solutions]

    def _split_trees(self, n: _Node, opt: RepairOption, kids: list[_Node], depth: int, path) -> list[Tree]:
        side = "left" if opt.children[0].left else "right"
        split = self._with_cond((opt.children[0].left + opt.children[0].right)[0])
        alts = []
        for r, k in zip(opt.children, kids):
            case = self._with_cond((r.left + r.right)[0])
            sub = self.solve(k, depth + 1, path)
            if not sub:
                sub = [Unsolved(tuple(sorted(k.left)), tuple(sorted(k.right)), k.hyps, "no repair found")]
            alts.append([(case, t) for t in sub])
        covered = self._covers(n, kids)
        out = []
        for combo in itertools.islice(itertools.product(*alts), self.cfg.max_solutions):
            if not any(_has_leaf(t) for _, t in combo):
                continue
            out.append(Branch(split, side, tuple(combo), covered))
        return out

    def _covers(self, n: _Node, kids: list[_Node]) -> bool:
        kl, kr = self.exprs_of(n)
        ok = automata.included(kl, plus(*(self.exprs_of(k)[0] for k in kids)))
        if ok and self.cfg.direction == EQUIVALENCE:
            ok = automata.included(kr, plus(*(self.exprs_of(k)[1] for k in kids)))
        return ok


def _dedupe(trees: list[Tree]) -> list[Tree]:
    return list(dict.fromkeys(trees))


def synth(
    left: Program,
    right: Program,
    cfg: SynthConfig = SynthConfig(),
    alpha: Optional[Abstraction] = None,
    A: HypothesisSet = HypothesisSet(),
) -> SynthResult:
    """All solution trees found within the budget, best first.

    ``alpha`` defaults to the shared-symbol abstraction of the pair with
    C1 bound first.
    """
    if alpha is None:
        c1, c2 = (left, right) if left.name == "C1" else (right, left)
        alpha = build_abstraction(c1, c2, share=cfg.share)
    search = _Search(left, right, alpha, cfg)
    root = _Node(frozenset(), frozenset(), A)
    # iterative deepening: shallow trees (few tuples) are found first
    trees: list[Tree] = []
    for limit in range(1, cfg.max_depth + 1):
        search.limit = limit
        search.memo.clear()
        trees = _dedupe(trees + search.solve(root, 0, frozenset()))
        if search.exhausted() or root in search.holds:
            break
    sols = sorted((Solution(t) for t in trees), key=lambda s: s.sort_key())
    kl, kr = search.exprs_of(root)
    return SynthResult(sols[: cfg.max_solutions], left, right, kl, kr, alpha, cfg, search.stats)
