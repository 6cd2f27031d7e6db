"""Scored edit distance between two counterexample strings.

Elements are labeled by (side, position) in the original strings, so the
transformations can be applied in any order.  Side 1 is the first string.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .kat import (
    ActionEq,
    ActionIsSkip,
    CexString,
    Element,
    Hypothesis,
    Literal,
    Symbol,
    TestLitEq,
)


@dataclass(frozen=True)
class ScoreConfig:
    remove_scr: Fraction = Fraction(1)
    replace_scr: Fraction = Fraction(1)
    match_scr: Fraction = Fraction(-1, 4)
    # None: the combined length of the two input strings
    penalty_scr: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("remove_scr", "replace_scr", "match_scr", "penalty_scr"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, Fraction(v))

    def penalty_for(self, n1: int, n2: int) -> Fraction:
        return self.penalty_scr if self.penalty_scr is not None else Fraction(n1 + n2)

    def as_dict(self) -> dict:
        return {
            "remove_scr": str(self.remove_scr),
            "replace_scr": str(self.replace_scr),
            "match_scr": str(self.match_scr),
            "penalty_scr": "len(s1)+len(s2)" if self.penalty_scr is None else str(self.penalty_scr),
        }

    @classmethod
    def parse(cls, text: str) -> ScoreConfig:
        """Read ``remove=1,replace=1,match=-1/4,penalty=8`` style overrides."""
        kw = {}
        for chunk in filter(None, (c.strip() for c in text.split(","))):
            key, _, val = chunk.partition("=")
            key = key.strip().removesuffix("_scr")
            if key not in ("remove", "replace", "match", "penalty") or not val.strip():
                raise ValueError(f"bad score setting {chunk!r}")
            kw[key + "_scr"] = Fraction(val.strip())
        return cls(**kw)


DEFAULT_SCORES = ScoreConfig()


def _kind(el: Element) -> str:
    return "test" if isinstance(el, Literal) else "action"


@dataclass(frozen=True)
class Remove:
    side: int
    pos: int
    element: Element

    def __str__(self):
        return f"Remove({self.element}, s{self.side})"


@dataclass(frozen=True)
class Replace:
    """Replace s1[pos] by the element at s2[other]."""

    pos: int
    element: Element
    replacement: Element
    other: int

    @property
    def same_kind(self) -> bool:
        return _kind(self.element) == _kind(self.replacement)

    def __str__(self):
        return f"Replace({self.element}, {self.replacement}, s1)"


@dataclass(frozen=True)
class Match:
    pos1: int
    pos2: int
    element: Element

    def __str__(self):
        return f"Match({self.element})"


Transformation = Union[Remove, Replace, Match]


class Distance(NamedTuple):
    transformations: tuple[Transformation, ...]
    score: Fraction

    @property
    def edits(self) -> tuple[Transformation, ...]:
        """Everything except the matches."""
        return tuple(t for t in self.transformations if not isinstance(t, Match))


def distance(s1: CexString, s2: CexString, cfg: ScoreConfig = DEFAULT_SCORES) -> Distance:
    """Cheapest alignment of two strings.

    Bottom-up over suffix pairs.  Two empty suffixes score ``match_scr``;
    one empty suffix scores a removal per remaining element.  Otherwise the
    cheapest of align-heads, drop the head of s1, drop the head of s2, with
    ties resolved in that order.
    """
    a, b = tuple(s1), tuple(s2)
    n, m = len(a), len(b)
    penalty = cfg.penalty_for(n, m)
    # best[i][j]: (score, move) for the suffixes a[i:], b[j:]
    best: list[list] = [[None] * (m + 1) for _ in range(n + 1)]
    best[n][m] = (cfg.match_scr, None)
    for i in range(n - 1, -1, -1):
        best[i][m] = ((n - i) * cfg.remove_scr, "left")
    for j in range(m - 1, -1, -1):
        best[n][j] = ((m - j) * cfg.remove_scr, "right")
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                align = cfg.match_scr
            elif _kind(a[i]) == _kind(b[j]):
                align = cfg.replace_scr
            else:
                align = penalty
            options = (
                (best[i + 1][j + 1][0] + align, "align"),
                (best[i + 1][j][0] + cfg.remove_scr, "left"),
                (best[i][j + 1][0] + cfg.remove_scr, "right"),
            )
            choice = options[0]
            for opt in options[1:]:
                if opt[0] < choice[0]:
                    choice = opt
            best[i][j] = choice

    out: list[Transformation] = []
    i = j = 0
    while i < n or j < m:
        move = best[i][j][1]
        if move == "align":
            if a[i] == b[j]:
                out.append(Match(i, j, a[i]))
            else:
                out.append(Replace(i, a[i], b[j], j))
            i, j = i + 1, j + 1
        elif move == "left":
            out.append(Remove(1, i, a[i]))
            i += 1
        else:
            out.append(Remove(2, j, b[j]))
            j += 1
    return Distance(tuple(out), best[0][0][0])


def apply(ts: Iterable[Transformation], s1: CexString, s2: CexString) -> tuple[CexString, CexString]:
    """Apply the transformations to both strings."""
    left: list = list(s1)
    right: list = list(s2)
    gone = object()
    for t in ts:
        if isinstance(t, Remove):
            (left if t.side == 1 else right)[t.pos] = gone
        elif isinstance(t, Replace):
            left[t.pos] = t.replacement
    keep = lambda xs: CexString(x for x in xs if x is not gone)
    return keep(left), keep(right)


def mirror(t: Transformation) -> Transformation:
    """The same edit with the roles of the two strings swapped."""
    if isinstance(t, Remove):
        return Remove(3 - t.side, t.pos, t.element)
    if isinstance(t, Match):
        return Match(t.pos2, t.pos1, t.element)
    return Replace(t.other, t.replacement, t.element, t.pos)


# ------------------------------------------------------------- repairs


@dataclass(frozen=True)
class Hypothesize:
    hypothesis: Hypothesis

    def __str__(self):
        return f"assume {self.hypothesis}"


@dataclass(frozen=True)
class CaseSplit:
    """Split both ways on a test literal seen in the string on ``side``."""

    literal: Literal
    side: int

    @property
    def branches(self) -> tuple[Literal, Literal]:
        return (self.literal, self.literal.negate())

    def __str__(self):
        return f"split on {self.literal.sym} (s{self.side})"


RepairAction = Union[Hypothesize, CaseSplit]


def _removal(el: Element, side: int, protect) -> Optional[RepairAction]:
    if isinstance(el, Literal):
        return CaseSplit(Literal(el.sym, True), side)
    if el in protect or el.display in protect:
        return None
    return Hypothesize(ActionIsSkip(el))


def to_repairs(ts: Sequence[Transformation], protect: Iterable = ()) -> list[RepairAction]:
    """Turn edits into restriction and hypothesis proposals.

    Protected events (symbols or display names) never enter a hypothesis.
    A cross-kind replacement is treated as removing both elements.  A
    replacement of a literal by its own negation has no consistent
    hypothesis and becomes a case split.
    """
    protect = set(protect)
    out: dict[RepairAction, None] = {}

    def add(r):
        if r is not None:
            out[r] = None

    for t in ts:
        if isinstance(t, Remove):
            add(_removal(t.element, t.side, protect))
        elif isinstance(t, Replace):
            x, y = t.element, t.replacement
            if not t.same_kind:
                add(_removal(x, 1, protect))
                add(_removal(y, 2, protect))
            elif isinstance(x, Literal):
                if x.sym == y.sym:
                    add(CaseSplit(Literal(x.sym, True), 1))
                else:
                    add(Hypothesize(TestLitEq(x, y)))
            elif not ({x, y} & protect or {x.display, y.display} & protect):
                add(Hypothesize(ActionEq(x, y)))
    return list(out)
