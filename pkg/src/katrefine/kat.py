"""Two-sorted KAT terms: symbols, smart constructors, hypotheses, text syntax.

Expressions are immutable and structurally hashed.  Every constructor goes
through the smart constructors below, so trees are always in the small
normal form they enforce (flattened, deduplicated, units dropped).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache, total_ordering
from typing import Iterable, Iterator, Sequence, Union

ACTION = "action"
TEST = "test"


class InconsistentHypotheses(ValueError):
    pass


class KatSyntaxError(ValueError):
    pass


@total_ordering
class Symbol:
    """An action or test symbol.  Identity is the id; ids come from one counter."""

    __slots__ = ("id", "kind", "display", "origin")

    def __init__(self, id: int, kind: str, display: str, origin: str | None = None):
        if kind not in (ACTION, TEST):
            raise ValueError(f"bad symbol kind {kind!r}")
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "display", display)
        object.__setattr__(self, "origin", origin)

    def __setattr__(self, name, value):
        raise AttributeError("Symbol is immutable")

    def __eq__(self, other):
        return isinstance(other, Symbol) and self.id == other.id

    def __hash__(self):
        return hash(("sym", self.id))

    def __lt__(self, other):
        return self.id < other.id

    @property
    def is_action(self) -> bool:
        return self.kind == ACTION

    @property
    def is_test(self) -> bool:
        return self.kind == TEST

    def __repr__(self):
        return f"Symbol({self.id}, {self.kind}, {self.display!r})"

    def __str__(self):
        return render_name(self.display)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def render_name(display: str) -> str:
    return display if _IDENT.match(display) else "{" + display + "}"


_ids = itertools.count()


class SymbolTable:
    """Interns symbols by (kind, display).  Single writer.

    Ids come from one process-wide counter, so symbols of different tables
    never compare equal and caches keyed on expressions stay sound.
    """

    def __init__(self):
        self._by_name: dict[tuple[str, str], Symbol] = {}
        self._symbols: list[Symbol] = []

    def intern(self, kind: str, display: str, origin: str | None = None) -> Symbol:
        key = (kind, display)
        sym = self._by_name.get(key)
        if sym is None:
            sym = Symbol(next(_ids), kind, display, origin)
            self._by_name[key] = sym
            self._symbols.append(sym)
        return sym

    def action(self, display: str, origin: str | None = None) -> Symbol:
        return self.intern(ACTION, display, origin)

    def test(self, display: str, origin: str | None = None) -> Symbol:
        return self.intern(TEST, display, origin)

    def lookup(self, kind: str, display: str) -> Symbol | None:
        return self._by_name.get((kind, display))

    def lookup_any(self, display: str) -> Symbol | None:
        return self._by_name.get((ACTION, display)) or self._by_name.get((TEST, display))

    def has_name(self, display: str) -> bool:
        return self.lookup_any(display) is not None

    def fresh_test_name(self) -> str:
        n = 0
        while True:
            name = _letters(n)
            if not self.has_name(name):
                return name
            n += 1

    @property
    def symbols(self) -> tuple[Symbol, ...]:
        return tuple(self._symbols)

    @property
    def actions(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self._symbols if s.is_action)

    @property
    def tests(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self._symbols if s.is_test)

    def __len__(self):
        return len(self._symbols)


def _letters(n: int) -> str:
    out = ""
    n += 1
    while n:
        n, r = divmod(n - 1, 26)
        out = chr(ord("a") + r) + out
    return out


# ---------------------------------------------------------------- expressions

T_ZERO, T_ONE, T_TEST, T_NOT, T_AND, T_OR, T_ACT, T_SEQ, T_SUM, T_STAR = range(10)


class KatExpr:
    __slots__ = ("_key", "_hash")
    tag = -1

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, KatExpr)
            and self._hash == other._hash
            and self._key == other._key
        )

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        return f"<kat {show(self)}>"

    def __str__(self):
        return show(self)

    @property
    def children(self) -> tuple[KatExpr, ...]:
        return ()

    @property
    def is_bool(self) -> bool:
        return False


class BoolExpr(KatExpr):
    __slots__ = ()

    @property
    def is_bool(self) -> bool:
        return True


def _init(node, key, hsh):
    object.__setattr__(node, "_key", key)
    object.__setattr__(node, "_hash", hsh)


class Zero(BoolExpr):
    __slots__ = ()
    tag = T_ZERO


class One(BoolExpr):
    __slots__ = ()
    tag = T_ONE


ZERO = Zero()
_init(ZERO, (T_ZERO,), hash((T_ZERO,)))
ONE = One()
_init(ONE, (T_ONE,), hash((T_ONE,)))


class Test(BoolExpr):
    __slots__ = ("sym",)
    tag = T_TEST

    def __init__(self, sym: Symbol):
        if not sym.is_test:
            raise TypeError(f"{sym.display} is not a test symbol")
        object.__setattr__(self, "sym", sym)
        _init(self, (T_TEST, sym.id), hash((T_TEST, sym.id)))


class Not(BoolExpr):
    __slots__ = ("arg",)
    tag = T_NOT

    def __init__(self, arg: BoolExpr):
        object.__setattr__(self, "arg", arg)
        _init(self, (T_NOT, arg._key), hash((T_NOT, arg._hash)))

    @property
    def children(self):
        return (self.arg,)


class _Nary(KatExpr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        object.__setattr__(self, "args", args)
        _init(
            self,
            (self.tag,) + tuple(a._key for a in args),
            hash((self.tag,) + tuple(a._hash for a in args)),
        )

    @property
    def children(self):
        return self.args


class And(_Nary, BoolExpr):
    __slots__ = ()
    tag = T_AND


class Or(_Nary, BoolExpr):
    __slots__ = ()
    tag = T_OR


class Act(KatExpr):
    __slots__ = ("sym",)
    tag = T_ACT

    def __init__(self, sym: Symbol):
        if not sym.is_action:
            raise TypeError(f"{sym.display} is not an action symbol")
        object.__setattr__(self, "sym", sym)
        _init(self, (T_ACT, sym.id), hash((T_ACT, sym.id)))


class Seq(_Nary):
    __slots__ = ()
    tag = T_SEQ


class Sum(_Nary):
    __slots__ = ()
    tag = T_SUM


class Star(KatExpr):
    __slots__ = ("arg",)
    tag = T_STAR

    def __init__(self, arg: KatExpr):
        object.__setattr__(self, "arg", arg)
        _init(self, (T_STAR, arg._key), hash((T_STAR, arg._hash)))

    @property
    def children(self):
        return (self.arg,)


for _cls in (Zero, One, Test, Not, And, Or, Act, Seq, Sum, Star):
    _cls.__setattr__ = lambda self, name, value: (_ for _ in ()).throw(
        AttributeError("KAT expressions are immutable")
    )


# --------------------------------------------------------- smart constructors


def test(sym: Symbol) -> BoolExpr:
    return Test(sym)


def act(sym: Symbol) -> KatExpr:
    return Act(sym)


def neg(b: BoolExpr) -> BoolExpr:
    if not b.is_bool:
        raise TypeError("negation applies to boolean expressions only")
    if b is ZERO:
        return ONE
    if b is ONE:
        return ZERO
    if isinstance(b, Not):
        return b.arg
    return Not(b)


def _complement_present(items: Sequence[BoolExpr]) -> bool:
    keys = {x._key for x in items}
    for x in items:
        if isinstance(x, Not) and x.arg._key in keys:
            return True
    return False


def conj(*xs: BoolExpr) -> BoolExpr:
    flat: list[BoolExpr] = []
    for x in xs:
        if not x.is_bool:
            raise TypeError("conjunction of non-boolean expression")
        if x is ZERO:
            return ZERO
        if x is ONE:
            continue
        if isinstance(x, And):
            flat.extend(x.args)
        else:
            flat.append(x)
    uniq = sorted(set(flat))
    if _complement_present(uniq):
        return ZERO
    if not uniq:
        return ONE
    if len(uniq) == 1:
        return uniq[0]
    return And(tuple(uniq))


def disj(*xs: BoolExpr) -> BoolExpr:
    flat: list[BoolExpr] = []
    for x in xs:
        if not x.is_bool:
            raise TypeError("disjunction of non-boolean expression")
        if x is ONE:
            return ONE
        if x is ZERO:
            continue
        if isinstance(x, Or):
            flat.extend(x.args)
        else:
            flat.append(x)
    uniq = sorted(set(flat))
    if _complement_present(uniq):
        return ONE
    if not uniq:
        return ZERO
    if len(uniq) == 1:
        return uniq[0]
    return Or(tuple(uniq))


def seq(*xs: KatExpr) -> KatExpr:
    flat: list[KatExpr] = []
    for x in xs:
        if x is ZERO:
            return ZERO
        if x is ONE:
            continue
        parts = x.args if isinstance(x, Seq) else (x,)
        for p in parts:
            # adjacent tests merge into one conjunction
            if p.is_bool and flat and flat[-1].is_bool:
                merged = conj(flat[-1], p)
                if merged is ZERO:
                    return ZERO
                flat[-1] = merged
                if merged is ONE:
                    flat.pop()
            else:
                flat.append(p)
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def plus(*xs: KatExpr) -> KatExpr:
    flat: list[KatExpr] = []
    for x in xs:
        if x is ZERO:
            continue
        if isinstance(x, Sum):
            flat.extend(x.args)
        else:
            flat.append(x)
    if flat and all(x.is_bool for x in flat):
        return disj(*flat)
    uniq = sorted(set(flat))
    if not uniq:
        return ZERO
    if len(uniq) == 1:
        return uniq[0]
    return Sum(tuple(uniq))


def star(x: KatExpr) -> KatExpr:
    if x.is_bool:
        return ONE
    if isinstance(x, Star):
        return x
    if isinstance(x, Sum):
        # (b + e)* = e* for tests b
        rest = [a for a in x.args if not a.is_bool]
        if len(rest) != len(x.args):
            return star(plus(*rest))
    return Star(x)


def lit(sym: Symbol, positive: bool = True) -> BoolExpr:
    t = Test(sym)
    return t if positive else Not(t)


def rebuild(e: KatExpr, args: Sequence[KatExpr]) -> KatExpr:
    """Apply e's constructor to new children through the smart constructors."""
    tag = e.tag
    if tag == T_NOT:
        return neg(args[0])
    if tag == T_AND:
        return conj(*args)
    if tag == T_OR:
        return disj(*args)
    if tag == T_SEQ:
        return seq(*args)
    if tag == T_SUM:
        return plus(*args)
    if tag == T_STAR:
        return star(args[0])
    return e


def normalize(e: KatExpr) -> KatExpr:
    """Rebuild bottom-up; a no-op on trees built by the smart constructors."""
    if not e.children:
        return e
    return rebuild(e, [normalize(c) for c in e.children])


def symbols_of(e: KatExpr) -> frozenset[Symbol]:
    return _symbols_of(e)


@lru_cache(maxsize=100_000)
def _symbols_of(e: KatExpr) -> frozenset[Symbol]:
    if isinstance(e, (Test, Act)):
        return frozenset((e.sym,))
    out: frozenset[Symbol] = frozenset()
    for c in e.children:
        out |= _symbols_of(c)
    return out


def actions_of(e: KatExpr) -> tuple[Symbol, ...]:
    return tuple(sorted(s for s in symbols_of(e) if s.is_action))


def tests_of(e: KatExpr) -> tuple[Symbol, ...]:
    return tuple(sorted(s for s in symbols_of(e) if s.is_test))


def size(e: KatExpr) -> int:
    return 1 + sum(size(c) for c in e.children)


# ----------------------------------------------------------------- printing

_PREC = {T_SUM: 1, T_OR: 1, T_SEQ: 2, T_AND: 2, T_NOT: 3, T_STAR: 4}


def show(e: KatExpr, dot: str = "·") -> str:
    return _show(e, 0, dot)


def _show(e: KatExpr, ctx: int, dot: str) -> str:
    tag = e.tag
    if tag == T_ZERO:
        return "0"
    if tag == T_ONE:
        return "1"
    if tag in (T_TEST, T_ACT):
        return str(e.sym)
    prec = _PREC[tag]
    if tag in (T_SUM, T_OR):
        text = " + ".join(_show(a, prec + 1, dot) for a in e.args)
    elif tag in (T_SEQ, T_AND):
        text = dot.join(_show(a, prec + 1, dot) for a in e.args)
    elif tag == T_NOT:
        text = "!" + _show(e.arg, prec + 1, dot)
    else:
        text = _show(e.arg, prec + 1, dot) + "*"
    return f"({text})" if prec < ctx else text


# --------------------------------------------------------------- hypotheses


@total_ordering
@dataclass(frozen=True)
class Literal:
    sym: Symbol
    positive: bool = True

    def __post_init__(self):
        if not self.sym.is_test:
            raise TypeError("literals are over test symbols")

    def negate(self) -> Literal:
        return Literal(self.sym, not self.positive)

    def expr(self) -> BoolExpr:
        return lit(self.sym, self.positive)

    def sort_key(self):
        return (self.sym.id, 0 if self.positive else 1)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return ("" if self.positive else "!") + str(self.sym)


@dataclass(frozen=True)
class ActionIsSkip:
    action: Symbol

    def __post_init__(self):
        if not self.action.is_action:
            raise TypeError("ActionIsSkip needs an action symbol")

    def sort_key(self):
        return (0, self.action.id)

    def symbols(self):
        return (self.action,)

    def __str__(self):
        return f"{self.action}=1"


@dataclass(frozen=True)
class TestConst:
    test: Symbol
    value: bool

    def __post_init__(self):
        if not self.test.is_test:
            raise TypeError("TestConst needs a test symbol")

    def sort_key(self):
        return (1, self.test.id, int(self.value))

    def symbols(self):
        return (self.test,)

    def __str__(self):
        return f"{self.test}={int(self.value)}"


@dataclass(frozen=True)
class ActionEq:
    left: Symbol
    right: Symbol

    def __post_init__(self):
        if not (self.left.is_action and self.right.is_action):
            raise TypeError("ActionEq relates action symbols")
        if self.left == self.right:
            raise ValueError("ActionEq relates two distinct symbols")
        if self.right.id < self.left.id:
            a, b = self.right, self.left
            object.__setattr__(self, "left", a)
            object.__setattr__(self, "right", b)

    def sort_key(self):
        return (2, self.left.id, self.right.id)

    def symbols(self):
        return (self.left, self.right)

    def __str__(self):
        return f"{self.left}={self.right}"


@dataclass(frozen=True)
class TestLitEq:
    left: Literal
    right: Literal

    def __post_init__(self):
        if self.left.sym == self.right.sym:
            raise ValueError("TestLitEq relates two distinct symbols")
        a, b = self.left, self.right
        if b.sym.id < a.sym.id:
            a, b = b, a
        if not a.positive:
            a, b = a.negate(), b.negate()
        object.__setattr__(self, "left", a)
        object.__setattr__(self, "right", b)

    def sort_key(self):
        return (3, self.left.sym.id, self.right.sym.id, int(self.right.positive))

    def symbols(self):
        return (self.left.sym, self.right.sym)

    def __str__(self):
        return f"{self.left}={self.right}"


Hypothesis = Union[ActionIsSkip, TestConst, ActionEq, TestLitEq]


class HypothesisSet:
    """A plain ordered set of hypotheses; constant clashes are rejected."""

    __slots__ = ("items", "_hash")

    def __init__(self, items: Iterable[Hypothesis] = ()):
        uniq: dict = {}
        for h in items:
            uniq[h] = None
        ordered = tuple(sorted(uniq, key=lambda h: h.sort_key()))
        consts: dict[Symbol, bool] = {}
        for h in ordered:
            if isinstance(h, TestConst):
                if consts.get(h.test, h.value) != h.value:
                    raise InconsistentHypotheses(
                        f"{h.test} is hypothesized both 0 and 1"
                    )
                consts[h.test] = h.value
        object.__setattr__(self, "items", ordered)
        object.__setattr__(self, "_hash", hash(ordered))

    def __setattr__(self, name, value):
        raise AttributeError("HypothesisSet is immutable")

    def add(self, *hs: Hypothesis) -> HypothesisSet:
        return HypothesisSet(self.items + tuple(hs))

    def union(self, other: HypothesisSet) -> HypothesisSet:
        return HypothesisSet(self.items + tuple(other.items))

    __or__ = union

    def issubset(self, other: HypothesisSet) -> bool:
        return set(self.items) <= set(other.items)

    def symbols(self) -> frozenset[Symbol]:
        return frozenset(s for h in self.items for s in h.symbols())

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __contains__(self, h):
        return h in self.items

    def __eq__(self, other):
        return isinstance(other, HypothesisSet) and self.items == other.items

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"HypothesisSet({self})"

    def __str__(self):
        return "{" + ", ".join(str(h) for h in self.items) + "}"


EMPTY_HYPS = HypothesisSet()


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}
        self.parity: dict = {}

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.parity[x] = False
            return x, False
        path = []
        p = False
        while self.parent[x] != x:
            path.append(x)
            p ^= self.parity[x]
            x = self.parent[x]
        root = x
        # path compression, keeping parities relative to the root
        acc = p
        for node in path:
            old = self.parity[node]
            self.parent[node] = root
            self.parity[node] = acc
            acc ^= old
        return root, p

    def union(self, a, b, odd: bool) -> bool:
        """Record value(a) = value(b) xor odd.  False on contradiction."""
        ra, pa = self.find(a)
        rb, pb = self.find(b)
        if ra == rb:
            return (pa ^ pb) == odd
        if rb.id < ra.id:
            ra, rb, pa, pb = rb, ra, pb, pa
        self.parent[rb] = ra
        self.parity[rb] = pa ^ pb ^ odd
        return True


def _substitution(A: HypothesisSet):
    """Build the symbol substitution implementing A.  Raises on inconsistency."""
    acts = _UnionFind()
    skipped = set()
    tests = _UnionFind()
    consts: dict[Symbol, bool] = {}
    for h in A:
        if isinstance(h, ActionIsSkip):
            acts.find(h.action)
            skipped.add(h.action)
        elif isinstance(h, ActionEq):
            acts.union(h.left, h.right, False)
        elif isinstance(h, TestLitEq):
            odd = h.left.positive != h.right.positive
            if not tests.union(h.left.sym, h.right.sym, odd):
                raise InconsistentHypotheses(f"{h} contradicts the other hypotheses")
    for h in A:
        if isinstance(h, TestConst):
            root, p = tests.find(h.test)
            val = h.value ^ p
            if consts.get(root, val) != val:
                raise InconsistentHypotheses(f"{h} contradicts the other hypotheses")
            consts[root] = val

    skip_roots = {acts.find(a)[0] for a in skipped}
    act_map: dict[Symbol, KatExpr] = {}
    classes: dict[Symbol, list[Symbol]] = {}
    for a in list(acts.parent):
        classes.setdefault(acts.find(a)[0], []).append(a)
    for root, members in classes.items():
        rep = min(members)
        for m in members:
            act_map[m] = ONE if root in skip_roots else Act(rep)

    test_map: dict[Symbol, BoolExpr] = {}
    tclasses: dict[Symbol, list[Symbol]] = {}
    for t in list(tests.parent):
        tclasses.setdefault(tests.find(t)[0], []).append(t)
    for root, members in tclasses.items():
        rep = min(members)
        _, prep = tests.find(rep)
        for m in members:
            _, pm = tests.find(m)
            if root in consts:
                test_map[m] = ONE if consts[root] ^ pm else ZERO
            else:
                test_map[m] = lit(rep, not (pm ^ prep))
    return act_map, test_map


def check_consistent(A: HypothesisSet) -> None:
    _substitution(A)


def is_consistent(A: HypothesisSet) -> bool:
    try:
        _substitution(A)
    except InconsistentHypotheses:
        return False
    return True


@lru_cache(maxsize=50_000)
def rewrite_under_hypotheses(e: KatExpr, A: HypothesisSet) -> KatExpr:
    if not len(A):
        return e
    act_map, test_map = _substitution(A)
    memo: dict[KatExpr, KatExpr] = {}

    def go(x: KatExpr) -> KatExpr:
        r = memo.get(x)
        if r is not None:
            return r
        if isinstance(x, Act):
            r = act_map.get(x.sym, x)
        elif isinstance(x, Test):
            r = test_map.get(x.sym, x)
        elif x.children:
            r = rebuild(x, [go(c) for c in x.children])
        else:
            r = x
        memo[x] = r
        return r

    return go(e)


# ---------------------------------------------------------- counterexamples

Element = Union[Symbol, Literal]


class CexString:
    """A concatenation of actions and test literals."""

    __slots__ = ("elements",)

    def __init__(self, elements: Iterable[Element]):
        els = tuple(elements)
        for el in els:
            if isinstance(el, Symbol):
                if not el.is_action:
                    raise TypeError("bare test symbols must be wrapped in Literal")
            elif not isinstance(el, Literal):
                raise TypeError(f"bad counterexample element {el!r}")
        object.__setattr__(self, "elements", els)

    def __setattr__(self, name, value):
        raise AttributeError("CexString is immutable")

    @property
    def actions(self) -> tuple[Symbol, ...]:
        return tuple(e for e in self.elements if isinstance(e, Symbol))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __eq__(self, other):
        return isinstance(other, CexString) and self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return f"CexString({self})"

    def __str__(self):
        if not self.elements:
            return "1"
        return "·".join(str(e) for e in self.elements)


def element_expr(el: Element) -> KatExpr:
    return Act(el) if isinstance(el, Symbol) else el.expr()


def kat_of_cex(s: CexString) -> KatExpr:
    """The concatenation-only expression with the same elements.

    Built directly (not via seq) so adjacent literals stay separate and the
    conversion back is exact.
    """
    if not len(s):
        raise ValueError("empty counterexample string")
    parts = tuple(element_expr(el) for el in s)
    return parts[0] if len(parts) == 1 else Seq(parts)


def cex_of_kat(e: KatExpr) -> CexString:
    parts = e.args if isinstance(e, Seq) else (e,)
    out: list[Element] = []
    for p in parts:
        if isinstance(p, Act):
            out.append(p.sym)
        elif isinstance(p, Test):
            out.append(Literal(p.sym, True))
        elif isinstance(p, Not) and isinstance(p.arg, Test):
            out.append(Literal(p.arg.sym, False))
        elif isinstance(p, And) and all(
            isinstance(a, Test) or (isinstance(a, Not) and isinstance(a.arg, Test))
            for a in p.args
        ):
            for a in p.args:
                out.append(
                    Literal(a.sym, True) if isinstance(a, Test) else Literal(a.arg.sym, False)
                )
        else:
            raise ValueError(f"{show(e)} is not a concatenation of actions and literals")
    return CexString(out)


# ------------------------------------------------------------ text syntax

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<brace>\{[^{}]*\})|(?P<num>[01])"
    r"|(?P<op>[()+*!.·=,;≡]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise KatSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r} at {pos}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _KatParser:
    def __init__(self, text: str, table: SymbolTable, actions: Sequence[Symbol] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.table = table
        self.actions = actions
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            want = value or "a token"
            raise KatSyntaxError(f"expected {want} at position {tok[2]} in {self.text!r}")
        self.i += 1
        return tok

    def at_end(self):
        return self.i >= len(self.toks)

    def symbol(self, name: str, brace: bool) -> Symbol:
        if brace:
            found = self.table.lookup(ACTION, name) or self.table.lookup(TEST, name)
            return found or self.table.action(name)
        found = self.table.lookup_any(name)
        if found is not None:
            return found
        return self.table.action(name) if name[0].isupper() else self.table.test(name)

    def parse_sum(self) -> KatExpr:
        parts = [self.parse_seq()]
        while self.peek()[1] == "+":
            self.take("+")
            parts.append(self.parse_seq())
        return plus(*parts)

    def _starts_unary(self) -> bool:
        kind, value, _ = self.peek()
        return kind in ("ident", "brace", "num") or value in ("(", "!")

    def parse_seq(self) -> KatExpr:
        parts = [self.parse_unary()]
        while True:
            value = self.peek()[1]
            if value in (".", "·"):
                self.take()
                parts.append(self.parse_unary())
            elif self._starts_unary():
                parts.append(self.parse_unary())
            else:
                break
        return seq(*parts)

    def parse_unary(self) -> KatExpr:
        if self.peek()[1] == "!":
            pos = self.take("!")[2]
            arg = self.parse_unary()
            if not arg.is_bool:
                raise KatSyntaxError(f"'!' applied to an action expression at {pos}")
            return neg(arg)
        e = self.parse_atom()
        while self.peek()[1] == "*":
            self.take("*")
            e = star(e)
        return e

    def parse_atom(self) -> KatExpr:
        kind, value, pos = self.take()
        if kind == "num":
            return ONE if value == "1" else ZERO
        if value == "(":
            e = self.parse_sum()
            self.take(")")
            return e
        if kind == "ident" and value == "Any" and self.table.lookup_any("Any") is None:
            acts = self.actions if self.actions is not None else self.table.actions
            return plus(*(Act(a) for a in acts))
        if kind in ("ident", "brace"):
            name = value[1:-1] if kind == "brace" else value
            sym = self.symbol(name, kind == "brace")
            return Act(sym) if sym.is_action else Test(sym)
        raise KatSyntaxError(f"unexpected {value!r} at position {pos} in {self.text!r}")


def parse_kat(text: str, table: SymbolTable, actions: Sequence[Symbol] | None = None) -> KatExpr:
    """Parse the textual KAT syntax.

    Known names resolve against the table; unknown identifiers become
    actions when capitalized and tests otherwise.  ``Any`` is the sum of all
    actions (of ``actions`` when given, else of the table).
    """
    p = _KatParser(text, table, actions)
    if p.at_end():
        raise KatSyntaxError("empty expression")
    e = p.parse_sum()
    if not p.at_end():
        raise KatSyntaxError(f"trailing input at position {p.peek()[2]} in {text!r}")
    return e


def parse_hypotheses(text: str, table: SymbolTable) -> HypothesisSet:
    """Parse ``A=1, b=0, A=B, a=!b`` (commas or semicolons separate)."""
    out: list[Hypothesis] = []
    for chunk in re.split(r"[,;]", text):
        chunk = chunk.strip()
        if not chunk:
            continue
        sides = re.split(r"=|≡", chunk)
        if len(sides) != 2:
            raise KatSyntaxError(f"bad hypothesis {chunk!r}")
        lhs, rhs = sides[0].strip(), sides[1].strip()
        out.append(_hypothesis(lhs, rhs, table, chunk))
    return HypothesisSet(out)


def _side(text: str, table: SymbolTable):
    positive = True
    while text.startswith("!"):
        positive = not positive
        text = text[1:].strip()
    if text in ("0", "1"):
        return ("const", text == "1" if positive else text == "0")
    name = text[1:-1] if text.startswith("{") and text.endswith("}") else text
    if not name:
        raise KatSyntaxError("empty name in hypothesis")
    sym = table.lookup_any(name)
    if sym is None:
        sym = table.action(name) if name[0].isupper() else table.test(name)
    return ("sym", sym, positive)


def _hypothesis(lhs: str, rhs: str, table: SymbolTable, chunk: str) -> Hypothesis:
    left = _side(lhs, table)
    right = _side(rhs, table)
    if left[0] == "const":
        left, right = right, left
    if left[0] == "const":
        raise KatSyntaxError(f"hypothesis {chunk!r} relates two constants")
    sym, pos = left[1], left[2]
    if right[0] == "const":
        if sym.is_action:
            if not (pos and right[1]):
                raise KatSyntaxError(f"actions can only be equated to 1: {chunk!r}")
            return ActionIsSkip(sym)
        return TestConst(sym, right[1] == pos)
    other, opos = right[1], right[2]
    if sym.is_action != other.is_action:
        raise KatSyntaxError(f"hypothesis {chunk!r} mixes actions and tests")
    if sym.is_action:
        if not (pos and opos):
            raise KatSyntaxError(f"actions cannot be negated: {chunk!r}")
        return ActionEq(sym, other)
    return TestLitEq(Literal(sym, pos), Literal(other, opos))
