"""The C-like mini language: AST, parser, pretty printer, instrumentation.

A benchmark file holds an optional front-matter block and two function
definitions; the first is C1 and the second C2.  Calls to functions that
are not defined in the file are events.

Grammar (statements)::

    stmt  := ';' | 'skip' ';' | 'fail' ['(' ')'] ';' | 'assume' '(' cond ')' ';'
           | 'int' ident ['=' expr] ';' | ident '=' expr ';' | ident '++' ';'
           | ident '--' ';' | ident ('+='|'-=') expr ';' | [ident '='] call ';'
           | 'if' '(' cond ')' stmt ['else' stmt] | 'while' '(' cond ')' stmt
           | '{' stmt* '}'
    expr  := term (('+'|'-') term)*
    term  := '-' term | number | ident | 'nondet' '(' ')' | 'true' | 'false' | '(' expr ')'
    cond  := cond '||' cond | cond '&&' cond | '!' cond | '(' cond ')'
           | expr relop expr | expr | 'true' | 'false'

A bare expression used as a condition means ``expr != 0``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Union


class LangSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


class UnknownLocation(KeyError):
    pass


# ----------------------------------------------------------------- locations


@dataclass(frozen=True, order=True)
class Location:
    """Where a statement sits: program, structural path, tag for inserted code."""

    prog: str
    path: tuple[int, ...] = ()
    tag: str = ""

    def child(self, i: int) -> Location:
        return Location(self.prog, self.path + (i,))

    @property
    def base(self) -> Location:
        return Location(self.prog, self.path)

    def __str__(self):
        p = ".".join(str(i) for i in self.path) or "root"
        return f"{self.prog}:{p}" + (f"[{self.tag}]" if self.tag else "")


# -------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class BinOp:
    op: str  # '+' | '-'
    left: "IntExpr"
    right: "IntExpr"


@dataclass(frozen=True)
class Neg:
    arg: "IntExpr"


@dataclass(frozen=True)
class Nondet:
    pass


IntExpr = Union[Var, Num, BinOp, Neg, Nondet]

RELOPS = ("<=", ">=", "==", "!=", "<", ">")
NEGATED_RELOP = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}


@dataclass(frozen=True)
class Rel:
    op: str
    left: IntExpr
    right: IntExpr


@dataclass(frozen=True)
class BAnd:
    left: "BoolCond"
    right: "BoolCond"


@dataclass(frozen=True)
class BOr:
    left: "BoolCond"
    right: "BoolCond"


@dataclass(frozen=True)
class BNot:
    arg: "BoolCond"


@dataclass(frozen=True)
class BConst:
    value: bool


BoolCond = Union[Rel, BAnd, BOr, BNot, BConst]


def negate_cond(c: BoolCond) -> BoolCond:
    """Push a negation inward (relops flip, De Morgan on connectives)."""
    if isinstance(c, Rel):
        return Rel(NEGATED_RELOP[c.op], c.left, c.right)
    if isinstance(c, BAnd):
        return BOr(negate_cond(c.left), negate_cond(c.right))
    if isinstance(c, BOr):
        return BAnd(negate_cond(c.left), negate_cond(c.right))
    if isinstance(c, BNot):
        return c.arg
    return BConst(not c.value)


def cond_vars(c: BoolCond) -> set[str]:
    if isinstance(c, Rel):
        return expr_vars(c.left) | expr_vars(c.right)
    if isinstance(c, (BAnd, BOr)):
        return cond_vars(c.left) | cond_vars(c.right)
    if isinstance(c, BNot):
        return cond_vars(c.arg)
    return set()


def expr_vars(e: IntExpr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Neg):
        return expr_vars(e.arg)
    return set()


def has_nondet(e: IntExpr) -> bool:
    if isinstance(e, Nondet):
        return True
    if isinstance(e, BinOp):
        return has_nondet(e.left) or has_nondet(e.right)
    if isinstance(e, Neg):
        return has_nondet(e.arg)
    return False


def cond_atoms(c: BoolCond) -> list[Rel]:
    if isinstance(c, Rel):
        return [c]
    if isinstance(c, (BAnd, BOr)):
        return cond_atoms(c.left) + cond_atoms(c.right)
    if isinstance(c, BNot):
        return cond_atoms(c.arg)
    return []


# ---------------------------------------------------------------- statements


@dataclass(frozen=True)
class Stmt:
    loc: Location
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Fail(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    var: str = ""
    expr: IntExpr = Num(0)


@dataclass(frozen=True)
class EventCall(Stmt):
    name: str = ""
    args: tuple[IntExpr, ...] = ()
    result: Optional[str] = None


@dataclass(frozen=True)
class Assume(Stmt):
    cond: BoolCond = BConst(True)


@dataclass(frozen=True)
class Seq(Stmt):
    stmts: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class If(Stmt):
    cond: BoolCond = BConst(True)
    then: Stmt = None  # type: ignore[assignment]
    els: Stmt = None  # type: ignore[assignment]


@dataclass(frozen=True)
class While(Stmt):
    cond: BoolCond = BConst(True)
    body: Stmt = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Program:
    name: str  # 'C1' or 'C2'
    func: str
    body: Stmt
    params: tuple[str, ...] = ()

    def statements(self) -> Iterator[Stmt]:
        yield from walk(self.body)

    def locations(self) -> list[Location]:
        return [s.loc for s in self.statements()]

    def at(self, loc: Location) -> Stmt:
        for s in self.statements():
            if s.loc == loc:
                return s
        raise UnknownLocation(str(loc))

    def line_of(self, loc: Location) -> int:
        try:
            return self.at(loc).line
        except UnknownLocation:
            return self.at(loc.base).line


def walk(s: Stmt) -> Iterator[Stmt]:
    yield s
    if isinstance(s, Seq):
        for c in s.stmts:
            yield from walk(c)
    elif isinstance(s, If):
        yield from walk(s.then)
        yield from walk(s.els)
    elif isinstance(s, While):
        yield from walk(s.body)


def children(s: Stmt) -> tuple[Stmt, ...]:
    if isinstance(s, Seq):
        return s.stmts
    if isinstance(s, If):
        return (s.then, s.els)
    if isinstance(s, While):
        return (s.body,)
    return ()


# ------------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>//[^\n]*|/\*.*?\*/)"
    r"|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\+\+|--|\+=|-=|<=|>=|==|!=|&&|\|\||[-+<>=!(){};,*])",
    re.S,
)

KEYWORDS = {"if", "else", "while", "assume", "skip", "fail", "int", "bool", "void",
            "true", "false", "nondet", "return"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str, first_line: int = 1) -> list[Token]:
    out: list[Token] = []
    line, line_start, pos = first_line, 0, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise LangSyntaxError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            line += text.count("\n")
            if "\n" in text:
                line_start = pos + text.rfind("\n") + 1
        elif kind != "ws":
            out.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, tokens: list[Token], prog: str = "C1"):
        self.toks = tokens
        self.i = 0
        self.prog = prog

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.text == text and t.kind in ("op", "ident")

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> Token:
        t = self.peek()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text else kind
            got = repr(t.text) if t.kind != "eof" else "end of input"
            raise LangSyntaxError(f"expected {want}, found {got}", t.line, t.col)
        self.i += 1
        return t

    def error(self, message: str) -> LangSyntaxError:
        t = self.peek()
        return LangSyntaxError(message, t.line, t.col)

    # expressions
    def expr(self) -> IntExpr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> IntExpr:
        t = self.peek()
        if self.at("-"):
            self.take()
            arg = self.term()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        if t.kind == "num":
            self.take()
            return Num(int(t.text))
        if self.at("("):
            self.take("(")
            e = self.expr()
            self.take(")")
            return e
        if t.kind == "ident":
            if t.text == "true":
                self.take()
                return Num(1)
            if t.text == "false":
                self.take()
                return Num(0)
            if t.text == "nondet":
                self.take()
                self.take("(")
                self.take(")")
                return Nondet()
            if t.text in KEYWORDS:
                raise self.error(f"unexpected keyword {t.text!r}")
            if self.at("(", 1):
                raise self.error(f"call to {t.text!r} inside an expression; calls are statements")
            self.take()
            return Var(t.text)
        raise self.error(f"expected an expression, found {t.text!r}")

    # conditions
    def cond(self) -> BoolCond:
        c = self.cond_and()
        while self.at("||"):
            self.take()
            c = BOr(c, self.cond_and())
        return c

    def cond_and(self) -> BoolCond:
        c = self.cond_not()
        while self.at("&&"):
            self.take()
            c = BAnd(c, self.cond_not())
        return c

    def cond_not(self) -> BoolCond:
        if self.at("!"):
            self.take()
            return BNot(self.cond_not())
        return self.cond_primary()

    def cond_primary(self) -> BoolCond:
        if self.at("("):
            save = self.i
            self.take("(")
            try:
                c = self.cond()
                self.take(")")
                if not any(self.at(op) for op in RELOPS) and not self.at("+") and not self.at("-"):
                    return c
            except LangSyntaxError:
                pass
            self.i = save
        if (self.at("true") or self.at("false")) and not any(self.at(op, 1) for op in RELOPS):
            return BConst(self.take().text == "true")
        left = self.expr()
        for op in RELOPS:
            if self.at(op):
                self.take()
                return Rel(op, left, self.expr())
        return Rel("!=", left, Num(0))

    # statements
    def block_body(self, loc: Location) -> Stmt:
        """Statements up to the closing brace; zero -> Skip, one -> itself."""
        line = self.peek().line
        items: list[Stmt] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error("unterminated block")
            st = self.statement(loc.child(len(items)))
            if st is not None:
                items.append(st)
        self.take("}")
        return self._wrap(items, loc, line)

    def _wrap(self, items: list[Stmt], loc: Location, line: int) -> Stmt:
        if not items:
            return Skip(loc, line)
        if len(items) == 1:
            return _relocate(items[0], loc)
        return Seq(loc, items[0].line, tuple(items))

    def sub_statement(self, loc: Location) -> Stmt:
        line = self.peek().line
        st = self.statement(loc)
        return st if st is not None else Skip(loc, line)

    def statement(self, loc: Location) -> Optional[Stmt]:
        t = self.peek()
        line = t.line
        if self.at("{"):
            self.take("{")
            return self.block_body(loc)
        if self.at(";"):
            self.take()
            return Skip(loc, line)
        if t.kind != "ident":
            raise self.error(f"expected a statement, found {t.text!r}")
        word = t.text
        if word == "skip":
            self.take()
            self.take(";")
            return Skip(loc, line)
        if word == "fail":
            self.take()
            if self.at("("):
                self.take("(")
                self.take(")")
            self.take(";")
            return Fail(loc, line)
        if word == "return":
            raise self.error("return statements are not supported")
        if word == "assume":
            self.take()
            self.take("(")
            c = self.cond()
            self.take(")")
            self.take(";")
            return Assume(loc, line, c)
        if word == "if":
            self.take()
            self.take("(")
            c = self.cond()
            self.take(")")
            then = self.sub_statement(loc.child(0))
            if self.at("else"):
                self.take()
                els = self.sub_statement(loc.child(1))
            else:
                els = Skip(loc.child(1), line)
            return If(loc, line, c, then, els)
        if word == "while":
            self.take()
            self.take("(")
            c = self.cond()
            self.take(")")
            body = self.sub_statement(loc.child(0))
            return While(loc, line, c, body)
        if word in ("int", "bool"):
            self.take()
            name = self.take(kind="ident").text
            if self.at("="):
                self.take()
                e = self.rhs(loc, line, name)
                self.take(";")
                return e
            self.take(";")
            return None
        if word in KEYWORDS:
            raise self.error(f"unexpected keyword {word!r}")
        # identifier-led statements
        if self.at("(", 1):
            call = self.call(loc, line, None)
            self.take(";")
            return call
        name = self.take(kind="ident").text
        if self.at("++") or self.at("--"):
            op = self.take().text[0]
            self.take(";")
            return Assign(loc, line, name, BinOp(op, Var(name), Num(1)))
        if self.at("+=") or self.at("-="):
            op = self.take().text[0]
            e = self.expr()
            self.take(";")
            return Assign(loc, line, name, BinOp(op, Var(name), e))
        self.take("=")
        st = self.rhs(loc, line, name)
        self.take(";")
        return st

    def rhs(self, loc: Location, line: int, target: str) -> Stmt:
        t = self.peek()
        if t.kind == "ident" and t.text not in KEYWORDS and self.at("(", 1):
            return self.call(loc, line, target)
        return Assign(loc, line, target, self.expr())

    def call(self, loc: Location, line: int, result: Optional[str]) -> Stmt:
        name = self.take(kind="ident").text
        self.take("(")
        args: list[IntExpr] = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.take()
                args.append(self.expr())
        self.take(")")
        return EventCall(loc, line, name, tuple(args), result)


def _relocate(s: Stmt, loc: Location) -> Stmt:
    """Move a statement (and its subtree) to a new location prefix."""
    old = s.loc.path
    return _shift(s, old, loc)


def _shift(s: Stmt, old: tuple, new_root: Location) -> Stmt:
    path = new_root.path + s.loc.path[len(old):]
    new_loc = Location(new_root.prog, path, s.loc.tag)
    if isinstance(s, Seq):
        return replace(s, loc=new_loc, stmts=tuple(_shift(c, old, new_root) for c in s.stmts))
    if isinstance(s, If):
        return replace(s, loc=new_loc, then=_shift(s.then, old, new_root), els=_shift(s.els, old, new_root))
    if isinstance(s, While):
        return replace(s, loc=new_loc, body=_shift(s.body, old, new_root))
    return replace(s, loc=new_loc)


def _with_prog(s: Stmt, prog: str) -> Stmt:
    return _shift(s, s.loc.path, Location(prog, s.loc.path))


# -------------------------------------------------------------- files


@dataclass(frozen=True)
class BenchmarkFile:
    c1: Program
    c2: Program
    config: dict

    @property
    def left(self) -> Program:
        return self.c2 if self.config.get("left") == "C2" else self.c1

    @property
    def right(self) -> Program:
        return self.c1 if self.config.get("left") == "C2" else self.c2


def _front_matter(src: str) -> tuple[dict, str, int]:
    lines = src.split("\n")
    start = 0
    while start < len(lines) and not lines[start].strip():
        start += 1
    if start == len(lines) or lines[start].strip() != "---":
        return {}, src, 1
    config: dict = {}
    for i in range(start + 1, len(lines)):
        text = lines[i].strip()
        if text == "---":
            rest = "\n".join(lines[i + 1:])
            return config, rest, i + 2
        if not text or text.startswith("#"):
            continue
        if ":" not in text:
            raise LangSyntaxError(f"bad front-matter line {text!r}", i + 1, 1)
        key, value = text.split(":", 1)
        config[key.strip()] = value.strip()
    raise LangSyntaxError("unterminated front-matter block", 1, 1)


def _functions(p: _Parser) -> list[tuple[str, tuple[str, ...], Token]]:
    """Parse `type name(params) { ... }` headers; bodies are parsed later."""
    found = []
    while p.peek().kind != "eof":
        if p.at("void") or p.at("int") or p.at("bool"):
            p.take()
        name_tok = p.take(kind="ident")
        p.take("(")
        params: list[str] = []
        while not p.at(")"):
            if p.at("int") or p.at("bool"):
                p.take()
            params.append(p.take(kind="ident").text)
            if p.at(","):
                p.take()
        p.take(")")
        brace = p.peek()
        p.take("{")
        depth = 1
        while depth:
            t = p.take()
            if t.kind == "eof":
                raise LangSyntaxError("unterminated function body", brace.line, brace.col)
            if t.text == "{" and t.kind == "op":
                depth += 1
            elif t.text == "}" and t.kind == "op":
                depth -= 1
        found.append((name_tok.text, tuple(params), brace))
    return found


def _looks_like_functions(tokens: list[Token]) -> bool:
    i = 0
    if tokens[i].text in ("void", "int", "bool"):
        i += 1
    return (
        tokens[i].kind == "ident"
        and tokens[i].text not in KEYWORDS
        and tokens[i + 1].text == "("
        and _matching_paren_then_brace(tokens, i + 1)
    )


def _matching_paren_then_brace(tokens: list[Token], i: int) -> bool:
    depth = 0
    while i < len(tokens):
        if tokens[i].text == "(":
            depth += 1
        elif tokens[i].text == ")":
            depth -= 1
            if depth == 0:
                return tokens[i + 1].text == "{" if i + 1 < len(tokens) else False
        i += 1
    return False


def parse_fragments(src: str) -> tuple[list[Program], dict]:
    config, body, first_line = _front_matter(src)
    tokens = tokenize(body, first_line)
    if tokens[0].kind == "eof":
        return [Program("C1", "main", Skip(Location("C1"), first_line))], config
    if not _looks_like_functions(tokens):
        p = _Parser(tokens, "C1")
        line = tokens[0].line
        items: list[Stmt] = []
        root = Location("C1")
        while p.peek().kind != "eof":
            st = p.statement(root.child(len(items)))
            if st is not None:
                items.append(st)
        return [Program("C1", "main", p._wrap(items, root, line))], config
    headers = _functions(_Parser(tokens))
    programs = []
    for idx, (name, params, brace) in enumerate(headers):
        prog = f"C{idx + 1}"
        start = tokens.index(brace)
        p = _Parser(tokens[start + 1:], prog)
        body_stmt = p.block_body(Location(prog))
        programs.append(Program(prog, name, body_stmt, params))
    defined = {name for name, _, _ in headers}
    for prog in programs:
        for s in prog.statements():
            if isinstance(s, EventCall) and s.name in defined:
                raise LangSyntaxError(
                    f"call to defined function {s.name!r}; procedures with bodies are not supported",
                    s.line,
                    1,
                )
    return programs, config


def parse(src: str) -> Program:
    """Parse a single fragment (a function definition or bare statements)."""
    programs, _ = parse_fragments(src)
    return programs[0]


def parse_file_text(src: str) -> BenchmarkFile:
    programs, config = parse_fragments(src)
    if len(programs) != 2:
        raise LangSyntaxError(f"expected two function fragments, found {len(programs)}")
    return BenchmarkFile(programs[0], programs[1], config)


def parse_file(path: str) -> BenchmarkFile:
    with open(path, encoding="utf-8") as fh:
        return parse_file_text(fh.read())


def parse_statements(src: str, prog: str = "C1") -> Program:
    p = parse(src)
    return Program(prog, p.func, _with_prog(p.body, prog), p.params)


# ------------------------------------------------------------ pretty printer

_REL_PREC = 3


def show_expr(e: IntExpr, ctx: int = 0) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Num):
        return str(e.value) if e.value >= 0 or ctx == 0 else f"({e.value})"
    if isinstance(e, Nondet):
        return "nondet()"
    if isinstance(e, Neg):
        return "-" + show_expr(e.arg, 2)
    text = f"{show_expr(e.left, 1)} {e.op} {show_expr(e.right, 2)}"
    return f"({text})" if ctx >= 2 else text


def show_cond(c: BoolCond, ctx: int = 0) -> str:
    if isinstance(c, Rel):
        if c.op == "!=" and c.right == Num(0) and isinstance(c.left, Var):
            return c.left.name
        text = f"{show_expr(c.left)} {c.op} {show_expr(c.right)}"
        return f"({text})" if ctx > 2 else text
    if isinstance(c, BConst):
        return "true" if c.value else "false"
    if isinstance(c, BNot):
        return "!" + show_cond(c.arg, 3)
    if isinstance(c, BAnd):
        text = f"{show_cond(c.left, 2)} && {show_cond(c.right, 2)}"
        return f"({text})" if ctx > 2 else text
    text = f"{show_cond(c.left, 1)} || {show_cond(c.right, 1)}"
    return f"({text})" if ctx > 1 else text


def show_simple(s: Stmt) -> str:
    """One-line text of a non-compound statement."""
    if isinstance(s, Assign):
        return f"{s.var} = {show_expr(s.expr)};"
    if isinstance(s, EventCall):
        call = f"{s.name}({', '.join(show_expr(a) for a in s.args)})"
        return f"{s.result} = {call};" if s.result else f"{call};"
    if isinstance(s, Assume):
        return f"assume({show_cond(s.cond)});"
    if isinstance(s, Fail):
        return "fail;"
    if isinstance(s, Skip):
        return "skip;"
    raise TypeError(f"{type(s).__name__} is compound")


def _is_skip(s: Stmt) -> bool:
    return isinstance(s, Skip)


def pretty_stmt(s: Stmt, indent: int = 0) -> list[str]:
    pad = "    " * indent
    if isinstance(s, Seq):
        out = []
        for c in s.stmts:
            if isinstance(c, Seq) and WRAP_TAG not in (c.loc.tag, s.loc.tag):
                out.append(pad + "{")
                out.extend(pretty_stmt(c, indent + 1))
                out.append(pad + "}")
            else:
                out.extend(pretty_stmt(c, indent))
        return out
    if isinstance(s, If):
        out = [f"{pad}if ({show_cond(s.cond)}) {{"]
        out.extend(_body(s.then, indent + 1))
        if _is_skip(s.els):
            out.append(f"{pad}}}")
        else:
            out.append(f"{pad}}} else {{")
            out.extend(_body(s.els, indent + 1))
            out.append(f"{pad}}}")
        return out
    if isinstance(s, While):
        out = [f"{pad}while ({show_cond(s.cond)}) {{"]
        out.extend(_body(s.body, indent + 1))
        out.append(f"{pad}}}")
        return out
    return [pad + show_simple(s)]


def _body(s: Stmt, indent: int) -> list[str]:
    if _is_skip(s):
        return []
    return pretty_stmt(s, indent)


def pretty(p: Program) -> str:
    params = ", ".join(f"int {x}" for x in p.params)
    lines = [f"void {p.func}({params}) {{"]
    lines.extend(_body(p.body, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"


def pretty_file(bf: BenchmarkFile) -> str:
    head = ""
    if bf.config:
        head = "---\n" + "".join(f"{k}: {v}\n" for k, v in bf.config.items()) + "---\n"
    return head + pretty(bf.c1) + "\n" + pretty(bf.c2)


# ------------------------------------------------------------ instrumentation

WRAP_TAG = "seq"


def assume_tag(cond: BoolCond) -> str:
    return "asm:" + show_cond(cond)


def instrument(p: Program, asms: Iterable[tuple[Location, BoolCond]]) -> Program:
    """Insert ``assume(cond)`` at each location.

    A loop location receives the assume at the head of its body; any other
    location receives it immediately before the statement.  The target is
    wrapped in a tagged Seq, inserted statements get tagged locations, and
    original locations never move, so the result is independent of the
    order of ``asms`` and inserting the same pair twice changes nothing.
    """
    known = {s.loc: s for s in p.statements()}
    plan: dict[Location, list[Assume]] = {}
    for loc, cond in asms:
        target = known.get(loc)
        if target is None or loc.tag:
            raise UnknownLocation(str(loc))
        asm = Assume(Location(loc.prog, loc.path, assume_tag(cond)), target.line, cond)
        where = _base_body(target).loc if isinstance(target, While) else loc
        plan.setdefault(where, []).append(asm)
    if not plan:
        return p
    return replace(p, body=_inst(p.body, plan))


def _base_body(w: While) -> Stmt:
    """The loop body with any instrumentation wrapper peeled off."""
    body = w.body
    if isinstance(body, Seq) and body.loc.tag == WRAP_TAG:
        return body.stmts[-1]
    return body


def _inst(s: Stmt, plan: dict[Location, list[Assume]]) -> Stmt:
    if isinstance(s, Seq) and s.loc.tag == WRAP_TAG:
        inner = s.stmts[-1]
        rebuilt = _inst(inner, plan)
        if isinstance(rebuilt, Seq) and rebuilt.loc.tag == WRAP_TAG:
            return _wrap(rebuilt.stmts[-1], list(s.stmts[:-1]) + list(rebuilt.stmts[:-1]))
        return replace(s, stmts=s.stmts[:-1] + (rebuilt,))
    if isinstance(s, Seq):
        out: Stmt = replace(s, stmts=tuple(_inst(c, plan) for c in s.stmts))
    elif isinstance(s, If):
        out = replace(s, then=_inst(s.then, plan), els=_inst(s.els, plan))
    elif isinstance(s, While):
        out = replace(s, body=_inst(s.body, plan))
    else:
        out = s
    if s.loc in plan:
        return _wrap(out, plan[s.loc])
    return out


def _wrap(target: Stmt, asms: list[Stmt]) -> Seq:
    merged = {a.loc: a for a in asms}
    ordered = tuple(merged[k] for k in sorted(merged))
    loc = Location(target.loc.prog, target.loc.path, WRAP_TAG)
    return Seq(loc, target.line, ordered + (target,))


def inserted_assumes(p: Program) -> list[Assume]:
    return [s for s in p.statements() if isinstance(s, Assume) and s.loc.tag]


def anchor(loc: Location) -> Location:
    """The original location an inserted statement belongs to."""
    return Location(loc.prog, loc.path)
