"""Parsing for the small concurrent language.

A program is an optional ``globals { name = int @ thread }`` preamble
followed by a binary composition of named threads::

    program  = [ "globals" "{" { name "=" int "@" name } "}" ] stmt
    stmt     = par
    par      = inter { "|" inter }
    inter    = chain { "|||" chain }
    chain    = seqgrp { ">>" seqgrp }
    seqgrp   = item { ";" item }          item = leaf | "(" stmt ")"
    leaf     = name ":" "(" cmd { ";" cmd } ")"
    cmd      = "new" name | "dispose" name | "release" name
             | "acquire" name | "skip" | "assert" expr
             | name ":=" name "?" | name ":=" expr | name "!" "(" expr ")"

Binding from tightest to loosest: ``;``, ``>>``, ``|||``, ``|``; every
operator associates to the right, so the syntax tree is a binary tree with
leaves at the threads.  Expressions are integer arithmetic (``+ - * /``,
``/`` truncating toward zero) plus the comparisons ``= != < <=``, which are
only legal at the top of an ``assert``.  ``//`` starts a comment.

Equality on syntax nodes ignores source spans, so ``parse(pretty(p))`` is
expected to give back ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Span:
    """Half-open [start, end) offsets into the source text."""

    start: int
    end: int

    def join(self, other: "Span") -> "Span":
        return Span(min(self.start, other.start), max(self.end, other.end))


NO_SPAN = Span(0, 0)


def _span_field():
    return field(default=NO_SPAN, compare=False, repr=False)


# ---- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: int
    span: Span = _span_field()


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / = != < <=
    left: "Expr"
    right: "Expr"
    span: Span = _span_field()


Expr = Lit | Var | Binary

COMPARISONS = ("=", "!=", "<", "<=")


# ---- commands --------------------------------------------------------------

@dataclass(frozen=True)
class New:
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Dispose:
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Release:
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Acquire:
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Skip:
    span: Span = _span_field()


@dataclass(frozen=True)
class Assert:
    expr: Expr
    span: Span = _span_field()


@dataclass(frozen=True)
class Input:
    target: str
    channel: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    span: Span = _span_field()


@dataclass(frozen=True)
class Output:
    channel: str
    expr: Expr
    span: Span = _span_field()


Command = New | Dispose | Release | Acquire | Skip | Assert | Input | Assign | Output


# ---- program tree ----------------------------------------------------------

SEQ, CHAIN, INTERLEAVE, PAR = "seq", "chain", "interleave", "par"
OPERATORS = (SEQ, CHAIN, INTERLEAVE, PAR)

# binding strength, tightest highest
_PREC = {SEQ: 4, CHAIN: 3, INTERLEAVE: 2, PAR: 1}
_OP_TEXT = {SEQ: ";", CHAIN: ">>", INTERLEAVE: "|||", PAR: "|"}


@dataclass(frozen=True)
class Leaf:
    thread: str
    commands: tuple
    span: Span = _span_field()


@dataclass(frozen=True)
class Node:
    op: str  # seq | chain | interleave | par
    left: "Stmt"
    right: "Stmt"
    span: Span = _span_field()


Stmt = Leaf | Node


@dataclass(frozen=True)
class GlobalDecl:
    name: str
    value: int
    owner: str
    span: Span = _span_field()


@dataclass(frozen=True)
class Program:
    globals_: tuple
    body: Stmt
    span: Span = _span_field()


@dataclass(frozen=True)
class ParseFailure:
    """A rejected program; code is PARSE_ERROR, DUP_THREAD, DUP_GLOBAL or NAME_CLASH."""

    code: str
    message: str
    span: Span


class _Reject(Exception):
    def __init__(self, message, span):
        super().__init__(message)
        self.failure = ParseFailure("PARSE_ERROR", message, span)


# ---- lexer -----------------------------------------------------------------

KEYWORDS = frozenset(["globals", "new", "dispose", "release", "acquire", "skip", "assert"])

_PUNCT = ["|||", ":=", ">>", "!=", "<=", "{", "}", "(", ")", ";", ":", "!", "?",
          "|", "=", "<", "+", "-", "*", "/", "@"]


@dataclass(frozen=True)
class _Tok:
    kind: str  # name | int | keyword | punct | eof
    text: str
    span: Span


def tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], Span(i, j)))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "name"
            toks.append(_Tok(kind, word, Span(i, j)))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok("punct", p, Span(i, i + len(p))))
                i += len(p)
                break
        else:
            raise _Reject(f"stray character {c!r}", Span(i, i + 1))
    toks.append(_Tok("eof", "", Span(n, n)))
    return toks


# ---- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self, ahead=0):
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def advance(self):
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text):
        t = self.peek()
        return t.kind in ("punct", "keyword") and t.text == text

    def eat(self, text):
        if not self.at(text):
            t = self.peek()
            got = t.text or "end of input"
            raise _Reject(f"expected {text!r}, found {got!r}", t.span)
        return self.advance()

    def name(self, what="name"):
        t = self.peek()
        if t.kind != "name":
            got = t.text or "end of input"
            raise _Reject(f"expected {what}, found {got!r}", t.span)
        return self.advance()

    def integer(self):
        neg = None
        if self.at("-"):
            neg = self.advance()
        t = self.peek()
        if t.kind != "int":
            raise _Reject("expected integer", t.span)
        self.advance()
        value = int(t.text)
        if neg is not None:
            return -value, neg.span.join(t.span)
        return value, t.span

    # program = [ globals block ] stmt
    def program(self):
        start = self.peek().span
        decls = []
        if self.at("globals"):
            self.advance()
            self.eat("{")
            while not self.at("}"):
                n = self.name("global name")
                self.eat("=")
                value, _ = self.integer()
                self.eat("@")
                owner = self.name("owner thread")
                decls.append(GlobalDecl(n.text, value, owner.text,
                                        n.span.join(owner.span)))
            self.eat("}")
        body = self.stmt()
        end = self.peek()
        if end.kind != "eof":
            raise _Reject(f"unexpected {end.text!r} after program", end.span)
        return Program(tuple(decls), body, start.join(body.span))

    # right-associative binary levels, loosest first
    def stmt(self):
        return self.level(PAR)

    def level(self, op):
        below = {PAR: INTERLEAVE, INTERLEAVE: CHAIN, CHAIN: SEQ}
        if op == SEQ:
            left = self.item()
        else:
            left = self.level(below[op])
        if self.at(_OP_TEXT[op]):
            self.advance()
            right = self.level(op)
            return Node(op, left, right, left.span.join(right.span))
        return left

    def item(self):
        if self.at("("):
            self.advance()
            inner = self.stmt()
            self.eat(")")
            return inner
        return self.leaf()

    def leaf(self):
        n = self.name("thread name")
        self.eat(":")
        self.eat("(")
        cmds = [self.command()]
        while self.at(";"):
            self.advance()
            cmds.append(self.command())
        close = self.eat(")")
        return Leaf(n.text, tuple(cmds), n.span.join(close.span))

    def command(self):
        t = self.peek()
        start = t.span
        if t.kind == "keyword":
            self.advance()
            if t.text == "skip":
                return Skip(start)
            if t.text == "assert":
                e = self.expr(allow_comparison=True)
                return Assert(e, start.join(e.span))
            if t.text in ("new", "dispose", "release", "acquire"):
                n = self.name("object name")
                cls = {"new": New, "dispose": Dispose,
                       "release": Release, "acquire": Acquire}[t.text]
                return cls(n.text, start.join(n.span))
            raise _Reject(f"{t.text!r} cannot start a command", start)
        n = self.name("command")
        if self.at("!"):
            self.advance()
            self.eat("(")
            e = self.expr()
            close = self.eat(")")
            return Output(n.text, e, start.join(close.span))
        self.eat(":=")
        # an input is target := channel?  -- two-token lookahead
        if self.peek().kind == "name" and self.peek(1).text == "?":
            ch = self.advance()
            q = self.advance()
            return Input(n.text, ch.text, start.join(q.span))
        e = self.expr()
        return Assign(n.text, e, start.join(e.span))

    # expr: comparisons only at the top of an assert, never nested
    def expr(self, allow_comparison=False):
        left = self.arith()
        if allow_comparison:
            for op in COMPARISONS:
                if self.at(op):
                    self.advance()
                    right = self.arith()
                    return Binary(op, left, right, left.span.join(right.span))
        return left

    def arith(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.term()
            left = Binary(op.text, left, right, left.span.join(right.span))
        return left

    def term(self):
        left = self.atom()
        while self.at("*") or self.at("/"):
            op = self.advance()
            right = self.atom()
            left = Binary(op.text, left, right, left.span.join(right.span))
        return left

    def atom(self):
        t = self.peek()
        if t.kind == "int" or self.at("-"):
            value, span = self.integer()
            return Lit(value, span)
        if t.kind == "name":
            self.advance()
            return Var(t.text, t.span)
        if self.at("("):
            lparen = self.advance()
            inner = self.arith()
            rparen = self.eat(")")
            # keep the parens inside the span so highlights cover them
            return replace(inner, span=lparen.span.join(rparen.span))
        got = t.text or "end of input"
        raise _Reject(f"expected expression, found {got!r}", t.span)


# ---- static validation -----------------------------------------------------

def leaves(stmt):
    """Leaves of the composition tree, left to right."""
    if isinstance(stmt, Leaf):
        return [stmt]
    return leaves(stmt.left) + leaves(stmt.right)


def _walk_exprs(e, out):
    if isinstance(e, Var):
        out.append(e)
    elif isinstance(e, Binary):
        _walk_exprs(e.left, out)
        _walk_exprs(e.right, out)


def name_roles(program):
    """First occurrence span of every name in each role it plays.

    Returns dict role -> {name: span} for roles thread, variable, channel.
    """
    threads, variables, channels = {}, {}, {}

    def saw(table, name, span):
        if name not in table:
            table[name] = span

    for g in program.globals_:
        saw(variables, g.name, g.span)
    for leaf in leaves(program.body):
        saw(threads, leaf.thread, leaf.span)
        for cmd in leaf.commands:
            exprs = []
            match cmd:
                case New(name=n) | Dispose(name=n) | Release(name=n) | Acquire(name=n):
                    saw(variables, n, cmd.span)
                case Assert(expr=e):
                    exprs.append(e)
                case Input(target=tgt, channel=ch):
                    saw(variables, tgt, cmd.span)
                    saw(channels, ch, cmd.span)
                case Assign(target=tgt, expr=e):
                    saw(variables, tgt, cmd.span)
                    exprs.append(e)
                case Output(channel=ch, expr=e):
                    saw(channels, ch, cmd.span)
                    exprs.append(e)
            for e in exprs:
                vs = []
                _walk_exprs(e, vs)
                for v in vs:
                    saw(variables, v.name, v.span)
    return {"thread": threads, "variable": variables, "channel": channels}


def _validate(program):
    failures = []
    seen_globals = {}
    for g in program.globals_:
        if g.name in seen_globals:
            failures.append(ParseFailure(
                "DUP_GLOBAL", f"global {g.name!r} declared twice", g.span))
        seen_globals[g.name] = g
    seen_threads = set()
    for leaf in leaves(program.body):
        if leaf.thread in seen_threads:
            failures.append(ParseFailure(
                "DUP_THREAD", f"thread name {leaf.thread!r} reused", leaf.span))
        seen_threads.add(leaf.thread)

    roles = name_roles(program)
    pairs = [("thread", "variable"), ("thread", "channel"), ("variable", "channel")]
    for a, b in pairs:
        for name in sorted(set(roles[a]) & set(roles[b])):
            spans = sorted([roles[a][name], roles[b][name]], key=lambda s: s.start)
            failures.append(ParseFailure(
                "NAME_CLASH", f"{name!r} is used as both {a} and {b}", spans[1]))
    for g in program.globals_:
        if g.owner not in seen_threads:
            failures.append(ParseFailure(
                "NAME_CLASH",
                f"global {g.name!r} is owned by unknown thread {g.owner!r}", g.span))
    return failures


def parse(text):
    """Parse source text to a Program, or a non-empty list of ParseFailure."""
    try:
        program = _Parser(text).program()
    except _Reject as r:
        return [r.failure]
    failures = _validate(program)
    return failures if failures else program


# ---- printer ---------------------------------------------------------------

_EXPR_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def pretty_expr(e, parent_prec=0, right_side=False):
    match e:
        case Lit(value=v):
            return str(v)
        case Var(name=n):
            return n
        case Binary(op=op, left=l, right=r):
            if op in COMPARISONS:
                return f"{pretty_expr(l)} {op} {pretty_expr(r)}"
            prec = _EXPR_PREC[op]
            text = (f"{pretty_expr(l, prec, False)} {op} "
                    f"{pretty_expr(r, prec, True)}")
            if prec < parent_prec or (prec == parent_prec and right_side):
                return f"({text})"
            return text
    raise TypeError(f"not an expression: {e!r}")


def pretty_command(cmd):
    match cmd:
        case New(name=n):
            return f"new {n}"
        case Dispose(name=n):
            return f"dispose {n}"
        case Release(name=n):
            return f"release {n}"
        case Acquire(name=n):
            return f"acquire {n}"
        case Skip():
            return "skip"
        case Assert(expr=e):
            return f"assert {pretty_expr(e)}"
        case Input(target=t, channel=c):
            return f"{t} := {c}?"
        case Assign(target=t, expr=e):
            return f"{t} := {pretty_expr(e)}"
        case Output(channel=c, expr=e):
            return f"{c}!({pretty_expr(e)})"
    raise TypeError(f"not a command: {cmd!r}")


def _pretty_stmt(s, parent_prec=0):
    if isinstance(s, Leaf):
        return f"{s.thread}:({'; '.join(pretty_command(c) for c in s.commands)})"
    prec = _PREC[s.op]
    # right-associative: a left child at equal precedence needs parens
    left = _pretty_stmt(s.left, prec + 1)
    right = _pretty_stmt(s.right, prec)
    text = f"{left} {_OP_TEXT[s.op]} {right}"
    if s.op == SEQ:
        text = f"{left}{_OP_TEXT[s.op]} {right}"
    return f"({text})" if prec < parent_prec else text


def pretty(program):
    """Canonical concrete syntax; parse(pretty(p)) == p up to spans."""
    head = ""
    if program.globals_:
        decls = " ".join(f"{g.name} = {g.value} @ {g.owner}" for g in program.globals_)
        head = f"globals {{ {decls} }}\n"
    return head + _pretty_stmt(program.body)


def expr_vars(e):
    """Variable names read by an expression, in first-read order, deduplicated."""
    out = []
    _walk_exprs(e, out)
    seen, names = set(), []
    for v in out:
        if v.name not in seen:
            seen.add(v.name)
            names.append(v.name)
    return names
