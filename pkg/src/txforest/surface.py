"""Surface syntax: specification declarations, expressions and commands.

Grammar (``#`` starts a line comment)::

    program  ::= (NAME '=' spec ';'?)*
    spec     ::= patom '::' spec | postfix
    patom    ::= STRING | NAME | '(' exp ')'
    postfix  ::= primary ('option' | 'where' exp)*
    primary  ::= 'file' | 'dir' | NAME | 'pred' exp | '(' spec ')'
               | 'directory' '{' (NAME 'is' spec ';')+ '}'
               | '[' spec '|' NAME '<-' gen ']'
    gen      ::= 'matches' 'RE' STRING | exp

Commands are ``;``-separated statements: ``skip``, ``x := e``,
``if e then c [else c] end``, ``while e do c end``, the navigations,
``store_file e``, ``store_dir e`` and ``create_path``.
"""

import json
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from . import speccore as sc
from .prims import PRIMITIVES


class SurfaceError(Exception):
    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


# -- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>::|:=|<-|\|\||&&|==|!=|<=|>=|\+\+|[<>+\-*/%!()\[\]{},;|=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object
    line: int
    col: int


def tokenize(text: str):
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SurfaceError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        col = pos - line_start + 1
        if kind == "string":
            try:
                value = json.loads(chunk)
            except ValueError:
                raise SurfaceError(f"bad string literal {chunk}", line, col)
            tokens.append(Token("string", chunk, value, line, col))
        elif kind == "int":
            tokens.append(Token("int", chunk, int(chunk), line, col))
        elif kind == "name":
            tokens.append(Token("name", chunk, chunk, line, col))
        elif kind == "sym":
            tokens.append(Token("sym", chunk, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", None, line, pos - line_start + 1))
    return tokens


# -- surface terms ----------------------------------------------------------

@dataclass(frozen=True)
class STerm:
    pass


@dataclass(frozen=True)
class SFile(STerm):
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SDir(STerm):
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SName(STerm):
    name: str
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SPath(STerm):
    expr: sc.Expr
    body: STerm
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SDirectory(STerm):
    fields: tuple  # ((label, term), ...)
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SMatches:
    pattern: str


@dataclass(frozen=True)
class SComp(STerm):
    body: STerm
    var: str
    gen: object  # Expr or SMatches
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SOption(STerm):
    body: STerm
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SWhere(STerm):
    body: STerm
    expr: sc.Expr
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SPred(STerm):
    expr: sc.Expr
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SurfaceDecl:
    name: str
    body: STerm
    pos: tuple = field(default=(0, 0), compare=False)


# -- parser -----------------------------------------------------------------

class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text, kind=None) -> bool:
        t = self.tok
        return t.text == text and t.kind in ((kind,) if kind else ("sym", "name"))

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self, what="name") -> str:
        t = self.tok
        if t.kind != "name" or t.text in sc.KEYWORDS:
            self.fail(f"expected {what}")
        self.i += 1
        return t.text

    def fail(self, message):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise SurfaceError(f"{message}, found {found}", t.line, t.col)

    def done(self):
        if self.tok.kind != "eof":
            self.fail("unexpected trailing input")

    # declarations and specs
    def program(self):
        decls = []
        while self.tok.kind != "eof":
            t = self.tok
            name = self.name("declaration name")
            if name == "dir":
                raise SurfaceError("'dir' cannot name a declaration", t.line, t.col)
            self.expect("=")
            decls.append(SurfaceDecl(name, self.spec(), (t.line, t.col)))
            self.accept(";")
        return decls

    def spec(self) -> STerm:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "string" and self.peek().text == "::":
            self.i += 2
            return SPath(sc.Lit(t.value), self.spec(), pos)
        if t.kind == "name" and t.text not in sc.KEYWORDS and self.peek().text == "::":
            self.i += 2
            return SPath(sc.Var(t.text), self.spec(), pos)
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                e = self.expr()
                self.expect(")")
                self.expect("::")
                return SPath(e, self.spec(), pos)
            except SurfaceError:
                self.i = save
        return self.postfix()

    def postfix(self) -> STerm:
        term = self.primary()
        while True:
            t = self.tok
            if self.accept("option"):
                term = SOption(term, (t.line, t.col))
            elif self.accept("where"):
                term = SWhere(term, self.expr(), (t.line, t.col))
            else:
                return term

    def primary(self) -> STerm:
        t = self.tok
        pos = (t.line, t.col)
        if self.accept("file"):
            return SFile(pos)
        if t.kind == "name" and t.text == "dir":
            self.i += 1
            return SDir(pos)
        if self.accept("pred"):
            return SPred(self.expr(), pos)
        if self.accept("directory"):
            self.expect("{")
            fields = []
            while not self.at("}"):
                label = self.name("field label")
                self.expect("is")
                fields.append((label, self.spec()))
                if not self.accept(";"):
                    break
            self.expect("}")
            if not fields:
                raise SurfaceError("a directory needs at least one field", *pos)
            return SDirectory(tuple(fields), pos)
        if self.accept("["):
            body = self.spec()
            self.expect("|")
            var = self.name("comprehension variable")
            self.expect("<-")
            if self.accept("matches"):
                self.expect("RE")
                pt = self.tok
                if pt.kind != "string":
                    self.fail("expected a regular expression string")
                self.i += 1
                gen = SMatches(pt.value)
            else:
                gen = self.expr()
            self.expect("]")
            return SComp(body, var, gen, pos)
        if self.accept("("):
            term = self.spec()
            self.expect(")")
            return term
        if t.kind == "name" and t.text not in sc.KEYWORDS:
            self.i += 1
            return SName(t.text, pos)
        self.fail("expected a specification")

    # expressions
    def expr(self, level=1) -> sc.Expr:
        if level > 5:
            return self.unary()
        lhs = self.expr(level + 1)
        while True:
            t = self.tok
            op = t.text if t.kind == "sym" else None
            if op not in sc.BINARY_OPS or sc.BINARY_OPS[op] != level:
                return lhs
            self.i += 1
            rhs = self.expr(level + 1)
            lhs = sc.Call(op, (lhs, rhs))
            if level == 3:
                return lhs  # comparisons do not chain

    def unary(self) -> sc.Expr:
        if self.accept("!"):
            return sc.Call("!", (self.unary(),))
        if self.at("-", "sym"):
            if self.peek().kind == "int":
                self.i += 2
                return sc.Lit(-self.tokens[self.i - 1].value)
            self.i += 1
            return sc.Call("neg", (self.unary(),))
        return self.atom()

    def atom(self) -> sc.Expr:
        t = self.tok
        if t.kind == "string" or t.kind == "int":
            self.i += 1
            return sc.Lit(t.value)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("["):
            return sc.MkList(self.items("]"))
        if self.accept("{"):
            return sc.MkSet(self.items("}"))
        if t.kind != "name":
            self.fail("expected an expression")
        word = t.text
        if word in ("true", "false"):
            self.i += 1
            return sc.Lit(word == "true")
        if word.startswith("fetch_") and word in sc.KEYWORDS:
            self.i += 1
            return sc.Fetch(word[len("fetch_"):])
        if word == "verify":
            self.i += 1
            return sc.Verify()
        if word == "run":
            self.i += 1
            self.expect("(")
            ctx = self.expr()
            self.expect(",")
            nt = self.tok
            if nt.kind == "name" and nt.text in sc.NAVIGATIONS and self.peek().text == ")":
                self.i += 2
                return sc.RunNav(ctx, nt.text)
            inner = self.expr()
            self.expect(")")
            return sc.RunExpr(ctx, inner)
        if word in sc.KEYWORDS:
            self.fail("expected an expression")
        self.i += 1
        if self.at("(", "sym"):
            self.i += 1
            return sc.Call(word, self.items(")"))
        return sc.Var(word)

    def items(self, close):
        out = []
        if self.accept(close):
            return ()
        while True:
            out.append(self.expr())
            if self.accept(close):
                return tuple(out)
            self.expect(",")

    # commands
    def block(self, stops=()) -> sc.Command:
        stmts = []
        while True:
            if self.tok.kind == "eof" or any(self.at(s) for s in stops):
                break
            stmts.append(self.statement())
            if not self.accept(";"):
                break
        return sc.seq(*stmts) if stmts else sc.Skip()

    def statement(self) -> sc.Command:
        t = self.tok
        if t.kind != "name":
            self.fail("expected a command")
        word = t.text
        if word in sc.NAVIGATIONS:
            self.i += 1
            return sc.Nav(word)
        if word == "skip":
            self.i += 1
            return sc.Skip()
        if word == "create_path":
            self.i += 1
            return sc.CreatePath()
        if word == "store_file":
            self.i += 1
            return sc.StoreFile(self.expr())
        if word == "store_dir":
            self.i += 1
            return sc.StoreDir(self.expr())
        if word == "if":
            self.i += 1
            cond = self.expr()
            self.expect("then")
            then = self.block(("else", "end"))
            orelse = self.block(("end",)) if self.accept("else") else sc.Skip()
            self.expect("end")
            return sc.If(cond, then, orelse)
        if word == "while":
            self.i += 1
            cond = self.expr()
            self.expect("do")
            body = self.block(("end",))
            self.expect("end")
            return sc.While(cond, body)
        var = self.name("command")
        self.expect(":=")
        return sc.Assign(var, self.expr())


def parse(text: str):
    """Parse a specification program into surface declarations."""
    p = Parser(text)
    decls = p.program()
    p.done()
    return decls


def parse_expr(text: str) -> sc.Expr:
    p = Parser(text)
    e = p.expr()
    p.done()
    _check_calls(e)
    return e


def parse_command(text: str) -> sc.Command:
    p = Parser(text)
    c = p.block()
    p.done()
    _check_command(c)
    return c


# -- compiler ---------------------------------------------------------------

def _check_calls(e, pos=None):
    if isinstance(e, sc.Call):
        if e.fn not in PRIMITIVES:
            raise SurfaceError(f"unknown function {e.fn!r}", *(pos or (None, None)))
        for a in e.args:
            _check_calls(a, pos)
    elif isinstance(e, (sc.MkList, sc.MkSet)):
        for a in e.items:
            _check_calls(a, pos)
    elif isinstance(e, sc.RunNav):
        _check_calls(e.ctx, pos)
    elif isinstance(e, sc.RunExpr):
        _check_calls(e.ctx, pos)
        _check_calls(e.expr, pos)


def _check_command(c):
    for e in _command_exprs(c):
        _check_calls(e)


def _command_exprs(c):
    if isinstance(c, sc.Seq):
        yield from _command_exprs(c.first)
        yield from _command_exprs(c.second)
    elif isinstance(c, sc.If):
        yield c.cond
        yield from _command_exprs(c.then)
        yield from _command_exprs(c.orelse)
    elif isinstance(c, sc.While):
        yield c.cond
        yield from _command_exprs(c.body)
    elif isinstance(c, (sc.Assign, sc.StoreFile, sc.StoreDir)):
        yield c.expr


def fresh(base: str, avoid) -> str:
    if base not in avoid and base not in sc.KEYWORDS:
        return base
    n = 1
    while f"{base}{n}" in avoid:
        n += 1
    return f"{base}{n}"


class _Compiler:
    def __init__(self, decls):
        self.names = {}
        for d in decls:
            if d.name in self.names:
                raise SurfaceError(f"duplicate declaration {d.name!r}", *d.pos)
            self.names[d.name] = d
        self.table = {}

    def run(self):
        for name, d in self.names.items():
            self.table[name] = self.term(d.body, frozenset())
        self._check_guarded()
        return dict(self.table)

    def check_expr(self, e, scope, pos):
        _check_calls(e, pos)
        unbound = sc.expr_free_vars(e) - scope
        if unbound:
            raise SurfaceError(f"unbound variable {sorted(unbound)[0]!r}", *pos)

    def term(self, t, scope) -> sc.Spec:
        if isinstance(t, SFile):
            return sc.FileSpec()
        if isinstance(t, SDir):
            return sc.DirSpec()
        if isinstance(t, SName):
            if t.name not in self.names:
                raise SurfaceError(f"unbound declaration {t.name!r}", *t.pos)
            return sc.Ref(t.name, self.table)
        if isinstance(t, SPath):
            self.check_expr(t.expr, scope, t.pos)
            return sc.PathSpec(t.expr, self.term(t.body, scope))
        if isinstance(t, SOption):
            return sc.OptSpec(self.term(t.body, scope))
        if isinstance(t, SPred):
            self.check_expr(t.expr, scope, t.pos)
            return sc.PredSpec(t.expr)
        if isinstance(t, SWhere):
            body = self.term(t.body, scope)
            self.check_expr(t.expr, scope | {sc.WHERE_VAR}, t.pos)
            return sc.PairSpec(sc.WHERE_VAR, body, sc.PredSpec(t.expr))
        if isinstance(t, SDirectory):
            return self.directory(t.fields, scope)
        if isinstance(t, SComp):
            inner = scope | {t.var}
            body = self.term(t.body, inner)
            if isinstance(t.gen, SMatches):
                try:
                    re.compile(t.gen.pattern)
                except re.error as err:
                    raise SurfaceError(f"bad regular expression: {err}", *t.pos)
                d = fresh("dir", scope | {t.var} | sc.free_vars(body))
                gen = sc.Call("filter", (sc.RunExpr(sc.Var(d), sc.Fetch("dir")), sc.Lit(t.gen.pattern)))
                return sc.PairSpec(d, sc.DirSpec(), sc.CompSpec(body, t.var, gen))
            self.check_expr(t.gen, scope, t.pos)
            return sc.CompSpec(body, t.var, t.gen)
        raise TypeError(f"not a surface term: {t!r}")

    def directory(self, fields, scope):
        label, sub = fields[0]
        first = replace(self.term(sub, scope), label=label)
        if len(fields) == 1:
            return first
        rest = self.directory(fields[1:], scope | {label})
        return sc.PairSpec(label, first, rest)

    def _check_guarded(self):
        # a reference cycle must pass through a path node, otherwise
        # unfolding never reaches the file system
        edges = {name: _unguarded_refs(spec) for name, spec in self.table.items()}
        state = {}

        def visit(name, trail):
            if state.get(name) == "done":
                return
            if state.get(name) == "active":
                cycle = " -> ".join(trail[trail.index(name):] + [name])
                d = self.names[name]
                raise SurfaceError(f"recursion not guarded by a path: {cycle}", *d.pos)
            state[name] = "active"
            for nxt in sorted(edges[name]):
                visit(nxt, trail + [name])
            state[name] = "done"

        for name in self.table:
            visit(name, [])


def _unguarded_refs(s) -> set:
    if isinstance(s, sc.Ref):
        return {s.name}
    if isinstance(s, sc.PairSpec):
        return _unguarded_refs(s.first) | _unguarded_refs(s.second)
    if isinstance(s, (sc.CompSpec, sc.OptSpec)):
        return _unguarded_refs(s.body)
    return set()


def compile_decls(decls) -> dict:
    """Compile surface declarations to core specs, keyed by name."""
    return _Compiler(decls).run()


def compile_text(text: str) -> dict:
    return compile_decls(parse(text))


def load_spec(text: str, decl: Optional[str] = None) -> sc.Spec:
    """Compile ``text`` and return one declaration (the first by default)."""
    decls = parse(text)
    if not decls:
        raise SurfaceError("no declarations")
    table = compile_decls(decls)
    name = decl or decls[0].name
    if name not in table:
        raise SurfaceError(f"no declaration named {name!r}")
    return table[name]
