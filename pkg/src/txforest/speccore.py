"""Abstract syntax of the core calculus.

Specifications describe the shape of a filestore, expressions compute
values (only the Forest expressions touch the file system), and commands
are IMP statements plus zipper navigations and updates.

Runtime values are plain Python objects: ``str``, ``int``, ``bool``,
``tuple`` (ordered list), ``frozenset`` (string set) and
:class:`~txforest.zipper.LocalContext` for contexts bound by pairs.
"""

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Optional


# -- specifications ---------------------------------------------------------

class Spec:
    """Base class of specification nodes.

    ``label`` is presentation metadata (the directory field a node came
    from); it takes no part in equality.
    """

    kind = "spec"


def _label():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FileSpec(Spec):
    label: Optional[str] = _label()
    kind = "file"


@dataclass(frozen=True)
class DirSpec(Spec):
    label: Optional[str] = _label()
    kind = "dir"


@dataclass(frozen=True)
class PathSpec(Spec):
    expr: "Expr"
    body: Spec
    label: Optional[str] = _label()
    kind = "path"


@dataclass(frozen=True)
class PairSpec(Spec):
    var: str
    first: Spec
    second: Spec
    label: Optional[str] = _label()
    kind = "pair"


@dataclass(frozen=True)
class CompSpec(Spec):
    body: Spec
    var: str
    expr: "Expr"
    label: Optional[str] = _label()
    kind = "comp"


@dataclass(frozen=True)
class OptSpec(Spec):
    body: Spec
    label: Optional[str] = _label()
    kind = "opt"


@dataclass(frozen=True)
class PredSpec(Spec):
    expr: "Expr"
    label: Optional[str] = _label()
    kind = "pred"


@dataclass(frozen=True)
class Ref(Spec):
    """A reference to a named declaration, unfolded on demand."""

    name: str
    table: Optional[Mapping] = field(default=None, compare=False, repr=False)
    label: Optional[str] = _label()
    kind = "ref"


File = FileSpec()
Dir = DirSpec()


class UnresolvedRef(Exception):
    pass


def resolve(spec: Spec) -> Spec:
    """Unfold declaration references until a structural node is reached."""
    seen = 0
    while isinstance(spec, Ref):
        if spec.table is None or spec.name not in spec.table:
            raise UnresolvedRef(spec.name)
        spec = spec.table[spec.name]
        seen += 1
        if seen > 10_000:
            raise UnresolvedRef(f"{spec!r}: reference cycle")
    return spec


# -- expressions ------------------------------------------------------------

class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: object


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple = ()


@dataclass(frozen=True)
class MkList(Expr):
    items: tuple = ()


@dataclass(frozen=True)
class MkSet(Expr):
    items: tuple = ()


FETCH_KINDS = ("file", "dir", "path", "comp", "opt", "pred")


@dataclass(frozen=True)
class Fetch(Expr):
    kind: str

    def __post_init__(self):
        if self.kind not in FETCH_KINDS:
            raise ValueError(f"unknown fetch kind {self.kind!r}")


@dataclass(frozen=True)
class RunNav(Expr):
    ctx: Expr
    nav: str


@dataclass(frozen=True)
class RunExpr(Expr):
    ctx: Expr
    expr: Expr


@dataclass(frozen=True)
class Verify(Expr):
    pass


# -- commands ---------------------------------------------------------------

NAVIGATIONS = ("down", "up", "into_pair", "into_comp", "into_opt", "out", "next", "prev")


class Command:
    pass


@dataclass(frozen=True)
class Skip(Command):
    pass


@dataclass(frozen=True)
class Seq(Command):
    first: Command
    second: Command


@dataclass(frozen=True)
class Assign(Command):
    var: str
    expr: Expr


@dataclass(frozen=True)
class If(Command):
    cond: Expr
    then: Command
    orelse: Command = Skip()


@dataclass(frozen=True)
class While(Command):
    cond: Expr
    body: Command


@dataclass(frozen=True)
class Nav(Command):
    op: str

    def __post_init__(self):
        if self.op not in NAVIGATIONS:
            raise ValueError(f"unknown navigation {self.op!r}")


@dataclass(frozen=True)
class StoreFile(Command):
    expr: Expr


@dataclass(frozen=True)
class StoreDir(Command):
    expr: Expr


@dataclass(frozen=True)
class CreatePath(Command):
    pass


def seq(*commands) -> Command:
    """Right-nested sequence; ``seq()`` is ``Skip``."""
    commands = [c for c in commands if not isinstance(c, Skip)]
    if not commands:
        return Skip()
    out = commands[-1]
    for c in reversed(commands[:-1]):
        out = Seq(c, out)
    return out


def is_forest_command(c) -> bool:
    return isinstance(c, (Nav, StoreFile, StoreDir, CreatePath))


# -- environments -----------------------------------------------------------

class Env(Mapping):
    """Immutable variable environment; :meth:`bind` shadows."""

    __slots__ = ("_d",)

    def __init__(self, bindings=None):
        self._d = dict(bindings or {})

    def bind(self, name, value) -> "Env":
        d = dict(self._d)
        d[name] = value
        return Env(d)

    def __getitem__(self, name):
        return self._d[name]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        if isinstance(other, Env):
            return self._d == other._d
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"Env({self._d!r})"


EMPTY_ENV = Env()


# -- free variables ---------------------------------------------------------

def expr_free_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Call):
        return set().union(*(expr_free_vars(a) for a in e.args))
    if isinstance(e, (MkList, MkSet)):
        return set().union(*(expr_free_vars(a) for a in e.items))
    if isinstance(e, RunNav):
        return expr_free_vars(e.ctx)
    if isinstance(e, RunExpr):
        return expr_free_vars(e.ctx) | expr_free_vars(e.expr)
    return set()


def free_vars(s: Spec) -> set:
    if isinstance(s, (FileSpec, DirSpec, Ref)):
        return set()
    if isinstance(s, PathSpec):
        return expr_free_vars(s.expr) | free_vars(s.body)
    if isinstance(s, PairSpec):
        return free_vars(s.first) | (free_vars(s.second) - {s.var})
    if isinstance(s, CompSpec):
        return (free_vars(s.body) - {s.var}) | expr_free_vars(s.expr)
    if isinstance(s, OptSpec):
        return free_vars(s.body)
    if isinstance(s, PredSpec):
        return expr_free_vars(s.expr)
    raise TypeError(f"not a spec: {s!r}")


def command_free_vars(c: Command) -> set:
    """Variables a command reads before (possibly) assigning them."""
    if isinstance(c, Assign):
        return expr_free_vars(c.expr)
    if isinstance(c, Seq):
        return command_free_vars(c.first) | command_free_vars(c.second)
    if isinstance(c, If):
        return expr_free_vars(c.cond) | command_free_vars(c.then) | command_free_vars(c.orelse)
    if isinstance(c, While):
        return expr_free_vars(c.cond) | command_free_vars(c.body)
    if isinstance(c, (StoreFile, StoreDir)):
        return expr_free_vars(c.expr)
    return set()


# -- alpha equivalence ------------------------------------------------------

def alpha_eq(a: Spec, b: Spec) -> bool:
    return _alpha_spec(a, b, {}, {}, 0)


def _alpha_spec(a, b, ma, mb, depth):
    if type(a) is not type(b):
        return False
    if isinstance(a, (FileSpec, DirSpec)):
        return True
    if isinstance(a, Ref):
        return a.name == b.name
    if isinstance(a, PathSpec):
        return _alpha_expr(a.expr, b.expr, ma, mb) and _alpha_spec(a.body, b.body, ma, mb, depth)
    if isinstance(a, PairSpec):
        if not _alpha_spec(a.first, b.first, ma, mb, depth):
            return False
        return _alpha_spec(a.second, b.second, {**ma, a.var: depth}, {**mb, b.var: depth}, depth + 1)
    if isinstance(a, CompSpec):
        if not _alpha_expr(a.expr, b.expr, ma, mb):
            return False
        return _alpha_spec(a.body, b.body, {**ma, a.var: depth}, {**mb, b.var: depth}, depth + 1)
    if isinstance(a, OptSpec):
        return _alpha_spec(a.body, b.body, ma, mb, depth)
    if isinstance(a, PredSpec):
        return _alpha_expr(a.expr, b.expr, ma, mb)
    raise TypeError(f"not a spec: {a!r}")


def _alpha_expr(a, b, ma, mb):
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ia, ib = ma.get(a.name), mb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, Call):
        return a.fn == b.fn and _alpha_all(a.args, b.args, ma, mb)
    if isinstance(a, (MkList, MkSet)):
        return _alpha_all(a.items, b.items, ma, mb)
    if isinstance(a, RunNav):
        return a.nav == b.nav and _alpha_expr(a.ctx, b.ctx, ma, mb)
    if isinstance(a, RunExpr):
        return _alpha_expr(a.ctx, b.ctx, ma, mb) and _alpha_expr(a.expr, b.expr, ma, mb)
    return a == b


def _alpha_all(xs, ys, ma, mb):
    return len(xs) == len(ys) and all(_alpha_expr(x, y, ma, mb) for x, y in zip(xs, ys))


# -- pretty printing --------------------------------------------------------

BINARY_OPS = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4, "++": 4,
    "*": 5, "/": 5, "%": 5,
}
UNARY_OPS = {"!": "!", "neg": "-"}

KEYWORDS = frozenset({
    "true", "false", "run", "verify", "matches", "RE",
    "fetch_file", "fetch_dir", "fetch_path", "fetch_comp", "fetch_opt", "fetch_pred",
    "skip", "if", "then", "else", "end", "while", "do",
    "store_file", "store_dir", "create_path",
    "file", "directory", "is", "option", "where", "pred",
    *NAVIGATIONS,
})

WHERE_VAR = "this"


def quote(s: str) -> str:
    return json.dumps(s)


def pretty_expr(e: Expr, level: int = 0) -> str:
    if isinstance(e, Lit):
        return _pretty_lit(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Fetch):
        return "fetch_" + e.kind
    if isinstance(e, Verify):
        return "verify"
    if isinstance(e, RunNav):
        return f"run({pretty_expr(e.ctx)}, {e.nav})"
    if isinstance(e, RunExpr):
        return f"run({pretty_expr(e.ctx)}, {pretty_expr(e.expr)})"
    if isinstance(e, MkList):
        return "[" + ", ".join(pretty_expr(x) for x in e.items) + "]"
    if isinstance(e, MkSet):
        return "{" + ", ".join(pretty_expr(x) for x in e.items) + "}"
    if isinstance(e, Call):
        if e.fn in BINARY_OPS and len(e.args) == 2:
            prec = BINARY_OPS[e.fn]
            # comparisons do not chain, so both operands print one level up
            lhs_level = prec + 1 if prec == 3 else prec
            text = f"{pretty_expr(e.args[0], lhs_level)} {e.fn} {pretty_expr(e.args[1], prec + 1)}"
            return f"({text})" if prec < level else text
        if e.fn in UNARY_OPS and len(e.args) == 1:
            return f"{UNARY_OPS[e.fn]}({pretty_expr(e.args[0])})"
        return f"{e.fn}(" + ", ".join(pretty_expr(a) for a in e.args) + ")"
    raise TypeError(f"not an expression: {e!r}")


def _pretty_lit(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return quote(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(_pretty_lit(x) for x in v) + "]"
    if isinstance(v, frozenset):
        return "{" + ", ".join(_pretty_lit(x) for x in sorted(v)) + "}"
    raise TypeError(f"no literal syntax for {v!r}")


def _regex_comprehension(s: PairSpec):
    """Recognise the shape a ``matches RE`` generator compiles to."""
    if not (isinstance(s.first, DirSpec) and isinstance(s.second, CompSpec)):
        return None
    comp = s.second
    e = comp.expr
    if not (isinstance(e, Call) and e.fn == "filter" and len(e.args) == 2):
        return None
    src, pattern = e.args
    if not (isinstance(pattern, Lit) and isinstance(pattern.value, str)):
        return None
    if src != RunExpr(Var(s.var), Fetch("dir")):
        return None
    if comp.var == s.var or s.var in free_vars(comp.body):
        return None
    return comp, pattern.value


def pretty(s: Spec) -> str:
    """Render a spec in the surface syntax accepted by :mod:`txforest.surface`."""
    return _pretty_spec(s, top=True)


def _pretty_spec(s, top=False):
    # top: a full spec is allowed (path form); otherwise a postfix operand
    if isinstance(s, PathSpec):
        text = f"{_path_atom(s.expr)} :: {_pretty_spec(s.body, top=True)}"
        return text if top else f"({text})"
    if isinstance(s, FileSpec):
        return "file"
    if isinstance(s, DirSpec):
        return "dir"
    if isinstance(s, Ref):
        return s.name
    if isinstance(s, OptSpec):
        return f"{_pretty_spec(s.body)} option"
    if isinstance(s, PredSpec):
        return f"pred ({pretty_expr(s.expr)})"
    if isinstance(s, CompSpec):
        return f"[ {_pretty_spec(s.body, top=True)} | {s.var} <- {pretty_expr(s.expr)} ]"
    if isinstance(s, PairSpec):
        if s.var == WHERE_VAR and isinstance(s.second, PredSpec):
            return f"{_pretty_spec(s.first)} where ({pretty_expr(s.second.expr)})"
        rx = _regex_comprehension(s)
        if rx is not None:
            comp, pattern = rx
            return f"[ {_pretty_spec(comp.body, top=True)} | {comp.var} <- matches RE {quote(pattern)} ]"
        fields = []
        node = s
        while isinstance(node, PairSpec) and not (
            (node.var == WHERE_VAR and isinstance(node.second, PredSpec))
            or _regex_comprehension(node) is not None
        ):
            fields.append((node.var, node.first))
            node = node.second
        fields.append((node.label or "_", node))
        body = "; ".join(f"{name} is {_pretty_spec(sub, top=True)}" for name, sub in fields)
        return "directory { " + body + " }"
    raise TypeError(f"not a spec: {s!r}")


def _path_atom(e):
    if isinstance(e, Lit) and isinstance(e.value, str):
        return quote(e.value)
    if isinstance(e, Var):
        return e.name
    return f"({pretty_expr(e)})"


def pretty_command(c: Command, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(c, Seq):
        return pretty_command(c.first, indent) + ";\n" + pretty_command(c.second, indent)
    if isinstance(c, Skip):
        return pad + "skip"
    if isinstance(c, Assign):
        return f"{pad}{c.var} := {pretty_expr(c.expr)}"
    if isinstance(c, If):
        text = f"{pad}if {pretty_expr(c.cond)} then\n{pretty_command(c.then, indent + 1)}\n"
        if not isinstance(c.orelse, Skip):
            text += f"{pad}else\n{pretty_command(c.orelse, indent + 1)}\n"
        return text + pad + "end"
    if isinstance(c, While):
        return f"{pad}while {pretty_expr(c.cond)} do\n{pretty_command(c.body, indent + 1)}\n{pad}end"
    if isinstance(c, Nav):
        return pad + c.op
    if isinstance(c, StoreFile):
        return f"{pad}store_file {pretty_expr(c.expr)}"
    if isinstance(c, StoreDir):
        return f"{pad}store_dir {pretty_expr(c.expr)}"
    if isinstance(c, CreatePath):
        return pad + "create_path"
    raise TypeError(f"not a command: {c!r}")
