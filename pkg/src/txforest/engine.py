"""Interpreter for expressions and commands.

Every evaluation threads a local context (IMP environment, current path,
zipper) and a global context (path set, file store) and returns the log
of file-system interactions it performed.  A missing side condition
raises :class:`~txforest.errors.Undefined`; the state that was passed in
is never mutated, so callers can keep it.
"""

from dataclasses import dataclass, field

from . import speccore as sc
from . import zipper as zp
from .errors import Undefined
from .fsmodel import Dir, File, ModelViolation, Read, add_node, make_dir, make_file
from .prims import PrimError, apply, ordered
from .zipper import LocalContext

DEFAULT_FUEL = 10 ** 6


@dataclass(frozen=True)
class GlobalContext:
    pathset: frozenset
    fs: object

    def with_fs(self, fs):
        return GlobalContext(self.pathset, fs)


def initial(path, spec, fs, env=sc.EMPTY_ENV):
    """Starting contexts for a program rooted at ``path``.

    The root path is part of the initial path set: the program starts
    there, and without it no traversal could ever be reported as total.
    """
    return LocalContext(env, path, zp.mk_root(spec)), GlobalContext(frozenset({path}), fs)


# -- expressions ------------------------------------------------------------

def _node_ctx(lctx: LocalContext) -> LocalContext:
    # spec expressions are evaluated in the environment stored in the node
    return LocalContext(lctx.zipper.env, lctx.path, lctx.zipper)


def _focus(lctx, kind, what):
    spec = lctx.zipper.spec
    if not isinstance(spec, kind):
        raise Undefined("SpecMismatch", f"{what} needs a {kind.kind} focus, found {spec.kind}")
    return spec


def eval_expr(e, lctx: LocalContext, g: GlobalContext):
    """Evaluate ``e``; returns ``(value, log)``."""
    if isinstance(e, sc.Lit):
        return e.value, []
    if isinstance(e, sc.Var):
        try:
            return lctx.env[e.name], []
        except KeyError:
            raise Undefined("UnboundVariable", f"variable {e.name!r} is not bound")
    if isinstance(e, sc.Call):
        if e.fn in ("&&", "||") and len(e.args) == 2:
            a, log = eval_expr(e.args[0], lctx, g)
            if not isinstance(a, bool):
                raise Undefined("TypeError", f"{e.fn} expects booleans")
            if a == (e.fn == "||"):
                return a, log
            b, log2 = eval_expr(e.args[1], lctx, g)
            if not isinstance(b, bool):
                raise Undefined("TypeError", f"{e.fn} expects booleans")
            return b, log + log2
        args, log = _eval_all(e.args, lctx, g)
        try:
            return apply(e.fn, args), log
        except PrimError as err:
            raise Undefined("TypeError", str(err))
    if isinstance(e, sc.MkList):
        items, log = _eval_all(e.items, lctx, g)
        return tuple(items), log
    if isinstance(e, sc.MkSet):
        items, log = _eval_all(e.items, lctx, g)
        return frozenset(items), log
    if isinstance(e, sc.Fetch):
        return _fetch(e.kind, lctx, g)
    if isinstance(e, sc.RunNav):
        ctx, log = eval_expr(e.ctx, lctx, g)
        ctx = _as_ctx(ctx)
        ctx2, _g, log2 = exec_nav(e.nav, ctx, g)
        return ctx2, log + log2
    if isinstance(e, sc.RunExpr):
        ctx, log = eval_expr(e.ctx, lctx, g)
        v, log2 = eval_expr(e.expr, _as_ctx(ctx), g)
        return v, log + log2
    if isinstance(e, sc.Verify):
        from .consistency import pconsistent

        path, z = zp.goto_root(lctx.path, lctx.zipper)
        r = pconsistent(g.pathset, g.fs, path, z)
        return r.consistent, list(r.log)
    raise TypeError(f"not an expression: {e!r}")


def _eval_all(exprs, lctx, g):
    values, log = [], []
    for a in exprs:
        v, l = eval_expr(a, lctx, g)
        values.append(v)
        log.extend(l)
    return values, log


def _as_ctx(v) -> LocalContext:
    if not isinstance(v, LocalContext):
        raise Undefined("NotAContext", "run expects a context bound by a dependent pair")
    return v


def _fetch(kind, lctx, g):
    p, fs = lctx.path, g.fs
    if kind == "file":
        _focus(lctx, sc.FileSpec, "fetch_file")
        c = fs.get(p)
        if not isinstance(c, File):
            raise Undefined("NotAFile", f"{p} is not a file")
        return c.text, [Read(c, p)]
    if kind == "dir":
        _focus(lctx, sc.DirSpec, "fetch_dir")
        c = fs.get(p)
        if not isinstance(c, Dir):
            raise Undefined("NotADirectory", f"{p} is not a directory")
        return c.children, [Read(c, p)]
    if kind == "path":
        spec = _focus(lctx, sc.PathSpec, "fetch_path")
        return eval_expr(spec.expr, _node_ctx(lctx), g)
    if kind == "comp":
        spec = _focus(lctx, sc.CompSpec, "fetch_comp")
        return eval_expr(spec.expr, _node_ctx(lctx), g)
    if kind == "opt":
        _focus(lctx, sc.OptSpec, "fetch_opt")
        return p in fs, [Read(fs.get(p), p)]
    if kind == "pred":
        spec = _focus(lctx, sc.PredSpec, "fetch_pred")
        return eval_expr(spec.expr, _node_ctx(lctx), g)
    raise ValueError(kind)


def eval_name(e, lctx, g):
    v, log = eval_expr(e, lctx, g)
    if not isinstance(v, str):
        raise Undefined("TypeError", f"path expression must yield a string, got {type(v).__name__}")
    try:
        lctx.path / v
    except ValueError as err:
        raise Undefined("BadName", str(err))
    return v, log


# -- navigation -------------------------------------------------------------

def exec_nav(op, lctx: LocalContext, g: GlobalContext):
    """Run one navigation; returns ``(lctx, gctx, log)``."""
    z, p = lctx.zipper, lctx.path
    spec = z.spec
    if op == "down":
        if not isinstance(spec, sc.PathSpec):
            raise Undefined("NotAPathFocus", f"down needs a path focus, found {spec.kind}")
        u, log = eval_name(spec.expr, _node_ctx(lctx), g)
        c = g.fs.get(p)
        if not isinstance(c, Dir):
            raise Undefined("NotADirectory", f"{p} is not a directory")
        child = p / u
        z2 = zp.mk_child(zp.ZNode(z.env, spec.body), z)
        return (LocalContext(lctx.env, child, z2),
                GlobalContext(g.pathset | {child}, g.fs),
                log + [Read(c, p)])
    if op == "up":
        if z.parent is None:
            raise Undefined("UpAtRoot", "no parent to go up to")
        if not isinstance(z.parent.spec, sc.PathSpec):
            raise Undefined("NotUnderPath", "up needs a path parent; use out")
        return LocalContext(lctx.env, p.pop(), z.parent), g, []
    if op == "into_opt":
        if not isinstance(spec, sc.OptSpec):
            raise Undefined("NotAnOptionFocus", f"into_opt needs an option focus, found {spec.kind}")
        return LocalContext(lctx.env, p, zp.mk_child(zp.ZNode(z.env, spec.body), z)), g, []
    if op == "into_pair":
        if not isinstance(spec, sc.PairSpec):
            raise Undefined("NotAPairFocus", f"into_pair needs a pair focus, found {spec.kind}")
        env = z.env
        ctx = LocalContext(env, p, zp.mk_root(spec.first, env))
        second = zp.ZNode(env.bind(spec.var, ctx), spec.second)
        z2 = zp.mk_child(zp.ZNode(env, spec.first), z, zp.NIL.cons(second))
        return LocalContext(lctx.env, p, z2), g, []
    if op == "into_comp":
        if not isinstance(spec, sc.CompSpec):
            raise Undefined("NotACompFocus", f"into_comp needs a comprehension focus, found {spec.kind}")
        values, log = eval_expr(spec.expr, _node_ctx(lctx), g)
        try:
            values = ordered(values)
        except PrimError as err:
            raise Undefined("TypeError", str(err))
        if not values:
            raise Undefined("EmptyComprehension", "the comprehension has no elements")
        tail = zp.CompTail(z.env, spec.var, spec.body, values, 1)
        first = zp.ZNode(z.env.bind(spec.var, values[0]), spec.body)
        return LocalContext(lctx.env, p, zp.mk_child(first, z, tail)), g, log
    if op == "out":
        if z.parent is None:
            raise Undefined("OutAtRoot", "no parent to go out to")
        if isinstance(z.parent.spec, sc.PathSpec):
            raise Undefined("UnderPath", "out cannot leave a path; use up")
        return LocalContext(lctx.env, p, z.parent), g, []
    if op == "next":
        return LocalContext(lctx.env, p, zp.shift_right(z)), g, []
    if op == "prev":
        return LocalContext(lctx.env, p, zp.shift_left(z)), g, []
    raise Undefined("UnknownCommand", f"unknown navigation {op!r}")


# -- updates ----------------------------------------------------------------

def exec_update(cmd, lctx: LocalContext, g: GlobalContext):
    """Run ``store_file``, ``store_dir`` or ``create_path``."""
    z, p, fs = lctx.zipper, lctx.path, g.fs
    spec = z.spec
    try:
        if isinstance(cmd, sc.StoreFile):
            if not isinstance(spec, sc.FileSpec):
                raise Undefined("SpecMismatch", f"store_file needs a file focus, found {spec.kind}")
            s, log = eval_expr(cmd.expr, lctx, g)
            if not isinstance(s, str):
                raise Undefined("TypeError", "store_file expects a string")
            fs2, log2 = make_file(fs, p, s)
            return lctx, g.with_fs(fs2), log + log2
        if isinstance(cmd, sc.StoreDir):
            if not isinstance(spec, sc.DirSpec):
                raise Undefined("SpecMismatch", f"store_dir needs a dir focus, found {spec.kind}")
            names, log = eval_expr(cmd.expr, lctx, g)
            if not isinstance(names, (frozenset, tuple)) or not all(isinstance(n, str) for n in names):
                raise Undefined("TypeError", "store_dir expects a collection of names")
            fs2, log2 = make_dir(fs, p, names)
            return lctx, g.with_fs(fs2), log + log2
        if isinstance(cmd, sc.CreatePath):
            if not isinstance(spec, sc.PathSpec):
                raise Undefined("NotAPathFocus", f"create_path needs a path focus, found {spec.kind}")
            u, log = eval_name(spec.expr, _node_ctx(lctx), g)
            fs2, log2 = add_node(fs, p, u)
            return lctx, g.with_fs(fs2), log + [Read(fs.get(p), p)] + log2
    except ModelViolation as err:
        raise Undefined("ModelViolation", str(err))
    except ValueError as err:
        raise Undefined("BadName", str(err))
    raise TypeError(f"not an update: {cmd!r}")


# -- commands ---------------------------------------------------------------

def _truth(v):
    if not isinstance(v, bool):
        raise Undefined("TypeError", "condition must be a boolean")
    return v


def local_step(c, lctx: LocalContext, g: GlobalContext):
    """One small step of ``c``.

    Returns ``(rest, lctx, gctx, log)`` where ``rest`` is the remaining
    command, or ``None`` once ``c`` has finished.  Forest commands are a
    single atomic step.
    """
    if isinstance(c, sc.Skip):
        return None, lctx, g, []
    if isinstance(c, sc.Seq):
        rest, lctx2, g2, log = local_step(c.first, lctx, g)
        return (c.second if rest is None else sc.Seq(rest, c.second)), lctx2, g2, log
    if isinstance(c, sc.Assign):
        v, log = eval_expr(c.expr, lctx, g)
        return None, LocalContext(lctx.env.bind(c.var, v), lctx.path, lctx.zipper), g, log
    if isinstance(c, sc.If):
        b, log = eval_expr(c.cond, lctx, g)
        return (c.then if _truth(b) else c.orelse), lctx, g, log
    if isinstance(c, sc.While):
        b, log = eval_expr(c.cond, lctx, g)
        return (sc.Seq(c.body, c) if _truth(b) else None), lctx, g, log
    if isinstance(c, sc.Nav):
        lctx2, g2, log = exec_nav(c.op, lctx, g)
        return None, lctx2, g2, log
    if isinstance(c, (sc.StoreFile, sc.StoreDir, sc.CreatePath)):
        lctx2, g2, log = exec_update(c, lctx, g)
        return None, lctx2, g2, log
    raise TypeError(f"not a command: {c!r}")


def exec_cmd(c, lctx: LocalContext, g: GlobalContext, fuel: int = DEFAULT_FUEL):
    """Run ``c`` to completion; returns ``(lctx, gctx, log)``."""
    log = []
    steps = 0
    rest = c
    while rest is not None:
        if steps >= fuel:
            raise Undefined("FuelExhausted", f"no result after {fuel} steps")
        rest, lctx, g, l = local_step(rest, lctx, g)
        log.extend(l)
        steps += 1
    return lctx, g, log


def run_program(path, spec, c, fs, fuel: int = DEFAULT_FUEL):
    """The denotation of a program: a partial function on file stores."""
    lctx, g = initial(path, spec, fs)
    _l, g2, _log = exec_cmd(c, lctx, g, fuel)
    return g2.fs


# -- navigation helpers -----------------------------------------------------

@dataclass
class Walker:
    """Mutable holder for a local and global context plus the log so far."""

    lctx: LocalContext
    g: GlobalContext
    log: list = field(default_factory=list)

    def nav(self, op):
        self.lctx, self.g, l = exec_nav(op, self.lctx, self.g)
        self.log.extend(l)
        return self

    def try_nav(self, op) -> bool:
        try:
            self.nav(op)
            return True
        except Undefined:
            return False

    def update(self, cmd):
        self.lctx, self.g, l = exec_update(cmd, self.lctx, self.g)
        self.log.extend(l)
        return self

    def eval(self, e):
        v, l = eval_expr(e, self.lctx, self.g)
        self.log.extend(l)
        return v

    @property
    def spec(self):
        return self.lctx.zipper.spec


def _node_label(z):
    return z.current.spec.label


def _at_top(w: Walker):
    # climb out of the pair structure of the current directory
    while w.lctx.zipper.parent is not None and not zp.parent_is_path(w.lctx.zipper):
        w.nav("out")


def goto(w: Walker, name: str) -> Walker:
    """Focus the directory component labelled ``name``."""
    _at_top(w)
    while True:
        spec = w.spec
        if not isinstance(spec, sc.PairSpec):
            break
        w.nav("into_pair")
        if spec.var == name or _node_label(w.lctx.zipper) == name:
            return w
        w.nav("next")
        if _node_label(w.lctx.zipper) == name:
            return w
        if _regex_pair(w.spec):
            break
    raise Undefined("NameNotFound", f"no component named {name!r}")


def _regex_pair(spec) -> bool:
    return isinstance(spec, sc.PairSpec) and isinstance(spec.first, sc.DirSpec) \
        and isinstance(sc.resolve(spec.second), sc.CompSpec)


def enter_comp(w: Walker) -> Walker:
    """Move into a comprehension, entering the ``dir``/comprehension pair a
    regular-expression generator compiles to."""
    if _regex_pair(w.spec):
        w.nav("into_pair").nav("next")
    if not isinstance(w.spec, sc.CompSpec):
        raise Undefined("NotACompFocus", f"expected a comprehension, found {w.spec.kind}")
    w.nav("into_comp")
    return w


def goto_name_p(w: Walker, name: str) -> Walker:
    """Focus the comprehension child bound to ``name`` and go down into it."""
    z = w.lctx.zipper
    in_comp = z.parent is not None and isinstance(z.parent.spec, sc.CompSpec)
    if not in_comp:
        try:
            enter_comp(w)
        except Undefined as err:
            if err.code == "EmptyComprehension":
                raise Undefined("NameNotFound", f"no element named {name!r}")
            raise
    else:
        while w.try_nav("prev"):
            pass
    var = w.lctx.zipper.parent.spec.var
    while w.lctx.zipper.env.get(var) != name:
        if not w.try_nav("next"):
            raise Undefined("NameNotFound", f"no element named {name!r}")
    w.nav("down")
    return w
