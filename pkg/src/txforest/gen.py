"""Seeded random generators for stores, specs, states and programs.

Everything takes a :class:`random.Random` so runs are reproducible.  Names
come from a small alphabet on purpose: collisions between the spec, the
store and the commands are what make the generated cases interesting.
"""

import random

from . import speccore as sc
from .engine import Walker, exec_nav, exec_update, eval_expr, initial
from .errors import Undefined
from .fsmodel import ROOT, Dir, File, FileStore, close

NAMES = ("a", "b", "c", "d")
TEXTS = ("", "x", "1", "42")
NAME_RE = "[a-d]"


def random_fs(rng: random.Random, max_nodes=12, max_depth=3, names=NAMES) -> FileStore:
    entries = {ROOT: Dir()}
    budget = rng.randint(1, max_nodes - 1)

    def grow(path, depth):
        nonlocal budget
        kids = []
        for name in rng.sample(names, rng.randint(0, len(names))):
            if budget <= 0:
                break
            budget -= 1
            child = path / name
            kids.append(name)
            if depth < max_depth and rng.random() < 0.45:
                entries[child] = Dir()
                grow(child, depth + 1)
            else:
                entries[child] = File(rng.choice(TEXTS))
        entries[path] = Dir(frozenset(kids))

    grow(ROOT, 1)
    return FileStore(entries)


def perturb_fs(rng: random.Random, fs: FileStore, edits=2) -> FileStore:
    """A nearby store: a few files rewritten, added or removed."""
    for _ in range(edits):
        paths = sorted(fs)
        p = rng.choice(paths)
        c = fs[p]
        roll = rng.random()
        if isinstance(c, File):
            fs = fs.set(p, File(rng.choice(TEXTS))) if roll < 0.6 else fs.set(p, Dir())
        elif roll < 0.5:
            fs = fs.set(p, Dir(c.children | {rng.choice(NAMES)}))
        elif c.children:
            fs = fs.set(p, Dir(c.children - {rng.choice(sorted(c.children))}))
        fs = close(fs)
    return fs


class _Vars:
    def __init__(self):
        self.n = 0

    def fresh(self, base="x"):
        self.n += 1
        return f"{base}{self.n}"


def random_spec(rng: random.Random, depth=4, names=NAMES) -> sc.Spec:
    """An arbitrary spec; it may or may not describe any given store."""
    vs = _Vars()

    def spec(d, ctxs):
        leaf = d <= 0 or rng.random() < 0.2
        if leaf:
            return rng.choice([sc.FileSpec(), sc.DirSpec(), sc.FileSpec(), _pred(ctxs)])
        roll = rng.random()
        if roll < 0.3:
            return sc.PathSpec(sc.Lit(rng.choice(names)), spec(d - 1, ctxs))
        if roll < 0.45:
            return sc.OptSpec(spec(d - 1, ctxs))
        if roll < 0.65:
            x = vs.fresh()
            first = spec(d - 1, ctxs)
            kind = first.kind if first.kind in ("file", "dir") else None
            return sc.PairSpec(x, first, spec(d - 1, ctxs + [(x, kind)]))
        if roll < 0.8:
            v = vs.fresh("v")
            items = tuple(sc.Lit(n) for n in rng.sample(names, rng.randint(0, 3)))
            expr = sc.MkSet(items) if rng.random() < 0.5 else sc.MkList(items)
            return sc.CompSpec(sc.PathSpec(sc.Var(v), spec(d - 1, ctxs)), v, expr)
        return regex_comp(vs, spec(d - 1, ctxs), rng)

    def _pred(ctxs):
        usable = [x for x, kind in ctxs if kind in ("file", "dir")]
        if usable and rng.random() < 0.7:
            x = rng.choice(usable)
            kind = dict(ctxs)[x]
            if kind == "file":
                return sc.PredSpec(sc.Call("!=", (sc.RunExpr(sc.Var(x), sc.Fetch("file")), sc.Lit("x"))))
            return sc.PredSpec(sc.Call("<=", (sc.Call("len", (sc.RunExpr(sc.Var(x), sc.Fetch("dir")),)),
                                              sc.Lit(rng.randint(0, 3)))))
        return sc.PredSpec(sc.Lit(rng.random() < 0.8))

    return spec(depth, [])


def regex_comp(vs, body, rng, pattern=NAME_RE):
    d = vs.fresh("dir")
    v = vs.fresh("v")
    gen = sc.Call("filter", (sc.RunExpr(sc.Var(d), sc.Fetch("dir")), sc.Lit(pattern)))
    return sc.PairSpec(d, sc.DirSpec(), sc.CompSpec(sc.PathSpec(sc.Var(v), body), v, gen))


def spec_from_fs(rng: random.Random, fs, path=ROOT, depth=4, wobble=0.15) -> sc.Spec:
    """A spec shaped after the store at ``path``, with occasional mistakes.

    ``wobble`` is the chance of deviating at each node, which yields a
    mix of consistent and inconsistent instances.
    """
    vs = _Vars()

    def describe(p, d):
        c = fs.get(p)
        if rng.random() < wobble:
            return rng.choice([sc.FileSpec(), sc.DirSpec(), sc.OptSpec(sc.FileSpec())])
        if not isinstance(c, Dir):
            return sc.FileSpec()
        kids = sorted(c.children)
        if d <= 0 or not kids:
            return sc.DirSpec()
        if all(isinstance(fs.get(p / k), File) for k in kids) and rng.random() < 0.5:
            return regex_comp(vs, sc.FileSpec(), rng)
        fields = []
        for k in kids:
            sub = sc.PathSpec(sc.Lit(k), describe(p / k, d - 1))
            if rng.random() < 0.2:
                sub = sc.OptSpec(sub)
            fields.append(sub)
        if rng.random() < 0.3:
            fields.append(sc.OptSpec(sc.PathSpec(sc.Lit(rng.choice(NAMES)), sc.FileSpec())))
        out = fields[-1]
        for f in reversed(fields[:-1]):
            out = sc.PairSpec(vs.fresh(), f, out)
        return out

    return describe(path, depth)


# -- zipper states ----------------------------------------------------------

NAV_OPS = sc.NAVIGATIONS


def random_walk(rng: random.Random, lctx, g, steps=8, ops=NAV_OPS):
    """Apply up to ``steps`` random defined navigations."""
    w = Walker(lctx, g, [])
    for _ in range(steps):
        order = list(ops)
        rng.shuffle(order)
        for op in order:
            if w.try_nav(op):
                break
    return w.lctx, w.g


def random_state(rng: random.Random, spec=None, fs=None, steps=None):
    """``(spec, fs, lctx, gctx)`` reached by a random walk from the root."""
    if fs is None:
        fs = random_fs(rng)
    if spec is None:
        spec = spec_from_fs(rng, fs) if rng.random() < 0.7 else random_spec(rng)
    lctx, g = initial(ROOT, spec, fs)
    lctx, g = random_walk(rng, lctx, g, rng.randint(0, 10) if steps is None else steps)
    return spec, fs, lctx, g


# -- programs ---------------------------------------------------------------

def _candidates(rng, lctx, g, bound):
    out = [sc.Nav(op) for op in NAV_OPS]
    out.append(sc.CreatePath())
    out.append(sc.StoreFile(sc.Lit(rng.choice(TEXTS))))
    out.append(sc.StoreDir(sc.MkSet(tuple(sc.Lit(n) for n in rng.sample(NAMES, rng.randint(0, 3))))))
    for kind in ("file", "dir", "opt"):
        out.append(sc.Assign(f"r_{kind}", sc.Fetch(kind)))
    if "r_file" in bound:
        out.append(sc.StoreFile(sc.Call("++", (sc.Var("r_file"), sc.Lit("!")))))
    if "r_dir" in bound:
        out.append(sc.StoreDir(sc.Call("union", (sc.Var("r_dir"), sc.MkSet((sc.Lit(rng.choice(NAMES)),))))))
    rng.shuffle(out)
    return out


def _try(cmd, lctx, g):
    if isinstance(cmd, sc.Nav):
        return exec_nav(cmd.op, lctx, g)
    if isinstance(cmd, sc.Assign):
        v, log = eval_expr(cmd.expr, lctx, g)
        from .zipper import LocalContext
        return LocalContext(lctx.env.bind(cmd.var, v), lctx.path, lctx.zipper), g, log
    return exec_update(cmd, lctx, g)


def random_program(rng: random.Random, spec, root, fs, n_cmds=8, write_bias=0.5):
    """A command sequence that is defined when run on ``fs`` itself."""
    lctx, g = initial(root, spec, fs)
    cmds = []
    bound = set()
    for _ in range(n_cmds):
        cands = _candidates(rng, lctx, g, bound)
        if rng.random() < write_bias:
            cands.sort(key=lambda c: not isinstance(c, (sc.StoreFile, sc.StoreDir, sc.CreatePath, sc.Assign)))
        for cmd in cands:
            try:
                lctx, g, _log = _try(cmd, lctx, g)
            except Undefined:
                continue
            cmds.append(cmd)
            if isinstance(cmd, sc.Assign):
                bound.add(cmd.var)
            break
    return sc.seq(*cmds), cmds
