"""Partial and full consistency of a file store against a specification.

``pconsistent`` only inspects paths in the given path set and reports two
flags: whether the inspected part conforms, and whether the inspection
was total (nothing relevant fell outside the path set).
"""

from dataclasses import dataclass

from . import speccore as sc
from . import zipper as zp
from .engine import GlobalContext, eval_expr, eval_name
from .errors import Undefined
from .fsmodel import Dir, File, Read
from .prims import PrimError, ordered
from .zipper import LocalContext


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    total: bool
    log: tuple = ()

    def describe(self) -> str:
        if self.consistent:
            return "consistent (total)" if self.total else "consistent (partial)"
        return "inconsistent"


def _and(a: ConsistencyResult, rhs) -> ConsistencyResult:
    if not a.consistent:
        return ConsistencyResult(False, False, a.log)
    b = rhs()
    return ConsistencyResult(b.consistent, a.total and b.total, a.log + b.log)


def _or(a: ConsistencyResult, rhs) -> ConsistencyResult:
    if a.consistent and a.total:
        return a
    b = rhs()
    # a disjunction is settled once a branch is both true and fully
    # checked, or once both branches were fully checked
    total = (a.consistent and a.total) or (b.consistent and b.total) or (a.total and b.total)
    return ConsistencyResult(a.consistent or b.consistent, total, a.log + b.log)


def _kind(ok, path, fs):
    return ConsistencyResult(ok, True, (Read(fs.get(path), path),))


class _Checker:
    def __init__(self, pathset, fs, guarded=True, on_miss=None):
        self.failures = []
        self.pathset = pathset
        self.fs = fs
        self.g = GlobalContext(frozenset(pathset), fs)
        self.guarded = guarded
        self.on_miss = on_miss

    def eval(self, e, path, z):
        v, log = eval_expr(e, LocalContext(z.env, path, z), self.g)
        return v, tuple(log)

    def _fail(self, r, path, spec, reason):
        if not r.consistent:
            self.failures.append((path, spec.kind, reason))
        return r

    def check(self, path, z) -> ConsistencyResult:
        if self.guarded and path not in self.pathset:
            if self.on_miss is not None:
                self.on_miss(path)
            return ConsistencyResult(True, False, ())
        spec = z.spec
        fs = self.fs
        env = z.env
        if isinstance(spec, sc.FileSpec):
            return self._fail(_kind(isinstance(fs.get(path), File), path, fs), path, spec,
                              f"expected a file, found {_describe(fs.get(path))}")
        if isinstance(spec, sc.DirSpec):
            return self._fail(_kind(isinstance(fs.get(path), Dir), path, fs), path, spec,
                              f"expected a directory, found {_describe(fs.get(path))}")
        if isinstance(spec, sc.PathSpec):
            u, log = eval_name(spec.expr, LocalContext(env, path, z), self.g)
            here = ConsistencyResult(isinstance(fs.get(path), Dir), True,
                                     tuple(log) + (Read(fs.get(path), path),))
            self._fail(here, path, spec, f"expected a directory holding {u!r}, found {_describe(fs.get(path))}")
            child = zp.mk_child(zp.ZNode(env, spec.body), z)
            return _and(here, lambda: self.check(path / u, child))
        if isinstance(spec, sc.PairSpec):
            ctx = LocalContext(env, path, zp.mk_root(spec.first, env))
            env2 = env.bind(spec.var, ctx)
            first = zp.ZNode(env, spec.first)
            second = zp.ZNode(env2, spec.second)
            z1 = zp.mk_child(first, z, zp.NIL.cons(second))
            z2 = zp.Zipper(z, zp.NIL.cons(first), second, zp.NIL)
            return _and(self.check(path, z1), lambda: self.check(path, z2))
        if isinstance(spec, sc.CompSpec):
            values, log = self.eval(spec.expr, path, z)
            try:
                values = ordered(values)
            except PrimError as err:
                raise Undefined("TypeError", str(err))
            acc = ConsistencyResult(True, True, ())
            for v in values:
                child = zp.mk_child(zp.ZNode(env.bind(spec.var, v), spec.body), z)
                acc = _and(acc, lambda child=child: self.check(path, child))
                if not acc.consistent:
                    break
            return ConsistencyResult(acc.consistent, acc.total, log + acc.log)
        if isinstance(spec, sc.OptSpec):
            absent = _kind(path not in fs, path, fs)
            child = zp.mk_child(zp.ZNode(env, spec.body), z)
            return _or(absent, lambda: self.check(path, child))
        if isinstance(spec, sc.PredSpec):
            b, log = self.eval(spec.expr, path, z)
            if not isinstance(b, bool):
                raise Undefined("TypeError", "a predicate must yield a boolean")
            return self._fail(ConsistencyResult(b, True, log), path, spec,
                              f"predicate {sc.pretty_expr(spec.expr)} is false")
        raise TypeError(f"not a spec: {spec!r}")


def _describe(c) -> str:
    if c is None:
        return "nothing"
    return "a file" if isinstance(c, File) else "a directory"


def explain(fs, path, z, pathset=None):
    """Where the check first fails: ``[(path, spec kind, reason)]``."""
    if pathset is None:
        checker = _Checker(frozenset(), fs, guarded=False)
    else:
        checker = _Checker(pathset, fs)
    result = checker.check(path, z)
    return [] if result.consistent else checker.failures[:1]


def pconsistent(pathset, fs, path, z) -> ConsistencyResult:
    """Partial consistency of ``fs`` at ``path`` against the focus of ``z``."""
    return _Checker(pathset, fs).check(path, z)


def consistent(fs, path, z) -> bool:
    """Full consistency: the same recursion with no path-set guard."""
    return _Checker(frozenset(), fs, guarded=False).check(path, z).consistent


def cover(path, z, pathset, fs) -> bool:
    return pconsistent(pathset, fs, path, z).total


def spec_size(spec) -> int:
    seen = set()

    def size(s):
        if isinstance(s, sc.Ref):
            if s.name in seen:
                return 1
            seen.add(s.name)
            return 1 + size(sc.resolve(s))
        if isinstance(s, sc.PathSpec):
            return 1 + size(s.body)
        if isinstance(s, sc.PairSpec):
            return 1 + size(s.first) + size(s.second)
        if isinstance(s, (sc.CompSpec, sc.OptSpec)):
            return 1 + size(s.body)
        return 1

    return size(spec)


def cover_set(path, z, fs, fuel=None) -> frozenset:
    """Grow a path set from ``{path}`` until the check stops missing paths.

    The result covers the spec whenever any path set does; when the store
    is inconsistent the check can stop early, and the result then is the
    set at which no further paths were reached.
    """
    if fuel is None:
        fuel = max(1, len(fs)) * max(1, spec_size(z.current.spec)) * 4
    pathset = {path}
    for _ in range(fuel):
        missed = set()
        result = _Checker(pathset, fs, on_miss=missed.add).check(path, z)
        if result.total or not missed:
            return frozenset(pathset)
        pathset |= missed
    raise Undefined("FuelExhausted", "cover set did not converge")
