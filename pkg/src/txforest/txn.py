"""Transactions: conflict detection, merge, the global step relation and
the user-facing ``run_txn`` / ``loop_txn`` API.

Each transaction runs against a private snapshot and records a log.  At
commit the log is validated against every global log entry written since
the transaction started; on success its writes are merged into the
global store under one fresh timestamp, otherwise it restarts.
"""

import itertools
import os
import shutil
import threading
from dataclasses import dataclass, replace
from pathlib import Path as OsPath
from typing import Optional

from . import speccore as sc
from . import zipper as zp
from .engine import Walker, exec_cmd, goto, goto_name_p, enter_comp, initial, local_step
from .errors import Undefined
from .fsmodel import (
    ROOT, Dir, File, FileStore, ModelViolation, Path, Read, WriteDir,
    is_write, update,
)

DEFAULT_MAX_RETRIES = 64


# -- logs -------------------------------------------------------------------

def extract_paths(log) -> set:
    return {e.path for e in log}


def conflict_path(p: Path, entry) -> bool:
    """A write conflicts with every path it is prefix-related to."""
    if isinstance(entry, Read):
        return False
    q = entry.path
    return q.is_prefix_of(p) or p.is_prefix_of(q)


def check_log(glog, start: int, log) -> bool:
    paths = extract_paths(log)
    for t, entry in glog:
        if t >= start and any(conflict_path(p, entry) for p in paths):
            return False
    return True


def merge(fs, log):
    for entry in log:
        fs = update(fs, entry)
    return fs


def writes_only(log):
    return [e for e in log if is_write(e)]


@dataclass(frozen=True)
class WritePath:
    """Marker left by canonization where a write happened."""

    path: Path


def canonize(log):
    """Keep the reads a log depends on and mark the paths it wrote."""
    out, reads, writes = [], set(), []

    def necessary(contents, p):
        if p in reads or any(w.is_prefix_of(p) for w in writes):
            return
        out.append(Read(contents, p))
        reads.add(p)

    def wrote(p):
        out.append(WritePath(p))
        writes.append(p)

    for e in log:
        if isinstance(e, Read):
            necessary(e.contents, e.path)
        elif isinstance(e, WriteDir) and isinstance(e.old, Dir):
            necessary(e.old, e.path)
            for name in sorted(e.old.children ^ e.new.children):
                wrote(e.path / name)
        else:
            necessary(e.old, e.path)
            wrote(e.path)
    return out


def compat(fs, log) -> bool:
    """True when every read the log depends on agrees with ``fs``."""
    return all(fs.get(e.path) == e.contents for e in canonize(log) if isinstance(e, Read))


# -- timestamps -------------------------------------------------------------

_ts_lock = threading.Lock()
_ts_counter = itertools.count(1)


def fresh_ts() -> int:
    with _ts_lock:
        return next(_ts_counter)


# -- the global step relation -----------------------------------------------

@dataclass(frozen=True)
class Transaction:
    tid: str
    spec: sc.Spec
    root: Path
    full_cmd: sc.Command
    lctx: zp.LocalContext
    g: object
    cmd: Optional[sc.Command]
    start: int
    log: tuple = ()
    restarts: int = 0

    @property
    def done(self) -> bool:
        return self.cmd is None


def new_transaction(tid, spec, root, cmd, fs, ts) -> Transaction:
    lctx, g = initial(root, spec, fs)
    return Transaction(tid, spec, root, cmd, lctx, g, cmd, ts)


def restart(txn: Transaction, fs, ts) -> Transaction:
    path, z = zp.goto_root(txn.lctx.path, txn.lctx.zipper)
    lctx = zp.LocalContext(sc.EMPTY_ENV, path, z)
    g = replace(txn.g, pathset=frozenset({path}), fs=fs)
    return replace(txn, lctx=lctx, g=g, cmd=txn.full_cmd, start=ts, log=(),
                   restarts=txn.restarts + 1)


def is_initial(txn: Transaction) -> bool:
    return txn.lctx.zipper.parent is None and not txn.log and txn.cmd == txn.full_cmd


@dataclass(frozen=True)
class GlobalState:
    fs: FileStore
    glog: tuple = ()
    pool: tuple = ()
    next_ts: int = 1
    committed: tuple = ()
    aborted: tuple = ()

    def find(self, tid) -> Transaction:
        for t in self.pool:
            if t.tid == tid:
                return t
        raise KeyError(tid)

    def live(self):
        return [t.tid for t in self.pool]


@dataclass(frozen=True)
class Event:
    tid: str
    kind: str  # local | commit | restart | abort | noop
    detail: str = ""


def start_state(fs, txns) -> GlobalState:
    """``txns`` is a sequence of ``(tid, spec, root, cmd)``."""
    pool = []
    ts = 1
    for tid, spec, root, cmd in txns:
        pool.append(new_transaction(tid, spec, root, cmd, fs, ts))
        ts += 1
    return GlobalState(fs, (), tuple(pool), ts)


def _swap(pool, txn):
    return tuple(txn if t.tid == txn.tid else t for t in pool)


def _drop(pool, tid):
    return tuple(t for t in pool if t.tid != tid)


def step(state: GlobalState, tid: str, action: str, checker=check_log):
    """Apply one scheduler decision; returns ``(state, event)``."""
    txn = state.find(tid)
    if action == "local":
        if txn.done:
            return state, Event(tid, "noop", "transaction already finished")
        try:
            rest, lctx, g, log = local_step(txn.cmd, txn.lctx, txn.g)
        except Undefined as err:
            return replace(state, pool=_drop(state.pool, tid),
                           aborted=state.aborted + (tid,)), Event(tid, "abort", err.code)
        txn = replace(txn, cmd=rest, lctx=lctx, g=g, log=txn.log + tuple(log))
        return replace(state, pool=_swap(state.pool, txn)), Event(tid, "local")
    if action == "commit":
        if not txn.done:
            return state, Event(tid, "noop", "cannot commit an unfinished transaction")
        ts = state.next_ts
        if checker(state.glog, txn.start, txn.log):
            return replace(
                state,
                fs=merge(state.fs, txn.log),
                glog=state.glog + tuple((ts, e) for e in txn.log),
                pool=_drop(state.pool, tid),
                next_ts=ts + 1,
                committed=state.committed + (tid,),
            ), Event(tid, "commit")
        txn = restart(txn, state.fs, ts)
        return replace(state, pool=_swap(state.pool, txn), next_ts=ts + 1), Event(tid, "restart")
    raise ValueError(f"unknown action {action!r}")


# -- results ----------------------------------------------------------------

@dataclass(frozen=True)
class TxError:
    def __str__(self):
        return "TxError"


@dataclass(frozen=True)
class OpError:
    message: str

    def __str__(self):
        return f"OpError: {self.message}"


@dataclass(frozen=True)
class RetryExhausted:
    attempts: int

    def __str__(self):
        return f"RetryExhausted: gave up after {self.attempts} attempts"


@dataclass(frozen=True)
class Ok:
    value: object = None
    ok = True


@dataclass(frozen=True)
class Err:
    error: object
    ok = False


class OpFailure(Exception):
    """Raised by user programs to abort with an operation error."""


# -- storage adapters -------------------------------------------------------

class MemoryAdapter:
    def __init__(self, fs=None):
        self._fs = fs if fs is not None else FileStore.empty()

    def snapshot(self):
        return self._fs

    def read(self, path):
        return self._fs.get(path)

    def apply(self, log):
        self._fs = merge(self._fs, log)


class PosixAdapter:
    """Maps the model onto a real directory tree rooted at ``root``."""

    def __init__(self, root):
        self.root = OsPath(root)
        if not self.root.is_dir():
            raise ModelViolation(f"{root} is not a directory")

    def _os(self, path: Path) -> OsPath:
        return self.root.joinpath(*path.parts)

    def read(self, path):
        return self._read(self._os(path))

    def _read(self, p: OsPath):
        if p.is_symlink():
            raise ModelViolation(f"{p}: symbolic links are not supported")
        if p.is_dir():
            return Dir(frozenset(os.listdir(p)))
        if p.is_file():
            return File(p.read_text(encoding="utf-8"))
        if p.exists():
            raise ModelViolation(f"{p}: special files are not supported")
        return None

    def snapshot(self):
        entries = {}
        stack = [ROOT]
        while stack:
            path = stack.pop()
            c = self.read(path)
            entries[path] = c
            if isinstance(c, Dir):
                stack.extend(path / n for n in c.children)
        return FileStore(entries)

    def apply(self, log):
        for e in log:
            if not is_write(e):
                continue
            target = self._os(e.path)
            if not e.path.is_root and not target.parent.is_dir():
                continue
            if isinstance(e.new, File):
                if target.is_dir():
                    shutil.rmtree(target)
                target.write_text(e.new.text, encoding="utf-8")
            else:
                if target.exists() and not target.is_dir():
                    target.unlink()
                target.mkdir(exist_ok=True)
                for name in os.listdir(target):
                    if name not in e.new.children:
                        child = target / name
                        if child.is_dir() and not child.is_symlink():
                            shutil.rmtree(child)
                        else:
                            child.unlink()
                for name in e.new.children:
                    child = target / name
                    if not child.exists():
                        child.write_text("", encoding="utf-8")


# -- the shared store -------------------------------------------------------

@dataclass
class StoreStats:
    commits: int = 0
    conflicts: int = 0
    op_errors: int = 0


class Store:
    """Global state shared by concurrently running transactions."""

    def __init__(self, adapter=None, fs=None):
        if adapter is None:
            adapter = MemoryAdapter(fs)
        self.adapter = adapter
        self._fs = adapter.snapshot()
        self._glog = []
        self._active = {}
        self._lock = threading.Lock()
        self.stats = StoreStats()
        self.hook = None

    @property
    def fs(self):
        return self._fs

    def pause(self):
        if self.hook is not None:
            self.hook()

    def begin(self, spec, path="/") -> "Txn":
        return Txn(self, spec, Path.parse(path) if isinstance(path, str) else path)

    def _start(self, token):
        with self._lock:
            ts = fresh_ts()
            self._active[token] = ts
            return ts, self._fs

    def _finish(self, token):
        with self._lock:
            self._active.pop(token, None)

    def _commit(self, token, start, log) -> bool:
        with self._lock:
            self._active.pop(token, None)
            if not check_log(self._glog, start, log):
                self.stats.conflicts += 1
                return False
            writes = writes_only(log)
            if writes:
                self.adapter.apply(writes)
                self._fs = merge(self._fs, writes)
            ts = fresh_ts()
            self._glog.extend((ts, e) for e in log)
            self.stats.commits += 1
            self._prune()
            return True

    def _prune(self):
        if not self._active:
            self._glog.clear()
            return
        oldest = min(self._active.values())
        self._glog = [(t, e) for t, e in self._glog if t >= oldest]


class Txn:
    """A live transaction with a cursor over its specification.

    Navigation and update methods return the transaction so calls can be
    chained.  A failed side condition raises :class:`Undefined` and leaves
    the cursor where it was.
    """

    def __init__(self, store: Store, spec, path: Path):
        self.store = store
        self.spec = spec
        self.root = path
        self._token = object()
        self.start, fs = store._start(self._token)
        lctx, g = initial(path, spec, fs)
        self.w = Walker(lctx, g, [])
        self.closed = False

    # state
    @property
    def path(self) -> Path:
        return self.w.lctx.path

    @property
    def focus(self):
        return self.w.spec

    @property
    def env(self):
        return self.w.lctx.env

    @property
    def log(self):
        return list(self.w.log)

    @property
    def fs(self):
        return self.w.g.fs

    def _atomic(self, fn):
        if self.closed:
            raise Undefined("TransactionClosed", "the transaction already ended")
        self.store.pause()
        saved = (self.w.lctx, self.w.g, len(self.w.log))
        try:
            return fn()
        except Undefined:
            self.w.lctx, self.w.g = saved[0], saved[1]
            del self.w.log[saved[2]:]
            raise

    # navigation
    def nav(self, op):
        self._atomic(lambda: self.w.nav(op))
        return self

    def down(self):
        return self.nav("down")

    def up(self):
        return self.nav("up")

    def into_pair(self):
        return self.nav("into_pair")

    def into_comp(self):
        return self.nav("into_comp")

    def into_opt(self):
        return self.nav("into_opt")

    def out(self):
        return self.nav("out")

    def next(self):
        return self.nav("next")

    def prev(self):
        return self.nav("prev")

    def into(self):
        kind = self.focus.kind
        ops = {"pair": "into_pair", "comp": "into_comp", "opt": "into_opt"}
        if kind not in ops:
            raise Undefined("SpecMismatch", f"cannot go into a {kind} node")
        return self.nav(ops[kind])

    # expressions
    def eval(self, e):
        return self._atomic(lambda: self.w.eval(e))

    def fetch(self, kind=None):
        return self.eval(sc.Fetch(kind or self.focus.kind))

    def fetch_file(self):
        return self.fetch("file")

    def fetch_dir(self):
        return self.fetch("dir")

    def fetch_path(self):
        return self.fetch("path")

    def fetch_comp(self):
        return self.fetch("comp")

    def fetch_opt(self):
        return self.fetch("opt")

    def fetch_pred(self):
        return self.fetch("pred")

    def verify(self):
        return self.eval(sc.Verify())

    def check(self):
        """Like :meth:`verify` but returns both consistency flags."""
        from .consistency import pconsistent

        def go():
            path, z = zp.goto_root(self.w.lctx.path, self.w.lctx.zipper)
            r = pconsistent(self.w.g.pathset, self.w.g.fs, path, z)
            self.w.log.extend(r.log)
            return r
        return self._atomic(go)

    # updates
    def store_file(self, text):
        self._atomic(lambda: self.w.update(sc.StoreFile(sc.Lit(text))))
        return self

    def store_dir(self, names):
        self._atomic(lambda: self.w.update(sc.StoreDir(sc.Lit(frozenset(names)))))
        return self

    def create_path(self):
        self._atomic(lambda: self.w.update(sc.CreatePath()))
        return self

    def run(self, cmd):
        """Execute a core command at the cursor."""
        def go():
            lctx, g, log = exec_cmd(cmd, self.w.lctx, self.w.g)
            self.w.lctx, self.w.g = lctx, g
            self.w.log.extend(log)
        self._atomic(go)
        return self

    # helpers
    def goto(self, name):
        self._atomic(lambda: goto(self.w, name))
        return self

    def goto_name_p(self, name):
        self._atomic(lambda: goto_name_p(self.w, name))
        return self

    def goto_root(self):
        def go():
            path, z = zp.goto_root(self.w.lctx.path, self.w.lctx.zipper)
            self.w.lctx = zp.LocalContext(self.w.lctx.env, path, z)
        self._atomic(go)
        return self

    def fold_comp(self, fn, acc):
        """Visit the comprehension children left to right.

        ``fn(acc, txn)`` runs with the cursor on each child and must leave
        it there; the cursor ends on the comprehension node.
        """
        self._atomic(lambda: enter_comp(self.w))
        while True:
            acc = fn(acc, self)
            if self.w.lctx.zipper.right.is_empty():
                break
            self.next()
        self.out()
        return acc

    def map_comp(self, fn):
        self.fold_comp(lambda _acc, t: fn(t), None)
        return self

    # ending
    def commit(self) -> bool:
        if self.closed:
            raise Undefined("TransactionClosed", "the transaction already ended")
        self.store.pause()
        self.closed = True
        return self.store._commit(self._token, self.start, self.w.log)

    def abort(self):
        if not self.closed:
            self.closed = True
            self.store._finish(self._token)


_default_store = None
_default_lock = threading.Lock()


def default_store() -> Store:
    global _default_store
    with _default_lock:
        if _default_store is None:
            _default_store = Store()
        return _default_store


def set_default_store(store: Store):
    global _default_store
    with _default_lock:
        _default_store = store


def run_txn(spec, path, f, store: Optional[Store] = None):
    """Return a thunk that runs ``f`` once inside a transaction.

    The thunk yields ``Ok(value)``, ``Err(OpError(msg))`` when ``f`` hits
    an undefined operation, or ``Err(TxError())`` on a commit conflict.
    ``f`` may return a plain value or an ``Ok`` / ``Err`` result.
    """
    def thunk():
        s = store or default_store()
        t = s.begin(spec, path)
        try:
            value = f(t)
        except (Undefined, OpFailure, ModelViolation) as err:
            t.abort()
            s.stats.op_errors += 1
            return Err(OpError(str(err)))
        except BaseException:
            t.abort()
            raise
        if isinstance(value, Err):
            t.abort()
            s.stats.op_errors += 1
            return Err(value.error if isinstance(value.error, OpError) else OpError(str(value.error)))
        if isinstance(value, Ok):
            value = value.value
        if t.commit():
            return Ok(value)
        return Err(TxError())
    return thunk


def max_retries() -> int:
    raw = os.environ.get("TXF_MAX_RETRIES")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_MAX_RETRIES


def loop_txn(spec, path, f, store: Optional[Store] = None, retries: Optional[int] = None):
    """Like :func:`run_txn` but retries on conflict.

    Operation errors surface immediately; running out of retries yields
    ``Err(RetryExhausted(n))``.
    """
    def thunk():
        limit = retries if retries is not None else max_retries()
        attempt = run_txn(spec, path, f, store)
        for _ in range(limit):
            r = attempt()
            if r.ok or not isinstance(r.error, TxError):
                return r
        return Err(RetryExhausted(limit))
    return thunk
