"""Operations behind the HTTP routes; the command line calls them directly."""

import threading

from .. import demo, surface
from ..consistency import consistent, explain, pconsistent
from ..errors import Undefined
from ..fsmodel import Path, dump_snapshot, load_snapshot
from ..harness import check_serializable, parse_scenario
from ..shell import ERROR, Shell
from ..txn import Store
from ..zipper import mk_root
from .schemas import (
    CheckRequest, CheckResponse, DemoResponse, Failure, ShellRequest, ShellResponse,
    SimulateRequest, SimulateResponse, SnapshotResponse,
)


def check(req: CheckRequest, fs=None) -> CheckResponse:
    """Full (or, with a path set, partial) consistency of a store."""
    try:
        spec = surface.load_spec(req.spec, req.decl)
        store = load_snapshot(req.snapshot) if req.snapshot is not None else fs
        if store is None:
            raise ValueError("no store to check")
        path = Path.parse(req.path)
        z = mk_root(spec)
        if req.partial is None:
            ok, total = consistent(store, path, z), True
            failures = explain(store, path, z)
        else:
            pathset = frozenset(Path.parse(p) for p in req.partial)
            r = pconsistent(pathset, store, path, z)
            ok, total = r.consistent, r.total
            failures = explain(store, path, z, pathset)
    except Undefined as err:
        return CheckResponse(status="undefined", exit_code=2, message=f"{err.code}: {err.message}")
    except (surface.SurfaceError, ValueError) as err:
        return CheckResponse(status="undefined", exit_code=2, message=str(err))
    return CheckResponse(
        status="consistent" if ok else "inconsistent",
        total=total,
        exit_code=0 if ok else 1,
        failures=[Failure(path=str(p), kind=k, reason=r) for p, k, r in failures],
    )


def simulate(req: SimulateRequest) -> SimulateResponse:
    scenario = parse_scenario(req.scenario)
    report = check_serializable(scenario, req.schedules, req.seed)
    return SimulateResponse(
        verdict=report["verdict"],
        completed=report["completed"],
        inconclusive=report["inconclusive"],
        passed=report["passed"],
        failed=report["failed"],
        restarts=report["restarts"],
        oracle_size=report["oracle_size"],
        oracle_digest=report["oracle_digest"],
        report=report,
    )


def _result(r) -> DemoResponse:
    if r.ok:
        return DemoResponse(ok=True, value=r.value)
    return DemoResponse(ok=False, error=str(r.error), exit_code=1 if str(r.error) == "TxError" else 2)


def renormalize(store: Store, hw: str, gmin: int) -> DemoResponse:
    return _result(demo.run_renormalize(store, hw, gmin))


def stats(store: Store, hw: str) -> DemoResponse:
    return _result(demo.run_stats(store, hw))


def queue(store: Store, op: str, item=None) -> DemoResponse:
    if op == "push":
        return _result(demo.run_push(store, item or ""))
    return _result(demo.run_pop(store))


class Service:
    """State held by a running server: one store and a shell over it."""

    def __init__(self, store: Store, spec_text: str = demo.GRADES_SPEC, decl=None, root="/grades"):
        self.store = store
        self.spec_text = spec_text
        self.decl = decl
        self.root = root
        self.lock = threading.Lock()
        self.shell = Shell(store, surface.load_spec(spec_text, decl), root)

    def snapshot(self) -> SnapshotResponse:
        return SnapshotResponse(snapshot=dump_snapshot(self.store.fs))

    def shell_line(self, req: ShellRequest) -> ShellResponse:
        with self.lock:
            if req.session and req.session != self.shell.current:
                if req.session not in self.shell.sessions:
                    self.shell.execute(f"session new {req.session}")
                else:
                    self.shell.execute(f"use {req.session}")
            r = self.shell.execute(req.line)
            return ShellResponse(output=r.text, status=r.status, session=self.shell.current)

    def new_session(self, name, spec_text=None, decl=None, root=None) -> ShellResponse:
        with self.lock:
            if spec_text is not None or root is not None:
                spec = surface.load_spec(spec_text or self.spec_text, decl or self.decl)
                self.shell.spec = spec
                self.shell.root = root or self.root
            try:
                r = self.shell.execute(f"session new {name}")
            except ValueError as err:
                return ShellResponse(output=str(err), status=ERROR, session=self.shell.current)
            return ShellResponse(output=r.text, status=r.status, session=self.shell.current)
