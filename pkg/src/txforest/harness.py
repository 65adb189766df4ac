"""Serializability testing.

A scenario is an initial store plus a pool of transactions.  Random
schedules drive the global step relation; every run that empties the
pool must end in a store produced by running the transactions one after
another in some order.
"""

import hashlib
import itertools
import json
import random
import threading
from dataclasses import dataclass
from typing import Optional

from . import speccore as sc
from . import surface
from .engine import run_program
from .errors import Undefined
from .fsmodel import FileStore, Path, dump_snapshot, load_snapshot
from .gen import random_fs, random_program, spec_from_fs
from .txn import check_log, start_state, step

MAX_ORACLE_TXNS = 6


@dataclass(frozen=True)
class TxnDecl:
    name: str
    spec: sc.Spec
    root: Path
    cmd: sc.Command
    decl: str = ""


@dataclass(frozen=True)
class Scenario:
    fs: FileStore
    txns: tuple
    name: str = "scenario"
    spec_text: str = ""


@dataclass(frozen=True)
class Schedule:
    """A seed, or an explicit list of ``(tid, action)`` decisions to replay."""

    seed: int = 0
    decisions: Optional[tuple] = None


@dataclass
class RunResult:
    schedule: Schedule
    final: Optional[FileStore]
    events: list
    decisions: list
    committed: tuple = ()
    aborted: tuple = ()
    completed: bool = True

    @property
    def restarts(self) -> int:
        return sum(1 for e in self.events if e.kind == "restart")


def run_schedule(scenario: Scenario, schedule: Schedule, max_steps=20_000, checker=check_log) -> RunResult:
    state = start_state(scenario.fs, [(t.name, t.spec, t.root, t.cmd) for t in scenario.txns])
    rng = random.Random(schedule.seed)
    replay = list(schedule.decisions) if schedule.decisions is not None else None
    events, decisions = [], []
    for _ in range(max_steps):
        if not state.pool:
            break
        if replay is not None:
            if not replay:
                break
            tid, action = replay.pop(0)
        else:
            tid = rng.choice(state.live())
            action = "commit" if state.find(tid).done else "local"
        decisions.append((tid, action))
        state, ev = step(state, tid, action, checker)
        events.append(ev)
    done = not state.pool
    return RunResult(schedule, state.fs if done else None, events, decisions,
                     state.committed, state.aborted, done)


def serial_run(scenario: Scenario, order, fs=None):
    """Run the named transactions one after another; undefined ones are skipped."""
    by_name = {t.name: t for t in scenario.txns}
    fs = scenario.fs if fs is None else fs
    for name in order:
        t = by_name[name]
        try:
            fs = run_program(t.root, t.spec, t.cmd, fs)
        except Undefined:
            pass
    return fs


def serial_oracle(scenario: Scenario) -> set:
    names = [t.name for t in scenario.txns]
    if len(names) > MAX_ORACLE_TXNS:
        raise ValueError(f"at most {MAX_ORACLE_TXNS} transactions are supported by the oracle")
    return {serial_run(scenario, order) for order in itertools.permutations(names)}


def oracle_digest(states) -> str:
    h = hashlib.sha256()
    for text in sorted(dump_snapshot(fs) for fs in states):
        h.update(text.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()


def schedule_seeds(seed: int, n: int):
    rng = random.Random(seed)
    return [rng.randrange(2 ** 32) for _ in range(n)]


def check_serializable(scenario: Scenario, n_schedules: int, seed: int = 0,
                       checker=check_log, max_steps=20_000) -> dict:
    """Run ``n_schedules`` random schedules against the serial oracle."""
    oracle = serial_oracle(scenario)
    report = {
        "scenario": scenario.name,
        "schedules": n_schedules,
        "seed": seed,
        "oracle_size": len(oracle),
        "oracle_digest": oracle_digest(oracle),
        "completed": 0,
        "inconclusive": 0,
        "passed": 0,
        "failed": 0,
        "restarts": 0,
        "warnings": [],
        "runs": [],
        "counterexample": None,
    }
    if n_schedules == 0:
        report["warnings"].append("no schedules were run; the verdict is vacuous")
    for s in schedule_seeds(seed, n_schedules):
        r = run_schedule(scenario, Schedule(s), max_steps, checker)
        report["restarts"] += r.restarts
        entry = {"seed": s, "completed": r.completed, "restarts": r.restarts,
                 "commit_order": list(r.committed), "aborted": list(r.aborted)}
        if not r.completed:
            report["inconclusive"] += 1
            entry["verdict"] = "inconclusive"
        else:
            report["completed"] += 1
            ok = r.final in oracle
            commit_ok = serial_run(scenario, r.committed) == r.final
            entry["commit_order_matches"] = commit_ok
            if not commit_ok:
                report["warnings"].append(f"schedule {s}: commit-order fold differs from the final store")
            if ok:
                report["passed"] += 1
                entry["verdict"] = "pass"
            else:
                report["failed"] += 1
                entry["verdict"] = "fail"
                if report["counterexample"] is None:
                    report["counterexample"] = {
                        "seed": s,
                        "decisions": [list(d) for d in r.decisions],
                        "final": dump_snapshot(r.final),
                    }
        report["runs"].append(entry)
    report["verdict"] = "pass" if report["failed"] == 0 else "fail"
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


# -- scenario files ---------------------------------------------------------

def parse_scenario(text: str, name="scenario") -> Scenario:
    """Read the ``%spec`` / ``%fs`` / ``%txn`` block format."""
    blocks = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("%"):
            head, *attrs = line[1:].split()
            opts = {}
            for a in attrs:
                key, sep, value = a.partition("=")
                if not sep:
                    raise ValueError(f"line {lineno}: expected key=value, found {a!r}")
                opts[key] = value
            blocks.append((head, opts, [], lineno))
        elif blocks:
            blocks[-1][2].append(line)
        elif line.strip() and not line.lstrip().startswith("#"):
            raise ValueError(f"line {lineno}: text outside a block")
    spec_text, fs, txns = "", None, []
    table = None
    for head, opts, lines, lineno in blocks:
        body = "\n".join(lines)
        if head == "spec":
            spec_text = body
            table = surface.compile_text(body)
        elif head == "fs":
            fs = load_snapshot(body)
        elif head == "txn":
            if table is None:
                raise ValueError(f"line {lineno}: %txn before %spec")
            tname = opts.get("name", f"t{len(txns) + 1}")
            decl = opts.get("decl") or next(iter(table))
            if decl not in table:
                raise ValueError(f"line {lineno}: no declaration named {decl!r}")
            root = Path.parse(opts.get("root", "/"))
            txns.append(TxnDecl(tname, table[decl], root, surface.parse_command(body), decl))
        else:
            raise ValueError(f"line {lineno}: unknown block %{head}")
    if fs is None:
        raise ValueError("scenario has no %fs block")
    return Scenario(fs, tuple(txns), name, spec_text)


def dump_scenario(scenario: Scenario) -> str:
    """Inverse of :func:`parse_scenario` for scenarios whose transactions
    share one spec."""
    specs = {}
    for t in scenario.txns:
        specs.setdefault(t.decl or f"s{len(specs) + 1}", t.spec)
    lines = ["%spec"]
    if scenario.spec_text:
        lines.append(scenario.spec_text.rstrip("\n"))
    else:
        lines.extend(f"{n} = {sc.pretty(s)}" for n, s in specs.items())
    lines.append("%fs")
    lines.append(dump_snapshot(scenario.fs).rstrip("\n"))
    names = {id(s): n for n, s in specs.items()}
    for t in scenario.txns:
        decl = t.decl or names.get(id(t.spec), next(iter(specs)))
        lines.append(f"%txn name={t.name} decl={decl} root={t.root}")
        lines.append(sc.pretty_command(t.cmd))
    return "\n".join(lines) + "\n"


def random_scenario(rng: random.Random, n_txns=None, max_cmds=8, max_nodes=12, name="generated") -> Scenario:
    fs = random_fs(rng, max_nodes=max_nodes)
    spec = spec_from_fs(rng, fs, wobble=0.05)
    n = n_txns or rng.randint(2, 3)
    txns = []
    for i in range(n):
        cmd, _ = random_program(rng, spec, Path(), fs, n_cmds=rng.randint(2, max_cmds))
        txns.append(TxnDecl(f"t{i + 1}", spec, Path(), cmd, "s"))
    return Scenario(fs, tuple(txns), name)


# -- cooperative thread scheduling -----------------------------------------

class CoopScheduler:
    """Run real threads one at a time, switching at seeded random points.

    Install :meth:`pause` as a store hook; every transaction operation
    then hands control to a thread picked by the seeded generator, so a
    run with a given seed always interleaves the same way.
    """

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.cond = threading.Condition()
        self.active = []
        self.turn = None
        self.local = threading.local()
        self.switches = 0

    def _pick(self):
        self.turn = self.rng.choice(self.active) if self.active else None
        self.cond.notify_all()

    def pause(self):
        me = getattr(self.local, "ident", None)
        if me is None:
            return
        with self.cond:
            self.switches += 1
            self._pick()
            self.cond.wait_for(lambda: self.turn == me)

    def run(self, fns):
        results = [None] * len(fns)
        errors = []

        def worker(i, fn):
            self.local.ident = i
            with self.cond:
                self.cond.wait_for(lambda: self.turn == i)
            try:
                results[i] = fn()
            except BaseException as err:  # surfaced to the caller below
                errors.append(err)
            finally:
                with self.cond:
                    self.active.remove(i)
                    self._pick()

        threads = [threading.Thread(target=worker, args=(i, fn), daemon=True) for i, fn in enumerate(fns)]
        with self.cond:
            self.active = list(range(len(fns)))
        for t in threads:
            t.start()
        with self.cond:
            self._pick()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]
        return results
