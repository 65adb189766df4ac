"""Line-oriented shell over live transactions.

Several named sessions share one store, each holding its own open
transaction, so conflicts can be staged by hand: work in one session,
``use`` another, commit both.
"""

import shlex
from dataclasses import dataclass, field

from . import speccore as sc
from . import surface
from .errors import Undefined
from .fsmodel import dump_snapshot, format_log
from .prims import show
from .txn import Store, Txn

OK, CONFLICT, ERROR = 0, 1, 2


@dataclass
class Session:
    name: str
    txn: Txn
    history: list = field(default_factory=list)


@dataclass
class Reply:
    text: str
    status: int = OK


# shell command -> the library operation it stands for
LIBRARY_MAP = {
    "down": "Txn.down",
    "up": "Txn.up",
    "into": "Txn.into",
    "into_pair": "Txn.into_pair",
    "into_comp": "Txn.into_comp",
    "into_opt": "Txn.into_opt",
    "out": "Txn.out",
    "next": "Txn.next",
    "prev": "Txn.prev",
    "fetch": "Txn.fetch",
    "store_file": "Txn.run",
    "store_dir": "Txn.store_dir",
    "create_path": "Txn.create_path",
    "verify": "Txn.check",
    "goto": "Txn.goto",
    "goto_name_p": "Txn.goto_name_p",
    "run": "Txn.run",
    "log": "Txn.log",
    "commit": "Txn.commit",
    "abort": "Txn.abort",
    "fs": "Txn.fs",
    "where": "Txn.path",
    "session": "Store.begin",
    "use": "Store.begin",
    "sessions": "Store.begin",
    "help": "Store.begin",
}

HELP = """\
session new NAME | use NAME | sessions
down | up | into | out | next | prev | goto NAME | goto_name_p NAME
fetch | store_file EXPR | store_dir a,b,c | create_path | run COMMAND
verify | log | where | fs | commit | abort"""


class Shell:
    def __init__(self, store: Store, spec, root="/", default_session="main"):
        self.store = store
        self.spec = spec
        self.root = root
        self.sessions = {}
        self.current = None
        self._new(default_session)

    # sessions
    def _new(self, name):
        if name in self.sessions:
            raise ValueError(f"session {name!r} already exists")
        self.sessions[name] = Session(name, self.store.begin(self.spec, self.root))
        self.current = name

    @property
    def session(self) -> Session:
        return self.sessions[self.current]

    @property
    def txn(self) -> Txn:
        return self.session.txn

    def _restart(self):
        self.session.txn = self.store.begin(self.spec, self.root)

    # dispatch
    def execute(self, line: str) -> Reply:
        line = line.strip()
        if not line or line.startswith("#"):
            return Reply("")
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        handler = getattr(self, "cmd_" + word, None)
        if handler is None or word not in LIBRARY_MAP:
            return Reply(f"OpError UnknownCommand: {word!r} (try help)", ERROR)
        self.session.history.append(line)
        try:
            return handler(rest)
        except Undefined as err:
            return Reply(f"OpError {err.code}: {err.message}", ERROR)
        except (surface.SurfaceError, ValueError) as err:
            return Reply(f"OpError SyntaxError: {err}", ERROR)

    def run_script(self, lines, echo=True):
        """Execute lines in order; returns ``(transcript, worst status)``."""
        out, worst = [], OK
        for line in lines:
            r = self.execute(line)
            if echo and line.strip() and not line.strip().startswith("#"):
                out.append(f"[{self.current}]> {line.strip()}")
            if r.text:
                out.append(r.text)
            worst = max(worst, r.status)
        return "\n".join(out), worst

    def _where(self):
        return f"{self.txn.path} ({self.txn.focus.kind})"

    def _nav(self, op):
        getattr(self.txn, op)()
        return Reply(f"ok {self._where()}")

    # navigation
    def cmd_down(self, _):
        return self._nav("down")

    def cmd_up(self, _):
        return self._nav("up")

    def cmd_into(self, _):
        return self._nav("into")

    def cmd_into_pair(self, _):
        return self._nav("into_pair")

    def cmd_into_comp(self, _):
        return self._nav("into_comp")

    def cmd_into_opt(self, _):
        return self._nav("into_opt")

    def cmd_out(self, _):
        return self._nav("out")

    def cmd_next(self, _):
        return self._nav("next")

    def cmd_prev(self, _):
        return self._nav("prev")

    def cmd_goto(self, name):
        self.txn.goto(name)
        return Reply(f"ok {self._where()}")

    def cmd_goto_name_p(self, name):
        self.txn.goto_name_p(name)
        return Reply(f"ok {self._where()}")

    def cmd_where(self, _):
        return Reply(self._where())

    # expressions and updates
    def cmd_fetch(self, _):
        return Reply(show(self.txn.fetch()))

    def cmd_store_file(self, rest):
        self.txn.run(sc.StoreFile(surface.parse_expr(rest)))
        return Reply("ok")

    def cmd_store_dir(self, rest):
        if rest.startswith("{") or rest.startswith("("):
            self.txn.run(sc.StoreDir(surface.parse_expr(rest)))
        else:
            names = [n.strip() for n in rest.split(",") if n.strip()]
            self.txn.store_dir(names)
        return Reply("ok")

    def cmd_create_path(self, _):
        self.txn.create_path()
        return Reply("ok")

    def cmd_run(self, rest):
        self.txn.run(surface.parse_command(rest))
        return Reply(f"ok {self._where()}")

    def cmd_verify(self, _):
        return Reply(self.txn.check().describe())

    def cmd_log(self, _):
        return Reply(format_log(self.txn.log) or "(empty log)")

    def cmd_fs(self, _):
        return Reply(dump_snapshot(self.txn.fs).rstrip("\n"))

    # ending transactions
    def cmd_commit(self, _):
        ok = self.txn.commit()
        self._restart()
        return Reply("Ok", OK) if ok else Reply("TxError", CONFLICT)

    def cmd_abort(self, _):
        self.txn.abort()
        self._restart()
        return Reply("aborted")

    # sessions
    def cmd_session(self, rest):
        args = shlex.split(rest)
        if len(args) != 2 or args[0] != "new":
            return Reply("usage: session new NAME", ERROR)
        self._new(args[1])
        return Reply(f"session {args[1]}")

    def cmd_use(self, name):
        if name not in self.sessions:
            return Reply(f"OpError NoSuchSession: {name!r}", ERROR)
        self.current = name
        return Reply(f"session {name}")

    def cmd_sessions(self, _):
        return Reply("\n".join(("* " if n == self.current else "  ") + n for n in self.sessions))

    def cmd_help(self, _):
        return Reply(HELP)
