"""The course-grades filestore: score renormalization, statistics and a
grading queue, all run as transactions."""

import random
import string

from . import surface
from .errors import Undefined
from .fsmodel import File, FileStore, Path, from_dict
from .txn import Err, OpFailure, loop_txn, run_txn

GRADES_SPEC = '''\
grades = [hw :: hws | hw <- matches RE "hw[0-9]+"]
students = file
hws = directory {
  max is "max" :: file;
  students is [student :: students | student <- matches RE "[a-z]+[0-9]+"];
}
'''

QUEUE_SPEC = '''\
queue = [item :: file | item <- matches RE "[0-9]+"]
'''

GRADES_ROOT = "/grades"
QUEUE_ROOT = "/queue"
STUDENT_RE = "[a-z]+[0-9]+"


def grades_spec():
    return surface.load_spec(GRADES_SPEC, "grades")


def queue_spec():
    return surface.load_spec(QUEUE_SPEC, "queue")


# -- sample stores ----------------------------------------------------------

def fs0() -> FileStore:
    """The small running example: two homeworks, one graded student."""
    return from_dict({"grades": {
        "hw1": {"max": "100", "aaa17": "87"},
        "hw2": {"max": "50"},
    }})


def student_name(rng: random.Random) -> str:
    letters = "".join(rng.choice(string.ascii_lowercase) for _ in range(3))
    return f"{letters}{rng.randint(10, 99)}"


def build_grades(rng: random.Random, n_students: int, homeworks=("hw1", "hw2"), maximum=100) -> FileStore:
    names = set()
    while len(names) < n_students:
        names.add(student_name(rng))
    tree = {}
    for hw in homeworks:
        entry = {"max": str(maximum)}
        for s in sorted(names):
            entry[s] = str(rng.randint(0, maximum))
        tree[hw] = entry
    return from_dict({"grades": tree})


# -- normalization ----------------------------------------------------------

def affine(cmin: int, cmax: int, gmin: int, gmax: int):
    """Map ``[cmin, cmax]`` onto ``[gmin, gmax]``, rounding halves up."""
    d = max(1, cmax - cmin)

    def f(x: int) -> int:
        return gmin + (2 * (x - cmin) * (gmax - gmin) + d) // (2 * d)

    return f


def _score(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise OpFailure(f"not a score: {text!r}")


def _read(t) -> int:
    t.down()
    v = _score(t.fetch_file())
    t.up()
    return v


def renormalize(f, hw: str, gmin: int):
    """Transaction body rescaling every score of ``hw`` into ``[gmin, max]``.

    ``f(cmin, cmax, gmin, gmax)`` builds the per-score map, e.g. :func:`affine`.
    """
    def program(t):
        t.goto_name_p(hw)
        t.goto("max")
        gmax = _read(t)
        t.goto("students")
        scores = t.fold_comp(lambda acc, c: acc + [_read(c)], [])
        g = f(min(scores), max(scores), gmin, gmax)

        def rescale(c):
            c.down()
            c.store_file(str(g(_score(c.fetch_file()))))
            c.up()

        t.map_comp(rescale)
        return len(scores)
    return program


def expected_renormalize(fs: FileStore, hw: str, gmin: int, f=affine) -> FileStore:
    """The same rescaling computed directly on the store entries."""
    import re

    base = Path(("grades", hw))
    gmax = int(fs[base / "max"].text)
    students = [n for n in sorted(fs[base].children) if re.fullmatch(STUDENT_RE, n)]
    scores = [int(fs[base / n].text) for n in students]
    if not scores:
        return fs
    g = f(min(scores), max(scores), gmin, gmax)
    for n in students:
        fs = fs.set(base / n, File(str(g(int(fs[base / n].text)))))
    return fs


def stats(hw: str):
    """Transaction body returning ``(min, max, mean)`` of the scores of ``hw``."""
    def program(t):
        t.goto_name_p(hw)
        t.goto("students")
        scores = t.fold_comp(lambda acc, c: acc + [_read(c)], [])
        return min(scores), max(scores), sum(scores) / len(scores)
    return program


# -- grading queue ----------------------------------------------------------

WIDTH = 6


def _entries(t):
    t.goto_root()
    t.into_pair()
    try:
        return t.fetch_dir()
    except Undefined:
        return frozenset()


def push(item: str):
    """Append ``item`` to the queue, creating the queue if needed."""
    def program(t):
        names = _entries(t)
        n = max((int(x) for x in names if x.isdigit()), default=0) + 1
        name = str(n).zfill(WIDTH)
        t.store_dir(names | {name})
        t.next()
        t.goto_name_p(name)
        t.store_file(item)
        return name
    return program


def pop():
    """Remove and return the oldest queue item."""
    def program(t):
        names = sorted(x for x in _entries(t) if x.isdigit())
        if not names:
            return Err("EmptyQueue: the queue is empty")
        head = names[0]
        t.next()
        t.goto_name_p(head)
        item = t.fetch_file()
        t.goto_root()
        t.into_pair()
        t.store_dir(t.fetch_dir() - {head})
        return item
    return program


def run_renormalize(store, hw, gmin, loop=True, f=affine):
    runner = loop_txn if loop else run_txn
    return runner(grades_spec(), GRADES_ROOT, renormalize(f, hw, gmin), store)()


def run_stats(store, hw):
    return run_txn(grades_spec(), GRADES_ROOT, stats(hw), store)()


def run_push(store, item):
    return loop_txn(queue_spec(), QUEUE_ROOT, push(item), store)()


def run_pop(store):
    return loop_txn(queue_spec(), QUEUE_ROOT, pop(), store)()
