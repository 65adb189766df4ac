"""Zippers over specifications.

A zipper focuses one node ``(env, spec)`` and remembers its parent zipper
together with the siblings to the left (nearest first) and to the right.
Sibling sequences are persistent cons lists, so every move allocates a
constant number of cells.  The right siblings produced by entering a
comprehension are kept as a lazy tail that materialises one node at a time.
"""

from dataclasses import dataclass
from typing import Optional

from . import speccore as sc
from .errors import Undefined
from .fsmodel import Path


@dataclass(frozen=True)
class ZNode:
    env: sc.Env
    spec: sc.Spec

    @property
    def resolved(self):
        return sc.resolve(self.spec)


# -- sibling sequences ------------------------------------------------------

class Siblings:
    """Immutable sequence of :class:`ZNode` with O(1) cons/head/tail."""

    def is_empty(self) -> bool:
        raise NotImplementedError

    def head(self) -> ZNode:
        raise NotImplementedError

    def tail(self) -> "Siblings":
        raise NotImplementedError

    def cons(self, node) -> "Siblings":
        return Cons(node, self)

    def __iter__(self):
        seq = self
        while not seq.is_empty():
            yield seq.head()
            seq = seq.tail()

    def __len__(self):
        return sum(1 for _ in self)

    def __eq__(self, other):
        if not isinstance(other, Siblings):
            return NotImplemented
        a, b = self, other
        while True:
            if a is b:
                return True
            if a.is_empty() or b.is_empty():
                return a.is_empty() and b.is_empty()
            if a.head() != b.head():
                return False
            a, b = a.tail(), b.tail()

    __hash__ = None

    def __repr__(self):
        return "[" + ", ".join(repr(n) for n in self) + "]"


class _Nil(Siblings):
    def is_empty(self):
        return True

    def head(self):
        raise Undefined("NoSibling", "no sibling in that direction")

    def tail(self):
        raise Undefined("NoSibling", "no sibling in that direction")


NIL = _Nil()


class Cons(Siblings):
    __slots__ = ("_head", "_tail")

    def __init__(self, head, tail):
        self._head = head
        self._tail = tail

    def is_empty(self):
        return False

    def head(self):
        return self._head

    def tail(self):
        return self._tail


class CompTail(Siblings):
    """The children ``env[var := values[i]]`` for ``i >= start``."""

    __slots__ = ("env", "var", "spec", "values", "start")

    def __init__(self, env, var, spec, values, start=0):
        self.env = env
        self.var = var
        self.spec = spec
        self.values = values
        self.start = start

    def is_empty(self):
        return self.start >= len(self.values)

    def head(self):
        if self.is_empty():
            raise Undefined("NoSibling", "no sibling in that direction")
        return ZNode(self.env.bind(self.var, self.values[self.start]), self.spec)

    def tail(self):
        if self.is_empty():
            raise Undefined("NoSibling", "no sibling in that direction")
        return CompTail(self.env, self.var, self.spec, self.values, self.start + 1)


def siblings(nodes) -> Siblings:
    out = NIL
    for node in reversed(list(nodes)):
        out = Cons(node, out)
    return out


# -- zippers ----------------------------------------------------------------

@dataclass(frozen=True)
class Zipper:
    parent: Optional["Zipper"]
    left: Siblings
    current: ZNode
    right: Siblings

    @property
    def spec(self):
        return self.current.resolved

    @property
    def env(self):
        return self.current.env

    def depth(self) -> int:
        n, z = 0, self.parent
        while z is not None:
            n, z = n + 1, z.parent
        return n


def mk_root(spec, env=sc.EMPTY_ENV) -> Zipper:
    return Zipper(None, NIL, ZNode(env, spec), NIL)


def mk_child(node: ZNode, parent: Zipper, right: Siblings = NIL) -> Zipper:
    return Zipper(parent, NIL, node, right)


def shift_right(z: Zipper) -> Zipper:
    if z.right.is_empty():
        raise Undefined("NoSibling", "no right sibling")
    return Zipper(z.parent, z.left.cons(z.current), z.right.head(), z.right.tail())


def shift_left(z: Zipper) -> Zipper:
    if z.left.is_empty():
        raise Undefined("NoSibling", "no left sibling")
    return Zipper(z.parent, z.left.tail(), z.left.head(), z.right.cons(z.current))


def parent_is_path(z: Zipper) -> bool:
    return z.parent is not None and isinstance(z.parent.spec, sc.PathSpec)


def goto_root(path: Path, z: Zipper):
    """Unwind to the root zipper, popping one component per path parent."""
    while z.parent is not None:
        if isinstance(z.parent.spec, sc.PathSpec):
            path = path.pop()
        z = z.parent
    return path, z


@dataclass(frozen=True)
class LocalContext:
    env: sc.Env
    path: Path
    zipper: Zipper

    @property
    def spec(self):
        return self.zipper.spec

    def __repr__(self):
        return f"LocalContext(path={self.path}, focus={type(self.zipper.spec).__name__})"
