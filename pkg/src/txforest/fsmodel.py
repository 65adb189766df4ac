"""Tree-shaped filesystem model.

A file store is a finite map from paths to contents, where contents are
either a file holding a string or a directory holding a set of child
names.  Every mutation goes through :func:`add_node`, :func:`make_file`
or :func:`make_dir`, each of which returns the new store together with
the log of writes it performed.
"""

import base64
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Optional, Union

SEP = "/"


class ModelViolation(Exception):
    """An operation would leave the file store outside the model."""


@dataclass(frozen=True, order=True)
class Path:
    parts: tuple = ()

    def __post_init__(self):
        if not isinstance(self.parts, tuple):
            object.__setattr__(self, "parts", tuple(self.parts))
        for name in self.parts:
            check_name(name)

    @classmethod
    def parse(cls, text: str) -> "Path":
        text = text.strip()
        if not text.startswith(SEP):
            raise ValueError(f"path must be absolute: {text!r}")
        return cls(tuple(p for p in text.split(SEP) if p))

    def __truediv__(self, name: str) -> "Path":
        return _trusted(self.parts + (check_name(name),))

    def __str__(self):
        return SEP + SEP.join(self.parts)

    def __repr__(self):
        return f"Path({str(self)!r})"

    def __len__(self):
        return len(self.parts)

    @property
    def is_root(self) -> bool:
        return not self.parts

    @property
    def name(self) -> str:
        if not self.parts:
            raise ModelViolation("the root path has no name")
        return self.parts[-1]

    def pop(self) -> "Path":
        if not self.parts:
            raise ModelViolation("cannot pop the root path")
        return _trusted(self.parts[:-1])

    def is_prefix_of(self, other: "Path") -> bool:
        """True when ``self`` is an ancestor of, or equal to, ``other``."""
        n = len(self.parts)
        return other.parts[:n] == self.parts

    def ancestors(self):
        for i in range(len(self.parts)):
            yield _trusted(self.parts[:i])


def _trusted(parts) -> Path:
    path = object.__new__(Path)
    object.__setattr__(path, "parts", parts)
    return path


ROOT = Path()


def check_name(name):
    if not isinstance(name, str) or not name or SEP in name or name in (".", ".."):
        raise ValueError(f"invalid path component: {name!r}")
    return name


@dataclass(frozen=True)
class File:
    text: str = ""

    def __str__(self):
        return f"File {self.text!r}"


@dataclass(frozen=True)
class Dir:
    children: frozenset = frozenset()

    def __post_init__(self):
        if not isinstance(self.children, frozenset):
            object.__setattr__(self, "children", frozenset(self.children))

    def __str__(self):
        return "Dir{" + ",".join(sorted(self.children)) + "}"


Contents = Union[File, Dir]


# -- log entries ------------------------------------------------------------

def _show(c):
    return "absent" if c is None else str(c)


@dataclass(frozen=True)
class Read:
    contents: Optional[Contents]
    path: Path

    def __str__(self):
        return f"Read({_show(self.contents)}, {self.path})"


@dataclass(frozen=True)
class WriteFile:
    old: Optional[Contents]
    new: File
    path: Path

    def __str__(self):
        return f"WriteFile({_show(self.old)}, {_show(self.new)}, {self.path})"


@dataclass(frozen=True)
class WriteDir:
    old: Optional[Contents]
    new: Dir
    path: Path

    def __str__(self):
        return f"WriteDir({_show(self.old)}, {_show(self.new)}, {self.path})"


LogEntry = Union[Read, WriteFile, WriteDir]


def is_write(entry) -> bool:
    return isinstance(entry, (WriteFile, WriteDir))


def format_log(log) -> str:
    return "\n".join(str(e) for e in log)


# -- file stores ------------------------------------------------------------

class FileStore(Mapping):
    """Immutable map from :class:`Path` to :class:`File` / :class:`Dir`."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries=None):
        self._entries = dict(entries or {})
        self._hash = None

    @classmethod
    def empty(cls) -> "FileStore":
        return cls({ROOT: Dir()})

    def __getitem__(self, path):
        return self._entries[path]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        if isinstance(other, FileStore):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{p}: {c}" for p, c in sorted(self._entries.items()))
        return "FileStore({" + inner + "})"

    def set(self, path: Path, contents) -> "FileStore":
        entries = dict(self._entries)
        entries[path] = contents
        return FileStore(entries)

    def delete(self, path: Path) -> "FileStore":
        entries = dict(self._entries)
        entries.pop(path, None)
        return FileStore(entries)

    def paths(self):
        return sorted(self._entries)

    def dump(self) -> str:
        return dump_snapshot(self)


def is_well_formed(fs) -> bool:
    if not isinstance(fs.get(ROOT), Dir):
        return False
    for path, contents in fs.items():
        if not path.is_root:
            parent = fs.get(path.pop())
            if not isinstance(parent, Dir) or path.name not in parent.children:
                return False
        if isinstance(contents, Dir):
            for name in contents.children:
                if path / name not in fs:
                    return False
    return True


def close(fs) -> FileStore:
    """Restore well-formedness.

    Directories gain their missing children as empty files; entries not
    reachable from the root through directory child sets are dropped.
    """
    src = fs._entries if isinstance(fs, FileStore) else dict(fs)
    if src.get(ROOT) is None:
        src = dict(src)
        src[ROOT] = Dir()
    out = {}
    stack = [ROOT]
    while stack:
        path = stack.pop()
        contents = src.get(path)
        if contents is None:
            contents = File("")
        out[path] = contents
        if isinstance(contents, Dir):
            stack.extend(path / name for name in contents.children)
    return FileStore(out)


def add_node(fs: FileStore, path: Path, name: str):
    """Make ``path`` a directory containing ``name``, doing minimal work."""
    check_name(name)
    current = fs.get(path)
    if current is None:
        if path.is_root:
            raise ModelViolation("the root directory is missing")
        fs1, log1 = add_node(fs, path.pop(), path.name)
        new = Dir({name})
        log = log1 + [WriteDir(fs1.get(path), new, path)]
        return close(fs1.set(path, new)), log
    if isinstance(current, File):
        new = Dir({name})
        return close(fs.set(path, new)), [WriteDir(current, new, path)]
    if name not in current.children:
        new = Dir(current.children | {name})
        return close(fs.set(path, new)), [WriteDir(current, new, path)]
    return fs, []


def make_file(fs: FileStore, path: Path, text: str):
    if path.is_root:
        raise ModelViolation("the root must stay a directory")
    fs1, log1 = add_node(fs, path.pop(), path.name)
    new = File(text)
    log = log1 + [WriteFile(fs1.get(path), new, path)]
    return close(fs1.set(path, new)), log


def make_dir(fs: FileStore, path: Path, names):
    new = Dir(frozenset(check_name(n) for n in names))
    if path.is_root:
        fs1, log1 = fs, []
    else:
        fs1, log1 = add_node(fs, path.pop(), path.name)
    log = log1 + [WriteDir(fs1.get(path), new, path)]
    return close(fs1.set(path, new)), log


def update(fs: FileStore, entry) -> FileStore:
    """Apply one log entry: reads are ignored, writes set the path then close."""
    if isinstance(entry, Read):
        return fs
    return close(fs.set(entry.path, entry.new))


def from_dict(tree, root=ROOT) -> FileStore:
    """Build a store from nested dicts (directories) and strings (files)."""
    entries = {}

    def walk(path, node):
        if isinstance(node, str):
            entries[path] = File(node)
        else:
            entries[path] = Dir(frozenset(node))
            for name, child in node.items():
                walk(path / name, child)

    walk(root, tree)
    if not root.is_root:
        for anc in root.ancestors():
            sub = Path(root.parts[: len(anc) + 1])
            prev = entries.get(anc)
            kids = prev.children if isinstance(prev, Dir) else frozenset()
            entries[anc] = Dir(kids | {sub.name})
    return FileStore(entries)


# -- snapshot text format ---------------------------------------------------

def dump_snapshot(fs) -> str:
    lines = []
    for path in sorted(fs):
        contents = fs[path]
        if isinstance(contents, File):
            payload = base64.b64encode(contents.text.encode("utf-8")).decode("ascii")
            lines.append(f"{path}\tF\t{payload}")
        else:
            for name in contents.children:
                if "," in name or "\t" in name or "\n" in name:
                    raise ValueError(f"name not representable in snapshot: {name!r}")
            lines.append(f"{path}\tD\t{','.join(sorted(contents.children))}")
    return "\n".join(lines) + "\n"


def load_snapshot(text: str) -> FileStore:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3 or fields[1] not in ("F", "D"):
            raise ValueError(f"line {lineno}: malformed snapshot entry {line!r}")
        path = Path.parse(fields[0])
        if fields[1] == "F":
            entries[path] = File(base64.b64decode(fields[2]).decode("utf-8"))
        else:
            names = [n for n in fields[2].split(",") if n]
            entries[path] = Dir(frozenset(names))
    return FileStore(entries)
