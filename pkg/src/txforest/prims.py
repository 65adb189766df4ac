"""Pure builtin functions available to expressions."""

import re


class PrimError(Exception):
    pass


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise PrimError(f"expected an integer, got {show(v)}")
    return v


def _bool(v):
    if not isinstance(v, bool):
        raise PrimError(f"expected a boolean, got {show(v)}")
    return v


def _str(v):
    if not isinstance(v, str):
        raise PrimError(f"expected a string, got {show(v)}")
    return v


def _coll(v):
    if not isinstance(v, (tuple, frozenset)):
        raise PrimError(f"expected a list or set, got {show(v)}")
    return v


def ordered(v):
    """Iteration order for collections: lists as given, sets sorted."""
    _coll(v)
    if isinstance(v, frozenset):
        return tuple(sorted(v, key=_sort_key))
    return v


def _sort_key(x):
    return (type(x).__name__, x)


def _same_type(a, b):
    if type(a) is not type(b):
        raise PrimError(f"cannot compare {show(a)} with {show(b)}")


def _regex(pattern):
    try:
        return re.compile(_str(pattern))
    except re.error as err:
        raise PrimError(f"bad regular expression {pattern!r}: {err}")


def lines_of(s):
    return frozenset(line for line in _str(s).splitlines() if line)


def filter_(coll, pattern):
    rx = _regex(pattern)
    kept = [x for x in ordered(coll) if isinstance(x, str) and rx.fullmatch(x)]
    return frozenset(kept) if isinstance(coll, frozenset) else tuple(kept)


def matches(s, pattern):
    return _regex(pattern).fullmatch(_str(s)) is not None


def length(v):
    if isinstance(v, str):
        return len(v)
    return len(_coll(v))


def to_int(v):
    if isinstance(v, bool):
        raise PrimError("cannot convert a boolean to an integer")
    if isinstance(v, int):
        return v
    try:
        return int(_str(v).strip())
    except ValueError:
        raise PrimError(f"not an integer: {v!r}")


def to_str(v):
    return show(v) if not isinstance(v, str) else v


def _set(v):
    return frozenset(_coll(v))


def div(a, b):
    if _int(b) == 0:
        raise PrimError("division by zero")
    return _int(a) // b


def mod(a, b):
    if _int(b) == 0:
        raise PrimError("division by zero")
    return _int(a) % b


def eq(a, b):
    return type(a) is type(b) and a == b


def lt(a, b):
    _same_type(a, b)
    if not isinstance(a, (int, str)):
        raise PrimError(f"cannot order {show(a)}")
    return a < b


def concat(a, b):
    if isinstance(a, str):
        return a + _str(b)
    if isinstance(a, tuple):
        return a + ordered(b)
    if isinstance(a, frozenset):
        return a | _set(b)
    raise PrimError(f"cannot concatenate {show(a)}")


def _extreme(pick):
    def fn(*args):
        if len(args) == 1:
            items = ordered(args[0])
        else:
            items = args
        if not items:
            raise PrimError("empty collection")
        return pick(_int(x) for x in items)
    return fn


def head(v):
    items = ordered(v)
    if not items:
        raise PrimError("head of empty collection")
    return items[0]


def tail(v):
    items = ordered(v)
    if not items:
        raise PrimError("tail of empty collection")
    return items[1:]


def nth(v, i):
    items = ordered(v)
    i = _int(i)
    if not 0 <= i < len(items):
        raise PrimError(f"index {i} out of range")
    return items[i]


PRIMITIVES = {
    "lines_of": lines_of,
    "filter": filter_,
    "matches": matches,
    "len": length,
    "int": to_int,
    "str": to_str,
    "union": lambda a, b: _set(a) | _set(b),
    "inter": lambda a, b: _set(a) & _set(b),
    "diff": lambda a, b: _set(a) - _set(b),
    "member": lambda x, c: x in _coll(c),
    "sort": lambda c: tuple(sorted(_coll(c), key=_sort_key)),
    "set": _set,
    "min": _extreme(min),
    "max": _extreme(max),
    "sum": lambda c: sum(_int(x) for x in ordered(c)),
    "head": head,
    "tail": tail,
    "nth": nth,
    "trim": lambda s: _str(s).strip(),
    "+": lambda a, b: _int(a) + _int(b),
    "-": lambda a, b: _int(a) - _int(b),
    "*": lambda a, b: _int(a) * _int(b),
    "/": div,
    "%": mod,
    "++": concat,
    "==": eq,
    "!=": lambda a, b: not eq(a, b),
    "<": lt,
    "<=": lambda a, b: lt(a, b) or eq(a, b),
    ">": lambda a, b: lt(b, a),
    ">=": lambda a, b: lt(b, a) or eq(a, b),
    "&&": lambda a, b: _bool(a) and _bool(b),
    "||": lambda a, b: _bool(a) or _bool(b),
    "!": lambda a: not _bool(a),
    "neg": lambda a: -_int(a),
}


def apply(fn, args):
    try:
        impl = PRIMITIVES[fn]
    except KeyError:
        raise PrimError(f"unknown function {fn!r}")
    try:
        return impl(*args)
    except TypeError as err:
        raise PrimError(f"{fn}: {err}")


def show(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, str)):
        return repr(v) if isinstance(v, str) else str(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(show(x) for x in v) + "]"
    if isinstance(v, frozenset):
        return "{" + ", ".join(show(x) for x in sorted(v, key=_sort_key)) + "}"
    return f"<context {getattr(v, 'path', '?')}>"
