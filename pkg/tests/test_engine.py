import pytest

from txforest import speccore as sc
from txforest.demo import fs0, grades_spec
from txforest.engine import (
    Walker, eval_expr, exec_cmd, exec_nav, goto, goto_name_p, initial, run_program,
)
from txforest.errors import Undefined
from txforest.fsmodel import ROOT, Dir, File, Path, Read, WriteFile, from_dict
from txforest.surface import load_spec, parse_command, parse_expr
from txforest.zipper import NIL, CompTail, ZNode, siblings

P = Path.parse


def walk(spec, fs, *ops, root=ROOT):
    lctx, g = initial(root, spec, fs)
    log = []
    for op in ops:
        lctx, g, l = exec_nav(op, lctx, g)
        log += l
    return lctx, g, log


def code(fn):
    with pytest.raises(Undefined) as info:
        fn()
    return info.value.code


PAIR = load_spec('d = directory { a is "a" :: file; b is "b" :: dir }')
FS = from_dict({"a": "hello", "b": {"x": "1"}})


def test_initial_pathset_is_root():
    lctx, g = initial(ROOT, PAIR, FS)
    assert g.pathset == frozenset({ROOT}) and lctx.path == ROOT


def test_pair_navigation():
    lctx, g, log = walk(PAIR, FS, "into_pair")
    assert isinstance(lctx.spec, sc.PathSpec) and log == []
    lctx, g, log = walk(PAIR, FS, "into_pair", "down")
    assert lctx.path == P("/a") and isinstance(lctx.spec, sc.FileSpec)
    assert P("/a") in g.pathset
    assert log == [Read(FS[ROOT], ROOT)]
    lctx, g, _ = walk(PAIR, FS, "into_pair", "next", "down")
    assert lctx.path == P("/b") and isinstance(lctx.spec, sc.DirSpec)


def test_navigation_errors():
    assert code(lambda: walk(PAIR, FS, "down")) == "NotAPathFocus"
    assert code(lambda: walk(PAIR, FS, "up")) == "UpAtRoot"
    assert code(lambda: walk(PAIR, FS, "out")) == "OutAtRoot"
    assert code(lambda: walk(PAIR, FS, "into_comp")) == "NotACompFocus"
    assert code(lambda: walk(PAIR, FS, "into_opt")) == "NotAnOptionFocus"
    assert code(lambda: walk(PAIR, FS, "into_pair", "prev")) == "NoSibling"
    assert code(lambda: walk(PAIR, FS, "into_pair", "next", "next")) == "NoSibling"
    assert code(lambda: walk(PAIR, FS, "into_pair", "down", "into_pair")) == "NotAPairFocus"
    bad = from_dict({"a": "not a dir"})
    spec = sc.PathSpec(sc.Lit("a"), sc.PathSpec(sc.Lit("b"), sc.FileSpec()))
    assert code(lambda: walk(spec, bad, "down", "down")) == "NotADirectory"


def test_second_component_sees_first():
    spec = load_spec('d = directory { n is "n" :: file; m is (run(run(n, down), fetch_file)) :: file }')
    fs = from_dict({"n": "target", "target": "42"})
    lctx, g, _ = walk(spec, fs, "into_pair", "next", "down")
    assert lctx.path == P("/target")
    v, _ = eval_expr(sc.Fetch("file"), lctx, g)
    assert v == "42"


def test_comprehension_navigation():
    spec = load_spec('d = [x :: file | x <- {"b", "a"}]')
    fs = from_dict({"a": "1", "b": "2"})
    lctx, g, _ = walk(spec, fs, "into_comp")
    assert lctx.zipper.env["x"] == "a"   # sets are visited in sorted order
    lctx, g, _ = walk(spec, fs, "into_comp", "next", "down")
    assert lctx.path == P("/b")
    empty = load_spec('d = [x :: file | x <- {}]')
    assert code(lambda: walk(empty, fs, "into_comp")) == "EmptyComprehension"


def test_fetches():
    spec = load_spec('d = [x :: file | x <- {"a", "b"}]')
    fs = from_dict({"a": "1", "b": "2"})
    lctx, g = initial(ROOT, spec, fs)
    v, log = eval_expr(sc.Fetch("comp"), lctx, g)
    assert len(v) == 2
    opt = load_spec('d = "a" :: file option')
    lctx, g, _ = walk(opt, fs, "down")
    v, _ = eval_expr(sc.Fetch("opt"), lctx, g)
    assert v is True
    lctx, g, _ = walk(load_spec('d = "zz" :: file option'), fs, "down")
    v, _ = eval_expr(sc.Fetch("opt"), lctx, g)
    assert v is False
    assert code(lambda: eval_expr(sc.Fetch("dir"), *walk(opt, fs, "down")[:2])) == "SpecMismatch"


def test_store_file_and_log():
    lctx, g, _ = walk(PAIR, FS, "into_pair", "down")
    l2, g2, log = exec_cmd(sc.StoreFile(sc.Lit("bye")), lctx, g)
    assert g2.fs[P("/a")] == File("bye")
    assert log[-1] == WriteFile(File("hello"), File("bye"), P("/a"))


def test_store_checks_focus_kind():
    lctx, g = initial(ROOT, PAIR, FS)
    assert code(lambda: exec_cmd(sc.StoreFile(sc.Lit("x")), lctx, g)) == "SpecMismatch"
    assert code(lambda: exec_cmd(sc.StoreDir(sc.MkSet(())), lctx, g)) == "SpecMismatch"
    assert code(lambda: exec_cmd(sc.CreatePath(), lctx, g)) == "NotAPathFocus"


def test_create_path_makes_missing_directories():
    spec = sc.PathSpec(sc.Lit("new"), sc.FileSpec())
    lctx, g = initial(P("/x/y"), spec, from_dict({}))
    _, g2, log = exec_cmd(sc.CreatePath(), lctx, g)
    assert g2.fs[P("/x/y")] == Dir({"new"}) and g2.fs[P("/x/y/new")] == File("")
    assert [e.path for e in log if not isinstance(e, Read)] == [ROOT, P("/x"), P("/x/y")]


def test_imp_commands():
    prog = parse_command("i := 0; s := \"\"; while i < 3 do s := s ++ str(i); i := i + 1 end;"
                         " if s == \"012\" then ok := true else ok := false end")
    lctx, g = initial(ROOT, PAIR, FS)
    l2, _, _ = exec_cmd(prog, lctx, g)
    assert l2.env["s"] == "012" and l2.env["ok"] is True


def test_fuel():
    lctx, g = initial(ROOT, PAIR, FS)
    assert code(lambda: exec_cmd(parse_command("while true do skip end"), lctx, g, fuel=50)) == "FuelExhausted"


def test_run_program_denotation():
    prog = parse_command('into_pair; down; store_file fetch_file ++ "!"')
    assert run_program(ROOT, PAIR, prog, FS)[P("/a")] == File("hello!")


def test_run_and_verify_expressions():
    lctx, g = initial(ROOT, PAIR, FS)
    assert eval_expr(sc.Verify(), lctx, g)[0] is True
    # only visited paths are checked
    bad = from_dict({"a": {}, "b": {}})
    assert eval_expr(parse_expr("verify"), *walk(PAIR, bad, "into_pair")[:2])[0] is True
    lctx, g, _ = walk(PAIR, bad, "into_pair", "down")
    assert eval_expr(parse_expr("verify"), lctx, g)[0] is False


def test_goto_helpers_on_grades():
    w = Walker(*initial(P("/grades"), grades_spec(), fs0()), [])
    goto_name_p(w, "hw1")
    assert w.lctx.path == P("/grades/hw1")
    goto(w, "max")
    w.nav("down")
    assert w.eval(sc.Fetch("file")) == "100"
    w.nav("up")
    goto(w, "students")
    w.nav("into_pair")
    w.nav("next")
    assert w.eval(sc.Fetch("comp")) == frozenset({"aaa17"})
    with pytest.raises(Undefined) as info:
        goto(w, "nope")
    assert info.value.code == "NameNotFound"
    w2 = Walker(*initial(P("/grades"), grades_spec(), fs0()), [])
    with pytest.raises(Undefined):
        goto_name_p(w2, "hw9")


def test_siblings_are_values():
    a, b = ZNode(sc.EMPTY_ENV, sc.FileSpec()), ZNode(sc.EMPTY_ENV, sc.DirSpec())
    assert siblings([a, b]) == NIL.cons(b).cons(a)
    tail = CompTail(sc.EMPTY_ENV, "x", sc.FileSpec(), ("p", "q"))
    assert len(tail) == 2 and tail.head().env["x"] == "p" and tail.tail().head().env["x"] == "q"
    assert tail.tail().tail().is_empty()
