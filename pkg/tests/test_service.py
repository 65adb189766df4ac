import json
from pathlib import Path as OsPath

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from txforest import demo
from txforest.cli import main
from txforest.fsmodel import Dir, Path, dump_snapshot, load_snapshot
from txforest.service.api import Service
from txforest.service.app import create_app
from txforest.txn import Store

SCEN = OsPath(__file__).parent.parent / "scenarios"


@pytest.fixture
def client():
    return TestClient(create_app(Service(Store(fs=demo.fs0()))))


def test_health_and_fs(client):
    assert client.get("/health").json() == {"status": "ok"}
    assert load_snapshot(client.get("/fs").json()["snapshot"]) == demo.fs0()


def test_check(client):
    body = {"spec": demo.GRADES_SPEC, "decl": "grades", "path": "/grades"}
    r = client.post("/check", json=body).json()
    assert r["status"] == "consistent" and r["exit_code"] == 0 and r["total"] is True
    r = client.post("/check", json={**body, "partial": ["/grades"]}).json()
    assert r["status"] == "consistent" and r["total"] is False
    broken = dump_snapshot(demo.fs0().set(Path.parse("/grades/hw2/max"), Dir()))
    r = client.post("/check", json={**body, "snapshot": broken}).json()
    assert r["status"] == "inconsistent" and r["exit_code"] == 1
    assert r["failures"][0]["path"] == "/grades/hw2/max"
    r = client.post("/check", json={**body, "spec": "x = directory { }"}).json()
    assert r["status"] == "undefined" and r["exit_code"] == 2


def test_shell_sessions(client):
    assert client.post("/shell", json={"line": "goto_name_p hw1"}).json()["status"] == 0
    r = client.post("/shell", json={"line": "where", "session": "other"}).json()
    assert r["session"] == "other" and r["output"] == "/grades (pair)"
    r = client.post("/sessions", json={"name": "third"}).json()
    assert r["session"] == "third"


def test_demo_routes(client):
    assert client.post("/demo/grades/stats", json={"hw": "hw1"}).json()["value"] == [87, 87, 87.0]
    assert client.post("/demo/grades/renormalize", json={"hw": "hw1", "gmin": 50}).json()["ok"]
    assert load_snapshot(client.get("/fs").json()["snapshot"])[Path.parse("/grades/hw1/aaa17")].text == "50"
    assert client.post("/demo/grades/queue", json={"op": "push", "item": "x"}).json()["value"] == "000001"
    assert client.post("/demo/grades/queue", json={"op": "pop"}).json()["value"] == "x"
    r = client.post("/demo/grades/queue", json={"op": "pop"}).json()
    assert not r["ok"] and r["exit_code"] == 2
    assert client.post("/demo/grades/queue", json={"op": "drop"}).status_code == 422


def test_simulate(client):
    r = client.post("/simulate", json={"scenario": (SCEN / "lost_update.scn").read_text(), "schedules": 20})
    body = r.json()
    assert r.status_code == 200 and body["verdict"] == "pass" and body["completed"] == 20
    assert client.post("/simulate", json={"scenario": "%bogus\n"}).status_code == 422


# -- command line ------------------------------------------------------------

def test_cli_check_exit_codes(tmp_path):
    runner = CliRunner()
    args = ["check", "--spec", str(SCEN / "grades.txf"), "--decl", "grades", "--path", "/grades"]
    r = runner.invoke(main, args + ["--snapshot", str(SCEN / "fs0.snap")])
    assert r.exit_code == 0 and r.output.startswith("consistent")
    bad = tmp_path / "bad.snap"
    bad.write_text(dump_snapshot(demo.fs0().set(Path.parse("/grades/hw2/max"), Dir())))
    r = runner.invoke(main, args + ["--snapshot", str(bad)])
    assert r.exit_code == 1 and "/grades/hw2/max" in r.output
    part = tmp_path / "paths"
    part.write_text("/grades\n")
    r = runner.invoke(main, args + ["--snapshot", str(SCEN / "fs0.snap"), "--partial", str(part)])
    assert r.exit_code == 0 and "consistent (partial)" in r.output


def test_cli_check_on_directory(tmp_path):
    (tmp_path / "grades" / "hw1").mkdir(parents=True)
    (tmp_path / "grades" / "hw1" / "max").write_text("10")
    (tmp_path / "grades" / "hw1" / "bob12").write_text("7")
    r = CliRunner().invoke(main, ["check", "--spec", str(SCEN / "grades.txf"), "--root", str(tmp_path),
                                  "--path", "/grades"])
    assert r.exit_code == 0, r.output


def test_cli_simulate_report(tmp_path):
    out = tmp_path / "r.json"
    r = CliRunner().invoke(main, ["simulate", "--scenario", str(SCEN / "lost_update.scn"),
                                  "--schedules", "25", "--seed", "3", "--report", str(out)])
    assert r.exit_code == 0 and r.output.startswith("pass")
    assert json.loads(out.read_text())["completed"] == 25


def test_cli_shell_script():
    r = CliRunner().invoke(main, ["shell", "--snapshot", str(SCEN / "fs0.snap"), "--spec", str(SCEN / "grades.txf"),
                                  "--path", "/grades", "--script", str(SCEN / "conflict.txsh")])
    assert r.exit_code == 1 and r.output.rstrip().endswith("TxError")


def test_cli_demo(tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["demo", "grades", "stats", "hw1"])
    assert r.exit_code == 0 and r.output.strip() == "Ok [87, 87, 87.0]"
    r = runner.invoke(main, ["demo", "grades", "queue", "pop"])
    assert r.exit_code == 2 and "EmptyQueue" in r.output
    root = tmp_path / "store"
    (root / "grades" / "hw1").mkdir(parents=True)
    (root / "grades" / "hw1" / "max").write_text("100")
    (root / "grades" / "hw1" / "abc10").write_text("5")
    (root / "grades" / "hw1" / "abc11").write_text("15")
    r = runner.invoke(main, ["demo", "grades", "renormalize", "hw1", "0", "--root", str(root)])
    assert r.exit_code == 0, r.output
    assert (root / "grades" / "hw1" / "abc10").read_text() == "0"
    assert (root / "grades" / "hw1" / "abc11").read_text() == "100"


def test_cli_shell_against_server(client, monkeypatch, tmp_path):
    import txforest.cli as cli

    def post(url, route, payload):
        assert url == "http://srv"
        r = client.post(route, json=payload)
        r.raise_for_status()
        return r.json()

    monkeypatch.setattr(cli, "_post", post)
    lines = tmp_path / "s.txsh"
    lines.write_text("goto_name_p hw1\ngoto max\ndown\nfetch\n")
    r = CliRunner().invoke(main, ["shell", "--url", "http://srv", "--script", str(lines)])
    assert r.exit_code == 0 and r.output.splitlines()[-1] == "'100'"
