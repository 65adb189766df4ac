"""Command line entry point.

Each command builds a service request and either handles it in-process
or, given ``--url``, sends it to a running server.
"""

import json
import sys

import click

from . import demo, surface
from .fsmodel import dump_snapshot, load_snapshot
from .service import api
from .service.schemas import CheckRequest, ShellRequest, SimulateRequest
from .txn import PosixAdapter, Store


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _store(root=None, snapshot=None, default=None):
    if root:
        return Store(PosixAdapter(root))
    if snapshot:
        return Store(fs=load_snapshot(_read(snapshot)))
    return Store(fs=default() if default else None)


def _post(url, route, payload):
    import httpx

    r = httpx.post(url.rstrip("/") + route, json=payload, timeout=60)
    r.raise_for_status()
    return r.json()


@click.group()
def main():
    """Transactional filestores described by specifications."""


@main.command()
@click.option("--spec", "spec_file", required=True, type=click.Path(exists=True), help="specification file")
@click.option("--decl", default=None, help="declaration to check (default: the first)")
@click.option("--root", type=click.Path(exists=True, file_okay=False), help="directory holding the store")
@click.option("--snapshot", type=click.Path(exists=True), help="store in snapshot format instead of --root")
@click.option("--path", default="/", show_default=True, help="path the spec describes")
@click.option("--partial", type=click.Path(exists=True), help="file listing a path set, one path per line")
def check(spec_file, decl, root, snapshot, path, partial):
    """Check a store against a specification (exit 0 / 1 / 2)."""
    if not root and not snapshot:
        raise click.UsageError("give --root or --snapshot")
    fs = _store(root, snapshot).fs
    pathset = None
    if partial:
        pathset = [line.strip() for line in _read(partial).splitlines() if line.strip()]
    req = CheckRequest(spec=_read(spec_file), decl=decl, path=path, snapshot=dump_snapshot(fs), partial=pathset)
    resp = api.check(req)
    if resp.status == "undefined":
        click.echo(f"undefined: {resp.message}")
    else:
        kind = "" if pathset is None else (" (total)" if resp.total else " (partial)")
        click.echo(resp.status + kind)
        for f in resp.failures:
            click.echo(f"  at {f.path} [{f.kind}]: {f.reason}")
    sys.exit(resp.exit_code)


@main.command()
@click.option("--scenario", required=True, type=click.Path(exists=True))
@click.option("--schedules", default=100, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--report", "report_file", type=click.Path(dir_okay=False), help="write the JSON report here")
@click.option("--url", default=None, help="send the request to a running server")
def simulate(scenario, schedules, seed, report_file, url):
    """Run random schedules of a scenario against the serial oracle."""
    req = SimulateRequest(scenario=_read(scenario), schedules=schedules, seed=seed)
    try:
        resp = _post(url, "/simulate", req.model_dump()) if url else api.simulate(req).model_dump()
    except ValueError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    click.echo(f"{resp['verdict']}: {resp['passed']} passed, {resp['failed']} failed, "
               f"{resp['inconclusive']} inconclusive, {resp['restarts']} restarts, "
               f"{resp['oracle_size']} serial outcomes")
    if report_file:
        with open(report_file, "w", encoding="utf-8") as fh:
            json.dump(resp["report"], fh, indent=2, sort_keys=True)
    sys.exit(0 if resp["verdict"] == "pass" else 1)


@main.command()
@click.option("--root", type=click.Path(exists=True, file_okay=False), help="directory holding the store")
@click.option("--snapshot", type=click.Path(exists=True), help="store in snapshot format instead of --root")
@click.option("--spec", "spec_file", type=click.Path(exists=True), help="specification file")
@click.option("--decl", default=None)
@click.option("--path", default="/", show_default=True, help="path the spec describes")
@click.option("--script", type=click.File("r"), help="replay commands from a file")
@click.option("--url", default=None, help="drive the shell of a running server")
def shell(root, snapshot, spec_file, decl, path, script, url):
    """Interactive sessions over live transactions."""
    if url:
        def run(line):
            r = _post(url, "/shell", ShellRequest(line=line).model_dump())
            return r["output"], r["status"], r["session"]
    else:
        if not spec_file:
            raise click.UsageError("--spec is required without --url")
        from .shell import Shell

        sh = Shell(_store(root, snapshot), surface.load_spec(_read(spec_file), decl), path)

        def run(line):
            r = sh.execute(line)
            return r.text, r.status, sh.current

    worst = 0
    if script is not None:
        for line in script:
            line = line.rstrip("\n")
            if not line.strip() or line.strip().startswith("#"):
                continue
            text, status, session = run(line)
            click.echo(f"[{session}]> {line.strip()}")
            if text:
                click.echo(text)
            worst = max(worst, status)
        sys.exit(worst)
    session = "main"
    while True:
        try:
            line = input(f"[{session}]> ")
        except EOFError:
            break
        if line.strip() in ("quit", "exit"):
            break
        text, status, session = run(line)
        if text:
            click.echo(text)
        worst = max(worst, status)
    sys.exit(worst)


@main.group()
def demo_cmd():
    """Worked examples."""


main.add_command(demo_cmd, name="demo")


@demo_cmd.group()
def grades():
    """Course grades kept as a filestore under /grades."""


def _demo_store(root, snapshot):
    return _store(root, snapshot, default=demo.fs0)


def _finish(resp, store, show_fs):
    if resp.ok:
        click.echo(f"Ok {json.dumps(resp.value)}")
    else:
        click.echo(resp.error)
    if show_fs:
        click.echo(dump_snapshot(store.fs), nl=False)
    sys.exit(resp.exit_code)


_store_opts = [
    click.option("--root", type=click.Path(exists=True, file_okay=False)),
    click.option("--snapshot", type=click.Path(exists=True)),
    click.option("--show-fs", is_flag=True, help="print the resulting store"),
]


def _with_store_opts(fn):
    for opt in reversed(_store_opts):
        fn = opt(fn)
    return fn


@grades.command()
@click.argument("hw")
@click.argument("gmin", type=int)
@_with_store_opts
def renormalize(hw, gmin, root, snapshot, show_fs):
    """Rescale the scores of HW into [GMIN, max]."""
    store = _demo_store(root, snapshot)
    _finish(api.renormalize(store, hw, gmin), store, show_fs)


@grades.command()
@click.argument("hw")
@_with_store_opts
def stats(hw, root, snapshot, show_fs):
    """Minimum, maximum and mean score of HW."""
    store = _demo_store(root, snapshot)
    _finish(api.stats(store, hw), store, show_fs)


@grades.command()
@click.argument("op", type=click.Choice(["push", "pop"]))
@click.argument("item", required=False)
@_with_store_opts
def queue(op, item, root, snapshot, show_fs):
    """Push onto or pop from the grading queue under /queue."""
    store = _demo_store(root, snapshot)
    _finish(api.queue(store, op, item), store, show_fs)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service (store from TXF_ROOT or TXF_SNAPSHOT)."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
