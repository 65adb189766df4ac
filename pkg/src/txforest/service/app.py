"""FastAPI application."""

import os

from fastapi import FastAPI, HTTPException

from .. import demo
from ..fsmodel import load_snapshot
from ..txn import PosixAdapter, Store
from . import api
from .schemas import (
    CheckRequest, CheckResponse, DemoResponse, QueueRequest, RenormalizeRequest,
    SessionRequest, ShellRequest, ShellResponse, SimulateRequest, SimulateResponse,
    SnapshotResponse, StatsRequest,
)


def store_from_env() -> Store:
    root = os.environ.get("TXF_ROOT")
    if root:
        return Store(PosixAdapter(root))
    snap = os.environ.get("TXF_SNAPSHOT")
    if snap:
        with open(snap, encoding="utf-8") as fh:
            return Store(fs=load_snapshot(fh.read()))
    return Store(fs=demo.fs0())


def create_app(service: api.Service = None) -> FastAPI:
    if service is None:
        spec_text = demo.GRADES_SPEC
        spec_file = os.environ.get("TXF_SPEC")
        if spec_file:
            with open(spec_file, encoding="utf-8") as fh:
                spec_text = fh.read()
        service = api.Service(store_from_env(), spec_text, os.environ.get("TXF_DECL"),
                              os.environ.get("TXF_PATH", "/grades"))
    app = FastAPI(title="txforest", version="0.1.0")
    app.state.service = service

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/fs", response_model=SnapshotResponse)
    def fs():
        return service.snapshot()

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest):
        return api.check(req, service.store.fs)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        try:
            return api.simulate(req)
        except ValueError as err:
            raise HTTPException(status_code=422, detail=str(err))

    @app.post("/sessions", response_model=ShellResponse)
    def new_session(req: SessionRequest):
        return service.new_session(req.name, req.spec, req.decl, req.root)

    @app.post("/shell", response_model=ShellResponse)
    def shell(req: ShellRequest):
        return service.shell_line(req)

    @app.post("/demo/grades/renormalize", response_model=DemoResponse)
    def renormalize(req: RenormalizeRequest):
        return api.renormalize(service.store, req.hw, req.gmin)

    @app.post("/demo/grades/stats", response_model=DemoResponse)
    def stats(req: StatsRequest):
        return api.stats(service.store, req.hw)

    @app.post("/demo/grades/queue", response_model=DemoResponse)
    def queue(req: QueueRequest):
        return api.queue(service.store, req.op, req.item)

    return app
