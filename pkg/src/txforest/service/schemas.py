"""Request and response models."""

from typing import List, Optional

from pydantic import BaseModel, Field


class CheckRequest(BaseModel):
    spec: str = Field(description="surface specification text")
    decl: Optional[str] = None
    path: str = "/"
    snapshot: Optional[str] = Field(default=None, description="store in snapshot format; defaults to the served store")
    partial: Optional[List[str]] = Field(default=None, description="path set for a partial check")


class Failure(BaseModel):
    path: str
    kind: str
    reason: str


class CheckResponse(BaseModel):
    status: str  # consistent | inconsistent | undefined
    total: Optional[bool] = None
    exit_code: int
    failures: List[Failure] = []
    message: str = ""


class SimulateRequest(BaseModel):
    scenario: str
    schedules: int = Field(default=100, ge=0)
    seed: int = 0


class SimulateResponse(BaseModel):
    verdict: str
    completed: int
    inconclusive: int
    passed: int
    failed: int
    restarts: int
    oracle_size: int
    oracle_digest: str
    report: dict


class SessionRequest(BaseModel):
    name: str
    spec: Optional[str] = None
    decl: Optional[str] = None
    root: Optional[str] = None


class ShellRequest(BaseModel):
    line: str
    session: Optional[str] = None


class ShellResponse(BaseModel):
    output: str
    status: int
    session: str


class SnapshotResponse(BaseModel):
    snapshot: str


class RenormalizeRequest(BaseModel):
    hw: str
    gmin: int


class StatsRequest(BaseModel):
    hw: str


class QueueRequest(BaseModel):
    op: str = Field(pattern="^(push|pop)$")
    item: Optional[str] = None


class DemoResponse(BaseModel):
    ok: bool
    value: Optional[object] = None
    error: Optional[str] = None
    exit_code: int = 0
