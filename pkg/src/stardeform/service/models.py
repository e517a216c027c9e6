"""Request and response bodies for the HTTP service."""

from typing import Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    """Run one scenario given inline as a JSON object."""

    scenario: dict
    order: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = None
    timings: bool = False


class CheckRequest(BaseModel):
    """Run a built-in suite by name ('all' runs every suite)."""

    suite: str
    seed: int = 0
    timings: bool = False


class ReportResponse(BaseModel):
    passed: bool
    report: dict
