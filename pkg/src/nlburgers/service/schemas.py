"""Request and response models for the run service.

Requests mirror the flat config key set (flags / JSON file keys); responses
carry everything the CLI needs to write its output files, so a remote run
and an in-process run produce byte-identical artifacts.  Floats survive the
JSON round trip exactly (shortest-round-trip encoding), which the output
writer relies on.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from ..config import RunConfig
from ..diagnostics import DiagnosticsRecord
from ..runner import RunResult
from ..validation import ConvergenceReport


class InitialSines(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["sines"]
    terms: list[list[float]]


class InitialChirp(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["chirp"]
    amplitude: float
    rate: float


class RunRequest(BaseModel):
    """One simulation request; unset fields fall back to preset/defaults."""

    model_config = ConfigDict(extra="forbid")

    preset: str | None = None
    model: str | None = None
    alpha: float | None = None
    beta: float | None = None
    epsilon: float | None = None
    chi: float | None = None
    n_modes: int | None = None
    t_final: float | None = None
    rtol: float | None = None
    atol: float | None = None
    dt_init: float | None = None
    dt_min: float | None = None
    dt_max: float | None = None
    initial: InitialSines | InitialChirp | str | list[list[float]] | None = None
    output_every: float | None = None
    dealias: bool | None = None
    seed: int | None = None
    tail_stop: float | None = None
    allow_extended_alpha: bool | None = None
    include_snapshots: bool = True

    def to_flags(self) -> dict[str, Any]:
        """Flatten to the parse_config flag mapping."""
        data = self.model_dump(exclude_none=True, exclude={"include_snapshots"})
        if isinstance(self.initial, (InitialSines, InitialChirp)):
            data["initial"] = self.initial.model_dump()
        return data


class TimeseriesRow(BaseModel):
    t: float
    linf_p: float
    linf_dxp: float
    h0: float
    h1: float
    h2: float
    h25: float
    a0: float
    a1: float
    a2: float
    energy_E: float
    energy_F: float
    energy_G: float
    tail_fraction: float
    dt: float

    @classmethod
    def from_record(cls, rec: DiagnosticsRecord) -> "TimeseriesRow":
        return cls(
            t=rec.time,
            linf_p=rec.linf_p,
            linf_dxp=rec.linf_dxp,
            h0=rec.h_norms[0.0],
            h1=rec.h_norms[1.0],
            h2=rec.h_norms[2.0],
            h25=rec.h_norms[2.5],
            a0=rec.a_norms[0.0],
            a1=rec.a_norms[1.0],
            a2=rec.a_norms[2.0],
            energy_E=rec.energy_E,
            energy_F=rec.energy_F,
            energy_G=rec.energy_G,
            tail_fraction=rec.tail_fraction,
            dt=rec.dt,
        )


class Snapshot(BaseModel):
    t: float
    x: list[float]
    p: list[float]


class Termination(BaseModel):
    status: str
    time: float
    n_accepted: int
    n_rejected: int
    message: str


class RunResponse(BaseModel):
    config: dict[str, Any]
    termination: Termination
    timeseries: list[TimeseriesRow]
    snapshots: list[Snapshot]
    exit_code: int
    wall_time_s: float
    version: str

    @classmethod
    def from_result(
        cls, result: RunResult, version: str, include_snapshots: bool = True
    ) -> "RunResponse":
        config: RunConfig = result.config
        nodes = config.grid().nodes
        snapshots = []
        if include_snapshots:
            snapshots = [
                Snapshot(t=t, x=list(nodes), p=list(vals))
                for t, vals in result.snapshots
            ]
        return cls(
            config=config.to_dict(),
            termination=Termination(
                status=result.termination.status.value,
                time=result.termination.time,
                n_accepted=result.termination.n_accepted,
                n_rejected=result.termination.n_rejected,
                message=result.termination.message,
            ),
            timeseries=[TimeseriesRow.from_record(r) for r in result.records],
            snapshots=snapshots,
            exit_code=result.exit_code,
            wall_time_s=result.wall_time_s,
            version=version,
        )


class ConvergenceReportModel(BaseModel):
    parameter: list[float]
    errors: list[float]
    estimated_order: float | None
    threshold: float
    verdict: str
    metadata: dict[str, Any]

    @classmethod
    def from_report(cls, report: ConvergenceReport) -> "ConvergenceReportModel":
        d = report.to_dict()
        # JSON cannot carry NaN; keep aborted entries readable instead.
        d["errors"] = [e if e == e else -1.0 for e in d["errors"]]
        return cls(**d)


class LinearOracleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    k: int = Field(ge=1)
    alpha: float
    beta: float = 2.0
    epsilon: float = 1.0
    t_final: float = 1.0
    n_modes: int = 64
    rtol: float = 1e-8


class LinearOracleResponse(BaseModel):
    k: int
    alpha: float
    lambda_re: float
    lambda_im: float
    relative_error: float


class CrossCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    alpha: float
    n_trials: int = Field(default=100, ge=1, le=10_000)
    n_modes: int = 128
    beta: float = 2.0
    epsilon: float = 1.0
    seed: int = 0


class AsymptoticRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    eps_values: list[float]
    tau_final: float = 0.5
    alpha: float = 2.0
    beta: float = 2.0
    initial: InitialSines | InitialChirp | str | list[list[float]]
    n_modes: int = 512
    rtol: float = 1e-8
    order_threshold: float = 0.8


class SelfConvergenceRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    run: RunRequest
    levels: list[tuple[int, float]]
    t_compare: float | None = None
    min_ratio: float = 10.0


class HealthResponse(BaseModel):
    status: str
    version: str


class PresetList(BaseModel):
    presets: list[str]
