"""FastAPI application wrapping the solver library.

Endpoints are synchronous (FastAPI runs them in its worker pool) and every
run is a pure function of its request, so concurrent requests are safe.
Simulations execute within the request; clients with long runs should set
their HTTP timeouts accordingly.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError, parse_config, preset, preset_names
from ..initial import InitialSpecError, parse_initial
from ..integrator import IntegrationError
from ..models import ModelParams, linear_dispersion
from ..runner import execute
from ..validation import (
    asymptotic_consistency,
    cross_check_rhs,
    linear_oracle_error,
    model_for_alpha,
    self_convergence,
)
from .schemas import (
    AsymptoticRequest,
    ConvergenceReportModel,
    CrossCheckRequest,
    HealthResponse,
    LinearOracleRequest,
    LinearOracleResponse,
    PresetList,
    RunRequest,
    RunResponse,
    SelfConvergenceRequest,
)

app = FastAPI(
    title="nlburgers",
    version=__version__,
    description=(
        "Pseudo-spectral runs of a nonlocal Burgers equation with diffusive "
        "and dispersive terms, plus the coupled system it approximates."
    ),
)


def _resolve(request: RunRequest):
    try:
        return parse_config(flags=request.to_flags())
    except (ConfigError, InitialSpecError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/presets", response_model=PresetList)
def list_presets() -> PresetList:
    return PresetList(presets=list(preset_names()))


@app.get("/presets/{name}")
def show_preset(name: str) -> dict:
    try:
        return preset(name).to_dict()
    except ConfigError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc


@app.post("/runs", response_model=RunResponse)
def run_simulation(request: RunRequest) -> RunResponse:
    config = _resolve(request)
    try:
        result = execute(config)
    except IntegrationError as exc:
        raise HTTPException(status_code=500, detail=f"integration aborted: {exc}") from exc
    return RunResponse.from_result(
        result, __version__, include_snapshots=request.include_snapshots
    )


@app.post("/validation/linear-oracle", response_model=LinearOracleResponse)
def run_linear_oracle(request: LinearOracleRequest) -> LinearOracleResponse:
    model = model_for_alpha(request.alpha)
    try:
        params = ModelParams(
            alpha=request.alpha,
            beta=request.beta,
            epsilon=request.epsilon,
            model=model,
        )
        lam = linear_dispersion(request.k, params)
        err = linear_oracle_error(
            request.k,
            params,
            request.t_final,
            n_nodes=request.n_modes,
            rtol=request.rtol,
        )
    except (ValueError, RuntimeError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return LinearOracleResponse(
        k=request.k,
        alpha=request.alpha,
        lambda_re=lam.real,
        lambda_im=lam.imag,
        relative_error=err,
    )


@app.post("/validation/cross-check", response_model=ConvergenceReportModel)
def run_cross_check(request: CrossCheckRequest) -> ConvergenceReportModel:
    try:
        report = cross_check_rhs(
            request.alpha,
            request.n_trials,
            n_nodes=request.n_modes,
            beta=request.beta,
            epsilon=request.epsilon,
            seed=request.seed,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return ConvergenceReportModel.from_report(report)


@app.post("/validation/asymptotic", response_model=ConvergenceReportModel)
def run_asymptotic(request: AsymptoticRequest) -> ConvergenceReportModel:
    try:
        initial = parse_initial(
            request.initial.model_dump()
            if hasattr(request.initial, "model_dump")
            else request.initial
        )
        report = asymptotic_consistency(
            request.eps_values,
            request.tau_final,
            initial,
            request.alpha,
            request.beta,
            n_nodes=request.n_modes,
            rtol=request.rtol,
            order_threshold=request.order_threshold,
        )
    except (ValueError, InitialSpecError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return ConvergenceReportModel.from_report(report)


@app.post("/validation/self-convergence", response_model=ConvergenceReportModel)
def run_self_convergence(request: SelfConvergenceRequest) -> ConvergenceReportModel:
    config = _resolve(request.run)
    try:
        report = self_convergence(
            config,
            request.levels,
            t_compare=request.t_compare,
            min_ratio=request.min_ratio,
        )
    except (ValueError, RuntimeError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return ConvergenceReportModel.from_report(report)
