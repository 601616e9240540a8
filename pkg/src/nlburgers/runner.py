"""Run orchestration: build the initial state, integrate, collect output.

execute() is pure (no file I/O): it returns the per-instant diagnostics
rows, node snapshots, and the termination report.  The HTTP service returns
these verbatim; the CLI writes them to disk.  Exit codes follow the
termination status: 0 reached_t_final, 2 blowup_suspected, 3 under_resolved,
1 anything else (max_steps counts as an error).
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .diagnostics import DiagnosticsRecord, compute_record
from .integrator import TerminationReport, TerminationStatus, integrate
from .models import SimState
from .spectral import (
    RealField,
    forward,
    project_zero_mean,
    values_from_coeffs,
)

EXIT_CODES = {
    TerminationStatus.REACHED_T_FINAL: 0,
    TerminationStatus.BLOWUP_SUSPECTED: 2,
    TerminationStatus.UNDER_RESOLVED: 3,
    TerminationStatus.MAX_STEPS: 1,
}


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    records: tuple[DiagnosticsRecord, ...]
    snapshots: tuple[tuple[float, np.ndarray], ...]
    termination: TerminationReport
    wall_time_s: float

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.termination.status]


def build_initial_state(config: RunConfig) -> SimState:
    """Sample the configured profile and wrap it as a model state.

    Reduced models evolve the zero-mean projection of the profile.  For the
    coupled system the profile is read as the reduced field p0 and mapped to
    u = 1 - eps*p0/chi, q = eps*p0/chi, the correspondence under which the
    reduced models approximate the system.
    """
    grid = config.grid()
    params = config.params()
    profile = project_zero_mean(RealField(grid, config.initial.sample(grid))).values
    if config.model == "full_system":
        scaled = profile / params.chi
        u_dev = forward(RealField(grid, -config.epsilon * scaled))
        q = forward(RealField(grid, config.epsilon * scaled))
        return SimState.full(0.0, u_dev, q)
    return SimState.reduced(0.0, forward(RealField(grid, profile)))


def execute(config: RunConfig) -> RunResult:
    """Run one configured simulation, sampling diagnostics on the output grid.

    Diagnostics rows and node snapshots are recorded at t = 0 and every
    output_every units; the final state is appended as a last row when the
    run ends between output instants (blow-up, max_steps).
    """
    t_start = _time.perf_counter()
    params = config.params()
    state0 = build_initial_state(config)
    records: list[DiagnosticsRecord] = []
    snapshots: list[tuple[float, np.ndarray]] = []
    # Matches the clamp window in integrate(): output instants are landed on
    # exactly, so the modulo test only has to absorb the clamp tolerance.
    tiny = 1e-12 * max(1.0, config.t_final)

    def is_output_instant(t: float) -> bool:
        m = round(t / config.output_every)
        return abs(t - m * config.output_every) <= tiny

    def record(state: SimState, dt: float) -> None:
        rec = compute_record(state, params, dt)
        records.append(rec)
        spec = state.diagnosed
        snapshots.append(
            (state.time, values_from_coeffs(spec.coeffs, spec.grid.n_nodes))
        )

    def observer(state: SimState, dt: float) -> None:
        if is_output_instant(state.time):
            record(state, dt)

    report = integrate(
        state0,
        params,
        config.integrator_config(),
        observer=observer,
        output_every=config.output_every,
    )
    if not records or abs(records[-1].time - report.time) > tiny:
        record(report.final_state, 0.0)

    wall = _time.perf_counter() - t_start
    return RunResult(
        config=config,
        records=tuple(records),
        snapshots=tuple(snapshots),
        termination=report,
        wall_time_s=wall,
    )
