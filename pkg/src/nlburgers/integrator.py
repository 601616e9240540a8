"""Adaptive embedded Runge-Kutta 5(4) time stepping (Dormand-Prince pair).

The propagated solution is 5th order; the embedded 4th-order value feeds a
weighted RMS error estimate with per-coefficient scale

    scale_i = atol + rtol * max(|y_i|, |y_new_i|),

and a step is accepted iff the scaled estimate is <= 1.  Step sizes are
clamped so accepted steps land exactly on requested output instants and on
t_final, keeping the output grid independent of tolerance choices.

Runs end in one of four states: reached_t_final, blowup_suspected,
under_resolved, or max_steps.  When the controller collapses below dt_min
(or stages go non-finite at dt_min), growth of the sup-norm gradient by more
than GRADIENT_BLOWUP_FACTOR since the start is read as suspected blow-up;
otherwise a polluted spectral tail marks the run as under-resolved.  A
tail_stop threshold can additionally end runs whose upper dealiased band
fills up even though the controller still copes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diagnostics import sup_norms, tail_fraction
from .models import ModelParams, SimState, make_tendency, pack, unpack
from .spectral import Spectrum, backward

GRADIENT_BLOWUP_FACTOR = 100.0
#: tail_fraction above this classifies a dt collapse as under-resolved.
TAIL_DISAMBIGUATION = 1e-3
_MEAN_DRIFT_TOL = 1e-10
_MAX_REJECTS_PER_STEP = 60
_MIN_SHRINK = 0.2
# States beyond this magnitude would overflow squared diagnostics; stop and
# classify instead of emitting non-finite rows.
_MAGNITUDE_CAP = 1e100


class IntegrationError(RuntimeError):
    """Invariant violation while stepping (non-finite state, mean drift)."""


class TerminationStatus(str, enum.Enum):
    REACHED_T_FINAL = "reached_t_final"
    BLOWUP_SUSPECTED = "blowup_suspected"
    UNDER_RESOLVED = "under_resolved"
    MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class IntegratorConfig:
    """Controller settings.  t_final is the absolute target time."""

    t_final: float
    rtol: float = 1e-8
    atol: float = 1e-10
    dt_init: float = 1e-4
    dt_min: float = 1e-10
    dt_max: float = 1.0
    safety: float = 0.9
    max_steps: int = 2_000_000
    growth_cap: float = 5.0
    tail_stop: float | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.t_final) or self.t_final < 0.0:
            raise ValueError(f"t_final must be >= 0, got {self.t_final}")
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise ValueError("rtol and atol must be positive")
        if not 0.0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"({self.dt_min}, {self.dt_init}, {self.dt_max})"
            )
        if not 0.0 < self.safety < 1.0:
            raise ValueError(f"safety must lie in (0, 1), got {self.safety}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.tail_stop is not None and not 0.0 < self.tail_stop <= 1.0:
            raise ValueError(f"tail_stop must lie in (0, 1], got {self.tail_stop}")


@dataclass(frozen=True)
class StepOutcome:
    accepted: bool
    new_state: SimState
    error_estimate: float
    dt_used: float
    dt_next: float


@dataclass(frozen=True)
class TerminationReport:
    status: TerminationStatus
    time: float
    n_accepted: int
    n_rejected: int
    final_state: SimState
    message: str = ""


# Dormand-Prince 5(4) tableau.  Row 7 of A equals the 5th-order weights, so
# the last stage is evaluated at the accepted solution (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# 5th-order minus embedded 4th-order weights (error estimator).
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


def _attempt(
    f: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    dt: float,
    k1: np.ndarray,
    rtol: float,
    atol: float,
) -> tuple[np.ndarray, np.ndarray, float]:
    """One trial step.  Returns (y_new, k_last, scaled_error).

    k_last is the tendency at the trial solution; on acceptance it becomes
    the next step's k1.  Non-finite trials report infinite error.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        stages = np.empty((7, y.size), dtype=complex)
        stages[0] = k1
        for i in range(1, 7):
            yi = y + dt * (_A[i] @ stages[:i])
            stages[i] = f(t + _C[i] * dt, yi)
        y_new = yi  # row 7 uses the 5th-order weights
        err_vec = dt * (_E @ stages)
        if not np.all(np.isfinite(y_new)):
            return y_new, stages[-1], np.inf
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)))
    if not np.isfinite(err):
        err = np.inf
    return y_new, stages[-1], err


def _dt_after(dt: float, err: float, safety: float, growth_cap: float, accepted: bool) -> float:
    if not np.isfinite(err):
        return 0.5 * dt
    factor = growth_cap if err == 0.0 else safety * err ** (-0.2)
    factor = min(growth_cap, max(_MIN_SHRINK, factor))
    if not accepted:
        factor = min(1.0, factor)
    return dt * factor


def rk45_step(
    state: SimState,
    dt: float,
    rhs: Callable[[SimState], Spectrum | tuple[Spectrum, Spectrum]],
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    safety: float = 0.9,
    growth_cap: float = 5.0,
) -> StepOutcome:
    """Single trial step driven by a state-level tendency callable.

    On rejection the original state is returned unchanged and dt_next
    carries the controller's retry size.
    """
    if dt <= 0.0 or not np.isfinite(dt):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    grid = state.grid
    full = state.is_full

    def f(t: float, y: np.ndarray) -> np.ndarray:
        out = rhs(unpack(y, t, grid, full))
        if full:
            return np.concatenate([out[0].coeffs, out[1].coeffs])
        return out.coeffs

    y = pack(state)
    y_new, _, err = _attempt(f, state.time, y, dt, f(state.time, y), rtol, atol)
    accepted = err <= 1.0
    dt_next = _dt_after(dt, err, safety, growth_cap, accepted)
    new_state = unpack(y_new, state.time + dt, grid, full) if accepted else state
    return StepOutcome(accepted, new_state, err, dt, dt_next)


def _grad_sup(state: SimState) -> float:
    return sup_norms(backward(state.diagnosed))[1]


def _stop_report(
    state: SimState,
    grad0: float,
    tail: float,
    context: str,
    n_accepted: int,
    n_rejected: int,
) -> TerminationReport:
    grad = _grad_sup(state)
    growth = grad / max(grad0, 1e-300)
    if growth > GRADIENT_BLOWUP_FACTOR:
        status = TerminationStatus.BLOWUP_SUSPECTED
        msg = f"{context}; sup-norm gradient grew {growth:.3e}x"
    elif tail > TAIL_DISAMBIGUATION:
        status = TerminationStatus.UNDER_RESOLVED
        msg = f"{context}; spectral tail fraction {tail:.3e} is polluted"
    else:
        status = TerminationStatus.UNDER_RESOLVED
        msg = f"{context}; gradient growth {growth:.3e}x, tail fraction {tail:.3e}"
    return TerminationReport(status, state.time, n_accepted, n_rejected, state, msg)


def integrate(
    initial: SimState,
    params: ModelParams,
    config: IntegratorConfig,
    observer: Callable[[SimState, float], None] | None = None,
    output_every: float | None = None,
) -> TerminationReport:
    """Advance a state to config.t_final under adaptive error control.

    The observer is called once at the initial state and after every
    accepted step.  With output_every set, steps are clamped so that states
    land exactly on initial.time + m*output_every.
    """
    if output_every is not None and output_every <= 0.0:
        raise ValueError(f"output_every must be positive, got {output_every}")
    grid = initial.grid
    full = initial.is_full
    f = make_tendency(grid, params)
    t0 = initial.time
    t_final = config.t_final
    tiny = 1e-12 * max(1.0, abs(t_final))
    mass0 = abs(initial.u_dev.coeffs[0]) if full else 0.0

    state = initial
    if observer is not None:
        observer(state, 0.0)
    if t_final <= t0 + tiny:
        return TerminationReport(TerminationStatus.REACHED_T_FINAL, t0, 0, 0, state)

    grad0 = _grad_sup(initial)
    y = pack(initial)
    t = t0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        k1 = f(t, y)
    dt = min(config.dt_init, config.dt_max)
    n_out = 1
    n_accepted = 0
    n_rejected = 0
    rejects_here = 0

    # States are materialised from the packed vector only when someone
    # looks at them (observer, tail check, termination); tight sweeps
    # without an observer skip the per-step construction cost entirely.
    track_state = observer is not None or config.tail_stop is not None

    while t < t_final - tiny:
        if n_accepted + n_rejected >= config.max_steps:
            return TerminationReport(
                TerminationStatus.MAX_STEPS,
                t,
                n_accepted,
                n_rejected,
                unpack(y, t, grid, full),
                f"step budget {config.max_steps} exhausted at t = {t:.6g}",
            )
        t_stop = t_final
        if output_every is not None:
            t_stop = min(t_stop, t0 + n_out * output_every)
        dt = min(dt, config.dt_max)
        hit_stop = t + dt >= t_stop - tiny
        dt_try = t_stop - t if hit_stop else dt

        y_new, k_last, err = _attempt(f, t, y, dt_try, k1, config.rtol, config.atol)

        if err > 1.0:
            n_rejected += 1
            rejects_here += 1
            if rejects_here > _MAX_REJECTS_PER_STEP:
                raise IntegrationError(
                    f"step at t = {t:.6g} rejected {rejects_here} times"
                )
            dt = _dt_after(dt_try, err, config.safety, config.growth_cap, False)
            if dt < config.dt_min:
                last = unpack(y, t, grid, full)
                return _stop_report(
                    last,
                    grad0,
                    tail_fraction(last.diagnosed),
                    f"dt collapsed to {dt:.3e} at t = {t:.6g}",
                    n_accepted,
                    n_rejected,
                )
            continue

        # Accepted.
        rejects_here = 0
        t = t_stop if hit_stop else t + dt_try
        y = y_new
        k1 = k_last
        n_accepted += 1
        dt = _dt_after(dt_try, err, config.safety, config.growth_cap, True)

        # Raw-array invariant checks come before unpack so violations carry
        # an integration error instead of a state-validation one.
        zero_mean_coeff = y[grid.n_coeffs] if full else y[0]
        if abs(zero_mean_coeff) > _MEAN_DRIFT_TOL:
            raise IntegrationError(
                f"mean drift {abs(zero_mean_coeff):.3e} at t = {t:.6g}"
            )
        if full and abs(abs(y[0]) - mass0) > _MEAN_DRIFT_TOL:
            raise IntegrationError(
                f"cell mass drift {abs(abs(y[0]) - mass0):.3e} at t = {t:.6g}"
            )

        sup_mag = float(np.max(np.abs(y)))
        if sup_mag > _MAGNITUDE_CAP:
            state = unpack(y, t, grid, full)
            return _stop_report(
                state,
                grad0,
                tail_fraction(state.diagnosed),
                f"coefficient magnitude {sup_mag:.3e} at t = {t:.6g} "
                "overflows diagnostics",
                n_accepted,
                n_rejected,
            )

        if track_state:
            state = unpack(y, t, grid, full)
            if observer is not None:
                observer(state, dt_try)
            if config.tail_stop is not None:
                tail = tail_fraction(state.diagnosed)
                if tail > config.tail_stop:
                    return _stop_report(
                        state,
                        grad0,
                        tail,
                        f"tail fraction {tail:.3e} exceeds tail_stop at t = {t:.6g}",
                        n_accepted,
                        n_rejected,
                    )
        if output_every is not None and hit_stop and t_stop < t_final - tiny:
            n_out += 1

    return TerminationReport(
        TerminationStatus.REACHED_T_FINAL, t, n_accepted, n_rejected,
        unpack(y, t, grid, full)
    )


def advance_fixed(
    initial: SimState, params: ModelParams, dt: float, n_steps: int
) -> SimState:
    """March n_steps of constant size dt (5th-order solution, no controller).

    Convergence-order studies only; no termination logic.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = initial.grid
    f = make_tendency(grid, params)
    y = pack(initial)
    t = initial.time
    stages = np.empty((7, y.size), dtype=complex)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        for _ in range(n_steps):
            stages[0] = f(t, y)
            for i in range(1, 7):
                yi = y + dt * (_A[i] @ stages[:i])
                stages[i] = f(t + _C[i] * dt, yi)
            y = y + dt * (_B5 @ stages)
            t += dt
    if not np.all(np.isfinite(y)):
        raise IntegrationError("fixed-step march produced non-finite values")
    return unpack(y, t, grid, initial.is_full)
