"""Evolution equations in spectral form.

Reduced models advance one zero-mean real field p on the torus.  In
frequency space every reduced right-hand side has the shape

    d/dt p_hat(k) = lam(k) * p_hat(k) + nl(k) * (p^2)_hat(k),

with model-specific multipliers lam (linear part) and nl (quadratic part).
For stored wavenumbers k >= 1 (sgn k = +1, mass(k) = 1 + |k|^(2(alpha-1))/4):

  general   lam = (-(beta+1)/(2 eps) |k|^alpha
                   + i (|k|^(2 alpha - 1)/(4 eps) - beta k/eps)) / mass(k)
            nl  = (i k/2 + |k|^alpha/4) / mass(k)

  alpha0    lam = (-(beta+1)/(2 eps) k^2 + i (k/(4 eps) - beta k^3/eps))
                  / (1/4 + k^2)
            nl  = (i k^3/2 + k^2/4) / (1/4 + k^2)

  alpha1    lam = (4/5) (-(beta+1)/(2 eps) k + i k (1/4 - beta)/eps)
            nl  = (4/5) (i k/2 + k/4)

  alpha2    lam = (-(1+beta)/(2 eps) k^2 + i (k^3/(4 eps) - beta k/eps))
                  / (1 + k^2/4)
            nl  = (i k/2 + k^2/4) / (1 + k^2/4)

The three closed forms are written out verbatim rather than derived from the
general multiplier so that they can be cross-checked against it numerically
(see validation.cross_check_rhs).  The k = 0 channel of every multiplier is
held at zero, as is the Nyquist channel (odd symbols are undefined there on
a real grid).

The coupled cell/chemoattractant system evolves the cell density u = 1 + v
(only the deviation v is stored) and the zero-mean gradient field q:

    d/dt v_hat(k) = -|k|^alpha v_hat(k) + chi * i k * (u q)_hat(k)
    d/dt q_hat(k) =  i k * v_hat(k)

The unit background contributes chi * i k * q_hat exactly; only the v*q part
goes through the dealiased product.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .spectral import (
    TWO_PI,
    SpectralGrid,
    Spectrum,
    product,
    quadratic,
)

MODEL_KINDS: tuple[str, ...] = ("general", "alpha0", "alpha1", "alpha2", "full_system")

#: Models whose nonlocality order is pinned by the closed form.
_PINNED_ALPHA = {"alpha0": 0.0, "alpha1": 1.0, "alpha2": 2.0}

_MEAN_TOL = 1e-10


class ModelError(ValueError):
    """Invalid model parameters or state."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters shared by all model forms.

    chi defaults to 2*beta + 1, the coupling at which the reduced models
    approximate the full system; it only enters full_system tendencies.
    include_nonlinear is a test hook for linearised runs.
    """

    alpha: float
    beta: float
    epsilon: float
    model: str
    chi: float | None = None
    dealias: bool = True
    include_nonlinear: bool = True
    allow_extended_alpha: bool = False

    def __post_init__(self) -> None:
        if self.model not in MODEL_KINDS:
            raise ModelError(f"unknown model {self.model!r}; expected one of {MODEL_KINDS}")
        for name in ("alpha", "beta", "epsilon"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ModelError(f"{name} must be finite, got {v}")
        if self.beta <= -1.0:
            raise ModelError(f"beta must exceed -1, got {self.beta}")
        if self.epsilon <= 0.0:
            raise ModelError(f"epsilon must be positive, got {self.epsilon}")
        if not self.allow_extended_alpha and not 0.0 <= self.alpha <= 2.0:
            raise ModelError(
                f"alpha {self.alpha} outside [0, 2]; set allow_extended_alpha to override"
            )
        pinned = _PINNED_ALPHA.get(self.model)
        if pinned is not None and self.alpha != pinned:
            raise ModelError(
                f"model {self.model!r} is the closed form at alpha={pinned}, got alpha={self.alpha}"
            )
        if self.model == "general" and self.alpha == 0.0:
            raise ModelError(
                "the general form is singular at alpha=0; use model 'alpha0'"
            )
        if self.chi is None:
            object.__setattr__(self, "chi", 2.0 * self.beta + 1.0)
        elif not np.isfinite(self.chi):
            raise ModelError(f"chi must be finite, got {self.chi}")


@dataclass(frozen=True)
class SimState:
    """Solution snapshot: reduced field p, or the pair (u - 1, q).

    Evolved reduced fields are zero-mean; construction rejects states whose
    k = 0 coefficient drifted.  The cell-density deviation u_dev may carry a
    mean (total mass above the unit background).
    """

    time: float
    p: Spectrum | None = None
    u_dev: Spectrum | None = None
    q: Spectrum | None = None

    def __post_init__(self) -> None:
        reduced = self.p is not None
        full = self.u_dev is not None and self.q is not None
        if reduced == full:
            raise ModelError("state must carry either p or the pair (u_dev, q)")
        if reduced and abs(self.p.coeffs[0]) > _MEAN_TOL:
            raise ModelError(
                f"reduced state must be zero-mean, |coeff(0)| = {abs(self.p.coeffs[0]):.3e}"
            )
        if full and abs(self.q.coeffs[0]) > _MEAN_TOL:
            raise ModelError(
                f"gradient field must be zero-mean, |coeff(0)| = {abs(self.q.coeffs[0]):.3e}"
            )
        if full and self.u_dev.grid != self.q.grid:
            raise ModelError("u_dev and q must share one grid")

    @classmethod
    def reduced(cls, time: float, p: Spectrum) -> "SimState":
        return cls(time=time, p=p)

    @classmethod
    def full(cls, time: float, u_dev: Spectrum, q: Spectrum) -> "SimState":
        return cls(time=time, u_dev=u_dev, q=q)

    @property
    def is_full(self) -> bool:
        return self.p is None

    @property
    def grid(self) -> SpectralGrid:
        return self.q.grid if self.is_full else self.p.grid

    @property
    def diagnosed(self) -> Spectrum:
        """Field the diagnostics track: p, or q for the coupled system."""
        return self.q if self.is_full else self.p


def _k_nonzero(grid: SpectralGrid) -> np.ndarray:
    return grid.wavenumbers[1:].astype(float)


@lru_cache(maxsize=64)
def _reduced_multipliers(
    n_nodes: int, model: str, alpha: float, beta: float, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """(lam, nl) multiplier arrays for one reduced model on one grid.

    Cached per parameter set; arrays are read-only.  The builder accepts the
    general form at alpha = 0 too (zero-mean conventions make it equal the
    alpha0 form mode by mode), which the cross-check exploits; the public
    rhs_general still refuses alpha = 0.
    """
    grid = SpectralGrid(n_nodes)
    k = _k_nonzero(grid)
    eps = epsilon
    if model == "general":
        mass = 1.0 + 0.25 * k ** (2.0 * (alpha - 1.0))
        lam_nz = (
            -((beta + 1.0) / (2.0 * eps)) * k**alpha
            + 1j * (k ** (2.0 * alpha - 1.0) / (4.0 * eps) - beta * k / eps)
        ) / mass
        nl_nz = (0.5j * k + 0.25 * k**alpha) / mass
    elif model == "alpha0":
        den = 0.25 + k**2
        lam_nz = (
            -((beta + 1.0) / (2.0 * eps)) * k**2
            + 1j * (k / (4.0 * eps) - beta * k**3 / eps)
        ) / den
        nl_nz = (0.5j * k**3 + 0.25 * k**2) / den
    elif model == "alpha1":
        lam_nz = 0.8 * (
            -((beta + 1.0) / (2.0 * eps)) * k + 1j * k * ((0.25 - beta) / eps)
        )
        nl_nz = 0.8 * (0.5j * k + 0.25 * k)
    elif model == "alpha2":
        den = 1.0 + k**2 / 4.0
        lam_nz = (
            -((1.0 + beta) / (2.0 * eps)) * k**2
            + 1j * (k**3 / (4.0 * eps) - beta * k / eps)
        ) / den
        nl_nz = (0.5j * k + 0.25 * k**2) / den
    else:
        raise ModelError(f"{model!r} is not a reduced model")

    lam = np.zeros(grid.n_coeffs, dtype=complex)
    nl = np.zeros(grid.n_coeffs, dtype=complex)
    lam[1:] = lam_nz
    nl[1:] = nl_nz
    lam[-1] = 0.0
    nl[-1] = 0.0
    lam.flags.writeable = False
    nl.flags.writeable = False
    return lam, nl


@lru_cache(maxsize=64)
def _full_system_multipliers(
    n_nodes: int, alpha: float
) -> tuple[np.ndarray, np.ndarray]:
    """(|k|^alpha with inert k=0, i*k with zeroed Nyquist) for the coupled system."""
    grid = SpectralGrid(n_nodes)
    k = grid.wavenumbers.astype(float)
    frac = np.zeros(grid.n_coeffs)
    frac[1:] = k[1:] ** alpha
    ik = 1j * k
    frac[-1] = 0.0
    ik[-1] = 0.0
    frac.flags.writeable = False
    ik.flags.writeable = False
    return frac, ik


def _require_model(params: ModelParams, expected: str) -> None:
    if params.model != expected:
        raise ModelError(f"params.model is {params.model!r}, expected {expected!r}")


def _reduced_tendency(state: SimState, params: ModelParams) -> Spectrum:
    lam, nl = _reduced_multipliers(
        state.grid.n_nodes, params.model, params.alpha, params.beta, params.epsilon
    )
    out = lam * state.p.coeffs
    if params.include_nonlinear:
        out = out + nl * quadratic(state.p, dealias=params.dealias).coeffs
    return Spectrum(state.grid, out)


def rhs_general(state: SimState, params: ModelParams) -> Spectrum:
    """Tendency of the general-order model, valid for alpha in (0, 2]."""
    _require_model(params, "general")
    return _reduced_tendency(state, params)


def rhs_alpha0(state: SimState, params: ModelParams) -> Spectrum:
    """Tendency of the closed form at alpha = 0 (kernel 1/(1/4 + k^2))."""
    _require_model(params, "alpha0")
    return _reduced_tendency(state, params)


def rhs_alpha1(state: SimState, params: ModelParams) -> Spectrum:
    """Tendency of the closed form at alpha = 1 (constant mass factor 5/4)."""
    _require_model(params, "alpha1")
    return _reduced_tendency(state, params)


def rhs_alpha2(state: SimState, params: ModelParams) -> Spectrum:
    """Tendency of the closed form at alpha = 2 (kernel 1/(1 + k^2/4))."""
    _require_model(params, "alpha2")
    return _reduced_tendency(state, params)


def rhs_full_system(state: SimState, params: ModelParams) -> tuple[Spectrum, Spectrum]:
    """Tendencies (d/dt u_dev, d/dt q) of the coupled system."""
    _require_model(params, "full_system")
    if not state.is_full:
        raise ModelError("full_system expects a (u_dev, q) state")
    frac, ik = _full_system_multipliers(state.grid.n_nodes, params.alpha)
    uq = state.q.coeffs.copy()
    if params.include_nonlinear:
        uq = uq + product(state.u_dev, state.q, dealias=params.dealias).coeffs
    du = -frac * state.u_dev.coeffs + params.chi * ik * uq
    dq = ik * state.u_dev.coeffs
    return Spectrum(state.grid, du), Spectrum(state.grid, dq)


def linear_dispersion(k: int, params: ModelParams) -> complex:
    """Exact eigenvalue lambda(k) of the linearised reduced dynamics.

    All model forms share one dispersion relation; the closed forms only
    rearrange the same mass factor.  Requires k != 0 (the mean channel is
    inert).  For beta > -1 the real part is strictly negative.
    """
    if k == 0:
        raise ModelError("linear_dispersion requires k != 0")
    alpha, beta, eps = params.alpha, params.beta, params.epsilon
    ka = abs(float(k))
    mass = 1.0 + 0.25 * ka ** (2.0 * (alpha - 1.0))
    num = -((beta + 1.0) / (2.0 * eps)) * ka**alpha + 1j * (
        np.sign(k) * ka ** (2.0 * alpha - 1.0) / (4.0 * eps) - beta * k / eps
    )
    return complex(num / mass)


# Packed-array plumbing for the integrator: reduced states travel as their
# coefficient vector, full states as the concatenation (u_dev, q).

def pack(state: SimState) -> np.ndarray:
    if state.is_full:
        return np.concatenate([state.u_dev.coeffs, state.q.coeffs])
    return state.p.coeffs.copy()


def unpack(y: np.ndarray, time: float, grid: SpectralGrid, full: bool) -> SimState:
    if full:
        m = grid.n_coeffs
        return SimState.full(
            time, Spectrum(grid, y[:m].copy()), Spectrum(grid, y[m:].copy())
        )
    return SimState.reduced(time, Spectrum(grid, y.copy()))


def make_tendency(grid: SpectralGrid, params: ModelParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Compile the model tendency into a flat-array callable f(t, y).

    This is the hot path: multiplier arrays are bound once, the transform
    scaling is fused into the dealias mask (mask entries are exactly 0 or 1,
    so fusing changes no bits of any kept coefficient), and the quadratic
    term works on raw coefficient arrays.  Each closure owns scratch
    buffers, so a closure instance is not reentrant.
    """
    n = grid.n_nodes
    nonlinear = params.include_nonlinear
    mask = grid.dealias_keep if params.dealias else 1.0
    pre = mask * (n / np.sqrt(TWO_PI))
    post = mask * (np.sqrt(TWO_PI) / n)

    if params.model == "full_system":
        frac, ik = _full_system_multipliers(n, params.alpha)
        neg_frac = -frac
        chi_ik = params.chi * ik
        m = grid.n_coeffs
        work = np.empty((2, m), dtype=complex)

        def f_full(t: float, y: np.ndarray) -> np.ndarray:
            u = y[:m]
            q = y[m:]
            uq = q
            if nonlinear:
                np.multiply(u, pre, out=work[0])
                np.multiply(q, pre, out=work[1])
                vals = np.fft.irfft(work, n=n, axis=-1)
                uq = q + np.fft.rfft(vals[0] * vals[1]) * post
            out = np.empty(2 * m, dtype=complex)
            du = out[:m]
            np.multiply(neg_frac, u, out=du)
            du += chi_ik * uq
            np.multiply(ik, u, out=out[m:])
            return out

        return f_full

    lam, nl = _reduced_multipliers(n, params.model, params.alpha, params.beta, params.epsilon)

    def f_reduced(t: float, y: np.ndarray) -> np.ndarray:
        out = lam * y
        if nonlinear:
            vals = np.fft.irfft(y * pre, n=n)
            out += nl * (np.fft.rfft(vals * vals) * post)
        return out

    return f_reduced


def linearized(params: ModelParams) -> ModelParams:
    """Copy of params with the quadratic term switched off (oracle runs)."""
    return replace(params, include_nonlinear=False)
