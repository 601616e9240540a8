"""Norms, energy functionals, and resolution indicators.

All quantities are computed from the stored half-spectrum with Hermitian
doubling (interior modes count twice, k = 0 and Nyquist once) and exclude
the k = 0 channel, so they are the homogeneous norms of the zero-mean field:

    sobolev_norm(p, s) = sqrt( sum_{k != 0} |k|^(2s) |p_hat(k)|^2 )
    wiener_norm(p, s)  = sum_{k != 0} |k|^s |p_hat(k)|

With the symmetric transform normalisation, sobolev_norm(., 0) equals the
L2 norm of the field (Parseval), e.g. sin(4x) -> sqrt(pi).

Energy functionals mirror the quantities that decay for small data:

    E0 = ||Lap p||^2 + (1/4) ||dx p||^2         (alpha = 0 form)
    E2 = ||dx p||^2 + (1/4) ||Lap p||^2         (alpha = 2 form)
    F  = ||p||^2 + (1/4) ||dx p||^2
    G  = sum (1 + k^4) |p_hat|^2  +  (1/4) sum |k|^(2(alpha-1)) (1 + k^4) |p_hat|^2

energy_E is the model-appropriate form (E0 for alpha0, E2 for alpha2) and is
reported as 0 for models that have no dedicated functional; F and G are
always computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelParams, SimState
from .spectral import RealField, Spectrum, values_from_coeffs

SOBOLEV_ORDERS: tuple[float, ...] = (0.0, 1.0, 2.0, 2.5)
WIENER_ORDERS: tuple[float, ...] = (0.0, 1.0, 2.0)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time sample of every tracked norm and indicator."""

    time: float
    linf_p: float
    linf_dxp: float
    h_norms: dict[float, float]
    a_norms: dict[float, float]
    energy_E: float
    energy_F: float
    energy_G: float
    tail_fraction: float
    dt: float


def _weighted_moduli(spec: Spectrum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(k, weights, |coeff|) for the nonzero modes."""
    k = spec.grid.wavenumbers[1:].astype(float)
    w = spec.grid.parseval_weights[1:]
    mod = np.abs(spec.coeffs[1:])
    return k, w, mod


def sobolev_norm(spec: Spectrum, s: float) -> float:
    """Homogeneous Sobolev norm of order s (zero mode excluded)."""
    if not np.isfinite(s):
        raise ValueError(f"order s must be finite, got {s}")
    k, w, mod = _weighted_moduli(spec)
    return float(np.sqrt(np.sum(w * k ** (2.0 * s) * mod**2)))


def wiener_norm(spec: Spectrum, s: float) -> float:
    """Weighted absolute-coefficient sum of order s (both signs of k)."""
    if not np.isfinite(s):
        raise ValueError(f"order s must be finite, got {s}")
    k, w, mod = _weighted_moduli(spec)
    return float(np.sum(w * k**s * mod))


def sup_norms(field: RealField) -> tuple[float, float]:
    """(max |p|, max |dx p|) with the derivative evaluated spectrally."""
    n = field.grid.n_nodes
    coeffs = np.fft.rfft(field.values)
    dx = coeffs * (1j * field.grid.wavenumbers)
    dx[-1] = 0.0  # odd symbol is undefined on the Nyquist mode
    dvals = np.fft.irfft(dx, n=n)
    return float(np.max(np.abs(field.values))), float(np.max(np.abs(dvals)))


def energy_functionals(spec: Spectrum, params: ModelParams) -> tuple[float, float, float]:
    """(energy_E, energy_F, energy_G) for one state under one model."""
    k, w, mod = _weighted_moduli(spec)
    m2 = mod**2
    l2 = np.sum(w * m2)
    dx2 = np.sum(w * k**2 * m2)
    lap2 = np.sum(w * k**4 * m2)
    if params.model == "alpha0":
        energy_e = lap2 + 0.25 * dx2
    elif params.model == "alpha2":
        energy_e = dx2 + 0.25 * lap2
    else:
        energy_e = 0.0
    energy_f = l2 + 0.25 * dx2
    inhom = (1.0 + k**4) * m2
    energy_g = np.sum(w * inhom) + 0.25 * np.sum(
        w * k ** (2.0 * (params.alpha - 1.0)) * inhom
    )
    return float(energy_e), float(energy_f), float(energy_g)


def tail_fraction(spec: Spectrum) -> float:
    """Fraction of the curvature energy sum |k|^2 |p_hat|^2 in the upper
    half of the dealiased band (|k| > n_nodes/6).  Zero spectra give 0."""
    k, w, mod = _weighted_moduli(spec)
    # The ratio is scale invariant; normalising keeps mod**2 from
    # overflowing on states headed for blow-up.
    peak = float(np.max(mod, initial=0.0))
    if peak == 0.0:
        return 0.0
    weighted = w * k**2 * (mod / peak) ** 2
    total = float(np.sum(weighted))
    if total == 0.0:
        return 0.0
    cut = spec.grid.n_nodes / 6.0
    return float(np.sum(weighted[k > cut]) / total)


def compute_record(state: SimState, params: ModelParams, dt: float) -> DiagnosticsRecord:
    """Evaluate every diagnostic for one state.

    For the coupled system the diagnosed field is the zero-mean gradient
    field q; reduced models diagnose p itself.
    """
    spec = state.diagnosed
    vals = values_from_coeffs(spec.coeffs, spec.grid.n_nodes)
    field = RealField(spec.grid, vals)
    linf_p, linf_dxp = sup_norms(field)
    h_norms = {s: sobolev_norm(spec, s) for s in SOBOLEV_ORDERS}
    a_norms = {s: wiener_norm(spec, s) for s in WIENER_ORDERS}
    energy_e, energy_f, energy_g = energy_functionals(spec, params)
    return DiagnosticsRecord(
        time=state.time,
        linf_p=linf_p,
        linf_dxp=linf_dxp,
        h_norms=h_norms,
        a_norms=a_norms,
        energy_E=energy_e,
        energy_F=energy_f,
        energy_G=energy_g,
        tail_fraction=tail_fraction(spec),
        dt=dt,
    )
