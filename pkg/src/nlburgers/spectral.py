"""Pseudo-spectral backbone on the 2*pi periodic interval.

Real fields are sampled at the uniform nodes x_j = 2*pi*j/N (N even) and
carried in frequency space through the non-negative half of their Fourier
coefficients,

    coeff(k) = (1/sqrt(2*pi)) * integral p(x) exp(-i*k*x) dx,   k = 0..N/2,

so wavenumbers are integers and single-mode fields have closed-form
coefficients (sin(k*x) contributes -i*sqrt(pi/2) at +k).  Negative modes are
implied by Hermitian symmetry; norm sums double the interior modes.

Evolved fields are zero-mean, so every evolution multiplier treats the k = 0
channel as inert (symbol 0).  That convention also regularises the negative
powers of |k| that appear for nonlocality orders below one.  The smoothing
kernels keep their natural k = 0 values instead, since they are bounded
there.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

TWO_PI = 2.0 * np.pi

OperatorKind = Literal["frac_lap", "hilbert", "deriv", "mass_lhs", "kern_K", "kern_J"]

OPERATOR_KINDS: tuple[str, ...] = (
    "frac_lap",
    "hilbert",
    "deriv",
    "mass_lhs",
    "kern_K",
    "kern_J",
)

# Kinds whose symbol is an odd function of k.  Their action on the Nyquist
# mode of a real grid is ill-defined (the mode aliases its own conjugate), so
# apply_symbol zeroes that channel.
_ODD_KINDS = ("hilbert", "deriv")

_ORDERED_KINDS = ("frac_lap", "mass_lhs")


class SpectralError(ValueError):
    """Invalid grid, field, or operator request."""


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid on [0, 2*pi) with integer wavenumbers 0..N/2."""

    n_nodes: int

    def __post_init__(self) -> None:
        n = self.n_nodes
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise SpectralError(f"n_nodes must be an integer, got {n!r}")
        if n < 8:
            raise SpectralError(f"n_nodes must be at least 8, got {n}")
        if n % 2 != 0:
            raise SpectralError(f"n_nodes must be even, got {n}")

    @cached_property
    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_nodes) / self.n_nodes

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.n_nodes // 2 + 1)

    @property
    def n_coeffs(self) -> int:
        return self.n_nodes // 2 + 1

    @property
    def nyquist(self) -> int:
        return self.n_nodes // 2

    @cached_property
    def dealias_keep(self) -> np.ndarray:
        """Float mask of modes kept by the 2/3 rule (|k| <= n_nodes/3)."""
        return (self.wavenumbers <= self.n_nodes / 3.0).astype(float)

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Hermitian doubling: weight 2 on interior modes, 1 at k=0 and Nyquist."""
        w = np.full(self.n_coeffs, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w


def build_grid(n_nodes: int) -> SpectralGrid:
    return SpectralGrid(n_nodes)


@dataclass(frozen=True)
class RealField:
    """Real samples on the nodes of a grid."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_nodes,):
            raise SpectralError(
                f"expected {self.grid.n_nodes} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise SpectralError("field samples must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Spectrum:
    """Complex coefficients for wavenumbers 0..N/2 of a real field."""

    grid: SpectralGrid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.n_coeffs,):
            raise SpectralError(
                f"expected {self.grid.n_coeffs} coefficients, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise SpectralError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def mean_coefficient(self) -> complex:
        return complex(self.coeffs[0])


# Low-level transforms on raw arrays (no validation); used in hot loops.

def coeffs_from_values(values: np.ndarray, n_nodes: int) -> np.ndarray:
    return np.fft.rfft(values) * (np.sqrt(TWO_PI) / n_nodes)


def values_from_coeffs(coeffs: np.ndarray, n_nodes: int) -> np.ndarray:
    return np.fft.irfft(coeffs * (n_nodes / np.sqrt(TWO_PI)), n=n_nodes)


def forward(field: RealField) -> Spectrum:
    """Transform node samples to coefficients (Hermitian half-spectrum)."""
    return Spectrum(field.grid, coeffs_from_values(field.values, field.grid.n_nodes))


def backward(spec: Spectrum) -> RealField:
    """Inverse transform; exact round trip with forward up to round-off."""
    return RealField(spec.grid, values_from_coeffs(spec.coeffs, spec.grid.n_nodes))


def _require_order(kind: str, order: float | None, allow_extended_order: bool) -> float:
    if order is None:
        raise SpectralError(f"symbol kind {kind!r} requires an order")
    order = float(order)
    if not np.isfinite(order):
        raise SpectralError(f"order must be finite, got {order}")
    if not allow_extended_order and not 0.0 <= order <= 2.0:
        raise SpectralError(
            f"order {order} outside [0, 2]; pass allow_extended_order=True to override"
        )
    return order


def symbol(
    kind: str,
    order: float | None,
    k,
    *,
    allow_extended_order: bool = False,
):
    """Fourier multiplier of one operator at integer wavenumber(s) k.

    kind:
      frac_lap  fractional Laplacian (-Lap)^(s/2) with s = order: |k|^s
      hilbert   Hilbert transform: -i*sgn(k)
      deriv     d/dx: i*k
      mass_lhs  time-derivative mass operator 1 + (1/4)|k|^(2*(order-1))
      kern_K    smoothing kernel 1/(1/4 + k^2)
      kern_J    smoothing kernel 1/(1 + k^2/4)

    All evolution symbols return 0 at k = 0 (zero-mean convention); the two
    kernels keep their natural values 4 and 1 there.  Scalar k gives a
    complex scalar, array k gives a complex array.
    """
    if kind not in OPERATOR_KINDS:
        raise SpectralError(f"unknown operator kind {kind!r}")
    k_arr = np.asarray(k)
    if not np.issubdtype(k_arr.dtype, np.integer):
        if not np.all(k_arr == np.round(k_arr)):
            raise SpectralError("wavenumbers must be integers")
    scalar = k_arr.ndim == 0
    k_arr = np.atleast_1d(k_arr).astype(float)
    kabs = np.abs(k_arr)
    nz = k_arr != 0
    out = np.zeros(k_arr.shape, dtype=complex)

    if kind == "frac_lap":
        s = _require_order(kind, order, allow_extended_order)
        out[nz] = kabs[nz] ** s
    elif kind == "hilbert":
        out[nz] = -1j * np.sign(k_arr[nz])
    elif kind == "deriv":
        out[nz] = 1j * k_arr[nz]
    elif kind == "mass_lhs":
        a = _require_order(kind, order, allow_extended_order)
        out[nz] = 1.0 + 0.25 * kabs[nz] ** (2.0 * (a - 1.0))
    elif kind == "kern_K":
        out[:] = 1.0 / (0.25 + k_arr**2)
    elif kind == "kern_J":
        out[:] = 1.0 / (1.0 + k_arr**2 / 4.0)

    if scalar:
        return complex(out[0])
    return out


def apply_symbol(
    spec: Spectrum,
    kind: str,
    order: float | None = None,
    *,
    allow_extended_order: bool = False,
) -> Spectrum:
    """Apply one operator symbol coefficient-wise.

    Odd symbols (deriv, hilbert) zero the Nyquist channel: on a real grid
    that mode aliases its own conjugate and an odd multiplier would break
    Hermitian symmetry.
    """
    mult = symbol(
        kind, order, spec.grid.wavenumbers, allow_extended_order=allow_extended_order
    )
    out = spec.coeffs * mult
    if kind in _ODD_KINDS:
        out[-1] = 0.0
    return Spectrum(spec.grid, out)


def dealias_coeffs(coeffs: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Zero every mode with |k| > n_nodes/3 (2/3 rule)."""
    return coeffs * grid.dealias_keep


def product(a: Spectrum, b: Spectrum, dealias: bool = True) -> Spectrum:
    """Spectrum of the pointwise product of two fields.

    With dealias=True the 2/3-rule mask is applied to both inputs before the
    physical-space multiply and to the result afterwards, which removes all
    aliasing from the quadratic interaction.  The k = 0 coefficient of the
    result is kept; consumers that differentiate the product kill it via
    their own multiplier.
    """
    if a.grid != b.grid:
        raise SpectralError("product requires both spectra on the same grid")
    n = a.grid.n_nodes
    ca = dealias_coeffs(a.coeffs, a.grid) if dealias else a.coeffs
    cb = dealias_coeffs(b.coeffs, b.grid) if dealias else b.coeffs
    va = values_from_coeffs(ca, n)
    vb = values_from_coeffs(cb, n)
    out = coeffs_from_values(va * vb, n)
    if dealias:
        out = dealias_coeffs(out, a.grid)
    return Spectrum(a.grid, out)


def quadratic(spec: Spectrum, dealias: bool = True) -> Spectrum:
    """Spectrum of p^2 for a real field given by its spectrum."""
    n = spec.grid.n_nodes
    c = dealias_coeffs(spec.coeffs, spec.grid) if dealias else spec.coeffs
    vals = values_from_coeffs(c, n)
    out = coeffs_from_values(vals * vals, n)
    if dealias:
        out = dealias_coeffs(out, spec.grid)
    return Spectrum(spec.grid, out)


def resample(spec: Spectrum, n_nodes: int) -> Spectrum:
    """Re-express a spectrum on a finer or coarser grid.

    Refinement pads with zeros and is exact.  Coarsening truncates; the new
    Nyquist coefficient keeps only its real part so the result stays a valid
    half-spectrum of a real field.
    """
    target = SpectralGrid(n_nodes)
    m = target.n_coeffs
    out = np.zeros(m, dtype=complex)
    take = min(m, spec.grid.n_coeffs)
    out[:take] = spec.coeffs[:take]
    out[-1] = out[-1].real
    return Spectrum(target, out)


def shift(spec: Spectrum, delta: float) -> Spectrum:
    """Spectrum of x -> p(x + delta) (left shift of the graph by delta)."""
    phase = np.exp(1j * spec.grid.wavenumbers * delta)
    out = spec.coeffs * phase
    out[-1] = out[-1].real
    return Spectrum(spec.grid, out)


def project_zero_mean(field: RealField) -> RealField:
    """Subtract the node average so the k = 0 coefficient vanishes."""
    return RealField(field.grid, field.values - field.values.mean())
