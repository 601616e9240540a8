"""Norms, energies, tail indicator, and the per-step record."""

import numpy as np
import pytest

from nlburgers.diagnostics import (
    SOBOLEV_ORDERS,
    WIENER_ORDERS,
    compute_record,
    energy_functionals,
    sobolev_norm,
    sup_norms,
    tail_fraction,
    wiener_norm,
)
from nlburgers.models import ModelParams, SimState
from nlburgers.spectral import (
    RealField,
    SpectralGrid,
    Spectrum,
    coeffs_from_values,
)

PI = np.pi
#: |coeff| carried at wavenumber k by a unit sine or cosine mode
MODE = np.sqrt(PI / 2.0)


def mode_spectrum(grid: SpectralGrid, entries: dict[int, complex]) -> Spectrum:
    coeffs = np.zeros(grid.n_coeffs, dtype=complex)
    for k, c in entries.items():
        coeffs[k] = c
    return Spectrum(grid, coeffs)


def random_spectrum(grid: SpectralGrid, n_active: int, seed: int) -> Spectrum:
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.n_coeffs, dtype=complex)
    coeffs[1 : n_active + 1] = rng.normal(size=n_active) + 1j * rng.normal(size=n_active)
    return Spectrum(grid, coeffs)


def params_for(model: str, alpha: float) -> ModelParams:
    return ModelParams(alpha=alpha, beta=2.0, epsilon=1.0, model=model)


class TestNorms:
    # p = -2 sin(4x): the single stored coefficient has modulus 2*MODE,
    # so sum_{k!=0} |k|^(2s) |p_hat|^2 = 2 * 4^(2s) * 2*pi.
    def setup_method(self):
        self.grid = SpectralGrid(64)
        self.spec = mode_spectrum(self.grid, {4: 2j * MODE})

    @pytest.mark.parametrize(
        "s,expected",
        [(0.0, 2.0), (1.0, 8.0), (2.0, 32.0), (2.5, 64.0)],
    )
    def test_sobolev_single_mode(self, s, expected):
        assert sobolev_norm(self.spec, s) == pytest.approx(expected * np.sqrt(PI), rel=1e-14)

    @pytest.mark.parametrize("s,expected", [(0.0, 4.0), (1.0, 16.0), (2.0, 64.0)])
    def test_wiener_single_mode(self, s, expected):
        assert wiener_norm(self.spec, s) == pytest.approx(expected * MODE, rel=1e-14)

    def test_mean_channel_excluded(self):
        spec = mode_spectrum(self.grid, {0: 3.7})
        assert sobolev_norm(spec, 0.0) == 0.0
        assert wiener_norm(spec, 0.0) == 0.0

    def test_zero_spectrum(self):
        spec = mode_spectrum(self.grid, {})
        assert sobolev_norm(spec, 2.0) == 0.0
        assert wiener_norm(spec, 1.0) == 0.0
        assert tail_fraction(spec) == 0.0

    @pytest.mark.parametrize("s", [float("inf"), float("nan")])
    def test_order_must_be_finite(self, s):
        with pytest.raises(ValueError, match="finite"):
            sobolev_norm(self.spec, s)
        with pytest.raises(ValueError, match="finite"):
            wiener_norm(self.spec, s)

    def test_wiener_orders_log_convex(self):
        spec = random_spectrum(SpectralGrid(128), 40, seed=7)
        a0 = wiener_norm(spec, 0.0)
        a1 = wiener_norm(spec, 1.0)
        a2 = wiener_norm(spec, 2.0)
        assert a1**2 <= a0 * a2 * (1.0 + 1e-12)

    def test_reported_order_sets(self):
        assert SOBOLEV_ORDERS == (0.0, 1.0, 2.0, 2.5)
        assert WIENER_ORDERS == (0.0, 1.0, 2.0)


class TestSupNorms:
    def test_single_sine(self):
        grid = SpectralGrid(64)
        vals = -2.0 * np.sin(4.0 * grid.nodes)
        linf_p, linf_dxp = sup_norms(RealField(grid, vals))
        assert linf_p == pytest.approx(2.0, rel=1e-14)
        assert linf_dxp == pytest.approx(8.0, rel=1e-14)

    def test_nyquist_mode_has_no_derivative(self):
        grid = SpectralGrid(64)
        vals = np.cos(32.0 * grid.nodes)
        linf_p, linf_dxp = sup_norms(RealField(grid, vals))
        assert linf_p == pytest.approx(1.0, rel=1e-14)
        assert linf_dxp == pytest.approx(0.0, abs=1e-12)

    def test_zero_field(self):
        grid = SpectralGrid(32)
        assert sup_norms(RealField(grid, np.zeros(32))) == (0.0, 0.0)


class TestEnergyFunctionals:
    # For p = -2 sin(4x): ||p||^2 = 4 pi, ||dx p||^2 = 64 pi,
    # ||Lap p||^2 = 1024 pi, and sum w (1 + k^4) m^2 = 1028 pi.
    def setup_method(self):
        self.spec = mode_spectrum(SpectralGrid(64), {4: 2j * MODE})

    def test_alpha0_form(self):
        e, f, g = energy_functionals(self.spec, params_for("alpha0", 0.0))
        assert e == pytest.approx(1040.0 * PI, rel=1e-14)
        assert f == pytest.approx(20.0 * PI, rel=1e-14)
        assert g == pytest.approx(1028.0 * PI * (1.0 + 1.0 / 64.0), rel=1e-14)

    def test_alpha2_form(self):
        e, f, g = energy_functionals(self.spec, params_for("alpha2", 2.0))
        assert e == pytest.approx(320.0 * PI, rel=1e-14)
        assert f == pytest.approx(20.0 * PI, rel=1e-14)
        assert g == pytest.approx(5.0 * 1028.0 * PI, rel=1e-14)

    @pytest.mark.parametrize("model,alpha", [("alpha1", 1.0), ("general", 1.0)])
    def test_models_without_dedicated_form(self, model, alpha):
        e, f, g = energy_functionals(self.spec, params_for(model, alpha))
        assert e == 0.0
        assert f == pytest.approx(20.0 * PI, rel=1e-14)
        assert g == pytest.approx(1.25 * 1028.0 * PI, rel=1e-14)

    def test_dissipation_identity_alpha2(self):
        # Along the linearised alpha = 2 flow, d/dt F = -((beta+1)/eps) ||dx p||^2
        # exactly; check the chain rule against the tendency spectrally.
        from nlburgers.models import linearized, rhs_alpha2

        grid = SpectralGrid(128)
        spec = random_spectrum(grid, 40, seed=23)
        beta, eps = 0.7, 0.35
        p = ModelParams(alpha=2.0, beta=beta, epsilon=eps, model="alpha2")
        dspec = rhs_alpha2(SimState.reduced(0.0, spec), linearized(p))

        k = grid.wavenumbers[1:].astype(float)
        w = grid.parseval_weights[1:]
        df_dt = 2.0 * np.sum(
            w * (1.0 + k**2 / 4.0) * np.real(np.conj(spec.coeffs[1:]) * dspec.coeffs[1:])
        )
        budget = -((beta + 1.0) / eps) * sobolev_norm(spec, 1.0) ** 2
        assert df_dt == pytest.approx(budget, rel=1e-12)


class TestTailFraction:
    def test_low_mode_has_no_tail(self):
        spec = mode_spectrum(SpectralGrid(64), {4: 1.0})
        assert tail_fraction(spec) == 0.0

    def test_high_mode_is_all_tail(self):
        spec = mode_spectrum(SpectralGrid(64), {30: 1.0})
        assert tail_fraction(spec) == pytest.approx(1.0, rel=1e-14)

    def test_mixture_weighted_by_curvature(self):
        # weights k^2 |m|^2: mode 2 contributes 4, mode 30 contributes 900
        spec = mode_spectrum(SpectralGrid(64), {2: 1.0, 30: 1.0})
        assert tail_fraction(spec) == pytest.approx(900.0 / 904.0, rel=1e-14)

    def test_scale_invariant_at_extreme_magnitudes(self):
        grid = SpectralGrid(64)
        small = mode_spectrum(grid, {2: 1.0, 30: 1.0})
        huge = mode_spectrum(grid, {2: 1e160, 30: 1e160})
        assert tail_fraction(huge) == pytest.approx(tail_fraction(small), rel=1e-14)
        assert np.isfinite(tail_fraction(huge))


class TestComputeRecord:
    def test_reduced_record_hand_values(self):
        grid = SpectralGrid(64)
        spec = mode_spectrum(grid, {4: 2j * MODE})
        state = SimState.reduced(1.5, spec)
        rec = compute_record(state, params_for("alpha1", 1.0), dt=0.01)

        assert rec.time == 1.5
        assert rec.dt == 0.01
        assert rec.linf_p == pytest.approx(2.0, rel=1e-13)
        assert rec.linf_dxp == pytest.approx(8.0, rel=1e-13)
        assert rec.h_norms[0.0] == pytest.approx(2.0 * np.sqrt(PI), rel=1e-14)
        assert rec.h_norms[2.5] == pytest.approx(64.0 * np.sqrt(PI), rel=1e-14)
        assert rec.a_norms[1.0] == pytest.approx(16.0 * MODE, rel=1e-14)
        assert rec.energy_E == 0.0
        assert rec.energy_F == pytest.approx(20.0 * PI, rel=1e-14)
        assert rec.energy_G == pytest.approx(1.25 * 1028.0 * PI, rel=1e-14)
        assert rec.tail_fraction == 0.0

    def test_full_system_record_tracks_gradient_field(self):
        grid = SpectralGrid(64)
        x = grid.nodes
        u_dev = Spectrum(grid, coeffs_from_values(5.0 * np.cos(x), 64))
        q = Spectrum(grid, coeffs_from_values(np.sin(3.0 * x), 64))
        state = SimState.full(0.0, u_dev, q)
        rec = compute_record(state, params_for("full_system", 1.0), dt=0.0)
        # norms reflect q = sin(3x), not the much larger u_dev
        assert rec.linf_p == pytest.approx(1.0, rel=1e-12)
        assert rec.linf_dxp == pytest.approx(3.0, rel=1e-12)
        assert rec.h_norms[0.0] == pytest.approx(np.sqrt(PI), rel=1e-12)
