"""Model layer: parameter validation, dispersion, tendencies, packing."""

import numpy as np
import pytest

from nlburgers.models import (
    MODEL_KINDS,
    ModelError,
    ModelParams,
    SimState,
    _reduced_multipliers,
    linear_dispersion,
    linearized,
    make_tendency,
    pack,
    rhs_alpha0,
    rhs_alpha1,
    rhs_alpha2,
    rhs_full_system,
    rhs_general,
    unpack,
)
from nlburgers.spectral import (
    SpectralGrid,
    Spectrum,
    coeffs_from_values,
    symbol,
    values_from_coeffs,
)

#: coefficient carried by a unit sine or cosine mode
MODE_COEFF = np.sqrt(np.pi / 2.0)


def make_params(model: str, alpha: float, **kw) -> ModelParams:
    kw.setdefault("beta", 2.0)
    kw.setdefault("epsilon", 1.0)
    return ModelParams(alpha=alpha, model=model, **kw)


def sine_state(grid: SpectralGrid, amp: float, k: int, time: float = 0.0) -> SimState:
    vals = amp * np.sin(k * grid.nodes)
    return SimState.reduced(time, Spectrum(grid, coeffs_from_values(vals, grid.n_nodes)))


def random_reduced(grid: SpectralGrid, n_active: int, seed: int) -> SimState:
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.n_coeffs, dtype=complex)
    coeffs[1 : n_active + 1] = rng.normal(size=n_active) + 1j * rng.normal(size=n_active)
    return SimState.reduced(0.0, Spectrum(grid, coeffs))


REDUCED_FORMS = [
    ("alpha0", 0.0, rhs_alpha0),
    ("alpha1", 1.0, rhs_alpha1),
    ("alpha2", 2.0, rhs_alpha2),
    ("general", 1.3, rhs_general),
]


class TestModelParams:
    def test_known_kinds(self):
        assert set(MODEL_KINDS) == {"general", "alpha0", "alpha1", "alpha2", "full_system"}

    def test_unknown_model_rejected(self):
        with pytest.raises(ModelError, match="unknown model"):
            make_params("alpha3", 1.5)

    @pytest.mark.parametrize("beta", [-1.0, -2.0])
    def test_beta_must_exceed_minus_one(self, beta):
        with pytest.raises(ModelError, match="beta"):
            make_params("general", 1.0, beta=beta)

    @pytest.mark.parametrize("epsilon", [0.0, -0.1])
    def test_epsilon_must_be_positive(self, epsilon):
        with pytest.raises(ModelError, match="epsilon"):
            make_params("general", 1.0, epsilon=epsilon)

    @pytest.mark.parametrize("alpha", [-0.5, 2.5])
    def test_alpha_range_guard(self, alpha):
        with pytest.raises(ModelError, match="outside"):
            make_params("general", alpha)
        assert make_params("general", alpha, allow_extended_alpha=True).alpha == alpha

    def test_nonfinite_parameter_rejected(self):
        with pytest.raises(ModelError, match="finite"):
            make_params("general", float("nan"))

    @pytest.mark.parametrize("model,pinned", [("alpha0", 0.0), ("alpha1", 1.0), ("alpha2", 2.0)])
    def test_closed_forms_pin_alpha(self, model, pinned):
        assert make_params(model, pinned).alpha == pinned
        with pytest.raises(ModelError, match="closed form"):
            make_params(model, pinned + 0.5 if pinned < 2.0 else pinned - 0.5)

    def test_general_form_refuses_alpha_zero(self):
        with pytest.raises(ModelError, match="singular"):
            make_params("general", 0.0)

    def test_chi_defaults_to_reduced_coupling(self):
        assert make_params("full_system", 1.0, beta=2.0).chi == 5.0
        assert make_params("full_system", 1.0, beta=-0.25).chi == 0.5
        assert make_params("full_system", 1.0, chi=3.0).chi == 3.0
        with pytest.raises(ModelError, match="chi"):
            make_params("full_system", 1.0, chi=float("inf"))


class TestSimState:
    def test_needs_exactly_one_representation(self):
        grid = SpectralGrid(16)
        z = Spectrum(grid, np.zeros(grid.n_coeffs, dtype=complex))
        with pytest.raises(ModelError):
            SimState(time=0.0)
        with pytest.raises(ModelError):
            SimState(time=0.0, p=z, u_dev=z, q=z)

    def test_reduced_field_must_be_zero_mean(self):
        grid = SpectralGrid(16)
        coeffs = np.zeros(grid.n_coeffs, dtype=complex)
        coeffs[0] = 1e-9
        with pytest.raises(ModelError, match="zero-mean"):
            SimState.reduced(0.0, Spectrum(grid, coeffs))

    def test_gradient_field_must_be_zero_mean(self):
        grid = SpectralGrid(16)
        zero = Spectrum(grid, np.zeros(grid.n_coeffs, dtype=complex))
        bad = np.zeros(grid.n_coeffs, dtype=complex)
        bad[0] = 1e-6
        with pytest.raises(ModelError, match="zero-mean"):
            SimState.full(0.0, zero, Spectrum(grid, bad))

    def test_cell_density_may_carry_mass(self):
        grid = SpectralGrid(16)
        zero = Spectrum(grid, np.zeros(grid.n_coeffs, dtype=complex))
        mass = np.zeros(grid.n_coeffs, dtype=complex)
        mass[0] = 0.3 * np.sqrt(2.0 * np.pi)
        state = SimState.full(0.0, Spectrum(grid, mass), zero)
        assert state.is_full
        assert state.diagnosed is state.q

    def test_pair_must_share_grid(self):
        a = Spectrum(SpectralGrid(16), np.zeros(9, dtype=complex))
        b = Spectrum(SpectralGrid(32), np.zeros(17, dtype=complex))
        with pytest.raises(ModelError, match="grid"):
            SimState.full(0.0, a, b)

    def test_reduced_accessors(self):
        state = sine_state(SpectralGrid(32), 1.0, 3)
        assert not state.is_full
        assert state.grid.n_nodes == 32
        assert state.diagnosed is state.p


class TestDispersion:
    # Worked by hand from lambda(k) = [-(beta+1)/(2 eps) |k|^a
    #   + i(|k|^(2a-1)/(4 eps) - beta k/eps)] / (1 + |k|^(2(a-1))/4)
    # at beta = 2, eps = 1.
    HAND_VALUES = [
        ("alpha1", 1.0, 4, complex(-4.8, -5.6)),
        ("alpha2", 2.0, 1, complex(-1.2, -1.4)),
        ("alpha0", 0.0, 4, complex(-24.0 / 16.25, -127.0 / 16.25)),
    ]

    @pytest.mark.parametrize("model,alpha,k,expected", HAND_VALUES)
    def test_hand_worked_eigenvalues(self, model, alpha, k, expected):
        lam = linear_dispersion(k, make_params(model, alpha))
        assert lam == pytest.approx(expected, rel=1e-15)

    def test_mean_channel_rejected(self):
        with pytest.raises(ModelError, match="k != 0"):
            linear_dispersion(0, make_params("alpha1", 1.0))

    def test_conjugate_symmetry(self):
        p = make_params("general", 1.3)
        for k in (1, 3, 8):
            assert linear_dispersion(-k, p) == pytest.approx(
                np.conj(linear_dispersion(k, p)), rel=1e-15
            )

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 1.7, 2.0])
    def test_strict_damping_for_admissible_beta(self, alpha):
        model = "alpha0" if alpha == 0.0 else "general"
        p = make_params(model, alpha, beta=-0.5, epsilon=0.3)
        for k in range(1, 65):
            assert linear_dispersion(k, p).real < 0.0

    @pytest.mark.parametrize("alpha", [0.5, 1.3, 2.0])
    def test_matches_operator_symbol_composition(self, alpha):
        # lambda(k) * mass(k) must equal the symbol of
        # -(beta+1)/(2 eps) (-Lap)^(a/2) + (1/(4 eps)) d/dx (-Lap)^(a-1)
        # - (beta/eps) d/dx, assembled from the operator table.
        p = make_params("general", alpha)
        for k in (1, 2, 5, 10):
            mass = symbol("mass_lhs", alpha, k)
            combo = (
                -1.5 * symbol("frac_lap", alpha, k)
                + 0.25
                * symbol("deriv", None, k)
                * symbol("frac_lap", 2.0 * alpha - 2.0, k, allow_extended_order=True)
                - 2.0 * symbol("deriv", None, k)
            )
            assert linear_dispersion(k, p) * mass == pytest.approx(combo, rel=1e-13)


class TestReducedTendencies:
    @pytest.mark.parametrize("model,alpha,rhs", REDUCED_FORMS)
    def test_linearised_single_mode_is_eigenmode(self, model, alpha, rhs):
        grid = SpectralGrid(64)
        state = sine_state(grid, 0.7, 5)
        p = linearized(make_params(model, alpha))
        out = rhs(state, p).coeffs
        expected = np.zeros_like(out)
        expected[5] = linear_dispersion(5, p) * state.p.coeffs[5]
        np.testing.assert_allclose(out, expected, atol=1e-13)

    @pytest.mark.parametrize("model,alpha,rhs", REDUCED_FORMS)
    def test_quadratic_term_of_single_sine(self, model, alpha, rhs):
        # p = a sin(kx) gives p^2 = a^2/2 - (a^2/2) cos(2kx); only the 2k
        # channel feeds back (the mean channel is held at zero), so the
        # full tendency is lambda(k) p_hat(k) plus one hand-computable term.
        grid = SpectralGrid(48)
        a, k = 0.8, 3
        state = sine_state(grid, a, k)
        p = make_params(model, alpha)
        out = rhs(state, p).coeffs

        m = 2 * k
        mass = 1.0 + 0.25 * float(m) ** (2.0 * (alpha - 1.0))
        nl = (0.5j * m + 0.25 * float(m) ** alpha) / mass
        expected = np.zeros_like(out)
        expected[k] = linear_dispersion(k, p) * state.p.coeffs[k]
        expected[m] = nl * (-(a * a / 2.0) * MODE_COEFF)
        np.testing.assert_allclose(out, expected, atol=1e-13)

    def test_wrappers_require_matching_model(self):
        state = sine_state(SpectralGrid(16), 1.0, 2)
        with pytest.raises(ModelError, match="expected"):
            rhs_alpha1(state, make_params("alpha2", 2.0))
        with pytest.raises(ModelError, match="expected"):
            rhs_general(state, make_params("alpha1", 1.0))

    def test_mean_and_nyquist_channels_inert(self):
        lam, nl = _reduced_multipliers(32, "alpha2", 2.0, 2.0, 1.0)
        assert lam[0] == 0.0 and nl[0] == 0.0
        assert lam[-1] == 0.0 and nl[-1] == 0.0
        assert not lam.flags.writeable and not nl.flags.writeable


class TestCrossForm:
    @pytest.mark.parametrize(
        "alpha,model,closed", [(1.0, "alpha1", rhs_alpha1), (2.0, "alpha2", rhs_alpha2)]
    )
    def test_general_matches_closed_form(self, alpha, model, closed):
        grid = SpectralGrid(96)
        state = random_reduced(grid, 20, seed=11)
        got = rhs_general(state, make_params("general", alpha)).coeffs
        want = closed(state, make_params(model, alpha)).coeffs
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-13)

    def test_general_multipliers_reach_alpha_zero(self):
        # The public wrapper refuses alpha = 0, but the multiplier builder
        # accepts it so the closed form can be checked against the limit.
        lam_g, nl_g = _reduced_multipliers(64, "general", 0.0, 2.0, 1.0)
        lam_0, nl_0 = _reduced_multipliers(64, "alpha0", 0.0, 2.0, 1.0)
        np.testing.assert_allclose(lam_g, lam_0, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(nl_g, nl_0, rtol=1e-13, atol=1e-15)


class TestFullSystem:
    def test_unit_background_drives_gradient_advection(self):
        # With u = 1 exactly, d/dt u_dev = chi dq/dx and d/dt q = 0.
        grid = SpectralGrid(32)
        x = grid.nodes
        zero = Spectrum(grid, np.zeros(grid.n_coeffs, dtype=complex))
        q = Spectrum(grid, coeffs_from_values(np.sin(x), 32))
        state = SimState.full(0.0, zero, q)
        du, dq = rhs_full_system(state, make_params("full_system", 1.0))
        np.testing.assert_allclose(
            values_from_coeffs(du.coeffs, 32), 5.0 * np.cos(x), atol=1e-13
        )
        np.testing.assert_allclose(np.abs(dq.coeffs), 0.0, atol=1e-15)

    def test_deviation_couples_through_product(self):
        # u_dev = cos x, q = sin x, alpha = 1:
        #   d/dt u_dev = -cos x + chi d/dx (sin x + cos x sin x)
        #   d/dt q     = d/dx cos x = -sin x
        grid = SpectralGrid(48)
        x = grid.nodes
        u_dev = Spectrum(grid, coeffs_from_values(np.cos(x), 48))
        q = Spectrum(grid, coeffs_from_values(np.sin(x), 48))
        state = SimState.full(0.0, u_dev, q)
        du, dq = rhs_full_system(state, make_params("full_system", 1.0))
        expected_du = -np.cos(x) + 5.0 * (np.cos(x) + np.cos(2.0 * x))
        np.testing.assert_allclose(values_from_coeffs(du.coeffs, 48), expected_du, atol=1e-12)
        np.testing.assert_allclose(values_from_coeffs(dq.coeffs, 48), -np.sin(x), atol=1e-13)

    def test_mass_channels_inert(self):
        grid = SpectralGrid(32)
        x = grid.nodes
        u_dev = Spectrum(grid, coeffs_from_values(0.3 + np.cos(x), 32))
        q = Spectrum(grid, coeffs_from_values(np.sin(2.0 * x), 32))
        state = SimState.full(0.0, u_dev, q)
        du, dq = rhs_full_system(state, make_params("full_system", 1.5))
        assert du.coeffs[0] == 0.0
        assert dq.coeffs[0] == 0.0

    def test_requires_pair_state_and_matching_model(self):
        grid = SpectralGrid(16)
        reduced = sine_state(grid, 1.0, 2)
        with pytest.raises(ModelError, match="expected"):
            rhs_full_system(reduced, make_params("alpha1", 1.0))
        with pytest.raises(ModelError, match="expects a"):
            rhs_full_system(reduced, make_params("full_system", 1.0))


class TestTendencyClosure:
    @pytest.mark.parametrize("dealias", [True, False])
    @pytest.mark.parametrize("nonlinear", [True, False])
    def test_reduced_closure_matches_wrapper(self, dealias, nonlinear):
        grid = SpectralGrid(96)
        state = random_reduced(grid, 25, seed=3)
        p = make_params("alpha1", 1.0, dealias=dealias, include_nonlinear=nonlinear)
        f = make_tendency(grid, p)
        got = f(0.0, pack(state))
        want = rhs_alpha1(state, p).coeffs
        assert np.array_equal(got, want)

    def test_full_closure_matches_wrapper(self):
        grid = SpectralGrid(64)
        x = grid.nodes
        u_dev = Spectrum(grid, coeffs_from_values(0.1 + 0.2 * np.cos(3.0 * x), 64))
        q = Spectrum(grid, coeffs_from_values(0.4 * np.sin(x) - 0.1 * np.sin(5.0 * x), 64))
        state = SimState.full(0.0, u_dev, q)
        p = make_params("full_system", 0.7)
        f = make_tendency(grid, p)
        got = f(0.0, pack(state))
        du, dq = rhs_full_system(state, p)
        assert np.array_equal(got, np.concatenate([du.coeffs, dq.coeffs]))

    def test_linearised_closure_is_diagonal(self):
        grid = SpectralGrid(32)
        state = random_reduced(grid, 8, seed=9)
        p = linearized(make_params("alpha2", 2.0))
        lam, _ = _reduced_multipliers(32, "alpha2", 2.0, 2.0, 1.0)
        f = make_tendency(grid, p)
        y = pack(state)
        assert np.array_equal(f(0.0, y), lam * y)

    def test_linearized_only_drops_quadratic(self):
        p = make_params("general", 1.3, dealias=False)
        q = linearized(p)
        assert not q.include_nonlinear
        assert p.include_nonlinear
        assert (q.alpha, q.beta, q.epsilon, q.model, q.dealias) == (
            p.alpha,
            p.beta,
            p.epsilon,
            p.model,
            p.dealias,
        )


class TestPacking:
    def test_reduced_round_trip(self):
        grid = SpectralGrid(32)
        state = random_reduced(grid, 10, seed=5)
        y = pack(state)
        back = unpack(y, 1.5, grid, full=False)
        assert back.time == 1.5
        assert not back.is_full
        np.testing.assert_array_equal(back.p.coeffs, state.p.coeffs)

    def test_pack_copies(self):
        grid = SpectralGrid(32)
        state = random_reduced(grid, 10, seed=5)
        y = pack(state)
        y[3] = 99.0
        assert state.p.coeffs[3] != 99.0

    def test_full_round_trip(self):
        grid = SpectralGrid(32)
        x = grid.nodes
        u_dev = Spectrum(grid, coeffs_from_values(0.2 + np.cos(x), 32))
        q = Spectrum(grid, coeffs_from_values(np.sin(x), 32))
        state = SimState.full(0.0, u_dev, q)
        y = pack(state)
        assert y.shape == (2 * grid.n_coeffs,)
        back = unpack(y, 0.25, grid, full=True)
        assert back.is_full and back.time == 0.25
        np.testing.assert_array_equal(back.u_dev.coeffs, u_dev.coeffs)
        np.testing.assert_array_equal(back.q.coeffs, q.coeffs)
