import math

import numpy as np
import pytest

from cfaging.aging import complex_normal
from cfaging.errors import DegenerateInputError, InvalidParameterError, RankDeficiencyError
from cfaging.linalg import hermitian_rcond, solve_hermitian_psd
from cfaging.precoding import (
    build_precoder_state,
    estimate_expectations,
    power_control_eta,
    zf_precode,
    zf_weights,
)


def random_estimates(rng, num_users, num_aps, scale=1.0):
    return scale * complex_normal(rng, (num_users, num_aps))


class TestLinalgHelpers:
    def test_batched_cholesky_solve_matches_direct(self):
        rng = np.random.default_rng(0)
        g = complex_normal(rng, (32, 5, 9))
        a = g @ g.conj().transpose(0, 2, 1)
        b = complex_normal(rng, (32, 5, 3))
        x = solve_hermitian_psd(a, b)
        np.testing.assert_allclose(x, np.linalg.solve(a, b), rtol=1e-9, atol=1e-12)

    def test_vector_rhs(self):
        rng = np.random.default_rng(1)
        g = complex_normal(rng, (4, 8))
        a = g @ g.conj().T
        b = complex_normal(rng, (4,))
        x = solve_hermitian_psd(a, b)
        np.testing.assert_allclose(a @ x, b, rtol=1e-9, atol=1e-12)

    def test_rcond_of_identity(self):
        assert hermitian_rcond(np.eye(4)) == pytest.approx(1.0)


class TestZfPrecode:
    @pytest.mark.parametrize("num_users,num_aps", [(1, 1), (2, 4), (8, 32), (16, 128)])
    def test_zf_identity(self, num_users, num_aps):
        rng = np.random.default_rng(num_users * 1000 + num_aps)
        # Per-link scales spanning several orders mimic real large-scale gains.
        scale = 10 ** rng.uniform(-6, -4, size=(num_users, num_aps))
        g_hat = scale * complex_normal(rng, (num_users, num_aps))
        weights = zf_weights(g_hat)
        residual = np.abs(g_hat @ weights - np.eye(num_users)).max()
        assert residual < 1e-10

    @pytest.mark.parametrize("num_users,num_aps", [(1, 1), (2, 4), (8, 32), (16, 128)])
    def test_precode_residual(self, num_users, num_aps):
        rng = np.random.default_rng(num_users * 7 + num_aps)
        g_hat = random_estimates(rng, num_users, num_aps, scale=1e-5)
        eta = rng.uniform(0.5, 2.0, num_users)
        symbols = complex_normal(rng, (num_users,))
        x = zf_precode(g_hat, eta, symbols)
        target = np.sqrt(eta) * symbols
        assert np.linalg.norm(g_hat @ x - target) / np.linalg.norm(target) < 1e-10

    def test_scalar_inversion(self):
        x = zf_precode(np.array([[2.0 + 0.0j]]), 1.0, np.array([1.0 + 0.0j]))
        assert x[0] == pytest.approx(0.5)
        assert (np.array([[2.0 + 0.0j]]) @ x)[0] == pytest.approx(1.0)

    def test_matches_least_squares_oracle(self):
        rng = np.random.default_rng(9)
        g_hat = random_estimates(rng, 2, 4)
        eta = np.array([0.7, 1.3])
        symbols = complex_normal(rng, (2,))
        x = zf_precode(g_hat, eta, symbols)
        # Minimum-norm least-squares solve is an independent route to the
        # same pseudo-inverse application.
        expected, *_ = np.linalg.lstsq(g_hat, np.sqrt(eta) * symbols, rcond=None)
        np.testing.assert_allclose(x, expected, rtol=1e-9, atol=1e-12)

    def test_rank_deficient_matrix_rejected(self):
        row = complex_normal(np.random.default_rng(10), (1, 6))
        g_hat = np.vstack([row, row])
        with pytest.raises(RankDeficiencyError) as excinfo:
            zf_precode(g_hat, np.ones(2), np.ones(2, dtype=complex))
        assert excinfo.value.rcond is not None
        assert excinfo.value.rcond < 1e-12

    def test_rejects_more_users_than_aps(self):
        rng = np.random.default_rng(11)
        with pytest.raises(InvalidParameterError):
            zf_precode(random_estimates(rng, 4, 2), np.ones(4), np.ones(4, dtype=complex))

    def test_rejects_non_positive_power(self):
        rng = np.random.default_rng(12)
        with pytest.raises(InvalidParameterError):
            zf_precode(random_estimates(rng, 2, 4), np.array([1.0, 0.0]), np.ones(2, dtype=complex))


class TestEstimateExpectations:
    def test_perfect_estimates_zero_leakage(self):
        rng = np.random.default_rng(13)
        beta = 10 ** rng.uniform(-12, -9, size=(8, 3))
        xi, chi, delta = estimate_expectations(beta, beta, 500, np.random.default_rng(14))
        assert np.all(xi == 0.0)
        assert np.all(chi > 0.0)
        assert np.all(delta > 0.0)

    def test_innovation_dominates_error_leakage(self):
        rng = np.random.default_rng(15)
        beta = 10 ** rng.uniform(-12, -9, size=(8, 3))
        alpha = beta * rng.uniform(0.1, 0.9, size=beta.shape)
        xi, chi, _ = estimate_expectations(beta, alpha, 2000, np.random.default_rng(16))
        assert np.all(chi >= xi)

    def test_self_consistent_across_seeds(self):
        # Independent million-draw runs agree to 1% relative.
        beta = np.array([[1.0, 0.5], [2.0, 0.25], [0.7, 1.2], [1.5, 0.9]])
        alpha = 0.6 * beta
        first = estimate_expectations(beta, alpha, 1_000_000, np.random.default_rng(17))
        second = estimate_expectations(beta, alpha, 1_000_000, np.random.default_rng(18))
        for a, b in zip(first, second):
            np.testing.assert_allclose(a, b, rtol=0.01)

    def test_deterministic_for_fixed_seed(self):
        beta = np.array([[1.0, 0.5], [2.0, 0.25], [0.7, 1.2], [1.5, 0.9]])
        alpha = 0.5 * beta
        a = estimate_expectations(beta, alpha, 3000, np.random.default_rng(19))
        b = estimate_expectations(beta, alpha, 3000, np.random.default_rng(19))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_chunking_only_perturbs_within_monte_carlo_error(self):
        beta = np.array([[1.0, 0.5], [2.0, 0.25], [0.7, 1.2], [1.5, 0.9]])
        alpha = 0.5 * beta
        a = estimate_expectations(beta, alpha, 200_000, np.random.default_rng(20), chunk_size=8192)
        b = estimate_expectations(beta, alpha, 200_000, np.random.default_rng(20), chunk_size=1000)
        for x, y in zip(a, b):
            np.testing.assert_allclose(x, y, rtol=0.05)

    def test_error_leakage_vanishes_with_pilot_power(self):
        rng = np.random.default_rng(21)
        beta = 10 ** rng.uniform(-11, -9, size=(8, 2))
        noise = 1e-13
        previous = None
        for power in (1e-3, 1e-1, 1e1, 1e3):
            alpha = power * beta**2 / (power * beta + noise)
            xi, _, _ = estimate_expectations(beta, alpha, 20000, np.random.default_rng(22))
            total = xi.sum()
            if previous is not None:
                assert total < previous
            previous = total
        assert previous < 1e-3 * beta.min() ** -1  # effectively zero at high power

    def test_persistent_singularity_raises_after_rejection_budget(self):
        # A zero-variance user row can never produce a full-rank Gram matrix.
        beta = np.ones((4, 2))
        alpha = np.array([[1.0, 0.0]] * 4)
        with pytest.raises(RankDeficiencyError, match="1%"):
            estimate_expectations(beta, alpha, 1000, np.random.default_rng(99))

    def test_rejects_invalid_sizes(self):
        with pytest.raises(InvalidParameterError):
            estimate_expectations(np.ones((2, 4)), np.ones((2, 4)), 10, np.random.default_rng(0))
        with pytest.raises(InvalidParameterError):
            estimate_expectations(np.ones((4, 2)), np.ones((4, 2)), 0, np.random.default_rng(0))
        with pytest.raises(InvalidParameterError):
            estimate_expectations(np.ones((4, 2)), 2 * np.ones((4, 2)), 10, np.random.default_rng(0))


class TestPowerControl:
    def test_reciprocal_of_peak_load(self):
        # Column sums per AP: 0.5, 2.0, 1.0.
        delta = np.array([[0.25, 1.5, 0.4], [0.25, 0.5, 0.6]])
        assert power_control_eta(delta) == pytest.approx(0.5)

    def test_homogeneity(self):
        rng = np.random.default_rng(23)
        delta = rng.uniform(0, 1, size=(4, 6))
        base = power_control_eta(delta)
        assert power_control_eta(3.0 * delta) == pytest.approx(base / 3.0)

    def test_all_zero_rejected(self):
        with pytest.raises(DegenerateInputError):
            power_control_eta(np.zeros((4, 6)))

    def test_negative_rejected(self):
        with pytest.raises(InvalidParameterError):
            power_control_eta(np.array([[0.1, -0.2]]))

    def test_per_ap_mean_power_bounded(self):
        # Simulated mean per-AP output never exceeds the unit budget.
        num_users, num_aps, draws = 2, 8, 100_000
        rng = np.random.default_rng(24)
        beta = 10 ** rng.uniform(-2, 0, size=(num_aps, num_users))
        _, _, delta = estimate_expectations(beta, beta, 200_000, np.random.default_rng(25))
        eta = power_control_eta(delta)

        amp = np.sqrt(beta).T
        sim_rng = np.random.default_rng(26)
        totals = np.zeros(num_aps)
        chunk = 20_000
        for start in range(0, draws, chunk):
            n = min(chunk, draws - start)
            g = complex_normal(sim_rng, (n, num_users, num_aps)) * amp
            gram = g @ g.conj().transpose(0, 2, 1)
            symbols = complex_normal(sim_rng, (n, num_users))
            scaled = solve_hermitian_psd(gram, (math.sqrt(eta) * symbols)[..., None])
            x = (g.conj().transpose(0, 2, 1) @ scaled)[..., 0]
            totals += np.square(np.abs(x)).sum(axis=0)
        mean_power = totals / draws
        # The peak AP sits at the constraint; allow 3-sigma of estimation noise.
        assert mean_power.max() <= 1.0 + 3 * mean_power.max() / math.sqrt(draws / 10)
        assert mean_power.max() == pytest.approx(1.0, rel=0.1)


class TestBuildPrecoderState:
    def test_assembles_consistent_state(self):
        rng = np.random.default_rng(27)
        beta = 10 ** rng.uniform(-2, 0, size=(8, 2))
        alpha = 0.8 * beta
        g_hat = np.sqrt(alpha).T * complex_normal(rng, (2, 8))
        state = build_precoder_state(g_hat, beta, alpha, 5000, np.random.default_rng(28))
        np.testing.assert_allclose(g_hat @ state.weights, np.eye(2), atol=1e-10)
        assert state.power_coeffs.shape == (2,)
        assert np.all(state.power_coeffs > 0)
        assert np.all(state.chi >= state.xi)
        assert state.delta.shape == (2, 8)
