import math

import numpy as np
import pytest

from cfaging.aging import correlation_coefficient
from cfaging.config import SystemConfig
from cfaging.errors import DegenerateInputError, InvalidParameterError
from cfaging.performance import (
    cdf_and_percentiles,
    simulate_received,
    sinr_closed_form,
    spectral_efficiency,
)
from cfaging.precoding import estimate_expectations, power_control_eta
from cfaging.propagation import draw_large_scale
from cfaging.training import assign_pilots, mmse_variances


def make_drop(num_aps, num_users, seed):
    cfg = SystemConfig(
        num_aps=num_aps,
        num_users=num_users,
        pilot_length=num_users,
        area_side_km=0.5,
    )
    drop = draw_large_scale(cfg, np.random.default_rng(seed))
    return cfg, drop


def closed_form_inputs(cfg, drop, n_inner, seed, pilot_energy=None):
    noise = cfg.noise_variance_w()
    plan = assign_pilots(cfg.num_users, cfg.pilot_length)
    energy = cfg.pilot_energy_w() if pilot_energy is None else pilot_energy
    alpha = mmse_variances(drop.beta, plan, energy, noise)
    xi, chi, delta = estimate_expectations(drop.beta, alpha, n_inner, np.random.default_rng(seed))
    eta = power_control_eta(delta)
    return plan, alpha, xi, chi, eta, noise, energy


class TestSinrClosedForm:
    def test_pure_snr_limit(self):
        # No aging, no estimation error, no oscillator drift.
        gamma = sinr_closed_form(1.0, 2.5e-10, np.zeros((3, 3)), np.ones((3, 3)), 1e-12, 0.2, 1.0)
        np.testing.assert_allclose(gamma, 0.2 * 2.5e-10 / 1e-12)

    def test_vanishing_correlation_kills_signal(self):
        gamma = sinr_closed_form(0.0, 1.0, np.ones((2, 2)), np.ones((2, 2)), 1e-3, 0.2)
        np.testing.assert_array_equal(gamma, np.zeros(2))

    def test_monotone_in_correlation(self):
        rng = np.random.default_rng(0)
        xi = rng.uniform(0, 1e-10, size=(4, 4))
        chi = xi + rng.uniform(0, 1e-9, size=(4, 4))
        values = []
        for rho in np.linspace(0, 1, 21):
            gamma = sinr_closed_form(rho, 1e-9, xi, chi, 1e-13, 0.2)
            values.append(gamma.min())
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_monotone_in_attenuation(self):
        rng = np.random.default_rng(1)
        xi = rng.uniform(0, 1e-10, size=(4, 4))
        chi = xi + rng.uniform(0, 1e-9, size=(4, 4))
        values = []
        for att in np.linspace(0.05, 1.0, 20):
            gamma = sinr_closed_form(0.9, 1e-9, xi, chi, 1e-13, 0.2, att)
            values.append(gamma.sum())
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_rejects_bad_attenuation(self):
        with pytest.raises(InvalidParameterError):
            sinr_closed_form(1.0, 1.0, np.zeros((1, 1)), np.zeros((1, 1)), 1e-3, 0.2, 0.0)
        with pytest.raises(InvalidParameterError):
            sinr_closed_form(1.0, 1.0, np.zeros((1, 1)), np.zeros((1, 1)), 1e-3, 0.2, 1.5)


class TestSpectralEfficiency:
    def test_ten_percent_overhead(self):
        assert spectral_efficiency(1.0, 10, 10, 200) == pytest.approx(0.9)

    def test_full_overhead_gives_zero(self):
        assert spectral_efficiency(100.0, 100, 100, 200) == 0.0

    def test_overhead_beyond_block_rejected(self):
        with pytest.raises(InvalidParameterError):
            spectral_efficiency(1.0, 150, 100, 200)

    def test_benchmark_median_inversion(self):
        # Median rate 5.7 bit/s/Hz at 10% overhead implies SINR near 79.6.
        gamma = 2 ** (5.7 / 0.9) - 1
        assert gamma == pytest.approx(79.6, abs=0.1)
        assert spectral_efficiency(gamma, 0, 20000, 200000) == pytest.approx(5.7, abs=1e-12)


class TestCdfAndPercentiles:
    def test_uniform_grid(self):
        cdf = cdf_and_percentiles(np.arange(1.0, 101.0))
        assert cdf.q50 == pytest.approx(50.5)
        assert cdf.q05 == pytest.approx(5.95)

    def test_constant_samples(self):
        cdf = cdf_and_percentiles([3.0, 3.0, 3.0])
        assert cdf.q05 == 3.0 and cdf.q50 == 3.0

    def test_cdf_shape(self):
        cdf = cdf_and_percentiles([5.0, 1.0, 4.0, 2.0])
        assert np.all(np.diff(cdf.values) >= 0)
        assert np.all(np.diff(cdf.probs) > 0)
        assert cdf.probs[-1] == 1.0

    def test_empty_rejected(self):
        with pytest.raises(DegenerateInputError):
            cdf_and_percentiles([])


class TestSimulateReceived:
    def test_no_aging_no_error_means_no_interference(self):
        cfg, drop = make_drop(8, 2, seed=100)
        plan = assign_pilots(2, 2)
        stats = simulate_received(
            drop,
            plan,
            1e-9,
            1.0,
            tx_power_ap=cfg.tx_power_ap_w,
            tx_power_ue=cfg.pilot_energy_w(),
            noise_var=0.0,
            n_blocks=200,
            rng=np.random.default_rng(101),
        )
        assert np.all(stats.est_error < 1e-25 * stats.desired)
        assert np.all(stats.innovation == 0.0)

    def test_decomposition_matches_received_signal(self):
        cfg, drop = make_drop(8, 4, seed=102)
        plan, alpha, xi, chi, eta, noise, energy = closed_form_inputs(cfg, drop, 2000, 103)
        stats = simulate_received(
            drop,
            plan,
            eta,
            0.9,
            tx_power_ap=cfg.tx_power_ap_w,
            tx_power_ue=energy,
            noise_var=noise,
            n_blocks=2000,
            rng=np.random.default_rng(104),
            ap_phase_var=0.05,
            ue_phase_var=0.05,
            check_identity=True,
        )
        assert stats.identity_error < 1e-10

    def test_term_powers_match_closed_form(self):
        # Means of the two leakage terms against their predicted values.
        cfg, drop = make_drop(8, 2, seed=105)
        plan, alpha, xi, chi, eta, noise, energy = closed_form_inputs(cfg, drop, 100_000, 106)
        rho = correlation_coefficient(30.0, cfg.carrier_freq_hz, 1e-3)
        stats = simulate_received(
            drop,
            plan,
            eta,
            rho,
            tx_power_ap=cfg.tx_power_ap_w,
            tx_power_ue=energy,
            noise_var=noise,
            n_blocks=100_000,
            rng=np.random.default_rng(107),
        )
        p_d = cfg.tx_power_ap_w
        eta_vec = np.full(cfg.num_users, eta)
        predicted_err = p_d * rho**2 * (xi @ eta_vec)
        predicted_innov = p_d * (1 - rho**2) * (chi @ eta_vec)
        np.testing.assert_allclose(stats.est_error, predicted_err, rtol=0.03)
        np.testing.assert_allclose(stats.innovation, predicted_innov, rtol=0.03)
        np.testing.assert_allclose(stats.desired, p_d * eta * rho**2, rtol=0.02)

    def test_sinr_matches_closed_form(self):
        cfg, drop = make_drop(8, 4, seed=108)
        plan, alpha, xi, chi, eta, noise, energy = closed_form_inputs(cfg, drop, 20_000, 109)
        rho = 0.95
        gamma = sinr_closed_form(rho, eta, xi, chi, noise, cfg.tx_power_ap_w)
        stats = simulate_received(
            drop,
            plan,
            eta,
            rho,
            tx_power_ap=cfg.tx_power_ap_w,
            tx_power_ue=energy,
            noise_var=noise,
            n_blocks=50_000,
            rng=np.random.default_rng(110),
        )
        np.testing.assert_allclose(stats.sinr, gamma, rtol=0.05)

    def test_ue_drift_cancels_in_term_powers(self):
        # The user-side drift factor has unit modulus; with matched draws the
        # term powers coincide to rounding error.
        cfg, drop = make_drop(8, 2, seed=111)
        plan = assign_pilots(2, 2)
        kwargs = dict(
            tx_power_ap=cfg.tx_power_ap_w,
            tx_power_ue=cfg.pilot_energy_w(),
            noise_var=cfg.noise_variance_w(),
            n_blocks=4000,
            ap_phase_var=0.02,
        )
        without = simulate_received(
            drop, plan, 1e-9, 0.9, rng=np.random.default_rng(112), ue_phase_var=0.0, **kwargs
        )
        with_drift = simulate_received(
            drop, plan, 1e-9, 0.9, rng=np.random.default_rng(112), ue_phase_var=2.0, **kwargs
        )
        np.testing.assert_allclose(without.desired, with_drift.desired, rtol=1e-12)
        np.testing.assert_allclose(without.est_error, with_drift.est_error, rtol=1e-12)
        np.testing.assert_allclose(without.innovation, with_drift.innovation, rtol=1e-12)
        np.testing.assert_allclose(without.sinr, with_drift.sinr, rtol=1e-12)

    def test_terms_mutually_uncorrelated(self):
        # Cross-correlations between the received-signal components vanish.
        cfg, drop = make_drop(8, 4, seed=113)
        plan = assign_pilots(4, 4)
        noise = cfg.noise_variance_w()
        rng = np.random.default_rng(114)
        # Rebuild the term samples directly from one batch of blocks.
        from cfaging.aging import complex_normal
        from cfaging.linalg import solve_hermitian_psd

        n = 40_000
        beta = drop.beta
        sqrt_beta = np.sqrt(beta)
        rho = 0.9
        h_p = complex_normal(rng, (n, 8, 4))
        g_p = sqrt_beta * h_p
        from cfaging.training import mmse_estimate, pilot_observe

        y = pilot_observe(g_p, plan, cfg.pilot_energy_w(), noise, rng)
        est = mmse_estimate(y, beta, plan, cfg.pilot_energy_w(), noise)
        g_err = g_p - est.g_hat
        innov = complex_normal(rng, (n, 8, 4))
        symbols = complex_normal(rng, (n, 4))
        z = complex_normal(rng, (n, 4)) * math.sqrt(noise)
        rows = np.swapaxes(est.g_hat, -1, -2)
        gram = rows @ np.swapaxes(rows, -1, -2).conj()
        x = (np.swapaxes(rows, -1, -2).conj() @ solve_hermitian_psd(gram, symbols[..., None]))[..., 0]
        d_term = rho * np.einsum("nmk,nm->nk", est.g_hat, x)
        i1 = rho * np.einsum("nmk,nm->nk", g_err, x)
        i2 = math.sqrt(1 - rho**2) * np.einsum("nmk,nm->nk", sqrt_beta * innov, x)
        for a, b in ((d_term, i1), (d_term, i2), (i1, i2), (d_term, z), (i1, z), (i2, z)):
            cross = (a * np.conj(b)).ravel()
            std_err = cross.real.std() / math.sqrt(cross.size) + 1e-300
            assert abs(cross.mean().real) < 4 * std_err

    def test_user_result_packaging(self):
        cfg, drop = make_drop(4, 2, seed=120)
        plan = assign_pilots(2, 2)
        stats = simulate_received(
            drop, plan, 1e-9, 0.9,
            tx_power_ap=cfg.tx_power_ap_w, tx_power_ue=cfg.pilot_energy_w(),
            noise_var=cfg.noise_variance_w(), n_blocks=100,
            rng=np.random.default_rng(121),
        )
        rate = float(spectral_efficiency(stats.sinr[0], 0, 20000, 200000))
        result = stats.user_result(0, rate)
        assert result.gamma == stats.sinr[0]
        assert result.terms.noise == cfg.noise_variance_w()
        assert result.terms.desired == stats.desired[0]

    def test_rejects_bad_arguments(self):
        cfg, drop = make_drop(4, 2, seed=115)
        plan = assign_pilots(2, 2)
        with pytest.raises(InvalidParameterError):
            simulate_received(
                drop, plan, 1.0, 1.5,
                tx_power_ap=0.2, tx_power_ue=0.1, noise_var=1e-13,
                n_blocks=10, rng=np.random.default_rng(0),
            )
        with pytest.raises(InvalidParameterError):
            simulate_received(
                drop, plan, 1.0, 0.5,
                tx_power_ap=0.2, tx_power_ue=0.1, noise_var=1e-13,
                n_blocks=0, rng=np.random.default_rng(0),
            )
