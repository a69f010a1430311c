"""Closed-form effective SINR and the brute-force received-signal oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aging import complex_normal
from .errors import DegenerateInputError, InvalidParameterError
from .linalg import cholesky_solve
from .propagation import LargeScaleState
from .training import PilotPlan, mmse_estimate, pilot_observe

_ORACLE_ELEMENT_BUDGET = 1 << 21


def sinr_closed_form(
    rho,
    power_coeffs,
    xi: np.ndarray,
    chi: np.ndarray,
    noise_var: float,
    tx_power_ap: float,
    attenuation: float = 1.0,
) -> np.ndarray:
    """Per-user effective SINR of the aged zero-forcing downlink.

    rho and power_coeffs may be scalars or per-user vectors; xi and chi are
    the (K, K) leakage expectations. attenuation is the hardened oscillator
    drift factor applied to the desired signal, so the noise is effectively
    scaled by 1/attenuation^2.
    """
    num_users = xi.shape[0]
    rho_arr = np.broadcast_to(np.asarray(rho, dtype=float), (num_users,))
    eta = np.broadcast_to(np.asarray(power_coeffs, dtype=float), (num_users,))
    if np.any(np.abs(rho_arr) > 1.0):
        raise InvalidParameterError("correlation coefficients must lie in [-1, 1]")
    if np.any(eta <= 0):
        raise InvalidParameterError("power coefficients must be positive")
    if not (0.0 < attenuation <= 1.0):
        raise InvalidParameterError(f"attenuation must lie in (0, 1], got {attenuation}")
    if np.any(np.asarray(xi) < 0) or np.any(np.asarray(chi) < 0):
        raise InvalidParameterError("xi and chi must be entrywise non-negative")
    if tx_power_ap <= 0:
        raise InvalidParameterError("tx_power_ap must be positive")

    rho_sq = np.square(rho_arr)
    denominator = (
        rho_sq * (xi @ eta)
        + (1.0 - rho_sq) * (chi @ eta)
        + noise_var / (tx_power_ap * attenuation**2)
    )
    return rho_sq * eta / denominator


def spectral_efficiency(gamma, air_delay_samples: int, csi_delay_samples: int, block_length: int):
    """Achievable rate in bit/s/Hz after discounting the per-block overhead."""
    if block_length <= 0:
        raise InvalidParameterError("block_length must be positive")
    overhead = air_delay_samples + csi_delay_samples
    if overhead < 0:
        raise InvalidParameterError("overhead samples must be non-negative")
    if overhead > block_length:
        raise InvalidParameterError(
            f"overhead ({overhead} symbols) exceeds the block length ({block_length})"
        )
    prefactor = 1.0 - overhead / block_length
    return prefactor * np.log2(1.0 + np.asarray(gamma, dtype=float))


@dataclass(frozen=True)
class TermPowers:
    """Mean squared magnitudes of the received-signal components, in watts."""

    desired: float
    est_error: float
    innovation: float
    noise: float


@dataclass(frozen=True)
class UserResult:
    """Effective SINR and spectral efficiency of one user in one drop."""

    gamma: float
    rate: float
    terms: TermPowers | None = None


@dataclass(frozen=True)
class ReceivedStats:
    """Per-user term powers and empirical SINR from the signal-level oracle."""

    desired: np.ndarray  # (K,) mean |desired term|^2
    est_error: np.ndarray  # (K,) mean |estimation-error term|^2
    innovation: np.ndarray  # (K,) mean |innovation term|^2
    noise: float
    sinr: np.ndarray  # (K,)
    identity_error: float | None = None

    def term_powers(self, user: int) -> TermPowers:
        return TermPowers(
            desired=float(self.desired[user]),
            est_error=float(self.est_error[user]),
            innovation=float(self.innovation[user]),
            noise=self.noise,
        )

    def user_result(self, user: int, rate: float) -> UserResult:
        return UserResult(
            gamma=float(self.sinr[user]), rate=float(rate), terms=self.term_powers(user)
        )


def simulate_received(
    large_scale: LargeScaleState,
    plan: PilotPlan,
    power_coeffs,
    rho,
    *,
    tx_power_ap: float,
    tx_power_ue: float,
    noise_var: float,
    n_blocks: int,
    rng: np.random.Generator,
    ap_phase_var: float = 0.0,
    ue_phase_var: float = 0.0,
    check_identity: bool = False,
) -> ReceivedStats:
    """Brute-force the downlink received signal over n_blocks coherence blocks.

    Every block redraws fading, runs the actual training chain, ages the
    channel, applies per-draw oscillator drifts accumulated over the CSI
    delay (variances ap_phase_var / ue_phase_var), precodes one fresh unit
    symbol vector, and splits the received sample into desired,
    estimation-error, innovation, and noise components. The empirical SINR
    is mean|desired|^2 / (mean|err|^2 + mean|innov|^2 + noise_var).

    With check_identity the per-sample sum of the four components is
    compared against the directly computed received signal and the largest
    relative deviation is reported.
    """
    if n_blocks < 1:
        raise InvalidParameterError("n_blocks must be >= 1")
    if ap_phase_var < 0 or ue_phase_var < 0:
        raise InvalidParameterError("phase drift variances must be non-negative")
    beta = large_scale.beta
    num_aps, num_users = beta.shape
    if plan.num_users != num_users:
        raise InvalidParameterError(
            f"pilot plan covers {plan.num_users} users but the drop has {num_users}"
        )
    rho_arr = np.broadcast_to(np.asarray(rho, dtype=float), (num_users,))
    if np.any(np.abs(rho_arr) > 1.0):
        raise InvalidParameterError("correlation coefficients must lie in [-1, 1]")
    eta = np.broadcast_to(np.asarray(power_coeffs, dtype=float), (num_users,))

    sqrt_beta = np.sqrt(beta)
    innovation_weight = np.sqrt(1.0 - np.square(rho_arr))
    amp = math.sqrt(tx_power_ap)
    root_eta = np.sqrt(eta)

    chunk = max(1, min(4096, _ORACLE_ELEMENT_BUDGET // (num_aps * num_users)))
    desired_sum = np.zeros(num_users)
    err_sum = np.zeros(num_users)
    innov_sum = np.zeros(num_users)
    identity_err = 0.0

    done = 0
    while done < n_blocks:
        n = min(chunk, n_blocks - done)
        h_pilot = complex_normal(rng, (n, num_aps, num_users))
        g_pilot = sqrt_beta * h_pilot
        observations = pilot_observe(g_pilot, plan, tx_power_ue, noise_var, rng)
        est = mmse_estimate(observations, beta, plan, tx_power_ue, noise_var)
        g_err = g_pilot - est.g_hat

        innovation = complex_normal(rng, (n, num_aps, num_users))
        ap_drift = rng.normal(0.0, math.sqrt(ap_phase_var), size=(n, num_aps))
        ue_drift = rng.normal(0.0, math.sqrt(ue_phase_var), size=(n, num_users))
        ap_factor = np.exp(1j * ap_drift)
        ue_factor = np.exp(1j * ue_drift)

        symbols = complex_normal(rng, (n, num_users))
        rx_noise = complex_normal(rng, (n, num_users)) * math.sqrt(noise_var)

        g_hat_rows = np.swapaxes(est.g_hat, -1, -2)  # (n, K, M)
        gram = g_hat_rows @ np.swapaxes(g_hat_rows, -1, -2).conj()
        chol = np.linalg.cholesky(gram)
        scaled = cholesky_solve(chol, (root_eta * symbols)[..., None])
        precoded = (np.swapaxes(g_hat_rows, -1, -2).conj() @ scaled)[..., 0]  # (n, M)

        drifted = ap_factor * precoded  # (n, M)
        desired = amp * ue_factor * rho_arr * np.einsum("nmk,nm->nk", est.g_hat, drifted)
        err_term = amp * ue_factor * rho_arr * np.einsum("nmk,nm->nk", g_err, drifted)
        innov_term = (
            amp
            * ue_factor
            * innovation_weight
            * np.einsum("nmk,nm->nk", sqrt_beta * innovation, drifted)
        )

        if check_identity:
            h_data = rho_arr * h_pilot + innovation_weight * innovation
            g_data = sqrt_beta * h_data * ap_factor[:, :, None] * ue_factor[:, None, :]
            received = amp * np.einsum("nmk,nm->nk", g_data, precoded) + rx_noise
            reconstructed = desired + err_term + innov_term + rx_noise
            scale = np.abs(received).max() + np.finfo(float).tiny
            identity_err = max(identity_err, float(np.abs(reconstructed - received).max() / scale))

        desired_sum += np.square(np.abs(desired)).sum(axis=0)
        err_sum += np.square(np.abs(err_term)).sum(axis=0)
        innov_sum += np.square(np.abs(innov_term)).sum(axis=0)
        done += n

    desired_mean = desired_sum / n_blocks
    err_mean = err_sum / n_blocks
    innov_mean = innov_sum / n_blocks
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = desired_mean / (err_mean + innov_mean + noise_var)
    return ReceivedStats(
        desired=desired_mean,
        est_error=err_mean,
        innovation=innov_mean,
        noise=float(noise_var),
        sinr=sinr,
        identity_error=identity_err if check_identity else None,
    )


@dataclass(frozen=True)
class EmpiricalCdf:
    """Sorted sample values with their cumulative probabilities."""

    values: np.ndarray
    probs: np.ndarray
    q05: float
    q50: float


def cdf_and_percentiles(samples) -> EmpiricalCdf:
    """Empirical CDF plus linear-interpolation 5% and 50% quantiles."""
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    if values.size == 0:
        raise DegenerateInputError("cannot summarize an empty sample set")
    probs = np.arange(1, values.size + 1) / values.size
    q05, q50 = np.quantile(values, [0.05, 0.50])
    return EmpiricalCdf(values=values, probs=probs, q05=float(q05), q50=float(q50))
