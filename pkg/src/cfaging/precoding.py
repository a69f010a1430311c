"""Zero-forcing precoder, power control, and inner Monte Carlo expectations.

The interference and power-control expectations all reduce to statistics of
B = (G_hat G_hat^H)^{-1} G_hat: with S = |B|^2 elementwise,

    delta = E[S]                      (per-user, per-AP weight power)
    xi    = E[S (beta - alpha)]^T     (estimation-error leakage)
    chi   = E[S beta]^T               (innovation leakage)

so one batch of estimate draws serves all three.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aging import complex_normal
from .errors import DegenerateInputError, InvalidParameterError, RankDeficiencyError
from .linalg import cholesky_solve, hermitian_rcond

# Reciprocal-condition floor below which a Gram matrix counts as singular.
RCOND_FLOOR = 1e-12

# Upper bound on elements drawn per chunk, keeping peak memory flat while
# leaving the chunk layout (and hence the random stream layout) fixed for a
# given problem size.
_CHUNK_ELEMENT_BUDGET = 1 << 21


@dataclass(frozen=True)
class PrecoderState:
    """Per-drop precoder artifacts for one estimated channel matrix."""

    g_hat: np.ndarray  # (K, M), row k = user k's estimates
    weights: np.ndarray  # (M, K) zero-forcing weights
    power_coeffs: np.ndarray  # (K,) power-control coefficients
    xi: np.ndarray  # (K, K)
    chi: np.ndarray  # (K, K)
    delta: np.ndarray  # (K, M)


def _gram(g_hat: np.ndarray) -> np.ndarray:
    return g_hat @ np.swapaxes(g_hat, -1, -2).conj()


def zf_weights(g_hat: np.ndarray) -> np.ndarray:
    """Zero-forcing weight matrix W with G_hat @ W = I, shape (M, K)."""
    gram = _gram(g_hat)
    rcond = hermitian_rcond(gram)
    if not (rcond > RCOND_FLOOR):
        raise RankDeficiencyError(
            f"estimated channel matrix is rank deficient (rcond={rcond:.3e})", rcond=rcond
        )
    try:
        solved = cholesky_solve(np.linalg.cholesky(gram), g_hat)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(f"Gram matrix not positive definite: {exc}", rcond=rcond) from exc
    return solved.conj().T


def zf_precode(g_hat: np.ndarray, power_coeffs, symbols) -> np.ndarray:
    """Precode one symbol vector; user k receives sqrt(power_coeffs[k]) * s_k.

    g_hat is (K, M) with K <= M. Raises RankDeficiencyError when the Gram
    matrix is singular or its reciprocal condition falls below RCOND_FLOOR.
    """
    g_hat = np.asarray(g_hat)
    if g_hat.ndim != 2 or g_hat.shape[0] > g_hat.shape[1]:
        raise InvalidParameterError(
            f"g_hat must be (K, M) with K <= M, got {g_hat.shape}"
        )
    eta = np.broadcast_to(np.asarray(power_coeffs, dtype=float), (g_hat.shape[0],))
    if np.any(eta <= 0):
        raise InvalidParameterError("power coefficients must be positive")
    weights = zf_weights(g_hat)
    return weights @ (np.sqrt(eta) * np.asarray(symbols))


def _draw_estimates(rng: np.random.Generator, count: int, amp: np.ndarray) -> np.ndarray:
    """count estimated-channel matrices, entries CN(0, amp^2), shape (count, K, M)."""
    return complex_normal(rng, (count, *amp.shape)) * amp


def estimate_expectations(
    beta: np.ndarray,
    alpha: np.ndarray,
    n_inner: int,
    rng: np.random.Generator,
    chunk_size: int = 8192,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Monte Carlo estimates of (xi, chi, delta) for one drop.

    Averages over n_inner synthetic channel-estimate matrices with entries
    CN(0, alpha). Draws are organized in fixed-size chunks, each fed by its
    own sub-stream of rng, so results are reproducible for a given rng
    regardless of how the reduction is scheduled. Singular draws are
    resampled; more than 1% rejections is an error.
    """
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if beta.shape != alpha.shape:
        raise InvalidParameterError("beta and alpha must have identical shapes")
    if n_inner < 1:
        raise InvalidParameterError("n_inner must be >= 1")
    if np.any(alpha < 0) or np.any(alpha > beta * (1 + 1e-12)):
        raise InvalidParameterError("need 0 <= alpha <= beta elementwise")
    num_aps, num_users = beta.shape
    if num_users > num_aps:
        raise InvalidParameterError("expectations need K <= M")

    err_var = np.maximum(beta - alpha, 0.0)
    amp = np.sqrt(alpha).T  # (K, M) amplitude per estimate entry
    chunk = max(1, min(chunk_size, _CHUNK_ELEMENT_BUDGET // (num_aps * num_users)))
    n_chunks = -(-n_inner // chunk)
    streams = rng.spawn(n_chunks)

    xi_sum = np.zeros((num_users, num_users))
    chi_sum = np.zeros((num_users, num_users))
    delta_sum = np.zeros((num_users, num_aps))
    rejected = 0
    max_rejected = max(1, int(0.01 * n_inner))

    done = 0
    for stream in streams:
        count = min(chunk, n_inner - done)
        g = _draw_estimates(stream, count, amp)
        gram = _gram(g)
        chol, bad = _cholesky_with_screening(gram)
        while bad.size:
            rejected += bad.size
            if rejected > max_rejected:
                raise RankDeficiencyError(
                    f"more than 1% of inner draws were singular ({rejected}/{n_inner})"
                )
            g[bad] = _draw_estimates(stream, bad.size, amp)
            gram[bad] = _gram(g[bad])
            chol_bad, still_bad = _cholesky_with_screening(gram[bad])
            chol[bad] = chol_bad
            bad = bad[still_bad]
        b = cholesky_solve(chol, g)
        weight_power = np.square(np.abs(b))  # (count, K, M)
        delta_sum += weight_power.sum(axis=0)
        xi_sum += (weight_power @ err_var).sum(axis=0).T
        chi_sum += (weight_power @ beta).sum(axis=0).T
        done += count

    return xi_sum / n_inner, chi_sum / n_inner, delta_sum / n_inner


def _cholesky_with_screening(gram: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched Cholesky plus an ill-conditioning screen.

    Returns (factors, indices of draws to resample). Failed factorizations
    get identity placeholders at the flagged indices.
    """
    count, order = gram.shape[0], gram.shape[-1]
    try:
        chol = np.linalg.cholesky(gram)
        failed = np.zeros(count, dtype=bool)
    except np.linalg.LinAlgError:
        chol = np.empty_like(gram)
        failed = np.zeros(count, dtype=bool)
        eye = np.eye(order, dtype=gram.dtype)
        for i in range(count):
            try:
                chol[i] = np.linalg.cholesky(gram[i])
            except np.linalg.LinAlgError:
                chol[i] = eye
                failed[i] = True
    diag = np.einsum("...ii->...i", chol).real
    with np.errstate(divide="ignore", invalid="ignore"):
        rcond_proxy = np.square(diag.min(axis=-1) / diag.max(axis=-1))
    bad = failed | ~(rcond_proxy > RCOND_FLOOR)
    return chol, np.flatnonzero(bad)


def power_control_eta(delta: np.ndarray) -> float:
    """Common power coefficient keeping every AP's mean output power at or below one.

    delta is (K, M); the coefficient is the reciprocal of the largest per-AP
    column sum.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise InvalidParameterError("delta entries must be non-negative")
    per_ap_load = delta.sum(axis=0)
    peak = per_ap_load.max() if per_ap_load.size else 0.0
    if not peak > 0:
        raise DegenerateInputError("all-zero delta: no AP carries any weight power")
    return 1.0 / float(peak)


def build_precoder_state(
    g_hat: np.ndarray,
    beta: np.ndarray,
    alpha: np.ndarray,
    n_inner: int,
    rng: np.random.Generator,
) -> PrecoderState:
    """Assemble weights, expectations, and power control for one drop.

    g_hat is (K, M) (user-major); beta/alpha are (M, K) link-major.
    """
    xi, chi, delta = estimate_expectations(beta, alpha, n_inner, rng)
    eta = power_control_eta(delta)
    return PrecoderState(
        g_hat=g_hat,
        weights=zf_weights(g_hat),
        power_coeffs=np.full(g_hat.shape[0], eta),
        xi=xi,
        chi=chi,
        delta=delta,
    )
