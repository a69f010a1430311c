"""Node placement, three-slope path loss, shadowing, and large-scale gains."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import InvalidParameterError


@dataclass(frozen=True)
class LargeScaleState:
    """One drop: geometry plus the resulting link gains.

    Positions are in km; path loss and shadowing in dB; beta is the linear
    power gain 10^((PL + X)/10) per (AP, user) pair.
    """

    ap_positions: np.ndarray  # (M, 2)
    ue_positions: np.ndarray  # (K, 2)
    path_loss_db: np.ndarray  # (M, K)
    shadowing_db: np.ndarray  # (M, K)
    beta: np.ndarray  # (M, K)

    @property
    def num_aps(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def num_users(self) -> int:
        return self.ue_positions.shape[0]

    def distances_km(self) -> np.ndarray:
        diff = self.ap_positions[:, None, :] - self.ue_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


def place_nodes(config: SystemConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Drop APs and users independently and uniformly over the square."""
    side = config.area_side_km
    ap_positions = rng.uniform(0.0, side, size=(config.num_aps, 2))
    ue_positions = rng.uniform(0.0, side, size=(config.num_users, 2))
    return ap_positions, ue_positions


def path_loss_db(d_km, intercept_db: float, d0_km: float, d1_km: float):
    """Three-slope path loss in dB (negative gain) at distance d_km.

    Inner region (d <= d0) is clamped, the middle region follows a
    35 dB/decade-equivalent mixed slope, and beyond d1 the slope is
    35 dB/decade. Accepts scalars or arrays.
    """
    if not (0 < d0_km < d1_km):
        raise InvalidParameterError(f"need 0 < d0 < d1, got d0={d0_km}, d1={d1_km}")
    d = np.asarray(d_km, dtype=float)
    if np.any(d < 0):
        raise InvalidParameterError("distances must be non-negative")
    inner = -intercept_db - 10.0 * np.log10(d1_km**1.5 * d0_km**2)
    middle = -intercept_db - 10.0 * np.log10(d1_km**1.5 * np.square(np.maximum(d, d0_km)))
    outer = -intercept_db - 35.0 * np.log10(np.maximum(d, d0_km))
    result = np.where(d <= d0_km, inner, np.where(d <= d1_km, middle, outer))
    if np.isscalar(d_km):
        return float(result)
    return result


def draw_large_scale(config: SystemConfig, rng: np.random.Generator) -> LargeScaleState:
    """Generate one drop: positions, path loss, shadowing, and beta."""
    ap_positions, ue_positions = place_nodes(config, rng)
    diff = ap_positions[:, None, :] - ue_positions[None, :, :]
    distances = np.hypot(diff[..., 0], diff[..., 1])
    pl = path_loss_db(distances, config.path_loss_intercept_db(), config.d0_km, config.d1_km)
    shadowing = rng.normal(0.0, config.shadow_std_db, size=distances.shape)
    beta = 10.0 ** ((pl + shadowing) / 10.0)
    return LargeScaleState(
        ap_positions=ap_positions,
        ue_positions=ue_positions,
        path_loss_db=pl,
        shadowing_db=shadowing,
        beta=beta,
    )


def write_drop_csv(state: LargeScaleState, nodes_path, links_path) -> None:
    """Dump one drop as two CSV files: node coordinates and per-link gains."""
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_type", "index", "x_km", "y_km"])
        for i, (x, y) in enumerate(state.ap_positions):
            writer.writerow(["ap", i, repr(float(x)), repr(float(y))])
        for i, (x, y) in enumerate(state.ue_positions):
            writer.writerow(["ue", i, repr(float(x)), repr(float(y))])
    distances = state.distances_km()
    with open(links_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["m", "k", "d_km", "PL_dB", "X_dB", "beta"])
        for m in range(state.num_aps):
            for k in range(state.num_users):
                writer.writerow([
                    m,
                    k,
                    repr(float(distances[m, k])),
                    repr(float(state.path_loss_db[m, k])),
                    repr(float(state.shadowing_db[m, k])),
                    repr(float(state.beta[m, k])),
                ])
