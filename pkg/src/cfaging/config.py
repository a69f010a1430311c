"""System parameters, unit conventions, and derived protocol constants.

Distance/frequency conventions follow the three-slope COST-Hata model:
distances in km, carrier frequency in MHz inside every log term. All
powers are watts, all delays seconds, all per-symbol quantities use the
configured symbol period.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, asdict

import numpy as np

from .errors import ConfigError, InvalidParameterError

BOLTZMANN_J_PER_K = 1.380649e-23
SPEED_OF_LIGHT_M_PER_S = 299792458.0

# Relative slack used when a delay/period ratio lands a rounding error away
# from an integer; a plain ceil would otherwise overcount by one sample.
_CEIL_SNAP_RTOL = 1e-9


def _snapped_ceil(ratio: float) -> int:
    nearest = round(ratio)
    if abs(ratio - nearest) <= _CEIL_SNAP_RTOL * max(1.0, abs(ratio)):
        return int(nearest)
    return int(math.ceil(ratio))


def cost_hata_intercept_db(freq_mhz: float, ap_height_m: float, ue_height_m: float) -> float:
    """Fixed-loss term of the three-slope path-loss model, in dB.

    Expects the carrier frequency in MHz and antenna heights in metres.
    """
    if freq_mhz <= 0 or ap_height_m <= 0 or ue_height_m <= 0:
        raise InvalidParameterError(
            f"frequency and antenna heights must be positive, got "
            f"({freq_mhz}, {ap_height_m}, {ue_height_m})"
        )
    log_f = math.log10(freq_mhz)
    return (
        46.3
        + 33.9 * log_f
        - 13.82 * math.log10(ap_height_m)
        - (1.1 * log_f - 0.7) * ue_height_m
        + 1.56 * log_f
        - 0.8
    )


def delay_to_samples(delay_s: float, symbol_period_s: float) -> int:
    """Number of symbol periods covering a delay (ceiling)."""
    if symbol_period_s <= 0:
        raise InvalidParameterError(f"symbol period must be positive, got {symbol_period_s}")
    if delay_s < 0:
        raise InvalidParameterError(f"delay must be non-negative, got {delay_s}")
    return _snapped_ceil(delay_s / symbol_period_s)


def noise_variance(bandwidth_hz: float, temperature_k: float, noise_figure_db: float) -> float:
    """Thermal noise power k*B*T scaled by the linear noise figure, in watts."""
    if bandwidth_hz <= 0 or temperature_k <= 0:
        raise InvalidParameterError(
            f"bandwidth and temperature must be positive, got ({bandwidth_hz}, {temperature_k})"
        )
    return BOLTZMANN_J_PER_K * bandwidth_hz * temperature_k * 10.0 ** (noise_figure_db / 10.0)


def phase_increment_variance(carrier_freq_hz: float, osc_const_s: float, symbol_period_s: float) -> float:
    """Per-symbol variance of the oscillator phase random walk, in rad^2."""
    if carrier_freq_hz < 0 or osc_const_s < 0 or symbol_period_s < 0:
        raise InvalidParameterError("phase-noise arguments must be non-negative")
    return 4.0 * math.pi**2 * carrier_freq_hz * osc_const_s * symbol_period_s


def accumulated_phase_variance_from_label(label_deg: float, mapping: str = "std") -> float:
    """Accumulated phase variance (rad^2) over the CSI delay for a degree label.

    "std": the label is the accumulated standard deviation in degrees.
    "variance": the label, converted to radians, is the variance itself.
    """
    if label_deg < 0:
        raise InvalidParameterError(f"phase label must be non-negative, got {label_deg}")
    if mapping == "std":
        return math.radians(label_deg) ** 2
    if mapping == "variance":
        return math.radians(label_deg)
    raise InvalidParameterError(f"unknown phase label mapping {mapping!r}")


@dataclass(frozen=True)
class DelayBudget:
    """Per-stage decomposition of the gap between channel sounding and transmission.

    All components in seconds; the CSI age is their sum.
    """

    t_pilot_s: float = 0.0
    t_estimation_s: float = 0.0
    t_fronthaul_up_s: float = 0.0
    t_precoding_s: float = 0.0
    t_fronthaul_down_s: float = 0.0
    t_tx_prep_s: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value < 0:
                raise InvalidParameterError(f"delay component {f.name} must be >= 0, got {value}")

    @property
    def total_s(self) -> float:
        return (
            self.t_pilot_s
            + self.t_estimation_s
            + self.t_fronthaul_up_s
            + self.t_precoding_s
            + self.t_fronthaul_down_s
            + self.t_tx_prep_s
        )

    @classmethod
    def from_total(cls, total_s: float) -> "DelayBudget":
        # Lumped into a single component so the total survives float round-trips.
        return cls(t_fronthaul_up_s=total_s)


@dataclass(frozen=True)
class SystemConfig:
    """All physical and protocol parameters of one deployment.

    Immutable after construction; safe to share across parallel workers.
    """

    area_side_km: float = 1.0
    num_aps: int = 128
    num_users: int = 16
    carrier_freq_mhz: float = 1900.0
    ap_height_m: float = 15.0
    ue_height_m: float = 1.65
    d0_km: float = 0.01
    d1_km: float = 0.05
    shadow_std_db: float = 8.0
    tx_power_ap_w: float = 0.2
    tx_power_ue_w: float = 0.1
    bandwidth_hz: float = 20e6
    noise_temp_k: float = 290.0
    noise_figure_db: float = 9.0
    symbol_period_s: float = 5e-8
    pilot_length: int | None = None
    coherent_pilot_gain: bool = True
    block_length: int | None = None
    air_delay_samples: int = 0
    overhead_ratio: float | None = 0.1
    ue_speeds_kmh: float | tuple[float, ...] = 0.0
    ap_osc_const_s: float = 0.0
    ue_osc_const_s: float = 0.0
    phase_std_deg: float | None = None
    phase_label_mapping: str = "std"
    pilot_policy: str = "round_robin"
    delay: DelayBudget = field(default_factory=lambda: DelayBudget.from_total(1e-3))

    def __post_init__(self):
        if self.num_aps < 1 or self.num_users < 1:
            raise InvalidParameterError("num_aps and num_users must be >= 1")
        if self.num_users > self.num_aps:
            raise InvalidParameterError(
                f"zero-forcing needs num_users <= num_aps, got K={self.num_users}, M={self.num_aps}"
            )
        if self.area_side_km <= 0:
            raise InvalidParameterError("area_side_km must be positive")
        diagonal = math.sqrt(2.0) * self.area_side_km
        if not (0 < self.d0_km < self.d1_km < diagonal):
            raise InvalidParameterError(
                f"break points must satisfy 0 < d0 < d1 < area diagonal, got "
                f"d0={self.d0_km}, d1={self.d1_km}, diagonal={diagonal:.4f}"
            )
        for name in ("carrier_freq_mhz", "ap_height_m", "ue_height_m", "tx_power_ap_w",
                     "tx_power_ue_w", "bandwidth_hz", "noise_temp_k", "symbol_period_s"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")
        for name in ("shadow_std_db", "noise_figure_db", "ap_osc_const_s", "ue_osc_const_s"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be non-negative")
        if self.phase_std_deg is not None and self.phase_std_deg < 0:
            raise InvalidParameterError("phase_std_deg must be non-negative")
        if self.phase_label_mapping not in ("std", "variance"):
            raise InvalidParameterError(f"unknown phase_label_mapping {self.phase_label_mapping!r}")
        if self.pilot_policy not in ("round_robin", "random"):
            raise InvalidParameterError(f"unknown pilot_policy {self.pilot_policy!r}")
        if self.air_delay_samples < 0:
            raise InvalidParameterError("air_delay_samples must be non-negative")

        if isinstance(self.ue_speeds_kmh, (list, tuple, np.ndarray)):
            speeds = tuple(float(v) for v in self.ue_speeds_kmh)
            if len(speeds) != self.num_users:
                raise InvalidParameterError(
                    f"ue_speeds_kmh needs one entry per user ({self.num_users}), got {len(speeds)}"
                )
            object.__setattr__(self, "ue_speeds_kmh", speeds)
        else:
            object.__setattr__(self, "ue_speeds_kmh", float(self.ue_speeds_kmh))
        speeds = np.atleast_1d(np.asarray(self.ue_speeds_kmh, dtype=float))
        if np.any(speeds < 0):
            raise InvalidParameterError("ue speeds must be non-negative")

        if self.pilot_length is None:
            object.__setattr__(self, "pilot_length", self.num_users)
        if self.pilot_length < 1:
            raise InvalidParameterError("pilot_length must be >= 1")

        if self.block_length is None:
            if self.overhead_ratio is None:
                raise InvalidParameterError("either block_length or overhead_ratio is required")
            if not (0 < self.overhead_ratio <= 1):
                raise InvalidParameterError("overhead_ratio must lie in (0, 1]")
            object.__setattr__(
                self,
                "block_length",
                _snapped_ceil(self.overhead_symbols() / self.overhead_ratio),
            )
        if self.block_length <= self.overhead_symbols():
            raise InvalidParameterError(
                f"block_length ({self.block_length}) must exceed the overhead "
                f"({self.overhead_symbols()} symbols)"
            )

    # --- derived quantities -------------------------------------------------

    @property
    def carrier_freq_hz(self) -> float:
        return self.carrier_freq_mhz * 1e6

    def path_loss_intercept_db(self) -> float:
        return cost_hata_intercept_db(self.carrier_freq_mhz, self.ap_height_m, self.ue_height_m)

    def noise_variance_w(self) -> float:
        return noise_variance(self.bandwidth_hz, self.noise_temp_k, self.noise_figure_db)

    def pilot_energy_w(self) -> float:
        """Effective power of the de-spread pilot observation.

        With coherent_pilot_gain the correlator accumulates the full pilot
        sequence, so the sounding energy is pilot_length times the per-symbol
        power; otherwise the plain per-symbol power is used.
        """
        gain = self.pilot_length if self.coherent_pilot_gain else 1
        return self.tx_power_ue_w * gain

    def n_delay_samples(self) -> int:
        return delay_to_samples(self.delay.total_s, self.symbol_period_s)

    def overhead_symbols(self) -> int:
        return self.air_delay_samples + self.n_delay_samples()

    def speeds_kmh(self) -> np.ndarray:
        if isinstance(self.ue_speeds_kmh, tuple):
            return np.asarray(self.ue_speeds_kmh, dtype=float)
        return np.full(self.num_users, float(self.ue_speeds_kmh))

    def ap_phase_increment_var(self) -> float:
        return phase_increment_variance(self.carrier_freq_hz, self.ap_osc_const_s, self.symbol_period_s)

    def ue_phase_increment_var(self) -> float:
        return phase_increment_variance(self.carrier_freq_hz, self.ue_osc_const_s, self.symbol_period_s)

    def accumulated_ap_phase_var(self) -> float:
        """Variance of the AP phase drift accumulated over the CSI delay, rad^2."""
        if self.phase_std_deg is not None:
            return accumulated_phase_variance_from_label(self.phase_std_deg, self.phase_label_mapping)
        return self.n_delay_samples() * self.ap_phase_increment_var()

    def accumulated_ue_phase_var(self) -> float:
        return self.n_delay_samples() * self.ue_phase_increment_var()

    def phase_attenuation(self) -> float:
        """Hardened AP phase-drift attenuation of the desired signal, in (0, 1]."""
        return math.exp(-0.5 * self.accumulated_ap_phase_var())


# --- JSON interface ---------------------------------------------------------

_FIELD_NAMES = {f.name for f in fields(SystemConfig) if f.name != "delay"}
_DELAY_KEYS = {"delay_total_s", "delay_budget"}


def config_from_dict(raw: dict) -> SystemConfig:
    """Build a SystemConfig from plain JSON data, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError(f"configuration root must be an object, got {type(raw).__name__}")
    unknown = sorted(set(raw) - _FIELD_NAMES - _DELAY_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    if "delay_total_s" in raw and "delay_budget" in raw:
        raise ConfigError("give either delay_total_s or delay_budget, not both")

    kwargs = {k: v for k, v in raw.items() if k in _FIELD_NAMES}
    if "ue_speeds_kmh" in kwargs and isinstance(kwargs["ue_speeds_kmh"], list):
        kwargs["ue_speeds_kmh"] = tuple(kwargs["ue_speeds_kmh"])
    if "delay_total_s" in raw:
        kwargs["delay"] = DelayBudget.from_total(float(raw["delay_total_s"]))
    elif "delay_budget" in raw:
        budget = raw["delay_budget"]
        if not isinstance(budget, dict):
            raise ConfigError("delay_budget must be an object")
        valid = {f.name for f in fields(DelayBudget)}
        bad = sorted(set(budget) - valid)
        if bad:
            raise ConfigError(f"unknown delay_budget keys: {', '.join(bad)}")
        kwargs["delay"] = DelayBudget(**budget)
    try:
        return SystemConfig(**kwargs)
    except InvalidParameterError:
        raise
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: SystemConfig) -> dict:
    """Plain-JSON representation; inverse of config_from_dict."""
    data = asdict(config)
    budget = data.pop("delay")
    data["delay_budget"] = budget
    if isinstance(data["ue_speeds_kmh"], tuple):
        data["ue_speeds_kmh"] = list(data["ue_speeds_kmh"])
    return data


def load_config(path) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw)
