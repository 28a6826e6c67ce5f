"""Parameter types, unit handling and config file I/O.

All quantities are SI internally (m, kg, s, rad, N, V, A). The config file
is a flat, sectioned key=value text format; keys suffixed ``_kph`` or
``_deg`` are converted to m/s and rad on load. See docs/config.md.
"""

import configparser
import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

from .errors import ConfigError

GRAVITY = 9.81  # m/s^2, fixed


def kph_to_mps(v: float) -> float:
    """km/h to m/s."""
    return v / 3.6


def mps_to_kph(v: float) -> float:
    """m/s to km/h."""
    return v * 3.6


@dataclass(frozen=True)
class VehicleParams:
    """Geometric, inertial and tire constants of the simulated vehicle.

    - m: vehicle mass (kg)
    - I_z: yaw moment of inertia (kg*m^2)
    - l_f, l_r: CG to front/rear axle distance (m)
    - l_w1, l_w2: front/rear track width (m)
    - R_w: effective tire radius (m)
    - I_w: wheel spin inertia (kg*m^2)
    - C_f0, C_r0: per-tire cornering stiffness (N/rad); a lumped axle in the
      single-track model carries 2*C
    - mu: tire-road friction coefficient
    - g: gravity, fixed at 9.81 m/s^2
    - rho_air, C_d, A_f: air density (kg/m^3), drag coefficient, frontal area (m^2)
    - c_rr: rolling resistance coefficient
    - h_cg: CG height (m), used by the quasi-static load transfer
    - load_transfer: enable longitudinal/lateral load transfer in the
      vertical load split
    """

    m: float = 1800.0
    I_z: float = 3000.0
    l_f: float = 1.2
    l_r: float = 1.6
    l_w1: float = 1.5
    l_w2: float = 1.5
    R_w: float = 0.3
    I_w: float = 1.2
    C_f0: float = 80000.0
    C_r0: float = 90000.0
    mu: float = 1.0
    g: float = GRAVITY
    rho_air: float = 1.225
    C_d: float = 0.35
    A_f: float = 3.0
    c_rr: float = 0.012
    h_cg: float = 0.55
    load_transfer: bool = True

    @property
    def wheelbase(self) -> float:
        return self.l_f + self.l_r

    def validate(self) -> None:
        positive = ("m", "I_z", "l_f", "l_r", "l_w1", "l_w2", "R_w", "I_w",
                    "C_f0", "C_r0", "rho_air", "A_f", "h_cg")
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"vehicle.{name} must be > 0")
        if not 0.0 < self.mu <= 1.3:
            raise ConfigError("vehicle.mu out of range (0,1.3]")
        for name in ("C_d", "c_rr"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"vehicle.{name} must be >= 0")
        if self.g != GRAVITY:
            raise ConfigError(f"vehicle.g is fixed at {GRAVITY}")
        if self.l_w1 >= 2.0 * self.wheelbase or self.l_w2 >= 2.0 * self.wheelbase:
            raise ConfigError("vehicle.l_w1/l_w2 must be < 2*wheelbase")


@dataclass(frozen=True)
class PacejkaAxisSpec:
    """Magic-formula coefficient set for one force direction.

    The peak factor is stored normalized: the evaluated curve uses
    D = mu * F_z * d_norm so that friction and vertical load scale the
    peak force consistently with the linear tire model.
    """

    B: float
    C: float
    E: float
    S_h: float = 0.0
    S_v: float = 0.0
    d_norm: float = 1.0

    def validate(self, prefix: str) -> None:
        if self.B <= 0.0:
            raise ConfigError(f"{prefix}B must be > 0")
        if not 0.0 < self.C <= 3.0:
            raise ConfigError(f"{prefix}C out of range (0,3]")
        if self.E > 1.0:
            raise ConfigError(f"{prefix}E must be <= 1")
        if self.d_norm <= 0.0:
            raise ConfigError(f"{prefix}d_norm must be > 0")


@dataclass(frozen=True)
class PacejkaParams:
    """Lateral (slip angle input) and longitudinal (slip ratio input) sets.

    With stiffness_match set (default), the double-track plant replaces the
    lateral B per wheel so the small-slip slope B*C*D equals the linear
    per-tire stiffness mu*C_f0 / mu*C_r0 at the wheel's current load; the
    load-scaled peak D is unchanged. This keeps the nonlinear plant
    consistent with the single-track model at low lateral acceleration.
    """

    lateral: PacejkaAxisSpec = PacejkaAxisSpec(B=8.5, C=1.3, E=-1.2)
    longitudinal: PacejkaAxisSpec = PacejkaAxisSpec(B=12.0, C=1.65, E=0.6)
    stiffness_match: bool = True

    def validate(self) -> None:
        self.lateral.validate("tire.lat_")
        self.longitudinal.validate("tire.long_")


@dataclass(frozen=True)
class PowertrainParams:
    """Electric drive constants.

    - R_q: motor resistance (ohm)
    - L_q: motor inductance (H)
    - K_b: back-emf constant (V*s/rad)
    - K_t: torque constant (N*m/A)
    - eta_t: transmission efficiency
    - k: gear ratio motor/wheel
    - V_max: supply voltage bound (V), ideal source
    - driven_axle: 'front' or 'rear'
    - torque_map: (motor speed rad/s, max torque N*m) breakpoints, linearly
      interpolated, applied symmetrically for regenerative braking
    """

    R_q: float = 0.1
    L_q: float = 0.001
    K_b: float = 0.3
    K_t: float = 0.3
    eta_t: float = 0.95
    k: float = 7.0
    V_max: float = 400.0
    driven_axle: str = "front"
    torque_map: tuple = ((0.0, 220.0), (300.0, 220.0), (450.0, 135.0),
                         (600.0, 92.5), (750.0, 67.0), (900.0, 50.0))

    def validate(self) -> None:
        for name in ("R_q", "L_q", "K_t", "K_b", "V_max", "k"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"powertrain.{name} must be > 0")
        if not 0.0 < self.eta_t <= 1.0:
            raise ConfigError("powertrain.eta_t out of range (0,1]")
        if self.driven_axle not in ("front", "rear"):
            raise ConfigError("powertrain.driven_axle must be 'front' or 'rear'")
        if len(self.torque_map) < 2:
            raise ConfigError("powertrain.torque_map needs at least 2 breakpoints")
        speeds = [w for w, _ in self.torque_map]
        torques = [t for _, t in self.torque_map]
        if any(b <= a for a, b in zip(speeds, speeds[1:])):
            raise ConfigError("powertrain.torque_map speeds must be strictly increasing")
        if any(t < 0.0 for t in torques):
            raise ConfigError("powertrain.torque_map torques must be >= 0")
        knee = torques.index(max(torques))
        if any(b > a for a, b in zip(torques[knee:], torques[knee + 1:])):
            raise ConfigError("powertrain.torque_map torques must be non-increasing after the knee")


@dataclass(frozen=True)
class ControllerParams:
    """Tuning of the two-level yaw stability controller and the traction
    torque adaptation.

    - r_deadband: yaw-rate error activation threshold (rad/s), default 0.02
      (tuned on the 80 km/h double-lane-change efficacy scenario)
    - beta_deadband: sideslip error activation threshold (rad)
    - speed_grid: gain-schedule design speeds (m/s)
    - q_beta, q_r, r_moment: quadratic-regulator weights on sideslip error,
      yaw-rate error and corrective-moment effort
    - M_max: corrective yaw moment saturation (N*m)
    - T_b_max: per-wheel brake torque limit (N*m)
    - brake_tau: brake actuator first-order time constant (s)
    - asr_threshold_kph: same-side front/rear wheel speed difference that
      activates drive-torque adaptation (km/h, native unit)
    - asr_rate_fast / asr_rate_slow: reduction / recovery slew rates (%/s)
    - asr_floor_pct: lowest torque percentage the adaptation commands
    - motor_floor: fraction of driver torque left at full-moment reduction
    - control_dt: controller sample time (s)
    - mirror_brake_selection: swap left/right of the rule-table wheel before
      actuation (required for the axis convention of the slip-angle
      equations used here; see docs/config.md)
    - cruise_gain: proportional driver speed-hold gain (N*m per m/s)
    - kf_q_beta, kf_q_r: sideslip estimator process noise intensities
    - kf_r_meas: yaw-rate measurement noise variance (rad^2/s^2)
    """

    r_deadband: float = 0.02
    beta_deadband: float = 0.01
    speed_grid: tuple = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    q_beta: float = 50.0
    q_r: float = 800.0
    r_moment: float = 1e-8
    M_max: float = 9000.0
    T_b_max: float = 3000.0
    brake_tau: float = 0.04
    asr_threshold_kph: float = 5.0
    asr_rate_fast: float = 200.0
    asr_rate_slow: float = 50.0
    asr_floor_pct: float = 0.0
    motor_floor: float = 0.0
    control_dt: float = 0.01
    mirror_brake_selection: bool = True
    cruise_gain: float = 200.0
    kf_q_beta: float = 1e-4
    kf_q_r: float = 1e-4
    kf_r_meas: float = 2.5e-5

    def validate(self) -> None:
        if self.r_deadband < 0.0 or self.beta_deadband < 0.0:
            raise ConfigError("controller deadbands must be >= 0")
        for name in ("M_max", "T_b_max", "brake_tau", "asr_rate_fast",
                     "asr_rate_slow", "control_dt", "cruise_gain",
                     "q_beta", "q_r", "r_moment", "kf_q_beta", "kf_q_r",
                     "kf_r_meas"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"controller.{name} must be > 0")
        if not 5.0 <= self.asr_threshold_kph <= 6.0:
            raise ConfigError("controller.asr_threshold_kph out of range [5,6]")
        if not 0.0 <= self.asr_floor_pct <= 100.0:
            raise ConfigError("controller.asr_floor_pct out of range [0,100]")
        if not 0.0 <= self.motor_floor <= 1.0:
            raise ConfigError("controller.motor_floor out of range [0,1]")
        if len(self.speed_grid) == 0:
            raise ConfigError("controller.speed_grid must not be empty")
        if any(b <= a for a, b in zip(self.speed_grid, self.speed_grid[1:])):
            raise ConfigError("controller.speed_grid must be strictly increasing")
        if any(v <= 0.5 for v in self.speed_grid):
            raise ConfigError("controller.speed_grid speeds must be > 0.5 m/s")


MANEUVER_KINDS = ("step", "sine", "dlc", "replay")
PLANT_KINDS = ("single", "double")


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation run: maneuver, speed, road and integration settings.

    - maneuver: step | sine | dlc | replay
    - amplitude: road-wheel steering amplitude (rad) for step/sine
    - t_start: maneuver start time (s)
    - frequency: sine frequency (Hz)
    - lane_offset, dlc_period, dlc_gap: double-lane-change geometry (m, s, s);
      the steering amplitude is derived from lane offset and entry speed
    - replay_path: CSV of (t, delta) samples for maneuver=replay
    - speed: initial speed (m/s); speed_kph accepted in config files
    - mu: optional friction override for the run (falls back to vehicle.mu)
    - ysc_enabled: yaw stability control on/off
    - plant: single | double track model
    - duration, dt: run length and integrator step (s)
    - grade: road slope (rad), positive uphill
    """

    maneuver: str = "dlc"
    amplitude: float = 0.05
    t_start: float = 1.0
    frequency: float = 0.5
    lane_offset: float = 7.0
    dlc_period: float = 1.3
    dlc_gap: float = 1.0
    replay_path: str = ""
    speed: float = 80.0 / 3.6
    mu: float | None = None
    ysc_enabled: bool = True
    plant: str = "double"
    duration: float = 10.0
    dt: float = 0.001
    grade: float = 0.0

    def validate(self) -> None:
        if self.duration <= 0.0:
            raise ConfigError("scenario.duration must be > 0")
        if not 1e-4 <= self.dt <= 1e-2:
            raise ConfigError("scenario.dt out of range [1e-4,1e-2]")
        if self.speed <= 1.0:
            raise ConfigError("scenario.speed: speed > 1 m/s required")
        if self.mu is not None and not 0.0 < self.mu <= 1.3:
            raise ConfigError("scenario.mu out of range (0,1.3]")
        if self.maneuver not in MANEUVER_KINDS:
            raise ConfigError(f"scenario.maneuver must be one of {MANEUVER_KINDS}")
        if self.plant not in PLANT_KINDS:
            raise ConfigError(f"scenario.plant must be one of {PLANT_KINDS}")
        if abs(self.amplitude) > 0.6:
            raise ConfigError("scenario.amplitude must be within [-0.6,0.6] rad")
        if self.maneuver == "replay" and not self.replay_path:
            raise ConfigError("scenario.replay_path required for maneuver=replay")
        for name in ("t_start", "frequency", "lane_offset", "dlc_period", "dlc_gap"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"scenario.{name} must be >= 0")


class ConfigBundle(NamedTuple):
    """The five loaded parameter groups of one configuration."""

    vehicle: VehicleParams
    pacejka: PacejkaParams
    powertrain: PowertrainParams
    controller: ControllerParams
    scenario: ScenarioConfig

    @property
    def effective_mu(self) -> float:
        """Run friction: scenario override if present, else the vehicle value."""
        return self.scenario.mu if self.scenario.mu is not None else self.vehicle.mu

    def validate(self) -> "ConfigBundle":
        for part in self[:5]:
            part.validate()
        if self.controller.control_dt < self.scenario.dt:
            raise ConfigError("controller.control_dt must be >= scenario.dt")
        return self


def default_bundle() -> ConfigBundle:
    return ConfigBundle(VehicleParams(), PacejkaParams(), PowertrainParams(),
                        ControllerParams(), ScenarioConfig()).validate()


# --- config file I/O --------------------------------------------------------

_SECTIONS = ("vehicle", "tire", "powertrain", "controller", "scenario")

_BOOL_KEYS = {"load_transfer", "ysc", "mirror_brake_selection", "ysc_enabled",
              "stiffness_match"}
_STR_KEYS = {"driven_axle", "maneuver", "plant", "replay_path"}
_PAIR_LIST_KEYS = {"torque_map"}
_FLOAT_LIST_KEYS = {"speed_grid"}
# config key -> dataclass field where they differ
_ALIASES = {"scenario": {"ysc": "ysc_enabled"}}

_TIRE_PREFIX = {"lat_": "lateral", "long_": "longitudinal"}


def _parse_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "on", "yes", "1"):
        return True
    if low in ("false", "off", "no", "0"):
        return False
    raise ConfigError(f"{section}.{key}: expected a boolean, got '{raw}'")


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got '{raw}'") from None


def _parse_pairs(section: str, key: str, raw: str) -> tuple:
    pairs = []
    for chunk in raw.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise ConfigError(f"{section}.{key}: expected 'speed torque' pairs separated by ';'")
        pairs.append((_parse_float(section, key, parts[0]),
                      _parse_float(section, key, parts[1])))
    return tuple(pairs)


def _parse_floats(section: str, key: str, raw: str) -> tuple:
    return tuple(_parse_float(section, key, part) for part in raw.split())


def _field_names(cls) -> set:
    return {f.name for f in fields(cls)}


def _convert(section: str, key: str, raw: str):
    if key in _BOOL_KEYS:
        return _parse_bool(section, key, raw)
    if key in _STR_KEYS:
        return raw.strip()
    if key in _PAIR_LIST_KEYS:
        return _parse_pairs(section, key, raw)
    if key in _FLOAT_LIST_KEYS:
        return _parse_floats(section, key, raw)
    return _parse_float(section, key, raw)


def _section_kwargs(section: str, items, cls) -> dict:
    """Resolve keys of one section against a dataclass, applying the
    _kph/_deg unit suffixes for keys that are not native fields."""
    names = _field_names(cls)
    aliases = _ALIASES.get(section, {})
    out = {}

    def put(field: str, value):
        if field in out:
            raise ConfigError(f"{section}.{field} set more than once (unit-suffix clash)")
        out[field] = value

    for key, raw in items:
        field = aliases.get(key, key)
        if field in names:
            put(field, _convert(section, field, raw))
        elif key.endswith("_kph") and aliases.get(key[:-4], key[:-4]) in names:
            base = aliases.get(key[:-4], key[:-4])
            put(base, _parse_float(section, key, raw) / 3.6)
        elif key.endswith("_deg") and aliases.get(key[:-4], key[:-4]) in names:
            base = aliases.get(key[:-4], key[:-4])
            put(base, math.radians(_parse_float(section, key, raw)))
        else:
            raise ConfigError(f"unknown key '{key}' in [{section}]")
    return out


def _tire_params(items) -> PacejkaParams:
    per_axis = {"lateral": {}, "longitudinal": {}}
    names = _field_names(PacejkaAxisSpec)
    stiffness_match = PacejkaParams().stiffness_match
    for key, raw in items:
        if key == "stiffness_match":
            stiffness_match = _parse_bool("tire", key, raw)
            continue
        for prefix, axis in _TIRE_PREFIX.items():
            if key.startswith(prefix) and key[len(prefix):] in names:
                per_axis[axis][key[len(prefix):]] = _parse_float("tire", key, raw)
                break
        else:
            raise ConfigError(f"unknown key '{key}' in [tire]")
    base = PacejkaParams()
    return PacejkaParams(
        lateral=replace(base.lateral, **per_axis["lateral"]),
        longitudinal=replace(base.longitudinal, **per_axis["longitudinal"]),
        stiffness_match=stiffness_match,
    )


def load_config(path) -> ConfigBundle:
    """Load and validate a config file.

    Returns (VehicleParams, PacejkaParams, PowertrainParams,
    ControllerParams, ScenarioConfig) as a ConfigBundle. Missing keys fall
    back to the documented defaults; parse errors carry line information.
    """
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")

    def items(section):
        return cp[section].items() if cp.has_section(section) else []

    vehicle = VehicleParams(**_section_kwargs("vehicle", items("vehicle"), VehicleParams))
    pacejka = _tire_params(items("tire"))
    powertrain = PowertrainParams(**_section_kwargs("powertrain", items("powertrain"), PowertrainParams))
    controller = ControllerParams(**_section_kwargs("controller", items("controller"), ControllerParams))
    scenario = ScenarioConfig(**_section_kwargs("scenario", items("scenario"), ScenarioConfig))
    return ConfigBundle(vehicle, pacejka, powertrain, controller, scenario).validate()


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return value
    raise TypeError(f"unexpected config value type: {type(value)}")


def save_config(bundle: ConfigBundle, path) -> None:
    """Write a bundle so that load_config round-trips it bit-exactly."""
    lines = []

    def emit(section, obj, skip=(), extra=None):
        lines.append(f"[{section}]")
        for f in fields(obj):
            if f.name in skip:
                continue
            value = getattr(obj, f.name)
            if f.name == "torque_map":
                text = "; ".join(f"{repr(w)} {repr(t)}" for w, t in value)
            elif f.name == "speed_grid":
                text = " ".join(repr(v) for v in value)
            elif f.name == "ysc_enabled":
                lines.append(f"ysc = {_format_value(value)}")
                continue
            elif f.name == "mu" and section == "scenario":
                if value is None:
                    continue
                text = repr(value)
            else:
                text = _format_value(value)
            lines.append(f"{f.name} = {text}")
        if extra:
            lines.extend(extra)
        lines.append("")

    emit("vehicle", bundle.vehicle)
    lines.append("[tire]")
    for prefix, axis in (("lat_", bundle.pacejka.lateral), ("long_", bundle.pacejka.longitudinal)):
        for f in fields(axis):
            lines.append(f"{prefix}{f.name} = {repr(getattr(axis, f.name))}")
    lines.append(f"stiffness_match = {_format_value(bundle.pacejka.stiffness_match)}")
    lines.append("")
    emit("powertrain", bundle.powertrain)
    emit("controller", bundle.controller)
    emit("scenario", bundle.scenario)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
