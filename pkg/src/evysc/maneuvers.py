"""Open-loop road-wheel steering profiles.

All profiles are continuous; the step edge is rate-limited. The double
lane change is two opposite full-period sine swerves whose amplitude is
derived from the requested lane offset and entry speed through the linear
steady-state yaw gain (see docs/maneuvers.md).
"""

import math
from dataclasses import dataclass
from typing import Callable

from .config import ScenarioConfig, VehicleParams
from .controller import yaw_rate_gain
from .errors import ConfigError

STEP_RATE = 10.0      # rad/s ramp rate of the step maneuver
MAX_STEER = 0.6       # rad, hard bound on any profile


@dataclass(frozen=True)
class ManeuverInput:
    """Steering angle as a function of time."""

    kind: str
    delta: Callable[[float], float]


def _step_profile(amplitude: float, t_start: float) -> Callable[[float], float]:
    rise = abs(amplitude) / STEP_RATE if amplitude else 0.0

    def delta(t: float) -> float:
        if t < t_start:
            return 0.0
        if rise and t < t_start + rise:
            return amplitude * (t - t_start) / rise
        return amplitude

    return delta


def _sine_profile(amplitude: float, frequency: float,
                  t_start: float) -> Callable[[float], float]:
    def delta(t: float) -> float:
        if t < t_start:
            return 0.0
        return amplitude * math.sin(2.0 * math.pi * frequency * (t - t_start))

    return delta


def dlc_amplitude(lane_offset: float, speed: float, period: float,
                  veh: VehicleParams) -> float:
    """Swerve amplitude that shifts the linear plant by lane_offset.

    One full sine period of steering at amplitude A yields a lateral offset
    of roughly V * G_r * A * T^2 / (2*pi) with G_r the steady-state yaw
    gain; solve for A and clamp to the steering bound.
    """
    gain = yaw_rate_gain(speed, veh)
    A = lane_offset * 2.0 * math.pi / (speed * gain * period * period)
    return max(-MAX_STEER, min(MAX_STEER, A))


def _dlc_profile(scenario: ScenarioConfig, veh: VehicleParams) -> Callable[[float], float]:
    T = scenario.dlc_period
    t0 = scenario.t_start
    t_return = t0 + T + scenario.dlc_gap
    A = dlc_amplitude(scenario.lane_offset, scenario.speed, T, veh)

    def delta(t: float) -> float:
        if t0 <= t < t0 + T:
            return A * math.sin(2.0 * math.pi * (t - t0) / T)
        if t_return <= t < t_return + T:
            return -A * math.sin(2.0 * math.pi * (t - t_return) / T)
        return 0.0

    return delta


def _replay_profile(path: str) -> Callable[[float], float]:
    times, angles = [], []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.replace(",", " ").split()
                if parts[0].lower() in ("t", "time"):
                    continue
                times.append(float(parts[0]))
                angles.append(float(parts[1]))
    except OSError as exc:
        raise ConfigError(f"cannot read replay file '{path}': {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"malformed replay file '{path}': {exc}") from exc
    if not times or any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError(f"replay file '{path}' needs strictly increasing times")
    if any(abs(a) > MAX_STEER for a in angles):
        raise ConfigError(f"replay file '{path}' exceeds the {MAX_STEER} rad steering bound")

    def delta(t: float) -> float:
        if t <= times[0]:
            return angles[0]
        if t >= times[-1]:
            return angles[-1]
        lo, hi = 0, len(times) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if times[mid] <= t:
                lo = mid
            else:
                hi = mid
        w = (t - times[lo]) / (times[hi] - times[lo])
        return angles[lo] + w * (angles[hi] - angles[lo])

    return delta


def steering_profile(scenario: ScenarioConfig, veh: VehicleParams) -> ManeuverInput:
    """Build the steering input for a scenario."""
    kind = scenario.maneuver
    if kind == "step":
        fn = _step_profile(scenario.amplitude, scenario.t_start)
    elif kind == "sine":
        fn = _sine_profile(scenario.amplitude, scenario.frequency, scenario.t_start)
    elif kind == "dlc":
        fn = _dlc_profile(scenario, veh)
    elif kind == "replay":
        fn = _replay_profile(scenario.replay_path)
    else:
        raise ConfigError(f"unknown maneuver kind '{kind}'")
    return ManeuverInput(kind, fn)
