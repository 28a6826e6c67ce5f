"""Scalar quality metrics of a simulation log."""

import json
import math
from dataclasses import asdict, dataclass

from .engine import SimulationLog


@dataclass(frozen=True)
class MetricsReport:
    """Tracking-quality and effort summary of one run.

    - rms_yaw_rate_error: RMS of (r - r_limited), rad/s
    - rms_sideslip_error: RMS of (beta - beta_limited), rad
    - peak_abs_sideslip: max |beta|, rad
    - peak_abs_lateral_accel: max |a_y|, m/s^2
    - ysc_active_fraction: share of steps with the controller engaged
    - brake_energy: integral of applied brake torque times wheel speed, J
    """

    rms_yaw_rate_error: float
    rms_sideslip_error: float
    peak_abs_sideslip: float
    peak_abs_lateral_accel: float
    ysc_active_fraction: float
    brake_energy: float

    def as_dict(self) -> dict:
        return asdict(self)


def _rms(values) -> float:
    return math.sqrt(sum(v * v for v in values) / len(values))


def compute_metrics(log: SimulationLog) -> MetricsReport:
    if len(log) == 0:
        raise ValueError("empty simulation log")
    r = log.col("r")
    r_lim = log.col("r_limited")
    beta = log.col("beta")
    beta_lim = log.col("beta_limited")
    a_y = log.col("a_y")
    active = log.col("ysc_active")

    energy = 0.0
    for wheel in ("FL", "FR", "RL", "RR"):
        torque = log.col(f"T_b_{wheel}")
        omega = log.col(f"omega_{wheel}")
        energy += sum(tb * abs(w) for tb, w in zip(torque, omega)) * log.dt

    return MetricsReport(
        rms_yaw_rate_error=_rms([a - b for a, b in zip(r, r_lim)]),
        rms_sideslip_error=_rms([a - b for a, b in zip(beta, beta_lim)]),
        peak_abs_sideslip=max(abs(b) for b in beta),
        peak_abs_lateral_accel=max(abs(a) for a in a_y),
        ysc_active_fraction=sum(active) / len(active),
        brake_energy=energy,
    )


def write_metrics_json(metrics, path) -> None:
    """Write one report or a {label: report} mapping as JSON."""
    if isinstance(metrics, MetricsReport):
        payload = metrics.as_dict()
    else:
        payload = {key: (val.as_dict() if isinstance(val, MetricsReport) else val)
                   for key, val in metrics.items()}
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def compare_metrics(a: MetricsReport, b: MetricsReport) -> dict:
    """Per-field delta (a - b) and ratio (a / b) of two reports."""
    da, db = a.as_dict(), b.as_dict()
    delta = {key: da[key] - db[key] for key in da}
    ratio = {key: (da[key] / db[key] if db[key] != 0.0 else math.inf if da[key] else 1.0)
             for key in da}
    return {"delta": delta, "ratio": ratio}
