"""Per-tire force models: linear, magic-formula, combined slip, vertical loads.

Sign conventions: x forward, y left, z up. Positive slip angle produces a
positive (leftward) lateral force; positive slip ratio (traction) produces a
positive (forward) longitudinal force.
"""

import math
from dataclasses import dataclass

from .config import PacejkaAxisSpec, PacejkaParams, VehicleParams

COMBINED_SLIP_TOL = 0.05  # resultant may exceed mu*F_z by at most 5 %


@dataclass(frozen=True)
class PacejkaAxis:
    """Evaluated magic-formula coefficients (peak D in newtons)."""

    B: float
    C: float
    D: float
    E: float
    S_h: float = 0.0
    S_v: float = 0.0


@dataclass(frozen=True)
class SlipState:
    """Slip quantities at one contact patch."""

    alpha: float        # tire sideslip angle (rad)
    slip_ratio: float   # longitudinal slip, in [-1, 1]
    F_z: float          # vertical load (N)


@dataclass(frozen=True)
class TireForces:
    F_x: float
    F_y: float


def axis_from_spec(spec: PacejkaAxisSpec, mu: float, F_z: float,
                   match_stiffness: float | None = None) -> PacejkaAxis:
    """Concrete coefficient set at a given friction and vertical load.

    When match_stiffness is a per-tire linear stiffness (N/rad), B is
    refitted so the small-slip slope B*C*D equals mu*match_stiffness while
    the load-scaled peak D is kept.
    """
    B = spec.B
    if match_stiffness is not None:
        B = match_stiffness / (spec.C * max(F_z, 1.0) * spec.d_norm)
    return PacejkaAxis(B=B, C=spec.C, D=mu * max(F_z, 0.0) * spec.d_norm,
                       E=spec.E, S_h=spec.S_h, S_v=spec.S_v)


def pacejka_force(slip: float, coeffs: PacejkaAxis) -> float:
    """Magic-formula force for a scalar slip quantity.

    D*sin(C*atan(B*x - E*(B*x - atan(B*x)))) + S_v with x = slip + S_h.
    Odd in x when the offsets are zero; bounded by |D| + |S_v|.
    """
    x = slip + coeffs.S_h
    bx = coeffs.B * x
    return coeffs.D * math.sin(coeffs.C * math.atan(bx - coeffs.E * (bx - math.atan(bx)))) + coeffs.S_v


def pacejka_peak(coeffs: PacejkaAxis) -> float:
    """Maximum force magnitude of the curve with zero offsets."""
    if coeffs.C >= 1.0:
        return coeffs.D
    return coeffs.D * math.sin(coeffs.C * math.pi / 2.0)


def linear_lateral_force(alpha: float, axle: str, veh: VehicleParams,
                         mu: float | None = None) -> float:
    """Linearized per-tire lateral force mu*C*alpha.

    axle is 'front' or 'rear'; exactly linear in both alpha and mu.
    """
    if mu is None:
        mu = veh.mu
    stiffness = veh.C_f0 if axle == "front" else veh.C_r0
    return mu * stiffness * alpha


def combined_slip_forces(slip: SlipState, coeffs: PacejkaParams, mu: float,
                         linear_stiffness: float | None = None) -> TireForces:
    """Coupled longitudinal/lateral forces at one tire.

    Pure-slip forces are evaluated independently, then both are scaled down
    whenever their resultant exceeds the smaller of the two pure-slip peaks
    (friction-circle limit). With either slip zero the other force passes
    through unscaled. linear_stiffness enables the lateral slope fit of
    axis_from_spec when coeffs.stiffness_match is set.
    """
    match = linear_stiffness if coeffs.stiffness_match else None
    ax_long = axis_from_spec(coeffs.longitudinal, mu, slip.F_z)
    ax_lat = axis_from_spec(coeffs.lateral, mu, slip.F_z, match_stiffness=match)
    F_x0 = pacejka_force(slip.slip_ratio, ax_long)
    F_y0 = pacejka_force(slip.alpha, ax_lat)
    limit = min(pacejka_peak(ax_long), pacejka_peak(ax_lat))
    resultant = math.hypot(F_x0, F_y0)
    if resultant > limit > 0.0:
        scale = limit / resultant
        return TireForces(F_x0 * scale, F_y0 * scale)
    return TireForces(F_x0, F_y0)


def vertical_loads(veh: VehicleParams, a_x: float = 0.0,
                   a_y: float = 0.0) -> tuple[float, float, float, float]:
    """Vertical load per wheel (FL, FR, RL, RR), summing to m*g exactly.

    Static axle split by CG position; when veh.load_transfer is set, a
    quasi-static longitudinal shift moves load between axles and a lateral
    shift moves load within each axle (axle sums unchanged). Positive a_y
    (leftward) loads the right-hand wheels.
    """
    L = veh.wheelbase
    weight = veh.m * veh.g
    front_axle = weight * veh.l_r / L
    rear_axle = weight * veh.l_f / L

    if veh.load_transfer and a_x != 0.0:
        shift = veh.m * a_x * veh.h_cg / L
        front_axle -= shift
        rear_axle += shift

    d_front = d_rear = 0.0
    if veh.load_transfer and a_y != 0.0:
        lat = veh.m * a_y * veh.h_cg
        # split the total lateral transfer by static axle share
        d_front = (veh.l_r / L) * lat / veh.l_w1
        d_rear = (veh.l_f / L) * lat / veh.l_w2

    return (front_axle / 2.0 - d_front, front_axle / 2.0 + d_front,
            rear_axle / 2.0 - d_rear, rear_axle / 2.0 + d_rear)
