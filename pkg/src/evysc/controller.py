"""Two-level yaw stability control plus drive-torque adaptation.

Upper level: nominal yaw-rate/sideslip references from the static
single-track model, friction limits, activation with hysteresis and a
state-feedback corrective yaw moment. Lower level: rule-table wheel
selection, geometric moment-to-brake-torque conversion and motor torque
reduction. The traction adaptation slews the drive request down when
same-side wheel speeds diverge.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_continuous_are

from .config import ControllerParams, VehicleParams, mps_to_kph
from .errors import GainSynthesisError, SingularBrakeGeometryError, SpeedTooLowError
from .plant import single_track_matrices, MIN_SPEED

BRAKE_GEOMETRY_EPS = 1e-3  # m, front lever-arm denominator floor


@dataclass(frozen=True)
class ReferenceState:
    """Nominal and friction-limited yaw-rate / sideslip targets."""

    r_nom: float
    beta_nom: float
    r_limited: float
    beta_limited: float


@dataclass(frozen=True)
class ActuatorCommand:
    """One controller tick worth of actuation."""

    M: float = 0.0                     # corrective yaw moment (N*m, signed)
    brake_wheel: str = "none"          # none|FL|FR|RL|RR (as actuated)
    T_b: float = 0.0                   # brake torque magnitude (N*m)
    motor_torque_request: float = 0.0  # torque wanted at the motor (N*m)


@dataclass(frozen=True)
class GainSchedule:
    """Per-speed state feedback rows K = [k_beta, k_r] with closed-loop poles."""

    speeds: tuple
    gains: tuple          # ((k_beta, k_r), ...)
    pole_real_parts: tuple

    def gain_at(self, V: float) -> tuple[float, float]:
        """Linear interpolation over the speed grid, clamped at the ends."""
        s = self.speeds
        if V <= s[0]:
            return self.gains[0]
        if V >= s[-1]:
            return self.gains[-1]
        for i in range(len(s) - 1):
            if V <= s[i + 1]:
                w = (V - s[i]) / (s[i + 1] - s[i])
                k0, k1 = self.gains[i], self.gains[i + 1]
                return (k0[0] + w * (k1[0] - k0[0]), k0[1] + w * (k1[1] - k0[1]))
        return self.gains[-1]


@dataclass(frozen=True)
class AsrSignals:
    """Traction adaptation state: commanded torque percentages and activity."""

    reduction_fast_pct: float = 100.0  # level while actively reducing
    reduction_slow_pct: float = 100.0  # level while recovering
    asr_active: bool = False
    speed_diff_kph: float = 0.0

    @property
    def pct(self) -> float:
        return self.reduction_fast_pct if self.asr_active else self.reduction_slow_pct


def understeer_coefficient(veh: VehicleParams) -> float:
    """Steady-state denominator term m*V^2*K2 uses this K2 (s^2/m units folded)."""
    L = veh.wheelbase
    return veh.m * (veh.l_r * veh.C_r0 - veh.l_f * veh.C_f0) / (2.0 * veh.C_f0 * veh.C_r0 * L)


def compute_references(delta: float, V_x: float, veh: VehicleParams) -> ReferenceState:
    """Nominal yaw rate and sideslip of the static single-track model.

    The limited fields are filled with the nominal values; apply_limits
    clamps them to the friction bounds.
    """
    if V_x < MIN_SPEED:
        raise SpeedTooLowError(f"speed {V_x} m/s below {MIN_SPEED} m/s")
    L = veh.wheelbase
    den = L + understeer_coefficient(veh) * V_x * V_x
    r_nom = V_x * delta / den
    beta_nom = (veh.l_r - veh.l_f * veh.m * V_x * V_x / (2.0 * veh.C_r0 * L)) / den * delta
    return ReferenceState(r_nom, beta_nom, r_nom, beta_nom)


def yaw_rate_gain(V_x: float, veh: VehicleParams) -> float:
    """Steady-state yaw rate per unit road-wheel steering angle."""
    return compute_references(1.0, V_x, veh).r_nom


def apply_limits(ref: ReferenceState, mu: float, V_x: float,
                 g: float = 9.81) -> ReferenceState:
    """Clamp the targets to what the friction budget allows (sign kept)."""
    if V_x < MIN_SPEED:
        raise SpeedTooLowError(f"speed {V_x} m/s below {MIN_SPEED} m/s")
    r_bound = 0.85 * mu * g / V_x
    beta_bound = math.atan(0.02 * mu * g)
    return replace(ref,
                   r_limited=max(-r_bound, min(r_bound, ref.r_nom)),
                   beta_limited=max(-beta_bound, min(beta_bound, ref.beta_nom)))


def design_feedback_gains(veh: VehicleParams, ctrl: ControllerParams,
                          mu: float | None = None,
                          speeds=None) -> GainSchedule:
    """Infinite-horizon quadratic regulator on the lateral model with a
    yaw-moment input, solved at each grid speed.

    Weights: diag(q_beta, q_r) on the state error, r_moment on the moment.
    Every returned row closes the loop with strictly negative pole real
    parts; failures report the offending speed.
    """
    if speeds is None:
        speeds = ctrl.speed_grid
    if len(speeds) == 0:
        raise GainSynthesisError("empty speed grid")
    B_M = np.array([[0.0], [1.0 / veh.I_z]])
    Q = np.diag([ctrl.q_beta, ctrl.q_r])
    R = np.array([[ctrl.r_moment]])
    gains, poles = [], []
    for V in speeds:
        A, _ = single_track_matrices(veh, V, mu)
        A = np.asarray(A)
        try:
            P = solve_continuous_are(A, B_M, Q, R)
        except Exception as exc:
            raise GainSynthesisError(f"gain synthesis failed at {V} m/s: {exc}") from exc
        K = (np.linalg.solve(R, B_M.T @ P))[0]
        eig = np.linalg.eigvals(A - B_M @ K[None, :])
        if max(eig.real) >= 0.0:
            raise GainSynthesisError(f"closed loop not stable at {V} m/s")
        gains.append((float(K[0]), float(K[1])))
        poles.append((float(eig.real[0]), float(eig.real[1])))
    return GainSchedule(tuple(speeds), tuple(gains), tuple(poles))


def corrective_yaw_moment(e_beta: float, e_r: float, gain: tuple[float, float],
                          M_max: float) -> float:
    """M = K*e saturated to +/- M_max; e is (limited reference - actual)."""
    M = gain[0] * e_beta + gain[1] * e_r
    return max(-M_max, min(M_max, M))


def activation_logic(prev_active: bool, r_err: float, beta_err: float,
                     ctrl: ControllerParams) -> bool:
    """Deadband activation with 50 % release hysteresis on both errors."""
    if prev_active:
        return not (abs(r_err) < 0.5 * ctrl.r_deadband
                    and abs(beta_err) < 0.5 * ctrl.beta_deadband)
    return abs(r_err) > ctrl.r_deadband or abs(beta_err) > ctrl.beta_deadband


def select_brake_wheel(r: float, r_nom: float, r_deadband: float) -> str:
    """Rule-table wheel choice from measured and desired yaw rate.

    Covers all sign combinations of (r, r_nom, r_nom - r); ties inside the
    deadband select no wheel. The labels follow the rule table verbatim;
    apply effective_brake_wheel for the axis convention used by the plant
    here.
    """
    err = r_nom - r
    if abs(err) <= r_deadband:
        return "none"
    if err < 0.0:
        return "FL" if r > 0.0 else "RL"
    return "FR" if r < 0.0 else "RR"


_MIRROR = {"FL": "FR", "FR": "FL", "RL": "RR", "RR": "RL", "none": "none"}


def effective_brake_wheel(wheel: str, mirror: bool) -> str:
    """Left/right swap applied between rule table and actuation."""
    return _MIRROR[wheel] if mirror else wheel


def brake_torque_for_moment(M: float, axle: str, delta: float,
                            veh: VehicleParams,
                            T_b_max: float = float("inf")) -> float:
    """Brake torque magnitude that realizes |M| at one wheel of the axle.

    Geometric lever-arm relation; the front arm shrinks with steering angle
    and the conversion is rejected when it degenerates.
    """
    if axle == "front":
        arm_angle = math.atan(veh.l_w1 / (2.0 * veh.l_f)) - delta
        den = math.sin(arm_angle) * math.hypot(veh.l_f, 0.5 * veh.l_w1)
    elif axle == "rear":
        arm_angle = math.atan(veh.l_w2 / (2.0 * veh.l_r))
        den = math.sin(arm_angle) * math.hypot(veh.l_r, 0.5 * veh.l_w2)
    else:
        raise ValueError(f"axle must be 'front' or 'rear', got {axle!r}")
    if abs(den) <= BRAKE_GEOMETRY_EPS:
        raise SingularBrakeGeometryError(
            f"front brake lever arm degenerate at delta={delta:.4f} rad")
    return min(abs(M) * veh.R_w / den, T_b_max)


def motor_torque_request(M: float, driver_request: float,
                         ctrl: ControllerParams, active: bool) -> float:
    """Drive-torque reduction proportional to the moment demand.

    Inactive control passes the driver request through; at |M| = M_max the
    request is scaled down to the configured floor fraction. Never exceeds
    the driver request.
    """
    if not active:
        return driver_request
    frac = min(abs(M) / ctrl.M_max, 1.0)
    scale = 1.0 - (1.0 - ctrl.motor_floor) * frac
    return driver_request * scale


def asr_adapt_torque(wheel_speeds_kph, driver_request: float, asr: AsrSignals,
                     ctrl: ControllerParams, dt: float) -> tuple[float, AsrSignals]:
    """Traction torque adaptation from same-side wheel speed differences.

    wheel_speeds_kph is (FL, FR, RL, RR) in km/h. Active whenever either
    side's front/rear difference exceeds the threshold; the commanded
    percentage slews down at the fast rate while active and recovers at
    the slow rate when inactive. Returns the adapted torque and the new
    signal state.
    """
    fl, fr, rl, rr = wheel_speeds_kph
    diff = max(abs(fl - rl), abs(fr - rr))
    active = diff > ctrl.asr_threshold_kph
    pct = asr.pct
    if active:
        pct = max(ctrl.asr_floor_pct, pct - ctrl.asr_rate_fast * dt)
    else:
        pct = min(100.0, pct + ctrl.asr_rate_slow * dt)
    new = AsrSignals(reduction_fast_pct=pct, reduction_slow_pct=pct,
                     asr_active=active, speed_diff_kph=diff)
    return driver_request * pct / 100.0, new


class YawStabilityController:
    """Stateful wrapper wiring the upper and lower levels for one run.

    Owns the gain schedule (immutable), the activation hysteresis flag and
    the traction-adaptation percentage. One instance per simulation run.
    """

    def __init__(self, veh: VehicleParams, ctrl: ControllerParams, mu: float,
                 enabled: bool = True):
        self.veh = veh
        self.ctrl = ctrl
        self.mu = mu
        self.enabled = enabled
        self.gains = design_feedback_gains(veh, ctrl, mu)
        self.active = False
        self.asr = AsrSignals()

    def update(self, delta: float, V_x: float, r_meas: float, beta_hat: float,
               wheel_speeds: tuple, driver_request: float,
               dt: float) -> tuple[ActuatorCommand, ReferenceState]:
        """One controller tick; wheel_speeds are rad/s (FL, FR, RL, RR)."""
        veh, ctrl = self.veh, self.ctrl
        refs = apply_limits(compute_references(delta, V_x, veh), self.mu, V_x, veh.g)
        e_r = refs.r_limited - r_meas
        e_beta = refs.beta_limited - beta_hat

        speeds_kph = tuple(mps_to_kph(w * veh.R_w) for w in wheel_speeds)
        request, self.asr = asr_adapt_torque(speeds_kph, driver_request,
                                             self.asr, ctrl, dt)

        if not self.enabled:
            self.active = False
            return ActuatorCommand(motor_torque_request=request), refs

        self.active = activation_logic(self.active, e_r, e_beta, ctrl)
        if not self.active:
            return ActuatorCommand(motor_torque_request=request), refs

        M = corrective_yaw_moment(e_beta, e_r, self.gains.gain_at(V_x), ctrl.M_max)
        wheel = select_brake_wheel(r_meas, refs.r_limited, ctrl.r_deadband)
        wheel = effective_brake_wheel(wheel, ctrl.mirror_brake_selection)
        if wheel == "none":
            T_b = 0.0
        else:
            axle = "front" if wheel in ("FL", "FR") else "rear"
            T_b = brake_torque_for_moment(M, axle, delta, veh, ctrl.T_b_max)
        request = motor_torque_request(M, request, ctrl, self.active)
        return ActuatorCommand(M=M, brake_wheel=wheel, T_b=T_b,
                               motor_torque_request=request), refs
