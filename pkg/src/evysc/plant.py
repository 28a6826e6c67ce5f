"""Continuous-time vehicle models.

Three plants: the linear single-track lateral model, the nonlinear
double-track model with per-wheel tire forces, wheel spin dynamics, an
electric powertrain and first-order brake actuators, plus the standalone
longitudinal road-load terms.

Axis convention: x forward, y left, z up; positive yaw rate turns left; the
front-left wheel is the inner wheel in a left turn. Cornering stiffnesses
are per tire, so the lumped single-track axle carries twice the value.
"""

import logging
import math
from dataclasses import dataclass

from .config import PacejkaParams, PowertrainParams, VehicleParams
from .errors import DegenerateKinematicsError, SpeedTooLowError
from .tires import vertical_loads

log = logging.getLogger(__name__)

MIN_SPEED = 0.5          # m/s, floor for 1/V model terms
MIN_WHEEL_DEN = 0.1      # m/s, slip-angle denominator guard
STANDSTILL_SPEED = 0.1   # m/s, slip-ratio indeterminate below this
WHEEL_STOP_EPS = 0.05    # rad/s, brake torque zero-crossing guard

WHEELS = ("FL", "FR", "RL", "RR")


@dataclass
class SingleTrackState:
    """Lateral state of the linear model."""

    beta: float  # sideslip angle (rad)
    r: float     # yaw rate (rad/s)


@dataclass
class PlantState:
    """Full double-track state; X/Y/psi are world pose kept for logging."""

    V_x: float
    V_y: float = 0.0
    r: float = 0.0
    omega_FL: float = 0.0
    omega_FR: float = 0.0
    omega_RL: float = 0.0
    omega_RR: float = 0.0
    i_q: float = 0.0
    p_FL: float = 0.0
    p_FR: float = 0.0
    p_RL: float = 0.0
    p_RR: float = 0.0
    X: float = 0.0
    Y: float = 0.0
    psi: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.V_x, self.V_y, self.r,
                self.omega_FL, self.omega_FR, self.omega_RL, self.omega_RR,
                self.i_q, self.p_FL, self.p_FR, self.p_RL, self.p_RR,
                self.X, self.Y, self.psi)

    @classmethod
    def from_tuple(cls, values) -> "PlantState":
        return cls(*values)

    @classmethod
    def rolling(cls, V: float, veh: VehicleParams) -> "PlantState":
        """Straight free-rolling state at speed V."""
        w = V / veh.R_w
        return cls(V_x=V, omega_FL=w, omega_FR=w, omega_RL=w, omega_RR=w)


@dataclass(frozen=True)
class RoadLoad:
    F_aero: float
    F_ri: float
    F_hc: float


def single_track_matrices(veh: VehicleParams, V: float,
                          mu: float | None = None):
    """State matrices (A, B) of the lateral model x = [beta, r], u = delta.

    Stiffnesses are per tire; each lumped axle contributes 2*C, which makes
    the steady state of this model algebraically identical to the nominal
    yaw-rate/sideslip reference formulas.
    """
    if V < MIN_SPEED:
        raise SpeedTooLowError(f"speed {V} m/s below {MIN_SPEED} m/s")
    if mu is None:
        mu = veh.mu
    cf = 2.0 * veh.C_f0 * mu
    cr = 2.0 * veh.C_r0 * mu
    m, I_z, l_f, l_r = veh.m, veh.I_z, veh.l_f, veh.l_r
    A = ((-(cf + cr) / (m * V), -1.0 + (cr * l_r - cf * l_f) / (m * V * V)),
         ((cr * l_r - cf * l_f) / I_z, -(cr * l_r * l_r + cf * l_f * l_f) / (I_z * V)))
    B = (cf / (m * V), cf * l_f / I_z)
    return A, B


def single_track_derivatives(x, delta: float, M_ext: float,
                             veh: VehicleParams, V: float,
                             mu: float | None = None) -> tuple[float, float]:
    """d/dt of (beta, r) with steering and a direct corrective yaw moment."""
    A, B = single_track_matrices(veh, V, mu)
    beta, r = x
    dbeta = A[0][0] * beta + A[0][1] * r + B[0] * delta
    dr = A[1][0] * beta + A[1][1] * r + B[1] * delta + M_ext / veh.I_z
    return dbeta, dr


def wheel_slip_angles(V_x: float, V_y: float, r: float, delta: float,
                      veh: VehicleParams) -> tuple[float, float, float, float]:
    """Tire sideslip angles (FL, FR, RL, RR); both front wheels steer by delta."""
    t1 = 0.5 * veh.l_w1
    t2 = 0.5 * veh.l_w2
    dens = (V_x - t1 * r, V_x + t1 * r, V_x - t2 * r, V_x + t2 * r)
    for name, den in zip(WHEELS, dens):
        if abs(den) < MIN_WHEEL_DEN:
            raise DegenerateKinematicsError(
                f"wheel {name} velocity denominator {den:.3f} m/s below {MIN_WHEEL_DEN}")
    vy_front = V_y + veh.l_f * r
    vy_rear = V_y - veh.l_r * r
    return (delta - math.atan(vy_front / dens[0]),
            delta - math.atan(vy_front / dens[1]),
            -math.atan(vy_rear / dens[2]),
            -math.atan(vy_rear / dens[3]))


def slip_ratio(omega: float, V_x_wheel: float, R_w: float) -> float:
    """Longitudinal slip ratio, clamped to [-1, 1].

    Braking branch divides by the road speed, traction branch by the wheel
    circumferential speed; both vanish at the rolling point. Near standstill
    (both speeds below 0.1 m/s) the ratio is indeterminate and 0 is returned.
    """
    wheel_speed = omega * R_w
    if abs(wheel_speed) < STANDSTILL_SPEED and abs(V_x_wheel) < STANDSTILL_SPEED:
        log.debug("slip ratio indeterminate at standstill; returning 0")
        return 0.0
    diff = wheel_speed - V_x_wheel
    lam = diff / V_x_wheel if diff < 0.0 else diff / wheel_speed
    return max(-1.0, min(1.0, lam))


def road_load(V_x: float, grade: float, veh: VehicleParams) -> RoadLoad:
    """Aerodynamic drag, total rolling resistance and grade force.

    F_hc is signed by the grade (positive uphill, i.e. decelerating).
    """
    F_aero = 0.5 * veh.rho_air * veh.C_d * veh.A_f * V_x * V_x
    F_ri = veh.c_rr * veh.m * veh.g * math.cos(grade)
    F_hc = veh.m * veh.g * math.sin(grade)
    return RoadLoad(F_aero, F_ri, F_hc)


def motor_torque_limit(pt: PowertrainParams, omega_m: float) -> float:
    """Map envelope torque at a motor speed (symmetric in speed and sign)."""
    w = abs(omega_m)
    pts = pt.torque_map
    if w <= pts[0][0]:
        return pts[0][1]
    for (w0, t0), (w1, t1) in zip(pts, pts[1:]):
        if w <= w1:
            return t0 + (t1 - t0) * (w - w0) / (w1 - w0)
    return pts[-1][1]


def motor_step(i_q: float, V_q: float, omega_m: float,
               pt: PowertrainParams, dt: float) -> tuple[float, float]:
    """Advance the motor current by dt and return (i_q, shaft torque).

    The current ODE L*di/dt = V_q - R*i - K_b*w is linear, so the update is
    the exact exponential solution; the returned torque K_t*i is clamped to
    the speed-torque map envelope (both signs).
    """
    i_ss = (V_q - pt.K_b * omega_m) / pt.R_q
    i_new = i_ss + (i_q - i_ss) * math.exp(-pt.R_q * dt / pt.L_q)
    limit = motor_torque_limit(pt, omega_m)
    T_m = max(-limit, min(limit, pt.K_t * i_new))
    return i_new, T_m


def drive_torque(T_m: float, pt: PowertrainParams) -> float:
    """Total torque at the driven wheels for a motor torque (sign preserved)."""
    return T_m * pt.eta_t * pt.k


def _sign(x: float) -> float:
    return 1.0 if x > 0.0 else (-1.0 if x < 0.0 else 0.0)


def wheel_dynamics(omega: float, T_d_wheel: float, T_b: float, F_x: float,
                   F_r: float, veh: VehicleParams) -> float:
    """Wheel spin acceleration from drive/brake torques and contact forces.

    Brake and rolling-resistance torques oppose the current rotation; near
    standstill the brake torque is zeroed when it exceeds the drive torque
    so it cannot spin the wheel backwards numerically.
    """
    s = _sign(omega)
    if abs(omega) < WHEEL_STOP_EPS and T_d_wheel < T_b:
        brake = 0.0
    else:
        brake = T_b * s
    return (T_d_wheel - brake - F_x * veh.R_w - F_r * veh.R_w * s) / veh.I_w


def brake_actuator_step(p: float, T_b_cmd: float, tau: float, dt: float,
                        p_max: float = float("inf")) -> float:
    """First-order torque tracking, exact over dt, clamped to [0, p_max]."""
    if T_b_cmd < 0.0:
        raise ValueError("brake torque command must be >= 0")
    p_new = T_b_cmd + (p - T_b_cmd) * math.exp(-dt / tau)
    return max(0.0, min(p_max, p_new))


@dataclass(frozen=True)
class DoubleTrackContext:
    """Immutable per-run inputs of the double-track derivative."""

    veh: VehicleParams
    pacejka: PacejkaParams
    powertrain: PowertrainParams
    mu: float
    brake_tau: float = 0.04
    grade: float = 0.0
    tire_model: str = "pacejka"   # 'pacejka' or 'linear'


def double_track_derivatives(state, delta: float, brake_cmds, motor_request: float,
                             ctx: DoubleTrackContext):
    """Full state derivative of the double-track plant.

    state is a 15-tuple (V_x, V_y, r, omega x4, i_q, brake torque x4, X, Y,
    psi); brake_cmds are the commanded torques per wheel (FL, FR, RL, RR)
    and motor_request the torque wanted from the motor shaft. Returns
    (derivative tuple, (a_x, a_y)). The corrective yaw moment is realized
    through the braked wheels, not injected directly.
    """
    veh, pt = ctx.veh, ctx.powertrain
    (V_x, V_y, r, wFL, wFR, wRL, wRR, i_q,
     pFL, pFR, pRL, pRR, X, Y, psi) = state
    if V_x < MIN_SPEED:
        raise SpeedTooLowError(f"speed {V_x:.3f} m/s below {MIN_SPEED} m/s")

    mu = ctx.mu
    sd, cd = math.sin(delta), math.cos(delta)
    t1, t2 = 0.5 * veh.l_w1, 0.5 * veh.l_w2

    alphas = wheel_slip_angles(V_x, V_y, r, delta, veh)

    # wheel-plane longitudinal ground speeds
    vy_front = V_y + veh.l_f * r
    v_wheel = ((V_x - t1 * r) * cd + vy_front * sd,
               (V_x + t1 * r) * cd + vy_front * sd,
               V_x - t2 * r,
               V_x + t2 * r)
    omegas = (wFL, wFR, wRL, wRR)
    lams = tuple(slip_ratio(w, v, veh.R_w) for w, v in zip(omegas, v_wheel))

    roadload = road_load(V_x, ctx.grade, veh)

    def forces_for(loads):
        if ctx.tire_model == "linear":
            out = []
            for i in range(4):
                spec = ctx.pacejka.longitudinal
                F_z = max(loads[i], 0.0)
                k_long = spec.B * spec.C * spec.d_norm * mu * F_z
                cap = mu * F_z * spec.d_norm
                F_x = max(-cap, min(cap, k_long * lams[i]))
                C = veh.C_f0 if i < 2 else veh.C_r0
                out.append((F_x, mu * C * alphas[i]))
            return out
        out = []
        for i in range(4):
            C_tire = veh.C_f0 if i < 2 else veh.C_r0
            fx, fy = _combined_fast(alphas[i], lams[i], max(loads[i], 0.0),
                                    ctx.pacejka, mu, C_tire)
            out.append((fx, fy))
        return out

    def body_sums(forces):
        (FxFL, FyFL), (FxFR, FyFR), (FxRL, FyRL), (FxRR, FyRR) = forces
        Fx_sum = ((FxFL + FxFR) * cd + FxRL + FxRR - (FyFL + FyFR) * sd
                  - roadload.F_aero - roadload.F_hc)
        Fy_sum = (FyFL + FyFR) * cd + FyRL + FyRR + (FxFL + FxFR) * sd
        Mz = (veh.l_f * ((FyFL + FyFR) * cd + (FxFL + FxFR) * sd)
              + t1 * ((FyFL - FyFR) * sd + (FxFR - FxFL) * cd)
              - veh.l_r * (FyRL + FyRR)
              + t2 * (FxRR - FxRL))
        return Fx_sum, Fy_sum, Mz

    loads = vertical_loads(veh)
    forces = forces_for(loads)
    Fx_sum, Fy_sum, Mz = body_sums(forces)
    a_x, a_y = Fx_sum / veh.m, Fy_sum / veh.m
    if veh.load_transfer:
        loads = vertical_loads(veh, a_x, a_y)
        forces = forces_for(loads)
        Fx_sum, Fy_sum, Mz = body_sums(forces)
        a_x, a_y = Fx_sum / veh.m, Fy_sum / veh.m

    # powertrain: request -> envelope-clamped current command -> voltage
    front_driven = pt.driven_axle == "front"
    w_axle = 0.5 * ((wFL + wFR) if front_driven else (wRL + wRR))
    omega_m = pt.k * w_axle
    limit = motor_torque_limit(pt, omega_m)
    T_req = max(-limit, min(limit, motor_request))
    V_q = max(-pt.V_max, min(pt.V_max, pt.R_q * T_req / pt.K_t + pt.K_b * omega_m))
    di_q = (V_q - pt.R_q * i_q - pt.K_b * omega_m) / pt.L_q
    T_m = max(-limit, min(limit, pt.K_t * i_q))
    T_d_wheel = 0.5 * drive_torque(T_m, pt)
    T_drive = (T_d_wheel, T_d_wheel, 0.0, 0.0) if front_driven else (0.0, 0.0, T_d_wheel, T_d_wheel)

    brakes = (pFL, pFR, pRL, pRR)
    domega = []
    for i in range(4):
        F_ri = veh.c_rr * max(loads[i], 0.0)
        domega.append(wheel_dynamics(omegas[i], T_drive[i], brakes[i],
                                     forces[i][0], F_ri, veh))

    dp = tuple((cmd - p) / ctx.brake_tau for cmd, p in zip(brake_cmds, brakes))

    dV_x = a_x + r * V_y
    dV_y = a_y - r * V_x
    dr = Mz / veh.I_z
    cpsi, spsi = math.cos(psi), math.sin(psi)

    return ((dV_x, dV_y, dr,
             domega[0], domega[1], domega[2], domega[3],
             di_q, dp[0], dp[1], dp[2], dp[3],
             V_x * cpsi - V_y * spsi, V_x * spsi + V_y * cpsi, r),
            (a_x, a_y))


def _combined_fast(alpha: float, lam: float, F_z: float,
                   pacejka: PacejkaParams, mu: float,
                   C_tire: float) -> tuple[float, float]:
    """Allocation-free combined-slip evaluation used by the integrator."""
    lo = pacejka.longitudinal
    la = pacejka.lateral
    D_x = mu * F_z * lo.d_norm
    D_y = mu * F_z * la.d_norm
    x = lam + lo.S_h
    bx = lo.B * x
    F_x0 = D_x * math.sin(lo.C * math.atan(bx - lo.E * (bx - math.atan(bx)))) + lo.S_v
    y = alpha + la.S_h
    B_y = (C_tire / (la.C * max(F_z, 1.0) * la.d_norm)
           if pacejka.stiffness_match else la.B)
    by = B_y * y
    F_y0 = D_y * math.sin(la.C * math.atan(by - la.E * (by - math.atan(by)))) + la.S_v
    peak_x = D_x if lo.C >= 1.0 else D_x * math.sin(lo.C * math.pi / 2.0)
    peak_y = D_y if la.C >= 1.0 else D_y * math.sin(la.C * math.pi / 2.0)
    limit = peak_x if peak_x < peak_y else peak_y
    resultant = math.hypot(F_x0, F_y0)
    if resultant > limit > 0.0:
        scale = limit / resultant
        return F_x0 * scale, F_y0 * scale
    return F_x0, F_y0
