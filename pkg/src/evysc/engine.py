"""Fixed-step closed-loop simulation.

One run wires steering profile, controller (at its own slower rate, with
zero-order-held commands), sideslip estimator and plant integration into a
time-indexed log. Runs are strictly deterministic; measurement noise is
injected only when a seed is given.
"""

import math
import random
from concurrent.futures import ThreadPoolExecutor

from .config import ConfigBundle
from .controller import ActuatorCommand, ReferenceState, YawStabilityController
from .errors import ConfigError, SimulationDivergedError, SpeedTooLowError
from .estimation import KalmanParams, KalmanState, kf_predict, kf_update
from .maneuvers import steering_profile
from .plant import (DoubleTrackContext, PlantState, double_track_derivatives,
                    motor_torque_limit, single_track_matrices, MIN_SPEED)

LOG_SCHEMA = "v1"

LOG_COLUMNS = (
    "t", "delta", "V_x", "V_y", "r", "beta", "beta_hat",
    "r_nom", "r_limited", "beta_nom", "beta_limited",
    "a_x", "a_y", "M", "brake_wheel", "T_b_cmd",
    "T_b_FL", "T_b_FR", "T_b_RL", "T_b_RR",
    "omega_FL", "omega_FR", "omega_RL", "omega_RR",
    "motor_torque", "motor_request", "asr_active", "asr_pct", "ysc_active",
)

_STRING_COLUMNS = {"brake_wheel"}
_INT_COLUMNS = {"asr_active", "ysc_active"}


class SimulationLog:
    """Per-step record of states, estimates, references and commands."""

    def __init__(self, dt: float):
        self.dt = dt
        self.columns = LOG_COLUMNS
        self.rows: list[tuple] = []
        self.abort_reason: str | None = None
        self._index = {name: i for i, name in enumerate(LOG_COLUMNS)}

    def append(self, row: tuple) -> None:
        self.rows.append(row)

    def col(self, name: str) -> list:
        i = self._index[name]
        return [row[i] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def rk4_step(x, f, dt: float, k1=None):
    """Classical fourth-order Runge--Kutta step over tuples of floats."""
    if k1 is None:
        k1 = f(x)
    h2 = 0.5 * dt
    k2 = f(tuple(xi + h2 * ki for xi, ki in zip(x, k1)))
    k3 = f(tuple(xi + h2 * ki for xi, ki in zip(x, k2)))
    k4 = f(tuple(xi + dt * ki for xi, ki in zip(x, k3)))
    h6 = dt / 6.0
    return tuple(xi + h6 * (a + 2.0 * (b + c) + d)
                 for xi, a, b, c, d in zip(x, k1, k2, k3, k4))


def step_count(duration: float, dt: float) -> int:
    """Number of integration steps; records are step_count + 1."""
    return int(math.floor(duration / dt + 1e-9))


def _noise(rng, sigma: float) -> float:
    return rng.gauss(0.0, sigma) if rng is not None else 0.0


def run_scenario(bundle: ConfigBundle, seed: int | None = None) -> SimulationLog:
    """Simulate one scenario and return its log.

    The controller runs every controller.control_dt seconds and its outputs
    are zero-order-held between ticks. A non-finite state raises
    SimulationDivergedError; dropping below the 0.5 m/s model floor ends
    the run gracefully with a partial log and abort_reason set.
    """
    bundle.validate()
    scn, ctrl = bundle.scenario, bundle.controller
    decim = round(ctrl.control_dt / scn.dt)
    if decim < 1 or abs(decim * scn.dt - ctrl.control_dt) > 1e-9:
        raise ConfigError("controller.control_dt must be an integer multiple of scenario.dt")
    if scn.plant == "single":
        return _run_single_track(bundle, seed, decim)
    return _run_double_track(bundle, seed, decim)


def _run_double_track(bundle: ConfigBundle, seed, decim: int) -> SimulationLog:
    veh, pacejka, pt, ctrl, scn = bundle
    mu = bundle.effective_mu
    dt = scn.dt
    ctx = DoubleTrackContext(veh, pacejka, pt, mu, ctrl.brake_tau, scn.grade)
    profile = steering_profile(scn, veh)
    controller = YawStabilityController(veh, ctrl, mu, scn.ysc_enabled)
    kf = KalmanState.initial()
    kfp = KalmanParams.from_controller(ctrl)
    rng = random.Random(seed) if seed is not None else None
    sigma = math.sqrt(kfp.R_meas)

    n = step_count(scn.duration, dt)
    log = SimulationLog(dt)
    state = PlantState.rolling(scn.speed, veh).as_tuple()

    cmd = ActuatorCommand()
    refs = ReferenceState(0.0, 0.0, 0.0, 0.0)
    beta_hat = 0.0
    tick_delta = 0.0
    brake_cmds = (0.0, 0.0, 0.0, 0.0)

    def deriv(s):
        return double_track_derivatives(s, held_delta, brake_cmds,
                                        cmd.motor_torque_request, ctx)[0]

    for k in range(n + 1):
        t = k * dt
        V_x, V_y, r = state[0], state[1], state[2]
        delta = profile.delta(t)
        held_delta = delta

        if k % decim == 0:
            r_meas = r + _noise(rng, sigma)
            if k > 0:
                kf = kf_predict(kf, tick_delta, V_x, ctrl.control_dt, veh, kfp, mu)
            kf = kf_update(kf, r_meas, kfp)
            beta_hat = float(kf.x_hat[0])
            driver = ctrl.cruise_gain * (scn.speed - V_x)
            wheel_speeds = state[3:7]
            cmd, refs = controller.update(delta, V_x, r_meas, beta_hat,
                                          wheel_speeds, driver, ctrl.control_dt)
            brake_cmds = tuple(cmd.T_b if cmd.brake_wheel == w else 0.0
                               for w in ("FL", "FR", "RL", "RR"))
            tick_delta = delta

        full = double_track_derivatives(state, held_delta, brake_cmds,
                                        cmd.motor_torque_request, ctx)
        k1, (a_x, a_y) = full
        if pt.driven_axle == "front":
            omega_m = pt.k * 0.5 * (state[3] + state[4])
        else:
            omega_m = pt.k * 0.5 * (state[5] + state[6])
        limit = motor_torque_limit(pt, omega_m)
        T_m = max(-limit, min(limit, pt.K_t * state[7]))
        log.append((
            t, delta, V_x, V_y, r, math.atan2(V_y, V_x), beta_hat,
            refs.r_nom, refs.r_limited, refs.beta_nom, refs.beta_limited,
            a_x, a_y, cmd.M, cmd.brake_wheel, cmd.T_b,
            state[8], state[9], state[10], state[11],
            state[3], state[4], state[5], state[6],
            T_m, cmd.motor_torque_request,
            int(controller.asr.asr_active), controller.asr.pct,
            int(controller.active),
        ))
        if k == n:
            break
        try:
            state = rk4_step(state, deriv, dt, k1=k1)
        except SpeedTooLowError:
            # an integration substage crossed the 1/V floor
            log.abort_reason = f"V_x fell below {MIN_SPEED} m/s at t={t + dt:.3f} s"
            break
        if not all(math.isfinite(v) for v in state):
            raise SimulationDivergedError(t + dt)
        if state[0] < MIN_SPEED:
            log.abort_reason = f"V_x fell below {MIN_SPEED} m/s at t={t + dt:.3f} s"
            break
    return log


def _run_single_track(bundle: ConfigBundle, seed, decim: int) -> SimulationLog:
    veh, _, _, ctrl, scn = bundle
    mu = bundle.effective_mu
    dt = scn.dt
    V = scn.speed
    A, B = single_track_matrices(veh, V, mu)
    profile = steering_profile(scn, veh)
    controller = YawStabilityController(veh, ctrl, mu, scn.ysc_enabled)
    kf = KalmanState.initial()
    kfp = KalmanParams.from_controller(ctrl)
    rng = random.Random(seed) if seed is not None else None
    sigma = math.sqrt(kfp.R_meas)
    w_roll = V / veh.R_w

    n = step_count(scn.duration, dt)
    log = SimulationLog(dt)
    # state: beta, r, X, Y, psi, lag-filtered corrective moment
    state = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    cmd = ActuatorCommand()
    refs = ReferenceState(0.0, 0.0, 0.0, 0.0)
    beta_hat = 0.0
    tick_delta = 0.0

    def deriv(s):
        beta, r, X, Y, psi, m_act = s
        dbeta = A[0][0] * beta + A[0][1] * r + B[0] * held_delta
        dr = A[1][0] * beta + A[1][1] * r + B[1] * held_delta + m_act / veh.I_z
        course = psi + beta
        return (dbeta, dr, V * math.cos(course), V * math.sin(course), r,
                (cmd.M - m_act) / ctrl.brake_tau)

    for k in range(n + 1):
        t = k * dt
        beta, r = state[0], state[1]
        delta = profile.delta(t)
        held_delta = delta

        if k % decim == 0:
            r_meas = r + _noise(rng, sigma)
            if k > 0:
                kf = kf_predict(kf, tick_delta, V, ctrl.control_dt, veh, kfp, mu)
            kf = kf_update(kf, r_meas, kfp)
            beta_hat = float(kf.x_hat[0])
            cmd, refs = controller.update(delta, V, r_meas, beta_hat,
                                          (w_roll,) * 4, 0.0, ctrl.control_dt)
            tick_delta = delta

        k1 = deriv(state)
        a_y = V * (k1[0] + r)
        log.append((
            t, delta, V, V * math.tan(beta), r, beta, beta_hat,
            refs.r_nom, refs.r_limited, refs.beta_nom, refs.beta_limited,
            0.0, a_y, cmd.M, cmd.brake_wheel, cmd.T_b,
            0.0, 0.0, 0.0, 0.0,
            w_roll, w_roll, w_roll, w_roll,
            0.0, cmd.motor_torque_request,
            int(controller.asr.asr_active), controller.asr.pct,
            int(controller.active),
        ))
        if k == n:
            break
        state = rk4_step(state, deriv, dt, k1=k1)
        if not all(math.isfinite(v) for v in state):
            raise SimulationDivergedError(t + dt)
    return log


def run_pair(bundle_a: ConfigBundle, bundle_b: ConfigBundle,
             seed: int | None = None) -> tuple[SimulationLog, SimulationLog]:
    """Run two independent scenarios concurrently (shared immutable configs)."""
    with ThreadPoolExecutor(max_workers=2) as pool:
        fa = pool.submit(run_scenario, bundle_a, seed)
        fb = pool.submit(run_scenario, bundle_b, seed)
        return fa.result(), fb.result()
