"""Sideslip estimation with a linear Kalman filter.

Yaw rate is measured (gyro); sideslip is reconstructed from the lateral
single-track model driven by the steering angle and the measured speed.
The prediction uses the exact matrix exponential of the 2x2 model so that
filter and linear plant share one discretization to machine precision.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import ControllerParams, VehicleParams
from .plant import single_track_matrices


@dataclass(frozen=True)
class KalmanParams:
    """Process noise intensity (continuous-time) and yaw-rate measurement
    noise variance."""

    Q: tuple = ((1e-4, 0.0), (0.0, 1e-4))
    R_meas: float = 2.5e-5

    @classmethod
    def from_controller(cls, ctrl: ControllerParams) -> "KalmanParams":
        return cls(Q=((ctrl.kf_q_beta, 0.0), (0.0, ctrl.kf_q_r)),
                   R_meas=ctrl.kf_r_meas)


@dataclass
class KalmanState:
    """Estimate x_hat = [beta, r] and its error covariance."""

    x_hat: np.ndarray
    P: np.ndarray

    @classmethod
    def initial(cls, beta0: float = 0.0, r0: float = 0.0,
                p0: float = 1e-2) -> "KalmanState":
        return cls(np.array([beta0, r0]), np.eye(2) * p0)


def expm2(M) -> np.ndarray:
    """Exact exponential of a real 2x2 matrix (Cayley-Hamilton form)."""
    M = np.asarray(M, dtype=float)
    s = 0.5 * (M[0, 0] + M[1, 1])
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    q2 = s * s - det
    if q2 > 1e-12:
        q = math.sqrt(q2)
        c, sc = math.cosh(q), math.sinh(q) / q
    elif q2 < -1e-12:
        w = math.sqrt(-q2)
        c, sc = math.cos(w), math.sin(w) / w
    else:
        # repeated eigenvalue limit: cosh ~ 1 + q2/2, sinh(q)/q ~ 1 + q2/6
        c, sc = 1.0 + q2 / 2.0, 1.0 + q2 / 6.0
    return math.exp(s) * (c * np.eye(2) + sc * (M - s * np.eye(2)))


@lru_cache(maxsize=512)
def discretize_single_track(veh: VehicleParams, V: float, dt: float,
                            mu: float | None = None):
    """Exact zero-order-hold discretization (F, G) of the lateral model.

    Cached per (vehicle, speed, dt, mu); callers must treat the returned
    arrays as read-only.
    """
    A, B = single_track_matrices(veh, V, mu)
    A = np.asarray(A)
    B = np.asarray(B)
    F = expm2(A * dt)
    if abs(np.linalg.det(A)) > 1e-9:
        G = np.linalg.solve(A, (F - np.eye(2))) @ B
    else:
        # series integral of expm, converges factorially for A*dt of O(1)
        term = np.eye(2) * dt
        total = term.copy()
        for n in range(2, 30):
            term = term @ (A * dt) / n
            total += term
        G = total @ B
    return F, G


def kf_predict(ks: KalmanState, delta: float, V: float, dt: float,
               veh: VehicleParams, params: KalmanParams,
               mu: float | None = None) -> KalmanState:
    """Propagate estimate and covariance over dt under steering input."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    F, G = discretize_single_track(veh, V, dt, mu)
    x = F @ ks.x_hat + G * delta
    P = F @ ks.P @ F.T + np.asarray(params.Q) * dt
    return KalmanState(x, 0.5 * (P + P.T))


def kf_update(ks: KalmanState, r_meas: float, params: KalmanParams) -> KalmanState:
    """Measurement update with H = [0, 1], Joseph-form covariance."""
    P = ks.P
    S = P[1, 1] + params.R_meas
    K = P[:, 1] / S
    x = ks.x_hat + K * (r_meas - ks.x_hat[1])
    IKH = np.eye(2)
    IKH[:, 1] -= K
    P = IKH @ P @ IKH.T + params.R_meas * np.outer(K, K)
    return KalmanState(x, 0.5 * (P + P.T))
