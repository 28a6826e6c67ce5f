"""Deterministic yaw stability control simulator for a fully electric
light commercial vehicle: single/double-track plants, Pacejka tires,
sideslip Kalman estimation, two-level differential-braking control and
scripted scenario runs."""

from .config import (ConfigBundle, ControllerParams, PacejkaParams,
                     PowertrainParams, ScenarioConfig, VehicleParams,
                     default_bundle, kph_to_mps, load_config, save_config)
from .controller import (ActuatorCommand, AsrSignals, GainSchedule,
                         ReferenceState, YawStabilityController,
                         apply_limits, asr_adapt_torque, compute_references,
                         corrective_yaw_moment, design_feedback_gains,
                         select_brake_wheel)
from .engine import SimulationLog, rk4_step, run_pair, run_scenario
from .errors import (ConfigError, DegenerateKinematicsError,
                     GainSynthesisError, SimulationDivergedError,
                     SingularBrakeGeometryError, SpeedTooLowError)
from .estimation import KalmanParams, KalmanState, kf_predict, kf_update
from .maneuvers import ManeuverInput, steering_profile
from .metrics import MetricsReport, compute_metrics
from .plant import (PlantState, RoadLoad, SingleTrackState,
                    brake_actuator_step, double_track_derivatives,
                    drive_torque, motor_step, road_load, single_track_derivatives,
                    single_track_matrices, slip_ratio, wheel_dynamics,
                    wheel_slip_angles)
from .tires import (PacejkaAxis, SlipState, TireForces, combined_slip_forces,
                    linear_lateral_force, pacejka_force, vertical_loads)

__version__ = "0.1.0"
