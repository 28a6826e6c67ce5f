"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Config file could not be parsed or violates a parameter bound."""


class SpeedTooLowError(ValueError):
    """Vehicle speed below the 0.5 m/s floor of the 1/V model terms."""


class DegenerateKinematicsError(ValueError):
    """A wheel velocity denominator fell below 0.1 m/s."""


class SingularBrakeGeometryError(ValueError):
    """Steering angle drove the front brake lever-arm denominator to ~0."""


class GainSynthesisError(RuntimeError):
    """Feedback gain synthesis failed at a specific grid speed."""


class SimulationDivergedError(RuntimeError):
    """A plant state became non-finite during integration."""

    def __init__(self, t: float):
        super().__init__(f"simulation state non-finite at t={t:.6f} s")
        self.t = t
