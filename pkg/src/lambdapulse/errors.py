"""Domain errors shared across the package."""


class SingularGamma(ValueError):
    """The mixing angle crossed pi within the singularity guard.

    The Rabi synthesis divides by sin(gamma); whenever |sin(gamma)| drops
    below the guard threshold (1e-9 by default) the cotangent diverges and
    the inverse-engineering map is undefined.
    """


class StepTooCoarse(RuntimeError):
    """Propagation norm drifted by more than the allowed 1e-6.

    Raised after a Runge-Kutta run whose final-state norm deviates from
    unity by more than the tolerance, signalling that the step count is
    too low for the requested detuning or Rabi amplitude.
    """
