"""Exception types shared across the package."""


class RinglatError(Exception):
    """Base class for all package-specific errors."""


class EngineInternalError(RinglatError):
    """A firing neuron reached an impossible configuration (upstream bug)."""


class OddCycleOscillation(RinglatError):
    """A cascade kept flipping the same neuron; the network has an
    odd-length directed cycle sustaining an instantaneous oscillation."""

    def __init__(self, neuron: int, changes: int):
        self.neuron = neuron
        self.changes = changes
        super().__init__(
            f"neuron {neuron} changed output {changes} times within one cascade"
        )


class OddCycleGraphError(RinglatError):
    """The graph contains an odd-length directed cycle and the engine was
    not configured to allow it."""


class NotConverged(RinglatError):
    """Orbit detection ran out of time before recurrence was established.

    Carries the last observed pulse count and the state so callers can
    degrade gracefully.
    """

    def __init__(self, message: str, pulse_count: int = 0, state=None):
        self.pulse_count = pulse_count
        self.state = state
        super().__init__(message)


class InfeasibleColoring(RinglatError):
    """No homogeneity coloring exists; carries one conflicting edge."""

    def __init__(self, k: int, edge: tuple):
        self.k = k
        self.edge = edge
        super().__init__(f"no {k}-coloring: edge {edge[0]}->{edge[1]} conflicts")


class FitFailed(RinglatError):
    """Too few usable points to fit a correlation length."""


class ConfigError(RinglatError):
    """Invalid experiment configuration; message names the offending key."""


class CheckpointError(RinglatError):
    """Checkpoint could not be loaded or does not match the configuration."""
