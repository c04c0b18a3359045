"""Neuron model parameters and engine guard limits."""

from dataclasses import dataclass

# Default Schmitt thresholds. A k-cycle of an n-ring exists only when the
# period polynomial has a root in (0,1), which requires roughly
# n*v_thl < k, and the restart condition 1 - v2 >= v_thh must hold on the
# orbit. (0.05, 0.9) supports every k-cycle for n <= 20 with ample margin.
DEFAULT_V_THL = 0.05
DEFAULT_V_THH = 0.9


@dataclass(frozen=True)
class SchmittConfig:
    """Inverting Schmitt trigger thresholds and the circuit time constant.

    Thresholds are fractions of the supply voltage; tau is the unit in
    which all simulation times are expressed.
    """

    v_thl: float = DEFAULT_V_THL
    v_thh: float = DEFAULT_V_THH
    tau: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.v_thl < self.v_thh < 1.0):
            raise ValueError(
                f"thresholds must satisfy 0 < v_thl < v_thh < 1, "
                f"got v_thl={self.v_thl}, v_thh={self.v_thh}"
            )
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class EngineLimits:
    """Safety limits for the event engine.

    max_cascade_changes_per_neuron bounds output flips of a single neuron
    within one instantaneous cascade (odd directed cycles can oscillate
    forever otherwise). tie_tolerance widens the grouping window for
    simultaneous autonomous events; 0 means exact floating-point ties only.
    allow_odd_cycles disables the structural odd-cycle refusal, which is
    needed only to exercise the cascade guard itself.
    """

    max_cascade_changes_per_neuron: int = 2
    tie_tolerance: float = 0.0
    allow_odd_cycles: bool = False

    def __post_init__(self):
        if self.max_cascade_changes_per_neuron < 1:
            raise ValueError("max_cascade_changes_per_neuron must be >= 1")
        if self.tie_tolerance < 0.0:
            raise ValueError("tie_tolerance must be >= 0")
