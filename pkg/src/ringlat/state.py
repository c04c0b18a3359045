"""Network state, validity checking, and random initialization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SchmittConfig
from .graph import NetworkGraph, compute_inputs

VOLTAGE_TOL = 1e-12
# Slack for the self-consistency checks; event processing leaves neurons
# within a few ulps of the thresholds they just crossed.
CONSISTENCY_TOL = 1e-9


@dataclass
class NetworkState:
    """Capacitor voltages, binary outputs, and the current time.

    v entries are fractions of the supply voltage in [0, 1]; y follows the
    y = 0 <=> firing convention; t is in units of tau.
    """

    v: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.v = np.ascontiguousarray(self.v, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.uint8)
        if self.v.shape != self.y.shape or self.v.ndim != 1:
            raise ValueError("v and y must be 1-d arrays of equal length")

    @property
    def neuron_count(self) -> int:
        return int(self.v.shape[0])

    def copy(self) -> "NetworkState":
        return NetworkState(self.v.copy(), self.y.copy(), self.t)


def pulse_string(y: np.ndarray) -> str:
    """Complemented output string: '1' marks a firing neuron."""
    return "".join("1" if b == 0 else "0" for b in np.asarray(y))


@dataclass
class Violation:
    neuron: int
    rule: str
    detail: str = ""

    def __str__(self):
        msg = f"neuron {self.neuron}: {self.rule}"
        return f"{msg} ({self.detail})" if self.detail else msg


def validate_state(
    graph: NetworkGraph, state: NetworkState, cfg: SchmittConfig
) -> list[Violation]:
    """Check all state invariants; returns an empty list iff valid.

    Rules checked per neuron: voltage in [0, 1]; output consistent with
    the Schmitt trigger applied to tau*dv/dt = u - v (a firing neuron needs
    u - v >= v_thl, a dormant one u - v < v_thh); and no edge may connect
    two firing neurons. Reports, never raises.
    """
    if state.neuron_count != graph.neuron_count:
        return [Violation(-1, "size mismatch",
                          f"state has {state.neuron_count} neurons, "
                          f"graph has {graph.neuron_count}")]
    out: list[Violation] = []
    v, y = state.v, state.y
    u = compute_inputs(graph, y)
    deriv = u.astype(np.float64) - v

    bad_range = np.nonzero((v < -VOLTAGE_TOL) | (v > 1.0 + VOLTAGE_TOL))[0]
    for i in bad_range:
        out.append(Violation(int(i), "voltage range", f"v={v[i]!r}"))

    firing = y == 0
    bad_fire = np.nonzero(firing & (deriv < cfg.v_thl - CONSISTENCY_TOL))[0]
    for i in bad_fire:
        out.append(Violation(int(i), "consistency",
                             f"firing but tau*dv/dt={deriv[i]!r} < v_thl"))
    bad_dorm = np.nonzero(~firing & (deriv >= cfg.v_thh + CONSISTENCY_TOL))[0]
    for i in bad_dorm:
        out.append(Violation(int(i), "consistency",
                             f"dormant but tau*dv/dt={deriv[i]!r} >= v_thh"))

    both = np.nonzero((y[graph.edge_parent] == 0) & (y[graph.edge_child] == 0))[0]
    for e in both:
        out.append(Violation(int(graph.edge_child[e]), "adjacent firing",
                             f"parent {int(graph.edge_parent[e])} also firing"))
    return out


@dataclass
class InitStats:
    """Bookkeeping returned alongside a random initial state."""

    target_fraction: float
    achieved_fraction: float
    firing_count: int
    seed: object = field(default=None, repr=False)


def random_initial_state(
    graph: NetworkGraph,
    firing_fraction: float,
    rng_seed,
    cfg: SchmittConfig | None = None,
    t: float = 0.0,
) -> tuple[NetworkState, InitStats]:
    """Random valid state with roughly the requested fraction firing.

    The firing set is a random independent set (no neuron fires while a
    parent or child fires): neurons are visited in a random order and each
    still-eligible neuron is accepted with the probability needed to hit
    the target count, until the target is reached or no candidates remain.
    Dense graphs may undershoot; the achieved fraction is reported.

    Voltages: firing neurons get v ~ U(0, 1 - v_thl); dormant neurons with
    a firing parent v ~ U(0, 1); dormant neurons with all parents dormant
    v ~ U(1 - v_thl, 1). Deterministic for a fixed seed.
    """
    if not 0.0 <= firing_fraction <= 1.0:
        raise ValueError(f"firing_fraction must be in [0, 1], got {firing_fraction}")
    cfg = cfg or SchmittConfig()
    n = graph.neuron_count
    rng = np.random.default_rng(rng_seed)

    target = int(round(firing_fraction * n))
    y = np.ones(n, dtype=np.uint8)
    blocked = np.zeros(n, dtype=bool)
    # A parentless neuron with external input 0 can never fire consistently.
    for i in range(n):
        if not graph.parents[i] and graph.external_input[i] == 0:
            blocked[i] = True
    fired = 0
    if target > 0:
        order = rng.permutation(n)
        accept = rng.random(n)
        for pos, i in enumerate(order):
            if fired >= target:
                break
            remaining = n - pos
            needed = target - fired
            if blocked[i]:
                continue
            if accept[pos] * remaining >= needed:
                continue
            y[i] = 0
            fired += 1
            blocked[i] = True
            for nb in graph.parents[i]:
                blocked[nb] = True
            for nb in graph.children[i]:
                blocked[nb] = True

    u = compute_inputs(graph, y)
    lo = np.empty(n)
    hi = np.empty(n)
    firing = y == 0
    lo[firing] = 0.0
    hi[firing] = 1.0 - cfg.v_thl
    dormant_driven = (~firing) & (u == 0)
    lo[dormant_driven] = 0.0
    hi[dormant_driven] = 1.0
    dormant_idle = (~firing) & (u == 1)
    lo[dormant_idle] = 1.0 - cfg.v_thl
    hi[dormant_idle] = 1.0
    v = lo + rng.random(n) * (hi - lo)

    state = NetworkState(v, y, t)
    stats = InitStats(firing_fraction, fired / n if n else 0.0, fired, rng_seed)
    return state, stats
