"""Exact event-driven integration of differentiating-neuron networks.

Two interchangeable backends implement the same scheduler: a pure-Python
reference (:mod:`._pycore`) and an optional compiled kernel
(``ringlat._kernel``). They produce bit-identical trajectories; the
compiled one is selected by default when present. Set RINGLAT_BACKEND to
``python`` or ``compiled`` to force a choice.
"""

from __future__ import annotations

import math
import os
from collections import deque

import numpy as np

from ..config import EngineLimits, SchmittConfig
from ..errors import (
    EngineInternalError,
    OddCycleGraphError,
    OddCycleOscillation,
)
from ..events import EventLog, EventRecord, TransitionKind
from ..graph import NetworkGraph, compute_inputs
from ..state import NetworkState
from ._pycore import MAX_EVENTS, QUIESCENT, REACHED, WATCH_EVENT, PyEngineCore

_BACKENDS = {"python": PyEngineCore}
try:
    from ringlat._kernel import CyEngineCore

    _BACKENDS["compiled"] = CyEngineCore
except ImportError:  # extension not built; pure-Python fallback
    CyEngineCore = None


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def default_backend() -> str:
    env = os.environ.get("RINGLAT_BACKEND")
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"RINGLAT_BACKEND={env!r} not available; "
                f"choices: {available_backends()}"
            )
        return env
    return "compiled" if "compiled" in _BACKENDS else "python"


def _core_class(backend: str | None):
    name = backend or default_backend()
    try:
        return _BACKENDS[name], name
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; choices: {available_backends()}"
        ) from None


class Simulation:
    """Owns one network state and advances it event by event.

    The graph is shared read-only; many simulations may run concurrently
    on independent states. Graphs with odd-length directed cycles are
    refused unless ``limits.allow_odd_cycles`` is set.
    """

    def __init__(
        self,
        graph: NetworkGraph,
        state: NetworkState,
        cfg: SchmittConfig | None = None,
        limits: EngineLimits | None = None,
        backend: str | None = None,
        record_events: bool = False,
    ):
        self.graph = graph
        self.cfg = cfg or SchmittConfig()
        self.limits = limits or EngineLimits()
        if not self.limits.allow_odd_cycles and graph.has_odd_directed_cycle():
            raise OddCycleGraphError(
                "graph has an odd-length directed cycle; instantaneous "
                "cascades may oscillate (set allow_odd_cycles to override)"
            )
        cls, name = _core_class(backend)
        self.backend = name
        self._core = cls(graph, self.cfg, self.limits)
        self._core.load(state.v, state.y, state.t)
        self.event_log: EventLog | None = EventLog() if record_events else None

    @property
    def t(self) -> float:
        return self._core.t

    @property
    def event_count(self) -> int:
        return self._core.event_count

    def _run(self, t_target: float, watch: int = -1, max_events: int = -1):
        status, rows = self._core.run(
            t_target, watch=watch, max_events=max_events,
            record=self.event_log is not None,
        )
        if rows is not None and rows[0]:
            self.event_log.extend_raw(*rows)
        return status

    def run_until(self, t_target: float) -> int:
        """Advance to exactly t_target; returns REACHED or QUIESCENT."""
        if t_target < self._core.t:
            raise ValueError(f"t_target {t_target} is before current t {self._core.t}")
        return self._run(t_target)

    def step_event(self) -> bool:
        """Process exactly one event; False if the network is quiescent."""
        return self._run(math.inf, max_events=1) == MAX_EVENTS

    def run_until_neuron_starts(self, neuron: int, t_max: float) -> float | None:
        """Advance until `neuron` starts firing; returns the event time,
        or None if it did not start by t_max (time then equals t_max)."""
        status = self._run(t_max, watch=neuron)
        return self._core.t if status == WATCH_EVENT else None

    def state(self) -> NetworkState:
        """Materialized snapshot at the current time (never perturbs the run)."""
        return NetworkState(self._core.materialize(), self._core.outputs(),
                            self._core.t)

    def is_quiescent(self) -> bool:
        return not np.any(self._core.outputs() == 0)

    # -- checkpointing ----------------------------------------------------

    def reference_state(self):
        """(v_ref, t_ref, y, t, event_count): exact resume anchors.

        Voltages evolve as closed forms from per-neuron reference pairs;
        restoring these anchors (rather than voltages materialized at the
        checkpoint time) reproduces the uninterrupted run bit for bit.
        """
        v_ref, t_ref, y = self._core.refs()
        return v_ref, t_ref, y, self._core.t, self._core.event_count

    @classmethod
    def from_reference_state(
        cls, graph, v_ref, t_ref, y, t, event_count=0,
        cfg=None, limits=None, backend=None, record_events=False,
    ) -> "Simulation":
        sim = cls.__new__(cls)
        sim.graph = graph
        sim.cfg = cfg or SchmittConfig()
        sim.limits = limits or EngineLimits()
        if not sim.limits.allow_odd_cycles and graph.has_odd_directed_cycle():
            raise OddCycleGraphError("graph has an odd-length directed cycle")
        core_cls, name = _core_class(backend)
        sim.backend = name
        sim._core = core_cls(graph, sim.cfg, sim.limits)
        sim._core.load_refs(v_ref, t_ref, y, t, event_count)
        sim.event_log = EventLog() if record_events else None
        return sim


# -- spec-level operations (pure functions on NetworkState) ---------------


def next_autonomous_event(
    state: NetworkState,
    graph: NetworkGraph,
    cfg: SchmittConfig,
    limits: EngineLimits | None = None,
) -> tuple[float, tuple[int, ...]] | None:
    """Earliest lower-threshold crossing among firing neurons.

    Returns (time, tie-grouped neuron tuple), or None when nothing fires.
    """
    firing = np.nonzero(state.y == 0)[0]
    if firing.size == 0:
        return None
    u = compute_inputs(graph, state.y)
    tie_tol = limits.tie_tolerance if limits is not None else 0.0
    times = []
    for i in firing:
        d = float(u[i]) - float(state.v[i])
        if d <= 0.0:
            raise EngineInternalError(
                f"firing neuron {int(i)} has u - v = {d!r} <= 0"
            )
        times.append(state.t + cfg.tau * math.log(d / cfg.v_thl))
    t_min = min(times)
    group = tuple(
        int(i) for i, tc in zip(firing, times) if tc <= t_min + tie_tol
    )
    return t_min, group


def advance_voltages(
    state: NetworkState,
    graph: NetworkGraph,
    dt: float,
    cfg: SchmittConfig | None = None,
) -> NetworkState:
    """Closed-form voltage evolution with outputs held fixed.

    Caller guarantees no event occurs strictly inside the interval.
    Scalar math.exp keeps this path bit-compatible with the schedulers.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    cfg = cfg or SchmittConfig()
    u = compute_inputs(graph, state.y)
    v = np.empty_like(state.v)
    for i in range(state.neuron_count):
        ufl = float(u[i])
        v[i] = ufl + (float(state.v[i]) - ufl) * math.exp(-dt / cfg.tau)
    return NetworkState(v, state.y.copy(), state.t + dt)


def _cascade(graph, cfg, limits, y, v, u, queue, changes):
    """Shared input-driven propagation; mutates y, u, changes in place.

    v must already be materialized at the event time. Returns the ordered
    cascade list [(neuron, TransitionKind), ...].
    """
    in_queue = bytearray(graph.neuron_count)
    for c in queue:
        in_queue[c] = 1
    out: list[tuple[int, TransitionKind]] = []
    while queue:
        c = queue.popleft()
        in_queue[c] = 0
        plist = graph.parents[c]
        if plist:
            new_u = 1
            for p in plist:
                if y[p] == 0:
                    new_u = 0
                    break
        else:
            new_u = int(graph.external_input[c])
        if new_u == u[c]:
            continue
        u[c] = new_u
        if new_u == 0:
            if y[c] != 0:
                continue
            y[c] = 1
            kind = TransitionKind.InputDrivenStop
        else:
            if y[c] != 1 or (1.0 - float(v[c])) < cfg.v_thh:
                continue
            y[c] = 0
            kind = TransitionKind.InputDrivenStart
        changes[c] += 1
        if changes[c] > limits.max_cascade_changes_per_neuron:
            raise OddCycleOscillation(c, changes[c])
        out.append((c, kind))
        for w in graph.children[c]:
            if not in_queue[w]:
                in_queue[w] = 1
                queue.append(w)
    return out


def apply_event(
    state: NetworkState,
    event_set,
    graph: NetworkGraph,
    cfg: SchmittConfig,
    limits: EngineLimits | None = None,
) -> tuple[NetworkState, list[tuple[int, TransitionKind]]]:
    """Switch the event set dormant, then resolve the instantaneous cascade.

    The state must already be advanced to the event time. Returns the new
    state and the cascade log (autonomous stops excluded).
    """
    limits = limits or EngineLimits()
    y = state.y.copy()
    v = state.v
    u = compute_inputs(graph, y).astype(np.int64)
    changes = np.zeros(graph.neuron_count, dtype=np.int64)
    queue: deque[int] = deque()
    for i in sorted(event_set):
        y[i] = 1
        changes[i] = 1
    for i in sorted(event_set):
        for c in graph.children[i]:
            if c not in queue:
                queue.append(c)
    cascade = _cascade(graph, cfg, limits, y, v, u, queue, changes)
    return NetworkState(v.copy(), y, state.t), cascade


def step(
    state: NetworkState,
    graph: NetworkGraph,
    cfg: SchmittConfig,
    limits: EngineLimits | None = None,
) -> tuple[NetworkState, EventRecord] | None:
    """One full event: schedule, advance, apply. None when quiescent."""
    limits = limits or EngineLimits()
    nxt = next_autonomous_event(state, graph, cfg, limits)
    if nxt is None:
        return None
    te, event_set = nxt
    advanced = advance_voltages(state, graph, te - state.t, cfg)
    advanced.t = te  # guard against rounding in (t + dt) - t
    new_state, cascade = apply_event(advanced, event_set, graph, cfg, limits)
    return new_state, EventRecord(te, tuple(event_set), tuple(cascade))


def run_until(
    state: NetworkState,
    graph: NetworkGraph,
    cfg: SchmittConfig,
    limits: EngineLimits | None = None,
    t_target: float = 0.0,
    backend: str | None = None,
) -> tuple[NetworkState, list[EventRecord]]:
    """Advance to exactly t_target, returning the state and event records."""
    if t_target < state.t:
        raise ValueError(f"t_target {t_target} is before state.t {state.t}")
    sim = Simulation(graph, state, cfg, limits or EngineLimits(),
                     backend=backend, record_events=True)
    sim.run_until(t_target)
    return sim.state(), sim.event_log.to_records()
