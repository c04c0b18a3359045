"""Pure-Python event scheduler.

This is the reference implementation of the event loop and the fallback
backend when the compiled kernel is unavailable. The compiled kernel in
``ringlat._kernel`` mirrors this file operation for operation (same
formulas, same evaluation order, libm exp/log) so that both backends
produce bit-identical trajectories and event logs.

Algorithm, per event:

1. Pop the earliest scheduled threshold crossing (lazy deletion of stale
   heap entries); group exact or tolerance ties into one event set.
2. Autonomous stops: members of the set switch output to dormant.
3. Cascade: a FIFO work-set (ascending neuron index, deduplicated) of
   children of changed neurons. A popped child recomputes its input (AND
   of parent outputs); on change its voltage is materialized at the event
   time, then: firing child whose input dropped stops; dormant child whose
   input rose starts iff its scaled derivative reaches v_thh. Changed
   neurons push their children. A per-neuron flip budget guards against
   odd-cycle instantaneous oscillation.
4. Neurons whose output or input changed get rescheduled from their
   refreshed (voltage, time) reference pair.

Voltages evolve lazily: each neuron stores the exact closed-form anchor
(v_ref at t_ref) valid since its input last changed, so no integration
error accumulates and read-only snapshots at arbitrary times never perturb
the trajectory.
"""

from __future__ import annotations

import heapq
import math
from collections import deque

import numpy as np

from ..errors import EngineInternalError, OddCycleOscillation

# run() exit statuses
REACHED = 0      # advanced to t_target, no event pending before it
QUIESCENT = 1    # no neuron firing; network is at a fixed point
WATCH_EVENT = 2  # the watched neuron started firing
MAX_EVENTS = 3   # event budget exhausted

_NAN = float("nan")


class PyEngineCore:
    backend_name = "python"

    def __init__(self, graph, cfg, limits):
        self.n = graph.neuron_count
        self._pp = graph.parent_indptr.tolist()
        self._pi = graph.parent_idx.tolist()
        self._cp = graph.child_indptr.tolist()
        self._ci = graph.child_idx.tolist()
        self._ext = graph.external_input.tolist()
        self.v_thl = float(cfg.v_thl)
        self.v_thh = float(cfg.v_thh)
        self.tau = float(cfg.tau)
        self.max_changes = int(limits.max_cascade_changes_per_neuron)
        self.tie_tol = float(limits.tie_tolerance)

        self.t = 0.0
        self.event_count = 0
        self.v_ref: list[float] = []
        self.t_ref: list[float] = []
        self.u: list[int] = []
        self.y: list[int] = []
        self._sched: list[float] = []
        self._heap: list[tuple[float, int]] = []
        # per-event scratch
        self._in_queue = bytearray(self.n)
        self._changes = bytearray(self.n)
        self._resched = bytearray(self.n)

    # -- loading ---------------------------------------------------------

    def load(self, v, y, t: float):
        n = self.n
        self.v_ref = [float(x) for x in v]
        self.t_ref = [float(t)] * n
        self.y = [int(b) for b in y]
        if any(b not in (0, 1) for b in self.y):
            raise ValueError("outputs must be 0 or 1")
        self.u = self._derive_inputs()
        self.t = float(t)
        self.event_count = 0
        self._rebuild_heap()

    def load_refs(self, v_ref, t_ref, y, t: float, event_count: int = 0):
        """Restore from checkpointed reference anchors (bit-exact resume)."""
        self.v_ref = [float(x) for x in v_ref]
        self.t_ref = [float(x) for x in t_ref]
        self.y = [int(b) for b in y]
        self.u = self._derive_inputs()
        self.t = float(t)
        self.event_count = int(event_count)
        self._rebuild_heap()

    def _derive_inputs(self) -> list[int]:
        pp, pi, y = self._pp, self._pi, self.y
        u = []
        for i in range(self.n):
            lo, hi = pp[i], pp[i + 1]
            if lo == hi:
                u.append(self._ext[i])
                continue
            bit = 1
            for e in range(lo, hi):
                if y[pi[e]] == 0:
                    bit = 0
                    break
            u.append(bit)
        return u

    def _rebuild_heap(self):
        self._sched = [_NAN] * self.n
        self._heap = []
        for i in range(self.n):
            if self.y[i] == 0:
                self._schedule(i)

    def _schedule(self, i: int):
        d = self.u[i] - self.v_ref[i]
        if d <= 0.0:
            raise EngineInternalError(
                f"firing neuron {i} has u - v = {d!r} <= 0 at t={self.t_ref[i]!r}"
            )
        tc = self.t_ref[i] + self.tau * math.log(d / self.v_thl)
        self._sched[i] = tc
        heapq.heappush(self._heap, (tc, i))

    # -- running ---------------------------------------------------------

    def run(self, t_target: float, watch: int = -1, max_events: int = -1,
            record: bool = False):
        """Process events up to t_target; returns (status, raw_rows | None).

        raw_rows is (times, neurons, kinds, event_ids) when recording.
        """
        heap, sched, y, u = self._heap, self._sched, self.y, self.u
        v_ref, t_ref = self.v_ref, self.t_ref
        pp, pi, cp, ci, ext = self._pp, self._pi, self._cp, self._ci, self._ext
        in_q, changes, resched = self._in_queue, self._changes, self._resched
        tau, v_thl, v_thh = self.tau, self.v_thl, self.v_thh
        tie_tol, max_ch = self.tie_tol, self.max_changes

        rec_t: list[float] = []
        rec_i: list[int] = []
        rec_k: list[int] = []
        rec_e: list[int] = []
        events_done = 0
        status = REACHED

        while True:
            while heap:
                t0, i0 = heap[0]
                if y[i0] == 0 and sched[i0] == t0:
                    break
                heapq.heappop(heap)
            if not heap:
                self.t = t_target
                status = QUIESCENT
                break
            t0, i0 = heap[0]
            if t0 > t_target:
                self.t = t_target
                status = REACHED
                break

            heapq.heappop(heap)
            sched[i0] = _NAN
            event_set = [i0]
            tie_limit = t0 + tie_tol
            while heap:
                t1, i1 = heap[0]
                if y[i1] != 0 or sched[i1] != t1:
                    heapq.heappop(heap)
                    continue
                if t1 <= tie_limit:
                    heapq.heappop(heap)
                    sched[i1] = _NAN
                    event_set.append(i1)
                    continue
                break
            event_set.sort()
            te = t0
            self.t = te
            eid = events_done

            watch_y0 = y[watch] if watch >= 0 else -1
            touched: list[int] = []
            scratch: list[int] = []
            queue: deque[int] = deque()

            # Step 2: autonomous stops.
            for i in event_set:
                dt = te - t_ref[i]
                ufl = float(u[i])
                v_ref[i] = ufl + (v_ref[i] - ufl) * math.exp(-dt / tau)
                t_ref[i] = te
                y[i] = 1
                changes[i] = 1
                resched[i] = 1
                touched.append(i)
                scratch.append(i)
                if record:
                    rec_t.append(te)
                    rec_i.append(i)
                    rec_k.append(0)
                    rec_e.append(eid)
            for i in event_set:
                for e in range(cp[i], cp[i + 1]):
                    c = ci[e]
                    if not in_q[c]:
                        in_q[c] = 1
                        queue.append(c)
                        scratch.append(c)

            # Step 3: propagate input-driven transitions.
            try:
                while queue:
                    c = queue.popleft()
                    in_q[c] = 0
                    lo, hi = pp[c], pp[c + 1]
                    if lo == hi:
                        new_u = ext[c]
                    else:
                        new_u = 1
                        for e in range(lo, hi):
                            if y[pi[e]] == 0:
                                new_u = 0
                                break
                    if new_u == u[c]:
                        continue
                    dt = te - t_ref[c]
                    ufl = float(u[c])
                    v_ref[c] = ufl + (v_ref[c] - ufl) * math.exp(-dt / tau)
                    t_ref[c] = te
                    u[c] = new_u
                    if not resched[c]:
                        resched[c] = 1
                        touched.append(c)
                        scratch.append(c)
                    if new_u == 0:
                        if y[c] != 0:
                            continue
                        y[c] = 1
                        kind = 2
                    else:
                        if y[c] != 1 or (1.0 - v_ref[c]) < v_thh:
                            continue
                        y[c] = 0
                        kind = 1
                    changes[c] += 1
                    if changes[c] > max_ch:
                        raise OddCycleOscillation(c, changes[c])
                    if record:
                        rec_t.append(te)
                        rec_i.append(c)
                        rec_k.append(kind)
                        rec_e.append(eid)
                    for e in range(cp[c], cp[c + 1]):
                        w = ci[e]
                        if not in_q[w]:
                            in_q[w] = 1
                            queue.append(w)
                            scratch.append(w)
            finally:
                for i in scratch:
                    in_q[i] = 0
                    changes[i] = 0
                    resched[i] = 0

            # Step 4: reschedule neurons whose output or input changed.
            touched.sort()
            for i in touched:
                if y[i] == 0:
                    self._schedule(i)
                else:
                    sched[i] = _NAN

            if len(heap) > 64 and len(heap) > 4 * self.n:
                self._compact()
                heap = self._heap

            self.event_count += 1
            events_done += 1
            if watch >= 0 and watch_y0 == 1 and y[watch] == 0:
                status = WATCH_EVENT
                break
            if 0 <= max_events <= events_done:
                status = MAX_EVENTS
                break

        rows = (rec_t, rec_i, rec_k, rec_e) if record else None
        return status, rows

    def _compact(self):
        self._heap = [
            (tc, i) for i, tc in enumerate(self._sched)
            if tc == tc and self.y[i] == 0
        ]
        heapq.heapify(self._heap)

    # -- observation -----------------------------------------------------

    def materialize(self) -> np.ndarray:
        """Exact voltages at the current time (read-only; refs unchanged)."""
        n = self.n
        out = np.empty(n, dtype=np.float64)
        t, tau = self.t, self.tau
        v_ref, t_ref, u = self.v_ref, self.t_ref, self.u
        for i in range(n):
            ufl = float(u[i])
            out[i] = ufl + (v_ref[i] - ufl) * math.exp(-(t - t_ref[i]) / tau)
        return out

    def outputs(self) -> np.ndarray:
        return np.asarray(self.y, dtype=np.uint8)

    def refs(self):
        """Internal anchors as numpy arrays (for checkpointing)."""
        return (
            np.asarray(self.v_ref, dtype=np.float64),
            np.asarray(self.t_ref, dtype=np.float64),
            np.asarray(self.y, dtype=np.uint8),
        )
