"""Event records and the columnar event log."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np


class TransitionKind(enum.IntEnum):
    """The three ways a neuron's output can change."""

    AutonomousStop = 0   # firing -> dormant, derivative decayed to v_thl
    InputDrivenStart = 1  # dormant -> firing, input rose with enough discharge
    InputDrivenStop = 2   # firing -> dormant, input dropped (pulse dies/moves)


_KIND_NAMES = {
    TransitionKind.AutonomousStop: "auto_stop",
    TransitionKind.InputDrivenStart: "drive_start",
    TransitionKind.InputDrivenStop: "drive_stop",
}
_KIND_FROM_NAME = {v: k for k, v in _KIND_NAMES.items()}


def kind_name(kind: int) -> str:
    return _KIND_NAMES[TransitionKind(kind)]


@dataclass(frozen=True)
class EventRecord:
    """One autonomous event plus its instantaneous cascade.

    autonomous_neurons is the nonempty tie-grouped set that crossed the
    lower threshold; cascade lists the input-driven transitions in
    processing order and never contains AutonomousStop entries.
    """

    time: float
    autonomous_neurons: tuple[int, ...]
    cascade: tuple[tuple[int, TransitionKind], ...]

    def __post_init__(self):
        if not self.autonomous_neurons:
            raise ValueError("autonomous_neurons must be nonempty")
        if any(k == TransitionKind.AutonomousStop for _, k in self.cascade):
            raise ValueError("cascade cannot contain AutonomousStop entries")


class EventLog:
    """Append-only columnar log of output transitions.

    Rows are (time, neuron, kind) with an event id grouping rows that
    belong to the same instantaneous event.
    """

    def __init__(self):
        self.times: list[float] = []
        self.neurons: list[int] = []
        self.kinds: list[int] = []
        self.event_ids: list[int] = []

    def __len__(self):
        return len(self.times)

    @property
    def event_count(self) -> int:
        return self.event_ids[-1] + 1 if self.event_ids else 0

    def append_event(self, record: EventRecord):
        eid = self.event_count
        for i in record.autonomous_neurons:
            self._push(record.time, i, int(TransitionKind.AutonomousStop), eid)
        for i, k in record.cascade:
            self._push(record.time, i, int(k), eid)

    def _push(self, t: float, neuron: int, kind: int, eid: int):
        self.times.append(t)
        self.neurons.append(neuron)
        self.kinds.append(kind)
        self.event_ids.append(eid)

    def extend_raw(self, times, neurons, kinds, event_ids):
        """Bulk append from parallel arrays (scheduler output)."""
        base = self.event_count
        self.times.extend(float(t) for t in times)
        self.neurons.extend(int(i) for i in neurons)
        self.kinds.extend(int(k) for k in kinds)
        self.event_ids.extend(base + int(e) for e in event_ids)

    def to_records(self) -> list[EventRecord]:
        records = []
        i, m = 0, len(self.times)
        while i < m:
            j = i
            auto, casc = [], []
            while j < m and self.event_ids[j] == self.event_ids[i]:
                if self.kinds[j] == TransitionKind.AutonomousStop:
                    auto.append(self.neurons[j])
                else:
                    casc.append((self.neurons[j], TransitionKind(self.kinds[j])))
                j += 1
            records.append(EventRecord(self.times[i], tuple(auto), tuple(casc)))
            i = j
        return records

    def times_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=np.float64)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "neuron", "kind"])
            for t, i, k in zip(self.times, self.neurons, self.kinds):
                w.writerow([repr(t), i, kind_name(k)])

    @classmethod
    def read_csv(cls, path) -> "EventLog":
        log = cls()
        eid = -1
        prev_t = None
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            if header != ["time", "neuron", "kind"]:
                raise ValueError(f"unexpected event log header: {header}")
            for row in rd:
                t = float(row[0])
                kind = int(_KIND_FROM_NAME[row[2]])
                # A new event starts at each new time or at an auto_stop row
                # that follows cascade rows.
                if t != prev_t or (
                    kind == TransitionKind.AutonomousStop
                    and log.kinds and log.kinds[-1] != TransitionKind.AutonomousStop
                    and log.times[-1] == t
                ):
                    eid += 1
                    prev_t = t
                log._push(t, int(row[1]), kind, eid)
        return log
