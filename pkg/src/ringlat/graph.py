"""Directed neuron graph and the two primitive neuron functions.

Convention used throughout the package: output y = 0 means the neuron is
firing (emitting a pulse), y = 1 means it is dormant. String-facing APIs
expose the complementary pulse notation via :func:`ringlat.state.pulse_string`.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .config import SchmittConfig


class NetworkGraph:
    """Immutable directed graph of differentiating neurons.

    Edges point from a neuron to the neurons it feeds (parent -> child).
    A neuron's input is the AND of its parents' outputs; neurons with no
    parents read a constant external input bit instead.
    """

    def __init__(
        self,
        parents: Sequence[Sequence[int]],
        external_input: Sequence[int] | int = 1,
    ):
        n = len(parents)
        self.neuron_count = n
        self.parents = tuple(tuple(sorted(p)) for p in parents)

        child_lists: list[list[int]] = [[] for _ in range(n)]
        for child, plist in enumerate(self.parents):
            seen = set()
            for p in plist:
                if not 0 <= p < n:
                    raise ValueError(f"parent {p} of neuron {child} out of range")
                if p == child:
                    raise ValueError(f"neuron {child} has a self-loop")
                if p in seen:
                    raise ValueError(f"duplicate parent {p} of neuron {child}")
                seen.add(p)
                child_lists[p].append(child)
        self.children = tuple(tuple(sorted(c)) for c in child_lists)

        if isinstance(external_input, int):
            ext = np.full(n, external_input, dtype=np.uint8)
        else:
            ext = np.asarray(external_input, dtype=np.uint8)
            if ext.shape != (n,):
                raise ValueError("external_input length must equal neuron count")
        if not np.all((ext == 0) | (ext == 1)):
            raise ValueError("external_input entries must be 0 or 1")
        ext.flags.writeable = False
        self.external_input = ext

        # Flat CSR views used by the schedulers and vectorized helpers.
        self.parent_indptr = np.zeros(n + 1, dtype=np.int32)
        self.child_indptr = np.zeros(n + 1, dtype=np.int32)
        for i in range(n):
            self.parent_indptr[i + 1] = self.parent_indptr[i] + len(self.parents[i])
            self.child_indptr[i + 1] = self.child_indptr[i] + len(self.children[i])
        self.parent_idx = np.fromiter(
            (p for plist in self.parents for p in plist), dtype=np.int32,
            count=int(self.parent_indptr[-1]),
        )
        self.child_idx = np.fromiter(
            (c for clist in self.children for c in clist), dtype=np.int32,
            count=int(self.child_indptr[-1]),
        )
        # Edge list (parent, child), child-major order.
        self.edge_child = np.repeat(
            np.arange(n, dtype=np.int32), np.diff(self.parent_indptr)
        )
        self.edge_parent = self.parent_idx.copy()
        for a in (self.parent_indptr, self.child_indptr, self.parent_idx,
                  self.child_idx, self.edge_child, self.edge_parent):
            a.flags.writeable = False

        self._even_cycles: bool | None = None

    @property
    def edge_count(self) -> int:
        return int(self.edge_parent.shape[0])

    def has_odd_directed_cycle(self) -> bool:
        """True iff some directed cycle has odd length.

        Within each strongly connected component every closed-walk length
        is a multiple of the component's period g (gcd of BFS level
        discrepancies); an odd cycle exists iff some g is odd and the
        component actually contains a cycle.
        """
        if self._even_cycles is not None:
            return not self._even_cycles
        self._even_cycles = True
        for comp in strongly_connected_components(self):
            if len(comp) == 1 and comp[0] not in self.children[comp[0]]:
                # singleton without self-loop: no cycle through it
                continue
            if _component_period(self, comp) % 2 == 1:
                self._even_cycles = False
                break
        return not self._even_cycles

    def __repr__(self):
        return f"NetworkGraph(n={self.neuron_count}, edges={self.edge_count})"


def strongly_connected_components(graph: NetworkGraph) -> list[list[int]]:
    """Iterative Tarjan SCC; returns components as lists of neuron indices."""
    n = graph.neuron_count
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            children = graph.children[v]
            while pi < len(children):
                w = children[pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def _component_period(graph: NetworkGraph, comp: list[int]) -> int:
    """gcd of directed cycle lengths within one strongly connected component."""
    members = set(comp)
    level = {comp[0]: 0}
    queue = [comp[0]]
    g = 0
    while queue:
        v = queue.pop()
        for w in graph.children[v]:
            if w not in members:
                continue
            if w in level:
                g = math.gcd(g, level[v] + 1 - level[w])
            else:
                level[w] = level[v] + 1
                queue.append(w)
    return abs(g)


def compute_input(graph: NetworkGraph, y: np.ndarray, i: int):
    """Input bit of neuron i: AND of parent outputs, or the external default.

    A single firing parent (output 0) pulls the input to 0.
    """
    if not 0 <= i < graph.neuron_count:
        raise IndexError(f"neuron index {i} out of range")
    plist = graph.parents[i]
    if not plist:
        return int(graph.external_input[i])
    out = 1
    for p in plist:
        if y[p] == 0:
            out = 0
            break
    return out


def compute_inputs(graph: NetworkGraph, y: np.ndarray) -> np.ndarray:
    """Vectorized input bits for all neurons."""
    u = graph.external_input.copy()
    has_parents = np.diff(graph.parent_indptr) > 0
    u[has_parents] = 1
    np.minimum.at(u, graph.edge_child, y[graph.edge_parent].astype(np.uint8))
    return u


def schmitt_output(scaled_derivative: float, y_prev: int, cfg: SchmittConfig):
    """Inverting Schmitt trigger with hysteresis.

    Takes tau * dv/dt. Returns 0 (firing) at or above v_thh, keeps firing
    while the derivative stays in [v_thl, v_thh), and returns 1 otherwise.
    """
    if scaled_derivative >= cfg.v_thh:
        return 0
    if scaled_derivative >= cfg.v_thl and y_prev == 0:
        return 0
    return 1
