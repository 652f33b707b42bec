"""Deterministic fail-stop fault injection.

Components of the augmented vectors are owned by processes. When a process
fails, the components it owns stop being updated: they keep the value they
had at the end of the iteration in which the failure happened (the
snapshot), and every aggregation skips them from then on. The redundant
components ``[n, n+k)`` belong to a reliable process that never fails.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .exceptions import FaultCapacityError, InvalidSizeError
from .rng import stream
from .sparse_core import IndexMask

__all__ = [
    "ProcessTopology",
    "FaultEvent",
    "FaultPlan",
    "FaultState",
    "build_topology",
    "plan_from_processes",
    "sample_fault_plan",
    "advance",
]


@dataclass(frozen=True)
class ProcessTopology:
    """Row ownership: process ``i`` owns the components ``assignments[i]``."""

    n: int
    k: int
    assignments: tuple
    reliable_processes: frozenset = frozenset()

    def __post_init__(self):
        seen = sorted(i for block in self.assignments for i in block)
        if seen != list(range(self.n + self.k)):
            raise ValueError("process index sets must partition [0, n+k)")
        for pid in self.reliable_processes:
            if not 0 <= pid < len(self.assignments):
                raise ValueError(f"unknown reliable process {pid}")
        reliable = {i for pid in self.reliable_processes for i in self.assignments[pid]}
        if not set(range(self.n, self.n + self.k)) <= reliable:
            raise ValueError("redundant components must be owned by reliable processes")

    @property
    def n_processes(self):
        return len(self.assignments)

    def indices_of(self, processes: Iterable[int]):
        out = []
        for pid in processes:
            if pid in self.reliable_processes:
                raise ValueError(f"process {pid} is reliable and cannot fail")
            out.extend(self.assignments[pid])
        return tuple(sorted(set(out)))


def build_topology(n, k, blocks=None):
    """Component granularity (``blocks=None``) or ``blocks`` contiguous raw blocks.

    When ``k > 0`` one extra reliable process owns all redundant components.
    """
    if blocks is None:
        assignments = [(i,) for i in range(n)]
    else:
        if blocks < 1:
            raise InvalidSizeError("blocks must be at least 1")
        if blocks > n:
            raise InvalidSizeError(f"cannot split {n} rows into {blocks} nonempty blocks")
        assignments = [tuple(int(i) for i in part)
                       for part in np.array_split(np.arange(n), blocks)]
    reliable = frozenset()
    if k > 0:
        reliable = frozenset({len(assignments)})
        assignments.append(tuple(range(n, n + k)))
    return ProcessTopology(n, k, tuple(assignments), reliable)


@dataclass(frozen=True)
class FaultEvent:
    iteration: int
    victim_indices: tuple

    def __post_init__(self):
        if self.iteration < 1:
            raise ValueError("fault iterations are counted from 1")
        object.__setattr__(self, "victim_indices",
                           tuple(sorted({int(i) for i in self.victim_indices})))


@dataclass(frozen=True)
class FaultPlan:
    """Fault events, each applied at the end of the given iteration.

    Victims are stored as component indices; use
    :func:`plan_from_processes` to build a plan from process ids.
    """

    events: tuple = ()

    def __post_init__(self):
        events = tuple(self.events)
        iters = [e.iteration for e in events]
        if iters != sorted(iters) or len(set(iters)) != len(iters):
            raise ValueError("fault events must have strictly increasing iterations")
        object.__setattr__(self, "events", events)

    @classmethod
    def empty(cls):
        return cls(())

    def __len__(self):
        return len(self.events)

    def event_at(self, iteration) -> FaultEvent | None:
        for e in self.events:
            if e.iteration == iteration:
                return e
        return None

    def all_indices(self):
        return tuple(sorted({i for e in self.events for i in e.victim_indices}))

    def validate(self, n, k):
        """Raise unless every victim is a raw component and at most ``k`` fail."""
        idx = self.all_indices()
        if idx and (idx[0] < 0 or idx[-1] >= n):
            raise ValueError("victims must be raw components in [0, n)")
        if len(idx) > k:
            raise FaultCapacityError(f"plan faults {len(idx)} components, k={k}")

    @property
    def fault_point(self):
        return self.events[0].iteration if self.events else None

    def to_dict(self):
        return {"events": [{"iteration": e.iteration,
                            "victim_indices": list(e.victim_indices)}
                           for e in self.events]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(FaultEvent(int(e["iteration"]), tuple(e["victim_indices"]))
                         for e in data.get("events", [])))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def plan_from_processes(topology: ProcessTopology,
                        events: Sequence[tuple[int, Iterable[int]]]):
    """Translate ``(iteration, process ids)`` pairs into a :class:`FaultPlan`."""
    plan = FaultPlan(tuple(FaultEvent(it, topology.indices_of(pids))
                           for it, pids in events))
    plan.validate(topology.n, topology.k)
    return plan


def sample_fault_plan(n, k, max_iter_fraction, seed):
    """One event: ``k`` distinct raw components failing together.

    The iteration is uniform on ``[1, floor(max_iter_fraction * n)]``
    (at least 1); victims are uniform without replacement from ``[0, n)``.
    """
    if k > n:
        raise InvalidSizeError(f"k={k} exceeds n={n}")
    if not 0 < max_iter_fraction <= 1:
        raise InvalidSizeError("max_iter_fraction must lie in (0, 1]")
    if k == 0:
        return FaultPlan.empty()
    rs = stream(seed, "faults")
    last = max(1, math.floor(max_iter_fraction * n))
    iteration = rs.integer_in(1, last)
    victims = rs.sample(n, k)
    return FaultPlan((FaultEvent(iteration, tuple(victims)),))


@dataclass(frozen=True)
class FaultState:
    """Live fault set with the frozen value of each faulty component."""

    universe_size: int
    capacity: int
    faulty_indices: tuple = ()
    snapshots: dict = field(default_factory=dict)
    last_event_iteration: int | None = None
    clock: int = 0

    @classmethod
    def initial(cls, n, k):
        return cls(universe_size=n + k, capacity=k)

    @property
    def mask(self):
        return IndexMask(self.faulty_indices, self.universe_size)

    def snapshot_vector(self):
        return np.array([self.snapshots[i] for i in self.faulty_indices], dtype=np.float64)

    def __len__(self):
        return len(self.faulty_indices)


def advance(state: FaultState, plan: FaultPlan, iteration, x_current):
    """Apply the plan's event at ``iteration`` (if any).

    Returns ``(new_state, new_faults)``. Snapshots are read from
    ``x_current`` at the moment of failure and never change afterwards.
    """
    if iteration <= state.clock:
        raise ValueError(
            f"iteration {iteration} does not follow {state.clock}")
    event = plan.event_at(iteration)
    if event is None:
        return replace(state, clock=iteration), False
    n_raw = state.universe_size - state.capacity
    if any(not 0 <= i < n_raw for i in event.victim_indices):
        raise ValueError("only raw components [0, n) can fail")
    current = set(state.faulty_indices)
    new = [i for i in event.victim_indices if i not in current]
    if len(current) + len(new) > state.capacity:
        raise FaultCapacityError(
            f"{len(current) + len(new)} faulty components exceed capacity {state.capacity}")
    if not new:
        return replace(state, clock=iteration), False
    snapshots = dict(state.snapshots)
    for i in new:
        snapshots[i] = float(x_current[i])
    faulty = list(state.faulty_indices)
    for i in new:
        bisect.insort(faulty, i)
    return replace(state, faulty_indices=tuple(faulty), snapshots=snapshots,
                   last_event_iteration=iteration, clock=iteration), True
