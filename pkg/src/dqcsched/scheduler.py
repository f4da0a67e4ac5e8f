"""Minimum-makespan scheduling of an activity network under renewable resources.

Time is discrete.  An activity started at ``S`` with duration ``d`` occupies
its demanded resources during ``[S, S + d)`` and must start no earlier than
every predecessor's finish time.
"""
from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .netmap import ActivityNetwork, ResourceId, validate_network

ORACLE_MAX_ACTIVITIES = 12


class SchedulingError(RuntimeError):
    pass


class InfeasibleError(SchedulingError):
    """No schedule fits inside the horizon (search completed)."""


class Method(str, enum.Enum):
    GREEDY = "greedy"
    EXACT = "exact"
    ORACLE = "oracle"


@dataclass(frozen=True)
class SolverLimits:
    horizon: Optional[int] = None  # None: sum of all durations
    node_budget: Optional[int] = None
    wall_limit: Optional[float] = None  # seconds

    def resolve_horizon(self, n: ActivityNetwork) -> int:
        T = n.default_horizon() if self.horizon is None else self.horizon
        longest = max((a.duration for a in n.activities), default=0)
        if T < longest:
            raise SchedulingError(f"horizon {T} is shorter than the longest activity ({longest})")
        return T


@dataclass(frozen=True)
class Schedule:
    starts: Mapping[int, int]
    method: Method
    makespan: int = 0
    proved_optimal: bool = False
    limit_reached: bool = False
    nodes: int = 0

    def is_complete(self, n: ActivityNetwork) -> bool:
        return all(a.id in self.starts for a in n.activities)

    def to_dict(self, n: ActivityNetwork) -> dict:
        return {
            "method": self.method.value,
            "makespan": self.makespan,
            "proved_optimal": self.proved_optimal,
            "starts": {str(a.id): self.starts.get(a.id, -1) for a in n.activities},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Schedule":
        starts = {int(k): v for k, v in data["starts"].items() if v >= 0}
        return cls(starts, Method(data["method"]), data["makespan"], data.get("proved_optimal", False))


def _make_schedule(n: ActivityNetwork, starts: Mapping[int, int], method: Method, **kw) -> Schedule:
    starts = dict(sorted(starts.items()))
    makespan = max((s + n[a].duration for a, s in starts.items()), default=0)
    return Schedule(starts, method, makespan, **kw)


class ResourceProfile:
    """Remaining capacity per resource over ``[0, horizon)``."""

    def __init__(self, n: ActivityNetwork, horizon: int):
        self.horizon = horizon
        self.capacity = {r: n.capacity(r) for r in n.resources()}
        self.remaining = {r: [cap] * horizon for r, cap in self.capacity.items()}

    def fits(self, demands: Mapping[ResourceId, int], start: int, duration: int) -> bool:
        if start < 0 or start + duration > self.horizon:
            return False
        for r, q in demands.items():
            row = self.remaining[r]
            for t in range(start, start + duration):
                if row[t] < q:
                    return False
        return True

    def debit(self, demands, start: int, duration: int) -> None:
        for r, q in demands.items():
            row = self.remaining[r]
            for t in range(start, start + duration):
                row[t] -= q

    def credit(self, demands, start: int, duration: int) -> None:
        for r, q in demands.items():
            row = self.remaining[r]
            for t in range(start, start + duration):
                row[t] += q

    def usage(self, r: ResourceId, t: int) -> int:
        return self.capacity[r] - self.remaining[r][t]


def _require_valid(n: ActivityNetwork) -> None:
    problems = validate_network(n)
    if problems:
        raise SchedulingError("invalid activity network: " + "; ".join(problems))


def topological_order(n: ActivityNetwork) -> list[int]:
    """Precedence-closed order, smallest ready id first."""
    indeg = [len(a.preds) for a in n.activities]
    succ = n.successors()
    heap = [a.id for a in n.activities if indeg[a.id] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != len(n.activities):
        raise SchedulingError("precedence graph has a cycle")
    return order


def tails(n: ActivityNetwork) -> list[int]:
    """Longest duration-weighted path from each activity's finish to the end."""
    succ = n.successors()
    q = [0] * len(n.activities)
    for u in reversed(topological_order(n)):
        q[u] = max((n[v].duration + q[v] for v in succ[u]), default=0)
    return q


def critical_path_length(n: ActivityNetwork) -> int:
    q = tails(n)
    return max((a.duration + q[a.id] for a in n.activities), default=0)


def lower_bound(n: ActivityNetwork) -> int:
    """max(critical path, max_r ceil(sum_j R_jr * d_j / B_r))."""
    energy: dict[ResourceId, int] = {}
    for a in n.activities:
        for r, q in a.demands.items():
            energy[r] = energy.get(r, 0) + q * a.duration
    resource_bound = max((math.ceil(e / n.capacity(r)) for r, e in energy.items()), default=0)
    return max(critical_path_length(n), resource_bound)


def greedy_schedule(n: ActivityNetwork, limits: SolverLimits = SolverLimits()) -> Schedule:
    """Time-stepped greedy placement.

    At each time step the ready set is every unscheduled activity whose
    predecessors have all been placed (their finish may lie in the future).
    Ready activities are tried in ascending id at
    ``max(time, latest predecessor finish)`` and placed if they end inside
    the horizon and resources are free over their whole window.
    Activities that never fit are left out of ``starts``.
    """
    _require_valid(n)
    T = limits.resolve_horizon(n)
    profile = ResourceProfile(n, T)
    starts: dict[int, int] = {}
    for now in range(T):
        if len(starts) == len(n.activities):
            break
        ready = [a for a in n.activities if a.id not in starts and all(p in starts for p in a.preds)]
        for a in ready:
            est = max([now] + [starts[p] + n[p].duration for p in a.preds])
            if est + a.duration > T:
                continue
            if profile.fits(a.demands, est, a.duration):
                starts[a.id] = est
                profile.debit(a.demands, est, a.duration)
    return _make_schedule(n, starts, Method.GREEDY)


class _Search:
    """Depth-first branch and bound over start times in a fixed activity order."""

    def __init__(self, n: ActivityNetwork, T: int, limits: SolverLimits):
        self.n = n
        self.T = T
        self.limits = limits
        self.order = topological_order(n)
        self.tail = tails(n)
        self.profile = ResourceProfile(n, T)
        self.starts: dict[int, int] = {}
        self.users: dict[ResourceId, list[int]] = {}
        for a in n.activities:
            for r in a.demands:
                self.users.setdefault(r, []).append(a.id)
        self.nodes = 0
        self.aborted = False
        self.deadline = None if limits.wall_limit is None else time.monotonic() + limits.wall_limit
        self.best: Optional[dict[int, int]] = None
        self.ub = T + 1  # looking for makespan < ub
        # (activity, t): placed later than its earliest start and not yet
        # blocked at t = start - 1, so a later activity must block it there
        self.unjustified: list[tuple[int, int]] = []

    def bound(self, depth: int) -> int:
        n, starts = self.n, self.starts
        done = max((s + n[a].duration for a, s in starts.items()), default=0)
        release: dict[int, int] = {}
        cp = done
        for a_id in self.order[depth:]:
            a = n[a_id]
            r = 0
            for p in a.preds:
                r = max(r, starts[p] + n[p].duration if p in starts else release[p] + n[p].duration)
            release[a_id] = r
            cp = max(cp, r + a.duration + self.tail[a_id])
        best = cp
        # energy of unplaced users must fit in the free capacity after their
        # earliest release; the last of them to finish still has its tail to run
        for res, users in self.users.items():
            pending = [u for u in users if u not in starts]
            if not pending:
                continue
            energy = sum(n[u].demands[res] * n[u].duration for u in pending)
            t = min(release[u] for u in pending)
            row = self.profile.remaining[res]
            while energy > 0 and t < self.T:
                energy -= row[t]
                t += 1
            if energy > 0:
                return math.inf
            best = max(best, t + min(self.tail[u] for u in pending))
        if not self._justifiable(release):
            return math.inf
        return best

    def _blocked(self, a_id: int, t: int) -> bool:
        rem = self.profile.remaining
        return any(rem[r][t] < q for r, q in self.n[a_id].demands.items())

    def _justifiable(self, release: Mapping[int, int]) -> bool:
        """Can every delayed activity still end up blocked one step before its start?

        Some optimal schedule has every activity at its precedence-earliest
        start or unable to move one step left, so other branches can be cut.
        """
        n = self.n
        for a_id, t in self.unjustified:
            if self._blocked(a_id, t):
                continue
            ok = False
            for r, q in n[a_id].demands.items():
                need = self.profile.remaining[r][t] - q + 1
                supply = sum(
                    n[u].demands[r]
                    for u in self.users[r]
                    if u not in self.starts and release[u] <= t
                )
                if supply >= need:
                    ok = True
                    break
            if not ok:
                return False
        return True

    def out_of_budget(self) -> bool:
        if self.limits.node_budget is not None and self.nodes >= self.limits.node_budget:
            return True
        if self.deadline is not None and self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            return True
        return False

    def run(self, depth: int = 0) -> None:
        if self.aborted:
            return
        self.nodes += 1
        if self.out_of_budget():
            self.aborted = True
            return
        n = self.n
        if depth == len(self.order):
            makespan = max((s + n[a].duration for a, s in self.starts.items()), default=0)
            if makespan < self.ub:
                self.ub = makespan
                self.best = dict(self.starts)
            return
        if self.bound(depth) >= self.ub:
            return
        a = n[self.order[depth]]
        est = max((self.starts[p] + n[p].duration for p in a.preds), default=0)
        latest = min(self.T - a.duration, self.ub - 1 - a.duration - self.tail[a.id])
        for s in range(est, latest + 1):
            if s + a.duration + self.tail[a.id] >= self.ub:
                break
            if not self.profile.fits(a.demands, s, a.duration):
                continue
            delayed = s > est and not self._blocked(a.id, s - 1)
            if delayed and not a.demands:
                break  # nothing can ever block it
            self.profile.debit(a.demands, s, a.duration)
            self.starts[a.id] = s
            if delayed:
                self.unjustified.append((a.id, s - 1))
            self.run(depth + 1)
            if delayed:
                self.unjustified.pop()
            del self.starts[a.id]
            self.profile.credit(a.demands, s, a.duration)
            if self.aborted:
                return


def exact_schedule(n: ActivityNetwork, limits: SolverLimits = SolverLimits()) -> Schedule:
    """Minimum-makespan schedule by branch and bound, seeded with the greedy incumbent.

    Raises :class:`InfeasibleError` when the search finishes without any
    schedule inside the horizon.  If a node or wall limit stops the search,
    the best incumbent comes back with ``proved_optimal=False``.
    """
    _require_valid(n)
    T = limits.resolve_horizon(n)
    if not n.activities:
        return Schedule({}, Method.EXACT, 0, proved_optimal=True)
    incumbent = greedy_schedule(n, limits)
    search = _Search(n, T, limits)
    if incumbent.is_complete(n):
        search.best = dict(incumbent.starts)
        search.ub = incumbent.makespan
    if search.best is None or lower_bound(n) < search.ub:
        search.run()
    if search.aborted:
        starts = search.best if search.best is not None else incumbent.starts
        return _make_schedule(n, starts, Method.EXACT, limit_reached=True, nodes=search.nodes)
    if search.best is None:
        raise InfeasibleError(f"no feasible schedule within horizon {T}")
    return _make_schedule(n, search.best, Method.EXACT, proved_optimal=True, nodes=search.nodes)


def brute_force_schedule(n: ActivityNetwork, limits: SolverLimits = SolverLimits()) -> Schedule:
    """Reference optimum by plain enumeration.

    Tries makespans C from the critical-path length up to T and enumerates
    every start vector whose precedence windows fit inside C, checking
    resources as each start is fixed.  No resource bounds, no incumbent.
    """
    if len(n.activities) > ORACLE_MAX_ACTIVITIES:
        raise SchedulingError(f"oracle is limited to {ORACLE_MAX_ACTIVITIES} activities, got {len(n.activities)}")
    _require_valid(n)
    T = limits.resolve_horizon(n)
    order = topological_order(n)
    tail = tails(n)
    acts = n.activities

    def search(C: int) -> Optional[dict[int, int]]:
        profile = ResourceProfile(n, C)
        starts: dict[int, int] = {}

        def rec(depth: int) -> bool:
            if depth == len(order):
                return True
            a = acts[order[depth]]
            est = max((starts[p] + acts[p].duration for p in a.preds), default=0)
            for s in range(est, C - a.duration - tail[a.id] + 1):
                if profile.fits(a.demands, s, a.duration):
                    profile.debit(a.demands, s, a.duration)
                    starts[a.id] = s
                    if rec(depth + 1):
                        return True
                    del starts[a.id]
                    profile.credit(a.demands, s, a.duration)
            return False

        return dict(starts) if rec(0) else None

    for C in range(critical_path_length(n), T + 1):
        found = search(C)
        if found is not None:
            return _make_schedule(n, found, Method.ORACLE, proved_optimal=True)
    raise InfeasibleError(f"no feasible schedule within horizon {T}")


@dataclass(frozen=True)
class Violation:
    kind: str  # missing | negative | precedence | capacity | horizon | unknown
    activities: tuple[int, ...]
    time: Optional[int]
    message: str

    def __str__(self) -> str:
        return self.message


def validate_schedule(
    n: ActivityNetwork, s: Schedule, horizon: Optional[int] = None
) -> list[Violation]:
    """Rebuild resource usage from the start times and report every violation."""
    out: list[Violation] = []
    T = n.default_horizon() if horizon is None else horizon
    ids = {a.id for a in n.activities}
    for a_id in sorted(set(s.starts) - ids):
        out.append(Violation("unknown", (a_id,), None, f"start given for unknown activity {a_id}"))
    for a in n.activities:
        if a.id not in s.starts:
            out.append(Violation("missing", (a.id,), None, f"activity {a.id} ({a.label}) is not scheduled"))
            continue
        start = s.starts[a.id]
        if start < 0:
            out.append(Violation("negative", (a.id,), start, f"activity {a.id} starts at negative time {start}"))
        if start + a.duration > T:
            out.append(Violation("horizon", (a.id,), start, f"activity {a.id} ends at {start + a.duration} > horizon {T}"))
        for p in sorted(a.preds):
            if p in s.starts and start < s.starts[p] + n[p].duration:
                out.append(
                    Violation(
                        "precedence",
                        (p, a.id),
                        start,
                        f"activity {a.id} starts at {start} before predecessor {p} ends at {s.starts[p] + n[p].duration}",
                    )
                )
    usage: dict[tuple[ResourceId, int], list[int]] = {}
    for a in n.activities:
        if a.id not in s.starts:
            continue
        for t in range(s.starts[a.id], s.starts[a.id] + a.duration):
            for r in a.demands:
                usage.setdefault((r, t), []).append(a.id)
    for (r, t), users in sorted(usage.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1])):
        total = sum(n[u].demands[r] for u in users)
        cap = n.capacity(r)
        if total > cap:
            out.append(Violation("capacity", tuple(users), t, f"{r} at t={t}: usage {total} > capacity {cap} by {users}"))
    declared = max((s.starts[a.id] + a.duration for a in n.activities if a.id in s.starts), default=0)
    if declared != s.makespan:
        out.append(Violation("makespan", (), None, f"declared makespan {s.makespan} != actual {declared}"))
    return out


@dataclass
class ComparisonReport:
    greedy: Schedule
    exact: Schedule
    greedy_violations: list[Violation] = field(default_factory=list)
    exact_violations: list[Violation] = field(default_factory=list)
    lower_bound: int = 0

    @property
    def gap(self) -> int:
        return self.greedy.makespan - self.exact.makespan

    @property
    def valid(self) -> bool:
        return not self.greedy_violations and not self.exact_violations

    def to_dict(self) -> dict:
        return {
            "greedy_makespan": self.greedy.makespan,
            "exact_makespan": self.exact.makespan,
            "gap": self.gap,
            "lower_bound": self.lower_bound,
            "exact_proved_optimal": self.exact.proved_optimal,
            "greedy_valid": not self.greedy_violations,
            "exact_valid": not self.exact_violations,
            "greedy_violations": [str(v) for v in self.greedy_violations],
            "exact_violations": [str(v) for v in self.exact_violations],
        }


def compare_methods(n: ActivityNetwork, limits: SolverLimits = SolverLimits()) -> ComparisonReport:
    T = limits.resolve_horizon(n)
    greedy = greedy_schedule(n, limits)
    exact = exact_schedule(n, limits)
    return ComparisonReport(
        greedy,
        exact,
        validate_schedule(n, greedy, T),
        validate_schedule(n, exact, T),
        lower_bound(n),
    )
