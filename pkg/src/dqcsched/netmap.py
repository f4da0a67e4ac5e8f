"""Star-network resources and the expansion of nonlocal gates into LLE/SWAP/MOVE activities."""
from __future__ import annotations

import enum
import graphlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .circuit import Circuit, DurationTable, asap_schedule
from .partition import Partition


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    num_qpus: int
    comm_per_qpu: int
    mem_per_qpu: int
    switch_comm: int
    op_duration: int = 2

    def __post_init__(self):
        if self.num_qpus < 2:
            raise NetworkError("a star network needs at least 2 QPUs")
        for name in ("comm_per_qpu", "mem_per_qpu", "switch_comm", "op_duration"):
            if getattr(self, name) < 1:
                raise NetworkError(f"{name} must be >= 1")

    def resources(self) -> list["ResourceId"]:
        out = [COMM_SWITCH]
        for i in range(self.num_qpus):
            out += [comm_qpu(i), mem_qpu(i)]
        return out

    def capacity(self, r: "ResourceId") -> int:
        if r.kind == "comm_switch":
            return self.switch_comm
        if r.qpu is None or not 0 <= r.qpu < self.num_qpus:
            raise NetworkError(f"resource {r} refers to a QPU outside 0..{self.num_qpus - 1}")
        return self.comm_per_qpu if r.kind == "comm_qpu" else self.mem_per_qpu

    def to_dict(self) -> dict:
        return {
            "num_qpus": self.num_qpus,
            "comm_per_qpu": self.comm_per_qpu,
            "mem_per_qpu": self.mem_per_qpu,
            "switch_comm": self.switch_comm,
            "op_duration": self.op_duration,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Topology":
        return cls(
            data["num_qpus"],
            data["comm_per_qpu"],
            data["mem_per_qpu"],
            data["switch_comm"],
            data.get("op_duration", 2),
        )


PAPER_2QPU = Topology(num_qpus=2, comm_per_qpu=2, mem_per_qpu=2, switch_comm=2, op_duration=2)
PAPER_4QPU = Topology(num_qpus=4, comm_per_qpu=4, mem_per_qpu=4, switch_comm=4, op_duration=2)
PRESETS = {"paper2qpu": PAPER_2QPU, "paper4qpu": PAPER_4QPU}

_RESOURCE_KINDS = ("comm_switch", "comm_qpu", "mem_qpu")


@dataclass(frozen=True, order=True)
class ResourceId:
    kind: str
    qpu: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _RESOURCE_KINDS:
            raise NetworkError(f"unknown resource kind {self.kind!r}")
        if (self.kind == "comm_switch") != (self.qpu is None):
            raise NetworkError("only QPU resources carry a QPU index")

    def __str__(self) -> str:
        return self.kind if self.qpu is None else f"{self.kind}:{self.qpu}"

    @classmethod
    def parse(cls, text: str) -> "ResourceId":
        kind, _, idx = text.partition(":")
        return cls(kind, int(idx) if idx else None)

    def sort_key(self) -> tuple:
        return (_RESOURCE_KINDS.index(self.kind) if self.qpu is None else 1, self.qpu or 0, self.kind)


COMM_SWITCH = ResourceId("comm_switch")


def comm_qpu(i: int) -> ResourceId:
    return ResourceId("comm_qpu", i)


def mem_qpu(i: int) -> ResourceId:
    return ResourceId("mem_qpu", i)


class ActivityKind(str, enum.Enum):
    LLE = "lle"
    SWAP = "swap"
    MOVE = "move"
    TASK = "task"  # plain RCPSP activity outside the job structure


@dataclass(frozen=True)
class Activity:
    id: int
    kind: ActivityKind
    duration: int
    demands: Mapping[ResourceId, int] = field(default_factory=dict)
    preds: frozenset[int] = frozenset()
    job: Optional[int] = None
    qpu: Optional[int] = None  # LLE endpoint
    qpus: Optional[tuple[int, int]] = None  # job's QPU pair, for labels

    def __post_init__(self):
        object.__setattr__(self, "kind", ActivityKind(self.kind))
        object.__setattr__(self, "preds", frozenset(self.preds))
        object.__setattr__(self, "demands", dict(sorted(self.demands.items(), key=lambda kv: kv[0].sort_key())))

    @property
    def label(self) -> str:
        """Short chart label: LLE1s, SW12, MV12 (QPUs numbered from 1)."""
        if self.kind is ActivityKind.LLE and self.qpu is not None:
            return f"LLE{self.qpu + 1}s"
        if self.kind in (ActivityKind.SWAP, ActivityKind.MOVE) and self.qpus is not None:
            prefix = "SW" if self.kind is ActivityKind.SWAP else "MV"
            return f"{prefix}{self.qpus[0] + 1}{self.qpus[1] + 1}"
        return f"A{self.id}"

    def to_dict(self) -> dict:
        data = {
            "id": self.id,
            "kind": self.kind.value,
            "job": self.job,
            "duration": self.duration,
            "demands": {str(r): q for r, q in self.demands.items()},
            "preds": sorted(self.preds),
        }
        if self.qpu is not None:
            data["qpu"] = self.qpu
        if self.qpus is not None:
            data["qpus"] = list(self.qpus)
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "Activity":
        return cls(
            id=data["id"],
            kind=ActivityKind(data["kind"]),
            duration=data["duration"],
            demands={ResourceId.parse(k): v for k, v in data["demands"].items()},
            preds=frozenset(data.get("preds", ())),
            job=data.get("job"),
            qpu=data.get("qpu"),
            qpus=tuple(data["qpus"]) if data.get("qpus") is not None else None,
        )


@dataclass(frozen=True)
class NonlocalGate:
    gate_id: int
    qpus: tuple[int, int]
    start: int


@dataclass(frozen=True)
class Job:
    id: int
    qpus: tuple[int, int]
    gate_id: int


@dataclass(frozen=True)
class ActivityNetwork:
    activities: tuple[Activity, ...]
    topology: Topology
    jobs: tuple[Job, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "activities", tuple(self.activities))
        object.__setattr__(self, "jobs", tuple(self.jobs))

    def __len__(self) -> int:
        return len(self.activities)

    def __getitem__(self, aid: int) -> Activity:
        return self.activities[aid]

    def capacity(self, r: ResourceId) -> int:
        return self.topology.capacity(r)

    def resources(self) -> list[ResourceId]:
        return self.topology.resources()

    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in self.activities]
        for a in self.activities:
            for p in sorted(a.preds):
                succ[p].append(a.id)
        return succ

    def default_horizon(self) -> int:
        return sum(a.duration for a in self.activities)

    def to_dict(self) -> dict:
        return {
            "topology": self.topology.to_dict(),
            "activities": [a.to_dict() for a in self.activities],
            "jobs": [{"id": j.id, "qpus": list(j.qpus), "gate": j.gate_id} for j in self.jobs],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ActivityNetwork":
        return cls(
            tuple(Activity.from_dict(a) for a in data["activities"]),
            Topology.from_dict(data["topology"]),
            tuple(Job(j["id"], tuple(j["qpus"]), j["gate"]) for j in data.get("jobs", ())),
        )


def extract_nonlocal_gates(
    c: Circuit, p: Partition, durations: Optional[DurationTable] = None
) -> list[NonlocalGate]:
    """Two-qubit gates crossing parts, ordered by (ASAP start, gate id)."""
    if len(p.assignment) != c.num_qubits:
        raise NetworkError(f"partition covers {len(p.assignment)} qubits, circuit has {c.num_qubits}")
    gantt = asap_schedule(c, durations)
    found = []
    for g in c.gates:
        if not g.is_two_qubit:
            continue
        pa, pb = (p.assignment[q] for q in g.qubits)
        if pa != pb:
            found.append(NonlocalGate(g.id, (pa, pb), gantt.entry(g.id).start))
    found.sort(key=lambda ng: (ng.start, ng.gate_id))
    return found


def build_activity_network(
    gates: Iterable[NonlocalGate], topology: Topology, op_duration: Optional[int] = None
) -> ActivityNetwork:
    """Expand each nonlocal gate into LLE_i, LLE_j, SWAP, MOVE (ids 4k..4k+3).

    MOVEs are chained across jobs in list order.
    """
    d = topology.op_duration if op_duration is None else op_duration
    if d < 1:
        raise NetworkError("op_duration must be >= 1")
    acts: list[Activity] = []
    jobs: list[Job] = []
    prev_move: Optional[int] = None
    for k, ng in enumerate(gates):
        i, j = ng.qpus
        if i == j or not (0 <= i < topology.num_qpus and 0 <= j < topology.num_qpus):
            raise NetworkError(f"gate {ng.gate_id}: invalid QPU pair {ng.qpus}")
        base = 4 * k
        pair = (i, j)
        acts.append(Activity(base, ActivityKind.LLE, d, {comm_qpu(i): 1, COMM_SWITCH: 1}, job=k, qpu=i, qpus=pair))
        acts.append(Activity(base + 1, ActivityKind.LLE, d, {comm_qpu(j): 1, COMM_SWITCH: 1}, job=k, qpu=j, qpus=pair))
        acts.append(Activity(base + 2, ActivityKind.SWAP, d, {COMM_SWITCH: 2}, {base, base + 1}, job=k, qpus=pair))
        move_preds = {base + 2} if prev_move is None else {base + 2, prev_move}
        acts.append(
            Activity(
                base + 3,
                ActivityKind.MOVE,
                d,
                {comm_qpu(i): 1, mem_qpu(i): 1, comm_qpu(j): 1, mem_qpu(j): 1},
                move_preds,
                job=k,
                qpus=pair,
            )
        )
        prev_move = base + 3
        jobs.append(Job(k, pair, ng.gate_id))
    for a in acts:
        for r, q in a.demands.items():
            if q > topology.capacity(r):
                raise NetworkError(f"activity {a.id} ({a.label}) needs {q} x {r}, capacity is {topology.capacity(r)}")
    return ActivityNetwork(tuple(acts), topology, tuple(jobs))


def find_cycle(n: ActivityNetwork) -> Optional[list[int]]:
    ts = graphlib.TopologicalSorter({a.id: [p for p in a.preds if 0 <= p < len(n)] for a in n.activities})
    try:
        tuple(ts.static_order())
    except graphlib.CycleError as exc:
        return list(exc.args[1])
    return None


def validate_network(n: ActivityNetwork) -> list[str]:
    """All structural problems in the network; an empty list means valid."""
    problems: list[str] = []
    count = len(n.activities)
    for pos, a in enumerate(n.activities):
        if a.id != pos:
            problems.append(f"activity at position {pos} has id {a.id}")
        if a.duration < 1:
            problems.append(f"activity {a.id}: duration {a.duration} < 1")
        for p in a.preds:
            if p == a.id:
                problems.append(f"activity {a.id}: self-loop")
            elif not 0 <= p < count:
                problems.append(f"activity {a.id}: unknown predecessor {p}")
        for r, q in a.demands.items():
            try:
                cap = n.capacity(r)
            except NetworkError as exc:
                problems.append(f"activity {a.id}: {exc}")
                continue
            if q < 1:
                problems.append(f"activity {a.id}: non-positive demand {q} on {r}")
            elif q > cap:
                problems.append(f"activity {a.id}: demand {q} on {r} exceeds capacity {cap}")
    cycle = find_cycle(n)
    if cycle is not None:
        problems.append(f"precedence cycle: {' -> '.join(map(str, cycle))}")

    by_job: dict[int, list[Activity]] = {}
    for a in n.activities:
        if a.job is not None:
            by_job.setdefault(a.job, []).append(a)
        elif a.kind is not ActivityKind.TASK:
            problems.append(f"activity {a.id}: {a.kind.name} outside any job")
    known_jobs = {j.id for j in n.jobs}
    for job_id, acts in sorted(by_job.items()):
        if n.jobs and job_id not in known_jobs:
            problems.append(f"job {job_id}: not listed in network jobs")
        kinds = sorted(a.kind.value for a in acts)
        if kinds != ["lle", "lle", "move", "swap"]:
            problems.append(f"job {job_id}: expected 2 LLE + 1 SWAP + 1 MOVE, got {kinds}")
            continue
        lles = [a.id for a in acts if a.kind is ActivityKind.LLE]
        swap = next(a for a in acts if a.kind is ActivityKind.SWAP)
        move = next(a for a in acts if a.kind is ActivityKind.MOVE)
        if not set(lles) <= swap.preds:
            problems.append(f"job {job_id}: SWAP {swap.id} must follow both LLEs {lles}")
        if swap.id not in move.preds:
            problems.append(f"job {job_id}: MOVE {move.id} must follow SWAP {swap.id}")
    for j in n.jobs:
        if j.id not in by_job:
            problems.append(f"job {j.id}: has no activities")
    return problems


def move_chain(n: ActivityNetwork) -> list[int]:
    return [a.id for a in n.activities if a.kind is ActivityKind.MOVE]
