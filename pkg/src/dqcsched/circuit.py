"""Circuit IR: gates, QFT construction, SWAP decomposition, DAG and ASAP Gantt view."""
from __future__ import annotations

import enum
import graphlib
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union


class CircuitError(ValueError):
    pass


class CircuitParseError(CircuitError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class GateKind(str, enum.Enum):
    H = "h"
    CP = "cp"
    SWAP = "swap"
    CNOT = "cnot"

    @property
    def arity(self) -> int:
        return 1 if self is GateKind.H else 2


@dataclass(frozen=True)
class DurationTable:
    """Integer gate durations by kind.

    Undecomposed SWAP is treated as a single 3-step gate; the CNOTs it
    decomposes into get the two-qubit default.
    """

    durations: Mapping[GateKind, int] = field(
        default_factory=lambda: {
            GateKind.H: 1,
            GateKind.CP: 2,
            GateKind.SWAP: 3,
            GateKind.CNOT: 2,
        }
    )

    def __post_init__(self):
        table = {GateKind(k): int(v) for k, v in self.durations.items()}
        for kind in GateKind:
            if kind not in table:
                raise CircuitError(f"missing duration for {kind.name}")
            if table[kind] < 1:
                raise CircuitError(f"duration for {kind.name} must be >= 1")
        object.__setattr__(self, "durations", table)

    def __getitem__(self, kind: GateKind) -> int:
        return self.durations[kind]

    def to_dict(self) -> dict:
        return {k.value: v for k, v in self.durations.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, int]) -> "DurationTable":
        table = dict(cls().durations)
        for key, value in data.items():
            try:
                kind = GateKind(key.lower())
            except ValueError:
                raise CircuitError(f"unknown gate kind in duration table: {key!r}") from None
            table[kind] = value
        return cls(table)


DEFAULT_DURATIONS = DurationTable()


@dataclass(frozen=True)
class Gate:
    id: int
    kind: GateKind
    qubits: tuple[int, ...]
    angle: Optional[Fraction] = None  # multiple of pi, CP only
    duration: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise CircuitError(f"{self.kind.name} takes {self.kind.arity} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"gate {self.id}: repeated qubit in {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"gate {self.id}: negative qubit index")
        if self.kind is GateKind.CP:
            if self.angle is None:
                raise CircuitError(f"gate {self.id}: CP needs an angle")
            object.__setattr__(self, "angle", Fraction(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"gate {self.id}: only CP carries an angle")
        if self.duration < 1:
            raise CircuitError(f"gate {self.id}: duration must be >= 1")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        for pos, g in enumerate(self.gates):
            if g.id != pos:
                raise CircuitError(f"gate ids must be dense in program order (position {pos} has id {g.id})")
            if max(g.qubits) >= self.num_qubits:
                raise CircuitError(f"gate {g.id}: qubit index out of range for {self.num_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, kind: GateKind) -> int:
        return sum(1 for g in self.gates if g.kind is kind)

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "gates": [
                {
                    "id": g.id,
                    "kind": g.kind.value,
                    "qubits": list(g.qubits),
                    "angle": None if g.angle is None else str(g.angle),
                    "duration": g.duration,
                }
                for g in self.gates
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Circuit":
        gates = [
            Gate(
                id=d["id"],
                kind=GateKind(d["kind"]),
                qubits=tuple(d["qubits"]),
                angle=None if d.get("angle") is None else Fraction(d["angle"]),
                duration=d.get("duration", 1),
            )
            for d in data["gates"]
        ]
        return cls(data["num_qubits"], tuple(gates))


def make_circuit(
    num_qubits: int,
    ops: Iterable[tuple],
    durations: DurationTable = DEFAULT_DURATIONS,
) -> Circuit:
    """Build a circuit from ``(kind, qubits[, angle])`` tuples, numbering gates densely."""
    gates = []
    for i, op in enumerate(ops):
        kind = GateKind(op[0])
        angle = op[2] if len(op) > 2 else None
        gates.append(Gate(i, kind, tuple(op[1]), angle, durations[kind]))
    return Circuit(num_qubits, tuple(gates))


def build_qft(n: int, durations: DurationTable = DEFAULT_DURATIONS) -> Circuit:
    if n < 1:
        raise CircuitError("QFT needs n >= 1")
    ops: list[tuple] = []
    for i in range(n):
        ops.append((GateKind.H, (i,)))
        for j in range(i + 1, n):
            ops.append((GateKind.CP, (j, i), Fraction(1, 2 ** (j - i))))
    for i in range(n // 2):
        ops.append((GateKind.SWAP, (i, n - 1 - i)))
    return make_circuit(n, ops, durations)


def decompose_swaps(c: Circuit, durations: DurationTable = DEFAULT_DURATIONS) -> Circuit:
    """Replace each SWAP(a, b) by CNOT(a, b), CNOT(b, a), CNOT(a, b)."""
    gates: list[Gate] = []
    for g in c.gates:
        if g.kind is GateKind.SWAP:
            a, b = g.qubits
            for pair in ((a, b), (b, a), (a, b)):
                gates.append(Gate(len(gates), GateKind.CNOT, pair, None, durations[GateKind.CNOT]))
        else:
            gates.append(replace(g, id=len(gates)))
    return Circuit(c.num_qubits, tuple(gates))


# DAG -------------------------------------------------------------------------

Node = Union[int, tuple[str, int]]


def input_node(q: int) -> tuple[str, int]:
    return ("in", q)


def output_node(q: int) -> tuple[str, int]:
    return ("out", q)


@dataclass(frozen=True)
class CircuitDag:
    num_qubits: int
    gate_ids: tuple[int, ...]
    edges: tuple[tuple[Node, Node, int], ...]

    @property
    def nodes(self) -> list[Node]:
        return (
            [input_node(q) for q in range(self.num_qubits)]
            + list(self.gate_ids)
            + [output_node(q) for q in range(self.num_qubits)]
        )

    def predecessors(self, gate_id: int) -> list[int]:
        """Gate-node predecessors (sentinels dropped), deduplicated, ascending."""
        return sorted({u for u, v, _ in self.edges if v == gate_id and isinstance(u, int)})

    def qubit_path(self, q: int) -> list[Node]:
        succ = {u: v for u, v, lab in self.edges if lab == q}
        path: list[Node] = [input_node(q)]
        while path[-1] in succ:
            path.append(succ[path[-1]])
        return path

    def is_acyclic(self) -> bool:
        ts = graphlib.TopologicalSorter()
        for node in self.nodes:
            ts.add(node)
        for u, v, _ in self.edges:
            ts.add(v, u)
        try:
            tuple(ts.static_order())
        except graphlib.CycleError:
            return False
        return True

    def longest_gate_chain(self) -> int:
        """Number of gate nodes on the longest path (circuit depth in gates)."""
        depth: dict[int, int] = {}
        for gid in self.gate_ids:
            depth[gid] = 1 + max((depth[p] for p in self.predecessors(gid)), default=0)
        return max(depth.values(), default=0)


def to_dag(c: Circuit) -> CircuitDag:
    last: dict[int, Node] = {q: input_node(q) for q in range(c.num_qubits)}
    edges: list[tuple[Node, Node, int]] = []
    for g in c.gates:
        for q in g.qubits:
            edges.append((last[q], g.id, q))
            last[q] = g.id
    for q in range(c.num_qubits):
        edges.append((last[q], output_node(q), q))
    return CircuitDag(c.num_qubits, tuple(g.id for g in c.gates), tuple(edges))


# Gantt -----------------------------------------------------------------------


@dataclass(frozen=True)
class GanttEntry:
    gate_id: int
    start: int
    end: int


@dataclass(frozen=True)
class GanttSchedule:
    entries: tuple[GanttEntry, ...]

    @property
    def horizon(self) -> int:
        return max((e.end for e in self.entries), default=0)

    def entry(self, gate_id: int) -> GanttEntry:
        return self.entries[gate_id]

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "entries": [[e.gate_id, e.start, e.end] for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GanttSchedule":
        return cls(tuple(GanttEntry(*map(int, row)) for row in data["entries"]))


def asap_schedule(c: Circuit, durations: Optional[DurationTable] = None) -> GanttSchedule:
    """Start every gate at the latest current end time among its qubits.

    With ``durations=None`` each gate's own ``duration`` is used.
    """
    frontier = [0] * c.num_qubits
    entries = []
    for g in c.gates:
        d = g.duration if durations is None else durations[g.kind]
        start = max(frontier[q] for q in g.qubits)
        for q in g.qubits:
            frontier[q] = start + d
        entries.append(GanttEntry(g.id, start, start + d))
    return GanttSchedule(tuple(entries))


def validate_gantt(
    c: Circuit, gantt: GanttSchedule, durations: Optional[DurationTable] = None
) -> list[str]:
    """Check durations, per-qubit non-overlap and DAG precedence; returns violations."""
    problems: list[str] = []
    by_id = {e.gate_id: e for e in gantt.entries}
    if sorted(by_id) != [g.id for g in c.gates]:
        problems.append("entries do not cover the circuit's gates exactly once")
        return problems
    for g in c.gates:
        e = by_id[g.id]
        d = g.duration if durations is None else durations[g.kind]
        if e.end - e.start != d:
            problems.append(f"gate {g.id}: span {e.end - e.start} != duration {d}")
        if e.start < 0:
            problems.append(f"gate {g.id}: negative start {e.start}")
    gates = c.gates
    for i in range(len(gates)):
        for j in range(i + 1, len(gates)):
            shared = set(gates[i].qubits) & set(gates[j].qubits)
            if not shared:
                continue
            a, b = by_id[gates[i].id], by_id[gates[j].id]
            if a.start < b.end and b.start < a.end:
                problems.append(f"gates {gates[i].id} and {gates[j].id} overlap on qubit(s) {sorted(shared)}")
    dag = to_dag(c)
    for g in c.gates:
        for p in dag.predecessors(g.id):
            if by_id[g.id].start < by_id[p].end:
                problems.append(f"gate {g.id} starts at {by_id[g.id].start} before predecessor {p} ends at {by_id[p].end}")
    return problems


# Text format -----------------------------------------------------------------


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    for g in c.gates:
        qs = " ".join(str(q) for q in g.qubits)
        if g.kind is GateKind.CP:
            lines.append(f"cp {qs} {g.angle.numerator}/{g.angle.denominator}")
        else:
            lines.append(f"{g.kind.value} {qs}")
    return "\n".join(lines) + "\n"


def _parse_int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CircuitParseError(lineno, f"expected integer {what}, got {tok!r}") from None


def parse_circuit(text: str, durations: DurationTable = DEFAULT_DURATIONS) -> Circuit:
    num_qubits: Optional[int] = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0].lower()
        if num_qubits is None:
            if head != "qubits" or len(toks) != 2:
                raise CircuitParseError(lineno, "expected header 'qubits <n>'")
            num_qubits = _parse_int(toks[1], lineno, "qubit count")
            if num_qubits < 1:
                raise CircuitParseError(lineno, "qubit count must be >= 1")
            continue
        if head == "qubits":
            raise CircuitParseError(lineno, "duplicate 'qubits' header")
        try:
            kind = GateKind(head)
        except ValueError:
            raise CircuitParseError(lineno, f"unknown gate kind {toks[0]!r}") from None
        nargs = kind.arity + (1 if kind is GateKind.CP else 0)
        if len(toks) - 1 != nargs:
            raise CircuitParseError(lineno, f"{head} expects {nargs} argument(s), got {len(toks) - 1}")
        qubits = tuple(_parse_int(t, lineno, "qubit index") for t in toks[1 : 1 + kind.arity])
        for q in qubits:
            if not 0 <= q < num_qubits:
                raise CircuitParseError(lineno, f"qubit index {q} out of range for {num_qubits} qubits")
        angle = None
        if kind is GateKind.CP:
            try:
                angle = Fraction(toks[-1])
            except (ValueError, ZeroDivisionError):
                raise CircuitParseError(lineno, f"bad angle {toks[-1]!r}, expected <num>/<den>") from None
        try:
            gates.append(Gate(len(gates), kind, qubits, angle, durations[kind]))
        except CircuitError as exc:
            raise CircuitParseError(lineno, str(exc)) from None
    if num_qubits is None:
        raise CircuitParseError(max(1, len(text.splitlines())), "missing 'qubits <n>' header")
    return Circuit(num_qubits, tuple(gates))


def load_builtin(name: str, durations: DurationTable = DEFAULT_DURATIONS) -> Circuit:
    """Resolve ``qft:<n>``."""
    family, _, arg = name.partition(":")
    if family != "qft" or not arg.isdigit():
        raise CircuitError(f"unknown builtin circuit {name!r} (expected qft:<n>)")
    return build_qft(int(arg), durations)


def qubit_sequences(c: Circuit) -> Sequence[list[int]]:
    """Program order of gate ids restricted to each qubit."""
    seqs: list[list[int]] = [[] for _ in range(c.num_qubits)]
    for g in c.gates:
        for q in g.qubits:
            seqs[q].append(g.id)
    return seqs
