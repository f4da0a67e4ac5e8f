"""Paper instances and seeded random generators for fuzzing."""
from __future__ import annotations

import random
from fractions import Fraction

from .circuit import Circuit, DurationTable, DEFAULT_DURATIONS, GateKind, build_qft, decompose_swaps, make_circuit
from .netmap import (
    PAPER_2QPU,
    PAPER_4QPU,
    Activity,
    ActivityKind,
    ActivityNetwork,
    Topology,
    build_activity_network,
    extract_nonlocal_gates,
)
from .partition import Partition, build_interaction_graph, partition_graph


def paper_2qpu_network() -> ActivityNetwork:
    c = build_qft(4)
    p = partition_graph(build_interaction_graph(c), 2)
    return build_activity_network(extract_nonlocal_gates(c, p), PAPER_2QPU)


def paper_4qpu_network() -> ActivityNetwork:
    c = decompose_swaps(build_qft(4))
    p = partition_graph(build_interaction_graph(c), 4)
    return build_activity_network(extract_nonlocal_gates(c, p), PAPER_4QPU)


def single_job_network(topology: Topology = PAPER_2QPU) -> ActivityNetwork:
    c = make_circuit(2, [(GateKind.CP, (0, 1), Fraction(1, 2))])
    return build_activity_network(extract_nonlocal_gates(c, Partition(2, (0, 1))), topology)


def random_network(
    rng: random.Random, min_acts: int = 2, max_acts: int = 10, max_dur: int = 2, max_resources: int = 2
) -> ActivityNetwork:
    """Generic RCPSP instance on a random small star topology.

    Activities are TASKs with random durations, random demands (each at most
    the capacity) and forward precedence arcs, so ids are already topological.
    """
    topo = Topology(
        num_qpus=2,
        comm_per_qpu=rng.randint(1, 3),
        mem_per_qpu=rng.randint(1, 3),
        switch_comm=rng.randint(1, 3),
        op_duration=1,
    )
    resources = topo.resources()
    count = rng.randint(min_acts, max_acts)
    density = rng.choice((0.1, 0.2, 0.35))
    acts = []
    for i in range(count):
        chosen = rng.sample(resources, rng.randint(0, max_resources))
        demands = {r: rng.randint(1, topo.capacity(r)) for r in chosen}
        preds = {j for j in range(i) if rng.random() < density}
        acts.append(Activity(i, ActivityKind.TASK, rng.randint(1, max_dur), demands, preds))
    return ActivityNetwork(tuple(acts), topo)


def random_job_network(rng: random.Random, max_jobs: int = 3) -> ActivityNetwork:
    """Job-structured network from random nonlocal gates on a random star."""
    from .netmap import NonlocalGate

    q = rng.randint(2, 4)
    topo = Topology(q, rng.randint(1, 3), rng.randint(1, 3), rng.randint(2, 4), rng.randint(1, 2))
    gates = []
    for k in range(rng.randint(0, max_jobs)):
        i, j = rng.sample(range(q), 2)
        gates.append(NonlocalGate(k, (i, j), k))
    return build_activity_network(gates, topo)


def random_circuit(
    rng: random.Random, max_qubits: int = 8, max_gates: int = 40, durations: DurationTable = DEFAULT_DURATIONS
) -> Circuit:
    n = rng.randint(1, max_qubits)
    ops = []
    for _ in range(rng.randint(0, max_gates)):
        kinds = [GateKind.H] if n == 1 else list(GateKind)
        kind = rng.choice(kinds)
        if kind is GateKind.H:
            ops.append((kind, (rng.randrange(n),)))
        else:
            a, b = rng.sample(range(n), 2)
            angle = Fraction(1, 2 ** rng.randint(1, 4)) if kind is GateKind.CP else None
            ops.append((kind, (a, b), angle) if angle is not None else (kind, (a, b)))
    return make_circuit(n, ops, durations)
