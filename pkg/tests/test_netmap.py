import random

import pytest

from dqcsched.circuit import build_qft, decompose_swaps
from dqcsched.instances import paper_2qpu_network, paper_4qpu_network, random_job_network
from dqcsched.netmap import (
    COMM_SWITCH,
    PAPER_2QPU,
    PAPER_4QPU,
    Activity,
    ActivityKind,
    ActivityNetwork,
    NetworkError,
    NonlocalGate,
    ResourceId,
    Topology,
    build_activity_network,
    comm_qpu,
    extract_nonlocal_gates,
    mem_qpu,
    move_chain,
    validate_network,
)
from dqcsched.partition import Partition


def gates(pairs):
    return [NonlocalGate(i, pair, i) for i, pair in enumerate(pairs)]


def test_qft4_two_parts_nonlocal_gates():
    c = build_qft(4)
    found = extract_nonlocal_gates(c, Partition(2, (0, 1, 1, 0)))
    assert [c.gates[g.gate_id].qubits for g in found] == [(1, 0), (2, 0), (3, 1), (3, 2)]
    starts = [g.start for g in found]
    assert starts == sorted(starts)


def test_all_local_gives_nothing():
    assert extract_nonlocal_gates(build_qft(4), Partition(2, (0, 0, 0, 0))) == []


def test_singleton_parts_after_decomposition():
    c = decompose_swaps(build_qft(4))
    assert len(extract_nonlocal_gates(c, Partition(4, (0, 1, 2, 3)))) == 12


def test_partition_size_mismatch():
    with pytest.raises(NetworkError):
        extract_nonlocal_gates(build_qft(4), Partition(2, (0, 1)))


def test_paper_instance_sizes():
    assert len(paper_2qpu_network()) == 16
    net4 = paper_4qpu_network()
    assert (len(net4.jobs), len(net4)) == (12, 48)


def test_empty_network():
    net = build_activity_network([], PAPER_2QPU)
    assert net.activities == () and validate_network(net) == []


def test_job_expansion_demands_and_preds():
    net = build_activity_network(gates([(0, 1), (1, 0)]), PAPER_2QPU)
    lle_i, lle_j, swap, move = net.activities[:4]
    assert lle_i.demands == {COMM_SWITCH: 1, comm_qpu(0): 1}
    assert lle_j.demands == {COMM_SWITCH: 1, comm_qpu(1): 1}
    assert swap.demands == {COMM_SWITCH: 2} and swap.preds == {0, 1}
    assert move.demands == {comm_qpu(0): 1, mem_qpu(0): 1, comm_qpu(1): 1, mem_qpu(1): 1}
    assert move.preds == {2}
    assert net.activities[7].preds == {6, 3}
    assert all(a.duration == 2 for a in net.activities)
    assert [a.label for a in net.activities[:4]] == ["LLE1s", "LLE2s", "SW12", "MV12"]


@pytest.mark.parametrize("seed", range(30))
def test_structure_properties(seed):
    net = random_job_network(random.Random(seed), max_jobs=6)
    assert validate_network(net) == []
    assert len(net) == 4 * len(net.jobs)
    for job in net.jobs:
        acts = net.activities[4 * job.id : 4 * job.id + 4]
        kinds = [a.kind for a in acts]
        assert kinds == [ActivityKind.LLE, ActivityKind.LLE, ActivityKind.SWAP, ActivityKind.MOVE]
        assert {acts[0].id, acts[1].id} <= acts[2].preds and acts[2].id in acts[3].preds
        # transitive reduction: LLE->SWAP x2, SWAP->MOVE, plus the MOVE chain arc after the first job
        arcs = sum(len(a.preds) for a in acts)
        assert arcs == 3 + (1 if job.id > 0 else 0)
    chain = move_chain(net)
    for prev, nxt in zip(chain, chain[1:]):
        assert prev in net[nxt].preds
    for a in net.activities:
        assert a.demands.get(COMM_SWITCH, 0) <= net.topology.switch_comm


def test_switch_too_small_for_swap():
    with pytest.raises(NetworkError):
        build_activity_network(gates([(0, 1)]), Topology(2, 2, 2, 1))


def test_invalid_qpu_pair():
    with pytest.raises(NetworkError):
        build_activity_network(gates([(0, 0)]), PAPER_2QPU)
    with pytest.raises(NetworkError):
        build_activity_network(gates([(0, 2)]), PAPER_2QPU)


def _one_job(**overrides):
    acts = list(build_activity_network(gates([(0, 1)]), PAPER_2QPU).activities)
    for idx, act in overrides.items():
        acts[int(idx[1:])] = act
    return ActivityNetwork(tuple(acts), PAPER_2QPU, build_activity_network(gates([(0, 1)]), PAPER_2QPU).jobs)


def test_validate_capacity_violation():
    bad_swap = Activity(2, ActivityKind.SWAP, 2, {COMM_SWITCH: 3}, {0, 1}, job=0, qpus=(0, 1))
    problems = validate_network(_one_job(a2=bad_swap))
    assert any("exceeds capacity" in p for p in problems)


def test_validate_cycle():
    looped_swap = Activity(2, ActivityKind.SWAP, 2, {COMM_SWITCH: 2}, {0, 1, 3}, job=0, qpus=(0, 1))
    problems = validate_network(_one_job(a2=looped_swap))
    assert any("cycle" in p for p in problems)


def test_validate_job_structure():
    extra_lle = Activity(3, ActivityKind.LLE, 2, {COMM_SWITCH: 1}, {2}, job=0, qpu=0)
    problems = validate_network(_one_job(a3=extra_lle))
    assert any("expected 2 LLE" in p for p in problems)


def test_validate_bad_ids_and_durations():
    net = ActivityNetwork(
        (Activity(0, ActivityKind.TASK, 0, {}, {0}), Activity(5, ActivityKind.TASK, 1, {}, {9})),
        PAPER_2QPU,
    )
    problems = " | ".join(validate_network(net))
    for fragment in ("duration 0", "self-loop", "has id 5", "unknown predecessor 9"):
        assert fragment in problems


def test_resource_ids():
    assert str(comm_qpu(1)) == "comm_qpu:1"
    assert ResourceId.parse("mem_qpu:3") == mem_qpu(3)
    assert ResourceId.parse("comm_switch") == COMM_SWITCH
    with pytest.raises(NetworkError):
        ResourceId("comm_qpu")
    with pytest.raises(NetworkError):
        PAPER_2QPU.capacity(comm_qpu(2))
    assert PAPER_4QPU.capacity(mem_qpu(3)) == 4


def test_network_json_roundtrip():
    net = paper_4qpu_network()
    data = net.to_dict()
    assert ActivityNetwork.from_dict(data) == net
    first = data["activities"][0]
    assert set(first) >= {"id", "kind", "job", "duration", "demands", "preds"}
    assert set(first["demands"]) <= {"comm_switch"} | {f"{k}:{i}" for k in ("comm_qpu", "mem_qpu") for i in range(4)}
    assert Topology.from_dict(PAPER_2QPU.to_dict()) == PAPER_2QPU
