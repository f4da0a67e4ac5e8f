import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from dqcsched.circuit import GateKind, build_qft, make_circuit
from dqcsched.partition import (
    InteractionGraph,
    Partition,
    PartitionError,
    _cut,
    balance_bounds,
    brute_force_partition,
    build_interaction_graph,
    edge_cut,
    fm_pass,
    is_balanced,
    partition_graph,
)

QFT4_EDGES = {(0, 1): 1, (0, 2): 1, (1, 3): 1, (2, 3): 1, (0, 3): 4, (1, 2): 4}


def naive_min_cut(g: InteractionGraph, k: int, tol: float = 0.0) -> int:
    """Plain product enumeration, kept separate from brute_force_partition."""
    lo, hi = balance_bounds(g.total_weight, k, tol)
    best = None
    for assign in itertools.product(range(k), repeat=g.num_nodes):
        sizes = [0] * k
        for node, p in enumerate(assign):
            sizes[p] += g.node_weights[node]
        if not all(lo <= s <= hi for s in sizes):
            continue
        cut = sum(w for (a, b), w in g.edges.items() if assign[a] != assign[b])
        best = cut if best is None else min(best, cut)
    return best


def random_graph(rng: random.Random, n: int, p: float = 0.4, wmax: int = 5) -> InteractionGraph:
    edges = {(a, b): rng.randint(1, wmax) for a in range(n) for b in range(a + 1, n) if rng.random() < p}
    return InteractionGraph(n, edges)


@st.composite
def graphs(draw, max_nodes=32):
    n = draw(st.integers(4, max_nodes))
    seed = draw(st.integers(0, 2**32))
    p = draw(st.sampled_from([0.05, 0.2, 0.5]))
    return random_graph(random.Random(seed), n, p)


def same_parts(p: Partition, groups) -> bool:
    return sorted(map(sorted, p.parts())) == sorted(map(sorted, groups))


def test_qft4_interaction_graph():
    assert build_interaction_graph(build_qft(4)).edges == QFT4_EDGES


def test_h_only_graph_has_no_edges():
    c = make_circuit(3, [(GateKind.H, (0,)), (GateKind.H, (2,))])
    assert build_interaction_graph(c).edges == {}


def test_repeated_cp_accumulates():
    from fractions import Fraction

    c = make_circuit(2, [(GateKind.CP, (0, 1), Fraction(1, 2)), (GateKind.CP, (0, 1), Fraction(1, 4))])
    assert build_interaction_graph(c).edges == {(0, 1): 2}


def test_edge_cut_values():
    g = InteractionGraph(4, QFT4_EDGES)
    assert edge_cut(g, Partition(2, (0, 1, 1, 0))) == 4
    assert edge_cut(g, Partition(2, (0, 0, 1, 1))) == 10
    assert edge_cut(g, Partition(1, (0, 0, 0, 0))) == 0


def test_edge_cut_size_mismatch():
    with pytest.raises(PartitionError):
        edge_cut(InteractionGraph(4, QFT4_EDGES), Partition(2, (0, 1)))


def test_qft4_partition_matches_figure():
    g = InteractionGraph(4, QFT4_EDGES)
    p = partition_graph(g, 2)
    assert same_parts(p, [[0, 3], [1, 2]])
    assert edge_cut(g, p) == 4


def test_edgeless_graph_split():
    g = InteractionGraph(6)
    p = partition_graph(g, 2)
    assert is_balanced(g, p) and edge_cut(g, p) == 0


def test_brute_force_examples():
    g = InteractionGraph(4, QFT4_EDGES)
    p = brute_force_partition(g, 2)
    assert p.assignment == (0, 1, 1, 0)
    assert edge_cut(g, p) == 4
    assert edge_cut(InteractionGraph(2, {(0, 1): 5}), brute_force_partition(InteractionGraph(2, {(0, 1): 5}), 2)) == 5
    cycle = InteractionGraph(4, {(0, 1): 1, (1, 2): 1, (2, 3): 1, (0, 3): 1})
    assert edge_cut(cycle, brute_force_partition(cycle, 2)) == 2


def test_brute_force_limits():
    with pytest.raises(PartitionError):
        brute_force_partition(InteractionGraph(17), 2)
    with pytest.raises(PartitionError):
        brute_force_partition(InteractionGraph(2), 3)


@pytest.mark.parametrize("seed", range(15))
def test_brute_force_matches_naive_enumeration(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(3, 7))
    k = rng.choice([2, 3])
    tol = rng.choice([0.0, 0.5])
    p = brute_force_partition(g, k, tol)
    assert is_balanced(g, p)
    assert edge_cut(g, p) == naive_min_cut(g, k, tol)


def test_random_8_node_graphs_vs_oracle():
    hits = 0
    for seed in range(20):
        g = random_graph(random.Random(1000 + seed), 8)
        got = edge_cut(g, partition_graph(g, 2))
        best = edge_cut(g, brute_force_partition(g, 2))
        assert got <= 1.5 * best
        hits += got == best
    assert hits >= 18


@settings(max_examples=60, deadline=None)
@given(graphs(), st.sampled_from([2, 3, 4]), st.sampled_from([0.0, 0.2]))
def test_partition_always_balanced(g, k, tol):
    p = partition_graph(g, k, tol)
    assert is_balanced(g, p)
    assert all(p.parts())


@settings(max_examples=40, deadline=None)
@given(graphs(max_nodes=10), st.sampled_from([2, 3]))
def test_oracle_is_lower_bound(g, k):
    assert edge_cut(g, partition_graph(g, k)) >= edge_cut(g, brute_force_partition(g, k))


@given(graphs(max_nodes=20), st.integers(0, 5))
def test_deterministic(g, seed):
    assert partition_graph(g, 2, 0.0, seed) == partition_graph(g, 2, 0.0, seed)


@given(graphs(max_nodes=12), st.data())
def test_edge_cut_relabel_invariant(g, data):
    k = 3
    assign = data.draw(st.lists(st.integers(0, k - 1), min_size=g.num_nodes, max_size=g.num_nodes))
    perm = data.draw(st.permutations(range(k)))
    relabeled = tuple(perm[p] for p in assign)
    assert edge_cut(g, Partition(k, tuple(assign))) == edge_cut(g, Partition(k, relabeled))


@given(graphs(max_nodes=16), st.data())
def test_fm_pass_never_increases_cut_from_balanced(g, data):
    n = g.num_nodes
    order = data.draw(st.permutations(range(n)))
    side = [0] * n
    for u in order[n // 2 :]:
        side[u] = 1
    amin, amax = n // 2, -(-n // 2)
    adj = g.adjacency()
    before = _cut(adj, side)
    after_side = fm_pass(adj, list(g.node_weights), side, amin, amax)
    assert amin <= after_side.count(0) <= amax
    assert _cut(adj, after_side) <= before


def test_infeasible_requests():
    with pytest.raises(PartitionError):
        partition_graph(InteractionGraph(3), 4)
    with pytest.raises(PartitionError):
        partition_graph(InteractionGraph(3), 1)
    with pytest.raises(PartitionError):
        balance_bounds(4, 2, -0.1)


def test_balance_bounds():
    assert balance_bounds(4, 2, 0.0) == (2, 2)
    assert balance_bounds(7, 3, 0.0) == (2, 3)
    assert balance_bounds(8, 2, 0.25) == (3, 5)


def test_graph_json_roundtrip():
    g = InteractionGraph(4, QFT4_EDGES)
    assert InteractionGraph.from_dict(g.to_dict()) == g
    p = Partition(2, (0, 1, 1, 0))
    d = p.to_dict(g)
    assert d == {"k": 2, "assignment": [0, 1, 1, 0], "cut": 4}
    assert Partition.from_dict(d) == p


def test_graph_rejects_self_loop():
    with pytest.raises(PartitionError):
        InteractionGraph(2, {(1, 1): 1})
