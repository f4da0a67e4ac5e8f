"""Qubit interaction graph and balanced k-way partitioning.

The partitioner is multilevel recursive bisection: heavy-edge matching to
coarsen, exhaustive bisection at the coarsest level, then FM refinement while
projecting back.  ``brute_force_partition`` is the exhaustive reference.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .circuit import Circuit, GateKind

COARSEST_SIZE = 8
BRUTE_FORCE_MAX_NODES = 16


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class InteractionGraph:
    num_nodes: int
    edges: Mapping[tuple[int, int], int] = field(default_factory=dict)
    node_weights: tuple[int, ...] = ()

    def __post_init__(self):
        clean: dict[tuple[int, int], int] = {}
        for (a, b), w in self.edges.items():
            if a == b:
                raise PartitionError(f"self-loop on node {a}")
            if not (0 <= a < self.num_nodes and 0 <= b < self.num_nodes):
                raise PartitionError(f"edge ({a}, {b}) out of range")
            if w < 1:
                raise PartitionError(f"edge ({a}, {b}) weight must be >= 1")
            key = (min(a, b), max(a, b))
            clean[key] = clean.get(key, 0) + int(w)
        object.__setattr__(self, "edges", dict(sorted(clean.items())))
        weights = tuple(self.node_weights) or (1,) * self.num_nodes
        if len(weights) != self.num_nodes or any(w < 1 for w in weights):
            raise PartitionError("node_weights must be positive, one per node")
        object.__setattr__(self, "node_weights", weights)

    def weight(self, a: int, b: int) -> int:
        return self.edges.get((min(a, b), max(a, b)), 0)

    def adjacency(self) -> list[dict[int, int]]:
        adj: list[dict[int, int]] = [{} for _ in range(self.num_nodes)]
        for (a, b), w in self.edges.items():
            adj[a][b] = w
            adj[b][a] = w
        return adj

    @property
    def total_weight(self) -> int:
        return sum(self.node_weights)

    def to_dict(self) -> dict:
        data: dict = {"n": self.num_nodes, "edges": [[a, b, w] for (a, b), w in self.edges.items()]}
        if any(w != 1 for w in self.node_weights):
            data["node_weights"] = list(self.node_weights)
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "InteractionGraph":
        edges: dict[tuple[int, int], int] = {}
        for a, b, w in data["edges"]:
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + w
        return cls(data["n"], edges, tuple(data.get("node_weights", ())))


@dataclass(frozen=True)
class Partition:
    k: int
    assignment: tuple[int, ...]
    balance_tol: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(p) for p in self.assignment))
        if any(not 0 <= p < self.k for p in self.assignment):
            raise PartitionError(f"assignment has labels outside 0..{self.k - 1}")

    @property
    def num_nodes(self) -> int:
        return len(self.assignment)

    def parts(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for node, p in enumerate(self.assignment):
            out[p].append(node)
        return out

    def part_of(self, node: int) -> int:
        return self.assignment[node]

    def to_dict(self, graph: Optional[InteractionGraph] = None) -> dict:
        data = {"k": self.k, "assignment": list(self.assignment)}
        if graph is not None:
            data["cut"] = edge_cut(graph, self)
        return data

    @classmethod
    def from_dict(cls, data: Mapping, balance_tol: float = 0.0) -> "Partition":
        return cls(data["k"], tuple(data["assignment"]), balance_tol)


def build_interaction_graph(c: Circuit, swap_weight: int = 3) -> InteractionGraph:
    """One node per qubit; edge weight counts two-qubit gates (SWAP counts ``swap_weight``)."""
    edges: dict[tuple[int, int], int] = {}
    for g in c.gates:
        if not g.is_two_qubit:
            continue
        a, b = g.qubits
        key = (min(a, b), max(a, b))
        edges[key] = edges.get(key, 0) + (swap_weight if g.kind is GateKind.SWAP else 1)
    return InteractionGraph(c.num_qubits, edges)


def edge_cut(g: InteractionGraph, p: Partition) -> int:
    if len(p.assignment) != g.num_nodes:
        raise PartitionError(f"assignment covers {len(p.assignment)} nodes, graph has {g.num_nodes}")
    return sum(w for (a, b), w in g.edges.items() if p.assignment[a] != p.assignment[b])


def balance_bounds(total: int, k: int, balance_tol: float) -> tuple[int, int]:
    """Allowed part weight range ``[floor(W/k) - s, ceil(W/k) + s]``, ``s = floor(tol * W/k)``."""
    if balance_tol < 0:
        raise PartitionError("balance tolerance must be >= 0")
    slack = math.floor(balance_tol * total / k)
    lo = max(1, total // k - slack)
    hi = -(-total // k) + slack
    if k * lo > total or k * hi < total:
        raise PartitionError(f"no part sizes in [{lo}, {hi}] add up to {total} over {k} parts")
    return lo, hi


def is_balanced(g: InteractionGraph, p: Partition) -> bool:
    lo, hi = balance_bounds(g.total_weight, p.k, p.balance_tol)
    sizes = [0] * p.k
    for node, part in enumerate(p.assignment):
        sizes[part] += g.node_weights[node]
    return all(lo <= s <= hi for s in sizes)


# Brute force -----------------------------------------------------------------


def brute_force_partition(g: InteractionGraph, k: int, balance_tol: float = 0.0) -> Partition:
    """Minimum-cut balanced assignment by exhaustive enumeration.

    Only canonical labelings (each part label first used in increasing
    order) are enumerated; in lexicographic order these are exactly the
    lex-smallest representatives, so the first minimum found is the
    lowest-lexicographic optimal assignment.
    """
    n = g.num_nodes
    if n > BRUTE_FORCE_MAX_NODES:
        raise PartitionError(f"brute force is limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}")
    if k < 1 or k > n:
        raise PartitionError(f"cannot split {n} nodes into {k} nonempty parts")
    lo, hi = balance_bounds(g.total_weight, k, balance_tol)
    w = g.node_weights
    adj = g.adjacency()
    best: Optional[tuple[int, tuple[int, ...]]] = None
    assign = [0] * n
    sizes = [0] * k

    def rec(i: int, used: int, cut: int):
        nonlocal best
        if best is not None and cut >= best[0]:
            return
        if i == n:
            if used == k and all(lo <= s <= hi for s in sizes):
                best = (cut, tuple(assign))
            return
        if k - used > n - i:
            return
        for part in range(min(used + 1, k)):
            if sizes[part] + w[i] > hi:
                continue
            extra = sum(wt for j, wt in adj[i].items() if j < i and assign[j] != part)
            assign[i] = part
            sizes[part] += w[i]
            rec(i + 1, max(used, part + 1), cut + extra)
            sizes[part] -= w[i]

    rec(0, 0, 0)
    if best is None:
        raise PartitionError("no balanced assignment exists")
    return Partition(k, best[1], balance_tol)


# Multilevel bisection --------------------------------------------------------


@dataclass
class _Level:
    adj: list[dict[int, int]]
    weights: list[int]
    # fine node -> coarse node of the next level (None on the coarsest level)
    cmap: Optional[list[int]] = None


def _coarsen(adj: list[dict[int, int]], weights: list[int], order: Sequence[int]) -> tuple[list[int], int]:
    """Heavy-edge matching; returns the fine->coarse map and the coarse node count."""
    n = len(adj)
    match = [-1] * n
    for u in order:
        if match[u] != -1:
            continue
        best_v, best_w = -1, 0
        for v in sorted(adj[u]):
            if match[v] == -1 and v != u and adj[u][v] > best_w:
                best_v, best_w = v, adj[u][v]
        match[u] = u
        if best_v != -1:
            match[u] = best_v
            match[best_v] = u
    cmap = [-1] * n
    nc = 0
    for u in range(n):
        if cmap[u] == -1:
            cmap[u] = nc
            cmap[match[u]] = nc
            nc += 1
    return cmap, nc


def _contract(adj, weights, cmap, nc):
    cadj: list[dict[int, int]] = [{} for _ in range(nc)]
    cw = [0] * nc
    for u in range(len(adj)):
        cw[cmap[u]] += weights[u]
        for v, w in adj[u].items():
            cu, cv = cmap[u], cmap[v]
            if cu != cv:
                cadj[cu][cv] = cadj[cu].get(cv, 0) + w
    return cadj, cw


def _violation(side0: int, amin: int, amax: int) -> int:
    return max(0, amin - side0, side0 - amax)


def _cut(adj, side) -> int:
    return sum(w for u in range(len(adj)) for v, w in adj[u].items() if u < v and side[u] != side[v])


def _initial_bisection(adj, weights, amin, amax) -> list[int]:
    n = len(adj)
    if not any(adj) or n > 20:
        # no edges: every split has cut 0, fill side 0 by ascending index
        side = [1] * n
        acc = 0
        for u in range(n):
            if acc + weights[u] <= amax and acc < amin:
                side[u] = 0
                acc += weights[u]
        return side
    best_key, best_side = None, None
    for bits in itertools.product((0, 1), repeat=n):
        s0 = sum(w for w, b in zip(weights, bits) if b == 0)
        key = (_violation(s0, amin, amax), _cut(adj, bits))
        if best_key is None or key < best_key:
            best_key, best_side = key, list(bits)
    return best_side


def fm_pass(adj, weights, side, amin, amax) -> list[int]:
    """One Fiduccia-Mattheyses pass with best-prefix rollback.

    Moves are ranked by (resulting imbalance, -cut gain, node index); during
    the pass the imbalance may exceed its starting value by at most the
    heaviest node.  The kept prefix minimises (imbalance, cut), earliest
    first, so a balanced input never comes back with a larger cut.
    """
    n = len(adj)
    side = list(side)
    s0 = sum(w for w, s in zip(weights, side) if s == 0)
    viol0 = _violation(s0, amin, amax)
    slack = max(viol0, max(weights, default=0))
    cut = _cut(adj, side)
    locked = [False] * n
    best_key = (viol0, cut)
    best_len = 0
    moves: list[int] = []
    for _ in range(n):
        choice = None
        for u in range(n):
            if locked[u]:
                continue
            ns0 = s0 - weights[u] if side[u] == 0 else s0 + weights[u]
            v = _violation(ns0, amin, amax)
            if v > slack:
                continue
            gain = sum(w if side[x] != side[u] else -w for x, w in adj[u].items())
            key = (v, -gain, u)
            if choice is None or key < choice[0]:
                choice = (key, ns0, gain)
        if choice is None:
            break
        (v, _, u), ns0, gain = choice
        side[u] ^= 1
        locked[u] = True
        s0 = ns0
        cut -= gain
        moves.append(u)
        if (v, cut) < best_key:
            best_key, best_len = (v, cut), len(moves)
    for u in moves[best_len:]:
        side[u] ^= 1
    return side


def fm_refine(adj, weights, side, amin, amax, max_passes: int = 32) -> list[int]:
    def key(s):
        s0 = sum(w for w, b in zip(weights, s) if b == 0)
        return (_violation(s0, amin, amax), _cut(adj, s))

    current = key(side)
    for _ in range(max_passes):
        new = fm_pass(adj, weights, side, amin, amax)
        new_key = key(new)
        if new_key >= current:
            break
        side, current = new, new_key
    return side


def multilevel_bisect(
    adj: list[dict[int, int]],
    weights: list[int],
    amin: int,
    amax: int,
    rng: Optional[random.Random] = None,
) -> list[int]:
    """Split nodes into sides 0/1 with side-0 weight in ``[amin, amax]``, minimising the cut."""
    levels = [_Level(adj, weights)]
    while len(levels[-1].adj) > COARSEST_SIZE and any(levels[-1].adj):
        cur = levels[-1]
        order = list(range(len(cur.adj)))
        if rng is not None:
            rng.shuffle(order)
        cmap, nc = _coarsen(cur.adj, cur.weights, order)
        if nc == len(cur.adj):
            break
        cur.cmap = cmap
        cadj, cw = _contract(cur.adj, cur.weights, cmap, nc)
        levels.append(_Level(cadj, cw))
    coarsest = levels[-1]
    side = _initial_bisection(coarsest.adj, coarsest.weights, amin, amax)
    side = fm_refine(coarsest.adj, coarsest.weights, side, amin, amax)
    for lvl in reversed(levels[:-1]):
        side = [side[lvl.cmap[u]] for u in range(len(lvl.adj))]
        side = fm_refine(lvl.adj, lvl.weights, side, amin, amax)
    return side


def partition_graph(g: InteractionGraph, k: int, balance_tol: float = 0.0, seed: int = 0) -> Partition:
    """Balanced k-way partition by recursive multilevel bisection.

    ``seed=0`` visits nodes in ascending index during matching; any other
    seed shuffles the visit order reproducibly.
    """
    n = g.num_nodes
    if k < 2:
        raise PartitionError("k must be >= 2")
    if k > n:
        raise PartitionError(f"cannot split {n} nodes into {k} nonempty parts")
    lo, hi = balance_bounds(g.total_weight, k, balance_tol)
    rng = random.Random(seed) if seed else None
    full_adj = g.adjacency()
    assignment = [0] * n

    def split(nodes: list[int], parts: int, label: int):
        if parts == 1:
            for u in nodes:
                assignment[u] = label
            return
        k0 = parts // 2
        k1 = parts - k0
        total = sum(g.node_weights[u] for u in nodes)
        amin = max(k0 * lo, total - k1 * hi)
        amax = min(k0 * hi, total - k1 * lo)
        if amin > amax:
            raise PartitionError("balance constraint cannot be met by recursive bisection")
        local = {u: i for i, u in enumerate(nodes)}
        adj = [{local[v]: w for v, w in full_adj[u].items() if v in local} for u in nodes]
        side = multilevel_bisect(adj, [g.node_weights[u] for u in nodes], amin, amax, rng)
        s0 = sum(g.node_weights[u] for u, s in zip(nodes, side) if s == 0)
        if _violation(s0, amin, amax):
            raise PartitionError("could not reach a balanced bisection")
        split([u for u, s in zip(nodes, side) if s == 0], k0, label)
        split([u for u, s in zip(nodes, side) if s == 1], k1, label + k0)

    split(list(range(n)), k, 0)
    return Partition(k, tuple(assignment), balance_tol)
