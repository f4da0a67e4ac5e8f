import dataclasses
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from dqcsched.instances import (
    paper_2qpu_network,
    paper_4qpu_network,
    random_job_network,
    random_network,
    single_job_network,
)
from dqcsched.netmap import (
    COMM_SWITCH,
    PAPER_2QPU,
    Activity,
    ActivityKind,
    ActivityNetwork,
    NonlocalGate,
    Topology,
    build_activity_network,
)
from dqcsched.scheduler import (
    InfeasibleError,
    Method,
    Schedule,
    SchedulingError,
    SolverLimits,
    brute_force_schedule,
    compare_methods,
    exact_schedule,
    greedy_schedule,
    lower_bound,
    validate_schedule,
)

EMPTY = ActivityNetwork((), PAPER_2QPU)


def task_net(spec, topo=Topology(2, 1, 1, 1, 1)):
    """spec: list of (duration, uses_switch_units, preds)."""
    acts = [
        Activity(i, ActivityKind.TASK, d, {COMM_SWITCH: q} if q else {}, frozenset(p))
        for i, (d, q, p) in enumerate(spec)
    ]
    return ActivityNetwork(tuple(acts), topo)


def naive_optimum(net: ActivityNetwork) -> int:
    """Every start vector in [0, T - d_j], full check; tiny networks only."""
    T = net.default_horizon()
    ranges = [range(0, T - a.duration + 1) for a in net.activities]
    best = None
    for starts in itertools.product(*ranges):
        sched = Schedule(dict(enumerate(starts)), Method.ORACLE, max(s + a.duration for s, a in zip(starts, net.activities)))
        if not validate_schedule(net, sched):
            best = sched.makespan if best is None else min(best, sched.makespan)
    return best


def seeded_networks(count, seed, **kw):
    rng = random.Random(seed)
    return [random_network(rng, **kw) for _ in range(count)]


# greedy ----------------------------------------------------------------------


def test_greedy_empty():
    assert greedy_schedule(EMPTY).makespan == 0


def test_greedy_single_job():
    net = single_job_network()
    s = greedy_schedule(net)
    assert s.starts == {0: 0, 1: 0, 2: 2, 3: 4}
    assert s.makespan == 6 and s.method is Method.GREEDY


def test_greedy_places_at_future_start():
    # activity 1 becomes ready at t=1 (its predecessor is placed) and is put at 3
    net = task_net([(3, 0, ()), (1, 0, (0,))])
    assert greedy_schedule(net).starts == {0: 0, 1: 3}


def test_greedy_can_be_suboptimal():
    # 0 grabs the switch first; 1 and its long successor 2 get pushed back
    net = task_net([(2, 1, ()), (1, 1, ()), (3, 0, (1,))])
    assert greedy_schedule(net).starts == {0: 0, 1: 2, 2: 3}
    assert greedy_schedule(net).makespan == 6
    assert exact_schedule(net).makespan == 4


def test_greedy_drops_what_does_not_fit():
    net = task_net([(2, 1, ()), (2, 1, ())])
    s = greedy_schedule(net, SolverLimits(horizon=3))
    assert s.starts == {0: 0}
    assert not s.is_complete(net)
    assert s.to_dict(net)["starts"] == {"0": 0, "1": -1}


def test_invalid_network_rejected():
    bad = task_net([(1, 0, (1,)), (1, 0, (0,))])
    with pytest.raises(SchedulingError):
        greedy_schedule(bad)
    with pytest.raises(SchedulingError):
        exact_schedule(bad)


# exact and oracle ------------------------------------------------------------


def test_exact_single_job():
    s = exact_schedule(single_job_network())
    assert s.makespan == 6 and s.proved_optimal


def test_oracle_examples():
    assert brute_force_schedule(single_job_network()).makespan == 6
    assert brute_force_schedule(EMPTY).makespan == 0
    assert exact_schedule(EMPTY).makespan == 0


def test_two_independent_jobs_oracle_equals_exact():
    # two jobs on different QPU pairs; no MOVE chain arc
    topo = Topology(4, 2, 2, 2, 2)
    base =build_activity_network([NonlocalGate(0, (0, 1), 0), NonlocalGate(1, (2, 3), 0)], topo)
    independent = tuple(
        dataclasses.replace(a, preds=a.preds - {3}) if a.id == 7 else a for a in base.activities
    )
    net = ActivityNetwork(independent, topo, base.jobs)
    oracle = brute_force_schedule(net).makespan
    assert exact_schedule(net).makespan == oracle
    # 16 switch unit-steps over 2 units keep the switch busy until 8, then one MOVE
    assert oracle == 10


def test_infeasible_horizon():
    net = task_net([(2, 0, ()), (2, 0, (0,)), (2, 0, (1,))])
    with pytest.raises(InfeasibleError):
        exact_schedule(net, SolverLimits(horizon=5))
    with pytest.raises(InfeasibleError):
        brute_force_schedule(net, SolverLimits(horizon=5))
    with pytest.raises(SchedulingError):
        exact_schedule(net, SolverLimits(horizon=1))


def test_oracle_size_limit():
    with pytest.raises(SchedulingError):
        brute_force_schedule(paper_2qpu_network())


def test_node_budget_returns_incumbent():
    nets = seeded_networks(60, 7, min_acts=10, max_acts=12)
    hit = False
    for net in nets:
        s = exact_schedule(net, SolverLimits(node_budget=3))
        assert validate_schedule(net, s) == []
        if s.limit_reached:
            hit = True
            assert not s.proved_optimal
            assert s.makespan <= greedy_schedule(net).makespan
    assert hit


def test_wall_limit_aborts_cleanly():
    net = seeded_networks(1, 3, min_acts=12, max_acts=12)[0]
    s = exact_schedule(net, SolverLimits(wall_limit=0.0))
    assert validate_schedule(net, s) == []


@pytest.mark.parametrize("seed", range(12))
def test_oracle_against_naive_enumeration(seed):
    rng = random.Random(seed)
    net = random_network(rng, 2, 4, max_dur=2)
    assert brute_force_schedule(net).makespan == naive_optimum(net)


# validator -------------------------------------------------------------------


def test_validator_accepts_solver_output():
    net = paper_2qpu_network()
    assert validate_schedule(net, exact_schedule(net)) == []


def test_validator_precedence_violation():
    net = single_job_network()
    s = Schedule({0: 0, 1: 0, 2: 0, 3: 4}, Method.EXACT, 6)
    kinds = {(v.kind, v.activities) for v in validate_schedule(net, s)}
    assert ("precedence", (0, 2)) in kinds and ("precedence", (1, 2)) in kinds


def test_validator_capacity_violation():
    net = build_activity_network([NonlocalGate(0, (0, 1), 0), NonlocalGate(1, (0, 1), 1)], PAPER_2QPU)
    # three LLEs at t=0 on a 2-unit switch
    s = Schedule({0: 0, 1: 0, 4: 0, 5: 2, 2: 4, 3: 6, 6: 6, 7: 8}, Method.EXACT, 10)
    caps = [v for v in validate_schedule(net, s) if v.kind == "capacity" and "comm_switch" in v.message]
    assert {v.time for v in caps} == {0, 1}


def test_validator_reports_missing_negative_and_horizon():
    net = single_job_network()
    s = Schedule({0: -1, 1: 0, 2: 2}, Method.GREEDY, 4)
    kinds = {v.kind for v in validate_schedule(net, s)}
    assert {"missing", "negative"} <= kinds
    late = Schedule({0: 0, 1: 0, 2: 2, 3: 10}, Method.GREEDY, 12)
    assert "horizon" in {v.kind for v in validate_schedule(net, late)}


# bounds and comparison -------------------------------------------------------


def test_lower_bound_examples():
    assert lower_bound(single_job_network()) == 6
    assert lower_bound(paper_2qpu_network()) == 16
    assert lower_bound(EMPTY) == 0


def test_compare_single_job():
    r = compare_methods(single_job_network())
    assert r.gap == 0 and r.valid
    assert r.to_dict()["exact_makespan"] == 6


def test_paper_instances_ordering():
    r2 = compare_methods(paper_2qpu_network())
    assert r2.valid and r2.gap >= 0 and r2.exact.proved_optimal
    r4 = compare_methods(paper_4qpu_network())
    assert r4.valid and r4.gap == 0 and r4.exact.proved_optimal


@pytest.mark.parametrize("builder", [paper_2qpu_network, paper_4qpu_network])
def test_monotone_in_switch_capacity(builder):
    net = builder()
    base = exact_schedule(net).makespan
    bigger = dataclasses.replace(net.topology, switch_comm=net.topology.switch_comm + 1)
    assert exact_schedule(dataclasses.replace(net, topology=bigger)).makespan <= base


def test_schedule_json_roundtrip():
    net = paper_2qpu_network()
    s = exact_schedule(net)
    back = Schedule.from_dict(s.to_dict(net))
    assert back.starts == s.starts and back.makespan == s.makespan and back.method is Method.EXACT


# properties over random networks ---------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_soundness_and_dominance(seed):
    net = random_network(random.Random(seed), 2, 10)
    g = greedy_schedule(net)
    e = exact_schedule(net)
    assert validate_schedule(net, g) == []
    assert validate_schedule(net, e) == []
    assert e.proved_optimal
    assert lower_bound(net) <= e.makespan <= g.makespan


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_exact_equals_oracle(seed):
    net = random_network(random.Random(seed), 2, 12)
    o = brute_force_schedule(net)
    assert validate_schedule(net, o) == []
    assert exact_schedule(net).makespan == o.makespan


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_job_networks_exact_equals_oracle(seed):
    net = random_job_network(random.Random(seed), max_jobs=3)
    assert exact_schedule(net).makespan == brute_force_schedule(net).makespan


@given(st.integers(0, 2**32))
def test_determinism(seed):
    net = random_network(random.Random(seed), 2, 10)
    assert exact_schedule(net) == exact_schedule(net)
    assert greedy_schedule(net) == greedy_schedule(net)
