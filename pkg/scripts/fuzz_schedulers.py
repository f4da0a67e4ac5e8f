"""Random-network fuzzing: greedy vs exact vs exhaustive oracle."""
import argparse
import random
import time

from dqcsched.instances import random_network
from dqcsched.scheduler import (
    ORACLE_MAX_ACTIVITIES,
    brute_force_schedule,
    exact_schedule,
    greedy_schedule,
    lower_bound,
    validate_schedule,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-acts", type=int, default=ORACLE_MAX_ACTIVITIES)
    ap.add_argument("--no-oracle", action="store_true")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    strict = searched = failures = 0
    t0 = time.perf_counter()
    for i in range(args.count):
        net = random_network(rng, 2, args.max_acts)
        g, e = greedy_schedule(net), exact_schedule(net)
        o = None if args.no_oracle else brute_force_schedule(net)
        lb = lower_bound(net)
        ok = (
            not validate_schedule(net, g)
            and not validate_schedule(net, e)
            and lb <= e.makespan <= g.makespan
            and (o is None or o.makespan == e.makespan)
        )
        if not ok:
            failures += 1
            print(f"instance {i}: lb {lb} greedy {g.makespan} exact {e.makespan} oracle {o and o.makespan}")
        strict += e.makespan < g.makespan
        searched += e.nodes > 0
    dt = time.perf_counter() - t0
    print(f"{args.count} instances, {failures} failures, {strict} strict gaps, {searched} needed search, {dt:.1f}s")


if __name__ == "__main__":
    main()
