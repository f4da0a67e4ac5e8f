"""Schedule both QFT-4 reference instances and print makespans and charts."""
import argparse

from dqcsched.instances import paper_2qpu_network, paper_4qpu_network
from dqcsched.render import network_chart, render_ascii
from dqcsched.scheduler import SolverLimits, compare_methods

INSTANCES = {"2qpu": paper_2qpu_network, "4qpu": paper_4qpu_network}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--charts", action="store_true", help="print ASCII Gantt charts")
    ap.add_argument("--time-limit", type=float, default=300.0)
    args = ap.parse_args()

    print(f"{'instance':<9}{'acts':>5}{'LB':>5}{'greedy':>8}{'exact':>7}{'gap':>5}  proved")
    for name, build in INSTANCES.items():
        net = build()
        r = compare_methods(net, SolverLimits(wall_limit=args.time_limit))
        print(
            f"{name:<9}{len(net):>5}{r.lower_bound:>5}{r.greedy.makespan:>8}"
            f"{r.exact.makespan:>7}{r.gap:>5}  {r.exact.proved_optimal}"
        )
        if args.charts:
            for s in (r.greedy, r.exact):
                print(render_ascii(network_chart(net, s, title=f"{name} {s.method.value}")))


if __name__ == "__main__":
    main()
