"""Command-line front end: circuit -> partition -> activity network -> schedules -> charts."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, TypeVar

from .circuit import (
    DEFAULT_DURATIONS,
    Circuit,
    DurationTable,
    asap_schedule,
    decompose_swaps,
    load_builtin,
    parse_circuit,
    serialize_circuit,
)
from .netmap import (
    PRESETS,
    ActivityNetwork,
    NonlocalGate,
    Topology,
    build_activity_network,
    extract_nonlocal_gates,
    validate_network,
)
from .partition import InteractionGraph, Partition, build_interaction_graph, edge_cut, partition_graph
from .render import circuit_chart, network_chart, render_ascii, render_svg
from .scheduler import (
    Schedule,
    SolverLimits,
    brute_force_schedule,
    exact_schedule,
    greedy_schedule,
    lower_bound,
    validate_schedule,
)

log = logging.getLogger("dqcsched")

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2
FORMATS = ("json", "ascii", "svg")

T = TypeVar("T")


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage


def run_stage(stage: str, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except (ValueError, RuntimeError, KeyError, OSError) as exc:
        raise StageError(stage, exc) from exc


# loaders ---------------------------------------------------------------------


def load_durations(path: Optional[str]) -> DurationTable:
    if path is None:
        return DEFAULT_DURATIONS
    return DurationTable.from_dict(json.loads(Path(path).read_text()))


def load_circuit(source: str, durations: DurationTable = DEFAULT_DURATIONS) -> Circuit:
    if source.startswith("qft:"):
        return load_builtin(source, durations)
    path = Path(source)
    if path.suffix == ".json":
        return Circuit.from_dict(json.loads(path.read_text()))
    return parse_circuit(path.read_text(encoding="utf-8"), durations)


def load_topology(spec: str) -> Topology:
    if spec in PRESETS:
        return PRESETS[spec]
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"unknown topology {spec!r}: not a preset ({', '.join(PRESETS)}) or a file")
    return Topology.from_dict(json.loads(path.read_text()))


def parse_formats(text: str) -> list[str]:
    formats = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise UsageError(f"unknown format(s) {bad}; choose from {', '.join(FORMATS)}")
    return formats


def nonlocal_to_dict(gates: Sequence[NonlocalGate]) -> dict:
    return {"gates": [{"gate": g.gate_id, "qpus": list(g.qpus), "start": g.start} for g in gates]}


def nonlocal_from_dict(data: dict) -> list[NonlocalGate]:
    return [NonlocalGate(g["gate"], tuple(g["qpus"]), g["start"]) for g in data["gates"]]


def dump_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")


def _limits(args) -> SolverLimits:
    return SolverLimits(horizon=args.horizon, node_budget=args.node_budget, wall_limit=args.time_limit)


# pipeline --------------------------------------------------------------------


@dataclass
class PipelineConfig:
    circuit: str
    k: Optional[int] = None
    topology: Optional[str] = None
    durations: Optional[str] = None
    decompose_swaps: bool = False
    method: str = "both"
    limits: SolverLimits = field(default_factory=SolverLimits)
    out: Path = Path("out")
    formats: tuple[str, ...] = ("json", "svg")
    balance_tol: float = 0.0
    seed: int = 0


def cmd_pipeline(cfg: PipelineConfig) -> int:
    durations = run_stage("durations", lambda: load_durations(cfg.durations))
    topo = load_topology(cfg.topology) if cfg.topology else None
    k = cfg.k if cfg.k is not None else (topo.num_qpus if topo else None)
    if k is None:
        raise UsageError("give --k or --topology")
    if topo is None:
        topo = Topology(num_qpus=k, comm_per_qpu=2, mem_per_qpu=2, switch_comm=2, op_duration=2)
    if topo.num_qpus != k:
        raise UsageError(f"--k {k} does not match the topology's {topo.num_qpus} QPUs")
    if cfg.method not in ("greedy", "exact", "both"):
        raise UsageError(f"unknown method {cfg.method!r}")

    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    circuit = run_stage("circuit", lambda: load_circuit(cfg.circuit, durations))
    if circuit.num_qubits < k:
        raise UsageError(f"circuit has fewer qubits ({circuit.num_qubits}) than parts ({k})")
    if cfg.decompose_swaps:
        circuit = decompose_swaps(circuit, durations)
    dump_json(out / "circuit.json", circuit.to_dict())
    gantt = asap_schedule(circuit)
    dump_json(out / "gantt_local.json", gantt.to_dict())
    _write_chart(out / "gantt_local", circuit_chart(circuit, gantt, "local circuit (ASAP)"), cfg.formats)

    graph = build_interaction_graph(circuit)
    dump_json(out / "graph.json", graph.to_dict())
    part = run_stage("partition", lambda: partition_graph(graph, k, cfg.balance_tol, cfg.seed))
    dump_json(out / "partition.json", part.to_dict(graph))

    gates = run_stage("extract", lambda: extract_nonlocal_gates(circuit, part))
    dump_json(out / "nonlocal.json", nonlocal_to_dict(gates))
    net = run_stage("network", lambda: build_activity_network(gates, topo))
    dump_json(out / "network.json", net.to_dict())

    report: dict = {
        "circuit": {"qubits": circuit.num_qubits, "gates": len(circuit), "local_horizon": gantt.horizon},
        "k": k,
        "assignment": list(part.assignment),
        "edge_cut": edge_cut(graph, part),
        "nonlocal_gates": len(gates),
        "jobs": len(net.jobs),
        "activities": len(net.activities),
        "topology": topo.to_dict(),
        "network_violations": validate_network(net),
        "lower_bound": lower_bound(net),
        "greedy_tie_break": "ascending activity id",
    }
    valid = not report["network_violations"]
    if valid:
        T = cfg.limits.resolve_horizon(net)
        schedules: dict[str, Schedule] = {}
        if cfg.method in ("greedy", "both"):
            schedules["greedy"] = run_stage("greedy", lambda: greedy_schedule(net, cfg.limits))
        if cfg.method in ("exact", "both"):
            schedules["exact"] = run_stage("exact", lambda: exact_schedule(net, cfg.limits))
        for name, sched in schedules.items():
            problems = validate_schedule(net, sched, T)
            dump_json(out / f"schedule_{name}.json", sched.to_dict(net))
            report[f"{name}_makespan"] = sched.makespan
            report[f"{name}_valid"] = not problems
            report[f"{name}_violations"] = [str(p) for p in problems]
            if name == "exact":
                report["exact_proved_optimal"] = sched.proved_optimal
            if not problems:
                chart = network_chart(net, sched, T, f"{name} schedule, makespan {sched.makespan}")
                _write_chart(out / f"schedule_{name}", chart, cfg.formats)
            valid = valid and not problems
        if len(schedules) == 2:
            report["gap"] = schedules["greedy"].makespan - schedules["exact"].makespan
    report["valid"] = valid
    dump_json(out / "report.json", report)
    return EXIT_OK if valid else EXIT_INVALID


def _write_chart(stem: Path, chart, formats) -> None:
    if "ascii" in formats:
        stem.with_suffix(".txt").write_text(render_ascii(chart))
    if "svg" in formats:
        stem.with_suffix(".svg").write_text(render_svg(chart))


# per-stage subcommands -------------------------------------------------------


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    durations = load_durations(args.durations)
    c = run_stage("circuit", lambda: load_circuit(args.circuit, durations))
    if args.decompose_swaps:
        c = decompose_swaps(c, durations)
    if args.json:
        _emit(json.dumps(c.to_dict(), indent=2) + "\n", args.out)
    else:
        _emit(serialize_circuit(c), args.out)
    return EXIT_OK


def cmd_partition(args) -> int:
    if args.graph:
        g = InteractionGraph.from_dict(json.loads(Path(args.graph).read_text()))
    elif args.circuit:
        c = run_stage("circuit", lambda: load_circuit(args.circuit, load_durations(args.durations)))
        if args.decompose_swaps:
            c = decompose_swaps(c)
        g = build_interaction_graph(c)
    else:
        raise UsageError("give --circuit or --graph")
    if args.k > g.num_nodes:
        raise UsageError(f"graph has fewer nodes ({g.num_nodes}) than parts ({args.k})")
    p = run_stage("partition", lambda: partition_graph(g, args.k, args.balance_tol, args.seed))
    _emit(json.dumps(p.to_dict(g)) + "\n", args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    durations = load_durations(args.durations)
    c = run_stage("circuit", lambda: load_circuit(args.circuit, durations))
    if args.decompose_swaps:
        c = decompose_swaps(c, durations)
    p = Partition.from_dict(json.loads(Path(args.partition).read_text()))
    gates = run_stage("extract", lambda: extract_nonlocal_gates(c, p))
    if args.nonlocal_out:
        dump_json(Path(args.nonlocal_out), nonlocal_to_dict(gates))
    topo = load_topology(args.topology) if args.topology else Topology(p.k, 2, 2, 2, 2)
    net = run_stage("network", lambda: build_activity_network(gates, topo))
    _emit(json.dumps(net.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK if not validate_network(net) else EXIT_INVALID


def cmd_schedule(args) -> int:
    net = ActivityNetwork.from_dict(json.loads(Path(args.network).read_text()))
    problems = validate_network(net)
    if problems:
        for p in problems:
            print(f"network: {p}", file=sys.stderr)
        return EXIT_INVALID
    limits = _limits(args)
    solvers = {"greedy": greedy_schedule, "exact": exact_schedule, "oracle": brute_force_schedule}
    methods = ["greedy", "exact"] if args.method == "both" else [args.method]
    status = EXIT_OK
    results = {}
    for m in methods:
        sched = run_stage(m, lambda: solvers[m](net, limits))
        violations = validate_schedule(net, sched, limits.resolve_horizon(net))
        for v in violations:
            print(f"{m}: {v}", file=sys.stderr)
        if violations:
            status = EXIT_INVALID
        results[m] = sched.to_dict(net)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for m, data in results.items():
            dump_json(out / f"schedule_{m}.json", data)
    else:
        payload = results[methods[0]] if len(methods) == 1 else results
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return status


def cmd_render(args) -> int:
    net = ActivityNetwork.from_dict(json.loads(Path(args.network).read_text()))
    data = json.loads(Path(args.schedule).read_text())
    sched = Schedule.from_dict(data)
    if args.format == "json":
        _emit(json.dumps(data, indent=2) + "\n", args.out)
        return EXIT_OK
    try:
        chart = network_chart(net, sched, args.horizon, f"{sched.method.value} schedule, makespan {sched.makespan}")
    except ValueError as exc:
        print(f"error [render] {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(render_ascii(chart) if args.format == "ascii" else render_svg(chart), args.out)
    return EXIT_OK


# argument parsing ------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--horizon", type=int, default=None, help="time horizon T (default: sum of durations)")
    p.add_argument("--node-budget", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock limit for the exact search, seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqcsched", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="run every stage and write all artifacts")
    p.add_argument("--circuit", required=True, help="circuit file or qft:<n>")
    p.add_argument("--k", type=int, default=None, help="number of QPUs / parts")
    p.add_argument("--topology", default=None, help=f"preset ({', '.join(PRESETS)}) or JSON file")
    p.add_argument("--durations", default=None, help="JSON gate-duration table")
    p.add_argument("--decompose-swaps", action="store_true")
    p.add_argument("--method", default="both", choices=("greedy", "exact", "both"))
    p.add_argument("--out", default="out")
    p.add_argument("--format", default="json,svg", help="comma list from json,ascii,svg")
    p.add_argument("--balance-tol", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)

    p = sub.add_parser("gen", help="emit a circuit in the text format")
    p.add_argument("--circuit", required=True)
    p.add_argument("--durations", default=None)
    p.add_argument("--decompose-swaps", action="store_true")
    p.add_argument("--json", action="store_true", help="emit circuit JSON instead of text")
    p.add_argument("--out", default=None)

    p = sub.add_parser("partition", help="partition a circuit's interaction graph")
    p.add_argument("--circuit", default=None)
    p.add_argument("--graph", default=None, help="graph JSON instead of a circuit")
    p.add_argument("--durations", default=None)
    p.add_argument("--decompose-swaps", action="store_true")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--balance-tol", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("extract", help="nonlocal gates -> activity network JSON")
    p.add_argument("--circuit", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--topology", default=None)
    p.add_argument("--durations", default=None)
    p.add_argument("--decompose-swaps", action="store_true")
    p.add_argument("--nonlocal-out", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("schedule", help="schedule an activity network")
    p.add_argument("--network", required=True)
    p.add_argument("--method", default="both", choices=("greedy", "exact", "oracle", "both"))
    p.add_argument("--out", default=None, help="output directory (default: stdout)")
    _add_solver_flags(p)

    p = sub.add_parser("render", help="draw a schedule as ASCII or SVG")
    p.add_argument("--network", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--format", default="ascii", choices=FORMATS)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "pipeline":
            cfg = PipelineConfig(
                circuit=args.circuit,
                k=args.k,
                topology=args.topology,
                durations=args.durations,
                decompose_swaps=args.decompose_swaps,
                method=args.method,
                limits=_limits(args),
                out=Path(args.out),
                formats=tuple(parse_formats(args.format)),
                balance_tol=args.balance_tol,
                seed=args.seed,
            )
            return cmd_pipeline(cfg)
        handler = {
            "gen": cmd_gen,
            "partition": cmd_partition,
            "extract": cmd_extract,
            "schedule": cmd_schedule,
            "render": cmd_render,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
