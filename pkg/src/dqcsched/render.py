"""ASCII and SVG Gantt charts for network schedules and local circuits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

from .circuit import Circuit, GanttSchedule, GateKind
from .netmap import ActivityNetwork
from .scheduler import Schedule, validate_schedule


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class Bar:
    lane: str
    start: int
    end: int
    label: str


@dataclass(frozen=True)
class Chart:
    title: str
    lanes: tuple[str, ...]
    bars: tuple[Bar, ...]
    horizon: int


def network_chart(n: ActivityNetwork, s: Schedule, horizon: Optional[int] = None, title: str = "") -> Chart:
    """One lane per unit of each resource (e.g. ``comm_switch[1]``).

    Demand units are packed first-fit in start order, so bars in a lane
    never overlap.  Refuses schedules that fail validation.
    """
    problems = validate_schedule(n, s, horizon)
    if problems:
        raise RenderError("refusing to render an invalid schedule: " + "; ".join(map(str, problems[:5])))
    lanes: list[str] = []
    busy: dict[str, list[tuple[int, int]]] = {}
    unit_lanes: dict = {}
    for r in n.resources():
        names = [f"{r}[{u}]" for u in range(n.capacity(r))]
        unit_lanes[r] = names
        lanes += names
        for name in names:
            busy[name] = []
    bars: list[Bar] = []
    for a in sorted(n.activities, key=lambda a: (s.starts[a.id], a.id)):
        start, end = s.starts[a.id], s.starts[a.id] + a.duration
        for r, q in a.demands.items():
            placed = 0
            for name in unit_lanes[r]:
                if placed == q:
                    break
                if all(end <= b0 or b1 <= start for b0, b1 in busy[name]):
                    busy[name].append((start, end))
                    bars.append(Bar(name, start, end, a.label))
                    placed += 1
            if placed < q:
                raise RenderError(f"could not pack activity {a.id} on {r}")
    return Chart(title, tuple(lanes), tuple(bars), s.makespan)


def _gate_label(kind: GateKind, qubits: tuple[int, ...]) -> str:
    if kind is GateKind.H:
        return "H"
    if kind is GateKind.CP:
        return f"CP{qubits[0]},{qubits[1]}"
    if kind is GateKind.SWAP:
        return "S"
    return "CX"


def circuit_chart(c: Circuit, gantt: GanttSchedule, title: str = "") -> Chart:
    lanes = tuple(f"q{q}" for q in range(c.num_qubits))
    bars = []
    for g, e in zip(c.gates, gantt.entries):
        for q in g.qubits:
            bars.append(Bar(f"q{q}", e.start, e.end, _gate_label(g.kind, g.qubits)))
    return Chart(title, lanes, tuple(bars), gantt.horizon)


def render_ascii(chart: Chart) -> str:
    """Lane per row, ``cell`` characters per time step; the first cell of a bar holds its label."""
    labels = [b.label for b in chart.bars]
    cell = max([len(x) for x in labels] + [len(str(max(chart.horizon - 1, 0))), 1]) + 1
    name_w = max([len(x) for x in chart.lanes] + [4])
    lines = []
    if chart.title:
        lines.append(chart.title)
    lines.append("time".ljust(name_w) + " |" + "".join(str(t).ljust(cell) for t in range(chart.horizon)))
    by_lane: dict[str, list[Bar]] = {lane: [] for lane in chart.lanes}
    for b in chart.bars:
        by_lane[b.lane].append(b)
    for lane in chart.lanes:
        row = ["." * cell for _ in range(chart.horizon)]
        for b in by_lane[lane]:
            for t in range(b.start, b.end):
                row[t] = "-" * cell
            row[b.start] = b.label.ljust(cell, "-" if b.end - b.start > 1 else " ")
        lines.append(lane.ljust(name_w) + " |" + "".join(row))
    return "\n".join(lines) + "\n"


_COLORS = {"LLE": "#e4572e", "SW": "#29335c", "MV": "#669bbc", "H": "#f3a712", "CP": "#a8c686", "S": "#8d6a9f", "CX": "#8d6a9f"}


def _color(label: str) -> str:
    for prefix, color in _COLORS.items():
        if label.startswith(prefix):
            return color
    return "#999999"


def render_svg(chart: Chart, unit: int = 28, row: int = 22) -> str:
    name_w = 8 * max([len(x) for x in chart.lanes] + [4]) + 10
    width = name_w + unit * max(chart.horizon, 1) + 10
    top = 40
    height = top + row * len(chart.lanes) + 10
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">',
        f'<text x="4" y="14">{escape(chart.title)}</text>',
    ]
    for t in range(chart.horizon + 1):
        x = name_w + t * unit
        out.append(f'<line x1="{x}" y1="{top - 6}" x2="{x}" y2="{height - 10}" stroke="#ddd"/>')
        if t < chart.horizon:
            out.append(f'<text x="{x + 2}" y="{top - 10}">{t}</text>')
    index = {lane: i for i, lane in enumerate(chart.lanes)}
    for lane, i in index.items():
        out.append(f'<text x="4" y="{top + i * row + 15}">{escape(lane)}</text>')
    for b in chart.bars:
        x = name_w + b.start * unit
        y = top + index[b.lane] * row + 2
        w = (b.end - b.start) * unit
        out.append(
            f'<rect x="{x}" y="{y}" width="{w}" height="{row - 4}" fill="{_color(b.label)}" stroke="#333"/>'
            f'<text x="{x + 3}" y="{y + 13}" fill="#fff">{escape(b.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
