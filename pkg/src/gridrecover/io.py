"""On-disk formats: network JSON, state-set CSV/JSON, trace CSV, reports.

Floats are written with ``repr``, which is the shortest form that parses back
to the identical double, so every round trip is exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bounds import BoundReport
from .network import AC, DC, Network
from .recovery import EVENTS, RecoveryTrace, TraceRow
from .sparsify import EdgeStatistics
from .states import StateSet


class FormatError(ValueError):
    """Input file does not match the expected schema."""


def network_to_dict(net: Network) -> dict:
    return {
        "kind": net.kind,
        "n": net.n,
        "edges": [
            {"j": j, "k": k, "c": float(c), "s": float(s)}
            for (j, k), c, s in zip(net.edges, net.c, net.s)
        ],
    }


def network_from_dict(data: dict) -> Network:
    try:
        kind = data["kind"]
        n = int(data["n"])
        raw = data["edges"]
        edges = [(int(e["j"]), int(e["k"])) for e in raw]
        c = [float(e["c"]) for e in raw]
        s = [float(e.get("s", 0.0)) for e in raw]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed network object: {exc}") from exc
    try:
        return Network(kind, n, tuple(edges), np.array(c), np.array(s))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2) + "\n")


def load_network(path) -> Network:
    with open(path) as fh:
        return network_from_dict(json.load(fh))


def _state_header(kind: str, n: int) -> list[str]:
    if kind == DC:
        return [name for j in range(1, n + 1) for name in (f"e_{j}", f"P_{j}")]
    return [name for j in range(1, n + 1) for name in (f"e_{j}", f"f_{j}", f"P_{j}", f"Q_{j}")]


def save_states_csv(states: StateSet, path) -> None:
    n = states.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_state_header(states.kind, n))
        for k in range(states.m):
            row = []
            for j in range(n):
                if states.kind == DC:
                    row += [repr(float(states.e[k, j])), repr(float(states.p[k, j]))]
                else:
                    row += [
                        repr(float(states.e[k, j])),
                        repr(float(states.f[k, j])),
                        repr(float(states.p[k, j])),
                        repr(float(states.q[k, j])),
                    ]
            writer.writerow(row)


def load_states_csv(path) -> StateSet:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty state file") from None
        rows = [row for row in reader if row]
    kind = AC if "f_1" in header else DC
    per_node = 4 if kind == AC else 2
    n, rem = divmod(len(header), per_node)
    if rem or n < 1 or header != _state_header(kind, n):
        raise FormatError(f"{path}: unexpected state header {header!r}")
    try:
        data = np.array([[float(x) for x in row] for row in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric state entry: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise FormatError(f"{path}: ragged state rows")
    if kind == DC:
        e, p = data[:, 0::2], data[:, 1::2]
        return StateSet.dc(e, p)
    return StateSet(AC, data[:, 0::4], data[:, 1::4], data[:, 2::4], data[:, 3::4])


def states_to_dict(states: StateSet) -> dict:
    out = {"kind": states.kind, "n": states.n, "m": states.m, "states": []}
    for k in range(states.m):
        entry = {"e": states.e[k].tolist(), "P": states.p[k].tolist()}
        if states.kind == AC:
            entry["f"] = states.f[k].tolist()
            entry["Q"] = states.q[k].tolist()
        out["states"].append(entry)
    return out


def states_from_dict(data: dict) -> StateSet:
    try:
        kind = data["kind"]
        raw = data["states"]
        e = np.array([st["e"] for st in raw], dtype=float)
        p = np.array([st["P"] for st in raw], dtype=float)
        if kind == AC:
            f = np.array([st["f"] for st in raw], dtype=float)
            q = np.array([st["Q"] for st in raw], dtype=float)
        else:
            f = np.zeros_like(e)
            q = np.zeros_like(e)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed state object: {exc}") from exc
    try:
        return StateSet(kind, e, f, p, q)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def save_states_json(states: StateSet, path) -> None:
    Path(path).write_text(json.dumps(states_to_dict(states)) + "\n")


def load_states_json(path) -> StateSet:
    with open(path) as fh:
        return states_from_dict(json.load(fh))


def dump_system_csv(system, path) -> None:
    """Debug dump of an assembled system: labelled columns plus the response.

    One row per equation; the last column is the stacked injection vector.
    Meant for external verification of the assembly, not for re-loading.
    """
    labels = [f"{which}_{j}_{k}" for (j, k), which in system.columns]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(labels + ["rhs"])
        for row, rhs in zip(system.matrix, system.rhs):
            writer.writerow([repr(float(x)) for x in row] + [repr(float(rhs))])


TRACE_COLUMNS = ("iteration", "edges", "rms", "kappa", "epsilon", "event")


def save_trace_csv(trace: RecoveryTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in trace:
            writer.writerow(
                [r.iteration, r.edges, repr(r.rms), repr(r.kappa), repr(r.epsilon), r.event]
            )


def load_trace_csv(path) -> RecoveryTrace:
    trace = RecoveryTrace()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(TRACE_COLUMNS):
            raise FormatError(f"{path}: unexpected trace header {header!r}")
        for row in reader:
            if not row:
                continue
            if len(row) != 6 or row[5] not in EVENTS:
                raise FormatError(f"{path}: malformed trace row {row!r}")
            trace.append(
                TraceRow(int(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4]), row[5])
            )
    return trace


def trace_to_dicts(trace: RecoveryTrace) -> list[dict]:
    return [asdict(r) for r in trace]


def save_trace_json(trace: RecoveryTrace, path) -> None:
    Path(path).write_text(json.dumps(trace_to_dicts(trace)) + "\n")


def load_trace_json(path) -> RecoveryTrace:
    trace = RecoveryTrace()
    with open(path) as fh:
        data = json.load(fh)
    try:
        for row in data:
            if row["event"] not in EVENTS:
                raise FormatError(f"{path}: unknown event {row['event']!r}")
            trace.append(
                TraceRow(
                    int(row["iteration"]),
                    int(row["edges"]),
                    float(row["rms"]),
                    float(row["kappa"]),
                    float(row["epsilon"]),
                    row["event"],
                )
            )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed trace object: {exc}") from exc
    return trace


def render_trace_table(trace: RecoveryTrace, include_all: bool = False) -> str:
    """Text table of a run; by default only rows where the network changed."""
    rows = list(trace) if include_all else trace.filtered()
    header = ["iteration", "edges", "rms", "kappa", "epsilon"]
    if include_all:
        header.append("event")
    body = []
    for r in rows:
        line = [str(r.iteration), str(r.edges), f"{r.rms:.3e}", f"{r.kappa:.3e}", f"{r.epsilon:.4f}"]
        if include_all:
            line.append(r.event)
        body.append(line)
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h) for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    lines = [fmt.format(*header)]
    lines += [fmt.format(*row) for row in body]
    return "\n".join(lines)


def save_edge_statistics_csv(stats_by_graph: dict[str, EdgeStatistics], path) -> None:
    """CSV of per-edge statistics; one block per labelled graph."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["graph", "j", "k", "r_eff", "leverage", "p"])
        for label, stats in stats_by_graph.items():
            for (j, k), r, lev, p in zip(stats.edges, stats.r_eff, stats.leverage, stats.p):
                writer.writerow([label, j, k, repr(float(r)), repr(float(lev)), repr(float(p))])


def bound_report_to_dict(report: BoundReport) -> dict:
    return asdict(report)
