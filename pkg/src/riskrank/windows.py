"""Sliding-window network sequence and per-node score time series.

Records are bucketed into fixed-width month windows shifted by a fixed
step.  Each window gets its own network, its own influence set (the loans
that defaulted in that window), and an independent solve; the per-window
aggregated scores of every specific node are then stitched into one
series per (kind, label), with 0 where a node is absent or a window was
skipped, so all series share a single length.

Windows with no records or no defaulters are skipped rather than failing
the run: the influence set is undefined there, and keeping the slot (as
zeros) keeps every series aligned with the window sequence.  Skips are
visible in the diagnostics.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .ingest import LoanRecord
from .months import format_month, parse_month
from .netmodel import DEFAULT_LAYERS, LayerSpec, MultilayerNetwork, build_network
from .pagerank import InfluenceSpec, PageRankParams, PageRankResult, personalized_pagerank


@dataclass(frozen=True)
class WindowSpec:
    window_months: int = 60
    step_months: int = 1
    start_month: str | None = None  # default: first grant month in the data
    end_month: str | None = None    # default: last grant month (inclusive)

    def __post_init__(self):
        if self.window_months < 1:
            raise ValidationError("window_months must be >= 1")
        if self.step_months < 1:
            raise ValidationError("step_months must be >= 1")


@dataclass(frozen=True)
class NodeSeries:
    node_kind: str  # layer name ("district", "product", ...)
    label: str
    values: np.ndarray  # one score per window; 0 where absent
    window_index_range: tuple[int, int]


@dataclass(frozen=True)
class WindowDiagnostics:
    index: int
    start_month: str
    end_month: str
    n_records: int
    n_defaulted: int
    skipped: bool
    skip_reason: str | None
    iterations: int | None
    final_residual: float | None
    converged: bool | None


@dataclass
class SequenceResult:
    windows: list[tuple[str, str]]  # inclusive (start, end) months
    results: list[PageRankResult | None]
    networks: list[MultilayerNetwork | None]
    series: list[NodeSeries]
    diagnostics: list[WindowDiagnostics]

    def get_series(self, kind: str, label: str) -> NodeSeries:
        for s in self.series:
            if s.node_kind == kind and s.label == label:
                return s
        raise KeyError(f"no series for ({kind!r}, {label!r})")

    def diagnostics_payload(self) -> list[dict]:
        payload = []
        for d in self.diagnostics:
            entry = {
                "index": d.index,
                "start_month": d.start_month,
                "end_month": d.end_month,
                "n_records": d.n_records,
                "n_defaulted": d.n_defaulted,
                "skipped": d.skipped,
            }
            if d.skipped:
                entry["skip_reason"] = d.skip_reason
            else:
                entry["iterations"] = d.iterations
                entry["final_residual"] = float(f"{d.final_residual:.12g}")
                entry["converged"] = d.converged
            payload.append(entry)
        return payload


def enumerate_windows(
    records: Sequence[LoanRecord], spec: WindowSpec
) -> list[tuple[str, str]]:
    """Chronological (start, end) month pairs, both inclusive."""
    if not records:
        raise ValidationError("cannot enumerate windows over zero records")
    grant = [parse_month(r.grant_month) for r in records]
    start = parse_month(spec.start_month) if spec.start_month else min(grant)
    end = parse_month(spec.end_month) if spec.end_month else max(grant)
    span = end - start + 1
    if span < spec.window_months:
        raise ValidationError(
            f"span of {span} months is shorter than the {spec.window_months}-month window"
        )
    count = (span - spec.window_months) // spec.step_months + 1
    return [
        (
            format_month(start + i * spec.step_months),
            format_month(start + i * spec.step_months + spec.window_months - 1),
        )
        for i in range(count)
    ]


def _solve_window(task):
    index, subset, layer_specs, params = task
    influence = frozenset(i for i, rec in enumerate(subset) if rec.defaulted)
    net = build_network(subset, layer_specs)
    result = personalized_pagerank(net, InfluenceSpec(influence), params)
    return index, net, result


def run_sequence(
    records: Sequence[LoanRecord],
    wspec: WindowSpec = WindowSpec(),
    pparams: PageRankParams = PageRankParams(),
    layer_specs: Sequence[LayerSpec] = DEFAULT_LAYERS,
    jobs: int = 1,
) -> SequenceResult:
    """Solve every window and assemble per-label score series.

    Window solves are independent; ``jobs > 1`` fans them out across
    processes (attribute-name layer selectors only, so tasks pickle).
    """
    if jobs > 1 and any(callable(sel) for _, sel in layer_specs):
        raise ValidationError("parallel runs require attribute-name layer selectors")
    window_bounds = enumerate_windows(records, wspec)
    grant = [parse_month(r.grant_month) for r in records]

    subsets: list[list[LoanRecord]] = []
    for start, end in window_bounds:
        lo, hi = parse_month(start), parse_month(end)
        subsets.append([r for r, g in zip(records, grant) if lo <= g <= hi])

    tasks = []
    diagnostics: list[WindowDiagnostics | None] = [None] * len(window_bounds)
    results: list[PageRankResult | None] = [None] * len(window_bounds)
    networks: list[MultilayerNetwork | None] = [None] * len(window_bounds)
    for index, ((start, end), subset) in enumerate(zip(window_bounds, subsets)):
        n_def = sum(r.defaulted for r in subset)
        if not subset or n_def == 0:
            reason = "no_records" if not subset else "no_defaulters"
            diagnostics[index] = WindowDiagnostics(
                index, start, end, len(subset), n_def,
                skipped=True, skip_reason=reason,
                iterations=None, final_residual=None, converged=None,
            )
            continue
        tasks.append((index, subset, tuple(layer_specs), pparams))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(_solve_window, tasks))
    else:
        solved = [_solve_window(t) for t in tasks]

    for index, net, result in solved:
        start, end = window_bounds[index]
        subset = subsets[index]
        networks[index] = net
        results[index] = result
        diagnostics[index] = WindowDiagnostics(
            index, start, end, len(subset), sum(r.defaulted for r in subset),
            skipped=False, skip_reason=None,
            iterations=result.iterations,
            final_residual=result.final_residual,
            converged=result.converged,
        )

    series = _assemble_series(window_bounds, networks, results)
    return SequenceResult(window_bounds, results, networks, series, diagnostics)


def _assemble_series(window_bounds, networks, results) -> list[NodeSeries]:
    n_windows = len(window_bounds)
    labels: set[tuple[str, str]] = set()
    for net in networks:
        if net is None:
            continue
        for node in net.specific_nodes():
            labels.add((net.layer_names[node.layer], node.label))

    values = {key: np.zeros(n_windows) for key in sorted(labels)}
    for index, (net, result) in enumerate(zip(networks, results)):
        if net is None:
            continue
        for node in net.specific_nodes():
            key = (net.layer_names[node.layer], node.label)
            values[key][index] = result.node_scores[node.index]

    return [
        NodeSeries(kind, label, vals, (0, n_windows - 1))
        for (kind, label), vals in values.items()
    ]


def write_series_csv(seq: SequenceResult, stream) -> None:
    """Long-format export: one row per (window, specific node)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["window_index", "window_start", "node_kind", "label", "score"])
    for s in seq.series:
        for index, (start, _end) in enumerate(seq.windows):
            writer.writerow([index, start, s.node_kind, s.label, f"{s.values[index]:.12g}"])


def read_series_csv(stream) -> tuple[list[str], list[NodeSeries]]:
    """Inverse of write_series_csv: (window start months, series list)."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["window_index", "window_start", "node_kind", "label", "score"]:
        raise ValidationError(f"bad series header {header!r}")
    starts: dict[int, str] = {}
    buckets: dict[tuple[str, str], dict[int, float]] = {}
    for row in reader:
        index = int(row[0])
        starts[index] = row[1]
        buckets.setdefault((row[2], row[3]), {})[index] = float(row[4])
    n_windows = max(starts) + 1 if starts else 0
    series = []
    for (kind, label), by_index in sorted(buckets.items()):
        vals = np.zeros(n_windows)
        for index, score in by_index.items():
            vals[index] = score
        series.append(NodeSeries(kind, label, vals, (0, n_windows - 1)))
    return [starts[i] for i in range(n_windows)], series
