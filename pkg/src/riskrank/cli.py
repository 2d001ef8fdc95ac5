"""Command-line pipeline: synth -> score/series -> cluster/compare.

Every command stages its outputs in a temporary directory and promotes
them only on success, so a failed run never leaves partial files behind.
Each run writes a manifest recording the tool version and every
parameter; re-running with the same inputs reproduces the outputs byte
for byte (sequential mode).  Errors come out as one JSON line on stderr
with exit codes 2 (validation), 3 (convergence), 4 (I/O).
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

from . import __version__, ingest, tsa, windows
from .errors import ConvergenceError, ValidationError
from .pagerank import PageRankParams, write_scores_csv

ENV_OUT_DIR = "RISKRANK_OUT"


@contextmanager
def _staged(final_dir: Path):
    """Yield a temp dir; move its files into final_dir only on success."""
    final_dir = Path(final_dir)
    final_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".stage-", dir=final_dir.parent))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    final_dir.mkdir(parents=True, exist_ok=True)
    for item in sorted(tmp.iterdir()):
        os.replace(item, final_dir / item.name)
    tmp.rmdir()


def _write_manifest(directory: Path, command: str, parameters: dict, **extra) -> None:
    payload = {"tool": "riskrank", "version": __version__, "command": command,
               "parameters": parameters, **extra}
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _parse_segment(text: str) -> ingest.RiskySegment:
    fields: dict[str, str] = {}
    for part in text.split(","):
        if "=" not in part:
            raise ValidationError(
                f"bad --segment {text!r}: expected key=value pairs "
                "(mult=, product=, district=, start=, end=)"
            )
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        return ingest.RiskySegment(
            multiplier=float(fields["mult"]),
            product=fields.get("product"),
            district=fields.get("district"),
            start_offset=int(fields.get("start", 0)),
            end_offset=int(fields.get("end", 10**6)),
        )
    except KeyError:
        raise ValidationError(f"bad --segment {text!r}: mult= is required") from None
    except ValueError as exc:
        raise ValidationError(f"bad --segment {text!r}: {exc}") from None


def _window_spec(args) -> windows.WindowSpec:
    return windows.WindowSpec(
        window_months=args.window_months,
        step_months=args.step_months,
        start_month=args.start_month,
        end_month=args.end_month,
    )


def _pagerank_params(args) -> PageRankParams:
    return PageRankParams(
        restart_probability=args.restart,
        tolerance=args.tol,
        max_iterations=args.max_iter,
    )


def _run_windows(args):
    records = ingest.parse_records(args.records)
    seq = windows.run_sequence(
        records, _window_spec(args), _pagerank_params(args), jobs=args.jobs
    )
    stuck = [d.index for d in seq.diagnostics if not d.skipped and not d.converged]
    if stuck:
        raise ConvergenceError(
            f"windows {stuck} did not converge within {args.max_iter} iterations"
        )
    return records, seq


def _window_parameters(args) -> dict:
    return {
        "records": str(args.records),
        "window_months": args.window_months,
        "step_months": args.step_months,
        "start_month": args.start_month,
        "end_month": args.end_month,
        "restart": args.restart,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "jobs": args.jobs,
    }


def cmd_synth(args) -> int:
    if args.config:
        cfg = ingest.load_synth_config(args.config)
    else:
        cfg = ingest.SynthConfig(
            n_loans=args.loans,
            n_products=args.products,
            n_districts=args.districts,
            span_months=args.span_months,
            base_default_rate=args.base_rate,
            risky_segments=tuple(_parse_segment(s) for s in args.segment),
            seed=args.seed,
            start_month=args.start_month,
        )
    records = ingest.generate_synthetic(cfg)
    out = Path(args.out)
    with _staged(out.parent if out.parent != Path("") else Path(".")) as tmp:
        ingest.write_records(records, tmp / out.name)
        with open(tmp / f"{out.stem}.manifest.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "tool": "riskrank",
                    "version": __version__,
                    "command": "synth",
                    "parameters": {
                        "n_loans": cfg.n_loans,
                        "n_products": cfg.n_products,
                        "n_districts": cfg.n_districts,
                        "span_months": cfg.span_months,
                        "base_default_rate": cfg.base_default_rate,
                        "seed": cfg.seed,
                        "start_month": cfg.start_month,
                        "risky_segments": [
                            {
                                "multiplier": seg.multiplier,
                                "product": seg.product,
                                "district": seg.district,
                                "start_offset": seg.start_offset,
                                "end_offset": seg.end_offset,
                            }
                            for seg in cfg.risky_segments
                        ],
                    },
                    "n_records": len(records),
                    "n_defaulted": sum(r.defaulted for r in records),
                },
                fh,
                indent=2,
            )
            fh.write("\n")
    return 0


def cmd_score(args) -> int:
    _records, seq = _run_windows(args)
    with _staged(Path(args.out_dir)) as tmp:
        for index, (net, result) in enumerate(zip(seq.networks, seq.results)):
            if net is None:
                continue
            with open(tmp / f"scores_w{index:03d}.csv", "w", encoding="utf-8") as fh:
                write_scores_csv(net, result, fh)
        _write_manifest(
            tmp, "score", _window_parameters(args), windows=seq.diagnostics_payload()
        )
    return 0


def cmd_series(args) -> int:
    _records, seq = _run_windows(args)
    with _staged(Path(args.out_dir)) as tmp:
        with open(tmp / "series.csv", "w", encoding="utf-8") as fh:
            windows.write_series_csv(seq, fh)
        _write_manifest(
            tmp, "series", _window_parameters(args), windows=seq.diagnostics_payload()
        )
    return 0


def _parse_k_range(text: str) -> list[int]:
    try:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    except ValueError:
        raise ValidationError(
            f"bad --k-range {text!r}: expected LO:HI (inclusive)"
        ) from None


def cmd_cluster(args) -> int:
    if (args.k is None) == (args.k_range is None):
        raise ValidationError("exactly one of --k / --k-range is required")
    with open(args.series, encoding="utf-8") as fh:
        _starts, series = windows.read_series_csv(fh)
    picked = [s for s in series if s.node_kind == args.kind]
    if not picked:
        raise ValidationError(f"no series of kind {args.kind!r} in {args.series}")

    if args.k is not None:
        result = tsa.dtw_kmeans(picked, args.k, seed=args.seed, max_iter=args.max_iter)
        ks, inertias = [args.k], [result.inertia]
        chosen_k, degenerate = args.k, None
    else:
        elbow = tsa.elbow_select(
            picked, _parse_k_range(args.k_range), seed=args.seed, max_iter=args.max_iter
        )
        result = tsa.dtw_kmeans(
            picked, elbow.chosen_k, seed=args.seed, max_iter=args.max_iter
        )
        ks, inertias = list(elbow.ks), list(elbow.inertias)
        chosen_k, degenerate = elbow.chosen_k, elbow.degenerate

    with _staged(Path(args.out_dir)) as tmp:
        with open(tmp / "clusters.csv", "w", encoding="utf-8") as fh:
            tsa.write_cluster_csv(result, picked, fh)
        with open(tmp / "inertia_curve.csv", "w", encoding="utf-8") as fh:
            tsa.write_inertia_csv(ks, inertias, fh)
        _write_manifest(
            tmp,
            "cluster",
            {
                "series": str(args.series),
                "kind": args.kind,
                "k": args.k,
                "k_range": args.k_range,
                "seed": args.seed,
                "max_iter": args.max_iter,
            },
            chosen_k=chosen_k,
            degenerate_elbow=degenerate,
            n_series=len(picked),
            inertia=float(f"{result.inertia:.12g}"),
        )
    return 0


def cmd_compare(args) -> int:
    records = ingest.parse_records(args.records)
    with open(args.series, encoding="utf-8") as fh:
        _starts, series = windows.read_series_csv(fh)
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    try:
        bounds = [(w["start_month"], w["end_month"]) for w in manifest["windows"]]
    except (KeyError, TypeError):
        raise ValidationError(
            f"{args.manifest} does not look like a score/series run manifest"
        ) from None
    pc = tsa.pair_comparison(records, bounds, series, args.district, args.product)
    with _staged(Path(args.out_dir)) as tmp:
        name = f"pair_{args.district}_{args.product}.csv"
        with open(tmp / name, "w", encoding="utf-8") as fh:
            tsa.write_pair_csv(pc, fh)
        _write_manifest(
            tmp,
            "compare",
            {
                "records": str(args.records),
                "series": str(args.series),
                "manifest": str(args.manifest),
                "district": args.district,
                "product": args.product,
            },
            n_windows=len(bounds),
        )
    return 0


def _add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--records", required=True, help="input records CSV")
    parser.add_argument("--out-dir", default=os.environ.get(ENV_OUT_DIR),
                        required=ENV_OUT_DIR not in os.environ,
                        help=f"output directory (env {ENV_OUT_DIR} overrides the default)")
    parser.add_argument("--window-months", type=int, default=60)
    parser.add_argument("--step-months", type=int, default=1)
    parser.add_argument("--start-month", default=None, help="override span start (YYYY-MM)")
    parser.add_argument("--end-month", default=None, help="override span end (YYYY-MM)")
    parser.add_argument("--restart", type=float, default=0.85,
                        help="probability of following an edge (default 0.85)")
    parser.add_argument("--tol", type=float, default=1e-9,
                        help="L1 convergence tolerance per iteration")
    parser.add_argument("--max-iter", type=int, default=1000)
    parser.add_argument("--jobs", type=int, default=1,
                        help="solve windows in N parallel processes")


class _Parser(argparse.ArgumentParser):
    """argparse errors funneled through the normal validation path, so a
    bad flag produces the same one-line JSON error as any other bad input."""

    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="riskrank",
        description="Default-risk propagation scores on multilayer loan networks",
    )
    parser.add_argument("--version", action="version", version=f"riskrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic loan dataset")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--config", default=None, help="generator config JSON (overrides flags)")
    p.add_argument("--loans", type=int, default=1000)
    p.add_argument("--products", type=int, default=8)
    p.add_argument("--districts", type=int, default=12)
    p.add_argument("--span-months", type=int, default=120)
    p.add_argument("--base-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-month", default="2000-01")
    p.add_argument("--segment", action="append", default=[],
                   help="risky segment, e.g. mult=3.0,product=P01,start=20,end=40 (repeatable)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="solve every window, write per-window score CSVs")
    _add_window_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("series", help="solve every window, write the long-format series CSV")
    _add_window_flags(p)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("cluster", help="cluster node series by shape")
    p.add_argument("--series", required=True, help="series CSV from the series command")
    p.add_argument("--kind", default="product", help="node kind to cluster (default product)")
    p.add_argument("--k", type=int, default=None, help="fixed number of clusters")
    p.add_argument("--k-range", default=None, help="LO:HI, pick k by the elbow rule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--out-dir", default=os.environ.get(ENV_OUT_DIR),
                   required=ENV_OUT_DIR not in os.environ)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("compare", help="pair scores vs. default rate for (district, product)")
    p.add_argument("--records", required=True)
    p.add_argument("--series", required=True)
    p.add_argument("--manifest", required=True,
                   help="manifest.json of the run that produced the series")
    p.add_argument("--district", required=True)
    p.add_argument("--product", required=True)
    p.add_argument("--out-dir", default=os.environ.get(ENV_OUT_DIR),
                   required=ENV_OUT_DIR not in os.environ)
    p.set_defaults(func=cmd_compare)

    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        return _fail("validation", str(exc), 2)
    except ConvergenceError as exc:
        return _fail("convergence", str(exc), 3)
    except OSError as exc:
        return _fail("io", str(exc), 4)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
