"""Command-line front end.

Subcommands: ``solve``, ``exact``, ``verify``, ``bench`` and ``instances``.
Exit codes: 0 success, 1 usage or input error, 2 infeasible result (or a
failed benchmark row).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import _backend
from .graph import WeightedGraph, load_graph
from .instances import benchmark_set
from .oracle import DEFAULT_LIMIT, InstanceTooLarge, exact_solve, verify_partition
from .solution import PartitionFormatError, format_partition, read_partition
from .vns import RunReport, SolverConfig, default_jobs, solve_repeated

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; this CLI reserves 2 for
    infeasible results, so usage errors are re-raised and mapped to 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# -- argument groups -------------------------------------------------------

_DEFAULTS = SolverConfig()


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, type=Path, help="instance file")
    p.add_argument("--format", choices=("dimacs", "edgelist"),
                   help="instance format (default: dimacs for .clq/.col, else edgelist)")
    p.add_argument("--dimacs-weights", action="store_true",
                   help="weight edge {i,j} as ((i + j) mod 200) + 1")
    p.add_argument("--k", type=int, default=_DEFAULTS.k)


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runs", type=int, default=_DEFAULTS.runs)
    p.add_argument("--seed", type=int, default=_DEFAULTS.seed)
    p.add_argument("--n-min", type=int, default=_DEFAULTS.n_min)
    p.add_argument("--n-max", type=int, default=_DEFAULTS.n_max)
    p.add_argument("--it-max", type=int, default=_DEFAULTS.it_max)
    p.add_argument("--itrep-max", type=int, default=_DEFAULTS.itrep_max)
    p.add_argument("--t-max", type=float, default=_DEFAULTS.t_max, help="seconds per run")
    p.add_argument("--prob", type=float, default=_DEFAULTS.prob)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: $KPLEX_VNS_JOBS or 1)")
    p.add_argument("--backend", choices=("cython", "python"), default=None)


def _config(args, k: int | None = None) -> SolverConfig:
    try:
        return SolverConfig(
            k=args.k if k is None else k,
            n_min=args.n_min, n_max=args.n_max,
            it_max=args.it_max, itrep_max=args.itrep_max,
            t_max=args.t_max, prob=args.prob,
            seed=args.seed, runs=args.runs,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args) -> WeightedGraph:
    try:
        return load_graph(args.input, args.format, args.dimacs_weights)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise UsageError(f"{args.input}: {exc}") from None


def _check_k(k: int) -> None:
    if k < 1:
        raise UsageError(f"--k must be >= 1, got {k}")


# -- report rendering ------------------------------------------------------


def _blocks(labels) -> list[list[int]]:
    out: dict[int, list[int]] = {}
    for v, p in enumerate(labels):
        out.setdefault(int(p), []).append(v + 1)
    return [out[p] for p in sorted(out)]


def report_json(report: RunReport, graph: WeightedGraph, source: dict) -> dict:
    best = report.best
    return {
        "schema": SCHEMA_VERSION,
        "instance": {**source, "name": graph.name, "n": graph.n, "m": graph.m,
                     "w_total": graph.w_total},
        "config": asdict(report.config),
        "backend": report.backend,
        "best": {
            "run": best.run,
            "weight": best.weight,
            "objective": best.objective.value,
            "correct_total": best.objective.correct_total,
            "w_sol": best.objective.w_sol,
            "feasible": best.feasible,
            "violators": [v + 1 for v in best.violators],
            "partition": _blocks(best.labels),
        },
        "runs": [
            {
                "run": r.run,
                "weight": r.weight,
                "objective": r.objective.value,
                "feasible": r.feasible,
                "iterations": r.iterations,
                "time": r.elapsed,
                "termination": r.termination,
            }
            for r in report.runs
        ],
        "best_weight": report.best_weight,
        "avg_weight": report.avg_weight,
        "gap_percent": report.gap_percent,
        "time_sum": report.total_time,
        "wall_time": report.wall_time,
        "terminations": report.terminations(),
    }


def _write(path: Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


# -- subcommands -----------------------------------------------------------


def cmd_solve(args) -> int:
    _check_k(args.k)
    config = _config(args)
    graph = _load(args)
    report = solve_repeated(graph, config, jobs=args.jobs, backend=args.backend)
    source = {"path": str(args.input), "format": args.format, "dimacs_weights": args.dimacs_weights}
    doc = report_json(report, graph, source)
    _write(args.output, json.dumps(doc, indent=2) + "\n")
    best = report.best
    if args.dump is not None:
        _write(args.dump, format_partition(
            best.labels, k=config.k, feasible=best.feasible,
            weight=best.weight, objective=best.objective.value,
        ))
    print(
        f"{graph.name}: k={config.k} best={best.weight:g} avg={report.avg_weight:g} "
        f"gap={report.gap_percent:.2f}% feasible={str(best.feasible).lower()}",
        file=sys.stderr,
    )
    return EXIT_OK if best.feasible else EXIT_INFEASIBLE


def cmd_exact(args) -> int:
    _check_k(args.k)
    graph = _load(args)
    try:
        res = exact_solve(graph, args.k, limit=args.limit)
    except InstanceTooLarge as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(f"optimum_weight: {_num(res.optimum_weight)}\n")
    sys.stdout.write(f"partitions_enumerated: {res.partitions_enumerated}\n")
    sys.stdout.write(format_partition(
        res.labels, k=args.k, feasible=True,
        weight=res.optimum_weight, objective=res.optimum_objective,
    ))
    return EXIT_OK


def cmd_verify(args) -> int:
    _check_k(args.k)
    graph = _load(args)
    try:
        labels = read_partition(args.partition, graph.n)
    except OSError as exc:
        raise UsageError(f"cannot read {args.partition}: {exc.strerror or exc}") from None
    except PartitionFormatError as exc:
        raise UsageError(f"{args.partition}: {exc}") from None
    cert = verify_partition(graph, labels, args.k)
    sys.stdout.write(f"feasible: {str(cert.feasible).lower()}\n")
    sys.stdout.write(f"weight: {_num(cert.weight)}\n")
    sys.stdout.write(f"violators: {' '.join(str(v + 1) for v in cert.violators)}\n")
    return EXIT_OK if cert.feasible else EXIT_INFEASIBLE


def cmd_instances(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    for name, g in benchmark_set().items():
        path = args.out / f"{name}.clq"
        path.write_text(g.to_dimacs([f"{name} (regenerated from its construction)"]), encoding="utf-8")
        print(path, file=sys.stderr)
    return EXIT_OK


# -- bench -----------------------------------------------------------------


@dataclass
class ManifestEntry:
    file: str
    format: str | None = None
    dimacs_weights: bool = False
    alias: str | None = None
    k: list[int] = field(default_factory=lambda: [1])
    reference: dict[int, tuple[float, str]] = field(default_factory=dict)


def load_manifest(path: Path) -> tuple[Path, list[ManifestEntry]]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read manifest {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"manifest {path}: {exc}") from None
    items = doc.get("instances") if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise UsageError(f"manifest {path}: expected a list of instances")
    entries = []
    for i, item in enumerate(items):
        try:
            if not isinstance(item, dict) or "file" not in item:
                raise ValueError("each instance needs a 'file'")
            ks = item.get("k", [1])
            ks = [ks] if isinstance(ks, int) else list(ks)
            if not ks or any(not isinstance(k, int) or k < 1 for k in ks):
                raise ValueError(f"bad k list {item.get('k')!r}")
            ref = {}
            for key, val in (item.get("reference") or {}).items():
                status = str(val.get("status", "best"))
                if status not in ("opt", "best"):
                    raise ValueError(f"reference status must be 'opt' or 'best', got {status!r}")
                ref[int(key)] = (float(val["value"]), status)
            fmt = item.get("format")
            if fmt not in (None, "dimacs", "edgelist"):
                raise ValueError(f"unknown format {fmt!r}")
            entries.append(ManifestEntry(
                file=str(item["file"]), format=fmt,
                dimacs_weights=bool(item.get("dimacs_weights", False)),
                alias=item.get("alias"), k=ks, reference=ref,
            ))
        except (ValueError, TypeError, KeyError, AttributeError) as exc:
            raise UsageError(f"manifest {path}, entry {i}: {exc}") from None
    return path.parent, entries


@dataclass
class BenchRow:
    instance: str
    k: int
    reference: float | None = None
    ref_status: str | None = None
    best: float | None = None
    avg: float | None = None
    gap_percent: float | None = None
    tag: str = ""
    runs: int = 0
    feasible: bool = False
    terminations: dict[str, int] = field(default_factory=dict)
    time_sum: float = 0.0
    wall_time: float = 0.0
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


def status_tag(best: float, reference: float | None, status: str | None) -> str:
    """``opt``/``best`` when the reference is matched, ``new`` when beaten,
    ``miss`` when below it, empty without a reference."""
    if reference is None:
        return ""
    if best == reference:
        return status or "best"
    return "new" if best > reference else "miss"


def _bench_one(task) -> BenchRow:
    base, entry, k, config, backend = task
    name = entry.alias or Path(entry.file).stem
    ref, status = entry.reference.get(k, (None, None))
    row = BenchRow(instance=name, k=k, reference=ref, ref_status=status)
    try:
        graph = load_graph(base / entry.file, entry.format, entry.dimacs_weights)
        report = solve_repeated(graph, SolverConfig(**{**asdict(config), "k": k}),
                                jobs=1, backend=backend)
    except (OSError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    row.best = report.best_weight
    row.avg = report.avg_weight
    row.gap_percent = report.gap_percent
    row.tag = status_tag(row.best, ref, status)
    row.runs = len(report.runs)
    row.feasible = report.feasible
    row.terminations = report.terminations()
    row.time_sum = report.total_time
    row.wall_time = report.wall_time
    return row


CSV_COLUMNS = ("k", "inst", "ref", "ref_status", "best", "tag", "avg", "gap_percent",
               "runs", "feasible", "terminations", "status")


def _num(x: float | None) -> str:
    if x is None:
        return ""
    return str(int(x)) if float(x).is_integer() else f"{x:.10g}"


def bench_csv(rows: Sequence[BenchRow]) -> str:
    """CSV without timing columns, so equal seeds give byte-identical files."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([
            r.k, r.instance, _num(r.reference), r.ref_status or "",
            _num(r.best), r.tag, _num(r.avg),
            "" if r.gap_percent is None else f"{r.gap_percent:.4f}",
            r.runs, str(r.feasible).lower() if not r.failed else "",
            ";".join(f"{t}:{c}" for t, c in r.terminations.items()),
            f"failed: {r.error}" if r.failed else "ok",
        ])
    return buf.getvalue()


def bench_text(rows: Sequence[BenchRow]) -> str:
    header = ("k", "inst", "opt/best", "V_best", "V_avg", "V_gap", "V_t_tot")
    lines = [header]
    for r in rows:
        if r.failed:
            lines.append((str(r.k), r.instance, _ref_cell(r), "FAILED", "", "", ""))
            continue
        best = _num(r.best) + (f" {r.tag}" if r.tag else "")
        lines.append((str(r.k), r.instance, _ref_cell(r), best, f"{r.avg:.2f}",
                      f"{r.gap_percent:.2f}", f"{r.time_sum:.2f}"))
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    out = ["  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))
           for row in lines]
    return "\n".join(s.rstrip() for s in out) + "\n"


def _ref_cell(r: BenchRow) -> str:
    if r.reference is None:
        return "-"
    return f"{_num(r.reference)} {r.ref_status}"


def run_bench(manifest: Path, config: SolverConfig, jobs: int = 1,
              backend: str | None = None) -> list[BenchRow]:
    base, entries = load_manifest(manifest)
    name = _backend.get(backend).BACKEND
    tasks = [(base, e, k, config, name) for e in entries for k in e.k]
    if jobs <= 1 or len(tasks) <= 1:
        return [_bench_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_bench_one, tasks))


def cmd_bench(args) -> int:
    config = _config(args, k=1)
    jobs = default_jobs() if args.jobs is None else max(1, args.jobs)
    rows = run_bench(args.manifest, config, jobs=jobs, backend=args.backend)
    if args.csv is not None:
        _write(args.csv, bench_csv(rows))
    text = bench_text(rows)
    if args.text is not None:
        _write(args.text, text)
    elif args.csv is None or str(args.csv) != "-":
        sys.stdout.write(text)
    for r in rows:
        if r.failed:
            print(f"row {r.instance} k={r.k} failed: {r.error}", file=sys.stderr)
    return EXIT_INFEASIBLE if any(r.failed for r in rows) else EXIT_OK


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kplex-vns", description="Maximum edge-weight k-plex partitioning by VNS.")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run the VNS on one instance")
    _add_instance_args(s)
    _add_solver_args(s)
    s.add_argument("--output", type=Path, help="JSON report path (default: stdout)")
    s.add_argument("--dump", type=Path, help="write the best partition in dump format")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("exact", help="optimum by exhaustive enumeration (small graphs)")
    _add_instance_args(e)
    e.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="largest n accepted")
    e.set_defaults(func=cmd_exact)

    v = sub.add_parser("verify", help="check a partition dump against an instance")
    _add_instance_args(v)
    v.add_argument("--partition", required=True, type=Path)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run every (instance, k) of a manifest")
    b.add_argument("--manifest", required=True, type=Path)
    _add_solver_args(b)
    b.add_argument("--csv", type=Path, help="CSV output path ('-' for stdout)")
    b.add_argument("--text", type=Path, help="aligned table path ('-' for stdout)")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("instances", help="write the regenerated DIMACS benchmark graphs")
    g.add_argument("--out", type=Path, default=Path("."))
    g.set_defaults(func=cmd_instances)
    return p


def _version() -> str:
    from . import __version__
    return __version__


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
