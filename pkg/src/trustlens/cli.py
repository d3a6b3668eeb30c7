"""Command-line front end.

    trustlens report --predictions preds.jsonl --labels labels.txt --out outdir/

Exit status: 0 on success, 1 on invalid input data, 2 on usage errors.
Every command writes its files into a temporary directory and moves them
into place only after everything succeeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .core import InvalidInputError, LabelSpace, TrustParams
from .density import DEFAULT_BINS, DEFAULT_GRID_SIZE, DensityConfig, conditional_trust_densities
from .ingest import IngestConfig, IngestReport, load_label_map, read_scored_table
from .metrics import WEIGHTINGS, net_trust_score, trust_matrix, trust_spectrum
from .render import HeatmapStyle, render_density_plot, render_trust_matrix
from .report import FORMATS, build_report, density_pair_json, emit_report, matrix_tables, spectrum_table

log = logging.getLogger("trustlens")

THREADS_ENV = "TRUSTLENS_THREADS"
COMMANDS = ("score", "matrix", "spectrum", "densities", "report")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (value > 0 and value != float("inf")):
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {text!r}")
    return value


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {value}")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trustlens", description="Trust quantification for classifier prediction dumps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--predictions", required=True, help="line-delimited JSON prediction dump")
    common.add_argument("--labels", required=True, help="label map, one class name per line")
    common.add_argument("--alpha", type=_positive_float, default=1.0, help="reward relaxation exponent (default 1)")
    common.add_argument("--beta", type=_positive_float, default=1.0, help="penalty relaxation exponent (default 1)")
    common.add_argument("--strict", action="store_true", help="no renormalisation; any rejected line is an error")
    common.add_argument("--sum-tolerance", type=_positive_float, default=1e-4)
    common.add_argument("--out", help="output directory (default: write the main table to stdout)")

    dens = _Parser(add_help=False)
    dens.add_argument("--bins", type=_int_at_least(2), default=DEFAULT_BINS, help="histogram bins (default 25)")
    dens.add_argument("--bandwidth", type=_positive_float, help="KDE bandwidth (default: Silverman's rule)")
    dens.add_argument("--estimator", choices=("histogram", "kde"), default="kde", help="curve drawn in density plots")
    dens.add_argument("--grid-size", type=_int_at_least(16), default=DEFAULT_GRID_SIZE)

    weight = _Parser(add_help=False)
    weight.add_argument("--weighting", choices=WEIGHTINGS, default="empirical", help="class weights for NetTrustScore")

    sub.add_parser("score", parents=[common], help="per-record trust")
    p = sub.add_parser("matrix", parents=[common], help="trust matrix CSV and heatmap")
    _heatmap_args(p)
    sub.add_parser("spectrum", parents=[common, weight], help="trust spectrum and NetTrustScore")
    p = sub.add_parser("densities", parents=[common, dens], help="conditional trust densities for one class")
    p.add_argument("--class", dest="oracle_class", required=True, help="oracle class name or index")
    p = sub.add_parser("report", parents=[common, dens, weight], help="every metric and figure")
    p.add_argument("--format", choices=(*FORMATS, "all"), default="all")
    p.add_argument("--no-density-plots", action="store_true", help="skip the per-class density SVGs")
    _heatmap_args(p)

    fixtures = sub.add_parser("fixtures")
    fsub = fixtures.add_subparsers(dest="fixture_command", required=True, parser_class=_Parser)
    gen = fsub.add_parser("generate")
    gen.add_argument(
        "--kind",
        choices=(
            "desk", "reference-resnet50", "reference-mobilenetv2", "monitor", "overconfident", "ingest-mixed", "scale",
        ),
        default="desk",
    )
    gen.add_argument("--seed", type=int)
    gen.add_argument("--records", type=_int_at_least(1))
    gen.add_argument("--classes", type=_int_at_least(2))
    gen.add_argument("--out", required=True)
    return parser


def _heatmap_args(p):
    p.add_argument("--cell-size", type=_int_at_least(1), default=24)
    p.add_argument("--annotate-support", action="store_true")
    p.add_argument("--colormap", choices=("trust", "gray"), default="trust")


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise UsageError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}")
    return n or (os.cpu_count() or 1)


class Outputs:
    """Collect output files, then publish them all at once."""

    def __init__(self, out_dir: str | None):
        self.out_dir = Path(out_dir) if out_dir else None
        self.files: dict[str, bytes] = {}
        self.stdout: bytes | None = None

    def add(self, name: str, data: bytes | str):
        self.files[name] = data.encode("utf-8") if isinstance(data, str) else data

    def commit(self):
        if self.out_dir is None:
            if self.stdout is not None:
                sys.stdout.buffer.write(self.stdout)
                sys.stdout.flush()
            return
        parent = self.out_dir.resolve().parent
        parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=f".{self.out_dir.name}.", dir=parent))
        os.chmod(tmp, 0o755)
        try:
            for name, data in self.files.items():
                path = tmp / name
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(data)
            if not self.out_dir.exists():
                os.replace(tmp, self.out_dir)
                return
            for name in self.files:
                dest = self.out_dir / name
                dest.parent.mkdir(parents=True, exist_ok=True)
                os.replace(tmp / name, dest)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)


def _load(args):
    try:
        labels = load_label_map(args.labels)
    except OSError as exc:
        raise InvalidInputError(f"cannot read label map {args.labels}: {exc.strerror or exc}") from None
    params = TrustParams(args.alpha, args.beta)
    config = IngestConfig(sum_tolerance=min(args.sum_tolerance, 0.1), renormalize=not args.strict)
    try:
        table, report = read_scored_table(args.predictions, labels, config, params)
    except OSError as exc:
        raise InvalidInputError(f"cannot read predictions {args.predictions}: {exc.strerror or exc}") from None
    for r in report.rejection_reasons[:20]:
        log.warning("%s:%d rejected (%s): %s", args.predictions, r.line, r.reason, r.message)
    if report.rejected > 20:
        log.warning("... %d more rejected lines", report.rejected - 20)
    if args.strict and report.rejected:
        raise InvalidInputError(f"strict mode: {report.rejected} line(s) rejected")
    if len(table) == 0:
        raise InvalidInputError("no valid records in the prediction file")
    log.info(
        "accepted %d records (%d rejected, %d renormalised)", report.accepted, report.rejected, report.renormalized
    )
    return labels, params, table, report


def _ingest_meta(report: IngestReport) -> dict:
    return {
        "input_sha256": report.sha256,
        "ingest": {
            "accepted": report.accepted,
            "rejected": report.rejected,
            "renormalized": report.renormalized,
            "rejection_reasons": report.reason_counts(),
        },
    }


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_").lower() or "class"


def _csv(rows) -> bytes:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().encode("utf-8")


def cmd_score(args, out: Outputs):
    labels, params, table, _ = _load(args)
    rows = [("id", "actor_answer", "oracle_answer", "confidence", "trust", "correct")]
    for rid, y, z, c, t in zip(table.ids, table.actor.tolist(), table.oracle.tolist(),
                               table.confidence.tolist(), table.trust.tolist()):
        rows.append((rid, labels.labels[y], labels.labels[z], repr(c), repr(t), int(y == z)))
    data = _csv(rows)
    out.add("scores.csv", data)
    out.stdout = data


def _heatmap_style(args) -> HeatmapStyle:
    return HeatmapStyle(colormap=args.colormap, cell_size=args.cell_size, annotate_support=args.annotate_support)


def cmd_matrix(args, out: Outputs):
    labels, params, table, _ = _load(args)
    matrix = trust_matrix(table, labels, params)
    files = matrix_tables(matrix)
    for name, data in files.items():
        out.add(name, data)
    out.add("matrix.svg", render_trust_matrix(matrix, _heatmap_style(args)))
    out.stdout = files["matrix.csv"]


def cmd_spectrum(args, out: Outputs):
    labels, params, table, _ = _load(args)
    spectrum = trust_spectrum(table, labels)
    score = net_trust_score(spectrum, args.weighting)
    data = spectrum_table(spectrum)
    out.add("spectrum.csv", data)
    summary = _csv([("metric", "value"), ("net_trust_score", repr(score)), ("weighting", args.weighting)])
    out.add("net_trust_score.csv", summary)
    out.stdout = data + b"\n" + summary


def _density_config(args, estimator: str) -> DensityConfig:
    return DensityConfig(estimator, bins=args.bins, bandwidth=args.bandwidth, grid_size=args.grid_size)


def _plot_pair(table, z: int, labels: LabelSpace, args):
    subset = table.subset(table.oracle == z)
    pair = conditional_trust_densities(subset, _density_config(args, args.estimator))
    title = f"Conditional trust densities, oracle answer '{labels.labels[z]}' (n={len(subset)})"
    return pair, render_density_plot(pair, title)


def cmd_densities(args, out: Outputs):
    labels, params, table, _ = _load(args)
    try:
        z = labels.resolve(args.oracle_class)
    except InvalidInputError as exc:
        raise UsageError(f"--class: {exc}") from None
    subset = table.subset(table.oracle == z)
    if len(subset) == 0:
        raise InvalidInputError(f"no records with oracle answer {labels.labels[z]!r}")
    body = {
        "histogram": density_pair_json(conditional_trust_densities(subset, _density_config(args, "histogram")), labels),
        "kde": density_pair_json(conditional_trust_densities(subset, _density_config(args, "kde")), labels),
        "params": {"alpha": params.alpha, "beta": params.beta},
    }
    data = (json.dumps(body, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")
    out.add("densities.json", data)
    _, svg = _plot_pair(table, z, labels, args)
    out.add(f"density_{z:04d}_{_slug(labels.labels[z])}.svg", svg)
    out.stdout = data


def cmd_report(args, out: Outputs):
    labels, params, table, ingest_report = _load(args)
    doc = build_report(table, labels, params, args.weighting, args.bins, _ingest_meta(ingest_report))
    formats = FORMATS if args.format == "all" else (args.format,)
    for fmt in formats:
        for name, data in emit_report(doc, fmt).items():
            out.add(name, data)
    out.add("matrix.svg", render_trust_matrix(doc.matrix, _heatmap_style(args)))
    if not args.no_density_plots:
        classes = sorted(doc.densities)
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            plots = pool.map(lambda z: _plot_pair(table, z, labels, args)[1], classes)
            for z, svg in zip(classes, plots):
                out.add(f"densities/density_{z:04d}_{_slug(labels.labels[z])}.svg", svg)
    out.stdout = out.files.get("report.json") or out.files["summary.csv"]


def cmd_fixtures(args, out: Outputs):
    from . import fixtures as fx  # noqa: PLC0415

    seed = args.seed
    if args.kind == "scale":
        fx.write_scale_dataset(args.out, args.records or 1_000_000, args.classes or 1000, seed or 0)
        return
    if args.kind == "ingest-mixed":
        labels, text, manifest = fx.ingest_mixed_fixture(11 if seed is None else seed)
        out.add("labels.txt", "\n".join(labels.labels) + "\n")
        out.add("predictions.jsonl", text)
        out.add("manifest.json", json.dumps(manifest, indent=2) + "\n")
        return
    if args.kind == "desk":
        labels, records = fx.desk_dataset(7 if seed is None else seed, args.records or 400)
    elif args.kind == "monitor":
        labels, records = fx.monitor_like_dataset(3 if seed is None else seed)
    elif args.kind == "overconfident":
        labels, records = fx.overconfident_dataset(5 if seed is None else seed)
    else:
        net, correct, incorrect = fx.REFERENCE_SCORES[args.kind.split("-", 1)[1]]
        labels, records = fx.engineered_dataset(
            fx.accuracy_from_decomposition(net, correct, incorrect), correct, incorrect,
            args.records or 10_000, args.classes or 10, 0 if seed is None else seed,
        )
    from .ingest import format_record  # noqa: PLC0415

    out.add("labels.txt", "\n".join(labels.labels) + "\n")
    out.add("predictions.jsonl", "".join(format_record(r, labels) + "\n" for r in records))


HANDLERS = {
    "score": cmd_score,
    "matrix": cmd_matrix,
    "spectrum": cmd_spectrum,
    "densities": cmd_densities,
    "report": cmd_report,
    "fixtures": cmd_fixtures,
}


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip() + "\ntrustlens: error: a command is required")
        if args.command != "fixtures":
            worker_count()
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="trustlens: %(message)s", stream=sys.stderr
    )
    out = Outputs(getattr(args, "out", None))
    try:
        HANDLERS[args.command](args, out)
        out.commit()
    except UsageError as exc:
        print(f"trustlens: error: {exc}", file=sys.stderr)
        return 2
    except InvalidInputError as exc:
        print(f"trustlens: invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"trustlens: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
