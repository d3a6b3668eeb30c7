"""Machine-readable reports: one JSON document or a bundle of CSV tables.

Floats are written with ``repr``, the shortest string that parses back to
the same double, so emit-then-load is lossless.  Undefined statistics
are ``null`` in JSON and an empty field in CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import InvalidInputError, LabelSpace, ScoredTable, TrustParams
from .density import ConditionalDensityPair, Density, DensityConfig, class_conditional_densities
from .metrics import (
    TrustMatrix,
    TrustSpectrum,
    TrustSummary,
    conditional_summary,
    net_trust_score,
    trust_matrix,
    trust_spectrum,
)

SCHEMA_VERSION = "1.0"
FORMATS = ("json", "csv-bundle")
CSV_FILES = ("matrix.csv", "support.csv", "spectrum.csv", "summary.csv")
SUMMARY_FIELDS = ("net_trust_score", "conditional_correct", "conditional_incorrect", "accuracy", "record_count")


@dataclass(eq=False)
class ReportDocument:
    summary: TrustSummary
    spectrum: TrustSpectrum
    matrix: TrustMatrix
    weighting: str = "empirical"
    densities: dict[int, ConditionalDensityPair] | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def label_space(self) -> LabelSpace:
        return self.matrix.label_space

    @property
    def spectrum_score(self) -> float:
        return net_trust_score(self.spectrum, self.weighting)


def build_report(
    table: ScoredTable,
    labels: LabelSpace,
    params: TrustParams = TrustParams(),
    weighting: str = "empirical",
    density_bins: int | None = 25,
    metadata: dict | None = None,
) -> ReportDocument:
    """Compute every aggregate for one scored dataset.

    ``density_bins=None`` leaves out the per-class conditional histograms.
    """
    densities = None
    if density_bins is not None:
        densities = class_conditional_densities(table, labels, DensityConfig("histogram", bins=density_bins))
    doc = ReportDocument(
        summary=conditional_summary(table),
        spectrum=trust_spectrum(table, labels),
        matrix=trust_matrix(table, labels, params),
        weighting=weighting,
        densities=densities,
    )
    doc.metadata = {
        "tool": "trustlens",
        "tool_version": __version__,
        "params": {"alpha": params.alpha, "beta": params.beta},
        "weighting": weighting,
        "label_count": labels.count,
        "record_count": len(table),
        **(metadata or {}),
    }
    if density_bins is not None:
        doc.metadata["density"] = {"estimator": "histogram", "bins": density_bins}
    return doc


def _num(x):
    """JSON/CSV-ready number: ``None`` for undefined."""
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _grid(a: np.ndarray) -> list[list]:
    if a.dtype.kind in "iu":
        return a.tolist()
    mask = np.isnan(a)
    rows = a.tolist()
    if mask.any():
        for row, m in zip(rows, mask.tolist()):
            for j, undefined in enumerate(m):
                if undefined:
                    row[j] = None
    return rows


def _density_json(d: Density) -> dict:
    return {"total_mass": d.total_mass, "support": d.support, "counts": d.counts.tolist(), "mass": d.values.tolist()}


def to_json_dict(doc: ReportDocument) -> dict:
    labels = doc.label_space
    s = doc.summary
    spec = doc.spectrum
    out = {
        "schema_version": SCHEMA_VERSION,
        "metadata": doc.metadata,
        "labels": list(labels.labels),
        "summary": {
            "net_trust_score": s.net_trust_score,
            "conditional_correct": s.conditional_correct,
            "conditional_incorrect": s.conditional_incorrect,
            "accuracy": s.accuracy,
            "record_count": s.record_count,
        },
        "spectrum": {
            "weighting": doc.weighting,
            "net_trust_score": doc.spectrum_score,
            "classes": [
                {
                    "index": z,
                    "label": labels.labels[z],
                    "expected_trust": _num(spec.expected[z]),
                    "weight": float(spec.weights[z]),
                    "support": int(spec.support[z]),
                }
                for z in range(labels.count)
            ],
        },
        "matrix": {
            "orientation": "rows are actor answers y, columns are oracle answers z",
            "params": {"alpha": doc.matrix.params.alpha, "beta": doc.matrix.params.beta},
            "values": _grid(doc.matrix.values),
            "support": _grid(doc.matrix.support),
        },
    }
    if doc.densities is not None:
        edges = None
        classes = []
        for z, pair in sorted(doc.densities.items()):
            edges = pair.unconditional.edges.tolist()
            classes.append(
                {
                    "index": z,
                    "label": labels.labels[z],
                    "support": pair.unconditional.support,
                    "correct": _density_json(pair.correct),
                    "incorrect": _density_json(pair.incorrect),
                    "unconditional": _density_json(pair.unconditional),
                }
            )
        out["densities"] = {"estimator": "histogram", "edges": edges, "classes": classes}
    return out


def _csv_text(rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _cell(x) -> str:
    x = _num(x)
    return "" if x is None else repr(x)


def matrix_tables(matrix: TrustMatrix) -> dict[str, bytes]:
    """``matrix.csv`` and ``support.csv``: actor answers as rows, oracle answers as columns."""
    labels = list(matrix.label_space.labels)
    header = ["actor\\oracle", *labels]
    values, support = matrix.values, matrix.support
    return {
        "matrix.csv": _csv_text(
            [header]
            + [[labels[y], *("" if v != v else repr(v) for v in row)] for y, row in enumerate(values.tolist())]
        ),
        "support.csv": _csv_text([header] + [[labels[y], *support[y].tolist()] for y in range(len(labels))]),
    }


def spectrum_table(spectrum: TrustSpectrum) -> bytes:
    labels = spectrum.label_space.labels
    return _csv_text(
        [["index", "label", "expected_trust", "weight", "support"]]
        + [
            [z, labels[z], _cell(spectrum.expected[z]), repr(float(spectrum.weights[z])), int(spectrum.support[z])]
            for z in range(len(labels))
        ]
    )


def emit_report(doc: ReportDocument, fmt: str = "json") -> dict[str, bytes]:
    """Serialise ``doc``; returns file name -> contents."""
    if fmt == "json":
        text = json.dumps(to_json_dict(doc), ensure_ascii=False, allow_nan=False, separators=(",", ":"))
        return {"report.json": (text + "\n").encode("utf-8")}
    if fmt != "csv-bundle":
        raise InvalidInputError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    s = doc.summary
    return {
        **matrix_tables(doc.matrix),
        "spectrum.csv": spectrum_table(doc.spectrum),
        "summary.csv": _csv_text(
            [["metric", "value"]]
            + [[name, _cell(getattr(s, name)) if name != "record_count" else s.record_count] for name in SUMMARY_FIELDS]
            + [["spectrum_weighting", doc.weighting], ["spectrum_net_trust_score", _cell(doc.spectrum_score)]]
        ),
    }


def _array(rows, dtype=np.float64) -> np.ndarray:
    return np.array([[np.nan if v is None else v for v in row] for row in rows], dtype=dtype)


def _density_from_json(d: dict, edges: np.ndarray, kind: str = "histogram") -> Density:
    return Density(
        kind=kind,
        grid=(edges[:-1] + edges[1:]) / 2,
        values=np.asarray(d["mass"], dtype=np.float64),
        total_mass=d["total_mass"],
        support=d["support"],
        edges=edges,
        counts=np.asarray(d["counts"], dtype=np.int64),
    )


def load_report_json(data: bytes | str) -> ReportDocument:
    raw = json.loads(data)
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported report schema {raw.get('schema_version')!r}")
    labels = LabelSpace(tuple(raw["labels"]))
    m = raw["matrix"]
    params = TrustParams(**m["params"])
    matrix = TrustMatrix(_array(m["values"]), np.asarray(m["support"], dtype=np.int64), labels, params)
    classes = raw["spectrum"]["classes"]
    spectrum = TrustSpectrum(
        np.array([np.nan if c["expected_trust"] is None else c["expected_trust"] for c in classes]),
        np.array([c["weight"] for c in classes], dtype=np.float64),
        np.array([c["support"] for c in classes], dtype=np.int64),
        labels,
    )
    summary = TrustSummary(**{k: raw["summary"][k] for k in SUMMARY_FIELDS})
    densities = None
    if "densities" in raw:
        edges = np.asarray(raw["densities"]["edges"], dtype=np.float64)
        densities = {
            c["index"]: ConditionalDensityPair(
                _density_from_json(c["correct"], edges),
                _density_from_json(c["incorrect"], edges),
                _density_from_json(c["unconditional"], edges),
                c["index"],
            )
            for c in raw["densities"]["classes"]
        }
    return ReportDocument(summary, spectrum, matrix, raw["spectrum"]["weighting"], densities, raw["metadata"])


def _read_csv(data: bytes) -> list[list[str]]:
    return list(csv.reader(io.StringIO(data.decode("utf-8"))))


def _opt(text: str) -> float | None:
    return None if text == "" else float(text)


def load_csv_bundle(files: dict[str, bytes] | str | Path, params: TrustParams = TrustParams()) -> ReportDocument:
    """Rebuild a report (without densities) from its CSV tables."""
    if not isinstance(files, dict):
        root = Path(files)
        files = {name: (root / name).read_bytes() for name in CSV_FILES}
    matrix_rows = _read_csv(files["matrix.csv"])
    labels = LabelSpace(tuple(matrix_rows[0][1:]))
    values = np.array([[np.nan if v == "" else float(v) for v in row[1:]] for row in matrix_rows[1:]])
    support = np.array([[int(v) for v in row[1:]] for row in _read_csv(files["support.csv"])[1:]], dtype=np.int64)
    spec_rows = _read_csv(files["spectrum.csv"])[1:]
    spectrum = TrustSpectrum(
        np.array([np.nan if r[2] == "" else float(r[2]) for r in spec_rows]),
        np.array([float(r[3]) for r in spec_rows]),
        np.array([int(r[4]) for r in spec_rows], dtype=np.int64),
        labels,
    )
    summary_rows = dict(tuple(r) for r in _read_csv(files["summary.csv"])[1:])
    summary = TrustSummary(
        net_trust_score=float(summary_rows["net_trust_score"]),
        conditional_correct=_opt(summary_rows["conditional_correct"]),
        conditional_incorrect=_opt(summary_rows["conditional_incorrect"]),
        accuracy=float(summary_rows["accuracy"]),
        record_count=int(summary_rows["record_count"]),
    )
    return ReportDocument(
        summary, spectrum, TrustMatrix(values, support, labels, params), summary_rows["spectrum_weighting"]
    )


def density_pair_json(pair: ConditionalDensityPair, labels: LabelSpace) -> dict:
    """Standalone JSON for one class's conditional densities (either estimator)."""

    def one(d: Density) -> dict:
        out = {"total_mass": d.total_mass, "support": d.support}
        if d.kind == "histogram":
            out["counts"] = d.counts.tolist()
            out["mass"] = d.values.tolist()
        else:
            out["density"] = d.values.tolist()
        return out

    u = pair.unconditional
    body = {
        "estimator": u.kind,
        "class": {"index": pair.oracle_class, "label": labels.labels[pair.oracle_class]},
        "correct": one(pair.correct),
        "incorrect": one(pair.incorrect),
        "unconditional": one(u),
    }
    if u.kind == "histogram":
        body["edges"] = u.edges.tolist()
    else:
        body["grid"] = u.grid.tolist()
        body["bandwidth"] = u.bandwidth
    return body

