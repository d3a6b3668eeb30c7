"""Parse and validate prediction dumps and label maps.

Prediction files are UTF-8, one JSON object per line::

    {"id": "img-0001", "confidences": [0.1, 0.7, 0.2], "true_label": "dog"}

``true_label`` (and the optional ``predicted_label``) may be a class name
or an integer index.  Blank lines and lines starting with ``#`` are
ignored.  A line that is not a JSON object aborts the whole file; any
other problem rejects just that line and is tallied in the
:class:`IngestReport`.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

import numpy as np
import simdjson

from .core import CLAMP_SLACK, InvalidInputError, LabelSpace, PredictionRecord, ScoredTable, TrustParams

# vectors this close to unit sum are accepted untouched, which keeps
# renormalised output stable under a second parse
UNIT_SUM_SLACK = 1e-12

MISSING_FIELD = "missing-field"
BAD_FIELD = "bad-field"
WRONG_LENGTH = "wrong-length"
NON_FINITE = "non-finite"
NEGATIVE = "negative-confidence"
ABOVE_ONE = "confidence-above-one"
SUM_OUT_OF_TOLERANCE = "sum-out-of-tolerance"
UNKNOWN_LABEL = "unknown-label"
INCONSISTENT_PREDICTION = "inconsistent-prediction"

ON_ERROR = ("skip-and-report", "abort")


class ParseError(InvalidInputError):
    """A file-level problem (bad framing, bad label map); carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None, reason: str | None = None):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class IngestConfig:
    sum_tolerance: float = 1e-4
    renormalize: bool = True
    on_error: str = "skip-and-report"

    def __post_init__(self):
        if not (0 < self.sum_tolerance <= 0.1):
            raise InvalidInputError(f"sum_tolerance must be in (0, 0.1], got {self.sum_tolerance!r}")
        if self.on_error not in ON_ERROR:
            raise InvalidInputError(f"on_error must be one of {ON_ERROR}, got {self.on_error!r}")


@dataclass(frozen=True)
class Rejection:
    line: int
    reason: str
    message: str


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    renormalized: int = 0
    rejection_reasons: list[Rejection] = field(default_factory=list)
    sha256: str = ""

    @property
    def total(self) -> int:
        return self.accepted + self.rejected

    def reason_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.rejection_reasons:
            counts[r.reason] = counts.get(r.reason, 0) + 1
        return counts

    def merge(self, other: "IngestReport") -> "IngestReport":
        """Combine reports from consecutive chunks of one file (digest is not mergeable)."""
        return IngestReport(
            self.accepted + other.accepted,
            self.rejected + other.rejected,
            self.renormalized + other.renormalized,
            sorted(self.rejection_reasons + other.rejection_reasons, key=lambda r: r.line),
        )


def _as_binary(source) -> BinaryIO:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return io.BytesIO(bytes(source))
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb")
    return source


def load_label_map(source) -> LabelSpace:
    """One label per line; the line number (from 0) is the class index."""
    stream = _as_binary(source)
    try:
        data = stream.read()
    finally:
        if stream is not source:
            stream.close()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise ParseError("label map is not valid UTF-8", line) from None
    if text.startswith("﻿"):
        text = text[1:]
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("label map is empty", 1)
    seen: dict[str, int] = {}
    names = []
    for lineno, raw in enumerate(lines, start=1):
        name = raw.rstrip("\r").strip()
        if not name:
            raise ParseError("empty label", lineno)
        if name in seen:
            raise ParseError(f"duplicate label {name!r} (first seen on line {seen[name]})", lineno, "duplicate-label")
        seen[name] = lineno
        names.append(name)
    if len(names) < 2:
        raise ParseError("label map needs at least 2 labels", len(names))
    return LabelSpace(tuple(names))


class _Block:
    """Rows awaiting vectorised validation."""

    def __init__(self, size: int, width: int):
        self.matrix = np.empty((size, width), dtype=np.float64)
        self.lines: list[int] = []
        self.ids: list[str] = []
        self.oracle: list[int] = []
        self.predicted: list[int] = []  # -1 when absent

    def __len__(self):
        return len(self.lines)


_parser = simdjson.Parser()


_PROXIES = (simdjson.Object, simdjson.Array)
_MISSING = object()


def _plain(value):
    if isinstance(value, simdjson.Object):
        return value.as_dict()
    if isinstance(value, simdjson.Array):
        return value.as_list()
    return value


def _loads(raw: bytes, lineno: int) -> dict:
    """Decode one line into a dict of the fields we use.

    ``confidences`` comes back as an ndarray when it is a flat numeric
    array, which is the fast path for large dumps.
    """
    try:
        doc = _parser.parse(raw)
    except (ValueError, RuntimeError):
        doc = None
    if type(doc) is simdjson.Object:
        get = doc.get
        obj = {}
        for key in ("id", "true_label", "predicted_label"):
            value = get(key, _MISSING)
            if value is not _MISSING:
                obj[key] = _plain(value) if type(value) in _PROXIES else value
        conf = get("confidences", _MISSING)
        if type(conf) is simdjson.Array:
            # as_buffer flattens nested arrays, so only use it when the line holds a single array
            if raw.count(b"[") == 1:
                try:
                    obj["confidences"] = np.frombuffer(conf.as_buffer(of_type="d"), dtype=np.float64)
                except TypeError:
                    obj["confidences"] = conf.as_list()
            else:
                obj["confidences"] = conf.as_list()
        elif conf is not _MISSING:
            obj["confidences"] = _plain(conf)
        del conf, get, doc
        return obj
    del doc
    # stdlib json accepts NaN/Infinity tokens and out-of-range numbers, which exporters emit
    try:
        obj = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed record: {exc}", lineno, "malformed-framing") from None
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object", lineno, "malformed-framing")
    return obj


def _label_lookup(labels: LabelSpace) -> dict:
    """Map both class names and integer indices to the index."""
    lookup: dict = {i: i for i in range(labels.count)}
    lookup.update((name, i) for i, name in enumerate(labels.labels))
    return lookup


def _resolve_label(value, lookup: dict) -> int | None:
    if type(value) is bool or not isinstance(value, (str, int)):
        return None
    return lookup.get(value)


def _vector(value) -> np.ndarray | None:
    if type(value) is np.ndarray:
        return value
    if not isinstance(value, list):
        return None
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        return None
    return np.asarray(value, dtype=np.float64)


def _iter_blocks(source, labels: LabelSpace, config: IngestConfig, report: IngestReport, block_size: int):
    """Yield ``(block, keep)`` pairs of validated rows; rejected lines only touch ``report``."""
    if config.on_error == "abort":
        block_size = 1
    width = labels.count
    lookup = _label_lookup(labels)
    stream = _as_binary(source)
    digest = hashlib.sha256()
    block = _Block(block_size, width)
    pending: list[Rejection] = []

    def reject(lineno, reason, message):
        if config.on_error == "abort":
            raise ParseError(message, lineno, reason)
        pending.append(Rejection(lineno, reason, message))

    def flush():
        nonlocal block, pending
        n = len(block)
        keep = np.ones(n, dtype=bool)
        if n:
            keep = _validate_rows(block.matrix[:n], block, config, keep, reject)
            report.renormalized += block.renormalized
        pending.sort(key=lambda r: r.line)
        report.rejection_reasons.extend(pending)
        report.rejected += len(pending)
        report.accepted += int(keep.sum())
        pending = []
        done = block
        block = _Block(block_size, width)
        return done, keep

    try:
        for lineno, raw in enumerate(stream, start=1):
            digest.update(raw)
            line = raw.strip()
            if not line or line[0] == 35:  # '#'
                continue
            obj = _loads(line, lineno)
            if len(obj) < 3 or not ("id" in obj and "confidences" in obj and "true_label" in obj):
                missing = [k for k in ("id", "confidences", "true_label") if k not in obj]
                reject(lineno, MISSING_FIELD, f"missing field(s) {', '.join(missing)}")
                continue
            rid = obj["id"]
            if type(rid) is not str:
                if type(rid) is not int:
                    reject(lineno, BAD_FIELD, f"id must be a string, got {type(rid).__name__}")
                    continue
                rid = str(rid)
            oracle = _resolve_label(obj["true_label"], lookup)
            if oracle is None:
                reject(lineno, UNKNOWN_LABEL, f"unknown true_label {obj['true_label']!r}")
                continue
            predicted = obj.get("predicted_label")
            if predicted is None:
                predicted = -1
            else:
                predicted = _resolve_label(predicted, lookup)
                if predicted is None:
                    reject(lineno, UNKNOWN_LABEL, f"unknown predicted_label {obj['predicted_label']!r}")
                    continue
            vec = _vector(obj["confidences"])
            if vec is None:
                reject(lineno, BAD_FIELD, "confidences must be an array of numbers")
                continue
            if len(vec) != width:
                reject(lineno, WRONG_LENGTH, f"expected {width} confidences, got {len(vec)}")
                continue
            block.matrix[len(block.lines)] = vec
            block.lines.append(lineno)
            block.ids.append(rid)
            block.oracle.append(oracle)
            block.predicted.append(predicted)
            if len(block.lines) == block_size:
                yield flush()
        yield flush()
    finally:
        report.sha256 = digest.hexdigest()
        if stream is not source:
            stream.close()


def _validate_rows(rows: np.ndarray, block: _Block, config: IngestConfig, keep: np.ndarray, reject) -> np.ndarray:
    """Clamp, sum-check, renormalise and argmax-check rows in place."""
    # NaN and +-inf surface in the row minimum or in the value at the argmax
    with np.errstate(invalid="ignore"):
        low = rows.min(axis=1)
    actor = rows.argmax(axis=1)
    high = rows[np.arange(len(rows)), actor]
    finite = np.isfinite(low) & np.isfinite(high)
    dirty = finite & ((low < 0.0) | (high > 1.0))
    if dirty.any():
        rows[dirty] = np.clip(rows[dirty], 0.0, 1.0)
        actor[dirty] = rows[dirty].argmax(axis=1)
    sums = rows.sum(axis=1)
    drift = np.abs(sums - 1.0)
    bad = ~finite | (low < -CLAMP_SLACK) | (high > 1.0 + CLAMP_SLACK) | (drift > config.sum_tolerance)
    for i in np.flatnonzero(bad).tolist():
        lineno = block.lines[i]
        if not finite[i]:
            reject(lineno, NON_FINITE, "confidences contain NaN or infinite values")
        elif low[i] < -CLAMP_SLACK:
            reject(lineno, NEGATIVE, f"negative confidence {float(low[i])!r}")
        elif high[i] > 1.0 + CLAMP_SLACK:
            reject(lineno, ABOVE_ONE, f"confidence {float(high[i])!r} above 1")
        else:
            reject(lineno, SUM_OUT_OF_TOLERANCE, f"confidences sum to {float(sums[i])!r}")
    keep &= ~bad
    fix = keep & (drift > UNIT_SUM_SLACK) & config.renormalize
    if fix.any():
        rows[fix] /= sums[fix, None]
    predicted = np.asarray(block.predicted)
    clash = keep & (predicted >= 0) & (predicted != actor)
    for i in np.flatnonzero(clash).tolist():
        reject(block.lines[i], INCONSISTENT_PREDICTION, f"predicted_label {predicted[i]} but argmax is {actor[i]}")
    keep &= ~clash
    block.renormalized = int((fix & keep).sum())
    block.actor = actor
    return keep


def iter_records(source, labels: LabelSpace, config: IngestConfig = IngestConfig(), report: IngestReport | None = None,
                 block_size: int = 1024) -> Iterator[PredictionRecord]:
    """Stream accepted records in file order, filling ``report`` as lines are consumed."""
    report = IngestReport() if report is None else report
    for block, keep in _iter_blocks(source, labels, config, report, block_size):
        for i in np.flatnonzero(keep):
            yield PredictionRecord(
                block.ids[i], tuple(block.matrix[i].tolist()), block.oracle[i], int(block.actor[i])
            )


def parse_predictions(
    source, labels: LabelSpace, config: IngestConfig = IngestConfig()
) -> tuple[list[PredictionRecord], IngestReport]:
    report = IngestReport()
    records = list(iter_records(source, labels, config, report))
    return records, report


def read_scored_table(
    source,
    labels: LabelSpace,
    config: IngestConfig = IngestConfig(),
    params: TrustParams = TrustParams(),
    block_size: int = 4096,
    keep_ids: bool = True,
) -> tuple[ScoredTable, IngestReport]:
    """Ingest and score in one pass, keeping only per-record columns."""
    report = IngestReport()
    ids: list[str] = []
    actor, oracle, confidence = [], [], []
    for block, keep in _iter_blocks(source, labels, config, report, block_size):
        if not len(block):
            continue
        n = len(block)
        a = block.actor[keep]
        actor.append(a)
        oracle.append(np.asarray(block.oracle, dtype=np.int64)[keep])
        confidence.append(block.matrix[:n][np.flatnonzero(keep), a])
        if keep_ids:
            ids.extend(block.ids[i] for i in np.flatnonzero(keep))
    cat = lambda parts, dtype: np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)  # noqa: E731
    table = ScoredTable.from_columns(
        cat(actor, np.int64), cat(oracle, np.int64), cat(confidence, np.float64), params, ids if keep_ids else None
    )
    return table, report


def format_record(record: PredictionRecord, labels: LabelSpace | None = None) -> str:
    """One line of the prediction format; floats use the shortest round-trip repr."""
    true_label = labels.name(record.oracle_answer) if labels is not None else record.oracle_answer
    return json.dumps(
        {"id": record.id, "confidences": list(record.confidences), "true_label": true_label},
        ensure_ascii=False,
        allow_nan=False,
    )


def write_predictions(records, stream, labels: LabelSpace | None = None) -> None:
    for record in records:
        stream.write(format_record(record, labels).encode("utf-8") + b"\n")

