"""Seeded synthetic datasets used by the test suite and the experiment scripts."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import LabelSpace, PredictionRecord
from .ingest import format_record

DESK_LABELS = (
    "monitor",
    "street sign",
    "switch",
    "laptop",
    "water bottle",
    "table lamp",
    "cellphone",
    "rocking chair",
    "acoustic guitar",
    "desk",
)


def _spread_vector(actor: int, confidence: float, k: int, rng: np.random.Generator | None = None) -> list[float]:
    """Put ``confidence`` on ``actor`` and share the rest so ``actor`` stays the strict argmax."""
    rest = 1.0 - confidence
    if rng is None:
        others = np.full(k - 1, rest / (k - 1))
    else:
        others = rest * rng.dirichlet(np.ones(k - 1))
        # keep the actor strictly on top
        cap = confidence * 0.999
        while others.max() >= cap and rest > 0:
            others = 0.5 * others + 0.5 * rest / (k - 1)
    vec = np.insert(others, actor, confidence)
    return vec.tolist()


def _exact_mean_sample(rng, n: int, mean: float, lo: float, hi: float, concentration: float = 8.0) -> np.ndarray:
    """Values in [lo, hi] whose arithmetic mean is ``mean`` to rounding error."""
    if n == 0:
        return np.zeros(0)
    p = (mean - lo) / (hi - lo)
    x = lo + (hi - lo) * rng.beta(p * concentration, (1 - p) * concentration, size=n)
    for _ in range(100):
        x = np.clip(x + (mean - math.fsum(x.tolist()) / n), lo, hi)
        if abs(math.fsum(x.tolist()) / n - mean) < 1e-15:
            break
    return x


def engineered_dataset(
    accuracy: float,
    correct_trust: float,
    incorrect_trust: float,
    n_records: int = 10_000,
    n_classes: int = 10,
    seed: int = 0,
) -> tuple[LabelSpace, list[PredictionRecord]]:
    """Records with a chosen accuracy and mean correct/incorrect trust at alpha = beta = 1."""
    rng = np.random.default_rng(seed)
    labels = LabelSpace.of_size(n_classes)
    n_correct = int(round(accuracy * n_records))
    floor = 2.0 / n_classes
    correct_conf = _exact_mean_sample(rng, n_correct, correct_trust, floor, 1.0)
    # incorrect trust is 1 - confidence
    incorrect_conf = 1.0 - _exact_mean_sample(rng, n_records - n_correct, incorrect_trust, 0.0, 1.0 - floor)
    oracle = rng.integers(n_classes, size=n_records)
    records = []
    for i in range(n_records):
        z = int(oracle[i])
        if i < n_correct:
            y, c = z, float(correct_conf[i])
        else:
            y = int((z + 1 + rng.integers(n_classes - 1)) % n_classes)
            c = float(incorrect_conf[i - n_correct])
        records.append(PredictionRecord(f"r{i:06d}", tuple(_spread_vector(y, c, n_classes)), z, y))
    order = rng.permutation(n_records)
    return labels, [records[i] for i in order]


REFERENCE_SCORES = {
    # model: (NetTrustScore, correct-answer trust, incorrect-answer trust)
    "resnet50": (0.776, 0.887, 0.435),
    "mobilenetv2": (0.739, 0.845, 0.507),
}


def accuracy_from_decomposition(net: float, correct: float, incorrect: float) -> float:
    """Accuracy implied by ``net = acc * correct + (1 - acc) * incorrect``."""
    return (net - incorrect) / (correct - incorrect)


def desk_dataset(seed: int = 7, n_records: int = 400) -> tuple[LabelSpace, list[PredictionRecord]]:
    """Small 10-class dump with uneven per-class accuracy and 6-decimal exporter rounding."""
    rng = np.random.default_rng(seed)
    labels = LabelSpace(DESK_LABELS)
    k = labels.count
    skill = np.linspace(0.45, 0.95, k)
    records = []
    for i in range(n_records):
        z = int(rng.integers(k))
        if rng.random() < skill[z]:
            y = z
            c = float(rng.beta(2 + 6 * skill[z], 2.5))
        else:
            y = int((z + 1 + rng.choice(k - 1, p=_confusion_weights(k))) % k)
            c = float(rng.beta(3, 2.5))
        c = max(c, 0.15)
        vec = _spread_vector(y, c, k, rng)
        vec = [round(v, 6) for v in vec]
        # rounding may create a tie above the actor; nudge so the argmax is unambiguous
        if max(vec) > vec[y] or vec.index(max(vec)) != y:
            vec[y] = round(max(vec) + 1e-6, 6)
        records.append(PredictionRecord(f"img-{i:04d}", tuple(vec), z))
    return labels, records


def _confusion_weights(k: int) -> np.ndarray:
    w = 1.0 / np.arange(1, k) ** 1.5
    return w / w.sum()


def monitor_like_dataset(seed: int = 3) -> tuple[LabelSpace, list[PredictionRecord]]:
    """A class answered with middling confidence when right and a two-cluster trust profile when wrong.

    Half of the wrong answers are near-certain (trust around 0.05), half are
    hesitant (trust around 0.5).  Other classes carry a few filler records.
    """
    rng = np.random.default_rng(seed)
    labels = LabelSpace(("monitor", "screen", "desktop computer", "television", "laptop", "notebook"))
    k = labels.count
    records = []

    def add(y, z, c):
        records.append(PredictionRecord(f"q{len(records):04d}", tuple(_spread_vector(y, c, k, rng)), z))

    for c in np.clip(rng.normal(0.55, 0.12, size=60), 0.3, 0.95):
        add(0, 0, float(c))
    low = np.clip(rng.normal(0.05, 0.015, size=20), 0.005, 0.12)
    mid = np.clip(rng.normal(0.5, 0.04, size=20), 0.38, 0.62)
    for t in np.concatenate([low, mid]):
        add(int(rng.integers(1, k)), 0, float(1.0 - t))
    for _ in range(40):
        z = int(rng.integers(1, k))
        add(z, z, float(rng.uniform(0.5, 0.99)))
    return labels, records


def overconfident_dataset(seed: int = 5, n_records: int = 300) -> tuple[LabelSpace, list[PredictionRecord]]:
    """Every misclassification carries confidence >= 0.95."""
    rng = np.random.default_rng(seed)
    labels = LabelSpace(("cat", "dog", "fox", "wolf", "lynx"))
    k = labels.count
    records = []
    for i in range(n_records):
        z = int(rng.integers(k))
        if rng.random() < 0.7:
            y, c = z, float(rng.uniform(0.3, 1.0))
        else:
            y, c = int((z + 1 + rng.integers(k - 1)) % k), float(rng.uniform(0.95, 1.0))
        records.append(PredictionRecord(f"o{i:04d}", tuple(_spread_vector(y, c, k, rng)), z))
    return labels, records


INGEST_LABELS = ("cat", "dog", "bird", "fish")
# record position -> (reason code, raw line)
_BAD_LINES = {
    11: ("wrong-length", '{"id": "r011", "confidences": [0.5, 0.3, 0.2], "true_label": "cat"}'),
    23: ("non-finite", '{"id": "r023", "confidences": [NaN, 0.5, 0.3, 0.2], "true_label": "dog"}'),
    37: ("negative-confidence", '{"id": "r037", "confidences": [1.2, -0.2, 0.0, 0.0], "true_label": 0}'),
    48: ("sum-out-of-tolerance", '{"id": "r048", "confidences": [0.7, 0.3, 0.2, 0.1], "true_label": "bird"}'),
    59: ("unknown-label", '{"id": "r059", "confidences": [0.1, 0.2, 0.3, 0.4], "true_label": "horse"}'),
    71: (
        "inconsistent-prediction",
        '{"id": "r071", "confidences": [0.1, 0.6, 0.2, 0.1], "true_label": "dog", "predicted_label": "cat"}',
    ),
    88: ("missing-field", '{"id": "r088", "true_label": "fish"}'),
}


def ingest_mixed_fixture(seed: int = 11) -> tuple[LabelSpace, str, dict]:
    """100 record lines (7 deliberately bad) plus comments and blank lines, and a manifest."""
    rng = np.random.default_rng(seed)
    labels = LabelSpace(INGEST_LABELS)
    k = labels.count
    lines = ["# mixed ingest fixture: 100 records, 7 invalid"]
    rejections = []
    renormalized = 0
    for i in range(100):
        if i % 25 == 0:
            lines.append("")
        if i in _BAD_LINES:
            reason, raw = _BAD_LINES[i]
            lines.append(raw)
            rejections.append({"line": len(lines), "reason": reason})
            continue
        z = int(rng.integers(k))
        y = z if rng.random() < 0.75 else int((z + 1 + rng.integers(k - 1)) % k)
        vec = _spread_vector(y, float(rng.uniform(0.4, 0.95)), k, rng)
        rec = {"id": f"r{i:03d}", "confidences": vec, "true_label": labels.labels[z] if i % 3 else z}
        if i % 10 == 4:
            # float32-style drift inside the default tolerance
            rec["confidences"] = [v * (1 + 5e-5) for v in vec]
            renormalized += 1
        if i % 10 == 6:
            rec["predicted_label"] = labels.labels[y]
        if i % 20 == 8:
            # last-ulp negative noise on a zero-ish entry gets clamped
            j = (y + 1) % k
            rec["confidences"][y] += rec["confidences"][j]
            rec["confidences"][j] = -1e-12
        lines.append(json.dumps(rec))
    manifest = {
        "records": 100,
        "accepted": 100 - len(rejections),
        "rejected": len(rejections),
        "renormalized": renormalized,
        "rejections": rejections,
    }
    return labels, "\n".join(lines) + "\n", manifest


def write_dataset(directory: str | Path, labels: LabelSpace, records) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    label_path = directory / "labels.txt"
    label_path.write_text("\n".join(labels.labels) + "\n", encoding="utf-8")
    pred_path = directory / "predictions.jsonl"
    with open(pred_path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(format_record(r, labels) + "\n")
    return label_path, pred_path


def scale_labels(n_classes: int = 1000) -> LabelSpace:
    return LabelSpace(tuple(f"c{i:04d}" for i in range(n_classes)))


def write_scale_dataset(
    directory: str | Path, n_records: int = 1_000_000, n_classes: int = 1000, seed: int = 0, accuracy: float = 0.75
) -> tuple[Path, Path]:
    """Large sparse-vector dump: two non-zero entries per record, zeros written as ``0``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    label_path = directory / "labels.txt"
    label_path.write_text("\n".join(scale_labels(n_classes).labels) + "\n", encoding="utf-8")
    rng = np.random.default_rng(seed)
    oracle = rng.integers(n_classes, size=n_records)
    wrong = rng.random(n_records) >= accuracy
    actor = np.where(wrong, (oracle + 1 + rng.integers(n_classes - 1, size=n_records)) % n_classes, oracle)
    runner = np.where(wrong, oracle, (actor + 1 + rng.integers(n_classes - 1, size=n_records)) % n_classes)
    top = np.round(rng.uniform(0.51, 0.99, size=n_records), 4)
    pred_path = directory / "predictions.jsonl"
    zeros = "0," * n_classes
    with open(pred_path, "w", encoding="ascii", buffering=1 << 22) as fh:
        for i, (z, y, r, c) in enumerate(zip(oracle.tolist(), actor.tolist(), runner.tolist(), top.tolist())):
            (a, va), (b, vb) = sorted(((y, f"{c:.4f}"), (r, f"{1 - c:.4f}")))
            vec = f"{zeros[: 2 * a]}{va},{zeros[: 2 * (b - a - 1)]}{vb},{zeros[: 2 * (n_classes - b - 1)]}"
            fh.write(f'{{"id":"s{i:07d}","confidences":[{vec[:-1]}],"true_label":{z}}}\n')
    return label_path, pred_path
