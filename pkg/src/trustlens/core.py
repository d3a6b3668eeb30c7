"""Domain types and the per-sample question-answer trust function.

A classifier (the *actor*) answers a question with the argmax of its
confidence vector; the ground truth (the *oracle*) supplies the true
class.  Trust in a single answer rewards confidence when the answer is
right and penalises it when the answer is wrong::

    trust = C ** alpha          if actor == oracle
    trust = (1 - C) ** beta     otherwise

where ``C`` is always the confidence the actor placed on its own answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: Confidences outside [0, 1] by at most this much are clamped instead of rejected.
CLAMP_SLACK = 1e-9


class InvalidInputError(ValueError):
    """Raised when data violates a documented precondition."""


@dataclass(frozen=True)
class LabelSpace:
    """Ordered class names; the list position is the class index."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise InvalidInputError(f"a label space needs at least 2 classes, got {len(labels)}")
        seen = set()
        for i, name in enumerate(labels):
            if not isinstance(name, str) or not name.strip():
                raise InvalidInputError(f"label {i} is empty")
            if name in seen:
                raise InvalidInputError(f"duplicate label {name!r} at index {i}")
            seen.add(name)
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(labels)})

    @classmethod
    def of_size(cls, count: int) -> "LabelSpace":
        return cls(tuple(f"class_{i}" for i in range(count)))

    @property
    def count(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def name(self, index: int) -> str:
        return self.labels[self.check_index(index)]

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InvalidInputError(f"unknown label {name!r}") from None

    def check_index(self, index: int) -> int:
        if isinstance(index, (bool, np.bool_)) or not 0 <= index < len(self.labels):
            raise InvalidInputError(f"label index {index!r} outside [0, {len(self.labels)})")
        return int(index)

    def resolve(self, ref: str | int) -> int:
        """Accept a class name or an integer index (as int or digit string)."""
        if isinstance(ref, str):
            if ref in self._index:
                return self._index[ref]
            if ref.strip().isdigit():
                return self.check_index(int(ref))
            raise InvalidInputError(f"unknown label {ref!r}")
        return self.check_index(ref)


@dataclass(frozen=True)
class TrustParams:
    """Reward (``alpha``) and penalty (``beta``) relaxation exponents."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise InvalidInputError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, float(value))


def predicted_answer(confidences: Sequence[float] | np.ndarray) -> int:
    """Index of the largest confidence; ties go to the lowest index."""
    arr = np.asarray(confidences, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("confidence vector must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("confidence vector contains NaN or infinite entries")
    # np.argmax returns the first occurrence of the maximum
    return int(np.argmax(arr))


def _clamp_confidence(confidence: float) -> float:
    if not math.isfinite(confidence):
        raise InvalidInputError(f"confidence must be finite, got {confidence!r}")
    if confidence < 0.0:
        if confidence < -CLAMP_SLACK:
            raise InvalidInputError(f"confidence {confidence!r} below 0")
        return 0.0
    if confidence > 1.0:
        if confidence > 1.0 + CLAMP_SLACK:
            raise InvalidInputError(f"confidence {confidence!r} above 1")
        return 1.0
    return confidence


def question_answer_trust(confidence: float, correct: bool, params: TrustParams = TrustParams()) -> float:
    """Trust in one answer given the actor's confidence in it.

    >>> question_answer_trust(0.8, True)
    0.8
    >>> round(question_answer_trust(0.8, False), 12)
    0.2
    """
    c = _clamp_confidence(float(confidence))
    if correct:
        return c**params.alpha
    return (1.0 - c) ** params.beta


@dataclass(frozen=True)
class PredictionRecord:
    """One question: the actor's confidence vector plus the oracle's answer."""

    id: str
    confidences: tuple[float, ...]
    oracle_answer: int
    actor_answer: int = field(default=-1)

    def __post_init__(self):
        conf = tuple(float(c) for c in self.confidences)
        object.__setattr__(self, "confidences", conf)
        derived = predicted_answer(conf)
        if self.actor_answer == -1:
            object.__setattr__(self, "actor_answer", derived)
        elif self.actor_answer != derived:
            raise InvalidInputError(
                f"record {self.id!r}: actor answer {self.actor_answer} is not the argmax ({derived})"
            )
        if not 0 <= self.oracle_answer < len(conf):
            raise InvalidInputError(f"record {self.id!r}: oracle answer {self.oracle_answer} out of range")

    @property
    def confidence(self) -> float:
        """Confidence the actor placed on its own answer."""
        return self.confidences[self.actor_answer]

    @property
    def correct(self) -> bool:
        return self.actor_answer == self.oracle_answer


@dataclass(frozen=True)
class ScoredRecord:
    record: PredictionRecord
    trust: float
    correct: bool

    @property
    def actor_answer(self) -> int:
        return self.record.actor_answer

    @property
    def oracle_answer(self) -> int:
        return self.record.oracle_answer


def score_record(record: PredictionRecord, params: TrustParams = TrustParams()) -> ScoredRecord:
    correct = record.correct
    return ScoredRecord(record, question_answer_trust(record.confidence, correct, params), correct)


def score_records(records: Iterable[PredictionRecord], params: TrustParams = TrustParams()) -> list[ScoredRecord]:
    return [score_record(r, params) for r in records]


def trust_scores(confidence: np.ndarray, correct: np.ndarray, params: TrustParams = TrustParams()) -> np.ndarray:
    """Vectorised question-answer trust over parallel arrays."""
    c = np.asarray(confidence, dtype=np.float64)
    correct = np.asarray(correct, dtype=bool)
    if c.shape != correct.shape:
        raise InvalidInputError("confidence and correctness arrays differ in shape")
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("confidence array contains non-finite values")
    if c.size and (c.min() < -CLAMP_SLACK or c.max() > 1.0 + CLAMP_SLACK):
        raise InvalidInputError("confidence array has values outside [0, 1]")
    c = np.clip(c, 0.0, 1.0)
    return np.where(correct, np.power(c, params.alpha), np.power(1.0 - c, params.beta))


@dataclass(frozen=True, eq=False)
class ScoredTable:
    """Column-oriented batch of scored records.

    Holds only what the aggregates need (answers, confidence at the actor
    answer, trust), so a million-record dump never materialises full
    confidence vectors.
    """

    actor: np.ndarray
    oracle: np.ndarray
    confidence: np.ndarray
    trust: np.ndarray
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        n = len(self.trust)
        for name in ("actor", "oracle", "confidence"):
            if len(getattr(self, name)) != n:
                raise InvalidInputError(f"column {name!r} has length {len(getattr(self, name))}, expected {n}")
        if self.ids is not None and len(self.ids) != n:
            raise InvalidInputError("ids column length mismatch")
        for arr in (self.actor, self.oracle, self.confidence, self.trust):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.trust)

    @property
    def correct(self) -> np.ndarray:
        return self.actor == self.oracle

    @classmethod
    def from_columns(cls, actor, oracle, confidence, params: TrustParams = TrustParams(), ids=None) -> "ScoredTable":
        actor = np.asarray(actor, dtype=np.int64).copy()
        oracle = np.asarray(oracle, dtype=np.int64).copy()
        confidence = np.clip(np.asarray(confidence, dtype=np.float64), 0.0, 1.0)
        trust = trust_scores(confidence, actor == oracle, params)
        return cls(actor, oracle, confidence, trust, None if ids is None else tuple(ids))

    @classmethod
    def from_scored(cls, scored: Sequence[ScoredRecord]) -> "ScoredTable":
        return cls(
            np.fromiter((s.actor_answer for s in scored), dtype=np.int64, count=len(scored)),
            np.fromiter((s.oracle_answer for s in scored), dtype=np.int64, count=len(scored)),
            np.fromiter((s.record.confidence for s in scored), dtype=np.float64, count=len(scored)),
            np.fromiter((s.trust for s in scored), dtype=np.float64, count=len(scored)),
            tuple(s.record.id for s in scored),
        )

    def subset(self, mask: np.ndarray) -> "ScoredTable":
        ids = None if self.ids is None else tuple(np.asarray(self.ids, dtype=object)[mask])
        return ScoredTable(self.actor[mask], self.oracle[mask], self.confidence[mask], self.trust[mask], ids)

    def check_labels(self, labels: LabelSpace) -> None:
        if len(self) == 0:
            return
        for name, col in (("actor", self.actor), ("oracle", self.oracle)):
            if col.min() < 0 or col.max() >= labels.count:
                raise InvalidInputError(f"{name} answer outside label range [0, {labels.count})")


def as_table(scored: ScoredTable | Sequence[ScoredRecord]) -> ScoredTable:
    if isinstance(scored, ScoredTable):
        return scored
    return ScoredTable.from_scored(list(scored))
