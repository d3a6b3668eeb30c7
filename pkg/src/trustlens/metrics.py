"""Aggregate trust quantities over a set of scored answers.

Undefined statistics (aggregates over an empty subset) are ``nan`` inside
arrays and ``None`` for scalars; they never masquerade as zero trust.
All sums go through :func:`math.fsum`, which is exactly rounded, so the
results do not depend on record order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import InvalidInputError, LabelSpace, ScoredRecord, ScoredTable, TrustParams, as_table

WEIGHTINGS = ("empirical", "uniform")


def grouped_fsum(keys: np.ndarray, values: np.ndarray, n_groups: int) -> tuple[np.ndarray, np.ndarray]:
    """Exactly-rounded per-group sums and counts for integer ``keys`` in ``[0, n_groups)``."""
    keys = np.asarray(keys, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    sums = np.zeros(n_groups, dtype=np.float64)
    counts = np.bincount(keys, minlength=n_groups).astype(np.int64) if keys.size else np.zeros(n_groups, np.int64)
    if keys.size == 0:
        return sums, counts
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    sorted_vals = values[order].tolist()
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    ends = np.r_[starts[1:], len(sorted_vals)]
    for key, lo, hi in zip(sorted_keys[starts].tolist(), starts.tolist(), ends.tolist()):
        sums[key] = math.fsum(sorted_vals[lo:hi])
    return sums, counts


def _means(sums: np.ndarray, counts: np.ndarray) -> np.ndarray:
    out = np.full(sums.shape, np.nan)
    np.divide(sums, counts, out=out, where=counts > 0)
    return out


@dataclass(frozen=True, eq=False)
class TrustMatrix:
    """Expected trust per (actor answer, oracle answer) cell.

    ``values[y, z]`` is the mean trust of records answered ``y`` whose true
    class is ``z``; ``nan`` where ``support[y, z] == 0``.
    """

    values: np.ndarray
    support: np.ndarray
    label_space: LabelSpace
    params: TrustParams

    @property
    def defined(self) -> np.ndarray:
        return self.support > 0

    def cell(self, actor: int, oracle: int) -> float | None:
        return float(self.values[actor, oracle]) if self.support[actor, oracle] else None


@dataclass(frozen=True, eq=False)
class TrustSpectrum:
    """Expected trust per oracle class, with the class weights used to integrate it."""

    expected: np.ndarray
    weights: np.ndarray
    support: np.ndarray
    label_space: LabelSpace

    @property
    def defined(self) -> np.ndarray:
        return self.support > 0

    def uniform_weights(self) -> np.ndarray:
        w = self.defined.astype(np.float64)
        return w / w.sum() if w.sum() else w


@dataclass(frozen=True)
class TrustSummary:
    net_trust_score: float
    conditional_correct: float | None
    conditional_incorrect: float | None
    accuracy: float
    record_count: int


def _prepared(scored, labels: LabelSpace | None = None, allow_empty: bool = False) -> ScoredTable:
    table = as_table(scored)
    if not allow_empty and len(table) == 0:
        raise InvalidInputError("no scored records")
    if labels is not None:
        table.check_labels(labels)
    return table


def confusion_counts(scored: ScoredTable | Sequence[ScoredRecord], labels: LabelSpace) -> np.ndarray:
    """``counts[y, z]``: number of records answered ``y`` with true class ``z``."""
    table = _prepared(scored, labels, allow_empty=True)
    k = labels.count
    if len(table) == 0:
        return np.zeros((k, k), dtype=np.int64)
    return np.bincount(table.actor * k + table.oracle, minlength=k * k).reshape(k, k).astype(np.int64)


def trust_matrix(
    scored: ScoredTable | Sequence[ScoredRecord], labels: LabelSpace, params: TrustParams = TrustParams()
) -> TrustMatrix:
    table = _prepared(scored, labels)
    k = labels.count
    sums, counts = grouped_fsum(table.actor * k + table.oracle, table.trust, k * k)
    return TrustMatrix(_means(sums, counts).reshape(k, k), counts.reshape(k, k), labels, params)


def trust_spectrum(scored: ScoredTable | Sequence[ScoredRecord], labels: LabelSpace) -> TrustSpectrum:
    table = _prepared(scored, labels)
    sums, counts = grouped_fsum(table.oracle, table.trust, labels.count)
    return TrustSpectrum(_means(sums, counts), counts / len(table), counts, labels)


def spectrum_from_matrix(matrix: TrustMatrix) -> TrustSpectrum:
    """Column marginal of a trust matrix, each cell weighted by its support."""
    support = matrix.support.sum(axis=0)
    cols = [
        math.fsum((matrix.values[defined, z] * matrix.support[defined, z]).tolist())
        for z, defined in enumerate(matrix.defined.T)
    ]
    total = support.sum()
    return TrustSpectrum(_means(np.asarray(cols), support), support / total, support, matrix.label_space)


def net_trust_score(spectrum: TrustSpectrum, weighting: str = "empirical") -> float:
    """Integrate the spectrum against a class weighting.

    ``empirical`` weights each class by its share of records, which makes
    the score the grand mean of per-record trust; ``uniform`` gives every
    observed class equal weight.
    """
    if weighting not in WEIGHTINGS:
        raise InvalidInputError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")
    defined = spectrum.defined
    if not defined.any():
        raise InvalidInputError("trust spectrum has no defined classes")
    weights = spectrum.weights if weighting == "empirical" else spectrum.uniform_weights()
    return math.fsum((weights[defined] * spectrum.expected[defined]).tolist())


def conditional_summary(scored: ScoredTable | Sequence[ScoredRecord]) -> TrustSummary:
    table = _prepared(scored)
    correct = table.correct
    n = len(table)
    n_correct = int(correct.sum())
    trust = table.trust

    def mean(values):
        return math.fsum(values.tolist()) / len(values) if len(values) else None

    return TrustSummary(
        net_trust_score=mean(trust),
        conditional_correct=mean(trust[correct]),
        conditional_incorrect=mean(trust[~correct]),
        accuracy=n_correct / n,
        record_count=n,
    )
