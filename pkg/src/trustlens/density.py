"""Trust densities: exact histograms and boundary-corrected Gaussian KDE.

Conditional densities are scaled by their empirical prior, so for one
oracle class the correct-answer and incorrect-answer curves add up to the
unconditional density of that class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import InvalidInputError, LabelSpace, ScoredRecord, ScoredTable, as_table

ESTIMATORS = ("histogram", "kde")
DEFAULT_BINS = 25
DEFAULT_GRID_SIZE = 512
MIN_GRID_SIZE = 16
MIN_BANDWIDTH = 0.01
# Gaussian tail mass beyond this many bandwidths is below double precision.
_KERNEL_REACH = 8.5
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DensityConfig:
    estimator: str = "histogram"
    bins: int = DEFAULT_BINS
    bandwidth: float | None = None
    grid_size: int = DEFAULT_GRID_SIZE

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise InvalidInputError(f"unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")
        if isinstance(self.bins, bool) or int(self.bins) != self.bins or self.bins < 2:
            raise InvalidInputError(f"bins must be an integer >= 2, got {self.bins!r}")
        if self.bandwidth is not None and not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise InvalidInputError(f"bandwidth must be > 0, got {self.bandwidth!r}")
        if int(self.grid_size) != self.grid_size or self.grid_size < MIN_GRID_SIZE:
            raise InvalidInputError(f"grid_size must be an integer >= {MIN_GRID_SIZE}, got {self.grid_size!r}")


@dataclass(frozen=True, eq=False)
class Density:
    """A trust distribution on [0, 1].

    For histograms ``grid`` holds bin centres, ``values`` the probability
    mass per bin and ``counts`` the raw tallies.  For KDE curves ``grid`` is
    the evaluation grid and ``values`` the density height.  ``total_mass`` is
    the prior the curve was scaled by (1 for an unconditional density).
    """

    kind: str
    grid: np.ndarray
    values: np.ndarray
    total_mass: float
    support: int
    edges: np.ndarray | None = None
    counts: np.ndarray | None = None
    bandwidth: float | None = None

    def integral(self) -> float:
        if self.kind == "histogram":
            return math.fsum(self.values.tolist())
        return float(np.trapezoid(self.values, self.grid))


@dataclass(frozen=True, eq=False)
class ConditionalDensityPair:
    correct: Density
    incorrect: Density
    unconditional: Density
    oracle_class: int | None = None


def _check_trusts(trusts) -> np.ndarray:
    t = np.asarray(trusts, dtype=np.float64).ravel()
    if t.size and not np.all(np.isfinite(t)):
        raise InvalidInputError("trust values must be finite")
    if t.size and (t.min() < 0.0 or t.max() > 1.0):
        raise InvalidInputError("trust values must lie in [0, 1]")
    return t


def histogram_edges(bins: int) -> np.ndarray:
    return np.arange(bins + 1, dtype=np.float64) / bins


def bin_indices(trusts: np.ndarray, bins: int) -> np.ndarray:
    """Bins are ``[lo, hi)`` except the last, which is closed so 1.0 is counted."""
    idx = np.searchsorted(histogram_edges(bins), trusts, side="right") - 1
    return np.minimum(idx, bins - 1)


def _histogram(counts: np.ndarray, denominator: int, support: int) -> Density:
    bins = len(counts)
    edges = histogram_edges(bins)
    values = counts / denominator if denominator else np.zeros(bins)
    return Density(
        kind="histogram",
        grid=(edges[:-1] + edges[1:]) / 2,
        values=values,
        total_mass=support / denominator if denominator else 0.0,
        support=support,
        edges=edges,
        counts=counts.astype(np.int64),
    )


def histogram_density(trusts, bins: int = DEFAULT_BINS, denominator: int | None = None) -> Density:
    """Equal-width histogram of ``trusts`` with masses ``counts / denominator``.

    ``denominator`` defaults to the sample size; pass the size of a larger
    population to get a prior-scaled (conditional) density.
    """
    t = _check_trusts(trusts)
    counts = np.bincount(bin_indices(t, bins), minlength=bins) if t.size else np.zeros(bins, np.int64)
    return _histogram(counts, t.size if denominator is None else denominator, t.size)


def silverman_bandwidth(trusts) -> float:
    t = _check_trusts(trusts)
    if t.size < 2:
        return MIN_BANDWIDTH
    sigma = float(np.std(t, ddof=1))
    return max(1.06 * sigma * t.size ** (-0.2), MIN_BANDWIDTH)


def kde_grid(grid_size: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, grid_size)


def _reflected_kernel_sum(points: np.ndarray, bandwidth: float, grid: np.ndarray) -> np.ndarray:
    """Sum over points of a Gaussian kernel reflected about both 0 and 1.

    Repeated reflection puts images at ``2k + x`` and ``2k - x``; all images
    whose kernel reaches [0, 1] are included, so no mass leaks out.
    """
    out = np.zeros_like(grid)
    if points.size == 0:
        return out
    reach = _KERNEL_REACH * bandwidth
    k_lo = math.ceil((-reach - 1.0) / 2.0)
    k_hi = math.floor((2.0 + reach) / 2.0)
    centres = np.concatenate([np.concatenate([2 * k + points, 2 * k - points]) for k in range(k_lo, k_hi + 1)])
    centres = centres[(centres > -reach) & (centres < 1.0 + reach)]
    chunk = max(1, 4_000_000 // max(len(grid), 1))
    for lo in range(0, len(centres), chunk):
        z = (grid[:, None] - centres[None, lo : lo + chunk]) / bandwidth
        out += np.exp(-0.5 * z * z).sum(axis=1)
    return out * (_INV_SQRT_2PI / bandwidth)


def _kde(points: np.ndarray, bandwidth: float, grid_size: int, denominator: int) -> Density:
    grid = kde_grid(grid_size)
    spacing = grid[1] - grid[0]
    if bandwidth < spacing:
        raise InvalidInputError(
            f"bandwidth {bandwidth!r} is narrower than the grid spacing {spacing:.3g}; increase grid_size"
        )
    values = _reflected_kernel_sum(points, bandwidth, grid)
    if denominator:
        values = values / denominator
    return Density(
        kind="kde",
        grid=grid,
        values=values,
        total_mass=points.size / denominator if denominator else 0.0,
        support=int(points.size),
        bandwidth=float(bandwidth),
    )


def kde_curve(trusts, bandwidth: float, grid_size: int = DEFAULT_GRID_SIZE) -> Density:
    t = _check_trusts(trusts)
    if t.size == 0:
        raise InvalidInputError("cannot estimate a density from no samples")
    if not (math.isfinite(bandwidth) and bandwidth > 0):
        raise InvalidInputError(f"bandwidth must be > 0, got {bandwidth!r}")
    if grid_size < MIN_GRID_SIZE:
        raise InvalidInputError(f"grid_size must be >= {MIN_GRID_SIZE}")
    return _kde(t, float(bandwidth), int(grid_size), t.size)


def trust_density(trusts, config: DensityConfig = DensityConfig()) -> Density:
    t = _check_trusts(trusts)
    if t.size == 0:
        raise InvalidInputError("cannot estimate a density from no samples")
    if config.estimator == "histogram":
        return histogram_density(t, config.bins)
    bandwidth = config.bandwidth if config.bandwidth is not None else silverman_bandwidth(t)
    return kde_curve(t, bandwidth, config.grid_size)


def _pair_from_partitions(
    correct_trust: np.ndarray, incorrect_trust: np.ndarray, config: DensityConfig, oracle_class: int | None
) -> ConditionalDensityPair:
    n = correct_trust.size + incorrect_trust.size
    if config.estimator == "histogram":
        correct = histogram_density(correct_trust, config.bins, denominator=n)
        incorrect = histogram_density(incorrect_trust, config.bins, denominator=n)
        # built from the parts so the bin-wise sum identity holds exactly
        unconditional = Density(
            kind="histogram",
            grid=correct.grid,
            values=correct.values + incorrect.values,
            total_mass=1.0,
            support=n,
            edges=correct.edges,
            counts=correct.counts + incorrect.counts,
        )
        return ConditionalDensityPair(correct, incorrect, unconditional, oracle_class)
    both = np.concatenate([correct_trust, incorrect_trust])
    bandwidth = config.bandwidth if config.bandwidth is not None else silverman_bandwidth(both)
    return ConditionalDensityPair(
        _kde(correct_trust, bandwidth, config.grid_size, n),
        _kde(incorrect_trust, bandwidth, config.grid_size, n),
        _kde(both, bandwidth, config.grid_size, n),
        oracle_class,
    )


def conditional_trust_densities(
    scored: ScoredTable | Sequence[ScoredRecord], config: DensityConfig = DensityConfig()
) -> ConditionalDensityPair:
    """Split one oracle class's trusts by correctness, each scaled by its share."""
    table = as_table(scored)
    if len(table) == 0:
        raise InvalidInputError("no scored records for the density")
    classes = np.unique(table.oracle)
    if classes.size != 1:
        raise InvalidInputError(f"records span several oracle classes: {classes.tolist()}")
    correct = table.correct
    return _pair_from_partitions(table.trust[correct], table.trust[~correct], config, int(classes[0]))


def class_conditional_densities(
    scored: ScoredTable | Sequence[ScoredRecord], labels: LabelSpace, config: DensityConfig = DensityConfig()
) -> dict[int, ConditionalDensityPair]:
    """Conditional density pair for every oracle class that has records."""
    table = as_table(scored)
    table.check_labels(labels)
    order = np.argsort(table.oracle, kind="stable")
    oracle = table.oracle[order]
    trust = table.trust[order]
    correct = table.correct[order]
    if config.estimator == "histogram":
        return _class_histograms(oracle, trust, correct, labels.count, config.bins)
    out = {}
    starts = np.flatnonzero(np.r_[True, oracle[1:] != oracle[:-1]]) if len(oracle) else np.array([], int)
    ends = np.r_[starts[1:], len(oracle)]
    for lo, hi in zip(starts, ends):
        t, c = trust[lo:hi], correct[lo:hi]
        out[int(oracle[lo])] = _pair_from_partitions(t[c], t[~c], config, int(oracle[lo]))
    return out


def _class_histograms(oracle, trust, correct, n_classes: int, bins: int) -> dict[int, ConditionalDensityPair]:
    # one bincount over (class, correctness, bin) instead of a pass per class
    key = (oracle * 2 + (~correct).astype(np.int64)) * bins + bin_indices(trust, bins)
    counts = np.bincount(key, minlength=n_classes * 2 * bins).reshape(n_classes, 2, bins)
    support = counts.sum(axis=(1, 2))
    out = {}
    for z in np.flatnonzero(support).tolist():
        n = int(support[z])
        correct_d = _histogram(counts[z, 0], n, int(counts[z, 0].sum()))
        incorrect_d = _histogram(counts[z, 1], n, int(counts[z, 1].sum()))
        unconditional = Density(
            kind="histogram",
            grid=correct_d.grid,
            values=correct_d.values + incorrect_d.values,
            total_mass=1.0,
            support=n,
            edges=correct_d.edges,
            counts=counts[z, 0] + counts[z, 1],
        )
        out[z] = ConditionalDensityPair(correct_d, incorrect_d, unconditional, z)
    return out


def local_maxima(values) -> list[int]:
    """Indices of local maxima; a flat run counts once (at its first index).

    Grid ends count as maxima when they exceed their only neighbour.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return []
    run_starts = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
    runs = v[run_starts]
    if runs.size == 1:
        return []
    left = np.r_[-np.inf, runs[:-1]]
    right = np.r_[runs[1:], -np.inf]
    return run_starts[(runs > left) & (runs > right)].tolist()
