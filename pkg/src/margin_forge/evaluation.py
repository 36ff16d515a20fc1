"""Evaluation reports, cohort splitting, and synthetic cohort generation.

Reports count label-wise errors: ``postoneg`` is the number of +1-labeled
points the model placed on the negative side, ``negtopos`` the number of
-1-labeled points placed on the positive side, and ``misclassified`` their
sum. ``render_report`` lays these out as a fixed-width table, one numbered
test per row.

All randomness flows through numpy's seeded PCG64 generator, so a given
seed reproduces the same cohort and the same split bytes on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from margin_forge.svm import Dataset, Model, predict_all
from margin_forge.vectors import FeatureVector, check_label

REPORT_COLUMNS = (
    "Test",
    "No of Patients",
    "+1 labeled",
    "-1 labeled",
    "C(bound)",
    "Misclassified",
    "postoneg",
    "negtopos",
)


@dataclass(frozen=True)
class ConfusionReport:
    """One evaluation row: cohort composition, C bound, and error counts."""

    n_total: int
    n_pos_labeled: int
    n_neg_labeled: int
    c_bound: float
    misclassified: int
    postoneg: int
    negtopos: int

    def __post_init__(self):
        if self.n_pos_labeled + self.n_neg_labeled != self.n_total:
            raise ValueError("labeled counts must sum to n_total")
        if self.misclassified != self.postoneg + self.negtopos:
            raise ValueError("misclassified must equal postoneg + negtopos")
        if self.postoneg > self.n_pos_labeled or self.negtopos > self.n_neg_labeled:
            raise ValueError("error counts exceed their labeled groups")
        if min(self.n_total, self.postoneg, self.negtopos) < 0:
            raise ValueError("counts must be non-negative")


def evaluate(model: Model, data: Dataset, c_bound: float) -> ConfusionReport:
    """Count prediction errors of ``model`` on labeled data.

    ``c_bound`` is carried through into the report row so a sweep over C
    stays readable; it does not influence the counts.
    """
    vectors = [x for x, _ in data]
    labels = np.array([check_label(y) for _, y in data])
    predictions = predict_all(model, vectors)
    postoneg = int(((labels == 1) & (predictions == -1)).sum())
    negtopos = int(((labels == -1) & (predictions == 1)).sum())
    return ConfusionReport(
        n_total=len(data),
        n_pos_labeled=int((labels == 1).sum()),
        n_neg_labeled=int((labels == -1).sum()),
        c_bound=c_bound,
        misclassified=postoneg + negtopos,
        postoneg=postoneg,
        negtopos=negtopos,
    )


def _format_c(c: float) -> str:
    return format(c, "g")


def _report_rows(reports) -> list[list[str]]:
    return [
        [
            str(number),
            str(r.n_total),
            str(r.n_pos_labeled),
            str(r.n_neg_labeled),
            _format_c(r.c_bound),
            str(r.misclassified),
            str(r.postoneg),
            str(r.negtopos),
        ]
        for number, r in enumerate(reports, start=1)
    ]


def render_report(reports) -> str:
    """Fixed-width table over REPORT_COLUMNS, rows numbered from 1."""
    reports = list(reports)
    if not reports:
        raise ValueError("render_report needs at least one report")
    rows = _report_rows(reports)
    widths = [
        max(len(header), *(len(row[k]) for row in rows))
        for k, header in enumerate(REPORT_COLUMNS)
    ]
    lines = [" | ".join(h.ljust(w) for h, w in zip(REPORT_COLUMNS, widths)).rstrip()]
    for row in rows:
        lines.append(" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_report_csv(reports) -> str:
    """Machine-readable variant: the same columns as comma-separated rows."""
    reports = list(reports)
    if not reports:
        raise ValueError("render_report_csv needs at least one report")
    lines = [",".join(REPORT_COLUMNS)]
    lines.extend(",".join(row) for row in _report_rows(reports))
    return "\n".join(lines)


def split(data: Dataset, fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic stratified split into (train, test).

    The train side receives round(fraction * n) points, balanced over labels
    by largest-remainder quotas; whenever a label has at least two members,
    both sides keep at least one of it. Order within each side follows the
    input order.
    """
    n = len(data)
    if n < 2:
        raise ValueError("split needs at least 2 samples")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    target = int(math.floor(fraction * n + 0.5))
    target = min(max(target, 1), n - 1)

    groups = [
        [k for k, (_, y) in enumerate(data) if check_label(y) == label]
        for label in (1, -1)
    ]
    groups = [g for g in groups if g]
    quotas = [fraction * len(g) for g in groups]
    takes = [int(math.floor(q)) for q in quotas]
    remainders = sorted(
        range(len(groups)), key=lambda k: (takes[k] - quotas[k], k)
    )  # biggest fractional remainder first, class order breaking ties
    for k in remainders:
        if sum(takes) >= target:
            break
        takes[k] += 1

    lows = [1 if len(g) >= 2 else 0 for g in groups]
    highs = [len(g) - 1 if len(g) >= 2 else len(g) for g in groups]
    takes = [min(max(t, lo), hi) for t, lo, hi in zip(takes, lows, highs)]
    while sum(takes) < target and any(t < hi for t, hi in zip(takes, highs)):
        for k in range(len(groups)):
            if sum(takes) < target and takes[k] < highs[k]:
                takes[k] += 1
    while sum(takes) > target and any(t > lo for t, lo in zip(takes, lows)):
        for k in range(len(groups)):
            if sum(takes) > target and takes[k] > lows[k]:
                takes[k] -= 1

    rng = np.random.default_rng(seed)
    chosen: set[int] = set()
    for group, take in zip(groups, takes):
        order = rng.permutation(len(group))
        chosen.update(group[p] for p in order[:take])
    train = [data[k] for k in range(n) if k in chosen]
    test = [data[k] for k in range(n) if k not in chosen]
    return train, test


@dataclass(frozen=True)
class SyntheticCohortSpec:
    """A planted-separator cohort: uniform features in [-1, 1]^dim, labels
    by the sign of the planted affine form, then independent label flips."""

    n: int
    dim: int
    planted_weights: tuple[float, ...]
    planted_bias: float = 0.0
    label_noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if len(self.planted_weights) != self.dim:
            raise ValueError("planted_weights length must equal dim")
        if not all(math.isfinite(w) for w in self.planted_weights):
            raise ValueError("planted_weights must be finite")
        if not any(w != 0.0 for w in self.planted_weights):
            raise ValueError("planted_weights must not be all zero")
        if not math.isfinite(self.planted_bias):
            raise ValueError("planted_bias must be finite")
        if not 0.0 <= self.label_noise_rate < 0.5:
            raise ValueError(
                f"label_noise_rate must be in [0, 0.5), got {self.label_noise_rate}"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")


def generate_cohort(spec: SyntheticCohortSpec) -> list[tuple[FeatureVector, int]]:
    """Draw a synthetic cohort; identical for identical specs.

    Stream layout (PCG64 seeded with spec.seed): first the n*dim uniform
    features, then n uniforms compared against the noise rate for flips.
    """
    rng = np.random.default_rng(spec.seed)
    features = rng.uniform(-1.0, 1.0, size=(spec.n, spec.dim))
    margins = features @ np.asarray(spec.planted_weights) + spec.planted_bias
    labels = np.where(margins >= 0.0, 1, -1)
    flips = rng.random(spec.n) < spec.label_noise_rate
    labels = np.where(flips, -labels, labels)
    return [
        (FeatureVector.dense(row), int(label)) for row, label in zip(features, labels)
    ]
