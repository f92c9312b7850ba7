"""HC-thresholded feature selection and the resulting LDA classifier.

Pipeline: two-class t-like scores per feature, Efron standardization against
the empirical null, two-sided P-values, then a threshold at the absolute
Z-score of the order statistic maximizing the HC feature score. The trained
model keeps signed unit weights on the selected features plus the training
standardization constants, so prediction is a single standardized dot
product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import InvalidInputError
from .hc_core import PValueSeries, bh_fdr_select, hc_feature_scores, _floor_index
from .numerics import clamp_pvalues

__all__ = [
    "LabeledMatrix",
    "ZScores",
    "HctModel",
    "feature_zscores",
    "hct_threshold",
    "train",
    "predict",
    "decision_scores",
    "EvaluationResult",
    "evaluate",
    "fdr_feature_select",
    "save_model",
    "load_model",
    "MODEL_FORMAT_VERSION",
]

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabeledMatrix:
    """n x p sample matrix with labels in {-1, +1} and per-feature names."""

    data: np.ndarray
    labels: np.ndarray
    feature_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        labels = np.asarray(self.labels)
        if data.ndim != 2:
            raise InvalidInputError("data must be a 2-D matrix (rows = samples)")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("data must not contain NaN or Inf")
        if labels.shape != (data.shape[0],):
            raise InvalidInputError(
                f"labels must have one entry per row, got {labels.shape} for {data.shape[0]} rows")
        labels = labels.astype(int)
        if not np.all(np.isin(labels, (-1, 1))):
            raise InvalidInputError("labels must take values in {-1, +1}")
        names = self.feature_names
        if names is None:
            names = [f"f{j + 1}" for j in range(data.shape[1])]
        names = list(names)
        if len(names) != data.shape[1]:
            raise InvalidInputError(
                f"expected {data.shape[1]} feature names, got {len(names)}")
        data = data.copy()
        data.flags.writeable = False
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ZScores:
    """Raw t-like feature scores and their Efron-standardized version.

    standardized = (raw - mean_shift) / sd_scale, so the standardized vector
    has empirical mean 0 and sample standard deviation 1.
    """

    raw: np.ndarray
    standardized: np.ndarray
    mean_shift: float
    sd_scale: float

    @property
    def p(self) -> int:
        return int(self.raw.size)


def feature_zscores(train_set: LabeledMatrix) -> ZScores:
    """Two-sample t-like scores with pooled variance, Efron-standardized.

    raw_j = (mean1_j - mean2_j) / (s_j * sqrt(1/n1 + 1/n2)) with the pooled
    s_j^2 on n - 2 degrees of freedom; class +1 is "class 1". The
    standardization divides by the sample standard deviation (p - 1
    denominator) of the raw scores.
    """
    in1 = train_set.labels == 1
    in2 = train_set.labels == -1
    n1, n2 = int(in1.sum()), int(in2.sum())
    if n1 < 2 or n2 < 2:
        raise InvalidInputError(f"need at least 2 samples per class, got {n1} and {n2}")
    x1 = train_set.data[in1]
    x2 = train_set.data[in2]
    mean1 = x1.mean(axis=0)
    mean2 = x2.mean(axis=0)
    ss = ((x1 - mean1) ** 2).sum(axis=0) + ((x2 - mean2) ** 2).sum(axis=0)
    pooled_var = ss / (n1 + n2 - 2)
    if np.any(pooled_var <= 0.0):
        j = int(np.argmax(pooled_var <= 0.0))
        raise InvalidInputError(
            f"feature {train_set.feature_names[j]!r} has zero pooled variance")
    s = np.sqrt(pooled_var)
    raw = (mean1 - mean2) / (s * math.sqrt(1.0 / n1 + 1.0 / n2))
    mean_shift = float(raw.mean())
    sd_scale = float(raw.std(ddof=1)) if raw.size > 1 else 0.0
    if sd_scale <= 0.0:
        raise InvalidInputError("feature scores are degenerate: zero spread across features")
    return ZScores(raw, (raw - mean_shift) / sd_scale, mean_shift, sd_scale)


def _sorted_two_sided(z: ZScores):
    """|Z| in descending order with the matching ascending two-sided P-values."""
    abs_z = np.abs(z.standardized)
    order = np.argsort(-abs_z, kind="stable")
    abs_sorted = abs_z[order]
    pvals = clamp_pvalues(2.0 * ndtr(-abs_sorted))
    return order, abs_sorted, pvals


def hct_threshold(z: ZScores, alpha0: float = 0.10) -> tuple[float, int]:
    """The HC threshold: |Z| at the order statistic maximizing the HC feature score.

    The maximization runs over 1 <= i <= floor(alpha0 * p); if every feature
    score there is <= 0 (or p is too small for the range), it falls back to
    i = 1 so at least the single most significant feature is selected.
    Returns (threshold, maximizing index).
    """
    if z.p < 2:
        raise InvalidInputError("need at least 2 features")
    if not 0.0 < alpha0 <= 1.0:
        raise InvalidInputError(f"alpha0 must lie in (0, 1], got {alpha0}")
    _, abs_sorted, pvals = _sorted_two_sided(z)
    k_max = min(_floor_index(alpha0, z.p), z.p - 1)
    if k_max < 1:
        return float(abs_sorted[0]), 1
    scores = hc_feature_scores(PValueSeries(pvals))[:k_max]
    idx = int(np.argmax(scores))  # ties: smallest index
    if scores[idx] <= 0.0:
        idx = 0
    return float(abs_sorted[idx]), idx + 1


@dataclass(frozen=True)
class HctModel:
    """Trained HCT-LDA rule: signed unit weights plus training standardization.

    weights[j] is sgn(Z_j) when |Z_j| >= threshold and 0 otherwise. When |Z|
    ties exactly at the threshold, every tied feature is kept even if that
    exceeds hct_index; selection_consistent records whether the two agree.
    """

    weights: np.ndarray
    threshold: float
    hct_index: int
    feature_means: np.ndarray
    feature_sds: np.ndarray
    alpha0: float
    feature_names: Sequence[str]

    @property
    def p(self) -> int:
        return int(self.weights.size)

    @property
    def selected_count(self) -> int:
        return int(np.count_nonzero(self.weights))

    @property
    def selection_consistent(self) -> bool:
        return self.selected_count == self.hct_index


def train(train_set: LabeledMatrix, alpha0: float = 0.10) -> HctModel:
    """Fit the HCT-LDA classifier on a labeled training matrix."""
    z = feature_zscores(train_set)
    threshold, hct_index = hct_threshold(z, alpha0)
    selected = np.abs(z.standardized) >= threshold
    weights = (np.sign(z.standardized) * selected).astype(np.int8)
    in1 = train_set.labels == 1
    in2 = train_set.labels == -1
    n1, n2 = int(in1.sum()), int(in2.sum())
    mean1 = train_set.data[in1].mean(axis=0)
    mean2 = train_set.data[in2].mean(axis=0)
    ss = (((train_set.data[in1] - mean1) ** 2).sum(axis=0)
          + ((train_set.data[in2] - mean2) ** 2).sum(axis=0))
    return HctModel(
        weights=weights,
        threshold=threshold,
        hct_index=hct_index,
        feature_means=train_set.data.mean(axis=0),
        feature_sds=np.sqrt(ss / (n1 + n2 - 2)),
        alpha0=float(alpha0),
        feature_names=list(train_set.feature_names),
    )


def decision_scores(model: HctModel, data) -> np.ndarray:
    """LDA scores sum_j w_j (x_j - mean_j) / s_j for each row of ``data``."""
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[1] != model.p:
        raise InvalidInputError(f"expected {model.p} features, got {x.shape[1]}")
    return ((x - model.feature_means) / model.feature_sds) @ model.weights.astype(float)


def predict(model: HctModel, sample) -> int:
    """Classify one sample: +1 if the LDA score is positive, -1 if negative.

    A score of exactly 0 classifies as +1 (deterministic tie rule; ties have
    probability zero for continuous inputs).
    """
    score = float(decision_scores(model, np.asarray(sample, dtype=float).reshape(1, -1))[0])
    return 1 if score >= 0.0 else -1


@dataclass(frozen=True)
class EvaluationResult:
    error_rate: float
    predictions: np.ndarray
    scores_by_class: dict
    normalized_scores_by_class: dict
    tie_count: int


def evaluate(model: HctModel, test_set: LabeledMatrix) -> EvaluationResult:
    """Misclassification rate plus per-class score samples.

    Scores are reported raw and normalized by 1/sqrt(hct_index), the common
    rescaling that makes the two class histograms comparable across models.
    """
    scores = decision_scores(model, test_set.data)
    preds = np.where(scores >= 0.0, 1, -1)
    norm = 1.0 / math.sqrt(model.hct_index) if model.hct_index > 0 else 1.0
    by_class = {lab: scores[test_set.labels == lab] for lab in (1, -1)}
    return EvaluationResult(
        error_rate=float(np.mean(preds != test_set.labels)),
        predictions=preds,
        scores_by_class=by_class,
        normalized_scores_by_class={k: v * norm for k, v in by_class.items()},
        tie_count=int(np.sum(scores == 0.0)),
    )


def fdr_feature_select(z: ZScores, q: float) -> np.ndarray:
    """Features selected by Benjamini-Hochberg on the two-sided P-values.

    The usual comparator for HCT: returns the (sorted, 0-based) indices of
    the rejected features.
    """
    order, _, pvals = _sorted_two_sided(z)
    k = bh_fdr_select(PValueSeries(pvals), q)
    return np.sort(order[:k])


def save_model(model: HctModel, path) -> None:
    """Write the model as JSON; floats round-trip exactly via repr."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "weights": {str(j): int(model.weights[j]) for j in np.flatnonzero(model.weights)},
        "p": model.p,
        "threshold": model.threshold,
        "hct_index": model.hct_index,
        "feature_means": model.feature_means.tolist(),
        "feature_sds": model.feature_sds.tolist(),
        "alpha0": model.alpha0,
        "feature_names": list(model.feature_names),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> HctModel:
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise InvalidInputError(f"unsupported model format_version {version!r}")
    p = int(doc["p"])
    weights = np.zeros(p, dtype=np.int8)
    for j, w in doc["weights"].items():
        weights[int(j)] = int(w)
    return HctModel(
        weights=weights,
        threshold=float(doc["threshold"]),
        hct_index=int(doc["hct_index"]),
        feature_means=np.asarray(doc["feature_means"], dtype=float),
        feature_sds=np.asarray(doc["feature_sds"], dtype=float),
        alpha0=float(doc["alpha0"]),
        feature_names=list(doc["feature_names"]),
    )
