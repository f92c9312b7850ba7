"""Rare/weak Gaussian mixture sampling and the sparse-detection experiment.

The alternative draws each coordinate nonnull with probability epsilon and
shifts it by tau; P-values come from the standard normal. The experiment
harness scores repeated null/alternative draws with an HC variant against a
calibrated critical value. A permutation scheme (independent row shuffles per
column) supplies P-values for HC scores on real labeled matrices.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import ndtr

from . import calibrate, hct
from .errors import InvalidInputError
from .hc_core import PValueSeries, hc_plus, hc_scores_sorted_batch, hc_star
from .numerics import RngSeed, as_generator, clamp_pvalues

__all__ = [
    "ArwParams",
    "MixtureSample",
    "sample_mixture",
    "pvalues_one_sided",
    "pvalues_two_sided",
    "DetectionSummary",
    "detection_experiment",
    "PermutationTestResult",
    "permutation_test",
    "permutation_pvalue",
]

# Disjoint stream-id namespaces so calibration draws never reuse the random
# bits consumed by the experiment itself.
_NULL_STREAMS = 0
_ALT_STREAMS = 1 << 20
_CALIB_STREAMS = 1 << 21


@dataclass(frozen=True)
class ArwParams:
    """Asymptotic rare/weak calibration: epsilon = N^-vartheta, tau = sqrt(2 r log N)."""

    N: int
    vartheta: float
    r: float

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInputError(f"N must be positive, got {self.N}")
        if not 0.0 < self.vartheta < 1.0:
            raise InvalidInputError(f"vartheta must lie in (0, 1), got {self.vartheta}")
        if self.r <= 0.0:
            raise InvalidInputError(f"r must be positive, got {self.r}")

    @property
    def epsilon(self) -> float:
        return float(self.N) ** (-self.vartheta)

    @property
    def tau(self) -> float:
        return math.sqrt(2.0 * self.r * math.log(self.N))


@dataclass(frozen=True)
class MixtureSample:
    """One draw from (1-eps)N(0,1) + eps N(tau,1), with the latent flags."""

    x: np.ndarray
    ground_truth: np.ndarray

    @property
    def nonnull_count(self) -> int:
        return int(self.ground_truth.sum())


def _mixture_spec(params, epsilon, tau):
    if isinstance(params, ArwParams):
        return params.N, params.epsilon, params.tau
    n = int(params)
    if epsilon is None or tau is None:
        raise InvalidInputError("explicit sampling needs N, epsilon and tau")
    return n, float(epsilon), float(tau)


def sample_mixture(params: Union[ArwParams, int], epsilon: Optional[float] = None,
                   tau: Optional[float] = None, seed=0) -> MixtureSample:
    """Draw one mixture sample; ``params`` is an ArwParams or an integer N."""
    n, eps, t = _mixture_spec(params, epsilon, tau)
    if not 0.0 <= eps <= 1.0:
        raise InvalidInputError(f"epsilon must lie in [0, 1], got {eps}")
    if not math.isfinite(t):
        raise InvalidInputError(f"tau must be finite, got {t}")
    rng = as_generator(seed)
    x = rng.standard_normal(n)
    flags = rng.random(n) < eps
    x[flags] += t
    return MixtureSample(x, flags)


def pvalues_one_sided(x) -> PValueSeries:
    """Upper-tail P-values 1 - Phi(x_i), sorted ascending."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("x must be finite")
    return PValueSeries(np.sort(clamp_pvalues(ndtr(-x))))


def pvalues_two_sided(x) -> PValueSeries:
    """Two-sided P-values 2(1 - Phi(|x_i|)), sorted ascending."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("x must be finite")
    return PValueSeries(np.sort(clamp_pvalues(2.0 * ndtr(-np.abs(x)))))


def _mixture_stream_scores(args) -> np.ndarray:
    n, eps, tau, variant, alpha0, reps, seed, stream_id = args
    rng = RngSeed(seed, stream_id).generator()
    out = np.empty(reps)
    batch = max(1, calibrate._BATCH_ELEMS // n)
    done = 0
    while done < reps:
        b = min(batch, reps - done)
        x = rng.standard_normal((b, n))
        if eps > 0.0:
            x += tau * (rng.random((b, n)) < eps)
        p = clamp_pvalues(ndtr(-x))
        p.sort(axis=-1)
        out[done:done + b] = hc_scores_sorted_batch(p, variant, alpha0)
        done += b
    return out


def _mixture_scores(n, eps, tau, variant, alpha0, reps, seed, stream_base, n_jobs) -> np.ndarray:
    tasks = []
    stream_id, left = stream_base, reps
    while left > 0:
        chunk = min(calibrate.STREAM_BLOCK, left)
        tasks.append((n, eps, tau, variant, alpha0, chunk, seed, stream_id))
        stream_id += 1
        left -= chunk
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_mixture_stream_scores, tasks, chunksize=1))
    else:
        parts = [_mixture_stream_scores(t) for t in tasks]
    return np.concatenate(parts)


@dataclass(frozen=True)
class DetectionSummary:
    """Scores and rejection rates from one detection experiment."""

    null_scores: np.ndarray
    alt_scores: np.ndarray
    critical: float
    power: float
    size: float
    alpha: float
    variant: str
    alpha0: float

    @property
    def separated(self) -> bool:
        """Whether the two score samples do not overlap at all."""
        return float(self.alt_scores.min()) > float(self.null_scores.max())


def detection_experiment(params: Union[ArwParams, int], reps: int, alpha: float = 0.05,
                         variant: str = "plus", seed=0, epsilon: Optional[float] = None,
                         tau: Optional[float] = None, alpha0: float = 0.5,
                         critical: Optional[float] = None, calibration_reps: int = 1000,
                         n_jobs: int = 1) -> DetectionSummary:
    """Score ``reps`` null and ``reps`` alternative draws with one HC variant.

    The rejection threshold is ``critical`` if given, otherwise the empirical
    (1-alpha) null quantile simulated with ``calibration_reps`` replicates on
    a dedicated stream namespace. Power and size are the rejection rates of
    the alternative and null score samples.
    """
    if reps < 2:
        raise InvalidInputError(f"need reps >= 2, got {reps}")
    n, eps, t = _mixture_spec(params, epsilon, tau)
    base = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    if critical is None:
        entry = calibrate.simulate_critical(
            n, alpha, variant, alpha0, max(100, calibration_reps),
            RngSeed(base.seed, _CALIB_STREAMS), n_jobs=n_jobs)
        critical = entry.quantile
    null_scores = _mixture_scores(n, 0.0, 0.0, variant, alpha0, reps, base.seed,
                                  _NULL_STREAMS, n_jobs)
    alt_scores = _mixture_scores(n, eps, t, variant, alpha0, reps, base.seed,
                                 _ALT_STREAMS, n_jobs)
    return DetectionSummary(
        null_scores=null_scores,
        alt_scores=alt_scores,
        critical=float(critical),
        power=float(np.mean(alt_scores > critical)),
        size=float(np.mean(null_scores > critical)),
        alpha=float(alpha),
        variant=variant,
        alpha0=float(alpha0),
    )


def _matrix_hc_score(matrix: "hct.LabeledMatrix", variant: str, alpha0: float) -> float:
    z = hct.feature_zscores(matrix)
    series = pvalues_two_sided(z.standardized)
    result = hc_star(series, alpha0) if variant == "star" else hc_plus(series, alpha0)
    return result.score


@dataclass(frozen=True)
class PermutationTestResult:
    pvalue: float
    original_score: float
    shuffle_scores: np.ndarray


def permutation_test(matrix, shuffles: int, seed=0, variant: str = "plus",
                     alpha0: float = 0.5) -> PermutationTestResult:
    """Shuffle-based P-value for the HC score of a labeled matrix.

    Each shuffle permutes the rows of every column independently, washing out
    any label-feature alignment; the standardized Z-scores and the HC score
    are recomputed per shuffle. The returned P-value is the add-one estimator
    (1 + #{shuffle >= original}) / (shuffles + 1), which never reports 0.
    """
    if shuffles < 1:
        raise InvalidInputError(f"need shuffles >= 1, got {shuffles}")
    original = _matrix_hc_score(matrix, variant, alpha0)
    rng = as_generator(seed)
    data = matrix.data
    n, p = data.shape
    scores = np.empty(shuffles)
    for b in range(shuffles):
        perm = np.argsort(rng.random((n, p)), axis=0)
        shuffled = hct.LabeledMatrix(np.take_along_axis(data, perm, axis=0),
                                     matrix.labels, matrix.feature_names)
        scores[b] = _matrix_hc_score(shuffled, variant, alpha0)
    exceed = int(np.sum(scores >= original))
    return PermutationTestResult((1 + exceed) / (shuffles + 1), original, scores)


def permutation_pvalue(matrix, shuffles: int, seed=0, variant: str = "plus",
                       alpha0: float = 0.5) -> float:
    """The P-value alone; see permutation_test for the estimator."""
    return permutation_test(matrix, shuffles, seed, variant, alpha0).pvalue
