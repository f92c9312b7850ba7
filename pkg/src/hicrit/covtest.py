"""HC tests against covariance structure: hidden cliques and low-rank spikes.

Clique detection turns pairwise (or row-maximum) sample correlations into
P-values via exact t-distribution identities under the identity covariance,
then applies HC restricted to the P-value band [1/N, 1/2]. Spike detection
standardizes sorted eigenvalues of the empirical covariance against a
Monte Carlo null profile of per-rank means and standard deviations.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .hc_core import HcResult, PValueSeries, ohc_plus_band
from .numerics import RNG_VERSION, RngSeed, as_generator, clamp_pvalues, student_t_cdf, student_t_sf

__all__ = [
    "CorrelationSummary",
    "correlation_summary",
    "pairwise_pvalue",
    "rowmax_cdf",
    "rowmax_pvalue",
    "clique_test",
    "make_clique_sigma",
    "sample_gaussian",
    "EigenNullProfile",
    "eigen_null_profile",
    "EigenHcResult",
    "eigen_hc_test",
    "make_spiked_sigma",
    "haar_orthogonal",
    "save_profile",
    "load_profile",
    "eigen_null_profile_cached",
]

_RHO_EPS = 1e-15
_PROFILE_HEADER = ["n", "p", "replicates", "seed", "rng_version", "rank", "mean", "sd"]
_PROFILE_STREAM_BLOCK = 64


@dataclass(frozen=True)
class CorrelationSummary:
    """All p(p-1)/2 pairwise correlations plus each row's maximum."""

    pairwise: np.ndarray
    rowmax: np.ndarray
    n: int
    p: int


def correlation_summary(X, center: bool = True) -> CorrelationSummary:
    """Pairwise and row-max correlations of the columns of X.

    Columns are mean-centered by default (real data rarely has exact zero
    means); pass center=False for data already known to be zero-mean.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 3 or X.shape[1] < 2:
        raise InvalidInputError("X must be an n x p matrix with n >= 3 and p >= 2")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("X must not contain NaN or Inf")
    n, p = X.shape
    Y = X - X.mean(axis=0) if center else X
    norms = np.sqrt((Y * Y).sum(axis=0))
    if np.any(norms == 0.0):
        j = int(np.argmax(norms == 0.0))
        raise InvalidInputError(f"column {j} is constant")
    Y = Y / norms
    R = Y.T @ Y
    np.clip(R, -1.0 + _RHO_EPS, 1.0 - _RHO_EPS, out=R)
    iu = np.triu_indices(p, k=1)
    pairwise = R[iu]
    np.fill_diagonal(R, -np.inf)
    return CorrelationSummary(pairwise, R.max(axis=1), n, p)


def _rho_to_t(rho, n: int):
    rho = np.clip(np.asarray(rho, dtype=float), -1.0 + _RHO_EPS, 1.0 - _RHO_EPS)
    return math.sqrt(n - 1.0) * rho / np.sqrt(1.0 - rho * rho)


def pairwise_pvalue(rho, n: int, side: str = "two"):
    """P-value of one pairwise correlation under the identity covariance.

    P(rho_ij >= rho) = P(t_{n-1} >= sqrt(n-1) rho / sqrt(1-rho^2)); the
    two-sided version is 2 min(p, 1-p). |rho| = 1 is clamped to the open
    interval before the transform.
    """
    if n < 3:
        raise InvalidInputError(f"need n >= 3, got {n}")
    if side not in ("upper", "two"):
        raise InvalidInputError(f"side must be 'upper' or 'two', got {side!r}")
    scalar = np.isscalar(rho)
    upper = student_t_sf(_rho_to_t(rho, n), n - 1)
    out = upper if side == "upper" else 2.0 * np.minimum(upper, 1.0 - upper)
    out = clamp_pvalues(out)
    return float(out) if scalar else out


def rowmax_cdf(rho, n: int, p: int):
    """F_{p,n}(rho) = P(max of a row's p-1 correlations <= rho) under the null."""
    if n < 3:
        raise InvalidInputError(f"need n >= 3, got {n}")
    if p < 2:
        raise InvalidInputError(f"need p >= 2, got {p}")
    scalar = np.isscalar(rho)
    out = student_t_cdf(_rho_to_t(rho, n), n - 1) ** (p - 1)
    return float(out) if scalar else out


def rowmax_pvalue(rho, n: int, p: int):
    """Upper-tail P-value 1 - F_{p,n}(rho) for a row-maximum correlation."""
    scalar = np.isscalar(rho)
    out = clamp_pvalues(1.0 - rowmax_cdf(rho, n, p))
    return float(out) if scalar else out


def clique_test(X, mode: str = "pairwise", alpha0: float = 0.5, side: str = "two",
                center: bool = True) -> HcResult:
    """HC score for 'is there a correlated clique hiding in the columns of X'.

    mode 'pairwise' feeds all p(p-1)/2 pairwise-correlation P-values to HC;
    mode 'rowmax' uses the p row-maximum P-values instead (cheaper, less
    powerful). The max runs over the P-value band [1/N, alpha0].
    """
    if mode not in ("pairwise", "rowmax"):
        raise InvalidInputError(f"mode must be 'pairwise' or 'rowmax', got {mode!r}")
    summary = correlation_summary(X, center=center)
    if mode == "pairwise":
        pvals = pairwise_pvalue(summary.pairwise, summary.n, side=side)
    else:
        pvals = rowmax_pvalue(summary.rowmax, summary.n, summary.p)
    series = PValueSeries(np.sort(np.atleast_1d(pvals)))
    return ohc_plus_band(series, p_min=1.0 / len(series), p_max=alpha0)


def make_clique_sigma(p: int, k: int, a: float) -> np.ndarray:
    """Identity covariance with a k x k equi-correlated block of strength a.

    Positive definiteness requires -1/(k-1) < a < 1 (any a is accepted for
    k = 1, where the block is trivial).
    """
    if not 1 <= k <= p:
        raise InvalidInputError(f"need 1 <= k <= p, got k={k}, p={p}")
    if k >= 2 and not (-1.0 / (k - 1) < a < 1.0):
        raise InvalidInputError(
            f"a must lie in (-1/(k-1), 1) = ({-1.0 / (k - 1):.6g}, 1) for k={k}, got {a}")
    sigma = np.eye(p)
    if k >= 2:
        block = np.full((k, k), a)
        np.fill_diagonal(block, 1.0)
        sigma[:k, :k] = block
    return sigma


def sample_gaussian(n: int, sigma: np.ndarray, seed=0) -> np.ndarray:
    """n i.i.d. rows from N(0, sigma)."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidInputError("sigma must be a square matrix")
    rng = as_generator(seed)
    chol = np.linalg.cholesky(sigma)
    return rng.standard_normal((n, sigma.shape[0])) @ chol.T


def _sorted_eigenvalues(X: np.ndarray) -> np.ndarray:
    """Nonzero eigenvalues of X'X/n, descending, via the smaller Gram matrix."""
    n, p = X.shape
    gram = (X.T @ X if p <= n else X @ X.T) / n
    return np.linalg.eigvalsh(gram)[::-1][: min(n, p)]


@dataclass(frozen=True)
class EigenNullProfile:
    """Per-rank null means and standard deviations of the sorted eigenvalues."""

    n: int
    p: int
    means: np.ndarray
    sds: np.ndarray
    replicates: int
    seed: RngSeed
    rng_version: str = RNG_VERSION

    @property
    def m(self) -> int:
        return int(self.means.size)


def _profile_stream(args) -> np.ndarray:
    n, p, reps, seed, stream_id = args
    rng = RngSeed(seed, stream_id).generator()
    m = min(n, p)
    out = np.empty((reps, m))
    for i in range(reps):
        out[i] = _sorted_eigenvalues(rng.standard_normal((n, p)))
    return out


def eigen_null_profile(n: int, p: int, replicates: int = 500, seed=0,
                       n_jobs: int = 1) -> EigenNullProfile:
    """Simulate the null eigenvalue profile for an n x p standard normal matrix."""
    if replicates < 100:
        raise InvalidInputError(f"need replicates >= 100, got {replicates}")
    if n < 2 or p < 2:
        raise InvalidInputError(f"need n, p >= 2, got n={n}, p={p}")
    base = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    tasks = []
    stream_id, left = base.stream_id, replicates
    while left > 0:
        reps = min(_PROFILE_STREAM_BLOCK, left)
        tasks.append((n, p, reps, base.seed, stream_id))
        stream_id += 1
        left -= reps
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_profile_stream, tasks, chunksize=1))
    else:
        parts = [_profile_stream(t) for t in tasks]
    eigs = np.concatenate(parts, axis=0)
    return EigenNullProfile(n, p, eigs.mean(axis=0), eigs.std(axis=0, ddof=1),
                            replicates, base)


@dataclass(frozen=True)
class EigenHcResult:
    """Standardized eigenvalue excesses and their restricted maximum."""

    components: np.ndarray
    score: float
    argmax_rank: int
    alpha0: float


def eigen_hc_test(X, profile: EigenNullProfile, alpha0: float = 0.5) -> EigenHcResult:
    """Standardize each sorted eigenvalue of X'X/n by its null mean/SD and maximize.

    The max runs over the top floor(alpha0 * min(n, p)) ranks.
    """
    X = np.asarray(X, dtype=float)
    if X.shape != (profile.n, profile.p):
        raise InvalidInputError(
            f"X has shape {X.shape}, profile was simulated for ({profile.n}, {profile.p})")
    if not 0.0 < alpha0 <= 1.0:
        raise InvalidInputError(f"alpha0 must lie in (0, 1], got {alpha0}")
    eigs = _sorted_eigenvalues(X)
    comp = (eigs - profile.means) / profile.sds
    k_max = max(1, int(math.floor(alpha0 * profile.m + 1e-9)))
    k = int(np.argmax(comp[:k_max]))
    return EigenHcResult(comp, float(comp[k]), k + 1, float(alpha0))


def haar_orthogonal(p: int, seed=0) -> np.ndarray:
    """Haar-distributed p x p orthogonal matrix (QR with sign correction)."""
    rng = as_generator(seed)
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    d = np.diag(r)
    return q * np.where(d == 0.0, 1.0, np.sign(d))


def make_spiked_sigma(p: int, rank: int, h: float, seed=0) -> np.ndarray:
    """Spiked covariance Q diag(1+h, ..., 1+h, 1, ..., 1) Q' with Haar Q."""
    if not 0 <= rank < p:
        raise InvalidInputError(f"need 0 <= rank < p, got rank={rank}, p={p}")
    if h <= -1.0:
        raise InvalidInputError(f"need h > -1 for positive definiteness, got {h}")
    if rank == 0 or h == 0.0:
        return np.eye(p)
    q = haar_orthogonal(p, seed)
    lam = np.ones(p)
    lam[:rank] = 1.0 + h
    sigma = (q * lam) @ q.T
    return (sigma + sigma.T) / 2.0


# ---------------------------------------------------------------------------
# Profile cache: same CSV mechanism as the critical-value cache, one row per
# eigenvalue rank.

def save_profile(path, profile: EigenNullProfile) -> None:
    rows = []
    if os.path.exists(path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    for rank in range(profile.m):
        rows.append({
            "n": profile.n, "p": profile.p, "replicates": profile.replicates,
            "seed": profile.seed.seed, "rng_version": profile.rng_version,
            "rank": rank + 1, "mean": repr(float(profile.means[rank])),
            "sd": repr(float(profile.sds[rank])),
        })
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=_PROFILE_HEADER)
            w.writeheader()
            w.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_profile(path, n: int, p: int, min_replicates: int = 1) -> Optional[EigenNullProfile]:
    """Best stored profile for (n, p) with enough replicates, or None."""
    if not os.path.exists(path):
        return None
    groups = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if (int(row["n"]) == n and int(row["p"]) == p
                    and row["rng_version"] == RNG_VERSION
                    and int(row["replicates"]) >= min_replicates):
                key = (int(row["replicates"]), int(row["seed"]))
                groups.setdefault(key, []).append(row)
    best = None
    for (reps, seed), rows in groups.items():
        if len(rows) != min(n, p):
            continue
        rows.sort(key=lambda r: int(r["rank"]))
        prof = EigenNullProfile(
            n, p,
            np.array([float(r["mean"]) for r in rows]),
            np.array([float(r["sd"]) for r in rows]),
            reps, RngSeed(seed))
        if best is None or prof.replicates > best.replicates:
            best = prof
    return best


def eigen_null_profile_cached(n: int, p: int, replicates: int, seed=0,
                              cache_path=None, n_jobs: int = 1) -> EigenNullProfile:
    """Load a cached profile or simulate one and store it."""
    if cache_path:
        hit = load_profile(cache_path, n, p, min_replicates=replicates)
        if hit is not None:
            return hit
    profile = eigen_null_profile(n, p, replicates, seed, n_jobs=n_jobs)
    if cache_path:
        save_profile(cache_path, profile)
    return profile
