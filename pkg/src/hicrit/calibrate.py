"""Critical values h(N, alpha) for HC level-alpha testing.

Two routes: the Gumbel-limit closed form (cheap, accurate for the plus
variant at large N) and seeded Monte Carlo under the uniform null (the
reference, reproducing the usual simulated tables). Simulated quantiles are
persisted in a small CSV cache so they are paid for once.

Simulation is partitioned into fixed-size replicate blocks, each owning an
independent counter-based RNG stream, so results are bit-identical no matter
how many worker processes are used.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import CacheMissError, InvalidInputError
from .hc_core import PValueSeries, hc_plus, hc_scores_sorted_batch, hc_star
from .numerics import RNG_VERSION, RngSeed

__all__ = [
    "CriticalValueEntry",
    "gumbel_critical",
    "simulate_null_scores",
    "simulate_critical",
    "empirical_quantile",
    "critical_value",
    "level_alpha_test",
    "load_cache",
    "append_cache_entry",
]

# Replicates per RNG stream; fixed so the stream layout (and therefore every
# simulated score) does not depend on the worker count.
STREAM_BLOCK = 512

# Cap on elements materialized per batch inside one stream (~100 MB).
_BATCH_ELEMS = 12_500_000

CACHE_HEADER = ["N", "alpha", "variant", "alpha0", "replicates", "seed", "rng_version", "quantile"]


@dataclass(frozen=True)
class CriticalValueEntry:
    """One immutable cache record: parameters in, simulated quantile out."""

    N: int
    alpha: float
    variant: str
    alpha0: float
    replicates: int
    seed: RngSeed
    quantile: float
    rng_version: str = RNG_VERSION


def gumbel_critical(N: int, alpha: float) -> float:
    """Closed-form h_G(N, alpha) from the Gumbel limit of the HC null.

    h_G = [c_N - log log(1/(1-alpha))] / b_N with b_N = sqrt(2 log log N) and
    c_N = 2 log log N + (1/2)[log log log N - log(4 pi)].
    """
    if N < 16:
        raise InvalidInputError(f"N must be >= 16 for the iterated logarithms, got {N}")
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    ll = math.log(math.log(N))
    b = math.sqrt(2.0 * ll)
    c = 2.0 * ll + 0.5 * (math.log(ll) - math.log(4.0 * math.pi))
    return (c - math.log(math.log(1.0 / (1.0 - alpha)))) / b


def _stream_scores(args) -> np.ndarray:
    N, variant, alpha0, reps, seed, stream_id = args
    rng = RngSeed(seed, stream_id).generator()
    out = np.empty(reps)
    batch = max(1, _BATCH_ELEMS // N)
    done = 0
    while done < reps:
        b = min(batch, reps - done)
        p = rng.random((b, N))
        p.sort(axis=-1)
        # rng.random lives in [0, 1): shift exact zeros up to the clamp floor.
        np.maximum(p, 1e-300, out=p)
        out[done:done + b] = hc_scores_sorted_batch(p, variant, alpha0)
        done += b
    return out


def simulate_null_scores(N: int, variant: str = "plus", alpha0: float = 0.5,
                         replicates: int = 10_000, seed: int | RngSeed = 0,
                         n_jobs: int = 1) -> np.ndarray:
    """HC scores of ``replicates`` independent uniform null series of size N.

    Deterministic for a given seed, independently of n_jobs: replicates are
    split into STREAM_BLOCK-sized chunks with one Philox stream each.
    """
    if replicates < 1:
        raise InvalidInputError(f"replicates must be positive, got {replicates}")
    base = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    tasks = []
    stream_id, left = base.stream_id, replicates
    while left > 0:
        reps = min(STREAM_BLOCK, left)
        tasks.append((N, variant, alpha0, reps, base.seed, stream_id))
        stream_id += 1
        left -= reps
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_stream_scores, tasks, chunksize=1))
    else:
        parts = [_stream_scores(t) for t in tasks]
    return np.concatenate(parts)


def empirical_quantile(scores: np.ndarray, alpha: float) -> float:
    """(1-alpha) quantile as the order statistic at ceil((1-alpha)*R)."""
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    s = np.sort(np.asarray(scores, dtype=float))
    r = s.size
    idx = int(math.ceil((1.0 - alpha) * r - 1e-9))
    return float(s[min(max(idx, 1), r) - 1])


def simulate_critical(N: int, alpha: float, variant: str = "plus", alpha0: float = 0.5,
                      replicates: int = 100_000, seed: int | RngSeed = 0,
                      n_jobs: int = 1) -> CriticalValueEntry:
    """Monte Carlo critical value: empirical (1-alpha) null quantile."""
    if replicates < 100:
        raise InvalidInputError(f"need replicates >= 100, got {replicates}")
    base = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    scores = simulate_null_scores(N, variant, alpha0, replicates, base, n_jobs=n_jobs)
    q = empirical_quantile(scores, alpha)
    return CriticalValueEntry(N, float(alpha), variant, float(alpha0), replicates, base, q)


# ---------------------------------------------------------------------------
# Cache file: CSV, append-by-rewrite with atomic replace.

def load_cache(path) -> list[CriticalValueEntry]:
    if not os.path.exists(path):
        return []
    entries = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            entries.append(CriticalValueEntry(
                N=int(row["N"]),
                alpha=float(row["alpha"]),
                variant=row["variant"],
                alpha0=float(row["alpha0"]),
                replicates=int(row["replicates"]),
                seed=RngSeed(int(row["seed"])),
                quantile=float(row["quantile"]),
                rng_version=row["rng_version"],
            ))
    return entries


def _write_cache(path, entries) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CACHE_HEADER)
            for e in entries:
                w.writerow([e.N, repr(e.alpha), e.variant, repr(e.alpha0),
                            e.replicates, e.seed.seed, e.rng_version, repr(e.quantile)])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def append_cache_entry(path, entry: CriticalValueEntry) -> None:
    entries = load_cache(path)
    entries.append(entry)
    _write_cache(path, entries)


def _cache_lookup(entries, N, alpha, variant, alpha0, min_replicates):
    for e in entries:
        if (e.N == N and e.alpha == alpha and e.variant == variant
                and e.alpha0 == alpha0 and e.replicates >= min_replicates
                and e.rng_version == RNG_VERSION):
            return e
    return None


def critical_value(N: int, alpha: float, variant: str = "plus", policy: str = "gumbel_fallback",
                   alpha0: float = 0.5, replicates: int = 10_000, seed: int | RngSeed = 0,
                   cache_path: Optional[str] = None, n_jobs: int = 1) -> float:
    """Resolve a critical value through the cache.

    policy 'cache_only' raises CacheMissError on a miss; 'simulate_if_missing'
    simulates, stores, and returns; 'gumbel_fallback' returns the closed form
    on a miss without touching the cache. Hits require an exact
    (N, alpha, variant, alpha0) match with at least ``replicates`` stored
    replicates under the current RNG version.
    """
    if policy not in ("cache_only", "simulate_if_missing", "gumbel_fallback"):
        raise InvalidInputError(f"unknown policy {policy!r}")
    entries = load_cache(cache_path) if cache_path else []
    hit = _cache_lookup(entries, N, float(alpha), variant, float(alpha0), replicates)
    if hit is not None:
        return hit.quantile
    if policy == "cache_only":
        raise CacheMissError(
            f"no cached critical value for N={N} alpha={alpha} variant={variant} "
            f"alpha0={alpha0} replicates>={replicates}")
    if policy == "gumbel_fallback":
        return gumbel_critical(N, alpha)
    entry = simulate_critical(N, alpha, variant, alpha0, replicates, seed, n_jobs=n_jobs)
    if cache_path:
        append_cache_entry(cache_path, entry)
    return entry.quantile


def level_alpha_test(series: PValueSeries, critical, variant: str = "plus",
                     alpha0: float = 0.5) -> str:
    """Reject iff the chosen HC statistic strictly exceeds the critical value.

    ``critical`` may be a float or a CriticalValueEntry; an entry whose N does
    not match the series is refused.
    """
    if isinstance(critical, CriticalValueEntry):
        if critical.N != len(series):
            raise InvalidInputError(
                f"critical value was simulated for N={critical.N}, series has N={len(series)}")
        variant = critical.variant
        alpha0 = critical.alpha0
        threshold = critical.quantile
    else:
        threshold = float(critical)
    stat = hc_star(series, alpha0) if variant == "star" else hc_plus(series, alpha0)
    return "reject" if stat.score > threshold else "retain"
