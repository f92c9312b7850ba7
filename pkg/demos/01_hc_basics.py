"""
Higher Criticism basics
=======================

Second-level significance testing: given N P-values, is the whole body of
tests consistent with a global null? Tukey's original score asks this at a
single significance level; HC maximizes the standardized excess over all
levels at once.
"""

import numpy as np

from hicrit import (avg_likelihood_ratio, berk_jones, hc_at_level, hc_components,
                    hc_plus, hc_star)
from hicrit.arw import pvalues_one_sided

# Tukey's story: 250 tests, 11 significant at the 5% level. Sounds exciting,
# but the null already expects 12.5 of them.
score = hc_at_level(250, 0.05, 11)
print(f"Tukey's second-level score: {score:.2f}  (negative: 11 < 12.5 expected)")

# The HC statistic scans all levels. On a pure null the components hover
# around zero; a sparse contamination lifts a contiguous stretch.
rng = np.random.default_rng(0)
z = rng.standard_normal(10_000)
z[:60] += 2.5  # 0.6% of coordinates get a weak shift
series = pvalues_one_sided(z)

plus = hc_plus(series, alpha0=0.5)
star = hc_star(series, alpha0=0.5)
print(f"\nsparse-mixture series (N = {series.n}):")
print(f"  HC+ = {plus.score:.2f} at order statistic i = {plus.argmax_index}")
print(f"  HC* = {star.score:.2f} at i = {star.argmax_index}")

null_series = pvalues_one_sided(rng.standard_normal(10_000))
print(f"  pure-null HC+ = {hc_plus(null_series).score:.2f}  (compare ~3.2 critical value)")

# The component trace is what the classic three-panel illustration plots:
# HC component versus i/N, peaking where the evidence concentrates.
comp = hc_components(series)
top = np.argsort(comp[:5000])[::-1][:3]
print("\nlargest components (i, p_(i), component):")
for i in sorted(top):
    print(f"  {i + 1:5d}  {series.values[i]:.2e}  {comp[i]:6.2f}")

# Cousins from the same family: Berk-Jones maximizes a KL divergence instead
# of a z-score; ALR integrates likelihood ratios instead of maximizing.
bj = berk_jones(series)
print(f"\nBerk-Jones = {bj.score:.2f} at i = {bj.argmax_index}")
print(f"log ALR    = {avg_likelihood_ratio(series, alpha0=0.5):.2f} "
      f"(null reference ~ {avg_likelihood_ratio(null_series, alpha0=0.5):.2f})")
