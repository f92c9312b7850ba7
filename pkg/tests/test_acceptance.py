"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete. Everything is seeded; reruns are bit-identical.
"""

import math
import time

import numpy as np
import pytest

from hicrit.arw import (ArwParams, detection_experiment, _mixture_scores,
                        _NULL_STREAMS)
from hicrit.calibrate import (empirical_quantile, gumbel_critical, simulate_critical,
                              simulate_null_scores)
from hicrit.covtest import (clique_test, eigen_hc_test, eigen_null_profile,
                            haar_orthogonal, make_clique_sigma, make_spiked_sigma,
                            sample_gaussian)
from hicrit.hc_core import (PValueSeries, berk_jones, hc_at_level, hc_plus, hc_star)
from hicrit.hct import LabeledMatrix, decision_scores, feature_zscores, train
from hicrit.numerics import RngSeed
from hicrit.pairhc import RankedPairs, corner_counts, pair_hc_components, pair_hc_star, \
    sample_bivariate_mixture
from hicrit.phase import classification_boundary, detection_boundary, ideal_fdr

import oracles


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num:02d} {name}: {status}" + (f" ({detail})" if detail else ""))


def test_criterion_01_tukey_example():
    got = hc_at_level(250, 0.05, 11)
    ok = abs(got - (-0.435)) <= 0.005
    report(1, "tukey-example", ok, f"hc = {got:.4f}, target -0.435 +- 0.005")
    assert ok


TABLE1_GUMBEL = {  # bracketed h_G values of the plus-variant rows
    (1_000, 0.05): 3.00, (5_000, 0.05): 3.08, (25_000, 0.05): 3.14, (125_000, 0.05): 3.19,
    (1_000, 0.01): 3.83, (5_000, 0.01): 3.87, (25_000, 0.01): 3.90, (125_000, 0.01): 3.93,
    (1_000, 0.005): 4.18, (5_000, 0.005): 4.20, (25_000, 0.005): 4.22, (125_000, 0.005): 4.24,
    (1_000, 0.001): 5.00, (5_000, 0.001): 4.98, (25_000, 0.001): 4.97, (125_000, 0.001): 4.97,
}


def test_criterion_02_gumbel_table():
    worst = 0.0
    for (n, alpha), ref in TABLE1_GUMBEL.items():
        diff = abs(round(gumbel_critical(n, alpha), 2) - ref)
        worst = max(worst, diff)
    ok = worst <= 0.01 + 1e-9
    report(2, "gumbel-closed-form-table", ok, f"16 values, worst |diff| = {worst:.3f}")
    assert ok


def test_criterion_03_simulated_critical_values():
    started = time.monotonic()
    plus = simulate_null_scores(1_000, "plus", 0.5, 100_000, seed=42)
    star = simulate_null_scores(1_000, "star", 0.5, 100_000, seed=42)
    targets = {0.05: 3.17, 0.01: 3.95, 0.005: 4.29, 0.001: 5.03}
    diffs = {a: empirical_quantile(plus, a) - ref for a, ref in targets.items()}
    star_q = empirical_quantile(star, 0.05)
    ok = all(abs(d) <= 0.1 for d in diffs.values()) and abs(star_q - 4.77) <= 0.15
    detail = (", ".join(f"plus@{a}: {targets[a] + d:.3f} (ref {targets[a]})"
                        for a, d in diffs.items())
              + f", star@0.05: {star_q:.3f} (ref 4.77), {time.monotonic() - started:.0f}s")
    report(3, "table1-monte-carlo", ok, detail)
    assert ok


def test_criterion_04_sparse_mixture_separation():
    started = time.monotonic()
    critical = simulate_critical(10 ** 6, 0.05, "plus", 0.5, replicates=1000,
                                 seed=RngSeed(2024, 1 << 21)).quantile
    summary = detection_experiment(10 ** 6, reps=100, alpha=0.05, variant="plus",
                                   seed=2024, epsilon=1e-3, tau=2.0, critical=critical)
    ok = summary.power >= 0.95
    detail = (f"power = {summary.power:.2f}, size = {summary.size:.2f}, "
              f"critical = {critical:.3f}, min(alt) > max(null): {summary.separated}, "
              f"{time.monotonic() - started:.0f}s")
    report(4, "mixture-detection-separation", ok, detail)
    assert ok


def test_criterion_05_oracle_equivalence():
    rng = np.random.default_rng(777)
    worst = 0.0
    for case in range(500):
        n = int(rng.integers(5, 201))
        values = np.sort(rng.uniform(1e-10, 1.0, n))
        if case % 7 == 0:
            values[-1] = 1.0  # exercise the p = 1 guard
        if case % 5 == 0:
            values[n // 2:n // 2 + 2] = values[n // 2]  # ties
        series = PValueSeries(values)
        alpha0 = float(rng.choice([0.2, 0.5, 1.0]))

        got = hc_star(series, alpha0)
        want, want_i = oracles.hc_star_brute(values.tolist(), alpha0)
        assert got.argmax_index == want_i
        worst = max(worst, abs(got.score - want) / max(abs(want), 1e-300))

        gp = hc_plus(series, alpha0)
        wp, wp_i = oracles.hc_plus_brute(values.tolist(), alpha0)
        if wp is None:
            assert gp.empty_range
        else:
            assert gp.argmax_index == wp_i
            worst = max(worst, abs(gp.score - wp) / max(abs(wp), 1e-300))

        gb = berk_jones(series)
        wb, wb_i, wb_excl = oracles.berk_jones_brute(values.tolist())
        assert gb.excluded == wb_excl
        if wb_i is not None:
            assert gb.argmax_index == wb_i
        worst = max(worst, abs(gb.score - wb) / max(abs(wb), 1e-300))
    ok = worst <= 1e-12
    report(5, "bruteforce-oracle-equivalence", ok,
           f"500 series, worst relative error = {worst:.2e}")
    assert ok


def test_criterion_06_phase_closed_forms():
    rng = np.random.default_rng(778)
    worst = 0.0
    for _ in range(1000):
        v = float(rng.uniform(0.5 + 1e-9, 1 - 1e-9))
        worst = max(worst, abs(detection_boundary(v) - float(oracles.phase_rho_oracle(v))))
        theta = float(rng.uniform(0.0, 0.6))
        vc = float(rng.uniform(1e-6, (1 - theta) * (1 - 1e-9)))
        worst = max(worst, abs(classification_boundary(vc, theta)
                               - float(oracles.phase_rho_theta_oracle(vc, theta))))
        rho_t = classification_boundary(vc, theta)
        r = float(rng.uniform(rho_t + 1e-6, 1.5))
        if min(abs(r - vc), abs(r - vc / 3.0)) > 1e-9:
            got = ideal_fdr(vc, r, theta)
            want_value, want_phase = oracles.phase_qideal_oracle(vc, r, theta)
            assert got.phase == want_phase
            worst = max(worst, abs(got.value - want_value))
    continuity = abs(detection_boundary(0.75) - (1.0 - math.sqrt(0.25)) ** 2)
    reduction_exact = all(classification_boundary(v, 0.0) == detection_boundary(v)
                          for v in np.linspace(0.51, 0.99, 200))
    ok = worst <= 1e-12 and continuity == 0.0 and reduction_exact
    report(6, "phase-closed-forms", ok,
           f"worst |diff| = {worst:.2e}, branch continuity exact: {continuity == 0.0}, "
           f"theta=0 reduction exact: {reduction_exact}")
    assert ok


def test_criterion_07_phase_empirical_crosscheck():
    started = time.monotonic()
    n = 100_000
    critical = simulate_critical(n, 0.05, "plus", 0.5, replicates=3000,
                                 seed=RngSeed(900, 1 << 21)).quantile
    above, below = [], []
    for vt in (0.55, 0.60, 0.65):
        r = detection_boundary(vt) + 0.25
        above.append(detection_experiment(ArwParams(n, vt, r), reps=100, alpha=0.05,
                                          variant="plus", seed=901, critical=critical).power)
    for vt in (0.80, 0.85, 0.90):
        r = detection_boundary(vt) - 0.25
        below.append(detection_experiment(ArwParams(n, vt, r), reps=100, alpha=0.05,
                                          variant="plus", seed=902, critical=critical).power)
    ok = all(p >= 0.9 for p in above) and all(p <= 0.15 for p in below)
    report(7, "phase-power-crosscheck", ok,
           f"power above boundary: {above}, below: {below}, "
           f"{time.monotonic() - started:.0f}s")
    assert ok


def test_criterion_08_clique_detection():
    started = time.monotonic()
    sigma = make_clique_sigma(400, 15, 0.2)
    scores = {("null", "pairwise"): [], ("null", "rowmax"): [],
              ("alt", "pairwise"): [], ("alt", "rowmax"): []}
    for s in range(100):
        x_null = sample_gaussian(200, np.eye(400), seed=RngSeed(81, s))
        x_alt = sample_gaussian(200, sigma, seed=RngSeed(82, s))
        for mode in ("pairwise", "rowmax"):
            scores[("null", mode)].append(clique_test(x_null, mode).score)
            scores[("alt", mode)].append(clique_test(x_alt, mode).score)

    sep = {}
    for mode in ("pairwise", "rowmax"):
        null = np.array(scores[("null", mode)])
        alt = np.array(scores[("alt", mode)])
        q95 = np.percentile(null, 95)
        # Median gap standardized by the mode's own null spread: the two modes
        # score different P-value collections (79800 vs 400), so raw units are
        # not comparable across modes.
        sep[mode] = {
            "exceeds": float(np.median(alt)) > float(q95),
            "gap": (np.median(alt) - np.median(null)) / (q95 - np.median(null)),
            "power": float(np.mean(alt > q95)),
        }
    ok = sep["pairwise"]["exceeds"] and sep["rowmax"]["gap"] < sep["pairwise"]["gap"]
    report(8, "clique-detection", ok,
           f"pairwise: median>q95 {sep['pairwise']['exceeds']}, std gap "
           f"{sep['pairwise']['gap']:.2f}, power {sep['pairwise']['power']:.2f}; "
           f"rowmax: std gap {sep['rowmax']['gap']:.2f}, power {sep['rowmax']['power']:.2f}; "
           f"{time.monotonic() - started:.0f}s")
    assert ok


def test_criterion_09_eigen_spike_detection():
    started = time.monotonic()
    profile = eigen_null_profile(300, 300, replicates=500, seed=930)
    sigma = make_spiked_sigma(300, 15, 0.5, seed=931)
    null_scores, alt_scores = [], []
    for s in range(100):
        x_null = RngSeed(932, s).generator().standard_normal((300, 300))
        x_alt = sample_gaussian(300, sigma, seed=RngSeed(933, s))
        null_scores.append(eigen_hc_test(x_null, profile).score)
        alt_scores.append(eigen_hc_test(x_alt, profile).score)
    q95 = np.percentile(null_scores, 95)
    med = float(np.median(alt_scores))
    ok = med > q95
    report(9, "eigen-spike-detection", ok,
           f"alt median = {med:.2f} vs null q95 = {q95:.2f}, "
           f"{time.monotonic() - started:.0f}s")
    assert ok


def test_criterion_10_pair_detection():
    started = time.monotonic()
    null_scores, alt_scores = [], []
    for s in range(100):
        x, y = sample_bivariate_mixture(1000, 0.0, 0.0, 0.0, seed=RngSeed(940, s))
        null_scores.append(pair_hc_star(RankedPairs.from_data(x, y)).score)
        x, y = sample_bivariate_mixture(1000, 0.05, 1.0, 0.25, seed=RngSeed(941, s))
        alt_scores.append(pair_hc_star(RankedPairs.from_data(x, y)).score)
    q95 = np.percentile(null_scores, 95)
    med = float(np.median(alt_scores))
    ok = med > q95
    report(10, "correlated-pairs-detection", ok,
           f"alt median = {med:.2f} vs null q95 = {q95:.2f}, "
           f"{time.monotonic() - started:.0f}s")
    assert ok


def test_criterion_11_null_size_suite():
    started = time.monotonic()
    sizes = {}

    cal = simulate_null_scores(5000, "plus", 0.5, 20_000, seed=910)
    thr = empirical_quantile(cal, 0.05)
    fresh = _mixture_scores(5000, 0.0, 0.0, "plus", 0.5, 2000, 911, _NULL_STREAMS, 1)
    sizes["hc_plus"] = float(np.mean(fresh > thr))

    def clique_null(seed, reps):
        return np.array([clique_test(RngSeed(seed, s).generator()
                                     .standard_normal((60, 100)), "pairwise").score
                         for s in range(reps)])
    thr = empirical_quantile(clique_null(920, 2000), 0.05)
    sizes["clique"] = float(np.mean(clique_null(921, 1000) > thr))

    profile = eigen_null_profile(80, 80, replicates=500, seed=930)

    def eig_null(seed, reps):
        return np.array([eigen_hc_test(RngSeed(seed, s).generator()
                                       .standard_normal((80, 80)), profile).score
                         for s in range(reps)])
    thr = empirical_quantile(eig_null(931, 2000), 0.05)
    sizes["eigen"] = float(np.mean(eig_null(932, 1000) > thr))

    def pair_null(seed, reps):
        out = np.empty(reps)
        for s in range(reps):
            g = RngSeed(seed, s).generator()
            out[s] = pair_hc_star(RankedPairs.from_data(
                g.standard_normal(400), g.standard_normal(400))).score
        return out
    thr = empirical_quantile(pair_null(940, 2000), 0.05)
    sizes["pairhc"] = float(np.mean(pair_null(941, 1000) > thr))

    ok = all(abs(v - 0.05) <= 0.03 for v in sizes.values())
    report(11, "null-size-suite", ok,
           ", ".join(f"{k} = {v:.3f}" for k, v in sizes.items())
           + f" (target 0.05 +- 0.03), {time.monotonic() - started:.0f}s")
    assert ok


def test_criterion_12_invariance_suite():
    started = time.monotonic()
    rng = np.random.default_rng(950)

    # (a) permutation invariance of P-value ingestion, 100 cases
    for _ in range(100):
        raw = rng.uniform(1e-8, 1.0, int(rng.integers(5, 120)))
        a = PValueSeries.from_unsorted(raw)
        b = PValueSeries.from_unsorted(rng.permutation(raw))
        assert hc_star(a).score == hc_star(b).score
        assert hc_plus(a).score == hc_plus(b).score
        assert berk_jones(a).score == berk_jones(b).score

    # (b) label-swap antisymmetry of HCT, 100 cases
    for _ in range(100):
        n, p = 20, int(rng.integers(20, 80))
        labels = np.repeat([1, -1], n // 2)
        data = rng.standard_normal((n, p))
        data[:n // 2, :5] += rng.uniform(0.5, 2.0)
        m = LabeledMatrix(data, labels)
        mswap = LabeledMatrix(data, -labels)
        z, zs = feature_zscores(m), feature_zscores(mswap)
        np.testing.assert_array_equal(zs.standardized, -z.standardized)
        model, model_swap = train(m), train(mswap)
        assert model_swap.threshold == model.threshold
        np.testing.assert_array_equal(model_swap.weights, -model.weights)
        sample = rng.standard_normal(p)
        score = decision_scores(model, sample)[0]
        if score != 0.0:
            assert np.sign(decision_scores(model_swap, sample)[0]) == -np.sign(score)

    # (c) rank/monotone invariance of pairHC, 100 cases
    transforms = [np.exp, lambda v: v ** 3, lambda v: 5 * v - 2, np.arctan,
                  lambda v: np.expm1(v) + v]
    for _ in range(100):
        n = int(rng.integers(20, 200))
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        base_pairs = RankedPairs.from_data(x, y)
        base = pair_hc_star(base_pairs)
        fx = transforms[int(rng.integers(len(transforms)))]
        fy = transforms[int(rng.integers(len(transforms)))]
        pairs = RankedPairs.from_data(fx(x), fy(y))
        np.testing.assert_array_equal(corner_counts(pairs), corner_counts(base_pairs))
        res = pair_hc_star(pairs)
        assert res.score == base.score and res.argmax_index == base.argmax_index

    # (d) orthogonal invariance of eigenHC, 100 cases
    profile = eigen_null_profile(30, 30, replicates=100, seed=951)
    for case in range(100):
        x = rng.standard_normal((30, 30))
        base = eigen_hc_test(x, profile)
        q = haar_orthogonal(30, seed=RngSeed(952, case))
        rotated = eigen_hc_test(x @ q, profile)
        np.testing.assert_allclose(rotated.components, base.components, atol=1e-8)
        assert abs(rotated.score - base.score) <= 1e-8

    report(12, "invariance-suite", True,
           f"4 invariances x 100 random cases, {time.monotonic() - started:.0f}s")


@pytest.mark.skip(reason="optional: requires downloading the external microarray "
                         "datasets (lung cancer, leukemia); all other criteria "
                         "run offline")
def test_criterion_13_microarray_datasets():
    report(13, "microarray-worked-examples", False, "skipped: external data")
