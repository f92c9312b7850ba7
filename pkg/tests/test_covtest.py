import numpy as np
import pytest
from scipy.stats import kstest

from hicrit.covtest import (EigenNullProfile, clique_test, correlation_summary,
                            eigen_hc_test, eigen_null_profile, eigen_null_profile_cached,
                            haar_orthogonal, load_profile, make_clique_sigma,
                            make_spiked_sigma, pairwise_pvalue, rowmax_cdf, rowmax_pvalue,
                            sample_gaussian, save_profile)
from hicrit.errors import InvalidInputError
from hicrit.numerics import RngSeed

# mpmath: P(t_4 >= 2*0.5/sqrt(0.75)) = 5/32 exactly.
SF_T4 = 0.15625


def test_pairwise_pvalue_examples():
    assert pairwise_pvalue(0.0, 5, side="upper") == 0.5
    assert pairwise_pvalue(0.5, 5, side="upper") == pytest.approx(SF_T4, rel=1e-10)
    upper = pairwise_pvalue(0.3, 10, side="upper")
    assert pairwise_pvalue(0.3, 10, side="two") == pytest.approx(2 * upper, rel=1e-12)
    # |rho| = 1 clamps instead of failing
    assert pairwise_pvalue(1.0, 5, side="upper") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidInputError):
        pairwise_pvalue(0.5, 2)


def test_pairwise_pvalues_uniform_under_null():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((500, 150))  # 11175 pairs
    summary = correlation_summary(X)
    pvals = pairwise_pvalue(summary.pairwise, summary.n, side="upper")
    assert kstest(pvals, "uniform").statistic <= 0.02


def test_rowmax_examples():
    # p = 2 reduces to the single-pair CDF
    assert rowmax_cdf(0.3, 10, 2) == pytest.approx(
        1.0 - pairwise_pvalue(0.3, 10, side="upper"), rel=1e-12)
    assert rowmax_cdf(0.0, 10, 3) == pytest.approx(0.25, rel=1e-12)
    assert rowmax_pvalue(0.0, 10, 3) == pytest.approx(0.75, rel=1e-12)


def test_rowmax_pvalues_uniform_under_null():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((500, 1000))
    summary = correlation_summary(X)
    pvals = rowmax_pvalue(summary.rowmax, summary.n, summary.p)
    assert kstest(pvals, "uniform").statistic <= 0.05


def test_correlation_summary_shapes_and_errors():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((20, 6))
    summary = correlation_summary(X)
    assert summary.pairwise.size == 15
    assert summary.rowmax.size == 6
    assert np.all(np.abs(summary.pairwise) < 1.0)
    X[:, 3] = 7.0
    with pytest.raises(InvalidInputError):
        correlation_summary(X)


def test_make_clique_sigma():
    np.testing.assert_array_equal(make_clique_sigma(5, 1, 0.0), np.eye(5))
    sigma = make_clique_sigma(5, 3, 0.25)
    eigs = np.sort(np.linalg.eigvalsh(sigma[:3, :3]))
    np.testing.assert_allclose(eigs, [0.75, 0.75, 1.5], rtol=1e-12)
    assert sigma[3, 3] == 1.0 and sigma[0, 3] == 0.0
    with pytest.raises(InvalidInputError):
        make_clique_sigma(5, 3, -0.6)  # 1 + 2a < 0
    with pytest.raises(InvalidInputError):
        make_clique_sigma(5, 6, 0.1)


def test_clique_test_modes_run():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((50, 30))
    pw = clique_test(X, mode="pairwise")
    rm = clique_test(X, mode="rowmax")
    assert np.isfinite(pw.score) and np.isfinite(rm.score)
    with pytest.raises(InvalidInputError):
        clique_test(X, mode="bogus")


def test_clique_test_permutation_invariance():
    rng = np.random.default_rng(4)
    X = sample_gaussian(60, make_clique_sigma(20, 5, 0.4), seed=9)
    base_pw = clique_test(X, mode="pairwise").score
    base_rm = clique_test(X, mode="rowmax").score
    for seed in range(5):
        perm = np.random.default_rng(seed).permutation(20)
        assert clique_test(X[:, perm], mode="pairwise").score == pytest.approx(
            base_pw, rel=1e-12)
        assert clique_test(X[:, perm], mode="rowmax").score == pytest.approx(
            base_rm, rel=1e-12)


def test_clique_detection_quick():
    # A strong clique separates from null scores even at small scale.
    sigma = make_clique_sigma(60, 10, 0.5)
    null_scores = [clique_test(sample_gaussian(80, np.eye(60), seed=s)).score
                   for s in range(30)]
    alt_scores = [clique_test(sample_gaussian(80, sigma, seed=1000 + s)).score
                  for s in range(30)]
    assert np.median(alt_scores) > np.percentile(null_scores, 95)


# --------------------------------------------------------------------------- eigen


def test_eigen_profile_properties():
    profile = eigen_null_profile(200, 200, replicates=100, seed=5)
    assert profile.m == 200
    assert np.all(np.diff(profile.means) < 0)  # strictly decreasing ranks
    assert np.all(profile.sds > 0)
    # Marchenko-Pastur support [0, 4] at aspect ratio 1
    assert 3.5 <= profile.means[0] <= 4.5
    assert profile.means[-1] < 0.1
    assert abs(profile.means.sum() - 200) <= 2.0  # trace conservation within 1%


def test_eigen_profile_rectangular():
    profile = eigen_null_profile(40, 100, replicates=100, seed=6)
    assert profile.m == 40
    # E trace(X'X/n) = p
    assert abs(profile.means.sum() - 100) <= 3.0


def test_eigen_hc_zero_when_matching_profile():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((30, 20))
    from hicrit.covtest import _sorted_eigenvalues
    eigs = _sorted_eigenvalues(X)
    profile = EigenNullProfile(30, 20, eigs, np.ones(20), 100, RngSeed(0))
    res = eigen_hc_test(X, profile)
    assert res.score == 0.0
    np.testing.assert_allclose(res.components, 0.0, atol=1e-12)


def test_eigen_hc_dimension_mismatch():
    profile = eigen_null_profile(30, 20, replicates=100, seed=8)
    with pytest.raises(InvalidInputError):
        eigen_hc_test(np.zeros((30, 21)), profile)


def test_eigen_orthogonal_invariance_quick():
    rng = np.random.default_rng(9)
    profile = eigen_null_profile(40, 40, replicates=100, seed=10)
    X = rng.standard_normal((40, 40))
    base = eigen_hc_test(X, profile)
    q = haar_orthogonal(40, seed=11)
    rotated = eigen_hc_test(X @ q, profile)
    np.testing.assert_allclose(rotated.components, base.components, atol=1e-8)


def test_make_spiked_sigma():
    np.testing.assert_array_equal(make_spiked_sigma(10, 0, 0.7, seed=0), np.eye(10))
    sigma = make_spiked_sigma(30, 4, 0.5, seed=1)
    np.testing.assert_allclose(sigma, sigma.T, atol=1e-14)
    eigs = np.sort(np.linalg.eigvalsh(sigma))[::-1]
    np.testing.assert_allclose(eigs[:4], 1.5, atol=1e-10)
    np.testing.assert_allclose(eigs[4:], 1.0, atol=1e-10)
    with pytest.raises(InvalidInputError):
        make_spiked_sigma(10, 10, 0.5)
    with pytest.raises(InvalidInputError):
        make_spiked_sigma(10, 2, -1.5)


def test_haar_orthogonal_deterministic():
    a = haar_orthogonal(15, seed=3)
    b = haar_orthogonal(15, seed=3)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a @ a.T, np.eye(15), atol=1e-12)


def test_profile_cache_roundtrip(tmp_path):
    path = str(tmp_path / "profiles.csv")
    profile = eigen_null_profile(12, 8, replicates=100, seed=13)
    save_profile(path, profile)
    loaded = load_profile(path, 12, 8, min_replicates=100)
    np.testing.assert_array_equal(loaded.means, profile.means)
    np.testing.assert_array_equal(loaded.sds, profile.sds)
    assert load_profile(path, 12, 8, min_replicates=500) is None
    assert load_profile(path, 13, 8) is None
    # cached helper: second call must not resimulate (identical object data)
    again = eigen_null_profile_cached(12, 8, 100, seed=99, cache_path=path)
    np.testing.assert_array_equal(again.means, profile.means)


def test_profile_determinism_and_jobs():
    a = eigen_null_profile(15, 10, replicates=128, seed=14)
    b = eigen_null_profile(15, 10, replicates=128, seed=14, n_jobs=2)
    np.testing.assert_array_equal(a.means, b.means)
    np.testing.assert_array_equal(a.sds, b.sds)
