import math

import numpy as np
import pytest

import crlm


def brute_rand(a, b):
    n = len(a)
    agree = sum((a[i] == a[j]) == (b[i] == b[j]) for i in range(n) for j in range(i + 1, n))
    return agree / (n * (n - 1) / 2)


def test_loss_matches_closed_form():
    cfg = crlm.LossConfig(4.0, 2.0)
    x = np.array([1.0, -2.0, 0.5])
    expected = min(float(x @ x) / (3 * 4.0) - 4.0, 0.0)
    assert crlm.robust_loss(x, cfg) == pytest.approx(expected, rel=1e-15)
    assert crlm.robust_loss(np.full(3, 100.0), cfg) == 0.0


def test_generate_and_cluster_recovers_truth():
    cfg = crlm.LossConfig(4.0, 10.0)
    spec = crlm.default_experiment_spec(3, 50, [1.0, 2.0, 3.0], 0.05, cfg)
    x, labels = crlm.sample_gmmub(spec, 2000, 3)
    assert x.shape == (2000, 50)
    res = crlm.crlm(x, 3, cfg)
    assert len(res.clusters) == 3
    assert crlm.f_measure_avg(labels, res.assignment, 3) == 1.0
    assert crlm.rand_index(labels, res.assignment) == 1.0
    centers = np.array([c.center for c in res.clusters])
    labels = np.asarray(labels)
    supervised = np.array([x[labels == j].mean(axis=0) for j in (1, 2, 3)])
    assert crlm.mean_center_error(spec.means, centers) == pytest.approx(
        crlm.mean_center_error(spec.means, supervised), rel=1e-12)


def test_rand_index_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        a = rng.integers(0, 4, n).tolist()
        b = rng.integers(0, 5, n).tolist()
        assert crlm.rand_index(a, b) == brute_rand(a, b)


def test_sigma_estimates_and_bounds():
    cfg = crlm.LossConfig(4.0, 11.0)
    spec = crlm.default_experiment_spec(3, 300, [1.0, 3.0, 5.0], 0.05, cfg)
    x, _ = crlm.sample_gmmub(spec, 1500, 1)
    est = crlm.estimate_sigmas(x)
    assert len(est.peaks) == 3
    for p, s in zip(est.peaks, [1.0, 3.0, 5.0]):
        assert abs(p / s - 1) < 0.1

    one = crlm.GmmubSpec()
    one.k, one.d, one.ball_scale = 1, 500, 100.0
    one.weights = [0.01, 0.99]
    one.means = np.zeros((1, 500))
    one.sigmas = [1.0]
    b = crlm.success_prob_cor1(one, crlm.LossConfig(4.0, 10.0), 1e99)
    assert b["value"] >= 0.9999
    assert all(not math.isnan(t) for t in b["log_terms"])


def test_invalid_input_raises():
    with pytest.raises(ValueError):
        crlm.LossConfig(0.5, 1.0)
    with pytest.raises(ValueError):
        crlm.rand_index([1, 2], [1])
