"""Smoke tests for the psplab python module."""

import numpy as np
import pytest

import psplab


def _toy_instance(seed, m=60, n=80, k=3):
    rng = np.random.default_rng(seed)
    target = rng.uniform(size=(m, k))
    holdout = rng.uniform(size=(n, k))
    truth = rng.integers(1, k + 1, size=n).tolist()
    pre_t = psplab.argmax_preclassify(target, seed=1)
    pre_h = psplab.argmax_preclassify(holdout, seed=2)
    return target, holdout, pre_t, pre_h, truth


def test_validate_partition_raises_on_overlap():
    psplab.validate_partition([[1, 2], [3]], [0.1, 0.1], 3)
    with pytest.raises(psplab.PspError):
        psplab.validate_partition([[1, 2], [2, 3]], [0.1, 0.1], 3)


def test_argmax_preclassify_is_deterministic():
    scores = np.full((100, 2), 0.5)
    a = psplab.argmax_preclassify(scores, seed=7)
    b = psplab.argmax_preclassify(scores, seed=7)
    assert a == b
    assert set(a) <= {1, 2}


def test_psp_run_decisions_are_zero_or_prelabel():
    target, holdout, pre_t, pre_h, truth = _toy_instance(0)
    out = psplab.psp_run(target, holdout, pre_t, pre_h, truth,
                         groups=[[1, 2, 3]], alphas=[0.2])
    assert len(out["decisions"]) == target.shape[0]
    for dec, pre in zip(out["decisions"], out["pre_labels"]):
        assert dec in (0, pre)
    assert len(out["thresholds"]) == 1
    # exact fractions accompany the float p-values
    num, den = out["values_exact"][0]
    assert abs(num / den - out["values"][0]) < 1e-12


def test_epsp_run_matches_psp_run_at_equal_levels():
    target, holdout, pre_t, pre_h, truth = _toy_instance(1)
    groups = [[1], [2, 3]]
    alphas = [0.2, 0.3]
    p = psplab.psp_run(target, holdout, pre_t, pre_h, truth, groups=groups, alphas=alphas)
    e = psplab.epsp_run(target, holdout, pre_t, pre_h, truth, groups=groups, alphas=alphas)
    assert p["decisions"] == e["decisions"]


def test_gmm_posterior_rows_sum_to_one():
    means = np.array([[0.0, 0.0], [2.0, 2.0]])
    x = np.random.default_rng(3).normal(size=(50, 2))
    post = psplab.gmm_posterior([0.5, 0.5], means, x)
    assert np.allclose(post.sum(axis=1), 1.0, atol=1e-12)
    assert (post > 0).all()


def test_train_softmax_learns_separated_blobs():
    rng = np.random.default_rng(4)
    x1 = rng.normal(loc=-3.0, size=(100, 2))
    x2 = rng.normal(loc=3.0, size=(100, 2))
    x = np.vstack([x1, x2])
    y = [1] * 100 + [2] * 100
    model = psplab.train_softmax(x, y, K=2, epochs=200)
    scores = model.scores(x)
    labels = psplab.argmax_preclassify(scores, seed=0)
    accuracy = np.mean([lab == t for lab, t in zip(labels, y)])
    assert accuracy >= 0.99
    assert model.loss_history[-1] <= model.loss_history[0]


def test_select_subjects_and_informative_sets():
    rng = np.random.default_rng(5)
    target_mu = rng.uniform(size=40).tolist()
    holdout_mu = rng.uniform(size=60).tolist()
    in_region = (rng.uniform(size=60) < 0.5).tolist()
    sel = psplab.select_subjects(target_mu, holdout_mu, in_region, alpha=0.2)
    assert set(sel["selected"]) <= set(range(40))

    scores_t = rng.dirichlet(np.ones(4), size=30)
    scores_h = rng.dirichlet(np.ones(4), size=50)
    labels = rng.integers(1, 5, size=50).tolist()
    sets = psplab.informative_sets(scores_t, scores_h, labels, L=2, alpha=0.2)
    assert all(len(s) <= 2 for s in sets["sets"])


def test_metrics_match_hand_counts():
    assert psplab.group_fdp([1, 1, 0], [1, 2, 1], [1]) == 0.5
    assert psplab.overall_power([1, 0, 2], [1, 2, 2]) == pytest.approx(2 / 3)
    assert psplab.classwise_power([2, 2, 0], [2, 2, 2], 2) == pytest.approx(2 / 3)


def test_run_experiment_smoke():
    out = psplab.run_experiment(K=2, n0=20, reps=3, seed=11, alphas=[0.1, 0.2],
                                preset="overall", scores="oracle")
    assert out["nondegradation_violations"] == 0
    assert len(out["rows"]) == 2
    row = out["rows"][0]
    assert row["method"] == "psp"
    assert 0.0 <= row["groups"][0]["fdr"] <= 1.0
