import json

import numpy as np
import pytest
from scipy import stats
from scipy.spatial.transform import Rotation

from condshap.errors import AlignmentError, ParameterError, ShapeError
from condshap.evaluation import (
    SCHEMA_VERSION,
    build_report,
    distance_to_center,
    mae,
    rank_agreement,
    spearman,
    spearman_permutation_pvalue,
    tukey_outliers,
)
from condshap.shapley_engine import Explanation
from oracles import spearman_bruteforce


def test_mae_examples():
    A = np.arange(12.0).reshape(3, 4)
    overall, per = mae(A, A)
    assert overall == 0.0 and np.all(per == 0.0)
    assert mae([[1.0, -1.0]], [[0.0, 0.0]])[1][0] == 1.0
    assert mae(A, A + 0.5)[0] == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ShapeError):
        mae(A, A[:2])


def test_mae_properties(rng):
    A, B, C = rng.normal(size=(3, 40, 8))
    ab, per_ab = mae(A, B)
    assert ab == mae(B, A)[0]
    assert abs(per_ab.mean() - ab) < 1e-12
    assert np.all(per_ab <= mae(A, C)[1] + mae(C, B)[1] + 1e-15)


def test_distance_examples(rng):
    train = rng.normal(size=(50, 3))
    train -= train.mean(axis=0)
    assert distance_to_center(train, np.zeros((1, 3)))[0] == pytest.approx(0.0, abs=1e-12)
    assert distance_to_center(train, [[1.0, 0.0, 0.0]])[0] == pytest.approx(1.0)
    with pytest.raises(ShapeError):
        distance_to_center(train, np.zeros((2, 4)))


def test_distance_translation_and_rotation(rng):
    train, test = rng.normal(size=(60, 3)), rng.normal(size=(10, 3))
    d = distance_to_center(train, test)
    for _ in range(20):
        shift = rng.normal(size=3) * 100
        np.testing.assert_allclose(distance_to_center(train + shift, test + shift), d, atol=1e-9)
        R = Rotation.random(random_state=rng).as_matrix()
        np.testing.assert_allclose(distance_to_center(train @ R.T, test @ R.T), d, atol=1e-9)


def test_spearman_examples():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert spearman(a, a) == pytest.approx(1.0)
    assert spearman(a, a[::-1]) == pytest.approx(-1.0)
    b = [1.0, 2.0, 4.0, 3.0]
    assert spearman(a, b) == pytest.approx(0.8, abs=1e-12)
    assert spearman_bruteforce(a, b) == pytest.approx(0.8, abs=1e-12)


def test_spearman_ties_match_bruteforce(rng):
    for _ in range(20):
        a = rng.integers(0, 5, size=15).astype(float)
        b = rng.integers(0, 5, size=15).astype(float)
        if np.ptp(a) and np.ptp(b):
            assert spearman(a, b) == pytest.approx(spearman_bruteforce(a, b), abs=1e-12)


def test_spearman_degenerate_input():
    assert np.isnan(spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
    with pytest.raises(ShapeError):
        spearman([1.0, 2.0], [1.0, 2.0])


def test_spearman_monotone_invariance(rng):
    a, b = rng.normal(size=(2, 30))
    r = spearman(a, b)
    assert spearman(np.exp(a), b ** 3) == pytest.approx(r, abs=1e-12)
    assert spearman(-a, b) == pytest.approx(-r, abs=1e-12)


def test_permutation_pvalue():
    x = np.arange(50.0)
    assert spearman_permutation_pvalue(x, x, n_perm=999) == pytest.approx(1e-3)
    p = spearman_permutation_pvalue(x, np.random.default_rng(3).permutation(x), n_perm=999)
    assert p > 0.01


def test_tukey_examples():
    assert list(tukey_outliers([1, 2, 3, 4, 100])) == [4]
    q1, q3 = np.quantile([1, 2, 3, 4, 100], [0.25, 0.75])
    assert (q1, q3) == (2.0, 4.0)
    assert stats.mstats.mquantiles([1, 2, 3, 4, 100], [0.25, 0.75], alphap=1, betap=1).tolist() == [2.0, 4.0]
    assert tukey_outliers(np.full(9, 3.3)).size == 0
    assert tukey_outliers(np.arange(1.0, 101.0)).size == 0
    with pytest.raises(ShapeError):
        tukey_outliers([1.0, 2.0, 3.0])


def test_rank_agreement_examples(rng):
    t = rng.normal(size=8)
    for k in range(1, 9):
        assert rank_agreement(t, t, k) == 1.0
        assert rank_agreement(t, -t, k) == 1.0
    assert rank_agreement([3, 2, 1, 0], [3, 0, 1, 2], 2) == 0.5
    for k in (0, 5):
        with pytest.raises(ParameterError):
            rank_agreement([3, 2, 1, 0], [3, 0, 1, 2], k)


def test_rank_agreement_ties_by_index():
    assert rank_agreement([1, 1, 1, 0], [0, 1, 1, 1], 2) == 0.5


def _explanations(phi, name, phi0=0.0):
    return [Explanation(phi0, row, i, name) for i, row in enumerate(phi)]


def test_report_exact_estimate(rng):
    phi = rng.normal(size=(12, 4))
    train, test = rng.normal(size=(30, 4)), rng.normal(size=(12, 4))
    truth = _explanations(phi, "truth")
    rep = build_report(truth, {"a": _explanations(phi, "a")}, train, test,
                       phi.sum(axis=1))
    assert rep.overall_mae["a"] == 0.0
    assert rep.outliers["a"].size == 0
    assert np.all(rep.rank_agreement["a"] == 1.0)


def test_report_identical_methods(rng, tmp_path):
    phi = rng.normal(size=(12, 4))
    est = phi + rng.normal(size=phi.shape) * 0.3
    train, test = rng.normal(size=(30, 4)), rng.normal(size=(12, 4))
    rep = build_report(_explanations(phi, "truth"),
                       {"a": _explanations(est, "a"), "b": _explanations(est, "b")},
                       train, test, rng.normal(size=12))
    assert rep.corr_methods[("a", "b")] == pytest.approx(1.0)
    assert abs(rep.per_instance_mae["a"].mean() - rep.overall_mae["a"]) < 1e-12
    for c in list(rep.corr_mae_distance.values()) + list(rep.corr_mae_pred_gap.values()):
        assert -1.0 <= c <= 1.0
    rep.write_per_instance_csv(tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0].startswith(f"# condshap per-instance schema v{SCHEMA_VERSION}: id,distance,")
    assert lines[1].split(",") == rep.per_instance_header() and len(lines) == 14
    rep.write_summary_json(tmp_path / "s.json")
    summary = json.loads((tmp_path / "s.json").read_text())
    assert summary["spearman_methods"]["a|b"] == pytest.approx(1.0)


def test_report_alignment(rng):
    phi = rng.normal(size=(5, 3))
    truth = _explanations(phi, "truth")
    shifted = [Explanation(0.0, e.phi, e.obs_id + 1, "a") for e in truth]
    with pytest.raises(AlignmentError):
        build_report(truth, {"a": shifted}, rng.normal(size=(9, 3)), rng.normal(size=(5, 3)), np.zeros(5))
    with pytest.raises(AlignmentError):
        build_report(truth, {"a": truth}, rng.normal(size=(9, 3)), rng.normal(size=(4, 3)), np.zeros(5))
