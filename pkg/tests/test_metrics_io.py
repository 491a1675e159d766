import json
import math

import numpy as np
import pytest
from sklearn.metrics import roc_auc_score

from gtfl0.errors import DataNotFound, DegenerateTruth, ZeroSignal
from gtfl0.io import read_labels_csv, read_matrix_csv, write_curve_csv, write_json, write_matrix_csv
from gtfl0.metrics import input_snr_db, misclassification, recon_snr_db, roc_curve, sigma2_for_snr


def test_input_snr_examples(rng):
    y = rng.standard_normal((20, 3))
    norm = np.linalg.norm(y)
    assert input_snr_db(y, norm / 60) == pytest.approx(0.0, abs=1e-12)
    assert input_snr_db(y, 0.1) - input_snr_db(y, 0.2) == pytest.approx(10 * math.log10(2))
    with pytest.raises(ZeroSignal):
        input_snr_db(np.zeros((3, 1)), 0.1)
    with pytest.raises(ValueError):
        input_snr_db(y, 0.0)


def test_sigma2_for_snr_inverts(rng):
    y = rng.standard_normal((30, 4))
    for snr in (-3.0, 6.0, 12.0):
        assert input_snr_db(y, sigma2_for_snr(y, snr)) == pytest.approx(snr)


def test_recon_snr_examples():
    y = np.zeros((4, 1))
    y[0] = 10.0
    b = y.copy()
    b[1] = 1.0
    assert recon_snr_db(y, b) == pytest.approx(10.0)
    assert recon_snr_db(y, np.zeros_like(y)) == pytest.approx(0.0)
    assert recon_snr_db(y, y) == math.inf


def test_roc_perfect_and_random():
    pts, auc = roc_curve([3.0, 2.0, 1.0, 0.0], [True, True, False, False])
    assert auc == 1.0
    assert pts[0].tolist() == [0.0, 0.0] and pts[-1].tolist() == [1.0, 1.0]
    rng = np.random.default_rng(0)
    _, auc = roc_curve(rng.random(10_000), rng.random(10_000) < 0.3)
    assert abs(auc - 0.5) <= 0.02


def test_roc_matches_sklearn_with_ties(rng):
    for _ in range(50):
        m = int(rng.integers(5, 300))
        truth = rng.random(m) < 0.4
        truth[:2] = [True, False]
        scores = rng.integers(0, 6, size=m).astype(float) + truth * rng.random()
        pts, auc = roc_curve(scores, truth)
        assert auc == pytest.approx(roc_auc_score(truth, scores), abs=1e-12)
        order = np.argsort(pts[:, 0], kind="stable")
        assert np.all(np.diff(pts[order, 1]) >= 0)


def test_roc_degenerate():
    with pytest.raises(DegenerateTruth):
        roc_curve([1.0, 2.0], [True, True])


def test_misclassification():
    assert misclassification([0, 1, 2, 2], [0, 1, 1, 1]) == 0.5
    assert misclassification([0, 1, 2, 2], [0, 1, 1, 1], mask=[True, True, False, False]) == 0.0


def test_matrix_csv_roundtrip(tmp_path, rng):
    a = rng.standard_normal((5, 3))
    path = tmp_path / "a.csv"
    write_matrix_csv(path, a)
    np.testing.assert_array_equal(read_matrix_csv(path), a)
    vec = tmp_path / "v.csv"
    write_matrix_csv(vec, a[:, 0])
    assert read_matrix_csv(vec).shape == (5, 1)


def test_csv_header_and_labels(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("label\n0\n-1\n2\n")
    assert read_labels_csv(path, header=True).tolist() == [0, -1, 2]
    with pytest.raises(DataNotFound):
        read_matrix_csv(tmp_path / "missing.csv")


def test_json_and_curve_writers(tmp_path):
    write_json(tmp_path / "r.json", {"b": 1, "a": [1.5]})
    text = (tmp_path / "r.json").read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.5], "b": 1}
    write_curve_csv(tmp_path / "c.csv", [[0.1, 1], [0.2, 2]], ["t", "e"])
    assert (tmp_path / "c.csv").read_text().splitlines() == ["t,e", "0.1,1", "0.2,2"]
