"""Signal-to-noise ratios and ROC analysis for boundary-edge recovery."""
from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateTruth, ZeroSignal


def input_snr_db(y_star, sigma2: float) -> float:
    """``10 log10(||Y*|| / (sigma^2 n d))`` with the Frobenius norm (not squared)."""
    y = np.atleast_2d(np.asarray(y_star, dtype=float).T).T
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    norm = float(np.linalg.norm(y))
    if norm == 0.0:
        raise ZeroSignal("ground-truth signal is identically zero")
    n, d = y.shape
    return 10.0 * math.log10(norm / (sigma2 * n * d))


def sigma2_for_snr(y_star, snr_db: float) -> float:
    """Noise variance at which :func:`input_snr_db` equals ``snr_db``."""
    y = np.atleast_2d(np.asarray(y_star, dtype=float).T).T
    norm = float(np.linalg.norm(y))
    if norm == 0.0:
        raise ZeroSignal("ground-truth signal is identically zero")
    return norm / (y.size * 10.0 ** (snr_db / 10.0))


def recon_snr_db(y_star, b) -> float:
    """``10 log10(||Y*||_F / ||B - Y*||_F)``; ``inf`` on exact recovery."""
    y_star = np.asarray(y_star, dtype=float)
    err = float(np.linalg.norm(np.asarray(b, dtype=float) - y_star))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.linalg.norm(y_star)) / err)


def roc_curve(scores, truth):
    """ROC points and trapezoidal AUC, thresholding at every distinct score.

    Returns ``(points, auc)`` where ``points`` is an ``(m, 2)`` array of
    ``(fpr, tpr)`` starting at ``(0, 0)`` and ending at ``(1, 1)``.  Tied
    scores move along a diagonal segment, which scores ties as one half.
    """
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth, dtype=bool)
    pos = int(truth.sum())
    neg = truth.size - pos
    if pos == 0 or neg == 0:
        raise DegenerateTruth("need at least one positive and one negative")
    order = np.argsort(-scores, kind="stable")
    s, t = scores[order], truth[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(t)[last]
    fp = np.cumsum(~t)[last]
    fpr = np.r_[0.0, fp / neg]
    tpr = np.r_[0.0, tp / pos]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) * 0.5))
    return np.column_stack([fpr, tpr]), auc


def misclassification(predicted, truth, mask=None) -> float:
    """Error rate, restricted to ``mask`` when given."""
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        predicted, truth = predicted[mask], truth[mask]
    return float(np.mean(predicted != truth))
