"""Accuracy metrics: Dice similarity, IoU matching, boundary recall."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .image import LabelMap


def dice(pred, truth, mode: str = "pixel") -> float:
    """Dice similarity coefficient, 2/(1/precision + 1/recall); 0 when tp=0.

    pixel mode: pred and truth are boolean foreground masks.
    point mode: truth is an (n, 2) array of (x, y) ground-truth points and
    pred is a boolean foreground mask; tp/fn count points inside/outside the
    foreground and fp counts predicted 4-connected foreground regions that
    contain no point.
    """
    if mode == "pixel":
        pred = np.asarray(pred, dtype=bool)
        truth = np.asarray(truth, dtype=bool)
        if pred.shape != truth.shape:
            raise ValueError("pred and truth shapes differ")
        if not truth.any():
            raise ValueError("empty ground truth")
        tp = int(np.count_nonzero(pred & truth))
        fp = int(np.count_nonzero(pred & ~truth))
        fn = int(np.count_nonzero(~pred & truth))
    elif mode == "point":
        pred = np.asarray(pred, dtype=bool)
        points = np.asarray(truth, dtype=np.int64).reshape(-1, 2)
        if points.shape[0] == 0:
            raise ValueError("empty ground truth")
        xs, ys = points[:, 0], points[:, 1]
        if (
            xs.min() < 0
            or ys.min() < 0
            or xs.max() >= pred.shape[1]
            or ys.max() >= pred.shape[0]
        ):
            raise ValueError("ground-truth point outside the mask")
        inside = pred[ys, xs]
        tp = int(np.count_nonzero(inside))
        fn = int(points.shape[0] - tp)
        comps, count = _kernels.label_components(pred.astype(np.int32))
        fg_regions = set(np.unique(comps[pred]).tolist())
        hit_regions = set(np.unique(comps[ys[inside], xs[inside]]).tolist())
        fp = len(fg_regions - hit_regions)
    else:
        raise ValueError(f"unknown dice mode {mode!r}")
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 / (1.0 / precision + 1.0 / recall)


def iou(pred_mask, truth_mask) -> float:
    pred_mask = np.asarray(pred_mask, dtype=bool)
    truth_mask = np.asarray(truth_mask, dtype=bool)
    union = np.count_nonzero(pred_mask | truth_mask)
    if union == 0:
        return 1.0
    return np.count_nonzero(pred_mask & truth_mask) / union


def match_iou(pred: LabelMap, truth: LabelMap) -> dict:
    """Best-overlap IoU per truth label: each truth region is matched to the
    predicted region covering most of it."""
    p = pred.labels.reshape(-1).astype(np.int64)
    t = truth.labels.reshape(-1).astype(np.int64)
    np_, nt = int(p.max()) + 1, int(t.max()) + 1
    joint = np.bincount(t * np_ + p, minlength=nt * np_).reshape(nt, np_)
    p_sizes = joint.sum(axis=0)
    t_sizes = joint.sum(axis=1)
    out = {}
    for tl in range(nt):
        if t_sizes[tl] == 0:
            continue
        best = int(np.argmax(joint[tl]))
        inter = joint[tl, best]
        union = t_sizes[tl] + p_sizes[best] - inter
        out[tl] = float(inter / union)
    return out


def largest_region_foreground(lm: LabelMap) -> np.ndarray:
    """Foreground mask under the evaluation protocol: the largest region is
    background, everything else is foreground.  Ties keep the lowest id."""
    sizes = np.bincount(lm.labels.reshape(-1))
    background = int(np.argmax(sizes))
    return lm.labels != background


def boundary_mask(lm: LabelMap) -> np.ndarray:
    """Pixels adjacent (4-connectivity) to a different label."""
    labels = lm.labels
    out = np.zeros(labels.shape, dtype=bool)
    out[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    out[:, 1:] |= labels[:, :-1] != labels[:, 1:]
    out[:-1, :] |= labels[:-1, :] != labels[1:, :]
    out[1:, :] |= labels[:-1, :] != labels[1:, :]
    return out


def boundary_recall(pred: LabelMap, truth: LabelMap, tolerance: int = 2) -> float:
    """Fraction of truth boundary pixels within ``tolerance`` (Chebyshev) of
    a predicted boundary pixel."""
    tb = boundary_mask(truth)
    if not tb.any():
        return 1.0
    pb = boundary_mask(pred)
    reach = pb.copy()
    for _ in range(tolerance):
        grown = reach.copy()
        grown[1:, :] |= reach[:-1, :]
        grown[:-1, :] |= reach[1:, :]
        grown[:, 1:] |= reach[:, :-1]
        grown[:, :-1] |= reach[:, 1:]
        grown[1:, 1:] |= reach[:-1, :-1]
        grown[1:, :-1] |= reach[:-1, 1:]
        grown[:-1, 1:] |= reach[1:, :-1]
        grown[:-1, :-1] |= reach[1:, 1:]
        reach = grown
    return float(np.count_nonzero(tb & reach) / np.count_nonzero(tb))
