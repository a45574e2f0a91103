"""Evaluation metrics for change point predictions.

Implements segment covering (best-Jaccard overlap weighted by segment
length, averaged over annotators), margin-based precision/recall with
one-to-one greedy matching, and the F1 score. The inner kernels are
compiled because benchmark grids evaluate them many thousands of times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidInputError

__all__ = [
    "AnnotationSet",
    "partition_from_changepoints",
    "jaccard",
    "covering",
    "greedy_match",
    "precision_recall",
    "f1",
]


@dataclass(frozen=True)
class AnnotationSet:
    """Ground-truth change points from one or more annotators.

    annotators maps an annotator id to a strictly increasing tuple of
    change point indices in [0, series_length).
    """

    annotators: dict
    series_length: int

    def __post_init__(self) -> None:
        if int(self.series_length) < 1:
            raise InvalidInputError("series_length must be >= 1")
        if not self.annotators:
            raise InvalidInputError("at least one annotator is required")
        clean = {}
        for name, cps in self.annotators.items():
            arr = tuple(int(c) for c in cps)
            if any(b <= a for a, b in zip(arr, arr[1:])):
                raise InvalidInputError(
                    f"annotator {name!r}: indices must be strictly increasing"
                )
            if arr and (arr[0] < 0 or arr[-1] >= self.series_length):
                raise InvalidInputError(
                    f"annotator {name!r}: indices must lie in [0, {self.series_length})"
                )
            clean[str(name)] = arr
        object.__setattr__(self, "annotators", clean)

    @classmethod
    def single(cls, cps, series_length: int, name: str = "truth") -> "AnnotationSet":
        """Wrap one change point list as a single-annotator set."""
        return cls({name: tuple(cps)}, series_length)


def partition_from_changepoints(cps, T: int) -> list:
    """Cut [0, T) at each change point into half-open integer segments.

    Parameters
    ----------
    cps : sequence of int
        Strictly increasing cut indices, each in (0, T).
    T : int
        Series length.

    Returns
    -------
    list of (start, stop)
        Contiguous segments covering [0, T) exactly.
    """
    T = int(T)
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    cuts = [int(c) for c in cps]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise InvalidInputError("change points must be strictly increasing")
    if cuts and (cuts[0] <= 0 or cuts[-1] >= T):
        raise InvalidInputError(f"change points must lie in (0, {T})")
    edges = [0] + cuts + [T]
    return [(a, b) for a, b in zip(edges, edges[1:])]


def jaccard(a, b) -> float:
    """Intersection over union of two half-open integer intervals.

    Each argument is a (start, stop) pair. An empty interval is allowed
    as long as the other one is not.
    """
    a0, a1 = (int(v) for v in a)
    b0, b1 = (int(v) for v in b)
    la = max(0, a1 - a0)
    lb = max(0, b1 - b0)
    if la == 0 and lb == 0:
        raise InvalidInputError("jaccard of two empty intervals is undefined")
    inter = max(0, min(a1, b1) - max(a0, b0))
    return inter / (la + lb - inter)


@njit(cache=True)
def _cover_edges(t_edges, p_edges):
    """Sum over truth segments of length times best Jaccard with any
    predicted segment. Edges are the segment boundaries including 0 and T."""
    total = 0.0
    for i in range(t_edges.size - 1):
        a0 = t_edges[i]
        a1 = t_edges[i + 1]
        la = a1 - a0
        best = 0.0
        for j in range(p_edges.size - 1):
            b0 = p_edges[j]
            b1 = p_edges[j + 1]
            lo = a0 if a0 > b0 else b0
            hi = a1 if a1 < b1 else b1
            inter = hi - lo
            if inter > 0:
                jac = inter / (la + (b1 - b0) - inter)
                if jac > best:
                    best = jac
        total += la * best
    return total


def _partition_edges(partition, T: int) -> np.ndarray:
    segs = list(partition)
    if not segs:
        raise InvalidInputError("partition must contain at least one segment")
    edges = [0]
    for a, b in segs:
        a, b = int(a), int(b)
        if a != edges[-1] or b <= a:
            raise InvalidInputError("segments must be contiguous and nonempty")
        edges.append(b)
    if edges[-1] != T:
        raise InvalidInputError(
            f"partition covers [0, {edges[-1]}) but the series has length {T}"
        )
    return np.asarray(edges, dtype=np.int64)


def _cps_edges(cps, T: int) -> np.ndarray:
    # index 0 marks the trivial boundary and does not cut a segment
    cuts = [int(c) for c in cps if c != 0]
    return np.asarray([0] + cuts + [T], dtype=np.int64)


def covering(predicted, truth: AnnotationSet) -> float:
    """Average segment covering of the annotator partitions by the prediction.

    For each annotator partition G with segments A, computes
    (1/T) * sum over A of |A| * max over predicted segments A' of J(A, A'),
    then returns the mean over annotators.

    Parameters
    ----------
    predicted : sequence of (start, stop)
        Predicted partition of [0, T), e.g. from partition_from_changepoints.
    truth : AnnotationSet
        Annotator change points with the series length.
    """
    T = truth.series_length
    p_edges = _partition_edges(predicted, T)
    vals = [
        _cover_edges(_cps_edges(truth.annotators[name], T), p_edges) / T
        for name in sorted(truth.annotators)
    ]
    return float(np.mean(vals))


@njit(cache=True)
def _greedy_fill(pred, truth, margin, matched_pred, matched_truth):
    """Greedy one-to-one matching by increasing (|pred - truth|, pred, truth).

    pred and truth must be sorted ascending; the mask arrays must arrive
    zeroed and are filled in place. Returns the number of matched pairs.
    Candidates are generated in (pred, truth) order, so a stable sort on
    the distance alone realizes the full tie-break rule.
    """
    n = pred.size
    m = truth.size
    dists = np.empty(n * m, np.int64)
    pis = np.empty(n * m, np.int64)
    tis = np.empty(n * m, np.int64)
    nc = 0
    for i in range(n):
        j = np.searchsorted(truth, pred[i] - margin)
        while j < m and truth[j] <= pred[i] + margin:
            d = pred[i] - truth[j]
            if d < 0:
                d = -d
            dists[nc] = d
            pis[nc] = i
            tis[nc] = j
            nc += 1
            j += 1
    order = np.argsort(dists[:nc], kind="mergesort")
    count = 0
    for idx in range(nc):
        k = order[idx]
        i = pis[k]
        j = tis[k]
        if (not matched_pred[i]) and (not matched_truth[j]):
            matched_pred[i] = True
            matched_truth[j] = True
            count += 1
    return count


def greedy_match(predicted, truth_points, margin: int):
    """Match predicted to true points one-to-one within the margin.

    Pairs are taken greedily by increasing absolute distance, ties broken
    by the lower predicted index, then the lower true index.

    Returns
    -------
    (matched_pred, matched_truth) : bool arrays
        Flags aligned with the sorted inputs.
    """
    if margin < 0:
        raise InvalidInputError("margin must be >= 0")
    pred = np.asarray(sorted(int(v) for v in predicted), dtype=np.int64)
    tru = np.asarray(sorted(int(v) for v in truth_points), dtype=np.int64)
    mp = np.zeros(pred.size, dtype=np.bool_)
    mt = np.zeros(tru.size, dtype=np.bool_)
    if pred.size and tru.size:
        _greedy_fill(pred, tru, int(margin), mp, mt)
    return mp, mt


def _with_zero(points) -> np.ndarray:
    vals = {int(v) for v in points}
    vals.add(0)
    return np.asarray(sorted(vals), dtype=np.int64)


def precision_recall(predicted, truth: AnnotationSet, margin: int = 5):
    """Margin-based precision and recall against multiple annotators.

    Index 0 is implicitly added to the prediction and to every annotator
    before matching, so an empty prediction still scores the trivial
    boundary. A predicted point is a true positive if at least one
    annotator matches it; recall is the mean over annotators of the
    matched fraction of that annotator's points.

    Parameters
    ----------
    predicted : sequence of int
        Predicted change point indices in [0, T).
    truth : AnnotationSet
        Annotator change points.
    margin : int
        Matching tolerance in samples, >= 0.

    Returns
    -------
    (precision, recall) : floats in [0, 1]
    """
    if margin < 0:
        raise InvalidInputError("margin must be >= 0")
    T = truth.series_length
    preds = _with_zero(predicted)
    if preds[0] < 0 or preds[-1] >= T:
        raise InvalidInputError(f"predicted indices must lie in [0, {T})")
    matched_any = np.zeros(preds.size, dtype=np.bool_)
    recalls = []
    for name in sorted(truth.annotators):
        tru = _with_zero(truth.annotators[name])
        mp = np.zeros(preds.size, dtype=np.bool_)
        mt = np.zeros(tru.size, dtype=np.bool_)
        count = _greedy_fill(preds, tru, int(margin), mp, mt)
        matched_any |= mp
        recalls.append(count / tru.size)
    precision = float(matched_any.sum() / preds.size)
    return precision, float(np.mean(recalls))


def f1(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise InvalidInputError("precision and recall must lie in [0, 1]")
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
