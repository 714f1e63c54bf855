"""Tracking metrics from their standard definitions.

Three evaluators over a ground-truth/prediction sequence pair:

* ``hota``: for each IoU threshold alpha in {0.05, ..., 0.95}, frames are
  matched one-to-one by IoU-maximal assignment and pairs below alpha are
  rejected. DetA(alpha) = TP / (TP + FN + FP). Every matched detection c
  with identities (g, p) scores A(c) = TPA / (TPA + FNA + FPA), where TPA
  counts frames in which g and p are matched to each other, and FNA/FPA
  count the remaining appearances of g and p respectively. AssA(alpha) is
  the mean of A(c) over matched detections, HOTA(alpha) the geometric mean
  of DetA and AssA, and reported values are arithmetic means over the 19
  thresholds. Matching is pure-IoU Hungarian per threshold (no secondary
  association objective), which keeps comparisons between trackers under
  the same evaluator meaningful but is not bit-compatible with the official
  toolkit.
* ``clear_mota``: frame-by-frame matching at IoU 0.5 with carry-over
  preference (a ground-truth identity keeps its previous prediction while
  the pair still overlaps), counting FN, FP, and identity switches;
  MOTA = 1 - (FN + FP + IDSW) / total ground-truth detections.
* ``idf1``: a single global bijection between ground-truth and predicted
  trajectories chosen to maximize the number of frame-level overlaps at
  IoU 0.5; IDF1 = 2*IDTP / (2*IDTP + IDFP + IDFN).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .geometry import Box2D, boxes_to_corners, iou_matrix
from .tracker import hungarian_assign

__all__ = [
    "ALPHA_GRID",
    "SequencePair",
    "MetricsReport",
    "match_frame",
    "clear_mota",
    "idf1",
    "hota",
    "evaluate",
    "report_csv",
    "report_markdown",
]

FrameEntries = List[Tuple[int, Box2D]]

ALPHA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))

CLEAR_IOU_THRESHOLD = 0.5


@dataclass(eq=False)
class SequencePair:
    """Frame-aligned ground truth and predictions: per-frame (id, box) lists."""

    gt: List[FrameEntries]
    pred: List[FrameEntries]

    def __post_init__(self):
        if len(self.gt) != len(self.pred):
            raise ValueError(
                f"gt has {len(self.gt)} frames but pred has {len(self.pred)}"
            )
        for frames in (self.gt, self.pred):
            for entries in frames:
                for obj_id, _ in entries:
                    if obj_id < 1:
                        raise ValueError(f"ids must be positive, got {obj_id}")

    @property
    def n_frames(self) -> int:
        return len(self.gt)

    def total_gt(self) -> int:
        return sum(len(f) for f in self.gt)

    def total_pred(self) -> int:
        return sum(len(f) for f in self.pred)


@dataclass
class MetricsReport:
    """Score summary for one sequence (counts at IoU 0.5)."""

    hota: float
    deta: float
    assa: float
    mota: float
    idf1: float
    idsw: int
    tp: int
    fp: int
    fn: int


def match_frame(
    gt_boxes: Sequence[Box2D], pred_boxes: Sequence[Box2D], iou_threshold: float
) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    """One-to-one IoU-maximal matching for a single frame.

    Returns (tp_pairs, fp_pred_indices, fn_gt_indices); pairs whose IoU is
    below the threshold are rejected and their endpoints counted as FP/FN.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    ious = iou_matrix(boxes_to_corners(gt_boxes), boxes_to_corners(pred_boxes))
    pairs = hungarian_assign(1.0 - ious) if ious.size else []
    tp_pairs = [(g, p) for g, p in pairs if ious[g, p] >= iou_threshold]
    matched_gt = {g for g, _ in tp_pairs}
    matched_pred = {p for _, p in tp_pairs}
    fp = [p for p in range(len(pred_boxes)) if p not in matched_pred]
    fn = [g for g in range(len(gt_boxes)) if g not in matched_gt]
    return tp_pairs, fp, fn


def _frame_parts(entries: FrameEntries) -> Tuple[List[int], List[Box2D]]:
    ids = [obj_id for obj_id, _ in entries]
    boxes = [box for _, box in entries]
    return ids, boxes


def clear_mota(pair: SequencePair) -> Tuple[float, int, int, int]:
    """CLEAR accuracy: returns (mota, idsw, fp, fn)."""
    total_gt = pair.total_gt()
    if total_gt == 0:
        raise ValueError("MOTA undefined: sequence has no ground-truth detections")

    last_pred: Dict[int, int] = {}
    idsw = fp = fn = 0
    for gt_entries, pred_entries in zip(pair.gt, pair.pred):
        gids, gboxes = _frame_parts(gt_entries)
        pids, pboxes = _frame_parts(pred_entries)
        ious = iou_matrix(boxes_to_corners(gboxes), boxes_to_corners(pboxes))

        bound: List[Tuple[int, int]] = []
        claimed_pred = set()
        # Carry-over: a gt identity keeps its most recent prediction while
        # the pair still overlaps enough.
        pid_to_idx = {}
        for pj, pid in enumerate(pids):
            if pid not in pid_to_idx:
                pid_to_idx[pid] = pj
        bound_gt = set()
        for gi, gid in enumerate(gids):
            prev = last_pred.get(gid)
            if prev is None or prev not in pid_to_idx:
                continue
            pj = pid_to_idx[prev]
            if pj in claimed_pred:
                continue
            if ious[gi, pj] >= CLEAR_IOU_THRESHOLD:
                bound.append((gi, pj))
                bound_gt.add(gi)
                claimed_pred.add(pj)
        # Hungarian over whatever remains.
        rest_g = [gi for gi in range(len(gids)) if gi not in bound_gt]
        rest_p = [pj for pj in range(len(pids)) if pj not in claimed_pred]
        if rest_g and rest_p:
            sub = 1.0 - ious[np.ix_(rest_g, rest_p)]
            for r, c in hungarian_assign(sub):
                gi, pj = rest_g[r], rest_p[c]
                if ious[gi, pj] >= CLEAR_IOU_THRESHOLD:
                    bound.append((gi, pj))

        for gi, pj in bound:
            gid, pid = gids[gi], pids[pj]
            prev = last_pred.get(gid)
            if prev is not None and prev != pid:
                idsw += 1
            last_pred[gid] = pid
        fn += len(gids) - len(bound)
        fp += len(pids) - len(bound)

    mota = 1.0 - (fn + fp + idsw) / total_gt
    return mota, idsw, fp, fn


def idf1(pair: SequencePair) -> float:
    """Identity F1 over the best global trajectory bijection."""
    total_gt = pair.total_gt()
    total_pred = pair.total_pred()
    if total_gt == 0 and total_pred == 0:
        return 1.0

    # Frame-level overlap counts per (gt id, pred id); pairwise, not assigned.
    counts: Dict[Tuple[int, int], int] = {}
    for gt_entries, pred_entries in zip(pair.gt, pair.pred):
        gids, gboxes = _frame_parts(gt_entries)
        pids, pboxes = _frame_parts(pred_entries)
        ious = iou_matrix(boxes_to_corners(gboxes), boxes_to_corners(pboxes))
        for gi, gid in enumerate(gids):
            for pj, pid in enumerate(pids):
                if ious[gi, pj] >= CLEAR_IOU_THRESHOLD:
                    counts[(gid, pid)] = counts.get((gid, pid), 0) + 1

    idtp = 0
    if counts:
        gt_ids = sorted({g for g, _ in counts})
        pred_ids = sorted({p for _, p in counts})
        mat = np.zeros((len(gt_ids), len(pred_ids)), dtype=float)
        for (g, p), c in counts.items():
            mat[gt_ids.index(g), pred_ids.index(p)] = c
        rows, cols = zip(*hungarian_assign(-mat)) if mat.size else ((), ())
        idtp = int(sum(mat[r, c] for r, c in zip(rows, cols)))

    idfp = total_pred - idtp
    idfn = total_gt - idtp
    return 2.0 * idtp / (2.0 * idtp + idfp + idfn)


def _cached_frame_matches(pair: SequencePair):
    """Per frame: (gt ids, pred ids, assignment pairs with IoUs).

    The IoU-maximal assignment does not depend on the threshold, so it is
    computed once and filtered per alpha.
    """
    cached = []
    for gt_entries, pred_entries in zip(pair.gt, pair.pred):
        gids, gboxes = _frame_parts(gt_entries)
        pids, pboxes = _frame_parts(pred_entries)
        ious = iou_matrix(boxes_to_corners(gboxes), boxes_to_corners(pboxes))
        pairs = hungarian_assign(1.0 - ious) if ious.size else []
        matches = [(gids[g], pids[p], ious[g, p]) for g, p in pairs]
        cached.append((len(gids), len(pids), matches))
    return cached


def hota(pair: SequencePair) -> Tuple[float, float, float]:
    """Returns (hota, deta, assa), each averaged over the 19-threshold grid."""
    total_gt = pair.total_gt()
    if total_gt == 0:
        raise ValueError("HOTA undefined: sequence has no ground-truth detections")

    gt_appearances: Dict[int, int] = {}
    pred_appearances: Dict[int, int] = {}
    for entries in pair.gt:
        for gid, _ in entries:
            gt_appearances[gid] = gt_appearances.get(gid, 0) + 1
    for entries in pair.pred:
        for pid, _ in entries:
            pred_appearances[pid] = pred_appearances.get(pid, 0) + 1

    cached = _cached_frame_matches(pair)

    deta_sum = assa_sum = hota_sum = 0.0
    for alpha in ALPHA_GRID:
        tp = fp = fn = 0
        pair_counts: Dict[Tuple[int, int], int] = {}
        tp_events: List[Tuple[int, int]] = []
        for n_gt, n_pred, matches in cached:
            kept = [(g, p) for g, p, v in matches if v >= alpha]
            tp += len(kept)
            fn += n_gt - len(kept)
            fp += n_pred - len(kept)
            for g, p in kept:
                pair_counts[(g, p)] = pair_counts.get((g, p), 0) + 1
                tp_events.append((g, p))
        deta = tp / (tp + fn + fp)
        if tp:
            ass = 0.0
            for g, p in tp_events:
                tpa = pair_counts[(g, p)]
                ass += tpa / (gt_appearances[g] + pred_appearances[p] - tpa)
            assa = ass / tp
        else:
            assa = 0.0
        deta_sum += deta
        assa_sum += assa
        hota_sum += (deta * assa) ** 0.5
    n = len(ALPHA_GRID)
    return hota_sum / n, deta_sum / n, assa_sum / n


def evaluate(pair: SequencePair) -> MetricsReport:
    """All metrics for one sequence; requires at least one ground-truth box."""
    mota, idsw, fp, fn = clear_mota(pair)
    hota_v, deta_v, assa_v = hota(pair)
    tp = pair.total_gt() - fn
    return MetricsReport(
        hota=hota_v,
        deta=deta_v,
        assa=assa_v,
        mota=mota,
        idf1=idf1(pair),
        idsw=idsw,
        tp=tp,
        fp=fp,
        fn=fn,
    )


_COLUMNS = ("HOTA", "DetA", "AssA", "MOTA", "IDF1", "IDSW")


def report_csv(report: MetricsReport) -> str:
    """Two CSV lines: header and 6-decimal values."""
    header = ",".join(c.lower() for c in _COLUMNS)
    row = (
        f"{report.hota:.6f},{report.deta:.6f},{report.assa:.6f},"
        f"{report.mota:.6f},{report.idf1:.6f},{report.idsw}"
    )
    return f"{header}\n{row}\n"


def report_markdown(report: MetricsReport) -> str:
    """One aligned markdown table with the headline metrics."""
    values = [
        f"{report.hota:.6f}",
        f"{report.deta:.6f}",
        f"{report.assa:.6f}",
        f"{report.mota:.6f}",
        f"{report.idf1:.6f}",
        str(report.idsw),
    ]
    widths = [max(len(h), len(v)) for h, v in zip(_COLUMNS, values)]
    head = " | ".join(h.rjust(w) for h, w in zip(_COLUMNS, widths))
    rule = " | ".join("-" * w for w in widths)
    body = " | ".join(v.rjust(w) for v, w in zip(values, widths))
    return f"| {head} |\n| {rule} |\n| {body} |\n"
