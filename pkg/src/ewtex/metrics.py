"""Partition-comparison scores between predicted and reference maps.

All four metrics are computed from the region-intersection contingency
table and are reported as percentages where 100 means a perfect match:

* ``vd``   -- Van Dongen distance complement,
  ``100 * (1 - (2 Np - sum_i max_j n_ij - sum_j max_i n_ij) / (2 Np))``.
* ``ssc``  -- swapped segmentation covering: worst direction of the
  size-weighted best-Jaccard covering.
* ``sdhd`` -- swapped directional Hamming distance: worst direction of
  the pixels outside each region's best-overlap partner.
* ``nvoi`` -- normalized variation of information,
  ``100 * (1 - VI / ln(Np))`` clamped to [0, 100], VI in nats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .classify import SegmentationMap

SCORE_KEYS = ("nvoi", "ssc", "sdhd", "vd")


@dataclass(frozen=True)
class ContingencyTable:
    """Pixel counts of every (prediction region, truth region) pair."""

    counts: np.ndarray  # (|pred classes|, |truth classes|)
    total: int

    def __post_init__(self):
        if self.counts.sum() != self.total:
            raise ValueError("contingency entries must sum to the pixel count")


def _labels_of(seg) -> tuple[np.ndarray, int]:
    if isinstance(seg, SegmentationMap):
        return seg.labels, seg.num_classes
    arr = np.asarray(seg)
    return arr, int(arr.max()) + 1 if arr.size else 1


def contingency(pred, gt) -> ContingencyTable:
    """Count pixels per (pred class, truth class) pair."""
    p, np_classes = _labels_of(pred)
    g, ng_classes = _labels_of(gt)
    if p.shape != g.shape:
        raise ValueError(f"map shapes differ: {p.shape} vs {g.shape}")
    flat = p.ravel().astype(np.int64) * ng_classes + g.ravel()
    counts = np.bincount(flat, minlength=np_classes * ng_classes)
    table = counts.reshape(np_classes, ng_classes)
    return ContingencyTable(counts=table, total=p.size)


def _covering(table: np.ndarray, total: int) -> float:
    """Size-weighted best-Jaccard covering of rows by columns."""
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    union = row + col - table
    jac = np.divide(table, union, out=np.zeros_like(table, dtype=float), where=union > 0)
    return float((row[:, 0] * jac.max(axis=1)).sum() / total)


def _conditional_entropy(table: np.ndarray, total: int, axis: int) -> float:
    """H(cols|rows) for axis=0, H(rows|cols) for axis=1, in nats."""
    marg = table.sum(axis=1 - axis, keepdims=True)
    p = table / total
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(table > 0, table / np.where(marg > 0, marg, 1), 1.0)
        terms = np.where(table > 0, -p * np.log(ratio), 0.0)
    return float(terms.sum())


def score(pred, gt) -> dict[str, float]:
    """All four partition metrics, as percentages in [0, 100]."""
    table = contingency(pred, gt)
    n = table.counts.astype(float)
    total = float(table.total)

    max_rows = float(n.max(axis=1).sum())
    max_cols = float(n.max(axis=0).sum())
    vd = 100.0 * (1.0 - (2.0 * total - max_rows - max_cols) / (2.0 * total))

    ssc = 100.0 * min(_covering(n, total), _covering(n.T, total))

    dh_to_gt = total - max_cols  # pixels outside each truth region's best partner
    dh_to_pred = total - max_rows
    sdhd = 100.0 * (1.0 - min(dh_to_gt, dh_to_pred) / total)

    vi = _conditional_entropy(n, total, axis=0) + _conditional_entropy(n, total, axis=1)
    if vi <= 0.0 or total <= 1:
        nvoi = 100.0
    else:
        nvoi = float(np.clip(100.0 * (1.0 - vi / np.log(total)), 0.0, 100.0))

    return {"nvoi": nvoi, "ssc": ssc, "sdhd": sdhd, "vd": vd}


def format_report(scores: dict[str, float]) -> str:
    """Flat key-value rendering of a score dict."""
    return "\n".join(f"{key} {scores[key]:.4f}" for key in SCORE_KEYS)


def report_json(scores: dict[str, float]) -> str:
    return json.dumps({k: scores[k] for k in SCORE_KEYS}, sort_keys=True)
