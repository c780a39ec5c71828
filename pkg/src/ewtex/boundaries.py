"""Merging of per-texture boundary sets into one shared partition.

The merge runs in five steps: detect a boundary set on every spectrum,
record the strongest local maximum on each of its supports, take the
union of all sets, collapse supports that contain none of the recorded
maxima, and finally collapse supports narrower than a width threshold.
Collapsing always uses the midpoint rule: the two delimiters of a doomed
support are replaced by their midpoint, except that the endpoints 0 and
``domain_max`` are immutable, in which case the interior delimiter is
dropped instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import ANGULAR, BoundarySet, ScaleSpaceConfig, Spectrum1D, detect_boundaries

#: positions closer than this collapse to a single boundary
DEDUP_TOL = 1e-9
#: slack for interval-membership tests
CONTAIN_TOL = 1e-12


@dataclass(frozen=True)
class MaximaSet:
    """Positions of the largest spectrum value on each support of a set."""

    positions: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "positions", np.asarray(self.positions, dtype=float)
        )


@dataclass(frozen=True)
class MergeConfig:
    """Width threshold below which supports are merged away."""

    min_width: float

    def __post_init__(self):
        if not 0 < self.min_width:
            raise ValueError("min_width must be positive")


def local_maxima(spectrum: Spectrum1D, bs: BoundarySet) -> MaximaSet:
    """Position of the largest sample on each support of ``bs``.

    Ties break toward the lower position.  Supports are closed intervals,
    so a maximum sitting exactly on a boundary belongs to both sides.
    """
    pos = spectrum.positions
    s = spectrum.samples
    out = []
    for lo, hi in bs.supports():
        sel = np.flatnonzero((pos >= lo - CONTAIN_TOL) & (pos <= hi + CONTAIN_TOL))
        if sel.size == 0:
            raise ValueError(
                f"support [{lo:.6g}, {hi:.6g}] contains no spectrum samples"
            )
        best = sel[int(np.argmax(s[sel]))]
        out.append(pos[best])
    return MaximaSet(np.array(out))


def union_boundaries(sets: list[BoundarySet]) -> BoundarySet:
    """Sorted deduplicated union of boundary sets sharing one axis."""
    if not sets:
        raise ValueError("cannot merge an empty list of boundary sets")
    axis = sets[0].axis
    dm = sets[0].domain_max
    for bs in sets[1:]:
        if bs.axis != axis or bs.domain_max != dm:
            raise ValueError("boundary sets must share axis and domain_max")
    vals = np.sort(np.concatenate([bs.interior for bs in sets]))
    interior = []
    for v in vals:
        if v <= DEDUP_TOL or v >= dm - DEDUP_TOL:
            continue  # collapses into an endpoint
        if interior and v - interior[-1] <= DEDUP_TOL:
            continue
        interior.append(float(v))
    return BoundarySet(np.array([0.0] + interior + [dm]), axis, dm)


def _collapse_support(bounds: list[float], i: int) -> list[float]:
    """Midpoint/endpoint rule applied to support ``[bounds[i], bounds[i+1]]``."""
    lo_is_end = i == 0
    hi_is_end = i + 1 == len(bounds) - 1
    if lo_is_end and hi_is_end:
        return bounds
    if lo_is_end:
        return bounds[: i + 1] + bounds[i + 2 :]
    if hi_is_end:
        return bounds[:i] + bounds[i + 1 :]
    mid = 0.5 * (bounds[i] + bounds[i + 1])
    return bounds[:i] + [mid] + bounds[i + 2 :]


def prune_unsupported(bs: BoundarySet, maxima: list[MaximaSet]) -> BoundarySet:
    """Collapse supports that contain none of the recorded maxima.

    Offending supports are fixed lowest-position-first, rescanning after
    every collapse, until each remaining support holds at least one
    maximum.  The maxima are those of the original per-texture sets and
    are never recomputed.
    """
    lam = np.sort(np.concatenate([m.positions for m in maxima])) if maxima else np.array([])
    bounds = list(bs.boundaries)
    while len(bounds) > 2:
        for i in range(len(bounds) - 1):
            lo, hi = bounds[i], bounds[i + 1]
            hit = np.any((lam >= lo - CONTAIN_TOL) & (lam <= hi + CONTAIN_TOL))
            if not hit:
                bounds = _collapse_support(bounds, i)
                break
        else:
            break
    return BoundarySet(np.array(bounds), bs.axis, bs.domain_max)


def prune_narrow(bs: BoundarySet, cfg: MergeConfig) -> BoundarySet:
    """Collapse supports narrower than ``cfg.min_width``, narrowest first.

    Ties break toward the lower position.  Stops when every remaining
    support is wide enough or only the trivial set is left.
    """
    bounds = list(bs.boundaries)
    while len(bounds) > 2:
        widths = np.diff(bounds)
        idx = int(np.argmin(widths))
        if widths[idx] >= cfg.min_width:
            break
        bounds = _collapse_support(bounds, idx)
    return BoundarySet(np.array(bounds), bs.axis, bs.domain_max)


def _rotate_positions(positions, pivot, dm):
    return np.mod(np.asarray(positions, dtype=float) - pivot, dm)


def _rotated_set(union: BoundarySet, pivot: float) -> BoundarySet:
    dm = union.domain_max
    vals = [p for p in union.interior if abs(p - pivot) > DEDUP_TOL]
    rotated = sorted(_rotate_positions(vals, pivot, dm).tolist() + [dm - pivot])
    interior = []
    for v in rotated:
        if v <= DEDUP_TOL or v >= dm - DEDUP_TOL:
            continue
        if interior and v - interior[-1] <= DEDUP_TOL:
            continue
        interior.append(v)
    return BoundarySet(np.array([0.0] + interior + [dm]), union.axis, dm)


def _rotate_back(bs: BoundarySet, pivot: float) -> BoundarySet:
    dm = bs.domain_max
    vals = np.mod(bs.interior + pivot, dm).tolist() + [pivot]
    interior = []
    for v in sorted(vals):
        if v <= DEDUP_TOL or v >= dm - DEDUP_TOL:
            continue
        if interior and v - interior[-1] <= DEDUP_TOL:
            continue
        interior.append(v)
    return BoundarySet(np.array([0.0] + interior + [dm]), bs.axis, dm)


def merge_boundary_sets(
    spectra: list[Spectrum1D],
    cfg: MergeConfig,
    sscfg: ScaleSpaceConfig,
) -> BoundarySet:
    """Detect and merge boundary sets over a list of spectra.

    Runs the five merging steps in order and returns the final set.  For
    the angular axis the pruning steps run in coordinates rotated so that
    the first detected boundary becomes the origin; this lets supports
    spanning the half-plane seam be measured and merged like any other,
    at the price of pinning that boundary.
    """
    if not spectra:
        raise ValueError("need at least one spectrum")
    axis = spectra[0].axis
    if any(sp.axis != axis for sp in spectra):
        raise ValueError("spectra must share one axis")

    sets = [detect_boundaries(sp, sscfg) for sp in spectra]
    maxima = [local_maxima(sp, bs) for sp, bs in zip(spectra, sets)]
    union = union_boundaries(sets)

    pivot = None
    if axis == ANGULAR and union.interior.size:
        pivot = float(union.interior[0])
        union = _rotated_set(union, pivot)
        maxima = [
            MaximaSet(_rotate_positions(m.positions, pivot, union.domain_max))
            for m in maxima
        ]

    merged = prune_unsupported(union, maxima)
    merged = prune_narrow(merged, cfg)

    if pivot is not None:
        merged = _rotate_back(merged, pivot)
    return merged
