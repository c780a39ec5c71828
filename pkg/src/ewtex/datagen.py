"""Synthetic ground-truth masks and texture mosaics for training.

Grayscale masks come from median-thresholded smoothed noise, retried
until the 4-connected region count matches the request; color-style
masks come from random Voronoi cells.  Mosaics fill each mask region
with the texture assigned to its class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .classify import SegmentationMap
from .errors import NumericalError

MAX_MASK_ATTEMPTS = 1000

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


class MaskGenerationError(NumericalError):
    """Rejection sampling did not hit the requested region count."""


@dataclass(frozen=True)
class MaskSpec:
    """Parameters of the smoothed-noise mask generator."""

    width: int
    height: int
    target_region_count: int = 5
    sigma: float = 10.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("mask dimensions must be positive")
        if self.target_region_count < 2:
            raise ValueError("target_region_count must be >= 2")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")


def _label_both_phases(binary: np.ndarray) -> tuple[np.ndarray, int]:
    """Label 4-connected components of both phases of a binary image,
    ids ordered by first pixel in row-major scan order."""
    fg, n_fg = ndimage.label(binary, structure=_FOUR_CONN)
    bg, n_bg = ndimage.label(~binary, structure=_FOUR_CONN)
    combined = np.where(binary, fg, n_fg + bg)
    flat = combined.ravel()
    total = n_fg + n_bg
    first = np.full(total + 1, flat.size, dtype=np.int64)
    starts = np.flatnonzero(np.r_[True, flat[1:] != flat[:-1]])
    for i in starts:
        cid = flat[i]
        if i < first[cid]:
            first[cid] = i
    order = np.argsort(first[1:], kind="stable") + 1
    remap = np.zeros(total + 1, dtype=np.int64)
    remap[order] = np.arange(total)
    return remap[combined], total


def gen_grayscale_mask(spec: MaskSpec) -> SegmentationMap:
    """Generate a mask by thresholding smoothed noise at its median.

    Standard-normal noise is rescaled to [0, 1], Gaussian-filtered with
    ``spec.sigma``, and split at the median; the connected components of
    both phases become the regions.  Draws fresh noise from the seeded
    stream until exactly ``target_region_count`` regions appear.
    """
    rng = np.random.default_rng(spec.rng_seed)
    for _ in range(MAX_MASK_ATTEMPTS):
        noise = rng.standard_normal((spec.height, spec.width))
        span = noise.max() - noise.min()
        if span == 0:
            continue
        noise = (noise - noise.min()) / span
        smooth = ndimage.gaussian_filter(noise, sigma=spec.sigma)
        binary = smooth >= np.median(smooth)
        labels, count = _label_both_phases(binary)
        if count == spec.target_region_count:
            return SegmentationMap(labels=labels, num_classes=count)
    raise MaskGenerationError(
        f"no {spec.target_region_count}-region mask within "
        f"{MAX_MASK_ATTEMPTS} attempts (seed {spec.rng_seed})"
    )


def gen_voronoi_mask(
    width: int, height: int, n_cells: int, n_classes: int, rng_seed: int = 0
) -> SegmentationMap:
    """Random Voronoi cells, each assigned a class so that every class
    appears at least once.  Pixel ties go to the lowest seed index."""
    if n_classes < 1 or n_cells < n_classes:
        raise ValueError("need n_cells >= n_classes >= 1")
    rng = np.random.default_rng(rng_seed)
    seeds = rng.random((n_cells, 2)) * np.array([height, width])
    ys, xs = np.mgrid[0:height, 0:width]
    d2 = (ys[..., None] - seeds[:, 0]) ** 2 + (xs[..., None] - seeds[:, 1]) ** 2
    nearest = np.argmin(d2, axis=2)
    cell_class = np.empty(n_cells, dtype=np.int64)
    slots = rng.permutation(n_cells)
    cell_class[slots[:n_classes]] = rng.permutation(n_classes)
    if n_cells > n_classes:
        cell_class[slots[n_classes:]] = rng.integers(0, n_classes, n_cells - n_classes)
    return SegmentationMap(labels=cell_class[nearest], num_classes=n_classes)


def compose_mosaic(mask: SegmentationMap, textures: list[np.ndarray]) -> np.ndarray:
    """Fill each mask region with its class texture at the same pixel
    coordinates, tiling textures periodically if they are smaller."""
    if len(textures) < mask.num_classes:
        raise ValueError(
            f"{mask.num_classes} classes but only {len(textures)} textures"
        )
    textures = [np.asarray(t, dtype=float) for t in textures]
    ndim = textures[0].ndim
    if any(t.ndim != ndim for t in textures):
        raise ValueError("textures must all be grayscale or all be color")
    h, w = mask.shape
    out_shape = (h, w) if ndim == 2 else (h, w, textures[0].shape[2])
    out = np.zeros(out_shape)
    rows = np.arange(h)
    cols = np.arange(w)
    for c in range(mask.num_classes):
        tex = textures[c]
        tiled = tex[rows % tex.shape[0]][:, cols % tex.shape[1]]
        sel = mask.labels == c
        out[sel] = tiled[sel]
    return out
