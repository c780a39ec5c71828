"""Pseudo-polar 1D spectra of an image and scale-space detection of
harmonic-mode boundaries on them.

A 2D FFT magnitude is collapsed onto two 1D profiles: a radial one over
the normalized frequency range [0, pi] and an angular one over the
half-plane span [0, pi) (Hermitian symmetry of real images makes the
other half redundant).  Boundary candidates are local minima of those
profiles; a minimum is kept when it survives enough steps of iterated
Gaussian smoothing (its scale-space persistence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft
from scipy.ndimage import gaussian_filter1d

RADIAL = "radial"
ANGULAR = "angular"

#: number of angular histogram bins over [-pi/2, pi/2)
ANGULAR_BINS = 360
#: images below this side length carry too little frequency resolution
MIN_IMAGE_SIDE = 8
#: floor on the radial bin count so short spectra stay usable
MIN_RADIAL_BINS = 8

DOMAIN_MAX = float(np.pi)


@dataclass(frozen=True)
class Spectrum1D:
    """Non-negative magnitude profile over a polar axis.

    ``samples[j]`` is the averaged FFT magnitude of the bin starting at
    position ``j * domain_max / len(samples)``.  ``axis`` is ``"radial"``
    (normalized frequency) or ``"angular"`` (offset within the half-plane
    span; physical angle = position - pi/2).
    """

    samples: np.ndarray
    axis: str
    domain_max: float = DOMAIN_MAX

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if self.axis not in (RADIAL, ANGULAR):
            raise ValueError(f"unknown spectrum axis {self.axis!r}")
        if samples.ndim != 1 or samples.size < 8:
            raise ValueError("a spectrum needs at least 8 samples")
        if not np.all(np.isfinite(samples)) or np.any(samples < 0):
            raise ValueError("spectrum samples must be finite and >= 0")
        if self.domain_max <= 0:
            raise ValueError("domain_max must be positive")

    @property
    def positions(self) -> np.ndarray:
        """Axis position of each bin."""
        n = self.samples.size
        return np.arange(n) * (self.domain_max / n)


@dataclass(frozen=True)
class BoundarySet:
    """Ordered partition boundaries of a polar axis.

    The first boundary is always 0 and the last one ``domain_max``; the
    interior ones are strictly increasing between them.
    """

    boundaries: np.ndarray
    axis: str
    domain_max: float = DOMAIN_MAX

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float).copy()
        if self.axis not in (RADIAL, ANGULAR):
            raise ValueError(f"unknown axis {self.axis!r}")
        if b.ndim != 1 or b.size < 2:
            raise ValueError("a boundary set needs at least 2 elements")
        # snap near-endpoint values onto the exact convention
        if abs(b[0]) < 1e-9:
            b[0] = 0.0
        if abs(b[-1] - self.domain_max) < 1e-9:
            b[-1] = self.domain_max
        if b[0] != 0.0 or b[-1] != self.domain_max:
            raise ValueError("boundaries must start at 0 and end at domain_max")
        if np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        b.flags.writeable = False
        object.__setattr__(self, "boundaries", b)

    @property
    def interior(self) -> np.ndarray:
        return self.boundaries[1:-1]

    @property
    def n_supports(self) -> int:
        return self.boundaries.size - 1

    def supports(self):
        """Iterate over consecutive (low, high) boundary pairs."""
        b = self.boundaries
        return zip(b[:-1], b[1:])


@dataclass(frozen=True)
class ScaleSpaceConfig:
    """Parameters of the persistence-based minima detector.

    Each iteration convolves with a Gaussian of std ``sqrt(step)``, so the
    cumulative smoothing variance after ``t`` iterations is ``t * step``.
    ``threshold_rule`` selects how the persistence cutoff is chosen:
    ``"otsu"`` derives it from the persistence histogram, ``"fixed"`` uses
    ``fixed_k``.  Minima persisting strictly more than the cutoff become
    boundaries.
    """

    step: float = 1.0
    max_scale_steps: int = 64
    threshold_rule: str = "otsu"
    fixed_k: int = 4

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.max_scale_steps < 2:
            raise ValueError("max_scale_steps must be >= 2")
        if self.threshold_rule not in ("otsu", "fixed"):
            raise ValueError("threshold_rule must be 'otsu' or 'fixed'")


def polar_spectra(image: np.ndarray) -> tuple[Spectrum1D, Spectrum1D]:
    """Collapse the 2D FFT magnitude of ``image`` onto radial and angular
    1D spectra.

    Every Cartesian FFT sample votes into exactly one radial and one
    angular bin; bin values are the mean magnitude over their members.
    The DC sample is excluded from the angular average (it has no angle).

    Returns
    -------
    (radial, angular) : pair of Spectrum1D
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("image must be a non-empty 2D array")
    h, w = img.shape
    if h < MIN_IMAGE_SIDE or w < MIN_IMAGE_SIDE:
        raise ValueError(
            f"image {h}x{w} is too small for spectral analysis "
            f"(needs at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE})"
        )

    mag = np.abs(sp_fft.fft2(img))
    ky = sp_fft.fftfreq(h) * h
    kx = sp_fft.fftfreq(w) * w
    grid_ky, grid_kx = np.meshgrid(ky, kx, indexing="ij")
    dist = np.hypot(grid_ky, grid_kx)

    nyquist = min(h, w) // 2
    n_rad = max(MIN_RADIAL_BINS, min(h, w) // 2)
    rbin = np.minimum(np.rint(dist * (n_rad / nyquist)).astype(int), n_rad - 1)
    rsum = np.bincount(rbin.ravel(), weights=mag.ravel(), minlength=n_rad)
    rcnt = np.bincount(rbin.ravel(), minlength=n_rad)
    radial = np.where(rcnt > 0, rsum / np.maximum(rcnt, 1), 0.0)

    # fold both half-planes onto [0, pi): position = angle + pi/2 (mod pi)
    pos = np.mod(np.arctan2(grid_ky, grid_kx) + 0.5 * np.pi, np.pi)
    abin = np.minimum((pos * (ANGULAR_BINS / np.pi)).astype(int), ANGULAR_BINS - 1)
    keep = np.ones(mag.shape, dtype=bool)
    keep[0, 0] = False
    asum = np.bincount(abin[keep], weights=mag[keep], minlength=ANGULAR_BINS)
    acnt = np.bincount(abin[keep], minlength=ANGULAR_BINS)
    angular = np.where(acnt > 0, asum / np.maximum(acnt, 1), 0.0)

    return (
        Spectrum1D(radial, RADIAL),
        Spectrum1D(angular, ANGULAR),
    )


def _local_minima(samples: np.ndarray) -> np.ndarray:
    """Indices of strict interior local minima."""
    s = samples
    mask = (s[1:-1] < s[:-2]) & (s[1:-1] < s[2:])
    return np.flatnonzero(mask) + 1


def otsu_threshold(values) -> float:
    """Split threshold maximizing the between-class variance.

    Returns the largest value of the lower class; callers keep entries
    strictly above it.  Degenerate input (all values equal) returns one
    below the common value so that everything is kept.
    """
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        raise ValueError("no values to threshold")
    uniq = np.unique(vals)
    if uniq.size == 1:
        return float(uniq[0] - 1.0)
    best_t = uniq[0]
    best_score = -np.inf
    for t in uniq[:-1]:
        lo = vals[vals <= t]
        hi = vals[vals > t]
        score = lo.size * hi.size * (lo.mean() - hi.mean()) ** 2
        if score > best_score:
            best_score = score
            best_t = t
    return float(best_t)


class _MinimaChain:
    """One tracked minimum: where it was born and whether it still exists."""

    __slots__ = ("birth", "birth_idx", "cur", "death")

    def __init__(self, step, idx):
        self.birth = step
        self.birth_idx = idx
        self.cur = idx
        self.death = None

    def persistence(self, total_steps):
        end = self.death if self.death is not None else total_steps
        return end - self.birth


def _track_minima(samples: np.ndarray, cfg: ScaleSpaceConfig, mode: str):
    """Follow local minima through iterated Gaussian smoothing.

    Minima are continued to their nearest counterpart in the next
    smoothing step; when several compete for the same one, the closest
    (then oldest, then lowest-positioned) survives.  Unclaimed minima
    start new chains.
    """
    sigma = math.sqrt(cfg.step)
    chains = [_MinimaChain(0, int(i)) for i in _local_minima(samples)]
    cur = samples
    for t in range(1, cfg.max_scale_steps + 1):
        cur = gaussian_filter1d(cur, sigma, mode=mode)
        new = _local_minima(cur)
        alive = [c for c in chains if c.death is None]
        if new.size == 0:
            for c in alive:
                c.death = t
            continue
        claims: dict[int, tuple[tuple, _MinimaChain]] = {}
        for c in sorted(alive, key=lambda c: (c.cur, c.birth)):
            j = int(np.argmin(np.abs(new - c.cur)))
            rank = (abs(int(new[j]) - c.cur), c.birth, c.cur)
            held = claims.get(j)
            if held is None:
                claims[j] = (rank, c)
            elif rank < held[0]:
                held[1].death = t
                claims[j] = (rank, c)
            else:
                c.death = t
        for j, (_, c) in claims.items():
            c.cur = int(new[j])
        for j, idx in enumerate(new):
            if j not in claims:
                chains.append(_MinimaChain(t, int(idx)))
    return chains


def detect_boundaries(spectrum: Spectrum1D, cfg: ScaleSpaceConfig) -> BoundarySet:
    """Detect mode boundaries of a spectrum as persistent local minima.

    The angular axis is treated as periodic during smoothing; the radial
    one is extended by its edge values.  Endpoints 0 and ``domain_max``
    are always part of the result; a spectrum without persistent interior
    minima yields the trivial set.
    """
    mode = "wrap" if spectrum.axis == ANGULAR else "nearest"
    chains = _track_minima(spectrum.samples, cfg, mode)
    positions: list[float] = []
    if chains:
        total = cfg.max_scale_steps + 1
        pers = [c.persistence(total) for c in chains]
        if cfg.threshold_rule == "otsu":
            cutoff = otsu_threshold(pers)
        else:
            cutoff = float(cfg.fixed_k)
        scale = spectrum.domain_max / spectrum.samples.size
        positions = sorted(
            {c.birth_idx * scale for c, p in zip(chains, pers) if p > cutoff}
        )
    bounds = [0.0] + [p for p in positions if 0.0 < p < spectrum.domain_max]
    bounds.append(spectrum.domain_max)
    return BoundarySet(np.array(bounds), spectrum.axis, spectrum.domain_max)
