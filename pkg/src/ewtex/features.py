"""Whitened local-energy texture descriptors.

Curvelet coefficients become per-pixel feature vectors by summing
squared coefficients over an s x s window (local energy), optionally
dropping the lowpass plane.  A ZCA transform fitted on training
features decorrelates the columns; the same frozen transform is applied
at test time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bank import CurveletBank, auto_gamma, build_bank
from .boundaries import MergeConfig, merge_boundary_sets
from .spectral import ScaleSpaceConfig, polar_spectra
from .transform import CoefficientStack, forward

#: width-threshold defaults for dictionary-level merging
DEFAULT_T_OMEGA = 0.2
DEFAULT_T_THETA = 0.07


@dataclass(frozen=True)
class FeatureConfig:
    """Feature post-processing choices.

    ``window_s`` is the odd side length of the local-energy window
    (1 means no spatial pooling).  ``drop_lowpass`` removes the lowpass
    plane from the descriptors, which is the right call for textures
    dominated by high frequencies.  ``zca_epsilon`` regularizes the
    whitening eigenvalues.
    """

    window_s: int = 1
    drop_lowpass: bool = True
    zca_epsilon: float = 0.0

    def __post_init__(self):
        if self.window_s < 1 or self.window_s % 2 == 0:
            raise ValueError("window_s must be an odd positive integer")
        if self.zca_epsilon < 0:
            raise ValueError("zca_epsilon must be >= 0")


@dataclass
class FeatureTensor:
    """Row-per-pixel feature matrix with its source image dimensions.

    Row ``y * width + x`` holds the K-vector of pixel (y, x).
    """

    values: np.ndarray  # (Np, K)
    height: int
    width: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a (Np, K) matrix")
        if self.values.shape[0] != self.height * self.width:
            raise ValueError("row count must equal height * width")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def plane(self, k: int) -> np.ndarray:
        """Feature ``k`` reshaped back to image layout."""
        return self.values[:, k].reshape(self.height, self.width)


@dataclass(frozen=True)
class WhiteningTransform:
    """Zero-centering mean and symmetric decorrelating matrix."""

    mean: np.ndarray  # (K,)
    matrix: np.ndarray  # (K, K)

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("whitening matrix must be square")
        if self.mean.shape != (self.matrix.shape[0],):
            raise ValueError("mean length must match matrix size")
        if np.abs(self.matrix - self.matrix.T).max() > 1e-10:
            raise ValueError("whitening matrix must be symmetric")


def _window_sums(planes: np.ndarray, s: int) -> np.ndarray:
    """Sliding s x s sums with mirror padding, via an integral image."""
    pad = s // 2
    padded = np.pad(planes, ((0, 0), (pad, pad), (pad, pad)), mode="symmetric")
    k, ph, pw = padded.shape
    ii = np.zeros((k, ph + 1, pw + 1))
    ii[:, 1:, 1:] = padded.cumsum(axis=1).cumsum(axis=2)
    return (
        ii[:, s:, s:] - ii[:, :-s, s:] - ii[:, s:, :-s] + ii[:, :-s, :-s]
    )


def local_energy(stack: CoefficientStack, cfg: FeatureConfig) -> FeatureTensor:
    """Sum of squared coefficients over the s x s window around each pixel."""
    planes = stack.planes[1:] if cfg.drop_lowpass else stack.planes
    if planes.shape[0] == 0:
        raise ValueError("no coefficient planes left after dropping the lowpass")
    sq = planes * planes
    energy = sq if cfg.window_s == 1 else _window_sums(sq, cfg.window_s)
    h, w = stack.shape
    return FeatureTensor(
        energy.transpose(1, 2, 0).reshape(h * w, -1), height=h, width=w
    )


def _as_matrix(x) -> np.ndarray:
    return x.values if isinstance(x, FeatureTensor) else np.asarray(x, dtype=float)


def fit_zca(x, eps: float = 0.0) -> WhiteningTransform:
    """Fit the symmetric whitening transform on a feature matrix.

    The matrix is ``P (D + eps I)^(-1/2) P^T`` where ``P D P^T`` is the
    eigendecomposition of the column covariance (1/(Np-1) convention) of
    the zero-centered data.  With ``eps=0`` and full-rank input, applying
    the transform makes the sample covariance the identity.
    """
    a = _as_matrix(x)
    if a.ndim != 2:
        raise ValueError("expected a (Np, K) feature matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot whiten non-finite features")
    n, k = a.shape
    if n <= k:
        raise ValueError(f"need more rows ({n}) than columns ({k}) to fit")
    mean = a.mean(axis=0)
    centered = a - mean
    cov = centered.T @ centered / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    evals = np.clip(evals, 0.0, None)  # eigh on PSD may leak tiny negatives
    inv_root = 1.0 / np.sqrt(evals + eps)
    matrix = (evecs * inv_root) @ evecs.T
    matrix = 0.5 * (matrix + matrix.T)
    return WhiteningTransform(mean=mean, matrix=matrix)


def apply_zca(x, w: WhiteningTransform):
    """Center and decorrelate features; returns the same container kind."""
    a = _as_matrix(x)
    if a.shape[1] != w.mean.size:
        raise ValueError(
            f"feature dimension {a.shape[1]} does not match transform ({w.mean.size})"
        )
    out = (a - w.mean) @ w.matrix
    if isinstance(x, FeatureTensor):
        return FeatureTensor(out, height=x.height, width=x.width)
    return out


def build_dictionary_bank(
    textures: list[np.ndarray],
    merge_radial: MergeConfig | None = None,
    merge_angular: MergeConfig | None = None,
    sscfg: ScaleSpaceConfig | None = None,
    shape: tuple[int, int] | None = None,
) -> CurveletBank:
    """Build one bank adapted to a whole dictionary of grayscale textures.

    Detects radial and angular boundary sets on every texture, merges
    them per axis, and assembles the bank on ``shape`` (defaulting to the
    textures' common grid).
    """
    if not textures:
        raise ValueError("need at least one texture")
    first = np.asarray(textures[0])
    for t in textures[1:]:
        if np.asarray(t).shape != first.shape:
            raise ValueError("all dictionary textures must share one grid size")
    merge_radial = merge_radial or MergeConfig(DEFAULT_T_OMEGA)
    merge_angular = merge_angular or MergeConfig(DEFAULT_T_THETA)
    sscfg = sscfg or ScaleSpaceConfig()

    radial_spectra = []
    angular_spectra = []
    for t in textures:
        rad, ang = polar_spectra(t)
        radial_spectra.append(rad)
        angular_spectra.append(ang)
    scales = merge_boundary_sets(radial_spectra, merge_radial, sscfg)
    angles = merge_boundary_sets(angular_spectra, merge_angular, sscfg)
    cfg = auto_gamma(scales, angles)
    h, w = shape if shape is not None else first.shape
    return build_bank(scales, angles, cfg, h, w)


def extract_features(
    image: np.ndarray,
    bank: CurveletBank,
    cfg: FeatureConfig,
    whitening: WhiteningTransform | None = None,
) -> FeatureTensor:
    """Transform, pool and (optionally) whiten one image.

    Pass the transform fitted on the pooled training features to get
    test-time descriptors; pass ``None`` to get raw local energies.
    """
    stack = forward(image, bank)
    feats = local_energy(stack, cfg)
    if whitening is not None:
        feats = apply_zca(feats, whitening)
    return feats


def pool_features(tensors: list[FeatureTensor]) -> np.ndarray:
    """Stack the rows of several feature tensors into one matrix."""
    if not tensors:
        raise ValueError("nothing to pool")
    k = tensors[0].n_features
    if any(t.n_features != k for t in tensors):
        raise ValueError("feature tensors disagree on dimensionality")
    return np.concatenate([t.values for t in tensors], axis=0)


def v_channel(rgb: np.ndarray) -> np.ndarray:
    """HSV value channel of an RGB image: the per-pixel channel maximum."""
    arr = np.asarray(rgb, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) RGB image")
    return arr.max(axis=2)
