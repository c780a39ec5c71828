#!/usr/bin/env python3
"""Turn curvelet coefficients into whitened per-pixel texture descriptors.

Two sinusoid textures with identical mean and variance are
indistinguishable by raw intensity; their local-energy descriptors in
the adapted wedge filters separate them cleanly, and ZCA whitening
decorrelates the feature columns.
"""

import numpy as np

from ewtex import (
    FeatureConfig,
    apply_zca,
    build_dictionary_bank,
    extract_features,
    fit_zca,
)
from ewtex.features import pool_features

SIDE = 128
rng = np.random.default_rng(0)
x = np.arange(SIDE)
gx, gy = np.meshgrid(x, x)
# light broadband noise keeps the feature covariance full-rank
t1 = 0.5 + 0.28 * np.cos(2 * np.pi * 12 * gx / SIDE) + 0.02 * rng.standard_normal((SIDE, SIDE))
t2 = 0.5 + 0.28 * np.cos(2 * np.pi * 28 * gy / SIDE) + 0.02 * rng.standard_normal((SIDE, SIDE))

print("raw-intensity statistics (indistinguishable):")
print(f"  texture 1: mean {t1.mean():.4f}  var {t1.var():.4f}")
print(f"  texture 2: mean {t2.mean():.4f}  var {t2.var():.4f}")

bank = build_dictionary_bank([t1, t2])
cfg = FeatureConfig(window_s=1, drop_lowpass=True)
f1 = extract_features(t1, bank, cfg)
f2 = extract_features(t2, bank, cfg)

print(f"\ndescriptor dimensionality: {f1.n_features} (lowpass dropped)")
print("mean descriptor per texture (clearly different wedges light up):")
print(f"  texture 1: {np.round(f1.values.mean(axis=0), 4)}")
print(f"  texture 2: {np.round(f2.values.mean(axis=0), 4)}")

def peak_correlation(matrix):
    # correlation over the columns that actually carry energy
    energetic = matrix[:, matrix.std(axis=0) > 1e-4]
    corr = np.corrcoef(energetic.T)
    return np.abs(corr - np.eye(len(corr))).max()


pooled_raw = pool_features([f1, f2])
whitening = fit_zca(pooled_raw, eps=1e-9)
w1 = apply_zca(f1, whitening)
w2 = apply_zca(f2, whitening)
pooled_white = np.concatenate([w1.values, w2.values])

print(f"\nmax |off-diagonal correlation| before whitening: {peak_correlation(pooled_raw):.3f}")
print(f"max |off-diagonal correlation| after whitening:  {peak_correlation(pooled_white):.3f}")

separation = np.abs(w1.values.mean(axis=0) - w2.values.mean(axis=0))
print(f"strongest whitened mean-descriptor separation: {separation.max():.3f}")
