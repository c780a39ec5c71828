#!/usr/bin/env python3
"""Build a curvelet filter bank adapted to a pair of textures.

Walks through the first half of the pipeline: pseudo-polar spectra,
scale-space boundary detection, merging across the texture dictionary,
and the tight-frame wedge filters that come out.  Saves a figure of the
filters next to this script when matplotlib is available.
"""

import numpy as np

from ewtex import (
    MergeConfig,
    ScaleSpaceConfig,
    auto_gamma,
    build_bank,
    detect_boundaries,
    merge_boundary_sets,
    polar_spectra,
)

SIDE = 256
x = np.arange(SIDE)
gx, gy = np.meshgrid(x, x)
coarse_horizontal = 0.5 + 0.3 * np.cos(2 * np.pi * 24 * gx / SIDE)
fine_vertical = 0.5 + 0.3 * np.cos(2 * np.pi * 56 * gy / SIDE)
textures = [coarse_horizontal, fine_vertical]

print("== per-texture spectra and boundaries ==")
sscfg = ScaleSpaceConfig()
radial_spectra, angular_spectra = [], []
for name, tex in [("coarse horizontal", coarse_horizontal), ("fine vertical", fine_vertical)]:
    radial, angular = polar_spectra(tex)
    radial_spectra.append(radial)
    angular_spectra.append(angular)
    rb = detect_boundaries(radial, sscfg)
    ab = detect_boundaries(angular, sscfg)
    print(f"{name}:")
    print(f"  radial boundaries  {np.round(rb.boundaries, 3)}")
    print(f"  angular boundaries {np.round(ab.boundaries, 3)}")

print("\n== merged dictionary-level boundary sets ==")
scales = merge_boundary_sets(radial_spectra, MergeConfig(0.2), sscfg)
angles = merge_boundary_sets(angular_spectra, MergeConfig(0.07), sscfg)
print(f"scales {np.round(scales.boundaries, 3)}")
print(f"angles {np.round(angles.boundaries, 3)}")

cfg = auto_gamma(scales, angles)
print(f"\ntransition widths: gamma={cfg.gamma:.4f}, delta_theta={cfg.delta_theta:.4f}")

bank = build_bank(scales, angles, cfg, SIDE, SIDE)
print(f"bank: {bank.n_scales} scales x {bank.n_sectors} sectors -> K={bank.size} filters")
print(f"partition-of-unity residual: {bank.unity_residual():.3e} (tight frame)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cols = min(bank.size, 6)
    rows = int(np.ceil(bank.size / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(2.2 * cols, 2.2 * rows))
    for k, ax in enumerate(np.atleast_1d(axes).ravel()):
        if k < bank.size:
            ax.imshow(np.fft.fftshift(bank.filters[k]), cmap="magma")
            ax.set_title("lowpass" if k == 0 else f"wedge {k}", fontsize=8)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig("demo01_filters.png", dpi=110)
    print("wrote demo01_filters.png")
except ImportError:
    print("matplotlib not installed; skipping the figure")
