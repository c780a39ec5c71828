import numpy as np
import pytest
from scipy.ndimage import gaussian_filter1d

from ewtex.spectral import (
    ANGULAR,
    ANGULAR_BINS,
    RADIAL,
    BoundarySet,
    ScaleSpaceConfig,
    Spectrum1D,
    detect_boundaries,
    polar_spectra,
)

PI = np.pi


def two_bump_spectrum(n=256, c1=0.8, c2=2.2, width=0.3):
    pos = np.arange(n) * (PI / n)
    samples = np.exp(-((pos - c1) ** 2) / (2 * width**2)) + np.exp(
        -((pos - c2) ** 2) / (2 * width**2)
    )
    return Spectrum1D(samples, RADIAL)


class TestTypes:
    def test_spectrum_rejects_negative_samples(self):
        with pytest.raises(ValueError):
            Spectrum1D(np.array([1.0, -0.1] + [0.0] * 10), RADIAL)

    def test_spectrum_rejects_short_input(self):
        with pytest.raises(ValueError):
            Spectrum1D(np.ones(7), RADIAL)

    def test_spectrum_rejects_unknown_axis(self):
        with pytest.raises(ValueError):
            Spectrum1D(np.ones(16), "diagonal")

    def test_boundary_set_invariants(self):
        bs = BoundarySet(np.array([0.0, 1.0, PI]), RADIAL)
        assert bs.boundaries[0] == 0.0
        assert bs.boundaries[-1] == PI
        assert bs.n_supports == 2
        with pytest.raises(ValueError):
            BoundarySet(np.array([0.1, 1.0, PI]), RADIAL)
        with pytest.raises(ValueError):
            BoundarySet(np.array([0.0, 1.0, 1.0, PI]), RADIAL)
        with pytest.raises(ValueError):
            BoundarySet(np.array([0.0]), RADIAL)

    def test_scale_space_config_validation(self):
        with pytest.raises(ValueError):
            ScaleSpaceConfig(step=0.0)
        with pytest.raises(ValueError):
            ScaleSpaceConfig(max_scale_steps=1)
        with pytest.raises(ValueError):
            ScaleSpaceConfig(threshold_rule="median")


class TestPolarSpectra:
    def test_constant_image_has_only_dc_energy(self):
        radial, angular = polar_spectra(np.full((32, 32), 3.0))
        assert radial.samples[0] > 0
        assert np.all(radial.samples[1:] == 0)
        # DC is excluded from the angular average
        assert np.all(angular.samples == 0)

    def test_impulse_image_has_flat_spectra(self):
        img = np.zeros((32, 32))
        img[16, 16] = 1.0
        radial, angular = polar_spectra(img)
        assert np.allclose(radial.samples, radial.samples[0])
        nonempty = angular.samples[angular.samples > 0]
        assert np.allclose(nonempty, nonempty[0])

    def test_horizontal_sinusoid_peaks_at_theta_zero(self):
        # oracle: matrix DFT computed without the FFT path
        n = 64
        x = np.arange(n)
        img = np.cos(2 * PI * 8 * x / n)[None, :].repeat(n, axis=0)
        dft = np.exp(-2j * PI * np.outer(x, x) / n)
        mag = np.abs(dft @ img @ dft)
        ky = np.where(x < n // 2, x, x - n)
        grid_ky, grid_kx = np.meshgrid(ky, ky, indexing="ij")
        pos = np.mod(np.arctan2(grid_ky, grid_kx) + PI / 2, PI)
        abin = np.minimum((pos * (ANGULAR_BINS / PI)).astype(int), ANGULAR_BINS - 1)
        keep = np.ones((n, n), dtype=bool)
        keep[0, 0] = False
        sums = np.bincount(abin[keep], weights=mag[keep], minlength=ANGULAR_BINS)
        cnts = np.bincount(abin[keep], minlength=ANGULAR_BINS)
        oracle = np.where(cnts > 0, sums / np.maximum(cnts, 1), 0.0)
        theta_zero_bin = int((PI / 2) * ANGULAR_BINS / PI)

        _, angular = polar_spectra(img)
        assert np.argmax(angular.samples) == theta_zero_bin
        assert np.argmax(oracle) == theta_zero_bin
        assert np.allclose(angular.samples, oracle, atol=1e-9)

    def test_rejects_small_images(self):
        with pytest.raises(ValueError):
            polar_spectra(np.ones((7, 64)))

    def test_rotated_image_shifts_angular_bins(self):
        # pi/2 rotation is half the half-plane span: 180 of 360 bins
        n = 64
        x = np.arange(n)
        grid_x, grid_y = np.meshgrid(x, x)
        img = np.cos(2 * PI * 6 * (grid_x + 2 * grid_y) / n)
        _, ang = polar_spectra(img)
        _, ang_rot = polar_spectra(np.rot90(img))
        shift = (np.argmax(ang_rot.samples) - np.argmax(ang.samples)) % ANGULAR_BINS
        assert abs(shift - 180) <= 1


def brute_force_persistent_minima(samples, cfg, mode):
    """Independent persistence count: for every bin that is ever a strict
    minimum, follow it greedily (nearest minimum each step) and count the
    consecutive steps it survives."""
    levels = [np.asarray(samples, dtype=float)]
    for _ in range(cfg.max_scale_steps):
        levels.append(gaussian_filter1d(levels[-1], np.sqrt(cfg.step), mode=mode))

    def minima(s):
        return [
            i
            for i in range(1, len(s) - 1)
            if s[i] < s[i - 1] and s[i] < s[i + 1]
        ]

    per_level = [minima(s) for s in levels]
    results = {}
    for start, mins in enumerate(per_level):
        for idx in mins:
            if start > 0 and results:
                continue  # only track from the first appearance of any minima
            pos = idx
            count = 1
            for lvl in per_level[start + 1 :]:
                if not lvl:
                    break
                nearest = min(lvl, key=lambda j: abs(j - pos))
                pos = nearest
                count += 1
            results[idx] = max(results.get(idx, 0), count)
    return results


class TestDetectBoundaries:
    CFG = ScaleSpaceConfig(step=1.0, max_scale_steps=32)

    def test_monotone_spectrum_yields_trivial_set(self):
        sp = Spectrum1D(np.linspace(5.0, 0.5, 128), RADIAL)
        bs = detect_boundaries(sp, self.CFG)
        assert np.array_equal(bs.boundaries, [0.0, PI])

    def test_flat_spectrum_yields_trivial_set(self):
        sp = Spectrum1D(np.ones(64), RADIAL)
        bs = detect_boundaries(sp, self.CFG)
        assert np.array_equal(bs.boundaries, [0.0, PI])

    def test_two_bumps_yield_boundary_near_valley(self):
        sp = two_bump_spectrum()
        bin_width = PI / sp.samples.size

        # brute-force oracle: the valley minimum survives every step
        trace = brute_force_persistent_minima(sp.samples, self.CFG, "nearest")
        oracle_positions = [i * bin_width for i, c in trace.items() if c == 33]
        assert any(abs(p - 1.5) <= 2 * bin_width for p in oracle_positions)

        bs = detect_boundaries(sp, self.CFG)
        assert any(abs(b - 1.5) <= 2 * bin_width for b in bs.interior)

    def test_deterministic(self):
        sp = two_bump_spectrum()
        a = detect_boundaries(sp, self.CFG)
        b = detect_boundaries(sp, self.CFG)
        assert np.array_equal(a.boundaries, b.boundaries)

    def test_fixed_threshold_rule(self):
        sp = two_bump_spectrum()
        cfg = ScaleSpaceConfig(step=1.0, max_scale_steps=32, threshold_rule="fixed", fixed_k=30)
        bs = detect_boundaries(sp, cfg)
        assert bs.interior.size >= 1

    def test_boundaries_are_minima_at_some_scale(self):
        # every interior boundary re-appears as a strict minimum in the
        # recomputed smoothing trace
        rng = np.random.default_rng(7)
        base = two_bump_spectrum().samples + 0.05 * rng.random(256)
        sp = Spectrum1D(base, RADIAL)
        bs = detect_boundaries(sp, self.CFG)
        bin_width = PI / sp.samples.size

        levels = [sp.samples]
        for _ in range(self.CFG.max_scale_steps):
            levels.append(gaussian_filter1d(levels[-1], 1.0, mode="nearest"))
        all_minima = set()
        for s in levels:
            all_minima.update(
                i for i in range(1, len(s) - 1) if s[i] < s[i - 1] and s[i] < s[i + 1]
            )
        for b in bs.interior:
            assert int(round(b / bin_width)) in all_minima
