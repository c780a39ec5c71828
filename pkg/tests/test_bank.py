import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ewtex.bank import (
    BankConfig,
    auto_gamma,
    bank_from_json,
    bank_to_json,
    beta,
    build_angular_window,
    build_bank,
    build_lowpass,
    build_radial_window,
    load_bank,
    save_bank,
)
from ewtex.spectral import ANGULAR, RADIAL, BoundarySet

PI = np.pi


def scales(*vals):
    return BoundarySet(np.array([0.0, *vals, PI]), RADIAL)


def angles(*vals):
    return BoundarySet(np.array([0.0, *vals, PI]), ANGULAR)


class TestBeta:
    def test_endpoint_values(self):
        assert beta(0.0) == 0.0
        assert beta(1.0) == 1.0
        assert beta(-2.5) == 0.0
        assert beta(3.0) == 1.0

    def test_midpoint(self):
        assert beta(0.5) == pytest.approx(0.5, abs=1e-15)

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_complement_identity(self, x):
        assert beta(x) + beta(1.0 - x) == pytest.approx(1.0, abs=1e-12)

    def test_vectorized(self):
        out = beta(np.array([-1.0, 0.5, 2.0]))
        assert np.allclose(out, [0.0, 0.5, 1.0])


class TestAutoGamma:
    def test_formula_over_nonzero_boundaries(self):
        cfg = auto_gamma(scales(1.0, 2.0), angles(PI / 2))
        expected = 0.9 * min((2.0 - 1.0) / (2.0 + 1.0), (PI - 2.0) / (PI + 2.0))
        assert cfg.gamma == pytest.approx(expected)

    def test_degenerate_single_support_falls_back(self):
        cfg = auto_gamma(scales(), angles())
        assert cfg.gamma == pytest.approx(0.05)

    def test_uniform_angles_delta(self):
        cfg = auto_gamma(scales(1.0), angles(PI / 4, PI / 2, 3 * PI / 4))
        assert cfg.delta_theta == pytest.approx(0.45 * PI / 4)

    def test_gamma_always_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            k = rng.integers(1, 5)
            interior = np.sort(rng.uniform(0.2, PI - 0.2, k))
            interior = interior[np.r_[True, np.diff(interior) > 0.05]]
            cfg = auto_gamma(scales(*interior), angles(PI / 2))
            assert 0 < cfg.gamma < 1


class TestProfiles:
    # a 64x64 grid has a sample at exact radius pi/4: index (0, 8)
    SC = scales(PI / 4, 2.0)
    AN = angles(PI / 2)
    CFG = BankConfig(gamma=0.2, delta_theta=0.3)

    def test_lowpass_dc_is_one(self):
        low = build_lowpass(self.SC, self.CFG, (64, 64))
        assert low[0, 0] == 1.0

    def test_lowpass_zero_beyond_transition(self):
        low = build_lowpass(self.SC, self.CFG, (64, 64))
        ky = np.fft.fftfreq(64) * 64
        radius = np.hypot(*np.meshgrid(ky, ky, indexing="ij")) * (PI / 32)
        assert np.all(low[radius >= (1 + self.CFG.gamma) * PI / 4] == 0.0)

    def test_lowpass_transition_midpoint(self):
        # |w| = w1 sits exactly mid-transition: cos(pi/2 * beta(1/2))
        low = build_lowpass(self.SC, self.CFG, (64, 64))
        assert low[0, 8] == pytest.approx(np.cos(PI / 4), abs=1e-12)

    def test_ring_rise_midpoint_and_flat(self):
        ring = build_radial_window(1, self.SC, self.CFG, (64, 64))
        assert ring[0, 8] == pytest.approx(np.sin(PI / 4), abs=1e-12)
        # midband: between (1+g) w1 and (1-g) w2
        ky = np.fft.fftfreq(64) * 64
        radius = np.hypot(*np.meshgrid(ky, ky, indexing="ij")) * (PI / 32)
        mid = (radius > 1.2 * PI / 4) & (radius < 0.8 * 2.0)
        assert np.all(ring[mid] == 1.0)

    def test_outer_ring_flat_at_nyquist_corner(self):
        ring = build_radial_window(2, self.SC, self.CFG, (64, 64))
        assert ring[32, 32] == 1.0  # corner radius pi*sqrt(2)

    def test_angular_window_flat_and_edge(self):
        # edges at physical angles -pi/2 and 0; sample (0, kx>0) has angle 0
        win = build_angular_window(0, self.AN, self.CFG, (64, 64))
        win1 = build_angular_window(1, self.AN, self.CFG, (64, 64))
        assert win[0, 8] == pytest.approx(np.sin(PI / 4), abs=1e-12)
        assert win1[0, 8] == pytest.approx(np.cos(PI / 4), abs=1e-12)
        # flat interior: angle -pi/4, sample (ky=-8, kx=8)
        assert win[-8, 8] == 1.0

    def test_angular_antipodal_mirror(self):
        win = build_angular_window(0, self.AN, self.CFG, (64, 64))
        assert win[0, 8] == pytest.approx(win[0, -8], abs=1e-12)
        assert win[5, 9] == pytest.approx(win[-5, -9], abs=1e-12)

    def test_indices_out_of_range(self):
        with pytest.raises(ValueError):
            build_radial_window(3, self.SC, self.CFG, (64, 64))
        with pytest.raises(ValueError):
            build_angular_window(2, self.AN, self.CFG, (64, 64))


class TestBuildBank:
    def test_minimal_partition_is_lowpass_plus_outer_ring(self):
        cfg = auto_gamma(scales(), angles())
        bank = build_bank(scales(), angles(), cfg, 32, 32)
        assert bank.size == 2
        assert bank.n_sectors == 1

    def test_filter_count(self):
        sc, an = scales(1.5), angles(1.2)
        bank = build_bank(sc, an, auto_gamma(sc, an), 32, 32)
        assert bank.size == 1 + 1 * 2

    def test_partition_of_unity(self):
        sc, an = scales(0.9, 1.9), angles(1.0, 2.2)
        bank = build_bank(sc, an, auto_gamma(sc, an), 64, 48)
        assert bank.unity_residual() < 1e-8

    def test_filters_within_unit_interval(self):
        sc, an = scales(0.9, 1.9), angles(1.0, 2.2)
        bank = build_bank(sc, an, auto_gamma(sc, an), 48, 48)
        assert bank.filters.min() >= 0.0
        assert bank.filters.max() <= 1.0

    def test_even_symmetry_exact(self):
        sc, an = scales(0.8), angles(0.9, 1.8, 2.6)
        bank = build_bank(sc, an, auto_gamma(sc, an), 40, 56)
        for filt in bank.filters:
            mirrored = np.roll(filt[::-1, ::-1], (1, 1), axis=(0, 1))
            assert np.array_equal(filt, mirrored)

    def test_at_most_two_radial_profiles_overlap(self):
        sc = scales(0.7, 1.3, 2.1)
        cfg = auto_gamma(sc, angles(PI / 2))
        low = build_lowpass(sc, cfg, (64, 64))
        rings = [build_radial_window(n, sc, cfg, (64, 64)) for n in (1, 2, 3)]
        active = (np.stack([low, *rings]) > 0).sum(axis=0)
        assert active.max() <= 2

    def test_wedge_support_box(self):
        sc, an = scales(1.0, 2.0), angles(1.0, 2.0)
        cfg = auto_gamma(sc, an)
        bank = build_bank(sc, an, cfg, 64, 64)
        ky = np.fft.fftfreq(64) * 64
        grid_ky, grid_kx = np.meshgrid(ky, ky, indexing="ij")
        radius = np.hypot(grid_ky, grid_kx) * (PI / 32)
        pos = np.mod(np.arctan2(grid_ky, grid_kx) + PI / 2, PI)
        # skip the Nyquist row/column: its samples carry both of the
        # folded angles after symmetrization
        interior = np.ones((64, 64), dtype=bool)
        interior[32, :] = False
        interior[:, 32] = False
        g, dth = cfg.gamma, cfg.delta_theta
        wedge = bank.wedge(1, 0)  # ring [1, 2], sector [0, 1] on the folded axis
        outside_r = (radius < (1 - g) * 1.0) | (radius > (1 + g) * 2.0)
        assert np.all(wedge[outside_r & interior] == 0.0)
        outside_a = (pos > 1.0 + dth) & (pos < 2.0 - dth)
        assert np.all(wedge[outside_a & interior] == 0.0)

    def test_invariant_violating_config_rejected(self):
        sc, an = scales(1.0, 1.2), angles(1.0)
        with pytest.raises(ValueError):
            build_bank(sc, an, BankConfig(gamma=0.5, delta_theta=0.3), 32, 32)
        with pytest.raises(ValueError):
            build_bank(scales(1.0), angles(0.1), BankConfig(gamma=0.1, delta_theta=0.06), 32, 32)


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        sc, an = scales(0.77, 1.91), angles(1.1)
        bank = build_bank(sc, an, auto_gamma(sc, an), 32, 48)
        path = tmp_path / "bank.json"
        save_bank(path, bank)
        loaded = load_bank(path)
        assert np.array_equal(loaded.scales.boundaries, bank.scales.boundaries)
        assert np.array_equal(loaded.angles.boundaries, bank.angles.boundaries)
        assert loaded.config.gamma == bank.config.gamma
        assert loaded.config.delta_theta == bank.config.delta_theta
        assert np.array_equal(loaded.filters, bank.filters)
        # serialization is stable
        assert bank_to_json(loaded) == bank_to_json(bank)

    def test_load_at_other_grid(self):
        sc, an = scales(0.77), angles(1.1)
        bank = build_bank(sc, an, auto_gamma(sc, an), 32, 32)
        other = bank_from_json(bank_to_json(bank), shape=(64, 64))
        assert other.shape == (64, 64)
        assert other.unity_residual() < 1e-8

    def test_rejects_foreign_documents(self):
        with pytest.raises(ValueError):
            bank_from_json(json.dumps({"format": "other"}))
