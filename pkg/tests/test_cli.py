import json

import numpy as np
import pytest

from ewtex import bank as bank_mod
from ewtex import io
from ewtex.cli import (
    EXIT_INPUT,
    EXIT_OK,
    main,
    parse_config_file,
)

PI = np.pi


def oriented_texture(n, cycles, vertical=False):
    x = np.arange(n)
    grid = np.meshgrid(x, x)[1 if vertical else 0]
    return 0.5 + 0.3 * np.cos(2 * PI * cycles * grid / n)


@pytest.fixture()
def texture_dir(tmp_path):
    d = tmp_path / "textures"
    d.mkdir()
    io.write_pgm(d / "a.pgm", io.unit_to_image(oriented_texture(64, 6)))
    io.write_pgm(d / "b.pgm", io.unit_to_image(oriented_texture(64, 14, vertical=True)))
    return d


class TestConfig:
    def test_parse_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# pipeline settings\n"
            "window_s = 3\n"
            "drop_lowpass = false  # keep the lowpass\n"
            "t_omega = 0.15\n"
        )
        out = parse_config_file(cfg)
        assert out == {"window_s": 3, "drop_lowpass": False, "t_omega": 0.15}

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("wavelets = 7\n")
        with pytest.raises(ValueError):
            parse_config_file(cfg)

    def test_flag_overrides_file_overrides_default(self, tmp_path, texture_dir):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("ss_max_steps = 48\n")
        out = tmp_path / "bank.json"
        # flag wins over the file value
        code = main(
            [
                "build-bank",
                "--textures", str(texture_dir),
                "--out", str(out),
                "--config", str(cfg),
                "--ss_max_steps", "64",
            ]
        )
        assert code == EXIT_OK
        assert out.exists()


class TestBuildBank:
    def test_writes_loadable_bank_and_prints_counts(self, tmp_path, texture_dir, capsys):
        out = tmp_path / "bank.json"
        assert main(["build-bank", "--textures", str(texture_dir), "--out", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "N_s" in printed and "N_theta" in printed and "K" in printed
        bank = bank_mod.load_bank(out)
        assert bank.unity_residual() < 1e-8

    def test_byte_identical_rerun(self, tmp_path, texture_dir):
        out1 = tmp_path / "bank1.json"
        out2 = tmp_path / "bank2.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(out1)])
        main(["build-bank", "--textures", str(texture_dir), "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_two_orientation_dictionary_has_sectors(self, tmp_path, texture_dir):
        out = tmp_path / "bank.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(out)])
        assert bank_mod.load_bank(out).n_sectors >= 2

    def test_missing_directory_exits_2(self, tmp_path, capsys):
        code = main(
            ["build-bank", "--textures", str(tmp_path / "nope"), "--out", str(tmp_path / "b.json")]
        )
        assert code == EXIT_INPUT


class TestExtract:
    def test_header_matches_and_rerun_identical(self, tmp_path, texture_dir):
        bank_path = tmp_path / "bank.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(bank_path)])
        img = texture_dir / "a.pgm"
        f1 = tmp_path / "one.ewtf"
        f2 = tmp_path / "two.ewtf"
        assert main(["extract", "--bank", str(bank_path), "--image", str(img), "--out", str(f1)]) == EXIT_OK
        main(["extract", "--bank", str(bank_path), "--image", str(img), "--out", str(f2)])
        assert f1.read_bytes() == f2.read_bytes()
        tensor = io.read_feature_file(f1)
        bank = bank_mod.load_bank(bank_path)
        assert (tensor.height, tensor.width) == bank.shape
        assert tensor.n_features == bank.size - 1  # lowpass dropped by default

    def test_mask_writes_label_file(self, tmp_path, texture_dir):
        bank_path = tmp_path / "bank.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(bank_path)])
        mask = tmp_path / "mask.pgm"
        io.write_pgm(mask, np.zeros((64, 64), dtype=np.uint8))
        out = tmp_path / "f.ewtf"
        main(
            [
                "extract",
                "--bank", str(bank_path),
                "--image", str(texture_dir / "a.pgm"),
                "--out", str(out),
                "--mask", str(mask),
            ]
        )
        labels = io.read_label_file(tmp_path / "f.ewtl")
        assert labels.shape == (64, 64)

    def test_grid_mismatch_exits_2(self, tmp_path, texture_dir):
        bank_path = tmp_path / "bank.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(bank_path)])
        small = tmp_path / "small.pgm"
        io.write_pgm(small, np.zeros((32, 32), dtype=np.uint8))
        code = main(
            ["extract", "--bank", str(bank_path), "--image", str(small), "--out", str(tmp_path / "x.ewtf")]
        )
        assert code == EXIT_INPUT


class TestEvaluate:
    def test_ground_truth_against_itself(self, tmp_path, capsys):
        gt = tmp_path / "gt.pgm"
        rng = np.random.default_rng(0)
        io.write_pgm(gt, rng.integers(0, 3, (32, 32)).astype(np.uint8))
        json_out = tmp_path / "scores.json"
        assert main(["evaluate", "--pred", str(gt), "--truth", str(gt), "--json", str(json_out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "vd 100.0000" in printed
        doc = json.loads(json_out.read_text())
        assert all(doc[k] == pytest.approx(100.0) for k in ("nvoi", "ssc", "sdhd", "vd"))

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["evaluate", "--pred", "nope.pgm", "--truth", "nada.pgm"]) == EXIT_INPUT


class TestGenDataset:
    def test_reproducible_files(self, tmp_path, texture_dir):
        out1 = tmp_path / "d1"
        out2 = tmp_path / "d2"
        args = [
            "gen-dataset",
            "--textures", str(texture_dir),
            "--count", "2",
            "--regions", "2",
            "--mask-width", "64",
            "--mask-height", "64",
            "--mask-sigma", "16",
            "--rng_seed", "4",
        ]
        assert main(args + ["--out", str(out1)]) == EXIT_OK
        assert main(args + ["--out", str(out2)]) == EXIT_OK
        for name in ("mask_000.pgm", "mosaic_000.pgm", "mask_001.pgm", "mosaic_001.pgm"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_voronoi_kind(self, tmp_path, texture_dir):
        out = tmp_path / "d"
        code = main(
            [
                "gen-dataset",
                "--textures", str(texture_dir),
                "--out", str(out),
                "--count", "1",
                "--mask-kind", "voronoi",
                "--mask-width", "48",
                "--mask-height", "48",
                "--cells", "5",
                "--classes", "2",
            ]
        )
        assert code == EXIT_OK
        mask = io.read_netpbm(out / "mask_000.pgm")
        assert set(np.unique(mask)) == {0, 1}


class TestColorPath:
    def test_v_channel_pipeline(self, tmp_path):
        d = tmp_path / "color"
        d.mkdir()
        rng = np.random.default_rng(0)
        base1 = oriented_texture(64, 6)
        base2 = oriented_texture(64, 14, vertical=True)
        for name, base in (("a", base1), ("b", base2)):
            rgb = np.stack([0.3 * base, 0.6 * base, base], axis=2)  # V == base
            io.write_ppm(d / f"{name}.ppm", io.unit_to_image(rgb))
        bank_path = tmp_path / "bank.json"
        assert main(
            [
                "build-bank", "--textures", str(d), "--out", str(bank_path),
                "--color_mode", "color_v_channel",
            ]
        ) == EXIT_OK
        out = tmp_path / "f.ewtf"
        assert main(
            [
                "extract", "--bank", str(bank_path), "--image", str(d / "a.ppm"),
                "--out", str(out), "--color_mode", "color_v_channel",
            ]
        ) == EXIT_OK
        tensor = io.read_feature_file(out)
        bank = bank_mod.load_bank(bank_path)
        # the lowpass plane is kept by default on the color path
        assert tensor.n_features == bank.size

    def test_color_image_rejected_in_grayscale_mode(self, tmp_path, texture_dir):
        bank_path = tmp_path / "bank.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(bank_path)])
        rgb = tmp_path / "c.ppm"
        io.write_ppm(rgb, np.zeros((64, 64, 3), dtype=np.uint8))
        code = main(
            ["extract", "--bank", str(bank_path), "--image", str(rgb), "--out", str(tmp_path / "x.ewtf")]
        )
        assert code == EXIT_INPUT


class TestTrainSegmentRoundTrip:
    def test_small_end_to_end(self, tmp_path, texture_dir):
        # tiny smoke run; the full experiment lives in the acceptance suite
        bank_path = tmp_path / "bank.json"
        main(["build-bank", "--textures", str(texture_dir), "--out", str(bank_path)])

        data = tmp_path / "data"
        main(
            [
                "gen-dataset",
                "--textures", str(texture_dir),
                "--out", str(data),
                "--count", "2",
                "--regions", "2",
                "--mask-width", "64",
                "--mask-height", "64",
                "--mask-sigma", "16",
            ]
        )
        feats, labels = [], []
        for i in range(2):
            f = tmp_path / f"f{i}.ewtf"
            main(
                [
                    "extract",
                    "--bank", str(bank_path),
                    "--image", str(data / f"mosaic_{i:03d}.pgm"),
                    "--out", str(f),
                    "--mask", str(data / f"mask_{i:03d}.pgm"),
                ]
            )
            feats.append(str(f))
            labels.append(str(tmp_path / f"f{i}.ewtl"))

        model = tmp_path / "model.json"
        code = main(
            ["train", "--features", *feats, "--labels", *labels, "--out", str(model), "--epochs", "20"]
        )
        assert code == EXIT_OK

        seg_out = tmp_path / "pred.pgm"
        code = main(
            [
                "segment",
                "--model", str(model),
                "--features", feats[0],
                "--out", str(seg_out),
            ]
        )
        assert code == EXIT_OK
        pred = io.read_netpbm(seg_out)
        assert pred.shape == (64, 64)

        code = main(
            ["evaluate", "--pred", str(seg_out), "--truth", str(data / "mask_000.pgm")]
        )
        assert code == EXIT_OK
