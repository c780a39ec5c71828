import numpy as np
import pytest

from ewtex.classify import SegmentationMap
from ewtex.features import FeatureTensor
from ewtex.io import (
    image_to_unit,
    read_feature_file,
    read_label_file,
    read_netpbm,
    unit_to_image,
    write_feature_file,
    write_label_file,
    write_pgm,
    write_ppm,
)


class TestNetpbm:
    def test_pgm_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, (13, 17)).astype(np.uint8)
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        assert np.array_equal(read_netpbm(path), img)

    def test_ppm_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, (5, 7, 3)).astype(np.uint8)
        path = tmp_path / "img.ppm"
        write_ppm(path, img)
        assert np.array_equal(read_netpbm(path), img)

    def test_reader_skips_comments(self, tmp_path):
        path = tmp_path / "c.pgm"
        payload = bytes(range(6))
        path.write_bytes(b"P5\n# a comment\n3 2\n# more\n255\n" + payload)
        img = read_netpbm(path)
        assert img.shape == (2, 3)
        assert img.ravel().tolist() == list(range(6))

    def test_rejects_unknown_magic(self, tmp_path):
        path = tmp_path / "x.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
        with pytest.raises(ValueError):
            read_netpbm(path)

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x00")
        with pytest.raises(ValueError):
            read_netpbm(path)

    def test_unit_conversions(self):
        img = np.array([[0, 128, 255]], dtype=np.uint8)
        unit = image_to_unit(img)
        assert unit[0, 0] == 0.0 and unit[0, 2] == 1.0
        assert np.array_equal(unit_to_image(unit), img)

    def test_writer_is_deterministic(self, tmp_path):
        img = np.arange(12, dtype=np.uint8).reshape(3, 4)
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        write_pgm(a, img)
        write_pgm(b, img)
        assert a.read_bytes() == b.read_bytes()


class TestFeatureFile:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        values = rng.standard_normal((6 * 4, 3)).astype(np.float32).astype(float)
        tensor = FeatureTensor(values, height=6, width=4)
        path = tmp_path / "f.ewtf"
        write_feature_file(path, tensor)
        back = read_feature_file(path)
        assert (back.height, back.width, back.n_features) == (6, 4, 3)
        assert np.array_equal(back.values, values)

    def test_header_layout(self, tmp_path):
        tensor = FeatureTensor(np.zeros((4, 2)), height=2, width=2)
        path = tmp_path / "f.ewtf"
        write_feature_file(path, tensor)
        blob = path.read_bytes()
        assert blob[:4] == b"EWTF"
        assert np.frombuffer(blob[4:20], dtype="<u4").tolist() == [1, 2, 2, 2]
        assert len(blob) == 20 + 4 * 2 * 4

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.ewtf"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError):
            read_feature_file(path)


class TestLabelFile:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 5, (9, 7))
        seg = SegmentationMap(labels=labels, num_classes=5)
        path = tmp_path / "l.ewtl"
        write_label_file(path, seg)
        back = read_label_file(path)
        assert np.array_equal(back.labels, labels)

    def test_header_layout(self, tmp_path):
        seg = SegmentationMap(np.zeros((3, 5), dtype=np.int64), num_classes=1)
        path = tmp_path / "l.ewtl"
        write_label_file(path, seg)
        blob = path.read_bytes()
        assert blob[:4] == b"EWTL"
        assert np.frombuffer(blob[4:16], dtype="<u4").tolist() == [1, 3, 5]
        assert len(blob) == 16 + 15 * 2

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.ewtl"
        path.write_bytes(b"EWTF" + b"\x00" * 12)
        with pytest.raises(ValueError):
            read_label_file(path)
