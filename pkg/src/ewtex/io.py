"""File formats: binary netpbm images and the feature/label exports.

Images are 8-bit binary PGM (P5) and PPM (P6).  Feature tensors are
exported as "EWTF" files: the 4-byte magic, then format version, height,
width and feature count as little-endian u32, then ``Np * K``
little-endian float32 values in row-major (pixel-major, feature-minor)
order.  Label maps use the same layout with magic "EWTL" and ``Np``
little-endian u16 class indices.
"""

from __future__ import annotations

import struct

import numpy as np

from .classify import SegmentationMap
from .features import FeatureTensor

FEATURE_MAGIC = b"EWTF"
LABEL_MAGIC = b"EWTL"
FORMAT_VERSION = 1


def write_pgm(path, image: np.ndarray, maxval: int = 255):
    """Write a 2D uint image as binary PGM."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError("PGM requires a 2D array")
    if arr.min() < 0 or arr.max() > maxval:
        raise ValueError(f"pixel values outside [0, {maxval}]")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii"))
        fh.write(arr.astype(np.uint8).tobytes())


def write_ppm(path, image: np.ndarray, maxval: int = 255):
    """Write an (H, W, 3) uint image as binary PPM."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("PPM requires an (H, W, 3) array")
    if arr.min() < 0 or arr.max() > maxval:
        raise ValueError(f"pixel values outside [0, {maxval}]")
    with open(path, "wb") as fh:
        fh.write(f"P6\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii"))
        fh.write(arr.astype(np.uint8).tobytes())


def _read_netpbm_tokens(fh, count):
    """Read whitespace/comment-separated ASCII header tokens."""
    tokens = []
    while len(tokens) < count:
        ch = fh.read(1)
        if not ch:
            raise ValueError("truncated netpbm header")
        if ch in b" \t\r\n":
            continue
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        tok = ch
        while True:
            ch = fh.read(1)
            if not ch or ch in b" \t\r\n":
                break
            tok += ch
        tokens.append(tok)
    return tokens


def read_netpbm(path) -> np.ndarray:
    """Read a binary PGM (returns (H, W)) or PPM (returns (H, W, 3))."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
        if magic not in (b"P5", b"P6"):
            raise ValueError(f"unsupported netpbm magic {magic!r}")
        width, height, maxval = (int(t) for t in _read_netpbm_tokens(fh, 3))
        if not 0 < maxval < 256:
            raise ValueError("only 8-bit netpbm images are supported")
        channels = 1 if magic == b"P5" else 3
        data = fh.read(width * height * channels)
        if len(data) != width * height * channels:
            raise ValueError("truncated netpbm payload")
    arr = np.frombuffer(data, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, 3)


def image_to_unit(arr: np.ndarray) -> np.ndarray:
    """8-bit image to floats in [0, 1]."""
    return np.asarray(arr, dtype=float) / 255.0


def unit_to_image(arr: np.ndarray) -> np.ndarray:
    """Floats in [0, 1] to 8-bit, with clipping and round-to-nearest."""
    return np.clip(np.rint(np.asarray(arr) * 255.0), 0, 255).astype(np.uint8)


def write_feature_file(path, tensor: FeatureTensor):
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(
            struct.pack(
                "<4I", FORMAT_VERSION, tensor.height, tensor.width, tensor.n_features
            )
        )
        fh.write(np.ascontiguousarray(tensor.values, dtype="<f4").tobytes())


def read_feature_file(path) -> FeatureTensor:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FEATURE_MAGIC:
            raise ValueError(f"not a feature file (magic {magic!r})")
        version, height, width, k = struct.unpack("<4I", fh.read(16))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported feature format version {version}")
        payload = fh.read(height * width * k * 4)
    values = np.frombuffer(payload, dtype="<f4")
    if values.size != height * width * k:
        raise ValueError("truncated feature payload")
    return FeatureTensor(
        values.astype(float).reshape(height * width, k), height=height, width=width
    )


def write_label_file(path, seg: SegmentationMap):
    if seg.num_classes > 0x10000:
        raise ValueError("label file supports at most 65536 classes")
    with open(path, "wb") as fh:
        fh.write(LABEL_MAGIC)
        fh.write(struct.pack("<3I", FORMAT_VERSION, seg.shape[0], seg.shape[1]))
        fh.write(np.ascontiguousarray(seg.labels, dtype="<u2").tobytes())


def read_label_file(path) -> SegmentationMap:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != LABEL_MAGIC:
            raise ValueError(f"not a label file (magic {magic!r})")
        version, height, width = struct.unpack("<3I", fh.read(12))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported label format version {version}")
        payload = fh.read(height * width * 2)
    labels = np.frombuffer(payload, dtype="<u2")
    if labels.size != height * width:
        raise ValueError("truncated label payload")
    labels = labels.astype(np.int64).reshape(height, width)
    return SegmentationMap(labels=labels, num_classes=int(labels.max()) + 1)
