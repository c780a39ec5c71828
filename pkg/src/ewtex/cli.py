"""Command line pipeline: build-bank, extract, train, segment, evaluate,
gen-dataset.

Configuration lives in a flat ``key = value`` text file (``#`` starts a
comment); every key can be overridden by a command-line flag of the same
name.  Exit codes: 0 on success, 2 on input errors, 3 on numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bank as bank_mod
from . import classify, datagen, features, io, metrics
from .boundaries import MergeConfig
from .errors import NumericalError
from .spectral import ScaleSpaceConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

GRAYSCALE = "grayscale"
COLOR_V = "color_v_channel"


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


#: every tunable key: (type parser, default)
CONFIG_KEYS = {
    "color_mode": (str, GRAYSCALE),
    "window_s": (int, 1),
    "drop_lowpass": (_parse_bool, True),
    "zca_epsilon": (float, 1e-6),
    "t_omega": (float, 0.2),
    "t_theta": (float, 0.07),
    "ss_step": (float, 1.0),
    "ss_max_steps": (int, 64),
    "learning_rate": (float, 1e-3),
    "weight_decay": (float, 1e-4),
    "beta1": (float, 0.95),
    "beta2": (float, 0.999),
    "adam_epsilon": (float, 1e-8),
    "epochs": (int, 200),
    "batch_size": (int, 0),
    "rng_seed": (int, 0),
    "refine_fraction": (float, 0.005),
    "architecture": (str, classify.ARCH_SOFTMAX),
    "hidden": (int, 16),
}


def parse_config_file(path) -> dict:
    """Flat key = value lines; unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = CONFIG_KEYS[key][0](value)
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    explicit = set()
    if getattr(args, "config", None):
        from_file = parse_config_file(args.config)
        cfg.update(from_file)
        explicit.update(from_file)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
            explicit.add(key)
    if cfg["color_mode"] not in (GRAYSCALE, COLOR_V):
        raise ValueError(f"unknown color_mode {cfg['color_mode']!r}")
    if cfg["color_mode"] == COLOR_V and "drop_lowpass" not in explicit:
        cfg["drop_lowpass"] = False  # color textures keep their low band
    return cfg


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    for key, (parse, default) in CONFIG_KEYS.items():
        parser.add_argument(
            f"--{key}", type=parse, default=None, help=f"(default {default})"
        )


def _load_gray_image(path, color_mode: str) -> np.ndarray:
    arr = io.read_netpbm(path)
    if arr.ndim == 3:
        if color_mode != COLOR_V:
            raise ValueError(
                f"{path} is a color image; set color_mode={COLOR_V} to use it"
            )
        return features.v_channel(io.image_to_unit(arr))
    return io.image_to_unit(arr)


def _list_texture_files(directory) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise ValueError(f"texture directory {root} does not exist")
    paths = sorted(p for p in root.iterdir() if p.suffix in (".pgm", ".ppm"))
    if not paths:
        raise ValueError(f"no .pgm/.ppm textures in {root}")
    return paths


def _scale_space(cfg) -> ScaleSpaceConfig:
    return ScaleSpaceConfig(step=cfg["ss_step"], max_scale_steps=cfg["ss_max_steps"])


def _feature_config(cfg) -> features.FeatureConfig:
    return features.FeatureConfig(
        window_s=cfg["window_s"],
        drop_lowpass=cfg["drop_lowpass"],
        zca_epsilon=cfg["zca_epsilon"],
    )


def _train_config(cfg) -> classify.TrainConfig:
    return classify.TrainConfig(
        learning_rate=cfg["learning_rate"],
        weight_decay=cfg["weight_decay"],
        beta1=cfg["beta1"],
        beta2=cfg["beta2"],
        adam_epsilon=cfg["adam_epsilon"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        rng_seed=cfg["rng_seed"],
    )


def cmd_build_bank(args) -> int:
    cfg = resolve_config(args)
    textures = [
        _load_gray_image(p, cfg["color_mode"]) for p in _list_texture_files(args.textures)
    ]
    shape = None
    if args.grid_height or args.grid_width:
        if not (args.grid_height and args.grid_width):
            raise ValueError("--grid-height and --grid-width go together")
        shape = (args.grid_height, args.grid_width)
    bank = features.build_dictionary_bank(
        textures,
        merge_radial=MergeConfig(cfg["t_omega"]),
        merge_angular=MergeConfig(cfg["t_theta"]),
        sscfg=_scale_space(cfg),
        shape=shape,
    )
    bank_mod.save_bank(args.out, bank)
    print(f"N_s {bank.n_scales}")
    print(f"N_theta {bank.n_sectors}")
    print(f"K {bank.size}")
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = resolve_config(args)
    bank = bank_mod.load_bank(args.bank)
    image = _load_gray_image(args.image, cfg["color_mode"])
    if image.shape != bank.shape:
        raise ValueError(
            f"image {image.shape} does not match bank grid {bank.shape}"
        )
    tensor = features.extract_features(image, bank, _feature_config(cfg))
    io.write_feature_file(args.out, tensor)
    if args.mask:
        mask = io.read_netpbm(args.mask)
        if mask.ndim != 2:
            raise ValueError("mask must be a PGM class-index image")
        seg = classify.SegmentationMap(
            labels=mask.astype(np.int64), num_classes=int(mask.max()) + 1
        )
        labels_out = args.labels_out or str(Path(args.out).with_suffix(".ewtl"))
        io.write_label_file(labels_out, seg)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    if len(args.features) != len(args.labels):
        raise ValueError("need as many --labels files as --features files")
    tensors = [io.read_feature_file(p) for p in args.features]
    label_maps = [io.read_label_file(p) for p in args.labels]
    whitening = features.fit_zca(features.pool_features(tensors), eps=cfg["zca_epsilon"])
    whitened = [features.apply_zca(t, whitening) for t in tensors]
    model = classify.train(
        whitened,
        label_maps,
        architecture=cfg["architecture"],
        hidden=cfg["hidden"],
        cfg=_train_config(cfg),
    )
    doc = classify.model_to_dict(model)
    doc["whitening"] = {
        "mean": whitening.mean.tolist(),
        "matrix": whitening.matrix.ravel().tolist(),
    }
    with open(args.out, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _load_model(path):
    doc = json.loads(Path(path).read_text())
    model = classify.model_from_dict(doc)
    whitening = None
    if "whitening" in doc:
        k = model.input_dim
        whitening = features.WhiteningTransform(
            mean=np.array(doc["whitening"]["mean"], dtype=float),
            matrix=np.array(doc["whitening"]["matrix"], dtype=float).reshape(k, k),
        )
    return model, whitening


def cmd_segment(args) -> int:
    cfg = resolve_config(args)
    model, whitening = _load_model(args.model)
    if args.features:
        tensor = io.read_feature_file(args.features)
    else:
        if not (args.bank and args.image):
            raise ValueError("segment needs --features or both --bank and --image")
        bank = bank_mod.load_bank(args.bank)
        image = _load_gray_image(args.image, cfg["color_mode"])
        tensor = features.extract_features(image, bank, _feature_config(cfg))
    if whitening is not None:
        tensor = features.apply_zca(tensor, whitening)
    seg = classify.predict(tensor, model)
    if cfg["refine_fraction"] > 0:
        seg = classify.refine(seg, cfg["refine_fraction"])
    io.write_pgm(args.out, seg.labels)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred = io.read_netpbm(args.pred)
    truth = io.read_netpbm(args.truth)
    if pred.ndim != 2 or truth.ndim != 2:
        raise ValueError("evaluate expects PGM class-index maps")
    scores = metrics.score(pred.astype(np.int64), truth.astype(np.int64))
    print(metrics.format_report(scores))
    if args.json:
        Path(args.json).write_text(metrics.report_json(scores) + "\n")
    return EXIT_OK


def cmd_gen_dataset(args) -> int:
    cfg = resolve_config(args)
    paths = _list_texture_files(args.textures)
    textures = [_load_gray_image(p, cfg["color_mode"]) for p in paths]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    color = cfg["color_mode"] == COLOR_V
    if color:
        raw = [io.image_to_unit(io.read_netpbm(p)) for p in paths]
    for i in range(args.count):
        seed = cfg["rng_seed"] + i
        if args.mask_kind == "voronoi":
            mask = datagen.gen_voronoi_mask(
                args.mask_width, args.mask_height, args.cells, args.classes, seed
            )
        else:
            mask = datagen.gen_grayscale_mask(
                datagen.MaskSpec(
                    width=args.mask_width,
                    height=args.mask_height,
                    target_region_count=args.regions,
                    sigma=args.mask_sigma,
                    rng_seed=seed,
                )
            )
        io.write_pgm(out_dir / f"mask_{i:03d}.pgm", mask.labels)
        if color:
            mosaic = datagen.compose_mosaic(mask, raw)
            io.write_ppm(out_dir / f"mosaic_{i:03d}.ppm", io.unit_to_image(mosaic))
        else:
            mosaic = datagen.compose_mosaic(mask, textures)
            io.write_pgm(out_dir / f"mosaic_{i:03d}.pgm", io.unit_to_image(mosaic))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewtex", description="adaptive curvelet texture segmentation pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-bank", help="build a filter bank from a texture dictionary")
    p.add_argument("--textures", required=True, help="directory of .pgm/.ppm textures")
    p.add_argument("--out", required=True, help="output bank JSON path")
    p.add_argument("--grid-height", type=int, default=None)
    p.add_argument("--grid-width", type=int, default=None)
    _add_config_flags(p)
    p.set_defaults(func=cmd_build_bank)

    p = sub.add_parser("extract", help="extract a feature tensor from an image")
    p.add_argument("--bank", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output .ewtf path")
    p.add_argument("--mask", help="optional class-index PGM; also writes labels")
    p.add_argument("--labels-out", help="label file path (default: out with .ewtl)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit whitening and classifier on feature files")
    p.add_argument("--features", nargs="+", required=True)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output model JSON path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("segment", help="predict a label map")
    p.add_argument("--model", required=True)
    p.add_argument("--features", help="precomputed .ewtf tensor")
    p.add_argument("--bank", help="bank JSON (with --image)")
    p.add_argument("--image", help="image to segment (with --bank)")
    p.add_argument("--out", required=True, help="output label-map PGM")
    _add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score a predicted map against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--json", help="also write the scores as JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen-dataset", help="generate masks and texture mosaics")
    p.add_argument("--textures", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--mask-kind", choices=("grayscale", "voronoi"), default="grayscale")
    p.add_argument("--mask-width", type=int, default=256)
    p.add_argument("--mask-height", type=int, default=256)
    p.add_argument("--regions", type=int, default=5)
    p.add_argument("--mask-sigma", type=float, default=10.0)
    p.add_argument("--cells", type=int, default=8, help="voronoi cell count")
    p.add_argument("--classes", type=int, default=2, help="voronoi class count")
    _add_config_flags(p)
    p.set_defaults(func=cmd_gen_dataset)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"ewtex: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"ewtex: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
