"""Data-adapted curvelet filter banks and supervised texture segmentation.

The pipeline, bottom to top: ``spectral`` collapses image spectra onto
polar axes and detects mode boundaries, ``boundaries`` merges per-texture
boundary sets, ``bank`` turns merged boundaries into a tight-frame wedge
filter bank, ``transform`` applies it, ``features`` builds whitened
local-energy descriptors, ``classify`` trains and refines a pixelwise
classifier, ``metrics`` scores segmentations, and ``cli`` wires it all
into subcommands.
"""

from .bank import BankConfig, CurveletBank, auto_gamma, beta, build_bank, load_bank, save_bank
from .boundaries import (
    MaximaSet,
    MergeConfig,
    local_maxima,
    merge_boundary_sets,
    prune_narrow,
    prune_unsupported,
    union_boundaries,
)
from .classify import (
    ClassifierModel,
    SegmentationMap,
    TrainConfig,
    adam_step,
    predict,
    refine,
    train,
)
from .datagen import MaskSpec, compose_mosaic, gen_grayscale_mask, gen_voronoi_mask
from .errors import NumericalError
from .features import (
    FeatureConfig,
    FeatureTensor,
    WhiteningTransform,
    apply_zca,
    build_dictionary_bank,
    extract_features,
    fit_zca,
    local_energy,
    v_channel,
)
from .metrics import contingency, score
from .spectral import (
    BoundarySet,
    ScaleSpaceConfig,
    Spectrum1D,
    detect_boundaries,
    polar_spectra,
)
from .transform import CoefficientStack, forward, inverse

__version__ = "0.1.0"

__all__ = [
    "BankConfig",
    "BoundarySet",
    "ClassifierModel",
    "CoefficientStack",
    "CurveletBank",
    "FeatureConfig",
    "FeatureTensor",
    "MaskSpec",
    "MaximaSet",
    "MergeConfig",
    "NumericalError",
    "ScaleSpaceConfig",
    "SegmentationMap",
    "Spectrum1D",
    "TrainConfig",
    "WhiteningTransform",
    "adam_step",
    "apply_zca",
    "auto_gamma",
    "beta",
    "build_bank",
    "build_dictionary_bank",
    "compose_mosaic",
    "contingency",
    "detect_boundaries",
    "extract_features",
    "fit_zca",
    "forward",
    "gen_grayscale_mask",
    "gen_voronoi_mask",
    "inverse",
    "load_bank",
    "local_energy",
    "local_maxima",
    "merge_boundary_sets",
    "polar_spectra",
    "predict",
    "prune_narrow",
    "prune_unsupported",
    "refine",
    "save_bank",
    "score",
    "train",
    "union_boundaries",
    "v_channel",
]
