"""Construction of the data-adapted curvelet filter bank.

The bank tiles the 2D Fourier plane with a radially symmetric lowpass
filter plus polar wedges, each wedge being the product of a radial ring
window and an angular sector window.  Transition zones use the smooth
step ``beta`` so that squared filter magnitudes sum to one at every
frequency sample (a tight frame), which gives perfect reconstruction
with the same filters.

Rings rise and fall around the interior scale boundaries; the outermost
ring stays at one out to the grid corners.  Sector windows are mirrored
antipodally (evaluated modulo pi) so that filtering a real image yields
real coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sp_fft

from .errors import NumericalError
from .spectral import ANGULAR, RADIAL, BoundarySet

#: residual allowed on the partition-of-unity (tight frame) check
UNITY_TOL = 1e-8

BANK_FORMAT = "ewtex-bank"
BANK_VERSION = 1


def beta(x):
    """Smooth C^3 step: 0 below 0, 1 above 1, and the classic
    polynomial ``x^4 (35 - 84 x + 70 x^2 - 20 x^3)`` in between.

    Satisfies ``beta(x) + beta(1 - x) = 1`` on [0, 1], which is what makes
    paired cosine/sine transitions sum squarely to one.
    """
    arr = np.asarray(x, dtype=float)
    c = np.clip(arr, 0.0, 1.0)
    val = c ** 4 * (35.0 - 84.0 * c + 70.0 * c ** 2 - 20.0 * c ** 3)
    return val if arr.ndim else float(val)


@dataclass(frozen=True)
class BankConfig:
    """Transition parameters of the bank.

    ``gamma`` is the relative half-width of each radial transition zone
    and must stay below ``min (w2 - w1) / (w2 + w1)`` over consecutive
    nonzero scale boundaries so that only consecutive rings overlap.
    ``delta_theta`` is the angular transition half-width; ``2 * delta_theta``
    must stay below the narrowest sector.
    """

    gamma: float
    delta_theta: float
    transition: Callable = field(default=beta)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.delta_theta <= 0:
            raise ValueError("delta_theta must be positive")


#: fallback transition ratio when a scale set has no interior boundary
DEGENERATE_GAMMA = 0.05


def auto_gamma(scales: BoundarySet, angles: BoundarySet) -> BankConfig:
    """Choose safe transition widths for the given boundary sets.

    ``gamma`` is 90% of the tightest consecutive-overlap bound computed
    over the nonzero scale boundaries; ``delta_theta`` is 45% of the
    narrowest angular sector.  Both safety factors sit strictly inside
    the bounds required by the tight-frame construction.
    """
    ws = scales.boundaries[1:]
    if ws.size >= 2:
        ratios = (ws[1:] - ws[:-1]) / (ws[1:] + ws[:-1])
        gamma = 0.9 * float(ratios.min())
        if gamma <= 0:
            raise ValueError("degenerate scale boundaries: non-positive gamma")
    else:
        gamma = DEGENERATE_GAMMA
    widths = np.diff(angles.boundaries)
    delta_theta = 0.45 * float(widths.min())
    return BankConfig(gamma=gamma, delta_theta=delta_theta)


def _polar_grid(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized radius in [0, sqrt(2) pi] and folded angle in [0, pi)
    for every FFT sample of a ``height x width`` grid."""
    if height < 2 or width < 2:
        raise ValueError("grid must be at least 2x2")
    ky = sp_fft.fftfreq(height) * height
    kx = sp_fft.fftfreq(width) * width
    grid_ky, grid_kx = np.meshgrid(ky, kx, indexing="ij")
    nyquist = min(height, width) // 2
    radius = np.hypot(grid_ky, grid_kx) * (np.pi / nyquist)
    pos = np.mod(np.arctan2(grid_ky, grid_kx) + 0.5 * np.pi, np.pi)
    return radius, pos


def _scale_transitions(scales: BoundarySet) -> np.ndarray:
    """Radii at which rings hand over.

    These are the interior scale boundaries; a set without interior
    boundaries degenerates to a single transition at ``domain_max`` so
    the bank still tiles the plane (lowpass plus one outer ring).
    """
    inner = scales.interior
    if inner.size:
        return inner
    return scales.boundaries[-1:]


def _transition_arg(radius: np.ndarray, t: float, gamma: float) -> np.ndarray:
    return (radius - (1.0 - gamma) * t) / (2.0 * gamma * t)


def _lowpass_profile(radius, t, cfg: BankConfig):
    g = cfg.gamma
    out = np.zeros_like(radius)
    out[radius <= (1.0 - g) * t] = 1.0
    band = ((1.0 - g) * t < radius) & (radius < (1.0 + g) * t)
    out[band] = np.cos(0.5 * np.pi * cfg.transition(_transition_arg(radius[band], t, g)))
    return out


def _ring_profile(radius, t_lo, t_hi, cfg: BankConfig):
    """Radial window rising at ``t_lo`` and falling at ``t_hi``
    (``t_hi=None`` marks the outer ring, flat out to the corners)."""
    g = cfg.gamma
    out = np.zeros_like(radius)
    rise = ((1.0 - g) * t_lo < radius) & (radius < (1.0 + g) * t_lo)
    out[rise] = np.sin(0.5 * np.pi * cfg.transition(_transition_arg(radius[rise], t_lo, g)))
    if t_hi is None:
        out[radius >= (1.0 + g) * t_lo] = 1.0
        return out
    flat = ((1.0 + g) * t_lo <= radius) & (radius <= (1.0 - g) * t_hi)
    out[flat] = 1.0
    fall = ((1.0 - g) * t_hi < radius) & (radius < (1.0 + g) * t_hi)
    out[fall] = np.cos(0.5 * np.pi * cfg.transition(_transition_arg(radius[fall], t_hi, g)))
    return out


def _sector_profiles(pos, angles: BoundarySet, cfg: BankConfig) -> list[np.ndarray]:
    """Angular windows of every sector, evaluated on the folded angle grid.

    With a single sector the window is identically one (no angular
    division).  Otherwise each window rises over its lower edge and falls
    over its upper edge; because adjacent windows share the exact same
    transition argument arrays, their squares sum to one by construction.
    """
    b = angles.boundaries
    n_sectors = b.size - 1
    if n_sectors == 1:
        return [np.ones_like(pos)]
    dth = cfg.delta_theta
    edges = b[:-1]  # edge 0 doubles as the seam shared with the last sector
    offs = [np.mod(pos - e + 0.5 * np.pi, np.pi) - 0.5 * np.pi for e in edges]
    args = [(d + dth) / (2.0 * dth) for d in offs]
    widths = np.diff(b)
    wins = []
    for m in range(n_sectors):
        j = (m + 1) % n_sectors
        fwd = np.mod(pos - edges[m], np.pi)
        out = np.zeros_like(pos)
        rise = np.abs(offs[m]) <= dth
        out[rise] = np.sin(0.5 * np.pi * cfg.transition(args[m][rise]))
        fall = np.abs(offs[j]) <= dth
        out[fall] = np.cos(0.5 * np.pi * cfg.transition(args[j][fall]))
        flat = (fwd > dth) & (fwd < widths[m] - dth)
        out[flat] = 1.0
        wins.append(out)
    return wins


def _negate_frequency(arr: np.ndarray) -> np.ndarray:
    """Sample values at the negated frequency index, ``a[-k mod n]``."""
    return np.roll(arr[::-1, ::-1], shift=(1, 1), axis=(0, 1))


def _symmetrize(filt: np.ndarray) -> np.ndarray:
    """Exact even symmetry under frequency negation.

    Averaging squared values over the (k, -k) pair leaves the
    partition-of-unity sum untouched and only matters on the Nyquist
    row/column of even grids, where the two members of a pair carry
    different folded angles.
    """
    return np.sqrt(0.5 * (filt * filt + _negate_frequency(filt) ** 2))


def build_lowpass(scales: BoundarySet, cfg: BankConfig, shape: tuple[int, int]) -> np.ndarray:
    """Fourier-domain lowpass filter on a ``(height, width)`` grid."""
    radius, _ = _polar_grid(*shape)
    t1 = float(_scale_transitions(scales)[0])
    return _lowpass_profile(radius, t1, cfg)


def build_radial_window(
    n: int, scales: BoundarySet, cfg: BankConfig, shape: tuple[int, int]
) -> np.ndarray:
    """Radial ring window ``n`` (1-based) evaluated on the grid radii."""
    trans = _scale_transitions(scales)
    if not 1 <= n <= trans.size:
        raise ValueError(f"ring index {n} out of range 1..{trans.size}")
    radius, _ = _polar_grid(*shape)
    t_lo = float(trans[n - 1])
    t_hi = float(trans[n]) if n < trans.size else None
    return _ring_profile(radius, t_lo, t_hi, cfg)


def build_angular_window(
    m: int, angles: BoundarySet, cfg: BankConfig, shape: tuple[int, int]
) -> np.ndarray:
    """Angular sector window ``m`` (0-based) on the grid, antipodally
    mirrored so spatial filters stay real."""
    n_sectors = angles.boundaries.size - 1
    if not 0 <= m < n_sectors:
        raise ValueError(f"sector index {m} out of range 0..{n_sectors - 1}")
    _, pos = _polar_grid(*shape)
    return _sector_profiles(pos, angles, cfg)[m]


@dataclass(frozen=True)
class CurveletBank:
    """Complete Fourier-domain filter set on a fixed pixel grid.

    ``filters[0]`` is the lowpass; wedge ``(n, m)`` (ring ``n`` in 1..R,
    sector ``m`` in 0..n_sectors-1) sits at index ``1 + (n-1)*n_sectors + m``.
    """

    filters: np.ndarray  # (K, height, width), real, values in [0, 1]
    scales: BoundarySet
    angles: BoundarySet
    config: BankConfig

    @property
    def shape(self) -> tuple[int, int]:
        return self.filters.shape[1], self.filters.shape[2]

    @property
    def size(self) -> int:
        """Total number of filters K."""
        return self.filters.shape[0]

    @property
    def n_rings(self) -> int:
        return _scale_transitions(self.scales).size

    @property
    def n_sectors(self) -> int:
        return self.angles.boundaries.size - 1

    @property
    def n_scales(self) -> int:
        """Scale count including the lowpass (K = 1 + (n_scales-1) * n_sectors)."""
        return self.n_rings + 1

    def wedge(self, n: int, m: int) -> np.ndarray:
        """Filter of ring ``n`` (1-based) and sector ``m`` (0-based)."""
        if not (1 <= n <= self.n_rings and 0 <= m < self.n_sectors):
            raise ValueError("wedge index out of range")
        return self.filters[1 + (n - 1) * self.n_sectors + m]

    def unity_residual(self) -> float:
        """Max deviation of the summed squared magnitudes from one."""
        total = np.einsum("kij,kij->ij", self.filters, self.filters)
        return float(np.abs(total - 1.0).max())


def _validate_config(scales: BoundarySet, angles: BoundarySet, cfg: BankConfig):
    ws = scales.boundaries[1:]
    if ws.size >= 2:
        ratios = (ws[1:] - ws[:-1]) / (ws[1:] + ws[:-1])
        if cfg.gamma >= ratios.min():
            raise ValueError(
                f"gamma={cfg.gamma:.6g} violates the consecutive-overlap bound "
                f"{ratios.min():.6g}"
            )
    widths = np.diff(angles.boundaries)
    if 2.0 * cfg.delta_theta >= widths.min() and angles.boundaries.size > 2:
        raise ValueError(
            f"2*delta_theta={2 * cfg.delta_theta:.6g} reaches the narrowest "
            f"sector width {widths.min():.6g}"
        )


def build_bank(
    scales: BoundarySet,
    angles: BoundarySet,
    cfg: BankConfig,
    height: int,
    width: int,
) -> CurveletBank:
    """Assemble the full filter bank on a ``height x width`` grid.

    Raises if the config violates its overlap invariants or if the
    constructed filters fail the partition-of-unity check.
    """
    if scales.axis != RADIAL or angles.axis != ANGULAR:
        raise ValueError("expected a radial scale set and an angular angle set")
    _validate_config(scales, angles, cfg)

    radius, pos = _polar_grid(height, width)
    trans = _scale_transitions(scales)
    rings = [
        _ring_profile(
            radius,
            float(trans[i]),
            float(trans[i + 1]) if i + 1 < trans.size else None,
            cfg,
        )
        for i in range(trans.size)
    ]
    sectors = _sector_profiles(pos, angles, cfg)

    filters = [_lowpass_profile(radius, float(trans[0]), cfg)]
    for ring in rings:
        for sec in sectors:
            filters.append(ring * sec)
    filters = [_symmetrize(f) for f in filters]
    bank = CurveletBank(
        filters=np.stack(filters),
        scales=scales,
        angles=angles,
        config=cfg,
    )
    residual = bank.unity_residual()
    if residual > UNITY_TOL:
        raise NumericalError(
            f"filter bank is not a tight frame (residual {residual:.3g})"
        )
    return bank


def bank_to_json(bank: CurveletBank) -> str:
    """Serialize the bank parameters (filters are re-derived on load)."""
    doc = {
        "format": BANK_FORMAT,
        "version": BANK_VERSION,
        "height": bank.shape[0],
        "width": bank.shape[1],
        "gamma": bank.config.gamma,
        "delta_theta": bank.config.delta_theta,
        "scale_boundaries": bank.scales.boundaries.tolist(),
        "angle_boundaries": bank.angles.boundaries.tolist(),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def bank_from_json(text: str, shape: tuple[int, int] | None = None) -> CurveletBank:
    """Rebuild a bank from its JSON document, optionally on another grid."""
    doc = json.loads(text)
    if doc.get("format") != BANK_FORMAT:
        raise ValueError("not a bank document")
    if doc.get("version") != BANK_VERSION:
        raise ValueError(f"unsupported bank version {doc.get('version')!r}")
    scales = BoundarySet(np.array(doc["scale_boundaries"], dtype=float), RADIAL)
    angles = BoundarySet(np.array(doc["angle_boundaries"], dtype=float), ANGULAR)
    cfg = BankConfig(gamma=doc["gamma"], delta_theta=doc["delta_theta"])
    h, w = shape if shape is not None else (doc["height"], doc["width"])
    return build_bank(scales, angles, cfg, h, w)


def save_bank(path, bank: CurveletBank):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(bank_to_json(bank))
        fh.write("\n")


def load_bank(path, shape: tuple[int, int] | None = None) -> CurveletBank:
    with open(path, "r", encoding="ascii") as fh:
        return bank_from_json(fh.read(), shape)
