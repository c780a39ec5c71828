"""Forward and inverse curvelet transform as Fourier pointwise products.

All convolutions are periodic: every coefficient plane is the inverse
FFT of the image spectrum multiplied by one Fourier-domain filter.
Because the filters tile the plane as a tight frame, applying the same
(conjugated) filters to the coefficients and summing reconstructs the
image exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .bank import CurveletBank
from .errors import NumericalError

#: allowed relative imaginary leakage of coefficient planes
IMAG_TOL = 1e-9


@dataclass
class CoefficientStack:
    """Per-pixel subband images; plane 0 is the lowpass, wedge planes
    follow in row-major (ring, sector) order."""

    planes: np.ndarray  # (K, height, width)

    def __post_init__(self):
        self.planes = np.asarray(self.planes, dtype=float)
        if self.planes.ndim != 3:
            raise ValueError("planes must be a (K, height, width) array")

    @property
    def size(self) -> int:
        return self.planes.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1], self.planes.shape[2]


def forward(image: np.ndarray, bank: CurveletBank) -> CoefficientStack:
    """Decompose ``image`` into one real coefficient plane per filter."""
    img = np.asarray(image, dtype=float)
    if img.shape != bank.shape:
        raise ValueError(f"image shape {img.shape} does not match bank grid {bank.shape}")
    spectrum = sp_fft.fft2(img)
    planes = sp_fft.ifft2(spectrum[None, :, :] * bank.filters, axes=(-2, -1))
    scale = max(float(np.abs(planes.real).max()), np.finfo(float).tiny)
    residue = float(np.abs(planes.imag).max()) / scale
    if residue >= IMAG_TOL:
        raise NumericalError(
            f"coefficient planes are not real (imaginary residue {residue:.3g}); "
            "the bank filters are not even-symmetric"
        )
    return CoefficientStack(planes.real)


def inverse(stack: CoefficientStack, bank: CurveletBank) -> np.ndarray:
    """Reconstruct the image from its coefficient stack.

    Uses the dual-frame formula; for a tight frame the denominator is
    identically one and reconstruction is exact to rounding.
    """
    if stack.size != bank.size:
        raise ValueError(f"stack has {stack.size} planes, bank has {bank.size} filters")
    if stack.shape != bank.shape:
        raise ValueError(f"stack shape {stack.shape} does not match bank grid {bank.shape}")
    acc = np.zeros(bank.shape, dtype=complex)
    for plane, filt in zip(stack.planes, bank.filters):
        acc += sp_fft.fft2(plane) * filt  # filters are real: conj is a no-op
    denom = np.einsum("kij,kij->ij", bank.filters, bank.filters)
    acc /= np.maximum(denom, np.finfo(float).tiny)
    return sp_fft.ifft2(acc).real
