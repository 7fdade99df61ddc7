"""Riesz transform, isotropic wavelet frames, and orientation estimators.

The Riesz transform is the pair of frequency multipliers j*xi1/|xi| and
j*xi2/|xi|.  A single radial profile ``phi`` with support in (pi/4, pi] and
the dyadic partition property sum_j |phi(2^j lambda)|^2 = 1 generates a
tight isotropic wavelet frame; multiplying an image's DFT by phi(2^i |xi|)
(and additionally by the Riesz multipliers) gives redundant, fully-sampled
coefficient maps per scale.

For a self-similar field the covariance of the Riesz coefficient pair at
any scale is proportional to the field's structure tensor, with a scale
factor 2^(2*i*(H+1)) in this module's indexing (scale 0 is the finest band
touching lambda = pi; increasing i coarsens by a factor 2, so coarser
coefficients are larger).  Orientation and coherency read off that tensor
independently of the profile and the scale; the Hurst exponent comes from
the log2 slope of the channel variance across scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage

from .errors import EmptyScale, InsufficientScales, ScaleOutOfBand
from .tensor import OrientationResult, StructureTensor, orientation_of

__all__ = [
    "RadialProfile",
    "radial_profile",
    "partition_defect",
    "riesz_transform",
    "monogenic_components",
    "WaveletPyramid",
    "wavelet_pyramid",
    "empirical_structure_tensor",
    "OrientationField",
    "windowed_orientation_field",
    "estimate_hurst",
    "hurst_from_traces",
]


# ---------------------------------------------------------------------------
# radial profiles


def _simoncelli(lam):
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    band = (lam > np.pi / 4) & (lam <= np.pi)
    out[band] = np.cos(0.5 * np.pi * np.log2(2.0 * lam[band] / np.pi))
    return out


def _meyer_taper(t):
    return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)


def _meyer(lam):
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    rise = (lam > np.pi / 4) & (lam <= np.pi / 2)
    fall = (lam > np.pi / 2) & (lam <= np.pi)
    out[rise] = np.sin(0.5 * np.pi * _meyer_taper(4.0 * lam[rise] / np.pi - 1.0))
    out[fall] = np.cos(0.5 * np.pi * _meyer_taper(2.0 * lam[fall] / np.pi - 1.0))
    return out


@dataclass(frozen=True)
class RadialProfile:
    """Radial frequency window generating an isotropic tight frame.

    ``evaluate`` vanishes for lambda > pi and for lambda <= pi/4 (so every
    moment of the wavelet vanishes: the window is identically zero near the
    origin), and satisfies the dyadic partition of unity on (0, pi] exactly
    by construction (adjacent bands pair up as sin^2 + cos^2 of a common
    argument).
    """

    kind: str
    evaluate: Callable = field(compare=False)

    def __call__(self, lam):
        return self.evaluate(lam)


_PROFILES = {"simoncelli": _simoncelli, "meyer": _meyer}


def radial_profile(kind: str) -> RadialProfile:
    try:
        return RadialProfile(kind=kind, evaluate=_PROFILES[kind])
    except KeyError:
        raise ValueError(f"unknown profile {kind!r}; choose from {sorted(_PROFILES)}")


def partition_defect(profile: RadialProfile, num: int = 100_000) -> float:
    """max over lambda in (0, pi] of |sum_j phi(2^j lambda)^2 - 1|."""
    lam = np.linspace(np.pi / num, np.pi, num)
    total = np.zeros_like(lam)
    # Bands live on (pi/4 * 2^-j, pi * 2^-j]; for lam in (0, pi] the dyadic
    # shifts with support there run from j = -1 (lam just above pi/2 pairs
    # with its coarser neighbor) up to the resolution cutoff.
    jmax = int(np.ceil(np.log2(num))) + 2
    for j in range(-1, jmax + 1):
        total += profile(lam * 2.0**j) ** 2
    return float(np.abs(total - 1.0).max())


# ---------------------------------------------------------------------------
# lattice multipliers


def _lattice_freqs(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = 2.0 * np.pi * np.fft.fftfreq(n)
    g1, g2 = np.meshgrid(f, f, indexing="ij")
    return g1, g2, np.hypot(g1, g2)


def _riesz_multipliers(n: int) -> tuple[np.ndarray, np.ndarray]:
    """j*xi_l/|xi| on the DFT lattice, zeroed where the lattice has no sign.

    Each multiplier must be odd in its own frequency for the output to be
    real, but on an even lattice the Nyquist index of an axis stands for
    both +pi and -pi: the first component therefore vanishes on the row
    i = n/2, the second on the column j = n/2, and both at DC.  Synthesized
    rasters carry no energy on those lines (the synthesis zeroes them for
    the same reason), so the estimators lose nothing.
    """
    g1, g2, norm = _lattice_freqs(n)
    with np.errstate(invalid="ignore", divide="ignore"):
        m1 = 1j * g1 / norm
        m2 = 1j * g2 / norm
    m1[norm == 0.0] = 0.0
    m2[norm == 0.0] = 0.0
    if n % 2 == 0:
        m1[n // 2, :] = 0.0
        m2[:, n // 2] = 0.0
    return m1, m2


def riesz_transform(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both Riesz components of a square image (axis 0 = first coordinate)."""
    image = np.asarray(image, dtype=float)
    n = image.shape[0]
    if image.shape != (n, n) or n < 8:
        raise ValueError("expected a square image, at least 8x8")
    m1, m2 = _riesz_multipliers(n)
    spec = np.fft.fft2(image)
    r1 = np.fft.ifft2(spec * m1).real
    r2 = np.fft.ifft2(spec * m2).real
    return r1, r2


def monogenic_components(image: np.ndarray, eps: float | None = None):
    """Amplitude, scalar phase, and local orientation of an image.

    Returns (amplitude, phase, orientation, mask): amplitude is the norm of
    (f, R1 f, R2 f), phase is arctan(|Rf| / f), orientation is the unit
    vector Rf/|Rf| stacked in the last axis, masked out where |Rf| is below
    ``eps`` (default: 1e-12 times the rms of the image).
    """
    image = np.asarray(image, dtype=float)
    r1, r2 = riesz_transform(image)
    rnorm = np.hypot(r1, r2)
    amplitude = np.sqrt(image**2 + rnorm**2)
    phase = np.arctan2(rnorm, image)
    if eps is None:
        eps = 1e-12 * max(float(np.sqrt(np.mean(image**2))), 1e-300)
    mask = rnorm > eps
    orientation = np.zeros(image.shape + (2,))
    np.divide(r1, rnorm, out=orientation[..., 0], where=mask)
    np.divide(r2, rnorm, out=orientation[..., 1], where=mask)
    return amplitude, phase, orientation, mask


# ---------------------------------------------------------------------------
# pyramid


@dataclass(frozen=True)
class WaveletPyramid:
    """Fully sampled isotropic and Riesz-pair channels per scale.

    ``channels[i]`` holds (c, c1, c2) for scale i; the integer translates of
    the continuous frame are kept at full resolution (redundant analysis),
    which the averaging estimators prefer anyway.  ``band_energy_fraction``
    is sum_i phi(2^i lambda)^2 evaluated on the lattice, the exact Parseval
    weight of the covered band.
    """

    channels: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]
    profile: RadialProfile
    n: int
    band_mask: np.ndarray = field(repr=False)

    @property
    def scales(self) -> list[int]:
        return sorted(self.channels)


def max_scale(n: int) -> int:
    """Coarsest scale whose band (2^-i pi/4, 2^-i pi] still contains lattice bins."""
    return int(np.floor(np.log2(n / 8.0)))


def wavelet_pyramid(image: np.ndarray, scales, profile: RadialProfile | str = "simoncelli") -> WaveletPyramid:
    """Bandpass + Riesz-pair coefficient maps of an image at the given scales."""
    if isinstance(profile, str):
        profile = radial_profile(profile)
    image = np.asarray(image, dtype=float)
    n = image.shape[0]
    if image.shape != (n, n) or n < 8:
        raise ValueError("expected a square image, at least 8x8")
    scales = sorted(set(int(s) for s in scales))
    top = max_scale(n)
    for s in scales:
        if s < 0 or s > top:
            raise ScaleOutOfBand(f"scale {s} outside representable range [0, {top}] for n={n}")

    g1, g2, norm = _lattice_freqs(n)
    m1, m2 = _riesz_multipliers(n)
    spec = np.fft.fft2(image)
    channels = {}
    band_total = np.zeros_like(norm)
    for s in scales:
        win = profile(norm * 2.0**s)
        band_total += win**2
        c = np.fft.ifft2(spec * win).real
        c1 = np.fft.ifft2(spec * win * m1).real
        c2 = np.fft.ifft2(spec * win * m2).real
        channels[s] = (c, c1, c2)
    return WaveletPyramid(channels=channels, profile=profile, n=n, band_mask=band_total)


def empirical_structure_tensor(pyr: WaveletPyramid, scale: int) -> StructureTensor:
    """Average of the rank-1 Riesz coefficient tensors over all positions.

    The Riesz coefficient field of a stationary-increment field is
    stationary, so the spatial average estimates the coefficient covariance,
    which is proportional to the field's structure tensor.  Channels are
    stored as unit-gain bandpass maps; the frame wavelet at scale i carries
    amplitude 2^i on this lattice, so the covariance is rescaled by 4^i to
    restore the 2^(2*i*(H+1)) law across scales (orientation and coherency
    do not depend on this factor).
    """
    if scale not in pyr.channels:
        raise EmptyScale(f"scale {scale} not present in the pyramid")
    _, c1, c2 = pyr.channels[scale]
    gain = 4.0**scale
    return StructureTensor(
        gain * float(np.mean(c1 * c1)),
        gain * float(np.mean(c1 * c2)),
        gain * float(np.mean(c2 * c2)),
    )


@dataclass(frozen=True)
class OrientationField:
    """Per-pixel axial angle and coherency with a validity mask."""

    angle: np.ndarray = field(repr=False)
    coherency: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)

    def masked_fraction(self) -> float:
        return 1.0 - float(np.mean(self.mask))


def windowed_orientation_field(pyr: WaveletPyramid, scale: int, window: float) -> OrientationField:
    """Gaussian-windowed local structure tensor field at one scale.

    Smooths the per-position rank-1 coefficient tensors with a Gaussian of
    standard deviation ``window`` pixels (truncated at three standard
    deviations), then eigen-analyzes per pixel.  Pixels whose local tensor
    trace falls below 1e-12 times the scale's mean trace are masked out.
    """
    if window < 2:
        raise ValueError("window radius must be at least 2 pixels")
    if scale not in pyr.channels:
        raise EmptyScale(f"scale {scale} not present in the pyramid")
    _, c1, c2 = pyr.channels[scale]
    smooth = lambda a: ndimage.gaussian_filter(a, sigma=window, mode="wrap", truncate=3.0)
    j11 = smooth(c1 * c1)
    j12 = smooth(c1 * c2)
    j22 = smooth(c2 * c2)
    trace = j11 + j22
    eps = 1e-12 * max(float(trace.mean()), 1e-300)
    mask = trace > eps
    gap = np.hypot(j11 - j22, 2.0 * j12)
    angle = 0.5 * np.arctan2(2.0 * j12, j11 - j22)
    coherency = np.zeros_like(trace)
    np.divide(gap, trace, out=coherency, where=mask)
    return OrientationField(angle=angle, coherency=coherency, mask=mask)


def hurst_from_traces(scales, traces) -> float:
    """Hurst exponent from channel variances across scales.

    With this module's scale indexing the Riesz channel variance scales as
    2^(2*i*(H+1)), so the least-squares slope of log2(trace) against the
    scale index gives H = slope/2 - 1.
    """
    scales = np.asarray(scales, dtype=float)
    traces = np.asarray(traces, dtype=float)
    if scales.size < 2:
        raise InsufficientScales("need at least two scales")
    if np.any(traces <= 0):
        raise ValueError("channel variances must be positive")
    slope = np.polyfit(scales, np.log2(traces), 1)[0]
    return float(slope / 2.0 - 1.0)


def estimate_hurst(pyr: WaveletPyramid, scales=None) -> float:
    """Hurst exponent of the field behind a pyramid (see hurst_from_traces)."""
    if scales is None:
        scales = pyr.scales
    scales = sorted(set(int(s) for s in scales))
    if len(scales) < 2:
        raise InsufficientScales("need at least two scales")
    traces = [empirical_structure_tensor(pyr, s).trace for s in scales]
    return hurst_from_traces(scales, traces)
