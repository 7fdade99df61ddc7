"""Raster synthesis of the field models by spectral discretization.

A field with spectral density ``f`` and stationary increments is sampled as

    X(x) = sum over lattice bins xi != 0 of
           (exp(j <x, xi>) - 1) * sqrt(f(xi)) * W(xi) * sqrt(bin area)

on the frequency lattice xi = (2*pi/L) * p, p in {-F/2 .. F/2-1}^2, where W
is unit complex Gaussian noise with Hermitian symmetry W(-xi) = conj(W(xi))
so the output is real.  The DC bin is forced to zero (the increment kernel
vanishes there and the density is singular); the remaining low-frequency
singularity is integrable against the kernel, so no further regularization
is applied.  The lattice truncation biases very low Hurst exponents
slightly; that is inherent to this discretization.

Self-similar models evaluate the lattice sum with one inverse FFT (the
constant "-1" term is a single scalar, or the origin-pixel value when the
origin lies on the grid, which then is exactly zero).  Warped models
synthesize their base on an enlarged grid covering the warped domain and
interpolate.  Space-varying models (per-pixel Hurst/direction) use the
direct-summation kernel from ``_kernels``.

Randomness comes from the counter-based Philox generator keyed by the seed.
Stream-splitting rule: the flat bin index b = p1 * F + p2 (rows and columns
in FFT order) owns the two 53-bit uniform words at positions 2b and 2b+1 of
the key's output stream; those two words map to one complex Gaussian via a
polar transform.  Any bin's draw can therefore be regenerated independently
(Philox counters advance in blocks of four words), which makes parallel
generation order-independent, and a single vectorized draw is used here.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.random import Generator, Philox
from scipy import ndimage

from . import _kernels
from .errors import BudgetExceeded, DomainEscape, InvalidFrequencyGrid
from .fields import (
    AFBF,
    FBF,
    GAFBF,
    MBF,
    WAFBF,
    FieldModel,
    ScalarField,
    is_self_similar,
    model_anisotropy,
)
from .spectral import eval_spectral_density

__all__ = [
    "Grid",
    "FieldRealization",
    "unit_spectral_noise",
    "noise_word_for_bin",
    "synthesize",
    "synthesize_ssi",
    "synthesize_wafbf",
    "synthesize_gafbf",
    "default_threads",
]

#: Default cap on n^2 * freq_n^2 for the direct-summation models.
DEFAULT_MAX_OPS = 2**34


@dataclass(frozen=True)
class Grid:
    """Square raster geometry: n pixels per side over [x0, x1)^2.

    Pixel m (row-major, axis 0 = first coordinate) sits at
    x0 + m * spacing with spacing (x1 - x0) / n; n is a power of two.
    """

    n: int
    x0: float = 0.0
    x1: float = 1.0

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError("grid size must be a power of two, at least 8")
        if not self.x1 > self.x0:
            raise ValueError("domain must satisfy x1 > x0")

    @property
    def length(self) -> float:
        return self.x1 - self.x0

    @property
    def spacing(self) -> float:
        return self.length / self.n

    def points1d(self) -> np.ndarray:
        return self.x0 + np.arange(self.n) * self.spacing

    def points(self) -> np.ndarray:
        p = self.points1d()
        g1, g2 = np.meshgrid(p, p, indexing="ij")
        return np.stack([g1, g2], axis=-1)

    def origin_index(self) -> int | None:
        """Lattice index k with x0 + k*spacing == 0, if the origin is on the grid."""
        k = int(round(-self.x0 / self.spacing))
        if 0 <= k < self.n and abs(self.x0 + k * self.spacing) <= 1e-9 * self.spacing:
            return k
        return None

    def to_json(self) -> dict:
        return {"n": self.n, "domain": [self.x0, self.x1]}


@dataclass(frozen=True)
class FieldRealization:
    """Synthesized raster plus the provenance needed to regenerate it."""

    values: np.ndarray = field(repr=False)
    grid: Grid
    model: FieldModel
    seed: int
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("realization contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def default_threads() -> int:
    """Thread count for the direct-summation kernel (ORIFIELD_THREADS, else 1)."""
    try:
        return max(1, int(os.environ.get("ORIFIELD_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# spectral noise


def _mask_seed(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def unit_spectral_noise(seed: int, freq_n: int) -> np.ndarray:
    """Hermitian unit complex Gaussian noise on the freq_n^2 lattice.

    Bin (i1, i2) in FFT index order reads uniforms (u1, u2) from its two
    stream words and maps them to sqrt(-log(1-u1)) * exp(2j*pi*u2); the
    lattice is then symmetrized to W(-xi) = conj(W(xi)) so E|W|^2 = 1
    everywhere, with the DC bin zeroed.
    """
    words = Generator(Philox(key=_mask_seed(seed))).random(2 * freq_n * freq_n)
    u1 = words[0::2].reshape(freq_n, freq_n)
    u2 = words[1::2].reshape(freq_n, freq_n)
    raw = np.sqrt(-np.log1p(-u1)) * np.exp(2j * np.pi * u2)
    neg = (-np.arange(freq_n)) % freq_n
    sym = (raw + np.conj(raw[np.ix_(neg, neg)])) / np.sqrt(2.0)
    sym[0, 0] = 0.0
    return sym


def noise_word_for_bin(seed: int, bin_index: int, count: int = 2) -> np.ndarray:
    """Regenerate the uniform stream words owned by one frequency bin.

    Documents (and lets tests verify) the stream-splitting rule: bin b owns
    words 2b and 2b+1.  Philox counters move in four-word blocks, so the
    block holding word w is w // 4 and the offset w % 4 is discarded.
    """
    start = 2 * bin_index
    block, offset = divmod(start, 4)
    gen = Generator(Philox(key=_mask_seed(seed)).advance(block))
    if offset:
        gen.random(offset)
    return gen.random(count)


def _frequency_lattice(freq_n: int, length: float) -> np.ndarray:
    """1-D lattice frequencies (2*pi/L) * p in FFT order."""
    p = np.fft.fftfreq(freq_n) * freq_n
    return (2.0 * np.pi / length) * p


def _zero_self_aliasing(arr: np.ndarray) -> None:
    """Zero the DC bin and the Nyquist row/column of a lattice array.

    On an even lattice the index F/2 stands for both +Nyquist and -Nyquist,
    so those bins have no negation partner and an uneven density sampled
    there would break the Hermitian symmetry that keeps the output real.
    They are treated like DC; the density is smallest there, so the energy
    cost is negligible.
    """
    fn = arr.shape[0]
    arr[0, 0] = 0.0
    if fn % 2 == 0:
        arr[fn // 2, :] = 0.0
        arr[:, fn // 2] = 0.0


# ---------------------------------------------------------------------------
# self-similar models: one inverse FFT


def synthesize_ssi(
    model: FieldModel,
    grid: Grid,
    seed: int,
    freq_n: int | None = None,
) -> FieldRealization:
    """Synthesize a self-similar model (isotropic, cone, sum, or deformed).

    ``freq_n`` extends the frequency lattice beyond the grid's band (it must
    be a multiple of grid.n); content beyond the output Nyquist folds onto
    the grid exactly as pointwise sampling of the continuous field would.
    Deterministic given (seed, freq_n, grid).
    """
    if not is_self_similar(model):
        raise TypeError(f"{type(model).__name__} is not self-similar; use synthesize()")
    n = grid.n
    fn = n if freq_n is None else int(freq_n)
    if fn < n or fn % n != 0:
        raise InvalidFrequencyGrid(
            f"freq_n must be a multiple of the grid size {n}, got {fn}"
        )
    stride = fn // n
    spec = model_anisotropy(model)
    hurst = model.hurst

    xi1 = _frequency_lattice(fn, grid.length)
    g1, g2 = np.meshgrid(xi1, xi1, indexing="ij")
    xi = np.stack([g1, g2], axis=-1)
    norm = np.hypot(g1, g2)
    dc = norm == 0.0
    xi[dc] = [1.0, 0.0]  # placeholder; amplitude is zeroed below
    density = eval_spectral_density(spec, hurst, xi)
    _zero_self_aliasing(density)

    noise = unit_spectral_noise(seed, fn)
    amp = np.sqrt(density) * noise * (2.0 * np.pi / grid.length)
    amp *= np.exp(1j * grid.x0 * (g1 + g2))

    u = (np.fft.ifft2(amp) * fn * fn)[::stride, ::stride]
    k = grid.origin_index()
    if k is not None:
        u = u - u[k, k]
    else:
        u = u - amp.sum()

    scale = max(float(np.abs(u.real).max()), 1e-300)
    residue = float(np.abs(u.imag).max())
    if residue > 1e-9 * scale:
        raise AssertionError(f"Hermitian symmetry broken: imag residue {residue:g}")

    return FieldRealization(
        values=np.ascontiguousarray(u.real),
        grid=grid,
        model=model,
        seed=int(seed),
        params={"kind": "ssi", "freq_n": fn, "imag_residue": residue / scale},
    )


# ---------------------------------------------------------------------------
# warped models: synthesize the base on an enlarged grid, interpolate


def _next_pow2(m: int) -> int:
    p = 8
    while p < m:
        p *= 2
    return p


def synthesize_wafbf(
    model: WAFBF,
    grid: Grid,
    seed: int,
    margin: float = 0.1,
    interp: str = "bilinear",
    base_n: int | None = None,
    freq_n: int | None = None,
) -> FieldRealization:
    """Synthesize Z(x) = X(Phi(x)) by warping one base realization.

    The base cone field is synthesized on a square grid covering the warped
    image of the domain, expanded by ``margin`` (fraction of the bounding
    box per side), at the output grid's spacing unless ``base_n`` overrides
    the resolution; values at Phi(x) are then interpolated (bilinear or
    bicubic).  With the identity warp and margin 0 the enlarged grid
    coincides with ``grid`` and the output matches ``synthesize_ssi``.
    """
    if not isinstance(model, WAFBF):
        raise TypeError("synthesize_wafbf expects a warped-field model")
    if interp not in ("bilinear", "bicubic"):
        raise ValueError("interp must be 'bilinear' or 'bicubic'")
    if margin < 0:
        raise ValueError("margin must be non-negative")

    warped = np.asarray(model.deformation.map(grid.points()), dtype=float)
    if not np.all(np.isfinite(warped)):
        raise DomainEscape("deformation is not finite on the grid")

    lo = float(warped.min())
    hi = float(warped.max())
    pad = margin * max(hi - lo, grid.spacing)
    b0, b1 = lo - pad, hi + pad
    span = b1 - b0

    if base_n is None:
        n_e = _next_pow2(int(np.ceil(span / grid.spacing - 1e-9)) + 1)
        s_e = grid.spacing
    else:
        n_e = int(base_n)
        s_e = span / (n_e - 1)
    egrid = Grid(n_e, b0, b0 + n_e * s_e)
    base = synthesize_ssi(model.base, egrid, seed, freq_n or n_e)

    ci = (warped[..., 0] - b0) / s_e
    cj = (warped[..., 1] - b0) / s_e
    if ci.min() < -1e-9 or cj.min() < -1e-9 or ci.max() > n_e - 1 + 1e-9 or cj.max() > n_e - 1 + 1e-9:
        raise DomainEscape("warped coordinates exceed the enlarged grid")

    order = 1 if interp == "bilinear" else 3
    vals = ndimage.map_coordinates(base.values, [ci, cj], order=order, mode="nearest")

    return FieldRealization(
        values=np.ascontiguousarray(vals),
        grid=grid,
        model=model,
        seed=int(seed),
        params={
            "kind": "wafbf",
            "margin": margin,
            "interp": interp,
            "base_n": n_e,
            "base_domain": [egrid.x0, egrid.x1],
            "freq_n": freq_n or n_e,
        },
    )


# ---------------------------------------------------------------------------
# space-varying models: direct summation kernel


def _check_h_range(h_arr: np.ndarray) -> None:
    lo, hi = float(h_arr.min()), float(h_arr.max())
    if not (0.0 < lo and hi < 1.0):
        raise ValueError(
            f"Hurst function must map the grid into (0, 1); sampled range [{lo:g}, {hi:g}]"
        )


def synthesize_gafbf(
    model: FieldModel,
    grid: Grid,
    seed: int,
    freq_n: int = 64,
    max_ops: int = DEFAULT_MAX_OPS,
    threads: int | None = None,
    edge: str = "antialiased",
) -> FieldRealization:
    """Synthesize a space-varying model (per-pixel Hurst and/or direction).

    One shared noise draw is used for every pixel (the local spectral
    structure of the field requires it); the per-pixel amplitude
    C(x, xi) / |xi|^(h(x)+1) is then summed directly over the frequency
    lattice, which costs O(n^2 * freq_n^2) and is refused beyond
    ``max_ops``.  Accepts the generalized cone model (cone amplitude
    (2*delta)^(-1/2) around alpha(x)) and the multifractional model
    (isotropic amplitude (2*pi)^(-1/2)).

    ``edge`` controls how lattice cells cut by the cone boundary are
    weighted: "antialiased" (default) gives each cell the square root of
    its covered angular fraction, the variance-exact quadrature of the
    underlying stochastic integral, which keeps the amplitude Lipschitz in
    the direction field and avoids line artifacts when the direction varies
    quickly; "hard" uses the raw indicator at the bin center.
    """
    if isinstance(model, GAFBF):
        h_field, alpha_field, delta = model.h, model.alpha, model.delta
        level = 1.0 / np.sqrt(2.0 * model.delta)
    elif isinstance(model, MBF):
        h_field, alpha_field, delta = model.h, ScalarField.constant(0.0), 0.0
        level = 1.0 / np.sqrt(2.0 * np.pi)
    else:
        raise TypeError("synthesize_gafbf expects a gafbf or mbf model")

    n = grid.n
    fn = int(freq_n)
    if fn < 4:
        raise InvalidFrequencyGrid("freq_n must be at least 4")
    ops = n * n * fn * fn
    if ops > max_ops:
        raise BudgetExceeded(
            f"n^2 * freq_n^2 = {ops:g} exceeds the operation cap {max_ops:g}"
        )

    pts = grid.points()
    h_arr = np.ascontiguousarray(np.asarray(h_field(pts), dtype=np.float64))
    _check_h_range(h_arr)
    alpha_arr = np.ascontiguousarray(np.asarray(alpha_field(pts), dtype=np.float64))
    if h_arr.shape != (n, n) or alpha_arr.shape != (n, n):
        raise ValueError("scalar fields must evaluate to one value per pixel")

    if edge not in ("antialiased", "hard"):
        raise ValueError("edge must be 'antialiased' or 'hard'")

    xi1 = _frequency_lattice(fn, grid.length)
    g1, g2 = np.meshgrid(xi1, xi1, indexing="ij")
    norm = np.hypot(g1, g2)
    log_norm = np.zeros_like(norm)
    nz = norm > 0.0
    log_norm[nz] = np.log(norm[nz])
    arg_xi = np.arctan2(g2, g1)

    edge_width = np.zeros_like(norm)
    if edge == "antialiased" and delta > 0.0:
        # angular extent of one lattice cell seen from the origin, capped
        # so the ramp never exceeds the cone itself
        cell = 2.0 * np.pi / grid.length
        edge_width[nz] = np.minimum(cell / norm[nz], float(delta))

    noise = unit_spectral_noise(seed, fn)
    _zero_self_aliasing(noise)
    x = grid.points1d()
    phase1 = np.ascontiguousarray(np.exp(1j * np.outer(x, xi1)))
    phase2 = phase1.copy()

    nthreads = default_threads() if threads is None else max(1, int(threads))
    values = _kernels.varying_spectral_sum(
        np.ascontiguousarray(x),
        np.ascontiguousarray(x),
        phase1,
        phase2,
        np.ascontiguousarray(noise),
        np.ascontiguousarray(log_norm),
        np.ascontiguousarray(arg_xi),
        h_arr,
        alpha_arr,
        float(delta),
        float(level * 2.0 * np.pi / grid.length),
        np.ascontiguousarray(edge_width),
        nthreads,
    )

    # The increment kernel pins the field to zero at the coordinate origin;
    # re-anchor explicitly so both backends hit it exactly (summation order
    # differences otherwise leave an ulp-level residue at that pixel).
    k = grid.origin_index()
    if k is not None:
        values = values - values[k, k]

    return FieldRealization(
        values=np.ascontiguousarray(values),
        grid=grid,
        model=model,
        seed=int(seed),
        params={
            "kind": "gafbf",
            "freq_n": fn,
            "edge": edge,
            "backend": _kernels.backend_name(),
        },
    )


def synthesize(model: FieldModel, grid: Grid, seed: int, **kwargs) -> FieldRealization:
    """Dispatch to the synthesis routine matching the model family."""
    if is_self_similar(model):
        return synthesize_ssi(model, grid, seed, **kwargs)
    if isinstance(model, WAFBF):
        return synthesize_wafbf(model, grid, seed, **kwargs)
    if isinstance(model, (GAFBF, MBF)):
        return synthesize_gafbf(model, grid, seed, **kwargs)
    raise TypeError(f"not a field model: {model!r}")
