"""Numpy implementation of the space-varying direct spectral sum.

Computes, for every pixel x on an n-by-n grid,

    X(x) = Re sum over bins p of (exp(j <x, xi_p>) - 1) * A(x, xi_p) * W[p]

with per-pixel amplitude

    A(x, xi) = amp * |xi|^(-h(x) - 1) * cone(arg xi - alpha(x); delta)

where ``cone(.; delta)`` is the indicator of axial distance <= delta (skipped
entirely when delta <= 0, the isotropic-amplitude case).  ``W`` must carry
Hermitian symmetry and a zero DC bin so the sum is real up to roundoff; bins
with ``|xi| == 0`` must have ``W == 0``.

The work is O(n^2 * F^2); processing one grid row at a time keeps peak memory
at O(n * F^2) while letting numpy vectorize the inner sums.
"""

from __future__ import annotations

import numpy as np

_HALF_PI = 0.5 * np.pi


def varying_spectral_sum(
    x1,
    x2,
    phase1,
    phase2,
    noise,
    log_norm,
    arg_xi,
    h_field,
    alpha_field,
    delta,
    amp,
    edge_width,
    threads: int = 0,
):
    """Direct summation over the frequency lattice, one output row at a time.

    Parameters
    ----------
    x1, x2 : (n,) float arrays of pixel coordinates per axis (unused here;
        kept for signature parity with the compiled kernel).
    phase1, phase2 : (n, F) complex arrays, ``exp(1j * x * xi)`` tables per axis.
    noise : (F, F) complex array, Hermitian-symmetrized unit spectral noise.
    log_norm : (F, F) float array, ``log |xi|`` (any finite value at DC).
    arg_xi : (F, F) float array, ``atan2(xi2, xi1)``.
    h_field, alpha_field : (n, n) float arrays of per-pixel parameters.
    delta : cone half-width; no angular masking when <= 0.
    amp : overall scalar amplitude (level and bin-area factors folded in).
    edge_width : (F, F) float array of per-bin angular cell sizes.  Bins
        within half a cell of the cone edge contribute the square root of
        their covered fraction (a linear ramp), which keeps the amplitude
        Lipschitz in the cone direction and suppresses the line artifacts a
        hard per-bin indicator produces under a space-varying direction.
        Pass zeros for the hard indicator.
    threads : ignored; the numpy backend is single-threaded.
    """
    n = h_field.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    use_cone = delta > 0.0
    for i in range(n):
        expo = -(h_field[i][:, None, None] + 1.0) * log_norm[None, :, :]
        amp_bins = np.exp(expo)
        if use_cone:
            d = np.mod(arg_xi[None, :, :] - alpha_field[i][:, None, None], np.pi)
            d = np.minimum(d, np.pi - d)
            w = edge_width[None, :, :]
            hard = w <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                coverage = np.clip((delta - d) / w + 0.5, 0.0, 1.0)
            coverage = np.where(hard, (d <= delta).astype(float), coverage)
            amp_bins *= np.sqrt(coverage)
        wamp = amp_bins * noise[None, :, :]
        # (exp(j<x,xi>) - 1) summed against wamp: contract xi1 with the row's
        # phase, xi2 with each pixel's phase, then subtract the plain sum.
        partial = np.tensordot(phase1[i], wamp, axes=(0, 1))  # (n, F)
        acc = np.einsum("jq,jq->j", partial, phase2)
        acc0 = wamp.sum(axis=(1, 2))
        out[i] = amp * (acc.real - acc0.real)
    return out
