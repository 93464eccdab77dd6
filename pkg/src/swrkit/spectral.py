"""Truncated 2-D spectral convolution with hand-derived adjoints.

A spectral layer keeps the Fourier modes with |kx| <= kmax and |ky| <= kmax
and multiplies each retained mode's channel vector by its own complex
matrix.  Weights live in a canonical signed-mode table of shape
((2*kmax+1)^2, width, width) indexed by (kx + kmax) * (2*kmax + 1) +
(ky + kmax), so the same weights apply unchanged on any grid resolution:
a grid simply retains the subset of canonical modes it can represent.

No autodiff anywhere: the backward pass uses the adjoint identities

    y = Re(ifft2(Y))            ->  dL/dY = (1/N) fft2(dL/dy)
    H = fft2(h), h real         ->  dL/dh = N  Re(ifft2(dL/dH))
    y_m = W_m h_m (C-linear)    ->  dL/dW_m = g_m conj(h_m)^T,
                                    dL/dh_m = W_m^H g_m

with complex gradients stored as d/dRe + i d/dIm, so a gradient step on a
complex weight is just W -= lr * grad.  All math is float64/complex128.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import GridError


def n_canonical_modes(kmax):
    return (2 * kmax + 1) ** 2


@lru_cache(maxsize=64)
def mode_table(nlat, nlon, kmax):
    """Slot arrays for a grid: (rows, cols, canonical indices).

    Requires nlat >= 2*kmax and nlon >= 2*kmax so no canonical mode is
    claimed by two grid slots.
    """
    if nlat < 2 * kmax or nlon < 2 * kmax:
        raise GridError(f"grid {nlat}x{nlon} too small for kmax={kmax}")
    fr = np.round(np.fft.fftfreq(nlat, d=1.0 / nlat)).astype(int)
    fc = np.round(np.fft.fftfreq(nlon, d=1.0 / nlon)).astype(int)
    rsel = np.nonzero(np.abs(fr) <= kmax)[0]
    csel = np.nonzero(np.abs(fc) <= kmax)[0]
    rows = np.repeat(rsel, len(csel))
    cols = np.tile(csel, len(rsel))
    side = 2 * kmax + 1
    canon = ((fr[rsel] + kmax)[:, None] * side
             + (fc[csel] + kmax)[None, :]).ravel()
    rows.setflags(write=False)
    cols.setflags(write=False)
    canon.setflags(write=False)
    return rows, cols, canon


def spectral_conv(h, weights, kmax):
    """Forward pass.  h: (nlat, nlon, width) real; weights: canonical table.

    Returns (y, cache) where cache holds the gathered input modes needed
    by the backward pass.
    """
    nlat, nlon = h.shape[:2]
    rows, cols, canon = mode_table(nlat, nlon, kmax)
    h_hat = np.fft.fft2(h, axes=(0, 1))
    hm = h_hat[rows, cols, :]                       # (M, width)
    wm = weights[canon]                             # (M, width, width)
    ym = np.einsum("mij,mj->mi", wm, hm)
    y_hat = np.zeros_like(h_hat)
    y_hat[rows, cols, :] = ym
    y = np.fft.ifft2(y_hat, axes=(0, 1)).real
    return y, (hm, (nlat, nlon))


def spectral_conv_backward(g, weights, kmax, cache):
    """Backward pass.  g: dL/dy (nlat, nlon, width) real.

    Returns (grad_weights, grad_h): a full canonical-table gradient (zeros
    at modes this grid does not retain) and the input gradient.
    """
    hm, (nlat, nlon) = cache
    rows, cols, canon = mode_table(nlat, nlon, kmax)
    n = nlat * nlon
    g_y = np.fft.fft2(g, axes=(0, 1)) / n
    gm = g_y[rows, cols, :]                         # (M, width)

    # canonical indices are unique per grid (mode_table precondition), so a
    # fancy-indexed add is safe and much faster than np.add.at
    grad_w = np.zeros_like(weights)
    grad_w[canon] += np.einsum("mi,mj->mij", gm, np.conj(hm))

    g_hm = np.einsum("mji,mj->mi", np.conj(weights[canon]), gm)
    g_h_hat = np.zeros((nlat, nlon, g.shape[2]), dtype=np.complex128)
    g_h_hat[rows, cols, :] = g_hm
    grad_h = n * np.fft.ifft2(g_h_hat, axes=(0, 1)).real
    return grad_w, grad_h


_GELU_C = 0.7978845608028654    # sqrt(2/pi)
_GELU_A = 0.044715


def gelu(x):
    """tanh-form GELU."""
    u = _GELU_C * (x + _GELU_A * x ** 3)
    return 0.5 * x * (1.0 + np.tanh(u))


def gelu_grad(x):
    u = _GELU_C * (x + _GELU_A * x ** 3)
    t = np.tanh(u)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * x ** 2)
