"""Two-term training loss: ocean-masked L2 plus band-limited spectral error.

    ocean_l2  = sum_c sum_{ocean cells} e^2 / (4 * n_ocean)
    spectral  = sum_c sum_{retained modes} |fft2(e)|^2 / (4 * N^2)
    total     = ocean_l2 + lambda_spec * spectral

where e = pred - truth, N = nlat * nlon and retention means |kx|,|ky| <=
kmax (kmax=None keeps every mode).  With an all-ocean mask and full
retention the two terms are equal by Parseval, which the tests pin.

`loss_grad` is the exact derivative of `loss` with respect to pred:

    d ocean_l2 / d e = e * mask / (2 * n_ocean)
    d spectral / d e = Re(ifft2(R * fft2(e))) / (2 * N)

with R the retention mask in mode space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .spectral import mode_table


@dataclass(frozen=True)
class LossReport:
    total: float
    ocean_l2: float
    spectral: float
    lambda_spec: float


def _retention_mask(nlat, nlon, kmax):
    if kmax is None:
        return None
    rows, cols, _ = mode_table(nlat, nlon, kmax)
    keep = np.zeros((nlat, nlon), dtype=bool)
    keep[rows, cols] = True
    return keep


def loss(pred, truth, mask, lambda_spec=0.5, kmax=None):
    """Evaluate the two-term loss; returns a LossReport."""
    e = np.asarray(pred, np.float64) - np.asarray(truth, np.float64)
    n_ocean = int(mask.sum())
    if n_ocean == 0:
        raise GridError("loss needs at least one ocean cell")
    nlat, nlon = mask.shape
    n = nlat * nlon

    ocean = float((e[:, mask] ** 2).sum() / (4.0 * n_ocean))

    e_hat = np.fft.fft2(e, axes=(1, 2))
    keep = _retention_mask(nlat, nlon, kmax)
    power = (e_hat.real ** 2 + e_hat.imag ** 2)
    if keep is not None:
        power = power[:, keep]
    spectral = float(power.sum() / (4.0 * n * n))

    total = ocean + lambda_spec * spectral
    return LossReport(total=total, ocean_l2=ocean, spectral=spectral,
                      lambda_spec=lambda_spec)


def loss_grad(pred, truth, mask, lambda_spec=0.5, kmax=None):
    """dL/dpred for `loss`, shape (4, nlat, nlon)."""
    e = np.asarray(pred, np.float64) - np.asarray(truth, np.float64)
    n_ocean = int(mask.sum())
    nlat, nlon = mask.shape
    n = nlat * nlon

    g = np.zeros_like(e)
    g[:, mask] = e[:, mask] / (2.0 * n_ocean)

    e_hat = np.fft.fft2(e, axes=(1, 2))
    keep = _retention_mask(nlat, nlon, kmax)
    if keep is not None:
        e_hat = e_hat * keep[None, :, :]
    g += lambda_spec * np.fft.ifft2(e_hat, axes=(1, 2)).real / (2.0 * n)
    return g
