"""Numerically stable sample canonical correlations and ESD utilities.

The squared sample canonical correlations are computed as squared
cosines of the principal angles between the row spaces of X and Y:
thin QR of the transposed data gives orthonormal bases Q_x, Q_y, and
the singular values of Q_x' Q_y are the cosines.  This is algebraically
identical to the eigenvalues of S_xx^{-1} S_xy S_yy^{-1} S_yx but never
forms an inverse, which matters because that product is badly
conditioned whenever p/n or q/n is non-negligible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataShapeError, NumericalError, RankDeficiencyError
from .rmt import ModelConfig, lsd_cdf

__all__ = [
    "SampleSpectrum",
    "center_observations",
    "cca_eigenvalues",
    "esd",
    "ks_distance_to_lsd",
]

_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class SampleSpectrum:
    """Descending squared sample canonical correlations.

    `effective_n` is the sample size to use in all limit formulas: n for
    data generated centered, n - 1 after empirical centering.
    `directions` optionally holds the canonical direction pairs
    (a_i, b_i), normalized so a_i' S_xx a_i = b_i' S_yy b_i = 1.
    """

    lambdas: np.ndarray
    effective_n: int
    config: ModelConfig
    directions: Optional[list] = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        if lam.ndim != 1 or lam.size != min(self.config.p, self.config.q):
            raise DataShapeError("spectrum length must equal min(p, q)")
        if np.any(np.diff(lam) > 0) or lam[0] > 1.0 or lam[-1] < 0.0:
            raise NumericalError("eigenvalues must be descending within [0, 1]")


def center_observations(data: np.ndarray):
    """Remove each variable's sample mean (variables in rows).

    Returns the centered matrix and effective_n = n - 1, the sample size
    downstream formulas should use after mean removal.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise DataShapeError(f"need a 2-d matrix with at least 2 observations, got {data.shape}")
    return data - data.mean(axis=1, keepdims=True), data.shape[1] - 1


def _orthonormal_rowspace(mat: np.ndarray, name: str) -> np.ndarray:
    # QR of the n x d transposed data; rank check on the R diagonal.
    q, r = np.linalg.qr(mat.T, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * mat.shape[1] * np.finfo(float).eps:
        raise RankDeficiencyError(f"{name} does not have full row rank")
    return q


def cca_eigenvalues(x: np.ndarray, y: np.ndarray, centered: bool = True,
                    directions: bool = False) -> SampleSpectrum:
    """Squared sample canonical correlations of the pair (X, Y).

    X is p x n and Y is q x n with observations in columns.  When
    `centered` is False the data are mean-centered first and
    effective_n = n - 1; otherwise the data are used as given with
    effective_n = n.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise DataShapeError(f"incompatible shapes {x.shape} and {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataShapeError("data contain non-finite entries")
    p, n = x.shape
    q = y.shape[0]
    if n <= p + q:
        raise DataShapeError(f"need n > p + q, got n={n}, p+q={p + q}")

    effective_n = n
    if not centered:
        x, effective_n = center_observations(x)
        y, _ = center_observations(y)
    config = ModelConfig(p=p, q=q, n=effective_n)

    qx = _orthonormal_rowspace(x, "X")
    qy = _orthonormal_rowspace(y, "Y")
    u, sigma, vt = np.linalg.svd(qx.T @ qy, full_matrices=False)
    lam = sigma**2
    if lam[0] > 1.0 + _CLAMP_TOL or lam[-1] < -_CLAMP_TOL:
        raise NumericalError(f"squared cosine outside [0, 1] beyond tolerance: {lam[0]}, {lam[-1]}")
    lam = np.clip(lam, 0.0, 1.0)

    dirs = None
    if directions:
        # Map the principal-angle vectors back through the QR factors and
        # normalize against the sample covariances.
        rx = np.linalg.qr(x.T, mode="r")
        ry = np.linalg.qr(y.T, mode="r")
        scale = np.sqrt(effective_n)
        a = np.linalg.solve(rx, u) * scale
        b = np.linalg.solve(ry, vt.T) * scale
        dirs = [(a[:, i].copy(), b[:, i].copy()) for i in range(lam.size)]

    return SampleSpectrum(lambdas=lam, effective_n=effective_n, config=config, directions=dirs)


def esd(spectrum: SampleSpectrum, x):
    """Empirical spectral distribution F_n(x) = (1/q) #{lambda_i <= x}."""
    lam = np.sort(spectrum.lambdas)
    x = np.asarray(x, dtype=float)
    counts = np.searchsorted(lam, x, side="right")
    vals = counts / lam.size
    return float(vals) if vals.ndim == 0 else vals


def ks_distance_to_lsd(spectrum: SampleSpectrum, c1: float = None, c2: float = None) -> float:
    """Kolmogorov distance between the ESD and the limiting distribution.

    The supremum of |F_n - F| over the real line is attained at the
    eigenvalue jump points, so it is evaluated just before and at each
    sorted eigenvalue against the quadrature CDF.
    """
    if c1 is None:
        c1 = spectrum.config.c1
    if c2 is None:
        c2 = spectrum.config.c2
    lam = np.sort(spectrum.lambdas)
    m = lam.size
    f = lsd_cdf(lam, c1, c2)
    steps = np.arange(1, m + 1) / m
    return float(np.max(np.maximum(np.abs(steps - f), np.abs(steps - 1.0 / m - f))))
