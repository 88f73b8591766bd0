"""Closed-form spectral quantities of the high-dimensional CCA model.

Everything in this module is a deterministic function of the dimension
ratios c1 = p/n and c2 = q/n (and possibly a population spike value r).
Conventions:

* The limiting spectrum of the squared sample canonical correlations is
  supported on [d_minus, d_plus] with an explicit density; its mass is 1
  when the spectrum of the min(p, q)-dimensional matrix is meant, so the
  density always uses min(c1, c2) in the normalizing constant and is
  symmetric in (c1, c2) apart from that.
* A population spike r detaches from the bulk exactly when r exceeds the
  threshold r_c = sqrt(c1 c2 / ((1-c1)(1-c2))); the detached sample
  eigenvalue converges to gamma(r), invertible by phi.
* s(z) is the Stieltjes-type transform used by the analytic
  characterizations; the square root is the branch with positive
  imaginary part on the upper half-plane, real and positive to the right
  of the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DataShapeError, ModelDomainError

__all__ = [
    "ModelConfig",
    "SpectralConstants",
    "SpikeSpec",
    "edges",
    "lsd_density",
    "lsd_cdf",
    "stieltjes_s",
    "stieltjes_lsd",
    "m_function",
    "gamma_outlier",
    "phi_invert",
    "xi_outlier",
    "xi_tracy_widom",
]


def _check_ratios(c1, c2):
    if not (0.0 < c1 < 1.0 and 0.0 < c2 < 1.0):
        raise ModelDomainError(f"dimension ratios must lie in (0, 1), got c1={c1}, c2={c2}")
    if c1 + c2 >= 1.0:
        raise ModelDomainError(f"need c1 + c2 < 1, got c1={c1}, c2={c2}")


# ======================================================================
# model configuration
# ======================================================================

@dataclass(frozen=True)
class ModelConfig:
    """Dimensions (p, q, n) of the two observed blocks and the sample."""

    p: int
    q: int
    n: int

    def __post_init__(self):
        if min(self.p, self.q) < 1:
            raise DataShapeError(f"dimensions must be positive, got p={self.p}, q={self.q}")
        if self.n <= self.p + self.q:
            raise DataShapeError(f"need n > p + q, got n={self.n}, p+q={self.p + self.q}")
        _check_ratios(self.p / self.n, self.q / self.n)

    @property
    def c1(self) -> float:
        return self.p / self.n

    @property
    def c2(self) -> float:
        return self.q / self.n

    def constants(self) -> "SpectralConstants":
        return edges(self.c1, self.c2)


@dataclass(frozen=True)
class SpectralConstants:
    """Support edges of the limiting spectrum and the detection threshold."""

    d_minus: float
    d_plus: float
    r_c: float


@dataclass(frozen=True)
class SpikeSpec:
    """Ordered population spike values r_1 >= ... >= r_k, each in (0, 1]."""

    r: tuple = field(default_factory=tuple)

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        object.__setattr__(self, "r", r)
        if any(not (0.0 < v <= 1.0) for v in r):
            raise ModelDomainError(f"spikes must lie in (0, 1], got {r}")
        if any(r[i] < r[i + 1] for i in range(len(r) - 1)):
            raise ModelDomainError(f"spikes must be in descending order, got {r}")

    def __len__(self):
        return len(self.r)

    def k0(self, c1: float, c2: float) -> int:
        """Number of spikes above the detection threshold."""
        rc = edges(c1, c2).r_c
        return sum(1 for v in self.r if v > rc)


# ======================================================================
# edges, threshold, density
# ======================================================================

def edges(c1: float, c2: float) -> SpectralConstants:
    """Support edges d_-/d_+ and the spike detection threshold r_c.

    d_pm = (sqrt(c1(1-c2)) +- sqrt(c2(1-c1)))^2, symmetric in (c1, c2).
    """
    _check_ratios(c1, c2)
    a = math.sqrt(c1 * (1.0 - c2))
    b = math.sqrt(c2 * (1.0 - c1))
    rc = math.sqrt(c1 * c2 / ((1.0 - c1) * (1.0 - c2)))
    return SpectralConstants(d_minus=(a - b) ** 2, d_plus=(a + b) ** 2, r_c=rc)


def lsd_density(x, c1: float, c2: float):
    """Density of the limiting spectral distribution at x.

    f(x) = sqrt((d_+ - x)(x - d_-)) / (2 pi c x (1 - x)) on (d_-, d_+)
    and 0 elsewhere, where c = min(c1, c2) so that f integrates to 1
    (the min(p, q)-dimensional matrix carries no atom).  Scalar or
    array x.
    """
    con = edges(c1, c2)
    c_low = min(c1, c2)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if con.d_minus == 0.0 and np.any(x == 0.0):
        raise ModelDomainError("density unbounded at x = 0 when d_- = 0 (c1 = c2)")
    if con.d_plus == 1.0 and np.any(x == 1.0):
        raise ModelDomainError("density unbounded at x = 1 when d_+ = 1")
    out = np.zeros_like(x)
    inside = (x > con.d_minus) & (x < con.d_plus)
    xi = x[inside]
    out[inside] = np.sqrt((con.d_plus - xi) * (xi - con.d_minus)) / (
        2.0 * np.pi * c_low * xi * (1.0 - xi)
    )
    return float(out[0]) if scalar else out


_CDF_NODES, _CDF_WEIGHTS = leggauss(96)


def lsd_cdf(x, c1: float, c2: float):
    """CDF of the limiting spectral distribution, F(x) = int_{d_-}^x f.

    The substitution t = d_- + (d_+ - d_-) sin^2(theta) removes both
    square-root edges, so fixed-order Gauss-Legendre in theta is
    accurate to machine precision.  Scalar or array x.
    """
    con = edges(c1, c2)
    c_low = min(c1, c2)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    width = con.d_plus - con.d_minus
    ratio = np.clip((x - con.d_minus) / width, 0.0, 1.0)
    theta_up = np.arcsin(np.sqrt(ratio))  # in [0, pi/2]

    # theta nodes for each upper limit: shape (len(x), order)
    half = 0.5 * theta_up[:, None]
    theta = half * (_CDF_NODES[None, :] + 1.0)
    t = con.d_minus + width * np.sin(theta) ** 2
    # f(t) * dt/dtheta with the sqrt factor simplified analytically.
    # When d_- = 0 the node at theta = 0 yields 0/0 for queries at the
    # edge itself; those rows are overwritten by the masks below.
    with np.errstate(invalid="ignore", divide="ignore"):
        integrand = (width**2 * np.sin(theta) ** 2 * np.cos(theta) ** 2) / (
            np.pi * c_low * t * (1.0 - t)
        )
    vals = (integrand * _CDF_WEIGHTS[None, :]).sum(axis=1) * half[:, 0]
    vals = np.clip(vals, 0.0, 1.0)
    vals[x >= con.d_plus] = 1.0
    vals[x <= con.d_minus] = 0.0
    return float(vals[0]) if scalar else vals


# ======================================================================
# Stieltjes transforms and the analytic oracle m
# ======================================================================

def _sqrt_two_cut(z: complex, d_minus: float, d_plus: float) -> complex:
    # Branch cut exactly on [d_-, d_+]: the principal-branch cuts of the
    # two factors cancel on (-inf, d_-].  Behaves like +z at infinity and
    # has nonnegative imaginary part on the upper half-plane.
    return np.sqrt(complex(z) - d_minus) * np.sqrt(complex(z) - d_plus)


def stieltjes_s(z, c1: float, c2: float) -> complex:
    """The transform s(z) = (z - c1 - c2 - sqrt((z-d_-)(z-d_+))) / (2(z-1)).

    Defined off the support [d_-, d_+]; satisfies the quadratic
    (z-1)s^2 + (c1+c2-z)s - c1c2 = 0.  The removable singularity at
    z = 1 is filled with its limit c1c2/(c1+c2-1).
    """
    _check_ratios(c1, c2)
    con = edges(c1, c2)
    z = complex(z)
    if z.imag == 0.0 and con.d_minus <= z.real <= con.d_plus:
        raise ModelDomainError(f"s(z) undefined on the support [{con.d_minus}, {con.d_plus}]")
    if abs(z - 1.0) < 1e-12:
        return complex(c1 * c2 / (c1 + c2 - 1.0))
    root = _sqrt_two_cut(z, con.d_minus, con.d_plus)
    return (z - c1 - c2 - root) / (2.0 * (z - 1.0))


def stieltjes_lsd(z, c1: float, c2: float):
    """Stieltjes transforms of the two limiting spectral distributions.

    Returns (s_check, s_tilde).  The ratios are mapped internally so
    that the labels match the densities regardless of argument order:
    s_tilde(z) = s(z)/(c_min z) - 1/z is the transform of the
    min(p, q)-dimensional matrix's limit (the lsd_density distribution)
    and s_check(z) = s(z)/(c_max z) - 1/z the transform of the larger
    companion matrix's limit, whose atom at zero sits in the -1/z term.
    Both satisfy c (s + 1/z) = s(z)/z for their respective ratio c.
    """
    z = complex(z)
    if abs(z) < 1e-14 or abs(z - 1.0) < 1e-14:
        raise ModelDomainError("transforms undefined at z = 0 and z = 1")
    s = stieltjes_s(z, c1, c2)
    c_hi, c_lo = max(c1, c2), min(c1, c2)
    return s / (c_hi * z) - 1.0 / z, s / (c_lo * z) - 1.0 / z


def m_function(z, r: float, c1: float, c2: float) -> complex:
    """Analytic function whose root locates the outlier for spike r.

    m(z, r) = (c2 - (1-c1) z - (1-z) s(z)) (1-r)
              + (1-z) (1 - (1-z) s(z) / c2) r

    For r > r_c the unique root in (d_+, 1] is gamma_outlier(r), and
    m(d_+ + 0, r) > 0 exactly when r > r_c.
    """
    if not (0.0 <= r <= 1.0):
        raise ModelDomainError(f"spike must lie in [0, 1], got r={r}")
    z = complex(z)
    s = stieltjes_s(z, c1, c2)
    bulk = (c2 - (1.0 - c1) * z - (1.0 - z) * s) * (1.0 - r)
    spike = (1.0 - z) * (1.0 - (1.0 - z) * s / c2) * r
    return bulk + spike


# ======================================================================
# outlier map, inverse, fluctuation scales
# ======================================================================

def gamma_outlier(r: float, c1: float, c2: float):
    """Limit of the sample eigenvalue produced by a population spike r.

    gamma(r) = r (1 - c1 + c1/r)(1 - c2 + c2/r) for r > r_c; returns
    None for r <= r_c (the eigenvalue sticks to the bulk edge d_+).
    """
    con = edges(c1, c2)
    if not (0.0 < r <= 1.0):
        raise ModelDomainError(f"spike must lie in (0, 1], got r={r}")
    if r <= con.r_c:
        return None
    return r * (1.0 - c1 + c1 / r) * (1.0 - c2 + c2 / r)


def phi_invert(lam: float, c1: float, c2: float) -> float:
    """Inverse of the outlier map: phi(gamma(r)) = r for r > r_c.

    phi(x) = (2 c1 c2 - c1 - c2 + x + sqrt((x-d_-)(x-d_+)))
             / (2 (1 - c1)(1 - c2))

    Intended for x in [d_+, 1]; phi(d_+) = r_c exactly.  For x below
    d_+ (sampling noise) the discriminant is clamped at zero, which
    extends phi monotonically; callers flag such inputs.
    """
    con = edges(c1, c2)
    if lam > 1.0 + 1e-12:
        raise ModelDomainError(f"eigenvalue must be at most 1, got {lam}")
    lam = min(float(lam), 1.0)
    disc = (lam - con.d_minus) * (lam - con.d_plus) if lam >= con.d_plus else 0.0
    vartheta = (1.0 - c1) * (1.0 - c2)
    return (2.0 * c1 * c2 - c1 - c2 + lam + math.sqrt(disc)) / (2.0 * vartheta)


def xi_outlier(r: float, c1: float, c2: float) -> float:
    """Fluctuation scale of a detached eigenvalue around gamma(r).

    xi(r)^2 = (1-r)^2 (2(1-c1)(1-c2) r + c1 + c2 - 2 c1 c2)
              ((1-c1)(1-c2) r^2 - c1 c2) / r^2
    """
    _check_ratios(c1, c2)
    if r <= 0.0:
        raise ModelDomainError(f"spike must be positive, got r={r}")
    vartheta = (1.0 - c1) * (1.0 - c2)
    varpi = c1 * c2
    quad = vartheta * r * r - varpi
    if quad < 0.0:
        raise ModelDomainError(f"xi undefined below the threshold: r={r} < r_c")
    xi2 = (1.0 - r) ** 2 * (2.0 * vartheta * r + c1 + c2 - 2.0 * varpi) * quad / r**2
    return math.sqrt(xi2)


def xi_tracy_widom(c1: float, c2: float) -> float:
    """Scale of the edge fluctuation, xi_tw^3 = d_+^2 (1-d_+)^2 / sqrt(c1 c2 (1-c1)(1-c2))."""
    con = edges(c1, c2)
    cube = con.d_plus**2 * (1.0 - con.d_plus) ** 2 / math.sqrt(c1 * c2 * (1.0 - c1) * (1.0 - c2))
    return cube ** (1.0 / 3.0)
