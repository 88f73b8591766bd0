"""Statistical procedures on a sample spectrum.

Implements the full estimation pipeline: count the detached eigenvalues
(k_hat), invert the outlier map for each (r_hat, rho_hat), test the top
eigenvalue against the Tracy-Widom edge law (independence test), test
consecutive detached eigenvalues for a shared population spike
(multiplicity test against GOE gap quantiles), and pool estimates
within accepted groups.  Model-selection baselines (AIC, BIC, Cp) and
the asymptotic power approximation of the independence test round out
the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import refdist
from .cca import SampleSpectrum
from .errors import ModelDomainError
from .rmt import edges, gamma_outlier, phi_invert, xi_outlier, xi_tracy_widom

__all__ = [
    "SpikeEstimate",
    "TestReport",
    "default_epsilon",
    "estimate_k0",
    "estimate_spikes",
    "test_independence",
    "test_multiplicity",
    "estimate_ccc_pipeline",
    "model_selection_counts",
    "asymptotic_power",
]


@dataclass(frozen=True)
class TestReport:
    """Outcome of one hypothesis test, with the inputs echoed."""

    name: str
    statistic: float
    quantile: float
    alpha: float
    reject: bool
    p_value: Optional[float] = None
    p_value_clamped: bool = False
    inputs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpikeEstimate:
    """Detected spike count and per-spike estimates.

    `groups` partitions 1..k_hat (1-based index lists) into multiplicity
    groups; within a group every index carries the pooled estimate.
    `clamp_flags[i]` marks estimates whose eigenvalue fell below d_+ so
    the map inversion used the clamped discriminant.
    """

    k_hat: int
    epsilon_n: float
    r_hat: tuple = ()
    rho_hat: tuple = ()
    groups: tuple = ()
    clamp_flags: tuple = ()

    def __post_init__(self):
        if self.k_hat < 0:
            raise ModelDomainError("spike count cannot be negative")
        flat = [i for g in self.groups for i in g]
        if self.groups and sorted(flat) != list(range(1, self.k_hat + 1)):
            raise ModelDomainError("groups must partition 1..k_hat")


def default_epsilon(n: int) -> float:
    """Bulk-edge separation threshold, log(log(n)) / n^(2/3)."""
    if n < 16:
        raise ModelDomainError(f"threshold rule needs n >= 16, got {n}")
    return math.log(math.log(n)) / n ** (2.0 / 3.0)


def estimate_k0(spectrum: SampleSpectrum, epsilon: float = None) -> int:
    """Number of eigenvalues at or above d_+ + epsilon."""
    if epsilon is None:
        epsilon = default_epsilon(spectrum.effective_n)
    if epsilon <= 0.0:
        raise ModelDomainError(f"epsilon must be positive, got {epsilon}")
    cfg = spectrum.config
    threshold = edges(cfg.c1, cfg.c2).d_plus + epsilon
    return int(np.sum(spectrum.lambdas >= threshold))


def estimate_spikes(spectrum: SampleSpectrum, k_hat: int = None,
                    epsilon: float = None) -> SpikeEstimate:
    """Invert the outlier map for the detected eigenvalues.

    r_hat_i = phi(lambda_i) and rho_hat_i = sqrt(r_hat_i) for
    i <= k_hat (default: estimate_k0).  No multiplicity grouping is
    attempted here; see estimate_ccc_pipeline.
    """
    if epsilon is None:
        epsilon = default_epsilon(spectrum.effective_n)
    if k_hat is None:
        k_hat = estimate_k0(spectrum, epsilon)
    if k_hat > spectrum.lambdas.size:
        raise ModelDomainError(f"k_hat={k_hat} exceeds the {spectrum.lambdas.size} eigenvalues")
    cfg = spectrum.config
    d_plus = edges(cfg.c1, cfg.c2).d_plus
    r_hat, flags = [], []
    for lam in spectrum.lambdas[:k_hat]:
        r = phi_invert(float(lam), cfg.c1, cfg.c2)
        clamped = lam < d_plus or r < 0.0
        r_hat.append(min(max(r, 0.0), 1.0))
        flags.append(bool(clamped))
    return SpikeEstimate(
        k_hat=int(k_hat),
        epsilon_n=float(epsilon),
        r_hat=tuple(r_hat),
        rho_hat=tuple(math.sqrt(r) for r in r_hat),
        groups=tuple((i,) for i in range(1, k_hat + 1)),
        clamp_flags=tuple(flags),
    )


def test_independence(spectrum: SampleSpectrum, alpha: float = 0.05,
                      table: refdist.TracyWidomTable = None) -> TestReport:
    """Edge test of the null of no correlation between the blocks.

    Statistic n^(2/3) (lambda_1 - d_+) / xi_tw, referred to the
    Tracy-Widom (beta = 1) law; rejects when lambda_1 exceeds
    d_+ + n^(-2/3) q_alpha xi_tw, which is the same comparison as
    statistic > q_alpha.  Statistics beyond the tabulated range get a
    clamped p-value with the flag set.
    """
    if not (0.0 < alpha < 1.0):
        raise ModelDomainError(f"level must lie in (0, 1), got {alpha}")
    if table is None:
        table = refdist.tw1_table()
    cfg = spectrum.config
    n = spectrum.effective_n
    d_plus = edges(cfg.c1, cfg.c2).d_plus
    xi_tw = xi_tracy_widom(cfg.c1, cfg.c2)
    lam1 = float(spectrum.lambdas[0])
    statistic = n ** (2.0 / 3.0) * (lam1 - d_plus) / xi_tw
    q = table.quantile(1.0 - alpha)

    clamped = False
    if statistic > table.xs[-1]:
        p_value, clamped = 1.0 - float(table.fs[-1]), True
    elif statistic < table.xs[0]:
        p_value, clamped = 1.0, True
    else:
        p_value = 1.0 - table.cdf(statistic)

    threshold = n ** (-2.0 / 3.0) * q * xi_tw + d_plus
    return TestReport(
        name="independence",
        statistic=float(statistic),
        quantile=float(q),
        alpha=alpha,
        reject=bool(lam1 > threshold),
        p_value=float(p_value),
        p_value_clamped=clamped,
        inputs={"lambda_1": lam1, "d_plus": d_plus, "xi_tw": xi_tw, "n": n,
                "threshold_lambda": threshold},
    )


def _group_mean_spike(lambdas, cfg):
    return float(np.mean([phi_invert(float(v), cfg.c1, cfg.c2) for v in lambdas]))


def test_multiplicity(spectrum: SampleSpectrum, j0: int, j1: int, alpha: float = 0.05,
                      quantile_source: refdist.GoeGapQuantileTable = None,
                      k_hat: int = None) -> TestReport:
    """Test whether eigenvalues j0 .. j0+j1-1 share one population spike.

    T_n = sqrt(n) (lambda_j0 - lambda_{j0+j1-1}) / xi(r_bar) with r_bar
    the group mean of phi(lambda_i); reject when T_n exceeds the GOE gap
    quantile q_alpha(j1).
    """
    if j0 < 1 or j1 < 2:
        raise ModelDomainError(f"need j0 >= 1 and j1 >= 2, got ({j0}, {j1})")
    if not (0.0 < alpha < 1.0):
        raise ModelDomainError(f"level must lie in (0, 1), got {alpha}")
    if k_hat is None:
        k_hat = estimate_k0(spectrum)
    last = j0 + j1 - 1
    if last > k_hat:
        raise ModelDomainError(
            f"group {j0}..{last} extends beyond the {k_hat} detected spikes"
        )
    cfg = spectrum.config
    con = edges(cfg.c1, cfg.c2)
    group = spectrum.lambdas[j0 - 1:last]
    r_bar = _group_mean_spike(group, cfg)
    if r_bar <= con.r_c:
        raise ModelDomainError(
            f"pooled spike estimate {r_bar:.4f} at or below the threshold {con.r_c:.4f}; "
            "the fluctuation scale is undefined there"
        )
    xi = xi_outlier(r_bar, cfg.c1, cfg.c2)
    statistic = math.sqrt(spectrum.effective_n) * float(group[0] - group[-1]) / xi
    if quantile_source is None:
        quantile_source = refdist.default_gap_table()
    q = quantile_source.quantile_for(j1)
    return TestReport(
        name="multiplicity",
        statistic=float(statistic),
        quantile=float(q),
        alpha=alpha,
        reject=bool(statistic > q),
        inputs={"j0": j0, "j1": j1, "r_bar": r_bar, "xi": xi, "n": spectrum.effective_n},
    )


def estimate_ccc_pipeline(spectrum: SampleSpectrum, alpha: float = 0.05,
                          epsilon: float = None,
                          gap_table: refdist.GoeGapQuantileTable = None,
                          tw_table: refdist.TracyWidomTable = None):
    """Full estimation pipeline from a sample spectrum.

    Steps: independence test (stop with an empty estimate when
    retained), spike count k_hat, per-spike inversion, greedy
    multiplicity grouping of consecutive detected spikes (grow a group
    while the gap test retains; disjoint groups, scanned from the
    largest eigenvalue), pooled estimates within groups.

    Returns (SpikeEstimate, [TestReport]) with every test performed
    reported in order.
    """
    if epsilon is None:
        epsilon = default_epsilon(spectrum.effective_n)
    reports = [test_independence(spectrum, alpha, table=tw_table)]
    if not reports[0].reject:
        return SpikeEstimate(k_hat=0, epsilon_n=float(epsilon)), reports

    k_hat = estimate_k0(spectrum, epsilon)
    if k_hat == 0:
        # The edge test can reject while no eigenvalue clears the more
        # conservative counting threshold d_+ + epsilon.
        return SpikeEstimate(k_hat=0, epsilon_n=float(epsilon)), reports
    base = estimate_spikes(spectrum, k_hat, epsilon)

    if gap_table is None:
        gap_table = refdist.default_gap_table()
    groups = []
    j0 = 1
    while j0 <= k_hat:
        j1 = 1
        while j0 + j1 <= k_hat:
            trial = test_multiplicity(spectrum, j0, j1 + 1, alpha,
                                      quantile_source=gap_table, k_hat=k_hat)
            reports.append(trial)
            if trial.reject:
                break
            j1 += 1
        groups.append(tuple(range(j0, j0 + j1)))
        j0 += j1

    r_hat = list(base.r_hat)
    cfg = spectrum.config
    for g in groups:
        if len(g) > 1:
            pooled = _group_mean_spike(spectrum.lambdas[g[0] - 1:g[-1]], cfg)
            for i in g:
                r_hat[i - 1] = pooled
    estimate = SpikeEstimate(
        k_hat=k_hat,
        epsilon_n=float(epsilon),
        r_hat=tuple(r_hat),
        rho_hat=tuple(math.sqrt(r) for r in r_hat),
        groups=tuple(groups),
        clamp_flags=base.clamp_flags,
    )
    return estimate, reports


def model_selection_counts(spectrum: SampleSpectrum, p: int = None, q: int = None,
                           n: int = None):
    """Spike counts chosen by the AIC, BIC and Cp criteria.

    For j in 1..q each criterion sums over the trailing eigenvalues:

        AIC_j = -n log prod_{i>j} (1 - lambda_i) - 2 (p-j)(q-j)
        BIC_j = same with log(n) (p-j)(q-j)
        CP_j  = n sum_{i>j} lambda_i / (1 - lambda_i) - 2 (p-j)(q-j)

    with AIC_0 = BIC_0 = CP_0 = 0, and each estimator is the argmin over
    j in {0, ..., q}.  Eigenvalues at 1 make a criterion +inf for every
    j that still includes them.  Here q means min(p, q).
    """
    if p is None:
        p = spectrum.config.p
    if q is None:
        q = spectrum.config.q
    if n is None:
        n = spectrum.effective_n
    lam = spectrum.lambdas
    m = lam.size
    p, q = max(p, q), min(p, q)

    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = np.where(lam >= 1.0 - 1e-12, -np.inf, np.log1p(-np.minimum(lam, 1.0)))
        ratio_terms = np.where(lam >= 1.0 - 1e-12, np.inf, lam / (1.0 - np.minimum(lam, 1.0)))

    js = np.arange(0, q + 1)
    # trailing sums: tail[j] = sum over i > j (0-based sum over lam[j:])
    tail_log = np.concatenate([np.cumsum(log_terms[::-1])[::-1], [0.0]])[js.clip(max=m)]
    tail_ratio = np.concatenate([np.cumsum(ratio_terms[::-1])[::-1], [0.0]])[js.clip(max=m)]
    penalty = (p - js) * (q - js)

    aic = -n * tail_log - 2.0 * penalty
    bic = -n * tail_log - math.log(n) * penalty
    cp = n * tail_ratio - 2.0 * penalty
    for crit in (aic, bic, cp):
        crit[0] = 0.0
        np.nan_to_num(crit, copy=False, nan=np.inf, posinf=np.inf)
    return int(np.argmin(aic)), int(np.argmin(bic)), int(np.argmin(cp))


def asymptotic_power(r1: float, config, alpha: float = 0.05,
                     variance_scale: float = None, n: int = None) -> float:
    """Approximate power of the independence test against a spike r1.

    Evaluates P(Z > n^(-1/6) q_alpha xi_tw / xi(r1)
                  + sqrt(n) (d_+ - gamma(r1)) / xi(r1))
    with Z the Gaussian limit of sqrt(n)(lambda_1 - gamma_1)/xi(r1),
    variance 2 * variance_scale (a 1 x 1 symmetric-ensemble entry).
    variance_scale defaults to the calibrated value 1 (see refdist);
    the finite-n value is a plug-in approximation; only the limit 1 is
    exact.  Requires r1 > r_c.
    """
    if not (0.0 < alpha < 1.0):
        raise ModelDomainError(f"level must lie in (0, 1), got {alpha}")
    if variance_scale is None:
        variance_scale = refdist.CALIBRATED_VARIANCE_SCALE
    c1, c2 = config.c1, config.c2
    if n is None:
        n = config.n
    con = edges(c1, c2)
    if r1 <= con.r_c:
        raise ModelDomainError(f"power defined only above the threshold r_c={con.r_c:.4f}")
    if r1 >= 1.0 - 1e-12:
        return 1.0
    gamma1 = gamma_outlier(r1, c1, c2)
    xi = xi_outlier(r1, c1, c2)
    q = refdist.tw1_quantile(1.0 - alpha)
    threshold = (n ** (-1.0 / 6.0) * q * xi_tracy_widom(c1, c2) / xi
                 + math.sqrt(n) * (con.d_plus - gamma1) / xi)
    sd = math.sqrt(2.0 * variance_scale)
    return 0.5 * math.erfc(threshold / (sd * math.sqrt(2.0)))
