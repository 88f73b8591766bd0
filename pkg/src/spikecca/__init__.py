"""Spiked canonical correlation analysis toolkit.

Closed-form spectral limits, stable sample CCA, spike detection and
estimation procedures, reference distributions, and a seeded Monte
Carlo study harness with CLI and HTTP front ends.
"""

from .cca import SampleSpectrum, cca_eigenvalues, center_observations, esd, ks_distance_to_lsd
from .errors import (
    ConfigError,
    DataShapeError,
    ModelDomainError,
    NumericalError,
    RankDeficiencyError,
    SpikeCCAError,
)
from .rmt import (
    ModelConfig,
    SpectralConstants,
    SpikeSpec,
    edges,
    gamma_outlier,
    lsd_cdf,
    lsd_density,
    m_function,
    phi_invert,
    stieltjes_lsd,
    stieltjes_s,
    xi_outlier,
    xi_tracy_widom,
)
from .inference import (
    SpikeEstimate,
    TestReport,
    asymptotic_power,
    default_epsilon,
    estimate_ccc_pipeline,
    estimate_k0,
    estimate_spikes,
    model_selection_counts,
    test_independence,
    test_multiplicity,
)
from .montecarlo import (
    Scenario,
    StudyConfig,
    StudyResult,
    load_study_config,
    run_study,
    study_config_from_dict,
)
from .presets import available_presets, get_preset
from .refdist import (
    GoeGapQuantileTable,
    TracyWidomTable,
    build_gap_table,
    default_gap_table,
    goe_gap_quantile,
    tw1_cdf,
    tw1_quantile,
    tw1_table,
)
from .sampling import DataMatrixPair, SampleSeed, sample_goe, sample_goe_gaps, sample_spiked

__version__ = "0.1.0"

__all__ = [
    "ModelConfig",
    "SpectralConstants",
    "SpikeSpec",
    "SampleSeed",
    "DataMatrixPair",
    "SampleSpectrum",
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
    "sample_spiked",
    "sample_goe",
    "sample_goe_gaps",
    "center_observations",
    "cca_eigenvalues",
    "esd",
    "ks_distance_to_lsd",
    "TestReport",
    "SpikeEstimate",
    "default_epsilon",
    "estimate_k0",
    "estimate_spikes",
    "test_independence",
    "test_multiplicity",
    "estimate_ccc_pipeline",
    "model_selection_counts",
    "asymptotic_power",
    "TracyWidomTable",
    "GoeGapQuantileTable",
    "tw1_table",
    "tw1_cdf",
    "tw1_quantile",
    "goe_gap_quantile",
    "build_gap_table",
    "default_gap_table",
    "Scenario",
    "StudyConfig",
    "StudyResult",
    "run_study",
    "load_study_config",
    "study_config_from_dict",
    "available_presets",
    "get_preset",
    "SpikeCCAError",
    "ModelDomainError",
    "DataShapeError",
    "RankDeficiencyError",
    "NumericalError",
    "ConfigError",
    "__version__",
]
