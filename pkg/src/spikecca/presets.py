"""Named study presets.

Each preset is a ready-made StudyConfig for one of the bundled
replication studies.  The ``-small`` variants run 200 replications on
the smaller scenarios so a full check finishes in minutes; the full
variants use 1000 replications like the reference tables.  ``reps``,
``seed``, ``workers``, and ``alpha`` can be overridden without editing
the preset.
"""

from __future__ import annotations

from .errors import ConfigError
from .montecarlo import Scenario, StudyConfig

__all__ = ["DEFAULT_ROOT_SEED", "available_presets", "get_preset"]

DEFAULT_ROOT_SEED = 1870

_SPIKES_TABLES = (0.8, 0.6, 0.4, 0.2)
_SPIKES_TIED = (0.8, 0.6, 0.4, 0.4)

# n fixed at 1000, dimensions grow: the detection threshold r_c grows
# with the ratios, so the true spike count drops along the list.
_GROWING_P = tuple(
    Scenario(p=p, q=p // 2, n=1000, spikes=_SPIKES_TABLES)
    for p in (10, 60, 110, 160, 210, 260)
)

# Ratios pinned at c1 = 0.1, c2 = 0.05 (r_c ~ 0.077, four detectable
# spikes); dimensions and sample size grow together.
_FIXED_RATIO = tuple(
    Scenario(p=p, q=p // 2, n=10 * p, spikes=_SPIKES_TABLES)
    for p in (10, 60, 110, 160, 210, 260)
)

_FIXED_RATIO_TIED = tuple(
    Scenario(p=s.p, q=s.q, n=s.n, spikes=_SPIKES_TIED) for s in _FIXED_RATIO
)

_FLUCTUATION = Scenario(p=500, q=1000, n=5000, spikes=(0.5, 0.4, 0.3, 0.16))
_FLUCTUATION_TIED = Scenario(p=500, q=1000, n=5000, spikes=(0.5, 0.4, 0.4, 0.16))
_NULL = Scenario(p=200, q=100, n=1000)


def _build(name: str) -> dict:
    builders = {
        "table1": dict(study="k0", scenarios=_GROWING_P, reps=1000),
        "table1-small": dict(study="k0", scenarios=_GROWING_P[:3], reps=200),
        "table2": dict(study="k0", scenarios=_FIXED_RATIO, reps=1000),
        "table2-small": dict(study="k0", scenarios=_FIXED_RATIO[:3], reps=200),
        "table3": dict(study="spikes", scenarios=_FIXED_RATIO, reps=1000),
        "table3-small": dict(study="spikes", scenarios=_FIXED_RATIO[1:3], reps=200),
        "table3tie": dict(study="spikes", scenarios=_FIXED_RATIO_TIED, reps=1000),
        "table4": dict(study="gaps", scenarios=(), reps=1_000_000),
        "figure1": dict(study="fluctuation", scenarios=(_FLUCTUATION,), reps=500),
        "figure2": dict(study="fluctuation", scenarios=(_FLUCTUATION_TIED,), reps=500,
                        options={"dump_samples": True}),
        "null-esd": dict(study="null", scenarios=(_NULL,), reps=100),
        "test-size": dict(study="null", scenarios=(_NULL,), reps=2000,
                          options={"compute_ks": False}),
    }
    return builders[name] if name in builders else None


_NAMES = ("table1", "table1-small", "table2", "table2-small", "table3",
          "table3-small", "table3tie", "table4", "figure1", "figure2",
          "null-esd", "test-size")


def available_presets() -> tuple:
    return _NAMES


def get_preset(name: str, *, seed: int = None, reps: int = None,
               workers: int = None, alpha: float = None) -> StudyConfig:
    """Build the named preset, optionally overriding seed/reps/workers/alpha."""
    spec = _build(name)
    if spec is None:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(_NAMES)}"
        )
    if reps is not None:
        spec["reps"] = reps
    return StudyConfig(
        root_seed=DEFAULT_ROOT_SEED if seed is None else seed,
        alpha=0.05 if alpha is None else alpha,
        workers=1 if workers is None else workers,
        **spec,
    )
