"""Spin-S phase-space dynamics: Wigner functions, currents and stagnation lines."""

from ._core import (
    ConfigError,
    ResolutionError,
    UnsupportedTopologyError,
    __version__,
    coherent_density,
    coherent_state,
    coherent_wigner_closed_form,
    evolve,
    grid,
    kerr_current,
    linear_current,
    moment,
    phi_multiplier,
    simulate,
    spin_statistics,
    stagnation_lines,
    twa,
    verify,
    wigner,
    wigner_at,
)

__all__ = [
    "ConfigError",
    "ResolutionError",
    "UnsupportedTopologyError",
    "__version__",
    "coherent_density",
    "coherent_state",
    "coherent_wigner_closed_form",
    "evolve",
    "grid",
    "kerr_current",
    "linear_current",
    "moment",
    "phi_multiplier",
    "simulate",
    "spin_statistics",
    "stagnation_lines",
    "twa",
    "verify",
    "wigner",
    "wigner_at",
]
