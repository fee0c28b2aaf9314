"""Supersymmetric coupled-channel scattering with an exactly solvable Feshbach model."""

from ._core import (
    FeshbachParams,
    ResonancePole,
    SusyscatError,
    eigenphases,
    find_resonance,
    integrate_jost,
    jost_determinant,
    jost_matrix,
    phase_scan,
    potential_matrix,
    resonance_zeros,
    s_matrix,
    superpotential,
    superpotential_closed_form,
    transformed_potential,
)

__all__ = [
    "FeshbachParams",
    "ResonancePole",
    "SusyscatError",
    "eigenphases",
    "find_resonance",
    "integrate_jost",
    "jost_determinant",
    "jost_matrix",
    "phase_scan",
    "potential_matrix",
    "resonance_zeros",
    "s_matrix",
    "superpotential",
    "superpotential_closed_form",
    "transformed_potential",
]
