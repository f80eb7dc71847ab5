"""Brute-force Fock-space ground truth for two-mode Gaussian states."""

from .decompositions import (
    GaussianCircuit,
    PassiveStage,
    bloch_messiah,
    bogoliubov,
    circuit_for,
    symplectic_residual,
    takagi,
    williamson,
)
from .states import (
    FockDensityMatrix,
    JointNumberDistribution,
    PPTResult,
    choose_cutoff,
    field_moments,
    joint_distribution,
    number_moments,
    ppt_negativity,
    synthesize_state,
    thin_distribution,
)

__all__ = [
    "FockDensityMatrix", "GaussianCircuit", "JointNumberDistribution", "PPTResult",
    "PassiveStage", "bloch_messiah", "bogoliubov", "choose_cutoff", "circuit_for",
    "field_moments", "joint_distribution", "number_moments", "ppt_negativity",
    "symplectic_residual", "synthesize_state", "takagi", "thin_distribution", "williamson",
]
