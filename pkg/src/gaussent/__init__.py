"""Two-mode Gaussian entanglement from particle-number correlations."""

__version__ = "0.1.0"

from .correlations import (
    BetaPair,
    CorrelationObservables,
    EntanglementReport,
    criterion_from_counts,
    g2_from_state,
    g4_from_state,
    invert_beta,
    theta_from_g,
)
from .gaussian_core import (
    CovarianceMatrix,
    StateClass,
    ThermalTwoModeState,
    apply_loss,
    build_covariance,
    classify,
    log_negativity,
    symplectic_spectrum,
)
from .witnesses import g2_entanglement_threshold, g2_separability_threshold, witness_classify

__all__ = [
    "BetaPair", "CorrelationObservables", "CovarianceMatrix", "EntanglementReport",
    "StateClass", "ThermalTwoModeState", "apply_loss", "build_covariance", "classify",
    "criterion_from_counts", "g2_entanglement_threshold", "g2_from_state", "g2_separability_threshold",
    "g4_from_state", "invert_beta", "log_negativity", "symplectic_spectrum", "theta_from_g",
    "witness_classify",
]
