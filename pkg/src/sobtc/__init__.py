"""Lattice Langevin simulator and analysis toolkit for self-organized-bistability
oscillations in an activation/loss two-field model."""

from .avalanche import AvalancheStats, Cluster, king_probability, label_avalanches
from .lattice import FieldState, LatticeConfig, RunOutput, run
from .model import (
    Couplings,
    FixedPoint,
    ModelParams,
    couplings,
    integrate_mf,
    lambda_c,
    lambda_c_scan,
    mf_drift,
    mf_fixed_point,
    spinodals,
)
from .observables import (
    CoherenceReport,
    JumpEvent,
    autocorrelation,
    coherence_time,
    detect_jumps,
    spectrum,
)
from .potential import (
    PotentialCurve,
    landscape_scan,
    mf_potential,
    quasistationary_potential,
)

__version__ = "0.1.0"
