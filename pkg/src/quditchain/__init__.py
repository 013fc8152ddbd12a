"""Transfer of d-level states and entanglement through permutation spin rings."""

from .channel import KrausSet, apply, build_kraus, sample_haar, state_fidelity
from .entanglement import (NegativityResult, joint_state, log_negativity_closed,
                           log_negativity_generic, negativity_spectrum)
from .fidelity import (HaarMoments, Strategy, StrategyResult, average_fidelity,
                       average_fidelity_small_field, gamma_factor, optimize_field_tuned,
                       optimize_vanishing_field, scaling_lhs)
from .lattice import (ChainConfig, ModeSpectrum, TransferAmplitude, amplitude_bessel,
                      amplitude_exact, bessel_jn, mode_spectrum, unitarity_defect)

__version__ = "0.1.0"
