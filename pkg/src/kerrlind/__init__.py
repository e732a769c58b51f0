"""Static effective Lindbladian of the driven squeezed Kerr oscillator.

Builds the beyond-RWA master equation at successive orders, assembles the
dense Liouvillian on a truncated Fock space and extracts the coherent-state
lifetime T_X from its spectrum.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fock import OperatorExpr, adjoint, coherent_state, realize
from .lindblad import (
    DissipatorTerm,
    LindbladModel,
    Liouvillian,
    assemble_liouvillian,
    build_hamiltonian,
    build_model,
    channel_report,
    dissipators_order1,
    dissipators_order1_two_photon_only,
    dissipators_order2,
    engineered_cooling,
)
from .model import (
    BathLabel,
    BathPoint,
    BathSpectrum,
    ModelParams,
    alpha_squared,
    kerr_coefficient,
    load_config,
    pi_amplitude,
    thermal_occupation,
)
from .spectral import SpectralResult, converged_tx, eigenspectrum, extract_tx, steady_state
