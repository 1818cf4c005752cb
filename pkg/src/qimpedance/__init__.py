"""Dispersive Hamiltonian parameters of superconducting circuits from their impedance."""

from .analysis import AnalysisOptions, AnalysisResult, analyze_network, analyze_pole_residue
from .cauer import CauerRealization, build_frames, coupling_matrix_g, synthesize
from .core import (CONSTANTS, TOLERANCE_PROFILES, DispersiveReport, DriveChannel, DrivePort,
                   Element, Junction, LinearNetwork, PoleResidueImpedance, QubitMode,
                   Tolerances, to_angular, to_linear)
from .dispersive import (beta_tensor, build_alpha, chi_matrix, closed_form_example1,
                         exchange_matrix, solve_qubit_mode)
from .drive import crosstalk_matrix, drive_coupling_matrix, purcell_matrix, thermal_factor
from .errors import *  # noqa: F401,F403
from .network import NetworkImpedance, extract_modes, modal_decomposition, nodal_matrices
from .oracle import exact_normal_modes, j_from_blockdiag, schrieffer_wolff

__version__ = "0.1.0"
