"""Phonon-blockade simulation for hybrid atom-optomechanical systems."""

from .errors import PBSimError
from .hilbert import DensityMatrix, HilbertSpace, Operator, annihilation, creation, embed, expectation, pauli_ops
from .liouvillian import CollapseChannel, Liouvillian, build_liouvillian, dissipator, thermal_occupation
from .models import (
    OneCavityParams,
    TwoCavityParams,
    build_one_cavity_hamiltonian,
    build_two_cavity_hamiltonian_full,
    build_two_cavity_hamiltonian_reduced,
    optimal_coupling,
)
from .observables import classify, correlation_report, g_n, supermode_g2
from .solvers import Trajectory, evolve, steady_state
from .sweep import SweepSpec, emit_csv, find_optimum, load_config, locate_region_boundaries, run_sweep

__version__ = "0.1.0"
