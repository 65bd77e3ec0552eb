"""Spin-symmetric Dirac-Coulomb SO(4) toolkit.

Closed-form levels, a matrix-free spectral grid with the conserved-operator
algebra, a self-consistent radial solver, the Kustaanheimo-Stiefel bridge to
the 4D oscillator and a command-line verification harness.
"""
from .grid import GridSpec, gaussian_packet, inner, norm
from .model import (
    CoulombParams,
    LevelRecord,
    OscParams,
    closed_form_levels,
    constrained_degeneracy,
    coulomb_degeneracy,
    energy_closed_form,
    oscillator_energy,
)
from .operators import build_hamiltonian, build_L, build_Q, build_S
from .radial import RadialProblem, degeneracy_scan, oscillator_level, solve_self_consistent

__all__ = [
    "CoulombParams",
    "GridSpec",
    "LevelRecord",
    "OscParams",
    "RadialProblem",
    "build_L",
    "build_Q",
    "build_S",
    "build_hamiltonian",
    "closed_form_levels",
    "constrained_degeneracy",
    "coulomb_degeneracy",
    "degeneracy_scan",
    "energy_closed_form",
    "gaussian_packet",
    "inner",
    "norm",
    "oscillator_energy",
    "oscillator_level",
    "solve_self_consistent",
]
