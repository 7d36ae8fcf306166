"""Exact simulation of two-axis counter-twisting spin dynamics.

Submodules: ``spin`` (operators and coherent states), ``dynamics``
(Hamiltonians and propagation), ``metrology`` (squeezing, QFI, reference
states), ``phasespace`` (Husimi and Wigner maps), ``meanfield`` (classical
portrait and closed-form approximations), ``experiments`` and ``cli``.
"""

__version__ = "0.1.0"

from .dynamics import HamiltonianKind, NumericalError, evolve, propagator, trajectory
from .metrology import (ReferenceKind, fidelity, qfi_pure, reference_state, spin_moments,
                        squeezing_parameter)
from .spin import build_spin_matrices, coherent_state, fock_state

__all__ = [
    "HamiltonianKind", "NumericalError", "ReferenceKind", "build_spin_matrices",
    "coherent_state", "evolve", "fidelity", "fock_state", "propagator", "qfi_pure",
    "reference_state", "spin_moments", "squeezing_parameter", "trajectory",
]
