"""Counter-twisting Hamiltonians and exact propagation in the Fock basis.

Units: hbar = 1 and time enters only as the dimensionless product chi*t.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .spin import build_spin_matrices, check_normalized, hermitian_exp

HERMITIAN_TOL = 1e-10


class NumericalError(RuntimeError):
    """Raised when a numerical precondition (Hermiticity, convergence) fails."""


class HamiltonianKind(enum.Enum):
    TACT_ORIGINAL = "tact_original"
    TACT_ROTATED = "tact_rotated"
    TACT_EQUIVALENT = "tact_equivalent"
    OAT = "oat"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            try:
                return cls[str(value).upper()]
            except KeyError:
                names = ", ".join(k.value for k in cls)
                raise ValueError(f"unknown Hamiltonian kind {value!r} (expected one of {names})") from None


def build_hamiltonian(kind, S, chi=1.0):
    """Hamiltonian matrix of the requested form.

    TACT_ORIGINAL   (chi/2i)(S+^2 - S-^2)
    TACT_ROTATED    -chi (Sy Sz + Sz Sy), the original rotated by exp(-i pi/2 Sy)
    TACT_EQUIVALENT chi (Sx^2 - Sy^2), stable fixed points on the equator
    OAT             chi Sz^2, one-axis twisting baseline
    """
    kind = HamiltonianKind.parse(kind)
    if chi == 0:
        raise ValueError("coupling chi must be nonzero")
    if kind is HamiltonianKind.TACT_ORIGINAL:
        sp, sm = S.splus, S.sminus
        H = (sp @ sp - sm @ sm) / 2j
    elif kind is HamiltonianKind.TACT_ROTATED:
        H = -(S.sy @ S.sz + S.sz @ S.sy)
    elif kind is HamiltonianKind.TACT_EQUIVALENT:
        H = S.sx @ S.sx - S.sy @ S.sy
    else:
        H = S.sz @ S.sz
    return chi * H


def hamiltonian(kind, N, chi=1.0):
    return build_hamiltonian(kind, build_spin_matrices(N), chi)


@dataclass(frozen=True, eq=False)
class Propagator:
    """Eigendecomposition H = V diag(E) V^dag of a time-independent Hamiltonian.

    ``energies`` are in units of hbar*chi so that evolution phases are
    ``E * chi_t``.
    """

    energies: np.ndarray
    vectors: np.ndarray
    chi: float = 1.0

    @property
    def N(self):
        return self.vectors.shape[0] - 1

    def matrix(self):
        """Reconstruct the Hamiltonian (including the chi factor)."""
        return self.chi * (self.vectors * self.energies) @ self.vectors.conj().T

    def unitary(self, chi_t):
        return (self.vectors * np.exp(-1j * self.energies * chi_t)) @ self.vectors.conj().T


def diagonalize(H, chi=1.0):
    H = np.asarray(H)
    scale = max(1.0, np.abs(H).max())
    if np.abs(H - H.conj().T).max() > HERMITIAN_TOL * scale:
        raise NumericalError("Hamiltonian is not Hermitian")
    energies, vectors = np.linalg.eigh(H)
    for a in (energies, vectors):
        a.setflags(write=False)
    return Propagator(energies / chi, vectors, float(chi))


def propagator(kind, N, chi=1.0):
    """Diagonalized Hamiltonian of the given kind for N particles."""
    return diagonalize(hamiltonian(kind, N, chi), chi)


def evolve(prop, psi0, chi_t):
    """|psi(t)> = exp(-i H t)|psi0> with t = chi_t / chi."""
    psi0 = np.asarray(psi0, dtype=complex)
    check_normalized(psi0)
    coeffs = prop.vectors.conj().T @ psi0
    return prop.vectors @ (np.exp(-1j * prop.energies * chi_t) * coeffs)


def trajectory(prop, psi0, times):
    """States at each chi*t in ``times``, shape (len(times), N+1).

    The eigenbasis projection of ``psi0`` is shared across all times.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    psi0 = np.asarray(psi0, dtype=complex)
    check_normalized(psi0)
    coeffs = prop.vectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, prop.energies))
    return (phases * coeffs) @ prop.vectors.T


def expectation(psi, H):
    """Real expectation value <psi|H|psi> (batched over leading axes)."""
    psi = np.asarray(psi)
    return np.real(np.einsum("...i,ij,...j->...", psi.conj(), H, psi))


def rotation_to_rotated_frame(N):
    """U = exp(-i pi/2 Sy), mapping TACT_ORIGINAL onto TACT_ROTATED."""
    S = build_spin_matrices(N)
    return hermitian_exp(S.sy, np.pi / 2)


def rotation_to_equivalent_frame(N):
    """U = exp(-i pi/2 Sy) exp(+i pi/4 Sx), mapping TACT_ROTATED onto TACT_EQUIVALENT.

    With exp(-i pi/4 Sx) instead, the same conjugation yields
    -chi (Sx^2 - Sy^2), i.e. the equivalent form with chi -> -chi.
    """
    S = build_spin_matrices(N)
    return hermitian_exp(S.sy, np.pi / 2) @ hermitian_exp(S.sx, -np.pi / 4)

