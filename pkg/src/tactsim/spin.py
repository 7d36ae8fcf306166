"""Collective spin operators and states in the fixed-N two-mode Fock basis.

Basis vector ``k`` is the Fock state |k, N-k> with ``k`` atoms in mode a, so
``Sz`` is diagonal with entries ``k - N/2`` and ``S+ = a^dag b`` raises ``k``.
States are plain complex numpy arrays of length ``N + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import gammaln, xlogy

NORM_TOL = 1e-10
UNIT_TOL = 1e-12


def check_particle_number(N, even=False):
    """Validate a particle number and return it as ``int``."""
    if isinstance(N, (bool, np.bool_)) or int(N) != N:
        raise ValueError(f"particle number must be an integer, got {N!r}")
    N = int(N)
    if N < 1:
        raise ValueError(f"particle number must be >= 1, got {N}")
    if even and N % 2:
        raise ValueError(f"this state requires an even particle number, got N={N}")
    return N


def particle_number(psi):
    """N for a state vector (or a stack of them along the last axis)."""
    return np.shape(psi)[-1] - 1


@dataclass(frozen=True, eq=False)
class SpinMatrices:
    """Dense (N+1)x(N+1) representations of Sx, Sy, Sz."""

    N: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self):
        return self.N + 1

    @cached_property
    def splus(self):
        return self.sx + 1j * self.sy

    @cached_property
    def sminus(self):
        return self.sx - 1j * self.sy

    def component(self, n):
        """S_n = n . S for a unit vector ``n``."""
        n = unit_vector(n)
        return n[0] * self.sx + n[1] * self.sy + n[2] * self.sz

    def __iter__(self):
        return iter((self.sx, self.sy, self.sz))


def raising_elements(N):
    """Matrix elements <k+1|S+|k> = sqrt((k+1)(N-k)) for k = 0..N-1."""
    k = np.arange(N, dtype=float)
    return np.sqrt((k + 1) * (N - k))


@lru_cache(maxsize=32)
def _spin_matrices(N):
    k = np.arange(N + 1)
    sz = np.diag(k - N / 2).astype(complex)
    splus = np.diag(raising_elements(N), -1).astype(complex)
    sminus = splus.T.copy()
    sx = (splus + sminus) / 2
    sy = (splus - sminus) / 2j
    for m in (sx, sy, sz):
        m.setflags(write=False)
    return SpinMatrices(N, sx, sy, sz)


def build_spin_matrices(N):
    """Spin matrices for N spin-1/2 particles (cached, read-only arrays)."""
    return _spin_matrices(check_particle_number(N))


def log_binomial(N, k):
    return gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)


def coherent_state(theta, phi, N):
    """Spin coherent state |theta, phi>.

    ``theta`` is measured from the pole where mode a holds every atom, so
    ``theta=0`` gives |N, 0> and ``(pi/2, 0)`` is the +x eigenstate of Sx.
    The south pole ``theta=pi`` is admitted.
    """
    N = check_particle_number(N)
    if not 0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    if not -np.pi <= phi < np.pi:
        raise ValueError(f"phi must lie in [-pi, pi), got {phi}")
    k = np.arange(N + 1)
    log_mod = (0.5 * log_binomial(N, k)
               + xlogy(k, np.cos(theta / 2))
               + xlogy(N - k, np.sin(theta / 2)))
    psi = np.exp(log_mod) * np.exp(1j * phi * (N - k))
    return psi / np.linalg.norm(psi)


def fock_state(k, N):
    """Basis vector |k, N-k>."""
    N = check_particle_number(N)
    if int(k) != k or not 0 <= k <= N:
        raise ValueError(f"Fock index must be an integer in [0, {N}], got {k}")
    psi = np.zeros(N + 1, dtype=complex)
    psi[int(k)] = 1.0
    return psi


def unit_vector(n):
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {n.shape}")
    if abs(np.linalg.norm(n) - 1) > UNIT_TOL:
        raise ValueError(f"direction must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    return n


def bloch_direction(theta, phi):
    """Unit vector of the Bloch sphere point (theta, phi)."""
    return np.array([np.sin(theta) * np.cos(phi),
                     np.sin(theta) * np.sin(phi),
                     np.cos(theta)])


def hermitian_exp(H, angle):
    """exp(-i * angle * H) for Hermitian ``H`` via exact eigendecomposition."""
    energies, vectors = np.linalg.eigh(H)
    return (vectors * np.exp(-1j * angle * energies)) @ vectors.conj().T


def rotation_operator(S, n, angle):
    """Unitary exp(-i angle S_n)."""
    return hermitian_exp(S.component(n), angle)


def rotate_state(psi, n, angle):
    """Apply exp(-i angle S_n) to ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    S = build_spin_matrices(particle_number(psi))
    return rotation_operator(S, n, angle) @ psi


def overlap(a, b):
    """<a|b>."""
    return np.vdot(a, b)


def check_normalized(psi, tol=NORM_TOL):
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > tol:
        raise ValueError(f"state is not normalized: |psi| = {norm!r}")


def state_to_record(psi):
    """JSON-ready record {"N", "re", "im"}."""
    psi = np.asarray(psi, dtype=complex)
    return {"N": particle_number(psi),
            "re": psi.real.tolist(),
            "im": psi.imag.tolist()}


def state_from_record(record):
    N = check_particle_number(record["N"])
    psi = np.asarray(record["re"], dtype=float) + 1j * np.asarray(record["im"], dtype=float)
    if psi.shape != (N + 1,):
        raise ValueError(f"record for N={N} must hold {N + 1} amplitudes, got {psi.shape}")
    return psi
