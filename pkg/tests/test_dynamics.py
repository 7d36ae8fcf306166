import numpy as np
import pytest
from scipy.linalg import expm

from tactsim.dynamics import (HamiltonianKind, NumericalError, diagonalize, evolve, expectation,
                              hamiltonian, propagator, rotation_to_equivalent_frame,
                              rotation_to_rotated_frame, trajectory)
from tactsim.metrology import qfi_pure, spin_moments, squeezing_parameter
from tactsim.spin import build_spin_matrices, coherent_state, hermitian_exp

TACT = [HamiltonianKind.TACT_ORIGINAL, HamiltonianKind.TACT_ROTATED, HamiltonianKind.TACT_EQUIVALENT]


def conj(U, H):
    return U @ H @ U.conj().T


@pytest.mark.parametrize("kind", list(HamiltonianKind))
def test_hermitian(kind):
    H = hamiltonian(kind, 9, chi=0.7)
    assert np.abs(H - H.conj().T).max() < 1e-12


def test_forms_by_hand():
    S = build_spin_matrices(6)
    sp, sm = S.splus, S.sminus
    assert np.allclose(hamiltonian("tact_original", 6), (sp @ sp - sm @ sm) / 2j)
    assert np.allclose(hamiltonian("oat", 6, 2.0), 2 * S.sz @ S.sz)


@pytest.mark.parametrize("N", [3, 10, 25])
def test_rotated_frame(N):
    H = conj(rotation_to_rotated_frame(N), hamiltonian("tact_original", N))
    assert np.abs(H - hamiltonian("tact_rotated", N)).max() < 1e-10


@pytest.mark.parametrize("N", [3, 10, 25])
def test_equivalent_frame(N):
    H = conj(rotation_to_equivalent_frame(N), hamiltonian("tact_rotated", N))
    assert np.abs(H - hamiltonian("tact_equivalent", N)).max() < 1e-10


def test_opposite_x_rotation_flips_sign():
    # exp(-i pi/2 Sy) exp(-i pi/4 Sx) maps onto minus the equivalent form
    N = 10
    S = build_spin_matrices(N)
    U = hermitian_exp(S.sy, np.pi / 2) @ hermitian_exp(S.sx, np.pi / 4)
    H = conj(U, hamiltonian("tact_rotated", N))
    assert np.abs(H + hamiltonian("tact_equivalent", N)).max() < 1e-10


def test_isospectral_and_symmetric():
    spectra = [np.linalg.eigvalsh(hamiltonian(k, 10)) for k in TACT]
    for s in spectra[1:]:
        assert np.abs(s - spectra[0]).max() < 1e-10
    assert np.abs(np.sort(spectra[0]) + np.sort(spectra[0])[::-1]).max() < 1e-10


def test_diagonalize():
    prop = diagonalize(build_spin_matrices(2).sz)
    assert np.allclose(prop.energies, [-1, 0, 1])
    prop = propagator("tact_rotated", 12, chi=0.5)
    V = prop.vectors
    assert np.abs(V.conj().T @ V - np.eye(13)).max() < 1e-10
    assert np.abs(prop.matrix() - hamiltonian("tact_rotated", 12, 0.5)).max() < 1e-10
    with pytest.raises(NumericalError):
        diagonalize(np.array([[0, 1], [0, 0]], dtype=complex))


def test_bad_inputs():
    with pytest.raises(ValueError):
        hamiltonian("tact", 4)
    with pytest.raises(ValueError):
        hamiltonian("oat", 4, chi=0)
    assert HamiltonianKind.parse("TACT_ROTATED") is HamiltonianKind.TACT_ROTATED
    prop = propagator("oat", 4)
    with pytest.raises(ValueError):
        trajectory(prop, coherent_state(1, 0, 4), [0.2, 0.1])
    with pytest.raises(ValueError):
        evolve(prop, 2 * coherent_state(1, 0, 4), 0.1)


def test_evolve_against_expm():
    N = 8
    H = hamiltonian("tact_original", N, chi=1.3)
    psi = coherent_state(0.7, 0.2, N)
    prop = diagonalize(H, chi=1.3)
    # chi_t = 0.26 with chi = 1.3 means t = 0.2
    assert np.abs(evolve(prop, psi, 0.26) - expm(-1j * H * 0.2) @ psi).max() < 1e-12


def test_identity_group_and_trajectory():
    N = 20
    prop = propagator("tact_rotated", N)
    psi = coherent_state(np.pi / 2, 0, N)
    assert np.abs(evolve(prop, psi, 0.0) - psi).max() < 1e-14
    two = evolve(prop, evolve(prop, psi, 0.01), 0.01)
    assert np.abs(two - evolve(prop, psi, 0.02)).max() < 1e-10
    traj = trajectory(prop, psi, [0.0])
    assert np.abs(traj[0] - psi).max() < 1e-14
    traj = trajectory(prop, psi, [0.0, 0.3])
    assert np.abs(traj[1] - evolve(prop, psi, 0.3)).max() < 1e-12


def test_saddle_energy_zero():
    N = 30
    psi = coherent_state(np.pi / 2, 0, N)
    assert abs(expectation(psi, hamiltonian("tact_rotated", N))) < 1e-12


def test_norm_and_energy_conservation():
    N = 50
    prop = propagator("tact_rotated", N)
    H = prop.matrix()
    psi = coherent_state(1.0, 0.4, N)
    times = np.linspace(0, 2.0, 1000)
    traj = trajectory(prop, psi, times)
    assert np.abs(np.linalg.norm(traj, axis=1) - 1).max() < 1e-10
    E = expectation(traj, H)
    assert np.abs(E - E[0]).max() < 1e-9 * max(1.0, abs(E[0]))


def test_short_step_taylor():
    N, dt = 10, 1e-4
    H = hamiltonian("tact_rotated", N)
    psi = coherent_state(1.1, 0.3, N)
    series = psi.copy()
    term = psi.copy()
    for n in range(1, 5):
        term = (-1j * dt / n) * (H @ term)
        series = series + term
    err = np.abs(evolve(diagonalize(H), psi, dt) - series).max()
    scale = np.abs(H).max() ** 5 * dt ** 5
    assert err < max(scale, 1e-14) * 10


def test_frame_equivalence_of_observables():
    N = 30
    U = rotation_to_rotated_frame(N)
    psi_rot = coherent_state(np.pi / 2, 0, N)
    psi_orig = U.conj().T @ psi_rot
    a = trajectory(propagator("tact_rotated", N), psi_rot, np.linspace(0, 0.1, 7))
    b = trajectory(propagator("tact_original", N), psi_orig, np.linspace(0, 0.1, 7))
    ma, mb = spin_moments(a), spin_moments(b)
    assert np.abs(qfi_pure(ma) - qfi_pure(mb)).max() < 1e-8
    assert np.abs(squeezing_parameter(ma) - squeezing_parameter(mb)).max() < 1e-8


def test_oat_mean_spin_closed_form():
    # <Sx>(t) = (N/2) cos^(N-1)(chi t) for chi Sz^2 from the +x coherent state
    N = 40
    t = np.linspace(0, 0.5, 11)
    traj = trajectory(propagator("oat", N), coherent_state(np.pi / 2, 0, N), t)
    sx = spin_moments(traj).mean[:, 0]
    assert np.abs(sx - N / 2 * np.cos(t) ** (N - 1)).max() < 1e-10
