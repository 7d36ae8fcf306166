import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import sph_harm_y
from sympy import Rational
from sympy.physics.quantum.cg import CG

from tactsim.dynamics import evolve, propagator
from tactsim.metrology import qfi_pure, reference_state, spin_moments
from tactsim.phasespace import (MapKind, SphereGrid, _tensor_element, cg_coefficient, circle_grid,
                                default_grid, fringe_count, husimi_map, interference_circle,
                                meridian_circle_grid, multipoles, normalized_legendre,
                                read_map_binary, sign_changes, spherical_harmonic, tensor_operator,
                                tensor_operator_table, wigner_map, write_map_binary,
                                write_map_csv)
from tactsim.spin import build_spin_matrices, coherent_state, fock_state, hermitian_exp, rotate_state


def random_state(rng, N):
    psi = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
    return psi / np.linalg.norm(psi)


# -- Clebsch-Gordan ---------------------------------------------------------

def test_cg_textbook_values():
    assert math.isclose(cg_coefficient(0.5, 0.5, 0.5, -0.5, 0, 0), 1 / math.sqrt(2))
    assert math.isclose(cg_coefficient(1, 1, 1, -1, 0, 0), 1 / math.sqrt(3))
    assert cg_coefficient(1, 1, 1, 1, 1, 1) == 0.0       # m1 + m2 != M
    assert cg_coefficient(1, 0, 1, 0, 3, 0) == 0.0       # triangle violated
    with pytest.raises(ValueError):
        cg_coefficient(0.3, 0, 1, 0, 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 7), st.integers(0, 7), st.data())
def test_cg_against_sympy(a, b, data):
    j1, j2 = Rational(a, 2), Rational(b, 2)
    J = data.draw(st.sampled_from([abs(j1 - j2) + k for k in range(int(j1 + j2 - abs(j1 - j2)) + 1)]))
    m1 = data.draw(st.sampled_from([-j1 + k for k in range(a + 1)]))
    m2 = data.draw(st.sampled_from([-j2 + k for k in range(b + 1)]))
    M = m1 + m2
    expected = float(CG(j1, m1, j2, m2, J, M).doit()) if abs(M) <= J else 0.0
    assert math.isclose(cg_coefficient(j1, m1, j2, m2, J, M), expected, abs_tol=1e-13)


def test_cg_orthogonality():
    j = 1.5
    ms = [-1.5, -0.5, 0.5, 1.5]
    for J in range(4):
        for Jp in range(4):
            for M in range(-min(J, Jp), min(J, Jp) + 1):
                s = sum(cg_coefficient(j, m1, j, M - m1, J, M) * cg_coefficient(j, m1, j, M - m1, Jp, M)
                        for m1 in ms if abs(M - m1) <= j)
                assert abs(s - (J == Jp)) < 1e-10


def test_cg_large_exact():
    # sum over m of |CG|^2 stays exact where log-factorial floats drift
    S = 50
    total = sum(cg_coefficient(S, m, S, -m, 60, 0) ** 2 for m in range(-S, S + 1))
    assert abs(total - 1) < 1e-12


# -- tensor operators -------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 5, 8])
def test_tensor_operators_match_cg_oracle(N):
    table = tensor_operator_table(N)
    for K in range(N + 1):
        for Q in range(-K, K + 1):
            T = tensor_operator(N, K, Q)
            oracle = np.array([[_tensor_element(N, K, r, c) if r - c == Q else 0.0
                                for c in range(N + 1)] for r in range(N + 1)])
            assert np.abs(T - oracle).max() < 1e-12
    assert table.shape == (N + 1,) * 3


def test_tensor_operators_large_N_spot_check():
    N = 60
    rng = np.random.default_rng(0)
    for _ in range(40):
        K = int(rng.integers(0, N + 1))
        Q = int(rng.integers(-K, K + 1))
        r = int(rng.integers(max(Q, 0), N + 1 + min(Q, 0)))
        assert abs(tensor_operator(N, K, Q)[r, r - Q] - _tensor_element(N, K, r, r - Q)) < 1e-12


def test_tensor_operator_algebra():
    N = 9
    S = build_spin_matrices(N)
    for K in range(N + 1):
        for Q in range(-K, K + 1):
            T = tensor_operator(N, K, Q)
            assert np.abs(S.sz @ T - T @ S.sz - Q * T).max() < 1e-10
            if Q < K:
                up = tensor_operator(N, K, Q + 1)
                c = math.sqrt(K * (K + 1) - Q * (Q + 1))
                assert np.abs(S.splus @ T - T @ S.splus - c * up).max() < 1e-10
            for Kp in range(N + 1):
                for Qp in (Q,):
                    if abs(Qp) <= Kp:
                        ip = np.trace(T.T @ tensor_operator(N, Kp, Qp))
                        assert abs(ip - (K == Kp)) < 1e-10
    assert np.allclose(tensor_operator(N, 0, 0), np.eye(N + 1) / math.sqrt(N + 1))
    with pytest.raises(ValueError):
        tensor_operator(3, 2, 3)


# -- spherical harmonics ----------------------------------------------------

def test_spherical_harmonics_against_scipy():
    rng = np.random.default_rng(2)
    theta = rng.uniform(0, np.pi, 50)
    phi = rng.uniform(-np.pi, np.pi, 50)
    for l in (0, 1, 5, 12):
        for m in range(-l, l + 1):
            ours = spherical_harmonic(l, m, theta, phi)
            ref = sph_harm_y(l, m, theta, phi)
            assert np.abs(ours - ref).max() < 1e-12


def test_legendre_stable_at_high_degree():
    from scipy.special import eval_legendre
    theta = np.array([0.1, 0.7, 1.3, np.pi / 2, 2.9])
    L = 1000
    P = normalized_legendre(L, theta)
    ref = np.sqrt((2 * L + 1) / (4 * np.pi)) * eval_legendre(L, np.cos(theta))
    assert np.abs(P[L, 0] - ref).max() < 1e-10
    # addition theorem: sum over m of |Y_lm|^2 is (2l+1)/(4 pi) at every point
    for l in (L - 1, L):
        total = P[l, 0] ** 2 + 2 * np.sum(P[l, 1:] ** 2, axis=0)
        assert np.abs(total / ((2 * l + 1) / (4 * np.pi)) - 1).max() < 1e-10


# -- Husimi -----------------------------------------------------------------

def test_husimi_coherent_peak_and_normalization():
    N = 20
    psi = coherent_state(np.pi / 2, 0, N)
    g = default_grid(N)
    Q = husimi_map(psi, g)
    assert Q.kind is MapKind.HUSIMI
    th, ph = Q.argmax()
    assert abs(th - np.pi / 2) < 1e-12 and abs(ph) < 1e-12
    assert abs(Q.values.max() - 1) < 1e-12
    assert Q.values.min() >= 0
    assert abs((N + 1) / (4 * np.pi) * Q.integrate() - 1) < 1e-6


def test_husimi_paired_grid_matches_tensor_grid():
    N = 7
    rng = np.random.default_rng(8)
    psi = random_state(rng, N)
    g = default_grid(N)
    full = husimi_map(psi, g).values
    pts = SphereGrid(g.theta[[1, 4, 9]], g.phi[[0, 7, 20]], paired=True)
    assert np.allclose(husimi_map(psi, pts).values, full[[1, 4, 9], [0, 7, 20]])


def test_husimi_normalization_tact_state():
    N = 50
    psi = evolve(propagator("tact_rotated", N), coherent_state(np.pi / 2, 0, N), np.log(2 * N) / (2 * N))
    Q = husimi_map(psi)
    assert abs((N + 1) / (4 * np.pi) * Q.integrate() - 1) < 1e-6


# -- Wigner -----------------------------------------------------------------

def wigner_oracle(psi, theta, phi):
    """Sum over ranks of rotated diagonal tensor operators built from exact CGs."""
    N = len(psi) - 1
    S = build_spin_matrices(N)
    R = hermitian_exp(S.sz, phi) @ hermitian_exp(S.sy, theta)
    chi = R.conj().T @ psi
    total = 0.0
    for K in range(N + 1):
        T = np.diag([_tensor_element(N, K, i, i) for i in range(N + 1)])
        total += math.sqrt((2 * K + 1) / (4 * np.pi)) * np.vdot(chi, T @ chi)
    return math.sqrt((N + 1) / (4 * np.pi)) * total


def test_wigner_against_rotated_kernel_oracle():
    rng = np.random.default_rng(11)
    N = 6
    psi = random_state(rng, N)
    theta = rng.uniform(0, np.pi, 8)
    phi = rng.uniform(-np.pi, np.pi, 8)
    W = wigner_map(psi, SphereGrid(theta, phi, paired=True))
    for i in range(8):
        assert abs(W.values[i] - wigner_oracle(psi, theta[i], phi[i]).real) < 1e-12


@pytest.mark.parametrize("N", [1, 4, 13])
def test_wigner_identities(N):
    rng = np.random.default_rng(N)
    psi = random_state(rng, N)
    g = default_grid(N)
    W = wigner_map(psi, g)
    rho = multipoles(psi)
    assert W.imag_residual < 1e-10
    assert abs(rho[0, N] - 1 / math.sqrt(N + 1)) < 1e-12
    assert abs(W.integrate() - 1) < 1e-10
    purity = np.sum(np.abs(rho) ** 2)
    assert abs(purity - 1) < 1e-10
    assert abs(purity - 4 * np.pi / (N + 1) * g.integrate(W.values ** 2)) < 1e-6


def test_wigner_pole_state_azimuthal():
    N = 10
    W = wigner_map(fock_state(N, N), default_grid(N)).values
    assert np.abs(W - W[:, :1]).max() < 1e-10


def test_wigner_phi_shift_covariance():
    N = 8
    rng = np.random.default_rng(5)
    psi = random_state(rng, N)
    g = default_grid(N)
    j = 3
    beta = 2 * np.pi * j / len(g.phi)
    W = wigner_map(psi, g).values
    Wr = wigner_map(rotate_state(psi, [0, 0, 1], beta), g).values
    assert np.abs(Wr - np.roll(W, j, axis=1)).max() < 1e-6


def test_wigner_coherent_peak_direction():
    N = 12
    W = wigner_map(coherent_state(np.pi / 3, 1.0, N), default_grid(N))
    th, ph = W.argmax()
    n = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    target = np.array([np.sin(np.pi / 3) * np.cos(1.0), np.sin(np.pi / 3) * np.sin(1.0), np.cos(np.pi / 3)])
    assert n @ target > np.cos(0.2)


def test_tact_best_state_q_positive_w_negative():
    N = 50
    psi = evolve(propagator("tact_rotated", N), coherent_state(np.pi / 2, 0, N), np.log(2 * N) / (2 * N))
    assert husimi_map(psi).values.min() >= 0
    assert wigner_map(psi).values.min() < 0


# -- fringes ----------------------------------------------------------------

def test_sign_changes():
    assert sign_changes([1, -1, 1, -1]) == 4
    assert sign_changes([1, -1, 1, -1], cyclic=False) == 3
    assert sign_changes([1, 1e-12, 1, 2]) == 0
    assert sign_changes([0.0, 0.0]) == 0


def test_circle_grids():
    g = circle_grid([0, 0, 1], 8)
    assert g.paired and np.allclose(g.theta, np.pi / 2)
    g = circle_grid([1, 0, 0], 100)
    pts = np.stack([np.sin(g.theta) * np.cos(g.phi), np.sin(g.theta) * np.sin(g.phi), np.cos(g.theta)], 1)
    assert np.abs(pts[:, 0]).max() < 1e-12
    m = meridian_circle_grid(10)
    assert m.shape == (20,) and np.allclose(np.abs(m.phi), np.pi / 2)


def test_fringes_coherent_and_noon():
    N = 30
    psi = coherent_state(np.pi / 2, 0, N)
    for axis in ([1, 0, 0], [0, 1, 0], [0, 0, 1]):
        W = wigner_map(psi, circle_grid(axis, 1000))
        assert fringe_count(W, rel_floor=1e-6) == 0
        assert fringe_count(W) == 0
    W = wigner_map(psi, circle_grid([0, 0, 1], 1000))
    assert W.values.min() >= -1e-6 * W.values.max()
    noon = reference_state("noon", 4).vector
    assert fringe_count(wigner_map(noon, circle_grid([0, 0, 1], 2000))) == 4
    assert fringe_count(wigner_map(noon, interference_circle(noon))) == 4
    with pytest.raises(ValueError):
        fringe_count(husimi_map(noon, circle_grid([0, 0, 1], 100)))
    with pytest.raises(ValueError):
        fringe_count(wigner_map(noon, default_grid(4)))


def test_fringes_at_qfi_maximum():
    N = 50
    prop = propagator("tact_rotated", N)
    psi0 = coherent_state(np.pi / 2, 0, N)
    t = np.linspace(0.05, 0.065, 301)
    from tactsim.dynamics import trajectory
    fq = qfi_pure(spin_moments(trajectory(prop, psi0, t)))
    psi = evolve(prop, psi0, t[np.argmax(fq)])
    assert fringe_count(wigner_map(psi, interference_circle(psi))) == N


# -- dumps ------------------------------------------------------------------

def test_map_dumps(tmp_path):
    N = 3
    W = wigner_map(coherent_state(1, 0, N), default_grid(N))
    write_map_csv(W, tmp_path / "w.csv")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0] == "theta,phi,value" and len(lines) == 1 + W.values.size
    write_map_binary(W, tmp_path / "w.bin")
    raw = (tmp_path / "w.bin").read_bytes()
    assert int.from_bytes(raw[:4], "little") == W.values.shape[0]
    assert np.array_equal(read_map_binary(tmp_path / "w.bin"), W.values)
