"""Husimi and spherical Wigner distributions on a Bloch-sphere grid.

The Wigner function is the multipole expansion

    W(theta, phi) = sqrt((N+1)/(4 pi)) sum_{K,Q} rho_KQ Y_KQ(theta, phi),
    rho_KQ = <psi| T_KQ^dag |psi>,

with orthonormal tensor operators
T_KQ = sum_{m,m'} (-1)^(S-m) <S m'; S -m | K Q> |S m'><S m| and S = N/2.
With this normalization the sphere integral of W is 1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .spin import check_particle_number, log_binomial, particle_number, raising_elements


class MapKind(enum.Enum):
    HUSIMI = "husimi"
    WIGNER = "wigner"


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Sample points on the Bloch sphere.

    By default a tensor grid of polar angles ``theta`` and azimuths ``phi``
    with values of shape (n_theta, n_phi); ``weights`` of that shape is the
    solid-angle quadrature rule when the grid supports integration. With
    ``paired=True`` the grid is a curve through the points
    (theta[i], phi[i]) and values are one-dimensional.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray | None = None
    paired: bool = False

    @property
    def shape(self):
        if self.paired:
            return (len(self.theta),)
        return (len(self.theta), len(self.phi))

    def integrate(self, values):
        if self.weights is None:
            raise ValueError("this grid carries no quadrature weights")
        return float(np.sum(self.weights * values))


def sphere_grid(n_theta, n_phi):
    """Gauss-Legendre nodes in cos(theta) times a uniform azimuth grid from -pi."""
    x, w_theta = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(-x)  # theta ascending
    theta = np.arccos(x[order])
    phi = -np.pi + 2 * np.pi * np.arange(n_phi) / n_phi
    weights = np.outer(w_theta[order], np.full(n_phi, 2 * np.pi / n_phi))
    return SphereGrid(theta, phi, weights)


def default_grid(N):
    """2N+1 polar nodes and 4N+4 azimuths: exact quadrature for Q and W^2."""
    N = check_particle_number(N)
    return sphere_grid(2 * N + 1, 4 * N + 4)


def circle_grid(axis, n=1000):
    """Closed great circle perpendicular to ``axis``, sampled at ``n`` points."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, helper)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    s = 2 * np.pi * np.arange(n) / n
    pts = np.cos(s)[:, None] * u + np.sin(s)[:, None] * v
    theta = np.arccos(np.clip(pts[:, 2], -1, 1))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return SphereGrid(theta, phi, paired=True)


def meridian_circle_grid(n_theta, phi0=np.pi / 2):
    """Great circle through the poles along the half-meridians phi0 and phi0 - pi."""
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phi1 = (phi0 - np.pi + np.pi) % (2 * np.pi) - np.pi
    return SphereGrid(np.concatenate([theta, theta[::-1]]),
                      np.concatenate([np.full(n_theta, phi0), np.full(n_theta, phi1)]),
                      paired=True)


@dataclass(frozen=True, eq=False)
class SphereMap:
    grid: SphereGrid
    values: np.ndarray
    kind: MapKind
    imag_residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def integrate(self):
        return self.grid.integrate(self.values)

    def argmax(self):
        """(theta, phi) of the largest grid value."""
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.grid.theta[i]), float(self.grid.phi[j])


# ---------------------------------------------------------------------------
# Husimi


def coherent_amplitude_table(theta, N):
    """|c_k(theta)| for every polar node, shape (n_theta, N+1)."""
    k = np.arange(N + 1)
    theta = np.asarray(theta, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        log_c = np.log(np.abs(np.cos(theta / 2)))
        log_s = np.log(np.abs(np.sin(theta / 2)))
    log_mod = 0.5 * log_binomial(N, k) + np.where(k == 0, 0.0, k * log_c) \
        + np.where(k == N, 0.0, (N - k) * log_s)
    return np.exp(log_mod)


def husimi_map(psi, grid=None):
    """Q(theta, phi) = |<theta, phi|psi>|^2."""
    psi = np.asarray(psi, dtype=complex)
    N = particle_number(psi)
    grid = default_grid(N) if grid is None else grid
    k = np.arange(N + 1)
    amp = coherent_amplitude_table(grid.theta, N) * psi  # (n_theta, D)
    if grid.paired:
        values = np.abs(np.sum(amp * np.exp(-1j * np.outer(grid.phi, N - k)), axis=1)) ** 2
    else:
        phases = np.exp(-1j * np.outer(N - k, grid.phi))  # (D, n_phi)
        values = np.abs(amp @ phases) ** 2
    return SphereMap(grid, values, MapKind.HUSIMI)


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients and tensor operators


def _doubled(x):
    try:
        two = 2 * Fraction(x)
    except TypeError:
        two = 2 * Fraction(str(x))
    if two.denominator != 1:
        raise ValueError(f"angular momentum arguments must be multiples of 1/2, got {x}")
    return int(two)


def cg_coefficient(j1, m1, j2, m2, J, M):
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phase).

    Half-integer arguments are allowed. Evaluated with the Racah formula in
    exact rational arithmetic; violated selection rules give 0.
    """
    a = [_doubled(v) for v in (j1, m1, j2, m2, J, M)]
    j1, m1, j2, m2, J, M = a
    if m1 + m2 != M or min(j1, j2, J) < 0:
        return 0.0
    if J > j1 + j2 or J < abs(j1 - j2) or (j1 + j2 + J) % 2:
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (J, M)):
        if abs(m) > j or (j + m) % 2:
            return 0.0

    def f(x):
        return math.factorial(x // 2)

    pref = Fraction((J + 1) * f(j1 + j2 - J) * f(j1 - j2 + J) * f(-j1 + j2 + J),
                    f(j1 + j2 + J + 2))
    pref *= f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(J + M) * f(J - M)
    total = Fraction(0)
    for v in range(0, j1 + j2 + J + 2, 2):
        args = (v, j1 + j2 - J - v, j1 - m1 - v, j2 + m2 - v, J - j2 + m1 + v, J - j1 - m2 + v)
        if min(args) < 0:
            continue
        denom = 1
        for x in args:
            denom *= f(x)
        total += Fraction(-1 if (v // 2) % 2 else 1, denom)
    if total == 0:
        return 0.0
    return math.copysign(math.sqrt(total * total * pref), total)


def _tensor_element(N, K, i_row, i_col):
    """(T_KQ)[i_row, i_col] = (-1)^(S-m) <S m'; S -m | K Q> from exact CGs."""
    S = Fraction(N, 2)
    m_row, m_col = i_row - S, i_col - S
    sign = -1 if (N - i_col) % 2 else 1
    return sign * cg_coefficient(S, m_row, S, -m_col, K, m_row - m_col)


def _casimir_band(N, Q):
    """Casimir superoperator sum_i [S_i, [S_i, .]] on the Q-th subdiagonal.

    Returns the diagonal and off-diagonal of the symmetric tridiagonal matrix
    acting on the entries T[j+Q, j], j = 0..N-Q.
    """
    a = np.concatenate([[0.0], raising_elements(N), [0.0]])  # a[j+1] = <j+1|S+|j>
    j = np.arange(N + 1 - Q)
    r = j + Q
    diag = Q ** 2 + 0.5 * (a[r] ** 2 + a[r + 1] ** 2 + a[j] ** 2 + a[j + 1] ** 2)
    off = -a[r[:-1] + 1] * a[j[:-1] + 1]
    return diag, off


@lru_cache(maxsize=8)
def tensor_operator_table(N):
    """Stacked tensor operators, shape (N+1, N+1, N+1).

    ``table[K]`` holds every T_KQ of rank K at once (T_KQ lives on the Q-th
    subdiagonal, i.e. entries with row - col = Q). For fixed Q >= 0 the
    subdiagonals of T_KQ are the eigenvectors of the Casimir superoperator
    (eigenvalue K(K+1)) restricted to that band. Signs: T_QQ ~ (S+)^Q has
    entries of sign (-1)^Q, and T_KQ for K > Q is aligned with
    [S-, T_{K,Q+1}]. Negative Q follows from T_{K,-Q} = (-1)^Q T_KQ^dag.
    """
    N = check_particle_number(N)
    D = N + 1
    a = np.concatenate([raising_elements(N), [0.0]])
    table = np.zeros((D, D, D))
    above = None  # band vectors of Q+1, columns K = Q+1..N
    for Q in range(N, -1, -1):
        diag, off = _casimir_band(N, Q)
        if len(diag) == 1:
            vecs = np.ones((1, 1))
        else:
            _, vecs = eigh_tridiagonal(diag, off)
        n = D - Q
        signs = np.empty(n)
        signs[0] = (-1) ** Q * np.sign(vecs[np.argmax(np.abs(vecs[:, 0])), 0])
        if above is not None:
            # band of [S-, T] from band Q+1: u_j = a[j+Q] t_j - a[j-1] t_{j-1}
            t = np.vstack([above, np.zeros((1, above.shape[1]))])
            j = np.arange(n)
            shifted = np.vstack([np.zeros((1, above.shape[1])), t[:-1]])
            a_prev = np.where(j > 0, a[j - 1], 0.0)
            lowered = a[j + Q][:, None] * t - a_prev[:, None] * shifted
            signs[1:] = np.sign(np.sum(lowered * vecs[:, 1:], axis=0))
        vecs = vecs * signs
        rows = np.arange(Q, D)
        cols = rows - Q
        table[Q:, rows, cols] = vecs.T
        if Q:
            table[Q:, cols, rows] = (-1) ** Q * vecs.T
        above = vecs
    table.setflags(write=False)
    return table


def tensor_operator(N, K, Q):
    """Dense T_KQ."""
    if abs(Q) > K or K > N:
        raise ValueError(f"need |Q| <= K <= N, got K={K}, Q={Q}, N={N}")
    T = np.zeros((N + 1, N + 1))
    rows = np.arange(max(Q, 0), N + 1 + min(Q, 0))
    T[rows, rows - Q] = tensor_operator_table(N)[K][rows, rows - Q]
    return T


def multipoles(psi):
    """rho_KQ = <psi|T_KQ^dag|psi> as an (N+1) x (2N+1) array indexed [K, Q+N].

    Entries with |Q| > K are zero.
    """
    psi = np.asarray(psi, dtype=complex)
    N = particle_number(psi)
    table = tensor_operator_table(N)
    density = np.outer(psi, psi.conj())  # [i', i] = psi_i' conj(psi_i)
    weighted = table * density[None]
    rho = np.zeros((N + 1, 2 * N + 1), dtype=complex)
    for Q in range(-N, N + 1):
        rho[:, Q + N] = np.trace(weighted, offset=-Q, axis1=1, axis2=2)
    return rho


# ---------------------------------------------------------------------------
# spherical harmonics


def normalized_legendre(L, theta):
    """Orthonormal associated Legendre functions, shape (L+1, L+1, n_theta).

    ``P[l, m]`` for 0 <= m <= l satisfies Y_lm = P[l, m] exp(i m phi) with the
    Condon-Shortley phase; entries with m > l are zero.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x, s = np.cos(theta), np.sin(theta)
    P = np.zeros((L + 1, L + 1, len(theta)))
    P[0, 0] = 1 / np.sqrt(4 * np.pi)
    for m in range(1, L + 1):
        P[m, m] = -np.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
    for m in range(L):
        P[m + 1, m] = np.sqrt(2 * m + 3) * x * P[m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[l, m] = a * (x * P[l - 1, m] - b * P[l - 2, m])
    return P


def spherical_harmonic(l, m, theta, phi):
    """Y_lm(theta, phi) on broadcast arrays (Condon-Shortley phase)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    P = normalized_legendre(l, theta.ravel())[l, abs(m)].reshape(theta.shape)
    sign = (-1) ** m if m < 0 else 1
    return sign * P * np.exp(1j * m * phi)


# ---------------------------------------------------------------------------
# Wigner


def wigner_from_multipoles(rho, grid):
    """Complex field sum_{KQ} rho_KQ Y_KQ scaled by sqrt((N+1)/(4 pi))."""
    N = rho.shape[0] - 1
    P = normalized_legendre(N, grid.theta)  # (K, |Q|, n_theta)
    field_q = np.zeros((2 * N + 1, len(grid.theta)), dtype=complex)
    for Q in range(-N, N + 1):
        q = abs(Q)
        sign = (-1) ** q if Q < 0 else 1
        field_q[Q + N] = sign * (rho[q:, Q + N] @ P[q:, q])
    scale = np.sqrt((N + 1) / (4 * np.pi))
    if grid.paired:
        phases = np.exp(1j * np.outer(grid.phi, np.arange(-N, N + 1)))
        return scale * np.sum(field_q.T * phases, axis=1)
    phases = np.exp(1j * np.outer(np.arange(-N, N + 1), grid.phi))
    return scale * (field_q.T @ phases)


def wigner_map(psi, grid=None):
    """Spherical Wigner function; ``imag_residual`` records max |Im W|."""
    psi = np.asarray(psi, dtype=complex)
    N = particle_number(psi)
    grid = default_grid(N) if grid is None else grid
    W = wigner_from_multipoles(multipoles(psi), grid)
    residual = float(np.abs(W.imag).max())
    return SphereMap(grid, W.real, MapKind.WIGNER, residual, {"N": N})


def sign_changes(values, rel_floor=1e-9, cyclic=True, scale=None):
    """Sign changes along a sampled curve.

    Samples with |v| <= rel_floor * scale are skipped; ``scale`` defaults to
    max|v| along the curve.
    """
    v = np.asarray(values, dtype=float)
    scale = np.abs(v).max() if scale is None else scale
    floor = rel_floor * scale
    signs = np.sign(v[np.abs(v) > floor])
    if len(signs) < 2:
        return 0
    flips = np.count_nonzero(signs[1:] != signs[:-1])
    if cyclic:
        flips += int(signs[-1] != signs[0])
    return int(flips)


def fringe_count(smap, rel_floor=1e-9):
    """Number of negative interference fringes crossed by a closed curve.

    ``smap`` must be a Wigner map on a closed paired grid (e.g. from
    :func:`circle_grid`); each fringe is bounded by two sign changes.
    The noise floor is relative to (N+1)/4pi, the peak height of a
    coherent-state Wigner function, so curves far from the state count 0.
    """
    if smap.kind is not MapKind.WIGNER:
        raise ValueError("fringe counting needs a Wigner map")
    if not smap.grid.paired:
        raise ValueError("fringe counting needs a closed curve grid")
    N = smap.meta.get("N")
    scale = None if N is None else (N + 1) / (4 * np.pi)
    return sign_changes(smap.values, rel_floor, cyclic=True, scale=scale) // 2


def interference_circle(psi, n=2000):
    """Great circle perpendicular to the optimal QFI rotation axis of ``psi``."""
    from .metrology import optimal_qfi_direction, spin_moments
    return circle_grid(optimal_qfi_direction(spin_moments(psi)), n)


def write_map_csv(smap, path):
    """Dump a map as CSV rows "theta,phi,value"."""
    if smap.grid.paired:
        th, ph = smap.grid.theta, smap.grid.phi
    else:
        th, ph = np.meshgrid(smap.grid.theta, smap.grid.phi, indexing="ij")
    with open(path, "w", newline="") as fh:
        fh.write("theta,phi,value\n")
        for a, b, c in zip(th.ravel(), ph.ravel(), smap.values.ravel()):
            fh.write(f"{a!r},{b!r},{c!r}\n")


def write_map_binary(smap, path):
    """Two little-endian uint32 dims followed by row-major float64 values."""
    values = np.ascontiguousarray(smap.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(np.array(values.shape, dtype="<u4").tobytes())
        fh.write(values.tobytes())


def read_map_binary(path):
    with open(path, "rb") as fh:
        shape = tuple(np.frombuffer(fh.read(8), dtype="<u4"))
        values = np.frombuffer(fh.read(), dtype="<f8")
    return values.reshape(shape)
