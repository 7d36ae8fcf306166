"""Mean-field phase portrait, Gaussian short-time model and frozen-spin limit.

The mean-field variables are the relative phase ``phi`` and the population
imbalance ``z = cos(theta)``; their flow is written in the rescaled time
tau = N*chi*t. The Gaussian model uses its own time tau = chi*t*sqrt(N), but
every public function takes the figure-axis variable chi*t.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .spin import check_particle_number

POLE_TOL = 1e-12
CENTER_TOL = 1e-10


def wrap_phase(phi):
    """Map angles into [-pi, pi)."""
    return (np.asarray(phi) + np.pi) % (2 * np.pi) - np.pi


def phase_distance(a, b):
    return np.abs(wrap_phase(np.asarray(a) - np.asarray(b)))


@dataclass(frozen=True)
class MeanFieldState:
    phi: float
    z: float

    def __post_init__(self):
        if not -1 <= self.z <= 1:
            raise ValueError(f"z must lie in [-1, 1], got {self.z}")
        object.__setattr__(self, "phi", float(wrap_phase(self.phi)))
        object.__setattr__(self, "z", float(self.z))

    @property
    def phase_defined(self):
        return abs(self.z) < 1

    def as_array(self):
        return np.array([self.phi, self.z])

    def bloch_angles(self):
        """(theta, phi) of the coherent state sitting at this point."""
        return float(np.arccos(self.z)), self.phi


def _check_pole(z):
    if np.any(np.abs(z) >= 1 - POLE_TOL):
        raise ValueError("phase undefined at pole")


def mf_rhs(phi, z):
    """(dphi/dtau, dz/dtau) with tau = N chi t. Works elementwise on arrays."""
    phi = np.asarray(phi, dtype=float)
    z = np.asarray(z, dtype=float)
    _check_pole(z)
    root = np.sqrt(1 - z * z)
    return -(1 - 2 * z * z) / root * np.sin(phi), z * root * np.cos(phi)


def mf_energy(phi, z):
    """Energy in units of hbar chi N^2 / 2."""
    z = np.asarray(z, dtype=float)
    return -z * np.sqrt(np.clip(1 - z * z, 0, None)) * np.sin(phi)


def jacobian(phi, z):
    """Stability matrix d(dphi, dz)/d(phi, z) at a single point."""
    _check_pole(z)
    root = np.sqrt(1 - z * z)
    f = (1 - 2 * z * z) / root
    df = -4 * z / root + (1 - 2 * z * z) * z / root ** 3
    dg = (1 - 2 * z * z) / root  # d/dz of z sqrt(1-z^2)
    return np.array([[-f * np.cos(phi), -df * np.sin(phi)],
                     [-z * root * np.sin(phi), dg * np.cos(phi)]])


class FixedPointKind(enum.Enum):
    SADDLE = "saddle"
    CENTER = "center"


@dataclass(frozen=True, eq=False)
class FixedPoint:
    location: MeanFieldState
    kind: FixedPointKind
    eigenvalues: np.ndarray   # units of N chi
    eigenvectors: np.ndarray  # columns, real for saddles
    residual: float = 0.0


def _analytic_roots():
    z0 = 1 / np.sqrt(2)
    roots = [(0.0, 0.0), (-np.pi, 0.0)]
    roots += [(s * np.pi / 2, t * z0) for s in (1, -1) for t in (1, -1)]
    return roots


def _newton(phi, z, steps=50, tol=1e-14):
    x = np.array([phi, z], dtype=float)
    for _ in range(steps):
        if abs(x[1]) >= 1 - 1e-6:
            return None
        F = np.array(mf_rhs(x[0], x[1]))
        if np.abs(F).max() < tol:
            return x
        try:
            dx = np.linalg.solve(jacobian(x[0], x[1]), -F)
        except np.linalg.LinAlgError:
            return None
        x = x + dx
    return x if np.abs(mf_rhs(x[0], x[1])).max() < 1e-10 else None


def classify(phi, z):
    J = jacobian(phi, z)
    vals, vecs = np.linalg.eig(J)
    if np.all(np.abs(vals.real) < CENTER_TOL):
        kind = FixedPointKind.CENTER
        order = np.argsort(-vals.imag)
    elif np.all(np.abs(vals.imag) < CENTER_TOL) and vals.real.min() < 0 < vals.real.max():
        kind = FixedPointKind.SADDLE
        order = np.argsort(-vals.real)
        vals, vecs = vals.real, vecs.real
    else:
        raise ValueError(f"fixed point at ({phi}, {z}) is neither a saddle nor a center")
    return kind, vals[order], vecs[:, order]


def find_fixed_points(n_seed=32):
    """All equilibria of the mean-field flow, classified by linearization.

    The equations factor into sin(phi)(1 - 2z^2) = 0 and z cos(phi) = 0, so
    the roots are known in closed form. Newton iteration from an
    ``n_seed`` x ``n_seed`` grid confirms no other root exists.
    """
    roots = _analytic_roots()
    phis = -np.pi + 2 * np.pi * (np.arange(n_seed) + 0.5) / n_seed
    zs = -1 + 2 * (np.arange(n_seed) + 0.5) / n_seed
    for p in phis:
        for q in zs:
            x = _newton(p, q)
            if x is None:
                continue
            if min(phase_distance(x[0], r[0]) + abs(x[1] - r[1]) for r in roots) > 1e-8:
                raise ValueError(f"unexpected mean-field fixed point at {x}")
    points = []
    for phi, z in roots:
        kind, vals, vecs = classify(phi, z)
        res = float(np.abs(mf_rhs(phi, z)).max())
        points.append(FixedPoint(MeanFieldState(phi, z), kind, vals, vecs, res))
    return points


@dataclass(frozen=True, eq=False)
class Path:
    t: np.ndarray      # tau = N chi t
    phi: np.ndarray
    z: np.ndarray

    @property
    def energy(self):
        return mf_energy(self.phi, self.z)

    @property
    def energy_drift(self):
        e = self.energy
        return float(np.abs(e - e[0]).max())


def _rhs_scalar(phi, z):
    zz = z * z
    if zz >= 1 - POLE_TOL:
        raise ValueError("phase undefined at pole")
    root = math.sqrt(1 - zz)
    return -(1 - 2 * zz) / root * math.sin(phi), z * root * math.cos(phi)


def _rk4_step(phi, z, h):
    k1 = _rhs_scalar(phi, z)
    k2 = _rhs_scalar(phi + h / 2 * k1[0], z + h / 2 * k1[1])
    k3 = _rhs_scalar(phi + h / 2 * k2[0], z + h / 2 * k2[1])
    k4 = _rhs_scalar(phi + h * k3[0], z + h * k3[1])
    return (phi + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            z + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))


def integrate_trajectory(s0, t_end=10.0, dt=1e-3):
    """Classical RK4 path from ``s0`` up to tau = ``t_end`` (units 1/(N chi)).

    Phases are kept unwrapped along the path so orbits stay continuous.
    Raises ValueError if the path reaches a pole.
    """
    if not isinstance(s0, MeanFieldState):
        s0 = MeanFieldState(*s0)
    if t_end <= 0 or dt <= 0:
        raise ValueError("t_end and dt must be positive")
    _check_pole(s0.z)
    n = int(np.ceil(t_end / dt - 1e-9))
    h = t_end / n
    phi, z = [s0.phi], [s0.z]
    p, q = s0.phi, s0.z
    for _ in range(n):
        p, q = _rk4_step(p, q, h)
        phi.append(p)
        z.append(q)
    return Path(h * np.arange(n + 1), np.array(phi), np.array(z))


def orbit_period(s0, dt=1e-3, t_max=50.0):
    """Return time of a closed orbit through ``s0``, refined by bisection.

    The section is the line through ``s0`` perpendicular to the initial
    velocity; the period is the second crossing in the same direction.
    """
    if not isinstance(s0, MeanFieldState):
        s0 = MeanFieldState(*s0)
    x0 = s0.as_array()
    v0 = np.array(mf_rhs(*x0))
    if np.linalg.norm(v0) < 1e-14:
        raise ValueError("start point is stationary")
    side = lambda x: float(np.dot(x - x0, v0))
    x = x0.copy()
    t = 0.0
    left = False
    while t < t_max:
        y = np.array(_rk4_step(float(x[0]), float(x[1]), dt))
        if not left and side(y) < 0:
            left = True
        if left and side(x) < 0 <= side(y):
            lo, hi = 0.0, dt
            for _ in range(60):
                mid = (lo + hi) / 2
                if side(np.array(_rk4_step(float(x[0]), float(x[1]), mid))) < 0:
                    lo = mid
                else:
                    hi = mid
            return t + (lo + hi) / 2
        x, t = y, t + dt
    raise ValueError("orbit did not close within t_max")


def vector_field(n_phi=41, n_z=41, z_max=0.98):
    """Flow on a uniform grid; returns (phi, z, dphi, dz) 2-D arrays."""
    phi = np.linspace(-np.pi, np.pi, n_phi)
    z = np.linspace(-z_max, z_max, n_z)
    P, Z = np.meshgrid(phi, z, indexing="ij")
    dphi, dz = mf_rhs(P, Z)
    return P, Z, dphi, dz


def write_vector_field(path, field):
    P, Z, dphi, dz = field
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi", "z", "dphi", "dz"])
        for row in zip(P.ravel(), Z.ravel(), dphi.ravel(), dz.ravel()):
            w.writerow([repr(float(v)) for v in row])


def write_path(path, traj):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "phi", "z", "energy"])
        for row in zip(traj.t, traj.phi, traj.z, traj.energy):
            w.writerow([repr(float(v)) for v in row])


# -- Gaussian (second-order truncated moment) model ------------------------

@dataclass(frozen=True)
class GaussianModel:
    """Short-time Gaussian model around the unstable point for N atoms."""

    N: int

    def __post_init__(self):
        check_particle_number(self.N)

    @property
    def epsilon(self):
        return 1.0 / self.N

    @property
    def sx0(self):
        return 0.5 / np.sqrt(self.epsilon)

    def tau(self, chi_t):
        return np.asarray(chi_t, dtype=float) / np.sqrt(self.epsilon)

    def chi_t(self, tau):
        return np.asarray(tau, dtype=float) * np.sqrt(self.epsilon)

    def exponent(self, tau):
        a = 4 * self.sx0
        return -a * tau + (np.sinh(a * tau) - tau) / (4 * self.sx0 ** 2)

    def best_tau(self):
        """Closed-form estimate of the squeezing-optimal tau."""
        return np.log(8 * self.sx0 ** 2) / (4 * self.sx0)


@dataclass(frozen=True, eq=False)
class GaussianResult:
    chi_t: np.ndarray
    tau: np.ndarray
    sx: np.ndarray
    xi2: np.ndarray
    fq: np.ndarray
    valid: np.ndarray  # tau < 1, where the short-time expansion applies


def gaussian_solution(model, chi_t):
    """Model mean spin, squeezing and QFI at the given chi*t values.

    ``sx`` is in units of sqrt(N) (s_x = <Sx>/sqrt(N)). Points with tau >= 1
    are still evaluated but flagged invalid.
    """
    if not isinstance(model, GaussianModel):
        model = GaussianModel(model)
    chi_t = np.asarray(chi_t, dtype=float)
    if np.any(chi_t < 0):
        raise ValueError("chi_t must be nonnegative")
    tau = model.tau(chi_t)
    a = 4 * model.sx0
    sx = model.sx0 - (np.cosh(a * tau) - 1) / a
    with np.errstate(over="ignore"):
        g = model.exponent(tau)
        xi2, fq = np.exp(g), model.N * np.exp(-g)
    return GaussianResult(chi_t, tau, sx, xi2, fq, tau < 1)


def bbgky_rhs(sx, dyy, dzz):
    """Truncated moment equations (d/dtau) for s_x, delta_yy, delta_zz.

    Here delta_jk = epsilon * Cov(S_j, S_k) with the symmetrized covariance.
    """
    return 2 * (dyy - dzz), -4 * dyy * sx, 4 * dzz * sx


def moment_variables(moments):
    """(s_x, delta_yy, delta_zz) of the Gaussian model from exact spin moments."""
    eps = 1.0 / moments.N
    return (np.sqrt(eps) * moments.mean[..., 0],
            eps * moments.cov[..., 1, 1],
            eps * moments.cov[..., 2, 2])


class TimeEstimate(enum.Enum):
    SQUEEZING_MODEL = "squeezing_model"
    QFI_EMPIRICAL = "qfi_empirical"


def best_time_estimates(N, which=TimeEstimate.SQUEEZING_MODEL):
    """chi*t of best squeezing (model) or first QFI maximum (empirical fit)."""
    if isinstance(N, (bool, np.bool_)) or int(N) != N or N < 2:
        raise ValueError(f"need an integer N >= 2, got {N!r}")
    which = TimeEstimate(which.value if isinstance(which, TimeEstimate) else str(which).lower())
    c = 2.0 if which is TimeEstimate.SQUEEZING_MODEL else 2 * np.pi
    return np.log(c * N) / (2 * N)


def gaussian_asymptotics(N):
    """Large-N best squeezing e/(2N) and QFI (2/e) N^2."""
    N = check_particle_number(N)
    return np.e / (2 * N), 2 / np.e * N ** 2


def frozen_spin_frequency(N, chi=1.0):
    return np.sqrt(2) * N * chi


def frozen_spin_prediction(N, chi_t):
    """Squeezing and QFI of small oscillations about a stable point."""
    N = check_particle_number(N)
    s2 = np.sin(frozen_spin_frequency(N) * np.asarray(chi_t, dtype=float)) ** 2
    return 1 - 0.5 * s2, N * (1 + s2)
