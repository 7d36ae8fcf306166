"""Spin moments, squeezing, quantum Fisher information and reference states.

Functions taking states accept a single vector of length N+1 or a stack of
them (time series) along the leading axes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .spin import (build_spin_matrices, check_particle_number, hermitian_exp,
                   particle_number, raising_elements)

#: Relative threshold below which the mean spin counts as vanishing (times N).
MEAN_SPIN_EPS = 1e-8


class UndefinedSqueezingError(ValueError):
    """The mean spin vanishes, so the squeezing parameter is undefined."""


def apply_spin(psi):
    """Return (Sx psi, Sy psi, Sz psi) using the tridiagonal structure."""
    psi = np.asarray(psi, dtype=complex)
    N = particle_number(psi)
    a = raising_elements(N)
    up = np.zeros_like(psi)    # S+ psi
    down = np.zeros_like(psi)  # S- psi
    up[..., 1:] = a * psi[..., :-1]
    down[..., :-1] = a * psi[..., 1:]
    sz = (np.arange(N + 1) - N / 2) * psi
    return (up + down) / 2, (up - down) / 2j, sz


@dataclass(frozen=True)
class SpinMoments:
    """Mean spin and symmetrized covariance Gamma_ij = <{S_i,S_j}>/2 - <S_i><S_j>.

    ``mean`` has shape (..., 3) and ``cov`` shape (..., 3, 3).
    """

    N: int
    mean: np.ndarray
    cov: np.ndarray

    def variance(self, n):
        n = np.asarray(n, dtype=float)
        return np.einsum("i,...ij,j->...", n, self.cov, n)


def spin_moments(psi, S=None):
    psi = np.asarray(psi, dtype=complex)
    N = particle_number(psi)
    if S is not None and S.dim != N + 1:
        raise ValueError(f"state has dimension {N + 1}, spin matrices {S.dim}")
    images = np.stack(apply_spin(psi), axis=-2)  # (..., 3, D)
    mean = np.real(np.einsum("...d,...id->...i", psi.conj(), images))
    second = np.einsum("...id,...jd->...ij", images.conj(), images)
    cov = second.real - mean[..., :, None] * mean[..., None, :]
    return SpinMoments(N, mean, cov)


def perpendicular_basis(mean):
    """Orthonormal pair (e1, e2) spanning the plane normal to ``mean``.

    e1 = z x mean (normalized) unless the mean is parallel to z, then x.
    """
    mean = np.asarray(mean, dtype=float)
    norm = np.linalg.norm(mean, axis=-1, keepdims=True)
    unit = mean / np.where(norm > 0, norm, 1.0)
    e1 = np.cross(np.array([0.0, 0.0, 1.0]), unit)
    e1_norm = np.linalg.norm(e1, axis=-1, keepdims=True)
    parallel = e1_norm < 1e-8
    e1 = np.where(parallel, np.array([1.0, 0.0, 0.0]), e1 / np.where(parallel, 1.0, e1_norm))
    e2 = np.cross(unit, e1)
    e2_norm = np.linalg.norm(e2, axis=-1, keepdims=True)
    e2 = e2 / np.where(e2_norm > 0, e2_norm, 1.0)
    return e1, e2


def min_perpendicular_variance(moments):
    """Minimal variance normal to the mean spin and the direction attaining it."""
    e1, e2 = perpendicular_basis(moments.mean)
    cov = moments.cov
    v11 = np.einsum("...i,...ij,...j->...", e1, cov, e1)
    v22 = np.einsum("...i,...ij,...j->...", e2, cov, e2)
    v12 = np.einsum("...i,...ij,...j->...", e1, cov, e2)
    var_min = (v11 + v22 - np.sqrt((v11 - v22) ** 2 + 4 * v12 ** 2)) / 2
    # principal angle of the minor axis within the (e1, e2) plane
    angle = 0.5 * np.arctan2(2 * v12, v11 - v22) + np.pi / 2
    direction = np.cos(angle)[..., None] * e1 + np.sin(angle)[..., None] * e2
    return var_min, direction


def _vanishing_mean(moments):
    return np.linalg.norm(moments.mean, axis=-1) <= MEAN_SPIN_EPS * moments.N


def squeezing_parameter(moments, N=None, undefined="raise"):
    """Wineland squeezing parameter N Var_min(S_perp) / |<S>|^2.

    Where the mean spin vanishes the value is undefined; ``undefined="raise"``
    raises :class:`UndefinedSqueezingError`, ``"nan"`` returns NaN there.
    """
    N = moments.N if N is None else N
    vanish = _vanishing_mean(moments)
    if undefined == "raise" and np.any(vanish):
        raise UndefinedSqueezingError("mean spin vanishes; xi^2 undefined")
    var_min, _ = min_perpendicular_variance(moments)
    length2 = np.sum(moments.mean ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi2 = N * var_min / length2
    return np.where(vanish, np.nan, xi2)[()]


def kitagawa_ueda_parameter(moments, N=None):
    """Variance ratio 4 Var_min(S_perp) / N (no mean-spin normalization).

    This is the quantity the second-moment Gaussian closed form tracks.
    """
    N = moments.N if N is None else N
    var_min, _ = min_perpendicular_variance(moments)
    return (4 * var_min / N)[()]


def qfi_pure(moments):
    """F_Q = 4 * largest eigenvalue of the covariance matrix (pure states)."""
    return (4 * np.linalg.eigvalsh(moments.cov)[..., -1])[()]


def optimal_qfi_direction(moments):
    _, vecs = np.linalg.eigh(moments.cov)
    return vecs[..., :, -1]


def fock_probabilities(psi):
    return np.abs(np.asarray(psi)) ** 2


# ---------------------------------------------------------------------------
# reference states


class ReferenceKind(enum.Enum):
    BW = "bw"
    EWSS = "ewss"
    YURKE = "yurke"
    TWIN_FOCK = "twin_fock"
    NOON = "noon"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_")
        aliases = {"tf": "twin_fock", "y": "yurke", "n00n": "noon"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown reference state {value!r}") from None

    @property
    def needs_even_n(self):
        return self in (ReferenceKind.YURKE, ReferenceKind.TWIN_FOCK)

    @property
    def pre_rotated(self):
        """Whether fidelities rotate the evolved state by exp(-i pi/2 Sx) first."""
        return self.needs_even_n


@dataclass(frozen=True, eq=False)
class ReferenceState:
    kind: ReferenceKind
    N: int
    vector: np.ndarray
    alpha: float | None = None


def _bw_amplitudes(N):
    k = np.arange(N + 1)
    return np.cos((k - N / 2) * np.pi / (N + 2)) / np.sqrt(1 + N / 2)


def reference_state(kind, N, alpha=None):
    """Berry-Wiseman, EWSS, Yurke(alpha), twin-Fock or NOON state in the Fock basis."""
    kind = ReferenceKind.parse(kind)
    N = check_particle_number(N, even=kind.needs_even_n)
    vec = np.zeros(N + 1, dtype=complex)
    if kind is ReferenceKind.BW:
        vec[:] = _bw_amplitudes(N)
    elif kind is ReferenceKind.EWSS:
        vec[:] = 1 / np.sqrt(N + 1)
    elif kind is ReferenceKind.YURKE:
        if alpha is None:
            raise ValueError("the Yurke state needs a mixing angle alpha")
        h = N // 2
        vec[h] = np.cos(alpha)
        vec[h + 1] = vec[h - 1] = np.sin(alpha) / np.sqrt(2)
    elif kind is ReferenceKind.TWIN_FOCK:
        vec[N // 2] = 1.0
    else:
        vec[0] = vec[N] = 1 / np.sqrt(2)
    return ReferenceState(kind, N, vec, None if alpha is None else float(alpha))


def qfi_analytic(kind, N, alpha=None):
    """Closed-form quantum Fisher information of a reference state."""
    kind = ReferenceKind.parse(kind)
    N = check_particle_number(N, even=kind.needs_even_n)
    if kind is ReferenceKind.BW:
        k = np.arange(N + 1)
        weights = np.cos((k - N / 2) * np.pi / (N + 2)) ** 2
        return float(2 / (2 + N) * np.sum(weights * (2 * k - N) ** 2))
    if kind is ReferenceKind.EWSS:
        return N ** 2 / 3 * (1 + 2 / N)
    if kind is ReferenceKind.YURKE:
        if alpha is None:
            raise ValueError("the Yurke state needs a mixing angle alpha")
        # 4<Sy^2> = <S+S- + S-S+> - <S+^2 + S-^2> with h = N/2 and s2 = sin^2(alpha)
        h, s2 = N / 2, np.sin(alpha) ** 2
        return h * (h + 1) * (2 - s2) - 2 * s2
    if kind is ReferenceKind.TWIN_FOCK:
        return N ** 2 / 2 * (1 + 2 / N)
    return float(N ** 2)


def pre_rotation(N):
    """exp(-i pi/2 Sx), applied before comparing with twin-Fock/Yurke states."""
    return hermitian_exp(build_spin_matrices(N).sx, np.pi / 2)


def fidelity(psi, ref, pre_rotation_matrix=None):
    """|<ref|U psi>|^2 for a state or stack of states.

    ``U`` defaults to exp(-i pi/2 Sx) for twin-Fock and Yurke references and
    to the identity otherwise; pass an explicit matrix to override.
    """
    psi = np.asarray(psi, dtype=complex)
    N = particle_number(psi)
    if N != ref.N:
        raise ValueError(f"state has N={N}, reference has N={ref.N}")
    U = pre_rotation_matrix
    if U is None and ref.kind.pre_rotated:
        U = pre_rotation(N)
    if U is not None:
        psi = psi @ np.asarray(U).T
    return (np.abs(psi @ ref.vector.conj()) ** 2)[()]


def yurke_fidelity(states, alphas):
    """Yurke fidelity for every (state, alpha) pair, shape (..., len(alphas))."""
    states = np.asarray(states, dtype=complex)
    N = check_particle_number(particle_number(states), even=True)
    q = states @ pre_rotation(N).T
    h = N // 2
    centre = q[..., h, None]
    wings = (q[..., h + 1, None] + q[..., h - 1, None]) / np.sqrt(2)
    alphas = np.asarray(alphas, dtype=float)
    return np.abs(np.cos(alphas) * centre + np.sin(alphas) * wings) ** 2


@dataclass(frozen=True)
class YurkeOptimum:
    alpha: float
    time: float
    fidelity: float
    index: int


def optimize_yurke_alpha(states, times=None, n_alpha=181, tol=1e-5):
    """Maximize the Yurke fidelity jointly over sampled states and alpha in [0, pi/2].

    A grid scan over alpha locates the best (state, alpha) pair and a
    bounded scalar search refines alpha at that state.
    """
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    if times is None:
        times = np.arange(len(states), dtype=float)
    alphas = np.linspace(0, np.pi / 2, n_alpha)
    table = yurke_fidelity(states, alphas)
    i, j = np.unravel_index(np.argmax(table), table.shape)
    step = alphas[1] - alphas[0]
    lo, hi = max(alphas[j] - step, 0.0), min(alphas[j] + step, np.pi / 2)

    def loss(a):
        return -yurke_fidelity(states[i], [a])[0]

    res = optimize.minimize_scalar(loss, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    alpha, value = res.x, -res.fun
    # the bounded search never returns the endpoints themselves
    for edge in (0.0, np.pi / 2):
        if lo <= edge <= hi and -loss(edge) >= value:
            alpha, value = edge, -loss(edge)
    return YurkeOptimum(float(alpha), float(times[i]), float(value), int(i))


def refine_yurke_optimum(state_at, start, times):
    """Polish a grid optimum jointly in (time, alpha).

    ``state_at(t)`` returns the evolved state. The fidelity ridge runs
    diagonally in the (t, alpha) plane, so refining alpha at a fixed grid
    time biases it; a Nelder-Mead step on both coordinates removes that.
    The search stays within one grid spacing of ``start.time``.
    """
    times = np.asarray(times, dtype=float)
    i = start.index
    lo = times[max(i - 1, 0)]
    hi = times[min(i + 1, len(times) - 1)]

    def loss(x):
        t = min(max(x[0], lo), hi)
        a = min(max(x[1], 0.0), np.pi / 2)
        return -yurke_fidelity(state_at(t), [a])[0]

    res = optimize.minimize(loss, [start.time, start.alpha], method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-14})
    if -res.fun < start.fidelity:
        return start
    t = float(min(max(res.x[0], lo), hi))
    a = float(min(max(res.x[1], 0.0), np.pi / 2))
    return YurkeOptimum(a, t, float(-res.fun), i)


# ---------------------------------------------------------------------------
# peaks along sampled time series


@dataclass(frozen=True)
class Peak:
    """A refined extremum: parabolic vertex through the grid point and neighbours."""

    time: float
    value: float
    index: int
    residual: float


def refine_extremum(times, values, index):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if index <= 0 or index >= len(values) - 1:
        return Peak(float(times[index]), float(values[index]), int(index), 0.0)
    t0, t1, t2 = times[index - 1:index + 2]
    y0, y1, y2 = values[index - 1:index + 2]
    denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
    a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom
    b = (t2 ** 2 * (y0 - y1) + t1 ** 2 * (y2 - y0) + t0 ** 2 * (y1 - y2)) / denom
    if a == 0:
        return Peak(float(t1), float(y1), int(index), 0.0)
    tv = -b / (2 * a)
    tv = min(max(tv, t0), t2)
    c = y1 - a * t1 ** 2 - b * t1
    yv = a * tv ** 2 + b * tv + c
    return Peak(float(tv), float(yv), int(index), float(abs(yv - y1)))


def locate_maximum(times, values):
    """Global maximum of a sampled curve, refined parabolically."""
    values = np.asarray(values, dtype=float)
    return refine_extremum(times, values, int(np.nanargmax(values)))


def local_extrema(values, kind="max"):
    """Indices of strict interior local maxima (or minima) of a sampled curve."""
    v = np.asarray(values, dtype=float)
    if kind == "min":
        v = -v
    left = v[1:-1] > v[:-2]
    right = v[1:-1] >= v[2:]
    return np.flatnonzero(left & right) + 1


def first_local_maximum(times, values):
    idx = local_extrema(values, "max")
    if len(idx) == 0:
        raise ValueError("no interior local maximum in the sampled window")
    return refine_extremum(times, values, idx[0])


def default_time_step(N):
    """Grid step (1/50) ln(2N)/(2N) used for fidelity-maximum searches."""
    return np.log(2 * N) / (2 * N) / 50


# ---------------------------------------------------------------------------
# observable sweeps

SWEEP_COLUMNS = ("chi_t", "xi2", "FQ", "mean_Sx", "mean_Sy", "mean_Sz",
                 "var_Sy", "var_Sz", "fid_BW", "fid_EWSS", "fid_Y", "fid_TF",
                 "fid_NOON")


def observable_sweep(states, times, yurke_alpha=None, n_alpha=181):
    """Metrology observables along a trajectory, keyed by :data:`SWEEP_COLUMNS`.

    ``fid_Y`` uses ``yurke_alpha`` when given, otherwise the best alpha on an
    ``n_alpha`` grid over [0, pi/2] at each time. Columns that need an even N
    are NaN for odd N, and ``xi2`` is NaN where the mean spin vanishes.
    """
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    times = np.asarray(times, dtype=float)
    N = particle_number(states)
    m = spin_moments(states)
    out = {
        "chi_t": times,
        "xi2": squeezing_parameter(m, undefined="nan"),
        "FQ": qfi_pure(m),
        "mean_Sx": m.mean[:, 0],
        "mean_Sy": m.mean[:, 1],
        "mean_Sz": m.mean[:, 2],
        "var_Sy": m.cov[:, 1, 1],
        "var_Sz": m.cov[:, 2, 2],
        "fid_BW": fidelity(states, reference_state("bw", N)),
        "fid_EWSS": fidelity(states, reference_state("ewss", N)),
        "fid_NOON": fidelity(states, reference_state("noon", N)),
    }
    if N % 2 == 0:
        out["fid_TF"] = fidelity(states, reference_state("twin_fock", N))
        if yurke_alpha is None:
            out["fid_Y"] = yurke_fidelity(states, np.linspace(0, np.pi / 2, n_alpha)).max(axis=-1)
        else:
            out["fid_Y"] = yurke_fidelity(states, [yurke_alpha])[:, 0]
    else:
        out["fid_TF"] = out["fid_Y"] = np.full(len(times), np.nan)
    return {k: np.atleast_1d(out[k]) for k in SWEEP_COLUMNS}
