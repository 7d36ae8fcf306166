"""Config-driven experiment pipelines that write figure data to disk.

Every pipeline returns a :class:`RunManifest` and writes ``manifest.json``
next to its outputs. Tables are written with ``repr`` floats so a rerun with
the same configuration reproduces the files byte for byte.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import NumericalError, evolve, propagator, trajectory
from .meanfield import (GaussianModel, TimeEstimate, best_time_estimates, find_fixed_points,
                        frozen_spin_prediction, gaussian_asymptotics, gaussian_solution,
                        integrate_trajectory, vector_field)
from .metrology import (first_local_maximum, local_extrema, observable_sweep,
                        optimize_yurke_alpha, qfi_pure, refine_extremum, refine_yurke_optimum,
                        spin_moments, squeezing_parameter)
from .phasespace import (default_grid, fringe_count, husimi_map, interference_circle,
                         sphere_grid, wigner_map)
from .spin import coherent_state


class EventNotFoundError(NumericalError):
    """A labelled event has no bracketing extremum inside the time window."""


def default_t_max(N):
    """Window 3 ln(2 pi N)/(2N): three times the first QFI maximum estimate."""
    return 3 * best_time_estimates(N, TimeEstimate.QFI_EMPIRICAL)


def time_grid(config, N):
    t_max = config.t_max if config.t_max is not None else default_t_max(N)
    return np.linspace(0.0, t_max, config.samples)


# -- output handling -------------------------------------------------------

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    stages: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def to_dict(self):
        return {"command": self.command, "version": self.version, "config": self.config,
                "stages": self.stages, "files": self.files}


class OutputDir:
    """Serializes all writes for one run and records checksums."""

    def __init__(self, root, fmt, manifest):
        self.root = root
        self.fmt = fmt
        self.manifest = manifest
        os.makedirs(root, exist_ok=True)
        if not os.access(root, os.W_OK):
            raise PermissionError(f"output directory {root!r} is not writable")

    def _write(self, name, data):
        path = os.path.join(self.root, name)
        with open(path, "wb") as fh:
            fh.write(data)
        self.manifest.files.append({"path": name, "bytes": len(data),
                                    "sha256": hashlib.sha256(data).hexdigest()})
        return path

    def table(self, stem, columns):
        """Write a dict of equal-length columns as CSV or JSON."""
        names = list(columns)
        rows = list(zip(*(np.atleast_1d(columns[k]) if not isinstance(columns[k], list)
                          else columns[k] for k in names)))
        if self.fmt == "json":
            body = {"columns": names, "rows": [[_json_value(v) for v in r] for r in rows]}
            data = (json.dumps(body) + "\n").encode()
            return self._write(stem + ".json", data)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return self._write(stem + ".csv", buf.getvalue().encode())

    def sphere_map(self, stem, smap):
        if smap.grid.paired:
            th, ph = smap.grid.theta, smap.grid.phi
        else:
            th, ph = np.meshgrid(smap.grid.theta, smap.grid.phi, indexing="ij")
        return self.table(stem, {"theta": th.ravel(), "phi": ph.ravel(),
                                 "value": np.asarray(smap.values).ravel()})

    def finish(self):
        data = (json.dumps(self.manifest.to_dict(), indent=1) + "\n").encode()
        path = os.path.join(self.root, "manifest.json")
        with open(path, "wb") as fh:
            fh.write(data)
        return self.manifest


@contextmanager
def stage(manifest, name):
    start = time.perf_counter()
    try:
        yield
    finally:
        manifest.stages[name] = manifest.stages.get(name, 0.0) + time.perf_counter() - start


def _begin(config, command):
    manifest = RunManifest(command, config.to_dict())
    return manifest, OutputDir(config.out, config.format, manifest)


def initial_state(config, N):
    return coherent_state(config.theta, config.phi, N)


# -- evolve -----------------------------------------------------------------

def evolve_sweep(config, N):
    """Trajectory and metrology sweep for one N; returns (times, columns)."""
    times = time_grid(config, N)
    prop = propagator(config.hamiltonian, N, config.chi)
    states = trajectory(prop, initial_state(config, N), times)
    cols = observable_sweep(states, times, yurke_alpha=config.yurke_alpha)
    if not config.fidelities:
        cols = {k: v for k, v in cols.items() if not k.startswith("fid_")}
    return times, cols


def run_evolve(config):
    manifest, out = _begin(config, "evolve")
    for N in config.N:
        with stage(manifest, f"evolve N={N}"):
            _, cols = evolve_sweep(config, N)
        with stage(manifest, "write"):
            out.table(f"evolve_N{N}", cols)
    return out.finish()


# -- scaling ----------------------------------------------------------------

SCALING_COLUMNS = ("N", "t_best_xi", "xi2_best", "t_best_FQ", "FQ_best",
                   "model_t_best_xi", "model_xi2_best", "empirical_t_best_FQ", "model_FQ_best")


def scaling_point(N, hamiltonian="tact_rotated", theta=math.pi / 2, phi=0.0,
                  t_max=None, samples=1000, chi=1.0):
    """Best squeezing (first local minimum of xi^2) and first QFI maximum."""
    t_max = default_t_max(N) if t_max is None else t_max
    times = np.linspace(0.0, t_max, samples)
    prop = propagator(hamiltonian, N, chi)
    states = trajectory(prop, coherent_state(theta, phi, N), times)
    m = spin_moments(states)
    xi2 = squeezing_parameter(m, undefined="nan")
    fq = qfi_pure(m)
    mins = local_extrema(xi2, "min")
    if len(mins) == 0:
        raise EventNotFoundError(f"no squeezing minimum inside chi*t <= {t_max} for N={N}")
    sq = refine_extremum(times, xi2, mins[0])
    try:
        fmax = first_local_maximum(times, fq)
    except ValueError:
        raise EventNotFoundError(f"no QFI maximum inside chi*t <= {t_max} for N={N}") from None
    xi_model, fq_model = gaussian_asymptotics(N)
    return {"N": N, "t_best_xi": sq.time, "xi2_best": sq.value,
            "t_best_FQ": fmax.time, "FQ_best": fmax.value,
            "model_t_best_xi": best_time_estimates(N, TimeEstimate.SQUEEZING_MODEL),
            "model_xi2_best": xi_model,
            "empirical_t_best_FQ": best_time_estimates(N, TimeEstimate.QFI_EMPIRICAL),
            "model_FQ_best": fq_model}


def _scaling_job(args):
    return scaling_point(*args)


def run_scaling(config):
    if len(config.N) < 2:
        raise ValueError("scaling needs at least two particle numbers")
    manifest, out = _begin(config, "scaling")
    jobs = [(N, config.hamiltonian, config.theta, config.phi, config.t_max, config.samples,
             config.chi) for N in config.N]
    with stage(manifest, "sweeps"):
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                rows = list(pool.map(_scaling_job, jobs))
        else:
            rows = [_scaling_job(j) for j in jobs]
    with stage(manifest, "write"):
        out.table("scaling", {k: [r[k] for r in rows] for k in SCALING_COLUMNS})
    return out.finish()


# -- maps at labelled events ------------------------------------------------

EVENT_LABELS = {
    "A": "initial state",
    "B": "max F_BW",
    "C": "max F_EWSS",
    "D": "best squeezing",
    "E": "max F_Y",
    "F": "max F_Q",
    "G": "max F_TF",
    "H": "second minimum of F_Q",
}


@dataclass(frozen=True)
class Event:
    label: str
    time: float
    value: float
    residual: float
    index: int


def _first(label, times, values, kind):
    idx = local_extrema(values, kind)
    if len(idx) == 0:
        raise EventNotFoundError(f"event {label} not bracketed")
    p = refine_extremum(times, values, idx[0])
    return Event(label, p.time, p.value, p.residual, p.index)


def locate_events(times, cols):
    """Times of events A-H from a metrology sweep.

    Each event is the first interior extremum of its column. The initial
    coherent state counts as the first minimum of F_Q, so H is the first
    interior minimum.
    """
    if np.isnan(cols["fid_TF"]).all():
        raise ValueError("events E and G need an even particle number")
    events = [Event("A", float(times[0]), float(cols["FQ"][0]), 0.0, 0)]
    spec = [("B", "fid_BW", "max"), ("C", "fid_EWSS", "max"), ("D", "xi2", "min"),
            ("E", "fid_Y", "max"), ("F", "FQ", "max"), ("G", "fid_TF", "max"),
            ("H", "FQ", "min")]
    for label, col, kind in spec:
        events.append(_first(label, times, cols[col], kind))
    return events


def run_maps(config):
    manifest, out = _begin(config, "maps")
    cfg = config.replace(fidelities=True)
    for N in config.N:
        with stage(manifest, f"sweep N={N}"):
            times, cols = evolve_sweep(cfg, N)
            events = locate_events(times, cols)
            prop = propagator(config.hamiltonian, N, config.chi)
            psi0 = initial_state(config, N)
            yurke = optimize_yurke_alpha(trajectory(prop, psi0, times), times)
            yurke = refine_yurke_optimum(lambda t: evolve(prop, psi0, t), yurke, times)
        grid = default_grid(N) if config.map_resolution is None else \
            sphere_grid(config.map_resolution, 2 * config.map_resolution + 2)
        rows = {k: [] for k in ("label", "name", "chi_t", "value", "residual",
                                "wigner_min", "fringes")}
        for ev in events:
            psi = evolve(prop, psi0, ev.time)
            with stage(manifest, "maps"):
                maps = {}
                if "husimi" in config.maps:
                    maps["husimi"] = husimi_map(psi, grid)
                w = wigner_map(psi, grid)
                if "wigner" in config.maps:
                    maps["wigner"] = w
                fringes = fringe_count(wigner_map(psi, interference_circle(psi)))
            with stage(manifest, "write"):
                for kind, smap in maps.items():
                    out.sphere_map(f"map_N{N}_{ev.label}_{kind}", smap)
            rows["label"].append(ev.label)
            rows["name"].append(EVENT_LABELS[ev.label])
            rows["chi_t"].append(ev.time)
            rows["value"].append(ev.value)
            rows["residual"].append(ev.residual)
            rows["wigner_min"].append(float(w.values.min()))
            rows["fringes"].append(fringes)
        with stage(manifest, "write"):
            out.table(f"events_N{N}", rows)
            out.table(f"yurke_N{N}", {"alpha": [yurke.alpha], "chi_t": [yurke.time],
                                      "fidelity": [yurke.fidelity]})
    return out.finish()


# -- mean-field portrait ----------------------------------------------------

PORTRAIT_STARTS = ((math.pi / 2, 0.2), (math.pi / 2, 0.5), (math.pi / 2, 0.9),
                   (-math.pi / 2, 0.4), (-math.pi / 2, -0.3), (math.pi / 2, -0.6))


def run_portrait(config, starts=PORTRAIT_STARTS, t_end=10.0, dt=1e-3):
    manifest, out = _begin(config, "portrait")
    with stage(manifest, "fixed points"):
        points = find_fixed_points()
    with stage(manifest, "write"):
        out.table("fixed_points", {
            "phi": [p.location.phi for p in points],
            "z": [p.location.z for p in points],
            "kind": [p.kind.value for p in points],
            "eig1_re": [complex(p.eigenvalues[0]).real for p in points],
            "eig1_im": [complex(p.eigenvalues[0]).imag for p in points],
            "eig2_re": [complex(p.eigenvalues[1]).real for p in points],
            "eig2_im": [complex(p.eigenvalues[1]).imag for p in points],
        })
        P, Z, dphi, dz = vector_field()
        out.table("vector_field", {"phi": P.ravel(), "z": Z.ravel(),
                                   "dphi": dphi.ravel(), "dz": dz.ravel()})
    for i, s0 in enumerate(starts):
        with stage(manifest, "trajectories"):
            path = integrate_trajectory(s0, t_end, dt)
        with stage(manifest, "write"):
            out.table(f"trajectory_{i}", {"t": path.t, "phi": path.phi, "z": path.z,
                                          "energy": path.energy})
    return out.finish()


# -- closed-form approximations --------------------------------------------

def run_approx(config):
    manifest, out = _begin(config, "approx")
    summary = {k: [] for k in ("N", "t_best_squeezing_model", "t_best_qfi_empirical",
                               "xi2_best_asymptotic", "FQ_best_asymptotic")}
    for N in config.N:
        with stage(manifest, f"approx N={N}"):
            times = time_grid(config, N)
            g = gaussian_solution(GaussianModel(N), times)
            fxi, ffq = frozen_spin_prediction(N, times)
        with stage(manifest, "write"):
            out.table(f"approx_N{N}", {"chi_t": times, "tau": g.tau, "model_sx": g.sx,
                                       "model_xi2": g.xi2, "model_FQ": g.fq,
                                       "model_valid": g.valid, "frozen_xi2": fxi,
                                       "frozen_FQ": ffq})
        xi_a, fq_a = gaussian_asymptotics(N)
        summary["N"].append(N)
        summary["t_best_squeezing_model"].append(best_time_estimates(N, "squeezing_model")
                                                 if N >= 2 else float("nan"))
        summary["t_best_qfi_empirical"].append(best_time_estimates(N, "qfi_empirical")
                                               if N >= 2 else float("nan"))
        summary["xi2_best_asymptotic"].append(xi_a)
        summary["FQ_best_asymptotic"].append(fq_a)
    with stage(manifest, "write"):
        out.table("approx_summary", summary)
    return out.finish()


RUNNERS = {"evolve": run_evolve, "scaling": run_scaling, "maps": run_maps,
           "portrait": run_portrait, "approx": run_approx}
