# Phase-space pictures at the first QFI maximum: the Husimi function
# smears out while the Wigner function develops negative fringes.
import numpy as np

from tactsim.dynamics import evolve, propagator, trajectory
from tactsim.experiments import default_t_max
from tactsim.metrology import first_local_maximum, qfi_pure, spin_moments
from tactsim.phasespace import (default_grid, fringe_count, husimi_map, interference_circle,
                                meridian_circle_grid, wigner_map)
from tactsim.spin import coherent_state

N = 50
prop = propagator("tact_rotated", N)
psi0 = coherent_state(np.pi / 2, 0, N)
times = np.linspace(0, default_t_max(N), 1000)
peak = first_local_maximum(times, qfi_pure(spin_moments(trajectory(prop, psi0, times))))
grid = default_grid(N)

for label, t in (("initial", 0.0), ("QFI max", peak.time)):
    psi = evolve(prop, psi0, t)
    q = husimi_map(psi, grid)
    w = wigner_map(psi, grid)
    print("%-8s chi t=%.4f  Husimi norm %.8f  max Q %.3f  Wigner min %+.3f  max %+.3f" % (
        label, t, (N + 1) / (4 * np.pi) * q.integrate(), q.values.max(),
        w.values.min(), w.values.max()))
    print("         fringes on the interference circle:",
          fringe_count(wigner_map(psi, interference_circle(psi))))

# A meridian through the poles crosses fewer fringes than the great circle
# perpendicular to the optimal rotation axis.
psi = evolve(prop, psi0, peak.time)
print("fringes on the phi = +-pi/2 meridian:",
      fringe_count(wigner_map(psi, meridian_circle_grid(2000, np.pi / 2))))
