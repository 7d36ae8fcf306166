# Classical limit: fixed points, their linearization and a few orbits.
import numpy as np

from tactsim.meanfield import (find_fixed_points, frozen_spin_frequency, integrate_trajectory,
                               orbit_period)

for p in find_fixed_points():
    ev = np.round(p.eigenvalues, 6)
    print("%-6s phi=%+.4f z=%+.4f eigenvalues %s" % (p.kind.value, p.location.phi, p.location.z, ev))

# orbits around a center close; the period tends to 2 pi/sqrt(2) for small ones
for z in (0.72, 0.8, 0.9, 0.5):
    T = orbit_period((np.pi / 2, z))
    print("orbit from (pi/2, %.2f): period %.4f (linear %.4f)" % (z, T, 2 * np.pi / np.sqrt(2)))

# the quantum frozen-spin frequency is the same number in units of N chi
N = 100
print("frozen-spin omega/(N chi) =", frozen_spin_frequency(N) / N)

path = integrate_trajectory((np.pi / 2, 0.2), 10.0, 1e-3)
print("energy drift over tau = 10: %.1e" % path.energy_drift)
