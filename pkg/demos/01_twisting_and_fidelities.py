# Two-axis twisting from the unstable point: squeezing, QFI and how close
# the evolved state comes to a few known metrological states.
import numpy as np

from tactsim.dynamics import evolve, propagator, trajectory
from tactsim.experiments import default_t_max
from tactsim.metrology import (default_time_step, fidelity, first_local_maximum, local_extrema,
                               locate_maximum, optimize_yurke_alpha, qfi_pure,
                               refine_extremum, refine_yurke_optimum, reference_state,
                               spin_moments, squeezing_parameter)
from tactsim.spin import coherent_state

N = 50
prop = propagator("tact_rotated", N)
psi0 = coherent_state(np.pi / 2, 0, N)  # along +x, a saddle of the flow

times = np.arange(0, default_t_max(N), default_time_step(N))
states = trajectory(prop, psi0, times)
m = spin_moments(states)
xi2 = squeezing_parameter(m, undefined="nan")
fq = qfi_pure(m)

print("N =", N, " samples:", len(times), " chi t up to", round(times[-1], 4))
sq = refine_extremum(times, xi2, local_extrema(xi2, "min")[0])
print("best squeezing    xi2 = %.4f at chi t = %.4f" % (sq.value, sq.time))
peak = first_local_maximum(times, fq)
print("first QFI maximum FQ = %.1f (%.3f N^2) at chi t = %.4f" % (peak.value, peak.value / N**2, peak.time))
print("                  ln(2 pi N)/(2N) = %.4f" % (np.log(2 * np.pi * N) / (2 * N)))

# fidelity maxima, in the order they occur
for kind in ("bw", "ewss", "twin_fock"):
    p = locate_maximum(times, fidelity(states, reference_state(kind, N)))
    print("max fidelity %-9s %.5f at chi t = %.4f" % (kind, p.value, p.time))

# the Yurke state has a free mixing angle; optimize it jointly with time
y = optimize_yurke_alpha(states, times)
y = refine_yurke_optimum(lambda t: evolve(prop, psi0, t), y, times)
print("max fidelity yurke     %.5f at chi t = %.4f, alpha = %.4f" % (y.fidelity, y.time, y.alpha))
