# How the best squeezing and the first QFI maximum scale with N, next to
# the Gaussian-model predictions and one-axis twisting.
import numpy as np

from tactsim.dynamics import propagator, trajectory
from tactsim.experiments import scaling_point
from tactsim.metrology import local_extrema, spin_moments, squeezing_parameter
from tactsim.spin import coherent_state

print("   N   xi2_best  xi2*N  model xi2  t_xi/model   FQ/N^2  t_FQ/empirical")
for N in (50, 100, 200, 400):
    r = scaling_point(N, samples=1500)
    print("%4d   %.5f  %5.2f   %.5f    %.3f      %.4f    %.3f" % (
        N, r["xi2_best"], r["xi2_best"] * N, r["model_xi2_best"],
        r["t_best_xi"] / r["model_t_best_xi"], r["FQ_best"] / N**2,
        r["t_best_FQ"] / r["empirical_t_best_FQ"]))

# The QFI follows 0.64-0.66 N^2 at ln(2 pi N)/(2N) closely. The Wineland
# parameter bottoms out earlier and about 2.7x higher than e/(2N): the model
# tracks 4 Var/N, which ignores the shrinking mean spin.

# one-axis twisting from the same start for comparison
for N in (50, 200):
    t = np.linspace(0, 2.0 / N ** (2 / 3), 3000)
    xi = squeezing_parameter(spin_moments(trajectory(propagator("oat", N),
                                                     coherent_state(np.pi / 2, 0, N), t)))
    i = local_extrema(xi, "min")[0]
    print("OAT N=%d: best xi2 = %.4f at chi t = %.4f" % (N, xi[i], t[i]))
