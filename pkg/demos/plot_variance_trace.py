"""
How accurate is the momentum estimator?
=======================================

The solver logs ``s_t^2 = ||g_t - grad f(x_t)||^2`` at every evaluation
point. For the two-point momentum estimator it should stay bounded and
shrink as the momentum weight alpha_t decays.
"""

import matplotlib.pyplot as plt
import numpy as np

from alfcg.data_io import generate_synthetic
from alfcg.feasible_sets import LpBall, NuclearBall
from alfcg.objectives import BinaryLogistic, MultinomialLogistic
from alfcg.solver import SolverConfig, run

problems = {
    "nuclear ball, 5 classes": (MultinomialLogistic(generate_synthetic(1024, 64, 5, seed=0)),
                                NuclearBall(10.0, 5, 64)),
    "l3 ball, binary": (BinaryLogistic(generate_synthetic(1024, 64, 2, seed=0)), LpBall(10.0, 3)),
}

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for name, (obj, fset) in problems.items():
    _, trace = run(SolverConfig("MVR2", T=3000, eval_every=10, rho=1.0), obj, fset, np.zeros(obj.dim))
    rows = [r for r in trace if r.s_sq is not None]
    t = [r.t for r in rows]
    axes[0].semilogy(t, [r.s_sq for r in rows], label=name)
    axes[1].semilogy(t, [r.alpha_t for r in rows], label=name)
    s = np.array([r.s_sq for r in rows])
    print(f"{name}: s_0^2 {s[0]:.3e}, max {s.max():.3e}, last quarter mean {s[-len(s) // 4:].mean():.3e}")

#%%
# Left: estimator error. Right: the momentum weight driving it.

axes[0].set_ylabel("s_t^2")
axes[1].set_ylabel("alpha_t")
for ax in axes:
    ax.set_xlabel("iteration")
    ax.legend()
fig.tight_layout()
fig.savefig("variance_trace.svg")
