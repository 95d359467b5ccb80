"""
A generalized linear model over an l3 ball
==========================================

Binary logistic regression with the weights constrained to
``||w||_3 <= delta``. The linear minimization oracle has a closed form, so
each iteration costs one gradient and a few vector operations.
"""

import matplotlib.pyplot as plt
import numpy as np

from alfcg.data_io import generate_synthetic
from alfcg.feasible_sets import LpBall
from alfcg.objectives import BinaryLogistic
from alfcg.solver import SolverConfig, run

data = generate_synthetic(1024, 64, 2, seed=0)
obj = BinaryLogistic(data)
x0 = np.zeros(obj.dim)

#%%
# The oracle answer for a direction ``d`` points against ``d`` and sits on
# the sphere: ``<d, v> = -delta * ||d||_q`` with ``q = 3/2``.

ball = LpBall(10.0, 3)
d = obj.grad(x0)
v = ball.lmo(d)
print("<d, v> =", d @ v, " -delta*||d||_q =", -10.0 * np.sum(np.abs(d) ** 1.5) ** (2 / 3))

#%%
# A larger ball lets the model fit the data harder. Each curve is the
# deterministic variant with ``rho = 1``.

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for radius in (1.0, 10.0, 50.0):
    _, trace = run(SolverConfig("D", T=800, eval_every=5, rho=1.0), obj, LpBall(radius, 3), x0)
    t = [r.t for r in trace]
    axes[0].semilogy(t, [max(r.gap, 1e-16) for r in trace], label=f"delta = {radius:g}")
    axes[1].plot(t, [r.F for r in trace], label=f"delta = {radius:g}")
axes[0].set_ylabel("Frank-Wolfe gap")
axes[1].set_ylabel("F(x_t)")
for ax in axes:
    ax.set_xlabel("iteration")
    ax.legend()
fig.tight_layout()
fig.savefig("lp_ball_glm.svg")
