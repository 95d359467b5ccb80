import dataclasses

import numpy as np
import pytest

from alfcg import solver as solver_mod
from alfcg.data_io import generate_synthetic
from alfcg.exceptions import ConfigError, InfeasibleStartError, NonFiniteObjectiveError
from alfcg.feasible_sets import L1Ball, LpBall, NuclearBall
from alfcg.numerics import make_rng
from alfcg.objectives import Dataset, LeastSquares, MultinomialLogistic
from alfcg.solver import SolverConfig, fw_gap, run
from oracles import jacobi_singular_values


def strip_time(trace):
    return [dataclasses.replace(r, wall_ns=None) for r in trace]


@pytest.fixture(scope="module")
def nuclear_problem():
    ds = generate_synthetic(60, 8, 3, seed=1)
    return MultinomialLogistic(ds), NuclearBall(5.0, 3, 8)


def _lsq_interior(d=2, N=40, seed=0, scale=0.3):
    rng = make_rng(seed)
    X = rng.standard_normal((N, d))
    w = rng.standard_normal(d)
    w *= scale / np.abs(w).sum()
    return LeastSquares(Dataset(X, np.zeros(N, int), 1, targets=X @ w)), w


def test_default_parameters():
    cfg = SolverConfig()
    assert (cfg.rho, cfg.beta, cfg.q, cfg.b) == (1e-5, 100.0, None, None)
    assert solver_mod.default_batch(1024) == 32
    assert solver_mod.default_batch(1000) == 31


def test_zero_iterations(nuclear_problem):
    obj, fset = nuclear_problem
    x0 = np.zeros(obj.dim)
    _, trace = run(SolverConfig("D", T=0), obj, fset, x0)
    assert len(trace) == 1 and trace[0].t == 0
    assert trace[0].gap == pytest.approx(fw_gap(x0, obj, fset), rel=1e-8)  # power iteration
    assert trace[0].grad_oracles == 0 and trace[0].lmo_calls == 0


def test_fs_with_full_batch_and_unit_period_equals_d(nuclear_problem):
    obj, fset = nuclear_problem
    x0 = np.zeros(obj.dim)
    xd, td = run(SolverConfig("D", T=60, eval_every=5, rho=0.5, seed=3), obj, fset, x0)
    xf, tf = run(SolverConfig("FS", T=60, eval_every=5, rho=0.5, seed=3, b=obj.n_samples, q=1),
                 obj, fset, x0)
    assert strip_time(td) == strip_time(tf)
    np.testing.assert_array_equal(xd, xf)


def test_least_squares_l1_interior_target_converges():
    obj, w = _lsq_interior()
    x_best, trace = run(SolverConfig("D", T=2000, eval_every=1, rho=1.0), obj, L1Ball(1.0), np.zeros(2))
    assert min(r.gap for r in trace) <= 1e-6
    # the unconstrained least-squares solution lies inside the ball, so it is the constrained optimum
    exact = np.linalg.lstsq(obj.dataset.features, obj.dataset.targets, rcond=None)[0]
    np.testing.assert_allclose(exact, w, atol=1e-12)
    np.testing.assert_allclose(x_best, exact, atol=1e-3)


def test_gap_is_zero_at_stationary_point():
    obj, w = _lsq_interior(d=3)
    assert abs(fw_gap(w, obj, L1Ball(1.0))) <= 1e-14


def test_nuclear_gap_identity(nuclear_problem):
    obj, fset = nuclear_problem
    rng = make_rng(4)
    for _ in range(5):
        x = fset.lmo(rng.standard_normal(obj.dim)) * rng.uniform(0, 1)
        g = obj.grad(x)
        sigma = jacobi_singular_values(g.reshape(3, 8))[0]
        assert fw_gap(x, obj, fset) == pytest.approx(g @ x + 5.0 * sigma, rel=1e-8)


def test_gap_upper_bounds_suboptimality():
    obj, _ = _lsq_interior(d=5, N=80, seed=3, scale=3.0)  # target outside the ball
    fset = LpBall(1.0, 3)
    x_best, trace = run(SolverConfig("D", T=3000, eval_every=10, rho=1.0), obj, fset, np.zeros(5))
    F_star = obj.value(x_best)
    for r in trace:
        assert r.F - F_star <= r.gap + 1e-8


@pytest.mark.parametrize("variant", ["D", "FS", "MVR1", "MVR2"])
def test_iterates_stay_feasible_and_gaps_nonnegative(nuclear_problem, variant, monkeypatch):
    obj, fset = nuclear_problem
    seen = []
    original = solver_mod.TraceRecorder.record

    def checked(self, t, x, *args, **kwargs):
        seen.append(fset.contains(x, 1e-8))
        return original(self, t, x, *args, **kwargs)

    monkeypatch.setattr(solver_mod.TraceRecorder, "record", checked)
    _, trace = run(SolverConfig(variant, T=150, eval_every=1, rho=0.5, seed=2), obj, fset,
                   np.zeros(obj.dim))
    assert all(seen) and len(seen) == 151
    assert all(r.gap >= -1e-9 for r in trace)


@pytest.mark.parametrize("variant", ["D", "FS", "MVR1", "MVR2"])
def test_runs_are_deterministic(nuclear_problem, variant):
    obj, fset = nuclear_problem
    cfg = SolverConfig(variant, T=80, eval_every=3, rho=0.5, seed=11)
    a = run(cfg, obj, fset, np.zeros(obj.dim))
    b = run(cfg, obj, fset, np.zeros(obj.dim))
    assert strip_time(a[1]) == strip_time(b[1])


class CountingObjective(MultinomialLogistic):
    per_sample = 0

    def _batch_grad(self, x, X, idx):
        self.per_sample += X.shape[0]
        return super()._batch_grad(x, X, idx)


@pytest.mark.parametrize("variant,b,q", [("D", None, None), ("FS", 4, 5), ("MVR1", 6, None),
                                         ("MVR2", 6, None)])
def test_oracle_counts_match_independent_counter(variant, b, q):
    ds = generate_synthetic(50, 6, 3, seed=2)
    obj = CountingObjective(ds)
    T = 37
    _, trace = run(SolverConfig(variant, T=T, eval_every=1000, b=b, q=q, rho=0.5), obj,
                   NuclearBall(3.0, 3, 6), np.zeros(obj.dim))
    evaluations = len(trace) * obj.n_samples  # full gradients spent on the gap
    assert trace[-1].grad_oracles == obj.per_sample - evaluations
    expected = {"D": T * 50, "FS": 8 * 50 + (T - 8) * 8, "MVR1": T * 6, "MVR2": T * 12}[variant]
    assert trace[-1].grad_oracles == expected
    assert trace[-1].lmo_calls == T


def test_trace_layout(nuclear_problem):
    obj, fset = nuclear_problem
    _, trace = run(SolverConfig("MVR2", T=25, eval_every=10, rho=0.5), obj, fset, np.zeros(obj.dim))
    assert [r.t for r in trace] == [0, 10, 20, 25]
    assert trace[0].L_t == 0.5 and trace[0].alpha_t == 1.0
    assert all(r.s_sq is not None and r.eta_t is not None for r in trace[:-1])
    assert trace[-1].eta_t is None and trace[-1].s_sq is None


def test_stop_gap_exits_early():
    obj, _ = _lsq_interior()
    _, trace = run(SolverConfig("D", T=5000, eval_every=1, rho=1.0, stop_gap=1e-4), obj, L1Ball(1.0),
                   np.zeros(2))
    assert trace[-1].gap <= 1e-4 and trace[-1].t < 5000


def test_x_best_has_smallest_recorded_gap(nuclear_problem):
    obj, fset = nuclear_problem
    x_best, trace = run(SolverConfig("MVR1", T=100, eval_every=7, rho=0.5), obj, fset, np.zeros(obj.dim))
    assert fw_gap(x_best, obj, fset) == pytest.approx(min(r.gap for r in trace), rel=1e-6, abs=1e-12)


def test_start_errors(nuclear_problem):
    obj, fset = nuclear_problem
    with pytest.raises(InfeasibleStartError):
        run(SolverConfig("D", T=3), obj, fset, np.full(obj.dim, 10.0))
    with pytest.raises(ConfigError):
        run(SolverConfig("D", T=3), obj, fset, np.zeros(obj.dim + 1))
    with pytest.raises(ConfigError):
        SolverConfig("SAGA")
    with pytest.raises(ConfigError):
        SolverConfig("FS", q=0)


def test_non_finite_objective_reports_partial_trace(nuclear_problem):
    obj, fset = nuclear_problem

    class Exploding(MultinomialLogistic):
        calls = 0

        def value(self, x):
            self.calls += 1
            return super().value(x) if self.calls < 3 else float("nan")

    bad = Exploding(obj.dataset)
    with pytest.raises(NonFiniteObjectiveError) as info:
        run(SolverConfig("D", T=50, eval_every=5, rho=0.5), bad, fset, np.zeros(bad.dim))
    assert [r.t for r in info.value.trace] == [0, 5]


def test_deterministic_variant_ignores_seed(nuclear_problem):
    obj, fset = nuclear_problem
    a = run(SolverConfig("D", T=40, eval_every=4, rho=0.5, seed=0), obj, fset, np.zeros(obj.dim))[1]
    b = run(SolverConfig("D", T=40, eval_every=4, rho=0.5, seed=1), obj, fset, np.zeros(obj.dim))[1]
    assert strip_time(a) == strip_time(b)


@pytest.mark.parametrize("variant", ["MVR1", "MVR2"])
def test_full_batch_momentum_is_exact(nuclear_problem, variant):
    obj, fset = nuclear_problem
    _, trace = run(SolverConfig(variant, T=60, eval_every=1, rho=0.5, b=obj.n_samples), obj, fset,
                   np.zeros(obj.dim))
    tol = 1e-20 if variant == "MVR2" else np.inf  # the EMA lags behind the moving iterate
    assert all(r.s_sq <= tol for r in trace[:-1])
    assert trace[0].s_sq <= 1e-20
