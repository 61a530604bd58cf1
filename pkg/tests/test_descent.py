import numpy as np
import pytest

from cadproj import GeneratorConfig, gen_lp, gen_quadratic, gen_transmit_power
from cadproj.descent import (
    DescentConfig,
    Trace,
    descend,
    objective_eval,
    write_trace_csv,
)
from cadproj.generate import LinearObjective, ProblemInstance, gen_constraints


def lp_with_c(c, seed=0, n=None, m=6):
    n = n if n is not None else len(c)
    system = gen_constraints(GeneratorConfig(n=n, m=m, d=3, seed=seed))
    return ProblemInstance(system, LinearObjective(c=np.asarray(c, float)), seed, "lp", 3, 1.0)


class TestObjectiveEval:
    def test_linear(self):
        inst = lp_with_c([1.0, -2.0])
        val, grad = objective_eval(inst, np.array([3.0, 1.0]))
        assert val == 1.0
        assert np.array_equal(grad, [1.0, -2.0])

    def test_quadratic_identity(self):
        inst = gen_quadratic(GeneratorConfig(n=2, m=2, d=2, seed=0), "er")
        inst.objective.q = np.eye(2)
        inst.objective.c = np.zeros(2)
        val, grad = objective_eval(inst, np.array([1.0, 1.0]))
        assert val == 2.0
        assert np.array_equal(grad, [2.0, 2.0])

    def test_transmit_gradient_matches_finite_differences(self):
        inst = gen_transmit_power(GeneratorConfig(n=5, m=15, d=3, seed=8))
        rng = np.random.default_rng(1)
        for _ in range(5):
            x = rng.uniform(0.05, 0.95, 5)
            _, grad = objective_eval(inst, x)
            h = 1e-6
            for j in range(5):
                e = np.zeros(5)
                e[j] = h
                fd = (
                    objective_eval(inst, x + e)[0] - objective_eval(inst, x - e)[0]
                ) / (2 * h)
                assert fd == pytest.approx(grad[j], abs=1e-5)

    def test_transmit_domain_guard(self):
        inst = gen_transmit_power(GeneratorConfig(n=4, m=12, d=3, seed=0))
        with pytest.raises(ValueError):
            objective_eval(inst, np.array([-0.5, 0.1, 0.1, 0.1]))


class TestDescend:
    def test_zero_gradient_and_no_penalty_is_stationary(self):
        inst = lp_with_c([0.0] * 5, seed=3, m=4)
        trace = descend(inst, DescentConfig(iterations=10, seed=1))
        assert np.all(trace.dual_norm == trace.dual_norm[0])
        assert np.all(trace.objective == 0.0)

    def test_every_reported_point_feasible(self):
        inst = gen_lp(GeneratorConfig(n=8, m=6, d=3, seed=4))
        cfg = DescentConfig(iterations=40, seed=2, svc_steps=2, epsilon=1e-8)
        trace = descend(inst, cfg)
        assert trace.steps == 40
        assert np.all(trace.violation <= 1e-8 * (1 + np.abs(inst.system.b).max()) + 1e-8)

    def test_large_penalty_shrinks_dual(self):
        shrunk = 0
        for seed in range(10):
            inst = gen_lp(GeneratorConfig(n=8, m=6, d=3, seed=40 + seed))
            cfg = DescentConfig(iterations=200, c_h=10.0, eta=0.05, seed=seed)
            trace = descend(inst, cfg)
            if trace.dual_norm[-1] < trace.dual_norm[0]:
                shrunk += 1
        assert shrunk >= 8

    def test_penalty_only_descent_nonincreasing(self):
        # no objective pull: the update is plain distance descent on w
        inst = lp_with_c([0.0] * 6, seed=5)
        cfg = DescentConfig(iterations=150, c_h=1.0, eta=0.1, seed=3)
        trace = descend(inst, cfg)
        assert np.all(np.diff(trace.dual_norm) <= 1e-10)

    def test_truncation_on_projection_cap(self):
        inst = gen_lp(GeneratorConfig(n=10, m=8, d=3, seed=6))
        cfg = DescentConfig(iterations=10, seed=0, epsilon=1e-12, max_iterations=1)
        trace = descend(inst, cfg)
        assert trace.truncated
        assert trace.steps == 0

    def test_exact_and_surrogate_share_grid(self):
        inst = gen_lp(GeneratorConfig(n=6, m=5, d=3, seed=7))
        tr_s = descend(inst, DescentConfig(gradient_kind="surrogate", iterations=15, seed=4))
        tr_e = descend(inst, DescentConfig(gradient_kind="exact", iterations=15, seed=4))
        assert tr_s.steps == tr_e.steps == 15

    def test_bad_configs_rejected(self):
        with pytest.raises(ValueError):
            DescentConfig(gradient_kind="unrolled")
        with pytest.raises(ValueError):
            DescentConfig(eta=0.0)
        with pytest.raises(ValueError):
            DescentConfig(c_h=-1.0)


def test_trace_csv_columns(tmp_path):
    inst = gen_lp(GeneratorConfig(n=6, m=5, d=3, seed=9))
    trace = descend(inst, DescentConfig(iterations=5, seed=1))
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "iteration,objective,violation,dual_norm,cad_iters"
    assert len(lines) == 6
