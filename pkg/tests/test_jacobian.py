import numpy as np
import pytest

from cadproj import (
    GeneratorConfig,
    SolverConfig,
    SparseConstraintSystem,
    cad_scaled,
    exact_jacobian,
    finite_difference_jacobian,
    gen_constraints,
    partition,
    surrogate_jacobian,
)
from cadproj.verify import _draw_differentiable, _trial_rng, hypercube_corner


def single_halfspace():
    return SparseConstraintSystem(2, 1, [(0, 0, 1.0)], [1.0])


class TestSurrogate:
    def test_interior_point_is_identity(self):
        sys_ = single_halfspace()
        op = surrogate_jacobian(np.array([0.0, 3.0]), sys_)
        assert op.direction is None
        v = np.array([1.5, -2.5])
        assert np.array_equal(op.apply(v), v)

    def test_single_constraint_kills_normal_component(self):
        sys_ = single_halfspace()
        op = surrogate_jacobian(np.array([2.0, 0.0]), sys_)
        assert op.direction == pytest.approx([1.0, 0.0], abs=1e-9)
        assert op.apply([3.0, 4.0]) == pytest.approx([0.0, 4.0], abs=1e-9)

    def test_rank_is_n_minus_one_outside(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 9))
            sys_ = gen_constraints(GeneratorConfig(n=n, m=max(2, n - 2), d=3, seed=seed))
            x = rng.uniform(2.0, 6.0, n) * rng.choice([-1, 1], n)
            op = surrogate_jacobian(x, sys_)
            if op.direction is None:
                continue
            sv = np.linalg.svd(op.as_matrix(), compute_uv=False)
            assert int((sv > 0.5).sum()) == n - 1

    def test_idempotent_and_symmetric(self):
        sys_ = gen_constraints(GeneratorConfig(n=6, m=4, d=3, seed=3))
        op = surrogate_jacobian(np.full(6, 9.0), sys_)
        mat = op.as_matrix()
        assert np.abs(mat - mat.T).max() < 1e-12
        assert np.abs(mat @ mat - mat).max() < 1e-12
        assert op.T is op


class TestExact:
    def test_single_active_equals_surrogate(self):
        sys_ = single_halfspace()
        x = np.array([2.0, 0.0])
        exact = exact_jacobian(x, sys_)
        assert exact.active_set == (0,)
        expected = np.diag([0.0, 1.0])
        assert np.abs(exact.as_matrix() - expected).max() < 1e-9
        surr = surrogate_jacobian(x, sys_)
        assert np.abs(exact.as_matrix() - surr.as_matrix()).max() < 1e-9

    def test_square_corner_rank_zero(self):
        sys_, x = hypercube_corner(2)
        op = exact_jacobian(x, sys_)
        assert np.abs(op.as_matrix()).max() < 1e-8

    def test_feasible_point_identity(self):
        sys_ = single_halfspace()
        op = exact_jacobian(np.array([-1.0, 0.5]), sys_)
        v = np.array([2.0, -1.0])
        assert np.array_equal(op.apply(v), v)

    def test_matches_finite_differences_on_random_points(self):
        checked = 0
        for t in range(40):
            rng = _trial_rng(100, t)
            sys_ = gen_constraints(
                GeneratorConfig(
                    n=int(rng.integers(2, 7)), m=int(rng.integers(1, 6)), d=3,
                    seed=100 + t,
                )
            )
            part = partition(sys_)
            drawn = _draw_differentiable(rng, sys_, part)
            if drawn is None:
                continue
            x, _, exact = drawn
            fd = finite_difference_jacobian(x, sys_, 1e-6, part)
            assert np.abs(fd - exact.as_matrix()).max() < 1e-5
            checked += 1
        assert checked >= 20


class TestFiniteDifference:
    def test_interior_identity(self):
        sys_ = single_halfspace()
        fd = finite_difference_jacobian(np.array([0.0, 0.0]), sys_, 1e-6)
        assert np.abs(fd - np.eye(2)).max() < 1e-8

    def test_single_active(self):
        sys_ = single_halfspace()
        fd = finite_difference_jacobian(np.array([2.0, 0.0]), sys_, 1e-6)
        assert np.abs(fd - np.diag([0.0, 1.0])).max() < 1e-6

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            finite_difference_jacobian(np.zeros(2), single_halfspace(), 0.0)


def test_penalty_gradient_identity():
    """d/dw of 0.5 ||w - P(w)||^2 is exactly the dual w - P(w) at smooth points."""
    sys_ = gen_constraints(GeneratorConfig(n=5, m=4, d=3, seed=17))
    part = partition(sys_)
    cfg = SolverConfig(epsilon=1e-12, max_iterations=200_000)

    def half_sq_dist(w):
        res = cad_scaled(w, sys_, part, cfg)
        return 0.5 * float(res.dual @ res.dual)

    rng = np.random.default_rng(4)
    for _ in range(5):
        w = rng.uniform(2.0, 4.0, 5) * rng.choice([-1, 1], 5)
        dual = cad_scaled(w, sys_, part, cfg).dual
        h = 1e-6
        for j in range(5):
            e = np.zeros(5)
            e[j] = h
            fd = (half_sq_dist(w + e) - half_sq_dist(w - e)) / (2 * h)
            assert fd == pytest.approx(dual[j], abs=2e-5)
