import logging

import numpy as np
import pytest

from cadproj import (
    GeneratorConfig,
    SolverConfig,
    SparseConstraintSystem,
    cad_raw,
    cad_scaled,
    concat,
    dykstra_simultaneous,
    dykstra_two_set,
    gen_constraints,
    gen_initial_point,
    partition,
    project,
    project_bruteforce,
    project_halfspace,
)
from cadproj.engine import halfspace_callable

TIGHT = SolverConfig(epsilon=1e-10)


def unit_box():
    # x <= 1, y <= 1, -x <= 0, -y <= 0
    trips = [(0, 0, 1.0), (1, 1, 1.0), (2, 0, -1.0), (3, 1, -1.0)]
    return SparseConstraintSystem(2, 4, trips, [1.0, 1.0, 0.0, 0.0])


class TestHalfspace:
    def test_clips_violating_point(self):
        assert np.array_equal(
            project_halfspace([2.0, 0.0], [1.0, 0.0], 1.0), [1.0, 0.0]
        )

    def test_feasible_point_fixed(self):
        assert np.array_equal(
            project_halfspace([0.0, 0.0], [1.0, 0.0], 1.0), [0.0, 0.0]
        )

    def test_diagonal(self):
        out = project_halfspace([1.0, 1.0], [1.0, 1.0], 0.0)
        assert out == pytest.approx([0.0, 0.0])

    def test_zero_row_rejected(self):
        with pytest.raises(ValueError):
            project_halfspace([1.0], [0.0], 1.0)

    def test_untouched_coordinates_unchanged(self):
        out = project_halfspace([5.0, 7.0, -3.0], [1.0, 0.0, 0.0], 1.0)
        assert out[1] == 7.0 and out[2] == -3.0


class TestTwoSet:
    def test_orthant_corner(self):
        p1 = lambda x: np.minimum(x, [0.0, np.inf])
        p2 = lambda x: np.minimum(x, [np.inf, 0.0])
        res = dykstra_two_set([1.0, 1.0], p1, p2, TIGHT)
        assert res.point == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_feasible_point_one_iteration(self):
        p1 = lambda x: np.minimum(x, [0.0, np.inf])
        p2 = lambda x: np.minimum(x, [np.inf, 0.0])
        res = dykstra_two_set([-1.0, -2.0], p1, p2, TIGHT)
        assert np.array_equal(res.point, [-1.0, -2.0])
        assert res.iterations_max == 1
        assert res.all_converged

    def test_random_halfspace_pairs_match_oracle(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            trips = []
            for i in range(2):
                a = rng.standard_normal(3)
                trips += [(i, j, float(v)) for j, v in enumerate(a)]
            sys_ = SparseConstraintSystem(3, 2, trips, rng.standard_normal(2))
            x = rng.uniform(-2, 2, 3)
            res = dykstra_two_set(
                x, halfspace_callable(sys_, 0), halfspace_callable(sys_, 1), TIGHT
            )
            ref = project_bruteforce(x, sys_).point
            assert np.abs(res.point - ref).max() < 1e-6


class TestSimultaneous:
    def test_single_constraint(self):
        sys_ = SparseConstraintSystem(2, 1, [(0, 0, 1.0)], [1.0])
        res = dykstra_simultaneous([2.0, 5.0], sys_, cfg=TIGHT)
        assert res.point == pytest.approx([1.0, 5.0], abs=1e-9)

    def test_unit_box_corner(self):
        res = dykstra_simultaneous([2.0, 2.0], unit_box(), cfg=TIGHT)
        assert res.point == pytest.approx([1.0, 1.0], abs=1e-9)

    def test_random_instances_match_oracle(self):
        rng = np.random.default_rng(5)
        for trial in range(20):
            n = int(rng.integers(2, 11))
            m = int(rng.integers(1, 9))
            sys_ = gen_constraints(GeneratorConfig(n=n, m=m, d=3, seed=trial))
            x = rng.uniform(-2, 2, n)
            res = dykstra_simultaneous(x, sys_, cfg=TIGHT)
            ref = project_bruteforce(x, sys_).point
            assert res.all_converged
            assert np.abs(res.point - ref).max() < 1e-4


class TestCad:
    def test_raw_weighted_example(self):
        # x1 appears in both rows, x2 in one: l = (2, 1)
        sys_ = SparseConstraintSystem(
            2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)], [0.0, 5.0]
        )
        res = cad_raw([1.0, 1.0], sys_, cfg=TIGHT)
        assert res.point == pytest.approx([1 / 3, -1 / 3], abs=1e-9)

    def test_scaled_same_instance_is_orthogonal(self):
        sys_ = SparseConstraintSystem(
            2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)], [0.0, 5.0]
        )
        res = cad_scaled([1.0, 1.0], sys_, cfg=TIGHT)
        assert res.point == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_feasible_point_unchanged_zero_iterations(self):
        sys_ = unit_box()
        res = cad_scaled([0.25, 0.5], sys_, cfg=TIGHT)
        assert np.array_equal(res.point, [0.25, 0.5])
        assert res.iterations_max == 0
        assert np.array_equal(res.dual, [0.0, 0.0])

    def test_box_scaling_cancels(self):
        res = cad_scaled([2.0, 2.0], unit_box(), cfg=TIGHT)
        assert res.point == pytest.approx([1.0, 1.0], abs=1e-9)

    def test_uniform_l_raw_equals_orthogonal(self):
        # when every l_j matches, the count weighting is a constant factor
        rng = np.random.default_rng(8)
        trips = []
        for i in range(3):
            a = rng.standard_normal(3)
            trips += [(i, j, float(v)) for j, v in enumerate(a)]
        sys_ = SparseConstraintSystem(3, 3, trips, rng.standard_normal(3) + 1.0)
        x = rng.uniform(-2, 2, 3)
        ref = project_bruteforce(x, sys_).point
        assert np.abs(cad_raw(x, sys_, cfg=TIGHT).point - ref).max() < 1e-6

    def test_unconstrained_coordinates_pass_through(self):
        sys_ = SparseConstraintSystem(3, 1, [(0, 0, 1.0)], [0.0])
        res = cad_scaled([5.0, -2.0, 7.0], sys_, cfg=TIGHT)
        assert res.point[1] == -2.0 and res.point[2] == 7.0
        assert res.point[0] == pytest.approx(0.0, abs=1e-9)

    def test_iteration_cap_flags_not_raises(self):
        sys_ = gen_constraints(GeneratorConfig(n=20, m=15, d=3, seed=1))
        res = cad_scaled(
            gen_initial_point(20, 5.0, 0),
            sys_,
            cfg=SolverConfig(epsilon=1e-12, max_iterations=2),
        )
        assert not res.all_converged
        assert res.iterations_max == 2

    def test_converged_violation_below_eps(self):
        sys_ = gen_constraints(GeneratorConfig(n=30, m=24, d=3, seed=4))
        res = cad_scaled(gen_initial_point(30, 2.0, 1), sys_, cfg=TIGHT)
        assert res.all_converged
        assert res.violation <= TIGHT.epsilon

    def test_dual_is_exact_difference(self):
        sys_ = gen_constraints(GeneratorConfig(n=10, m=8, d=3, seed=6))
        x = gen_initial_point(10, 2.0, 2)
        res = cad_scaled(x, sys_, cfg=TIGHT)
        assert np.array_equal(res.dual, x - res.point)


def dense_cad_reference(system, x0, sweeps, scaled, simultaneous=False):
    """Literal dense transcription of the component-averaged sweeps.

    Keeps the full per-constraint correction matrix so the sparse-support
    invariant can be asserted at every iteration.
    """
    a = system.to_dense()
    b = system.b.astype(float).copy()
    l = system.l.astype(float)
    lw = np.where(l > 0, l, 1.0)
    supports = [np.nonzero(a[i])[0] for i in range(system.m)]
    if scaled:
        a = a * np.sqrt(lw)
        x = np.asarray(x0, float) / np.sqrt(lw)
    else:
        x = np.asarray(x0, float).copy()
    norms = np.linalg.norm(a, axis=1)
    a = a / norms[:, None]
    b = b / norms
    p = np.zeros((system.m, system.n))
    for _ in range(sweeps):
        w = x[None, :] + p
        s = np.minimum(b - np.einsum("ij,ij->i", a, w), 0.0)
        proj = w + s[:, None] * a
        p = w - proj
        for i in range(system.m):
            outside = np.setdiff1d(np.arange(system.n), supports[i])
            assert np.all(p[i, outside] == 0.0), "correction escaped its support"
        if simultaneous:
            x = x + (proj - x[None, :]).sum(axis=0) / system.m
        else:
            col_sum = proj.sum(axis=0) - (system.m - l) * x
            x = np.where(l > 0, col_sum / lw, x)
    if scaled:
        x = x * np.sqrt(lw)
    return x


@pytest.mark.parametrize("mode", ["raw", "scaled", "simultaneous"])
def test_matches_dense_reference_with_support_invariant(mode):
    # single-component instance so every row sweeps in lockstep
    sys_ = gen_constraints(GeneratorConfig(n=6, m=8, d=5, seed=21))
    assert partition(sys_).n_components == 1
    x0 = gen_initial_point(6, 2.0, 3)
    cfg = SolverConfig(epsilon=1e-8)
    if mode == "raw":
        res = cad_raw(x0, sys_, cfg=cfg)
    elif mode == "scaled":
        res = cad_scaled(x0, sys_, cfg=cfg)
    else:
        res = dykstra_simultaneous(x0, sys_, cfg=cfg)
    ref = dense_cad_reference(
        sys_, x0, res.iterations_max, scaled=(mode == "scaled"),
        simultaneous=(mode == "simultaneous"),
    )
    assert np.abs(res.point - ref).max() < 1e-12


def test_components_stop_independently():
    # block 0 starts feasible (0 sweeps); block 1 needs work
    s1 = SparseConstraintSystem(1, 1, [(0, 0, 1.0)], [1.0])
    s2 = gen_constraints(GeneratorConfig(n=6, m=5, d=3, seed=2))
    batch = concat([s1, s2]).combined
    x = np.concatenate([[0.0], gen_initial_point(6, 3.0, 4)])
    res = cad_scaled(x, batch, cfg=TIGHT)
    assert res.iterations[0] == 0
    assert res.iterations[1] > 0


def test_sequential_equals_componentwise_solo_runs():
    """Components are numerically decoupled: a joint run must equal solo runs."""
    systems = [
        gen_constraints(GeneratorConfig(n=7, m=5, d=3, seed=s)) for s in range(4)
    ]
    batch = concat(systems)
    joint_part = partition(batch.combined)
    x = gen_initial_point(batch.combined.n, 2.0, 9)
    joint = cad_scaled(x, batch.combined, joint_part, cfg=TIGHT)
    for k, s in enumerate(systems):
        var_slice, row_slice = batch.block(k)
        solo = cad_scaled(x[var_slice], s, cfg=TIGHT)
        assert np.array_equal(joint.point[var_slice], solo.point)
        # blocks may split into several components; both partitions order
        # them by smallest constraint index, so the counts line up in order
        ids = sorted(
            {int(joint_part.labels[i]) for i in range(*row_slice.indices(batch.combined.m))}
        )
        assert list(joint.iterations[ids]) == list(solo.iterations)


def test_distance_history_recorded_and_monotone():
    sys_ = gen_constraints(GeneratorConfig(n=25, m=18, d=3, seed=11))
    cfg = SolverConfig(epsilon=1e-10, record_distance=True)
    res = cad_scaled(gen_initial_point(25, 2.0, 7), sys_, cfg=cfg)
    assert res.distance_history is not None
    for hist in res.distance_history:
        assert np.all(np.isfinite(hist))
        # observed (not proved) monotonicity; engine only logs violations,
        # but this seeded instance should exhibit it cleanly
        if hist.size > 1:
            assert np.diff(hist).min() > -1e-9 * (1.0 + hist.max())


def test_sparse_advantage_single_instance():
    sys_ = gen_constraints(GeneratorConfig(n=120, m=90, d=3, seed=0))
    part = partition(sys_)
    x0 = gen_initial_point(120, 1.0, 0)
    cfg = SolverConfig(epsilon=1e-6)
    cad_iters = cad_scaled(x0, sys_, part, cfg).iterations_max
    sim_iters = dykstra_simultaneous(x0, sys_, part, cfg).iterations_max
    assert cad_iters < sim_iters


def test_project_dispatch():
    sys_ = unit_box()
    x = np.array([3.0, -1.0])
    for alg in ("cad-scaled", "cad-raw", "simultaneous"):
        res = project(x, sys_, SolverConfig(epsilon=1e-10, algorithm=alg))
        assert res.point == pytest.approx([1.0, 0.0], abs=1e-8)
    with pytest.raises(ValueError):
        project(x, sys_, SolverConfig(algorithm="two-set"))


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(algorithm="newton")
