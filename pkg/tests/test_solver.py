import csv
import json

import numpy as np
import pytest

import mprkit as mk
from mprkit.core import DistanceObservation, Frame, PointSet, pairwise_sq_dists
from mprkit.refdesign import gaussian_references
from mprkit.solver import (
    SolverConfig,
    build_distance_matrix,
    center_to_origin,
    classical_mds,
    export_projections_csv,
    gather_observations,
    plan_probes,
    procrustes,
    recover_projections,
    refine_gd,
    solve_mpr,
    squared_stress,
    srls_localize,
)


def observation_from_points(pts, mask=None):
    d2 = pairwise_sq_dists(pts)
    if mask is None:
        mask = np.ones_like(d2)
    return DistanceObservation(d2=d2 * mask, mask=mask)


def random_mask(q, missing_fraction, rng):
    mask = np.ones((q, q))
    upper = [(i, j) for i in range(q) for j in range(i + 1, q)]
    drop = rng.random(len(upper)) < missing_fraction
    for (i, j), d in zip(upper, drop):
        if d:
            mask[i, j] = mask[j, i] = 0
    return mask


class TestBuildDistanceMatrix:
    def test_zero_intensities(self):
        pairs = [(0, 1), (0, 2), (1, 2)]
        obs = build_distance_matrix(pairs, [0, 0, 0], [1, 1, 1], 3)
        assert np.array_equal(obs.d2, np.zeros((3, 3)))
        assert np.array_equal(obs.mask, np.ones((3, 3)))

    def test_345_triangle(self):
        pairs = [(0, 1), (0, 2), (1, 2)]
        obs = build_distance_matrix(pairs, [9, 16, 25], [1, 1, 1], 3)
        assert np.array_equal(obs.d2, [[0, 9, 16], [9, 0, 25], [16, 25, 0]])

    def test_masked_pair_zeroed(self):
        pairs = [(0, 1), (0, 2), (1, 2)]
        obs = build_distance_matrix(pairs, [9, 16, 25], [1, 0, 1], 3)
        assert obs.d2[0, 2] == 0 and obs.mask[0, 2] == 0

    def test_requires_all_pairs(self):
        with pytest.raises(ValueError):
            build_distance_matrix([(0, 1)], [1.0], [1], 3)

    def test_rejects_duplicate_pair(self):
        pairs = [(0, 1), (1, 0), (1, 2)]
        with pytest.raises(ValueError):
            build_distance_matrix(pairs, [1, 2, 3], [1, 1, 1], 3)


class TestClassicalMDS:
    def test_345_distances_recovered(self):
        obs = build_distance_matrix([(0, 1), (0, 2), (1, 2)], [9, 16, 25], [1, 1, 1], 3)
        ps = classical_mds(obs)
        d = pairwise_sq_dists(ps.points)
        assert np.allclose(np.sort(d[np.triu_indices(3, 1)]), [9, 16, 25], atol=1e-9)

    def test_zero_matrix_gives_zero_points(self):
        obs = DistanceObservation(d2=np.zeros((4, 4)), mask=np.ones((4, 4)))
        ps = classical_mds(obs)
        assert np.array_equal(ps.points, np.zeros((2, 4)))

    def test_exact_on_noiseless_planar_sets(self):
        rng = np.random.default_rng(2)
        for q in range(3, 31):
            pts = rng.standard_normal((2, q)) * 4
            obs = observation_from_points(pts)
            rec = classical_mds(obs)
            d = pairwise_sq_dists(rec.points)
            err = np.linalg.norm(d - obs.d2) / max(np.linalg.norm(obs.d2), 1e-300)
            assert err < 1e-8

    def test_deterministic_orientation(self):
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((2, 6))
        obs = observation_from_points(pts)
        a = classical_mds(obs)
        b = classical_mds(obs)
        assert np.array_equal(a.points, b.points)


class TestSquaredStress:
    def test_zero_at_exact_solution(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((2, 5))
        obs = observation_from_points(pts)
        value, grad = squared_stress(PointSet(points=pts), obs)
        assert value == pytest.approx(0.0, abs=1e-18)
        assert np.allclose(grad, 0, atol=1e-9)

    def test_zero_under_empty_mask(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((2, 4))
        mask = np.eye(4)
        obs = DistanceObservation(d2=np.zeros((4, 4)), mask=mask)
        value, _ = squared_stress(PointSet(points=rng.standard_normal((2, 4))), obs)
        assert value == 0.0

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            q = int(rng.integers(3, 9))
            truth = rng.standard_normal((2, q)) * 3
            noise = rng.uniform(-0.5, 0.5, (q, q))
            noise = np.triu(noise, 1) + np.triu(noise, 1).T
            mask = random_mask(q, rng.uniform(0, 0.5), rng)
            d2 = np.clip(pairwise_sq_dists(truth) + noise, 0, None) * mask
            np.fill_diagonal(d2, 0)
            obs = DistanceObservation(d2=d2, mask=mask)
            z = rng.standard_normal((2, q)) * 3
            _, grad = squared_stress(PointSet(points=z), obs)

            fd = np.zeros_like(z)
            h = 1e-6
            for i in range(2):
                for j in range(q):
                    zp, zm = z.copy(), z.copy()
                    zp[i, j] += h
                    zm[i, j] -= h
                    fp, _ = squared_stress(PointSet(points=zp), obs)
                    fm, _ = squared_stress(PointSet(points=zm), obs)
                    fd[i, j] = (fp - fm) / (2 * h)
            denom = max(np.linalg.norm(fd), 1e-300)
            assert np.linalg.norm(grad - fd) / denom < 1e-5


class TestRefineGD:
    def test_exact_init_is_fixed_point(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((2, 6))
        obs = observation_from_points(pts)
        out = refine_gd(obs, PointSet(points=pts))
        # only roundoff-level motion is possible from the global minimum
        assert np.allclose(out.points, pts, atol=1e-12)
        f_init, _ = squared_stress(PointSet(points=pts), obs)
        f_out, _ = squared_stress(out, obs)
        assert f_out <= f_init

    def test_monotone_trace_from_perturbed_init(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((2, 8)) * 2
        obs = observation_from_points(pts)
        init = PointSet(points=pts * 1.01)
        out, trace = refine_gd(obs, init, collect_trace=True)
        assert len(trace) > 1
        assert all(b < a for a, b in zip(trace, trace[1:]))
        assert trace[-1] < trace[0] * 1e-6

    def test_never_increases_masked_stress(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            q = 10
            pts = rng.standard_normal((2, q)) * 3
            mask = random_mask(q, 0.3, rng)
            noise = rng.uniform(-0.5, 0.5, (q, q))
            noise = np.triu(noise, 1) + np.triu(noise, 1).T
            d2 = np.clip(pairwise_sq_dists(pts) + noise, 0, None) * mask
            np.fill_diagonal(d2, 0)
            obs = DistanceObservation(d2=d2, mask=mask)
            init = classical_mds(obs)
            f0, _ = squared_stress(init, obs)
            out = refine_gd(obs, init)
            f1, _ = squared_stress(out, obs)
            assert f1 <= f0

    def test_disabled_when_max_iters_zero(self):
        rng = np.random.default_rng(4)
        pts = rng.standard_normal((2, 5))
        obs = observation_from_points(pts)
        init = PointSet(points=pts + 0.5)
        out = refine_gd(obs, init, SolverConfig(gd_max_iters=0))
        assert np.array_equal(out.points, init.points)


class TestCenterToOrigin:
    def test_identity_when_centered(self):
        pts = np.array([[1.0, 2.0, 0.0], [3.0, -1.0, 0.0]])
        out = center_to_origin(PointSet(points=pts))
        assert np.array_equal(out.points, pts)

    def test_shifts_all_columns(self):
        pts = np.array([[2.0, 3.0, 1.0], [0.0, 1.0, -2.0]])
        out = center_to_origin(PointSet(points=pts))
        assert np.array_equal(out.points[:, -1], [0, 0])
        assert np.allclose(out.points, pts - np.array([[1.0], [-2.0]]))

    def test_preserves_distances(self):
        rng = np.random.default_rng(8)
        pts = rng.standard_normal((2, 7))
        out = center_to_origin(PointSet(points=pts))
        assert np.allclose(pairwise_sq_dists(out.points), pairwise_sq_dists(pts))


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def grid_alignment_cost(ref, cur, step=1e-3):
    thetas = np.arange(0, 2 * np.pi, step)
    best = np.inf
    reflect = np.diag([1.0, -1.0])
    for flip in (np.eye(2), reflect):
        flipped = flip @ cur
        # ||R(t) flipped - ref||^2 = ||cur||^2 + ||ref||^2 - 2 tr(R(t) M')
        m = ref @ flipped.T
        base = np.sum(cur ** 2) + np.sum(ref ** 2)
        traces = (m[0, 0] + m[1, 1]) * np.cos(thetas) + (
            m[1, 0] - m[0, 1]
        ) * np.sin(thetas)
        best = min(best, base - 2 * np.max(traces))
    return max(best, 0.0)


class TestProcrustes:
    def test_identity(self):
        rng = np.random.default_rng(9)
        anchors = rng.standard_normal((2, 5))
        r = procrustes(anchors, anchors)
        assert np.allclose(r, np.eye(2), atol=1e-12)

    def test_undoes_rotation(self):
        rng = np.random.default_rng(10)
        ref = rng.standard_normal((2, 5))
        cur = rotation(np.pi / 2) @ ref
        r = procrustes(ref, cur)
        assert np.allclose(r, rotation(-np.pi / 2), atol=1e-10)
        assert np.linalg.norm(r @ cur - ref) < 1e-10

    def test_reflection_gives_negative_determinant(self):
        rng = np.random.default_rng(11)
        ref = rng.standard_normal((2, 4))
        cur = np.diag([1.0, -1.0]) @ ref
        r = procrustes(ref, cur)
        assert np.linalg.det(r) == pytest.approx(-1.0, abs=1e-10)
        assert np.allclose(r @ cur, ref, atol=1e-10)

    def test_orthogonal_and_grid_optimal(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            ref = rng.standard_normal((2, 6))
            cur = rng.standard_normal((2, 6))
            r = procrustes(ref, cur)
            assert np.allclose(r.T @ r, np.eye(2), atol=1e-12)
            cost = np.sum((r @ cur - ref) ** 2)
            assert cost <= grid_alignment_cost(ref, cur) + 1e-6

    def test_degenerate_warns(self):
        ref = np.zeros((2, 3))
        with pytest.warns(UserWarning):
            procrustes(ref, ref)


def srls_objective(u, anchors, d):
    return np.sum((np.sum((u[:, None] - anchors) ** 2, axis=0) - d ** 2) ** 2)


def srls_grid_oracle(anchors, d):
    span = np.abs(anchors).max() + d.max() + 1.0
    grid = np.linspace(-span, span, 201)
    xx, yy = np.meshgrid(grid, grid)
    pts = np.stack([xx.ravel(), yy.ravel()])
    dist2 = np.sum((pts[:, :, None] - anchors[:, None, :]) ** 2, axis=0)
    costs = np.sum((dist2 - d ** 2) ** 2, axis=1)
    best = pts[:, np.argmin(costs)]
    # refine around the coarse winner
    for width in (2 * span / 200, 0.02, 0.0002):
        gx = np.linspace(best[0] - width, best[0] + width, 41)
        gy = np.linspace(best[1] - width, best[1] + width, 41)
        xx, yy = np.meshgrid(gx, gy)
        pts = np.stack([xx.ravel(), yy.ravel()])
        dist2 = np.sum((pts[:, :, None] - anchors[:, None, :]) ** 2, axis=0)
        costs = np.sum((dist2 - d ** 2) ** 2, axis=1)
        best = pts[:, np.argmin(costs)]
    return best


class TestSrlsLocalize:
    def test_symmetric_anchors_force_origin(self):
        anchors = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]])
        u = srls_localize(anchors, np.ones(4))
        assert np.allclose(u, [0, 0], atol=1e-9)

    def test_planted_point_recovered(self):
        anchors = np.array([[0.0, 4.0, 0.0], [0.0, 0.0, 3.0]])
        d = np.array([5.0, np.sqrt(17.0), np.sqrt(10.0)])
        u = srls_localize(anchors, d)
        assert np.allclose(u, [3, 4], atol=1e-6)

    def test_noisy_distances_stay_optimal(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            anchors = rng.standard_normal((2, 5)) * 3
            target = rng.standard_normal(2) * 2
            d = np.sqrt(np.sum((target[:, None] - anchors) ** 2, axis=0))
            d_noisy = np.clip(d + rng.uniform(-0.1, 0.1, 5), 0.01, None)
            u = srls_localize(anchors, d_noisy)
            assert srls_objective(u, anchors, d_noisy) <= srls_objective(
                target, anchors, d_noisy
            ) + 1e-9

    def test_rejects_two_anchors(self):
        with pytest.raises(ValueError):
            srls_localize(np.zeros((2, 2)), np.ones(2))

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            anchors = rng.standard_normal((2, 4)) * 2
            target = rng.standard_normal(2)
            d = np.sqrt(np.sum((target[:, None] - anchors) ** 2, axis=0))
            d = np.clip(d + rng.uniform(-0.2, 0.2, 4), 0.01, None)
            u = srls_localize(anchors, d)
            oracle = srls_grid_oracle(anchors, d)
            assert srls_objective(u, anchors, d) <= srls_objective(
                oracle, anchors, d
            ) + 1e-6


def noiseless_setup(n, m, k, s_frames, seed):
    ss = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(ss[0])
    tm = mk.draw_transmission_matrix(m, n, seed=int(rng.integers(2**31)))
    cam = mk.CameraConfig(quantize=False)
    opu = mk.SimulatedOPU(tm, cam)
    signals = [rng.standard_normal(n) for _ in range(s_frames)]
    frames = [Frame(values=x, frame_index=i + 1) for i, x in enumerate(signals)]
    refs = gaussian_references(k, n, seed=int(rng.integers(2**31)))
    return tm, opu, frames, refs


class TestSolveMpr:
    def test_noiseless_magnitudes_match_truth(self):
        tm, opu, frames, refs = noiseless_setup(128, 25, 6, 1, seed=0)
        res = recover_projections(opu, frames, refs)
        truth = np.abs(tm.a @ frames[0].values)
        assert np.allclose(np.abs(res.y[:, 0]), truth, rtol=1e-8)

    def test_duplicate_frames_agree(self):
        tm, opu, frames, refs = noiseless_setup(128, 10, 6, 1, seed=1)
        twice = [frames[0], Frame(values=frames[0].values, frame_index=2)]
        res = recover_projections(opu, twice, refs)
        assert np.allclose(res.y[:, 0], res.y[:, 1], rtol=1e-8)

    def test_noiseless_linearity(self):
        tm, opu, frames, refs = noiseless_setup(256, 15, 9, 2, seed=2)
        x1, x2 = frames[0].values, frames[1].values
        triple = [frames[0], frames[1], Frame(values=x1 + x2, frame_index=3)]
        res = recover_projections(opu, triple, refs)
        keep = res.retained()
        assert keep.sum() > 0
        lhs = res.y[keep, 0] + res.y[keep, 1]
        rel = np.abs(lhs - res.y[keep, 2]) / np.abs(res.y[keep, 2])
        assert rel.max() < 1e-6

    def test_unlocalizable_row_flagged(self):
        d = np.zeros((4, 4))
        mask = np.eye(4)
        mask[0, 1] = mask[1, 0] = 1
        bad = DistanceObservation(d2=d, mask=mask)
        good = observation_from_points(np.random.default_rng(0).standard_normal((2, 4)) * 4)
        res = solve_mpr([[bad], [good]])
        assert res.flags[0] & 2
        assert np.isnan(res.y[0, 0].real)
        assert np.isfinite(res.y[1, 0].real)

    def test_low_norm_row_flagged(self):
        pts = np.array([[0.1, 5.0, 3.0, 0.0], [0.0, 1.0, -4.0, 0.0]])
        obs = observation_from_points(pts)
        res = solve_mpr([[obs]], SolverConfig(norm_filter_threshold=2.0))
        assert res.flags[0] & 1

    def test_probe_plan_binary_ordering(self):
        frame = Frame(values=np.array([1.0, 0, 0, 0]))
        refs = mk.ReferenceSet(
            anchors=(np.array([1.0, 1, 0, 0]), np.array([1.0, 1, 1, 0]), np.zeros(4))
        )
        pairs, inputs = plan_probes([frame], refs, binary_mode=True)
        assert len(pairs) == 6
        assert np.all((inputs[0] == 0) | (inputs[0] == 1))


class TestExportCsv:
    def test_csv_and_sidecar(self, tmp_path):
        y = np.array([[1 + 2j, 3 - 1j], [0.5j, -2 + 0j]])
        res = mk.RecoveredProjections(y=y, flags=np.array([0, 1]))
        path = tmp_path / "projections.csv"
        export_projections_csv(res, path, cfg=SolverConfig(), seeds={"device": 7})
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["row", "frame", "re", "im", "flag"]
        assert len(rows) == 5
        assert rows[1][:2] == ["1", "1"] and float(rows[1][2]) == 1.0
        sidecar = json.loads((tmp_path / "projections.csv.json").read_text())
        assert sidecar["seeds"]["device"] == 7
        assert sidecar["solver_config"]["gd_max_iters"] == 200
