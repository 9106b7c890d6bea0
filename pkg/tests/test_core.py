import numpy as np
import pytest

from mprkit.core import (
    DistanceObservation,
    Frame,
    PointSet,
    RecoveredProjections,
    ReferenceSet,
    centered_gram,
    kappa_operator,
    pairwise_sq_dists,
)


class TestKappaOperator:
    def test_identity(self):
        assert np.array_equal(kappa_operator(np.eye(2)), [[0, 2], [2, 0]])

    def test_zero_gram(self):
        assert np.array_equal(kappa_operator(np.zeros((4, 4))), np.zeros((4, 4)))

    def test_345_triangle(self):
        pts = np.array([[0.0, 3.0, 0.0], [0.0, 0.0, 4.0]])
        d = kappa_operator(pts.T @ pts)
        expected = [[0, 9, 16], [9, 0, 25], [16, 25, 0]]
        assert np.allclose(d, expected)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            kappa_operator(np.ones((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            kappa_operator(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_round_trip_matches_pairwise_distances(self):
        rng = np.random.default_rng(7)
        for q in [2, 3, 5, 12, 30]:
            pts = rng.standard_normal((2, q)) * 10
            d = kappa_operator(pts.T @ pts)
            ref = pairwise_sq_dists(pts)
            assert np.allclose(d, ref, rtol=1e-12, atol=1e-12 * ref.max())


class TestCenteredGram:
    def test_zero(self):
        assert np.array_equal(centered_gram(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_hand_computed_2x2(self):
        g = centered_gram(np.array([[0.0, 2.0], [2.0, 0.0]]))
        assert np.allclose(g, [[0.5, -0.5], [-0.5, 0.5]])

    def test_round_trip_through_kappa(self):
        d = np.array([[0.0, 9, 16], [9, 0, 25], [16, 25, 0]])
        g = centered_gram(d)
        evals, evecs = np.linalg.eigh(g)
        order = np.argsort(evals)[::-1]
        top = evecs[:, order[:2]] * np.sqrt(np.maximum(evals[order[:2]], 0))
        assert np.allclose(kappa_operator(top @ top.T), d, atol=1e-10)

    def test_planar_rank_two(self):
        rng = np.random.default_rng(3)
        for q in [3, 7, 20]:
            pts = rng.standard_normal((2, q)) * 5
            g = centered_gram(kappa_operator(pts.T @ pts))
            evals = np.sort(np.abs(np.linalg.eigvalsh(g)))[::-1]
            assert np.all(evals[2:] <= 1e-9 * evals[0])


class TestFrame:
    def test_rejects_matrix_values(self):
        with pytest.raises(ValueError):
            Frame(values=np.zeros((2, 2)))

    def test_rejects_bad_index(self):
        with pytest.raises(ValueError):
            Frame(values=np.zeros(4), frame_index=0)

    def test_binary_detection(self):
        assert Frame(values=np.array([0.0, 1.0, 1.0])).is_binary
        assert not Frame(values=np.array([0.0, 0.5])).is_binary


class TestReferenceSet:
    def test_requires_origin_last(self):
        with pytest.raises(ValueError):
            ReferenceSet(anchors=(np.ones(3), np.ones(3)))

    def test_requires_two_anchors(self):
        with pytest.raises(ValueError):
            ReferenceSet(anchors=(np.zeros(3),))

    def test_column_matrix_layout(self):
        refs = ReferenceSet(anchors=(np.ones(3), np.zeros(3)))
        x = refs.column_matrix(Frame(values=np.array([2.0, 2.0, 2.0])))
        assert x.shape == (3, 3)
        assert np.array_equal(x[:, 0], [2, 2, 2])
        assert np.array_equal(x[:, 1], [1, 1, 1])
        assert np.array_equal(x[:, 2], [0, 0, 0])


class TestDistanceObservation:
    def test_rejects_asymmetric(self):
        d = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(ValueError):
            DistanceObservation(d2=d, mask=np.ones((2, 2)))

    def test_rejects_nonzero_masked_entries(self):
        d = np.array([[0.0, 5.0], [5.0, 0.0]])
        mask = np.eye(2)
        with pytest.raises(ValueError):
            DistanceObservation(d2=d, mask=mask)

    def test_localizability(self):
        d = np.zeros((4, 4))
        full = DistanceObservation(d2=d, mask=np.ones((4, 4)))
        assert full.is_localizable
        mask = np.eye(4)
        mask[0, 1] = mask[1, 0] = 1
        sparse = DistanceObservation(d2=d * mask, mask=mask)
        assert not sparse.is_localizable


class TestPointSet:
    def test_complex_view(self):
        ps = PointSet(points=np.array([[1.0, 0.0], [2.0, -1.0]]))
        assert np.allclose(ps.as_complex(), [1 + 2j, -1j])

    def test_phases_four_quadrant(self):
        ps = PointSet(points=np.array([[1.0, -1.0, -1.0], [1.0, 1.0, -1.0]]))
        assert np.allclose(ps.phases(), [np.pi / 4, 3 * np.pi / 4, -3 * np.pi / 4])


class TestRecoveredProjections:
    def test_default_flags_and_retained(self):
        r = RecoveredProjections(y=np.zeros((3, 2), dtype=complex))
        assert r.retained().all()
        flagged = RecoveredProjections(
            y=np.zeros((2, 1), dtype=complex), flags=np.array([0, 1])
        )
        assert flagged.retained().tolist() == [True, False]
