"""Shared domain types and the complex-plane / distance-matrix primitives.

Every camera reading of a projected input difference is the squared Euclidean
distance between two points in the complex plane, so the whole toolkit is
built on top of two small operators: the map from a Gram matrix to a squared
distance matrix, and its (centered) inverse.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Frame",
    "ReferenceSet",
    "DistanceObservation",
    "PointSet",
    "RecoveredProjections",
    "kappa_operator",
    "centered_gram",
    "pairwise_sq_dists",
]

# Row status flags used by RecoveredProjections / the CSV export.
FLAG_OK = 0
FLAG_LOW_NORM = 1
FLAG_UNLOCALIZABLE = 2


def _as_square(mat, name):
    m = np.asarray(mat, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class Frame:
    """One input signal, length N, to be projected through the device."""

    values: np.ndarray
    frame_index: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError(f"frame values must be a vector, got shape {v.shape}")
        if self.frame_index < 1:
            raise ValueError("frame_index must be >= 1")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))


@dataclass(frozen=True)
class ReferenceSet:
    """K reference anchor signals; the last anchor is always the origin.

    Together with a frame these form the probed column set
    X = [frame, r_1, ..., r_K], so Q = K + 1 points get localized per row.
    """

    anchors: tuple

    def __post_init__(self):
        anchors = tuple(np.asarray(a, dtype=float) for a in self.anchors)
        if len(anchors) < 2:
            raise ValueError("need at least 2 anchors (origin plus one more)")
        n = anchors[0].shape[0]
        for a in anchors:
            if a.ndim != 1 or a.shape[0] != n:
                raise ValueError("all anchors must be vectors of equal length")
        if np.any(anchors[-1] != 0):
            raise ValueError("last anchor must be the all-zeros origin")
        object.__setattr__(self, "anchors", anchors)

    @property
    def count(self) -> int:
        return len(self.anchors)

    @property
    def dim(self) -> int:
        return self.anchors[0].shape[0]

    def column_matrix(self, frame: Frame) -> np.ndarray:
        """Stack [frame, r_1, ..., r_K] as the columns of an N x Q matrix."""
        if frame.dim != self.dim:
            raise ValueError(
                f"frame length {frame.dim} != anchor length {self.dim}"
            )
        return np.column_stack([frame.values, *self.anchors])


@dataclass(frozen=True)
class DistanceObservation:
    """Measured squared distances for the Q points of one row and one frame.

    ``mask`` is 1 where the camera reading is trusted; masked-out entries of
    ``d2`` are zero and must never be interpreted as distances.
    """

    d2: np.ndarray
    mask: np.ndarray
    row_index: int = 0
    frame_index: int = 1

    def __post_init__(self):
        d2 = _as_square(self.d2, "d2")
        mask = _as_square(self.mask, "mask")
        if d2.shape != mask.shape:
            raise ValueError("d2 and mask shapes differ")
        if not np.allclose(d2, d2.T):
            raise ValueError("d2 must be symmetric")
        if np.any(d2 < 0):
            raise ValueError("d2 entries must be nonnegative")
        if np.any(np.diag(d2) != 0):
            raise ValueError("d2 must have a zero diagonal")
        if not np.array_equal(mask, mask.T) or np.any(np.diag(mask) != 1):
            raise ValueError("mask must be symmetric with ones on the diagonal")
        if np.any(d2[mask == 0] != 0):
            raise ValueError("masked-out entries of d2 must be zero")
        object.__setattr__(self, "d2", d2)
        object.__setattr__(self, "mask", mask)

    @property
    def n_points(self) -> int:
        return self.d2.shape[0]

    @property
    def is_localizable(self) -> bool:
        """At least 3 points must have some surviving off-diagonal distance."""
        off = self.mask.copy()
        np.fill_diagonal(off, 0)
        return int(np.count_nonzero(off.sum(axis=1) > 0)) >= 3


@dataclass(frozen=True)
class PointSet:
    """Planar embedding of Q complex points: row 0 real parts, row 1 imaginary."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[0] != 2:
            raise ValueError(f"points must be a 2 x Q matrix, got shape {p.shape}")
        object.__setattr__(self, "points", p)

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    def as_complex(self) -> np.ndarray:
        return self.points[0] + 1j * self.points[1]

    def phases(self) -> np.ndarray:
        """Point phases via the four-quadrant inverse tangent."""
        return np.arctan2(self.points[1], self.points[0])


@dataclass(frozen=True)
class RecoveredProjections:
    """The M x S complex output of the recovery pipeline.

    Each row carries an unknowable gauge: one global phase plus an optional
    conjugation, shared by all S frames of that row.
    """

    y: np.ndarray
    flags: np.ndarray = None
    gauge_note: str = (
        "each row is defined up to one global phase and one conjugation "
        "shared across all frames"
    )

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        if y.ndim != 2:
            raise ValueError("y must be an M x S matrix")
        flags = self.flags
        if flags is None:
            flags = np.zeros(y.shape[0], dtype=int)
        flags = np.asarray(flags, dtype=int)
        if flags.shape != (y.shape[0],):
            raise ValueError("flags must have one entry per row")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "flags", flags)

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    @property
    def n_frames(self) -> int:
        return self.y.shape[1]

    def retained(self) -> np.ndarray:
        """Boolean selector for rows that passed all filters."""
        return self.flags == FLAG_OK


def kappa_operator(gram: np.ndarray) -> np.ndarray:
    """Map a Gram matrix G to squared distances: diag(G)1' - 2G + 1 diag(G)'."""
    g = _as_square(gram, "gram")
    if not np.allclose(g, g.T):
        raise ValueError("gram matrix must be symmetric")
    d = np.diag(g)
    return d[:, None] - 2.0 * g + d[None, :]


def centered_gram(d2: np.ndarray) -> np.ndarray:
    """Gram matrix of the centered point set: -1/2 J D J with J = I - 11'/Q."""
    d = _as_square(d2, "d2")
    q = d.shape[0]
    j = np.eye(q) - np.full((q, q), 1.0 / q)
    return -0.5 * (j @ d @ j)


def pairwise_sq_dists(points: np.ndarray) -> np.ndarray:
    """Exact pairwise squared distances of the columns of a 2 x Q matrix."""
    p = np.asarray(points, dtype=float)
    diff = p[:, :, None] - p[:, None, :]
    return np.einsum("kij,kij->ij", diff, diff)
