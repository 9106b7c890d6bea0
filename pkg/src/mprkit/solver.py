"""Phase recovery from pairwise intensity measurements.

Per output row of the hidden matrix, the Q probed inputs map to Q points in
the complex plane whose pairwise squared distances the camera records. The
pipeline localizes those points (classical MDS, then masked squared-stress
gradient descent), pins the known origin anchor, aligns every frame to the
first one with an orthogonal Procrustes fit (reflection = conjugation), and
reads off the signal point of each frame as a complex number.
"""

import csv
import json
import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy import linalg, optimize

from .core import (
    FLAG_LOW_NORM,
    FLAG_UNLOCALIZABLE,
    DistanceObservation,
    PointSet,
    RecoveredProjections,
    ReferenceSet,
)
from .opusim import OpticalProcessor

__all__ = [
    "SolverConfig",
    "build_distance_matrix",
    "classical_mds",
    "squared_stress",
    "refine_gd",
    "center_to_origin",
    "procrustes",
    "srls_localize",
    "solve_mpr",
    "plan_probes",
    "gather_observations",
    "recover_projections",
    "export_projections_csv",
]


@dataclass(frozen=True)
class SolverConfig:
    """Pipeline knobs; gd_max_iters=0 disables refinement (classical MDS only)."""

    gd_max_iters: int = 200
    gd_backtrack_factor: float = 0.5
    gd_sufficient_decrease: float = 1e-4
    gd_tol: float = 1e-9
    missing_entry_imputation: str = "zero"
    eigenvalue_floor: float = 0.0
    norm_filter_threshold: float = 2.0

    def __post_init__(self):
        if self.gd_max_iters < 0:
            raise ValueError("gd_max_iters must be >= 0")
        if self.missing_entry_imputation not in ("observed-mean", "zero"):
            raise ValueError("imputation must be 'observed-mean' or 'zero'")


def build_distance_matrix(
    pairs, intensities, masks, n_points: int, row_index: int = 0, frame_index: int = 1
) -> DistanceObservation:
    """Assemble the Q x Q squared-distance matrix of one row and one frame.

    ``pairs`` lists the 0-based point index pair measured by each entry of
    ``intensities``/``masks``; all Q(Q-1)/2 unordered pairs must be present.
    Masked entries are stored as zero.
    """
    pairs = list(pairs)
    if len(pairs) != n_points * (n_points - 1) // 2:
        raise ValueError(
            f"expected {n_points * (n_points - 1) // 2} pair measurements, "
            f"got {len(pairs)}"
        )
    d2 = np.zeros((n_points, n_points))
    mask = np.eye(n_points)
    seen = set()
    for (q, r), value, ok in zip(pairs, intensities, masks):
        if q == r or not (0 <= q < n_points and 0 <= r < n_points):
            raise ValueError(f"invalid pair ({q}, {r})")
        key = (min(q, r), max(q, r))
        if key in seen:
            raise ValueError(f"duplicate pair {key}")
        seen.add(key)
        ok = int(ok)
        d2[q, r] = d2[r, q] = value * ok
        mask[q, r] = mask[r, q] = ok
    return DistanceObservation(
        d2=d2, mask=mask, row_index=row_index, frame_index=frame_index
    )


def _impute(obs: DistanceObservation, cfg: SolverConfig) -> np.ndarray:
    d2 = obs.d2.copy()
    missing = obs.mask == 0
    if not missing.any():
        return d2
    if cfg.missing_entry_imputation == "observed-mean":
        off = ~np.eye(obs.n_points, dtype=bool)
        observed = d2[(obs.mask == 1) & off]
        fill = observed.mean() if observed.size else 0.0
    else:
        fill = 0.0
    d2[missing] = fill
    return d2


def classical_mds(obs: DistanceObservation, cfg: SolverConfig = SolverConfig()) -> PointSet:
    """Localize the points of one observation in the plane by classical MDS.

    Missing entries are imputed (the mask is honored later, by the gradient
    refinement), the centered Gram matrix is eigendecomposed, and the top two
    eigenpairs give the planar embedding. Negative eigenvalues are clamped
    and each eigenvector's sign is fixed deterministically.
    """
    q = obs.n_points
    d2 = _impute(obs, cfg)
    j = np.eye(q) - np.full((q, q), 1.0 / q)
    gram = -0.5 * (j @ d2 @ j)
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    points = np.zeros((2, q))
    for k in range(2):
        lam = max(evals[k], cfg.eigenvalue_floor)
        v = evecs[:, k]
        pivot = np.argmax(np.abs(v))
        if v[pivot] < 0:
            v = -v
        points[k] = np.sqrt(lam) * v
    return PointSet(points=points)


def _masked_residual(pts: np.ndarray, d2: np.ndarray, w: np.ndarray) -> np.ndarray:
    gram = pts.T @ pts
    diag = np.diag(gram)
    return w * (d2 - (diag[:, None] - 2.0 * gram + diag[None, :]))


def _stress_value(pts: np.ndarray, d2: np.ndarray, w: np.ndarray) -> float:
    residual = _masked_residual(pts, d2, w)
    return float(np.einsum("ij,ij->", residual, residual))


def _stress_and_grad(pts: np.ndarray, d2: np.ndarray, w: np.ndarray):
    residual = _masked_residual(pts, d2, w)
    value = float(np.einsum("ij,ij->", residual, residual))
    grad = -8.0 * (pts * residual.sum(axis=1)[None, :] - pts @ residual)
    return value, grad


def squared_stress(z: PointSet, obs: DistanceObservation):
    """Masked squared-stress objective and its gradient.

    Value: || W . (D - K(Z'Z)) ||_F^2 over all ordered pairs; gradient taken
    with respect to the 2 x Q point matrix.
    """
    pts = z.points
    if pts.shape[1] != obs.n_points:
        raise ValueError("point count does not match observation")
    return _stress_and_grad(pts, obs.d2, obs.mask)


def refine_gd(
    obs: DistanceObservation,
    init: PointSet,
    cfg: SolverConfig = SolverConfig(),
    collect_trace: bool = False,
):
    """Gradient descent on the masked squared stress with backtracking.

    Only strictly improving steps (Armijo test) are accepted, so the returned
    stress never exceeds the initial one. Stops on the relative-decrease
    tolerance, the iteration cap, or a failed line search.
    """
    z = init.points.copy()
    d2, w = obs.d2, obs.mask
    f, grad = _stress_and_grad(z, d2, w)
    trace = [f]
    # scale-free first trial step; later iterations reuse the last accepted step
    gnorm2 = float(np.sum(grad ** 2))
    step = f / gnorm2 if gnorm2 > 0 else 1.0

    for _ in range(cfg.gd_max_iters):
        gnorm2 = float(np.sum(grad ** 2))
        if gnorm2 == 0.0 or f == 0.0:
            break
        accepted = False
        t = step
        while t > 1e-300:
            z_new = z - t * grad
            f_new = _stress_value(z_new, d2, w)
            if f_new <= f - cfg.gd_sufficient_decrease * t * gnorm2:
                accepted = True
                break
            t *= cfg.gd_backtrack_factor
        if not accepted:
            break
        decrease = (f - f_new) / f
        z, f = z_new, f_new
        _, grad = _stress_and_grad(z, d2, w)
        if collect_trace:
            trace.append(f)
        step = t / cfg.gd_backtrack_factor
        if decrease < cfg.gd_tol:
            break

    out = PointSet(points=z)
    if collect_trace:
        return out, trace
    return out


def center_to_origin(ps: PointSet) -> PointSet:
    """Shift the whole point set so the last column (the origin anchor) is 0."""
    return PointSet(points=ps.points - ps.points[:, -1:])


def procrustes(anchors_ref: np.ndarray, anchors_cur: np.ndarray) -> np.ndarray:
    """Best orthogonal map R (rotation or reflection) with R @ cur ~ ref.

    Computed from the SVD of cur @ ref'; det(R) = -1 corresponds to a
    conjugation of the underlying complex points. Degenerate (collinear
    through the origin) anchor sets trigger a warning but still return the
    SVD solution.
    """
    ref = np.asarray(anchors_ref, dtype=float)
    cur = np.asarray(anchors_cur, dtype=float)
    if ref.shape != cur.shape or ref.shape[0] != 2 or ref.shape[1] < 2:
        raise ValueError("anchor sets must both be 2 x K with K >= 2")
    u, s, vt = np.linalg.svd(cur @ ref.T)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        warnings.warn("degenerate anchor configuration; alignment may be arbitrary")
    return vt.T @ u.T


def srls_localize(anchor_points: np.ndarray, distances: np.ndarray) -> np.ndarray:
    """Locate one planar point from known anchors and measured distances.

    Minimizes sum_q (||u - p_q||^2 - d_q^2)^2 globally by reducing it to a
    quadratic least-squares problem with the single quadratic constraint
    alpha = ||u||^2, solved through the secular equation of the constrained
    normal system.
    """
    p = np.asarray(anchor_points, dtype=float)
    d = np.asarray(distances, dtype=float)
    if p.ndim != 2 or p.shape[0] != 2:
        raise ValueError("anchor_points must be 2 x K")
    if p.shape[1] < 3:
        raise ValueError("need at least 3 anchors for a unique planar fix")
    if d.shape != (p.shape[1],):
        raise ValueError("one distance per anchor required")

    a = np.column_stack([-2.0 * p.T, np.ones(p.shape[1])])
    b = d ** 2 - np.sum(p ** 2, axis=0)
    ata = a.T @ a
    atb = a.T @ b
    dmat = np.diag([1.0, 1.0, 0.0])
    fvec = np.array([0.0, 0.0, -0.5])

    def y_of(lam):
        return np.linalg.solve(ata + lam * dmat, atb - lam * fvec)

    def constraint(lam):
        y = y_of(lam)
        return y[0] ** 2 + y[1] ** 2 - y[2]

    # positive-definiteness interval: lam > -1 / mu_max for the pencil (D, A'A)
    mu = linalg.eigh(dmat, ata, eigvals_only=True)
    mu_max = mu[-1]
    lam_lo = -1.0 / mu_max
    eps = max(abs(lam_lo), 1.0) * 1e-10
    lo = lam_lo + eps
    while constraint(lo) < 0:
        eps *= 0.1
        lo = lam_lo + eps
        if eps < 1e-300:
            break
    hi = max(abs(lam_lo), 1.0)
    while constraint(hi) > 0:
        hi *= 2.0
    lam = optimize.brentq(constraint, lo, hi, xtol=1e-14, rtol=1e-15)
    return y_of(lam)[:2]


def _frame_points(obs: DistanceObservation, cfg: SolverConfig) -> PointSet:
    ps = classical_mds(obs, cfg)
    if cfg.gd_max_iters > 0:
        ps = refine_gd(obs, ps, cfg)
    return center_to_origin(ps)


def solve_mpr(observations, cfg: SolverConfig = SolverConfig()) -> RecoveredProjections:
    """Recover the complex projections of S frames for every row.

    ``observations[m][s]`` holds the distance observation of row m, frame s.
    Frame 1 of each row fixes the gauge; later frames are aligned to its
    anchor estimate by an orthogonal Procrustes fit before the signal point
    is read off. Rows that cannot be localized, or whose recovered points
    fall below the norm filter, are flagged rather than dropped.
    """
    n_rows = len(observations)
    n_frames = len(observations[0]) if n_rows else 0
    y = np.zeros((n_rows, n_frames), dtype=complex)
    flags = np.zeros(n_rows, dtype=int)

    for m, row_obs in enumerate(observations):
        if len(row_obs) != n_frames:
            raise ValueError("all rows must observe the same number of frames")
        if not all(o.is_localizable for o in row_obs):
            flags[m] |= FLAG_UNLOCALIZABLE
            y[m, :] = np.nan + 1j * np.nan
            continue

        first = _frame_points(row_obs[0], cfg)
        anchors_ref = first.points[:, 1:]
        y[m, 0] = first.as_complex()[0]
        for s in range(1, n_frames):
            cur = _frame_points(row_obs[s], cfg)
            rot = procrustes(anchors_ref, cur.points[:, 1:])
            aligned = rot @ cur.points
            y[m, s] = aligned[0, 0] + 1j * aligned[1, 0]

        if np.min(np.abs(y[m])) < cfg.norm_filter_threshold:
            flags[m] |= FLAG_LOW_NORM

    return RecoveredProjections(y=y, flags=flags)


def plan_probes(frames, refs: ReferenceSet, binary_mode: bool = False):
    """Input vectors for every pairwise difference of every frame.

    Returns (pairs, inputs_per_frame): ``pairs`` lists the Q(Q-1)/2 probed
    0-based column index pairs, ``inputs_per_frame[s]`` stacks the matching
    difference vectors for frame s. In binary mode each difference is taken
    larger-support-minus-smaller so the device input stays 0/1; the measured
    magnitude is unchanged by the sign.
    """
    q_total = refs.count + 1
    pairs = [(q, r) for q in range(q_total) for r in range(q + 1, q_total)]
    inputs = []
    for frame in frames:
        x = refs.column_matrix(frame)
        diffs = np.empty((len(pairs), x.shape[0]))
        for i, (q, r) in enumerate(pairs):
            delta = x[:, q] - x[:, r]
            if binary_mode and np.any(delta < 0):
                delta = -delta
            diffs[i] = delta
        if binary_mode and not np.all((diffs == 0) | (diffs == 1)):
            raise ValueError(
                "probe differences are not binary; design nested references first"
            )
        inputs.append(diffs)
    return pairs, inputs


def gather_observations(opu: OpticalProcessor, frames, refs: ReferenceSet):
    """Measure all probe pairs and build per-row, per-frame observations.

    Returns ``obs[m][s]`` ready for :func:`solve_mpr`.
    """
    frames = list(frames)
    pairs, inputs = plan_probes(frames, refs, binary_mode=opu.camera.binary_mode)
    q_total = refs.count + 1
    n_rows = opu.output_dim
    observations = [[None] * len(frames) for _ in range(n_rows)]
    for s, probe_block in enumerate(inputs):
        intensities, masks = opu.project(probe_block)
        for m in range(n_rows):
            observations[m][s] = build_distance_matrix(
                pairs,
                intensities[:, m],
                masks[:, m],
                q_total,
                row_index=m,
                frame_index=s + 1,
            )
    return observations


def recover_projections(
    opu: OpticalProcessor, frames, refs: ReferenceSet, cfg: SolverConfig = SolverConfig()
) -> RecoveredProjections:
    """End-to-end convenience: probe the device, then run the full pipeline."""
    return solve_mpr(gather_observations(opu, frames, refs), cfg)


def export_projections_csv(
    result: RecoveredProjections, path, cfg: SolverConfig = None, seeds: dict = None
) -> None:
    """Write (row, frame, re, im, flag) rows plus a JSON sidecar for replay."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "frame", "re", "im", "flag"])
        for m in range(result.n_rows):
            for s in range(result.n_frames):
                val = result.y[m, s]
                writer.writerow(
                    [m + 1, s + 1, repr(float(val.real)), repr(float(val.imag)),
                     int(result.flags[m])]
                )
    sidecar = {
        "solver_config": asdict(cfg) if cfg is not None else None,
        "seeds": seeds or {},
        "gauge_note": result.gauge_note,
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
