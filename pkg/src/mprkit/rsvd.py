"""Randomized SVD, with and without the optical projector.

The optical variant replaces the Gaussian sketch B @ Omega by phase-recovered
device projections: a hidden complex Gaussian matrix supplies independent
real and imaginary parts per projection, so stacking Re and Im of the
recovered products halves the number of physical projections needed for a
sketch of the same width.
"""

import csv
import json
import os
from dataclasses import asdict

import numpy as np

from .core import Frame
from .opusim import OpticalProcessor
from .refdesign import ReferenceDesignConfig, design_binary_references, gaussian_references
from .solver import SolverConfig, recover_projections

__all__ = ["rsvd_prototype", "rsvd_opu", "export_factors"]


def _finish(sketch: np.ndarray, b: np.ndarray, rank: int):
    """Shared tail of both variants: orthonormalize, project, small SVD."""
    q, _ = np.linalg.qr(sketch)
    c = q.T @ b
    u_small, sigma, vt = np.linalg.svd(c, full_matrices=False)
    keep = min(rank, sigma.size)
    return (q @ u_small)[:, :keep], sigma[:keep], vt[:keep, :]


def rsvd_prototype(b: np.ndarray, rank: int, seed, sketch_width: int = None):
    """Plain randomized SVD: Gaussian sketch, range basis, small SVD.

    The sketch is B @ Omega with Omega an N x 2*rank standard Gaussian
    matrix (width overridable); returns (U, sigma, Vt) truncated to ``rank``.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2:
        raise ValueError("input matrix must be 2-D")
    if rank < 1:
        raise ValueError("rank must be >= 1")
    width = 2 * rank if sketch_width is None else sketch_width
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((b.shape[1], width))
    return _finish(b @ omega, b, rank)


def rsvd_opu(
    b: np.ndarray,
    rank: int,
    opu: OpticalProcessor,
    solver_cfg: SolverConfig = SolverConfig(),
    anchor_count: int = 5,
    anchor_seed: int = 0,
    flip_probability: float = 0.2,
    n_projections: int = None,
):
    """Randomized SVD with the sketch computed by the optical projector.

    Every row of B becomes an input frame; the phase-recovery pipeline
    returns the complex products Y = (hidden K x N matrix) @ B', and the
    sketch is the real/imaginary stacking [Re(Y*) Im(Y*)], giving width
    2 * n_projections from n_projections device rows. ``n_projections``
    defaults to ``rank``.

    Raises if any row of B fails to localize.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2:
        raise ValueError("input matrix must be 2-D")
    if rank < 1:
        raise ValueError("rank must be >= 1")
    n_proj = rank if n_projections is None else n_projections
    if opu.output_dim != n_proj:
        raise ValueError(
            f"device provides {opu.output_dim} projection rows, need {n_proj}"
        )

    frames = [Frame(values=row, frame_index=i + 1) for i, row in enumerate(b)]
    if opu.camera.binary_mode:
        refs = design_binary_references(
            frames,
            ReferenceDesignConfig(
                flip_probability=flip_probability,
                anchor_count=anchor_count,
                seed=anchor_seed,
            ),
        )
    else:
        refs = gaussian_references(anchor_count, b.shape[1], anchor_seed)

    recovered = recover_projections(opu, frames, refs, solver_cfg)
    bad = np.flatnonzero(~np.isfinite(recovered.y).all(axis=1))
    if bad.size:
        raise RuntimeError(
            f"projection rows {bad.tolist()} could not be localized; "
            "increase anchors or lower the sensitivity threshold"
        )
    y_star = recovered.y.conj().T  # M x n_proj
    sketch = np.hstack([y_star.real, y_star.imag])
    return _finish(sketch, b, rank)


def export_factors(u, sigma, vt, out_dir, manifest: dict = None) -> None:
    """Write the three factors as CSV matrices plus a JSON run manifest."""
    os.makedirs(out_dir, exist_ok=True)
    for name, mat in (("u", u), ("sigma", np.atleast_2d(sigma)), ("vt", vt)):
        with open(os.path.join(out_dir, f"factor_{name}.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in np.atleast_2d(mat):
                writer.writerow([repr(float(v)) for v in row])
    if manifest is not None:
        payload = {
            k: asdict(v) if hasattr(v, "__dataclass_fields__") else v
            for k, v in manifest.items()
        }
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
