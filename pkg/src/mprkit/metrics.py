"""Evaluation metrics and the anchor-count error-scaling experiment.

The device's hidden matrix makes direct comparison impossible on hardware,
so quality is judged through linearity (recovered projections of x1, x2, and
x1+x2 should add up) and, in simulation, through the number of good bits of
the recovered squared magnitude and gauge-aligned SNR.
"""

from dataclasses import dataclass

import numpy as np

from .core import DistanceObservation, kappa_operator, pairwise_sq_dists
from .opusim import additive_quantization_noise_model
from .solver import SolverConfig, classical_mds, refine_gd

__all__ = [
    "LinearityTriple",
    "linearity_error",
    "good_bits",
    "fit_gauge",
    "gauge_snr_db",
    "ScalingPoint",
    "edm_error_scaling",
]

GOOD_BITS_CAP = 52.0
_DB_PER_BIT = 6.02


@dataclass(frozen=True)
class LinearityTriple:
    """Recovered projections of two signals and of their sum."""

    y: np.ndarray
    z: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        z = np.asarray(self.z, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if not (y.shape == z.shape == v.shape) or y.ndim != 1:
            raise ValueError("y, z, v must be equal-length vectors")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "v", v)


def linearity_error(t: LinearityTriple) -> float:
    """Mean relative additivity violation: mean of |y + z - v| / |v|."""
    if t.v.size == 0:
        raise ValueError("no retained rows; linearity error is undefined")
    denom = np.abs(t.v)
    if np.any(denom == 0):
        raise ValueError("zero-magnitude v entry; filter such rows upstream")
    return float(np.mean(np.abs(t.y + t.z - t.v) / denom))


def good_bits(true_sq_mag: float, est_sq_mag: float, cap: float = GOOD_BITS_CAP) -> float:
    """Correct bits of a squared-magnitude estimate.

    -(20/6.02) * log10 of the relative error; 6.02 dB per bit makes this a
    signal-to-quantization-noise proxy. An exact match is clamped to ``cap``
    to keep aggregates finite.
    """
    if true_sq_mag <= 0:
        raise ValueError("true squared magnitude must be positive")
    rel = abs(true_sq_mag - est_sq_mag) / true_sq_mag
    if rel == 0:
        return cap
    return min(-(20.0 / _DB_PER_BIT) * np.log10(rel), cap)


def fit_gauge(truth: np.ndarray, estimate: np.ndarray):
    """Fit the 2-parameter row gauge (phase + conjugation) on frame 1.

    Both candidate conjugation bits match frame 1 exactly by construction;
    the one whose phase fit better explains the remaining frames wins.
    Returns (phi, conjugate, per-frame relative errors of the aligned truth).
    """
    truth = np.asarray(truth, dtype=complex)
    estimate = np.asarray(estimate, dtype=complex)
    if truth.shape != estimate.shape or truth.ndim != 1:
        raise ValueError("truth and estimate must be equal-length vectors")
    if np.any(np.abs(truth) == 0):
        raise ValueError("zero-magnitude truth entry; gauge fit undefined")

    best = None
    for conjugate in (False, True):
        t = np.conj(truth) if conjugate else truth
        phi = float(np.angle(estimate[0]) - np.angle(t[0]))
        aligned = np.exp(1j * phi) * t
        rel = np.abs(aligned - estimate) / np.abs(truth)
        score = float(np.max(rel[1:])) if truth.size > 1 else float(rel[0])
        if best is None or score < best[0]:
            best = (score, phi, conjugate, rel)
    _, phi, conjugate, rel = best
    return phi, conjugate, rel


def gauge_snr_db(truth: np.ndarray, estimate: np.ndarray) -> float:
    """SNR in dB of the estimate after removing the best row gauge."""
    truth = np.asarray(truth, dtype=complex)
    estimate = np.asarray(estimate, dtype=complex)
    phi, conjugate, _ = fit_gauge(truth, estimate)
    t = np.conj(truth) if conjugate else truth
    aligned = np.exp(1j * phi) * t
    noise = np.sum(np.abs(aligned - estimate) ** 2)
    if noise == 0:
        return float("inf")
    return float(10.0 * np.log10(np.sum(np.abs(truth) ** 2) / noise))


@dataclass(frozen=True)
class ScalingPoint:
    """One aggregate of the distance-error scaling experiment."""

    n_points: int
    keep_probability: float
    bits: int
    trials: int
    mean_err_over_k: float
    stderr: float

    @property
    def normalized(self) -> float:
        """mean(||Dhat - D||_F / K) * sqrt(p K); flat iff the bound's shape holds."""
        return float(
            self.mean_err_over_k * np.sqrt(self.keep_probability * self.n_points)
        )


def edm_error_scaling(
    keep_probability: float,
    bits,
    k_list,
    trials: int = 50,
    seed: int = 0,
    cfg: SolverConfig = SolverConfig(),
):
    """Distance recovery error versus point count under idealized corruption.

    For each K: draw K planar Gaussian points scaled so distances fill the
    quantizer range, corrupt the distance matrix with uniform quantization
    noise and a Bernoulli observation mask, localize with MDS plus masked
    gradient refinement, and measure ||Dhat - D||_F / K against the clean
    matrix. ``bits=None`` disables the noise.

    Returns a list of :class:`ScalingPoint`, one per K.
    """
    k_list = list(k_list)
    if any(k < 3 for k in k_list):
        raise ValueError("each K must be >= 3")
    if sorted(k_list) != k_list:
        raise ValueError("k_list must be increasing")
    if not 0 < keep_probability <= 1:
        raise ValueError("keep_probability must lie in (0, 1]")

    kappa = float(2 ** bits - 1) if bits is not None else 255.0
    sampler = (
        additive_quantization_noise_model(bits, kappa) if bits is not None else None
    )
    root = np.random.SeedSequence(seed)
    results = []
    for k, ss in zip(k_list, root.spawn(len(k_list))):
        errs = np.empty(trials)
        for t, trial_ss in enumerate(ss.spawn(trials)):
            rng = np.random.default_rng(trial_ss)
            pts = rng.standard_normal((2, k))
            d_clean = pairwise_sq_dists(pts)
            peak = d_clean.max()
            if peak > 0:
                d_clean *= kappa / peak
            noisy = d_clean.copy()
            if sampler is not None:
                noise = sampler((k, k), rng)
                noise = np.triu(noise, 1)
                noisy = np.clip(d_clean + noise + noise.T, 0.0, None)
            keep = rng.random((k, k)) < keep_probability
            mask = np.triu(keep, 1)
            mask = (mask + mask.T + np.eye(k, dtype=bool)).astype(float)
            np.fill_diagonal(noisy, 0.0)
            obs = DistanceObservation(d2=noisy * mask, mask=mask)
            ps = classical_mds(obs, cfg)
            if cfg.gd_max_iters > 0:
                ps = refine_gd(obs, ps, cfg)
            d_hat = kappa_operator(ps.points.T @ ps.points)
            errs[t] = np.linalg.norm(d_hat - d_clean) / k
        results.append(
            ScalingPoint(
                n_points=k,
                keep_probability=keep_probability,
                bits=bits if bits is not None else -1,
                trials=trials,
                mean_err_over_k=float(errs.mean()),
                stderr=float(errs.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0,
            )
        )
    return results
