import warnings

import numpy as np

import mprkit as mk
from mprkit.core import DistanceObservation, PointSet, kappa_operator, pairwise_sq_dists
from mprkit.opusim import additive_quantization_noise_model
from mprkit.solver import SolverConfig, classical_mds, refine_gd

warnings.filterwarnings("ignore")


def one_trial(k, p, seed, imputation, oracle_init=False):
    rng = np.random.default_rng(seed)
    kappa = 255.0
    pts = rng.standard_normal((2, k))
    d_clean = pairwise_sq_dists(pts)
    scale = kappa / d_clean.max()
    d_clean *= scale
    pts = pts * np.sqrt(scale)
    sampler = additive_quantization_noise_model(8, kappa)
    noise = sampler((k, k), rng)
    noise = np.triu(noise, 1)
    noisy = np.clip(d_clean + noise + noise.T, 0, None)
    keep = rng.random((k, k)) < p
    mask = np.triu(keep, 1)
    mask = (mask | mask.T | np.eye(k, dtype=bool)).astype(float)
    np.fill_diagonal(noisy, 0.0)
    obs = DistanceObservation(d2=noisy * mask, mask=mask)
    cfg = SolverConfig(missing_entry_imputation=imputation)
    if oracle_init:
        init = PointSet(points=pts)
    else:
        init = classical_mds(obs, cfg)
    out = refine_gd(obs, init, cfg)
    d_hat = kappa_operator(out.points.T @ out.points)
    return np.linalg.norm(d_hat - d_clean) / k


for k, p in ((10, 0.6), (10, 0.9), (20, 0.6)):
    for imp in ("observed-mean", "zero"):
        errs = np.array([one_trial(k, p, 100 + i, imp) for i in range(50)])
        oracle = np.array(
            [one_trial(k, p, 100 + i, imp, oracle_init=True) for i in range(50)]
        )
        print(
            f"K={k} p={p} imp={imp[:4]}: mean {errs.mean():7.2f} med {np.median(errs):5.2f} "
            f"max {errs.max():7.1f} | oracle-init mean {oracle.mean():5.2f} "
            f"med {np.median(oracle):5.2f} max {oracle.max():6.2f}"
        )
