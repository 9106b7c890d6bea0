import time

import numpy as np

import mprkit as mk
from mprkit.core import Frame
from mprkit.metrics import LinearityTriple, linearity_error
from mprkit.refdesign import gaussian_references
from mprkit.solver import SolverConfig, gather_observations, plan_probes, solve_mpr


def trial(K, tau, seed, M=100, N=4096):
    ss = np.random.SeedSequence([seed, K]).spawn(4)
    rng = np.random.default_rng(ss[0])
    tm = mk.draw_transmission_matrix(M, N, seed=int(rng.integers(2**31)))
    x1 = rng.standard_normal(N)
    x2 = rng.standard_normal(N)
    frames = [Frame(x1, 1), Frame(x2, 2), Frame(x1 + x2, 3)]
    refs = gaussian_references(K, N, seed=int(rng.integers(2**31)))
    pairs, inputs = plan_probes(frames, refs)
    probes = np.vstack(inputs)
    cam0 = mk.CameraConfig(bits=8, sensitivity_threshold=tau)
    g = mk.auto_exposure(tm, probes, cam0, target_max=250)
    cam = mk.CameraConfig(bits=8, exposure_gain=g, sensitivity_threshold=tau)
    opu = mk.SimulatedOPU(tm, cam)
    obs = gather_observations(opu, frames, refs)
    out = {}
    for label, iters in (("MDS", 0), ("MDS-GD", 200)):
        res = solve_mpr(obs, SolverConfig(gd_max_iters=iters))
        keep = res.retained()
        if keep.sum() == 0:
            out[label] = np.nan
            continue
        t = LinearityTriple(res.y[keep, 0], res.y[keep, 1], res.y[keep, 2])
        out[label] = linearity_error(t)
    return out


import warnings
warnings.filterwarnings("ignore")

for tau in (0.0, 6.0):
    print(f"--- tau={tau}")
    for K in (3, 6, 9, 12, 15):
        t0 = time.time()
        runs = [trial(K, tau, 1000 + i) for i in range(10)]
        mds = np.array([r["MDS"] for r in runs])
        gd = np.array([r["MDS-GD"] for r in runs])
        print(
            f"K={K:2d}  MDS {mds.mean():.4f}+-{mds.std(ddof=1)/np.sqrt(10):.4f}  "
            f"GD {gd.mean():.4f}+-{gd.std(ddof=1)/np.sqrt(10):.4f}  "
            f"GD<=MDS {gd.mean() <= mds.mean()}  ({time.time()-t0:.1f}s)"
        )
