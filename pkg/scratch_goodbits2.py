import time
import warnings

import numpy as np

import mprkit as mk
from mprkit.core import Frame
from mprkit.metrics import good_bits
from mprkit.refdesign import gaussian_references
from mprkit.solver import SolverConfig, gather_observations, plan_probes, solve_mpr

warnings.filterwarnings("ignore")


def trial(K, tau, seed, iters_list, N=100):
    ss = np.random.SeedSequence([seed, K, int(tau)]).spawn(3)
    rng = np.random.default_rng(ss[0])
    tm = mk.draw_transmission_matrix(1, N, seed=int(rng.integers(2**31)))
    xi = rng.standard_normal(N)
    frames = [Frame(xi, 1)]
    refs = gaussian_references(K, N, seed=int(rng.integers(2**31)))
    pairs, inputs = plan_probes(frames, refs)
    probes = np.vstack(inputs)
    cam0 = mk.CameraConfig(bits=8, sensitivity_threshold=tau)
    g = mk.auto_exposure(tm, probes, cam0, target_max=250)
    cam = mk.CameraConfig(bits=8, exposure_gain=g, sensitivity_threshold=tau)
    opu = mk.SimulatedOPU(tm, cam)
    obs = gather_observations(opu, frames, refs)
    masked = 1 - obs[0][0].mask[np.triu_indices(K + 1, 1)].mean()

    true_cam = g * float(np.abs(tm.a @ xi) ** 2)
    out = {"masked": masked}
    for iters in iters_list:
        res = solve_mpr(
            obs, SolverConfig(gd_max_iters=iters, missing_entry_imputation="zero")
        )
        est = float(np.abs(res.y[0, 0]) ** 2)
        out[iters] = good_bits(true_cam, est)
    return out


iters_list = [0, 5, 10, 20, 50, 200]
for K in (5, 10, 15):
    t0 = time.time()
    runs = [trial(K, 6.0, 9000 + i, iters_list) for i in range(100)]
    masked = np.mean([r["masked"] for r in runs])
    means = {it: np.mean([r[it] for r in runs]) for it in iters_list}
    gaps = {it: means[it] - means[0] for it in iters_list if it > 0}
    gap_vals = np.array([r[200] - r[0] for r in runs])
    print(
        f"K={K:2d} masked={masked:.3f} MDS={means[0]:.2f} | gaps vs iters: "
        + " ".join(f"{it}:{gaps[it]:+.2f}" for it in gaps)
        + f" | gap200 SE={gap_vals.std(ddof=1)/10:.2f} ({time.time()-t0:.0f}s)"
    )
