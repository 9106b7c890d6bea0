import time
import warnings

import numpy as np

import mprkit as mk
from mprkit.core import Frame
from mprkit.metrics import LinearityTriple, linearity_error
from mprkit.refdesign import gaussian_references
from mprkit.solver import SolverConfig, gather_observations, plan_probes, solve_mpr

warnings.filterwarnings("ignore")


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
    masked_frac = np.mean([
        1 - o.mask[np.triu_indices(o.n_points, 1)].mean() for row in obs for o in row
    ])
    out = {"masked": masked_frac}
    for imp in ("observed-mean", "zero"):
        for label, iters in (("MDS", 0), ("GD", 200)):
            res = solve_mpr(
                obs, SolverConfig(gd_max_iters=iters, missing_entry_imputation=imp)
            )
            keep = res.retained()
            name = f"{imp[:4]}-{label}"
            if keep.sum() == 0:
                out[name] = np.nan
                out[name + "-kept"] = 0
                continue
            t = LinearityTriple(res.y[keep, 0], res.y[keep, 1], res.y[keep, 2])
            out[name] = linearity_error(t)
            out[name + "-kept"] = int(keep.sum())
    return out


for tau in (6.0, 0.0):
    print(f"--- tau={tau}")
    for K in (3, 6, 15):
        t0 = time.time()
        runs = [trial(K, tau, 1000 + i) for i in range(10)]
        agg = {
            k: np.nanmean([r[k] for r in runs])
            for k in runs[0]
        }
        print(
            f"K={K:2d} masked={agg['masked']:.3f} | "
            f"mean: MDS {agg['obse-MDS']:.4f} GD {agg['obse-GD']:.4f} "
            f"(kept {agg['obse-MDS-kept']:.0f}/{agg['obse-GD-kept']:.0f}) | "
            f"zero: MDS {agg['zero-MDS']:.4f} GD {agg['zero-GD']:.4f} "
            f"(kept {agg['zero-MDS-kept']:.0f}/{agg['zero-GD-kept']:.0f}) "
            f"({time.time()-t0:.0f}s)"
        )
