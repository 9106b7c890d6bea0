import time
import warnings

import numpy as np

import mprkit as mk
from mprkit.core import Frame
from mprkit.metrics import edm_error_scaling, fit_gauge
from mprkit.refdesign import gaussian_references
from mprkit.solver import SolverConfig, gather_observations, plan_probes, solve_mpr

warnings.filterwarnings("ignore")

print("--- criterion 6: scaling law shape")
t0 = time.time()
for p in (0.6, 0.9):
    rows = edm_error_scaling(p, 8, [10, 20, 40, 80], trials=50, seed=0)
    norm = [r.normalized for r in rows]
    print(
        f"p={p}: normalized",
        [round(v, 2) for v in norm],
        "ratio max/min=%.2f" % (max(norm) / min(norm)),
        f"({time.time()-t0:.0f}s)",
    )

print("--- criterion 5: gauge contract")


def gauge_check(seed, quantize, M=50, S=3, N=512, K=12, tau=0.0):
    ss = np.random.SeedSequence([seed]).spawn(3)
    rng = np.random.default_rng(ss[0])
    tm = mk.draw_transmission_matrix(M, N, seed=int(rng.integers(2**31)))
    signals = [rng.standard_normal(N) for _ in range(S)]
    frames = [Frame(x, i + 1) for i, x in enumerate(signals)]
    refs = gaussian_references(K, N, seed=int(rng.integers(2**31)))
    pairs, inputs = plan_probes(frames, refs)
    probes = np.vstack(inputs)
    if quantize:
        cam0 = mk.CameraConfig(bits=8, sensitivity_threshold=tau)
        g = mk.auto_exposure(tm, probes, cam0, target_max=250)
        cam = mk.CameraConfig(bits=8, exposure_gain=g, sensitivity_threshold=tau)
    else:
        g = 1.0
        cam = mk.CameraConfig(quantize=False)
    opu = mk.SimulatedOPU(tm, cam)
    obs = gather_observations(opu, frames, refs)
    res = solve_mpr(obs, SolverConfig(missing_entry_imputation="zero"))
    truth = np.sqrt(g) * (tm.a @ np.stack(signals, axis=1))
    worst = 0.0
    n_checked = 0
    for m in range(M):
        if res.flags[m]:
            continue
        _, _, rel = fit_gauge(truth[m], res.y[m])
        worst = max(worst, rel[1:].max())
        n_checked += 1
    return worst, n_checked


t0 = time.time()
worst_clean = max(gauge_check(s, quantize=False)[0] for s in range(20))
print(f"noiseless worst rel err over 20 instances: {worst_clean:.2e} ({time.time()-t0:.0f}s)")
t0 = time.time()
results = [gauge_check(s, quantize=True) for s in range(20)]
worst_q = max(r[0] for r in results)
print(
    f"b=8 worst rel err over 20 instances: {worst_q:.2e} "
    f"(min kept rows {min(r[1] for r in results)}) ({time.time()-t0:.0f}s)"
)
