import warnings

import numpy as np

import mprkit as mk
from mprkit.core import Frame
from mprkit.metrics import good_bits
from mprkit.refdesign import gaussian_references
from mprkit.solver import SolverConfig, gather_observations, plan_probes, solve_mpr

warnings.filterwarnings("ignore")


def trial(K, tau, seed, N=100):
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
    true_cam = g * float(np.abs(tm.a @ xi) ** 2)
    vals = {}
    for label, iters in (("MDS", 0), ("GD", 200)):
        res = solve_mpr(
            obs, SolverConfig(gd_max_iters=iters, missing_entry_imputation="zero")
        )
        vals[label] = good_bits(true_cam, float(np.abs(res.y[0, 0]) ** 2))
        vals[label + "-flag"] = int(res.flags[0])
    vals["true"] = true_cam
    return vals


runs = [trial(15, 6.0, 9000 + i) for i in range(100)]
mds = np.array([r["MDS"] for r in runs])
gd = np.array([r["GD"] for r in runs])
flags_mds = np.array([r["MDS-flag"] for r in runs])
true_mag = np.array([r["true"] for r in runs])

print("all trials: MDS %.2f GD %.2f gap %.2f" % (mds.mean(), gd.mean(), (gd - mds).mean()))
keep = flags_mds == 0
print(
    "norm-filtered (kept %d): MDS %.2f GD %.2f gap %.2f"
    % (keep.sum(), mds[keep].mean(), gd[keep].mean(), (gd - mds)[keep].mean())
)
print("\nworst 10 trials by gap:")
order = np.argsort(gd - mds)[::-1]
for i in order[:10]:
    print(
        f"  true={true_mag[i]:8.2f} MDS={mds[i]:7.2f} GD={gd[i]:7.2f} "
        f"gap={gd[i]-mds[i]:6.2f} flag={flags_mds[i]}"
    )
print("\nMDS negative-bits trials:", int((mds < 0).sum()), " GD:", int((gd < 0).sum()))
print("median gap:", np.median(gd - mds))
