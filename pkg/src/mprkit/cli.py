"""Experiment drivers and the command-line interface.

Each subcommand reproduces one evaluation protocol at desk scale (paper-size
runs behind ``--paper-scale``), writes a CSV whose first line records the
resolved-config hash, and renders a companion figure unless ``--no-figures``.
Configuration comes from an optional key=value file plus flag overrides;
flags win.
"""

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import plots
from .core import Frame
from .metrics import (
    LinearityTriple,
    edm_error_scaling,
    good_bits,
    linearity_error,
)
from .opusim import CameraConfig, SimulatedOPU, auto_exposure, draw_transmission_matrix
from .refdesign import (
    ReferenceDesignConfig,
    design_with_stats,
    gaussian_references,
    save_reference_set,
)
from .rsvd import export_factors, rsvd_opu
from .solver import (
    SolverConfig,
    center_to_origin,
    classical_mds,
    gather_observations,
    plan_probes,
    procrustes,
    refine_gd,
    solve_mpr,
    srls_localize,
)

__all__ = [
    "main",
    "run_linearity",
    "run_goodbits",
    "run_srls_vs_mds",
    "run_rsvd",
    "run_scaling",
    "run_design_refs",
]


class ConfigError(Exception):
    pass


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v != ""]


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v != ""]


def _bool(text):
    if isinstance(text, bool):
        return text
    if str(text).lower() in ("true", "1", "yes"):
        return True
    if str(text).lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, desk default, paper-scale override or None)
_COMMON = {
    "seed": (int, 0, None),
    "bits": (int, 8, None),
    "tau": (float, 0.0, None),
    "out": (str, "results", None),
    "paper_scale": (_bool, False, None),
    "figures": (_bool, True, None),
}

CONFIG_SPECS = {
    "linearity": {
        **_COMMON,
        "anchors": (_int_list, [3, 6, 9, 12, 15], None),
        "trials": (int, 5, 10),
        "signal_dim": (int, 1024, 4096),
        "rows": (int, 50, 100),
        "exposure_target": (int, 250, None),
        "noiseless": (_bool, False, None),
    },
    "goodbits": {
        **_COMMON,
        "anchors": (_int_list, [2, 5, 9, 12, 15], list(range(2, 16))),
        "trials": (int, 30, 100),
        "signal_dim": (int, 100, 100),
        "exposure_target": (int, 250, None),
        "noiseless": (_bool, False, None),
    },
    "srls-vs-mds": {
        **_COMMON,
        "anchors": (_int_list, [3, 6, 9, 12, 15], None),
        "trials": (int, 20, 100),
        "signal_dim": (int, 1024, 4096),
        "exposure_target": (int, 250, None),
        "noiseless": (_bool, False, None),
    },
    "rsvd": {
        **_COMMON,
        "anchors": (int, 5, None),
        "projections": (_int_list, [2, 5, 10, 20], None),
        "trials": (int, 5, 10),
        "rows": (int, 10, 10),
        "cols": (int, 1000, 10000),
        "density": (float, 0.1, None),
        "alpha": (float, 0.2, None),
        "exposure_target": (int, 250, None),
        "noiseless": (_bool, False, None),
    },
    "scaling": {
        **_COMMON,
        "keep_probability": (_float_list, [0.6, 0.9], None),
        "sizes": (_int_list, [10, 20, 40, 80], None),
        "trials": (int, 20, 50),
    },
    "design-refs": {
        **_COMMON,
        "anchors": (int, 9, None),
        "alpha": (float, 0.2, None),
        "signal_dim": (int, 1024, 4096),
        "frames": (int, 2, None),
        "density": (float, 0.25, None),
        "rows": (int, 64, 100),
    },
}


def parse_config_file(path):
    """Parse a key=value config file; raises ConfigError with line numbers."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            values[key] = (value.strip(), lineno)
    return values


def resolve_config(command, file_values, flag_values):
    """Defaults <- paper-scale overrides <- config file <- explicit flags."""
    spec = CONFIG_SPECS[command]
    cfg = {}

    def parse(key, raw, where):
        parser = spec[key][0]
        try:
            return parser(raw)
        except (ValueError, TypeError) as err:
            raise ConfigError(f"{where}: bad value for {key!r}: {err}")

    paper = False
    if "paper_scale" in file_values:
        raw, lineno = file_values["paper_scale"]
        paper = parse("paper_scale", raw, f"config line {lineno}")
    if flag_values.get("paper_scale"):
        paper = True

    for key, (_, desk, paper_default) in spec.items():
        cfg[key] = paper_default if (paper and paper_default is not None) else desk
    cfg["paper_scale"] = paper

    for key, (raw, lineno) in file_values.items():
        if key not in spec:
            raise ConfigError(f"config line {lineno}: unknown key {key!r} for {command}")
        cfg[key] = parse(key, raw, f"config line {lineno}")

    for key, value in flag_values.items():
        if value is None or key not in spec:
            continue
        cfg[key] = parse(key, value, f"flag --{key.replace('_', '-')}")
    cfg["paper_scale"] = paper
    return cfg


def config_hash(cfg):
    canon = ";".join(f"{k}={cfg[k]!r}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path, fieldnames, rows, cfg):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config-hash {config_hash(cfg)}\n")
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in fieldnames])


def _spawn_rng(*entropy):
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def _camera(bits, tau, noiseless):
    if noiseless:
        return CameraConfig(bits=bits, quantize=False, sensitivity_threshold=0.0)
    return CameraConfig(bits=bits, sensitivity_threshold=tau)


def _exposed_device(tm, probes, cam, target, noiseless):
    if noiseless:
        return SimulatedOPU(tm, cam), 1.0
    gain = auto_exposure(tm, probes, cam, target_max=target)
    opu = SimulatedOPU(tm, CameraConfig(
        bits=cam.bits,
        exposure_gain=gain,
        sensitivity_threshold=cam.sensitivity_threshold,
        binary_mode=cam.binary_mode,
        quantize=cam.quantize,
    ))
    return opu, gain


def _method_configs():
    return (("MDS", SolverConfig(gd_max_iters=0)), ("MDS-GD", SolverConfig()))


def run_linearity(cfg):
    """Additivity of recovered projections versus anchor count."""
    n, m = cfg["signal_dim"], cfg["rows"]
    per_method = {name: {k: [] for k in cfg["anchors"]} for name, _ in _method_configs()}
    for k_anchors in cfg["anchors"]:
        for t in range(cfg["trials"]):
            rng = _spawn_rng(cfg["seed"], k_anchors, t)
            tm = draw_transmission_matrix(m, n, seed=int(rng.integers(2**31)))
            x1, x2 = rng.standard_normal(n), rng.standard_normal(n)
            frames = [Frame(x1, 1), Frame(x2, 2), Frame(x1 + x2, 3)]
            refs = gaussian_references(k_anchors, n, seed=int(rng.integers(2**31)))
            _, inputs = plan_probes(frames, refs)
            cam = _camera(cfg["bits"], cfg["tau"], cfg["noiseless"])
            opu, _ = _exposed_device(
                tm, np.vstack(inputs), cam, cfg["exposure_target"], cfg["noiseless"]
            )
            observations = gather_observations(opu, frames, refs)
            for name, solver_cfg in _method_configs():
                res = solve_mpr(observations, solver_cfg)
                keep = res.retained()
                if not keep.any():
                    continue
                per_method[name][k_anchors].append(
                    linearity_error(
                        LinearityTriple(res.y[keep, 0], res.y[keep, 1], res.y[keep, 2])
                    )
                )
    rows = []
    for name, by_k in per_method.items():
        for k_anchors, errs in by_k.items():
            errs = np.asarray(errs)
            rows.append(
                {
                    "anchors": k_anchors,
                    "method": name,
                    "tau": cfg["tau"] if not cfg["noiseless"] else 0.0,
                    "mean_linearity_error": float(errs.mean()),
                    "stderr": float(errs.std(ddof=1) / np.sqrt(len(errs)))
                    if len(errs) > 1
                    else 0.0,
                    "trials": len(errs),
                }
            )
    rows.sort(key=lambda r: (r["method"], r["anchors"]))
    return rows


def run_goodbits(cfg):
    """Denoising of the squared magnitude, against the raw camera reading."""
    n = cfg["signal_dim"]
    methods = list(_method_configs())
    acc = {name: {k: [] for k in cfg["anchors"]} for name, _ in methods}
    acc["raw"] = {k: [] for k in cfg["anchors"]}
    for k_anchors in cfg["anchors"]:
        for t in range(cfg["trials"]):
            rng = _spawn_rng(cfg["seed"], k_anchors, t)
            tm = draw_transmission_matrix(1, n, seed=int(rng.integers(2**31)))
            xi = rng.standard_normal(n)
            frames = [Frame(xi, 1)]
            refs = gaussian_references(k_anchors, n, seed=int(rng.integers(2**31)))
            pairs, inputs = plan_probes(frames, refs)
            probes = np.vstack(inputs)
            cam = _camera(cfg["bits"], cfg["tau"], cfg["noiseless"])
            opu, gain = _exposed_device(
                tm, probes, cam, cfg["exposure_target"], cfg["noiseless"]
            )
            observations = gather_observations(opu, frames, refs)
            true_cam = gain * float(np.abs(tm.a @ xi) ** 2)
            for name, solver_cfg in methods:
                res = solve_mpr(observations, solver_cfg)
                est = float(np.abs(res.y[0, 0]) ** 2)
                acc[name][k_anchors].append(good_bits(true_cam, est))
            direct = pairs.index((0, k_anchors))
            reading, _ = opu.project(probes[direct])
            acc["raw"][k_anchors].append(good_bits(true_cam, float(reading[0, 0])))
    rows = []
    for name, by_k in acc.items():
        for k_anchors, vals in by_k.items():
            vals = np.asarray(vals)
            rows.append(
                {
                    "anchors": k_anchors,
                    "method": name,
                    "tau": cfg["tau"] if not cfg["noiseless"] else 0.0,
                    "mean_good_bits": float(vals.mean()),
                    "stderr": float(vals.std(ddof=1) / np.sqrt(len(vals)))
                    if len(vals) > 1
                    else 0.0,
                    "trials": len(vals),
                }
            )
    rows.sort(key=lambda r: (r["method"], r["anchors"]))
    return rows


def run_srls_vs_mds(cfg):
    """Localizing one point with known anchors versus localizing everything."""
    n = cfg["signal_dim"]
    acc = {"SR-LS-known-anchors": {}, "MDS-joint": {}}
    for k_anchors in cfg["anchors"]:
        snr_srls, snr_mds = [], []
        for t in range(cfg["trials"]):
            rng = _spawn_rng(cfg["seed"], k_anchors, t)
            tm = draw_transmission_matrix(1, n, seed=int(rng.integers(2**31)))
            xi = rng.standard_normal(n)
            frames = [Frame(xi, 1)]
            refs = gaussian_references(k_anchors, n, seed=int(rng.integers(2**31)))
            pairs, inputs = plan_probes(frames, refs)
            probes = np.vstack(inputs)
            cam = _camera(cfg["bits"], cfg["tau"], cfg["noiseless"])
            opu, gain = _exposed_device(
                tm, probes, cam, cfg["exposure_target"], cfg["noiseless"]
            )
            # ground truth points in camera units (row 0 of the device)
            x_cols = refs.column_matrix(frames[0])
            truth = np.sqrt(gain) * (tm.a @ x_cols)[0]
            true_pts = np.vstack([truth.real, truth.imag])
            target = true_pts[:, 0]

            intensities, masks = opu.project(probes)
            sig_pairs = [i for i, (q, r) in enumerate(pairs) if q == 0]
            observed = [i for i in sig_pairs if masks[i, 0]]
            if len(observed) < 3:
                continue
            anchor_pts = true_pts[:, [pairs[i][1] for i in observed]]
            dists = np.sqrt(intensities[observed, 0])
            u = srls_localize(anchor_pts, dists)
            err2 = float(np.sum((u - target) ** 2))
            snr_srls.append(10 * np.log10(np.sum(target**2) / max(err2, 1e-300)))

            observations = gather_observations(opu, frames, refs)
            solver_cfg = SolverConfig()
            ps = classical_mds(observations[0][0], solver_cfg)
            ps = refine_gd(observations[0][0], ps, solver_cfg)
            ps = center_to_origin(ps)
            rot = procrustes(true_pts[:, 1:], ps.points[:, 1:])
            est = rot @ ps.points[:, 0]
            err2 = float(np.sum((est - target) ** 2))
            snr_mds.append(10 * np.log10(np.sum(target**2) / max(err2, 1e-300)))
        acc["SR-LS-known-anchors"][k_anchors] = snr_srls
        acc["MDS-joint"][k_anchors] = snr_mds
    rows = []
    for name, by_k in acc.items():
        for k_anchors, vals in by_k.items():
            vals = np.asarray(vals)
            rows.append(
                {
                    "anchors": k_anchors,
                    "method": name,
                    "tau": cfg["tau"] if not cfg["noiseless"] else 0.0,
                    "mean_snr_db": float(vals.mean()) if vals.size else float("nan"),
                    "trials": int(vals.size),
                }
            )
    rows.sort(key=lambda r: (r["method"], r["anchors"]))
    return rows


def _planted_binary(rows, cols, density, rng):
    b = (rng.random((rows, cols)) < density).astype(float)
    # no all-zero rows: the device cannot localize a dark frame
    for i in range(rows):
        if not b[i].any():
            b[i, rng.integers(cols)] = 1.0
    return b


def run_rsvd(cfg, out_dir=None):
    """Reconstruction error of the device-sketched randomized SVD."""
    rows_out = []
    m, n = cfg["rows"], cfg["cols"]
    base_rng = _spawn_rng(cfg["seed"], 777)
    b = _planted_binary(m, n, cfg["density"], base_rng)
    for n_proj in cfg["projections"]:
        errs = []
        for t in range(cfg["trials"]):
            rng = _spawn_rng(cfg["seed"], n_proj, t)
            tm = draw_transmission_matrix(n_proj, n, seed=int(rng.integers(2**31)))
            cam = _camera(cfg["bits"], cfg["tau"], cfg["noiseless"])
            cam = CameraConfig(
                bits=cam.bits,
                sensitivity_threshold=cam.sensitivity_threshold,
                quantize=cam.quantize,
                binary_mode=True,
            )
            frames = [Frame(row, i + 1) for i, row in enumerate(b)]
            refs_probe = design_with_stats(
                frames,
                ReferenceDesignConfig(
                    flip_probability=cfg["alpha"],
                    anchor_count=cfg["anchors"],
                    seed=int(rng.integers(2**31)),
                ),
            )[0]
            _, inputs = plan_probes(frames, refs_probe, binary_mode=True)
            opu, _ = _exposed_device(
                tm, np.vstack(inputs), cam, cfg["exposure_target"], cfg["noiseless"]
            )
            rank = min(2 * n_proj, m, n)
            u, sigma, vt = rsvd_opu(
                b,
                rank,
                opu,
                anchor_count=cfg["anchors"],
                anchor_seed=int(rng.integers(2**31)),
                flip_probability=cfg["alpha"],
                n_projections=n_proj,
            )
            recon = u @ np.diag(sigma) @ vt
            errs.append(float(np.abs(b - recon).mean()))
        errs = np.asarray(errs)
        rows_out.append(
            {
                "projections": n_proj,
                "rank": min(2 * n_proj, m, n),
                "mean_entry_error": float(errs.mean()),
                "stderr": float(errs.std(ddof=1) / np.sqrt(len(errs)))
                if len(errs) > 1
                else 0.0,
                "trials": len(errs),
            }
        )
        if out_dir is not None and n_proj == cfg["projections"][-1]:
            export_factors(
                u,
                sigma,
                vt,
                os.path.join(out_dir, "rsvd_factors"),
                manifest={
                    "rank": int(min(2 * n_proj, m, n)),
                    "projections": int(n_proj),
                    "anchors": int(cfg["anchors"]),
                    "seed": int(cfg["seed"]),
                    "bits": int(cfg["bits"]),
                    "tau": float(cfg["tau"]),
                    "noiseless": bool(cfg["noiseless"]),
                    "matrix_shape": [int(m), int(n)],
                },
            )
    return rows_out


def run_scaling(cfg):
    """Distance-error scaling against the masked-quantized recovery bound."""
    rows = []
    for p in cfg["keep_probability"]:
        points = edm_error_scaling(
            p, cfg["bits"], cfg["sizes"], trials=cfg["trials"], seed=cfg["seed"]
        )
        for pt in points:
            rows.append(
                {
                    "keep_probability": pt.keep_probability,
                    "bits": pt.bits,
                    "n_points": pt.n_points,
                    "trials": pt.trials,
                    "mean_err_over_k": pt.mean_err_over_k,
                    "stderr": pt.stderr,
                    "normalized_error": pt.normalized,
                }
            )
    return rows


def run_design_refs(cfg, out_dir=None):
    """Generate a nested binary reference set and report its measurement health."""
    rng = _spawn_rng(cfg["seed"], 31)
    n = cfg["signal_dim"]
    frames = [
        Frame((rng.random(n) < cfg["density"]).astype(float), i + 1)
        for i in range(cfg["frames"])
    ]
    design_cfg = ReferenceDesignConfig(
        flip_probability=cfg["alpha"], anchor_count=cfg["anchors"], seed=cfg["seed"]
    )
    refs, retries = design_with_stats(frames, design_cfg)
    if out_dir is not None:
        save_reference_set(refs, os.path.join(out_dir, "reference_set.txt"))

    tm = draw_transmission_matrix(cfg["rows"], n, seed=int(rng.integers(2**31)))
    cam = CameraConfig(bits=cfg["bits"], sensitivity_threshold=cfg["tau"], binary_mode=True)
    _, inputs = plan_probes(frames, refs, binary_mode=True)
    probes = np.vstack(inputs)
    opu, _ = _exposed_device(tm, probes, cam, 250, noiseless=False)
    _, masks = opu.project(probes)
    return [
        {
            "anchors": cfg["anchors"],
            "alpha": cfg["alpha"],
            "signal_dim": n,
            "frames": cfg["frames"],
            "retries": retries,
            "masked_fraction": float(1.0 - masks.mean()),
        }
    ]


_FIELDS = {
    "linearity": ["anchors", "method", "tau", "mean_linearity_error", "stderr", "trials"],
    "goodbits": ["anchors", "method", "tau", "mean_good_bits", "stderr", "trials"],
    "srls-vs-mds": ["anchors", "method", "tau", "mean_snr_db", "trials"],
    "rsvd": ["projections", "rank", "mean_entry_error", "stderr", "trials"],
    "scaling": [
        "keep_probability",
        "bits",
        "n_points",
        "trials",
        "mean_err_over_k",
        "stderr",
        "normalized_error",
    ],
    "design-refs": [
        "anchors",
        "alpha",
        "signal_dim",
        "frames",
        "retries",
        "masked_fraction",
    ],
}

_PLOTTERS = {
    "linearity": plots.plot_linearity,
    "goodbits": plots.plot_goodbits,
    "srls-vs-mds": plots.plot_srls_vs_mds,
    "rsvd": plots.plot_rsvd,
    "scaling": plots.plot_scaling,
}


def _add_common_flags(sub):
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--bits", type=int)
    sub.add_argument("--tau", type=float)
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--paper-scale", action="store_true", dest="paper_scale")
    sub.add_argument("--no-figures", action="store_false", dest="figures", default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mprkit",
        description="Phase recovery experiments for intensity-only random projections",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linearity", help="linearity error vs anchor count")
    _add_common_flags(p)
    p.add_argument("--anchors", help="comma list of anchor counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--signal-dim", type=int, dest="signal_dim")
    p.add_argument("--rows", type=int)
    p.add_argument("--exposure-target", type=int, dest="exposure_target")
    p.add_argument("--noiseless", action="store_true", default=None)

    p = sub.add_parser("goodbits", help="magnitude denoising vs anchor count")
    _add_common_flags(p)
    p.add_argument("--anchors", help="comma list of anchor counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--signal-dim", type=int, dest="signal_dim")
    p.add_argument("--exposure-target", type=int, dest="exposure_target")
    p.add_argument("--noiseless", action="store_true", default=None)

    p = sub.add_parser("srls-vs-mds", help="known-anchor SR-LS vs joint MDS")
    _add_common_flags(p)
    p.add_argument("--anchors", help="comma list of anchor counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--signal-dim", type=int, dest="signal_dim")
    p.add_argument("--exposure-target", type=int, dest="exposure_target")
    p.add_argument("--noiseless", action="store_true", default=None)

    p = sub.add_parser("rsvd", help="randomized SVD through the device")
    _add_common_flags(p)
    p.add_argument("--anchors", type=int)
    p.add_argument("--projections", help="comma list of projection counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--exposure-target", type=int, dest="exposure_target")
    p.add_argument("--noiseless", action="store_true", default=None)

    p = sub.add_parser("scaling", help="distance-error scaling vs point count")
    _add_common_flags(p)
    p.add_argument("--keep-probability", dest="keep_probability", help="comma list")
    p.add_argument("--sizes", help="comma list of point counts")
    p.add_argument("--trials", type=int)

    p = sub.add_parser("design-refs", help="generate nested binary references")
    _add_common_flags(p)
    p.add_argument("--anchors", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--signal-dim", type=int, dest="signal_dim")
    p.add_argument("--frames", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--rows", type=int)

    return parser


_RUNNERS = {
    "linearity": lambda cfg, out: run_linearity(cfg),
    "goodbits": lambda cfg, out: run_goodbits(cfg),
    "srls-vs-mds": lambda cfg, out: run_srls_vs_mds(cfg),
    "rsvd": run_rsvd,
    "scaling": lambda cfg, out: run_scaling(cfg),
    "design-refs": run_design_refs,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command

    flag_values = {
        k: v for k, v in vars(args).items() if k not in ("command", "config")
    }
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = resolve_config(command, file_values, flag_values)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    try:
        rows = _RUNNERS[command](cfg, out_dir)
    except Exception as err:
        print(f"error: {command} failed: {err}", file=sys.stderr)
        return 1

    stem = command.replace("-", "_")
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    write_csv(csv_path, _FIELDS[command], rows, cfg)
    with open(os.path.join(out_dir, f"{stem}_config.json"), "w") as fh:
        json.dump({k: cfg[k] for k in sorted(cfg)}, fh, indent=2, default=str)
    print(f"wrote {csv_path}")

    if cfg["figures"] and command in _PLOTTERS:
        fig_path = os.path.join(out_dir, f"{stem}.png")
        _PLOTTERS[command](rows, fig_path)
        print(f"wrote {fig_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
