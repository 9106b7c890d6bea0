"""Binary reference anchors for devices that only accept 0/1 inputs.

A micro-mirror input stage can only display binary vectors, so every probed
difference between two columns of [frame, r_1, ..., r_K] must itself be
binary. Growing the anchor supports as a nested chain on top of the union of
all frame supports guarantees exactly that.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import Frame, ReferenceSet
from .opusim import OpticalProcessor

__all__ = [
    "ReferenceDesignConfig",
    "AnchorSaturatedError",
    "design_binary_references",
    "design_with_stats",
    "gaussian_references",
    "estimate_sensitivity_threshold",
    "save_reference_set",
    "load_reference_set",
]


@dataclass(frozen=True)
class ReferenceDesignConfig:
    """Knobs for the randomized nested-support construction."""

    flip_probability: float = 0.2
    anchor_count: int = 9
    seed: int = 0
    max_retries: int = 10

    def __post_init__(self):
        if not 0 < self.flip_probability < 1:
            raise ValueError("flip_probability must lie in (0, 1)")
        if self.anchor_count < 2:
            raise ValueError("anchor_count must be >= 2")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class AnchorSaturatedError(RuntimeError):
    """An anchor hit all-ones before the chain was complete."""

    def __init__(self, anchor_index: int):
        self.anchor_index = anchor_index
        super().__init__(
            f"anchor {anchor_index} saturated to all-ones before the chain "
            "completed; lower flip_probability or the anchor count"
        )


def _grow_chain(frames, cfg: ReferenceDesignConfig, rng):
    n = frames[0].dim
    base = np.zeros(n, dtype=float)
    for f in frames:
        base = np.maximum(base, (f.values != 0).astype(float))

    chain = []
    current = base
    # chain covers anchors 1 .. K-1; the origin is appended by the caller
    for q in range(1, cfg.anchor_count):
        anchor = current.copy()
        zeros = np.flatnonzero(anchor == 0)
        flips = zeros[rng.random(zeros.size) < cfg.flip_probability]
        anchor[flips] = 1.0
        if anchor.all() and q < cfg.anchor_count - 1:
            raise AnchorSaturatedError(q)
        chain.append(anchor)
        current = anchor
    return chain


def design_with_stats(frames, cfg: ReferenceDesignConfig):
    """Like :func:`design_binary_references` but also returns the retry count."""
    frames = list(frames)
    if not frames:
        raise ValueError("need at least one frame")
    for f in frames:
        if not f.is_binary:
            raise ValueError(f"frame {f.frame_index} is not binary")

    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.max_retries + 1)
    last_err = None
    for attempt, ss in enumerate(seeds):
        try:
            chain = _grow_chain(frames, cfg, np.random.default_rng(ss))
        except AnchorSaturatedError as err:
            last_err = err
            continue
        anchors = chain + [np.zeros(frames[0].dim)]
        return ReferenceSet(anchors=tuple(anchors)), attempt
    raise last_err


def design_binary_references(frames, cfg: ReferenceDesignConfig) -> ReferenceSet:
    """Build K binary anchors whose supports nest over the frame supports.

    Anchor q starts from the support of (sum of frames + previous anchors)
    and flips each remaining zero to one with the configured probability, so
    r_1 - frame and r_{q+1} - r_q stay in {0,1}^N for every frame. The last
    anchor is the origin. Regenerates with fresh sub-seeds (up to
    ``max_retries`` times) when an anchor saturates to all-ones.
    """
    refs, _ = design_with_stats(frames, cfg)
    return refs


def gaussian_references(count: int, dim: int, seed) -> ReferenceSet:
    """Standard Gaussian anchors (plus the origin) for simulation studies."""
    if count < 2:
        raise ValueError("need at least 2 anchors")
    rng = np.random.default_rng(seed)
    anchors = [rng.standard_normal(dim) for _ in range(count - 1)]
    anchors.append(np.zeros(dim))
    return ReferenceSet(anchors=tuple(anchors))


def estimate_sensitivity_threshold(
    opu: OpticalProcessor, repeats: int = 10, statistic: str = "mode"
) -> float:
    """Estimate the camera floor by projecting the all-zero signal.

    Any nonzero reading for a dark input is sensor floor, so the chosen
    statistic (min, mode, or mean) of the repeated readings estimates the
    threshold below which measurements should be discarded.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    zero = np.zeros((repeats, opu.input_dim))
    readings, _ = opu.project(zero)
    flat = np.asarray(readings).ravel()
    if statistic == "min":
        return float(flat.min())
    if statistic == "mean":
        return float(flat.mean())
    if statistic == "mode":
        return float(stats.mode(flat, keepdims=False).mode)
    raise ValueError(f"unknown statistic {statistic!r}; use min, mode, or mean")


def save_reference_set(refs: ReferenceSet, path) -> None:
    """Plain-text dump: one line per anchor, contiguous 0/1 digits."""
    with open(path, "w") as fh:
        for anchor in refs.anchors:
            if not np.all((anchor == 0) | (anchor == 1)):
                raise ValueError("text format only supports binary anchors")
            fh.write("".join("1" if v else "0" for v in anchor) + "\n")


def load_reference_set(path) -> ReferenceSet:
    anchors = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                anchors.append(np.array([float(c) for c in line]))
    return ReferenceSet(anchors=tuple(anchors))
