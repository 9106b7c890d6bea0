"""Simulated optical processing unit.

Forward model: a hidden complex Gaussian transmission matrix A mixes the
input, the camera records the masked, quantized intensity

    b = w * round(g * |A x|^2)   clamped to [0, 2^b - 1],

with w = 0 wherever the quantized reading falls at or below the sensitivity
threshold. The solver only ever talks to the abstract device interface; the
matrix itself stays inside the simulator.
"""

import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "TransmissionMatrix",
    "CameraConfig",
    "OpticalProcessor",
    "SimulatedOPU",
    "draw_transmission_matrix",
    "measure_intensity",
    "check_saturation",
    "auto_exposure",
    "additive_quantization_noise_model",
    "save_transmission_matrix",
    "load_transmission_matrix",
]

_DUMP_MAGIC = b"OPUTMTX\x00"
_DUMP_VERSION = 1


@dataclass(frozen=True)
class TransmissionMatrix:
    """Hidden M x N complex mixing matrix and the seed that produced it."""

    a: np.ndarray
    seed: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        if a.ndim != 2:
            raise ValueError("transmission matrix must be 2-D")
        object.__setattr__(self, "a", a)

    @property
    def shape(self):
        return self.a.shape


@dataclass(frozen=True)
class CameraConfig:
    """Camera model: bit depth, exposure gain, sensitivity floor.

    ``quantize=False`` switches the sensor to an idealized infinite-precision
    mode (no rounding, no clamping); ``dark_level`` adds a constant offset to
    the scaled intensity, emulating the dark floor of a physical sensor.
    """

    bits: int = 8
    exposure_gain: float = 1.0
    sensitivity_threshold: float = 0.0
    binary_mode: bool = False
    quantize: bool = True
    dark_level: float = 0.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.exposure_gain <= 0:
            raise ValueError("exposure_gain must be positive")
        if self.sensitivity_threshold < 0:
            raise ValueError("sensitivity_threshold must be >= 0")

    @property
    def max_level(self) -> int:
        return 2 ** self.bits - 1


def draw_transmission_matrix(m: int, n: int, seed) -> TransmissionMatrix:
    """Draw an M x N matrix with iid standard complex Gaussian entries.

    Each entry is g1 + j*g2 with independent unit-variance real Gaussians,
    so the per-component variance is 1 (total 2 per complex entry).
    """
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return TransmissionMatrix(a=a, seed=seed)


def _apply_camera(raw: np.ndarray, cam: CameraConfig):
    """Scale, quantize, and mask raw intensities; returns (readings, mask)."""
    scaled = cam.exposure_gain * raw + cam.dark_level
    if cam.quantize:
        # round half away from zero, then clamp to the sensor range
        values = np.clip(np.floor(scaled + 0.5), 0, cam.max_level)
    else:
        values = scaled
    mask = (values > cam.sensitivity_threshold).astype(np.uint8)
    return values * mask, mask


def measure_intensity(tm: TransmissionMatrix, x: np.ndarray, cam: CameraConfig):
    """One device shot: masked, quantized |A x|^2 per output row.

    Returns (intensities, mask), both length M; masked entries read zero.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != tm.shape[1]:
        raise ValueError(f"input length {x.shape} does not match N={tm.shape[1]}")
    if cam.binary_mode and not np.all((x == 0) | (x == 1)):
        raise ValueError("binary-mode device accepts only 0/1 inputs")
    raw = np.abs(tm.a @ x) ** 2
    return _apply_camera(raw, cam)


def check_saturation(intensities: np.ndarray, cam: CameraConfig) -> float:
    """Fraction of readings pinned at the top of the quantizer range."""
    v = np.asarray(intensities)
    if v.size == 0:
        return 0.0
    if not cam.quantize:
        return 0.0
    return float(np.count_nonzero(v == cam.max_level) / v.size)


def auto_exposure(
    tm: TransmissionMatrix,
    probe_inputs: np.ndarray,
    cam: CameraConfig,
    target_max: int = 250,
    max_iter: int = 80,
) -> float:
    """Find the exposure gain putting the brightest probe at ``target_max``.

    Bisects on the gain until the maximum quantized reading over the probe
    set equals the target, which leaves headroom below saturation.
    """
    probes = np.atleast_2d(np.asarray(probe_inputs, dtype=float))
    if probes.shape[0] == 0:
        raise ValueError("probe set must be nonempty")
    raw_max = float(np.max(np.abs(tm.a @ probes.T) ** 2))
    if raw_max <= 0:
        raise ValueError("all probe intensities are zero; no exposure gain exists")

    def peak(gain):
        return min(np.floor(gain * raw_max + 0.5), cam.max_level)

    lo, hi = 0.0, target_max / raw_max
    while peak(hi) < target_max:
        hi *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if peak(mid) < target_max:
            lo = mid
        else:
            hi = mid
        if peak(hi) == target_max:
            break
    if peak(hi) != target_max:
        raise ValueError(f"bisection failed to reach target_max={target_max}")
    return hi


def additive_quantization_noise_model(bits: int, kappa: float):
    """Idealized quantization noise: iid uniform on +-kappa / (2 (2^b - 1)).

    Returns a sampler(shape, rng) producing noise for the given bit depth and
    distance upper bound; used by the error-scaling experiments in place of
    the rounding quantizer.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    half_width = kappa / (2.0 * (2 ** bits - 1))

    def sampler(shape, rng):
        return rng.uniform(-half_width, half_width, size=shape)

    sampler.half_width = half_width
    return sampler


class OpticalProcessor(ABC):
    """What the recovery pipeline is allowed to see of a projection device."""

    @property
    @abstractmethod
    def input_dim(self) -> int: ...

    @property
    @abstractmethod
    def output_dim(self) -> int: ...

    @property
    @abstractmethod
    def camera(self) -> CameraConfig: ...

    @abstractmethod
    def project(self, inputs: np.ndarray):
        """Measure a batch of P input vectors.

        ``inputs`` is (P, N); returns (intensities, masks), both (P, M).
        """


class SimulatedOPU(OpticalProcessor):
    """In-process device: hidden transmission matrix plus camera model."""

    def __init__(self, tm: TransmissionMatrix, cam: CameraConfig):
        self._tm = tm
        self._cam = cam

    @property
    def input_dim(self) -> int:
        return self._tm.shape[1]

    @property
    def output_dim(self) -> int:
        return self._tm.shape[0]

    @property
    def camera(self) -> CameraConfig:
        return self._cam

    def with_camera(self, cam: CameraConfig) -> "SimulatedOPU":
        return SimulatedOPU(self._tm, cam)

    def with_exposure(self, gain: float) -> "SimulatedOPU":
        return SimulatedOPU(self._tm, replace(self._cam, exposure_gain=gain))

    def project(self, inputs: np.ndarray):
        x = np.atleast_2d(np.asarray(inputs, dtype=float))
        if x.shape[1] != self.input_dim:
            raise ValueError(
                f"input length {x.shape[1]} does not match N={self.input_dim}"
            )
        if self._cam.binary_mode and not np.all((x == 0) | (x == 1)):
            raise ValueError("binary-mode device accepts only 0/1 inputs")
        raw = np.abs(x @ self._tm.a.T) ** 2
        return _apply_camera(raw, self._cam)


def save_transmission_matrix(tm: TransmissionMatrix, path) -> None:
    """Binary dump: magic, version, M, N, seed header then interleaved re/im."""
    m, n = tm.shape
    header = _DUMP_MAGIC + struct.pack("<IQQq", _DUMP_VERSION, m, n, int(tm.seed))
    interleaved = np.empty((m, n, 2), dtype="<f8")
    interleaved[..., 0] = tm.a.real
    interleaved[..., 1] = tm.a.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(interleaved.tobytes(order="C"))


def load_transmission_matrix(path) -> TransmissionMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _DUMP_MAGIC:
            raise ValueError("not a transmission-matrix dump (bad magic)")
        version, m, n, seed = struct.unpack("<IQQq", fh.read(28))
        if version != _DUMP_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        data = np.frombuffer(fh.read(m * n * 2 * 8), dtype="<f8").reshape(m, n, 2)
    a = data[..., 0] + 1j * data[..., 1]
    return TransmissionMatrix(a=a, seed=seed)
