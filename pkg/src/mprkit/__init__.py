"""Phase recovery for intensity-only optical random projections.

Simulates a camera-limited random projection device, recovers the lost
phase of its complex measurements through Euclidean distance geometry, and
ships the evaluation metrics and randomized-SVD application built on top.
"""

from .core import (
    DistanceObservation,
    Frame,
    PointSet,
    RecoveredProjections,
    ReferenceSet,
    centered_gram,
    kappa_operator,
)
from .metrics import LinearityTriple, edm_error_scaling, good_bits, linearity_error
from .opusim import (
    CameraConfig,
    OpticalProcessor,
    SimulatedOPU,
    TransmissionMatrix,
    auto_exposure,
    check_saturation,
    draw_transmission_matrix,
    measure_intensity,
)
from .refdesign import (
    ReferenceDesignConfig,
    design_binary_references,
    estimate_sensitivity_threshold,
    gaussian_references,
)
from .rsvd import rsvd_opu, rsvd_prototype
from .solver import (
    SolverConfig,
    build_distance_matrix,
    classical_mds,
    procrustes,
    recover_projections,
    refine_gd,
    solve_mpr,
    squared_stress,
    srls_localize,
)

__version__ = "0.1.0"
