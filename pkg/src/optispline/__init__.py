"""Optimized compact-support spline kernels and a resampling pipeline.

Construct polynomial B-splines exactly, design kernels whose interpolating
form best matches a target filter in least squares, and push 1-D signals
and 2-D images through the shared prefilter-plus-convolution pipeline.
"""

from .bspline import (
    MAX_ORDER,
    PiecewisePolyKernel,
    TabulatedKernel,
    cardinal_from_basis,
    eval_kernel,
    make_bspline,
    make_keys_kernel,
    read_kernel_csv,
    sample_at_integers,
    tabulate,
    write_kernel_csv,
)
from .design import (
    ConstraintViolation,
    DesignSpec,
    NormalSystem,
    OptimalityReport,
    OptimizedKernel,
    SingularSystem,
    TargetFilter,
    assemble_kernel,
    build_normal_system,
    build_v,
    build_w,
    design_optimized_spline,
    error_functional,
    load_design_spec,
    snr_db,
    solve_segments,
    verify_optimality,
)
from .filters import (
    BoundaryMode,
    FirFilter,
    InverseTaps,
    NotAppropriate,
    SampleTrain,
    autocorrelate,
    convolve,
    flip,
    invert_fir,
    prefilter,
)
from .image import GrayImage, downsample, psnr, read_pgm, write_pgm
from .resample import ResampleConfig, enlarge_image, interpolate_1d

__version__ = "0.1.0"

__all__ = [
    "MAX_ORDER",
    "PiecewisePolyKernel",
    "TabulatedKernel",
    "SampleTrain",
    "FirFilter",
    "InverseTaps",
    "BoundaryMode",
    "NotAppropriate",
    "GrayImage",
    "TargetFilter",
    "DesignSpec",
    "NormalSystem",
    "OptimizedKernel",
    "OptimalityReport",
    "ResampleConfig",
    "SingularSystem",
    "ConstraintViolation",
    "make_bspline",
    "make_keys_kernel",
    "eval_kernel",
    "sample_at_integers",
    "tabulate",
    "cardinal_from_basis",
    "write_kernel_csv",
    "read_kernel_csv",
    "invert_fir",
    "flip",
    "convolve",
    "autocorrelate",
    "prefilter",
    "build_v",
    "build_w",
    "build_normal_system",
    "solve_segments",
    "assemble_kernel",
    "design_optimized_spline",
    "error_functional",
    "snr_db",
    "verify_optimality",
    "load_design_spec",
    "interpolate_1d",
    "enlarge_image",
    "downsample",
    "psnr",
    "read_pgm",
    "write_pgm",
]
