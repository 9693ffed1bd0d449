"""Prefilter-plus-convolution resampling for 1-D signals and 2-D images.

Any compact-support kernel on ``(0, m+1)`` drives the same pipeline: invert
its integer-sample filter, run the inverse over the data to get expansion
coefficients, then anchor shifted kernel copies at the coefficients and
read the continuum off wherever the output grid needs it.  Kernels whose
integer samples already form a unit impulse (cubic convolution, linear
interpolation) degenerate gracefully: their prefilter is a pure shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import PiecewisePolyKernel, TabulatedKernel, sample_at_integers
from .filters import BoundaryMode, SampleTrain, convolve_along_axis, invert_fir
from .image import GrayImage

__all__ = ["ResampleConfig", "interpolate_1d", "enlarge_image"]


@dataclass(frozen=True, eq=False)
class ResampleConfig:
    """Kernel, integer upscale factor, and boundary handling."""

    kernel: PiecewisePolyKernel | TabulatedKernel
    factor: int = 2
    boundary: BoundaryMode = BoundaryMode.MIRROR

    def __post_init__(self):
        if self.factor < 2:
            raise ValueError("upscale factor must be >= 2")


def _phase_weights(kernel, factor: int) -> list[np.ndarray]:
    """Kernel values needed for each output phase p/factor.

    ``weights[p][d] = kernel(d + p/factor)`` for ``d = 0..m``; the output
    sample at ``i + p/R`` is the dot product of those weights with the
    coefficients at ``i - d``.
    """
    m = kernel.order
    d = np.arange(m + 1, dtype=float)
    return [kernel.eval(d + p / factor) for p in range(factor)]


def _coefficients(arr: np.ndarray, kernel, boundary: BoundaryMode, axis: int):
    """Expansion coefficients along ``axis`` with an m-sample left margin."""
    m = kernel.order
    inv = invert_fir(sample_at_integers(kernel), eps=0.0, max_taps=257)
    return convolve_along_axis(arr, inv, axis=axis, boundary=boundary, keep_lo=m)


def _upsample_axis(
    arr: np.ndarray,
    kernel,
    factor: int,
    boundary: BoundaryMode,
    axis: int,
    n_out: int,
) -> np.ndarray:
    """Evaluate the kernel expansion at j/factor for j = 0..n_out-1."""
    m = kernel.order
    n = arr.shape[axis]
    coef = _coefficients(arr, kernel, boundary, axis)  # index i holds time i-m
    coef = np.moveaxis(coef, axis, -1)
    weights = _phase_weights(kernel, factor)

    out_shape = coef.shape[:-1] + (n_out,)
    out = np.zeros(out_shape)
    for p in range(factor):
        wp = weights[p]
        idx = np.arange(p, n_out, factor)
        base = idx // factor  # integer part i of the abscissa
        acc = np.zeros(coef.shape[:-1] + (len(idx),))
        for d, wd in enumerate(wp):
            if wd != 0.0:
                acc += wd * coef[..., base - d + m]
        out[..., idx] = acc
    return np.moveaxis(out, -1, axis)


def interpolate_1d(x: SampleTrain, cfg: ResampleConfig) -> SampleTrain:
    """Upsample a signal by the integer factor R.

    Output covers the same time span on an R-times finer grid: length
    ``(len(x)-1)*R + 1``, with the original samples reproduced at indices
    ``j*R``.
    """
    if len(x) < 2:
        raise ValueError("need at least 2 samples")
    n_out = (len(x) - 1) * cfg.factor + 1
    values = _upsample_axis(
        x.values, cfg.kernel, cfg.factor, cfg.boundary, axis=0, n_out=n_out
    )
    return SampleTrain(values, origin=x.origin * cfg.factor)


def enlarge_image(img: GrayImage, cfg: ResampleConfig) -> GrayImage:
    """Separable upscale of a grayscale image by the integer factor R.

    A w-pixel row becomes R*w pixels: the interpolation lattice covers the
    original span and the trailing R-1 samples per axis are read off the
    mirror-extended continuum, keeping even output coordinates aligned with
    the input grid.  Row and column passes commute.
    """
    r = cfg.factor
    rows = _upsample_axis(
        img.pixels, cfg.kernel, r, cfg.boundary, axis=1, n_out=r * img.width
    )
    both = _upsample_axis(
        rows, cfg.kernel, r, cfg.boundary, axis=0, n_out=r * img.height
    )
    return GrayImage(both)
