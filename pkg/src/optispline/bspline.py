"""Compact-support polynomial spline kernels.

A polynomial B-spline of order ``m`` is the alternating sum of shifted
one-sided power functions ``t^m/m! * 1{t>0}``; it is a piecewise polynomial
supported exactly on ``(0, m+1)``.  This module builds those kernels with
exact rational piece coefficients, samples them at integers, tabulates them
on fine uniform grids, and constructs the interpolating (cardinal) kernel
obtained by convolving a basis kernel with the inverse of its integer-sample
filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .filters import FirFilter, InverseTaps, invert_fir

MAX_ORDER = 15

__all__ = [
    "MAX_ORDER",
    "PiecewisePolyKernel",
    "TabulatedKernel",
    "make_bspline",
    "make_keys_kernel",
    "eval_kernel",
    "sample_at_integers",
    "tabulate",
    "cardinal_from_basis",
    "write_kernel_csv",
    "read_kernel_csv",
]


@dataclass(frozen=True, eq=False)
class PiecewisePolyKernel:
    """Kernel made of one degree-<=m polynomial per unit interval of [0, m+1].

    ``pieces[k]`` holds ascending-power coefficients of the polynomial on
    ``[k, k+1)`` in the local variable ``s = t - k``.  The kernel evaluates
    to 0 for ``t <= 0`` and ``t >= m+1``.
    """

    order: int
    pieces: tuple[tuple[float, ...], ...]
    support_length: int = field(init=False)

    def __post_init__(self):
        if len(self.pieces) != self.order + 1:
            raise ValueError(
                f"order {self.order} kernel needs {self.order + 1} pieces, "
                f"got {len(self.pieces)}"
            )
        object.__setattr__(self, "support_length", self.order + 1)

    def eval(self, t):
        """Evaluate at scalar or array ``t`` (exact Horner per piece)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        inside = (t > 0.0) & (t < self.support_length)
        if np.any(inside):
            ti = t[inside]
            piece = np.floor(ti).astype(int)
            s = ti - piece
            vals = np.zeros_like(ti)
            for k, coeffs in enumerate(self.pieces):
                sel = piece == k
                if np.any(sel):
                    vals[sel] = _horner(coeffs, s[sel])
            out[inside] = vals
        return float(out[0]) if scalar else out

    def eval_derivative(self, t, d=1):
        """One-sided derivative of order ``d``; right limits at knots."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        inside = (t >= 0.0) & (t < self.support_length)
        if np.any(inside):
            ti = t[inside]
            piece = np.floor(ti).astype(int)
            s = ti - piece
            vals = np.zeros_like(ti)
            for k, coeffs in enumerate(self.pieces):
                sel = piece == k
                if np.any(sel):
                    vals[sel] = _horner(_poly_derivative(coeffs, d), s[sel])
            out[inside] = vals
        return float(out[0]) if scalar else out

    def left_derivative(self, t, d=1):
        """Left-limit derivative at a knot, from the piece ending at ``t``."""
        k = int(round(t)) - 1
        if not 0 <= k <= self.order:
            return 0.0
        return float(_horner(_poly_derivative(self.pieces[k], d), np.array([1.0]))[0])


def _horner(coeffs, s):
    acc = np.full_like(s, coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * s + c
    return acc


def _poly_derivative(coeffs, d):
    c = list(coeffs)
    for _ in range(d):
        c = [j * c[j] for j in range(1, len(c))]
        if not c:
            return (0.0,)
    return tuple(c)


@dataclass(frozen=True, eq=False)
class TabulatedKernel:
    """Kernel sampled on a uniform grid of ``g`` points per unit interval.

    ``samples[j]`` is the value at ``t = start + j/g``.  Basis kernels live
    on ``[0, m+1]`` (``start = 0``); interpolating kernels built from them
    live on a symmetric window around 0.  ``centered`` only affects how the
    abscissa is presented on CSV export (shift by -(m+1)/2); the math path
    always uses the stored ``start``.
    """

    order: int
    g: int
    samples: np.ndarray
    start: float = 0.0
    centered: bool = False

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def grid_step(self) -> float:
        return 1.0 / self.g

    @property
    def support_length(self) -> int:
        return self.order + 1

    def grid_t(self) -> np.ndarray:
        return self.start + np.arange(len(self.samples)) / self.g

    def eval(self, t):
        """Evaluate at ``t``: exact on grid points, linear interp between."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        u = (t - self.start) * self.g
        n = len(self.samples)
        out = np.zeros_like(t)
        inside = (u >= 0.0) & (u <= n - 1)
        if np.any(inside):
            ui = u[inside]
            j = np.floor(ui).astype(int)
            j = np.minimum(j, n - 2)
            frac = ui - j
            near = np.abs(frac - np.round(frac)) < 1e-9
            interp = (1.0 - frac) * self.samples[j] + frac * self.samples[j + 1]
            exact = self.samples[np.clip(j + np.round(frac).astype(int), 0, n - 1)]
            out[inside] = np.where(near, exact, interp)
        return float(out[0]) if scalar else out


def make_bspline(m: int) -> PiecewisePolyKernel:
    """Polynomial B-spline of order ``m`` with exact piece coefficients.

    The alternating sum of shifted one-sided powers is rearranged per unit
    interval with rational arithmetic, so the float coefficients carry no
    cancellation error even at the highest supported order.
    """
    if not 0 <= m <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {m}")
    fact = math.factorial(m)
    pieces = []
    for k in range(m + 1):
        coeffs = [Fraction(0)] * (m + 1)
        for n in range(k + 1):
            c = Fraction((-1) ** n * math.comb(m + 1, n), fact)
            shift = k - n
            # (s + shift)^m expanded in ascending powers of s
            for j in range(m + 1):
                coeffs[j] += c * math.comb(m, j) * Fraction(shift) ** (m - j)
        pieces.append(tuple(float(c) for c in coeffs))
    return PiecewisePolyKernel(order=m, pieces=tuple(pieces))


def make_keys_kernel(a: float = -0.5) -> PiecewisePolyKernel:
    """Cubic convolution kernel (Keys), shifted onto the [0, 4] support.

    The classic centered form lives on (-2, 2); here it is presented on
    (0, 4) like every other kernel so the same resampling pipeline applies.
    Its integer samples are a pure unit impulse, so the prefilter it induces
    is just a shift.
    """
    # centered form: |s|<=1: (a+2)|s|^3-(a+3)|s|^2+1 ; 1<|s|<2: a(|s|^3-5|s|^2+8|s|-4)
    pieces = []
    for k in range(4):
        # local s in [0,1), global t = k + s, centered x = t - 2
        nodes = np.array([0.0, 0.25, 0.5, 0.75])
        x = np.abs(k + nodes - 2.0)
        y = np.where(
            x <= 1.0,
            (a + 2.0) * x**3 - (a + 3.0) * x**2 + 1.0,
            a * (x**3 - 5.0 * x**2 + 8.0 * x - 4.0),
        )
        y[x >= 2.0] = 0.0
        coeffs = np.linalg.solve(np.vander(nodes, 4, increasing=True), y)
        pieces.append(tuple(float(c) for c in coeffs))
    return PiecewisePolyKernel(order=3, pieces=tuple(pieces))


def eval_kernel(kernel, t):
    """Evaluate any kernel (piecewise-polynomial or tabulated) at ``t``."""
    return kernel.eval(t)


def sample_at_integers(kernel) -> FirFilter:
    """Integer samples ``kernel(1), ..., kernel(m)`` as a discrete filter.

    The endpoint samples at 0 and m+1 vanish by compact support and are
    dropped; the returned filter starts at time index 1 so that prefiltering
    with its inverse aligns the resampling pipeline.
    """
    m = kernel.order
    if isinstance(kernel, TabulatedKernel) and abs(kernel.start) > 1e-12:
        raise ValueError("integer sampling expects a kernel supported on [0, m+1]")
    if m == 0:
        # no interior integers; the discrete filter is the unit impulse
        return FirFilter(np.array([1.0]), origin=0)
    taps = np.array([kernel.eval(float(n)) for n in range(1, m + 1)])
    return FirFilter(taps, origin=1)


def tabulate(kernel: PiecewisePolyKernel, g: int) -> TabulatedKernel:
    """Sample a piecewise-polynomial kernel at ``t = j/g`` over [0, m+1]."""
    if g < 2:
        raise ValueError("grid must have at least 2 samples per unit interval")
    m = kernel.order
    t = np.arange(g * (m + 1) + 1) / g
    return TabulatedKernel(order=m, g=g, samples=kernel.eval(t))


def cardinal_from_basis(kernel, g: int = 1024, n_taps: int = 64) -> TabulatedKernel:
    """Interpolating kernel: basis convolved with its inverse sample filter.

    ``n_taps`` is the per-side truncation of the inverse filter; the result
    is tabulated on a symmetric window wide enough to hold every shifted
    copy of the basis that a kept inverse tap touches.  The outcome depends
    only on the kernel's order, not on which basis of that order seeded it.
    """
    m = kernel.order
    inv = invert_fir(sample_at_integers(kernel), eps=0.0, max_taps=2 * n_taps + 1)
    half = n_taps + math.ceil((m + 1) / 2) + 1
    t = -half + np.arange(2 * half * g + 1) / g
    acc = np.zeros_like(t)
    for i, a in enumerate(inv.taps):
        if a != 0.0:
            acc += a * kernel.eval(t - (inv.origin + i))
    return TabulatedKernel(order=m, g=g, samples=acc, start=float(-half))


def write_kernel_csv(kernel: TabulatedKernel, path) -> None:
    """CSV export, header ``t,value``, full double precision."""
    shift = (kernel.order + 1) / 2.0 if kernel.centered else 0.0
    with open(path, "w") as f:
        f.write("t,value\n")
        for t, v in zip(kernel.grid_t(), kernel.samples):
            f.write(f"{t - shift:.17g},{v:.17g}\n")


def read_kernel_csv(path) -> TabulatedKernel:
    """Load a ``t,value`` table back into a kernel.

    The grid must be uniform.  Tables exported in centered presentation
    (symmetric about 0 with integer total support) are re-anchored to
    ``[0, m+1]``.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise ValueError(f"{path}: expected a t,value table")
    t, v = data[:, 0], data[:, 1]
    steps = np.diff(t)
    step = steps.mean()
    if step <= 0 or np.max(np.abs(steps - step)) > 1e-9:
        raise ValueError(f"{path}: grid is not uniform")
    g = int(round(1.0 / step))
    if abs(g * step - 1.0) > 1e-9:
        raise ValueError(f"{path}: grid step is not a unit fraction")
    length = t[-1] - t[0]
    m = int(round(length)) - 1
    if abs(length - (m + 1)) > 1e-6 or m < 0:
        raise ValueError(f"{path}: support does not span an integer length")
    start = t[0]
    if abs(start + length / 2.0) < 1e-9:  # centered presentation
        start = 0.0
    elif abs(start) > 1e-9:
        raise ValueError(f"{path}: kernel must start at 0 or be centered")
    return TabulatedKernel(order=m, g=g, samples=v, start=start)
