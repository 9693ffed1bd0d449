"""Discrete-time filtering: FIR filters, stable two-sided inversion,
convolution with origin bookkeeping, and signal prefiltering.

A finite filter has a stable two-sided inverse exactly when its tap
polynomial has no root on the unit circle; the inverse is realized by
splitting the roots into causal (outside the circle) and anticausal
(inside) geometric series and convolving the pieces.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import oaconvolve

__all__ = [
    "BoundaryMode",
    "FirFilter",
    "InverseTaps",
    "NotAppropriate",
    "SampleTrain",
    "invert_fir",
    "flip",
    "convolve",
    "autocorrelate",
    "prefilter",
    "convolve_along_axis",
]

UNIT_CIRCLE_TOL = 1e-9


class NotAppropriate(ValueError):
    """The filter has a zero on the unit circle: no stable inverse exists."""


class BoundaryMode(Enum):
    MIRROR = "mirror"  # whole-sample reflection, preserves constants
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class FirFilter:
    """Finite filter; ``taps[i]`` acts at time index ``origin + i``."""

    taps: np.ndarray
    origin: int = 0

    def __post_init__(self):
        arr = np.asarray(self.taps, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("taps must be a non-empty 1-D array")
        if not np.any(arr):
            raise ValueError("filter must have at least one nonzero tap")
        arr.setflags(write=False)
        object.__setattr__(self, "taps", arr)

    def __len__(self):
        return len(self.taps)

    @property
    def end(self) -> int:
        """Time index one past the last tap."""
        return self.origin + len(self.taps)

    def tap_at(self, n: int) -> float:
        i = n - self.origin
        return float(self.taps[i]) if 0 <= i < len(self.taps) else 0.0

    def times(self) -> np.ndarray:
        return self.origin + np.arange(len(self.taps))

    def dc_gain(self) -> float:
        return float(self.taps.sum())


@dataclass(frozen=True, eq=False)
class InverseTaps(FirFilter):
    """Truncated two-sided stable inverse of ``source``.

    ``trunc_error`` bounds the total mass of discarded taps; convolving with
    ``source`` reproduces the unit impulse to within a small multiple of it.
    """

    source: FirFilter = None
    trunc_error: float = 0.0


@dataclass(frozen=True, eq=False)
class SampleTrain:
    """Finite stretch of a unit-period sample sequence.

    ``values[i]`` is the sample at time index ``origin + i``.
    """

    values: np.ndarray
    origin: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.values)


def _trimmed(taps: np.ndarray, origin: int):
    nz = np.nonzero(taps)[0]
    lo, hi = nz[0], nz[-1]
    return taps[lo : hi + 1], origin + int(lo)


def invert_fir(f: FirFilter, eps: float = 1e-12, max_taps: int = 129) -> InverseTaps:
    """Stable two-sided inverse, truncated at ``|tap| < eps`` or ``max_taps``.

    Roots of the tap polynomial strictly inside the unit circle generate
    anticausal geometric series, roots outside generate causal ones; their
    convolution is the unique inverse whose transfer function converges on
    the unit circle.  A root within ``1e-9`` of the circle raises
    :class:`NotAppropriate`.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if max_taps < 1:
        raise ValueError("max_taps must be >= 1")
    taps, start = _trimmed(f.taps, f.origin)
    half = max(max_taps // 2, 1)

    if len(taps) == 1:
        inv = np.array([1.0 / taps[0]])
        return InverseTaps(inv, origin=-start, source=f, trunc_error=0.0)

    roots = np.roots(taps[::-1])  # roots of sum_k taps[k] x^k
    dist = np.abs(np.abs(roots) - 1.0)
    if np.any(dist < UNIT_CIRCLE_TOL):
        worst = roots[np.argmin(dist)]
        raise NotAppropriate(
            f"tap polynomial root {worst:.6g} lies on the unit circle "
            "(no stable inverse)"
        )
    inside = roots[np.abs(roots) < 1.0]
    outside = roots[np.abs(roots) > 1.0]
    ratios = np.concatenate([np.abs(inside), 1.0 / np.abs(outside)])
    q = float(ratios.max())

    # internal window: wide enough that the kept center is fully converged
    floor = max(eps, 1e-300)
    big = max(half + len(taps) + 16, int(np.ceil(np.log(floor) / np.log(q))) + 8)
    big = min(big, 1 << 14)

    seq = np.array([1.0 / taps[-1]], dtype=complex)  # leading coefficient
    org = 0
    k = np.arange(big + 1)
    for r in outside:
        elem = -(r ** -(k + 1.0))  # causal, times 0..big
        seq = np.convolve(seq, elem)
        seq, org = _rewindow(seq, org, big)
    for r in inside:
        elem = r ** k[::-1]  # anticausal, times -big-1..-1
        seq = np.convolve(seq, elem)
        org = org - (big + 1)
        seq, org = _rewindow(seq, org, big)

    if np.max(np.abs(seq.imag)) > 1e-9 * max(np.max(np.abs(seq.real)), 1e-300):
        raise ArithmeticError("inversion produced a non-real sequence")
    h = seq.real
    # h currently covers times org..org+len-1; drop below-eps fringe,
    # then enforce the tap-count cap symmetrically around the peak.
    keep = np.nonzero(np.abs(h) >= max(eps, 0.0))[0]
    if eps > 0 and len(keep):
        lo, hi = int(keep[0]), int(keep[-1])
    else:
        lo, hi = 0, len(h) - 1
    dropped = float(np.abs(h[:lo]).sum() + np.abs(h[hi + 1 :]).sum())
    h2, org2 = h[lo : hi + 1], org + lo
    if len(h2) > max_taps:
        peak = int(np.argmax(np.abs(h2)))
        lo2 = max(0, min(peak - half, len(h2) - max_taps))
        hi2 = min(len(h2), lo2 + max_taps)
        dropped += float(np.abs(h2[:lo2]).sum() + np.abs(h2[hi2:]).sum())
        h2, org2 = h2[lo2:hi2], org2 + lo2
    # geometric bound on everything beyond the internal window
    edge = max(abs(h[0]), abs(h[-1]))
    tail = 2.0 * edge * q / (1.0 - q)
    return InverseTaps(
        h2, origin=org2 - start, source=f, trunc_error=dropped + tail
    )


def _rewindow(seq: np.ndarray, org: int, big: int):
    """Clip a growing convolution product back to times [-big, big]."""
    lo = max(0, -big - org)
    hi = min(len(seq), big + 1 - org)
    return seq[lo:hi], org + lo


def flip(f: FirFilter) -> FirFilter:
    """Time reversal: tap at n moves to -n."""
    return FirFilter(f.taps[::-1].copy(), origin=-(f.origin + len(f.taps) - 1))


def convolve(a: FirFilter, b: FirFilter) -> FirFilter:
    """Full linear convolution; origins add."""
    return FirFilter(np.convolve(a.taps, b.taps), origin=a.origin + b.origin)


def autocorrelate(a: FirFilter) -> FirFilter:
    """Correlation of a filter with itself: ``v[k] = sum_j a[j] a[j+k]``.

    Symmetric about lag 0 regardless of the filter's time offset.
    """
    v = np.correlate(a.taps, a.taps, mode="full")
    return FirFilter(v, origin=-(len(a.taps) - 1))


def convolve_along_axis(
    arr: np.ndarray,
    f: FirFilter,
    axis: int,
    boundary: BoundaryMode = BoundaryMode.MIRROR,
    keep_lo: int = 0,
    keep_hi: int = 0,
) -> np.ndarray:
    """Filter a 1-D/2-D array along ``axis`` with boundary extension.

    Output index ``i`` along the axis holds the filtered value at time
    ``i - keep_lo`` relative to the input's first sample, so the caller can
    request ``keep_lo``/``keep_hi`` extra coefficients on each side (needed
    when a compact kernel is later anchored past the ends).
    """
    n = arr.shape[axis]
    margin = len(f.taps) + abs(f.origin) + max(keep_lo, keep_hi) + 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (margin, margin)
    if boundary is BoundaryMode.MIRROR:
        if n == 1:
            ext = np.pad(arr, pad, mode="edge")
        elif margin > n - 1:  # reflect in stages for very short signals
            ext = arr
            done = 0
            while done < margin:
                step = min(margin - done, ext.shape[axis] - 1)
                spad = [(0, 0)] * arr.ndim
                spad[axis] = (step, step)
                ext = np.pad(ext, spad, mode="reflect")
                done += step
        else:
            ext = np.pad(arr, pad, mode="reflect")
    else:
        ext = np.pad(arr, pad, mode="constant")

    shape = [1] * arr.ndim
    shape[axis] = len(f.taps)
    kern = f.taps.reshape(shape)
    full = oaconvolve(ext, kern, mode="full", axes=axis)
    # full[j] holds time (-margin + f.origin) + j relative to input start
    first = -margin + f.origin
    lo = -keep_lo - first
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(lo, lo + n + keep_lo + keep_hi)
    return full[tuple(sl)]


def prefilter(
    x: SampleTrain,
    inv: InverseTaps,
    boundary: BoundaryMode = BoundaryMode.MIRROR,
) -> SampleTrain:
    """Apply a two-sided inverse filter to a signal window.

    The output covers the same index range as the input; the signal is
    extended past both ends (mirror or zeros) so every output sample sees a
    full tap span.  With a unit-DC-gain source filter, constants pass
    through unchanged up to the inverse's truncation error.
    """
    out = convolve_along_axis(x.values, inv, axis=0, boundary=boundary)
    return SampleTrain(out, origin=x.origin)
