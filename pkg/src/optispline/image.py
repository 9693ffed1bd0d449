"""Grayscale raster images: PGM (P5) I/O, quantization, PSNR, downsampling.

Pixels are kept as float64 end to end; quantization to 8 bits happens only
on export and inside PSNR, so method comparisons are not polluted by
intermediate rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["GrayImage", "read_pgm", "write_pgm", "psnr", "downsample"]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D grayscale raster; ``pixels[row, col]`` in real (unquantized) form."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2-D array")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_u8(self) -> np.ndarray:
        """8-bit view: round then clamp to [0, 255]."""
        return np.clip(np.rint(self.pixels), 0, 255).astype(np.uint8)


def read_pgm(path) -> GrayImage:
    """Read a binary PGM (P5, maxval 255)."""
    with open(path, "rb") as f:
        data = f.read()

    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval

    magic, w, h, maxval = fields
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5), got {magic!r}")
    width, height, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    raw = data[pos : pos + width * height]
    if len(raw) != width * height:
        raise ValueError(f"{path}: pixel payload truncated")
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    return GrayImage(arr.astype(float))


def write_pgm(img: GrayImage, path) -> None:
    """Write a binary PGM (P5, maxval 255), quantizing to 8 bits."""
    u8 = img.to_u8()
    with open(path, "wb") as f:
        f.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        f.write(u8.tobytes())


def psnr(a: GrayImage, b: GrayImage) -> float:
    """Peak SNR in dB over the 8-bit-quantized views; inf when identical."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"size mismatch: {a.pixels.shape} vs {b.pixels.shape}")
    da = a.to_u8().astype(float)
    db = b.to_u8().astype(float)
    mse = float(np.mean((da - db) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def downsample(img: GrayImage, factor: int, mode: str = "decimate") -> GrayImage:
    """Shrink by an integer factor: keep every factor-th pixel, or pool means."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    h, w = img.pixels.shape
    if h % factor or w % factor:
        raise ValueError(f"factor {factor} does not divide {w}x{h}")
    if mode == "decimate":
        return GrayImage(img.pixels[::factor, ::factor].copy())
    if mode == "average":
        blocks = img.pixels.reshape(h // factor, factor, w // factor, factor)
        return GrayImage(blocks.mean(axis=(1, 3)))
    raise ValueError(f"unknown downsample mode {mode!r}")
