"""Command-line front end: kernel design, SNR measurement, image enlargement,
and the downsample/enlarge/PSNR benchmark.

Exit codes: 0 success, 2 usage or input-format problems, 3 numeric failure
(no stable inverse, singular system, constraint violation).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bspline import (
    make_bspline,
    make_keys_kernel,
    read_kernel_csv,
    tabulate,
    write_kernel_csv,
)
from .design import (
    ConstraintViolation,
    DesignSpec,
    SingularSystem,
    TargetFilter,
    design_optimized_spline,
    error_functional,
    load_design_spec,
    snr_db,
)
from .filters import BoundaryMode, FirFilter, NotAppropriate
from .image import GrayImage, downsample, psnr, read_pgm, write_pgm
from .resample import ResampleConfig, enlarge_image

PAPER_RHO3 = (0.233, 0.480, 0.233)
KERNEL_NAMES = ("bspline1", "bspline3", "bicubic-keys", "optspline3-paper")

EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get("OPTISPLINE_OUTDIR", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _boundary(name: str) -> BoundaryMode:
    return BoundaryMode.MIRROR if name == "mirror" else BoundaryMode.ZERO


def _resolve_kernel(name: str, grid: int, window: int):
    """Named kernel or a kernel CSV path."""
    if name == "bspline1":
        return make_bspline(1)
    if name == "bspline3":
        return make_bspline(3)
    if name == "bicubic-keys":
        return make_keys_kernel()
    if name == "optspline3-paper":
        spec = DesignSpec(
            order=3,
            rho_d=FirFilter(np.array(PAPER_RHO3), origin=1),
            target=TargetFilter(),
            g=grid,
            window=window,
        )
        return design_optimized_spline(spec).kernel
    if Path(name).suffix.lower() == ".csv" and Path(name).exists():
        return read_kernel_csv(name)
    raise ValueError(
        f"unknown kernel {name!r}: expected one of {', '.join(KERNEL_NAMES)} "
        "or a kernel CSV path"
    )


def _json_ready(obj):
    """Recursively make a report JSON-serializable; inf becomes null."""
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if math.isinf(f) or math.isnan(f) else f
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path: Path, payload) -> None:
    with open(path, "w") as f:
        json.dump(_json_ready(payload), f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_design(args) -> int:
    spec = load_design_spec(args.spec)
    if args.grid or args.window:
        from dataclasses import replace

        spec = replace(
            spec, g=args.grid or spec.g, window=args.window or spec.window
        )
    designed = design_optimized_spline(spec)
    out = _out_dir(args)
    csv_path = Path(args.out_csv) if args.out_csv else out / f"optspline{spec.order}.csv"
    json_path = Path(args.out_json) if args.out_json else out / "design_metrics.json"
    write_kernel_csv(designed.kernel, csv_path)
    metrics = {
        "config": _echo_spec(spec),
        "e_h": designed.error_value,
        "snr_db": designed.snr,
        "residual_max": designed.residual_max,
        "w_inf_norm": designed.w_inf,
        "snap_delta": designed.snap_delta,
        "kernel_csv": str(csv_path),
    }
    _write_json(json_path, metrics)
    print(f"kernel -> {csv_path}")
    print(f"metrics -> {json_path}")
    print(f"snr_db={designed.snr:.4f} e_h={designed.error_value:.6e}")
    return 0


def _echo_spec(spec: DesignSpec) -> dict:
    tgt = {"kind": spec.target.kind}
    if spec.target.kind == "ideal_lowpass_sinc":
        tgt["cutoff"] = spec.target.cutoff
    return {
        "m": spec.order,
        "rho_d": list(spec.rho_d.taps),
        "target": tgt,
        "G": spec.g,
        "window": spec.window,
    }


def cmd_snr(args) -> int:
    kernel = read_kernel_csv(args.kernel_csv)
    if args.target_csv:
        data = np.loadtxt(args.target_csv, delimiter=",", skiprows=1)
        target = TargetFilter(kind="tabulated", table_t=data[:, 0], table_v=data[:, 1])
    else:
        target = TargetFilter(cutoff=args.cutoff)
    from .bspline import sample_at_integers

    rho = sample_at_integers(kernel)
    spec = DesignSpec(
        order=kernel.order, rho_d=rho, target=target, g=args.grid or kernel.g,
        window=args.window or 64,
    )
    value = snr_db(kernel, spec)
    print(f"{value:.4f}")
    return 0


def cmd_enlarge(args) -> int:
    kernel = _resolve_kernel(args.kernel, args.grid or 1024, args.window or 64)
    img = read_pgm(args.input)
    cfg = ResampleConfig(
        kernel=kernel, factor=args.factor, boundary=_boundary(args.boundary)
    )
    out = enlarge_image(img, cfg)
    write_pgm(out, args.output)
    print(f"{args.input} ({img.width}x{img.height}) -> "
          f"{args.output} ({out.width}x{out.height})")
    return 0


def _synthetic_corpus(directory: Path, count: int, seed: int, size: int = 512):
    """Deterministic synthetic grayscale corpus with natural-image statistics:
    smooth 1/f^2-ish backgrounds, shaded shapes, and oriented texture."""
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    radial = np.sqrt(fy**2 + fx**2)
    radial[0, 0] = 1.0
    paths = []
    for i in range(count):
        spectrum = rng.standard_normal((size, size // 2 + 1)) + 1j * rng.standard_normal(
            (size, size // 2 + 1)
        )
        alpha = 1.6 + 0.6 * rng.random()
        base = np.fft.irfft2(spectrum / radial**alpha, s=(size, size))
        base = (base - base.min()) / (base.max() - base.min())
        img = 40.0 + 170.0 * base
        for _ in range(rng.integers(4, 9)):
            cy, cx = rng.random(2) * size
            ry, rx = 10 + rng.random(2) * size / 4
            theta = rng.random() * np.pi
            u = (yy - cy) * np.cos(theta) + (xx - cx) * np.sin(theta)
            v = -(yy - cy) * np.sin(theta) + (xx - cx) * np.cos(theta)
            mask = (u / ry) ** 2 + (v / rx) ** 2 <= 1.0
            shade = rng.uniform(-70, 70) * (1.0 - ((u / ry) ** 2 + (v / rx) ** 2))
            img = np.where(mask, img + shade, img)
        freq = 0.05 + 0.2 * rng.random()
        theta = rng.random() * np.pi
        img += 8.0 * np.sin(
            2 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta))
        ) * (base > 0.5)
        path = directory / f"synthetic_{i:02d}.pgm"
        write_pgm(GrayImage(np.clip(img, 0, 255)), path)
        paths.append(path)
    return paths


def cmd_bench(args) -> int:
    directory = Path(args.image_dir)
    directory.mkdir(parents=True, exist_ok=True)
    if args.synthetic:
        _synthetic_corpus(directory, args.synthetic, args.seed)
    images = sorted(directory.glob("*.pgm"))
    if not images:
        print(f"no PGM images in {directory}", file=sys.stderr)
        return EXIT_USAGE

    grid = args.grid or 1024
    window = args.window or 64
    boundary = _boundary(args.boundary)
    spec = DesignSpec(
        order=3,
        rho_d=FirFilter(np.array(PAPER_RHO3), origin=1),
        target=TargetFilter(),
        g=grid,
        window=window,
    )
    designed = design_optimized_spline(spec)
    cubic = make_bspline(3)
    methods = [
        ("psnr_bicubic", make_keys_kernel()),
        ("psnr_bspline3", cubic),
        ("psnr_optspline3", designed.kernel),
    ]

    rows = []
    for path in images:
        orig = read_pgm(path)
        if orig.width % args.factor or orig.height % args.factor:
            print(f"skipping {path.name}: size not divisible by {args.factor}",
                  file=sys.stderr)
            continue
        low = downsample(orig, args.factor, mode=args.downsample_mode)
        row = {"name": path.name}
        for label, kernel in methods:
            cfg = ResampleConfig(kernel=kernel, factor=args.factor, boundary=boundary)
            row[label] = psnr(orig, enlarge_image(low, cfg))
        rows.append(row)

    report = {
        "config": {
            "image_dir": str(directory),
            "factor": args.factor,
            "downsample_mode": args.downsample_mode,
            "boundary": args.boundary,
            "design": _echo_spec(spec),
            "synthetic": args.synthetic,
            "seed": args.seed,
        },
        "kernel_metrics": {
            "snr_cardinal_db": snr_db(tabulate(cubic, grid), spec),
            "snr_optimized_db": designed.snr,
            "e_h_cardinal": error_functional(tabulate(cubic, grid), spec),
            "e_h_optimized": designed.error_value,
        },
        "images": rows,
    }
    out = _out_dir(args)
    json_path = out / f"{args.report_name}.json"
    csv_path = out / f"{args.report_name}.csv"
    _write_json(json_path, report)
    with open(csv_path, "w") as f:
        f.write("name,psnr_bicubic,psnr_bspline3,psnr_optspline3\n")
        for row in rows:
            f.write(
                f"{row['name']},{row['psnr_bicubic']:.6f},"
                f"{row['psnr_bspline3']:.6f},{row['psnr_optspline3']:.6f}\n"
            )
    print(f"report -> {json_path}")
    print(f"table -> {csv_path}")
    for row in rows:
        print(
            f"{row['name']}: bicubic={row['psnr_bicubic']:.2f} "
            f"bspline3={row['psnr_bspline3']:.2f} "
            f"optspline3={row['psnr_optspline3']:.2f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="optispline",
        description="Design compact-support interpolation kernels and run "
        "resampling experiments.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None,
                        help="tabulation samples per unit interval")
    common.add_argument("--window", type=int, default=None,
                        help="target matching half-width in sample periods")
    common.add_argument("--boundary", choices=("mirror", "zero"), default="mirror")
    common.add_argument("--out-dir", default=None,
                        help="output directory (default $OPTISPLINE_OUTDIR or .)")

    d = sub.add_parser("design", parents=[common],
                       help="design an optimized kernel from a JSON spec")
    d.add_argument("spec", help="JSON design spec file")
    d.add_argument("--out-csv", default=None)
    d.add_argument("--out-json", default=None)
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("snr", parents=[common],
                       help="SNR of a kernel's interpolating form vs a target")
    s.add_argument("kernel_csv")
    s.add_argument("--cutoff", type=float, default=0.5)
    s.add_argument("--target-csv", default=None,
                   help="tabulated target instead of the ideal lowpass")
    s.set_defaults(func=cmd_snr)

    e = sub.add_parser("enlarge", parents=[common], help="upscale a PGM image")
    e.add_argument("input")
    e.add_argument("output")
    e.add_argument("--kernel", default="optspline3-paper",
                   help=f"one of {', '.join(KERNEL_NAMES)} or a kernel CSV")
    e.add_argument("--factor", type=int, default=2)
    e.set_defaults(func=cmd_enlarge)

    b = sub.add_parser("bench", parents=[common],
                       help="downsample/enlarge/PSNR benchmark over a PGM corpus")
    b.add_argument("image_dir")
    b.add_argument("--factor", type=int, default=2)
    b.add_argument("--downsample-mode", choices=("decimate", "average"),
                   default="decimate")
    b.add_argument("--synthetic", type=int, default=0,
                   help="generate N synthetic 512x512 images into IMAGE_DIR first")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--report-name", default="bench_report")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NotAppropriate, SingularSystem, ConstraintViolation) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
