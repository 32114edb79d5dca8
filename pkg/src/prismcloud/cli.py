"""Command line surface: sample, metrics, bench, ablate, histogram, colorize.

Exit codes: 0 success, 1 I/O failure, 2 invalid flags, 3 colorless input
where color is required, 4 empty cloud, 5 invalid calibration.  All files
are written atomically (temp file + rename) and every random choice flows
from the single --seed flag.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .colorize import RgbImage, colorize, load_calibration
from .metrics import chroma_histogram, compare
from .model import (
    CalibrationError,
    ColorlessCloudError,
    EmptyCloudError,
    PlyFormatError,
    PointCloud,
    SamplerConfig,
)
from .pointcloud_io import read_ply, write_ply
from .samplers import estimate_normals, run_sampler

BENCH_METHODS = ("prism", "random", "voxel", "nss")
BENCH_HEADER = "method,seed,ratio_pct,cd,hd,entropy_gain,time_s"
ABLATE_HEADER = "quant_bits,chromaticity,ratio_pct,cd,hd,entropy_gain,time_s"


def _fmt(x) -> str:
    """Exact, shortest decimal form; None becomes an empty cell."""
    if x is None:
        return ""
    if isinstance(x, float) or isinstance(x, np.floating):
        return repr(float(x))
    return str(x)


def _atomic_write_text(path, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_ply(cloud: PointCloud, path, fmt: str, allow_empty: bool = True):
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        write_ply(cloud, tmp, format=fmt, allow_empty=allow_empty)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flag_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _ratio_type(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"ratio must be in (0, 1], got {text}")
    return value


def _add_common_sample_flags(p: argparse.ArgumentParser):
    p.add_argument("--target-ratio", type=_ratio_type, default=None)
    p.add_argument("--k", type=int, default=None, help="explicit per-bin capacity")
    p.add_argument("--bits", type=int, choices=(0, 1, 2, 4), default=0,
                   help="low color bits dropped per channel before binning")
    p.add_argument("--chromaticity", choices=("on", "off"), default="off")
    p.add_argument("--voxel-size", type=float, default=None)
    p.add_argument("--nss-buckets", type=int, default=64)
    p.add_argument("--knn", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prismcloud",
        description="Color-stratified point cloud downsampling and evaluation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="downsample a PLY file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", required=True, choices=("prism", "random", "voxel", "nss"))
    _add_common_sample_flags(p)
    p.add_argument("--manifest", default=None, help="write a run manifest JSON here")
    p.add_argument("--ascii", action="store_true", help="write ascii instead of binary")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("metrics", help="compare two PLY files")
    p.add_argument("--ref", required=True)
    p.add_argument("--cmp", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--label", default=None, help="method name recorded in the report")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="run all four methods over several seeds")
    p.add_argument("--input", required=True)
    p.add_argument("--target-ratio", type=_ratio_type, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seeds", type=int, required=True, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed value")
    p.add_argument("--knn", type=int, default=16)
    p.add_argument("--nss-buckets", type=int, default=64)
    p.add_argument("--reference", default=None,
                   help="CSV of published per-method means to print a comparison against")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="sweep quantization bits x chromaticity at fixed k")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("histogram", help="export a hue/saturation histogram JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hue-bins", type=int, default=36)
    p.add_argument("--sat-bins", type=int, default=8)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("colorize", help="project points into an image and color them")
    p.add_argument("--points", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--keep-uncolored", action="store_true",
                   help="keep culled points with zero color instead of dropping them")
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_colorize)

    return parser


def _build_config(args) -> SamplerConfig:
    return SamplerConfig(
        method=args.method,
        target_ratio=args.target_ratio,
        explicit_k=args.k,
        quant_bits=args.bits,
        chromaticity=args.chromaticity == "on",
        voxel_size=args.voxel_size,
        nss_buckets=args.nss_buckets,
        knn=args.knn,
        seed=args.seed,
    )


def cmd_sample(args) -> int:
    if args.method != "voxel" and args.voxel_size is not None:
        return _flag_error(f"--voxel-size only applies to --method voxel, not {args.method}")
    if args.method != "prism" and args.k is not None:
        return _flag_error("--k only applies to --method prism")
    if args.method == "prism" and args.target_ratio is None and args.k is None:
        return _flag_error("prism needs --target-ratio or --k")
    if args.method in ("random", "nss") and args.target_ratio is None:
        return _flag_error(f"{args.method} needs --target-ratio")
    if args.method == "voxel":
        if args.voxel_size is None and args.target_ratio is None:
            return _flag_error("voxel needs --voxel-size or --target-ratio")
        if args.voxel_size is not None and args.target_ratio is not None:
            return _flag_error("give voxel either --voxel-size or --target-ratio, not both")

    config = _build_config(args)
    cloud = read_ply(args.input)
    print(f"loaded {len(cloud)} points from {args.input}")

    result = run_sampler(cloud, config)
    fmt = "ascii" if args.ascii else "binary_little_endian"
    _atomic_write_ply(result.cloud, args.output, fmt)

    k_text = f", k*={result.k_used}" if result.k_used is not None else ""
    print(f"kept {len(result.cloud)} / {len(cloud)} points "
          f"(ratio {_fmt(result.achieved_ratio)}{k_text})")

    if args.manifest:
        manifest = {
            "tool": "prismcloud",
            "version": __version__,
            "input": {"path": str(args.input), "points": len(cloud)},
            "config": config.as_dict(),
            "k_star": result.k_used,
            "bins_total": result.bins_total,
            "output": {"path": str(args.output), "points": len(result.cloud),
                       "achieved_ratio": result.achieved_ratio},
            "metrics": None,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        _atomic_write_text(args.manifest, json.dumps(manifest, indent=2) + "\n")
    return 0


def cmd_metrics(args) -> int:
    ref = read_ply(args.ref)
    cmp_cloud = read_ply(args.cmp)
    label = args.label or os.path.splitext(os.path.basename(args.cmp))[0]

    t0 = time.perf_counter()
    report = compare(ref, cmp_cloud, method=label,
                     params={"ref": str(args.ref), "cmp": str(args.cmp)})
    report = dataclasses.replace(report, time_s=time.perf_counter() - t0)

    _atomic_write_text(args.report, json.dumps(report.to_json_dict(), indent=2) + "\n")
    print(f"cd={_fmt(report.cd)} hd={_fmt(report.hd)} "
          f"entropy_gain={_fmt(report.entropy_gain)} ratio_pct={_fmt(report.ratio_pct)}")
    return 0


def _bench_one(cloud, with_normals, method, ratio, seed, knn, nss_buckets):
    config = SamplerConfig(method=method, target_ratio=ratio, seed=seed,
                           knn=knn, nss_buckets=nss_buckets)
    src = with_normals if method == "nss" else cloud
    return run_sampler(src, config)


def cmd_bench(args) -> int:
    cloud = read_ply(args.input)
    if len(cloud) == 0:
        raise EmptyCloudError("bench input is empty")
    if cloud.colorless:
        raise ColorlessCloudError("bench needs a colored input cloud")
    print(f"loaded {len(cloud)} points from {args.input}")

    # normals are seed-independent; estimate once for every nss run
    with_normals = estimate_normals(cloud, args.knn)

    rows = []
    means: dict[str, list] = {}
    for method in BENCH_METHODS:
        per_method = []
        for i in range(args.seeds):
            seed = args.seed + i
            result = _bench_one(cloud, with_normals, method, args.target_ratio,
                                seed, args.knn, args.nss_buckets)
            report = compare(cloud, result.cloud, method=method,
                             time_s=result.wall_time)
            row = [method, seed, report.ratio_pct, report.cd, report.hd,
                   report.entropy_gain, result.wall_time]
            rows.append(row)
            per_method.append(row[2:])
            print(f"{method} seed={seed} ratio_pct={_fmt(report.ratio_pct)} "
                  f"cd={_fmt(report.cd)} hd={_fmt(report.hd)} "
                  f"entropy_gain={_fmt(report.entropy_gain)}")
        cols = list(zip(*per_method))
        means[method] = [float(np.mean(c)) for c in cols]

    lines = [BENCH_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    for method in BENCH_METHODS:
        lines.append(",".join([method, "mean"] + [_fmt(v) for v in means[method]]))

    os.makedirs(args.out_dir, exist_ok=True)
    out_csv = os.path.join(args.out_dir, "bench.csv")
    _atomic_write_text(out_csv, "\n".join(lines) + "\n")
    print(f"wrote {out_csv} ({len(rows)} runs + {len(BENCH_METHODS)} mean rows)")

    if args.reference:
        _print_reference_comparison(args.reference, means)
    return 0


def _print_reference_comparison(path, means: dict):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        ref_rows = list(csv.DictReader(fh))
    print("method  column        ours        reference")
    for row in ref_rows:
        method = row.get("method")
        if method not in means or row.get("seed", "mean") != "mean":
            continue
        ours = dict(zip(("ratio_pct", "cd", "hd", "entropy_gain", "time_s"),
                        means[method]))
        for col, mine in ours.items():
            if row.get(col) not in (None, ""):
                print(f"{method:7s} {col:12s} {mine:<11.6g} {float(row[col]):<11.6g}")


def cmd_ablate(args) -> int:
    if args.k < 1:
        return _flag_error(f"--k must be >= 1, got {args.k}")
    cloud = read_ply(args.input)
    print(f"loaded {len(cloud)} points from {args.input}")

    lines = [ABLATE_HEADER]
    for bits in (1, 2, 4):
        for chroma in ("off", "on"):
            config = SamplerConfig(method="prism", explicit_k=args.k,
                                   quant_bits=bits, chromaticity=chroma == "on",
                                   seed=args.seed)
            result = run_sampler(cloud, config)
            report = compare(cloud, result.cloud, method="prism",
                             time_s=result.wall_time)
            lines.append(",".join(_fmt(v) for v in (
                bits, chroma, report.ratio_pct, report.cd, report.hd,
                report.entropy_gain, result.wall_time)))
            print(f"bits={bits} chromaticity={chroma} "
                  f"ratio_pct={_fmt(report.ratio_pct)}")

    _atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out}")
    return 0


def cmd_histogram(args) -> int:
    if args.hue_bins < 1 or args.sat_bins < 1:
        return _flag_error("--hue-bins and --sat-bins must be >= 1")
    cloud = read_ply(args.input)
    hist = chroma_histogram(cloud, args.hue_bins, args.sat_bins)
    _atomic_write_text(args.out, json.dumps(hist.to_json_dict()) + "\n")
    print(f"wrote {args.out} ({len(cloud)} points, "
          f"{args.hue_bins}x{args.sat_bins} cells)")
    return 0


def cmd_colorize(args) -> int:
    from PIL import Image

    calib = load_calibration(args.calib)
    cloud = read_ply(args.points)
    with Image.open(args.image) as img:
        pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    image = RgbImage.from_uint8(pixels)

    result = colorize(cloud, image, calib, keep_uncolored=args.keep_uncolored)
    fmt = "ascii" if args.ascii else "binary_little_endian"
    _atomic_write_ply(result.cloud, args.output, fmt)

    print(f"colorized {result.kept} points, dropped {result.dropped}")
    if result.kept == 0:
        print("warning: no point projected into the image", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if exc.code is not None else 0
        return 0 if code == 0 else 2

    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except PlyFormatError as exc:
        print(f"error: bad input file: {exc}", file=sys.stderr)
        return 1
    except ColorlessCloudError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EmptyCloudError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CalibrationError as exc:
        print(f"error: invalid calibration: {exc}", file=sys.stderr)
        return 5
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
