"""Downsamplers: color-stratified capping plus the three classic baselines.

The stratified sampler groups points by quantized color, caps every
stratum at a shared capacity k (solved from the target ratio or given
explicitly), and keeps a seeded uniform subset inside each over-full
stratum.  Selection uses counter-based hashing, so each stratum's draw
depends only on (seed, bin) and results are independent of iteration or
parallel schedule.

Baselines: uniform random, voxel grid (centroid or representative point),
and normal-space sampling over an octahedral direction grid, with a PCA
normal estimator to feed it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .ksolver import solve_k
from .model import (
    BinCounts,
    ColorBin,
    ColorlessCloudError,
    EmptyCloudError,
    PointCloud,
    SamplerConfig,
)

LUMINANCE_EPS = 3.0 / 255.0

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_KEY_SALT = np.uint64(0xD1342543DE82EF95)


@dataclass(frozen=True)
class SampleResult:
    """One sampling run: the output cloud plus bookkeeping for reports."""

    cloud: PointCloud
    achieved_ratio: float
    k_used: Optional[int] = None
    bins_total: Optional[int] = None
    wall_time: float = 0.0


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; all arithmetic wraps mod 2^64
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def _priorities(seed: int, keys: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Pseudorandom uint64 per point, a pure function of (seed, bin, rank in bin)."""
    with np.errstate(over="ignore"):  # wraparound is the point
        base = _mix64(np.uint64(seed) + _GOLDEN)
        state = _mix64(base ^ (keys.astype(np.uint64) * _KEY_SALT))
        return _mix64(state + (ranks.astype(np.uint64) + np.uint64(1)) * _GOLDEN)


def _group_ranks(inverse: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Rank of each point inside its group, in input order (0-based)."""
    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts[:-1])))
    ranks = np.empty(inverse.size, dtype=np.int64)
    ranks[order] = np.arange(inverse.size, dtype=np.int64) - np.repeat(starts, counts)
    return ranks


def quantize_colors(colors: np.ndarray, quant_bits: int = 0,
                    chromaticity: bool = False) -> np.ndarray:
    """Vectorized color-to-bin-key mapping for (N, 3) unit-range colors.

    Base bin is floor(255 c) per channel; chromaticity mode first divides
    by the channel sum (near-black points go to a dedicated achromatic
    bin); quant_bits low-order bits are then dropped.  Keys pack the three
    shifted channels into one int64; the achromatic bin is -1.
    """
    colors = np.asarray(colors, dtype=np.float64)
    if colors.ndim != 2 or colors.shape[1] != 3:
        raise ValueError(f"colors must be (N, 3), got {colors.shape}")

    achromatic = None
    if chromaticity:
        sums = colors.sum(axis=1)
        achromatic = sums < LUMINANCE_EPS
        safe = np.where(achromatic, 1.0, sums)
        colors = colors / safe[:, None]

    chans = np.floor(colors * 255.0).astype(np.int64)
    np.clip(chans, 0, 255, out=chans)
    chans >>= quant_bits
    keys = (chans[:, 0] << 16) | (chans[:, 1] << 8) | chans[:, 2]
    if achromatic is not None:
        keys[achromatic] = ColorBin.ACHROMATIC_KEY
    return keys


def quantize_color(c, quant_bits: int = 0, chromaticity: bool = False) -> ColorBin:
    """Single-color version of quantize_colors, returning the ColorBin."""
    arr = np.asarray(c, dtype=np.float64).reshape(1, 3)
    return ColorBin.from_key(int(quantize_colors(arr, quant_bits, chromaticity)[0]))


def bin_counts(cloud: PointCloud, quant_bits: int = 0,
               chromaticity: bool = False) -> BinCounts:
    """Histogram a cloud's colors into stratum sizes."""
    keys = quantize_colors(cloud.colors, quant_bits, chromaticity)
    uniq, counts = np.unique(keys, return_counts=True)
    return BinCounts(uniq, counts)


def prism_sample(cloud: PointCloud, config: SamplerConfig) -> SampleResult:
    """Cap every color stratum at a shared capacity k.

    k comes from config.explicit_k when set, otherwise from the analytic
    ratio solver.  Strata no larger than k survive whole; larger strata
    keep a seeded uniform k-subset.  Output preserves input order and its
    size is exactly sum_b min(n_b, k).
    """
    t0 = time.perf_counter()
    if len(cloud) == 0:
        raise EmptyCloudError("cannot stratify an empty cloud")
    if cloud.colorless:
        raise ColorlessCloudError("color-stratified sampling needs real colors")

    keys = quantize_colors(cloud.colors, config.quant_bits, config.chromaticity)
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)

    if config.explicit_k is not None:
        k = config.explicit_k
    else:
        k = solve_k(BinCounts(uniq, counts), config.target_ratio).k_star

    ranks = _group_ranks(inverse, counts)
    prio = _priorities(config.seed, keys, ranks)

    # per stratum, keep the k smallest priorities
    order = np.lexsort((prio, inverse))
    starts = np.concatenate(([0], np.cumsum(counts[:-1])))
    pos_in_bin = np.arange(len(cloud), dtype=np.int64) - np.repeat(starts, counts)
    selected = np.sort(order[pos_in_bin < k])

    out = cloud.take(selected)
    return SampleResult(
        cloud=out,
        achieved_ratio=len(out) / len(cloud),
        k_used=int(k),
        bins_total=len(uniq),
        wall_time=time.perf_counter() - t0,
    )


def random_sample(cloud: PointCloud, ratio: float, seed: int = 0) -> SampleResult:
    """Seeded uniform sampling without replacement, order-preserving."""
    t0 = time.perf_counter()
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    n = len(cloud)
    if n == 0:
        return SampleResult(cloud, 0.0, wall_time=time.perf_counter() - t0)

    m = int(np.floor(ratio * n + 0.5))
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    out = cloud.take(idx)
    return SampleResult(out, m / n, wall_time=time.perf_counter() - t0)


def _voxel_groups(positions: np.ndarray, voxel_size: float):
    cells = np.floor(positions / voxel_size).astype(np.int64)
    cells = np.ascontiguousarray(cells)
    view = cells.view(np.dtype((np.void, cells.dtype.itemsize * 3))).ravel()
    _, inverse, counts = np.unique(view, return_inverse=True, return_counts=True)
    return inverse, counts


def voxel_grid_sample(cloud: PointCloud, voxel_size: float,
                      mode: str = "nearest_to_centroid") -> SampleResult:
    """One representative per occupied cell of a regular grid.

    centroid mode emits the per-cell mean position and color (synthesized
    points); nearest_to_centroid emits the input point closest to that
    mean, so the output stays a subset of the input.
    """
    t0 = time.perf_counter()
    if not voxel_size > 0:
        raise ValueError(f"voxel_size must be > 0, got {voxel_size}")
    if mode not in ("centroid", "nearest_to_centroid"):
        raise ValueError(f"unknown voxel mode {mode!r}")
    n = len(cloud)
    if n == 0:
        return SampleResult(cloud, 0.0, bins_total=0,
                            wall_time=time.perf_counter() - t0)

    inverse, counts = _voxel_groups(cloud.positions, voxel_size)
    m = counts.size

    sums_p = np.empty((m, 3))
    sums_c = np.empty((m, 3))
    for d in range(3):
        sums_p[:, d] = np.bincount(inverse, weights=cloud.positions[:, d], minlength=m)
        sums_c[:, d] = np.bincount(inverse, weights=cloud.colors[:, d], minlength=m)
    centroids = sums_p / counts[:, None]

    if mode == "centroid":
        out = PointCloud(centroids, sums_c / counts[:, None],
                         colorless=cloud.colorless)
    else:
        d2 = ((cloud.positions - centroids[inverse]) ** 2).sum(axis=1)
        order = np.lexsort((d2, inverse))
        starts = np.concatenate(([0], np.cumsum(counts[:-1])))
        representatives = np.sort(order[starts])
        out = cloud.take(representatives)

    return SampleResult(out, m / n, bins_total=m,
                        wall_time=time.perf_counter() - t0)


def voxel_sample_to_ratio(cloud: PointCloud, target_ratio: float,
                          mode: str = "nearest_to_centroid",
                          iterations: int = 20) -> tuple[SampleResult, float]:
    """Bisect on voxel size until the achieved ratio is closest to target.

    The voxel baseline has no ratio knob of its own; this auxiliary mode
    makes it comparable in benchmarks.  Returns (result, voxel_size).
    """
    if not 0.0 < target_ratio <= 1.0:
        raise ValueError(f"target_ratio must be in (0, 1], got {target_ratio}")
    n = len(cloud)
    if n == 0:
        return voxel_grid_sample(cloud, 1.0, mode), 1.0

    extent = float(np.ptp(cloud.positions, axis=0).max())
    if extent == 0.0:
        # all points coincide; any size gives one voxel
        return voxel_grid_sample(cloud, 1.0, mode), 1.0

    lo, hi = 0.0, 2.0 * extent
    best_size, best_err = hi, float("inf")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        inverse, counts = _voxel_groups(cloud.positions, mid)
        ratio = counts.size / n
        err = abs(ratio - target_ratio)
        if err < best_err:
            best_err, best_size = err, mid
        if ratio > target_ratio:
            lo = mid  # too many cells, grow the voxels
        else:
            hi = mid
    return voxel_grid_sample(cloud, best_size, mode), best_size


def estimate_normals(cloud: PointCloud, knn: int = 16) -> PointCloud:
    """Per-point PCA normals from the knn nearest neighbors (self included).

    The normal is the least-variance principal axis of the neighborhood
    covariance, sign-fixed so each normal's largest-magnitude component is
    positive.  Degenerate (collinear) neighborhoods raise.
    """
    if knn < 3:
        raise ValueError(f"knn must be >= 3, got {knn}")
    n = len(cloud)
    if n < knn + 1:
        raise ValueError(f"need more than {knn} points, have {n}")

    tree = cKDTree(cloud.positions)
    _, idx = tree.query(cloud.positions, k=knn)
    nbrs = cloud.positions[idx]  # (n, knn, 3)
    centered = nbrs - nbrs.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / knn

    eigvals, eigvecs = np.linalg.eigh(cov)
    # rank < 2 means the neighborhood has no well-defined tangent plane
    degenerate = eigvals[:, 1] <= eigvals[:, 2] * 1e-9 + 1e-30
    if degenerate.any():
        raise ValueError(
            f"{int(degenerate.sum())} points have collinear neighborhoods; "
            "normals are undefined")

    normals = eigvecs[:, :, 0]
    lead = np.argmax(np.abs(normals), axis=1)
    flip = normals[np.arange(n), lead] < 0
    normals[flip] *= -1.0
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return cloud.with_normals(normals)


def _octahedral_buckets(normals: np.ndarray, grid_side: int) -> np.ndarray:
    """Map unit vectors onto a grid over the octahedral unfolding of the sphere."""
    n = normals
    denom = np.abs(n).sum(axis=1)
    u = n[:, 0] / denom
    v = n[:, 1] / denom
    south = n[:, 2] < 0
    # fold the lower hemisphere outward into the square's corners
    u2 = (1.0 - np.abs(v)) * np.sign(np.where(u == 0, 1.0, u))
    v2 = (1.0 - np.abs(u)) * np.sign(np.where(v == 0, 1.0, v))
    u = np.where(south, u2, u)
    v = np.where(south, v2, v)

    iu = np.clip(((u + 1.0) * 0.5 * grid_side).astype(np.int64), 0, grid_side - 1)
    iv = np.clip(((v + 1.0) * 0.5 * grid_side).astype(np.int64), 0, grid_side - 1)
    return iu * grid_side + iv


def normal_space_sample(cloud: PointCloud, target_ratio: float,
                        nss_buckets: int = 64, seed: int = 0) -> SampleResult:
    """Draw evenly across normal-direction buckets.

    Points are bucketed by normal over an octahedral grid; buckets are then
    drained round-robin (one seeded-random point per non-empty bucket per
    round, bucket id order within a round) until round(ratio * N) points
    are taken.  Output preserves input order.
    """
    t0 = time.perf_counter()
    if cloud.normals is None:
        raise ValueError("normal-space sampling needs normals; "
                         "run estimate_normals first")
    if not 0.0 < target_ratio <= 1.0:
        raise ValueError(f"target_ratio must be in (0, 1], got {target_ratio}")
    if nss_buckets < 2:
        raise ValueError(f"nss_buckets must be >= 2, got {nss_buckets}")
    n = len(cloud)
    if n == 0:
        return SampleResult(cloud, 0.0, bins_total=0,
                            wall_time=time.perf_counter() - t0)

    grid_side = max(1, int(np.sqrt(nss_buckets)))
    buckets = _octahedral_buckets(cloud.normals, grid_side)
    uniq, inverse, counts = np.unique(buckets, return_inverse=True, return_counts=True)

    # shuffle within each bucket by hashed priority, then interleave rounds
    ranks = _group_ranks(inverse, counts)
    prio = _priorities(seed, buckets, ranks)
    order = np.lexsort((prio, inverse))
    starts = np.concatenate(([0], np.cumsum(counts[:-1])))
    round_no = np.arange(n, dtype=np.int64) - np.repeat(starts, counts)

    m = int(np.floor(target_ratio * n + 0.5))
    draw_order = np.lexsort((inverse[order], round_no))
    selected = np.sort(order[draw_order[:m]])

    out = cloud.take(selected)
    return SampleResult(out, m / n, bins_total=len(uniq),
                        wall_time=time.perf_counter() - t0)


def run_sampler(cloud: PointCloud, config: SamplerConfig) -> SampleResult:
    """Dispatch on config.method; the CLI and bench harness go through here."""
    if config.method == "prism":
        return prism_sample(cloud, config)
    if config.method == "random":
        if config.target_ratio is None:
            raise ValueError("random sampling needs target_ratio")
        return random_sample(cloud, config.target_ratio, config.seed)
    if config.method == "voxel":
        if config.voxel_size is not None:
            return voxel_grid_sample(cloud, config.voxel_size)
        if config.target_ratio is not None:
            result, _ = voxel_sample_to_ratio(cloud, config.target_ratio)
            return result
        raise ValueError("voxel sampling needs voxel_size or target_ratio")
    if config.method == "nss":
        if config.target_ratio is None:
            raise ValueError("normal-space sampling needs target_ratio")
        src = cloud if cloud.normals is not None else estimate_normals(cloud, config.knn)
        return normal_space_sample(src, config.target_ratio, config.nss_buckets,
                                   config.seed)
    raise ValueError(f"unknown method {config.method!r}")
