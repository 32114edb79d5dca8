"""Analytic solver for the global per-bin capacity.

Given stratum sizes n_b and a target ratio r, the retained count
S(k) = sum_b min(n_b, k) is piecewise linear and nondecreasing in k.
Sorting the sizes ascending gives the breakpoints: on the segment where
the j smallest bins are saturated, S(k) = c_j + (|B| - j) * k with
c_j the cumulative sum of those j sizes.  Solving S(k) = r * N on the
bracketing segment and rounding to the closer integer neighbour yields
the optimum without scanning k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BinCounts


@dataclass(frozen=True)
class KSolution:
    """Solved capacity plus the exact size/ratio it produces.

    ``floor_warning`` is set when even k=1 overshoots the target, i.e. the
    bin count itself exceeds r*N; the method cannot compress further
    without dropping whole strata.
    """

    k_star: int
    predicted_size: int
    predicted_ratio: float
    j_segment: int
    floor_warning: bool = False


def output_size(counts: BinCounts, k: int) -> int:
    """Total points retained when every stratum is capped at k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return int(np.minimum(counts.counts, k).sum())


def solve_k(counts: BinCounts, r_target: float) -> KSolution:
    """Pick the integer capacity whose retained count is closest to r_target * N.

    Runs in O(|B| log |B|): one sort, one cumulative sum, one segment
    lookup.  Ties between the two integer neighbours go to the smaller k;
    the result is clamped to k >= 1.
    """
    if len(counts) == 0:
        raise ValueError("empty bin counts")
    if not 0.0 < r_target <= 1.0:
        raise ValueError(f"r_target must be in (0, 1], got {r_target}")

    sizes = np.sort(counts.counts)
    m = sizes.size
    total = counts.total
    target = r_target * total

    csum = np.concatenate(([0], np.cumsum(sizes)))
    # segment j: the j smallest bins saturated, valid for n_j <= k <= n_{j+1}
    denom = (m - np.arange(m)).astype(np.float64)
    cand = (target - csum[:m]) / denom
    lo = np.concatenate(([0], sizes[:-1])).astype(np.float64)
    hi = sizes.astype(np.float64)

    inside = (cand >= lo) & (cand <= hi)
    if inside.any():
        j = int(np.argmax(inside))
    else:
        # target above N or below |B|, or the real solution sits on a
        # breakpoint and rounding pushed every candidate out of bracket
        violation = np.maximum(lo - cand, cand - hi)
        j = int(np.argmin(violation))

    max_n = int(sizes[-1])
    k_real = float(min(max(cand[j], 1.0), max_n))
    k_floor = max(1, int(np.floor(k_real)))
    k_ceil = min(max_n, max(1, int(np.ceil(k_real))))

    s_floor = output_size(counts, k_floor)
    if k_ceil == k_floor:
        k_star, size = k_floor, s_floor
    else:
        s_ceil = output_size(counts, k_ceil)
        if abs(s_floor - target) <= abs(s_ceil - target):
            k_star, size = k_floor, s_floor
        else:
            k_star, size = k_ceil, s_ceil

    return KSolution(
        k_star=k_star,
        predicted_size=size,
        predicted_ratio=size / total,
        j_segment=j,
        floor_warning=m > target,
    )


def brute_force_k(counts: BinCounts, r_target: float) -> int:
    """Scan every k in 1..max(n_b) and return the argmin of |S(k) - r*N|.

    Test oracle for solve_k.  S is evaluated at all k at once by counting,
    for each level j, how many bins still grow past it; the running sum of
    those level populations is exactly S.  Ties resolve to the smaller k.
    """
    if len(counts) == 0:
        raise ValueError("empty bin counts")
    sizes = counts.counts
    m = sizes.size
    max_n = int(sizes.max())
    target = r_target * counts.total

    hist = np.bincount(sizes, minlength=max_n + 1)
    bins_above = m - np.cumsum(hist)[: max_n]  # #bins with n_b > j, j = 0..max_n-1
    s_all = np.cumsum(bins_above)  # s_all[k-1] == S(k)
    return int(np.argmin(np.abs(s_all - target))) + 1
