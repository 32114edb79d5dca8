"""Core domain types: colored points, point clouds, color bins, sampler configuration.

All types are immutable after construction and safe to share across threads.
Colors live in unit range [0, 1] in memory; 8-bit integers appear only at
file-I/O and binning boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

NORMAL_NORM_TOL = 1e-6

VALID_METHODS = ("prism", "random", "voxel", "nss")
VALID_QUANT_BITS = (0, 1, 2, 4)


class EmptyCloudError(ValueError):
    """Raised when an operation requires a non-empty point cloud."""


class ColorlessCloudError(ValueError):
    """Raised when a color-dependent operation receives a cloud without real colors."""


class CalibrationError(ValueError):
    """Raised when camera calibration parameters fail validation."""


class PlyFormatError(ValueError):
    """Raised on malformed, truncated or unsupported point cloud files."""


@dataclass(frozen=True)
class ColoredPoint:
    """A single 3D point with unit-range RGB color.

    Coordinates must be finite; colors are clamped into [0, 1] on construction.
    """

    x: float
    y: float
    z: float
    r: float = 0.0
    g: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite coordinate {name}={getattr(self, name)}")
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            object.__setattr__(self, name, min(1.0, max(0.0, float(v))))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @property
    def color(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class PointCloud:
    """Ordered collection of colored points, array-backed for bulk operations.

    `positions` is (N, 3) float64, `colors` is (N, 3) float64 in [0, 1] and
    `normals`, when present, is (N, 3) unit vectors.  A cloud loaded from a
    file without color carries ``colorless=True`` with all-zero colors so
    color-dependent consumers can reject it loudly.
    """

    __slots__ = ("positions", "colors", "normals", "colorless")

    def __init__(
        self,
        positions: np.ndarray,
        colors: Optional[np.ndarray] = None,
        normals: Optional[np.ndarray] = None,
        colorless: bool = False,
    ):
        positions = np.asarray(positions, dtype=np.float64)
        if positions.size == 0:
            positions = positions.reshape(0, 3)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise ValueError(f"positions must be (N, 3), got {positions.shape}")
        if not np.isfinite(positions).all():
            raise ValueError("non-finite coordinates in point cloud")
        n = positions.shape[0]

        if colors is None:
            colors = np.zeros((n, 3), dtype=np.float64)
            colorless = True
        else:
            colors = np.asarray(colors, dtype=np.float64)
            if colors.size == 0:
                colors = colors.reshape(0, 3)
            if colors.shape != (n, 3):
                raise ValueError(f"colors must be ({n}, 3), got {colors.shape}")
            if n and (colors.min() < 0.0 or colors.max() > 1.0):
                colors = np.clip(colors, 0.0, 1.0)

        if normals is not None:
            normals = np.asarray(normals, dtype=np.float64)
            if normals.shape != (n, 3):
                raise ValueError(f"normals must be ({n}, 3), got {normals.shape}")
            if n:
                norms = np.linalg.norm(normals, axis=1)
                if np.abs(norms - 1.0).max() > NORMAL_NORM_TOL:
                    raise ValueError("normals must be unit length")

        self.positions = _as_readonly(positions)
        self.colors = _as_readonly(colors)
        self.normals = _as_readonly(normals) if normals is not None else None
        self.colorless = bool(colorless)

    @classmethod
    def from_points(cls, points: Iterable[ColoredPoint]) -> "PointCloud":
        pts = list(points)
        pos = np.array([[p.x, p.y, p.z] for p in pts], dtype=np.float64).reshape(len(pts), 3)
        col = np.array([[p.r, p.g, p.b] for p in pts], dtype=np.float64).reshape(len(pts), 3)
        return cls(pos, col)

    def __len__(self) -> int:
        return self.positions.shape[0]

    def __getitem__(self, i: int) -> ColoredPoint:
        p = self.positions[i]
        c = self.colors[i]
        return ColoredPoint(p[0], p[1], p[2], c[0], c[1], c[2])

    def __iter__(self) -> Iterator[ColoredPoint]:
        for i in range(len(self)):
            yield self[i]

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def take(self, indices: np.ndarray) -> "PointCloud":
        """Subset by index array, preserving the given order and per-row attributes."""
        indices = np.asarray(indices)
        return PointCloud(
            self.positions[indices],
            self.colors[indices],
            self.normals[indices] if self.normals is not None else None,
            colorless=self.colorless,
        )

    def with_normals(self, normals: np.ndarray) -> "PointCloud":
        return PointCloud(self.positions, self.colors, normals, colorless=self.colorless)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        if len(self) != len(other) or self.colorless != other.colorless:
            return False
        if not (np.array_equal(self.positions, other.positions)
                and np.array_equal(self.colors, other.colors)):
            return False
        if (self.normals is None) != (other.normals is None):
            return False
        return self.normals is None or np.array_equal(self.normals, other.normals)

    def __repr__(self) -> str:
        tags = []
        if self.colorless:
            tags.append("colorless")
        if self.normals is not None:
            tags.append("normals")
        extra = f" [{', '.join(tags)}]" if tags else ""
        return f"PointCloud({len(self)} points{extra})"


@dataclass(frozen=True)
class ColorBin:
    """Quantized color stratum identifier.

    Channel values are the post-shift integers (``v >> quant_bits`` of an
    8-bit channel).  The dedicated ``achromatic`` bin collects near-black
    points under chromaticity normalization, where hue is undefined.
    """

    rb: int = 0
    gb: int = 0
    bb: int = 0
    achromatic: bool = False

    ACHROMATIC_KEY = -1

    def __post_init__(self):
        if not self.achromatic:
            for v in (self.rb, self.gb, self.bb):
                if not 0 <= v <= 255:
                    raise ValueError(f"bin channel {v} outside 0..255")

    @property
    def key(self) -> int:
        """Packed integer key; achromatic maps to a reserved negative key."""
        if self.achromatic:
            return self.ACHROMATIC_KEY
        return (self.rb << 16) | (self.gb << 8) | self.bb

    @classmethod
    def from_key(cls, key: int) -> "ColorBin":
        if key == cls.ACHROMATIC_KEY:
            return cls(achromatic=True)
        return cls((key >> 16) & 0xFF, (key >> 8) & 0xFF, key & 0xFF)

    @classmethod
    def achromatic_bin(cls) -> "ColorBin":
        return cls(achromatic=True)


class BinCounts:
    """Histogram of stratum sizes: packed bin key -> positive point count.

    Stores parallel arrays internally so solver math stays vectorized; the
    mapping view is materialized on demand.  Zero-count entries are never
    stored and the cached total always equals the sum of counts.
    """

    __slots__ = ("keys", "counts", "total")

    def __init__(self, keys: np.ndarray, counts: np.ndarray):
        keys = np.asarray(keys, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if keys.shape != counts.shape or keys.ndim != 1:
            raise ValueError("keys and counts must be parallel 1-D arrays")
        if counts.size and counts.min() <= 0:
            raise ValueError("bin counts must be positive")
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate bin keys")
        self.keys = _as_readonly(keys)
        self.counts = _as_readonly(counts)
        self.total = int(counts.sum())

    @classmethod
    def from_mapping(cls, mapping: Mapping[ColorBin, int]) -> "BinCounts":
        keys = np.array([b.key for b in mapping], dtype=np.int64)
        counts = np.array(list(mapping.values()), dtype=np.int64)
        return cls(keys, counts)

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "BinCounts":
        """Build from bare stratum sizes with synthetic keys (solver-side tests)."""
        counts = np.asarray(list(counts), dtype=np.int64)
        return cls(np.arange(len(counts), dtype=np.int64), counts)

    def __len__(self) -> int:
        return len(self.keys)

    def items(self) -> Iterator[tuple[ColorBin, int]]:
        for k, c in zip(self.keys.tolist(), self.counts.tolist()):
            yield ColorBin.from_key(k), c

    def as_dict(self) -> dict[ColorBin, int]:
        return dict(self.items())

    def __repr__(self) -> str:
        return f"BinCounts({len(self)} bins, {self.total} points)"


@dataclass(frozen=True)
class SamplerConfig:
    """Full parameterization of one sampling run.

    For PRISM exactly one of ``target_ratio`` / ``explicit_k`` drives the
    bin capacity; ``explicit_k`` wins when both are set.
    """

    method: str = "prism"
    target_ratio: Optional[float] = None
    explicit_k: Optional[int] = None
    quant_bits: int = 0
    chromaticity: bool = False
    voxel_size: Optional[float] = None
    nss_buckets: int = 64
    knn: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.method not in VALID_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.target_ratio is not None and not 0.0 < self.target_ratio <= 1.0:
            raise ValueError(f"target_ratio must be in (0, 1], got {self.target_ratio}")
        if self.explicit_k is not None and self.explicit_k < 1:
            raise ValueError(f"explicit_k must be >= 1, got {self.explicit_k}")
        if self.quant_bits not in VALID_QUANT_BITS:
            raise ValueError(f"quant_bits must be one of {VALID_QUANT_BITS}")
        if self.voxel_size is not None and not self.voxel_size > 0:
            raise ValueError(f"voxel_size must be > 0, got {self.voxel_size}")
        if self.nss_buckets < 2:
            raise ValueError(f"nss_buckets must be >= 2, got {self.nss_buckets}")
        if self.knn < 1:
            raise ValueError(f"knn must be >= 1, got {self.knn}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.method == "prism" and self.target_ratio is None and self.explicit_k is None:
            raise ValueError("prism requires target_ratio or explicit_k")

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "target_ratio": self.target_ratio,
            "explicit_k": self.explicit_k,
            "quant_bits": self.quant_bits,
            "chromaticity": self.chromaticity,
            "voxel_size": self.voxel_size,
            "nss_buckets": self.nss_buckets,
            "knn": self.knn,
            "seed": self.seed,
        }
