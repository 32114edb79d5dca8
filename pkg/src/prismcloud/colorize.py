"""Camera model: rigid transform, pinhole projection, per-point color lookup.

Points are moved into the camera frame with p_cam = R p + t, projected by
u = fx * (x / z) + cx, v = fy * (y / z) + cy, and snapped to the nearest
pixel with floor(. + 0.5).  Points with z at or below the near-plane
epsilon are culled as Behind; rounded pixels outside the image are culled
as OutOfFrame.  Lookup is nearest-pixel, no interpolation, no occlusion
test, so every output color is a pixel that actually exists in the image.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .model import CalibrationError, PointCloud

NEAR_PLANE_EPS = 1e-6
ROTATION_TOL = 1e-6


class _Culled:
    __slots__ = ("reason",)

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self) -> str:
        return self.reason


BEHIND = _Culled("Behind")
OUT_OF_FRAME = _Culled("OutOfFrame")

ProjectResult = Union[Tuple[int, int], _Culled]


@dataclass(frozen=True)
class CalibrationParams:
    """Pinhole intrinsics plus the rigid sensor-to-camera transform.

    R must be a proper rotation (orthonormal, det +1) within 1e-6; a
    reflection or sheared matrix is rejected at construction, never
    re-orthonormalized.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    R: np.ndarray
    t: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        R = np.asarray(self.R, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64)
        if R.shape != (3, 3):
            raise CalibrationError(f"R must be 3x3, got {R.shape}")
        if t.shape != (3,):
            raise CalibrationError(f"t must be a 3-vector, got {t.shape}")
        if not (np.isfinite(R).all() and np.isfinite(t).all()):
            raise CalibrationError("non-finite extrinsics")
        if np.abs(R @ R.T - np.eye(3)).max() > ROTATION_TOL:
            raise CalibrationError("R is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
            raise CalibrationError("R must have det +1 (reflections rejected)")
        if not (self.fx > 0 and self.fy > 0):
            raise CalibrationError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise CalibrationError("image size must be positive")
        if not 0 <= self.cx < self.width:
            raise CalibrationError(f"cx={self.cx} outside [0, {self.width})")
        if not 0 <= self.cy < self.height:
            raise CalibrationError(f"cy={self.cy} outside [0, {self.height})")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationParams":
        try:
            R = np.asarray(d["R"], dtype=np.float64).reshape(3, 3)
            t = np.asarray(d["t"], dtype=np.float64).reshape(3)
            return cls(
                fx=float(d["fx"]), fy=float(d["fy"]),
                cx=float(d["cx"]), cy=float(d["cy"]),
                R=R, t=t,
                width=int(d["width"]), height=int(d["height"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(f"bad calibration payload: {exc}") from exc


def load_calibration(path) -> CalibrationParams:
    """Read the calibration JSON: fx, fy, cx, cy, R (9 row-major), t (3), width, height."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CalibrationError(f"calibration file is not valid JSON: {exc}") from exc
    return CalibrationParams.from_dict(payload)


class RgbImage:
    """Unit-range RGB raster with (u, v) pixel access, u along width."""

    __slots__ = ("pixels", "width", "height")

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3), got {pixels.shape}")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise ValueError("pixel values must be in [0, 1]")
        pixels.setflags(write=False)
        self.pixels = pixels
        self.height = pixels.shape[0]
        self.width = pixels.shape[1]

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "RgbImage":
        return cls(np.asarray(data, dtype=np.float64) / 255.0)

    def pixel(self, u: int, v: int):
        if not (0 <= u < self.width and 0 <= v < self.height):
            raise IndexError(f"pixel ({u}, {v}) outside {self.width}x{self.height}")
        r, g, b = self.pixels[v, u]
        return float(r), float(g), float(b)


def to_camera_frame(p, calib: CalibrationParams) -> np.ndarray:
    """Apply the rigid transform R p + t; accepts one point or an (N, 3) batch.

    Written componentwise (not as a BLAS matmul) so batch and per-point
    evaluation produce bitwise identical float64 results.
    """
    p = np.asarray(p, dtype=np.float64)
    R, t = calib.R, calib.t
    single = p.ndim == 1
    if single:
        p = p.reshape(1, 3)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    out = np.empty_like(p)
    for i in range(3):
        out[:, i] = R[i, 0] * x + R[i, 1] * y + R[i, 2] * z + t[i]
    return out[0] if single else out


def project(p_cam, calib: CalibrationParams) -> ProjectResult:
    """Project one camera-frame point to an integer pixel, or cull it."""
    x, y, z = (float(v) for v in p_cam)
    if z <= NEAR_PLANE_EPS:
        return BEHIND
    u = calib.fx * (x / z) + calib.cx
    v = calib.fy * (y / z) + calib.cy
    ui = math.floor(u + 0.5)
    vi = math.floor(v + 0.5)
    if not (0 <= ui < calib.width and 0 <= vi < calib.height):
        return OUT_OF_FRAME
    return ui, vi


@dataclass(frozen=True)
class ColorizeResult:
    cloud: PointCloud
    kept: int
    dropped: int


def colorize(points: PointCloud, image: RgbImage, calib: CalibrationParams,
             keep_uncolored: bool = False) -> ColorizeResult:
    """Color each point from the pixel it projects onto.

    Points behind the near plane or projecting outside the frame are
    dropped (or kept black when keep_uncolored is set).  Survivor order
    follows input order.
    """
    if image.width != calib.width or image.height != calib.height:
        raise CalibrationError(
            f"image is {image.width}x{image.height} but calibration says "
            f"{calib.width}x{calib.height}")

    n = len(points)
    if n == 0:
        return ColorizeResult(PointCloud(np.zeros((0, 3)), np.zeros((0, 3))), 0, 0)

    cam = to_camera_frame(points.positions, calib)
    z = cam[:, 2]
    front = z > NEAR_PLANE_EPS

    ui = np.full(n, -1, dtype=np.int64)
    vi = np.full(n, -1, dtype=np.int64)
    zf = z[front]
    u = calib.fx * (cam[front, 0] / zf) + calib.cx
    v = calib.fy * (cam[front, 1] / zf) + calib.cy
    ui[front] = np.floor(u + 0.5).astype(np.int64)
    vi[front] = np.floor(v + 0.5).astype(np.int64)

    in_frame = front & (ui >= 0) & (ui < calib.width) & (vi >= 0) & (vi < calib.height)
    dropped = int(n - in_frame.sum())

    if keep_uncolored:
        colors = np.zeros((n, 3), dtype=np.float64)
        colors[in_frame] = image.pixels[vi[in_frame], ui[in_frame]]
        out = PointCloud(points.positions, colors,
                         points.normals if points.normals is not None else None)
    else:
        keep = np.flatnonzero(in_frame)
        colors = image.pixels[vi[keep], ui[keep]]
        out = PointCloud(points.positions[keep], colors,
                         points.normals[keep] if points.normals is not None else None)
    return ColorizeResult(out, n - dropped, dropped)
