"""Color-stratified point cloud downsampling, baselines, and evaluation."""

__version__ = "0.1.0"

from .colorize import (
    BEHIND,
    OUT_OF_FRAME,
    CalibrationParams,
    ColorizeResult,
    RgbImage,
    colorize,
    load_calibration,
    project,
    to_camera_frame,
)
from .ksolver import KSolution, brute_force_k, output_size, solve_k
from .metrics import (
    ChromaHistogram,
    MetricsReport,
    NnIndex,
    chamfer,
    chroma_histogram,
    color_entropy,
    compare,
    entropy_gain,
    hausdorff,
)
from .model import (
    BinCounts,
    CalibrationError,
    ColorBin,
    ColoredPoint,
    ColorlessCloudError,
    EmptyCloudError,
    PlyFormatError,
    PointCloud,
    SamplerConfig,
)
from .pointcloud_io import PlyHeader, read_csv, read_ply, write_csv, write_ply
from .samplers import (
    SampleResult,
    bin_counts,
    estimate_normals,
    normal_space_sample,
    prism_sample,
    quantize_color,
    quantize_colors,
    random_sample,
    run_sampler,
    voxel_grid_sample,
    voxel_sample_to_ratio,
)

__all__ = [
    "__version__",
    "BEHIND", "OUT_OF_FRAME", "CalibrationParams", "ColorizeResult", "RgbImage",
    "colorize", "load_calibration", "project", "to_camera_frame",
    "KSolution", "brute_force_k", "output_size", "solve_k",
    "ChromaHistogram", "MetricsReport", "NnIndex", "chamfer", "chroma_histogram",
    "color_entropy", "compare", "entropy_gain", "hausdorff",
    "BinCounts", "CalibrationError", "ColorBin", "ColoredPoint",
    "ColorlessCloudError", "EmptyCloudError", "PlyFormatError", "PointCloud",
    "SamplerConfig",
    "PlyHeader", "read_csv", "read_ply", "write_csv", "write_ply",
    "SampleResult", "bin_counts", "estimate_normals", "normal_space_sample",
    "prism_sample", "quantize_color", "quantize_colors", "random_sample",
    "run_sampler", "voxel_grid_sample", "voxel_sample_to_ratio",
]
