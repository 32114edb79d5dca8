import numpy as np
import pytest

from prismcloud import PointCloud

# outcome of every acceptance test, printed as a summary block at the end
ACCEPTANCE_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    rep = out.get_result()
    if "test_acceptance" in str(item.fspath):
        if rep.when == "call":
            status = "PASS" if rep.passed else "FAIL"
            ACCEPTANCE_RESULTS[item.name] = (status, rep.duration)
            if rep.skipped:
                ACCEPTANCE_RESULTS[item.name] = ("SKIP", rep.duration)
        elif rep.when == "setup" and rep.skipped:
            ACCEPTANCE_RESULTS[item.name] = ("SKIP", 0.0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, (status, duration) in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{status}: {name} ({duration:.2f}s)")


def make_cloud(n: int, palette_size: int = 64, seed: int = 0,
               spread: float = 10.0) -> PointCloud:
    """Random positions with colors drawn from a fixed-size 8-bit palette."""
    rng = np.random.default_rng(seed)
    positions = rng.uniform(-spread, spread, size=(n, 3))
    palette = np.round(rng.uniform(size=(palette_size, 3)) * 255.0) / 255.0
    colors = palette[rng.integers(0, palette_size, size=n)]
    return PointCloud(positions, colors)


def make_skewed_cloud(n: int = 20000, majority_frac: float = 0.95,
                      minority_colors: int = 250, seed: int = 0) -> PointCloud:
    """One dominant color plus a small spread over many rare colors."""
    rng = np.random.default_rng(seed)
    n_major = int(n * majority_frac)
    major = np.tile([0.5, 0.5, 0.5], (n_major, 1))
    palette = np.round(rng.uniform(size=(minority_colors, 3)) * 255.0) / 255.0
    minor = palette[rng.integers(0, minority_colors, size=n - n_major)]
    return PointCloud(rng.normal(size=(n, 3)), np.vstack([major, minor]))


def make_luminance_jitter_cloud(n_bases: int = 50, per_base: int = 100,
                                seed: int = 0) -> PointCloud:
    """Few base chromaticities, each repeated under many brightness factors."""
    rng = np.random.default_rng(seed)
    bases = rng.uniform(0.15, 0.9, size=(n_bases, 3))
    lum = rng.uniform(0.2, 1.0, size=(n_bases, per_base, 1))
    colors = (bases[:, None, :] * lum).reshape(-1, 3)
    n = colors.shape[0]
    return PointCloud(rng.normal(size=(n, 3)) * 5.0, colors)
