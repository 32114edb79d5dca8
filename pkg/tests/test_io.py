import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from prismcloud import PlyFormatError, PointCloud, read_csv, read_ply, write_csv, write_ply

from conftest import make_cloud


def roundtrippable(cloud: PointCloud) -> PointCloud:
    """What a written-then-read copy of `cloud` should equal exactly."""
    colors = np.floor(cloud.colors * 255.0 + 0.5) / 255.0
    return PointCloud(cloud.positions.astype(np.float32).astype(np.float64),
                      colors, colorless=cloud.colorless)


def test_single_ascii_vertex(tmp_path):
    p = tmp_path / "one.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                 "end_header\n0 0 0 255 0 0\n")
    cloud = read_ply(p)
    assert len(cloud) == 1
    assert cloud.colors.tolist() == [[1.0, 0.0, 0.0]]


def test_color_half_rounds_away_from_zero(tmp_path):
    cloud = PointCloud(np.zeros((1, 3)), np.array([[0.5, 0.0, 1.0]]))
    path = tmp_path / "half.ply"
    write_ply(cloud, path, format="ascii")
    text = path.read_text()
    assert text.splitlines()[-1] == "0.0 0.0 0.0 128 0 255"


def test_missing_color_trio_flags_colorless(tmp_path):
    p = tmp_path / "plain.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 2\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "end_header\n1 2 3\n4 5 6\n")
    cloud = read_ply(p)
    assert cloud.colorless
    assert np.array_equal(cloud.colors, np.zeros((2, 3)))


def test_property_order_respected(tmp_path):
    # colors before coordinates, z before x
    p = tmp_path / "shuffled.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                 "property uchar red\nproperty uchar green\nproperty uchar blue\n"
                 "property float z\nproperty float y\nproperty float x\n"
                 "end_header\n255 0 0 3 2 1\n")
    cloud = read_ply(p)
    assert cloud.positions.tolist() == [[1.0, 2.0, 3.0]]
    assert cloud.colors.tolist() == [[1.0, 0.0, 0.0]]


def test_unknown_properties_skipped(tmp_path):
    p = tmp_path / "extra.ply"
    p.write_text("ply\nformat ascii 1.0\ncomment with intensity\n"
                 "element vertex 1\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "property float intensity\nproperty uchar alpha\n"
                 "end_header\n1 2 3 0.77 200\n")
    cloud = read_ply(p)
    assert cloud.positions.tolist() == [[1.0, 2.0, 3.0]]
    assert cloud.colorless


def test_empty_cloud_write_requires_flag(tmp_path):
    empty = PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))
    with pytest.raises(ValueError):
        write_ply(empty, tmp_path / "no.ply")
    path = tmp_path / "yes.ply"
    write_ply(empty, path, allow_empty=True)
    back = read_ply(path)
    assert len(back) == 0 and not back.colorless


@pytest.mark.parametrize("header,body", [
    ("nope\nformat ascii 1.0\nend_header\n", ""),                    # bad magic
    ("ply\nformat binary_big_endian 1.0\nelement vertex 0\n"
     "property float x\nproperty float y\nproperty float z\nend_header\n", ""),
    ("ply\nformat ascii 1.0\nelement vertex 1\n"
     "property float x\nproperty float y\nend_header\n", "1 2\n"),   # missing z
    ("ply\nformat ascii 1.0\nelement vertex 1\n"
     "property quad x\nproperty float y\nproperty float z\nend_header\n",
     "1 2 3\n"),                                                     # bad scalar type
])
def test_malformed_headers_rejected(tmp_path, header, body):
    p = tmp_path / "bad.ply"
    p.write_text(header + body)
    with pytest.raises(PlyFormatError):
        read_ply(p)


def test_truncated_ascii_payload(tmp_path):
    p = tmp_path / "short.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 3\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "end_header\n1 2 3\n4 5 6\n")
    with pytest.raises(PlyFormatError):
        read_ply(p)


def test_truncated_binary_payload(tmp_path):
    cloud = make_cloud(10, seed=3)
    path = tmp_path / "full.ply"
    write_ply(cloud, path, format="binary_little_endian")
    data = path.read_bytes()
    (tmp_path / "cut.ply").write_bytes(data[:-5])
    with pytest.raises(PlyFormatError):
        read_ply(tmp_path / "cut.ply")


def test_no_end_header(tmp_path):
    p = tmp_path / "open.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n")
    with pytest.raises(PlyFormatError):
        read_ply(p)


def test_double_precision_coordinates_accepted(tmp_path):
    p = tmp_path / "dbl.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                 "property double x\nproperty double y\nproperty double z\n"
                 "end_header\n0.1 0.2 0.3\n")
    cloud = read_ply(p)
    assert cloud.positions.tolist() == [[0.1, 0.2, 0.3]]


def test_float_colors_rejected(tmp_path):
    p = tmp_path / "fcol.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "property float red\nproperty float green\nproperty float blue\n"
                 "end_header\n0 0 0 1 0 0\n")
    with pytest.raises(PlyFormatError):
        read_ply(p)


def test_preceding_element_skipped_ascii(tmp_path):
    p = tmp_path / "pre.ply"
    p.write_text("ply\nformat ascii 1.0\n"
                 "element camera 1\nproperty float focal\n"
                 "element vertex 1\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "end_header\n500.0\n1 2 3\n")
    assert read_ply(p).positions.tolist() == [[1.0, 2.0, 3.0]]


@pytest.mark.parametrize("fmt", ["ascii", "binary_little_endian"])
def test_round_trip_10k(tmp_path, fmt):
    cloud = make_cloud(10_000, palette_size=256, seed=11)
    path = tmp_path / "rt.ply"
    write_ply(cloud, path, format=fmt)
    assert read_ply(path) == roundtrippable(cloud)


def test_cross_format_writes_agree(tmp_path):
    cloud = make_cloud(2000, seed=5)
    write_ply(cloud, tmp_path / "a.ply", format="ascii")
    write_ply(cloud, tmp_path / "b.ply", format="binary_little_endian")
    assert read_ply(tmp_path / "a.ply") == read_ply(tmp_path / "b.ply")


def test_normals_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    normals = rng.normal(size=(50, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    cloud = PointCloud(rng.normal(size=(50, 3)), rng.uniform(size=(50, 3)), normals)
    path = tmp_path / "n.ply"
    write_ply(cloud, path, format="binary_little_endian")
    back = read_ply(path)
    assert back.has_normals
    assert np.abs(back.normals - normals).max() < 1e-6


coords = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False, width=32)
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@given(st.lists(st.tuples(coords, coords, coords, unit, unit, unit),
                min_size=1, max_size=60),
       st.sampled_from(["ascii", "binary_little_endian"]))
@settings(max_examples=60, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_round_trip_property(tmp_path, rows, fmt):
    arr = np.array(rows, dtype=np.float64)
    cloud = PointCloud(arr[:, :3], arr[:, 3:])
    path = tmp_path / f"prop_{fmt}.ply"
    write_ply(cloud, path, format=fmt)
    assert read_ply(path) == roundtrippable(cloud)


def test_csv_round_trip(tmp_path):
    cloud = make_cloud(500, seed=21)
    path = tmp_path / "c.csv"
    write_csv(cloud, path)
    back = read_csv(path)
    # CSV keeps full float64 precision
    assert np.array_equal(back.positions, cloud.positions)
    assert np.array_equal(back.colors, cloud.colors)


def test_csv_header_enforced(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(PlyFormatError):
        read_csv(p)
