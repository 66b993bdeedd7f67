import numpy as np
import pytest

from hmls.mesh import (MeshFormatError, TriMesh, average_edge_length, build_adjacency,
                       connectivity_hash, load_mesh, mesh_stats, save_mesh, unique_edges)
from hmls.shapes import icosphere, plane_grid, torus

from oracles import brute_force_edge_lengths

TETRA = TriMesh(
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
    [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
)


def test_load_minimal_off(tmp_path):
    p = tmp_path / "tri.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    m = load_mesh(p)
    assert m.n_vertices == 3 and m.n_faces == 1


def test_obj_quad_is_fan_split(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    m = load_mesh(p)
    np.testing.assert_array_equal(m.faces, [[0, 1, 2], [0, 2, 3]])


def test_obj_ignores_texture_and_normal_records(tmp_path):
    p = tmp_path / "tex.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 3/1/1\n")
    m = load_mesh(p)
    np.testing.assert_array_equal(m.faces, [[0, 1, 2]])


def test_obj_negative_indices(tmp_path):
    p = tmp_path / "neg.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    np.testing.assert_array_equal(load_mesh(p).faces, [[0, 1, 2]])


def test_obj_zero_index_rejected_with_line_number(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\n# comment\nf 0 1 2\n")
    with pytest.raises(MeshFormatError) as exc:
        load_mesh(p)
    assert exc.value.line == 5
    assert "line 5" in str(exc.value)


@pytest.mark.parametrize("text, line", [
    ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n", 4),
    ("v 0 0 0\nv 1 0 x\n", 2),
])
def test_obj_errors(tmp_path, text, line):
    p = tmp_path / "bad.obj"
    p.write_text(text)
    with pytest.raises(MeshFormatError) as exc:
        load_mesh(p)
    assert exc.value.line == line


def test_empty_mesh_rejected(tmp_path):
    p = tmp_path / "empty.obj"
    p.write_text("# nothing\n")
    with pytest.raises(MeshFormatError, match="empty"):
        load_mesh(p)


def test_off_out_of_range(tmp_path):
    p = tmp_path / "bad.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n")
    with pytest.raises(MeshFormatError, match="out of range"):
        load_mesh(p)


def test_ply_with_colors_and_extra_properties(tmp_path):
    p = tmp_path / "c.ply"
    p.write_text(
        "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\nproperty float confidence\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
        "0 0 0 1 255 0 0\n1 0 0 1 0 255 0\n0 1 0 1 0 0 255\n3 0 1 2\n"
    )
    m = load_mesh(p)
    np.testing.assert_allclose(m.vertices[1], [1, 0, 0])


def test_binary_ply_rejected(tmp_path):
    p = tmp_path / "b.ply"
    p.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n")
    with pytest.raises(MeshFormatError, match="ASCII"):
        load_mesh(p)


@pytest.mark.parametrize("fmt", ["obj", "off", "ply"])
def test_round_trip_tetrahedron(tmp_path, fmt):
    p = tmp_path / f"t.{fmt}"
    save_mesh(TETRA, p)
    m = load_mesh(p)
    np.testing.assert_array_equal(m.faces, TETRA.faces)
    np.testing.assert_allclose(m.vertices, TETRA.vertices, rtol=1e-6, atol=0)


@pytest.mark.parametrize("fmt", ["obj", "off", "ply"])
def test_second_save_is_byte_identical(tmp_path, fmt, rng):
    mesh = torus(12, 24).with_vertices(torus(12, 24).vertices + rng.normal(scale=1e-3, size=(288, 3)))
    a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
    save_mesh(mesh, a)
    save_mesh(load_mesh(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_colors_require_ply(tmp_path):
    colors = np.zeros((4, 3), dtype=np.uint8)
    with pytest.raises(ValueError, match="color"):
        save_mesh(TETRA, tmp_path / "t.off", colors=colors)
    save_mesh(TETRA, tmp_path / "t.ply", colors=colors)
    assert "property uchar red" in (tmp_path / "t.ply").read_text()


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        save_mesh(TETRA, tmp_path / "missing_dir" / "t.obj")


def test_large_round_trip_connectivity_hash(tmp_path):
    mesh = torus(125, 280)
    assert mesh.n_vertices == 35000
    p = tmp_path / "big.obj"
    save_mesh(mesh, p)
    assert connectivity_hash(load_mesh(p)) == connectivity_hash(mesh)


def test_trimesh_invariants():
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0], [1, 0, 0]], [[0, 1, 2]])
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], [[0, 1, 2, 3]])


def test_adjacency_single_triangle():
    adj = build_adjacency(TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]]))
    for i in range(3):
        assert len(adj.ring(i)) == 2
        assert list(adj.faces_of(i)) == [0]


def test_adjacency_tetrahedron():
    adj = build_adjacency(TETRA)
    for i in range(4):
        assert len(adj.ring(i)) == 3
        assert len(adj.faces_of(i)) == 3


def test_adjacency_fan_hub():
    ang = np.arange(6) * np.pi / 3
    v = np.vstack([[0, 0, 0], np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], 1)])
    f = [[0, 1 + k, 1 + (k + 1) % 6] for k in range(6)]
    adj = build_adjacency(TriMesh(v, f))
    assert list(adj.ring(0)) == [1, 2, 3, 4, 5, 6]
    assert len(adj.faces_of(0)) == 6


def test_adjacency_matches_definition():
    mesh = icosphere(2)
    adj = build_adjacency(mesh)
    for i in range(mesh.n_vertices):
        incident = {k for k, f in enumerate(mesh.faces) if i in f}
        assert set(adj.faces_of(i).tolist()) == incident
        ring = {int(j) for k in incident for j in mesh.faces[k] if j != i}
        assert set(adj.ring(i).tolist()) == ring


def test_adjacency_invariant_under_face_reordering(rng):
    mesh = icosphere(2)
    perm = rng.permutation(mesh.n_faces)
    shuffled = TriMesh(mesh.vertices, mesh.faces[perm])
    a, b = build_adjacency(mesh), build_adjacency(shuffled)
    np.testing.assert_array_equal(a.ring_offsets, b.ring_offsets)
    np.testing.assert_array_equal(a.ring_indices, b.ring_indices)
    for i in range(mesh.n_vertices):
        fa = {tuple(mesh.faces[k]) for k in a.faces_of(i)}
        fb = {tuple(shuffled.faces[k]) for k in b.faces_of(i)}
        assert fa == fb


def test_edge_set_symmetric():
    adj = build_adjacency(icosphere(2))
    pairs = {(i, int(j)) for i in range(len(adj.ring_offsets) - 1) for j in adj.ring(i)}
    assert all((j, i) in pairs for i, j in pairs)


def test_average_edge_length_equilateral():
    h = np.sqrt(3.0)
    mesh = TriMesh([[0, 0, 0], [2, 0, 0], [1, h, 0]], [[0, 1, 2]])
    assert average_edge_length(mesh) == pytest.approx(2.0, rel=1e-15)


def test_average_edge_length_right_triangle():
    mesh = TriMesh([[0, 0, 0], [3, 0, 0], [0, 4, 0]], [[0, 1, 2]])
    assert average_edge_length(mesh) == pytest.approx(4.0, rel=1e-15)


def test_average_edge_length_icosphere_against_enumeration():
    mesh = icosphere(3)
    lengths = brute_force_edge_lengths(mesh.vertices, mesh.faces)
    assert len(lengths) == len(unique_edges(mesh)) == 1920
    assert average_edge_length(mesh) == pytest.approx(lengths.mean(), rel=1e-12)


def test_shared_edges_counted_once():
    mesh = plane_grid(2, 2)
    # 4 sides of length 1 and one diagonal of length sqrt(2)
    assert average_edge_length(mesh) == pytest.approx((4 + np.sqrt(2)) / 5)


def test_average_edge_length_requires_edges():
    with pytest.raises(ValueError):
        average_edge_length(TriMesh(np.zeros((3, 3)), np.zeros((0, 3))))


def test_mesh_stats():
    s = mesh_stats(TETRA)
    assert (s.n_vertices, s.n_faces, s.n_edges) == (4, 4, 6)
    np.testing.assert_array_equal(s.bbox_max, [1, 1, 1])
