"""Indexed triangle meshes, adjacency and mesh file I/O.

Supported formats are Wavefront OBJ (``v``/``f`` records), OFF and ASCII PLY.
Vertex coordinates are written with 17 significant digits so that a
save/load/save cycle reproduces the first file byte for byte.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MeshFormatError",
    "TriMesh",
    "Adjacency",
    "MeshStats",
    "load_mesh",
    "save_mesh",
    "build_adjacency",
    "unique_edges",
    "average_edge_length",
    "mesh_stats",
    "connectivity_hash",
]

_FORMATS = ("obj", "off", "ply")


class MeshFormatError(ValueError):
    """Raised when a mesh file cannot be parsed or holds an invalid mesh."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangle mesh with ``(n, 3)`` float64 vertices and ``(m, 3)`` int64 faces.

    Faces follow the counterclockwise orientation convention. Arrays are
    copied and made read-only on construction.
    """

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64, copy=True)
        f = np.array(self.faces, dtype=np.int64, copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must have shape (n, 3), got {v.shape}")
        if f.size == 0:
            f = f.reshape(0, 3)
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError(f"faces must be triangles with shape (m, 3), got {f.shape}")
        if f.size:
            if f.min() < 0 or f.max() >= len(v):
                raise ValueError("face index out of range")
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
                raise ValueError("face repeats a vertex index")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def with_vertices(self, vertices):
        """Return a mesh with the same connectivity and new positions."""
        return TriMesh(vertices, self.faces)

    def flipped(self):
        """Return the mesh with every face orientation reversed."""
        return TriMesh(self.vertices, self.faces[:, ::-1])


@dataclass(frozen=True, eq=False)
class Adjacency:
    """Vertex-to-face and vertex-to-vertex incidence in CSR layout.

    ``faces_of(i)`` lists the faces containing vertex ``i`` in ascending
    order; ``ring(i)`` lists the edge-connected vertices of ``i`` in
    ascending order.
    """

    face_offsets: np.ndarray
    face_indices: np.ndarray
    ring_offsets: np.ndarray
    ring_indices: np.ndarray

    def faces_of(self, i):
        return self.face_indices[self.face_offsets[i]:self.face_offsets[i + 1]]

    def ring(self, i):
        return self.ring_indices[self.ring_offsets[i]:self.ring_offsets[i + 1]]

    @property
    def ring_sizes(self):
        return np.diff(self.ring_offsets)

    def ring_centroids(self, positions):
        """Average of the 1-ring neighbors of every vertex.

        Vertices without neighbors keep their own position.
        """
        positions = np.asarray(positions, dtype=np.float64)
        n = len(self.ring_offsets) - 1
        counts = np.diff(self.ring_offsets)
        rows = np.repeat(np.arange(n), counts)
        sums = np.stack(
            [np.bincount(rows, positions[self.ring_indices, k], minlength=n) for k in range(3)],
            axis=1,
        )
        out = positions[:n].copy()
        has = counts > 0
        out[has] = sums[has] / counts[has, None]
        return out


@dataclass(frozen=True)
class MeshStats:
    mean_edge_length: float
    bbox_min: np.ndarray = field(repr=False)
    bbox_max: np.ndarray = field(repr=False)
    n_vertices: int
    n_faces: int
    n_edges: int


def _csr(rows, cols, n):
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return offsets, cols.astype(np.int64)


def unique_edges(mesh):
    """Undirected edges as a sorted ``(k, 2)`` array with ``e[:, 0] < e[:, 1]``."""
    f = mesh.faces
    if len(f) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def build_adjacency(mesh):
    n = mesh.n_vertices
    f = mesh.faces
    face_ids = np.repeat(np.arange(len(f), dtype=np.int64), 3)
    face_offsets, face_indices = _csr(f.reshape(-1), face_ids, n)
    e = unique_edges(mesh)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    ring_offsets, ring_indices = _csr(rows, cols, n)
    return Adjacency(face_offsets, face_indices, ring_offsets, ring_indices)


def average_edge_length(mesh):
    """Mean length over unique undirected edges (``l_e``)."""
    e = unique_edges(mesh)
    if len(e) == 0:
        raise ValueError("mesh has no edges")
    v = mesh.vertices
    return float(np.linalg.norm(v[e[:, 0]] - v[e[:, 1]], axis=1).mean())


def mesh_stats(mesh):
    e = unique_edges(mesh)
    v = mesh.vertices
    mean_len = float(np.linalg.norm(v[e[:, 0]] - v[e[:, 1]], axis=1).mean()) if len(e) else 0.0
    lo = v.min(axis=0) if len(v) else np.zeros(3)
    hi = v.max(axis=0) if len(v) else np.zeros(3)
    return MeshStats(mean_len, lo, hi, mesh.n_vertices, mesh.n_faces, len(e))


def connectivity_hash(mesh):
    """SHA-256 of the face array, for bit-exact connectivity comparison."""
    return hashlib.sha256(np.ascontiguousarray(mesh.faces, dtype="<i8").tobytes()).hexdigest()


# --------------------------------------------------------------------------
# file I/O


def _resolve_format(path, format):
    if format is None:
        format = os.path.splitext(str(path))[1].lstrip(".").lower()
    format = format.lower()
    if format == "ply-ascii":
        format = "ply"
    if format not in _FORMATS:
        raise ValueError(f"unsupported mesh format {format!r}; expected one of obj, off, ply")
    return format


def _fan(poly):
    return [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]


def _finish(vertices, faces, check_lines=None):
    if len(vertices) == 0 or len(faces) == 0:
        raise MeshFormatError("empty mesh: no vertices or no faces")
    v = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    f = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    n = len(v)
    if f.size:
        bad = np.flatnonzero((f < 0).any(axis=1) | (f >= n).any(axis=1))
        if len(bad):
            line = check_lines[bad[0]] if check_lines is not None else None
            raise MeshFormatError(f"face index out of range (vertex count {n})", line)
        rep = np.flatnonzero((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2]))
        if len(rep):
            line = check_lines[rep[0]] if check_lines is not None else None
            raise MeshFormatError("face repeats a vertex index", line)
    return TriMesh(v, f)


def _parse_float(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise MeshFormatError(f"cannot parse number {tok!r}", lineno) from None


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise MeshFormatError(f"cannot parse integer {tok!r}", lineno) from None


def _load_obj(lines):
    vertices, faces, face_lines = [], [], []
    for lineno, raw in enumerate(lines, 1):
        tok = raw.split("#", 1)[0].split()
        if not tok:
            continue
        if tok[0] == "v":
            if len(tok) < 4:
                raise MeshFormatError("vertex record needs 3 coordinates", lineno)
            vertices.append([_parse_float(t, lineno) for t in tok[1:4]])
        elif tok[0] == "f":
            if len(tok) < 4:
                raise MeshFormatError("face record needs at least 3 vertices", lineno)
            poly = []
            for t in tok[1:]:
                k = _parse_int(t.split("/", 1)[0], lineno)
                if k == 0:
                    raise MeshFormatError("OBJ indices are 1-based; found index 0", lineno)
                poly.append(k - 1 if k > 0 else len(vertices) + k)
            tris = _fan(poly)
            faces.extend(tris)
            face_lines.extend([lineno] * len(tris))
        # vt, vn, g, o, s, usemtl, mtllib and others are ignored
    return _finish(vertices, faces, face_lines)


def _data_lines(lines):
    for lineno, raw in enumerate(lines, 1):
        tok = raw.split("#", 1)[0].split()
        if tok:
            yield lineno, tok


def _load_off(lines):
    it = _data_lines(lines)
    try:
        lineno, tok = next(it)
    except StopIteration:
        raise MeshFormatError("empty file") from None
    if not tok[0].endswith("OFF"):
        raise MeshFormatError("missing OFF header", lineno)
    tok = tok[1:]
    if not tok:
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise MeshFormatError("missing element counts") from None
    if len(tok) < 2:
        raise MeshFormatError("missing element counts", lineno)
    nv, nf = _parse_int(tok[0], lineno), _parse_int(tok[1], lineno)
    vertices = []
    for _ in range(nv):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise MeshFormatError(f"expected {nv} vertices") from None
        if len(tok) < 3:
            raise MeshFormatError("vertex record needs 3 coordinates", lineno)
        vertices.append([_parse_float(t, lineno) for t in tok[:3]])
    faces, face_lines = [], []
    for _ in range(nf):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise MeshFormatError(f"expected {nf} faces") from None
        k = _parse_int(tok[0], lineno)
        if k < 3 or len(tok) < k + 1:
            raise MeshFormatError("malformed face record", lineno)
        tris = _fan([_parse_int(t, lineno) for t in tok[1:k + 1]])
        faces.extend(tris)
        face_lines.extend([lineno] * len(tris))
    return _finish(vertices, faces, face_lines)


def _load_ply(lines):
    it = _data_lines(lines)
    lineno, tok = next(it, (1, [""]))
    if tok[0] != "ply":
        raise MeshFormatError("missing ply magic", lineno)
    elements = []  # (name, count, [property names], list_property)
    while True:
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise MeshFormatError("unterminated PLY header") from None
        key = tok[0]
        if key == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise MeshFormatError("only ASCII PLY is supported", lineno)
        elif key == "element":
            elements.append((tok[1], _parse_int(tok[2], lineno), []))
        elif key == "property":
            if not elements:
                raise MeshFormatError("property before element", lineno)
            elements[-1][2].append(tok[-1] if tok[1] != "list" else ("list", tok[-1]))
        elif key == "end_header":
            break
        # comment and obj_info lines are dropped by _data_lines or ignored here
    vertices, faces, face_lines = [], [], []
    for name, count, props in elements:
        if name == "vertex":
            try:
                ix = [props.index(a) for a in ("x", "y", "z")]
            except ValueError:
                raise MeshFormatError("vertex element lacks x/y/z properties") from None
            for _ in range(count):
                try:
                    lineno, tok = next(it)
                except StopIteration:
                    raise MeshFormatError(f"expected {count} vertices") from None
                if len(tok) < len(props):
                    raise MeshFormatError("short vertex record", lineno)
                vertices.append([_parse_float(tok[k], lineno) for k in ix])
        elif name == "face":
            for _ in range(count):
                try:
                    lineno, tok = next(it)
                except StopIteration:
                    raise MeshFormatError(f"expected {count} faces") from None
                k = _parse_int(tok[0], lineno)
                if k < 3 or len(tok) < k + 1:
                    raise MeshFormatError("malformed face record", lineno)
                tris = _fan([_parse_int(t, lineno) for t in tok[1:k + 1]])
                faces.extend(tris)
                face_lines.extend([lineno] * len(tris))
        else:
            for _ in range(count):
                next(it, None)
    return _finish(vertices, faces, face_lines)


def load_mesh(path, format=None):
    """Read a triangle mesh; polygons with more than 3 corners are fan-split."""
    format = _resolve_format(path, format)
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    return {"obj": _load_obj, "off": _load_off, "ply": _load_ply}[format](lines)


def _fmt_rows(arr, fmt):
    return "\n".join(fmt % tuple(row) for row in arr.tolist())


def save_mesh(mesh, path, format=None, colors=None):
    """Write a mesh; per-vertex uint8 RGB ``colors`` are only supported for PLY."""
    format = _resolve_format(path, format)
    v, f = mesh.vertices, mesh.faces
    if colors is not None:
        if format != "ply":
            raise ValueError(f"{format.upper()} output does not support vertex colors")
        colors = np.asarray(colors)
        if colors.shape != (len(v), 3):
            raise ValueError("colors must have shape (n_vertices, 3)")
        colors = np.clip(np.rint(colors), 0, 255).astype(np.int64)
    parts = []
    if format == "obj":
        if len(v):
            parts.append(_fmt_rows(v, "v %.17g %.17g %.17g"))
        if len(f):
            parts.append(_fmt_rows(f + 1, "f %d %d %d"))
    elif format == "off":
        parts.append(f"OFF\n{len(v)} {len(f)} 0")
        if len(v):
            parts.append(_fmt_rows(v, "%.17g %.17g %.17g"))
        if len(f):
            parts.append(_fmt_rows(f, "3 %d %d %d"))
    else:
        header = ["ply", "format ascii 1.0", f"element vertex {len(v)}",
                  "property double x", "property double y", "property double z"]
        if colors is not None:
            header += ["property uchar red", "property uchar green", "property uchar blue"]
        header += [f"element face {len(f)}", "property list uchar int vertex_indices", "end_header"]
        parts.append("\n".join(header))
        if len(v):
            if colors is None:
                parts.append(_fmt_rows(v, "%.17g %.17g %.17g"))
            else:
                rows = np.concatenate([v, colors.astype(np.float64)], axis=1)
                parts.append(_fmt_rows(rows, "%.17g %.17g %.17g %d %d %d"))
        if len(f):
            parts.append(_fmt_rows(f, "3 %d %d %d"))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
