"""Procedural test meshes: icospheres, tubes, planar grids, cubes and tori."""

import numpy as np

from .mesh import TriMesh

__all__ = ["icosphere", "cylinder_tube", "plane_grid", "cube", "torus", "torus_point"]


def _icosahedron():
    t = (1.0 + 5 ** 0.5) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def icosphere(subdivisions=3, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Loop-subdivided icosahedron with every vertex projected onto the sphere."""
    v, f = _icosahedron()
    for _ in range(subdivisions):
        edges = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        mids = v[uniq[:, 0]] + v[uniq[:, 1]]
        mids /= np.linalg.norm(mids, axis=1, keepdims=True)
        m = len(f)
        a = inverse[:m] + len(v)
        b = inverse[m:2 * m] + len(v)
        c = inverse[2 * m:] + len(v)
        v = np.concatenate([v, mids])
        f = np.concatenate([
            np.stack([f[:, 0], a, c], axis=1),
            np.stack([f[:, 1], b, a], axis=1),
            np.stack([f[:, 2], c, b], axis=1),
            np.stack([a, b, c], axis=1),
        ])
    return TriMesh(v * radius + np.asarray(center, dtype=np.float64), f)


def _grid_faces(nu, nv, wrap_u=False, wrap_v=False):
    """Two triangles per quad on an ``nu x nv`` vertex grid indexed ``i * nv + j``."""
    iu = np.arange(nu if wrap_u else nu - 1)
    iv = np.arange(nv if wrap_v else nv - 1)
    i, j = np.meshgrid(iu, iv, indexing="ij")
    i, j = i.ravel(), j.ravel()
    i1, j1 = (i + 1) % nu, (j + 1) % nv
    a, b, c, d = i * nv + j, i1 * nv + j, i1 * nv + j1, i * nv + j1
    return np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])


def plane_grid(nx=20, ny=20, spacing=1.0):
    """Regular triangulated grid in the plane z = 0, normals along +z."""
    x, y = np.meshgrid(np.arange(nx) * spacing, np.arange(ny) * spacing, indexing="ij")
    v = np.stack([x.ravel(), y.ravel(), np.zeros(nx * ny)], axis=1)
    return TriMesh(v, _grid_faces(nx, ny))


def cylinder_tube(radius=1.0, height=2.0, n_around=48, n_along=None):
    """Open tube around the z axis with outward-facing triangles.

    Rows are staggered by half a step so that every vertex has six
    neighbors arranged symmetrically. With ``n_along=None`` the row spacing
    is chosen to make the triangles close to equilateral.
    """
    step = 2 * np.pi * radius / n_around
    if n_along is None:
        n_along = max(2, int(round(height / (step * np.sqrt(3) / 2))) + 1)
    z = np.linspace(0.0, height, n_along)
    i, j = np.meshgrid(np.arange(n_along), np.arange(n_around), indexing="ij")
    theta = (j + 0.5 * (i % 2)) * (2 * np.pi / n_around)
    v = np.stack([radius * np.cos(theta).ravel(), radius * np.sin(theta).ravel(),
                  np.broadcast_to(z[:, None], theta.shape).ravel()], axis=1)
    faces = []
    for r in range(n_along - 1):
        for k in range(n_around):
            k1 = (k + 1) % n_around
            a, b = r * n_around + k, r * n_around + k1
            c, d = (r + 1) * n_around + k, (r + 1) * n_around + k1
            if r % 2 == 0:
                faces += [(a, b, c), (b, d, c)]
            else:
                faces += [(a, d, c), (a, b, d)]
    return TriMesh(v, np.array(faces, dtype=np.int64))


def cube(n=10, size=1.0):
    """Closed axis-aligned cube ``[0, size]^3`` with ``n`` segments per edge.

    Vertices on shared edges and corners are welded so that the mesh is a
    closed manifold with outward-facing triangles.
    """
    t = np.linspace(0.0, size, n + 1)
    pts, faces = [], []
    offset = 0
    # (fixed axis, fixed value, u axis, v axis) with u x v pointing outward
    sides = [
        (0, 0.0, 2, 1), (0, size, 1, 2),
        (1, 0.0, 0, 2), (1, size, 2, 0),
        (2, 0.0, 1, 0), (2, size, 0, 1),
    ]
    for axis, value, ua, va in sides:
        uu, vv = np.meshgrid(t, t, indexing="ij")
        p = np.zeros((n + 1, n + 1, 3))
        p[..., axis] = value
        p[..., ua] = uu
        p[..., va] = vv
        pts.append(p.reshape(-1, 3))
        faces.append(_grid_faces(n + 1, n + 1) + offset)
        offset += (n + 1) ** 2
    pts = np.concatenate(pts)
    faces = np.concatenate(faces)
    key = np.round(pts / size * n).astype(np.int64)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    # keep first-occurrence order so vertex numbering is stable
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    v = pts[first[order]]
    return TriMesh(v, remap[inverse][faces])


def torus_point(u, v, major=3.0, minor=1.0):
    """Torus position and outward unit normal at angles ``u`` (around the tube) and ``v``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n = np.stack([np.cos(u) * np.cos(v), np.cos(u) * np.sin(v), np.sin(u)], axis=-1)
    ring = np.stack([np.cos(v), np.sin(v), np.zeros_like(v)], axis=-1) * major
    return ring + minor * n, n


def torus(n_minor=10, n_major=20, major=3.0, minor=1.0):
    """Closed torus mesh on a uniform ``n_minor x n_major`` angle grid."""
    u = np.arange(n_minor) * (2 * np.pi / n_minor)
    v = np.arange(n_major) * (2 * np.pi / n_major)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    p, _ = torus_point(uu, vv, major, minor)
    # grid order (u, v) with u around the tube gives inward faces; flip them
    f = _grid_faces(n_minor, n_major, wrap_u=True, wrap_v=True)[:, ::-1]
    return TriMesh(p.reshape(-1, 3), f)
