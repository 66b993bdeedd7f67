"""Synthetic noise, displacement and signed-distance reports, mean curvature."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mesh import average_edge_length
from .normals import face_normals, vertex_normals
from .spatial import build_index

__all__ = [
    "NOISE_MODELS",
    "NoiseSpec",
    "ErrorReport",
    "add_noise",
    "displacement_report",
    "closest_point_on_triangles",
    "closest_points",
    "signed_distance_map",
    "signed_distance_colors",
    "mean_curvature",
    "curvature_colors",
    "dihedral_angles",
]

NOISE_MODELS = ("gaussian-random-direction", "uniform-normal-direction")

PURPLE = np.array([160.0, 32.0, 240.0])
GREEN = np.array([0.0, 200.0, 0.0])
CYAN = np.array([0.0, 255.0, 255.0])
GREY = np.array([128.0, 128.0, 128.0])


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model; ``magnitude`` is a multiple of the mean edge length.

    For the Gaussian model it is the standard deviation, for the uniform
    model the maximum deviation along the vertex normal.
    """

    model: str = "uniform-normal-direction"
    magnitude: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise ValueError(f"noise model must be one of {NOISE_MODELS}, got {self.model!r}")
        if not self.magnitude >= 0:
            raise ValueError(f"noise magnitude must be >= 0, got {self.magnitude}")


def add_noise(mesh, spec):
    """Displace every vertex according to ``spec``; connectivity is untouched."""
    le = average_edge_length(mesh)
    rng = np.random.default_rng(spec.seed)
    n = mesh.n_vertices
    amount = spec.magnitude * le
    if spec.model == "gaussian-random-direction":
        g = rng.normal(0.0, 1.0, size=n) * amount
        u = rng.normal(size=(n, 3))
        norm = np.linalg.norm(u, axis=1, keepdims=True)
        # a zero triple has probability zero; fall back to +x just in case
        u = np.where(norm > 0, u / np.where(norm > 0, norm, 1.0), [1.0, 0.0, 0.0])
        disp = g[:, None] * u
    else:
        t = rng.uniform(-1.0, 1.0, size=n) * amount
        disp = t[:, None] * vertex_normals(mesh).vertex
    return mesh.with_vertices(mesh.vertices + disp)


@dataclass(frozen=True)
class ErrorReport:
    displacements: np.ndarray
    mean: float
    max: float
    rms: float
    count: int
    signed_distances: np.ndarray | None = None
    curvature: np.ndarray | None = None

    def to_dict(self, per_vertex=False):
        out = {"mean": self.mean, "max": self.max, "rms": self.rms, "count": self.count}
        if per_vertex:
            out["per_vertex"] = self.displacements.tolist()
            if self.signed_distances is not None:
                out["signed_distances"] = self.signed_distances.tolist()
            if self.curvature is not None:
                out["mean_curvature"] = [None if not np.isfinite(h) else h
                                         for h in self.curvature.tolist()]
        return out

    def to_json(self, per_vertex=False, **kw):
        return json.dumps(self.to_dict(per_vertex), **kw)


def displacement_report(a, b):
    """Per-vertex distances between corresponding vertices of two meshes."""
    if a.n_vertices != b.n_vertices:
        raise ValueError(f"vertex count mismatch: {a.n_vertices} vs {b.n_vertices}")
    d = np.linalg.norm(a.vertices - b.vertices, axis=1)
    if len(d) == 0:
        return ErrorReport(d, 0.0, 0.0, 0.0, 0)
    return ErrorReport(d, float(d.mean()), float(d.max()), float(np.sqrt(np.mean(d * d))), len(d))


# --------------------------------------------------------------------------
# point-triangle distance


def closest_point_on_triangles(p, a, b, c):
    """Closest points on triangles ``abc`` to points ``p`` (all ``(k, 3)``).

    Returns ``(points, barycentric)`` following the Voronoi-region case
    analysis for point/triangle queries. Degenerate triangles fall back to
    the closest of their edges.
    """
    p, a, b, c = (np.asarray(x, dtype=np.float64) for x in (p, a, b, c))
    dot = lambda x, y: np.einsum("ij,ij->i", x, y)  # noqa: E731
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = dot(ab, ap), dot(ac, ap)
    bp = p - b
    d3, d4 = dot(ab, bp), dot(ac, bp)
    cp = p - c
    d5, d6 = dot(ab, cp), dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    k = len(p)
    bary = np.full((k, 3), np.nan)
    done = np.zeros(k, dtype=bool)

    def assign(mask, u, v, w):
        m = mask & ~done
        bary[m, 0], bary[m, 1], bary[m, 2] = u[m], v[m], w[m]
        done[m] = True

    zero, one = np.zeros(k), np.ones(k)
    with np.errstate(invalid="ignore", divide="ignore"):
        assign((d1 <= 0) & (d2 <= 0), one, zero, zero)
        assign((d3 >= 0) & (d4 <= d3), zero, one, zero)
        assign((d6 >= 0) & (d5 <= d6), zero, zero, one)
        t = d1 / (d1 - d3)
        assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), 1 - t, t, zero)
        t = d2 / (d2 - d6)
        assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), 1 - t, zero, t)
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        assign((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), zero, 1 - t, t)
        denom = va + vb + vc
        v, w = vb / denom, vc / denom
        interior = np.isfinite(v) & np.isfinite(w) & (denom > 0)
        assign(interior, 1 - v - w, v, w)
    left = ~done
    if left.any():
        # degenerate triangles: best of the three edge projections
        best = np.full(k, np.inf)
        for (x, y, ix, iy) in ((a, b, 0, 1), (b, c, 1, 2), (a, c, 0, 2)):
            e = y - x
            ee = dot(e, e)
            with np.errstate(invalid="ignore", divide="ignore"):
                t = np.clip(np.where(ee > 0, dot(p - x, e) / ee, 0.0), 0.0, 1.0)
            q = x + t[:, None] * e
            dist = np.linalg.norm(p - q, axis=1)
            better = left & (dist < best)
            best[better] = dist[better]
            bary[better] = 0.0
            bary[better, ix] = 1 - t[better]
            bary[better, iy] = t[better]
    pts = bary[:, :1] * a + bary[:, 1:2] * b + bary[:, 2:] * c
    return pts, bary


def closest_points(query, target):
    """Exact closest points of ``query`` positions on the surface of ``target``.

    Returns ``(points, face_index, barycentric, distance)``. Candidate faces
    come from a centroid index with a radius that provably contains the
    true closest face.
    """
    q = np.asarray(query, dtype=np.float64)
    if target.n_faces == 0:
        raise ValueError("target mesh has no faces")
    tri = target.vertices[target.faces]
    cent = tri.mean(axis=1)
    reach = float(np.linalg.norm(tri - cent[:, None], axis=2).max())
    index = build_index(cent)
    _, nearest = index.tree.query(q, k=1)
    nearest = np.atleast_1d(nearest)
    ub_pts, _ = closest_point_on_triangles(q, tri[nearest, 0], tri[nearest, 1], tri[nearest, 2])
    ub = np.linalg.norm(q - ub_pts, axis=1)

    best_d = np.full(len(q), np.inf)
    best_f = np.zeros(len(q), dtype=np.int64)
    best_b = np.zeros((len(q), 3))
    best_p = np.zeros((len(q), 3))
    chunk = 4096
    for s in range(0, len(q), chunk):
        qs = q[s:s + chunk]
        cand = index.tree.query_ball_point(qs, ub[s:s + chunk] * (1 + 1e-9) + reach + 1e-12)
        counts = np.fromiter((len(c) for c in cand), dtype=np.int64, count=len(qs))
        rows = np.repeat(np.arange(len(qs)), counts)
        faces = np.fromiter((j for c in cand for j in c), dtype=np.int64, count=int(counts.sum()))
        pts, bary = closest_point_on_triangles(qs[rows], tri[faces, 0], tri[faces, 1], tri[faces, 2])
        dist = np.linalg.norm(qs[rows] - pts, axis=1)
        # deterministic pick: smallest distance, then smallest face index
        order = np.lexsort((faces, dist, rows))
        first = np.ones(len(order), dtype=bool)
        first[1:] = rows[order][1:] != rows[order][:-1]
        pick = order[first]
        r = rows[pick] + s
        best_d[r], best_f[r] = dist[pick], faces[pick]
        best_b[r], best_p[r] = bary[pick], pts[pick]
    return best_p, best_f, best_b, best_d


def signed_distance_colors(values, low=None, high=None):
    """Purple above, green on, cyan below the surface, ramped linearly.

    The ramp saturates at the 95th percentile of the positive side and the
    5th percentile of the negative side unless ``low``/``high`` are given.
    """
    s = np.asarray(values, dtype=np.float64)
    if high is None:
        high = float(np.percentile(s, 95)) if len(s) else 0.0
    if low is None:
        low = float(np.percentile(s, 5)) if len(s) else 0.0
    pos = np.clip(s / high, 0.0, 1.0) if high > 0 else (s > 0).astype(float)
    neg = np.clip(s / low, 0.0, 1.0) if low < 0 else (s < 0).astype(float)
    col = np.tile(GREEN, (len(s), 1))
    col = np.where((s > 0)[:, None], GREEN + pos[:, None] * (PURPLE - GREEN), col)
    col = np.where((s < 0)[:, None], GREEN + neg[:, None] * (CYAN - GREEN), col)
    return np.rint(col).astype(np.uint8)


def signed_distance_map(query, target):
    """Signed distance from every vertex of ``query`` to the surface of ``target``.

    The sign is positive on the side the interpolated target vertex normal
    points to. Returns ``(distances, colors)``.
    """
    if target.n_faces == 0:
        raise ValueError("target mesh has no faces")
    q = query.vertices if hasattr(query, "vertices") else np.asarray(query, dtype=np.float64)
    pts, faces, bary, dist = closest_points(q, target)
    field = vertex_normals(target)
    corner_n = field.vertex[target.faces[faces]]
    n = np.einsum("ki,kij->kj", bary, corner_n)
    weak = np.linalg.norm(n, axis=1) < 1e-12
    n[weak] = field.face[faces[weak]]
    side = np.sign(np.einsum("ij,ij->i", q - pts, n))
    signed = np.where(dist > 0, side * dist, 0.0)
    return signed, signed_distance_colors(signed)


# --------------------------------------------------------------------------
# curvature


def _cot(u, v):
    cr = np.linalg.norm(np.cross(u, v), axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.einsum("ij,ij->i", u, v) / cr


def mean_curvature(mesh):
    """Cotangent-Laplacian mean curvature with mixed Voronoi areas.

    ``H_i = |sum_j (cot a_ij + cot b_ij)(p_i - p_j)| / (4 A_i)``, positive
    where the surface bends away from the vertex normal (a sphere with
    outward normals has ``H = 1 / r``). Returns ``(H, flagged)``; boundary,
    non-manifold and zero-area vertices are flagged and get NaN.
    """
    v, f = mesh.vertices, mesh.faces
    n = mesh.n_vertices
    tri = v[f]
    lap = np.zeros((n, 3))
    area = np.zeros(n)
    for k in range(3):
        i, j = f[:, k], f[:, (k + 1) % 3]
        cot_o = _cot(tri[:, k] - tri[:, (k + 2) % 3], tri[:, (k + 1) % 3] - tri[:, (k + 2) % 3])
        cot_o = np.nan_to_num(cot_o, nan=0.0, posinf=0.0, neginf=0.0)
        e = v[i] - v[j]
        for a in range(3):
            lap[:, a] += np.bincount(i, cot_o * e[:, a], minlength=n)
            lap[:, a] -= np.bincount(j, cot_o * e[:, a], minlength=n)
    # mixed areas
    e0 = tri[:, 1] - tri[:, 0]
    e1 = tri[:, 2] - tri[:, 1]
    e2 = tri[:, 0] - tri[:, 2]
    tarea = 0.5 * np.linalg.norm(np.cross(e0, -e2), axis=1)
    ang_dot = np.stack([np.einsum("ij,ij->i", e0, -e2),
                        np.einsum("ij,ij->i", e1, -e0),
                        np.einsum("ij,ij->i", e2, -e1)], axis=1)
    obtuse = ang_dot < 0
    any_obtuse = obtuse.any(axis=1)
    sq = np.stack([np.einsum("ij,ij->i", e, e) for e in (e0, e1, e2)], axis=1)
    for k in range(3):
        # corner k sits between edges (k-1) and k; the opposite corners carry the cotangents
        kp, km = (k + 1) % 3, (k + 2) % 3
        cot_p = _cot(tri[:, km] - tri[:, kp], tri[:, k] - tri[:, kp])
        cot_m = _cot(tri[:, k] - tri[:, km], tri[:, kp] - tri[:, km])
        vor = (sq[:, k] * np.nan_to_num(cot_m) + sq[:, km] * np.nan_to_num(cot_p)) / 8.0
        val = np.where(~any_obtuse, vor, np.where(obtuse[:, k], tarea / 2.0, tarea / 4.0))
        area += np.bincount(f[:, k], val, minlength=n)
    lap *= 0.5
    with np.errstate(invalid="ignore", divide="ignore"):
        H = np.linalg.norm(lap, axis=1) / (2.0 * area)
    normals = vertex_normals(mesh).vertex
    H = H * np.where(np.einsum("ij,ij->i", lap, normals) >= 0, 1.0, -1.0)

    # flag boundary and non-manifold vertices
    e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    edges, counts = np.unique(e, axis=0, return_counts=True)
    bad_edges = edges[counts != 2]
    flagged = np.zeros(n, dtype=bool)
    flagged[bad_edges.reshape(-1)] = True
    flagged |= ~(area > 0) | ~np.isfinite(H)
    flagged |= np.bincount(f.reshape(-1), minlength=n) == 0
    H = np.where(flagged, np.nan, H)
    return H, flagged


def curvature_colors(H, low=None, high=None):
    """Blue (low) to red (high) ramp between the 5th and 95th percentile."""
    H = np.asarray(H, dtype=np.float64)
    finite = np.isfinite(H)
    if low is None:
        low = float(np.percentile(H[finite], 5)) if finite.any() else 0.0
    if high is None:
        high = float(np.percentile(H[finite], 95)) if finite.any() else 0.0
    span = high - low
    t = np.clip((H - low) / span, 0.0, 1.0) if span > 0 else np.full(len(H), 0.5)
    t = np.where(finite, t, 0.5)
    col = np.stack([255 * t, np.zeros_like(t), 255 * (1 - t)], axis=1)
    col[~finite] = GREY
    return np.rint(col).astype(np.uint8)


def dihedral_angles(mesh, edges=None):
    """Interior dihedral angle in degrees across manifold edges.

    Returns ``(edges, angles)`` for edges shared by exactly two faces; 180
    means flat, 90 a right-angled convex or concave crease.
    """
    f = mesh.faces
    fn, _ = face_normals(mesh)
    e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    fid = np.tile(np.arange(len(f)), 3)
    order = np.lexsort((e[:, 1], e[:, 0]))
    e, fid = e[order], fid[order]
    same = np.all(e[1:] == e[:-1], axis=1)
    start = np.flatnonzero(np.r_[True, ~same])
    count = np.diff(np.r_[start, len(e)])
    two = start[count == 2]
    pairs_e = e[two]
    fa, fb = fid[two], fid[two + 1]
    cosang = np.clip(np.einsum("ij,ij->i", fn[fa], fn[fb]), -1.0, 1.0)
    ang = 180.0 - np.degrees(np.arccos(cosang))
    if edges is not None:
        edges = np.sort(np.asarray(edges, dtype=np.int64), axis=1)
        lookup = {tuple(x): k for k, x in enumerate(pairs_e.tolist())}
        sel = np.array([lookup[tuple(x)] for x in edges.tolist()], dtype=np.int64)
        return pairs_e[sel], ang[sel]
    return pairs_e, ang
