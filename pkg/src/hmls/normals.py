"""Facet normals and angle-weighted vertex normals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NormalField", "face_normals", "corner_angles", "vertex_normals"]

# faces whose doubled area falls below this fraction of |e1| |e2| count as degenerate
_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class NormalField:
    vertex: np.ndarray
    face: np.ndarray
    vertex_flagged: np.ndarray
    face_degenerate: np.ndarray


def face_normals(mesh):
    """Unit facet normals following the face winding.

    Returns ``(normals, degenerate)``; degenerate faces get a zero normal.
    """
    v = mesh.vertices
    f = mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    cr = np.cross(e1, e2)
    norm = np.linalg.norm(cr, axis=1)
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    degenerate = ~(norm > _DEGENERATE_RTOL * scale) | ~np.isfinite(norm)
    out = np.zeros_like(cr)
    ok = ~degenerate
    out[ok] = cr[ok] / norm[ok, None]
    return out, degenerate


def corner_angles(mesh):
    """Interior angle of every face at each of its three corners, shape ``(m, 3)``."""
    v = mesh.vertices[mesh.faces]
    out = np.zeros(v.shape[:2])
    for k in range(3):
        a = v[:, (k + 1) % 3] - v[:, k]
        b = v[:, (k + 2) % 3] - v[:, k]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = np.einsum("ij,ij->i", a, b) / (na * nb)
        out[:, k] = np.arccos(np.clip(np.nan_to_num(cos, nan=1.0), -1.0, 1.0))
    return out


def vertex_normals(mesh, adj=None):
    """Angle-weighted vertex normals.

    Each vertex normal is the normalized sum of its incident facet normals,
    weighted by the facet's interior angle at that vertex. Degenerate faces
    contribute nothing. Vertices with no usable contribution, or whose
    contributions cancel, get a zero normal and ``vertex_flagged`` set.
    ``adj`` is accepted for API symmetry; incidence is read from the faces.
    """
    n = mesh.n_vertices
    fn, degenerate = face_normals(mesh)
    w = corner_angles(mesh)
    w[degenerate] = 0.0
    idx = mesh.faces.reshape(-1)
    acc = np.stack(
        [np.bincount(idx, (w * fn[:, k, None]).reshape(-1), minlength=n) for k in range(3)],
        axis=1,
    )
    norm = np.linalg.norm(acc, axis=1)
    total = np.bincount(idx, w.reshape(-1), minlength=n)
    flagged = ~(norm > 1e-12 * total) | (total == 0)
    out = np.zeros_like(acc)
    ok = ~flagged
    out[ok] = acc[ok] / norm[ok, None]
    return NormalField(out, fn, flagged, degenerate)
