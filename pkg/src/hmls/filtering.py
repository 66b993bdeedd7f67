"""Homogeneous-MLS vertex filter.

Every vertex ``p_i`` is moved to the minimizer of a weighted least-squares
objective that measures squared distances to its neighbors ``p_j``, to the
tangent planes through them (scaled by a balance factor ``mu_i``) and to the
line through an anchor point along ``n_i`` (scaled by ``gamma``). The
minimizer has the closed form

    p_hat = (sum_j M_ij + M_star)^-1 (sum_j M_ij p_j + M_star p_anchor)

with ``M_ij = w_ij (I + mu_i n_j n_j^T)`` and ``M_star = gamma (I - n_i n_i^T)``.

Per pair of points the filter uses

* ``c_ij = max(n_i . n_j, c_floor)``
* ``d_ij = max((|n_i . (p_i - p_j)| + |n_j . (p_j - p_i)|) / 2, eta)``
* ``w_ij = exp(-d_ij^2 / (2 sigma^2))`` (anisotropic) or
  ``exp(-|p_i - p_j|^2 / (2 sigma^2))`` (isotropic)

and ``mu_i = sum w d / sum w c d``, which is at least 1.

Symmetric 3x3 matrices are stored as their six unique entries in the order
``(xx, xy, xz, yy, yz, zz)``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .mesh import average_edge_length, build_adjacency
from .normals import vertex_normals
from .spatial import NeighborTable, build_index, gather_all

__all__ = [
    "FilterParams",
    "FilterScales",
    "PairTerms",
    "IterationReport",
    "pair_terms",
    "normal_curvature",
    "compute_mu",
    "assemble_system",
    "filter_vertex",
    "filter_table",
    "solve_sym3",
    "sym3_to_dense",
    "sym3_from_dense",
    "verify_positive_definite",
    "filter_mesh",
    "taubin_filter",
]

logger = logging.getLogger(__name__)

KERNELS = ("anisotropic", "isotropic")
CONSTRAINTS = ("vertex", "centroid")

_SYM_IDX = np.array([[0, 1, 2], [1, 3, 4], [2, 4, 5]])


@dataclass(frozen=True)
class FilterParams:
    """Tunables of the filter. Length-like values are multiples of the mean edge length.

    Parameters
    ----------
    iterations : int
        Number of Jacobi passes over all vertices.
    sigma_s_factor : float, optional
        Width of the anisotropic kernel. When omitted, half of
        ``noise_magnitude_factor`` is used.
    sigma_r_factor : float, optional
        Width of the isotropic kernel.
    radius_factor : float, optional
        Neighborhood radius. Defaults to 2 for the anisotropic kernel and to
        ``2 * sigma_r_factor`` for the isotropic one.
    kernel : {"anisotropic", "isotropic"}
    m : int
        Maximum neighborhood size, center included.
    gamma : float
        Strength of the line constraint.
    eta_factor : float
        Lower bound of ``d_ij``.
    c_floor : float
        Lower bound of ``c_ij``.
    constraint : {"vertex", "centroid"}
        Anchor of the line constraint: the vertex itself or its 1-ring centroid.
    noise_magnitude_factor : float, optional
        Maximum noise magnitude, only used to derive a default ``sigma_s``.
    include_self : bool
        Whether ``N(i)`` contains ``i``.
    """

    iterations: int = 1
    sigma_s_factor: float | None = None
    sigma_r_factor: float | None = None
    radius_factor: float | None = None
    kernel: str = "anisotropic"
    m: int = 100
    gamma: float = 1000.0
    eta_factor: float = 0.001
    c_floor: float = 0.001
    constraint: str = "vertex"
    noise_magnitude_factor: float | None = None
    include_self: bool = True

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.constraint not in CONSTRAINTS:
            raise ValueError(f"constraint must be one of {CONSTRAINTS}, got {self.constraint!r}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError("iterations must be an integer >= 1")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("m must be an integer >= 1")
        if not self.gamma >= 0:
            raise ValueError("gamma must be >= 0")
        if not self.eta_factor > 0:
            raise ValueError("eta_factor must be > 0")
        if not 0 < self.c_floor <= 1:
            raise ValueError("c_floor must lie in (0, 1]")
        if self.radius_factor is not None and not self.radius_factor > 0:
            raise ValueError("radius_factor must be > 0")
        if self.noise_magnitude_factor is not None and not self.noise_magnitude_factor > 0:
            raise ValueError("noise_magnitude_factor must be > 0")
        if self.kernel == "anisotropic":
            s = self.sigma_s_factor
            if s is None and self.noise_magnitude_factor is None:
                raise ValueError("anisotropic kernel needs sigma_s_factor or noise_magnitude_factor")
            if s is not None and not s > 0:
                raise ValueError("sigma_s_factor must be > 0")
        else:
            if self.sigma_r_factor is None or not self.sigma_r_factor > 0:
                raise ValueError("isotropic kernel needs sigma_r_factor > 0")

    @property
    def sigma_factor(self):
        if self.kernel == "isotropic":
            return self.sigma_r_factor
        if self.sigma_s_factor is not None:
            return self.sigma_s_factor
        return 0.5 * self.noise_magnitude_factor

    @property
    def effective_radius_factor(self):
        if self.radius_factor is not None:
            return self.radius_factor
        return 2.0 * self.sigma_r_factor if self.kernel == "isotropic" else 2.0

    def scales(self, edge_length):
        """Absolute lengths for a mesh with mean edge length ``edge_length``."""
        if not edge_length > 0:
            raise ValueError("edge_length must be > 0")
        return FilterScales(
            radius=self.effective_radius_factor * edge_length,
            sigma=self.sigma_factor * edge_length,
            eta=self.eta_factor * edge_length,
            gamma=float(self.gamma),
            m=int(self.m),
            c_floor=float(self.c_floor),
            kernel=self.kernel,
            include_self=self.include_self,
        )


@dataclass(frozen=True)
class FilterScales:
    """Absolute-length filter settings, fixed for a whole run."""

    radius: float
    sigma: float
    eta: float
    gamma: float = 1000.0
    m: int = 100
    c_floor: float = 0.001
    kernel: str = "anisotropic"
    include_self: bool = True


@dataclass(frozen=True)
class PairTerms:
    c: np.ndarray
    d: np.ndarray
    w: np.ndarray


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    seconds: float
    max_displacement: float
    mean_displacement: float
    solve_failures: int
    skipped: int


def _dot(a, b):
    return np.einsum("...k,...k->...", a, b)


def _terms(pi, pj, ni, nj, scales):
    diff = pi - pj
    d = np.maximum(0.5 * (np.abs(_dot(ni, diff)) + np.abs(_dot(nj, diff))), scales.eta)
    # clipping at 1 absorbs rounding in the dot product of unit vectors, keeping mu >= 1 exact
    c = np.clip(_dot(ni, nj), scales.c_floor, 1.0)
    if scales.kernel == "anisotropic":
        w = np.exp(-(d * d) / (2.0 * scales.sigma ** 2))
    else:
        w = np.exp(-_dot(diff, diff) / (2.0 * scales.sigma ** 2))
    return c, d, w


def pair_terms(i, j, positions, normals, scales):
    """``(c_ij, d_ij, w_ij)`` for one ordered pair of vertices."""
    p = np.asarray(positions, dtype=np.float64)
    n = np.asarray(normals, dtype=np.float64)
    c, d, w = _terms(p[i], p[j], n[i], n[j], scales)
    return float(c), float(d), float(w)


def normal_curvature(i, j, positions, normals):
    """Curvature of the arc through ``p_i`` and ``p_j`` that is orthogonal to ``n_i`` at ``p_i``."""
    p = np.asarray(positions, dtype=np.float64)
    diff = p[i] - p[j]
    dd = float(diff @ diff)
    if dd == 0.0:
        raise ValueError(f"vertices {i} and {j} coincide")
    return 2.0 * float(np.asarray(normals[i], dtype=np.float64) @ diff) / dd


def compute_mu(terms):
    """Balance factor ``sum w d / sum w c d`` over one neighborhood."""
    w = np.asarray(terms.w)
    d = np.asarray(terms.d)
    c = np.asarray(terms.c)
    return float(np.sum(w * d) / np.sum(w * c * d))


# --------------------------------------------------------------------------
# symmetric 3x3 algebra


def sym3_to_dense(s):
    s = np.asarray(s, dtype=np.float64)
    return s[..., _SYM_IDX]


def sym3_from_dense(a):
    a = np.asarray(a, dtype=np.float64)
    return np.stack([a[..., 0, 0], a[..., 0, 1], a[..., 0, 2],
                     a[..., 1, 1], a[..., 1, 2], a[..., 2, 2]], axis=-1)


def _solve_cholesky(s, b):
    a00, a01, a02, a11, a12, a22 = np.moveaxis(s, -1, 0)
    scale = np.maximum(np.maximum(np.abs(a00), np.abs(a11)), np.abs(a22))
    tiny = 1e-13 * scale
    with np.errstate(invalid="ignore", divide="ignore"):
        l00 = np.sqrt(a00)
        l10 = a01 / l00
        l20 = a02 / l00
        r11 = a11 - l10 * l10
        l11 = np.sqrt(r11)
        l21 = (a12 - l10 * l20) / l11
        r22 = a22 - l20 * l20 - l21 * l21
        l22 = np.sqrt(r22)
        y0 = b[..., 0] / l00
        y1 = (b[..., 1] - l10 * y0) / l11
        y2 = (b[..., 2] - l20 * y0 - l21 * y1) / l22
        x2 = y2 / l22
        x1 = (y1 - l21 * x2) / l11
        x0 = (y0 - l10 * x1 - l20 * x2) / l00
    ok = (a00 > tiny) & (r11 > tiny) & (r22 > tiny)
    x = np.stack([x0, x1, x2], axis=-1)
    ok &= np.isfinite(x).all(axis=-1)
    return x, ok


def _solve_adjugate(s, b):
    a00, a01, a02, a11, a12, a22 = np.moveaxis(s, -1, 0)
    c00 = a11 * a22 - a12 * a12
    c01 = a02 * a12 - a01 * a22
    c02 = a01 * a12 - a02 * a11
    c11 = a00 * a22 - a02 * a02
    c12 = a01 * a02 - a00 * a12
    c22 = a00 * a11 - a01 * a01
    det = a00 * c00 + a01 * c01 + a02 * c02
    scale = np.maximum(np.maximum(np.abs(a00), np.abs(a11)), np.abs(a22))
    with np.errstate(invalid="ignore", divide="ignore"):
        x0 = (c00 * b[..., 0] + c01 * b[..., 1] + c02 * b[..., 2]) / det
        x1 = (c01 * b[..., 0] + c11 * b[..., 1] + c12 * b[..., 2]) / det
        x2 = (c02 * b[..., 0] + c12 * b[..., 1] + c22 * b[..., 2]) / det
    x = np.stack([x0, x1, x2], axis=-1)
    ok = (det > 1e-30 * scale ** 3) & np.isfinite(x).all(axis=-1)
    return x, ok


def solve_sym3(s, b, method="auto"):
    """Solve batched symmetric positive definite 3x3 systems.

    ``s`` has shape ``(..., 6)``, ``b`` shape ``(..., 3)``. ``method`` is
    ``"cholesky"``, ``"adjugate"`` or ``"auto"`` (Cholesky, then the
    adjugate formula where a pivot is too small). Returns ``(x, ok)``;
    entries of ``x`` where ``ok`` is false are NaN.
    """
    s = np.asarray(s, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if method == "cholesky":
        x, ok = _solve_cholesky(s, b)
    elif method == "adjugate":
        x, ok = _solve_adjugate(s, b)
    elif method == "auto":
        x, ok = _solve_cholesky(s, b)
        if not np.all(ok):
            xa, oka = _solve_adjugate(s, b)
            x = np.where(ok[..., None], x, xa)
            ok = ok | oka
    else:
        raise ValueError(f"unknown method {method!r}")
    x = np.where(ok[..., None], x, np.nan)
    return x, ok


def verify_positive_definite(matrix, trials=0, rng=None):
    """Check ``x^T A x > 0`` via the smallest eigenvalue and optional random probes.

    ``matrix`` is a dense ``(3, 3)`` array or a packed six-vector.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.shape == (6,):
        a = sym3_to_dense(a)
    if a.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix or six packed entries")
    if not np.allclose(a, a.T, rtol=0, atol=0):
        return False
    if np.linalg.eigvalsh(a)[0] <= 0:
        return False
    if trials:
        rng = np.random.default_rng(rng)
        x = rng.normal(size=(int(trials), 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        if not np.all(np.einsum("ij,jk,ik->i", x, a, x) > 0):
            return False
    return True


# --------------------------------------------------------------------------
# assembly and per-vertex filtering


def _assemble(table, positions, normals, anchors, scales):
    """Packed matrices, right-hand sides and ``mu`` for every row of ``table``."""
    k = len(table)
    rows = table.rows
    cols = table.indices
    centers = table.centers
    P, N = positions, normals
    ni = N[centers]
    c, d, w = _terms(P[centers[rows]], P[cols], ni[rows], N[cols], scales)
    sa = np.bincount(rows, w * d, minlength=k)
    sb = np.bincount(rows, w * c * d, minlength=k)
    with np.errstate(invalid="ignore", divide="ignore"):
        mu = sa / sb
    nj = N[cols]
    pj = P[cols]
    wm = w * mu[rows]
    mats = np.empty((k, 6))
    for slot, (a, b) in enumerate([(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]):
        val = wm * nj[:, a] * nj[:, b]
        if a == b:
            val = val + w
        mats[:, slot] = np.bincount(rows, val, minlength=k)
    npj = _dot(nj, pj)
    rhs = np.stack(
        [np.bincount(rows, w * pj[:, a] + wm * nj[:, a] * npj, minlength=k) for a in range(3)],
        axis=1,
    )
    g = scales.gamma
    if g:
        star = g * (np.eye(3)[None] - ni[:, :, None] * ni[:, None, :])
        mats += sym3_from_dense(star)
        rhs += np.einsum("kab,kb->ka", star, anchors)
    return mats, rhs, mu, PairTerms(c, d, w)


def filter_table(table, positions, normals, anchors, scales, method="auto"):
    """Filtered positions for the centers of ``table``.

    Returns ``(new_positions, ok, mu)``; rows whose system cannot be solved
    keep their current position and have ``ok`` false.
    """
    P = np.asarray(positions, dtype=np.float64)
    N = np.asarray(normals, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.float64)
    mats, rhs, mu, _ = _assemble(table, P, N, anchors, scales)
    x, ok = solve_sym3(mats, rhs, method=method)
    x = np.where(ok[:, None], x, P[table.centers])
    return x, ok, mu


def _single_table(i, neighbors):
    idx = np.asarray(neighbors.indices, dtype=np.int64)
    dist = np.asarray(getattr(neighbors, "distances", np.zeros(len(idx))))
    return NeighborTable(np.array([int(i)]), np.array([0, len(idx)]), idx, dist)


def assemble_system(i, neighbors, positions, normals, scales, anchor=None):
    """Packed matrix, right-hand side, ``mu_i`` and pair terms for vertex ``i``."""
    P = np.asarray(positions, dtype=np.float64)
    anchor = P[i] if anchor is None else np.asarray(anchor, dtype=np.float64)
    mats, rhs, mu, terms = _assemble(_single_table(i, neighbors), P,
                                     np.asarray(normals, dtype=np.float64), anchor[None], scales)
    return mats[0], rhs[0], float(mu[0]), terms


def filter_vertex(i, neighbors, positions, normals, scales, anchor=None, method="auto"):
    """New position of vertex ``i`` from its neighborhood.

    ``anchor`` is the point the line constraint passes through, ``p_i``
    when omitted. A system that cannot be solved returns ``p_i`` unchanged.
    """
    P = np.asarray(positions, dtype=np.float64)
    anchor = P[i] if anchor is None else np.asarray(anchor, dtype=np.float64)
    x, ok, _ = filter_table(_single_table(i, neighbors), P, normals, anchor[None], scales, method)
    return x[0]


def _drop_pairs(table, drop):
    """Table without the pairs flagged in ``drop``."""
    keep = ~drop
    rows = table.rows[keep]
    offsets = np.zeros(len(table) + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=len(table)), out=offsets[1:])
    return NeighborTable(table.centers, offsets, table.indices[keep], table.distances[keep])


def filter_mesh(mesh, params, progress=None, workers=1, normal_fn=None):
    """Run ``params.iterations`` Jacobi passes of the filter over ``mesh``.

    Length scales are derived once from the input mean edge length. Each
    pass recomputes vertex normals and neighborhoods from the current
    positions, filters every vertex from those, then swaps in the results.
    Vertices with an undefined normal are left in place for that pass.

    Parameters
    ----------
    progress : callable, optional
        Called with an :class:`IterationReport` after every pass.
    workers : int
        Threads used by the neighbor query. Results do not depend on it.
    normal_fn : callable, optional
        ``normal_fn(positions) -> (n, 3)`` replacing the angle-weighted
        normals, e.g. analytic normals of a known surface.
    """
    if not isinstance(params, FilterParams):
        raise TypeError("params must be a FilterParams")
    scales = params.scales(average_edge_length(mesh))
    adj = build_adjacency(mesh) if params.constraint == "centroid" else None
    P = np.array(mesh.vertices, dtype=np.float64)
    for it in range(params.iterations):
        t0 = time.perf_counter()
        current = mesh.with_vertices(P)
        if normal_fn is None:
            field = vertex_normals(current)
            N, flagged = field.vertex, field.vertex_flagged
        else:
            N = np.asarray(normal_fn(P), dtype=np.float64)
            flagged = ~np.isfinite(N).all(axis=1) | (np.linalg.norm(N, axis=1) == 0)
        active = np.flatnonzero(~flagged)
        index = build_index(P)
        table = gather_all(index, scales.radius, scales.m, centers=active, workers=workers)
        drop = flagged[table.indices]
        if not scales.include_self:
            drop |= table.indices == table.centers[table.rows]
        if drop.any():
            table = _drop_pairs(table, drop)
        if params.constraint == "centroid":
            anchors = adj.ring_centroids(P)[active]
        else:
            anchors = P[active]
        new, ok, _ = filter_table(table, P, N, anchors, scales)
        out = P.copy()
        out[active] = new
        disp = np.linalg.norm(out - P, axis=1)
        P = out
        report = IterationReport(
            iteration=it + 1,
            seconds=time.perf_counter() - t0,
            max_displacement=float(disp.max()) if len(disp) else 0.0,
            mean_displacement=float(disp.mean()) if len(disp) else 0.0,
            solve_failures=int((~ok).sum()),
            skipped=int(flagged.sum()),
        )
        if report.solve_failures:
            logger.warning("iteration %d: %d vertex solves failed", it + 1, report.solve_failures)
        logger.debug("%s", report)
        if progress is not None:
            progress(report)
    return mesh.with_vertices(P)


def taubin_filter(mesh, lam=0.5, mu=-0.53, iterations=10):
    """Taubin lambda|mu smoothing with the uniform (umbrella) Laplacian.

    Each iteration applies ``p += lam * (centroid - p)`` and then
    ``p += mu * (centroid - p)`` to all vertices simultaneously, with the
    1-ring centroid recomputed before each step.
    """
    adj = build_adjacency(mesh)
    P = np.array(mesh.vertices, dtype=np.float64)
    has_ring = adj.ring_sizes > 0
    for _ in range(int(iterations)):
        for factor in (lam, mu):
            lap = adj.ring_centroids(P) - P
            P = P + factor * np.where(has_ring[:, None], lap, 0.0)
    return mesh.with_vertices(P)
