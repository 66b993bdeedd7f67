"""Moving-constant H-MLS curves and surfaces from point-normal samples.

A point at parameter ``xi`` is the minimizer of

    sum_j phi_j (|p - p_j|^2 + mu_j ((p - p_j) . n_j)^2) / 2,

i.e. ``p(xi) = (sum_j phi_j M_j)^-1 sum_j phi_j M_j p_j`` with
``M_j = I + mu_j n_j n_j^T`` and ``phi_j = phi(xi - xi_j)``. With every
``mu_j = 0`` this is the kernel-weighted mean of the samples, which for a
cubic B-spline kernel on a uniform grid is the uniform B-spline curve or
surface with the samples as control points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filtering import solve_sym3, sym3_from_dense
from .mesh import TriMesh
from .shapes import _grid_faces, torus_point

__all__ = [
    "BSplineKernel",
    "GaussianKernel",
    "HermiteSamples",
    "cubic_bspline",
    "evaluate",
    "evaluate_many",
    "torus_samples",
    "torus_distance",
    "grid_mesh",
]


def cubic_bspline(t):
    """Uniform cubic B-spline basis centered at 0, support ``(-2, 2)``."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    out = np.where(t < 1.0, (4.0 - 6.0 * t ** 2 + 3.0 * t ** 3) / 6.0, 0.0)
    return np.where((t >= 1.0) & (t < 2.0), (2.0 - t) ** 3 / 6.0, out)


@dataclass(frozen=True)
class BSplineKernel:
    """Tensor-product cubic B-spline with knot spacing ``spacing`` per axis."""

    spacing: float = 1.0

    def __call__(self, delta):
        delta = np.asarray(delta, dtype=np.float64)
        return np.prod(cubic_bspline(delta / self.spacing), axis=-1)


@dataclass(frozen=True)
class GaussianKernel:
    """Radial Gaussian ``exp(-r^2 / (2 sigma^2))`` cut off beyond ``support``."""

    sigma: float
    support: float | None = None

    def __call__(self, delta):
        r2 = np.sum(np.asarray(delta, dtype=np.float64) ** 2, axis=-1)
        w = np.exp(-r2 / (2.0 * self.sigma ** 2))
        if self.support is not None:
            w = np.where(r2 <= self.support ** 2, w, 0.0)
        return w


@dataclass(frozen=True, eq=False)
class HermiteSamples:
    """Point-normal samples over a 1D or 2D parameter domain.

    ``params`` has shape ``(N, dim)``. Axes with a finite entry in
    ``periods`` wrap around, so parameter differences are taken modulo the
    period. ``mu`` may be a scalar or one value per sample; every value must
    exceed -1.
    """

    params: np.ndarray
    positions: np.ndarray
    normals: np.ndarray
    mu: np.ndarray
    kernel: object
    periods: tuple | None = None

    def __post_init__(self):
        params = np.asarray(self.params, dtype=np.float64)
        if params.ndim == 1:
            params = params[:, None]
        pos = np.asarray(self.positions, dtype=np.float64)
        nrm = np.asarray(self.normals, dtype=np.float64)
        mu = np.broadcast_to(np.asarray(self.mu, dtype=np.float64), (len(pos),)).copy()
        if pos.shape != (len(params), 3) or nrm.shape != pos.shape:
            raise ValueError("params, positions and normals must have matching lengths")
        if not np.all(mu > -1):
            raise ValueError("every mu must be > -1")
        if not np.allclose(np.linalg.norm(nrm, axis=1), 1.0, atol=1e-9):
            raise ValueError("normals must be unit vectors")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "normals", nrm)
        object.__setattr__(self, "mu", mu)

    def deltas(self, xi):
        """Parameter differences ``xi - xi_j`` with periodic axes wrapped."""
        xi = np.asarray(xi, dtype=np.float64)
        d = xi[..., None, :] - self.params
        if self.periods is not None:
            for k, per in enumerate(self.periods):
                if per:
                    d[..., k] = (d[..., k] + 0.5 * per) % per - 0.5 * per
        return d


def evaluate_many(samples, xis, chunk=2048):
    """Surface points at each parameter row of ``xis`` (shape ``(K, dim)``)."""
    xis = np.asarray(xis, dtype=np.float64)
    if xis.ndim == 1:
        xis = xis[:, None]
    nn = samples.normals[:, :, None] * samples.normals[:, None, :]
    M = np.eye(3)[None] + samples.mu[:, None, None] * nn  # (N, 3, 3)
    Mp = np.einsum("jab,jb->ja", M, samples.positions)
    out = np.empty((len(xis), 3))
    for s in range(0, len(xis), chunk):
        w = samples.kernel(samples.deltas(xis[s:s + chunk]))  # (k, N)
        if np.any(np.sum(w * w, axis=1) == 0):
            raise ValueError("no sample has positive weight at this parameter")
        A = np.einsum("kj,jab->kab", w, M)
        b = w @ Mp
        x, ok = solve_sym3(sym3_from_dense(A), b)
        if not ok.all():
            x[~ok] = np.linalg.solve(A[~ok], b[~ok][..., None])[..., 0]
        out[s:s + chunk] = x
    return out


def evaluate(samples, xi):
    """Surface point at a single parameter ``xi``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    return evaluate_many(samples, xi[None])[0]


def torus_samples(n_minor=10, n_major=20, major=3.0, minor=1.0, mu=1.25):
    """Point-normal samples of a torus on a uniform periodic ``n_minor x n_major`` grid.

    Parameters are integer grid coordinates; the B-spline kernel with unit
    spacing therefore spans four samples along each axis.
    """
    i, j = np.meshgrid(np.arange(n_minor), np.arange(n_major), indexing="ij")
    p, n = torus_point(i * (2 * np.pi / n_minor), j * (2 * np.pi / n_major), major, minor)
    params = np.stack([i.ravel(), j.ravel()], axis=1).astype(np.float64)
    return HermiteSamples(params, p.reshape(-1, 3), n.reshape(-1, 3), mu,
                          BSplineKernel(1.0), periods=(n_minor, n_major))


def torus_distance(points, major=3.0, minor=1.0):
    """Unsigned distance from points to the torus around the z axis."""
    p = np.asarray(points, dtype=np.float64)
    rho = np.hypot(p[..., 0], p[..., 1])
    return np.abs(np.hypot(rho - major, p[..., 2]) - minor)


def grid_mesh(samples, res_u, res_v):
    """Evaluate a 2D sample set on a ``res_u x res_v`` grid and triangulate it.

    Periodic axes are sampled over one period without repeating the seam;
    open axes span the sample parameter range.
    """
    if res_u < 2 or res_v < 2:
        raise ValueError("grid resolution must be at least 2 in each direction")
    lo = samples.params.min(axis=0)
    hi = samples.params.max(axis=0)
    axes = []
    for k, res in enumerate((res_u, res_v)):
        per = samples.periods[k] if samples.periods is not None else None
        if per:
            axes.append(lo[k] + np.arange(res) * (per / res))
        else:
            axes.append(np.linspace(lo[k], hi[k], res))
    uu, vv = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = evaluate_many(samples, np.stack([uu.ravel(), vv.ravel()], axis=1))
    wrap_u = bool(samples.periods and samples.periods[0])
    wrap_v = bool(samples.periods and samples.periods[1])
    faces = _grid_faces(res_u, res_v, wrap_u, wrap_v)
    if wrap_u and wrap_v:
        faces = faces[:, ::-1]
    return TriMesh(pts, faces)
