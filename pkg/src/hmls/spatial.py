"""Radius-limited, count-capped Euclidean neighbor search.

Candidates come from a k-d tree; membership, distances and ordering are then
decided here with one fixed formula, so results equal a brute-force scan:
every point with ``|p_j - p_i| <= R``, sorted by distance with ties broken by
ascending index, truncated to the ``m`` nearest. The center point is always
the first entry of its own neighborhood, even when other points coincide
with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = ["PointIndex", "NeighborSet", "NeighborTable", "build_index",
           "gather_neighbors", "gather_all", "pairwise_distance"]

# candidate radius slack; the exact test against R happens afterwards
_SLACK = 1e-9


def pairwise_distance(a, b):
    """Row-wise Euclidean distance, the single formula used for all ranking."""
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return np.sqrt(np.einsum("...k,...k->...", d, d))


@dataclass(frozen=True, eq=False)
class PointIndex:
    """Immutable snapshot of a point set plus its search tree."""

    positions: np.ndarray
    tree: cKDTree

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class NeighborSet:
    center: int
    indices: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """Neighborhoods of many centers in CSR layout.

    Row ``r`` belongs to vertex ``centers[r]`` and spans
    ``offsets[r]:offsets[r + 1]`` of ``indices``/``distances``.
    """

    centers: np.ndarray
    offsets: np.ndarray
    indices: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.centers)

    def row(self, r):
        s = slice(self.offsets[r], self.offsets[r + 1])
        return NeighborSet(int(self.centers[r]), self.indices[s], self.distances[s])

    @property
    def rows(self):
        """Row number of every stored pair."""
        return np.repeat(np.arange(len(self.centers)), np.diff(self.offsets))

    @property
    def sizes(self):
        return np.diff(self.offsets)


def build_index(positions, cell_hint=None):
    """Build a search index over ``(n, 3)`` positions.

    ``cell_hint`` is accepted for interface compatibility with grid-based
    indices; the tree adapts its own cell sizes.
    """
    pts = np.array(positions, dtype=np.float64, copy=True)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"positions must have shape (n, 3), got {pts.shape}")
    if len(pts) == 0:
        raise ValueError("cannot index an empty point set")
    pts.setflags(write=False)
    return PointIndex(pts, cKDTree(pts, balanced_tree=False, compact_nodes=False))


def _check(radius, cap):
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if cap < 1:
        raise ValueError(f"neighbor cap must be >= 1, got {cap}")


def gather_all(index, radius, cap, centers=None, workers=1):
    """Neighborhoods for ``centers`` (default: every point) as a :class:`NeighborTable`.

    ``workers`` only parallelizes the candidate query; the result is
    independent of it.
    """
    _check(radius, cap)
    pts = index.positions
    n = len(pts)
    if centers is None:
        centers = np.arange(n, dtype=np.int64)
    else:
        centers = np.asarray(centers, dtype=np.int64).reshape(-1)
        if len(centers) and (centers.min() < 0 or centers.max() >= n):
            raise IndexError("vertex id out of range")
    cand = index.tree.query_ball_point(pts[centers], radius * (1 + _SLACK) + 1e-300,
                                       workers=workers)
    counts = np.fromiter((len(c) for c in cand), dtype=np.int64, count=len(centers))
    rows = np.repeat(np.arange(len(centers)), counts)
    cols = np.fromiter((j for c in cand for j in c), dtype=np.int64, count=int(counts.sum()))
    # the center is always present; add it explicitly in case of NaN positions
    rows = np.concatenate([rows, np.arange(len(centers))])
    cols = np.concatenate([cols, centers])
    dist = pairwise_distance(pts[centers[rows]], pts[cols])
    keep = (dist <= radius) | (cols == centers[rows])
    rows, cols, dist = rows[keep], cols[keep], dist[keep]
    not_center = cols != centers[rows]
    order = np.lexsort((cols, dist, not_center, rows))
    rows, cols, dist = rows[order], cols[order], dist[order]
    # drop the duplicated center entry
    dup = np.zeros(len(rows), dtype=bool)
    dup[1:] = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
    dup[1:] &= ~not_center[order][1:]
    rows, cols, dist = rows[~dup], cols[~dup], dist[~dup]
    # rank within row, then cap
    starts = np.searchsorted(rows, np.arange(len(centers)))
    rank = np.arange(len(rows)) - starts[rows]
    keep = rank < cap
    rows, cols, dist = rows[keep], cols[keep], dist[keep]
    offsets = np.zeros(len(centers) + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=len(centers)), out=offsets[1:])
    return NeighborTable(centers, offsets, cols, dist)


def gather_neighbors(index, i, radius, cap):
    """Neighborhood ``N(i)`` of a single point, nearest first."""
    if not 0 <= int(i) < len(index):
        raise IndexError(f"vertex id {i} out of range")
    return gather_all(index, radius, cap, centers=[int(i)]).row(0)
