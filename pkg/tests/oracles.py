"""Independent reference computations used by the test-suite.

Everything here is written directly from the defining formulas with plain
loops or dense linear algebra, and shares no code with the package beyond
its data types.
"""

import numpy as np


def brute_force_neighbors(points, i, radius, cap):
    """Linear scan: center first, then by (distance, index), truncated to cap."""
    P = np.asarray(points, dtype=np.float64)
    d = np.sqrt(np.einsum("...k,...k->...", P - P[i], P - P[i]))
    cand = [j for j in range(len(P)) if j != i and d[j] <= radius]
    cand.sort(key=lambda j: (d[j], j))
    return np.array([i] + cand[: cap - 1], dtype=np.int64)


def brute_force_edge_lengths(vertices, faces):
    seen = {}
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (min(a, b), max(a, b))
            seen[key] = float(np.linalg.norm(vertices[a] - vertices[b]))
    return np.array(list(seen.values()))


def pair_terms_loop(i, neighbors, P, N, eta, sigma, kernel="anisotropic", c_floor=0.001):
    c, d, w = [], [], []
    for j in neighbors:
        a = abs(float(N[i] @ (P[i] - P[j])))
        b = abs(float(N[j] @ (P[j] - P[i])))
        dij = max(0.5 * (a + b), eta)
        c.append(max(float(N[i] @ N[j]), c_floor))
        d.append(dij)
        if kernel == "anisotropic":
            w.append(np.exp(-dij ** 2 / (2 * sigma ** 2)))
        else:
            w.append(np.exp(-float((P[i] - P[j]) @ (P[i] - P[j])) / (2 * sigma ** 2)))
    return np.array(c), np.array(d), np.array(w)


def mu_robust_loop(c, d, w):
    sa = sb = 0.0
    for cj, dj, wj in zip(c, d, w):
        sa += wj * dj
        sb += wj * cj * dj
    return sa / sb


def mu_exact(i, neighbors, P, N, w):
    """Balance factor making p_i stationary along n_i (no floors, no abs)."""
    num = den = 0.0
    for j, wj in zip(neighbors, w):
        num += wj * float(N[i] @ (P[i] - P[j]))
        den += wj * float(N[i] @ N[j]) * float(N[j] @ (P[j] - P[i]))
    return num / den


def dense_system(i, neighbors, P, N, w, mu, gamma, anchor):
    """Assemble sum_j M_ij + M_star and its right-hand side as dense arrays."""
    A = np.zeros((3, 3))
    b = np.zeros(3)
    eye = np.eye(3)
    for j, wj in zip(neighbors, w):
        M = wj * (eye + mu * np.outer(N[j], N[j]))
        A += M
        b += M @ P[j]
    S = gamma * (eye - np.outer(N[i], N[i]))
    return A + S, b + S @ anchor


def gradient(p, i, neighbors, P, N, w, mu, gamma, anchor):
    """Derivative of the per-vertex objective, summed term by term."""
    g = np.zeros(3)
    for j, wj in zip(neighbors, w):
        g += wj * (p - P[j])
        g += mu * wj * N[j] * float(N[j] @ (p - P[j]))
    g += gamma * (np.eye(3) - np.outer(N[i], N[i])) @ (p - anchor)
    return g


def objective(p, i, neighbors, P, N, w, mu, gamma, anchor):
    f = 0.0
    for j, wj in zip(neighbors, w):
        f += 0.5 * wj * float((p - P[j]) @ (p - P[j]))
        f += 0.5 * mu * wj * float(N[j] @ (p - P[j])) ** 2
    t = (np.eye(3) - np.outer(N[i], N[i])) @ (p - anchor)
    return f + 0.5 * gamma * float(t @ t)


def sphere_cap(radius, step, k, rings=2):
    """North pole plus ``rings`` rings of ``k`` equally spaced points with radial normals."""
    pts = [[0.0, 0.0, radius]]
    for q in range(1, rings + 1):
        t = q * step
        for a in range(k):
            ph = 2 * np.pi * a / k
            pts.append([radius * np.sin(t) * np.cos(ph), radius * np.sin(t) * np.sin(ph),
                        radius * np.cos(t)])
    P = np.array(pts)
    return P, P / radius


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def point_segment_distance(p, a, b):
    ab = b - a
    t = np.clip(float((p - a) @ ab) / float(ab @ ab), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def point_triangle_distance(p, a, b, c):
    """Plane projection when it lands inside, otherwise the nearest edge."""
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n)
    q = p - float((p - a) @ n) * n
    inside = all(float(np.cross(v1 - v0, q - v0) @ n) >= 0
                 for v0, v1 in ((a, b), (b, c), (c, a)))
    if inside:
        return abs(float((p - a) @ n))
    return min(point_segment_distance(p, a, b), point_segment_distance(p, b, c),
               point_segment_distance(p, c, a))


def brute_force_surface_distance(p, vertices, faces):
    return min(point_triangle_distance(p, *vertices[f]) for f in faces)
