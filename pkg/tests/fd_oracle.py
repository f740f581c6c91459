"""Independent Shortley-Weller finite-difference Dirichlet solver.

Oracle for cross-checking the boundary-integral solver: second-order
5-point Laplacian on a uniform grid, with boundary-fitted irregular arms
where grid edges cross the domain boundary.  Depends only on the domain's
polyline and the boundary data callable.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

THETA_MIN = 1e-6


def _axis_crossings(poly: np.ndarray, level: float, axis: int) -> np.ndarray:
    """Sorted coordinates where the closed polyline crosses a grid line."""
    a = poly[:, 1 - axis]
    b = np.roll(a, -1)
    c = poly[:, axis]
    d = np.roll(c, -1)
    hit = (a > level) != (b > level)
    if not np.any(hit):
        return np.empty(0)
    frac = (level - a[hit]) / (b[hit] - a[hit])
    return np.sort(c[hit] + frac * (d[hit] - c[hit]))


class ShortleyWellerSolver:
    def __init__(self, domain, g, n: int = 512, margin: float = 0.02):
        poly = domain.dense_polyline(16384)
        lo = poly.min(axis=0) - margin
        hi = poly.max(axis=0) + margin
        self.xs = np.linspace(lo[0], hi[0], n)
        self.ys = np.linspace(lo[1], hi[1], n)
        self.hx = self.xs[1] - self.xs[0]
        self.hy = self.ys[1] - self.ys[0]
        self.n = n

        row_cross = [_axis_crossings(poly, y, 0) for y in self.ys]
        col_cross = [_axis_crossings(poly, x, 1) for x in self.xs]

        inside = np.zeros((n, n), dtype=bool)  # [ix, iy]
        for iy, y in enumerate(self.ys):
            cr = row_cross[iy]
            if len(cr) == 0:
                continue
            idx = np.searchsorted(cr, self.xs)
            inside[:, iy] = idx % 2 == 1
        self.inside = inside

        index = -np.ones((n, n), dtype=int)
        ij = np.argwhere(inside)
        index[ij[:, 0], ij[:, 1]] = np.arange(len(ij))
        rows, cols, vals = [], [], []
        rhs = np.zeros(len(ij))

        def arm(cross_list, coord, lo_val, hi_val, h):
            """Distances (fractions of h) to the boundary, both directions."""
            cr = cross_list
            before = cr[cr <= coord]
            after = cr[cr >= coord]
            th_lo = (coord - before[-1]) / h if len(before) else 1.0
            th_hi = (after[0] - coord) / h if len(after) else 1.0
            return max(min(th_lo, 1.0), THETA_MIN), \
                max(min(th_hi, 1.0), THETA_MIN)

        for eq, (ix, iy) in enumerate(ij):
            x, y = self.xs[ix], self.ys[iy]
            # horizontal arms
            th_w = th_e = 1.0
            if not inside[ix - 1, iy]:
                th_w, _ = arm(row_cross[iy], x, None, None, self.hx)
            if not inside[ix + 1, iy]:
                _, th_e = arm(row_cross[iy], x, None, None, self.hx)
            th_s = th_n = 1.0
            if not inside[ix, iy - 1]:
                th_s, _ = arm(col_cross[ix], y, None, None, self.hy)
            if not inside[ix, iy + 1]:
                _, th_n = arm(col_cross[ix], y, None, None, self.hy)

            cx = 2.0 / (self.hx * self.hx)
            cy = 2.0 / (self.hy * self.hy)
            diag = -(cx / (th_e * th_w) + cy / (th_n * th_s))
            rows.append(eq)
            cols.append(eq)
            vals.append(diag)
            for (tj, ti), th_a, th_b, cc in (
                    ((ix + 1, iy), th_e, th_w, cx),
                    ((ix - 1, iy), th_w, th_e, cx),
                    ((ix, iy + 1), th_n, th_s, cy),
                    ((ix, iy - 1), th_s, th_n, cy)):
                coef = cc / (th_a * (th_a + th_b))
                if inside[tj, ti]:
                    rows.append(eq)
                    cols.append(index[tj, ti])
                    vals.append(coef)
                else:
                    # boundary point along this arm
                    bx, by = x, y
                    if tj != ix:
                        bx = x + np.sign(tj - ix) * th_a * self.hx
                    else:
                        by = y + np.sign(ti - iy) * th_a * self.hy
                    rhs[eq] -= coef * float(g(np.array([[bx, by]]))[0])

        mat = coo_matrix((vals, (rows, cols)),
                         shape=(len(ij), len(ij))).tocsr()
        self.values = spsolve(mat, rhs)
        self.index = index

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Values at points, snapped to the nearest interior grid node."""
        pts = np.atleast_2d(points)
        out = np.empty(len(pts))
        for i, (x, y) in enumerate(pts):
            ix = int(round((x - self.xs[0]) / self.hx))
            iy = int(round((y - self.ys[0]) / self.hy))
            if self.index[ix, iy] < 0:
                raise ValueError("point snaps outside the domain")
            out[i] = self.values[self.index[ix, iy]]
        return out

    def snap(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        ix = np.round((pts[:, 0] - self.xs[0]) / self.hx).astype(int)
        iy = np.round((pts[:, 1] - self.ys[0]) / self.hy).astype(int)
        return np.stack([self.xs[ix], self.ys[iy]], axis=1)
