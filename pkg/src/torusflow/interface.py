"""Zero-contour extraction on a periodic 2-d grid.

Marching squares with linear interpolation along cell edges.  Every crossed
grid edge is shared by exactly two cells, so the segments form a 2-regular
graph on the crossed edges and its cycles are the contour loops.  Loops are
returned with unwrapped coordinates: a loop that winds around the torus
closes up to a lattice vector (``InterfaceCurve.wraps``).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError


@dataclass
class InterfaceCurve:
    loops: list = field(default_factory=list)
    curvature: list = field(default_factory=list)
    wraps: list = field(default_factory=list)

    def __len__(self):
        return len(self.loops)

    @property
    def loop_lengths(self):
        return [_closed_length(p, w) for p, w in zip(self.loops, self.wraps)]

    @property
    def length(self):
        return float(sum(self.loop_lengths))

    @property
    def areas(self):
        """Shoelace area of each loop (``nan`` for loops that wrap the torus)."""
        out = []
        for p, w in zip(self.loops, self.wraps):
            if np.any(w):
                out.append(float("nan"))
                continue
            x, y = p[:, 0], p[:, 1]
            out.append(0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))))
        return out

    def equivalent_radius(self):
        """Radius of the disc with the area of the largest closed loop."""
        areas = [a for a in self.areas if np.isfinite(a)]
        return float(np.sqrt(max(areas) / np.pi)) if areas else 0.0


def _closed_length(p, wrap):
    closing = p[0] + wrap - p[-1]
    seg = np.diff(p, axis=0)
    return float(np.sum(np.hypot(seg[:, 0], seg[:, 1])) + np.hypot(*closing))


def _crossings(f, axis, h):
    g = np.roll(f, -1, axis=axis)
    crossed = (f > 0) != (g > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(crossed, f / (f - g), 0.0)
    return crossed, np.clip(t, 0.0, 1.0)


def extract_interface(phi, grid, arc=None):
    """Zero level set of ``phi`` as closed torus-aware polylines.

    Per-vertex curvature is the inverse circumradius of the vertex and the
    two neighbours found by walking ``arc`` (default ``4h``) along the loop.
    """
    if grid.d != 2:
        raise UsageError("extract_interface supports d = 2 only")
    f = np.asarray(phi, dtype=float)
    N, h = grid.N, grid.h
    cx, tx = _crossings(f, 0, h)  # edge (i,j)-(i+1,j)
    cy, ty = _crossings(f, 1, h)  # edge (i,j)-(i,j+1)
    if not (cx.any() or cy.any()):
        return InterfaceCurve()

    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    nodes = 2 * N * N
    pos = np.full((nodes, 2), np.nan)
    xi = (i * N + j)[cx]
    pos[xi, 0] = (i[cx] + tx[cx]) * h
    pos[xi, 1] = j[cx] * h
    yi = N * N + (i * N + j)[cy]
    pos[yi, 0] = i[cy] * h
    pos[yi, 1] = (j[cy] + ty[cy]) * h

    ip, jp = (i + 1) % N, (j + 1) % N
    edge_id = np.stack([
        i * N + j,                 # bottom
        N * N + ip * N + j,        # right
        i * N + jp,                # top
        N * N + i * N + j,         # left
    ])
    edge_cross = np.stack([cx, cy[ip, j], cx[i, jp], cy])
    inside = f > 0
    c0 = inside

    seg_a, seg_b = [], []
    ncross = edge_cross.sum(axis=0)
    two = ncross == 2
    if two.any():
        order = np.argsort(~edge_cross[:, two], axis=0, kind="stable")[:2]
        ids = edge_id[:, two]
        cols = np.arange(ids.shape[1])
        seg_a.append(ids[order[0], cols])
        seg_b.append(ids[order[1], cols])
    saddle = ncross == 4
    if saddle.any():
        centre = (f + f[ip, j] + f[ip, jp] + f[i, jp]) > 0
        join02 = (centre == c0)[saddle]
        b, r, t, left = (edge_id[k][saddle] for k in range(4))
        # c0 and c2 joined: cut corners c1 (bottom, right) and c3 (top, left)
        seg_a += [np.where(join02, b, left), np.where(join02, t, r)]
        seg_b += [np.where(join02, r, b), np.where(join02, left, t)]
    a = np.concatenate(seg_a)
    bb = np.concatenate(seg_b)

    nbr = np.full((nodes, 2), -1, dtype=np.int64)
    fill = np.zeros(nodes, dtype=np.int64)
    for u, v in zip(a.tolist(), bb.tolist()):
        nbr[u, fill[u]] = v
        fill[u] += 1
        nbr[v, fill[v]] = u
        fill[v] += 1

    visited = np.zeros(nodes, dtype=bool)
    curve = InterfaceCurve()
    for start in np.flatnonzero(fill).tolist():
        if visited[start]:
            continue
        chain = [start]
        visited[start] = True
        prev, cur = -1, start
        while True:
            n0, n1 = nbr[cur]
            nxt = n0 if n0 != prev else n1
            if nxt == start or nxt < 0 or visited[nxt]:
                break
            chain.append(nxt)
            visited[nxt] = True
            prev, cur = cur, nxt
        raw = pos[chain]
        steps = np.diff(raw, axis=0)
        steps -= np.round(steps)
        pts = np.vstack([raw[:1], raw[0] + np.cumsum(steps, axis=0)])
        step = raw[0] - raw[-1]
        step -= np.round(step)
        wrap = np.round(pts[-1] + step - pts[0])
        curve.loops.append(pts)
        curve.wraps.append(wrap)
        curve.curvature.append(_vertex_curvature(pts, wrap, 4 * h if arc is None else arc))
    return curve


def _vertex_curvature(p, wrap, arc):
    n = len(p)
    if n < 3:
        return np.zeros(n)
    ext = np.vstack([p - wrap, p, p + wrap])
    seg = np.hypot(*np.diff(ext, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[2 * n] - s[n]
    arc = min(arc, total / 4)
    idx = np.arange(n, 2 * n)
    back = np.searchsorted(s, s[idx] - arc, side="right") - 1
    fwd = np.searchsorted(s, s[idx] + arc, side="left")
    a, b, c = ext[back], ext[idx], ext[fwd]
    ab = np.hypot(*(b - a).T)
    bc = np.hypot(*(c - b).T)
    ca = np.hypot(*(a - c).T)
    cross = np.abs((b - a)[:, 0] * (c - b)[:, 1] - (b - a)[:, 1] * (c - b)[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        k = 2.0 * cross / (ab * bc * ca)
    return np.nan_to_num(k)
