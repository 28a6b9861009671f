"""Initial phase field and velocity.

The phase field is ``tanh(b * h(d/b) / eps)`` where ``d`` is the torus signed
distance to the initial interface (positive inside the ``+`` phase) and
``h`` is a cap that freezes ``phi`` once ``|d| >= b/2``.  The cap keeps the
profile smooth across the kinks of ``d`` (medial axis, circle centre).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .constitutive import SIGMA
from .errors import ConfigError

log = logging.getLogger(__name__)

SCENARIO_KINDS = ("circle", "stripe", "two_circles", "polyline")
U0_RECIPES = ("zero", "shear", "modes")


@dataclass(frozen=True)
class Scenario:
    """Initial geometry of the ``+`` phase and the initial velocity recipe.

    ``circle`` is a sphere when ``d = 3``; ``stripe`` is the band
    ``y0 < y < y1`` (a slab in 3-d).  ``u0_modes`` entries are
    ``(k, index, amplitude)`` where ``index`` picks among the basis fields of
    wavevector ``k``: ``2*pol`` is the cosine and ``2*pol + 1`` the sine of
    polarization ``pol``; for ``k = 0`` it is the constant direction.
    """

    kind: str = "circle"
    center: tuple = (0.5, 0.5)
    radius: float = 0.25
    center2: tuple = (0.5, 0.5)
    radius2: float = 0.1
    y0: float = 0.25
    y1: float = 0.75
    vertices: tuple = ()
    u0: str = "shear"
    u0_amplitude: float = 0.1
    u0_wavenumber: int = 1
    u0_modes: tuple = ()

    @property
    def d(self):
        return len(self.center)

    def check(self, d=2):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"scenario.kind must be one of {SCENARIO_KINDS}, got {self.kind!r}")
        if self.u0 not in U0_RECIPES:
            raise ConfigError(f"scenario.u0 must be one of {U0_RECIPES}, got {self.u0!r}")
        if self.kind in ("circle", "two_circles"):
            if len(self.center) != d:
                raise ConfigError(f"scenario.center needs {d} coordinates")
            if not 0 < self.radius < 0.45:
                raise ConfigError(f"scenario.radius={self.radius}: radius exceeds 0.45 or is not positive")
        if self.kind == "two_circles":
            if len(self.center2) != d:
                raise ConfigError(f"scenario.center2 needs {d} coordinates")
            if not 0 < self.radius2 < 0.45:
                raise ConfigError(f"scenario.radius2={self.radius2}: radius exceeds 0.45 or is not positive")
            gap = torus_norm(np.subtract(self.center, self.center2)) - self.radius - self.radius2
            if gap <= 0:
                raise ConfigError("scenario: the two circles overlap")
        if self.kind == "stripe" and not 0 <= self.y0 < self.y1 <= self.y0 + 1:
            raise ConfigError("scenario: stripe needs y0 < y1 <= y0 + 1")
        if self.kind == "polyline":
            if d != 2:
                raise ConfigError("scenario: polyline is only available for d = 2")
            if len(self.vertices) < 3:
                raise ConfigError("scenario.vertices needs at least 3 points")
            _check_simple(np.asarray(self.vertices, dtype=float))
        return self

    def perimeter(self):
        d = self.d if self.kind != "stripe" else None
        if self.kind == "circle":
            return _sphere_area(self.radius, d)
        if self.kind == "two_circles":
            return _sphere_area(self.radius, d) + _sphere_area(self.radius2, d)
        if self.kind == "stripe":
            return 2.0
        v = np.asarray(self.vertices, dtype=float)
        return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))

    def reach(self):
        """Distance from the interface to the nearest kink of the distance function."""
        if self.kind == "circle":
            return min(self.radius, 0.5 - self.radius)
        if self.kind == "two_circles":
            gap = torus_norm(np.subtract(self.center, self.center2)) - self.radius - self.radius2
            return min(self.radius, self.radius2, 0.5 - self.radius,
                       0.5 - self.radius2, 0.5 * gap)
        if self.kind == "stripe":
            w = self.y1 - self.y0
            return min(w, 1.0 - w) / 2
        return min(0.25, 0.5 * _polyline_gap(np.asarray(self.vertices, dtype=float)))

    def max_curvature(self):
        if self.kind == "circle":
            return (self.d - 1) / self.radius
        if self.kind == "two_circles":
            return (self.d - 1) / min(self.radius, self.radius2)
        return 0.0


def _sphere_area(r, d):
    return 2 * math.pi * r if d == 2 else 4 * math.pi * r * r


@dataclass(frozen=True)
class ProfileParams:
    eps: float = 0.02
    b: float = 0.0
    gamma: float = 0.25

    def resolved(self, scn, warn=True):
        """Fill in the default cap scale ``b = reach`` and check the constraints."""
        reach = scn.reach()
        b = self.b if self.b > 0 else reach
        if b > reach + 1e-12:
            raise ConfigError(f"profile b={b} exceeds the scenario reach {reach:.4g}")
        if not warn:
            return ProfileParams(self.eps, b, self.gamma)
        if self.eps > b / 10 * (1 + 1e-9):
            log.warning("epsilon=%g > b/10=%g: interface thick relative to the cap scale", self.eps, b / 10)
        if self.eps * scn.max_curvature() > 0.2:
            log.warning("epsilon * max curvature = %.3g > 0.2", self.eps * scn.max_curvature())
        return ProfileParams(self.eps, b, self.gamma)


def torus_delta(dx):
    """Minimum-image displacement on the unit torus."""
    return dx - np.round(dx)


def torus_norm(dx):
    dx = torus_delta(np.asarray(dx, dtype=float))
    return float(np.sqrt(np.sum(dx * dx)))


def _circle_distance(center, radius, x):
    r2 = sum(torus_delta(xi - ci) ** 2 for xi, ci in zip(x, center))
    return radius - np.sqrt(r2)


def _segments(v):
    return v, np.roll(v, -1, axis=0)


def _check_simple(v):
    a, b = _segments(v)
    n = len(v)

    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            d1, d2 = cross(a[j], b[j], a[i]), cross(a[j], b[j], b[i])
            d3, d4 = cross(a[i], b[i], a[j]), cross(a[i], b[i], b[j])
            if d1 * d2 < 0 and d3 * d4 < 0:
                raise ConfigError(f"scenario: polyline self-intersects (segments {i} and {j})")


def _point_segment_distance(px, py, ax, ay, bx, by):
    ex, ey = bx - ax, by - ay
    t = ((px - ax) * ex + (py - ay) * ey) / (ex * ex + ey * ey)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - ax - t * ex, py - ay - t * ey)


def _polyline_gap(v):
    """Smallest distance between non-adjacent segments (sampled at vertices)."""
    a, b = _segments(v)
    n = len(v)
    best = np.inf
    for i in range(n):
        for j in range(n):
            if j in (i, (i + 1) % n, (i - 1) % n):
                continue
            best = min(best, float(_point_segment_distance(a[i, 0], a[i, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1])))
    return best


def _winding_number(px, py, v):
    a, b = _segments(v)
    wn = np.zeros(np.shape(px), dtype=int)
    for (ax, ay), (bx, by) in zip(a, b):
        side = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
        up = (ay <= py) & (by > py) & (side > 0)
        down = (ay > py) & (by <= py) & (side < 0)
        wn += up.astype(int) - down.astype(int)
    return wn


def _polyline_distance(v, x):
    px, py = np.broadcast_arrays(*x)
    a, b = _segments(v)
    dist = np.full(px.shape, np.inf)
    inside = np.zeros(px.shape, dtype=bool)
    for sx in (-1.0, 0.0, 1.0):
        for sy in (-1.0, 0.0, 1.0):
            qx, qy = px + sx, py + sy
            for (ax, ay), (bx, by) in zip(a, b):
                dist = np.minimum(dist, _point_segment_distance(qx, qy, ax, ay, bx, by))
            inside |= _winding_number(qx, qy, v) != 0
    return np.where(inside, dist, -dist)


def signed_distance(scn, x):
    """Torus signed distance to the interface; ``x`` is a sequence of coordinate arrays."""
    x = [np.asarray(xi, dtype=float) for xi in x]
    if scn.kind == "circle":
        return _circle_distance(scn.center, scn.radius, x)
    if scn.kind == "two_circles":
        return np.maximum(_circle_distance(scn.center, scn.radius, x),
                          _circle_distance(scn.center2, scn.radius2, x))
    if scn.kind == "stripe":
        w = scn.y1 - scn.y0
        dy = torus_delta(x[1] - 0.5 * (scn.y0 + scn.y1))
        return np.broadcast_to(0.5 * w - np.abs(dy), np.broadcast(*x).shape).copy()
    if scn.kind == "polyline":
        return _polyline_distance(np.asarray(scn.vertices, dtype=float), x)
    raise ConfigError(f"unknown scenario kind {scn.kind!r}")


def smooth_cap(s):
    """Odd, non-decreasing C^1 cap: identity on [0, 1/4], 1/2 beyond 1/2.

    On (1/4, 1/2) it is the cubic Hermite ``1/4 + (t + t^2 - t^3)/4`` with
    ``t = 4s - 1``.
    """
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    t = 4.0 * a - 1.0
    mid = 0.25 + 0.25 * (t + t * t - t ** 3)
    out = np.where(a <= 0.25, a, np.where(a >= 0.5, 0.5, mid))
    return np.sign(s) * out


def initial_phase(scn, prm, grid):
    if prm.eps < 2 * grid.h:
        raise ConfigError(f"epsilon={prm.eps} < 2h={2 * grid.h}: interface under-resolved")
    prm = prm.resolved(scn)
    dist = signed_distance(scn, grid.coords)
    return np.tanh(prm.b * smooth_cap(dist / prm.b) / prm.eps)


def _canonical(k):
    nz = [c for c in k if c]
    return (tuple(-c for c in k), -1.0) if nz and nz[0] < 0 else (tuple(k), 1.0)


def recipe_field(scn, grid):
    """Evaluate the velocity recipe on the grid before projection."""
    d = grid.d
    u = np.zeros((d,) + grid.shape)
    if scn.u0 == "zero":
        return u
    x = np.broadcast_arrays(*grid.coords)
    if scn.u0 == "shear":
        u[0] = scn.u0_amplitude * np.sin(2 * np.pi * scn.u0_wavenumber * x[1])
        return u
    for k, index, amp in scn.u0_modes:
        k, sgn = _canonical(tuple(int(c) for c in k))
        pols = spectral._polarization_vectors(k)
        if not any(k):
            u += amp * pols[index].reshape((-1,) + (1,) * d)
            continue
        phase = 2 * np.pi * sum(ki * xi for ki, xi in zip(k, x))
        e = pols[index // 2].reshape((-1,) + (1,) * d)
        wave = np.cos(phase) if index % 2 == 0 else sgn * np.sin(phase)
        u += amp * np.sqrt(2) * e * wave
    return u


def _recipe_wavevectors(scn):
    if scn.u0 == "shear":
        return [(0, scn.u0_wavenumber)]
    if scn.u0 == "modes":
        return [tuple(k) for k, _, _ in scn.u0_modes]
    return []


def initial_velocity(scn, basis, grid):
    """Project the recipe onto the Galerkin space; returns the grid field."""
    for k in _recipe_wavevectors(scn):
        if sum(c * c for c in k) > basis.K ** 2:
            log.warning("velocity mode %s lies above the cutoff K=%d and is dropped", k, basis.K)
    u_hat = spectral.project_hat(grid.fft(recipe_field(scn, grid)), grid) * basis.mask(grid)
    return grid.ifft(u_hat)


@dataclass
class InitialEnergy:
    discrete: float
    analytic: float
    surface: float
    kinetic: float

    @property
    def excess(self):
        return self.discrete / self.analytic - 1.0

    @property
    def flagged(self):
        return self.excess > 0.05


def initial_energy_check(phi0, u0, kappa1, eps, grid, scn):
    """Compare ``kappa1 * mu_0(Omega) + |u0|^2/2`` with the sharp-interface value."""
    from .diagnostics import surface_measure

    surface = surface_measure(phi0, eps, grid)
    kinetic = 0.5 * grid.integrate(np.sum(u0 * u0, axis=0))
    analytic = kappa1 * scn.perimeter() + kinetic
    return InitialEnergy(kappa1 * surface + kinetic, analytic, surface, kinetic)


__all__ = [
    "Scenario", "ProfileParams", "SIGMA", "signed_distance", "smooth_cap",
    "initial_phase", "initial_velocity", "initial_energy_check", "torus_delta",
]
