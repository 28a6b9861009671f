"""Fourier machinery on the periodic unit box.

Fields are plain numpy arrays.  A scalar field on a ``GridSpec`` with
``d`` dimensions has shape ``(N,)*d``; a vector field has shape
``(d,) + (N,)*d`` with component ``i`` along axis ``i``.  Spectral arrays use
the real-to-complex layout of :func:`scipy.fft.rfftn` over the trailing
``d`` axes.

The divergence-free Galerkin space is never materialized.  Truncating to
``|k| <= K`` and applying the Leray projector in Fourier space is the same
orthogonal projection as expanding in the trigonometric basis returned by
:func:`basis_fields`, because both are diagonal in ``k``.
"""
import itertools
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import ConfigError, UsageError

__all__ = [
    "GridSpec", "ModeSet", "MollifierKernel", "build_mode_basis",
    "basis_fields", "leray_project", "galerkin_truncate", "mollifier_kernel",
    "mollify", "gradient", "divergence", "laplacian", "sym_gradient",
    "MOLLIFIER_MODES",
]

MOLLIFIER_MODES = ("power", "interface", "grid", "none")


def fft_workers():
    """Worker count for scipy.fft, capped by ``TORUSFLOW_THREADS``."""
    value = os.environ.get("TORUSFLOW_THREADS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with ``N`` points per axis on the unit torus."""

    d: int = 2
    N: int = 256

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ConfigError(f"grid.d must be 2 or 3, got {self.d}")
        if self.N < 16 or self.N % 2 or self.N & (self.N - 1):
            raise ConfigError(f"grid.N must be a power of two >= 16, got {self.N}")

    @property
    def h(self):
        return 1.0 / self.N

    @property
    def shape(self):
        return (self.N,) * self.d

    @property
    def axes(self):
        return tuple(range(-self.d, 0))

    @property
    def cell_volume(self):
        return self.h ** self.d

    @cached_property
    def coords(self):
        """Grid coordinates, one broadcastable array per axis."""
        x = np.arange(self.N) * self.h
        out = []
        for i in range(self.d):
            shape = [1] * self.d
            shape[i] = self.N
            out.append(x.reshape(shape))
        return tuple(out)

    def mesh(self):
        return np.stack(np.broadcast_arrays(*self.coords))

    @cached_property
    def wavenumbers(self):
        """Integer wavevector components in rfftn layout."""
        ks = []
        for i in range(self.d):
            if i == self.d - 1:
                k = np.arange(self.N // 2 + 1)
            else:
                k = np.fft.fftfreq(self.N, 1.0 / self.N)
            shape = [1] * self.d
            shape[i] = k.size
            ks.append(k.reshape(shape).astype(float))
        return tuple(ks)

    @cached_property
    def k2(self):
        return sum(k ** 2 for k in self.wavenumbers)

    @cached_property
    def ddx(self):
        """First-derivative multipliers ``2*pi*i*k``; Nyquist entries zeroed."""
        out = []
        for k in self.wavenumbers:
            m = 2j * np.pi * k
            m = np.where(np.abs(k) == self.N // 2, 0, m)
            out.append(m)
        return tuple(out)

    @cached_property
    def projection_wavenumbers(self):
        """Wavevectors with Nyquist components zeroed, matching :attr:`ddx`."""
        return tuple(np.where(np.abs(k) == self.N // 2, 0.0, k) for k in self.wavenumbers)

    @cached_property
    def lap(self):
        return -(2 * np.pi) ** 2 * self.k2

    @cached_property
    def spec_shape(self):
        return self.shape[:-1] + (self.N // 2 + 1,)

    @cached_property
    def dealias_mask(self):
        """Two-thirds rule: keep components with ``|k_i| < N/3``."""
        keep = np.ones(self.spec_shape, dtype=bool)
        for k in self.wavenumbers:
            keep &= np.abs(k) < self.N / 3
        return keep

    def fft(self, f):
        return scipy.fft.rfftn(f, axes=self.axes, workers=fft_workers())

    def ifft(self, f_hat):
        return scipy.fft.irfftn(f_hat, s=self.shape, axes=self.axes,
                                workers=fft_workers())

    def integrate(self, f):
        """Rectangle-rule integral over the torus (spectrally exact)."""
        return float(np.sum(f) * self.cell_volume)

    def check(self, field, vector=False):
        expected = ((self.d,) if vector else ()) + self.shape
        if np.shape(field) != expected:
            raise UsageError(f"field shape {np.shape(field)} does not match grid {expected}")


@dataclass(frozen=True)
class ModeSet:
    """Ordered divergence-free Fourier basis with ``|k| <= K``.

    ``modes`` holds one representative per ``+-k`` pair (first nonzero
    component positive), sorted by ``|k|`` then lexicographically.  Every
    nonzero mode carries ``d - 1`` polarizations, each with a cosine and a
    sine field; ``k = 0`` carries ``d`` constant fields.
    """

    d: int
    K: int
    modes: tuple

    @property
    def polarizations(self):
        return tuple(self.d if not any(k) else self.d - 1 for k in self.modes)

    @property
    def size(self):
        return sum(p if not any(k) else 2 * p
                   for k, p in zip(self.modes, self.polarizations))

    def mask(self, grid):
        """Boolean array (rfftn layout) of retained wavevectors."""
        return grid.k2 <= self.K ** 2 + 1e-9


def build_mode_basis(grid, K):
    if not 1 <= K <= grid.N / 3:
        raise ConfigError(f"cutoff K={K} outside [1, N/3] for N={grid.N}")
    rng = range(-K, K + 1)
    modes = []
    for k in itertools.product(rng, repeat=grid.d):
        if sum(c * c for c in k) > K * K:
            continue
        nz = [c for c in k if c]
        if nz and nz[0] < 0:
            continue
        modes.append(k)
    modes.sort(key=lambda k: (sum(c * c for c in k), k))
    return ModeSet(grid.d, K, tuple(modes))


def _polarization_vectors(k):
    k = np.asarray(k, dtype=float)
    d = k.size
    if not k.any():
        return list(np.eye(d))
    n = k / np.linalg.norm(k)
    if d == 2:
        return [np.array([-n[1], n[0]])]
    # Gram-Schmidt against the coordinate axis least aligned with k
    ref = np.eye(3)[np.argmin(np.abs(n))]
    e1 = ref - (ref @ n) * n
    e1 /= np.linalg.norm(e1)
    return [e1, np.cross(n, e1)]


def basis_fields(basis, grid):
    """Materialize the basis as a list of vector fields (testing aid)."""
    x = np.broadcast_arrays(*grid.coords)
    fields = []
    for k in basis.modes:
        pols = _polarization_vectors(k)
        if not any(k):
            for e in pols:
                fields.append(e.reshape((-1,) + (1,) * grid.d) * np.ones(grid.shape))
            continue
        phase = 2 * np.pi * sum(ki * xi for ki, xi in zip(k, x))
        for e in pols:
            e = e.reshape((-1,) + (1,) * grid.d)
            fields.append(np.sqrt(2) * e * np.cos(phase))
            fields.append(np.sqrt(2) * e * np.sin(phase))
    return fields


def project_hat(v_hat, grid):
    """Apply ``I - k k^T / |k|^2`` to spectral vector coefficients.

    Nyquist components of ``k`` are dropped, as in the derivative
    multipliers, so the result is real, idempotent and divergence-free for
    the discrete divergence.
    """
    k = grid.projection_wavenumbers
    k2 = sum(ki * ki for ki in k)
    k2 = np.where(k2 == 0, 1.0, k2)
    kdotv = sum(ki * vi for ki, vi in zip(k, v_hat)) / k2
    return np.stack([vi - ki * kdotv for ki, vi in zip(k, v_hat)])


def leray_project(v, grid):
    grid.check(v, vector=True)
    return grid.ifft(project_hat(grid.fft(v), grid))


def galerkin_truncate(v, basis, grid):
    grid.check(v, vector=True)
    v_hat = grid.fft(v) * basis.mask(grid)
    return grid.ifft(v_hat)


@dataclass(frozen=True, eq=False)
class MollifierKernel:
    """Periodized non-negative unit-mass kernel and its Fourier multiplier."""

    mode: str
    width: float
    samples: np.ndarray
    hat: np.ndarray


def _bump(r2):
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def mollifier_kernel(grid, eps, gamma=0.25, mode="interface"):
    if mode not in MOLLIFIER_MODES:
        raise ConfigError(f"mollifier mode must be one of {MOLLIFIER_MODES}, got {mode!r}")
    if not 0 < gamma < 0.5:
        raise ConfigError(f"gamma={gamma} outside (0, 1/2)")
    if not 0 < eps <= 1:
        raise ConfigError(f"epsilon={eps} outside (0, 1]")
    if mode == "none":
        samples = np.zeros(grid.shape)
        samples[(0,) * grid.d] = 1.0 / grid.cell_volume
        return MollifierKernel(mode, 0.0, samples, np.ones(grid.spec_shape))
    width = {"power": eps ** (gamma / grid.d), "interface": eps,
             "grid": 4 * grid.h}[mode]
    if width < 2 * grid.h:
        raise ConfigError(f"mollifier width {width:.4g} < 2h = {2 * grid.h:.4g}; kernel unresolvable")
    # minimum-image offsets, then sum the images so widths above 1/2 still wrap
    y = [c - np.round(c) for c in np.broadcast_arrays(*grid.coords)]
    samples = np.zeros(grid.shape)
    for shift in itertools.product((-1, 0, 1), repeat=grid.d):
        r2 = sum((yi + s) ** 2 for yi, s in zip(y, shift)) / width ** 2
        samples += _bump(r2)
    samples /= samples.sum() * grid.cell_volume
    hat = (grid.fft(samples) * grid.cell_volume).real
    return MollifierKernel(mode, width, samples, hat)


def mollify(v, kern, grid):
    """Periodic convolution with the kernel, done in Fourier space."""
    if kern.hat.shape != grid.spec_shape:
        raise UsageError("mollifier kernel was built for a different grid")
    if kern.mode == "none":
        return np.array(v, copy=True)
    return grid.ifft(grid.fft(v) * kern.hat)


def gradient(f, grid):
    grid.check(f)
    f_hat = grid.fft(f)
    return np.stack([grid.ifft(m * f_hat) for m in grid.ddx])


def divergence(v, grid):
    grid.check(v, vector=True)
    v_hat = grid.fft(v)
    return grid.ifft(sum(m * vi for m, vi in zip(grid.ddx, v_hat)))


def laplacian(f, grid):
    grid.check(f)
    return grid.ifft(grid.lap * grid.fft(f))


def sym_gradient_hat(v_hat, grid):
    """Spectral components ``e_ij`` for ``i <= j`` (upper triangle)."""
    out = {}
    for i in range(grid.d):
        for j in range(i, grid.d):
            out[i, j] = 0.5 * (grid.ddx[j] * v_hat[i] + grid.ddx[i] * v_hat[j])
    return out


def sym_gradient(v, grid):
    """``e(v) = (grad v + grad v^T)/2`` as an array of shape ``(d, d) + grid``."""
    grid.check(v, vector=True)
    parts = sym_gradient_hat(grid.fft(v), grid)
    e = np.empty((grid.d, grid.d) + grid.shape)
    for (i, j), part in parts.items():
        e[i, j] = grid.ifft(part)
        e[j, i] = e[i, j]
    return e
