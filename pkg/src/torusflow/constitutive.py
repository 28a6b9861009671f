"""Double-well potential and the two-phase Carreau stress.

Both phase laws have the form ``tau(s) = nu(|s|^2) * s`` with a scalar
secant viscosity, so the phase blend is again a scalar multiple of ``s``.
The grid code in the stepper works with that viscosity directly.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UsageError

SIGMA = 4.0 / 3.0


def w_eval(phi):
    """Equal-depth double well ``(1 - phi^2)^2 / 2``."""
    return 0.5 * (1.0 - phi * phi) ** 2


def w_prime(phi):
    return -2.0 * phi * (1.0 - phi * phi)


def w_double_prime(phi):
    return 6.0 * phi * phi - 2.0


def sigma_const():
    """Profile energy ``int_{-1}^{1} sqrt(2 W(s)) ds``, equal to 4/3."""
    return SIGMA


@dataclass(frozen=True)
class StressLaw:
    """Per-phase Carreau coefficients ``(a + b|s|^2)^((p-2)/2) s``."""

    p: float = 3.0
    a_plus: float = 1.0
    b_plus: float = 1.0
    a_minus: float = 1.0
    b_minus: float = 1.0

    def check(self, d=2):
        if not self.p > (d + 2) / 2:
            raise ConfigError(f"physics.p={self.p} must exceed (d+2)/2 = {(d + 2) / 2}")
        for name in ("a_plus", "b_plus", "a_minus", "b_minus"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"physics.{name} must be > 0")
        return self

    def coefficients(self, phase):
        if phase in ("+", 1, "plus"):
            return self.a_plus, self.b_plus
        if phase in ("-", -1, "minus"):
            return self.a_minus, self.b_minus
        raise UsageError(f"unknown phase {phase!r}")


def frob2(s):
    """``s:s`` for matrices stacked on the two leading axes."""
    return np.einsum("ij...,ij...->...", s, s)


def carreau_viscosity(s2, a, b, p):
    with np.errstate(invalid="ignore"):
        return (a + b * s2) ** ((p - 2.0) / 2.0)


def _as_symmetric(s):
    s = np.asarray(s, dtype=float)
    asym = np.max(np.abs(s - np.swapaxes(s, 0, 1))) if s.size else 0.0
    if asym > 1e-10:
        raise UsageError(f"stress argument is not symmetric (asymmetry {asym:.3g})")
    return 0.5 * (s + np.swapaxes(s, 0, 1))


def tau_phase(s, law, phase):
    """Stress of one phase; ``s`` has its matrix indices on the leading axes."""
    s = _as_symmetric(s)
    a, b = law.coefficients(phase)
    return carreau_viscosity(frob2(s), a, b, law.p) * s


def blend_weights(phi):
    c = np.clip(phi, -1.0, 1.0)
    return 0.5 * (1.0 + c), 0.5 * (1.0 - c)


def blended_viscosity(phi, s2, law):
    """Secant viscosity of the phase blend, with ``phi`` clamped to [-1, 1]."""
    wp, wm = blend_weights(phi)
    return (wp * carreau_viscosity(s2, law.a_plus, law.b_plus, law.p)
            + wm * carreau_viscosity(s2, law.a_minus, law.b_minus, law.p))


def tau_blend(phi, s, law):
    s = _as_symmetric(s)
    return blended_viscosity(phi, frob2(s), law) * s


@dataclass
class AdmissibilityReport:
    nu0_lower: float
    growth_ok: bool
    monotone_ok: bool
    samples: int
    worst_pair: tuple
    coercivity_min: float = np.nan
    growth_max: float = np.nan
    upper_max: float = np.nan
    monotone_min: float = np.nan
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.growth_ok and self.monotone_ok


def _random_symmetric(rng, n, d):
    g = rng.standard_normal((n, d, d))
    s = 0.5 * (g + np.swapaxes(g, 1, 2))
    s /= np.sqrt(np.einsum("nij,nij->n", s, s))[:, None, None]
    mag = 10.0 ** rng.uniform(-3.0, 3.0, size=n)
    return s * mag[:, None, None]


def validate_stress_law(law, samples=10_000, seed=0, d=2):
    """Sample the structural inequalities of both phase laws.

    Magnitudes ``|s|`` are log-uniform on [1e-3, 1e3].  Coercivity is read off
    as the smallest ``tau(s):s / |s|^p`` over samples with ``|s| >= 1``;
    growth as the largest ``|tau(s)| / (1 + |s|^(p-1))`` and
    ``tau(s):s / (1 + |s|^p)``.  Monotonicity uses independent pairs.
    """
    if samples < 1000:
        raise ConfigError("validate_stress_law needs at least 1000 samples")
    rng = np.random.default_rng(seed)
    p = law.p
    coercive, growth, upper, mono = np.inf, 0.0, 0.0, np.inf
    worst = None
    for phase in ("+", "-"):
        a, b = law.coefficients(phase)
        s = _random_symmetric(rng, samples, d)
        s_hat = _random_symmetric(rng, samples, d)
        s2 = np.einsum("nij,nij->n", s, s)
        t = carreau_viscosity(s2, a, b, p)[:, None, None] * s
        t_hat = carreau_viscosity(np.einsum("nij,nij->n", s_hat, s_hat), a, b, p)[:, None, None] * s_hat
        norm = np.sqrt(s2)
        work = np.einsum("nij,nij->n", t, s)
        big = norm >= 1.0
        with np.errstate(invalid="ignore"):
            ratio = work[big] / norm[big] ** p
            coercive = min(coercive, np.min(np.where(np.isfinite(ratio), ratio, -np.inf)))
            g = np.sqrt(np.einsum("nij,nij->n", t, t)) / (1.0 + norm ** (p - 1))
            growth = max(growth, np.max(np.where(np.isfinite(g), g, np.inf)))
            up = work / (1.0 + norm ** p)
            upper = max(upper, np.max(np.where(np.isfinite(up), up, np.inf)))
            prod = np.einsum("nij,nij->n", t - t_hat, s - s_hat)
        prod = np.where(np.isfinite(prod), prod, -np.inf)
        i = int(np.argmin(prod))
        if prod[i] < mono:
            mono = float(prod[i])
            worst = (phase, s[i], s_hat[i])
    growth_ok = bool(np.isfinite(coercive) and coercive > 0
                     and np.isfinite(growth) and growth > 0
                     and np.isfinite(upper) and upper > 0)
    nu0 = float(min(coercive, 1.0 / growth, 1.0 / upper)) if growth_ok else float("nan")
    return AdmissibilityReport(
        nu0_lower=nu0, growth_ok=growth_ok, monotone_ok=bool(mono >= -1e-12),
        samples=samples, worst_pair=worst, coercivity_min=float(coercive),
        growth_max=float(growth), upper_max=float(upper), monotone_min=mono)
