"""Time stepping for the coupled velocity / phase-field system.

One step is a Lie split: Heun (two-stage RK) on the truncated velocity
coefficients with the phase frozen, then one IMEX Euler step of the
Allen-Cahn equation transported by the mollified updated velocity.  The
velocity lives in the Galerkin space (``|k| <= K``, divergence-free), which
``K < N/3`` keeps free of aliasing in the advection product.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .constitutive import SIGMA, StressLaw, blended_viscosity, carreau_viscosity, w_eval, w_prime
from .errors import BlowUpError, UsageError

log = logging.getLogger(__name__)

PHI_CAP = 1.1
MIN_DT = 1e-12


@dataclass(frozen=True)
class PhysicsParams:
    eps: float = 0.02
    gamma: float = 0.25
    kappa1: float = 1.0
    kappa2: float = 1.0
    law: StressLaw = field(default_factory=StressLaw)
    mollifier: str = "interface"
    # test hook: -1 flips the capillary force (breaks energy dissipation)
    capillary_sign: float = 1.0


@dataclass(frozen=True)
class StepParams:
    dt: float = 0.0
    dt_policy: str = "fixed"
    safety: float = 0.5
    dealias: bool = True


@dataclass
class SimState:
    u_hat: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    def velocity(self, grid):
        return grid.ifft(self.u_hat)


class Model:
    """Grid, Galerkin basis, physics and the operators derived from them."""

    def __init__(self, grid, basis, phys):
        if basis.d != grid.d:
            raise UsageError("basis and grid dimensions differ")
        if phys.eps < 2 * grid.h:
            raise UsageError(f"epsilon={phys.eps} < 2h={2 * grid.h}")
        self.grid = grid
        self.basis = basis
        self.phys = phys
        self.kern = spectral.mollifier_kernel(grid, phys.eps, phys.gamma, phys.mollifier)
        self.mask = basis.mask(grid)
        self.pairs = [(i, j) for i in range(grid.d) for j in range(i, grid.d)]

    def state_from_fields(self, phi, u, t=0.0):
        g = self.grid
        u_hat = spectral.project_hat(g.fft(u), g) * self.mask
        return SimState(u_hat, np.array(phi, dtype=float), float(t))


def _sym(pairs, i, j):
    return (i, j) if i <= j else (j, i)


def _strain(u_hat, model):
    """Grid strain components ``e_ij`` (upper triangle) and ``e:e``."""
    g = model.grid
    e = {ij: g.ifft(part) for ij, part in spectral.sym_gradient_hat(u_hat, g).items()}
    s2 = sum(e[ij] ** 2 * (1.0 if ij[0] == ij[1] else 2.0) for ij in model.pairs)
    return e, s2


def capillary_tensor(phi, model, grad=None):
    """``(kappa1 eps / sigma) (grad phi x grad phi) * zeta`` as a dict over ``i <= j``."""
    g, ph = model.grid, model.phys
    if grad is None:
        grad = spectral.gradient(phi, g)
    coef = ph.kappa1 * ph.eps / SIGMA
    return {(i, j): coef * spectral.mollify(grad[i] * grad[j], model.kern, g)
            for i, j in model.pairs}


def _capillary_hat(phi, model):
    g, ph = model.grid, model.phys
    if ph.kappa1 == 0:
        return None
    grad = spectral.gradient(phi, g)
    coef = ph.capillary_sign * ph.kappa1 * ph.eps / SIGMA
    return {(i, j): coef * g.fft(grad[i] * grad[j]) * model.kern.hat for i, j in model.pairs}


def _check_finite(name, arr, state=None):
    if not np.all(np.isfinite(arr)):
        raise BlowUpError(f"non-finite values in {name}", state=state)


def momentum_rhs(u_hat, phi, model, cap_hat=None, dealias=True, with_dissipation=False):
    """Projected, truncated ``div tau(phi, e(u)) - div(u x u) - div C``.

    ``cap_hat`` is the spectral capillary tensor; ``None`` means no capillary
    force.  With ``with_dissipation`` also returns ``int tau : e(u)``.
    """
    g, law = model.grid, model.phys.law
    e, s2 = _strain(u_hat, model)
    nu = blended_viscosity(phi, s2, law)
    _check_finite("viscosity", nu)
    uh = u_hat * g.dealias_mask if dealias else u_hat
    u = g.ifft(uh)
    flux = {}
    for i, j in model.pairs:
        f_hat = g.fft(nu * e[i, j] - u[i] * u[j])
        if cap_hat is not None:
            f_hat = f_hat - cap_hat[i, j]
        flux[i, j] = f_hat
    rhs = np.stack([sum(g.ddx[j] * flux[_sym(model.pairs, i, j)] for j in range(g.d))
                    for i in range(g.d)])
    rhs = spectral.project_hat(rhs, g) * model.mask
    _check_finite("momentum right-hand side", rhs)
    if with_dissipation:
        return rhs, g.integrate(nu * s2)
    return rhs


def ac_step(phi, u_hat, model, dt, return_chem=False):
    """IMEX Euler step for the phase: implicit diffusion, explicit rest.

    With ``return_chem`` also returns the step's chemical potential
    ``lap phi^{n+1} - W'(phi^n) / eps^2``, the quantity whose square the
    scheme actually dissipates.
    """
    g, ph = model.grid, model.phys
    phi_hat = g.fft(phi)
    reaction = w_prime(phi) / ph.eps ** 2
    rhs = phi - dt * ph.kappa2 * reaction
    if np.any(u_hat):
        v = g.ifft(u_hat * model.kern.hat)
        rhs = rhs - dt * sum(v[i] * g.ifft(g.ddx[i] * phi_hat) for i in range(g.d))
    new_hat = g.fft(rhs) / (1.0 - dt * ph.kappa2 * g.lap)
    new = g.ifft(new_hat)
    top = float(np.max(np.abs(new)))
    if not math.isfinite(top) or top > PHI_CAP:
        raise BlowUpError(f"max|phi| = {top:.4g} exceeds {PHI_CAP}")
    if return_chem:
        return new, g.ifft(g.lap * new_hat) - reaction
    return new


def stable_dt(state, model, safety=0.5, detail=False):
    """Largest step allowed by the reaction, advection and viscous limits.

    The viscous limit is ``1 / (pi^2 K^2 nu_max)``: the explicit Heun step
    on ``-(2 pi |k|)^2 nu / 2`` is stable for ``|lambda| dt <= 2`` and the
    largest retained wavenumber is ``K``.
    """
    g, ph, law = model.grid, model.phys, model.phys.law
    reaction = ph.eps ** 2 / (4.0 * ph.kappa2)
    u = g.ifft(state.u_hat)
    umax = float(np.max(np.sqrt(np.sum(u * u, axis=0))))
    advection = g.h / (2.0 * umax + 1e-12)
    _, s2 = _strain(state.u_hat, model)
    s2max = float(np.max(s2))
    nu = max(float(carreau_viscosity(s2max, law.a_plus, law.b_plus, law.p)),
             float(carreau_viscosity(s2max, law.a_minus, law.b_minus, law.p)))
    viscous = 1.0 / (math.pi ** 2 * model.basis.K ** 2 * nu)
    dt = safety * min(reaction, advection, viscous)
    if not dt >= MIN_DT:
        raise BlowUpError(f"stable time step {dt:.3g} below {MIN_DT}", state=state)
    if detail:
        return dt, {"reaction": reaction, "advection": advection, "viscous": viscous}
    return dt


def step(state, model, dt, dealias=True, return_rate=False):
    """One split step.  ``return_rate`` adds the step's Allen-Cahn rate
    ``(eps / sigma) int chem^2`` (see :func:`ac_step`)."""
    if not dt > 0:
        raise UsageError("dt must be positive")
    cap = _capillary_hat(state.phi, model)
    if cap is None and not np.any(state.u_hat):
        # no forcing and no flow: the momentum update is exactly zero
        u_hat = state.u_hat.copy()
    else:
        k1 = momentum_rhs(state.u_hat, state.phi, model, cap, dealias)
        k2 = momentum_rhs(state.u_hat + dt * k1, state.phi, model, cap, dealias)
        u_hat = state.u_hat + 0.5 * dt * (k1 + k2)
    try:
        phi, chem = ac_step(state.phi, u_hat, model, dt, return_chem=True)
    except BlowUpError as exc:
        exc.state = state
        raise
    new = SimState(u_hat, phi, state.t + dt)
    if return_rate:
        g = model.grid
        return new, model.phys.eps / SIGMA * g.integrate(chem * chem)
    return new


def kinetic_energy(u_hat, grid):
    """``int |u|^2 / 2`` from real-FFT coefficients (Parseval)."""
    w = np.full(grid.spec_shape[-1], 2.0)
    w[0] = 1.0
    if grid.N % 2 == 0:
        w[-1] = 1.0
    total = float(np.sum(w * np.abs(u_hat) ** 2))
    return 0.5 * total / grid.N ** (2 * grid.d)


def energy_terms(state, model):
    """Kinetic and surface energy and the two dissipation rates of a state.

    ``visc`` is ``int tau : e(u)``; ``ac`` is ``(eps/sigma) int (lap phi -
    W'(phi)/eps^2)^2`` so the total rate is ``visc + kappa1 kappa2 ac``.
    """
    g, ph = model.grid, model.phys
    phi_hat = g.fft(state.phi)
    grad = np.stack([g.ifft(m * phi_hat) for m in g.ddx])
    lap = g.ifft(g.lap * phi_hat)
    surface = g.integrate(0.5 * ph.eps * np.sum(grad * grad, axis=0) + w_eval(state.phi) / ph.eps) / SIGMA
    chem = lap - w_prime(state.phi) / ph.eps ** 2
    ac = ph.eps / SIGMA * g.integrate(chem * chem)
    _, s2 = _strain(state.u_hat, model)
    visc = g.integrate(blended_viscosity(state.phi, s2, ph.law) * s2)
    kinetic = kinetic_energy(state.u_hat, g)
    return {"kinetic": kinetic, "surface": surface, "total": kinetic + ph.kappa1 * surface,
            "visc": visc, "ac": ac, "rate": visc + ph.kappa1 * ph.kappa2 * ac}


def capillary_work(state, model):
    """Both sides of the capillary / transport cancellation.

    Returns ``(work, transport)`` with ``work = int u . D`` for the projected
    capillary force ``D`` and ``transport = -(kappa1 eps / sigma) int
    (u * zeta) . grad phi lap phi``; the two agree when the coupling is
    energy consistent.
    """
    g, ph = model.grid, model.phys
    cap = _capillary_hat(state.phi, model)
    if cap is None:
        return 0.0, 0.0
    force = -np.stack([sum(g.ddx[j] * cap[_sym(model.pairs, i, j)] for j in range(g.d))
                       for i in range(g.d)])
    force = spectral.project_hat(force, g) * model.mask
    u = g.ifft(state.u_hat)
    work = g.integrate(np.sum(u * g.ifft(force), axis=0))
    phi_hat = g.fft(state.phi)
    v = g.ifft(state.u_hat * model.kern.hat)
    adv = sum(v[i] * g.ifft(g.ddx[i] * phi_hat) for i in range(g.d))
    transport = -ph.kappa1 * ph.eps / SIGMA * g.integrate(adv * g.ifft(g.lap * phi_hat))
    return work, transport


def max_divergence(u_hat, grid):
    return float(np.max(np.abs(grid.ifft(sum(m * ui for m, ui in zip(grid.ddx, u_hat))))))


def energy_above_cutoff(u_hat, model):
    return kinetic_energy(u_hat * ~model.mask, model.grid)


def step_count(T, dt):
    if T <= 0:
        return 0
    n = T / dt
    return max(1, int(round(n))) if abs(n - round(n)) < 1e-9 * max(1.0, n) else int(math.ceil(n))


@dataclass
class History:
    """Trajectory of a run: recorded states and per-step energy bookkeeping.

    ``step_t``, ``step_energy`` and ``step_visc`` have one entry per state;
    ``step_ac`` has one entry per step (the rate returned by :func:`step`).
    """

    model: Model
    dt: float = 0.0
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    step_t: list = field(default_factory=list)
    step_energy: list = field(default_factory=list)
    step_visc: list = field(default_factory=list)
    step_ac: list = field(default_factory=list)
    final: SimState = None
    status: str = "ok"
    error: str = ""

    def dissipation_components(self):
        """Accumulated viscous and ``kappa1 kappa2``-weighted Allen-Cahn dissipation.

        The viscous rate is integrated with the trapezoid rule, the
        Allen-Cahn rate step by step (it belongs to the step, not a state).
        """
        ph = self.model.phys
        t = np.asarray(self.step_t)
        visc = np.asarray(self.step_visc)
        ac = np.asarray(self.step_ac)
        dt = np.diff(t)
        acc_visc = np.concatenate([[0.0], np.cumsum(0.5 * (visc[1:] + visc[:-1]) * dt)])
        acc_ac = np.concatenate([[0.0], np.cumsum(ac[:len(dt)] * dt)])
        return acc_visc, ph.kappa1 * ph.kappa2 * acc_ac

    def accumulated_dissipation(self):
        visc, ac = self.dissipation_components()
        return visc + ac


def integrate(model, state, T, stp=StepParams(), record_interval=1, on_record=None,
              keep_states=True, track_energy=True):
    """Advance ``state`` to time ``T``; records every ``record_interval`` steps.

    ``on_record(history, state, index)`` is called for the initial state and
    every recorded one.  Blow-ups end the run with ``status = "blowup"``.
    ``track_energy=False`` skips the per-step energy bookkeeping.
    """
    hist = History(model)

    def log_energy(s):
        if not track_energy:
            return
        terms = energy_terms(s, model)
        hist.step_t.append(s.t)
        hist.step_energy.append(terms["total"])
        hist.step_visc.append(terms["visc"])

    def record(s, index):
        if keep_states:
            hist.states.append(s)
        if on_record is not None:
            on_record(hist, s, index)

    log_energy(state)
    record(state, 0)
    hist.final = state
    if T <= state.t:
        return hist
    t0 = state.t
    if stp.dt_policy == "fixed":
        dt = stp.dt if stp.dt > 0 else stable_dt(state, model, stp.safety)
        nsteps = step_count(T - t0, dt)
    elif stp.dt_policy == "auto":
        dt, nsteps = None, None
    else:
        raise UsageError(f"unknown dt policy {stp.dt_policy!r}")
    hist.dt = dt or 0.0
    n = 0
    try:
        while True:
            if dt is not None:
                if n >= nsteps:
                    break
                t_next = T if n + 1 == nsteps else t0 + (n + 1) * dt
            else:
                if state.t >= T * (1 - 1e-14):
                    break
                t_next = min(T, state.t + stable_dt(state, model, stp.safety))
            new, ac = step(state, model, t_next - state.t, stp.dealias, return_rate=True)
            new.t = t_next
            state = hist.final = new
            n += 1
            if track_energy:
                hist.step_ac.append(ac)
            log_energy(state)
            if n % record_interval == 0:
                record(state, n)
    except BlowUpError as exc:
        hist.status = "blowup"
        hist.error = str(exc)
        log.error("run stopped at t=%.6g: %s", state.t, exc)
        if exc.state is None:
            exc.state = state
    return hist
