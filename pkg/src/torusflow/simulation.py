"""Build a model from a :class:`SimConfig`, run it and collect records."""
import datetime
import math
import os
from dataclasses import dataclass

import numpy as np

from . import diagnostics, io, phase_init, spectral, stepper
from .diagnostics import EnergyRecord


def build_model(cfg, capillary_sign=1.0):
    grid = cfg.grid_spec()
    basis = spectral.build_mode_basis(grid, cfg.grid.K)
    ph = cfg.physics
    phys = stepper.PhysicsParams(eps=ph.epsilon, gamma=ph.gamma, kappa1=ph.kappa1,
                                 kappa2=ph.kappa2, law=cfg.stress_law(),
                                 mollifier=ph.mollifier, capillary_sign=capillary_sign)
    return stepper.Model(grid, basis, phys)


def initial_state(cfg, model):
    scn = cfg.scenario_obj()
    phi = phase_init.initial_phase(scn, cfg.profile(), model.grid)
    u = phase_init.initial_velocity(scn, model.basis, model.grid)
    return model.state_from_fields(phi, u)


def step_params(cfg):
    st = cfg.stepping
    return stepper.StepParams(st.dt, st.dt_policy, st.safety, st.dealias)


class Recorder:
    """Turns recorded states into :class:`EnergyRecord` rows."""

    def __init__(self, cfg, model):
        dg = cfg.diagnostics
        self.model = model
        self.radii = list(dg.radii) or None
        self.stride = dg.center_stride
        center = dg.bump_center or None
        self.test = diagnostics.brakke_test_function(model.grid, dg.brakke_test, center, dg.bump_width)
        self.brakke = []  # (lhs, rhs) per record

    def __call__(self, hist, state, index):
        m = self.model
        g, ph = m.grid, m.phys
        terms = stepper.energy_terms(state, m)
        visc, ac = hist.dissipation_components()
        u = g.ifft(state.u_hat)
        length = float("nan")
        if g.d == 2:
            length = diagnostics.extract_interface(state.phi, g).length
        mass = diagnostics.surface_measure(state.phi, ph.eps, g, self.test)
        B = diagnostics.brakke_functional(state.phi, u, ph.eps, self.test, ph.kappa2, m.kern, g)
        rec = EnergyRecord(
            t=state.t, kinetic=terms["kinetic"], surface=terms["surface"],
            dissipation_visc=float(visc[-1]), dissipation_ac=float(ac[-1]),
            total=terms["total"],
            discrepancy_max=float(np.max(np.abs(diagnostics.discrepancy_field(state.phi, ph.eps, g)))),
            density_ratio=diagnostics.density_ratio(state.phi, ph.eps, g, self.radii, self.stride),
            phi_range=(float(state.phi.min()), float(state.phi.max())),
            interface_length=length, brakke_mass=mass, brakke_B=B,
            max_div=stepper.max_divergence(state.u_hat, g),
            energy_above_cutoff=stepper.energy_above_cutoff(state.u_hat, m))
        if hist.records:
            prev = hist.records[-1]
            lhs = rec.brakke_mass - prev.brakke_mass
            rhs = 0.5 * (rec.brakke_B + prev.brakke_B) * (rec.t - prev.t)
            if math.isnan(rhs):
                rhs = -math.inf
        else:
            lhs, rhs = 0.0, 0.0
        self.brakke.append((lhs, rhs))
        hist.records.append(rec)


def run(cfg, capillary_sign=1.0, keep_states=True, on_record=None):
    """Run ``cfg`` to ``stepping.T``; returns the :class:`stepper.History`.

    ``history.brakke`` holds ``(lhs, rhs)`` per record for the configured
    test function.
    """
    model = build_model(cfg, capillary_sign)
    state = initial_state(cfg, model)
    rec = Recorder(cfg, model)

    def hook(hist, s, index):
        rec(hist, s, index)
        if on_record is not None:
            on_record(hist, s, index)

    hist = stepper.integrate(model, state, cfg.stepping.T, step_params(cfg),
                             cfg.diagnostics.record_interval, hook, keep_states)
    hist.brakke = rec.brakke
    hist.config = cfg
    return hist


def run_simulation(cfg, directory=None, capillary_sign=1.0):
    """Run ``cfg`` and write the CSV, snapshots and manifest.

    Returns ``(exit_code, history)``: 0 on success, 3 on blow-up (partial
    outputs are kept and the failing state is dumped to ``blowup.bin``).
    """
    from . import __version__
    from .config import config_to_text

    directory = directory or cfg.output.directory
    os.makedirs(directory, exist_ok=True)
    formats = {f.strip() for f in cfg.output.formats.split(",")}
    every = cfg.output.snapshot_interval
    files = []
    started = _now()

    def snapshot(hist, state, index):
        if "bin" not in formats or every == 0 or (len(hist.records) - 1) % every:
            return
        name = f"snap_{index:06d}.bin"
        io.write_snapshot(os.path.join(directory, name), state.phi,
                          state.velocity(hist.model.grid), state.t, cfg.physics.epsilon)
        files.append(name)

    hist = run(cfg, capillary_sign, keep_states=False, on_record=snapshot)
    if "csv" in formats:
        io.write_timeseries(os.path.join(directory, "run.csv"), hist.records, hist.brakke)
        files.append("run.csv")
    code = 0
    if hist.status == "blowup":
        code = 3
        if hist.final is not None:
            io.write_snapshot(os.path.join(directory, "blowup.bin"), hist.final.phi,
                              hist.final.velocity(hist.model.grid), hist.final.t,
                              cfg.physics.epsilon)
            files.append("blowup.bin")
    io.write_manifest(directory, config_to_text(cfg), __version__, started, _now(),
                      hist.status, files, hist.error)
    return code, hist


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


@dataclass
class SweepRow:
    eps: float
    surface_error: float
    radius_error: float
    status: str


def sweep_epsilon(cfg, eps_list, directory=None):
    """Run ``cfg`` once per interface width.

    Every width is validated before anything runs.  Each row holds the
    relative error of the initial surface energy against the scenario
    perimeter and, for a single circle, of the final zero-contour radius
    against the curvature-flow radius.
    """
    configs = [cfg.replace(**{"physics.epsilon": float(e)}) for e in eps_list]
    rows = []
    for sub in configs:
        out = None
        if directory is not None:
            out = os.path.join(directory, f"eps_{sub.physics.epsilon:g}")
        if out is None:
            hist = run(sub, keep_states=False)
        else:
            _, hist = run_simulation(sub, out)
        scn = sub.scenario_obj()
        surface_error = abs(hist.records[0].surface / scn.perimeter() - 1.0)
        radius_error = float("nan")
        if scn.kind == "circle" and sub.grid.d == 2 and hist.final is not None:
            r = diagnostics.extract_interface(hist.final.phi, hist.model.grid).equivalent_radius()
            oracle = diagnostics.mcf_circle_oracle(scn.radius, sub.physics.kappa2, hist.final.t)
            radius_error = abs(r / oracle - 1.0) if oracle > 0 else float("nan")
        rows.append(SweepRow(sub.physics.epsilon, surface_error, radius_error, hist.status))
    return rows


def format_sweep(rows):
    lines = ["eps,surface_error,radius_error,status"]
    lines += [f"{r.eps!r},{r.surface_error!r},{r.radius_error!r},{r.status}" for r in rows]
    return "\n".join(lines) + "\n"
