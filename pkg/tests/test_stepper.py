import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusflow import spectral, stepper
from torusflow.constitutive import SIGMA, StressLaw
from torusflow.errors import BlowUpError, UsageError
from torusflow.phase_init import ProfileParams, Scenario, initial_phase, initial_velocity
from torusflow.stepper import PhysicsParams, StepParams

G64 = spectral.GridSpec(2, 64)
G128 = spectral.GridSpec(2, 128)


def make_model(grid=G64, K=16, **kw):
    kw.setdefault("eps", 0.08 if grid.N == 64 else 0.04)
    return stepper.Model(grid, spectral.build_mode_basis(grid, K), PhysicsParams(**kw))


def make_state(model, scn):
    phi = initial_phase(scn, ProfileParams(model.phys.eps), model.grid)
    return model.state_from_fields(phi, initial_velocity(scn, model.basis, model.grid))


def test_model_rejects_thin_interface():
    with pytest.raises(UsageError):
        make_model(eps=0.02)


def test_capillary_tensor_examples():
    m = make_model(mollifier="none")
    C = stepper.capillary_tensor(np.ones(G64.shape), m)
    assert all(np.all(c == 0) for c in C.values())
    x, y = G64.mesh()
    phi = 0.5 * np.sin(2 * np.pi * x)
    C = stepper.capillary_tensor(phi, m)
    expect = m.phys.eps / SIGMA * (np.pi * np.cos(2 * np.pi * x)) ** 2
    assert np.allclose(C[0, 0], expect, atol=1e-10)
    assert np.allclose(C[0, 1], 0, atol=1e-10) and np.allclose(C[1, 1], 0, atol=1e-10)


def test_stripe_capillary_force_is_a_gradient():
    # grad phi depends on y only, so the force projects to zero
    m = make_model(mollifier="none")
    s = make_state(m, Scenario(kind="stripe", u0="zero"))
    rhs = stepper.momentum_rhs(s.u_hat, s.phi, m, stepper._capillary_hat(s.phi, m))
    assert np.max(np.abs(G64.ifft(rhs))) < 1e-10


def test_newtonian_shear_decay():
    m = make_model(kappa1=0.0, law=StressLaw(p=2.0))
    x, y = G64.mesh()
    u = np.stack([0.1 * np.sin(2 * np.pi * y), np.zeros(G64.shape)])
    s = m.state_from_fields(np.ones(G64.shape), u)
    rhs = G64.ifft(stepper.momentum_rhs(s.u_hat, s.phi, m))
    # nu = 1 and tau = nu e gives du/dt = (1/2) lap u
    assert np.allclose(rhs[0], -2 * np.pi ** 2 * u[0], atol=1e-10)
    assert np.allclose(rhs[1], 0, atol=1e-12)


def test_ac_step_equilibria():
    m = make_model()
    zero = np.zeros((2,) + G64.spec_shape, dtype=complex)
    for c in (1.0, -1.0, 0.0):
        phi = np.full(G64.shape, c)
        assert np.array_equal(stepper.ac_step(phi, zero, m, 1e-4), phi)
    with pytest.raises(BlowUpError):
        stepper.ac_step(np.full(G64.shape, 3.0), zero, m, 1e-2)


def test_ac_step_pure_advection_translates():
    m = make_model(kappa2=0.0, mollifier="none")
    x, y = G64.mesh()
    phi = 0.5 * np.sin(2 * np.pi * x)
    u = np.stack([np.full(G64.shape, 1.0), np.zeros(G64.shape)])
    u_hat = np.stack([G64.fft(c) for c in u])
    dt = 1e-4
    new = stepper.ac_step(phi, u_hat, m, dt)
    assert np.allclose(new, phi - dt * np.pi * np.cos(2 * np.pi * x), atol=1e-12)


def test_stable_dt_examples():
    m = make_model(kappa1=0.0)
    s = m.state_from_fields(np.ones(G64.shape), np.zeros((2,) + G64.shape))
    dt, parts = stepper.stable_dt(s, m, 1.0, detail=True)
    assert parts["reaction"] == pytest.approx(0.08 ** 2 / 4)
    assert parts["viscous"] == pytest.approx(1 / (math.pi ** 2 * 16 ** 2))
    assert parts["advection"] == pytest.approx(G64.h / 1e-12)
    assert dt == min(parts.values())
    assert stepper.stable_dt(s, m, 0.5) == pytest.approx(0.5 * dt)
    u = np.stack([np.full(G64.shape, 2.0), np.zeros(G64.shape)])
    s = m.state_from_fields(np.ones(G64.shape), u)
    _, parts = stepper.stable_dt(s, m, 1.0, detail=True)
    assert parts["advection"] == pytest.approx(G64.h / 4, rel=1e-9)
    s.u_hat = s.u_hat * 1e13
    with pytest.raises(BlowUpError):
        stepper.stable_dt(s, m)


def test_step_rejects_bad_dt():
    m = make_model()
    s = make_state(m, Scenario())
    with pytest.raises(UsageError):
        stepper.step(s, m, 0.0)


def test_pure_phase_at_rest_is_fixed_point():
    m = make_model()
    s = m.state_from_fields(np.ones(G64.shape), np.zeros((2,) + G64.shape))
    new = stepper.step(s, m, 1e-4)
    assert np.array_equal(new.phi, s.phi) and np.array_equal(new.u_hat, s.u_hat)
    assert new.t == 1e-4


def test_zero_horizon_history():
    m = make_model()
    s = make_state(m, Scenario())
    hist = stepper.integrate(m, s, 0.0)
    assert hist.status == "ok" and len(hist.states) == 1 and hist.final is s
    assert hist.accumulated_dissipation()[-1] == 0.0


def test_step_count():
    assert stepper.step_count(0, 0.1) == 0
    assert stepper.step_count(1.0, 0.1) == 10
    assert stepper.step_count(1.05, 0.1) == 11
    assert stepper.step_count(1e-5, 0.1) == 1


def test_fixed_policy_lands_on_horizon():
    m = make_model()
    s = make_state(m, Scenario())
    hist = stepper.integrate(m, s, 0.0025, StepParams(dt=1e-3), record_interval=1)
    assert [st.t for st in hist.states] == pytest.approx([0, 1e-3, 2e-3, 2.5e-3])
    assert hist.final.t == 0.0025
    assert len(hist.step_ac) == 3 and len(hist.step_energy) == 4
    with pytest.raises(UsageError):
        stepper.integrate(m, s, 0.01, StepParams(dt_policy="adaptive"))


def test_blowup_is_reported():
    m = make_model()
    s = make_state(m, Scenario())
    hist = stepper.integrate(m, s, 0.5, StepParams(dt=0.05), record_interval=1)
    assert hist.status == "blowup" and "phi" in hist.error
    assert np.all(np.isfinite(hist.final.phi))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_steps_keep_velocity_solenoidal_and_truncated(seed):
    m = make_model()
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((2,) + G64.shape) * 0.2
    phi = initial_phase(Scenario(radius=0.2), ProfileParams(0.08), G64)
    s = m.state_from_fields(phi, u)
    for _ in range(3):
        s = stepper.step(s, m, stepper.stable_dt(s, m))
    assert stepper.max_divergence(s.u_hat, G64) < 1e-10
    assert stepper.energy_above_cutoff(s.u_hat, m) == 0.0


def test_kinetic_energy_parseval():
    m = make_model()
    rng = np.random.default_rng(3)
    u = rng.standard_normal((2,) + G64.shape)
    s = m.state_from_fields(np.ones(G64.shape), u)
    direct = 0.5 * G64.integrate(np.sum(s.velocity(G64) ** 2, axis=0))
    assert stepper.kinetic_energy(s.u_hat, G64) == pytest.approx(direct, rel=1e-12)


def test_capillary_work_matches_transport():
    m = make_model(G128, K=16, eps=0.04)
    x, y = G128.mesh()
    u = np.random.default_rng(7).standard_normal((2,) + G128.shape)
    # band-limited phase: the discrete product rule is exact
    phi = 0.6 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y) + 0.3 * np.cos(2 * np.pi * (x + 3 * y))
    work, transport = stepper.capillary_work(m.state_from_fields(phi, u), m)
    assert abs(work) > 1e-3
    assert work == pytest.approx(transport, rel=1e-12)
    # a profile with corners aliases in grad phi x grad phi
    scn = Scenario(kind="polyline", vertices=((0.3, 0.3), (0.7, 0.3), (0.7, 0.7), (0.3, 0.7)))
    phi = initial_phase(scn, ProfileParams(0.04), G128)
    work, transport = stepper.capillary_work(m.state_from_fields(phi, u), m)
    assert work == pytest.approx(transport, rel=1e-2)
    assert stepper.capillary_work(m.state_from_fields(phi, u),
                                  make_model(G128, K=16, eps=0.04, kappa1=0.0)) == (0.0, 0.0)


def test_energy_does_not_rise_over_a_short_run():
    m = make_model()
    s = make_state(m, Scenario())
    hist = stepper.integrate(m, s, 0.01, StepParams(dt_policy="auto"), record_interval=10)
    E = np.array(hist.step_energy)
    assert hist.status == "ok"
    assert np.max(np.diff(E)) <= 1e-6 * E[0]
    D = hist.accumulated_dissipation()
    assert np.all(np.diff(D) >= 0)


def test_runs_are_deterministic():
    m = make_model()
    a = stepper.integrate(m, make_state(m, Scenario()), 0.004, record_interval=5)
    b = stepper.integrate(m, make_state(m, Scenario()), 0.004, record_interval=5)
    assert np.array_equal(a.final.phi, b.final.phi)
    assert np.array_equal(a.final.u_hat, b.final.u_hat)
