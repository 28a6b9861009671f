"""Track the energy budget of a droplet in a decaying shear flow.

The total energy is kinetic plus kappa1 times the diffuse surface energy.
It should never rise from one step to the next, and the energy at time T
plus the dissipation accumulated so far should not exceed the initial
energy.
"""
import numpy as np

from torusflow import parse_config, run

cfg = parse_config("""
grid.N = 128
physics.epsilon = 0.04
scenario.u0_amplitude = 0.5
stepping.dt_policy = auto
stepping.T = 0.01
diagnostics.record_interval = 10
""")

hist = run(cfg)
E = np.asarray(hist.step_energy)
D = hist.accumulated_dissipation()
print(f"steps taken             {len(E) - 1}")
print(f"initial energy          {E[0]:.6f}")
print(f"final energy            {E[-1]:.6f}")
print(f"accumulated dissipation {D[-1]:.6f}")
print(f"(E(T) + D(T)) / E(0)    {(E[-1] + D[-1]) / E[0]:.5f}")
print(f"largest step increase   {np.max(np.diff(E)) / E[0]:.2e} E(0)")
for rec in hist.records[::10]:
    print(f"t={rec.t:.4f} kinetic={rec.kinetic:.5f} surface={rec.surface:.5f} "
          f"max|div u|={rec.max_div:.1e}")
