"""Compare Carreau stress laws and check their admissibility.

Each phase has stress (a + b|s|^2)^((p-2)/2) s.  The sampler checks
monotonicity, coercivity and growth on random symmetric matrices; flipping
the sign of b breaks monotonicity and is reported.
"""
import numpy as np

from torusflow import StressLaw, tau_phase, validate_stress_law

s = np.array([[0.0, 1.0], [1.0, 0.0]])
for p in (2.5, 3.0, 4.0):
    law = StressLaw(p=p, a_plus=1.0, b_plus=1.0, a_minus=0.5, b_minus=2.0)
    plus = tau_phase(s, law, +1)[0, 1]
    minus = tau_phase(s, law, -1)[0, 1]
    print(f"p={p}: shear stress at |s|^2 = 2: phase + {plus:.4f}, phase - {minus:.4f}")

for law in (StressLaw(), StressLaw(b_plus=-1.0)):
    report = validate_stress_law(law, samples=2000)
    print(f"b_plus={law.b_plus:+.0f}: monotone {report.monotone_ok} "
          f"(min {report.monotone_min:.2e}), growth {report.growth_ok}, "
          f"coercivity min {report.coercivity_min:.3f}")
