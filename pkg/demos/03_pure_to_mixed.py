#!/usr/bin/env python3
"""Non-unitary evolution: a pure state becomes a mixture, entropy drifts down.

Between measurements each component's energy carries an imaginary part
i*hbar*R/2, so the evolution operator is normal but not unitary: norms
grow like exp(R*t).  At the measurement the coherences vanish, leaving a
diagonal mixture whose purity is the sum of fourth powers of the
amplitudes, and the entropy (negative while unmeasured) snaps back to 0.
"""

import numpy as np

from pdwave.core import make_free_state
from pdwave.spectral import apply_observable
from pdwave import evolution as ev

weights = (0.5, 0.3, 0.2)
waves = tuple(make_free_state(v, v) for v in (1.0, 2.0, 3.0))
state = ev.SuperposedState(np.sqrt(weights).astype(complex), waves)

# Complex energies: real part hbar*omega, imaginary part hbar*R/2.
for i, w in enumerate(waves):
    print(f"component {i}: H eigenvalue = {apply_observable('H', w).value}")

# Norm growth under evolution: a single component grows exactly as e^{Rt}.
single = ev.SuperposedState(np.array([1.0 + 0j]), (waves[0],))
for t in (0.0, 1.0, 2.0):
    print(f"t = {t}: <psi|psi> = {ev.evolve_state(single, t).norm_sq:.6f}"
          f"  (exp(R t) = {np.exp(waves[0].R * t):.6f})")

# Measurement decoheres the superposition to the diagonal mixture.
rho = ev.reduce_to_mixture(state)
print("\nmixture diagonal:", np.diag(rho.entries).real)
print("purity trace(rho^2):", ev.purity(rho), " (pure would be 1)")
print("sum of |a|^4:", sum(w**2 for w in weights))

# The mixture evolves entrywise and the evolution composes as a semigroup.
eigs = [apply_observable("H", w).value for w in waves]
step = ev.evolve_density(ev.evolve_density(rho, eigs, 0.4), eigs, 0.6)
whole = ev.evolve_density(rho, eigs, 1.0)
print("semigroup defect:", np.max(np.abs(step.entries - whole.entries)))

# Density matrices serialize to JSON as row-major [re, im] pairs.
print("\nJSON round trip ok:",
      np.array_equal(ev.DensityMatrix.from_json(rho.to_json()).entries, rho.entries))

# Entropy of an unmeasured normalized state falls linearly at rate kB*v;
# a measurement resets it to zero.
traj = ev.entropy_trajectory(single, np.linspace(0, 2, 5), measurement_times=[2.0])
for t, s in zip(traj.times, traj.S):
    print(f"S({t:.1f}) = {s:+.3f}")
print("after measurement at t=2: S =", traj.post_measurement_S[0])
