# Spin Hall drift in a weak electric field
#
# A slow electron with spin along z, pushed by an electric field along x,
# drifts sideways along y. The drift comes from the anomalous velocity
# hbar * pdot x F. We compare the covariant equations with the Pauli model,
# which produces half the effect.

import numpy as np

from semidirac import FieldConfig, ParticleState, PhysConstants, integrate
from semidirac.analyses import spin_hall_drift

cfg = FieldConfig.uniform(E0=(1e-4, 0, 0))
k = PhysConstants(hbar=1.0)
s0 = ParticleState(0.0, np.zeros(3), np.array([0.1, 0, 0]), np.array([0, 0, 1.0]))

full = integrate(s0, cfg, "berry", k, T=20.0, output_every=0.1)
pauli = integrate(s0, cfg, "pauli", k, T=20.0, output_every=0.1)

print("final y, covariant:", full.r[-1, 1])
print("final y, Pauli:    ", pauli.r[-1, 1])

rep = spin_hall_drift(full, pauli)
print(f"drift velocity {rep.measured:.4e}, expected {rep.predicted:.4e}, rel error {rep.rel_error:.3f}")
print(f"covariant / Pauli = {rep.details['model_ratio']:.3f}")

# Flipping the spin flips the drift
flipped = integrate(ParticleState(0.0, np.zeros(3), s0.p, -s0.S), cfg, "berry", k, T=20.0, output_every=0.1)
print("final y with spin down:", flipped.r[-1, 1])
