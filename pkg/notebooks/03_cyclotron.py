# Cyclotron orbits and spin-dependent frequency shifts
#
# In a uniform magnetic field the orbital frequency is eH/E at hbar = 0. With
# hbar > 0 the spin adds a small correction whose size we measure from the
# zero crossings of the velocity.

import numpy as np

from semidirac import FieldConfig, ParticleState, PhysConstants, energy, integrate
from semidirac.analyses import cyclotron_shift, orbital_frequency

H = 0.01
cfg = FieldConfig.uniform(H0=(0, 0, H))
p0 = np.array([0.1, 0, 0])
T = 8.6 * 2 * np.pi * energy(p0) / H


def run(model, mu, hbar):
    s = ParticleState(0.0, np.zeros(3), p0, np.array([0, 0, mu]))
    return integrate(s, cfg, model, PhysConstants(hbar=hbar), T=T, output_every=5.0)


print("classical frequency eH/E:", H / energy(p0))
print("measured at hbar = 0:    ", orbital_frequency(run("berry", 1.0, 0.0)))

for mu in (1.0, -1.0):
    rep = cyclotron_shift(run("berry", mu, 0.01), run("pauli", mu, 0.01))
    d = rep.details
    print(f"mu = {mu:+.0f}: omega = {rep.measured:.8f}, spin term covariant {d['spin_term_full']:+.3e}, "
          f"Pauli {d['spin_term_pauli']:+.3e}")
