# Conserved quantities
#
# |S| is kept by construction. The energy E_p + Delta E + e Phi is conserved in
# static fields up to terms of higher order in hbar. How high depends on the
# geometry: in a plane orbit the error is O(hbar^2), in a generic 3D orbit the
# spin-exchange term makes it O(hbar).

import numpy as np

from semidirac import FieldConfig, ParticleState, PhysConstants, integrate


def drift(cfg, s, hbar):
    tr = integrate(s, cfg, "berry", PhysConstants(hbar=hbar), T=100.0)
    return np.max(np.abs(tr.energy - tr.energy[0])) / abs(tr.energy[0]), np.max(np.abs(np.linalg.norm(tr.S, axis=1) - 1))


r0, S0 = np.array([2.0, 0, 0]), np.array([0.6, 0, 0.8])
cases = {
    "electric only": (FieldConfig.coulomb(Z=-0.5, softening=0.05), np.array([0, 0.4, 0.1])),
    "planar":        (FieldConfig.coulomb(Z=-0.5, softening=0.05, H0=(0, 0, 0.05)), np.array([0, 0.4, 0.0])),
    "generic":       (FieldConfig.coulomb(Z=-0.5, softening=0.05, H0=(0, 0.02, 0.05)), np.array([0, 0.4, 0.1])),
}
for name, (cfg, p0) in cases.items():
    s = ParticleState(0.0, r0, p0, S0)
    for hbar in (0.1, 0.01):
        dE, dS = drift(cfg, s, hbar)
        print(f"{name:14s} hbar={hbar:<5g} energy drift {dE:.2e}   |S| drift {dS:.1e}")
