# Block diagonalisation and the momentum-space gauge field
#
# A Dirac electron in a magnetic field has a 4x4 Hamiltonian. The unitary that
# diagonalises the free part also defines a 2x2 Berry connection acting on the
# spin index of the positive-energy band. Here we look at that unitary and at
# the curvature of the connection.

import numpy as np

from semidirac import PhysConstants
from semidirac.fw_verify import (
    berry_connection_closed,
    berry_connection_numeric,
    berry_curvature_closed,
    berry_curvature_matrix,
    diagonalization_residual,
    fw_unitary,
    loglog_slope,
    max_relative_error,
    momentum_grid,
    verify_curvature,
)

np.set_printoptions(precision=4, suppress=True)

# The unitary at a single momentum, in units m = c = e = hbar = 1
p = np.array([0.5, 0.3, 0.0])
U = fw_unitary(p)
print("U is unitary:", np.allclose(U.conj().T @ U, np.eye(4)))

# Connection: closed form against finite differences of the unitary
grid = momentum_grid(50, 5.0)
err = max(max_relative_error(berry_connection_numeric(q), berry_connection_closed(q)) for q in grid)
print("connection, worst relative error over 50 momenta:", err)

# The curvature is non-Abelian: dropping the commutator changes it, more so at large |p|
F = berry_curvature_matrix(p)
F_abelian = berry_curvature_matrix(p, abelian=True)
print("non-Abelian vs closed form:", max_relative_error(F, berry_curvature_closed(p)))
print("Abelian curl vs closed form:", max_relative_error(F_abelian, berry_curvature_closed(p)))

# With a field switched on, the leftover off-diagonal block shrinks as hbar^2
hbars = np.array([1e-1, 1e-2, 1e-3, 1e-4])
off = [diagonalization_residual(p, (0, 0, 0.1), PhysConstants(hbar=h)).offdiag_norm for h in hbars]
print("off-diagonal norms:", " ".join(f"{x:.2e}" for x in off))
print("log-log slope:", loglog_slope(hbars, off))

# The same checks as the CLI runs them
for c in verify_curvature(n=20):
    print(f"{c.name:32s} {c.value:10.3e} {c.relation} {c.threshold:g}  {'PASS' if c.passed else 'FAIL'}")
