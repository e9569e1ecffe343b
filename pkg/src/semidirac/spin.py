"""
Polarisation dynamics: the classical spin vector and the two-component spinor.

The classical spin obeys ``dS/dt = Omega x S`` with the BMT-type precession
vector returned by :func:`precession_vector`.

The spinor is driven by the SU(2) generator ``G = -dE + hbar A.pdot`` built
from the spin-dependent energy and the Berry connection, and evolves as
``dchi/dt = (i/hbar) G chi``.  :func:`spinor_rate_matrix` returns ``G/hbar``
in an hbar-free form so the spinor equation stays well defined at
``hbar = 0``.

Note that the spinor generator drives ``S = <chi|sigma|chi>`` at exactly
twice the rate of :func:`precession_vector`; see
:func:`spinor_precession_vector`.
"""

import numpy as np
from scipy.linalg import expm

from .constants import DEFAULT, energy
from .errors import PreconditionError
from .fw_verify import LEVI_CIVITA, SIGMA, berry_connection_closed, sigma_dot


def precession_vector(p, f, k=DEFAULT):
    """``Omega = -[(ec/2E) H + (ec^2 / (2E(E+mc^2))) E x p]``.

    Parameters
    ----------
    p : array_like
        Kinetic momentum.
    f : FieldSample
        Local ``(E, H)``.
    """
    p = np.asarray(p, dtype=float)
    Ep = energy(p, k)
    E, H = f
    return -(
        (k.e * k.c / (2 * Ep)) * np.asarray(H, dtype=float)
        + (k.e * k.c**2 / (2 * Ep * (Ep + k.rest_energy))) * np.cross(E, p)
    )


def step_spin(S, omega, dt):
    """Rotate ``S`` about ``omega`` by angle ``|omega| dt`` (exact for constant omega)."""
    S = np.asarray(S, dtype=float)
    omega = np.asarray(omega, dtype=float)
    w = np.linalg.norm(omega)
    if w == 0.0:
        return S.copy()
    n = omega / w
    nxS = np.cross(n, S)
    if not np.any(nxS):
        return S.copy()
    th = w * dt
    return S * np.cos(th) + nxS * np.sin(th) + n * (n @ S) * (1 - np.cos(th))


def spin_from_spinor(chi, tol=1e-6):
    """``S_k = <chi|sigma_k|chi>`` for a normalised 2-spinor."""
    chi = np.asarray(chi, dtype=complex).reshape(2)
    norm = np.vdot(chi, chi).real
    if abs(norm - 1) > tol:
        raise PreconditionError(f"spinor not normalised (|chi|^2 = {norm:.6g})")
    return np.einsum("a,kab,b->k", chi.conj(), SIGMA, chi).real


def spinor_from_spin(S):
    """A spinor whose Bloch vector is the unit vector along ``S`` (phase fixed by chi_1 >= 0)."""
    S = np.asarray(S, dtype=float)
    n = np.linalg.norm(S)
    if not n > 0:
        raise PreconditionError("spin not normalizable")
    x, y, z = S / n
    theta = np.arctan2(np.hypot(x, y), z)
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def delta_E_matrix(p, f, k=DEFAULT):
    """Spin-dependent energy ``-(e hbar c/2E) sigma.H - (ec/E) L.H`` as a 2x2 matrix.

    ``L = hbar p x A`` is the intrinsic angular momentum built from the Berry
    connection ``A``.
    """
    p = np.asarray(p, dtype=float)
    Ep = energy(p, k)
    H = np.asarray(f[1], dtype=float)
    A = berry_connection_closed(p, k)
    L = k.hbar * np.einsum("ijk,j,kab->iab", LEVI_CIVITA, p, A)
    return -(k.e * k.hbar * k.c / (2 * Ep)) * sigma_dot(H) - (k.e * k.c / Ep) * np.tensordot(H, L, axes=1)


def lorentz_pdot(p, f, k=DEFAULT):
    """Zeroth-order force ``e E + (ec/E_p) p x H``."""
    p = np.asarray(p, dtype=float)
    E, H = f
    return k.e * np.asarray(E, dtype=float) + (k.e * k.c / energy(p, k)) * np.cross(p, H)


def spinor_generator(p, pdot, f, k=DEFAULT):
    """Hermitian SU(2) generator ``G = -dE + hbar A.pdot``.

    ``pdot`` should be the zeroth-order (Lorentz) rate of change of momentum;
    corrections to it only enter at order hbar^2.
    """
    A = berry_connection_closed(p, k)
    return -delta_E_matrix(p, f, k) + k.hbar * np.tensordot(np.asarray(pdot, dtype=float), A, axes=1)


def spinor_rate_matrix(p, pdot, f, k=DEFAULT):
    """``G / hbar`` evaluated without dividing by hbar."""
    p = np.asarray(p, dtype=float)
    Ep = energy(p, k)
    H = np.asarray(f[1], dtype=float)
    A = berry_connection_closed(p, k)
    L_over_hbar = np.einsum("ijk,j,kab->iab", LEVI_CIVITA, p, A)
    return (
        (k.e * k.c / (2 * Ep)) * sigma_dot(H)
        + (k.e * k.c / Ep) * np.tensordot(H, L_over_hbar, axes=1)
        + np.tensordot(np.asarray(pdot, dtype=float), A, axes=1)
    )


def spinor_precession_vector(p, pdot, f, k=DEFAULT):
    """Precession vector of ``<chi|sigma|chi>`` implied by the spinor equation.

    For ``dchi/dt = i K chi`` with ``K = k0 + kvec.sigma`` the Bloch vector
    rotates with ``Omega = -2 kvec``.
    """
    K = spinor_rate_matrix(p, pdot, f, k)
    kvec = 0.5 * np.einsum("kab,ba->k", SIGMA, K).real
    return -2.0 * kvec


def spinor_rhs(chi, K):
    return 1j * (K @ chi)


def path_ordered_step(chi, K, dt):
    """Advance by ``exp(i K dt)``, one factor of the time-ordered product."""
    return expm(1j * K * dt) @ chi
