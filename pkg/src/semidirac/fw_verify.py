"""
Dirac algebra, the modified Foldy-Wouthuysen unitary and Berry gauge fields.

Everything here works on dense complex matrices in the standard
Dirac-Pauli representation::

    beta = diag(1, 1, -1, -1),   alpha_i = [[0, s_i], [s_i, 0]],
    Sigma_i = [[s_i, 0], [0, s_i]]

Matrix-valued vectors (the connection, the curvature) are stored as arrays of
shape ``(3, 2, 2)`` with the Cartesian index first.

The module also carries the finite-difference oracles used to check the
closed-form connection and curvature, and two report builders consumed by the
``verify-fw`` and ``verify-curvature`` CLI subcommands.
"""

from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT, energy
from .errors import NumericalError, PreconditionError

SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

_EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_i, _j, _k] = 1.0
    _EPS[_i, _k, _j] = -1.0
LEVI_CIVITA = _EPS


def pauli_matrices():
    """Return the Pauli matrices as an array of shape (3, 2, 2)."""
    return SIGMA.copy()


def dirac_matrices():
    """Dirac matrices alpha_i, beta and spin matrices Sigma_i.

    Returns
    -------
    dict
        Keys ``alpha_x, alpha_y, alpha_z, beta, Sigma_x, Sigma_y, Sigma_z``,
        each a 4x4 complex array.
    """
    z = np.zeros((2, 2), dtype=complex)
    out = {"beta": np.block([[I2, z], [z, -I2]])}
    for name, s in zip("xyz", SIGMA):
        out[f"alpha_{name}"] = np.block([[z, s], [s, z]])
        out[f"Sigma_{name}"] = np.block([[s, z], [z, s]])
    return out


_DM = dirac_matrices()
BETA = _DM["beta"]
ALPHA = np.array([_DM["alpha_x"], _DM["alpha_y"], _DM["alpha_z"]])
BIG_SIGMA = np.array([_DM["Sigma_x"], _DM["Sigma_y"], _DM["Sigma_z"]])


def sigma_dot(v, mats=SIGMA):
    """Contract a real 3-vector with a stack of three matrices."""
    return np.tensordot(np.asarray(v, dtype=float), mats, axes=1)


def hermitian_defect(M):
    """Frobenius norm of ``M - M^dagger`` relative to ``max(1, ||M||)``."""
    M = np.asarray(M)
    return np.linalg.norm(M - M.conj().T) / max(1.0, np.linalg.norm(M))


def _hermitian_function(M, f):
    w, v = np.linalg.eigh(M)
    return (v * f(w)) @ v.conj().T


def dirac_hamiltonian(p, k=DEFAULT):
    """c-number Dirac Hamiltonian ``c alpha.p + beta m c^2``."""
    return k.c * sigma_dot(p, ALPHA) + k.rest_energy * BETA


def modified_energy_matrix(p, H, k=DEFAULT):
    """Hermitian square root of ``m^2c^4 + p^2c^2 - e hbar c Sigma.H``.

    Raises
    ------
    PreconditionError
        If the radicand is not positive definite.
    """
    p = np.asarray(p, dtype=float)
    H = np.asarray(H, dtype=float)
    base = k.rest_energy**2 + (p @ p) * k.c**2
    if abs(k.e) * k.hbar * k.c * np.linalg.norm(H) >= base:
        raise PreconditionError(
            "e*hbar*c*|H| must stay below m^2c^4 + p^2c^2 for the square root"
        )
    radicand = base * I4 - k.e * k.hbar * k.c * sigma_dot(H, BIG_SIGMA)
    return _hermitian_function(radicand, np.sqrt)


def modified_energy_expansion(p, H, k=DEFAULT):
    """First-order expansion ``E_p - (e hbar c / 2E_p) Sigma.H``; differs from the exact root at O(hbar^2)."""
    Ep = energy(p, k)
    return Ep * I4 - (k.e * k.hbar * k.c / (2 * Ep)) * sigma_dot(np.asarray(H, dtype=float), BIG_SIGMA)


def fw_unitary(p, H=(0.0, 0.0, 0.0), k=DEFAULT):
    """Modified Foldy-Wouthuysen unitary for c-number momentum and field.

    The numerator ``Ebar + mc^2 + beta (alpha.p) c`` is normalised by its
    polar factor ``(N^dagger N)^(-1/2)``.  With ``H = 0`` this is exactly the
    free-particle transformation; with a field it differs from the textbook
    scalar denominator only at order hbar and stays unitary to round-off.
    """
    p = np.asarray(p, dtype=float)
    Ebar = modified_energy_matrix(p, H, k)
    N = Ebar + k.rest_energy * I4 + k.c * BETA @ sigma_dot(p, ALPHA)
    return N @ _hermitian_function(N.conj().T @ N, lambda w: w**-0.5)


@dataclass(frozen=True)
class DiagonalizationResidual:
    offdiag_norm: float
    block_energy_error: float
    zeeman_block_error: float


def diagonalization_residual(p, H, k=DEFAULT):
    """How well ``U`` block-diagonalises the Dirac Hamiltonian.

    ``offdiag_norm`` is the Frobenius norm of the two 2x2 off-diagonal blocks
    of ``U H_D U^dagger``.  ``block_energy_error`` compares the identity part
    of the upper-left block with ``E_p`` (the Zeeman correction is traceless
    and contributes nothing there).  ``zeeman_block_error`` is the full
    2x2 deviation from ``E_p - (e hbar c / 2E_p) sigma.H``.
    """
    U = fw_unitary(p, H, k)
    Hp = U @ dirac_hamiltonian(p, k) @ U.conj().T
    off = np.sqrt(np.linalg.norm(Hp[:2, 2:]) ** 2 + np.linalg.norm(Hp[2:, :2]) ** 2)
    upper = Hp[:2, :2]
    Ep = energy(p, k)
    zeeman = -(k.e * k.hbar * k.c / (2 * Ep)) * sigma_dot(H)
    return DiagonalizationResidual(
        offdiag_norm=float(off),
        block_energy_error=float(abs(np.trace(upper).real / 2 - Ep)),
        zeeman_block_error=float(np.linalg.norm(upper - Ep * I2 - zeeman)),
    )


def connection_coefficient(p, k=DEFAULT):
    """``c^2 / (2 E_p (E_p + m c^2))``, the scale of the Berry connection."""
    Ep = energy(p, k)
    return k.c**2 / (2 * Ep * (Ep + k.rest_energy))


def berry_connection_closed(p, k=DEFAULT):
    """Closed-form SU(2) Berry connection ``(p x sigma) c^2 / (2E(E+mc^2))``.

    Returns an array of shape (3, 2, 2).
    """
    p = np.asarray(p, dtype=float)
    kappa = connection_coefficient(p, k)
    # (p x sigma)_i = eps_ijk p_j sigma_k
    return kappa * np.einsum("ijk,j,kab->iab", LEVI_CIVITA, p, SIGMA)


def _connection_fd(p, k, h):
    U0 = fw_unitary(p, (0.0, 0.0, 0.0), k)
    out = np.empty((3, 2, 2), dtype=complex)
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        dU = (fw_unitary(p + d, (0.0, 0.0, 0.0), k) - fw_unitary(p - d, (0.0, 0.0, 0.0), k)) / (2 * h)
        out[i] = (1j * U0 @ dU.conj().T)[:2, :2]
    return out


def berry_connection_numeric(p, k=DEFAULT, step=None, richardson_tol=1e-4):
    """Upper-left block of ``i U dU^dagger`` by central differences.

    Parameters
    ----------
    p : array_like
        Momentum.
    step : float, optional
        Finite-difference step, default ``1e-4 * max(1, |p|)``.
    richardson_tol : float
        The result at ``step`` is compared with the one at ``step/2``; a
        larger discrepancy means the step is too coarse.

    Raises
    ------
    NumericalError
        When the step-halving check fails.
    """
    p = np.asarray(p, dtype=float)
    if step is None:
        step = 1e-4 * max(1.0, float(np.linalg.norm(p)))
    if step <= 0:
        raise PreconditionError("finite-difference step must be positive")
    A = _connection_fd(p, k, step)
    A_half = _connection_fd(p, k, step / 2)
    gap = np.max(np.abs(A - A_half))
    if gap > richardson_tol:
        raise NumericalError(
            f"finite-difference step {step:g} too large: step-halving changes the connection by {gap:.3g}"
        )
    return A


def _connection_jacobian(p, k):
    """Analytic ``d A_i / d p_l`` as an array indexed [l, i, a, b]."""
    p = np.asarray(p, dtype=float)
    Ep = energy(p, k)
    mc2 = k.rest_energy
    kappa = k.c**2 / (2 * Ep * (Ep + mc2))
    dkappa_dE = -(k.c**2) * (2 * Ep + mc2) / (2 * Ep**2 * (Ep + mc2) ** 2)
    grad_kappa = dkappa_dE * p * k.c**2 / Ep
    pxs = np.einsum("ijk,j,kab->iab", LEVI_CIVITA, p, SIGMA)
    return np.einsum("l,iab->liab", grad_kappa, pxs) + kappa * np.einsum(
        "ilk,kab->liab", LEVI_CIVITA, SIGMA
    )


def _connection_jacobian_fd(p, k, h):
    p = np.asarray(p, dtype=float)
    out = np.empty((3, 3, 2, 2), dtype=complex)
    for l in range(3):
        d = np.zeros(3)
        d[l] = h
        out[l] = (berry_connection_closed(p + d, k) - berry_connection_closed(p - d, k)) / (2 * h)
    return out


def berry_curvature_matrix(p, k=DEFAULT, abelian=False, derivative="analytic", step=1e-5):
    """Dual vector of the momentum-space Berry curvature from the connection.

    Computes ``F^{ij} = d_i A_j - d_j A_i - i [A_i, A_j]`` from the closed-form
    connection and returns ``F_k = (1/2) eps_kij F^{ij}``.

    Parameters
    ----------
    abelian : bool
        Drop the commutator. This is the naive curl, kept to show how far it
        is from the correct non-Abelian field strength.
    derivative : {"analytic", "fd"}
        Differentiate the connection analytically or by central differences.
    """
    if derivative == "analytic":
        dA = _connection_jacobian(p, k)
    elif derivative == "fd":
        dA = _connection_jacobian_fd(p, k, step)
    else:
        raise ValueError(f"unknown derivative mode {derivative!r}")
    A = berry_connection_closed(p, k)
    curl = dA - dA.transpose(1, 0, 2, 3)  # [i, j] = d_i A_j - d_j A_i
    if not abelian:
        comm = np.einsum("iab,jbc->ijac", A, A)
        curl = curl - 1j * (comm - comm.transpose(1, 0, 2, 3))
    return 0.5 * np.einsum("kij,ijab->kab", LEVI_CIVITA, curl)


def berry_curvature_closed(p, k=DEFAULT):
    """Closed-form curvature ``-(c^4/2E^3)[m sigma + (sigma.p) p / (E + mc^2)]``."""
    p = np.asarray(p, dtype=float)
    Ep = energy(p, k)
    sp = sigma_dot(p)
    pref = -(k.c**4) / (2 * Ep**3)
    return pref * (k.m * SIGMA + np.einsum("i,ab->iab", p, sp) / (Ep + k.rest_energy))


def max_relative_error(X, Y):
    """Max-component error of X against reference Y, relative to max |Y|."""
    scale = np.max(np.abs(Y))
    err = np.max(np.abs(np.asarray(X) - np.asarray(Y)))
    return float(err / scale) if scale > 0 else float(err)


def momentum_grid(n=100, pmax_over_mc=5.0, k=DEFAULT, seed=20050101):
    """Deterministic random momenta uniformly filling the ball ``|p| <= pmax``."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    radius = pmax_over_mc * k.m * k.c * rng.random(n) ** (1 / 3)
    return d * radius[:, None]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="


def _check(name, value, threshold, relation="<="):
    ok = value <= threshold if relation == "<=" else value >= threshold
    return Check(name, float(value), float(threshold), bool(ok), relation)


def loglog_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs)."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def verify_fw(k=DEFAULT, n=100, seed=20050101, H=(0.0, 0.0, 0.1), p_fixed=(0.5, 0.3, 0.0)):
    """Unitarity, exact free diagonalisation, order-hbar residual and connection oracle."""
    grid = momentum_grid(n, 5.0, k, seed)
    checks = []

    unit = max(
        np.linalg.norm(U @ U.conj().T - I4)
        for U in (fw_unitary(p, H, k) for p in grid)
    )
    checks.append(_check("unitarity_max_defect", unit, 1e-10))

    free = max(diagonalization_residual(p, (0, 0, 0), k).offdiag_norm for p in grid)
    checks.append(_check("free_offdiag_max", free, 1e-10))

    hbars = [1e-1, 1e-2, 1e-3, 1e-4]
    offs = [diagonalization_residual(p_fixed, H, k.with_hbar(h)).offdiag_norm for h in hbars]
    checks.append(_check("offdiag_loglog_slope", loglog_slope(hbars, offs), 1.0, ">="))

    conn = max(
        max_relative_error(berry_connection_numeric(p, k), berry_connection_closed(p, k))
        for p in grid
        if np.linalg.norm(p) > 0
    )
    checks.append(_check("connection_max_rel_error", conn, 1e-6))
    return checks


def verify_curvature(k=DEFAULT, n=100, seed=20050101):
    """Non-Abelian curl versus closed form, plus the Abelian-curl counterexample."""
    grid = momentum_grid(n, 5.0, k, seed)
    rel = []
    abel = []
    herm = 0.0
    for p in grid:
        closed = berry_curvature_closed(p, k)
        curl = berry_curvature_matrix(p, k)
        rel.append(max_relative_error(curl, closed))
        abel.append(max_relative_error(berry_curvature_matrix(p, k, abelian=True), closed))
        herm = max(herm, max(hermitian_defect(F) for F in curl))
    return [
        _check("curvature_max_rel_error", max(rel), 1e-6),
        _check("abelian_curl_max_deviation", max(abel), 0.10, ">="),
        _check("curvature_hermitian_defect", herm, 1e-10),
    ]
