"""
Semiclassical equations of motion for the centre of a Dirac wave packet.

Three right-hand sides share one state layout ``(r, p, S)``:

``berry_full``
    Covariant trajectory equations with the momentum-space Berry curvature
    ``F(p, S)`` and the spin/orbital magnetic energy ``dE``::

        pdot = -d_r dE + eE + (ec/E) p x H + (e/c) d_p dE x H
               + hbar (e^2/c) (F x E) x H + hbar (e^2/E) (F.H) p x H
        rdot = p c^2/E + d_p dE + hbar e F x E + hbar (ec/E) F x (p x H)

``pauli_canonical``
    Canonical Hamilton equations of the Pauli-type Hamiltonian
    ``E_p + ePhi - (e hbar c/2E) S.H - (e hbar c^2 / 2E(E+mc^2)) S.(E x p)``.

``classical_lorentz``
    ``berry_full`` at ``hbar = 0``.

In every model the spin follows ``dS/dt = Omega x S``. An optional spinor
``chi`` can ride along, driven by :func:`semidirac.spin.spinor_rate_matrix`.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import spin as _spin
from .constants import DEFAULT, PhysConstants, energy
from .errors import NumericalError, PreconditionError
from .fields import FieldConfig, field_jacobian, potential, sample


class RhsModel(str, enum.Enum):
    BERRY_FULL = "berry_full"
    PAULI_CANONICAL = "pauli_canonical"
    CLASSICAL_LORENTZ = "classical_lorentz"


MODEL_ALIASES = {
    "berry": RhsModel.BERRY_FULL,
    "pauli": RhsModel.PAULI_CANONICAL,
    "classical": RhsModel.CLASSICAL_LORENTZ,
}


def as_model(model):
    if isinstance(model, RhsModel):
        return model
    if model in MODEL_ALIASES:
        return MODEL_ALIASES[model]
    try:
        return RhsModel(model)
    except ValueError:
        raise PreconditionError(f"unknown model {model!r}") from None


@dataclass(frozen=True)
class ParticleState:
    t: float
    r: np.ndarray
    p: np.ndarray
    S: np.ndarray
    chi: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "S", np.asarray(self.S, dtype=float))
        if self.chi is not None:
            object.__setattr__(self, "chi", np.asarray(self.chi, dtype=complex))


class Derivatives(NamedTuple):
    rdot: np.ndarray
    pdot: np.ndarray
    Sdot: np.ndarray


class Gradient(NamedTuple):
    dp: np.ndarray
    dr: np.ndarray


def _cross(a, b):
    return np.array(
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    )


def berry_curvature(p, S, k=DEFAULT):
    """Classical Berry curvature ``-(c^4/2E^3)[m S + (S.p) p / (E + mc^2)]``."""
    p = np.asarray(p, dtype=float)
    S = np.asarray(S, dtype=float)
    Ep = energy(p, k)
    return -(k.c**4 / (2 * Ep**3)) * (k.m * S + (S @ p) * p / (Ep + k.rest_energy))


def intrinsic_angular_momentum(p, S, k=DEFAULT):
    """``L = hbar c^2 p x (p x S) / (2E(E+mc^2))``."""
    p = np.asarray(p, dtype=float)
    S = np.asarray(S, dtype=float)
    Ep = energy(p, k)
    return k.hbar * k.c**2 * _cross(p, _cross(p, S)) / (2 * Ep * (Ep + k.rest_energy))


def delta_E(p, S, f, k=DEFAULT):
    """Spin and orbital magnetic energy ``-(e hbar c/2E) S.H - (ec/E) L.H``."""
    p = np.asarray(p, dtype=float)
    S = np.asarray(S, dtype=float)
    H = np.asarray(f[1], dtype=float)
    Ep = energy(p, k)
    L = intrinsic_angular_momentum(p, S, k)
    return float(-(k.e * k.hbar * k.c / (2 * Ep)) * (S @ H) - (k.e * k.c / Ep) * (L @ H))


def delta_E_pauli(p, S, f, k=DEFAULT):
    """Zeeman plus spin-orbit energy of the Pauli-type Hamiltonian."""
    p = np.asarray(p, dtype=float)
    S = np.asarray(S, dtype=float)
    E, H = (np.asarray(v, dtype=float) for v in f)
    Ep = energy(p, k)
    so = k.e * k.hbar * k.c**2 / (2 * Ep * (Ep + k.rest_energy))
    return float(-(k.e * k.hbar * k.c / (2 * Ep)) * (S @ H) - so * (S @ _cross(E, p)))


def _grad_berry(p, S, f, JH, k):
    E_, H = f
    H = np.asarray(H, dtype=float)
    Ep = energy(p, k)
    mc2 = k.rest_energy
    c = k.c
    dEdp = p * c**2 / Ep
    # dE = a(E) S.H + g(E) Q(p),  Q = (p.S)(p.H) - p^2 (S.H)
    a = -k.e * k.hbar * c / (2 * Ep)
    da = (k.e * k.hbar * c / (2 * Ep**2)) * dEdp
    g = -k.e * k.hbar * c**3 / (2 * Ep**2 * (Ep + mc2))
    dg = (k.e * k.hbar * c**3 / 2) * (3 * Ep**2 + 2 * Ep * mc2) / (Ep**2 * (Ep + mc2)) ** 2 * dEdp
    pS, pH, SH = p @ S, p @ H, S @ H
    Q = pS * pH - (p @ p) * SH
    dQ = S * pH + H * pS - 2 * p * SH
    dp = da * SH + dg * Q + g * dQ
    dE_dH = a * S + g * (pS * p - (p @ p) * S)
    return Gradient(dp, JH.T @ dE_dH)


def _grad_pauli(p, S, f, JE, JH, k):
    E, H = (np.asarray(v, dtype=float) for v in f)
    Ep = energy(p, k)
    mc2 = k.rest_energy
    c = k.c
    dEdp = p * c**2 / Ep
    a = -k.e * k.hbar * c / (2 * Ep)
    da = (k.e * k.hbar * c / (2 * Ep**2)) * dEdp
    b = -k.e * k.hbar * c**2 / (2 * Ep * (Ep + mc2))
    db = (k.e * k.hbar * c**2 / 2) * (2 * Ep + mc2) / (Ep * (Ep + mc2)) ** 2 * dEdp
    # S.(E x p) = p.(S x E) = E.(p x S)
    SxE = _cross(S, E)
    dp = da * (S @ H) + db * (p @ SxE) + b * SxE
    dr = JH.T @ (a * S) + JE.T @ (b * _cross(p, S))
    return Gradient(dp, dr)


def grad_delta_E(p, S, cfg, r, t=0.0, k=DEFAULT, model=RhsModel.BERRY_FULL):
    """Analytic momentum and position gradients of the model's energy correction.

    The position gradient flows only through the local field, using
    :func:`semidirac.fields.field_jacobian`.
    """
    p = np.asarray(p, dtype=float)
    S = np.asarray(S, dtype=float)
    f = sample(cfg, r, t)
    JE, JH = field_jacobian(cfg, r, t)
    if as_model(model) is RhsModel.PAULI_CANONICAL:
        return _grad_pauli(p, S, f, JE, JH, k)
    return _grad_berry(p, S, f, JH, k)


def rhs(state, cfg, model=RhsModel.BERRY_FULL, k=DEFAULT):
    """Time derivatives of ``(r, p, S)`` for the chosen model."""
    model = as_model(model)
    if model is RhsModel.CLASSICAL_LORENTZ:
        k = k.with_hbar(0.0)
    p, S, r, t = state.p, state.S, state.r, state.t
    f = sample(cfg, r, t)
    E, H = f
    Ep = energy(p, k)
    e, c, hbar = k.e, k.c, k.hbar
    Sdot = _cross(_spin.precession_vector(p, f, k), S)
    v0 = p * c**2 / Ep

    if model is RhsModel.PAULI_CANONICAL:
        gp, gr = grad_delta_E(p, S, cfg, r, t, k, model)
        pdot = -gr + e * E + (e * c / Ep) * _cross(p, H) + (e / c) * _cross(gp, H)
        return Derivatives(v0 + gp, pdot, Sdot)

    gp, gr = grad_delta_E(p, S, cfg, r, t, k, RhsModel.BERRY_FULL)
    F = berry_curvature(p, S, k)
    FxE = _cross(F, E)
    pxH = _cross(p, H)
    pdot = (
        -gr
        + e * E
        + (e * c / Ep) * pxH
        + (e / c) * _cross(gp, H)
        + hbar * (e**2 / c) * _cross(FxE, H)
        + hbar * (e**2 / Ep) * (F @ H) * pxH
    )
    rdot = v0 + gp + hbar * e * FxE + hbar * (e * c / Ep) * _cross(F, pxH)
    return Derivatives(rdot, pdot, Sdot)


class ImplicitResidual(NamedTuple):
    rp: np.ndarray
    rr: np.ndarray


def implicit_residual(state, derivs, cfg, k=DEFAULT):
    """Residuals of the implicit (Lorentz-force) form with ``derivs`` substituted.

    ``rp = pdot - (-d_r dE + eE + (e/c) rdot x H)`` and
    ``rr = rdot - (p c^2/E + d_p dE - hbar pdot x F)``.
    """
    p, S = state.p, state.S
    E, H = sample(cfg, state.r, state.t)
    gp, gr = grad_delta_E(p, S, cfg, state.r, state.t, k)
    F = berry_curvature(p, S, k)
    rdot, pdot, _ = derivs
    rp = pdot - (-gr + k.e * E + (k.e / k.c) * _cross(rdot, H))
    rr = rdot - (p * k.c**2 / energy(p, k) + gp - k.hbar * _cross(pdot, F))
    return ImplicitResidual(rp, rr)


def energy_monitor(state, cfg, model=RhsModel.BERRY_FULL, k=DEFAULT):
    """``E_p + dE + e Phi``, or ``None`` when the field has no scalar potential."""
    phi = potential(cfg, state.r, state.t)
    if phi is None:
        return None
    model = as_model(model)
    if model is RhsModel.CLASSICAL_LORENTZ:
        k = k.with_hbar(0.0)
    f = sample(cfg, state.r, state.t)
    dE = delta_E_pauli if model is RhsModel.PAULI_CANONICAL else delta_E
    return energy(state.p, k) + dE(state.p, state.S, f, k) + k.e * phi


# --- integration ------------------------------------------------------------

COLUMNS = ("t", "rx", "ry", "rz", "px", "py", "pz", "Sx", "Sy", "Sz", "energy")


@dataclass
class Trajectory:
    """Sampled solution. Arrays share the leading sample axis."""

    t: np.ndarray
    r: np.ndarray
    p: np.ndarray
    S: np.ndarray
    energy: Optional[np.ndarray]
    chi: Optional[np.ndarray] = None
    cfg: Optional[FieldConfig] = None
    model: Optional[RhsModel] = None
    k: PhysConstants = DEFAULT
    n_steps: int = 0
    n_rejected: int = 0

    def __len__(self):
        return len(self.t)

    def state(self, i):
        chi = None if self.chi is None else self.chi[i]
        return ParticleState(self.t[i], self.r[i], self.p[i], self.S[i], chi)

    def states(self):
        return [self.state(i) for i in range(len(self))]


def _pack(state, with_chi):
    parts = [state.r, state.p, state.S]
    if with_chi:
        parts.append(np.array([state.chi[0].real, state.chi[0].imag, state.chi[1].real, state.chi[1].imag]))
    return np.concatenate(parts)


def _unpack_chi(y):
    return np.array([y[9] + 1j * y[10], y[11] + 1j * y[12]])


def _make_flat_rhs(cfg, model, k, with_chi):
    model = as_model(model)

    def f(t, y):
        st = ParticleState(t, y[0:3], y[3:6], y[6:9])
        d = rhs(st, cfg, model, k)
        if not with_chi:
            return np.concatenate(d)
        fs = sample(cfg, st.r, t)
        K = _spin.spinor_rate_matrix(st.p, _spin.lorentz_pdot(st.p, fs, k), fs, k)
        dchi = _spin.spinor_rhs(_unpack_chi(y), K)
        return np.concatenate([*d, [dchi[0].real, dchi[0].imag, dchi[1].real, dchi[1].imag]])

    return f


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# Dormand-Prince 5(4)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def dopri5_step(f, t, y, h, k1=None):
    """One Dormand-Prince step. Returns ``(y_new, err_vec, f(t+h, y_new))``."""
    ks = [f(t, y) if k1 is None else k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kk for a, kk in zip(_DP_A[i], ks))
        ks.append(f(t + _DP_C[i] * h, yi))
    K = np.array(ks)
    y_new = y + h * (_DP_B @ K)
    return y_new, h * (_DP_E @ K), ks[-1]


def _check_finite(y, t):
    if not np.all(np.isfinite(y)):
        raise NumericalError(f"non-finite state encountered at t = {t:.17g}")


def _renorm(y, with_chi):
    y[6:9] /= np.linalg.norm(y[6:9])
    if with_chi:
        y[9:13] /= np.linalg.norm(y[9:13])
    return y


def integrate(
    state0,
    cfg,
    model=RhsModel.BERRY_FULL,
    k=DEFAULT,
    scheme="rk45_adaptive",
    T=1.0,
    dt=None,
    tol=1e-10,
    atol=1e-12,
    output_every=None,
    dt_min=None,
    max_steps=10_000_000,
    renormalize=False,
):
    """Integrate the equations of motion from ``state0`` for a duration ``T``.

    Parameters
    ----------
    scheme : {"rk45_adaptive", "rk4_fixed"}
        Dormand-Prince 5(4) with error control, or classical RK4 with step ``dt``.
    tol, atol : float
        Relative and absolute tolerances of the adaptive scheme.
    output_every : float, optional
        Sampling interval. For ``rk4_fixed`` it must be a multiple of ``dt``;
        for the adaptive scheme steps are shortened to land on the sampling
        grid. By default every step is recorded.
    dt_min : float, optional
        Adaptive step underflow threshold, default ``1e-12 * T``.
    renormalize : bool
        Rescale ``S`` (and ``chi``) to unit length after every step.

    Returns
    -------
    Trajectory
    """
    model = as_model(model)
    if not T > 0:
        raise PreconditionError("integration time T must be positive")
    with_chi = state0.chi is not None
    f = _make_flat_rhs(cfg, model, k, with_chi)
    y = _pack(state0, with_chi)
    t0 = float(state0.t)
    ts, ys = [t0], [y.copy()]

    if scheme == "rk4_fixed":
        if dt is None or not dt > 0:
            raise PreconditionError("rk4_fixed needs a positive dt")
        n = int(round(T / dt))
        if n < 1 or abs(n * dt - T) > 1e-9 * T:
            raise PreconditionError(f"T = {T} is not an integer multiple of dt = {dt}")
        every = 1
        if output_every is not None:
            every = int(round(output_every / dt))
            if every < 1 or abs(every * dt - output_every) > 1e-9 * output_every:
                raise PreconditionError("output_every must be a multiple of dt")
        for i in range(1, n + 1):
            t = t0 + (i - 1) * dt
            y = rk4_step(f, t, y, dt)
            _check_finite(y, t + dt)
            if renormalize:
                _renorm(y, with_chi)
            if i % every == 0 or i == n:
                ts.append(t0 + i * dt)
                ys.append(y.copy())
        n_steps, n_rej = n, 0
    elif scheme == "rk45_adaptive":
        if dt_min is None:
            dt_min = 1e-12 * T
        t_end = t0 + T
        h = dt if dt is not None else min(T, output_every or T) * 1e-3
        t = t0
        next_out = t0 + output_every if output_every else None
        n_out = 1
        k1 = None
        n_steps = n_rej = 0
        while t < t_end:
            if n_steps + n_rej >= max_steps:
                raise NumericalError(f"step budget of {max_steps} exhausted at t = {t:.17g}")
            target = min(t_end, next_out) if next_out is not None else t_end
            h_try = min(h, target - t)
            last = h_try >= target - t
            y_new, err, k_new = dopri5_step(f, t, y, h_try, k1)
            scale = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
            en = float(np.sqrt(np.mean((err / scale) ** 2)))
            if not np.isfinite(en):
                _check_finite(y_new, t + h_try)
                raise NumericalError(f"non-finite error estimate at t = {t:.17g}")
            if en <= 1.0:
                t = target if last else t + h_try
                y = y_new
                k1 = k_new
                if renormalize:
                    _renorm(y, with_chi)
                    k1 = None
                _check_finite(y, t)
                n_steps += 1
                if next_out is None:
                    ts.append(t)
                    ys.append(y.copy())
                elif last:
                    ts.append(t)
                    ys.append(y.copy())
                    n_out += 1
                    next_out = min(t_end, t0 + n_out * output_every)
                    if t >= t_end:
                        break
                fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en**-0.2))
                # a step clipped to an output time says little about the natural size
                h = max(h, h_try * fac) if last else h_try * fac
            else:
                n_rej += 1
                h = h_try * max(0.2, 0.9 * en**-0.25)
                if h < dt_min:
                    raise NumericalError(
                        f"adaptive step underflow at t = {t:.17g}: dt = {h:.3g} < dt_min = {dt_min:.3g}"
                    )
    else:
        raise PreconditionError(f"unknown scheme {scheme!r}")

    Y = np.array(ys)
    tr = Trajectory(
        t=np.array(ts),
        r=Y[:, 0:3],
        p=Y[:, 3:6],
        S=Y[:, 6:9],
        energy=None,
        chi=np.stack([Y[:, 9] + 1j * Y[:, 10], Y[:, 11] + 1j * Y[:, 12]], axis=1) if with_chi else None,
        cfg=cfg,
        model=model,
        k=k,
        n_steps=n_steps,
        n_rejected=n_rej,
    )
    if cfg.has_potential:
        tr.energy = np.array([energy_monitor(s, cfg, model, k) for s in tr.states()])
    return tr
