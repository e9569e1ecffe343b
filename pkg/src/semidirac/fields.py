"""
Electromagnetic field configurations.

A :class:`FieldConfig` is an immutable description of a static or
time-dependent external field. Built-in kinds are ``uniform``,
``crossed_uniform`` (uniform E and H, usually perpendicular) and a softened
``coulomb`` centre. ``custom`` wraps a user evaluator ``f(r, t) -> (E, H)``
and, optionally, a scalar potential ``phi(r, t)``.

Gaussian-type natural units are used throughout, so ``E`` and ``H`` share
units and the Lorentz force reads ``e E + (e/c) v x H``.
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import PreconditionError

KINDS = ("uniform", "crossed_uniform", "coulomb", "custom")


class FieldSample(NamedTuple):
    E: np.ndarray
    H: np.ndarray


def _vec(v):
    out = np.array(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(out)):
        raise PreconditionError(f"field vector {v!r} is not finite")
    return out


@dataclass(frozen=True)
class FieldConfig:
    kind: str
    E0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    H0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Z: float = 0.0
    softening: float = 0.0
    evaluator: Optional[Callable] = None
    potential_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown field kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "E0", _vec(self.E0))
        object.__setattr__(self, "H0", _vec(self.H0))
        if self.kind == "coulomb" and not self.softening > 0:
            raise PreconditionError("coulomb field needs a positive softening radius")
        if self.kind == "custom" and self.evaluator is None:
            raise PreconditionError("custom field needs an evaluator")

    @classmethod
    def uniform(cls, E0=(0, 0, 0), H0=(0, 0, 0)):
        return cls("uniform", E0=E0, H0=H0)

    @classmethod
    def crossed_uniform(cls, E0, H0):
        return cls("crossed_uniform", E0=E0, H0=H0)

    @classmethod
    def coulomb(cls, Z, softening, H0=(0, 0, 0)):
        """Softened Coulomb centre at the origin, optionally on a uniform H background."""
        return cls("coulomb", Z=float(Z), softening=float(softening), H0=H0)

    @classmethod
    def custom(cls, evaluator, potential=None):
        return cls("custom", evaluator=evaluator, potential_fn=potential)

    @property
    def is_uniform(self):
        return self.kind in ("uniform", "crossed_uniform")

    @property
    def has_potential(self):
        return self.kind != "custom" or self.potential_fn is not None


def sample(cfg, r, t=0.0):
    """Evaluate ``(E, H)`` at position ``r`` and time ``t``."""
    if cfg.is_uniform:
        return FieldSample(cfg.E0.copy(), cfg.H0.copy())
    r = np.asarray(r, dtype=float)
    if cfg.kind == "coulomb":
        d2 = r @ r + cfg.softening**2
        return FieldSample(cfg.Z * r / d2**1.5, cfg.H0.copy())
    E, H = cfg.evaluator(r, t)
    return FieldSample(np.asarray(E, dtype=float), np.asarray(H, dtype=float))


def potential(cfg, r, t=0.0):
    """Scalar potential with ``E = -grad(phi)``, or ``None`` if not available."""
    r = np.asarray(r, dtype=float)
    if cfg.is_uniform:
        return float(-cfg.E0 @ r)
    if cfg.kind == "coulomb":
        return float(cfg.Z / np.sqrt(r @ r + cfg.softening**2))
    if cfg.potential_fn is None:
        return None
    return float(cfg.potential_fn(r, t))


def field_jacobian(cfg, r, t=0.0, step=1e-6):
    """Spatial Jacobians ``dE_i/dr_j`` and ``dH_i/dr_j``.

    Analytic for the built-in kinds, central differences for ``custom``.
    """
    r = np.asarray(r, dtype=float)
    if cfg.is_uniform:
        return np.zeros((3, 3)), np.zeros((3, 3))
    if cfg.kind == "coulomb":
        d2 = r @ r + cfg.softening**2
        JE = cfg.Z * (np.eye(3) / d2**1.5 - 3 * np.outer(r, r) / d2**2.5)
        return JE, np.zeros((3, 3))
    JE = np.empty((3, 3))
    JH = np.empty((3, 3))
    for j in range(3):
        d = np.zeros(3)
        d[j] = step
        fp = sample(cfg, r + d, t)
        fm = sample(cfg, r - d, t)
        JE[:, j] = (fp.E - fm.E) / (2 * step)
        JH[:, j] = (fp.H - fm.H) / (2 * step)
    return JE, JH


def tensor_from_sample(f):
    """Contravariant field tensor for signature (-,+,+,+).

    ``F^{0i} = E_i``, ``F^{i0} = -E_i``, ``F^{ij} = eps_ijk H_k``.
    """
    E, H = f
    F = np.zeros((4, 4))
    F[0, 1:] = E
    F[1:, 0] = -E
    F[1, 2], F[2, 3], F[3, 1] = H[2], H[0], H[1]
    F[2, 1], F[3, 2], F[1, 3] = -H[2], -H[0], -H[1]
    return F


def field_tensor(cfg, r, t=0.0):
    return tensor_from_sample(sample(cfg, r, t))


_LOWER = np.diag([-1.0, 1.0, 1.0, 1.0])


def _shifted_tensor(cfg, r, t, a, h, c):
    if a == 0:
        return field_tensor(cfg, r, t + h / c)
    d = np.zeros(3)
    d[a - 1] = h
    return field_tensor(cfg, r + d, t)


def maxwell_residual(cfg, r, t=0.0, step=1e-4, c=1.0):
    """Largest violation of the homogeneous Maxwell equations at ``(r, t)``.

    Evaluates ``d_a F_bc + d_b F_ca + d_c F_ab`` on the covariant tensor for
    every index triple, with fourth-order central differences in
    ``(ct, x, y, z)``. Built-in configurations give round-off sized values; a
    custom field with ``div H != 0`` or ``curl E != -dH/dt / c`` does not.
    """
    if step <= 0:
        raise PreconditionError("step must be positive")
    r = np.asarray(r, dtype=float)
    dF = np.empty((4, 4, 4))
    for a in range(4):
        f1 = _shifted_tensor(cfg, r, t, a, step, c) - _shifted_tensor(cfg, r, t, a, -step, c)
        f2 = _shifted_tensor(cfg, r, t, a, 2 * step, c) - _shifted_tensor(cfg, r, t, a, -2 * step, c)
        dF[a] = _LOWER @ ((8 * f1 - f2) / (12 * step)) @ _LOWER
    worst = 0.0
    for a, b, g in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        worst = max(worst, abs(dF[a, b, g] + dF[b, g, a] + dF[g, a, b]))
    return float(worst)
