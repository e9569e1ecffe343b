"""Physical constants in natural units and the free-particle energy."""

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class PhysConstants:
    """Mass, speed of light, signed charge and the semiclassical parameter.

    All four default to 1. ``hbar`` is the small parameter of the
    semiclassical expansion; setting it to zero switches off every spin and
    topological correction.
    """

    m: float = 1.0
    c: float = 1.0
    e: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "c", "e", "hbar"):
            if not np.isfinite(getattr(self, name)):
                raise PreconditionError(f"constant {name} must be finite")
        if self.m <= 0:
            raise PreconditionError("mass m must be positive")
        if self.c <= 0:
            raise PreconditionError("speed of light c must be positive")
        if self.hbar < 0:
            raise PreconditionError("hbar must be non-negative")

    @property
    def rest_energy(self):
        return self.m * self.c**2

    def with_hbar(self, hbar):
        return PhysConstants(self.m, self.c, self.e, hbar)


DEFAULT = PhysConstants()


def energy(p, k=DEFAULT):
    """Kinetic energy ``sqrt(m^2 c^4 + p^2 c^2)``."""
    p = np.asarray(p, dtype=float)
    return float(np.sqrt(k.rest_energy**2 + (p @ p) * k.c**2))
