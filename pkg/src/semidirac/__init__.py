"""
Semiclassical dynamics of a Dirac electron in external electromagnetic fields.

The package builds the Foldy-Wouthuysen-type diagonalisation of the Dirac
Hamiltonian with an external magnetic field, the non-Abelian Berry connection
and curvature it induces in momentum space, and integrates the resulting
covariant wave-packet equations of motion for position, momentum and spin.
"""

from .constants import DEFAULT, PhysConstants, energy
from .dynamics import (
    COLUMNS,
    Derivatives,
    ParticleState,
    RhsModel,
    Trajectory,
    berry_curvature,
    delta_E,
    energy_monitor,
    grad_delta_E,
    implicit_residual,
    integrate,
    rhs,
)
from .errors import InsufficientDataError, NumericalError, PreconditionError, ScenarioError, SemiDiracError
from .fields import FieldConfig, FieldSample, field_tensor, maxwell_residual, potential, sample
from .scenario import Scenario, load_scenario, parse_scenario

__version__ = "0.1.0"
