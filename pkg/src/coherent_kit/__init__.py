"""Free-particle coherent states on a spectral grid and in a truncated number basis."""

from .errors import BoundaryWarning, ConfigurationError, UsageError
from .grid import (
    Grid,
    MomentReport,
    PhysicalConstants,
    WaveFunction,
    adjoint_eigen_residual,
    apply_operator,
    inner_product,
    make_grid,
    moments,
)
from .states import (
    CoherentLabel,
    alpha_from_moments,
    apply_drift_grid,
    coherent_closed_form,
    coherent_via_number_series,
    coherent_via_ode,
    number_state,
    overlap_closed_form,
)

__version__ = "0.1.0"
