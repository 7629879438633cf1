"""Generalized squeezing U_n(r) = exp{r[(a^dag)^n - a^n]} in a truncated Fock space."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DivergenceError,
    EigensolverError,
    FitError,
    GenSqueezeError,
    NoReturnError,
    NumericalError,
    TailError,
    ValidationError,
)
from .fockspace import (  # noqa: E402
    Cutoff,
    Family,
    GeneratorMatrix,
    GeneratorSpec,
    SoftAnchor,
    StateVector,
    SubspaceView,
    build_generator,
    fock_state,
    matrix_element,
    subspace_view,
    suppression_factor,
    vacuum_state,
)
from .observables import (  # noqa: E402
    ExtremumKind,
    ExtremumRecord,
    argmax_occupation,
    fidelity,
    find_extrema,
    first_minimum,
    first_return,
    mean_photon,
    occupation,
)
from .propagation import (  # noqa: E402
    StepSchedule,
    Trajectory,
    evolve_spectral,
    evolve_stepwise,
    evolve_vacuum,
    step_operator,
    trajectory_observables,
)
from .spectral import (  # noqa: E402
    SpectralData,
    amplitude_fraction,
    dominant_gap,
    eigensystem,
    eigenstate_distribution,
    eigenstate_mean_photon,
    vacuum_overlap_ranking,
    vacuum_return_probability,
    vacuum_spectrum,
)
