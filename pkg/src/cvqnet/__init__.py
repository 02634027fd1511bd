"""Fisher information of squeezed light distributed by continuous-variable beam-splitter networks."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DegenerateInputError,
    DimensionMismatchError,
    InvalidDimensionError,
    NonPhysicalCovarianceError,
    NonUnitaryError,
)
from .gaussian import (  # noqa: F401
    GaussianState,
    apply_bsn,
    apply_displacement,
    apply_loss,
    apply_phase_shifts,
    bsn_symplectic,
    classical_fisher_homodyne,
    make_input_state,
    qfi_displacement,
    vacuum,
)
from .qfi import (  # noqa: F401
    QfiBreakdown,
    f_minus,
    f_plus,
    g_i,
    h_global_bound,
    h_lo,
    h_lossy,
    h_max,
    h_mlo,
    h_mo,
    h_proper_squeezed,
    lipschitz_bound,
    loss_threshold_beta,
    optimal_phases,
    qfi_breakdown,
    qfi_phase,
)
from .random_unitary import (  # noqa: F401
    RngStream,
    hs_distance,
    sample_ginibre,
    sample_haar_unitary,
    sample_local_u2,
    unitarize,
)
