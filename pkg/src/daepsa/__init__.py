"""Pseudospectra and transient-growth bounds for DAE matrix pencils.

The finite dynamics of ``E x' = A x`` are isolated with an ordered Schur
decomposition of the shifted operator ``(A - mu E)^{-1} E``; every
quantity (resolvent norms, abscissae, Kreiss constant, growth bounds) is
then computed for the resulting generator, so it does not depend on how the
equations are scaled or combined.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError, DaepsaError, InconsistentInitialConditionError, InputError, MatrixMarketError,
    NotPositiveDefiniteError, NumericalError, OverflowMatrixError, RankDeficiencyError,
    SingularMatrixError, SingularPencilError,
)
from .pencil import (  # noqa: E402
    FiniteDecomposition, Pencil, check_mu_independence, consistency_residual, decompose,
    finite_eigenvalues, require_consistent, select_shift, shifted_operator, solution_at,
)
from .pseudospectra import (  # noqa: E402
    GridSpec, NumericalRangeBoundary, ResolventField, check_inclusion, field_discrepancy,
    legacy_grid, matrix_field, numerical_range, pseudospectra_grid, resolvent_norm,
)
from .contours import ContourLevel, ContourSet, extract_contours  # noqa: E402
from .transient import (  # noqa: E402
    discrete_report, exp_norm_curve, kreiss_constant, numerical_abscissa, power_norm_curve,
    pseudospectral_abscissa, pseudospectral_radius, spectral_abscissa, transient_report,
    upper_bounds,
)
from .weighted import (  # noqa: E402
    InnerProductNorm, h_matrix_norm, h_pseudospectra_schur, h_pseudospectra_transform,
    h_vector_norm, weighted_generator,
)
from .projection import (  # noqa: E402
    SparsePencil, arnoldi_invariant_subspace, generate_saddle_pencil, interior_pseudospectra,
    projected_growth_bound, projected_h_norm,
)

__all__ = [n for n in dir() if not n.startswith("_")]
