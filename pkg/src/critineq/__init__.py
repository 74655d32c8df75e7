"""critineq: critical Sobolev-scale inequalities on model homogeneous groups.

Closed-form constants of the critical Gagliardo-Nirenberg / Trudinger /
Brezis-Gallouet-Wainger circle, Nehari-manifold ground states of the
associated Schroedinger-type equation with the sharp constant they carry,
and empirical stress tests of all four inequality families on discretized
Euclidean and Heisenberg models.
"""

from .constants import (
    ConstantsReport,
    GNParams,
    best_constant_from_mass,
    c1_envelope,
    compute_constants_report,
    equivalence_alpha,
    gn_constant_from_alpha,
    kernel_split_norms,
    marcinkiewicz_gn_bound,
    trudinger_alpha_threshold,
    trudinger_constant,
    weak_type_constants,
)
from .grids import (
    Field,
    PeriodicGrid,
    dilate_field,
    gaussian_field,
    inner,
    is_localized,
    load_field,
    lp_norm,
    save_field,
    set_integral,
)
from .groundstate import (
    GroundStateResult,
    SolverConfig,
    VariationalProblem,
    energy_L,
    nehari_I,
    nehari_project,
    solve,
    t_rho,
    weinstein_J,
)
from .groups import (
    GroupDescriptor,
    dilate,
    euclidean,
    heisenberg1,
    homogeneous_dimension,
    sphere_measure,
)
from .spectral import (
    SpectralOperator,
    apply_power,
    interpolation_check,
    negative_laplacian,
    sobolev_norm,
    spectral_cutoff,
)
from .verify import (
    TestFamily,
    VerificationReport,
    calibrate_bw_constant,
    holder_seminorm,
    max_passing_alpha,
    realize_family,
    verify_bgw,
    verify_bw_set,
    verify_gn,
    verify_trudinger,
)

__version__ = "0.1.0"
