"""Hard-rod billiards with simultaneous total collisions.

The library implements the dynamics on the invariant set of phase points
whose free flight reaches a simultaneous collision of all N rods, together
with the numerical machinery to verify its structural facts: the canonical
linear scattering map, the Jacobian equation scattering maps must solve to
preserve the weighted surface measure, closed-form flow Jacobians and area
elements with finite-difference oracles, and Monte Carlo pushforward
invariance tests backed by a deterministic grid oracle.
"""

from .errors import (
    BoundaryPointError,
    BoundaryUnsupportedError,
    ConfigError,
    DomainViolationError,
    HardlineError,
    InvalidDensityError,
    InvalidInputError,
    NoCollisionError,
    NotOnManifoldError,
    RegionTooSmallError,
    SingularChartError,
    SingularWeightError,
    StepTooLargeError,
    WrongBranchError,
)
from .geometry import (
    DEFAULT_TOL,
    ChartPoint,
    PhasePoint,
    ToleranceConfig,
    chart_forward,
    chart_inverse,
    collision_time,
    cone_membership,
    conserved_quantities,
    in_table,
    on_manifold,
    velocity_completion,
)
from .scattering import (
    AdmissibilityReport,
    ConservationReport,
    CustomScatteringMap,
    LinearScatteringMap,
    PdeResidualReport,
    ScatteringMap,
    admissibility_check,
    apply,
    builtin_map,
    conservation_check,
    finite_diff_jacobian,
    h_weight,
    load_linear_map,
    negation,
    pde_residual,
    reversal,
    sample_pre_cone,
    sigma_star,
    sigma_star_matrix,
    sigma_star_via_spectral,
)
from .flow import (
    FlowResult,
    TrajectorySample,
    classify_region,
    flow_map,
    reduced_flow,
    reduced_flow_sigma,
    scattering_flow_jacobian_closed_form,
    shear_jacobian_closed_form,
    trajectory,
    write_trajectory_csv,
)
from .measure import (
    ChartRegion,
    InvarianceReport,
    MCConfig,
    MeasureSpec,
    TestFunction,
    density_factory,
    functional_equation_check,
    gram_density_oracle,
    grid_integral,
    integrate,
    invariance_report,
    liouville_density,
    sample_chart_points,
    surface_density,
)
from .identities import (
    IDENTITY_TOLERANCES,
    CertificateReport,
    IdentityScorecard,
    run_suite,
    sigma_star_certificate,
)

__version__ = "0.1.0"
