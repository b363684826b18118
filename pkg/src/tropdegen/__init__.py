"""Tropicalizations, dual complexes, essential skeletons and limit measures
of one-parameter degenerations, with desk-scale numerical convergence checks."""

from .laurent import (
    LaurentPolynomial,
    LaurentSeries,
    ParseError,
    parse_polynomial,
    parse_series,
)
from .polyhedral import (
    PolyhedralComplex,
    Polyhedron,
    WeightedSimplex,
    WeightedSimplexMeasure,
    face,
    sample_uniform,
    sigma_H_volume,
)
from .tropical import (
    MonomialValuationPoint,
    TropicalPolynomial,
    in_tropical_hypersurface,
    trop_eval,
    trop_from_poly,
    tropical_hypersurface,
    tropical_prevariety,
)
from .sncmodel import (
    SncCombinatorics,
    dual_complex,
    essential_complex,
    fermat_model,
    kappa,
    limit_measure,
    log_of_monomial,
    normalize_kappa,
)
from .amoeba import (
    PointCloud,
    ScaleFactor,
    convergence_report,
    log_t,
    one_sided_hausdorff,
    sample_hypersurface,
)
from .toriclimit import (
    ToricDegeneration,
    laplace_integral,
    mass_asymptotics,
    pushforward_limit,
    sample_fiber,
    total_mass,
    verify_omt,
)
from .realma import (
    AtomicMeasure,
    ConvexPLFunction,
    ma_alexandrov,
    ma_smooth_grid,
    solve_rma,
    verify_malog_dim1,
)

__version__ = "0.1.0"
