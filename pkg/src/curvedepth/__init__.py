"""Expected nesting depth of Gaussian random plane curves.

Two independent routes to the same quantity: deterministic adaptive
quadrature of the Kac-Rice integral, and Monte Carlo sampling of curves
with topological winding-number counting on the sphere.
"""

__version__ = "0.1.0"

from .ensembles import (
    CoefficientScheme,
    SampleStream,
    custom_scheme,
    kac_square_scheme,
    kostlan_scheme,
    load_custom_scheme,
    sample,
    scheme_by_name,
)
from .errors import (
    CurveDepthError,
    DegenerateSample,
    ExcessiveDiscards,
    NonConvergence,
    SingularEvaluation,
)
from .kernel import CovKernel, kac_phi, make_kernel
from .polynomial import (
    PolySample,
    eval_with_radial,
    from_coeff_dict,
    homogenize_and_eval_sphere,
    rotate_sample,
)
from .quadrature import (
    IntegralResult,
    QuadConfig,
    expected_depth,
    expected_depth_kac_polar,
    kac_1d_root_density_integral,
    kostlan_closed_form,
)
from .curvetopo import (
    CurveLoop,
    DepthSampleReport,
    LoopSet,
    MonteCarloResult,
    SphereMesh,
    depth_of_sample,
    extract_loops,
    harnack_bound,
    mollified_count,
    monte_carlo_depth,
    winding,
)
from .sphere_mesh import build_sphere_mesh, default_subdivision
