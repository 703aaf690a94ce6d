"""Log-Riemann surfaces of PQ-forms F = c0 + int Q e^P: lifting, skeletons, geometry, uniformization."""

__version__ = "0.1.0"

from .errors import LogRSError  # noqa: E402
from .numerics import ApproximantForm, CPoly, PQForm, approximant, poly_roots  # noqa: E402
from .lifting import FiberPoint, RamPoint, lift_segment, monodromy, ray_classify  # noqa: E402
from .skeleton import (  # noqa: E402
    Skeleton,
    ball_embed,
    finite_completion,
    pi1_rank,
    ram_cycles,
    skeleton_build,
    truncate,
    validate_graph,
)
from .geometry import SurfacePoint, kn_cells, kn_distance, parabolicity, tau_sigma  # noqa: E402
from .uniformize import RamData, convergence_report, fit_pq, nonlinearity, ram_data  # noqa: E402

__all__ = [
    "ApproximantForm", "CPoly", "FiberPoint", "LogRSError", "PQForm", "RamPoint", "Skeleton",
    "approximant", "ball_embed", "finite_completion", "lift_segment", "monodromy", "pi1_rank",
    "poly_roots", "ram_cycles", "ray_classify", "skeleton_build", "truncate", "validate_graph",
    "SurfacePoint", "kn_cells", "kn_distance", "parabolicity", "tau_sigma",
    "RamData", "convergence_report", "fit_pq", "nonlinearity", "ram_data",
]
