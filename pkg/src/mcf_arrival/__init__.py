"""Level-set mean curvature flow and arrival-time singularity analysis."""

__version__ = "0.1.0"

from .arrival import ArrivalField, eq12_residual, extinction_time, residual_map  # noqa: E402
from .errors import MCFError  # noqa: E402
from .evolve import EvolveParams, evolve  # noqa: E402
from .grid import GridSpec, ScalarField, SymmetricMatrix  # noqa: E402
from .scenarios import get_scenario, sample  # noqa: E402

__all__ = [
    "ArrivalField", "EvolveParams", "GridSpec", "MCFError", "ScalarField", "SymmetricMatrix",
    "__version__", "eq12_residual", "evolve", "extinction_time", "get_scenario",
    "residual_map", "sample",
]
