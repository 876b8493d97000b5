__all__ = [
    "BudgetExceededError",
    "ExperimentConfig",
    "FitRefusedError",
    "Grid",
    "GridFunction",
    "InvalidInputError",
    "Jet1",
    "KernelMatrix",
    "NotComplexLinearOnComplexPart",
    "NumericalContractError",
    "RealLinearMap",
    "RealSubspace",
    "Region",
    "SetSample",
    "SnowflakeCurve",
    "WhitneyDbarError",
    "WirtingerFunction",
    "build_kernel",
    "cauchy_transform",
    "complex_part",
    "configure_logging",
    "dbar_defect",
    "dbar_fd",
    "delta_mask",
    "diagonal_profile",
    "extend_complex_linear",
    "from_real_matrix",
    "holder_fit",
    "holo_approx",
    "ifs_sample",
    "is_totally_real",
    "list_catalog",
    "locally_constant_jet",
    "max_principle_check",
    "pair",
    "region_make",
    "regularity_verdict",
    "restrict_smooth",
    "run",
    "snowflake_sample",
    "snowflake_zero_diff_jet",
    "uniform_limit_stability",
    "whitney_modulus",
]

from .cauchy import cauchy_transform, dbar_fd, holo_approx, max_principle_check
from .commutator import KernelMatrix, build_kernel, diagonal_profile, regularity_verdict
from .exceptions import (
    BudgetExceededError,
    FitRefusedError,
    InvalidInputError,
    NotComplexLinearOnComplexPart,
    NumericalContractError,
    WhitneyDbarError,
)
from .functions import WirtingerFunction
from .grid import Grid, GridFunction
from .jets import (
    Jet1,
    dbar_defect,
    holder_fit,
    locally_constant_jet,
    restrict_smooth,
    snowflake_zero_diff_jet,
    whitney_modulus,
)
from .perimeter import pair, uniform_limit_stability
from .plane_sets import (
    Region,
    SetSample,
    SnowflakeCurve,
    delta_mask,
    ifs_sample,
    region_make,
    snowflake_sample,
)
from .runner import list_catalog, run
from .schemas.config import ExperimentConfig
from .utils import configure_logging
from .wirtinger import (
    RealLinearMap,
    RealSubspace,
    complex_part,
    extend_complex_linear,
    from_real_matrix,
    is_totally_real,
)


__version__ = "0.1.0"
__description__ = (
    "Whitney jets, Wirtinger calculus and the planar Cauchy transform on fractal sets."
)
