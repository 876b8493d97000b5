__all__ = [
    "ApproxReport",
    "ApproxTable",
    "BumpConfig",
    "DiagonalProfile",
    "ExperimentConfig",
    "FunctionSymbol",
    "GridConfig",
    "IfsSpec",
    "Manifest",
    "ManifestEntry",
    "ModulusRow",
    "ModulusTable",
    "PairingReport",
    "PairingTable",
    "ProfileRow",
    "RegionConfig",
    "RegularityVerdict",
    "SetConfig",
    "SimilarityMap",
    "StabilitySeries",
    "four_corner_cantor",
    "middle_thirds_squared",
]

from .config import (
    BumpConfig,
    ExperimentConfig,
    FunctionSymbol,
    GridConfig,
    RegionConfig,
    SetConfig,
)
from .manifest import Manifest, ManifestEntry
from .reports import (
    ApproxReport,
    ApproxTable,
    DiagonalProfile,
    ModulusRow,
    ModulusTable,
    PairingReport,
    PairingTable,
    ProfileRow,
    RegularityVerdict,
    StabilitySeries,
)
from .sets import IfsSpec, SimilarityMap, four_corner_cantor, middle_thirds_squared
