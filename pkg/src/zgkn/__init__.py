"""Numerical toolkit for the zero-gravity Kerr-Newman spacetime."""

from .charts import (
    ChartError,
    RingCoord,
    SpacetimeParams,
    SpheroidalPoint,
    TildePoint,
    WeylSheetPoint,
)

__all__ = [
    "ChartError",
    "RingCoord",
    "SpacetimeParams",
    "SpheroidalPoint",
    "TildePoint",
    "WeylSheetPoint",
]
__version__ = "0.1.0"
