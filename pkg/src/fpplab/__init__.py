"""First-passage percolation laboratory.

Desk-scale tooling for planar first-passage percolation: edge-weight
distributions and their tertiles, reproducible random environments on finite
boxes of Z^2, passage times and geodesics, oriented-path events, self-avoiding
walk censuses with Chernoff tail bounds, and Monte Carlo estimation of the
time constant.
"""

__version__ = "0.1.0"

from fpplab.dist import (
    Exponential,
    PointMass,
    Uniform,
    WeightDistribution,
    parse_distribution,
    tertile_bounds,
)
from fpplab.lattice import Box, EdgeId, Site, make_field, passage_time

__all__ = [
    "__version__",
    "Box",
    "EdgeId",
    "Exponential",
    "PointMass",
    "Site",
    "Uniform",
    "WeightDistribution",
    "make_field",
    "parse_distribution",
    "passage_time",
    "tertile_bounds",
]
