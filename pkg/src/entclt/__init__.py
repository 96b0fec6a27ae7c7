"""Grid-based numerical lab for entropic central limit bounds.

One-dimensional densities are tabulated on uniform grids; sums, Ornstein-
Uhlenbeck smoothing, information functionals, Wasserstein distances and
Poincaré constants are computed by deterministic quadrature.  Products of
independent coordinates are handled through additivity.
"""

__version__ = "0.1.0"

from .distributions import DistributionSpec, make_density
from .grid import GridDensity, ProductMeasure

__all__ = ["DistributionSpec", "GridDensity", "ProductMeasure", "make_density", "__version__"]
