"""Dyadic contents, Frostman measures, Poisson/Cauchy transforms and Wiener-type
series for Lipschitz-class capacities in the plane."""

__version__ = "0.1.0"

from .content import (ContentResult, Ladder, PowerLaw, Tabulated, ball_bracket, dyadic_content,
                      gauge_content, lower_content_estimate, lower_content_raster, optimal_cover)
from .errors import LipcapError
from .geom import (Annulus, Bitmap, Disc, DyadicShape, DyadicSquare, ParametricDomain, RasterSet,
                   Scene, Segment, rasterize)
from .measures import DiscreteMeasure, frostman, growth_check
from .partition import build_partition
from .smoothfn import GridFunction, nk_seminorm, standard_pincher, tess_partition
from .transforms import (PoissonGridSpec, cauchy_eval_pairing, cauchy_transform, poisson_kernel,
                         poisson_transform, ts_norm_estimate, vitushkin_localize)
from .wiener import (SeriesSpec, annular_test_functions, classify, classify_parametric,
                     divergence_witness, series_terms)
