"""needlecast: shape from shading by exemplar lookup.

Pipeline: depth map -> Lambertian render -> exemplar database (offline) ->
nearest-neighbour slant propagation from a boundary (online) -> Horn-Brooks
integration back to depth.
"""
from .core import (
    TILT_CAP,
    DepthMap,
    GrayImage,
    LightSource,
    NeedleMap,
    Normal,
    Orientation,
    OrientationField,
    angles_from_normal,
    normal_from_angles,
    normal_from_depth_gradient,
    wrap_angle_diff,
)
from .exemplars import (
    DistanceConfig,
    Exemplar,
    ExemplarDb,
    Probe,
    SamplingMode,
    distance,
    extract_exemplars,
    merge,
    nearest,
)
from .integrate import IntegratorConfig, integrate, pq_from_angles
from .metrics import EvalReport, avg_min_distance, depth_rmse_aligned, slant_error
from .render import RenderConfig, estimate_emax, render, shade, tilt_from_intensity
from .solver import BoundaryCondition, boundary_from_silhouette, boundary_from_truth, propagate
from .surfaces import AnalyticSurface, SurfaceId, depth_to_angles, eval_surface, make_surface

__version__ = "0.1.0"
