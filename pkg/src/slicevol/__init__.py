"""Slice geometry and volume-bound verification for conformally foliated metrics."""

from .bounds import (
    HOLDS,
    HYPOTHESIS_NOT_MET,
    VIOLATED,
    BoundReport,
    check_remark_sec2,
    check_riemannian,
    check_thm01_future,
    check_thm01_past,
    check_thm12,
)
from .catalog import CatalogEntry, make, reference
from .expr import ParseError, differentiate, evaluate, parse, to_source
from .geometry import (
    LORENTZIAN,
    RIEMANNIAN,
    GeometryError,
    MetricSpec,
    NormalVector,
    ScalarField2,
    SliceGeometry,
    mean_curvature_extrema,
    normal_vector,
    reparameterize_by_mean_curvature,
    second_fundamental_form_ambient,
    slice_geometry,
    time_reversal,
)
from .numerics import (
    Grid,
    Homogeneous,
    QuadratureResult,
    TimeRule,
    Torus,
    central_difference,
    integrate_time,
    integrate_torus,
)
from .volume import (
    ALL,
    AllSpace,
    Box,
    VolumeSweep,
    curve_length,
    cylinder_volume,
    max_curve_length,
    slice_volume,
    slice_volume_rate,
    volume_element_monotonicity,
    volume_sweep,
)

__version__ = "0.1.0"
