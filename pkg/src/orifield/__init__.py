"""Oriented Gaussian random field textures: synthesis and wavelet analysis.

Submodules
----------
spectral   anisotropy functions and spectral densities
tensor     structure tensors, orientation, coherency
fields     field models, tangent fields, deformations
synth      seeded raster synthesis of every model family
monogenic  Riesz/wavelet analysis and estimators
rasters    .f64 + JSON raster file format, PGM/PPM export
validate   self-check suites backing the `orifield validate` command
cli        command-line interface (synth / analyze / tensor / validate)
"""

__version__ = "0.1.0"

from . import _kernels
from .errors import *  # noqa: F401,F403
from .fields import (  # noqa: F401
    AFBF,
    FBF,
    GAFBF,
    MBF,
    WAFBF,
    Deformation,
    FieldModel,
    LinearDeformed,
    ScalarField,
    SumAFBF,
    affine_conformal_deformation,
    linear_deformation,
    local_orientation,
    local_rotation_deformation,
    local_structure_tensor,
    model_from_json,
    model_to_json,
    tangent_field,
    user_deformation,
)
from .monogenic import (  # noqa: F401
    empirical_structure_tensor,
    estimate_hurst,
    monogenic_components,
    radial_profile,
    riesz_transform,
    wavelet_pyramid,
    windowed_orientation_field,
)
from .spectral import (  # noqa: F401
    Cone,
    Custom,
    Isotropic,
    LinearlyTransformed,
    Sum,
    eval_anisotropy,
    eval_spectral_density,
    spec_from_json,
    spec_to_json,
)
from .synth import (  # noqa: F401
    FieldRealization,
    Grid,
    synthesize,
    synthesize_gafbf,
    synthesize_ssi,
    synthesize_wafbf,
    unit_spectral_noise,
)
from .tensor import (  # noqa: F401
    OrientationResult,
    StructureTensor,
    afbf_tensor_closed,
    cone_limit_tensor,
    deformed_orientation,
    orientation_of,
    structure_tensor_quadrature,
    sum_afbf_tensor_closed,
)

kernel_backend = _kernels.backend_name
