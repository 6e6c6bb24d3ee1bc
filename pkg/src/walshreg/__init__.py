"""Rigid gray-image registration via Walsh / fast Walsh-Hadamard
structure codes."""

from .errors import (
    DimensionError,
    EncodingError,
    ImageIOError,
    MetricError,
    ParameterError,
    WalshRegError,
)
from .geometry import (
    GrayImage,
    RigidParams,
    alignment_residual,
    difference_image,
    mm_to_px,
    warp,
)
from .imageio import load_image, save_image
from .metrics import (
    correlation_coefficient,
    entropy,
    intensity_cc,
    joint_histogram,
    mutual_information,
)
from .registration import (
    RegistrationResult,
    SearchSpec,
    evaluate_pair,
    pyramid_search,
    register,
)
from .structure_codes import (
    DigitOrdering,
    StructureCodeImage,
    digit_ordering,
    encode_code,
    encode_image,
    normalize,
    quantize_digit,
)
from .transforms import (
    CoefficientBlock,
    HadamardPlan,
    OpCounter,
    WalshBasis3,
    direct_oracle,
    fwht_1d,
    fwht_2d,
    hadamard_matrix,
    hadamard_plan,
    inverse_fwht_2d,
    sequency_permutation,
    walsh3_basis,
    walsh3_forward,
)

__version__ = "0.1.0"
