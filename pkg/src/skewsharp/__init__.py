"""skewsharp: uncertainty matrices, their determinant inequalities, and Gaussian saturation."""

from .linalg import (
    DensityMatrix,
    DimensionMismatch,
    EigenSystem,
    InvalidState,
    NonHermitianInput,
    NotPSD,
    SkewsharpError,
    det_hermitian,
    is_psd,
    matrix_sqrt_psd,
    spectral_decompose,
)
from .skew import (
    ObservableSet,
    TwoObsReport,
    UncertaintyReport,
    build_L,
    check_refined_rs,
    classical_matrix,
    commutator_matrix,
    covariance_matrix,
    two_obs_relations,
    wy_skew_matrix,
)

__version__ = "0.1.0"
