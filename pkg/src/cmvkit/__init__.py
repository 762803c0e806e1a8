"""Rotated CMV matrices, orthogonal polynomials on the unit circle and transfer matrices."""

from .cmv import (
    BandedUnitary,
    ThetaBlock,
    build_cmv,
    build_extended,
    build_LM,
    conjugation_residuals,
    conjugators,
    evolve,
    factorization_residual,
    split_at,
    split_factors,
    walk_operator,
)
from .coefficients import (
    CoefficientSchedule,
    MeasureSpec,
    builtin_schedule,
    moments,
    rho_from_alpha,
    verblunsky_from_measure,
)
from .gz import (
    EquivalenceReport,
    GZState,
    Transfer2x2,
    gz_transfer,
    gz_transfer_inv,
    half_lattice_seeds,
    propagate,
    verify_equivalence,
)
from .opuc import (
    ComplexPoly,
    PolyPair,
    cd_kernel,
    gram_schmidt_oracle,
    opuc_sequence,
    pairing_identity,
    reverse,
    rotated_reverse,
    szego_backward,
    szego_forward,
)
from .tolerances import ToleranceBreach, tolerance
from .weyl import (
    WeylSample,
    caratheodory,
    rotation_invariance_check,
    second_kind_integral,
    weyl_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
