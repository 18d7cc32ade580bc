"""Determinants of Friedrichs Laplacians for flat conical metrics on Riemann surfaces.

Genus 1 is fully explicit; genus >= 2 is computed up to a moduli-dependent
constant. The cone submodule carries the heat-kernel coefficients entering
the angle factors, together with an independent asymptotic-fit extractor
used to cross-validate them.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConvergenceError,
    DomainError,
    PolydetError,
    SchemaError,
    VerificationError,
)
from .special import (  # noqa: F401
    HALF_HALF,
    PeriodMatrix,
    ThetaCharacteristic,
    TorusModulus,
    dedekind_eta,
    fay_sigma,
    jacobi_theta,
    jacobi_theta_z_derivative,
    macdonald_k0,
    prime_form,
    riemann_theta,
)
from .cone import (  # noqa: F401
    ConeData,
    ConeFitResult,
    SpectralCoefficients,
    a_mu,
    coefficient_I,
    coefficient_I_numeric,
    coefficient_Itilde,
    coefficient_d,
    cone_heat_kernel,
    hadamard_coth_integral,
    itilde_primitive,
    spectral_coefficients,
)
from .torus import (  # noqa: F401
    DetResult,
    TorusMetricSpec,
    torus_D,
    torus_area,
    torus_c0,
    torus_log_det,
    torus_phi,
)
from .highergenus import (  # noqa: F401
    HigherGenusMetricSpec,
    SurfacePack,
    higher_genus_D,
    higher_genus_log_det,
    load_bundled_pack,
    phi_potential,
    q_bilinear,
    u_j_holomorphic_part,
)
from .variation import (  # noqa: F401
    AngleVariation,
    PointVariation,
    ScaleVariation,
    ScalingReport,
    VariationCoefficients,
    VariationReport,
    torus_A_coefficients,
    verify_variation,
    verify_variation_scaling,
    zeta_calc_rhs,
)
