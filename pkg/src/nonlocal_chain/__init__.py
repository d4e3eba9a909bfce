"""Nonlocal harmonic chains built as matrix functions of the next-neighbour Laplacian."""

from .chain_model import (
    AdmissibilityReport,
    ChainConfig,
    CirculantLaplacian,
    Density,
    ExplicitTerms,
    GaussianFamily,
    PerParticle,
    Term,
    build_laplacian,
    difference_form_energy,
    elastic_energy_difference_form,
    stencil_power,
    validate_admissibility,
)
from .continuum import (
    ContinuumKernelSpec,
    InfiniteLine,
    KernelTerm,
    Periodic,
    Strong,
    Weak,
    classify_nonlocality,
    continuum_dispersion,
    gaussian_kernel_realspace,
    moment_check,
    modulus_transform,
    renormalize,
)
from .dynamics import (
    DisplacementState,
    ModalState,
    evolve_exact,
    evolve_verlet,
    simulate,
    total_energy,
)
from .errors import (
    AdmissibilityError,
    InputError,
    NumericalError,
    QuadratureError,
    StabilityError,
    SynthesisError,
    TranslationalInvarianceViolation,
    TruncationError,
)
from .inverse import (
    GaussianBenchmark,
    LongWaveData,
    gaussian_critical_points,
    gaussian_dispersion,
    gaussian_limit_regimes,
    reconstruct_dispersion,
    reconstruct_potential_coefficients,
)
from .spectral import (
    BlochBasis,
    DispersionTable,
    dispersion,
    eigenvalues,
    group_velocity,
    infinite_chain_element,
    periodized_first_row,
    synthesize_laplacian,
)

__version__ = "0.1.0"
