"""Exactly solvable reversible Markov chains from convolutions of discrete
orthogonal polynomial measures, the positive Hamiltonians they induce, and
free lattice fermions built on top."""

from .errors import (
    ContractViolation,
    DomainError,
    SingularSeriesError,
    SizeCapExceeded,
    UnsupportedCombination,
)
from .families import (
    ConvolutionRecipe,
    ConvType,
    Family,
    FamilySpec,
    LimitReport,
    hahn_to_meixner_report,
    kappa,
    kappa_vector,
    krawtchouk_to_charlier_report,
    lambda3_map,
    measure,
    measure_vector,
    meixner_to_charlier_report,
    norm_constant_sq,
    orthonormal_columns,
    polynomial,
    polynomial_vector,
    spectral_gap,
)
from .fermion import (
    CorrelationMatrix,
    FreeFermionModel,
    block_entropy,
    correlation_matrix,
    entropy_profile,
    jordan_wigner_hamiltonian,
    jordan_wigner_operators,
    jordan_wigner_spectrum,
    many_body_energies,
)
from .markov import (
    ConvolutionKernel,
    KernelReport,
    LatticeKind,
    LatticeSpec,
    build_kernel,
    kernel_entry,
    truncation_cutoff,
    verify_kernel,
)
from .spectral import (
    SpectralSystem,
    analytic_eigensystem,
    classical_hamiltonian,
    numeric_spectrum,
    spectrum_comparison,
)

__all__ = [
    "ContractViolation",
    "ConvType",
    "ConvolutionKernel",
    "ConvolutionRecipe",
    "CorrelationMatrix",
    "DomainError",
    "Family",
    "FamilySpec",
    "FreeFermionModel",
    "KernelReport",
    "LatticeKind",
    "LimitReport",
    "LatticeSpec",
    "SingularSeriesError",
    "SizeCapExceeded",
    "SpectralSystem",
    "UnsupportedCombination",
    "analytic_eigensystem",
    "block_entropy",
    "build_kernel",
    "classical_hamiltonian",
    "correlation_matrix",
    "entropy_profile",
    "hahn_to_meixner_report",
    "jordan_wigner_hamiltonian",
    "jordan_wigner_operators",
    "jordan_wigner_spectrum",
    "kappa",
    "kappa_vector",
    "kernel_entry",
    "krawtchouk_to_charlier_report",
    "lambda3_map",
    "many_body_energies",
    "measure",
    "measure_vector",
    "meixner_to_charlier_report",
    "norm_constant_sq",
    "numeric_spectrum",
    "orthonormal_columns",
    "polynomial",
    "polynomial_vector",
    "spectral_gap",
    "spectrum_comparison",
    "truncation_cutoff",
    "verify_kernel",
]

__version__ = "0.1.0"
