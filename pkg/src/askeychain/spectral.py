"""Symmetric Hamiltonians and their analytic eigensystems.

Conjugating a reversible kernel by diag(sqrt(pi)) gives a real symmetric
matrix H(x,y) = K(x,y) sqrt(pi(y)/pi(x)) with the same spectrum, the
Perron-Frobenius vector sqrt(pi), and eigenvalues in (-1, 1].  For the
convolution kernels the full eigensystem is known in closed form: the
eigenvalues kappa(n) and the orthonormal eigenvectors
phi_n(x) = d_n sqrt(pi(x)) P_n(x).  ``numeric_spectrum`` (a dense
backward-stable symmetric eigensolve) is the independent cross-check.

Note on truncated lattices: a finite window of a semi-infinite chain
cannot carry the exact analytic eigensystem - the top modes always spill
past any window, so their columns of phi are not unit vectors and their
residuals are not small.  ``mode_norm_defects`` measures that spill
per mode; checks on truncated systems should be read against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError
from .families import ConvolutionRecipe, kappa_vector, orthonormal_columns
from .markov import ConvolutionKernel, LatticeSpec, build_kernel


def classical_hamiltonian(kernel: ConvolutionKernel) -> np.ndarray:
    """H = diag(pi)^(-1/2) K diag(pi)^(1/2), symmetrized by (H + H^T)/2.

    The input kernel must satisfy detailed balance (within tolerance),
    otherwise the result is not meaningfully symmetric.  Exact symmetry is
    enforced by averaging; the pre-averaging asymmetry is available from
    ``similarity_asymmetry`` and is recorded on spectral systems.
    """
    h = _similarity(kernel)
    return 0.5 * (h + h.T)


def similarity_asymmetry(kernel: ConvolutionKernel) -> float:
    """Max entrywise |H - H^T| of the raw similarity transform."""
    h = _similarity(kernel)
    return float(np.max(np.abs(h - h.T)))


def _similarity(kernel: ConvolutionKernel) -> np.ndarray:
    pi = kernel.pi
    if np.any(pi <= 0.0):
        raise DomainError("stationary distribution must be strictly positive")
    s = np.sqrt(pi)
    return kernel.matrix * (s[None, :] / s[:, None])


@dataclass(frozen=True)
class SpectralSystem:
    """Symmetric Hamiltonian with its closed-form eigensystem.

    ``phi[:, n]`` is the orthonormal eigenvector for ``kappas[n]``; column 0
    is sqrt(pi) with eigenvalue 1.
    """

    hamiltonian: np.ndarray
    kappas: np.ndarray
    phi: np.ndarray
    sqrt_pi: np.ndarray
    recipe: ConvolutionRecipe
    lattice: LatticeSpec
    presym_asymmetry: float

    @property
    def size(self) -> int:
        return self.hamiltonian.shape[0]

    def mode_norm_defects(self) -> np.ndarray:
        """|1 - ||phi_n||^2| per mode: the window spill of each eigenvector
        (identically ~0 on finite lattices)."""
        return np.abs(1.0 - np.sum(self.phi**2, axis=0))


def analytic_eigensystem(
    recipe: ConvolutionRecipe,
    N: int | None = None,
    tail_eps: float = 1e-12,
    kernel: ConvolutionKernel | None = None,
) -> SpectralSystem:
    """Build H, kappa(n) and the orthonormal eigenvector matrix for a recipe."""
    if kernel is None:
        kernel = build_kernel(recipe, N=N, tail_eps=tail_eps)
    asym = similarity_asymmetry(kernel)
    h = classical_hamiltonian(kernel)
    size = kernel.size
    stationary = recipe.stationary_spec(kernel.lattice.N if recipe.is_finite else None)
    phi = orthonormal_columns(stationary, npoints=size)
    kap = kappa_vector(recipe, size - 1)
    return SpectralSystem(
        hamiltonian=h,
        kappas=kap,
        phi=phi,
        sqrt_pi=np.sqrt(kernel.pi),
        recipe=recipe,
        lattice=kernel.lattice,
        presym_asymmetry=asym,
    )


def numeric_spectrum(h: np.ndarray, sym_tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending.

    Backed by a dense backward-stable symmetric eigensolver (LAPACK via
    numpy); the analytic kappa formulas never feed this path, so the two
    spectra are independent.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {h.shape}")
    if h.size and float(np.max(np.abs(h - h.T))) > sym_tol:
        raise ContractViolation("matrix is not symmetric within tolerance")
    return np.linalg.eigvalsh(h)[::-1]


def spectrum_comparison(system: SpectralSystem) -> float:
    """Max |sorted analytic kappa - sorted numeric spectrum|.

    Sorting both lists realizes the multiset matching, so degenerate
    eigenvalues pair up regardless of index order.
    """
    numeric = np.sort(numeric_spectrum(system.hamiltonian))
    analytic = np.sort(system.kappas)
    return float(np.max(np.abs(numeric - analytic)))


def eigen_residuals(system: SpectralSystem) -> np.ndarray:
    """||H phi_n - kappa(n) phi_n||_inf per mode, scaled by ||H||_inf."""
    r = system.hamiltonian @ system.phi - system.phi * system.kappas[None, :]
    hnorm = float(np.max(np.sum(np.abs(system.hamiltonian), axis=1)))
    return np.max(np.abs(r), axis=0) / hnorm


def orthonormality_defect(phi: np.ndarray) -> float:
    """max |phi^T phi - I|."""
    g = phi.T @ phi
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def completeness_defect(phi: np.ndarray) -> float:
    """max |phi phi^T - I|."""
    g = phi @ phi.T
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def left_eigen_residual(kernel: ConvolutionKernel, pol: np.ndarray, kap: float) -> float:
    """Residual of sum_x K(x,y) P_n(x) = kappa(n) P_n(y), scaled by ||P_n||_inf."""
    lhs = kernel.matrix.T @ pol
    return float(np.max(np.abs(lhs - kap * pol)) / np.max(np.abs(pol)))


def right_eigen_residual(kernel: ConvolutionKernel, pol: np.ndarray, kap: float) -> float:
    """Residual of sum_y K(x,y) pi(y) P_n(y) = kappa(n) pi(x) P_n(x), scaled
    by the sup of |pi P_n|."""
    v = kernel.pi * pol
    lhs = kernel.matrix @ v
    return float(np.max(np.abs(lhs - kap * v)) / np.max(np.abs(v)))
