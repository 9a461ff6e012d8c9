"""Reversible Markov kernels built by convolving orthogonality measures.

A kernel entry K(x, y) is the probability of moving from y to x, so columns
sum to 1.  The three convolution types combine two measures pi(., lambda2)
and pi(., lambda1):

    type i  : K(x,y) = sum_{z=0}^{min(x,y)}          pi(x-z, N-z, l2) pi(z, y, l1)
    type ii : K(x,y) = sum_{z=max(0,x+y-N)}^{min(x,y)} pi(x-z, N-y, l2) pi(z, y, l1)
    type iii: K(x,y) = sum_{z=max(x,y)}^{N}           pi(x, z, l2) pi(z-y, N-y, l1)

and the stationary distribution is the measure of the mapped family
lambda3 (see ``families.lambda3_map``).  The builders below evaluate the
two factors on whole index grids (in log space, exponentiated once) and
reduce each type to a matrix product or a per-column convolution; columns
are mathematically independent, so construction parallelizes trivially and
the finished kernel is immutable.

``kernel_entry`` is the direct per-entry reference sum.  It is the slow
path the vectorized builders are tested against, and for semi-infinite
type iii sums it terminates adaptively (three consecutive terms below
1e-16 of the partial sum with a decreasing term ratio).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .families import (
    ConvolutionRecipe,
    ConvType,
    Family,
    FamilySpec,
    log_measure,
    log_measure_grid,
    measure,
    measure_vector,
)


class LatticeKind(str, Enum):
    FINITE = "finite"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class LatticeSpec:
    """Retained lattice window: {0..N} exactly, or a certified truncation.

    For truncated lattices ``tail_bound`` certifies sum_{x>M} pi(x) (ratio
    bound, not summation), and ``col_deficiency`` records the worst
    column-sum deficit actually measured when the window was fixed.
    """

    kind: LatticeKind
    npoints: int
    tail_eps: float | None = None
    tail_bound: float | None = None
    col_deficiency: float | None = None

    @property
    def N(self) -> int:
        return self.npoints - 1

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "npoints": self.npoints}
        if self.kind is LatticeKind.TRUNCATED:
            d.update(
                tail_eps=self.tail_eps,
                tail_bound=self.tail_bound,
                col_deficiency=self.col_deficiency,
            )
        return d


@dataclass(frozen=True)
class ConvolutionKernel:
    """Dense column-stochastic kernel with its stationary distribution."""

    matrix: np.ndarray
    pi: np.ndarray
    recipe: ConvolutionRecipe
    lattice: LatticeSpec

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# truncation of semi-infinite lattices
# ---------------------------------------------------------------------------


def stationary_tail_bound(spec: FamilySpec, M: int) -> float:
    """Certified upper bound on sum_{x>M} pi(x) from the term-ratio bound.

    Both semi-infinite measures have eventually decreasing term ratios
    r(x) = pi(x+1)/pi(x); past M the tail is dominated by the geometric
    series pi(M+1) / (1 - r) with r = sup_{x>M} r(x).
    """
    if spec.family is Family.CHARLIER:
        (a,) = spec.params
        r = a / (M + 2)
    elif spec.family is Family.MEIXNER:
        a, b = spec.params
        # ratio b (a+x)/(x+1): decreasing in x for a > 1, else below b
        r = b * max(1.0, (a + M + 1) / (M + 2))
    else:
        raise DomainError(f"{spec.family.value} lattice is finite; no truncation")
    if r >= 1.0:
        return math.inf
    # tiny headroom keeps the certificate valid under float rounding (the
    # bound is an analytic equality for Meixner at a = 1)
    return measure(spec, M + 1) / (1.0 - r) * (1.0 + 1e-10)


def truncation_cutoff(spec: FamilySpec, tail_eps: float) -> int:
    """Smallest window end M (within a coarse scan) with a certified tail
    bound sum_{x>M} pi(x) <= tail_eps."""
    if not 0.0 < tail_eps <= 1e-6:
        raise DomainError(f"tail_eps must lie in (0, 1e-6], got {tail_eps}")
    if spec.family is Family.CHARLIER:
        (a,) = spec.params
        mean, sd = a, math.sqrt(a)
    elif spec.family is Family.MEIXNER:
        a, b = spec.params
        mean = a * b / (1.0 - b)
        sd = math.sqrt(a * b) / (1.0 - b)
    else:
        raise DomainError(f"{spec.family.value} lattice is finite; no truncation")
    M = max(4, int(mean + 10.0 * sd) + 4)
    while stationary_tail_bound(spec, M) > tail_eps:
        M += max(2, M // 8)
    while M > 4 and stationary_tail_bound(spec, M - 1) <= tail_eps:
        M -= 1
    return M


def _measure_tail_cutoff(fam: Family, params: tuple[float, ...], eps: float) -> int:
    """Window after which a semi-infinite factor measure has tail <= eps."""
    spec = FamilySpec(fam, params)
    m = 4
    while stationary_tail_bound(spec, m) > eps:
        m += max(2, m // 8)
    return m


# ---------------------------------------------------------------------------
# vectorized builders
# ---------------------------------------------------------------------------


def _build_matrix(recipe: ConvolutionRecipe, size: int) -> np.ndarray:
    factor2, factor1 = recipe.factors
    N = size - 1
    if recipe.conv_type is ConvType.I:
        x, z = np.indices((size, size))
        with np.errstate(invalid="ignore"):
            a = np.exp(log_measure_grid(factor2.family, factor2.params, x - z, N - z))
        z2, y = np.indices((size, size))
        b = np.exp(log_measure_grid(factor1.family, factor1.params, z2, y))
        return a @ b
    if recipe.conv_type is ConvType.II:
        out = np.empty((size, size))
        for y in range(size):
            u = np.arange(N - y + 1)
            v2 = np.exp(
                log_measure_grid(factor2.family, factor2.params, u, np.full(N - y + 1, N - y))
            )
            zz = np.arange(y + 1)
            v1 = np.exp(
                log_measure_grid(factor1.family, factor1.params, zz, np.full(y + 1, y))
            )
            out[:, y] = np.convolve(v2, v1)
        return out
    # type iii: the z sum runs past the window for semi-infinite lattices
    if recipe.is_finite:
        zmax = N
    else:
        # extend z until the remaining lambda1 tail cannot move any entry
        zmax = N + _measure_tail_cutoff(factor1.family, factor1.params, 1e-18)
    x, z = np.indices((size, zmax + 1))
    e = np.exp(log_measure_grid(factor2.family, factor2.params, x, z))
    z2, y = np.indices((zmax + 1, size))
    g = np.exp(log_measure_grid(factor1.family, factor1.params, z2 - y, N - y))
    return e @ g


def build_kernel(
    recipe: ConvolutionRecipe,
    N: int | None = None,
    tail_eps: float = 1e-12,
    col_target: float | None = None,
    max_points: int = 2000,
) -> ConvolutionKernel:
    """Construct the kernel with its stationary distribution attached.

    Finite families need the lattice size N.  Semi-infinite families are
    truncated: the window starts at the certified stationary-tail cutoff
    for ``tail_eps`` and is enlarged until the worst column-sum deficit is
    at most ``col_target`` (default 10 * tail_eps) or ``max_points`` is
    reached; the achieved deficit is recorded on the lattice spec.  The
    stationary vector is always recomputed from the lambda3 parameter map,
    never from a numeric eigenvector.
    """
    if recipe.is_finite:
        if N is None:
            raise DomainError(f"{recipe.family.value} kernels need a lattice size N")
        matrix = _build_matrix(recipe, N + 1)
        pi = measure_vector(recipe.stationary_spec(N))
        lattice = LatticeSpec(LatticeKind.FINITE, N + 1)
        return ConvolutionKernel(matrix, pi, recipe, lattice)
    if N is not None:
        # explicit window override (small oracle runs); no adaptation
        matrix = _build_matrix(recipe, N + 1)
        pi = measure_vector(recipe.lambda3, N + 1)
        lattice = LatticeSpec(
            LatticeKind.TRUNCATED,
            N + 1,
            tail_eps=tail_eps,
            tail_bound=stationary_tail_bound(recipe.lambda3, N),
            col_deficiency=float(np.max(np.abs(matrix.sum(axis=0) - 1.0))),
        )
        return ConvolutionKernel(matrix, pi, recipe, lattice)
    if col_target is None:
        col_target = 10.0 * tail_eps
    M = truncation_cutoff(recipe.lambda3, tail_eps)
    while True:
        matrix = _build_matrix(recipe, M + 1)
        deficiency = float(np.max(np.abs(matrix.sum(axis=0) - 1.0)))
        if deficiency <= col_target or M + 1 >= max_points:
            break
        nxt = min(max(M + 8, int(M * 1.25)), max_points - 1)
        # never grow past the representable range of the stationary vector
        # (pi must stay strictly positive for the similarity transform)
        while nxt > M and log_measure(recipe.lambda3, nxt) <= -700.0:
            nxt -= max(1, (nxt - M) // 4)
        if nxt == M:
            break
        M = nxt
    pi = measure_vector(recipe.lambda3, M + 1)
    lattice = LatticeSpec(
        LatticeKind.TRUNCATED,
        M + 1,
        tail_eps=tail_eps,
        tail_bound=stationary_tail_bound(recipe.lambda3, M),
        col_deficiency=deficiency,
    )
    return ConvolutionKernel(matrix, pi, recipe, lattice)


# ---------------------------------------------------------------------------
# reference entry (slow path, also the independent oracle in the tests)
# ---------------------------------------------------------------------------


def kernel_entry(recipe: ConvolutionRecipe, x: int, y: int, N: int | None = None) -> float:
    """K(x, y) by direct summation of the defining convolution."""
    factor2, factor1 = recipe.factors
    if recipe.is_finite:
        if N is None:
            raise DomainError(f"{recipe.family.value} entries need the lattice size N")
        if not (0 <= x <= N and 0 <= y <= N):
            raise DomainError(f"entry ({x},{y}) outside lattice 0..{N}")
    elif x < 0 or y < 0:
        raise DomainError(f"entry ({x},{y}) outside the nonnegative lattice")
    if recipe.conv_type is ConvType.I:
        # the lambda2 slot is sizeless for the semi-infinite kernels
        return math.fsum(
            factor2.at(x - z, N - z if N is not None else 0) * factor1.at(z, y)
            for z in range(min(x, y) + 1)
        )
    if recipe.conv_type is ConvType.II:
        return math.fsum(
            factor2.at(x - z, N - y) * factor1.at(z, y)
            for z in range(max(0, x + y - N), min(x, y) + 1)
        )
    if recipe.is_finite:
        return math.fsum(
            factor2.at(x, z) * factor1.at(z - y, N - y) for z in range(max(x, y), N + 1)
        )
    # semi-infinite type iii: adaptive termination
    total = 0.0
    small_run = 0
    prev_term = math.inf
    z = max(x, y)
    while True:
        term = factor2.at(x, z) * factor1.at(z - y, 0)
        total += term
        if term <= 1e-16 * total and term < prev_term:
            small_run += 1
            if small_run >= 3:
                return total
        else:
            small_run = 0
        prev_term = term
        z += 1


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

#: default tolerances for verify_kernel, by lattice kind
DEFAULT_KERNEL_TOL = {LatticeKind.FINITE: 1e-12, LatticeKind.TRUNCATED: 1e-10}


@dataclass(frozen=True)
class KernelReport:
    """Measured kernel-invariant violations; verification reports, it never
    raises.  ``passed`` covers the tolerance checks; ``positivity`` is
    reported alongside (an identity kernel with uniform pi passes the
    tolerances trivially while failing strict positivity)."""

    max_stochastic_violation: float
    max_reversibility_violation: float
    positivity: bool
    tol: float
    passed: bool


def verify_kernel(kernel: ConvolutionKernel, tol: float | None = None) -> KernelReport:
    """Check column sums, detailed balance and positivity against ``tol``.

    The detailed-balance violation is max |K(x,y) pi(y) - K(y,x) pi(x)|
    normalized by the largest entry of the flux matrix K(x,y) pi(y).
    Strict positivity (all points connected) is a finite-lattice property;
    on truncated windows the far off-diagonal entries legitimately
    underflow, so only nonnegativity is required there.
    """
    if tol is None:
        tol = DEFAULT_KERNEL_TOL[kernel.lattice.kind]
    k = kernel.matrix
    stoch = float(np.max(np.abs(k.sum(axis=0) - 1.0)))
    flux = k * kernel.pi[None, :]
    rev = float(np.max(np.abs(flux - flux.T)) / np.max(flux))
    if kernel.lattice.kind is LatticeKind.FINITE:
        positivity = bool(np.all(k > 0.0))
    else:
        positivity = bool(np.all(k >= 0.0))
    passed = stoch <= tol and rev <= tol
    return KernelReport(stoch, rev, positivity, tol, passed)


def perron_frobenius_residual(kernel: ConvolutionKernel) -> float:
    """Max entrywise distance between the numeric eigenvector of the largest
    kernel eigenvalue (normalized to sum 1) and the analytic pi."""
    vals, vecs = np.linalg.eig(kernel.matrix)
    lead = np.argmax(vals.real)
    v = vecs[:, lead].real
    v = v / v.sum()
    return float(np.max(np.abs(v - kernel.pi)))


def eigenvalue_moduli_excess(kernel: ConvolutionKernel) -> float:
    """max |eigenvalue| - 1 of the kernel (should not exceed ~1e-12)."""
    vals = np.linalg.eigvals(kernel.matrix)
    return float(np.max(np.abs(vals)) - 1.0)
