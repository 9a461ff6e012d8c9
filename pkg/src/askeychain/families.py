"""Discrete orthogonal polynomial families and their convolution recipes.

Five families are implemented: Krawtchouk (K), Charlier (C), Hahn (H),
Meixner (M) and q-Hahn (qH).  For each one this module provides the
normalized orthogonality measure pi, the polynomials P_n normalized to
P_n(0) = 1, the squared norm constants d_n^2, the orthonormal functions
phi_n(x) = d_n sqrt(pi(x)) P_n(x), and the parameter maps lambda3 /
eigenvalue formulas kappa(n) for the three convolution types that turn a
pair of measures into a reversible Markov kernel.

Polynomial values are produced by the three-term recurrence in the degree
(started from P_0 = 1), not by summing the defining hypergeometric series:
the series terms alternate in sign and cancel catastrophically for degrees
and lattice points past ~25, while the recurrence stays accurate through
the lattice sizes supported here.  The series evaluators in ``specfun``
remain the small-instance cross-check.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gammaln

from . import specfun
from .errors import DomainError, UnsupportedCombination


class Family(str, Enum):
    KRAWTCHOUK = "krawtchouk"
    CHARLIER = "charlier"
    HAHN = "hahn"
    MEIXNER = "meixner"
    Q_HAHN = "qhahn"


#: Families living on the finite lattice {0..N}; the other two live on the
#: nonnegative integers and are truncated numerically.
FINITE_FAMILIES = frozenset({Family.KRAWTCHOUK, Family.HAHN, Family.Q_HAHN})

_PARAM_NAMES = {
    Family.KRAWTCHOUK: ("p",),
    Family.CHARLIER: ("a",),
    Family.HAHN: ("a", "b"),
    Family.MEIXNER: ("a", "b"),
    Family.Q_HAHN: ("a", "b", "q"),
}


@dataclass(frozen=True)
class FamilySpec:
    """A polynomial family together with its parameters and lattice size.

    ``N`` is the finite lattice size (points 0..N) and must be None for the
    semi-infinite families (Charlier, Meixner).
    """

    family: Family
    params: tuple[float, ...]
    N: int | None = None

    def __post_init__(self) -> None:
        names = _PARAM_NAMES[self.family]
        if len(self.params) != len(names):
            raise DomainError(
                f"{self.family.value} takes parameters {names}, got {self.params}"
            )
        if self.family in FINITE_FAMILIES:
            if self.N is None or self.N < 0:
                raise DomainError(f"{self.family.value} needs a lattice size N >= 0")
        elif self.N is not None:
            raise DomainError(f"{self.family.value} lives on Z>=0; N must be None")
        f, p = self.family, self.params
        if f is Family.KRAWTCHOUK and not 0.0 < p[0] < 1.0:
            raise DomainError(f"krawtchouk needs 0 < p < 1, got p={p[0]}")
        if f is Family.CHARLIER and not p[0] > 0.0:
            raise DomainError(f"charlier needs a > 0, got a={p[0]}")
        if f is Family.HAHN and not (p[0] > 0.0 and p[1] > 0.0):
            raise DomainError(f"hahn needs a, b > 0, got {p}")
        if f is Family.MEIXNER and not (p[0] > 0.0 and 0.0 < p[1] < 1.0):
            raise DomainError(f"meixner needs a > 0 and 0 < b < 1, got {p}")
        if f is Family.Q_HAHN:
            a, b, q = p
            if not (0.0 < a < 1.0 and b < 1.0 and 0.0 < q < 1.0):
                raise DomainError(
                    f"qhahn needs 0 < a < 1, b < 1, 0 < q < 1, got {p}"
                )

    @property
    def is_finite(self) -> bool:
        return self.family in FINITE_FAMILIES

    @property
    def size(self) -> int:
        if self.N is None:
            raise DomainError("semi-infinite family has no intrinsic size")
        return self.N + 1

    def to_string(self) -> str:
        parts = [
            f"{name}={value!r}"
            for name, value in zip(_PARAM_NAMES[self.family], self.params)
        ]
        if self.N is not None:
            parts.append(f"N={self.N}")
        return f"{self.family.value}:" + ",".join(parts)

    @classmethod
    def from_string(cls, text: str) -> "FamilySpec":
        m = re.fullmatch(r"(\w+):(.*)", text.strip())
        if not m:
            raise DomainError(f"cannot parse family spec {text!r}")
        try:
            family = Family(m.group(1))
        except ValueError:
            raise DomainError(f"unknown family {m.group(1)!r}") from None
        kv: dict[str, str] = {}
        for item in m.group(2).split(","):
            k, _, v = item.partition("=")
            if not _:
                raise DomainError(f"malformed item {item!r} in {text!r}")
            kv[k.strip()] = v.strip()
        names = _PARAM_NAMES[family]
        unknown = set(kv) - set(names) - {"N"}
        if unknown:
            raise DomainError(f"unknown keys {sorted(unknown)} for {family.value}")
        missing = set(names) - set(kv)
        if missing:
            raise DomainError(f"missing keys {sorted(missing)} for {family.value}")
        params = tuple(float(kv[name]) for name in names)
        N = int(kv["N"]) if "N" in kv else None
        return cls(family, params, N)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------


def _check_point(spec: FamilySpec, x: int) -> None:
    if x < 0 or (spec.N is not None and x > spec.N):
        raise DomainError(f"lattice point {x} outside {spec.to_string()}")


def log_measure(spec: FamilySpec, x: int) -> float:
    """Natural log of the normalized orthogonality measure pi(x)."""
    _check_point(spec, x)
    f, p, N = spec.family, spec.params, spec.N
    if f is Family.KRAWTCHOUK:
        (pp,) = p
        return (
            specfun.log_binomial(N, x)
            + x * math.log(pp)
            + (N - x) * math.log1p(-pp)
        )
    if f is Family.CHARLIER:
        (a,) = p
        return x * math.log(a) - a - math.lgamma(x + 1)
    if f is Family.HAHN:
        a, b = p
        return (
            specfun.log_binomial(N, x)
            + specfun.log_pochhammer(a, x).log
            + specfun.log_pochhammer(b, N - x).log
            - specfun.log_pochhammer(a + b, N).log
        )
    if f is Family.MEIXNER:
        a, b = p
        return (
            specfun.log_pochhammer(a, x).log
            + x * math.log(b)
            + a * math.log1p(-b)
            - math.lgamma(x + 1)
        )
    a, b, q = p
    return (
        math.log(specfun.q_binomial(N, x, q))
        + specfun.q_pochhammer(a, q, x).log
        + specfun.q_pochhammer(b, q, N - x).log
        + (N - x) * math.log(a)
        - specfun.q_pochhammer(a * b, q, N).log
    )


def measure(spec: FamilySpec, x: int) -> float:
    """pi(x): strictly positive; sums to 1 over the family's lattice."""
    return math.exp(log_measure(spec, x))


def _log_qpoch_prefix(w: float, q: float, kmax: int) -> np.ndarray:
    """Array L[k] = ln (w;q)_k for k = 0..kmax; requires all factors > 0."""
    k = np.arange(kmax)
    factors = 1.0 - w * q**k
    if np.any(factors <= 0.0):
        raise DomainError(f"nonpositive q-pochhammer factor for w={w}, q={q}")
    out = np.zeros(kmax + 1)
    np.cumsum(np.log(factors), out=out[1:])
    return out


def log_measure_grid(
    family: Family, params: tuple[float, ...], pts: np.ndarray, sizes: np.ndarray
) -> np.ndarray:
    """Vectorized ln pi(pts) with per-entry lattice size ``sizes``.

    Semi-infinite families ignore ``sizes``.  Entries where pts is outside
    the lattice are returned as -inf.  Used by the kernel builders, where
    the two measure factors are evaluated on whole index grids at once.
    """
    pts = np.asarray(pts)
    sizes = np.asarray(sizes)
    if family in FINITE_FAMILIES:
        valid = (pts >= 0) & (pts <= sizes)
    else:
        valid = pts >= 0
    x = np.clip(pts, 0, None)
    n = np.clip(sizes, 0, None)
    x = np.minimum(x, n) if family in FINITE_FAMILIES else x
    if family is Family.KRAWTCHOUK:
        (p,) = params
        out = (
            gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1)
            + x * math.log(p) + (n - x) * math.log1p(-p)
        )
    elif family is Family.CHARLIER:
        (a,) = params
        out = x * math.log(a) - a - gammaln(x + 1)
    elif family is Family.HAHN:
        a, b = params
        out = (
            gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1)
            + gammaln(a + x) - gammaln(a)
            + gammaln(b + n - x) - gammaln(b)
            - gammaln(a + b + n) + gammaln(a + b)
        )
    elif family is Family.MEIXNER:
        a, b = params
        out = (
            gammaln(a + x) - gammaln(a)
            + x * math.log(b) + a * math.log1p(-b)
            - gammaln(x + 1)
        )
    else:
        a, b, q = params
        kmax = int(n.max()) if n.size else 0
        lqf = _log_qpoch_prefix(q, q, kmax)  # ln (q;q)_k, k = 0..kmax
        la = _log_qpoch_prefix(a, q, kmax)
        lb = _log_qpoch_prefix(b, q, kmax)
        lab = _log_qpoch_prefix(a * b, q, kmax)
        out = (
            lqf[n] - lqf[x] - lqf[n - x]
            + la[x] + lb[n - x] + (n - x) * math.log(a) - lab[n]
        )
    return np.where(valid, out, -np.inf)


def measure_vector(spec: FamilySpec, npoints: int | None = None) -> np.ndarray:
    """pi over lattice points 0..npoints-1 (defaults to the full finite lattice)."""
    if npoints is None:
        npoints = spec.size
    if spec.is_finite and npoints > spec.size:
        raise DomainError(f"window {npoints} exceeds lattice size {spec.size}")
    x = np.arange(npoints)
    sizes = np.full(npoints, spec.N if spec.N is not None else 0)
    return np.exp(log_measure_grid(spec.family, spec.params, x, sizes))


# ---------------------------------------------------------------------------
# three-term recurrence data and polynomial evaluation
# ---------------------------------------------------------------------------


def recurrence_coefficients(spec: FamilySpec, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients A_n, C_n of theta(x) P_n = A_n P_{n+1} - (A_n + C_n) P_n + C_n P_{n-1}.

    theta(x) is -x for the classical families and q^(-x) - 1 for q-Hahn
    (whose polynomials are polynomials in that variable, not in x).
    Returned for n = 0..nmax; C_0 = 0 always.
    """
    n = np.arange(nmax + 1, dtype=float)
    f, p = spec.family, spec.params
    if f is Family.KRAWTCHOUK:
        (pp,) = p
        A = pp * (spec.N - n)
        C = n * (1.0 - pp)
    elif f is Family.CHARLIER:
        (a,) = p
        A = np.full(nmax + 1, a)
        C = n.copy()
    elif f is Family.MEIXNER:
        a, b = p
        A = b * (n + a) / (1.0 - b)
        C = n / (1.0 - b)
    elif f is Family.HAHN:
        a, b = p
        N = spec.N
        with np.errstate(divide="ignore", invalid="ignore"):
            A = (n + a + b - 1) * (n + a) * (N - n) / ((2 * n + a + b - 1) * (2 * n + a + b))
        # the (a+b-1) factors cancel at n = 0; the closed form avoids 0/0 at a+b = 1
        A[0] = a * N / (a + b)
        C = np.zeros(nmax + 1)
        if nmax >= 1:
            m = n[1:]
            C[1:] = m * (m + a + b + N - 1) * (m + b - 1) / ((2 * m + a + b - 2) * (2 * m + a + b - 1))
    else:
        a, b, q = p
        N = spec.N
        qn = q**n
        with np.errstate(divide="ignore", invalid="ignore"):
            A = (
                (1 - a * qn) * (1 - a * b * qn / q) * (1 - qn * q ** (-N))
                / ((1 - a * b * qn * qn / q) * (1 - a * b * qn * qn))
            )
        # (1 - ab/q) cancels between numerator and denominator at n = 0
        A[0] = (1 - a) * (1 - q ** (-N)) / (1 - a * b)
        C = np.zeros(nmax + 1)
        if nmax >= 1:
            m = n[1:]
            qm = qn[1:]
            C[1:] = (
                -a * qm * q ** (-N - 1)
                * (1 - qm) * (1 - a * b * qm * q ** (N - 1)) * (1 - b * qm / q)
                / ((1 - a * b * qm * qm / (q * q)) * (1 - a * b * qm * qm / q))
            )
    return A, C


def site_values(spec: FamilySpec, npoints: int) -> np.ndarray:
    """theta(x) over the lattice window: -x, or q^(-x) - 1 for q-Hahn."""
    x = np.arange(npoints, dtype=float)
    if spec.family is Family.Q_HAHN:
        q = spec.params[2]
        return np.expm1(-x * math.log(q))
    return -x


def polynomial_vector(spec: FamilySpec, n: int, npoints: int | None = None) -> np.ndarray:
    """P_n over the lattice window.

    Recovered from the orthonormal basis as phi_n / (d_n sqrt(pi)) in log
    space: running the bare-polynomial recurrence directly is unstable
    wherever P_n is the recessive solution (already at x = 0, where the
    normalized value 1 sits under generically growing neighbors).
    """
    if npoints is None:
        npoints = spec.size
    if n < 0 or (spec.is_finite and n > spec.N):
        raise DomainError(f"degree {n} outside lattice of {spec.to_string()}")
    if n == 0:
        return np.ones(npoints)
    window = spec.size if spec.is_finite else max(npoints, n + 1)
    phi = orthonormal_columns(spec, window)[:npoints, n]
    x = np.arange(npoints)
    sizes = np.full(npoints, spec.N if spec.N is not None else 0)
    half_log_pi = 0.5 * log_measure_grid(spec.family, spec.params, x, sizes)
    with np.errstate(over="ignore"):
        return np.sign(phi) * np.exp(
            np.log(np.abs(phi), where=phi != 0.0, out=np.full(npoints, -np.inf))
            - 0.5 * _log_norm_sq(spec, n)
            - half_log_pi
        )


def polynomial(spec: FamilySpec, n: int, x: int) -> float:
    """P_n(x) with the normalization P_n(0) = 1 (exactly, by convention)."""
    _check_point(spec, x)
    if x == 0:
        if n < 0 or (spec.is_finite and n > spec.N):
            raise DomainError(f"degree {n} outside lattice of {spec.to_string()}")
        return 1.0
    return float(polynomial_vector(spec, n, x + 1)[x])


def _log_norm_sq(spec: FamilySpec, n: int) -> float:
    if n < 0 or (spec.is_finite and n > spec.N):
        raise DomainError(f"degree {n} outside lattice of {spec.to_string()}")
    if n == 0:
        return 0.0
    f, p, N = spec.family, spec.params, spec.N
    if f is Family.KRAWTCHOUK:
        (pp,) = p
        return specfun.log_binomial(N, n) + n * (math.log(pp) - math.log1p(-pp))
    if f is Family.CHARLIER:
        (a,) = p
        return n * math.log(a) - math.lgamma(n + 1)
    if f is Family.HAHN:
        a, b = p
        return (
            specfun.log_binomial(N, n)
            + specfun.log_pochhammer(a, n).log
            - specfun.log_pochhammer(b, n).log
            + math.log(2 * n + a + b - 1)
            + specfun.log_pochhammer(a + b, N).log
            - specfun.log_pochhammer(n + a + b - 1, N + 1).log
        )
    if f is Family.MEIXNER:
        a, b = p
        return specfun.log_pochhammer(a, n).log + n * math.log(b) - math.lgamma(n + 1)
    a, b, q = p
    # (ab q^{-1}; q)_n / (1 - ab q^{-1}) = (ab; q)_{n-1}, written so that
    # ab ~ q never produces 0/0
    return (
        math.log(specfun.q_binomial(N, n, q))
        + specfun.q_pochhammer(a, q, n).log
        + specfun.q_pochhammer(a * b, q, n - 1).log
        + math.log1p(-a * b * q ** (2 * n - 1))
        - specfun.q_pochhammer(a * b * q**N, q, n).log
        - specfun.q_pochhammer(b, q, n).log
        - n * math.log(a)
    )


def norm_constant_sq(spec: FamilySpec, n: int) -> float:
    """d_n^2 > 0 making d_n sqrt(pi) P_n orthonormal; d_0^2 = 1."""
    return math.exp(_log_norm_sq(spec, n))


_CLIP = 1e150  # keeps runaway recurrence branches finite (they are discarded)
_VALID_BOUND = 1.0 + 1e-6  # orthonormal entries cannot exceed 1


def _weighted_setup(spec: FamilySpec, npoints: int):
    theta = site_values(spec, npoints)
    x = np.arange(npoints)
    sizes = np.full(npoints, spec.N if spec.N is not None else 0)
    half_log_pi = 0.5 * log_measure_grid(spec.family, spec.params, x, sizes)
    A, C = recurrence_coefficients(spec, npoints - 1)
    b = np.sign(A[:-1]) * np.sqrt(A[:-1] * C[1:])
    return theta, np.exp(half_log_pi), A, C, b


def _upward_pass(theta, phi0, A, C, b, npoints):
    u = np.empty((npoints, npoints))
    u[:, 0] = phi0
    if npoints == 1:
        return u
    with np.errstate(over="ignore", invalid="ignore"):
        u[:, 1] = (theta + A[0] + C[0]) * u[:, 0] / b[0]
        np.clip(u[:, 1], -_CLIP, _CLIP, out=u[:, 1])
        for k in range(1, npoints - 1):
            u[:, k + 1] = ((theta + A[k] + C[k]) * u[:, k] - b[k - 1] * u[:, k - 1]) / b[k]
            np.clip(u[:, k + 1], -_CLIP, _CLIP, out=u[:, k + 1])
    return u


def orthonormal_columns(spec: FamilySpec, npoints: int | None = None) -> np.ndarray:
    """Matrix whose column n is phi_n(x) = d_n sqrt(pi(x)) P_n(x).

    The recurrence runs directly on the weighted functions (entries stay
    O(1)); the symmetrized off-diagonal coefficient is b_n = sign(A_n)
    sqrt(A_n C_{n+1}), from d_{n+1}/d_n = sqrt(A_n / C_{n+1}).

    Upward recurrence in the degree is stable only up to the envelope peak
    of each lattice row; past it the true value is the recessive solution
    and rounding noise takes over (catastrophically so for q-Hahn).  Two
    stable schemes cover all cases:

    * finite families terminate exactly at the top (A_N = 0), so each row
      is built from an upward pass anchored at phi_0 = sqrt(pi) and a
      downward pass anchored at the top, spliced where the log-ratio of
      the two passes is flattest (their mutual trust zone);
    * Charlier and Meixner are self-dual with d_n^2 pi(x) symmetric in
      (n, x), so the matrix itself is symmetric: the upward pass fills the
      stable wedge n <= x and the rest is its mirror image.
    """
    if npoints is None:
        npoints = spec.size
    if spec.is_finite and npoints != spec.size:
        raise DomainError("finite-family basis must use the full lattice")
    theta, phi0, A, C, b = _weighted_setup(spec, npoints)
    u = _upward_pass(theta, phi0, A, C, b, npoints)
    if npoints == 1:
        return u
    if not spec.is_finite:
        # symmetric matrix: keep the wedge n <= x, mirror the rest
        return np.where(
            np.arange(npoints)[:, None] >= np.arange(npoints)[None, :], u, u.T
        )
    if npoints <= 3:
        return u
    # downward pass, exactly seeded by the vanishing top coefficient A_N;
    # the true values can span far more than the double range (q-Hahn
    # corners decay like q^(n x)), so each row carries a running log scale
    S = npoints
    wst = np.empty((S, S))
    lg = np.empty((S, S))
    cur = np.ones(S)
    prev = np.zeros(S)
    lrow = np.zeros(S)
    wst[:, S - 1] = cur
    lg[:, S - 1] = lrow
    for k in range(S - 1, 0, -1):
        nxt = ((theta + A[k] + C[k]) * cur - (b[k] if k < S - 1 else 0.0) * prev) / b[k - 1]
        prev, cur = cur, nxt
        mag = np.abs(cur)
        f = np.where(mag > 1e100, mag, 1.0)
        cur = cur / f
        prev = prev / f
        lrow = lrow + np.log(f)
        wst[:, k - 1] = cur
        lg[:, k - 1] = lrow
    # match each row where the two passes agree best: the log of |u/w| is
    # flat exactly on the overlap of their trust zones (the upward
    # parasite drifts it past the envelope peak, the downward one before
    # it).  Magnitudes are pooled over adjacent index pairs because a
    # tridiagonal eigenvector may vanish at isolated indices (it cannot at
    # two consecutive ones), e.g. by parity on symmetric measures.
    rows = np.arange(S)
    cols = np.arange(S)[None, :]
    absu = np.abs(u)
    invalid = absu > _VALID_BOUND
    first_bad = np.where(invalid.any(axis=1), invalid.argmax(axis=1), S)
    with np.errstate(divide="ignore", invalid="ignore"):
        lu = np.log(absu)
        lw = np.log(np.abs(wst)) + lg
        lratio = np.maximum(lu[:, :-1], lu[:, 1:]) - np.maximum(lw[:, :-1], lw[:, 1:])
    dl = np.abs(np.diff(lratio, axis=1))
    step_cost = np.where(np.isfinite(dl), dl, np.inf)
    cost = step_cost[:, :-1] + step_cost[:, 1:]  # column j scores pair (j+1, j+2)
    cost = np.where(cols[:, 1 : S - 2] + 2 < first_bad[:, None], cost, np.inf)
    pair = np.where(
        np.isfinite(cost).any(axis=1),
        cost.argmin(axis=1) + 1,
        # degenerate fallback (tiny matrices): peak of the valid prefix
        np.where(cols < first_bad[:, None], absu, -1.0).argmax(axis=1),
    )
    # splice at whichever pair member carries the larger entry
    pair1 = np.clip(pair + 1, 0, S - 1)
    m = np.where(absu[rows, pair] >= absu[rows, pair1], pair, pair1)
    # phi_n = u_m * (w_n / w_m) for n > m, assembled in log scale; the
    # exponent is <= 0 on the used side, so underflow (not overflow) is the
    # only rounding mode there and it returns honest zeros
    dlog = np.minimum(lg - lg[rows, m][:, None], 0.0)
    tail = u[rows, m][:, None] * (wst / wst[rows, m][:, None]) * np.exp(dlog)
    return np.where(cols <= m[:, None], u, tail)


# ---------------------------------------------------------------------------
# convolution recipes: lambda3 maps, eigenvalues, measure factors
# ---------------------------------------------------------------------------


class ConvType(str, Enum):
    I = "i"
    II = "ii"
    III = "iii"


RECIPE_PARAM_NAMES = {
    Family.KRAWTCHOUK: ("a", "b"),
    Family.CHARLIER: ("a", "b"),
    Family.HAHN: ("a", "b", "c"),
    Family.MEIXNER: ("a", "b", "c"),
    Family.Q_HAHN: ("a", "b", "c", "q"),
}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def lambda3_map(
    family: Family, conv_type: ConvType, params: tuple[float, ...]
) -> FamilySpec:
    """Output-family parameters for a convolution of two measures.

    ``params`` are the raw convolution inputs (a, b[, c[, q]]); the result
    is the family spec (without N) of the stationary measure.  Raises
    UnsupportedCombination for pairs that do not exist and DomainError for
    out-of-range inputs.
    """
    f, t = family, conv_type
    if f is Family.KRAWTCHOUK:
        a, b = params
        _require(0 < a < 1 and 0 < b < 1, f"krawtchouk convolution needs a, b in (0,1), got {params}")
        if t is ConvType.I:
            p = b / (1 - a + a * b)
        elif t is ConvType.II:
            p = b / (1 - a + b)
        else:
            p = a * b / (1 - b + a * b)
        return _unsized_spec(Family.KRAWTCHOUK, (p,))
    if f is Family.CHARLIER:
        a, b = params
        if t is ConvType.I:
            _require(0 < a < 1 and b > 0, f"charlier type i needs 0 < a < 1 and b > 0, got {params}")
            return _unsized_spec(Family.CHARLIER, (b / (1 - a),))
        if t is ConvType.III:
            _require(a > 0 and 0 < b < 1, f"charlier type iii needs a > 0 and 0 < b < 1, got {params}")
            return _unsized_spec(Family.CHARLIER, (a * b / (1 - b),))
        raise UnsupportedCombination(
            "charlier kernels are constructed only for types i and iii"
        )
    if f is Family.HAHN:
        a, b, c = params
        _require(a > 0 and b > 0 and c > 0, f"hahn convolution needs a, b, c > 0, got {params}")
        if t is ConvType.I:
            return _unsized_spec(Family.HAHN, (a + b, c))
        if t is ConvType.II:
            return _unsized_spec(Family.HAHN, (a + b, b + c))
        return _unsized_spec(Family.HAHN, (c, a + b))
    if f is Family.MEIXNER:
        a, b, c = params
        if t in (ConvType.I, ConvType.II):
            _require(a > 0 and b > 0 and 0 < c < 1, f"meixner type i needs a, b > 0 and c in (0,1), got {params}")
            return _unsized_spec(Family.MEIXNER, (a + b, c))
        _require(a > 0 and 0 < b < 1 and c > 0, f"meixner type iii needs a, c > 0 and b in (0,1), got {params}")
        return _unsized_spec(Family.MEIXNER, (c, b))
    a, b, c, q = params
    if t is ConvType.II:
        raise UnsupportedCombination("the type ii convolution does not exist for q-hahn")
    _require(0 < q < 1, f"qhahn needs q in (0,1), got q={q}")
    if t is ConvType.I:
        _require(0 < a < 1 and 0 < b < 1 and c < 1, f"qhahn type i needs a, b in (0,1) and c < 1, got {params}")
        return _unsized_spec(Family.Q_HAHN, (a * b, c, q))
    _require(0 < a < 1 and b < 1 and 0 < c < 1, f"qhahn type iii needs a, c in (0,1) and b < 1, got {params}")
    return _unsized_spec(Family.Q_HAHN, (c, a * b, q))


def _unsized_spec(family: Family, params: tuple[float, ...]) -> FamilySpec:
    """Spec carrying the mapped parameters only; finite families get a
    placeholder N = 0 so the parameter ranges are validated immediately and
    the real lattice size is attached by ``ConvolutionRecipe.stationary_spec``."""
    if family in FINITE_FAMILIES:
        return FamilySpec(family, params, N=0)
    return FamilySpec(family, params, N=None)


@dataclass(frozen=True)
class MeasureFactor:
    """One measure factor inside a convolution sum; the lattice-size slot is
    filled by the convolution geometry (semi-infinite families ignore it)."""

    family: Family
    params: tuple[float, ...]

    def log_at(self, x: int, size: int) -> float:
        if self.family in FINITE_FAMILIES:
            spec = FamilySpec(self.family, self.params, N=size)
        else:
            spec = FamilySpec(self.family, self.params, N=None)
        if x < 0 or (spec.is_finite and x > size):
            return -math.inf
        return log_measure(spec, x)

    def at(self, x: int, size: int) -> float:
        return math.exp(self.log_at(x, size))


@dataclass(frozen=True)
class ConvolutionRecipe:
    """A (family, type, parameters) triple defining one reversible kernel.

    ``lambda3`` is the stationary family (recomputed, never stored stale),
    ``factor2``/``factor1`` the two measures entering the convolution sum.
    Meixner type ii is an alias of type i (the two limits coincide); it is
    canonicalized at construction.
    """

    family: Family
    conv_type: ConvType
    params: tuple[float, ...]
    lambda3: FamilySpec = field(init=False, compare=False)

    def __post_init__(self) -> None:
        names = RECIPE_PARAM_NAMES[self.family]
        if len(self.params) != len(names):
            raise DomainError(
                f"{self.family.value} recipes take parameters {names}, got {self.params}"
            )
        if self.family is Family.MEIXNER and self.conv_type is ConvType.II:
            object.__setattr__(self, "conv_type", ConvType.I)
        lam3 = lambda3_map(self.family, self.conv_type, self.params)
        object.__setattr__(self, "lambda3", lam3)

    @property
    def is_finite(self) -> bool:
        return self.family in FINITE_FAMILIES

    @property
    def factors(self) -> tuple[MeasureFactor, MeasureFactor]:
        """(factor2, factor1): the lambda2 and lambda1 measures of the sum."""
        f, t, p = self.family, self.conv_type, self.params
        if f is Family.KRAWTCHOUK:
            a, b = p
            return MeasureFactor(f, (b,)), MeasureFactor(f, (a,))
        if f is Family.CHARLIER:
            a, b = p
            if t is ConvType.I:
                return (
                    MeasureFactor(Family.CHARLIER, (b,)),
                    MeasureFactor(Family.KRAWTCHOUK, (a,)),
                )
            return (
                MeasureFactor(Family.KRAWTCHOUK, (b,)),
                MeasureFactor(Family.CHARLIER, (a,)),
            )
        if f is Family.HAHN:
            a, b, c = p
            if t is ConvType.III:
                return MeasureFactor(f, (c, a)), MeasureFactor(f, (a, b))
            return MeasureFactor(f, (b, c)), MeasureFactor(f, (a, b))
        if f is Family.MEIXNER:
            a, b, c = p
            if t is ConvType.III:
                return (
                    MeasureFactor(Family.HAHN, (c, a)),
                    MeasureFactor(Family.MEIXNER, (a, b)),
                )
            return (
                MeasureFactor(Family.MEIXNER, (b, c)),
                MeasureFactor(Family.HAHN, (a, b)),
            )
        a, b, c, q = p
        if t is ConvType.III:
            return MeasureFactor(f, (c, a, q)), MeasureFactor(f, (a, b, q))
        return MeasureFactor(f, (b, c, q)), MeasureFactor(f, (a, b, q))

    def stationary_spec(self, N: int | None) -> FamilySpec:
        if self.is_finite:
            return FamilySpec(self.lambda3.family, self.lambda3.params, N=N)
        return self.lambda3

    def to_string(self, N: int | None = None) -> str:
        names = RECIPE_PARAM_NAMES[self.family]
        parts = [f"{self.family.value}", f"type={self.conv_type.value}"]
        parts += [f"{n}={v!r}" for n, v in zip(names, self.params)]
        if N is not None:
            parts.append(f"N={N}")
        return " ".join(parts)


def kappa_vector(recipe: ConvolutionRecipe, nmax: int) -> np.ndarray:
    """Eigenvalues kappa(n), n = 0..nmax, of the convolution kernel.

    kappa(0) = 1 exactly; for every valid recipe all other moduli are < 1.
    All closed forms are products of per-step factors and are accumulated
    with cumprod; Hahn type ii has no product form and is summed as a
    terminating 3F2 at unit argument.
    """
    f, t, p = recipe.family, recipe.conv_type, recipe.params
    n = np.arange(1, nmax + 1, dtype=float)
    if f is Family.KRAWTCHOUK:
        a, b = p
        base = {ConvType.I: a * (1 - b), ConvType.II: a - b, ConvType.III: (1 - a) * b}[t]
        tail = base ** n
    elif f is Family.CHARLIER:
        a, b = p
        tail = (a if t is ConvType.I else b) ** n
    elif f is Family.HAHN:
        a, b, c = p
        j = n - 1.0
        if t is ConvType.I:
            tail = np.cumprod((a + j) * (c + j) / ((a + b + j) * (b + c + j)))
        elif t is ConvType.III:
            tail = np.cumprod((b + j) * (c + j) / ((a + b + j) * (a + c + j)))
        else:
            tail = _hahn_type2_kappa_tail(a, b, c, nmax)
    elif f is Family.MEIXNER:
        a, b, c = p
        j = n - 1.0
        if t is ConvType.III:
            tail = np.cumprod((c + j) / ((a + c) + j))
        else:
            tail = np.cumprod((a + j) / ((a + b) + j))
    else:
        a, b, c, q = p
        qj = q ** (n - 1.0)
        if t is ConvType.I:
            tail = np.cumprod(
                b * (1 - a * qj) * (1 - c * qj) / ((1 - a * b * qj) * (1 - b * c * qj))
            )
        else:
            tail = np.cumprod(
                a * (1 - b * qj) * (1 - c * qj) / ((1 - a * b * qj) * (1 - a * c * qj))
            )
    return np.concatenate(([1.0], tail))


def _hahn_type2_kappa_tail(a: float, b: float, c: float, nmax: int) -> np.ndarray:
    """kappa(1..nmax) for the Hahn type ii kernel.

    The eigenvalue is a terminating 3F2 at unit argument whose alternating
    terms reach ~1e23 by degree 50, far beyond what linear-space summation
    can cancel.  As a function of n it satisfies the same contiguous
    three-term relation as the Hahn polynomials (with parameters continued
    to alpha = a+b-1, beta = b+c-1, lattice slot -(b+c), argument -b),
    which iterates with O(1) coefficients and stays at machine precision:

        b kappa(n) = A_n kappa(n+1) - (A_n + C_n) kappa(n) + C_n kappa(n-1).
    """
    out = np.empty(nmax)
    km1, k0 = 0.0, 1.0
    for n in range(nmax):
        s = 2 * n + a + 2 * b + c
        an = -(n + a + 2 * b + c - 1) * (n + a + b) * (n + b + c) / ((s - 1) * s)
        cn = n * (n + a + b - 1) * (n + b + c - 1) / ((s - 2) * (s - 1))
        k1 = ((b + an + cn) * k0 - cn * km1) / an
        out[n] = k1
        km1, k0 = k0, k1
    return out


def kappa(recipe: ConvolutionRecipe, n: int) -> float:
    if n < 0:
        raise DomainError(f"mode index must be >= 0, got {n}")
    return float(kappa_vector(recipe, n)[n])


def spectral_gap(recipe: ConvolutionRecipe, nmax: int) -> float:
    """1 - max_{n>=1} |kappa(n)|: the mixing rate of the chain."""
    kap = kappa_vector(recipe, nmax)
    return 1.0 - float(np.max(np.abs(kap[1:]))) if nmax >= 1 else 1.0


# ---------------------------------------------------------------------------
# limit relations between families
# ---------------------------------------------------------------------------


def _sup_distance(pa: np.ndarray, pb: np.ndarray) -> float:
    return float(np.max(np.abs(pa - pb)))


@dataclass(frozen=True)
class LimitReport:
    """Sup-norm distances along a limit sequence and whether they shrink."""

    sequence: tuple[float, ...]
    distances: tuple[float, ...]

    @property
    def strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.distances, self.distances[1:]))


def krawtchouk_to_charlier_report(
    p: float, N_sequence=(10, 100, 1000), window: int = 15
) -> LimitReport:
    d = tuple(krawtchouk_to_charlier_distance(p, N, window) for N in N_sequence)
    return LimitReport(tuple(float(N) for N in N_sequence), d)


def hahn_to_meixner_report(
    a: float, b: float, N_sequence=(10, 100, 1000), window: int = 15
) -> LimitReport:
    d = tuple(hahn_to_meixner_distance(a, b, N, window) for N in N_sequence)
    return LimitReport(tuple(float(N) for N in N_sequence), d)


def meixner_to_charlier_report(
    b: float, a_sequence=(10, 100, 1000), window: int = 15
) -> LimitReport:
    d = tuple(meixner_to_charlier_distance(b, a, window) for a in a_sequence)
    return LimitReport(tuple(float(a) for a in a_sequence), d)


def krawtchouk_to_charlier_distance(p: float, N: int, window: int = 15) -> float:
    """sup_x |pi_K(x, N, p/N) - pi_C(x, p)| on x <= window (K is 0 past N)."""
    if p <= 0:
        raise DomainError(f"limit parameter p must be > 0, got {p}")
    kspec = FamilySpec(Family.KRAWTCHOUK, (p / N,), N=N)
    cspec = FamilySpec(Family.CHARLIER, (p,))
    xs = np.arange(window + 1)
    pk = np.array([measure(kspec, int(x)) if x <= N else 0.0 for x in xs])
    pc = np.array([measure(cspec, int(x)) for x in xs])
    return _sup_distance(pk, pc)


def hahn_to_meixner_distance(a: float, b: float, N: int, window: int = 15) -> float:
    """sup_x |pi_H(x, N, a, N(1-b)/b) - pi_M(x, a, b)| on x <= window."""
    hspec = FamilySpec(Family.HAHN, (a, N * (1.0 - b) / b), N=N)
    mspec = FamilySpec(Family.MEIXNER, (a, b))
    xs = np.arange(window + 1)
    ph = np.array([measure(hspec, int(x)) if x <= N else 0.0 for x in xs])
    pm = np.array([measure(mspec, int(x)) for x in xs])
    return _sup_distance(ph, pm)


def meixner_to_charlier_distance(b: float, a: float, window: int = 15) -> float:
    """sup_x |pi_M(x, a, b/(a+b)) - pi_C(x, b)| on x <= window (a -> inf)."""
    mspec = FamilySpec(Family.MEIXNER, (a, b / (a + b)))
    cspec = FamilySpec(Family.CHARLIER, (b,))
    xs = np.arange(window + 1)
    pm = np.array([measure(mspec, int(x)) for x in xs])
    pc = np.array([measure(cspec, int(x)) for x in xs])
    return _sup_distance(pm, pc)
