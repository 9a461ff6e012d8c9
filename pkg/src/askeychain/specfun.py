"""Log-space combinatorial factors and terminating (basic) hypergeometric sums.

Everything here is a pure function of its arguments and safe to call
concurrently.  Measures and norm constants elsewhere in the package are
assembled from these log-space pieces and exponentiated once at the end,
because products like binom(N,x) p^x (1-p)^(N-x) leave the double range
long before N ~ 1e3.  The terminating series, whose terms alternate in
sign, are summed in linear space instead (log space cannot subtract);
``math.fsum`` keeps the accumulation error at one rounding of the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractViolation, DomainError, SingularSeriesError

#: Largest supported termination order of the series evaluators.  Beyond
#: this the linear-space term sizes are not trustworthy in double precision.
MAX_TERMINATION_ORDER = 200


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as (log of magnitude, sign).

    ``sign == 0`` means the value is exactly zero and ``log`` is ignored.
    Multiplication adds logs and multiplies signs, so long products of
    mixed-sign factors never overflow.
    """

    log: float
    sign: int

    @classmethod
    def one(cls) -> "SignedLog":
        return cls(0.0, 1)

    @classmethod
    def zero(cls) -> "SignedLog":
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, v: float) -> "SignedLog":
        if v == 0.0:
            return cls.zero()
        return cls(math.log(abs(v)), 1 if v > 0 else -1)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.log + other.log, self.sign * other.sign)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("division by an exactly-zero SignedLog")
        if self.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.log - other.log, self.sign * other.sign)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log)


def log_pochhammer(a: float, n: int) -> SignedLog:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1) as a SignedLog.

    (a)_0 = 1 for every a.  Negative ``a`` is allowed; a zero factor gives
    the exact-zero SignedLog.
    """
    if n < 0:
        raise DomainError(f"pochhammer order must be >= 0, got {n}")
    if n == 0:
        return SignedLog.one()
    if a > 0.0:
        # all factors positive: one lgamma difference instead of n logs
        return SignedLog(math.lgamma(a + n) - math.lgamma(a), 1)
    log_abs = 0.0
    sign = 1
    for k in range(n):
        f = a + k
        if f == 0.0:
            return SignedLog.zero()
        log_abs += math.log(abs(f))
        if f < 0.0:
            sign = -sign
    return SignedLog(log_abs, sign)


def q_pochhammer(a: float, q: float, n: int) -> SignedLog:
    """q-shifted factorial (a;q)_n = prod_{k<n} (1 - a q^k) as a SignedLog."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0,1), got {q}")
    if n < 0:
        raise DomainError(f"q-pochhammer order must be >= 0, got {n}")
    log_abs = 0.0
    sign = 1
    aqk = a
    for _ in range(n):
        if aqk == 1.0:
            return SignedLog.zero()
        # log1p is exact enough for the small-|aq^k| regime where
        # 1 - aq^k is close to 1
        log_abs += math.log1p(-aqk) if aqk < 0.5 else math.log(abs(1.0 - aqk))
        if aqk > 1.0:
            sign = -sign
        aqk *= q
    return SignedLog(log_abs, sign)


def log_binomial(N: int, x: int) -> float:
    """ln binom(N, x), computed from the smaller of x and N-x.

    The argument of the log is the exact integer, so the result is within
    one rounding of the true value for any N the integer machinery can
    hold; symmetry log_binomial(N, x) == log_binomial(N, N-x) is bit-exact.
    """
    if not (0 <= x <= N):
        raise DomainError(f"binomial requires 0 <= x <= N, got x={x}, N={N}")
    k = min(x, N - x)
    return math.log(math.comb(N, k)) if k > 0 else 0.0


def log_q_factorial(q: float, n: int) -> float:
    """ln (q;q)_n for 0 < q < 1 (all factors in (0,1))."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0,1), got {q}")
    total = 0.0
    qk = q
    for _ in range(n):
        total += math.log1p(-qk)
        qk *= q
    return total


def q_binomial(N: int, x: int, q: float) -> float:
    """Gaussian binomial [N x]_q = (q;q)_N / ((q;q)_x (q;q)_{N-x})."""
    if not (0 <= x <= N):
        raise DomainError(f"q-binomial requires 0 <= x <= N, got x={x}, N={N}")
    k = min(x, N - x)
    return math.exp(
        log_q_factorial(q, N) - log_q_factorial(q, k) - log_q_factorial(q, N - k)
    )


def _nonneg_int_if_nonpos(p: float) -> int | None:
    """If p is a nonpositive integer return -p as an int, else None."""
    if p <= 0.0 and p == math.floor(p):
        return int(-p)
    return None


def hypergeometric_terminating(
    num_params: list[float], den_params: list[float], z: float
) -> float:
    """Terminating generalized hypergeometric sum sum_k prod(num)_k / prod(den)_k * z^k / k!.

    At least one numerator parameter must be a nonpositive integer -m; the
    sum then runs to the smallest such m.  Terms are generated by the ratio
    recurrence t_{k+1} = t_k * prod(num_i + k)/prod(den_j + k) * z/(k+1)
    and accumulated with compensated summation.

    Raises ContractViolation when no parameter terminates the series (or
    the termination order exceeds MAX_TERMINATION_ORDER) and
    SingularSeriesError when a denominator parameter hits zero before the
    series terminates.
    """
    orders = [m for p in num_params if (m := _nonneg_int_if_nonpos(p)) is not None]
    if not orders:
        raise ContractViolation(
            "series does not terminate: no numerator parameter is a "
            f"nonpositive integer: {num_params}"
        )
    K = min(orders)
    if K > MAX_TERMINATION_ORDER:
        raise ContractViolation(
            f"termination order {K} exceeds supported cap {MAX_TERMINATION_ORDER}"
        )
    for d in den_params:
        m = _nonneg_int_if_nonpos(d)
        if m is not None and m < K:
            raise SingularSeriesError(
                f"denominator parameter {d} vanishes at term {m + 1}, "
                f"before termination order {K}"
            )
    terms = [1.0]
    t = 1.0
    for k in range(K):
        for p in num_params:
            t *= p + k
        for d in den_params:
            t /= d + k
        t *= z / (k + 1)
        terms.append(t)
    return math.fsum(terms)


def _q_power_order(v: float, q: float) -> int | None:
    """If v == q**(-m) for a nonnegative integer m, return m, else None."""
    if v < 1.0:
        return None
    m = round(-math.log(v) / math.log(q))
    if m < 0:
        return None
    if abs(v * q**m - 1.0) <= 1e-9:
        return m
    return None


def basic_hypergeometric_3phi2_terminating(
    num_params: list[float], den_params: list[float], q: float, z: float
) -> float:
    """Terminating 3phi2 basic hypergeometric sum at base q.

    One numerator parameter must equal q**(-m) for a nonnegative integer m
    (the factor (q^{-m};q)_k kills every term with k > m).  Term ratio:

        t_{k+1}/t_k = prod_i (1 - num_i q^k) / (prod_j (1 - den_j q^k) (1 - q^{k+1})) * z
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0,1), got {q}")
    if len(num_params) != 3 or len(den_params) != 2:
        raise ContractViolation("expected 3 numerator and 2 denominator parameters")
    orders = [m for v in num_params if (m := _q_power_order(v, q)) is not None]
    if not orders:
        raise ContractViolation(
            f"series does not terminate: no numerator parameter is q^(-m): {num_params}"
        )
    K = min(orders)
    if K > MAX_TERMINATION_ORDER:
        raise ContractViolation(
            f"termination order {K} exceeds supported cap {MAX_TERMINATION_ORDER}"
        )
    for d in den_params:
        m = _q_power_order(d, q)
        if m is not None and m < K:
            raise SingularSeriesError(
                f"denominator parameter {d} = q^(-{m}) vanishes before "
                f"termination order {K}"
            )
    terms = [1.0]
    t = 1.0
    for k in range(K):
        qk = q**k
        for v in num_params:
            t *= 1.0 - v * qk
        for d in den_params:
            t /= 1.0 - d * qk
        t *= z / (1.0 - q ** (k + 1))
        terms.append(t)
    return math.fsum(terms)
