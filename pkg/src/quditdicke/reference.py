"""Closed-form target states, exact combinatorics, and success probabilities.

Everything here is computed independently of the circuit builders so it
can serve as the oracle they are judged against.  Binomials and
multinomials are exact arbitrary-precision integers; amplitude ratios go
through exact rationals before the final square root, which keeps the
d=2 reduction of the multilevel family bitwise identical to the spin-1/2
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .sim import QuditRegister, StateVector


def binomial(a: int, b: int) -> int:
    """Exact binomial coefficient, 0 whenever b < 0 or b > a."""
    if a < 0:
        raise ValueError("binomial requires a >= 0")
    if b < 0 or b > a:
        return 0
    return math.comb(a, b)


def multinomial(n: int, kvec) -> int:
    """n! / prod(k_i!) for nonnegative k_i summing to n."""
    kvec = tuple(int(k) for k in kvec)
    if any(k < 0 for k in kvec):
        raise ValueError("occupation numbers must be nonnegative")
    if sum(kvec) != n:
        raise ValueError(f"occupations {kvec} do not sum to n={n}")
    out = 1
    rest = n
    for k in kvec:
        out *= math.comb(rest, k)
        rest -= k
    return out


@dataclass(frozen=True)
class DickeSpecSpinS:
    """Problem descriptor (n sites, spin s stored as 2s, total charge k)."""

    n: int
    twice_s: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("site count n must be >= 1")
        if self.twice_s < 1:
            raise ValueError("twice_s must be a positive integer")
        if not 0 <= self.k <= self.twice_s * self.n:
            raise ValueError(f"charge k={self.k} outside 0..{self.twice_s * self.n}")

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    @property
    def s(self) -> float:
        return self.twice_s / 2.0

    @property
    def max_charge(self) -> int:
        return self.twice_s * self.n


@dataclass(frozen=True)
class DickeSpecSUD:
    """Problem descriptor (n sites, occupation vector over d >= 2 levels)."""

    n: int
    kvec: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kvec", tuple(int(k) for k in self.kvec))
        if self.n < 1:
            raise ValueError("site count n must be >= 1")
        if len(self.kvec) < 2:
            raise ValueError("need at least two levels")
        if any(not 0 <= k <= self.n for k in self.kvec):
            raise ValueError("each occupation must lie in 0..n")
        if sum(self.kvec) != self.n:
            raise ValueError(f"occupations {self.kvec} do not sum to n={self.n}")

    @property
    def d(self) -> int:
        return len(self.kvec)


def _digit_matrix(n: int, dim: int) -> np.ndarray:
    """All length-n digit strings as rows; column p is the site p+1 digit."""
    idx = np.arange(dim**n, dtype=np.int64)
    return (idx[:, None] // dim ** np.arange(n, dtype=np.int64)) % dim


def spin_s_dicke(spec: DickeSpecSpinS) -> StateVector:
    """Closed-form charge-k state on n qudits of dimension 2s+1.

    The amplitude on a digit string with digits m_i summing to k is
    sqrt(prod_i C(2s, m_i) / C(2sn, k)); everything else is zero.
    """
    dim = spec.dim
    register = QuditRegister.of_dims([dim] * spec.n)
    digits = _digit_matrix(spec.n, dim)
    sums = digits.sum(axis=1)
    site_weights = np.array([binomial(spec.twice_s, m) for m in range(dim)], dtype=float)
    numerators = site_weights[digits].prod(axis=1)
    denominator = float(binomial(spec.max_charge, spec.k))
    amps = np.where(sums == spec.k, np.sqrt(numerators / denominator), 0.0)
    return StateVector(register, amps.astype(np.complex128))


def sud_dicke(spec: DickeSpecSUD) -> StateVector:
    """Uniform superposition over all arrangements of the occupation multiset."""
    d = spec.d
    register = QuditRegister.of_dims([d] * spec.n)
    digits = _digit_matrix(spec.n, d)
    mask = np.ones(len(digits), dtype=bool)
    for level, occupation in enumerate(spec.kvec):
        mask &= (digits == level).sum(axis=1) == occupation
    amp = np.sqrt(1.0 / float(multinomial(spec.n, spec.kvec)))
    amps = np.where(mask, amp, 0.0)
    return StateVector(register, amps.astype(np.complex128))


def gamma_spin_s(n: int, twice_s: int, k: int, i: int, j: int, m: int) -> float:
    """Site-i emission coefficient of the spin-s bond factorization.

    sqrt(C(2s(n-i), k-j-m) * C(2s, m) / C(2s(n-i+1), k-j)) with the
    out-of-range binomial convention; returns 0.0 (never NaN) when the
    denominator binomial vanishes.
    """
    den = binomial(twice_s * (n - i + 1), k - j)
    if den == 0:
        return 0.0
    num = binomial(twice_s * (n - i), k - j - m) * binomial(twice_s, m)
    if num == 0:
        return 0.0
    return math.sqrt(float(Fraction(num, den)))


def gamma_sud(n: int, kvec, i: int, a, m: int) -> float:
    """Site-i emission coefficient of the multilevel bond factorization.

    ``a`` must be a valid partial occupation at bond i-1 (0 <= a_j <= k_j,
    sum(a) = i-1); the coefficient is zero unless a + unit(m) stays within
    the occupation bounds.
    """
    kvec = tuple(int(v) for v in kvec)
    a = tuple(int(v) for v in a)
    if len(a) != len(kvec):
        raise ValueError("partial occupation has wrong length")
    if any(not 0 <= aj <= kj for aj, kj in zip(a, kvec)) or sum(a) != i - 1:
        raise ValueError(f"{a} is not a level-{i - 1} element for {kvec}")
    if not 0 <= m < len(kvec):
        raise ValueError(f"level {m} out of range")
    if a[m] + 1 > kvec[m]:
        return 0.0
    rem = [kj - aj for kj, aj in zip(kvec, a)]
    den = multinomial(n - i + 1, rem)
    rem[m] -= 1
    num = multinomial(n - i, rem)
    if num == 0 or den == 0:
        return 0.0
    return math.sqrt(float(Fraction(num, den)))


def apply_charge_conjugation(state: StateVector, twice_s: int) -> StateVector:
    """Per-site digit reversal m -> 2s-m; maps charge k to 2sn-k."""
    dim = twice_s + 1
    if any(d != dim for d in state.register.dims):
        raise ValueError(f"state is not a uniform register of dimension {dim}")
    # reversing every digit of a uniform-radix index reverses the index
    return StateVector(state.register, state.amplitudes[::-1].copy())


def _moments(weights: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    mean = float(np.dot(weights, values))
    var = float(np.dot(weights, values**2) - mean**2)
    return mean, var


def charge_moments_spin_s(state: StateVector, twice_s: int) -> tuple[float, float]:
    """Mean and variance of the total digit-sum charge."""
    dim = twice_s + 1
    if any(d != dim for d in state.register.dims):
        raise ValueError(f"state is not a uniform register of dimension {dim}")
    n = len(state.register)
    digits = _digit_matrix(n, dim)
    weights = np.abs(state.amplitudes) ** 2
    return _moments(weights, digits.sum(axis=1).astype(float))


def charge_moments_sud(state: StateVector, d: int, level: int) -> tuple[float, float]:
    """Mean and variance of the occupation count of one level (1 <= level <= d-1)."""
    if any(dd != d for dd in state.register.dims):
        raise ValueError(f"state is not a uniform register of dimension {d}")
    if not 1 <= level <= d - 1:
        raise ValueError(f"level {level} outside 1..{d - 1}")
    n = len(state.register)
    digits = _digit_matrix(n, d)
    weights = np.abs(state.amplitudes) ** 2
    return _moments(weights, (digits == level).sum(axis=1).astype(float))


@dataclass(frozen=True)
class ProbabilityReport:
    """Optimal boost parameter with the exact and approximate success probability."""

    optimal_parameter: object
    probability: float
    expected_repetitions: float
    stirling: float


def probability_spin_s(n: int, twice_s: int, k: int) -> ProbabilityReport:
    """Postselection success probability at the optimal boost p = k/(2sn).

    Exact value C(2sn, k) p^k (1-p)^(2sn-k) evaluated in log space, with
    the 0^0 = 1 convention making both charge edges certain.  The
    square-root approximation is reported alongside, with vanishing
    factors skipped.
    """
    total = twice_s * n
    if not 0 <= k <= total:
        raise ValueError(f"charge k={k} outside 0..{total}")
    p = k / total
    if k == 0 or k == total:
        probability = 1.0
    else:
        log_p = math.log(binomial(total, k)) + k * math.log(p) + (total - k) * math.log1p(-p)
        probability = math.exp(log_p)
    factors = [v for v in (k, total - k) if v > 0]
    stirling = math.sqrt(total / (2.0 * math.pi * math.prod(factors)))
    return ProbabilityReport(p, probability, 1.0 / probability, stirling)


def probability_sud(n: int, kvec) -> ProbabilityReport:
    """Postselection success probability at the optimal boost xi_i = sqrt(k_i/n).

    Exact value (n!/n^n) prod_i k_i^{k_i}/k_i! with 0^0 = 1, in log space;
    the square-root approximation skips zero occupations.
    """
    kvec = tuple(int(v) for v in kvec)
    if any(v < 0 for v in kvec) or sum(kvec) != n:
        raise ValueError(f"occupations {kvec} do not sum to n={n}")
    xi = tuple(math.sqrt(v / n) for v in kvec)
    log_p = math.log(math.factorial(n)) - n * math.log(n)
    for v in kvec:
        if v > 0:
            log_p += v * math.log(v) - math.log(math.factorial(v))
    probability = math.exp(log_p)
    nonzero = [v for v in kvec if v > 0]
    d = len(kvec)
    stirling = math.sqrt(n / ((2.0 * math.pi) ** (d - 1) * math.prod(nonzero)))
    return ProbabilityReport(xi, probability, 1.0 / probability, stirling)
