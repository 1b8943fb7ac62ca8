"""Base-p digit sums and Kubert's V function.

All values are exact: integers and :class:`fractions.Fraction`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

MAX_ORDER = 256


class DigitSumKind(enum.Enum):
    LOWER = "lower"  # representative in [0, p^f - 2]
    UPPER = "upper"  # representative in [1, p^f - 1]
    ABSOLUTE = "absolute"  # plain digit sum of a nonnegative integer


@dataclass(frozen=True)
class FractionModZ:
    """An element of Q/Z, stored reduced with ``0 <= num < den``."""

    num: int
    den: int = 1

    def __post_init__(self) -> None:
        if self.den <= 0:
            raise ValueError(f"denominator must be positive, got {self.den}")
        n = self.num % self.den
        g = gcd(n, self.den)
        if n == 0:
            object.__setattr__(self, "num", 0)
            object.__setattr__(self, "den", 1)
        else:
            object.__setattr__(self, "num", n // g)
            object.__setattr__(self, "den", self.den // g)

    @classmethod
    def from_fraction(cls, x: Fraction | int) -> FractionModZ:
        x = Fraction(x)
        return cls(x.numerator, x.denominator)

    def __neg__(self) -> FractionModZ:
        return FractionModZ(-self.num, self.den)

    def __add__(self, other: FractionModZ | int) -> FractionModZ:
        if isinstance(other, int):
            other = FractionModZ(other)
        if not isinstance(other, FractionModZ):
            return NotImplemented
        return FractionModZ.from_fraction(self.as_fraction() + other.as_fraction())

    __radd__ = __add__

    def __sub__(self, other: FractionModZ) -> FractionModZ:
        return self + (-other)

    def __mul__(self, k: int) -> FractionModZ:
        if not isinstance(k, int):
            return NotImplemented
        return FractionModZ(self.num * k, self.den)

    __rmul__ = __mul__

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}" if self.num else "0"


def _order_mod(p: int, m: int, cap: int) -> int:
    if m == 1:
        return 1
    if gcd(p, m) != 1:
        raise ValueError(f"{p} is not invertible modulo {m}")
    x = p % m
    f = 1
    while x != 1:
        x = x * p % m
        f += 1
        if f > cap:
            raise ValueError(f"order of {p} mod {m} exceeds cap {cap}")
    return f


def digit_sum_abs(x: int, p: int) -> int:
    """Sum of the base-``p`` digits of ``x >= 0``."""
    if x < 0:
        raise ValueError(f"digit_sum_abs needs x >= 0, got {x}")
    s = 0
    while x:
        x, r = divmod(x, p)
        s += r
    return s


def digit_sum_lower(y: int, p: int, f: int) -> int:
    """Digit sum of the representative of ``y mod p^f - 1`` in ``[0, p^f - 2]``."""
    return digit_sum_abs(y % (p**f - 1), p)


def digit_sum_upper(y: int, p: int, f: int) -> int:
    """Digit sum of the representative of ``y mod p^f - 1`` in ``[1, p^f - 1]``."""
    r = y % (p**f - 1)
    return digit_sum_abs(r, p) if r else f * (p - 1)


def digit_sum(y: int, p: int, f: int | None, kind: DigitSumKind) -> int:
    if kind is DigitSumKind.ABSOLUTE:
        return digit_sum_abs(y, p)
    if f is None:
        raise ValueError(f"{kind} digit sum needs f")
    if kind is DigitSumKind.LOWER:
        return digit_sum_lower(y, p, f)
    return digit_sum_upper(y, p, f)


def digit_sum_table(p: int, f: int) -> np.ndarray:
    """``table[n]`` = base-p digit sum of ``n`` for ``0 <= n < p^f``."""
    table = np.zeros(1, dtype=np.int64)
    for _ in range(f):
        # digits of p*m + d: those of m plus d
        table = (table[:, None] + np.arange(p, dtype=np.int64)[None, :]).ravel()
    return table


def digit_sums_array(values: np.ndarray, p: int) -> np.ndarray:
    """Vectorized :func:`digit_sum_abs` over a nonnegative int64 array."""
    v = np.asarray(values, dtype=np.int64).copy()
    if v.size and v.min() < 0:
        raise ValueError("digit sums need nonnegative inputs")
    out = np.zeros_like(v)
    while v.any():
        out += v % p
        v //= p
    return out


def stickelberger_order(x: FractionModZ, p: int) -> int:
    """Minimal f with ``(p^f - 1) * x`` integral."""
    if x.den % p == 0:
        raise ValueError(f"denominator {x.den} is divisible by p={p}")
    return _order_mod(p, x.den, MAX_ORDER)


def kubert_V(x: FractionModZ, p: int, f: int | None = None) -> Fraction:
    """Kubert's V function via the Stickelberger digit formula.

    ``f`` defaults to the minimal admissible exponent; any multiple of it
    gives the same value.
    """
    f0 = stickelberger_order(x, p)
    if f is None:
        f = f0
    elif f % f0:
        raise ValueError(f"(p^{f} - 1) * {x} is not an integer")
    y = x.num * (p**f - 1) // x.den
    return Fraction(digit_sum_lower(y, p, f), f * (p - 1))


def kubert_V_RL(x: FractionModZ, p: int, f: int | None = None) -> Fraction:
    """Variant of :func:`kubert_V` taking the value 1 at 0."""
    if x.num == 0:
        return Fraction(1)
    return kubert_V(x, p, f)


def stickelberger_average(x: FractionModZ, p: int) -> Fraction:
    """``(1/f) * sum_{i mod f} <p^i x>``; an oracle independent of digit sums."""
    f = stickelberger_order(x, p)
    total = sum((x * p**i).as_fraction() for i in range(f))
    return Fraction(total) / f
