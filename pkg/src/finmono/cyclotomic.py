"""Exact cyclotomic integers in Z[zeta_m].

Values live in Z[x]/(x^m - 1); reduction modulo the cyclotomic polynomial
Phi_m happens only when comparing or extracting.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence


class NotDivisibleError(ArithmeticError):
    """An exact division left Z[zeta_m]."""


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients (low degree first) of Phi_m, from x^m - 1 = prod_{d | m} Phi_d."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _exact_divide(num, cyclotomic_poly(d))
    return tuple(num)


def _exact_divide(a: Sequence[int], b: Sequence[int]) -> list[int]:
    a = list(a)
    db = len(b) - 1
    if b[-1] not in (1, -1):
        raise ValueError("divisor must be monic up to sign")
    quot = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db] * b[-1]
        quot[k] = c
        if c:
            for i, bc in enumerate(b):
                a[k + i] -= c * bc
    if any(a[:db]):
        raise ArithmeticError("polynomial division is not exact")
    return quot


def _reduce_mod_phi(coeffs: Sequence[int], m: int) -> tuple[int, ...]:
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    a = list(coeffs)
    # Phi_m is monic, so plain long division stays in Z
    for k in range(len(a) - 1, deg - 1, -1):
        c = a[k]
        if c:
            shift = k - deg
            for i, pc in enumerate(phi):
                a[shift + i] -= c * pc
    out = a[:deg]
    return tuple(out) + (0,) * (deg - len(out))


class CycInt:
    """An element ``sum c_i zeta_m^i`` of Z[zeta_m]."""

    __slots__ = ("m", "coeffs", "_canon")

    def __init__(self, m: int, coeffs: Iterable[int] = ()) -> None:
        if m < 1:
            raise ValueError(f"m must be positive, got {m}")
        c = [0] * m
        for i, v in enumerate(coeffs):
            c[i % m] += int(v)
        self.m = m
        self.coeffs: tuple[int, ...] = tuple(c)
        self._canon: tuple[int, ...] | None = None

    @classmethod
    def integer(cls, n: int, m: int = 1) -> CycInt:
        return cls(m, [n])

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> CycInt:
        c = [0] * m
        c[k % m] = 1
        return cls(m, c)

    @classmethod
    def from_counts(cls, m: int, counts: Sequence[int]) -> CycInt:
        return cls(m, counts)

    def canonical(self) -> tuple[int, ...]:
        """Coefficients in the power basis ``1, zeta, ..., zeta^{phi(m)-1}``."""
        if self._canon is None:
            self._canon = _reduce_mod_phi(self.coeffs, self.m)
        return self._canon

    def lift(self, m2: int) -> CycInt:
        """The same number viewed in Z[zeta_{m2}], ``m | m2``."""
        if m2 % self.m:
            raise ValueError(f"{self.m} does not divide {m2}")
        step = m2 // self.m
        c = [0] * m2
        for i, v in enumerate(self.coeffs):
            c[i * step] = v
        return CycInt(m2, c)

    def _coerce(self, other) -> CycInt | None:
        if isinstance(other, int):
            return CycInt(self.m, [other])
        if isinstance(other, CycInt):
            return other
        return None

    @staticmethod
    def _common(a: CycInt, b: CycInt) -> tuple[CycInt, CycInt]:
        if a.m == b.m:
            return a, b
        m = a.m * b.m // gcd(a.m, b.m)
        return a.lift(m), b.lift(m)

    def __add__(self, other) -> CycInt:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._common(self, o)
        return CycInt(a.m, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> CycInt:
        return CycInt(self.m, [-x for x in self.coeffs])

    def __sub__(self, other) -> CycInt:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> CycInt:
        return (-self) + other

    def __mul__(self, other) -> CycInt:
        if isinstance(other, int):
            return CycInt(self.m, [x * other for x in self.coeffs])
        if not isinstance(other, CycInt):
            return NotImplemented
        a, b = self._common(self, other)
        m = a.m
        out = [0] * m
        nz = [(j, y) for j, y in enumerate(b.coeffs) if y]
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in nz:
                    out[(i + j) % m] += x * y
        return CycInt(m, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> CycInt:
        if e < 0:
            raise ValueError("negative powers are not available in Z[zeta_m]")
        result = CycInt(self.m, [1])
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._common(self, o)
        return (a - b).is_zero()

    def __hash__(self) -> int:
        # equal values at different m hash differently; only same-m hashing is supported
        return hash((self.m, self.canonical()))

    def is_zero(self) -> bool:
        return not any(self.canonical())

    def conjugate(self) -> CycInt:
        m = self.m
        return CycInt(m, [self.coeffs[(-i) % m] for i in range(m)])

    def galois(self, a: int) -> CycInt:
        """The automorphism ``zeta_m -> zeta_m^a`` (``gcd(a, m) = 1``)."""
        if gcd(a, self.m) != 1:
            raise ValueError(f"{a} is not a unit mod {self.m}")
        out = [0] * self.m
        for i, v in enumerate(self.coeffs):
            out[(i * a) % self.m] += v
        return CycInt(self.m, out)

    def as_rational_integer(self) -> int | None:
        """The integer this equals, or ``None`` if it is not rational."""
        c = self.canonical()
        if any(c[1:]):
            return None
        return c[0] if c else 0

    def exact_div_int(self, n: int) -> CycInt:
        """Divide by a rational integer, requiring an exact result."""
        c = self.canonical()
        if any(x % n for x in c):
            raise NotDivisibleError(f"{self} is not divisible by {n}")
        return CycInt(self.m, [x // n for x in c])

    def __repr__(self) -> str:
        return f"CycInt({self.m}, {list(self.canonical())})"

    def __str__(self) -> str:
        n = self.as_rational_integer()
        if n is not None:
            return str(n)
        terms = []
        for i, c in enumerate(self.canonical()):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*z{self.m}^{i}")
        return " + ".join(terms)


def cyc_reduce(a: CycInt) -> CycInt:
    return CycInt(a.m, a.canonical())


def conjugate(a: CycInt) -> CycInt:
    return a.conjugate()


def as_rational_integer(a: CycInt) -> int | None:
    return a.as_rational_integer()


def galois_trace(a: CycInt) -> CycInt:
    """Sum of all Galois conjugates of ``a``; always rational."""
    total = CycInt(a.m)
    for k in range(1, a.m + 1):
        if gcd(k, a.m) == 1:
            total = total + a.galois(k)
    return total


def legendre(a: int, p: int) -> int:
    """Quadratic character of F_p, with value 0 at 0."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def quadratic_gauss_sum(p: int) -> CycInt:
    """``g(psi, chi_2) = sum_{t in F_p^x} chi_2(t) zeta_p^t`` with ``psi(t) = zeta_p^t``."""
    return CycInt(p, [legendre(t, p) for t in range(p)])


def half_twist_alpha(p: int, D: int) -> CycInt:
    """The preferred half-Tate-twist constant for the quadratic twist.

    ``alpha = -chi_2((-1)^delta D) g(psi, chi_2)`` for ``D = 2 delta + 1``.  For
    even ``D`` the sign factor is dropped and ``alpha = -g``.
    """
    if p % 2 == 0:
        raise ValueError("the quadratic twist needs odd p")
    g = quadratic_gauss_sum(p)
    if D % 2 == 1:
        delta = (D - 1) // 2
        sign = legendre((-1) ** delta * D, p)
        if sign == 0:
            raise ValueError(f"D={D} must be prime to p={p}")
        return g * (-sign)
    return -g


def divide_by_alpha_power(a: CycInt, p: int, alpha: CycInt, k: int) -> CycInt:
    """Exact quotient ``a / alpha^k`` inside Z[zeta_p].

    Uses ``alpha^2 = chi_2(-1) p``: for odd ``k`` multiply by ``alpha`` and divide
    by ``alpha^{k+1}``, a rational integer.  Raises :class:`NotDivisibleError`
    when the quotient is not a cyclotomic integer.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    sq = (alpha * alpha).as_rational_integer()
    if sq is None or abs(sq) != p:
        raise ValueError("alpha must square to +-p")
    if a.m % p and a.m != 1:
        raise ValueError(f"{a!r} does not live in Z[zeta_{p}]")
    a = a.lift(p) if a.m == 1 else a
    if k % 2:
        a = a * alpha
        k += 1
    return a.exact_div_int(sq ** (k // 2))
