"""Additive and multiplicative characters of F_q and their Gauss sums."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cyclotomic import CycInt
from .digits import FractionModZ, kubert_V
from .finite_field import FieldTable


@dataclass(frozen=True)
class MultChar:
    """The character ``omega^j`` where ``omega(g) = zeta_{q-1}`` for the field generator ``g``.

    ``omega`` plays the role of the Teichmuller character; criterion verdicts
    do not depend on which generator is used.
    """

    field: FieldTable
    j: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "j", self.j % (self.field.q - 1))

    @classmethod
    def trivial(cls, K: FieldTable) -> MultChar:
        return cls(K, 0)

    @classmethod
    def quadratic(cls, K: FieldTable) -> MultChar:
        if K.p == 2:
            raise ValueError("no quadratic character in characteristic 2")
        return cls(K, (K.q - 1) // 2)

    @property
    def is_trivial(self) -> bool:
        return self.j == 0

    def __mul__(self, other: MultChar) -> MultChar:
        return MultChar(self.field, self.j + other.j)

    def __pow__(self, e: int) -> MultChar:
        return MultChar(self.field, self.j * e)

    def conjugate(self) -> MultChar:
        return MultChar(self.field, -self.j)

    def exponent(self, x: int) -> int:
        """``k`` with ``rho(x) = zeta_{q-1}^k``; ``x`` must be nonzero."""
        lg = self.field.log[x]
        if lg < 0:
            raise ValueError("multiplicative characters are not evaluated at 0")
        return int(self.j * lg) % (self.field.q - 1)

    def __call__(self, x: int) -> CycInt:
        return CycInt.zeta(self.field.q - 1, self.exponent(x))

    def teichmuller_exponent(self) -> FractionModZ:
        """``y`` with ``rho = Teich^{-y(q-1)}``, i.e. ``y = -j/(q-1)``."""
        return FractionModZ(-self.j, self.field.q - 1)


def additive_char(K: FieldTable, x: int) -> CycInt:
    """``psi_K(x) = zeta_p^{Tr(x)}``."""
    return CycInt.zeta(K.p, K.absolute_trace(x))


def gauss_sum(K: FieldTable, rho: MultChar) -> CycInt:
    """``g(psi_K, rho) = sum_{t != 0} psi_K(t) rho(t)`` exactly, in Z[zeta_{p(q-1)}]."""
    n = K.q - 1
    m = K.p * n
    i = np.arange(n, dtype=np.int64)
    expo = (n * K.trace_by_log + K.p * ((rho.j * i) % n)) % m
    return CycInt(m, np.bincount(expo, minlength=m).tolist())


def gauss_valuation(K: FieldTable, rho: MultChar) -> Fraction:
    """ord_q of the Gauss sum, by Stickelberger: ``V(-j/(q-1))``; 0 for trivial ``rho``."""
    return kubert_V(rho.teichmuller_exponent(), K.p)


def characters(K: FieldTable) -> list[MultChar]:
    return [MultChar(K, j) for j in range(K.q - 1)]
