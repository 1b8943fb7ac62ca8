"""Trace functions of the exponential-sum local systems.

For ``spec = (p, D, d, twist)`` and parameters ``t = (t_1, ..., t_r)`` in K^r the
raw trace is ``-sum_x psi_K(lead x^D + sum t_i x^{d_i}) chi(x)``, with ``chi``
the quadratic character of K (and ``x`` over K^x) for the quadratic twist, and
``chi = 1`` (``x`` over all of K) for the trivial twist.  The twisted trace
divides by ``alpha^deg(K/F_p)``.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence, TextIO

import numpy as np

from .criteria import BudgetExceededError, SystemSpec, Twist
from .cyclotomic import CycInt, NotDivisibleError, divide_by_alpha_power, half_twist_alpha
from .finite_field import FieldTable, mult_order

DEFAULT_BUDGET = 3**16
CHUNK = 1 << 21  # parameter tuples times field size per numpy block


def _sum_counts(K: FieldTable, exps: Sequence[int], coef_logs: np.ndarray, quadratic: bool) -> np.ndarray:
    """Signed counts ``c[k, j]`` with ``sum_x psi(...) chi(x) = sum_j c[k, j] zeta_p^j``.

    ``coef_logs[k, col]`` is the discrete log of the coefficient of
    ``x^{exps[col]}`` in row ``k`` (``-1`` for a zero coefficient).
    """
    n, p = K.q - 1, K.p
    tr = K.trace_by_log
    i = np.arange(n, dtype=np.int64)
    rows = coef_logs.shape[0]
    out = np.zeros((rows, p), dtype=np.int64)
    weight = np.where(i % 2 == 0, 1, -1) if quadratic else np.ones(n, dtype=np.int64)
    step = max(1, CHUNK // max(n, 1))
    for a in range(0, rows, step):
        block = coef_logs[a : a + step]
        tot = np.zeros((block.shape[0], n), dtype=np.int64)
        for col, e in enumerate(exps):
            lg = block[:, col]
            term = tr[(lg[:, None] + e * i[None, :]) % n]
            term[lg < 0] = 0
            tot += term
        tot %= p
        for c in range(p):
            out[a : a + step, c] = ((tot == c) * weight[None, :]).sum(axis=1)
    if not quadratic:
        out[:, 0] += 1  # x = 0
    return out


def _logs(K: FieldTable, codes) -> np.ndarray:
    return K.log[np.asarray(codes, dtype=np.int64)]


def raw_trace(spec: SystemSpec, K: FieldTable, t: Sequence[int], lead: int = 1) -> CycInt:
    """``-sum_x psi_K(lead x^D + sum t_i x^{d_i}) chi_K(x)`` in Z[zeta_p]."""
    if len(t) != spec.r:
        raise ValueError(f"expected {spec.r} parameters, got {len(t)}")
    if K.p != spec.p:
        raise ValueError(f"field characteristic {K.p} differs from p={spec.p}")
    coefs = list(t) + [lead]
    row = _logs(K, coefs)[None, :]
    counts = _sum_counts(K, spec.exponents, row, spec.twist is Twist.QUADRATIC)[0]
    return CycInt(K.p, (-counts).tolist())


def alpha_for(spec: SystemSpec) -> CycInt:
    return half_twist_alpha(spec.p, spec.D)


def twist_value(spec: SystemSpec, K: FieldTable, raw: CycInt) -> int | CycInt:
    """``raw / alpha^deg``: an ``int`` when rational, else a :class:`CycInt`.

    Raises :class:`NotDivisibleError` if the quotient is not integral.
    """
    if spec.twist is not Twist.QUADRATIC:
        raise ValueError("the exact half-twist is only defined for the quadratic twist")
    q = divide_by_alpha_power(raw, spec.p, alpha_for(spec), K.f)
    n = q.as_rational_integer()
    return q if n is None else n


def twisted_trace(spec: SystemSpec, K: FieldTable, t: Sequence[int], lead: int = 1) -> int | CycInt:
    """Trace of ``F(p, D, d, chi_2) (x) alpha^{-deg}`` at ``t``."""
    return twist_value(spec, K, raw_trace(spec, K, t, lead))


@dataclass
class TraceTable:
    """Tabulated traces; keys are parameter tuples of field element codes.

    Keys are ``(t_1, ..., t_r)``, prefixed by the leading coefficient when the
    table was built with ``scaled=True``.  Values are ints when the entry is a
    rational integer; twisted entries that are not are kept as :class:`CycInt`.
    """

    spec: SystemSpec
    field: FieldTable
    columns: list[str]
    entries: dict[tuple[int, ...], int | CycInt]
    twisted: bool
    variant: str = "affine"
    failures: list[tuple[tuple[int, ...], str]] = field(default_factory=list)

    def values(self) -> list[int | CycInt]:
        return list(self.entries.values())

    def support(self) -> set[int]:
        return {v for v in self.entries.values() if isinstance(v, int)}

    def all_rational(self) -> bool:
        return not self.failures and all(isinstance(v, int) for v in self.entries.values())

    def rows(self) -> Iterator[tuple[tuple[int, ...], int | CycInt]]:
        yield from self.entries.items()

    def write_csv(self, out: TextIO) -> None:
        K = self.field
        out.write(
            f"# spec={self.spec} variant={self.variant} field=F_{K.p}^{K.f} "
            f"modulus={list(K.modulus)} generator={K.generator} twisted={self.twisted}\n"
        )
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self.columns + ["value"])
        for key, val in self.entries.items():
            w.writerow(list(key) + [str(val)])
        for key, why in self.failures:
            w.writerow(list(key) + [why])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def trace_table(
    spec: SystemSpec,
    K: FieldTable,
    *,
    fixed: dict[int, int] | None = None,
    scaled: bool = False,
    fixed_lead: int | None = None,
    budget: int | None = DEFAULT_BUDGET,
    variant: str = "affine",
) -> TraceTable:
    """Tabulate traces over a parameter grid.

    ``fixed`` pins coordinates ``t_i`` (0-based index) to given elements; the
    rest range over K.  With ``scaled=True`` the coefficient of ``x^D`` also
    ranges over K^x (or is pinned by ``fixed_lead``) and every entry gets the
    factor ``chi_2(lead)``.  Quadratic twist: entries are twisted traces.
    Trivial twist: entries are the raw sums, never divided.
    """
    fixed = dict(fixed or {})
    if any(not 0 <= i < spec.r for i in fixed):
        raise ValueError(f"fixed indices must be in [0, {spec.r})")
    quadratic = spec.twist is Twist.QUADRATIC
    if scaled and not quadratic:
        raise ValueError("scaled tables carry a chi_2 prefactor and need the quadratic twist")
    axes: list[Sequence[int]] = []
    columns: list[str] = []
    if scaled:
        axes.append([fixed_lead] if fixed_lead is not None else range(1, K.q))
        columns.append("lead")
    for i in range(spec.r):
        axes.append([fixed[i]] if i in fixed else range(K.q))
        columns.append(f"t{i + 1}")
    size = int(np.prod([len(a) for a in axes])) * max(K.q - 1, 1)
    if budget is not None and size > budget:
        raise BudgetExceededError(f"table needs {size} evaluations, budget is {budget}")
    keys = np.array(list(itertools.product(*axes)), dtype=np.int64).reshape(-1, len(axes))
    if scaled:
        t_codes = keys[:, 1:]
        lead_codes = keys[:, 0]
    else:
        t_codes = keys
        lead_codes = np.ones(len(keys), dtype=np.int64)
    coef_logs = np.concatenate([K.log[t_codes], K.log[lead_codes][:, None]], axis=1)
    raw = -_sum_counts(K, spec.exponents, coef_logs, quadratic)
    if scaled:
        sign = np.where(K.log[lead_codes] % 2 == 0, 1, -1)
        raw = raw * sign[:, None]
    entries: dict[tuple[int, ...], int | CycInt] = {}
    failures: list[tuple[tuple[int, ...], str]] = []
    uniq, inverse = np.unique(raw, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    converted: list[int | CycInt | None] = []
    for row in uniq:
        val = CycInt(K.p, row.tolist())
        if quadratic:
            try:
                converted.append(twist_value(spec, K, val))
            except NotDivisibleError:
                converted.append(None)
        else:
            n = val.as_rational_integer()
            converted.append(val if n is None else n)
    for key, u in zip(map(tuple, keys.tolist()), inverse):
        v = converted[u]
        if v is None:
            failures.append((key, "NOT_DIVISIBLE"))
        else:
            entries[key] = v
    return TraceTable(spec, K, columns, entries, twisted=quadratic, variant=variant, failures=failures)


CO3_VARIANTS = ("i", "ii", "iii", "iv", "v", "vi")


def co3_table(K: FieldTable, variant: str, s0: int = 0, t0: int = 0, **kw) -> TraceTable:
    """The trace families of the Co_3 local systems in characteristic 3.

    ``i``: ``x^23 + t x``; ``ii``: ``x^23 + s x^5 + t x``; ``iii``: ``r x^23 + s x^5 + t x``
    with ``chi_2(r)``; ``iv``: ``s = s0`` frozen; ``v``: ``x^23 + t x^5``; ``vi``:
    ``(s, t) = (s0, t0)`` frozen, ``r`` varying.  Keys of two-parameter tables
    are ``(t, s)`` since ``t`` multiplies ``x^1``.
    """
    if K.p != 3:
        raise ValueError("the Co_3 systems live in characteristic 3")
    one = SystemSpec(3, 23, (1,), Twist.QUADRATIC)
    two = SystemSpec(3, 23, (1, 5), Twist.QUADRATIC)
    if variant == "i":
        return trace_table(one, K, variant=variant, **kw)
    if variant == "ii":
        return trace_table(two, K, variant=variant, **kw)
    if variant == "iii":
        return trace_table(two, K, scaled=True, variant=variant, **kw)
    if variant == "iv":
        return trace_table(two, K, fixed={1: s0}, variant=variant, **kw)
    if variant == "v":
        return trace_table(two, K, fixed={0: 0}, variant=variant, **kw)
    if variant == "vi":
        if s0 == 0 and t0 == 0:
            raise ValueError("variant vi needs (s0, t0) != (0, 0)")
        return trace_table(two, K, scaled=True, fixed={0: t0, 1: s0}, variant=variant, **kw)
    raise ValueError(f"unknown variant {variant!r}; choose from {CO3_VARIANTS}")


def wild_inertia_image_order(p: int, D: int) -> int:
    """``p^f`` with ``f`` the order of ``p`` modulo ``D - 1``."""
    if D < 3:
        raise ValueError(f"D={D} must be at least 3")
    if D % p == 0 or (D - 1) % p == 0:
        raise ValueError(f"D={D} and D-1 must both be prime to p={p}")
    return p ** mult_order(p, D - 1)
