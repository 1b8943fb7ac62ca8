"""Exhaustive verification of the base-3 digit inequality

    [23 x + 5 y + (3^f - 1)/2]_3 <= [x]_3 + [y]_3 + f + 2,   0 <= x, y < 3^f,

by direct sweeps, the four residue-class lemmas, and a replay of the
inductive step that reduces (x, y) to a smaller f.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .digits import digit_sum_table, digit_sums_array

DEFAULT_PAIR_BUDGET = 10**7
DEFAULT_SEED = 20190923


@dataclass(frozen=True)
class CaseLemma:
    """``[23 b + 5 d + offset]_3 <= [b]_3 + [d]_3 + slack`` for ``b in b_set``, ``d < d_bound``."""

    id: int
    modulus: int
    b_set: tuple[int, ...]
    d_bound: int
    offset: int
    slack: int

    def residue_matches(self, x: int) -> bool:
        return x % self.modulus in self.b_set


CASE_LEMMAS: tuple[CaseLemma, ...] = (
    CaseLemma(1, 3, (0,), 3, 1, 1),
    CaseLemma(2, 9, (1, 4, 7), 9, 4, 2),
    CaseLemma(3, 27, (2, 5, 11, 14, 23, 26), 27, 13, 3),
    CaseLemma(4, 81, (8, 17, 20, 35, 44, 47, 62, 71, 74), 81, 40, 4),
)


@dataclass
class ProofVerdict:
    case: str
    range: dict[str, Any]
    pairs_checked: int
    failures: list[dict[str, int]] = field(default_factory=list)
    sampled: bool = False
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        out = {
            "record": "verdict",
            "case": self.case,
            "range": self.range,
            "pairs_checked": self.pairs_checked,
            "verdict": "PASS" if self.passed else "FAIL",
            "failures": self.failures,
        }
        if self.sampled:
            out["seed"] = self.seed
        return out


def governing_case(x: int) -> CaseLemma:
    """The lemma used for ``x`` in the inductive step."""
    if x % 3 == 0:
        return CASE_LEMMAS[0]
    if x % 3 == 1:
        return CASE_LEMMAS[1]
    if x % 27 in (8, 17, 20):
        return CASE_LEMMAS[3]
    return CASE_LEMMAS[2]


def _ds(v: np.ndarray) -> np.ndarray:
    return digit_sums_array(v, 3)


def verify_case_lemma(lemma: CaseLemma, max_failures: int = 100) -> ProofVerdict:
    b = np.array(lemma.b_set, dtype=np.int64)
    if lemma.id == 1:
        b = np.zeros(1, dtype=np.int64)  # case 1 has no 23 b term
    d = np.arange(lemma.d_bound, dtype=np.int64)
    B, Dg = np.meshgrid(b, d, indexing="ij")
    lhs = _ds(23 * B + 5 * Dg + lemma.offset)
    rhs = _ds(B) + _ds(Dg) + lemma.slack
    bad = np.argwhere(lhs > rhs)
    failures = [
        {"b": int(B[i, j]), "d": int(Dg[i, j]), "lhs": int(lhs[i, j]), "rhs": int(rhs[i, j])}
        for i, j in bad[:max_failures]
    ]
    return ProofVerdict(
        case=f"lemma{lemma.id}",
        range={"b": list(lemma.b_set), "d_bound": lemma.d_bound},
        pairs_checked=int(lhs.size),
        failures=failures,
    )


def _inequality_excess(f: int, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lhs = _ds(23 * x + 5 * y + (3**f - 1) // 2)
    rhs = _ds(x) + _ds(y) + f + 2
    return lhs, rhs


def verify_base_cases(f_max: int = 4, max_failures: int = 100) -> list[ProofVerdict]:
    """Exhaustive check of the inequality for every ``f <= f_max``."""
    if f_max < 1:
        raise ValueError("f_max must be at least 1")
    return [_sweep(f, max_failures) for f in range(1, f_max + 1)]


def _sweep(f: int, max_failures: int = 100, bound: int | None = None) -> ProofVerdict:
    full = 3**f
    n = full if bound is None else bound
    table = digit_sum_table(3, f)
    x = np.arange(n, dtype=np.int64)
    shift = (full - 1) // 2
    failures: list[dict[str, int]] = []
    step = max(1, (1 << 22) // n)
    for a in range(0, n, step):
        xs = x[a : a + step]
        arg = 23 * xs[:, None] + 5 * x[None, :] + shift
        lhs = _ds(arg)
        rhs = table[xs][:, None] + table[None, :n] + f + 2
        for i, j in np.argwhere(lhs > rhs)[: max_failures - len(failures)]:
            failures.append({"x": int(xs[i]), "y": int(j), "lhs": int(lhs[i, j]), "rhs": int(rhs[i, j])})
    return ProofVerdict(case=f"base_f{f}", range={"f": f, "x": [0, n], "y": [0, n]}, pairs_checked=n * n, failures=failures)


def verify_base_case_split(f: int) -> tuple[ProofVerdict, ProofVerdict]:
    """Sweeps over ``x, y < 3^f`` and over the criterion range ``x, y < 3^f - 1``."""
    return _sweep(f), _sweep(f, bound=3**f - 1)


def replay_step(f: int, x: int, y: int) -> dict[str, int]:
    """Reproduce the inductive step for one pair and return its intermediate quantities.

    Raises ``AssertionError`` if any link of the chain fails.
    """
    lemma = governing_case(x)
    M = lemma.modulus
    k = {3: 1, 9: 2, 27: 3, 81: 4}[M]
    a, b = divmod(x, M)
    c, d = divmod(y, M)
    inner = 23 * a + 5 * c + (3 ** (f - k) - 1) // 2
    local = 23 * b + 5 * d + lemma.offset if k > 1 else 5 * d + 1
    whole = 23 * x + 5 * y + (3**f - 1) // 2
    assert whole == M * inner + local, "decomposition identity"
    ds = lambda v: _ds(np.array([v]))[0]  # noqa: E731
    lhs = int(ds(whole))
    step1 = int(ds(inner) + ds(local))
    assert lhs <= step1, "subadditivity with [M z]_3 = [z]_3"
    ind = int(ds(a) + ds(c) + (f - k) + 2)
    assert ds(inner) <= ind, "inductive hypothesis at f - k"
    lem = int(ds(b) + ds(d) + lemma.slack)
    assert ds(local) <= lem, f"case lemma {lemma.id}"
    rhs = int(ds(x) + ds(y) + f + 2)
    assert ind + lem == rhs, "digit sums split across the base-M boundary"
    return {"case": lemma.id, "lhs": lhs, "chain": step1, "bound": ind + lem, "rhs": rhs}


def _replay_vectorized(f: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Boolean mask of pairs whose inductive chain holds at every link."""
    ok = np.ones(x.shape, dtype=bool)
    whole = 23 * x + 5 * y + (3**f - 1) // 2
    lhs = _ds(whole)
    rhs = _ds(x) + _ds(y) + f + 2
    case = np.where(x % 3 == 0, 1, np.where(x % 3 == 1, 2, np.where(np.isin(x % 27, (8, 17, 20)), 4, 3)))
    for lemma in CASE_LEMMAS:
        sel = case == lemma.id
        if not sel.any():
            continue
        k = lemma.id
        M = lemma.modulus
        xs, ys = x[sel], y[sel]
        a, b = np.divmod(xs, M)
        c, d = np.divmod(ys, M)
        inner = 23 * a + 5 * c + (3 ** (f - k) - 1) // 2
        local = 23 * b + 5 * d + lemma.offset if k > 1 else 5 * d + 1
        ds_inner, ds_local = _ds(inner), _ds(local)
        links = (
            (whole[sel] == M * inner + local)
            & (lhs[sel] <= ds_inner + ds_local)
            & (ds_inner <= _ds(a) + _ds(c) + (f - k) + 2)
            & (ds_local <= _ds(b) + _ds(d) + lemma.slack)
            & (_ds(a) + _ds(c) + (f - k) + 2 + _ds(b) + _ds(d) + lemma.slack == rhs[sel])
            & np.isin(b, lemma.b_set)
        )
        ok[sel] = links
    return ok


def verify_induction_assembly(
    f: int,
    sample_budget: int | None = None,
    *,
    budget: int = DEFAULT_PAIR_BUDGET,
    seed: int = DEFAULT_SEED,
    max_failures: int = 100,
) -> ProofVerdict:
    """Direct check at ``f`` plus a replay of the inductive step for every tested pair.

    Exhaustive when ``9^f <= budget``; otherwise ``sample_budget`` uniform pairs
    from a fixed-seed generator are tested (``ValueError`` if not given).
    """
    if f <= 4:
        raise ValueError("the inductive step starts at f = 5")
    n = 3**f
    total = n * n
    sampled = total > budget
    failures: list[dict[str, int]] = []
    checked = 0
    if sampled:
        if not sample_budget:
            raise ValueError(f"9^{f} pairs exceed the budget {budget}; pass sample_budget")
        rng = np.random.default_rng(seed)
        pairs = []
        for start in range(0, sample_budget, 1 << 20):
            size = min(sample_budget - start, 1 << 20)
            pairs.append((rng.integers(0, n, size=size), rng.integers(0, n, size=size)))
    else:
        step = max(1, (1 << 21) // n)
        ys = np.arange(n, dtype=np.int64)
        pairs = []
        for a in range(0, n, step):
            xs = np.arange(a, min(n, a + step), dtype=np.int64)
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            pairs.append((X.ravel(), Y.ravel()))
    for x, y in pairs:
        lhs, rhs = _inequality_excess(f, x, y)
        good = (lhs <= rhs) & _replay_vectorized(f, x, y)
        checked += x.size
        for idx in np.nonzero(~good)[0][: max_failures - len(failures)]:
            failures.append({"x": int(x[idx]), "y": int(y[idx]), "lhs": int(lhs[idx]), "rhs": int(rhs[idx])})
    return ProofVerdict(
        case=f"induction_f{f}",
        range={"f": f, "x": [0, n], "y": [0, n]},
        pairs_checked=checked,
        failures=failures,
        sampled=sampled,
        seed=seed if sampled else None,
    )


def verify_all(f_exhaustive: tuple[int, ...] = (5, 6)) -> list[ProofVerdict]:
    out = verify_base_cases(4)
    out += [verify_case_lemma(lemma) for lemma in CASE_LEMMAS]
    out += [verify_induction_assembly(f) for f in f_exhaustive]
    return out
