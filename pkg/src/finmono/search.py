"""Scan D for systems G(p, D, 1, twist) that pass the digit criterion up to f_max."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable

from .criteria import SystemSpec, Twist, check_digit_criterion


@dataclass(frozen=True)
class KnownCase:
    family: str  # "(q+1)/2", "(q^n+1)/(q+1)" or "2q-1"
    q: int
    n: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family, "q": self.q}
        if self.n is not None:
            out["n"] = self.n
        return out

    def __str__(self) -> str:
        return f"{self.family} with q={self.q}" + (f", n={self.n}" if self.n else "")


def known_cases(p: int, D: int) -> list[KnownCase]:
    """Every way of writing ``D`` as (q+1)/2, (q^n+1)/(q+1) (odd n >= 3) or 2q-1, q a power of p."""
    out = []
    q = p
    while (q + 1) // 2 <= D:
        if (q + 1) % 2 == 0 and (q + 1) // 2 == D:
            out.append(KnownCase("(q+1)/2", q))
        n = 3
        while True:
            v, rem = divmod(q**n + 1, q + 1)
            if v > D:
                break
            if rem == 0 and v == D:
                out.append(KnownCase("(q^n+1)/(q+1)", q, n))
            n += 2
        if 2 * q - 1 == D:
            out.append(KnownCase("2q-1", q))
        q *= p
    return out


def is_known_case(p: int, D: int) -> KnownCase | None:
    """The first known family containing ``D`` (smallest q), or ``None``."""
    if D < 2:
        raise ValueError(f"D={D} must be at least 2")
    cases = known_cases(p, D)
    return cases[0] if cases else None


@dataclass(frozen=True)
class Survivor:
    p: int
    D: int
    twist: Twist
    f_max: int
    known: KnownCase | None

    @property
    def outside_hypotheses(self) -> bool:
        return self.D < 3

    def to_dict(self) -> dict[str, Any]:
        return {
            "record": "survivor",
            "p": self.p,
            "D": self.D,
            "twist": self.twist.value,
            "label": f"candidate (all f <= {self.f_max})",
            "known_case": self.known.to_dict() if self.known else None,
            "note": "not a known case" if self.known is None else str(self.known),
            "outside_hypotheses": self.outside_hypotheses,
        }


def _passes(args: tuple[int, int, str, int]) -> bool:
    p, D, twist, f_max = args
    spec = SystemSpec(p, D, (1,), Twist(twist))
    return all(check_digit_criterion(spec, f, cap=0).passed for f in range(1, f_max + 1))


def search(
    p: int,
    D_range: Iterable[int],
    twist: Twist | str = Twist.QUADRATIC,
    f_max: int = 5,
    *,
    jobs: int = 1,
) -> list[Survivor]:
    """D values (prime to p) whose one-parameter system passes for every ``f <= f_max``.

    Passing is necessary, not sufficient, for finite monodromy.
    """
    twist = Twist(twist) if isinstance(twist, str) else twist
    Ds = sorted({D for D in D_range if D >= 2 and D % p})
    tasks = [(p, D, twist.value, f_max) for D in Ds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flags = list(pool.map(_passes, tasks, chunksize=16))
    else:
        flags = [_passes(t) for t in tasks]
    return [Survivor(p, D, twist, f_max, is_known_case(p, D)) for D, ok in zip(Ds, flags) if ok]
