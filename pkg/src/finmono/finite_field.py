"""Table-driven model of the finite field F_{p^f}.

Elements are integer codes: the polynomial ``c_0 + c_1 X + ... + c_{f-1} X^{f-1}``
over F_p is stored as ``c_0 + c_1 p + ... + c_{f-1} p^{f-1}``.  Zero is code 0
and has no discrete logarithm (``log[0] == -1``).
"""

from __future__ import annotations

import logging
import os
import struct
import zlib
from functools import lru_cache
from pathlib import Path

import numpy as np

from .digits import _order_mod

log = logging.getLogger(__name__)

DEFAULT_BOUND = 3**12
CACHE_MAGIC = b"MSFT1"

Poly = list[int]


def mult_order(p: int, m: int) -> int:
    """Least ``f >= 1`` with ``p^f == 1 (mod m)``."""
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    return _order_mod(p, m, cap=m)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p, coefficient lists low degree first ----------------

def _trim(a: Poly) -> Poly:
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a: Poly, m: Poly, p: int) -> Poly:
    a = _trim([c % p for c in a])
    inv_lead = pow(m[-1], -1, p)
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _trim(a)
    return a


def _polymul(a: Poly, b: Poly, p: int) -> Poly:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return [c % p for c in out]


def _polypowmod(a: Poly, e: int, m: Poly, p: int) -> Poly:
    result: Poly = [1]
    base = _polymod(a, m, p)
    while e:
        if e & 1:
            result = _polymod(_polymul(result, base, p), m, p)
        base = _polymod(_polymul(base, base, p), m, p)
        e >>= 1
    return result


def _polygcd(a: Poly, b: Poly, p: int) -> Poly:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _polymod(a, b, p)
    return a


def _polysub(a: Poly, b: Poly, p: int) -> Poly:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def is_irreducible(m: Poly, p: int) -> bool:
    """Irreducibility of ``m`` over F_p via gcds with ``X^{p^d} - X``."""
    f = len(m) - 1
    if f < 1:
        return False
    if f == 1:
        return True
    x = [0, 1]
    xp = x
    for _ in range(f // 2):
        xp = _polypowmod(xp, p, m, p)
        if len(_polygcd(m, _polysub(xp, x, p), p)) > 1:
            return False
    return True


def _code_to_poly(code: int, p: int, f: int) -> Poly:
    out = []
    for _ in range(f):
        code, r = divmod(code, p)
        out.append(r)
    return out


def _poly_to_code(a: Poly, p: int) -> int:
    code = 0
    for c in reversed(a):
        code = code * p + c
    return code


def first_irreducible(p: int, f: int) -> tuple[int, ...]:
    """First monic irreducible of degree ``f`` ordering the lower coefficients by code."""
    for n in range(p**f):
        m = _code_to_poly(n, p, f) + [1]
        if is_irreducible(m, p):
            return tuple(m)
    raise RuntimeError(f"no irreducible polynomial of degree {f} over F_{p}")


def _mul_matrix(g: Poly, modulus: Poly, p: int) -> np.ndarray:
    """Matrix of multiplication by ``g`` on the power basis."""
    f = len(modulus) - 1
    cols = []
    for k in range(f):
        prod = _polymod(_polymul(g, [0] * k + [1], p), modulus, p)
        cols.append(prod + [0] * (f - len(prod)))
    return np.array(cols, dtype=np.int64).T


class FieldTable:
    """F_q with exp/log tables for a fixed generator and a trace table.

    Instances are immutable after construction; use :func:`build_field`.
    """

    def __init__(
        self,
        p: int,
        f: int,
        modulus: tuple[int, ...],
        exp: np.ndarray,
        trace: np.ndarray,
    ) -> None:
        self.p = p
        self.f = f
        self.q = p**f
        self.modulus = tuple(modulus)
        self.exp = exp
        self.exp.flags.writeable = False
        lg = np.full(self.q, -1, dtype=np.int64)
        lg[exp] = np.arange(self.q - 1, dtype=np.int64)
        lg.flags.writeable = False
        self.log = lg
        self.trace = trace
        self.trace.flags.writeable = False
        # Tr(g^i), the form every hot loop uses
        self.trace_by_log = trace[exp]
        self.trace_by_log.flags.writeable = False
        self._weights = p ** np.arange(f, dtype=np.int64)

    def __repr__(self) -> str:
        return f"FieldTable(p={self.p}, f={self.f}, modulus={self.modulus}, generator={self.generator})"

    @property
    def order(self) -> int:
        return self.q - 1

    @property
    def generator(self) -> int:
        return int(self.exp[1 % (self.q - 1)]) if self.q > 2 else 1

    def elements(self) -> range:
        return range(self.q)

    def digits(self, a: int) -> np.ndarray:
        return (a // self._weights) % self.p

    def from_digits(self, v) -> int:
        return int(np.dot(np.asarray(v, dtype=np.int64) % self.p, self._weights))

    def add(self, a: int, b: int) -> int:
        return self.from_digits(self.digits(a) + self.digits(b))

    def neg(self, a: int) -> int:
        return self.from_digits(-self.digits(a))

    def sub(self, a: int, b: int) -> int:
        return self.from_digits(self.digits(a) - self.digits(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[(self.log[a] + self.log[b]) % (self.q - 1)])

    def power(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("0 has no negative powers")
            return 1 if e == 0 else 0
        return int(self.exp[(self.log[a] * e) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 is not invertible")
        return int(self.exp[(-self.log[a]) % (self.q - 1)])

    def element(self, k: int) -> int:
        """``g^k`` for the fixed generator ``g``."""
        return int(self.exp[k % (self.q - 1)])

    def absolute_trace(self, a: int) -> int:
        return int(self.trace[a])

    def with_generator(self, k: int) -> FieldTable:
        """Same field, generator replaced by ``g^k`` (``k`` a unit mod q-1)."""
        n = self.q - 1
        if np.gcd(k, n) != 1:
            raise ValueError(f"g^{k} does not generate a group of order {n}")
        idx = (np.arange(n, dtype=np.int64) * k) % n
        return FieldTable(self.p, self.f, self.modulus, self.exp[idx].copy(), self.trace.copy())


def absolute_trace(K: FieldTable, x: int) -> int:
    """Absolute trace Tr_{F_q/F_p}(x) as an integer in ``[0, p)``."""
    return K.absolute_trace(x)


def _find_generator(p: int, f: int, modulus: Poly) -> int:
    q = p**f
    n = q - 1
    if n == 1:
        return 1
    factors = _prime_factors(n)
    for code in range(2, q):
        g = _code_to_poly(code, p, f)
        _trim(g)
        if all(_polypowmod(g, n // ell, modulus, p) != [1] for ell in factors):
            return code
    raise RuntimeError("no generator found")


def _exp_table(p: int, f: int, modulus: Poly, gen: int) -> np.ndarray:
    n = p**f - 1
    g = _trim(_code_to_poly(gen, p, f))
    M = _mul_matrix(g, modulus, p)
    block = min(n, max(1, int(np.sqrt(n)) + 1))
    vecs = np.zeros((f, n), dtype=np.int64)
    v = np.zeros(f, dtype=np.int64)
    v[0] = 1
    for i in range(block):
        vecs[:, i] = v
        v = (M @ v) % p
    # v is now g^block applied to 1; jump whole blocks with its matrix
    Mb = np.eye(f, dtype=np.int64)
    for _ in range(block):
        Mb = (M @ Mb) % p
    start = block
    cur = vecs[:, :block]
    while start < n:
        cur = (Mb @ cur) % p
        take = min(block, n - start)
        vecs[:, start : start + take] = cur[:, :take]
        start += take
    return (p ** np.arange(f, dtype=np.int64)) @ vecs


def _trace_table(p: int, f: int, modulus: Poly) -> np.ndarray:
    basis_traces = []
    for k in range(f):
        xk = [0] * k + [1]
        total: Poly = []
        cur = _polymod(xk, modulus, p)
        for _ in range(f):
            n = max(len(total), len(cur))
            total = _trim(
                [
                    ((total[i] if i < len(total) else 0) + (cur[i] if i < len(cur) else 0)) % p
                    for i in range(n)
                ]
            )
            cur = _polypowmod(cur, p, modulus, p)
        if len(total) > 1:
            raise RuntimeError("trace landed outside the prime field")
        basis_traces.append(total[0] if total else 0)
    q = p**f
    codes = np.arange(q, dtype=np.int64)
    digits = (codes[:, None] // (p ** np.arange(f, dtype=np.int64))[None, :]) % p
    return (digits @ np.array(basis_traces, dtype=np.int64)) % p


# -- disk cache ---------------------------------------------------------------

def _cache_path(cache_dir: Path, p: int, f: int, modulus: tuple[int, ...]) -> Path:
    tag = "".join(str(c) for c in modulus)
    return cache_dir / f"F{p}_{f}_{tag}.msft"


def dump_field(K: FieldTable) -> bytes:
    body = bytearray(CACHE_MAGIC)
    body += struct.pack("<II", K.p, K.f)
    body += bytes(K.modulus)
    body += K.exp.astype("<u4").tobytes()
    body += K.trace.astype(np.uint8).tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)))
    return bytes(body)


def load_field(data: bytes) -> FieldTable:
    if len(data) < len(CACHE_MAGIC) + 12 or data[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise ValueError("not a field cache file")
    (crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != crc:
        raise ValueError("field cache CRC mismatch")
    off = len(CACHE_MAGIC)
    p, f = struct.unpack("<II", data[off : off + 8])
    off += 8
    modulus = tuple(data[off : off + f + 1])
    off += f + 1
    q = p**f
    expected = off + 4 * (q - 1) + q + 4
    if len(data) != expected:
        raise ValueError(f"field cache has {len(data)} bytes, expected {expected}")
    exp = np.frombuffer(data, dtype="<u4", count=q - 1, offset=off).astype(np.int64)
    off += 4 * (q - 1)
    trace = np.frombuffer(data, dtype=np.uint8, count=q, offset=off).astype(np.int64)
    return FieldTable(p, f, modulus, exp, trace)


def _default_cache_dir() -> Path | None:
    env = os.environ.get("FINMONO_FIELD_CACHE")
    return Path(env) if env else None


@lru_cache(maxsize=32)
def _build_cached(p: int, f: int, bound: int, cache_dir: str | None) -> FieldTable:
    if not _is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if f < 1:
        raise ValueError(f"f must be positive, got {f}")
    if p**f > bound:
        raise ValueError(f"field size {p}^{f} exceeds bound {bound}")
    modulus = first_irreducible(p, f)
    path = None
    if cache_dir is not None:
        path = _cache_path(Path(cache_dir), p, f, modulus)
        if path.exists():
            try:
                K = load_field(path.read_bytes())
                if K.modulus == modulus:
                    return K
            except ValueError as exc:
                log.warning("ignoring bad cache file %s: %s", path, exc)
    gen = _find_generator(p, f, list(modulus))
    K = FieldTable(p, f, modulus, _exp_table(p, f, list(modulus), gen), _trace_table(p, f, list(modulus)))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(dump_field(K))
        tmp.replace(path)
    return K


def build_field(
    p: int,
    f: int,
    bound: int = DEFAULT_BOUND,
    cache_dir: str | os.PathLike | None = None,
) -> FieldTable:
    """Build (or load from cache) the table model of F_{p^f}.

    The modulus is the first monic irreducible of degree ``f`` and the
    generator is the least element code of order ``p^f - 1``.
    """
    if cache_dir is None:
        cache_dir = _default_cache_dir()
    return _build_cached(p, f, bound, None if cache_dir is None else str(cache_dir))


def parse_field(text: str) -> tuple[int, int]:
    """Parse ``"p^f"`` (or a bare prime) into ``(p, f)``."""
    if "^" in text:
        a, b = text.split("^", 1)
        return int(a), int(b)
    return int(text), 1
