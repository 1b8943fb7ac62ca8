import random

import numpy as np
import pytest

from finmono.finite_field import (
    FieldTable,
    absolute_trace,
    build_field,
    dump_field,
    first_irreducible,
    is_irreducible,
    load_field,
    mult_order,
    parse_field,
)

SMALL_FIELDS = [(2, 1), (2, 3), (3, 1), (3, 2), (3, 3), (3, 4), (3, 5), (5, 2), (7, 2)]


def frobenius_trace(K: FieldTable, x: int) -> int:
    """Tr(x) = x + x^p + ... + x^{p^{f-1}} with field add/pow only."""
    total = 0
    y = x
    for _ in range(K.f):
        total = K.add(total, y)
        y = K.power(y, K.p)
    assert total < K.p, "trace must land in F_p"
    return total


@pytest.mark.parametrize("p, f", SMALL_FIELDS)
def test_tables_are_consistent(p, f):
    K = build_field(p, f)
    n = K.q - 1
    assert K.exp[0] == 1
    assert len(set(K.exp.tolist())) == n
    rng = random.Random(p * 100 + f)
    for _ in range(200):
        i, j = rng.randrange(n), rng.randrange(n)
        assert K.mul(int(K.exp[i]), int(K.exp[j])) == K.exp[(i + j) % n]


@pytest.mark.parametrize("p, f", SMALL_FIELDS)
def test_trace_matches_frobenius_sum(p, f):
    K = build_field(p, f)
    for x in K.elements():
        assert absolute_trace(K, x) == frobenius_trace(K, x)


@pytest.mark.parametrize("p, f", SMALL_FIELDS)
def test_trace_fibres_have_size_q_over_p(p, f):
    K = build_field(p, f)
    assert np.bincount(K.trace, minlength=p).tolist() == [K.q // p] * p


def test_prime_field_trace_is_identity(F3):
    assert F3.q == 3
    assert [absolute_trace(F3, x) for x in range(3)] == [0, 1, 2]


def test_trace_of_one_in_F9(F9):
    assert absolute_trace(F9, 1) == 2
    assert absolute_trace(F9, 0) == 0


def test_F243_frobenius_fixes_everything(F243):
    assert all(F243.power(x, 243) == x for x in F243.elements())


def test_F81_group_is_cyclic_of_order_80(F81):
    g = F81.generator
    orders = [k for k in range(1, 81) if F81.power(g, k) == 1]
    assert orders[0] == 80


@pytest.mark.parametrize("p, f", [(3, 4), (5, 2), (2, 4)])
def test_frobenius_is_additive(p, f):
    K = build_field(p, f)
    rng = random.Random(7)
    for _ in range(1000):
        x, y = rng.randrange(K.q), rng.randrange(K.q)
        assert K.power(K.add(x, y), p) == K.add(K.power(x, p), K.power(y, p))


@pytest.mark.parametrize("p, f", [(3, 4), (5, 2)])
def test_trace_is_Fp_linear(p, f):
    K = build_field(p, f)
    rng = random.Random(11)
    for _ in range(500):
        x, y, c = rng.randrange(K.q), rng.randrange(K.q), rng.randrange(p)
        lhs = absolute_trace(K, K.add(K.mul(c, x) if c else 0, y))
        assert lhs == (c * absolute_trace(K, x) + absolute_trace(K, y)) % p


def test_subfield_of_F81():
    K = build_field(3, 4)
    # elements with x^9 = x form F_9 inside F_81
    sub = [x for x in K.elements() if K.power(x, 9) == x]
    assert len(sub) == 9
    assert all(K.add(a, b) in sub and K.mul(a, b) in sub for a in sub for b in sub)


def test_modulus_is_first_irreducible():
    m = first_irreducible(3, 2)
    assert m == (1, 0, 1)  # x^2 + 1
    assert not is_irreducible([2, 0, 1], 3)  # x^2 - 1 = (x-1)(x+1)
    assert is_irreducible([1, 2, 0, 0, 0, 1], 3)


@pytest.mark.parametrize("p, m, expected", [(3, 22, 5), (3, 8, 2), (5, 2, 1), (7, 2, 1), (5, 6, 2)])
def test_mult_order(p, m, expected):
    assert mult_order(p, m) == expected
    assert pow(p, expected, m) == 1 % m


def test_mult_order_rejects_non_coprime():
    with pytest.raises(ValueError):
        mult_order(3, 6)


def test_bound_and_bad_inputs():
    with pytest.raises(ValueError):
        build_field(3, 13)
    with pytest.raises(ValueError):
        build_field(4, 1)
    with pytest.raises(ValueError):
        build_field(3, 4, bound=80)


def test_cache_roundtrip(tmp_path):
    K = build_field(3, 3, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1 and files[0].read_bytes()[:5] == b"MSFT1"
    again = load_field(files[0].read_bytes())
    assert again.modulus == K.modulus
    assert np.array_equal(again.exp, K.exp) and np.array_equal(again.trace, K.trace)


def test_cache_layout_and_crc():
    K = build_field(3, 2)
    blob = dump_field(K)
    # magic, p, f, modulus bytes, exp table, trace table, crc
    assert len(blob) == 5 + 8 + 3 + 4 * 8 + 9 + 4
    assert blob[5:13] == (3).to_bytes(4, "little") + (2).to_bytes(4, "little")
    bad = bytearray(blob)
    bad[20] ^= 1
    with pytest.raises(ValueError, match="CRC"):
        load_field(bytes(bad))


def test_corrupt_cache_is_rebuilt(tmp_path):
    K = build_field(5, 2, cache_dir=tmp_path)
    path = next(tmp_path.iterdir())
    path.write_bytes(b"garbage")
    from finmono.finite_field import _build_cached

    _build_cached.cache_clear()
    K2 = build_field(5, 2, cache_dir=tmp_path)
    assert np.array_equal(K.exp, K2.exp)


def test_alternate_generator():
    K = build_field(3, 3)
    K2 = K.with_generator(5)
    assert K2.generator == K.power(K.generator, 5)
    with pytest.raises(ValueError):
        K.with_generator(2)


def test_parse_field():
    assert parse_field("3^4") == (3, 4)
    assert parse_field("7") == (7, 1)
