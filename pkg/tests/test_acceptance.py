"""Acceptance criteria, one test per criterion with its runtime limit.

The terminal summary prints a PASS/FAIL line per test (see conftest.py).
"""

import itertools
import os
import random
import time
from contextlib import contextmanager

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finmono.criteria import (
    SystemSpec,
    Twist,
    check_digit_criterion,
    check_digit_criterion_A,
    check_V_criterion,
    gauss_criterion,
    mellin_oracle,
)
from finmono.digits import FractionModZ, digit_sum_abs, digit_sum_lower, digit_sum_upper, kubert_V, kubert_V_RL
from finmono.finite_field import build_field
from finmono.proofcheck import CASE_LEMMAS, verify_base_cases, verify_case_lemma, verify_induction_assembly
from finmono.search import is_known_case, search
from finmono.traces import co3_table, trace_table, wild_inertia_image_order

pytestmark = pytest.mark.acceptance

JOBS = os.cpu_count() or 1
CO3_ONE = SystemSpec(3, 23, (1,), Twist.QUADRATIC)
CO3_TWO = SystemSpec(3, 23, (1, 5), Twist.QUADRATIC)


@contextmanager
def within(seconds: float):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, limit {seconds}s"


def test_criterion_01_co3_trace_set_F81():
    with within(1):
        tab = co3_table(build_field(3, 4), "i")
        assert tab.all_rational() and len(tab.entries) == 81
        assert tab.support() == {-2, -1, 0, 1, 2, 3}


def test_criterion_02_co3_trace_set_F243():
    with within(5):
        tab = co3_table(build_field(3, 5), "i")
        assert tab.all_rational() and len(tab.entries) == 243
        assert tab.support() == {-5, -2, -1, 0, 1, 2}


def test_criterion_03_integrality_end_to_end():
    with within(120):
        for f in (1, 2, 3, 4):
            K = build_field(3, f)
            tab = trace_table(CO3_TWO, K)
            assert len(tab.entries) == K.q**2
            assert not tab.failures
            assert tab.all_rational()


def test_criterion_04_proof_verification():
    with within(60):
        assert all(v.passed for v in verify_base_cases(4))
        assert all(verify_case_lemma(lemma).passed for lemma in CASE_LEMMAS)
        for f in (5, 6):
            v = verify_induction_assembly(f)
            assert not v.sampled and v.pairs_checked == 9**f
            assert v.passed


def test_criterion_05_co3_digit_criterion():
    with within(600):
        for f in range(1, 7):
            assert check_digit_criterion(CO3_TWO, f, jobs=JOBS).passed, f
        for f in range(1, 8):
            assert check_digit_criterion_A(CO3_TWO, f, 2, jobs=JOBS).passed, f


def test_criterion_06_known_cases():
    with within(60):
        for p, D in [(3, 2), (3, 5), (3, 7), (3, 17), (3, 61), (5, 3), (5, 13), (5, 9)]:
            assert is_known_case(p, D) is not None
            spec = SystemSpec(p, D, (1,), Twist.QUADRATIC)
            for f in range(1, 6):
                assert check_digit_criterion(spec, f).passed, (p, D, f)


def _search_expectation():
    known = {D for D in range(2, 501) if D % 3 and is_known_case(3, D)}
    return known | {23}


def test_criterion_07_search_reproduction():
    with within(1800):
        survivors = {s.D for s in search(3, range(2, 501), Twist.QUADRATIC, 5, jobs=JOBS)}
    expected = _search_expectation()
    assert expected <= survivors
    extras = survivors - expected
    still = {s.D for s in search(3, sorted(extras), Twist.QUADRATIC, 8, jobs=JOBS)}
    assert not still, f"survivors at f_max=8 outside known cases and 23: {sorted(still)}"


def test_criterion_07_extras_eliminated_by_f11():
    # the extra survivors of the f_max=8 sieve are all removed by f <= 11
    survivors = {s.D for s in search(3, range(2, 501), Twist.QUADRATIC, 8, jobs=JOBS)}
    extras = sorted(survivors - _search_expectation())
    assert extras
    still = {s.D for s in search(3, extras, Twist.QUADRATIC, 11, jobs=JOBS)}
    assert not still


@st.composite
def small_specs(draw):
    p = draw(st.sampled_from([3, 5]))
    D = draw(st.integers(3, 30).filter(lambda D: D % p))
    r = draw(st.integers(1, 2))
    d = (1,)
    if r == 2:
        pool = [x for x in range(2, D) if x % p]
        d = (1, draw(st.sampled_from(pool)))
    return SystemSpec(p, D, d, draw(st.sampled_from(list(Twist))))


_triangle_started: list[float] = []


@settings(max_examples=50, deadline=None, derandomize=True)
@given(small_specs())
def _triangle(spec):
    for f in (1, 2, 3):
        verdicts = {
            "digit": check_digit_criterion(spec, f).verdict,
            "V": check_V_criterion(spec, f).verdict,
            "gauss": gauss_criterion(spec, build_field(spec.p, f)).verdict,
        }
        assert len(set(verdicts.values())) == 1, (str(spec), f, verdicts)
    if spec.p == 3:
        K = build_field(3, 2)
        n = K.q - 1
        target = n // 2 if spec.twist is Twist.QUADRATIC else 0
        for js in itertools.product(range(n), repeat=spec.r + 1):
            if sum(d * j for d, j in zip(spec.exponents, js)) % n != target:
                continue
            direct, closed = mellin_oracle(spec, K, js)
            assert direct == closed


def test_criterion_08_oracle_triangle():
    with within(300):
        _triangle()


def test_criterion_09_digit_identities():
    with within(60):
        for p, f, k in itertools.product((3, 5), (1, 2, 3), (1, 2, 3)):
            lift = (p ** (f * k) - 1) // (p**f - 1)
            for x in range(p**f - 1):
                assert digit_sum_upper(lift * x, p, f * k) == k * digit_sum_upper(x, p, f)
                assert digit_sum_lower(lift * x, p, f * k) == k * digit_sum_lower(x, p, f)
        rng = random.Random(9)
        for _ in range(10**4):
            p = rng.choice((3, 5))
            x, y = rng.randrange(1, 10**9), rng.randrange(1, 10**9)
            f = rng.randrange(1, 12)
            assert digit_sum_abs(x + y, p) <= digit_sum_abs(x, p) + digit_sum_abs(y, p)
            assert digit_sum_upper(x, p, f) <= digit_sum_abs(x, p)
            assert digit_sum_abs(p * x, p) == digit_sum_abs(x, p)
        for p in (3, 5, 7, 11):
            for den in range(1, 201):
                if den % p == 0:
                    continue
                for num in range(den):
                    x = FractionModZ(num, den)
                    assert kubert_V(x, p) + kubert_V_RL(-x, p) == 1


def test_criterion_10_wild_inertia():
    with within(1):
        assert wild_inertia_image_order(3, 23) == 243
