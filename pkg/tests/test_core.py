"""The exact expansion layer: conventions, evaluation, convergents, concat."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfnormal.core import (CFExpansion, Convention, Rational, concat_rationals,
                           convergents, euclid_digits, evaluate,
                           evaluate_digits, expand, gauss_map, gauss_shift,
                           mirror)

rationals = st.integers(2, 5000).flatmap(
    lambda q: st.builds(Rational.reduced, st.integers(1, q - 1), st.just(q)))
conventions = st.sampled_from(list(Convention))
digit_strings = st.lists(st.integers(1, 50), min_size=1, max_size=12)


class TestRational:
    def test_parse(self):
        assert Rational.parse("2/3") == Rational(2, 3)

    @pytest.mark.parametrize("text", ["junk", "2", "1/2/3", "a/b"])
    def test_parse_rejects_garbage(self, text):
        with pytest.raises(ValueError):
            Rational.parse(text)

    @pytest.mark.parametrize("num,den", [(0, 3), (3, 3), (5, 3), (-1, 2)])
    def test_outside_unit_interval_rejected(self, num, den):
        with pytest.raises(ValueError):
            Rational(num, den)

    def test_not_reduced_rejected(self):
        with pytest.raises(ValueError):
            Rational(2, 4)

    def test_reduced_constructor(self):
        assert Rational.reduced(4, 6) == Rational(2, 3)


class TestExpansionValidation:
    def test_short_must_end_high(self):
        with pytest.raises(ValueError):
            CFExpansion((1, 1), Convention.SHORT)

    def test_long_must_end_in_one(self):
        with pytest.raises(ValueError):
            CFExpansion((1, 2), Convention.LONG)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            CFExpansion((), Convention.SHORT)

    def test_zero_digit_rejected(self):
        with pytest.raises(ValueError):
            CFExpansion((1, 0, 2), Convention.SHORT)

    def test_long_singleton_one_allowed(self):
        assert len(CFExpansion((1,), Convention.LONG)) == 1

    def test_convention_from_string(self):
        assert Convention.from_string("Short") is Convention.SHORT
        assert Convention.from_string("long") is Convention.LONG
        with pytest.raises(ValueError):
            Convention.from_string("medium")


def test_euclid_digits_oracle():
    assert euclid_digits(2, 3) == [1, 2]
    assert euclid_digits(1, 2) == [2]
    assert euclid_digits(4, 6) == [1, 2]   # reduces first


def test_expand_oracles():
    assert expand(Rational(2, 3), Convention.SHORT).digits == (1, 2)
    assert expand(Rational(2, 3), Convention.LONG).digits == (1, 1, 1)
    assert expand(Rational(1, 2), Convention.SHORT).digits == (2,)
    assert expand(Rational(1, 2), Convention.LONG).digits == (1, 1)
    assert expand(Rational(3, 5), Convention.LONG).digits == (1, 1, 1, 1)
    assert expand(Rational(3, 5), Convention.SHORT).digits == (1, 1, 2)


@given(rationals, conventions)
def test_evaluate_expand_round_trip(r, conv):
    assert evaluate(expand(r, conv)) == r


@given(rationals)
def test_long_is_short_plus_one(r):
    assert len(expand(r, Convention.LONG)) == len(expand(r, Convention.SHORT)) + 1


def test_evaluate_digits_handles_the_unit_value():
    assert evaluate_digits((1,)) == (1, 1)
    with pytest.raises(ValueError):
        evaluate(CFExpansion((1,), Convention.LONG))


@given(digit_strings)
def test_evaluate_digits_lowest_terms(digs):
    num, den = evaluate_digits(digs)
    assert math.gcd(num, den) == 1


class TestConvergents:
    def test_start_at_zero_over_one(self):
        cs = convergents(expand(Rational(3, 5), Convention.SHORT))
        assert (cs[0].p, cs[0].q, cs[0].index) == (0, 1, 0)
        assert (cs[-1].p, cs[-1].q) == (3, 5)

    @given(rationals, conventions)
    def test_last_convergent_is_the_value(self, r, conv):
        cs = convergents(expand(r, conv))
        assert (cs[-1].p, cs[-1].q) == (r.num, r.den)

    @given(rationals, conventions)
    def test_determinant_alternates(self, r, conv):
        cs = convergents(expand(r, conv))
        for k in range(1, len(cs)):
            assert cs[k].p * cs[k - 1].q - cs[k - 1].p * cs[k].q == (-1) ** (k - 1)

    @given(rationals)
    def test_fibonacci_lower_bound(self, r):
        # q_n >= Fib(n+1), hence the logarithmic length bound downstream
        cs = convergents(expand(r, Convention.SHORT))
        fib_prev, fib = 1, 1   # Fib(1), Fib(2)
        for c in cs[1:]:
            assert c.q >= fib
            fib_prev, fib = fib, fib + fib_prev


class TestConcat:
    def test_small_oracle(self):
        # digits(1/2) ++ digits(1/3) = <2, 3> = 1/(2 + 1/3) = 3/7
        got = concat_rationals(Rational(1, 2), Rational(1, 3), Convention.SHORT)
        assert got == Rational(3, 7)

    @given(rationals, rationals, conventions)
    def test_matches_digit_concatenation(self, a, b, conv):
        digs = expand(a, conv).digits + expand(b, conv).digits
        assert evaluate_digits(digs) == (lambda r: (r.num, r.den))(
            concat_rationals(a, b, conv))

    @settings(max_examples=40)
    @given(rationals, rationals, rationals, conventions)
    def test_associative(self, a, b, c, conv):
        left = concat_rationals(concat_rationals(a, b, conv), c, conv)
        right = concat_rationals(a, concat_rationals(b, c, conv), conv)
        assert left == right


def test_gauss_shift_drops_first_digit():
    e = expand(Rational(3, 5), Convention.SHORT)   # (1, 1, 2)
    shifted = gauss_shift(e)
    assert shifted.digits == (1, 2)
    assert evaluate(shifted) == Rational(2, 3)     # T(3/5) = 2/3
    assert gauss_shift(CFExpansion((2,), Convention.SHORT)) is None
    assert gauss_shift(CFExpansion((1,), Convention.LONG)) is None


def test_gauss_map_values():
    assert gauss_map(0.4) == pytest.approx(0.5)
    assert gauss_map(0.0) == 0.0
    with pytest.raises(ValueError):
        gauss_map(1.0)
    with pytest.raises(ValueError):
        gauss_map(-0.1)


@given(digit_strings)
def test_mirror_involution_preserves_continuant(digs):
    rev = mirror(digs)
    assert mirror(rev) == tuple(digs)
    # the continuant denominator is reversal invariant
    assert evaluate_digits(digs)[1] == evaluate_digits(rev)[1]
