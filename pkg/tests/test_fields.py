import itertools

import pytest
from hypothesis import given, settings, strategies as st

from bbrecog.errors import ValidationError
from bbrecog.fields import ExplicitField


@pytest.mark.parametrize("p,k", [(3, 2), (5, 2), (3, 3), (2, 3), (7, 1)])
def test_field_axioms_exhaustive(p, k):
    F = ExplicitField(p, k)
    els = list(F.elements())
    assert len(els) == p**k
    for a, b in itertools.product(els, repeat=2):
        assert F.iadd(a, b) == F.iadd(b, a)
        assert F.imul(a, b) == F.imul(b, a)
        assert F.iadd(a, F.ineg(a)) == 0
    for a, b, c in itertools.product(els[:9], repeat=3):
        assert F.imul(a, F.iadd(b, c)) == F.iadd(F.imul(a, b), F.imul(a, c))
        assert F.imul(F.imul(a, b), c) == F.imul(a, F.imul(b, c))


def test_f9_square_of_generator():
    # with x^2 + 1 as modulus the generator squares to -1 = (2, 0)
    F = ExplicitField(3, 2, poly=(1, 0, 1))
    x = F.from_digits((0, 1))
    assert F.digits(F.imul(x, x)) == (2, 0)


def test_f25_inverses():
    F = ExplicitField(5, 2)
    for a in F.elements():
        if a:
            assert F.imul(F.iinv(a), a) == 1


def test_f7_square_roots():
    F = ExplicitField(7)
    assert F.isqrt(2) in (3, 4)
    assert F.isqrt(3) is None


@pytest.mark.parametrize("p,k", [(5, 2), (3, 3), (7, 2), (13, 1)])
def test_sqrt_against_squares(p, k):
    F = ExplicitField(p, k)
    squares = {F.imul(a, a) for a in F.elements()}
    for a in F.elements():
        r = F.isqrt(a)
        if a in squares:
            assert F.imul(r, r) == a
        else:
            assert r is None


def test_reducible_polynomial_rejected():
    with pytest.raises(ValidationError):
        ExplicitField(3, 2, poly=(2, 0, 1))  # x^2 - 1


def test_non_prime_characteristic_rejected():
    with pytest.raises(ValidationError):
        ExplicitField(9)


def test_json_round_trip():
    F = ExplicitField(5, 3)
    G = ExplicitField.from_json(F.to_json())
    assert G == F and G.poly == F.poly


def test_field_values_check_their_field():
    a = ExplicitField(5)(2)
    b = ExplicitField(7)(2)
    with pytest.raises(ValidationError):
        a + b


BIG = 2**61 - 1


@settings(max_examples=200)
@given(st.integers(0, BIG - 1), st.integers(0, BIG - 1), st.integers(0, BIG - 1))
def test_prime_field_distributes(a, b, c):
    F = ExplicitField(BIG)
    assert F.imul(a, F.iadd(b, c)) == F.iadd(F.imul(a, b), F.imul(a, c))


@settings(max_examples=200)
@given(st.integers(1, BIG - 1))
def test_prime_field_inverse_and_sqrt(a):
    F = ExplicitField(BIG)
    assert F.imul(a, F.iinv(a)) == 1
    r = F.isqrt(F.imul(a, a))
    assert F.imul(r, r) == F.imul(a, a)


F625 = ExplicitField(5, 4)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5**4 - 1), min_size=3, max_size=3))
def test_extension_field_associates(xs):
    F = F625
    a, b, c = xs
    assert F.imul(F.imul(a, b), c) == F.imul(a, F.imul(b, c))
    assert F.ipow(a, F.q) == a
