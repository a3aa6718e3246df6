import math

import pytest
from hypothesis import given, settings, strategies as st
from sympy import isprime, primerange

from bbrecog.errors import ValidationError
from bbrecog.pipeline import build_field, run_unipotent
from bbrecog.serendipity import (
    ONE_PATH,
    THREE_PATH,
    find_characteristic_and_unipotent,
    quadric_pairs,
    unipotent_subgroup,
)

from conftest import element_order


def setup(q, seed=1, kind="PGL2"):
    p, k = q, 1
    for base in (2, 3, 5, 7):
        e = round(math.log(q, base))
        if base ** e == q and e > 1:
            p, k = base, e
    return build_field({"type": kind, "field": {"p": p, "k": k}}, seed, 20)


@pytest.mark.parametrize("q,p", [(13, 13), (25, 5), (17, 17), (7, 7)])
def test_walk_finds_characteristic(q, p):
    s = setup(q, kind="PSL2")
    cert = find_characteristic_and_unipotent(s.X, s.K)
    assert cert.p == p
    assert cert.verify(s.X)
    assert element_order(s.X, cert.u) == p


@pytest.mark.parametrize("p", [13, 17, 29, 7, 11, 19, 23])
def test_hint_route_by_residue(p):
    s = setup(p)
    cert = find_characteristic_and_unipotent(s.X, s.K, p_hint=p)
    assert cert.route == (ONE_PATH if p % 4 == 1 else THREE_PATH)
    assert cert.verify(s.X)


@pytest.mark.parametrize("hint", [2, 1, 15, 91])
def test_hint_must_be_odd_prime(hint):
    s = setup(13)
    with pytest.raises(ValidationError):
        find_characteristic_and_unipotent(s.X, s.K, p_hint=hint)


def test_certificate_rejects_wrong_prime():
    cert, u, s = run_unipotent({"type": "PSL2", "field": {"p": 13, "k": 1}}, 3, 20)
    bogus = type(cert)(cert.u, 11, cert.witnesses, cert.route)
    assert cert.verify(s.X)
    assert not bogus.verify(s.X)
    assert s.Y.is_identity(s.Y.power(u, 13))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(primerange(7, 2000))))
def test_quadric_pairs_lie_on_quadric(p):
    pairs = list(quadric_pairs(p))
    assert pairs
    for c, d in pairs[:5]:
        assert c % p and d % p
        assert (c * c + d * d + 1) % p == 0


def test_unipotent_subgroup_has_order_q():
    s = setup(13)
    cert = find_characteristic_and_unipotent(s.X, s.K, p_hint=13)
    U = unipotent_subgroup(s.X, cert)
    seen = {s.X.key(s.X.identity)}
    frontier = [s.X.identity]
    while frontier:
        x = frontier.pop()
        for g in U.generators:
            y = s.X.mul(x, g)
            if s.X.key(y) not in seen:
                seen.add(s.X.key(y))
                frontier.append(y)
    assert len(seen) == 13


SWEEP = [13, 29, 101, 821, 10007, 1000003, 5463458053]


def _hint_additions(p):
    s = setup(p)
    before = s.K.ops["add"]
    cert = find_characteristic_and_unipotent(s.X, s.K, p_hint=p)
    assert cert.verify(s.X)
    return s.K.ops["add"] - before


def test_known_p_uses_logarithmic_additions():
    counts = {p: _hint_additions(p) for p in SWEEP}
    for p, n in counts.items():
        assert n <= 8 * math.log2(p) + 8, (p, n)
    # least-squares slope of additions against log2 p stays bounded
    xs = [math.log2(p) for p in SWEEP]
    ys = [counts[p] for p in SWEEP]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    assert 0 < slope < 6
    assert isprime(SWEEP[-1])
