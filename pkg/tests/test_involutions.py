import pytest

from bbrecog.errors import ValidationError
from bbrecog.involutions import (
    ProtoInvolution,
    as_two_involutions,
    augment_by_proto,
    bisect,
    centralizer_of_involution,
    conjugation_proto,
    engine_for,
    find_involution,
    find_involution_even_char,
    involution_of,
    j_of,
    proto_from_local,
    reify,
)

from conftest import element_order, enumerate_group, pgl2, psl2

Q13 = pgl2(13, seed=21)
ALL13 = enumerate_group(Q13, 2184)


def brute_centralizer(box, t, elements):
    return [x for x in elements if box.commutes(x, t)]


def involution_classes(box, elements):
    """Involutions split by whether their centralizer has order 2(q-1) or 2(q+1)."""
    out = {}
    for x in elements:
        if box.is_involution(x):
            out.setdefault(len(brute_centralizer(box, x, elements)), []).append(x)
    return out


CLASSES13 = involution_classes(Q13, ALL13)


def test_involution_class_sizes():
    # split class: q(q+1)/2 involutions with centralizer 2(q-1); the other q(q-1)/2
    assert {k: len(v) for k, v in CLASSES13.items()} == {24: 91, 28: 78}


def test_find_involution_hits_both_classes():
    seen = set()
    split = {Q13.key(x) for x in CLASSES13[24]}
    for _ in range(200):
        t = find_involution(Q13)
        assert Q13.is_involution(t)
        seen.add(Q13.key(t) in split)
    assert seen == {True, False}


def test_involution_of_matches_power():
    for _ in range(100):
        x = Q13.random()
        o = element_order(Q13, x)
        h = involution_of(Q13, x)
        if o % 2:
            assert h is None
        else:
            assert Q13.eq(h, Q13.power(x, o // 2))


def test_centralizer_samples_commute_and_fill_it():
    t = CLASSES13[28][0]
    cent = centralizer_of_involution(Q13, t)
    seen = set()
    for _ in range(600):
        c = cent.sample()
        assert Q13.commutes(c, t)
        seen.add(Q13.key(c))
    assert len(seen) == 28 == len(brute_centralizer(Q13, t, ALL13))


def test_centralizer_needs_involution():
    with pytest.raises(ValidationError):
        centralizer_of_involution(Q13, Q13.identity)


def test_reify_conjugation_proto():
    for _ in range(10):
        t = find_involution(Q13)
        assert Q13.eq(reify(Q13, conjugation_proto(Q13, t)), t)


def test_proto_from_local_and_augmentation():
    t = find_involution(Q13)
    gens = [Q13.random() for _ in range(3)]
    proto = proto_from_local([conjugation_proto(Q13, t, 2), (Q13, gens, lambda g: Q13.conj(g, t))])
    assert proto.realized_by(t)
    aug = augment_by_proto(proto)
    for _ in range(30):
        (a, b), flag = aug.random()
        assert Q13.eq(b, Q13.conj(a, t))
    delta = ((Q13.identity, Q13.identity), 1)
    assert aug.is_identity(aug.mul(delta, delta))


def test_proto_needs_pairs():
    with pytest.raises(ValidationError):
        ProtoInvolution(Q13, [])


def test_j_of_commuting_even_case_matches_product():
    t = CLASSES13[28][0]
    cent = brute_centralizer(Q13, t, ALL13)
    s = next(x for x in cent if Q13.is_involution(x) and not Q13.eq(x, t))
    assert Q13.eq(j_of(Q13, s, t).value, Q13.mul(s, t))


def test_j_of_commutes_with_both():
    for _ in range(200):
        s, t = find_involution(Q13), find_involution(Q13)
        if Q13.eq(s, t):
            continue
        out = j_of(Q13, s, t)
        if out.ok:
            j = out.value
            assert Q13.is_involution(j) and Q13.commutes(j, s) and Q13.commutes(j, t)
        else:
            assert element_order(Q13, out.u) == 13


def test_j_of_unipotent_product():
    s = Q13.normalize((1, 0, 0, 12))
    t = Q13.mul(s, Q13.normalize((1, 1, 0, 1)))
    out = j_of(Q13, s, t)
    assert not out.ok and element_order(Q13, out.u) == 13


def test_bisect_conjugate_pairs():
    for _ in range(100):
        i = find_involution(Q13)
        g = Q13.random()
        j = Q13.conj(i, g)
        x = bisect(Q13, i, j)
        assert Q13.is_involution(x) or Q13.eq(i, j)
        assert Q13.eq(Q13.conj(i, x), j)


def test_bisect_order_four_product():
    # conjugate involutions multiply into PSL2, which has order-4 elements at q = 17
    box = pgl2(17, seed=5)
    done = 0
    for _ in range(400):
        i = find_involution(box)
        j = box.conj(i, box.random())
        if element_order(box, box.mul(i, j)) == 4:
            x = bisect(box, i, j)
            assert box.eq(box.conj(i, x), j)
            done += 1
    assert done


def test_as_two_involutions_order_fifteen():
    box = pgl2(29, seed=3)
    x = next(x for x in (box.random() for _ in range(2000)) if element_order(box, x) == 15)
    r, r2 = as_two_involutions(box, x)
    assert box.is_involution(r) and box.is_involution(r2) and box.eq(box.mul(r, r2), x)


def test_as_two_involutions_rejects_involutions():
    with pytest.raises(ValidationError):
        as_two_involutions(Q13, find_involution(Q13))


def _in_sylow(box, x):
    """x - 1 is nilpotent, so x lies in U = {1 + l N}, a Sylow 2-subgroup of
    order q; check U has q commuting elements of order at most 2."""
    F = box.field
    a, b, c, d = box.normalize(x)
    root = F.iinv(F.isqrt(F.isub(F.imul(a, d), F.imul(b, c))))  # scale to det 1
    a, b, c, d = (F.imul(root, v) for v in (a, b, c, d))
    # normalized first entry is 1 unless a = 0
    N = (F.isub(a, 1), b, c, F.isub(d, 1))
    sq = (F.iadd(F.imul(N[0], N[0]), F.imul(N[1], N[2])), F.iadd(F.imul(N[0], N[1]), F.imul(N[1], N[3])),
          F.iadd(F.imul(N[2], N[0]), F.imul(N[3], N[2])), F.iadd(F.imul(N[2], N[1]), F.imul(N[3], N[3])))
    if any(sq):
        return False
    U = {box.key(box.normalize((F.iadd(1, F.imul(l, N[0])), F.imul(l, N[1]), F.imul(l, N[2]), F.iadd(1, F.imul(l, N[3])))))
         for l in F.elements()}
    return len(U) == F.q


@pytest.mark.parametrize("q", [4, 8, 16, 32])
def test_even_characteristic_involutions(q):
    for seed in range(5):
        box = psl2(q, seed=seed)
        x = find_involution_even_char(box)
        assert box.is_involution(x) and _in_sylow(box, x)


def test_engine_budget_grows_with_confidence():
    box = pgl2(7)
    b20 = engine_for(box, 20).budget(0.5)
    b40 = engine_for(box, 40).budget(0.5)
    assert b40 == 2 * b20
    engine_for(box, 20)
