"""Brute-force oracles computed in the explicit matrix model."""

from __future__ import annotations

from collections import Counter

import pytest

from bbrecog.fields import ExplicitField
from bbrecog.frame import closure
from bbrecog.matrix_oracle import make_pgl2_box, make_psl2_box


def element_order(box, x, limit=100_000):
    k, cur = 1, x
    while not box.is_identity(cur):
        cur = box.mul(cur, x)
        k += 1
        if k > limit:
            raise AssertionError("order exceeds limit")
    return k


def enumerate_group(box, size):
    """All ``size`` elements; random generators may land in a proper
    subgroup, so redraw until the closure is big enough."""
    for _ in range(20):
        els = closure(box, [box.random() for _ in range(4)], size + 1)
        if len(els) >= size:
            return els
    return els


def order_histogram(box, elements):
    return dict(Counter(element_order(box, x) for x in elements))


def traceless_vector(box, x):
    """Adjoint-module vector (a, b, c) of an involution [[a, b], [c, -a]]
    over a prime field."""
    p = box.field.p
    a, b, c, d = box.normalize(x)
    assert (a + d) % p == 0, "involutions are traceless"
    return (a % p, b % p, c % p)


def killing(p, v, w):
    return (2 * v[0] * w[0] + v[1] * w[2] + v[2] * w[1]) % p


def isotropic(p, v):
    return (v[0] * v[0] + v[1] * v[2]) % p == 0


def det3(p, rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return (a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)) % p


@pytest.fixture(scope="session")
def pgl2_small():
    """PGL2(q) boxes with their full element lists, q = 5 and 7."""
    out = {}
    for q in (5, 7):
        box = make_pgl2_box(ExplicitField(q), seed=11)
        out[q] = (box, enumerate_group(box, q * (q * q - 1)))
    return out


def pgl2(q, seed=0):
    p, k = _split(q)
    return make_pgl2_box(ExplicitField(p, k), seed=seed)


def psl2(q, seed=0):
    p, k = _split(q)
    return make_psl2_box(ExplicitField(p, k), seed=seed)


def _split(q):
    from sympy import factorint

    (p, k), = factorint(q).items()
    return p, k


# criterion number -> (status, title, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {status}: {title} [{detail}]")
