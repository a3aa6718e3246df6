"""A black-box Sym4 inside SO3 and the coordinate frame it defines.

In frame coordinates the quadric is x1^2 + x2^2 + x3^2 = 0 and

    e1 = (1,0,0)   e2 = (0,1,0)   e3 = (0,0,1)
    d1 = (0,1,1)   d2 = (1,0,1)   d3 = (1,-1,0)

theta = x^-1 cycles e1 -> e2 -> e3 and d1 -> d2 -> d3.  The affine chart is
x3 = 1; the x1-axis is the line e1 v e3 (pole e2) and the x2-axis is e2 v e3
(pole e1).  Conjugation by d3 carries (x,0,1) to (0,x,1) and back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .blackbox import BlackBox, GroupElement, odd_sqrt_or_none
from .errors import BudgetExhausted, ValidationError
from .involutions import centralizer_of_involution, engine_for, find_involution, j_of
from .outcomes import Ok, Unipotent


@dataclass(frozen=True)
class SpinorFrame:
    e1: GroupElement
    e2: GroupElement
    e3: GroupElement
    theta: GroupElement
    d1: GroupElement
    d2: GroupElement
    d3: GroupElement
    s4: GroupElement
    elements: tuple  # the 24 elements of H

    def to_json(self, box) -> dict:
        enc = box.element_to_json if hasattr(box, "element_to_json") else (lambda x: x)
        return {name: enc(getattr(self, name)) for name in ("e1", "e2", "e3", "theta", "d1", "d2", "d3", "s4")}

    @classmethod
    def from_json(cls, box, data: dict) -> "SpinorFrame":
        dec = box.element_from_json if hasattr(box, "element_from_json") else (lambda x: x)
        try:
            parts = {k: dec(data[k]) for k in ("e1", "e2", "e3", "theta", "d1", "d2", "d3", "s4")}
        except KeyError as exc:
            raise ValidationError(f"frame missing {exc}") from exc
        elements = tuple(closure(box, [parts["theta"], parts["d1"], parts["s4"]], limit=24))
        frame = cls(elements=elements, **parts)
        if not frame_relations(box, frame):
            raise ValidationError("stored frame fails the Sym4 relations")
        return frame


def closure(box: BlackBox, gens, limit: int) -> list:
    """Elements of <gens> by breadth-first search; stops past ``limit``."""
    seen = {box.key(box.identity): box.identity}
    frontier = [box.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = box.mul(x, g)
                k = box.key(y)
                if k not in seen:
                    seen[k] = y
                    nxt.append(y)
                    if len(seen) > limit:
                        return list(seen.values())
        frontier = nxt
    return list(seen.values())


def _order_four_element(box: BlackBox, h: GroupElement) -> Optional[GroupElement]:
    """An element of order 4 in <h> when 4 divides the order of h."""
    cur = box.power(h, box.exponent.n)
    if box.is_identity(cur) or box.is_identity(box.mul(cur, cur)):
        return None
    # cur has order 2^l with l >= 2; square down to order 4
    while True:
        sq = box.mul(cur, cur)
        if box.is_identity(box.mul(sq, sq)):
            return cur
        cur = sq


def order_four_in_centralizer(box: BlackBox, i: GroupElement) -> Optional[GroupElement]:
    """Search C(i) for an element of order divisible by 4; one-sided error."""
    cent = centralizer_of_involution(box, i)
    for _ in range(engine_for(box).budget(0.25)):
        s = _order_four_element(box, cent.sample())
        if s is not None:
            return s
    return None


def is_right_type(box: BlackBox, i: GroupElement) -> bool:
    if not box.is_involution(i):
        raise ValidationError("is_right_type needs an involution")
    return order_four_in_centralizer(box, i) is not None


def order_three_permuting(box: BlackBox, i, j, k, g) -> Optional[GroupElement]:
    """One trial of the order-3 construction: x with k^x = j, j^x = i.

    Returns None when h1 = i j^g or h2 = j s' has even order.
    """
    h1 = box.mul(i, box.conj(j, g))
    n1 = odd_sqrt_or_none(box, h1)
    if n1 is None:
        return None
    g_n1 = box.mul(g, box.inv(n1))
    s_prime = box.conj(k, g_n1)
    h2 = box.mul(j, s_prime)
    n2 = odd_sqrt_or_none(box, h2)
    if n2 is None:
        return None
    return box.mul(g_n1, box.inv(n2))


def build_sym4(box: BlackBox) -> SpinorFrame:
    eng = engine_for(box)
    budget = eng.budget(0.25)
    for _ in range(budget):
        i = find_involution(box)
        s = order_four_in_centralizer(box, i)
        if s is not None:
            break
    else:
        raise BudgetExhausted("build_sym4: no right-type involution")
    # right-type involutions inverting the torus of i: the order-4 element s
    # squares to i, and j^s = ij for every reflection j of C(i)
    cent = centralizer_of_involution(box, i)
    j = None
    for _ in range(budget * 4):
        c = cent.sample()
        if box.is_involution(c) and not box.eq(c, i) and is_right_type(box, c):
            j = c
            break
    if j is None:
        raise BudgetExhausted("build_sym4: no right-type involution commuting with the first")
    k = box.mul(i, j)
    x = None
    for _ in range(budget * 2):
        x = order_three_permuting(box, i, j, k, box.random())
        if x is not None:
            break
    if x is None:
        raise BudgetExhausted("build_sym4: order-3 construction kept failing")
    theta = box.inv(x)
    elements = closure(box, [theta, s], limit=24)
    if len(elements) != 24:
        raise BudgetExhausted("build_sym4: generated subgroup is not Sym4")
    d1 = None
    theta_inv = x
    for h in elements:
        if (
            box.is_involution(h)
            and box.eq(box.conj(theta, h), theta_inv)
            and box.commutes(h, i)
        ):
            d1 = h
            break
    if d1 is None:
        raise BudgetExhausted("build_sym4: no involution normalizing <theta> centralizes e1")
    d2 = box.conj(d1, theta)
    d3 = box.conj(d2, theta)
    frame = SpinorFrame(i, j, k, theta, d1, d2, d3, s, tuple(elements))
    if not frame_relations(box, frame):
        raise BudgetExhausted("build_sym4: frame relations failed")
    return frame


def frame_relations(box: BlackBox, f: SpinorFrame) -> bool:
    e1, e2, e3, th, d1, d2, d3 = f.e1, f.e2, f.e3, f.theta, f.d1, f.d2, f.d3
    checks = [
        all(box.is_involution(e) for e in (e1, e2, e3)),
        box.commutes(e1, e2) and box.commutes(e1, e3) and box.commutes(e2, e3),
        box.is_identity(box.mul(box.mul(e1, e2), e3)),
        box.is_identity(box.power(th, 3)) and not box.is_identity(th),
        box.eq(box.conj(e1, th), e2) and box.eq(box.conj(e2, th), e3),
        box.commutes(d1, e1) and box.eq(box.conj(e2, d1), e3),
        box.eq(box.conj(d2, d3), d1),
        box.eq(box.conj(e1, d3), e2),
        len(f.elements) == 24,
    ]
    return all(checks)


# -- coordinates --------------------------------------------------------------


def to_x1_axis(box: BlackBox, frame: SpinorFrame, y: GroupElement) -> GroupElement:
    """(0,y,1) on the x2-axis -> (y,0,1) on the x1-axis; also the inverse."""
    return box.conj(y, frame.d3)


def affine_coordinates(frame: SpinorFrame, box: BlackBox, x: GroupElement):
    """Ok((a, b)) with a, b points of the x1-axis such that x = (a, b, 1)."""
    if box.commutes(x, frame.e3) and (box.eq(x, frame.e1) or box.eq(x, frame.e2)):
        raise ValidationError("points at infinity have no affine coordinates")
    a = _project(box, frame.e2, x)
    if not a.ok:
        return a
    b = _project(box, frame.e1, x)
    if not b.ok:
        return b
    return Ok((a.value, to_x1_axis(box, frame, b.value)))


def _project(box, s, x):
    """Polar projection from s, with the fixed-point case short-circuited."""
    if box.eq(x, s):
        raise ValidationError("cannot project a pole onto its own polar")
    if box.commutes(x, s):
        return Ok(x)
    first = j_of(box, x, s)
    if not first.ok:
        return first
    return j_of(box, first.value, s)


def point_from_coordinates(frame: SpinorFrame, box: BlackBox, a: GroupElement, b: GroupElement):
    """The involution (a, b, 1) from x1-axis points a and b; Unipotent when
    the point lies on the quadric."""
    b2 = to_x1_axis(box, frame, b)
    # a v e2 has pole a*e2 and b2 v e1 has pole b2*e1
    return j_of(box, box.mul(a, frame.e2), box.mul(b2, frame.e1))


def dump_frame(frame: SpinorFrame, box, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(frame.to_json(box), fh)


def load_frame(box, path: str) -> SpinorFrame:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read frame {path}: {exc}") from exc
    return SpinorFrame.from_json(box, data)
