"""The black-box projective plane of involutions in a group encrypting SO3.

Points are involutions (regular points of the plane); lines are recorded by
generating data, never by listing their points.  A toric line is the set of
involutions commuting with its pole; a parabolic line appears only when two
involutions multiply to a unipotent element.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .blackbox import BlackBox, GroupElement
from .errors import BudgetExhausted, ValidationError
from .involutions import InvolutionPoint, centralizer_of_involution, engine_for, find_involution, j_of, point_of

__all__ = [
    "InvolutionPoint",
    "LineKind",
    "PlaneLine",
    "point_of",
    "collinear",
    "join",
    "meet",
    "pole",
    "polar_project",
    "on_line",
    "sample_line",
    "harmonic_conjugate",
]


class LineKind(enum.Enum):
    TORIC = "toric"
    PARABOLIC = "parabolic"


@dataclass
class PlaneLine:
    """A line through two involutions.

    Toric: ``pole`` is j(s,t), ``group_gens`` generate its torus and
    ``flip`` is an involution inverting it.  Parabolic: ``group_gens``
    generate the unipotent group U and ``flip`` is an involution t with the
    line's involutions forming the coset U t.
    """

    kind: LineKind
    group_gens: list
    flip: GroupElement
    pole: Optional[GroupElement] = None
    through: tuple = field(default_factory=tuple)


def _as_involution(x) -> GroupElement:
    return x.s if isinstance(x, InvolutionPoint) else x


def collinear(box: BlackBox, r, s, t) -> bool:
    r, s, t = (_as_involution(v) for v in (r, s, t))
    prod = box.mul(box.mul(r, s), t)
    return box.is_involution(prod)


def join(box: BlackBox, s, t) -> PlaneLine:
    s, t = _as_involution(s), _as_involution(t)
    if box.eq(s, t):
        raise ValidationError("join needs two distinct points")
    out = j_of(box, s, t)
    if out.ok:
        pj = point_of(box, out.value)
        return PlaneLine(LineKind.TORIC, list(pj.torus_gens), pj.w, out.value, (s, t))
    u = out.u
    ps = point_of(box, s)
    gens = [u] + [box.conj(u, r) for r in ps.torus_gens[:3]]
    return PlaneLine(LineKind.PARABOLIC, gens, t, None, (s, t))


def pole(box: BlackBox, line: PlaneLine) -> GroupElement:
    if line.kind is not LineKind.TORIC:
        raise ValidationError("a parabolic line has its pole on the quadric")
    return line.pole


def meet(box: BlackBox, k: PlaneLine, l: PlaneLine):
    """The common involution of two toric lines, or Unipotent when they meet
    on the quadric."""
    if k.kind is not LineKind.TORIC or l.kind is not LineKind.TORIC:
        raise ValidationError("meet needs toric lines")
    if box.eq(k.pole, l.pole):
        raise ValidationError("meet needs distinct lines")
    return j_of(box, k.pole, l.pole)


def meet_poles(box: BlackBox, a: GroupElement, b: GroupElement):
    """Meet of the lines with poles a and b."""
    return j_of(box, a, b)


def polar_project(box: BlackBox, s: GroupElement, x: GroupElement):
    """Projection of x from s onto the polar line of s: j(j(x,s), s)."""
    first = j_of(box, x, s)
    if not first.ok:
        return first
    return j_of(box, first.value, s)


def on_line(box: BlackBox, line: PlaneLine, x: GroupElement) -> bool:
    if not box.is_involution(x):
        return False
    if line.kind is LineKind.TORIC:
        return not box.eq(x, line.pole) and box.commutes(x, line.pole)
    # x lies on a parabolic line when x t falls in U = C(u)
    prod = box.mul(x, line.flip)
    return box.commutes(prod, line.group_gens[0])


def sample_line(box: BlackBox, line: PlaneLine) -> GroupElement:
    """A random involution on the line."""
    if line.kind is LineKind.TORIC:
        eng = engine_for(box)
        cent = centralizer_of_involution(box, line.pole)
        for _ in range(eng.budget(0.25)):
            c = cent.sample()
            if box.is_involution(c) and not box.eq(c, line.pole):
                return c
        raise ValidationError("could not sample the line")
    elem = box.identity
    for g in line.group_gens:
        elem = box.mul(elem, box.power(g, box.rng.randrange(box.exponent.E)))
    return box.mul(elem, line.flip)


def harmonic_conjugate(box: BlackBox, a, b, c):
    """Ok(d) for the fourth harmonic point d of collinear involutions a, b, c,
    or Unipotent when d lies on the quadric.

    Complete quadrangle: for X off the line and Y on X v c, the points
    E = (a v X) ^ (b v Y) and F = (b v X) ^ (a v Y) span a line through d.
    Quadrangles that touch the quadric are discarded and redrawn.
    """
    a, b, c = (_as_involution(v) for v in (a, b, c))
    if not collinear(box, a, b, c) or len({box.key(v) for v in (a, b, c)}) < 3:
        raise ValidationError("harmonic_conjugate needs three distinct collinear points")
    base = join(box, a, b)
    if base.kind is not LineKind.TORIC:
        raise ValidationError("harmonic_conjugate needs a toric line")
    eng = engine_for(box)
    for _ in range(eng.budget(0.25)):
        X = find_involution(box)
        if on_line(box, base, X):
            continue
        xc = join(box, X, c)
        if xc.kind is not LineKind.TORIC:
            continue
        Y = sample_line(box, xc)
        if box.eq(Y, X) or box.eq(Y, c):
            continue
        E = _meet_points(box, a, X, b, Y)
        F = _meet_points(box, b, X, a, Y)
        if E is None or F is None or box.eq(E, F):
            continue
        ef = j_of(box, E, F)
        if not ef.ok:
            continue
        # d is determined by a, b, c; a failed meet means d is isotropic
        return j_of(box, ef.value, base.pole)
    raise BudgetExhausted("harmonic_conjugate: every quadrangle met the quadric")


def _meet_points(box, p1, p2, q1, q2):
    """(p1 v p2) ^ (q1 v q2), or None when any step is degenerate."""
    if box.eq(p1, p2) or box.eq(q1, q2):
        return None
    k, l = j_of(box, p1, p2), j_of(box, q1, q2)
    if not (k.ok and l.ok) or box.eq(k.value, l.value):
        return None
    m = j_of(box, k.value, l.value)
    return m.value if m.ok else None
