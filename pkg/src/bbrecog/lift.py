"""Lift a black box PSL2 (odd characteristic) to a black box SO3 = PGL2.

An outer involutive automorphism alpha of Y is described by its graph in
Y x Y: it inverts the torus through an involution u and fixes u, v = u^y and
z = u v, which pins it down as conjugation by the pole of the line u v in
PGL2.  When that pole already lies in Y the automorphism is inner and a new
y is drawn.  The lifted box is the graph extended by the coordinate swap.

Strings of X are ((a, alpha(a)), flag).  A Y-string reaches X only together
with its image, so ``embed`` is available for elements whose image is known
(the generating pairs and anything sampled from the graph); see
``LiftedBox.embed_pair``.
"""

from __future__ import annotations

from typing import Optional

from .blackbox import BlackBox, GroupElement
from .errors import BudgetExhausted, ValidationError
from .involutions import (
    ProtoInvolution,
    _C2,
    _swap_action,
    engine_for,
    find_involution,
    j_of,
    point_of,
    torus_generator,
)
from .matrix_oracle import SemidirectBox

BRUTE_FORCE_LIMIT = 720
CONSISTENCY_PROBES = 24


class LiftedBox(SemidirectBox):
    """Graph of alpha extended by the swap; isomorphic to Y x| <alpha>."""

    def __init__(self, Y: BlackBox, proto: ProtoInvolution):
        graph = proto.graph_box
        super().__init__(graph, _C2(graph.fork_rng()), _swap_action, rng=graph.fork_rng())
        self.Y = Y
        self.proto = proto
        self.name = f"lift({Y.name})"
        self.delta = ((Y.identity, Y.identity), 1)

    def _fast_power(self, x, e):
        (a, b), flag = x
        Y = self.Y
        if not flag:
            return ((Y.power(a, e), Y.power(b, e)), 0)
        ab = Y.power(Y.mul(a, b), e // 2)
        ba = Y.power(Y.mul(b, a), e // 2)
        if e % 2 == 0:
            return ((ab, ba), 0)
        return ((Y.mul(ab, a), Y.mul(ba, b)), 1)

    def eq(self, a, b):
        # the graph is the graph of a bijection: left components decide
        self.counter["eq"] += 1
        return a[1] == b[1] and self.Y.key(a[0][0]) == self.Y.key(b[0][0])

    def _key(self, a):
        return (self.Y.key(a[0][0]), a[1])

    def embed_pair(self, a: GroupElement, image: GroupElement) -> GroupElement:
        return ((a, image), 0)

    def embed(self, a: GroupElement) -> GroupElement:
        """X-string of a Y-string whose image is recorded in the proto."""
        key = self.Y.key(a)
        for x, x_image in self.proto.pairs:
            if self.Y.key(x) == key:
                return ((x, x_image), 0)
        raise ValidationError("alpha(a) is unknown for this Y-string; use embed_pair")

    def project(self, x: GroupElement) -> GroupElement:
        """Left component of an element of the index-2 part."""
        if x[1]:
            raise ValidationError("only elements of Y lift back to Y-strings")
        return x[0][0]

    def element_to_json(self, x):
        enc = getattr(self.Y, "element_to_json", lambda v: v)
        (a, b), flag = x
        return [enc(a), enc(b), flag]

    def element_from_json(self, data):
        dec = getattr(self.Y, "element_from_json", lambda v: v)
        try:
            a, b, flag = data
        except (TypeError, ValueError) as exc:
            raise ValidationError("lifted element must be [a, b, flag]") from exc
        if flag not in (0, 1):
            raise ValidationError("flag must be 0 or 1")
        return ((dec(a), dec(b)), flag)

    def alpha(self, a_pair) -> tuple:
        """Conjugation by delta on a graph pair."""
        return (a_pair[1], a_pair[0])


def lift_psl2_to_so3(Y: BlackBox, report: Optional[dict] = None) -> LiftedBox:
    eng = engine_for(Y)
    budget = eng.budget(0.25)
    last_error = None
    for attempt in range(1, budget + 1):
        u = find_involution(Y)
        try:
            pt = point_of(Y, u)
        except BudgetExhausted as exc:
            # the torus through u is {1, u}: only PSL2(5) among odd q > 3
            last_error = exc
            box = _brute_force_lift(Y)
            if report is not None:
                report.update(attempts=attempt, brute_force=True)
            return box
        proto = _outer_proto(Y, u, pt, budget)
        if proto is None:
            last_error = BudgetExhausted("lift: every candidate pole was inner")
            continue
        if not _looks_consistent(Y, proto):
            last_error = BudgetExhausted("lift: amalgam is not a graph")
            continue
        if report is not None:
            report.update(attempts=attempt, brute_force=False)
        return LiftedBox(Y, proto)
    raise last_error if last_error is not None else BudgetExhausted("lift failed")


def _outer_proto(Y: BlackBox, u, pt, budget: int) -> Optional[ProtoInvolution]:
    torus = [torus_generator(Y, pt)] + list(pt.torus_gens)
    for _ in range(budget):
        v = Y.conj(u, Y.random())
        if Y.eq(u, v):
            continue
        z = Y.mul(u, v)
        if not Y.is_identity(Y.power(z, Y.exponent.n)):
            continue
        # v must not normalize the torus, else <T, v> is dihedral
        t0 = torus[0]
        if Y.commutes(Y.conj(t0, v), t0):
            continue
        # a unipotent z shares a Borel subgroup with T and commutes with z^t0
        if Y.commutes(z, Y.conj(z, t0)):
            continue
        if j_of(Y, u, v).ok:
            continue  # the pole of u v lies in Y: inner
        pairs = [(t, Y.inv(t)) for t in torus] + [(u, u), (v, v), (z, z)]
        return ProtoInvolution(Y, pairs)
    return None


def _looks_consistent(Y: BlackBox, proto: ProtoInvolution) -> bool:
    """Probe the graph: both coordinates must share order type."""
    n = Y.exponent.n
    for _ in range(CONSISTENCY_PROBES):
        a, b = proto.sample()
        if Y.is_identity(a) != Y.is_identity(b):
            return False
        if Y.is_identity(Y.power(a, n)) != Y.is_identity(Y.power(b, n)):
            return False
        if Y.is_involution(a) != Y.is_involution(b):
            return False
    return True


def _brute_force_lift(Y: BlackBox, limit: int = BRUTE_FORCE_LIMIT) -> LiftedBox:
    """Outer involutive automorphism by exhaustive search on a small Y."""
    from .frame import closure

    elements = closure(Y, [Y.random() for _ in range(4)], limit)
    size = len(elements)
    if size > limit:
        raise BudgetExhausted("lift: no torus through the involution and Y is too big to enumerate")

    def order(x):
        k, cur = 1, x
        while not Y.is_identity(cur):
            cur = Y.mul(cur, x)
            k += 1
        return k

    for _ in range(64):
        a, b = Y.random(), Y.random()
        if len(closure(Y, [a, b], size)) == size:
            break
    else:
        raise BudgetExhausted("lift: no generating pair found")
    oa, ob = order(a), order(b)
    same_a = [x for x in elements if order(x) == oa]
    same_b = [x for x in elements if order(x) == ob]
    inner = {(Y.key(Y.conj(a, h)), Y.key(Y.conj(b, h))) for h in elements}
    for a2 in same_a:
        for b2 in same_b:
            if (Y.key(a2), Y.key(b2)) in inner:
                continue
            pairs = [(a, a2), (b, b2)]
            from .matrix_oracle import ProductBox

            prod = ProductBox(Y, Y, Y.fork_rng())
            graph = closure(prod, pairs, size)
            if len(graph) != size:
                continue
            keys = {prod.key(g) for g in graph}
            if prod.key((a2, a)) in keys and prod.key((b2, b)) in keys:
                return LiftedBox(Y, ProtoInvolution(Y, pairs))
    raise BudgetExhausted("lift: Y has no outer involutive automorphism")
