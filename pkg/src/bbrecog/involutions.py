"""Involution machinery for black boxes encrypting SO3 (and PSL2 in even
characteristic).

Everything here is built from two primitives on the global exponent
E = 2^m n: the involution i(x) in an element of even order, and the odd-order
square root x^((n+1)/2).  Centralizers of involutions, and more generally of
involutive automorphisms given by their graph in X x X, are sampled with the
maps

    zeta0(x, x') = i(x' x^-1)          when x' x^-1 has even order
    zeta1(x, x') = sqrt(x' x^-1) * x   when x' x^-1 has odd order

and involutions are recovered ("reified") from graphs by searching the
centralizer for its central involution.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .blackbox import BlackBox, FunctionSampler, GroupElement, SubgroupBox, cyclic_sqrt, retries_for, two_part
from .errors import BudgetExhausted, ValidationError
from .matrix_oracle import SemidirectBox, graph_subgroup
from .outcomes import Ok, Unipotent

DEFAULT_CONFIDENCE = 20
TORUS_SAMPLES = 6


# -- exponent tools -----------------------------------------------------------


def involution_of(box: BlackBox, x: GroupElement) -> Optional[GroupElement]:
    """i(x) for x of even order, None for odd order."""
    cur = box.power(x, box.exponent.n)
    if box.is_identity(cur):
        return None
    return _last_before_identity(box, cur)


def _last_before_identity(box: BlackBox, cur: GroupElement) -> GroupElement:
    for _ in range(box.exponent.m + 1):
        nxt = box.mul(cur, cur)
        if box.is_identity(nxt):
            return cur
        cur = nxt
    raise ValidationError("element order does not divide the global exponent")


def zeta(box: BlackBox, x: GroupElement, x_image: GroupElement) -> GroupElement:
    """Centralizer element from a graph pair (x, x^phi)."""
    y = box.mul(x_image, box.inv(x))
    half = box.power(y, (box.exponent.n - 1) // 2)
    root = box.mul(half, y)
    y_odd = box.mul(root, half)
    if box.is_identity(y_odd):
        return box.mul(root, x)
    return _last_before_identity(box, y_odd)


# -- proto-involutions --------------------------------------------------------


class ProtoInvolution:
    """A subgroup of X x X given by generating pairs (g, g^phi).

    The pairs are meant to describe the graph of an involutive automorphism
    phi.  Consistency is the caller's responsibility; nothing local can
    decide it.
    """

    def __init__(self, base: BlackBox, pairs: Sequence[tuple], burnin: Optional[int] = None):
        if not pairs:
            raise ValidationError("a proto-involution needs generating pairs")
        self.base = base
        self.pairs = list(pairs)
        self._burnin = burnin
        self._graph: Optional[SubgroupBox] = None

    @property
    def graph_box(self) -> SubgroupBox:
        if self._graph is None:
            self._graph = graph_subgroup(self.base, self.base, self.pairs, self.base.fork_rng(), self._burnin)
        return self._graph

    def sample(self) -> tuple:
        return self.graph_box.random()

    def realized_by(self, h: GroupElement) -> bool:
        """True when conjugation by h agrees with phi on every generating pair."""
        box = self.base
        return all(box.eq(box.conj(a, h), b) for a, b in self.pairs)


def conjugation_proto(box: BlackBox, t: GroupElement, generators: int = 4) -> ProtoInvolution:
    """Graph of conjugation by the involution t, generated at random points."""
    pairs = []
    for _ in range(generators):
        g = box.random()
        pairs.append((g, box.conj(g, t)))
    return ProtoInvolution(box, pairs)


def inversion_proto(box: BlackBox, elements: Sequence[GroupElement]) -> ProtoInvolution:
    return ProtoInvolution(box, [(g, box.inv(g)) for g in elements])


def proto_from_local(parts: Sequence) -> ProtoInvolution:
    """Amalgamate local descriptions.

    Each part is a ProtoInvolution or a pair (generators, map) with an
    explicit map on the listed generators.  All parts must share one base.
    """
    base = None
    pairs: list = []
    for part in parts:
        if isinstance(part, ProtoInvolution):
            part_base, part_pairs = part.base, part.pairs
        else:
            part_base, gens, fn = part
            part_pairs = [(g, fn(g)) for g in gens]
        if base is None:
            base = part_base
        elif part_base is not base:
            raise ValidationError("amalgamated parts must live in the same box")
        pairs.extend(part_pairs)
    if base is None:
        raise ValidationError("nothing to amalgamate")
    return ProtoInvolution(base, pairs)


def _swap_action(pair, flag):
    return (pair[1], pair[0]) if flag else pair


class _C2(BlackBox):
    """{0, 1} under xor; the acting factor of an augmentation."""

    def __init__(self, rng):
        super().__init__(2, rng, name="C2")
        self.identity = 0
        self.sampler = FunctionSampler(lambda r: r.getrandbits(1), self.rng)

    def _mul(self, a, b):
        return a ^ b

    def _inv(self, a):
        return a

    def _fast_power(self, x, e):
        return x if e & 1 else 0


def augment_by_proto(proto: ProtoInvolution) -> SemidirectBox:
    """F x| <alpha> where alpha swaps the two coordinates of graph pairs."""
    graph = proto.graph_box
    flip = _C2(graph.fork_rng())
    return SemidirectBox(graph, flip, _swap_action, rng=graph.fork_rng())


# -- centralizers -------------------------------------------------------------


class CentralizerBox:
    """Centralizer of an involution or of a proto-involution.

    ``sample`` emits zeta outputs directly (uniform on the centralizer via
    zeta1).  ``box`` is a subgroup box on accumulated samples for callers
    that want the generic black-box interface.
    """

    def __init__(self, base: BlackBox, draw_pair: Callable[[], tuple], involution=None, source=None):
        self.base = base
        self.involution = involution
        self.source = source
        self._draw_pair = draw_pair
        self.generators: list = []
        self._box: Optional[SubgroupBox] = None

    def sample(self) -> GroupElement:
        x, x_image = self._draw_pair()
        return zeta(self.base, x, x_image)

    @property
    def box(self) -> SubgroupBox:
        if self._box is None:
            want = _generator_target(self.base)
            while len(self.generators) < want:
                self.generators.append(self.sample())
            self._box = SubgroupBox(self.base, self.generators, self.base.fork_rng(), name="centralizer")
        return self._box


def _generator_target(box: BlackBox) -> int:
    E = box.exponent.E
    return max(1, (E.bit_length().bit_length())) + 8


def centralizer_of_involution(box: BlackBox, t: GroupElement) -> CentralizerBox:
    if not box.is_involution(t):
        raise ValidationError("centralizer_of_involution needs an involution")

    def draw():
        x = box.random()
        return x, box.conj(x, t)

    return CentralizerBox(box, draw, involution=t)


def centralizer_of_proto(proto: ProtoInvolution) -> CentralizerBox:
    return CentralizerBox(proto.base, proto.sample, source=proto)


# -- points of the plane of involutions --------------------------------------


@dataclass
class InvolutionPoint:
    """An involution s with generators of its torus T_s and an involution w
    inverting T_s, so that C(s) = T_s x| <w>."""

    s: GroupElement
    torus_gens: list
    w: GroupElement
    reflections: list = field(default_factory=list)


class InvolutionEngine:
    """Per-box state: confidence, retry budgets and the point cache."""

    def __init__(self, box: BlackBox, confidence: int = DEFAULT_CONFIDENCE):
        self.box = box
        self.confidence = confidence
        self.points: dict = {}

    def budget(self, success_probability: float) -> int:
        return retries_for(self.confidence, success_probability)

    def point_of(self, s: GroupElement) -> InvolutionPoint:
        box = self.box
        key = box.key(s)
        pt = self.points.get(key)
        if pt is not None:
            return pt
        cent = centralizer_of_involution(box, s)
        torus: list = []
        reflections: list = []
        for _ in range(self.budget(0.25) * (TORUS_SAMPLES + 2)):
            c = cent.sample()
            sq = box.mul(c, c)
            # Torus elements come only from zeta1 outputs: zeta0 emits
            # involutions from the PSL2 class, so products of them would
            # stay inside the index-2 subgroup of the torus.
            if box.is_identity(sq):
                if not box.is_identity(c) and not box.eq(c, s):
                    reflections.append(c)
            else:
                torus.append(c)
            if reflections and len(torus) >= TORUS_SAMPLES:
                break
        else:
            if not reflections or not torus:
                raise BudgetExhausted("point_of: could not sample the centralizer")
        pt = InvolutionPoint(s, torus, reflections[0], reflections)
        if len(self.points) > 100000:
            self.points.clear()
        self.points[key] = pt
        return pt

    def more_torus(self, pt: InvolutionPoint, count: int) -> None:
        box = self.box
        cent = centralizer_of_involution(box, pt.s)
        added = 0
        for _ in range(self.budget(0.25) * (count + 2)):
            c = cent.sample()
            sq = box.mul(c, c)
            if not box.is_identity(sq):
                pt.torus_gens.append(c)
                added += 1
            if added >= count:
                return


_engines: "weakref.WeakKeyDictionary[BlackBox, InvolutionEngine]" = weakref.WeakKeyDictionary()


def engine_for(box: BlackBox, confidence: Optional[int] = None) -> InvolutionEngine:
    eng = _engines.get(box)
    if eng is None:
        eng = InvolutionEngine(box, confidence if confidence is not None else DEFAULT_CONFIDENCE)
        _engines[box] = eng
    elif confidence is not None:
        eng.confidence = confidence
    return eng


def point_of(box: BlackBox, s: GroupElement) -> InvolutionPoint:
    if not box.is_involution(s):
        raise ValidationError("point_of needs an involution")
    return engine_for(box).point_of(s)


# -- involutions from random elements -----------------------------------------


def find_involution(box: BlackBox) -> GroupElement:
    budget = engine_for(box).budget(0.25)
    for _ in range(budget):
        h = involution_of(box, box.random())
        if h is not None:
            return h
    raise BudgetExhausted(f"find_involution: no even-order element in {budget} samples")


def find_involution_even_char(box: BlackBox) -> GroupElement:
    """Involution in PSL2(2^k): amalgamate the inversions of two odd-order
    elements and pull an involution out of the centralizer of the amalgam."""
    eng = engine_for(box)
    budget = eng.budget(0.5)
    for _ in range(budget):
        y1 = _odd_order_above_three(box, budget)
        y2 = _odd_order_above_three(box, budget)
        if box.commutes(y1, y2):
            continue
        proto = inversion_proto(box, [y1, y2])
        cent = centralizer_of_proto(proto)
        for _ in range(budget):
            c = cent.sample()
            if box.is_involution(c):
                return c
    raise BudgetExhausted("find_involution_even_char: no involution found")


def _odd_order_above_three(box: BlackBox, budget: int) -> GroupElement:
    for _ in range(budget * 4):
        y = box.random()
        if box.is_identity(y) or box.is_identity(box.power(y, 3)):
            continue
        if box.is_identity(box.power(y, box.exponent.n)):
            return y
    raise BudgetExhausted("no element of odd order > 3 found")


# -- reification --------------------------------------------------------------


def _candidates(box: BlackBox, c: GroupElement, reference: Optional[GroupElement]):
    """Involutions suggested by a centralizer element c."""
    out = []
    sq = box.mul(c, c)
    if box.is_identity(sq):
        if box.is_identity(c):
            return out
        out.append(c)
        if reference is not None:
            prod = box.mul(c, reference)
            h = involution_of(box, prod)
            if h is not None and not box.eq(h, c):
                out.append(h)
        return out
    h = involution_of(box, c)
    if h is not None:
        out.append(h)
    return out


def reify_candidates(
    box: BlackBox,
    proto: ProtoInvolution,
    accept: Callable[[GroupElement], bool],
    budget: int,
    reference: Optional[GroupElement] = None,
) -> Optional[GroupElement]:
    """Search C(phi) for an involution passing ``accept``.

    ``reference`` is a known involution of C(phi) other than the target; the
    product with any other involution of the dihedral centralizer lies in
    the torus through the target, which doubles the hit rate.
    """
    seen_reflection = reference
    for _ in range(budget):
        x, x_image = proto.sample()
        c = zeta(box, x, x_image)
        for h in _candidates(box, c, seen_reflection):
            if accept(h):
                return h
        if seen_reflection is None and box.is_involution(c):
            seen_reflection = c
    return None


def reify(box: BlackBox, proto: ProtoInvolution) -> GroupElement:
    """The involution whose conjugation action is described by ``proto``."""
    budget = engine_for(box).budget(0.25)
    h = reify_candidates(box, proto, lambda h: box.is_involution(h) and proto.realized_by(h), budget)
    if h is None:
        raise BudgetExhausted("reify: no candidate realizes the proto-involution")
    return h


# -- j(s,t), bisection, factorization ----------------------------------------


def j_of(box: BlackBox, s: GroupElement, t: GroupElement):
    """The involution commuting with both s and t, or Unipotent(st)."""
    if box.eq(s, t):
        raise ValidationError("j_of needs distinct involutions")
    z = box.mul(s, t)
    sq = box.mul(z, z)
    if box.is_identity(sq):
        return Ok(z)
    zn = box.power(z, box.exponent.n)
    if not box.is_identity(zn):
        return Ok(_last_before_identity(box, zn))
    eng = engine_for(box)
    pt = eng.point_of(s)

    def accept(h):
        return (
            not box.eq(h, s)
            and not box.eq(h, t)
            and box.commutes(h, s)
            and box.commutes(h, t)
        )

    # j inverts the torus of s and centralizes s, t and z = st.  A torus
    # element of maximal 2-height keeps the generated subgroup from falling
    # into the index-2 subgroup PSL2, which may miss j; a failure is retried
    # once with fresh torus samples before it is blamed on z.
    for attempt in range(2):
        if attempt:
            eng.more_torus(pt, TORUS_SAMPLES)
        gens = [torus_generator(box, pt)] + pt.torus_gens[:2]
        pairs = [(r, box.inv(r)) for r in gens]
        pairs += [(z, z), (s, s), (t, t)]
        h = reify_candidates(box, ProtoInvolution(box, pairs), accept, eng.budget(0.35), reference=s)
        if h is not None:
            return Ok(h)
    return Unipotent(z, (s, t))


def bisect(box: BlackBox, i: GroupElement, j: GroupElement) -> GroupElement:
    """An involution x with i^x = j."""
    eng = engine_for(box)
    if box.eq(i, j):
        return eng.point_of(i).w
    z = box.mul(i, j)
    zn = box.power(z, box.exponent.n)
    if box.is_identity(zn):
        w = box.power(z, (box.exponent.n + 1) // 2)
        x = box.mul(i, w)
        if _bisects(box, x, i, j):
            return x
        raise ValidationError("bisect: inputs are not conjugate involutions")
    k = _last_before_identity(box, zn)
    pt = eng.point_of(k)
    for attempt in range(eng.budget(0.5)):
        g, others = pt.torus_gens[0], pt.torus_gens[1:]
        t = cyclic_sqrt(box, g, z, others)
        if t is not None:
            x = box.mul(i, t)
            if _bisects(box, x, i, j):
                return x
        eng.more_torus(pt, TORUS_SAMPLES)
    raise ValidationError("bisect: inputs are not conjugate involutions")


def _bisects(box, x, i, j) -> bool:
    return box.is_involution(x) and box.eq(box.conj(i, x), j)


def as_two_involutions(box: BlackBox, x: GroupElement) -> tuple:
    """Involutions (r, r') with r r' = x, for x of order > 2."""
    if box.is_identity(box.mul(x, x)):
        raise ValidationError("as_two_involutions needs an element of order > 2")
    eng = engine_for(box)
    k = involution_of(box, x)
    if k is not None:
        r = eng.point_of(k).w
        return r, box.mul(r, x)
    x_inv = box.inv(x)
    for _ in range(eng.budget(0.5)):
        y = box.random()
        if box.is_identity(box.mul(y, y)) or box.commutes(x, y):
            continue
        y_inv = box.inv(y)
        proto = ProtoInvolution(box, [(x, x_inv), (y, y_inv)])

        def accept(h):
            return box.eq(box.conj(x, h), x_inv) and box.eq(box.conj(y, h), y_inv)

        r = reify_candidates(box, proto, accept, eng.budget(0.35))
        if r is not None:
            return r, box.mul(r, x)
    raise BudgetExhausted("as_two_involutions: no inverting involution found")


def torus_generator(box: BlackBox, pt: InvolutionPoint) -> GroupElement:
    """Among the sampled torus elements, one of maximal 2-height."""
    best, best_height = pt.torus_gens[0], -1
    for g in pt.torus_gens:
        _, h = two_part(box, g)
        if h > best_height:
            best, best_height = g, h
    return best
