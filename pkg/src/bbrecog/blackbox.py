"""Black-box groups: the multiply / invert / compare / sample interface with a
global exponent, product-replacement sampling, and the order-parity tools
built on the exponent (involution extraction, odd square roots, and
Tonelli-Shanks in cyclic subgroups).

Element strings are opaque hashable payloads owned by a box.  Only the owning
box's ``eq`` is meaningful; ``key`` returns a canonical hashable form used for
caching and set membership.
"""

from __future__ import annotations

import itertools
import random as _random
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

from .errors import BudgetExhausted, ValidationError

GroupElement = Hashable

_box_ids = itertools.count()

PR_SLOTS = 10
PR_BURNIN_PER_GENERATOR = 50


@dataclass(frozen=True)
class ExponentDecomposition:
    """E = 2^m * n with n odd."""

    E: int
    m: int
    n: int

    @classmethod
    def of(cls, E: int) -> "ExponentDecomposition":
        if E < 1:
            raise ValidationError("global exponent must be positive")
        m, n = 0, E
        while n % 2 == 0:
            m += 1
            n //= 2
        return cls(E, m, n)


def retries_for(confidence: int, success_probability: float) -> int:
    """Number of independent trials that pushes failure below 2^-confidence."""
    import math

    if success_probability >= 1:
        return 1
    per_trial = -math.log2(1.0 - success_probability)
    return max(1, math.ceil(confidence / per_trial))


class Sampler:
    """Source of (approximately) uniform random elements for a box."""

    def next(self) -> GroupElement:  # pragma: no cover - interface
        raise NotImplementedError


class FunctionSampler(Sampler):
    """Sampler backed by a direct uniform generator, e.g. an explicit oracle."""

    def __init__(self, draw: Callable[[_random.Random], GroupElement], rng: _random.Random):
        self.rng = rng
        self._draw = draw

    def next(self) -> GroupElement:
        return self._draw(self.rng)


class ProductReplacementSampler(Sampler):
    """Product replacement with the "rattle" accumulator.

    Ten slots are seeded cyclically from the generators and mixed for
    ``50 * len(generators)`` steps before the first element is returned.
    """

    def __init__(
        self,
        box: "BlackBox",
        generators: Sequence[GroupElement],
        rng: _random.Random,
        slots: int = PR_SLOTS,
        burnin: Optional[int] = None,
    ):
        if not generators:
            raise ValidationError("product replacement needs at least one generator")
        self.box = box
        self.rng = rng
        gens = list(generators)
        self.slots = [gens[i % len(gens)] for i in range(max(slots, 2))]
        self.accumulator = box.identity
        steps = PR_BURNIN_PER_GENERATOR * len(gens) if burnin is None else burnin
        for _ in range(steps):
            self._step()

    def _step(self) -> GroupElement:
        box, slots, rng = self.box, self.slots, self.rng
        n = len(slots)
        i = rng.randrange(n)
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        other = slots[j]
        if rng.getrandbits(1):
            other = box.inv(other)
        if rng.getrandbits(1):
            slots[i] = box.mul(slots[i], other)
        else:
            slots[i] = box.mul(other, slots[i])
        self.accumulator = box.mul(self.accumulator, slots[i])
        return self.accumulator

    def next(self) -> GroupElement:
        return self._step()


class BlackBox:
    """Base class for black-box groups.

    Subclasses implement ``_mul``, ``_inv`` and ``_key`` (canonical form) and
    set ``identity``.  Public ``mul``/``inv``/``eq`` update an operation
    counter used by the benchmark harness.
    """

    identity: GroupElement

    def __init__(self, exponent: int, rng: Optional[_random.Random] = None, name: str = "box"):
        self.exponent = ExponentDecomposition.of(exponent)
        self.rng = rng if rng is not None else _random.Random(0)
        self.counter: Counter = Counter()
        self.box_id = next(_box_ids)
        self.name = name
        self.sampler: Optional[Sampler] = None

    # -- group operations --------------------------------------------------

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self.counter["mul"] += 1
        return self._mul(a, b)

    def inv(self, a: GroupElement) -> GroupElement:
        self.counter["inv"] += 1
        return self._inv(a)

    def eq(self, a: GroupElement, b: GroupElement) -> bool:
        self.counter["eq"] += 1
        return self._key(a) == self._key(b)

    def key(self, a: GroupElement) -> Hashable:
        return self._key(a)

    def is_identity(self, a: GroupElement) -> bool:
        return self.eq(a, self.identity)

    def random(self) -> GroupElement:
        self.counter["random"] += 1
        if self.sampler is None:
            raise ValidationError(f"{self.name} has no sampler")
        return self.sampler.next()

    def power(self, x: GroupElement, e: int) -> GroupElement:
        """x^e by square-and-multiply (negative e inverts first)."""
        if e < 0:
            return self.power(self.inv(x), -e)
        fast = self._fast_power(x, e)
        if fast is not None:
            self.counter["mul"] += e.bit_length() + bin(e).count("1")
            return fast
        result = self.identity
        base = x
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def conj(self, x: GroupElement, g: GroupElement) -> GroupElement:
        """x^g = g^-1 x g."""
        return self.mul(self.mul(self.inv(g), x), g)

    def commutes(self, a: GroupElement, b: GroupElement) -> bool:
        return self.eq(self.mul(a, b), self.mul(b, a))

    def is_involution(self, a: GroupElement) -> bool:
        return not self.is_identity(a) and self.is_identity(self.mul(a, a))

    def fork_rng(self) -> _random.Random:
        return _random.Random(self.rng.getrandbits(64))

    # -- subclass hooks ----------------------------------------------------

    def _mul(self, a, b):  # pragma: no cover - interface
        raise NotImplementedError

    def _inv(self, a):  # pragma: no cover - interface
        raise NotImplementedError

    def _key(self, a) -> Hashable:
        return a

    def _fast_power(self, x, e) -> Optional[GroupElement]:
        return None

    def ops_total(self) -> int:
        return self.counter["mul"] + self.counter["inv"]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} E={self.exponent.E}>"


class SubgroupBox(BlackBox):
    """A subgroup of ``parent`` generated by explicit elements.

    Group operations, equality and exponent are inherited; sampling runs a
    private product-replacement sampler over the generators.
    """

    def __init__(
        self,
        parent: BlackBox,
        generators: Sequence[GroupElement],
        rng: Optional[_random.Random] = None,
        burnin: Optional[int] = None,
        name: str = "subgroup",
    ):
        if not generators:
            raise ValidationError("a subgroup box needs at least one generator")
        super().__init__(parent.exponent.E, rng if rng is not None else parent.fork_rng(), name)
        self.parent = parent
        self.counter = parent.counter
        self.identity = parent.identity
        self.generators = list(generators)
        self.sampler = ProductReplacementSampler(self, self.generators, self.rng, burnin=burnin)

    def mul(self, a, b):
        return self.parent.mul(a, b)

    def inv(self, a):
        return self.parent.inv(a)

    def eq(self, a, b):
        return self.parent.eq(a, b)

    def key(self, a):
        return self.parent.key(a)

    def power(self, x, e):
        return self.parent.power(x, e)

    def _key(self, a):
        return self.parent.key(a)


def make_subgroup_box(
    parent: BlackBox, generators: Sequence[GroupElement], rng: Optional[_random.Random] = None
) -> SubgroupBox:
    return SubgroupBox(parent, generators, rng)


def random(box: BlackBox) -> GroupElement:
    return box.random()


def power(box: BlackBox, x: GroupElement, e: int) -> GroupElement:
    return box.power(x, e)


def has_even_order(box: BlackBox, x: GroupElement) -> bool:
    return not box.is_identity(box.power(x, box.exponent.n))


def two_part(box: BlackBox, x: GroupElement) -> tuple[GroupElement, int]:
    """Return (x^n, l) where x^n has order 2^l."""
    y = box.power(x, box.exponent.n)
    height = 0
    cur = y
    while not box.is_identity(cur):
        cur = box.mul(cur, cur)
        height += 1
        if height > box.exponent.m:
            raise ValidationError("element order does not divide the global exponent")
    return y, height


def extract_involution(box: BlackBox, x: GroupElement) -> GroupElement:
    """The involution in <x>: last non-identity term of x^n, x^2n, ..."""
    cur = box.power(x, box.exponent.n)
    if box.is_identity(cur):
        raise ValidationError("extract_involution needs an element of even order")
    for _ in range(box.exponent.m + 1):
        nxt = box.mul(cur, cur)
        if box.is_identity(nxt):
            return cur
        cur = nxt
    raise ValidationError("element order does not divide the global exponent")


def odd_sqrt(box: BlackBox, x: GroupElement) -> GroupElement:
    """The square root of an odd-order element inside <x>: x^((n+1)/2)."""
    y = box.power(x, (box.exponent.n + 1) // 2)
    if not box.eq(box.mul(y, y), x):
        raise ValidationError("odd_sqrt needs an element of odd order")
    return y


def odd_sqrt_or_none(box: BlackBox, x: GroupElement) -> Optional[GroupElement]:
    """x^((n+1)/2) when x has odd order, else None; one exponentiation."""
    y = box.power(x, (box.exponent.n + 1) // 2)
    # y^2 = x^(n+1) equals x exactly when x^n = 1
    if box.eq(box.mul(y, y), x):
        return y
    return None


def cyclic_sqrt(
    box: BlackBox,
    x: GroupElement,
    z: GroupElement,
    generator_samples: Sequence[GroupElement] = (),
) -> Optional[GroupElement]:
    """Tonelli-Shanks square root of ``z`` inside the cyclic group <x>.

    The reference element g of maximal 2-height is chosen among ``x`` and any
    ``generator_samples`` of the same cyclic group (in <x> itself the
    generator x already has maximal height).  Returns None when ``z`` has no
    square root there.
    """
    n = box.exponent.n
    g, best = x, None
    for cand in itertools.chain([x], generator_samples):
        c, height = two_part(box, cand)
        if best is None or height > best[1]:
            g, best = cand, (c, height)
    c, height = best
    a = box.power(z, (n + 1) // 2)
    b = box.power(z, n)
    while True:
        if box.is_identity(b):
            break
        d, cur = 0, b
        while not box.is_identity(cur):
            cur = box.mul(cur, cur)
            d += 1
            if d > box.exponent.m:
                return None
        if d >= height:
            return None
        a = box.mul(a, box.power(c, 1 << (height - d - 1)))
        c = box.power(c, 1 << (height - d))
        b = box.mul(b, c)
        height = d
    if box.eq(box.mul(a, a), z):
        return a
    return None


def sample_until(predicate: Callable[[], Optional[GroupElement]], budget: int, what: str):
    """Call ``predicate`` until it returns a value, at most ``budget`` times."""
    for _ in range(budget):
        out = predicate()
        if out is not None:
            return out
    raise BudgetExhausted(f"{what}: no success in {budget} attempts")
