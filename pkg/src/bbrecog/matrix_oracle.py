"""Concrete black boxes: PSL2 and PGL2 over explicit fields as projective
matrix classes, plus direct products, semidirect products, graph subgroups
and a cyclic test box.
"""

from __future__ import annotations

import json
import math
import random as _random
from typing import Callable, Optional, Sequence

from . import kernels
from .blackbox import BlackBox, FunctionSampler, GroupElement, SubgroupBox
from .errors import ValidationError
from .fields import ExplicitField


class MatrixGroupBox(BlackBox):
    """PSL2(q) or PGL2(q) as classes of invertible 2x2 matrices modulo scalars.

    Payloads are 4-tuples of field elements in the field's integer
    encoding.  In canonical mode payloads are normalized so the first
    nonzero entry is 1 and equality is tuple equality.  With
    ``canonical=False`` each result carries a random scalar multiple and
    equality normalizes on comparison.
    """

    def __init__(
        self,
        field: ExplicitField,
        kind: str = "PGL2",
        seed: int = 0,
        canonical: bool = True,
        exponent: Optional[int] = None,
    ):
        kind = kind.upper()
        if kind not in ("PSL2", "PGL2"):
            raise ValidationError(f"unknown group type {kind!r}")
        q = field.q
        if q < 4 and kind == "PSL2":
            raise ValidationError("PSL2 needs q >= 4")
        if kind == "PGL2" and q % 2 == 0:
            raise ValidationError("PGL2 oracle needs odd q")
        E = exponent if exponent is not None else q * (q * q - 1)
        super().__init__(E, _random.Random(seed), name=f"{kind}({q})")
        self.field = field
        self.kind = kind
        self.q = q
        self.canonical = canonical
        self._prime = field.k == 1
        self._kern = kernels.for_modulus(field.p) if self._prime else None
        self.identity = (1, 0, 0, 1)
        self.sampler = FunctionSampler(self._draw, self.rng)

    # -- arithmetic --------------------------------------------------------

    def _raw_mul(self, x, y):
        F = self.field
        a, b, c, d = x
        e, f, g, h = y
        add, mul = F.iadd, F.imul
        return (
            add(mul(a, e), mul(b, g)),
            add(mul(a, f), mul(b, h)),
            add(mul(c, e), mul(d, g)),
            add(mul(c, f), mul(d, h)),
        )

    def normalize(self, m):
        if self._prime:
            return self._kern.normalize(tuple(m), self.field.p)
        F = self.field
        for idx, v in enumerate(m):
            if v:
                s = F.iinv(v)
                return tuple(0 if i < idx else (1 if i == idx else F.imul(m[i], s)) for i in range(4))
        raise ValidationError("zero matrix is not a group element")

    def _rescale(self, m):
        F = self.field
        lam = self.rng.randrange(1, F.q)
        return tuple(F.imul(v, lam) for v in m)

    def _mul(self, x, y):
        if self.canonical:
            if self._prime:
                return self._kern.mat_mul(x, y, self.field.p)
            return self.normalize(self._raw_mul(x, y))
        return self._rescale(self._raw_mul(x, y))

    def _inv(self, x):
        F = self.field
        a, b, c, d = x
        adj = (d, F.ineg(b), F.ineg(c), a)
        if self.canonical:
            return self.normalize(adj)
        return self._rescale(adj)

    def _key(self, x):
        if self.canonical:
            return x
        return self.normalize(x)

    def _fast_power(self, x, e):
        if self._prime:
            r = self._kern.mat_pow(tuple(x), e, self.field.p)
            return r if self.canonical else self._rescale(r)
        return None

    # -- sampling ----------------------------------------------------------

    def det(self, x) -> int:
        F = self.field
        a, b, c, d = x
        return F.isub(F.imul(a, d), F.imul(b, c))

    def in_psl2(self, x) -> bool:
        if self.q % 2 == 0:
            return True
        return self.field.iis_square(self.det(x))

    def _draw(self, rng: _random.Random):
        q = self.q
        while True:
            m = (rng.randrange(q), rng.randrange(q), rng.randrange(q), rng.randrange(q))
            det = self.det(m)
            if det == 0:
                continue
            if self.kind == "PSL2" and q % 2 == 1 and not self.field.iis_square(det):
                continue
            m = self.normalize(m)
            return m if self.canonical else self._rescale(m)

    # -- serialization -----------------------------------------------------

    def element_from_json(self, data) -> GroupElement:
        F = self.field
        try:
            entries = [F.from_digits(v) if isinstance(v, list) else int(v) % F.q for v in data]
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed element: {exc}") from exc
        if len(entries) != 4:
            raise ValidationError("an element has four entries")
        if self.det(tuple(entries)) == 0:
            raise ValidationError("singular matrix")
        if self.kind == "PSL2" and not self.in_psl2(tuple(entries)):
            raise ValidationError("matrix is not in PSL2")
        return self.normalize(tuple(entries))

    def element_to_json(self, x):
        m = self.normalize(x)
        F = self.field
        if F.k == 1:
            return [int(v) for v in m]
        return [list(F.digits(v)) for v in m]

    def spec(self) -> dict:
        return {"type": self.kind, "field": self.field.to_json(), "E": str(self.exponent.E)}


def make_psl2_box(field: ExplicitField, seed: int = 0, canonical: bool = True) -> MatrixGroupBox:
    return MatrixGroupBox(field, "PSL2", seed=seed, canonical=canonical)


def make_pgl2_box(field: ExplicitField, seed: int = 0, canonical: bool = True) -> MatrixGroupBox:
    if field.q % 2 == 0:
        raise ValidationError("PGL2 oracle needs odd characteristic")
    return MatrixGroupBox(field, "PGL2", seed=seed, canonical=canonical)


def box_from_spec(spec: dict, seed: Optional[int] = None, canonical: bool = True) -> MatrixGroupBox:
    """Build an oracle from the group-spec JSON object."""
    if not isinstance(spec, dict):
        raise ValidationError("group spec must be a JSON object")
    try:
        kind = str(spec["type"]).upper()
        field = ExplicitField.from_json(spec["field"])
    except KeyError as exc:
        raise ValidationError(f"group spec missing {exc}") from exc
    E = spec.get("E")
    exponent = None
    if E is not None:
        try:
            exponent = int(str(E))
        except ValueError as exc:
            raise ValidationError("E must be a decimal integer") from exc
    if seed is None:
        seed = int(spec.get("seed", 0))
    box = MatrixGroupBox(field, kind, seed=seed, canonical=canonical, exponent=exponent)
    return box


def load_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read group spec {path}: {exc}") from exc


class ProductBox(BlackBox):
    """Direct product with componentwise operations."""

    def __init__(self, left: BlackBox, right: BlackBox, rng: Optional[_random.Random] = None):
        E = left.exponent.E * right.exponent.E // math.gcd(left.exponent.E, right.exponent.E)
        super().__init__(E, rng if rng is not None else left.fork_rng(), name=f"{left.name}x{right.name}")
        self.left = left
        self.right = right
        self.identity = (left.identity, right.identity)
        if left.sampler is not None and right.sampler is not None:
            self.sampler = FunctionSampler(lambda _rng: (left.random(), right.random()), self.rng)

    def _mul(self, a, b):
        return (self.left.mul(a[0], b[0]), self.right.mul(a[1], b[1]))

    def _inv(self, a):
        return (self.left.inv(a[0]), self.right.inv(a[1]))

    def eq(self, a, b):
        return self.left.eq(a[0], b[0]) and self.right.eq(a[1], b[1])

    def _key(self, a):
        return (self.left.key(a[0]), self.right.key(a[1]))

    def _fast_power(self, x, e):
        return (self.left.power(x[0], e), self.right.power(x[1], e))


def direct_product(A: BlackBox, B: BlackBox) -> ProductBox:
    return ProductBox(A, B)


class SemidirectBox(BlackBox):
    """A x| B with (x1,y1)(x2,y2) = (x1 * x2^(y1^-1), y1 y2).

    ``action(x, y)`` must return x^y and define a homomorphism B -> Aut(A).
    """

    def __init__(
        self,
        A: BlackBox,
        B: BlackBox,
        action: Callable[[GroupElement, GroupElement], GroupElement],
        rng: Optional[_random.Random] = None,
    ):
        super().__init__(A.exponent.E * B.exponent.E, rng if rng is not None else A.fork_rng(), name=f"{A.name}:{B.name}")
        self.A = A
        self.B = B
        self.action = action
        self.identity = (A.identity, B.identity)
        if A.sampler is not None and B.sampler is not None:
            self.sampler = FunctionSampler(lambda _rng: (A.random(), B.random()), self.rng)

    def _mul(self, a, b):
        x1, y1 = a
        x2, y2 = b
        return (self.A.mul(x1, self.action(x2, self.B.inv(y1))), self.B.mul(y1, y2))

    def _inv(self, a):
        x, y = a
        return (self.action(self.A.inv(x), y), self.B.inv(y))

    def eq(self, a, b):
        return self.A.eq(a[0], b[0]) and self.B.eq(a[1], b[1])

    def _key(self, a):
        return (self.A.key(a[0]), self.B.key(a[1]))


def semidirect_product(A: BlackBox, B: BlackBox, action) -> SemidirectBox:
    return SemidirectBox(A, B, action)


def graph_subgroup(
    A: BlackBox,
    B: BlackBox,
    pairs: Sequence[tuple],
    rng: Optional[_random.Random] = None,
    burnin: Optional[int] = None,
) -> SubgroupBox:
    """Subgroup of A x B generated by the given pairs."""
    if not pairs:
        raise ValidationError("a graph subgroup needs generating pairs")
    return SubgroupBox(ProductBox(A, B, rng), list(pairs), rng, burnin=burnin, name="graph")


class CyclicBox(BlackBox):
    """The cyclic group Z/N written multiplicatively; a test box."""

    def __init__(self, order: int, exponent: Optional[int] = None, seed: int = 0):
        super().__init__(exponent if exponent is not None else order, _random.Random(seed), name=f"C{order}")
        self.order = order
        self.identity = 0
        self.sampler = FunctionSampler(lambda rng: rng.randrange(order), self.rng)

    def _mul(self, a, b):
        return (a + b) % self.order

    def _inv(self, a):
        return (-a) % self.order

    def _fast_power(self, x, e):
        return (x * e) % self.order
