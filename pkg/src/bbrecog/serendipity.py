"""Characteristic and a unipotent element by forcing constructions onto the
quadric.

Walking a -> a + 1 in K from One, the addition of k and 1 touches the
points (k, 1, 1), the pole (1, 1, -(k+1)) and the result (k+1, 0, 1).  These
lie on the quadric exactly when p divides k^2 + 2, (k+1)^2 + 2 or (k+1)^2 + 1,
and then the construction returns a unipotent element.  Each such event is
checked by factoring the candidate values and testing u^f = 1 for the prime
factors f.  If the walk returns to Zero first, its length is p; a point
(c, d, 1) with c^2 + d^2 + 1 = 0 is then built from residues and lands on the
quadric by design.

With p known in advance the walk is skipped: residues are reached by
double-and-add, so only O(log p) additions are spent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from sympy import factorint, isprime
from sympy.ntheory import sqrt_mod

from .blackbox import BlackBox, GroupElement, SubgroupBox
from .errors import BudgetExhausted, ValidationError
from .frame import point_from_coordinates
from .involutions import engine_for, point_of
from .kfield import BlackBoxFieldK
from .outcomes import Unipotent

ONE_PATH = "OnePath"
THREE_PATH = "ThreePath"


@dataclass(frozen=True)
class UnipotentCertificate:
    u: GroupElement
    p: int
    witnesses: tuple
    route: str
    steps: int = 0

    def verify(self, box: BlackBox) -> bool:
        return (
            isprime(self.p)
            and not box.is_identity(self.u)
            and box.is_identity(box.power(self.u, self.p))
        )

    def to_json(self, encode=lambda x: x) -> dict:
        return {"p": str(self.p), "route": self.route, "u": encode(self.u), "steps": self.steps}


def _route(p: int) -> str:
    return ONE_PATH if p % 4 == 1 else THREE_PATH


def _certify(box: BlackBox, out: Unipotent, candidates, steps: int) -> Optional[UnipotentCertificate]:
    """Certificate from a Unipotent outcome when u^f = 1 for a prime f in
    the factorizations of ``candidates``."""
    u = out.u
    if box.is_identity(u):
        return None
    primes = set()
    for n in candidates:
        if n > 1:
            primes.update(factorint(n))
    for f in sorted(primes):
        if f > 3 and box.is_identity(box.power(u, f)):
            return UnipotentCertificate(u, f, tuple(out.witnesses), _route(f), steps)
    return None


def _verified(box: BlackBox, out, p: int, steps: int) -> Optional[UnipotentCertificate]:
    if out.ok or box.is_identity(out.u) or not box.is_identity(box.power(out.u, p)):
        return None
    return UnipotentCertificate(out.u, p, tuple(out.witnesses), _route(p), steps)


def find_characteristic_and_unipotent(
    box: BlackBox, K: BlackBoxFieldK, p_hint: Optional[int] = None, max_steps: Optional[int] = None
) -> UnipotentCertificate:
    if p_hint is not None:
        if p_hint == 2 or not isprime(p_hint):
            raise ValidationError(f"p hint {p_hint} is not an odd prime")
        return _known_characteristic(box, K, p_hint, steps=0)
    a = K.one
    k = 1
    limit = max_steps if max_steps is not None else box.exponent.E
    while k <= limit:
        out = K.add(a, K.one)
        if not out.ok:
            cert = _certify(box, out, (k * k + 2, (k + 1) ** 2 + 2, (k + 1) ** 2 + 1), k)
            if cert is not None:
                return cert
            # a hit that fits no event: step over it along a safer path
            out = K.add_robust(a, K.one)
            if not out.ok:
                cert = _certify(box, out, (k * k + 2, (k + 1) ** 2 + 2, (k + 1) ** 2 + 1), k)
                if cert is not None:
                    return cert
                raise BudgetExhausted(f"walk stuck at step {k} on an unexplained unipotent")
        a = out.value
        k += 1
        if K.is_zero(a):
            if not isprime(k):
                raise ValidationError(f"walk closed after {k} steps, which is not prime")
            return _known_characteristic(box, K, k, steps=k)
    raise BudgetExhausted("walk did not close within the step limit")


def quadric_pairs(p: int):
    """(c, d) with c, d nonzero mod p and c^2 + d^2 + 1 = 0, smallest c first."""
    for c in range(1, p):
        rhs = (-1 - c * c) % p
        if rhs == 0:
            continue
        d = sqrt_mod(rhs, p)
        if d is not None:
            yield c, d


def _known_characteristic(box: BlackBox, K: BlackBoxFieldK, p: int, steps: int) -> UnipotentCertificate:
    budget = engine_for(box).budget(0.5)
    tries = 0
    if p % 4 == 1:
        # (i - 1) + 1 = i lies on the quadric
        for i in sqrt_mod(p - 1, p, all_roots=True):
            c = (i - 1) % p
            if c == 0 or (c * c + 1) % p == 0:
                continue
            img = K.residue_image(c)
            if not img.ok:
                cert = _verified(box, img, p, steps)
                if cert is not None:
                    return cert
                continue
            for lam in K.aux_points():
                tries += 1
                cert = _verified(box, K.add(img.value, K.one, lam), p, steps)
                if cert is not None:
                    return cert
                if tries > budget:
                    break
    for c, d in quadric_pairs(p):
        img_c = K.residue_image(c)
        img_d = K.residue_image(d)
        for out in (img_c, img_d):
            cert = _verified(box, out, p, steps) if not out.ok else None
            if cert is not None:
                return cert
        if img_c.ok and img_d.ok:
            cert = _verified(box, point_from_coordinates(K.frame, box, img_c.value, img_d.value), p, steps)
            if cert is not None:
                return cert
        tries += 1
        if tries > budget:
            break
    raise BudgetExhausted(f"no unipotent element found for p = {p}")


def unipotent_subgroup(box: BlackBox, cert: UnipotentCertificate, torus_gens=None) -> SubgroupBox:
    """Black box for the maximal unipotent subgroup through u, generated by
    the conjugates of u under the torus of the first witness."""
    if torus_gens is None:
        torus_gens = point_of(box, cert.witnesses[0]).torus_gens
    gens = [cert.u] + [box.conj(cert.u, t) for t in torus_gens]
    return SubgroupBox(box, gens, box.fork_rng(), name="unipotent")


def borel_subgroup(box: BlackBox, cert: UnipotentCertificate, torus_gens=None) -> SubgroupBox:
    if torus_gens is None:
        torus_gens = point_of(box, cert.witnesses[0]).torus_gens
    gens = [cert.u] + list(torus_gens)
    return SubgroupBox(box, gens, box.fork_rng(), name="borel")
