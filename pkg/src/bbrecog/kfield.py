"""The black-box field K carried by the axis e1 v e3.

Field elements are involutions (x, 0, 1) on the axis; Zero is e3, One is
d2 = (1,0,1) and e1 is the point at infinity.  Addition and multiplication
are straightedge constructions through an auxiliary point m = (0, lam, 1) of
the x2-axis:

    a + b:  c = (a v e2) ^ (m v e1)        = (a, lam, 1)
            inf = (m v b) ^ (e1 v e2)      = (b, -lam, 0)
            (c v inf) ^ (e1 v e3)          = (a + b, 0, 1)

    a * b:  c = (One v e2) ^ (m v e1)      = (1, lam, 1)
            d = (e3 v c) ^ (a v e2)        = (a, a lam, 1)
            inf = (b v c) ^ (e1 v e2)      = (1 - b, lam, 0)
            (d v inf) ^ (e1 v e3)          = (a b, 0, 1)

Each meet is j of the two poles, so every step can land on the quadric and
return Unipotent.  The default auxiliary point is lam = 1 for addition and
lam = -1 for multiplication; the robust variants retry with other points.

When q = 1 mod 4 the axis meets the quadric in (+-sqrt(-1), 0, 1).  Those two
field values have no involution and any operation whose result is one of
them returns Unipotent.
"""

from __future__ import annotations

from collections import Counter, OrderedDict
from typing import Optional

from .blackbox import BlackBox, GroupElement
from .errors import BudgetExhausted, ValidationError
from .frame import SpinorFrame, point_from_coordinates, to_x1_axis
from .involutions import engine_for, find_involution, j_of
from .outcomes import Ok, Unipotent

CACHE_SIZE = 4096
ROBUST_TRIES = 10


class BlackBoxFieldK:
    def __init__(self, box: BlackBox, frame: SpinorFrame, order: Optional[int] = None, cache_size: int = CACHE_SIZE):
        self.box = box
        self.frame = frame
        self.zero = frame.e3
        self.one = frame.d2
        self.infinity = frame.e1
        self.order = order
        self._cache: "OrderedDict[tuple, object]" = OrderedDict()
        self._cache_size = cache_size
        self._aux_pool: list = []
        self._aux_keys: set = set()
        self._minus_one = box.conj(self.one, self.zero)
        self.ops: Counter = Counter()  # calls of add/mul/neg/inv

    # -- bookkeeping -------------------------------------------------------

    def key(self, a) -> tuple:
        return self.box.key(a)

    def eq(self, a, b) -> bool:
        return self.box.eq(a, b)

    def is_zero(self, a) -> bool:
        return self.box.eq(a, self.zero)

    def is_one(self, a) -> bool:
        return self.box.eq(a, self.one)

    def is_element(self, a) -> bool:
        box = self.box
        e2 = self.frame.e2
        return (
            box.is_involution(a)
            and box.commutes(a, e2)
            and not box.eq(a, e2)
            and not box.eq(a, self.infinity)
        )

    def _cached(self, key, compute):
        if self._cache_size <= 0:
            return compute()
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        out = compute()
        self._cache[key] = out
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return out

    # -- single conjugations ------------------------------------------------

    def neg(self, a):
        self.ops["neg"] += 1
        return self.box.conj(a, self.zero)

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of Zero in K")
        self.ops["inv"] += 1
        return self.box.conj(a, self.one)

    def minus_one(self):
        return self._minus_one

    # -- constructions ------------------------------------------------------

    def add(self, a, b, aux=None):
        """a + b through the auxiliary point (0, aux, 1); aux defaults to One."""
        self.ops["add"] += 1
        if self.is_zero(b):
            return Ok(a)
        if self.is_zero(a):
            return Ok(b)
        lam = self.one if aux is None else aux
        key = ("add", self.key(a), self.key(b), self.key(lam))
        return self._cached(key, lambda: self._add(a, b, lam))

    def _add(self, a, b, lam):
        box, f = self.box, self.frame
        m = to_x1_axis(box, f, lam)  # (0, lam, 1)
        c = point_from_coordinates(f, box, a, lam)
        if not c.ok:
            return c
        inf = self._infinity_point(m, b)
        if not inf.ok:
            return inf
        return self._land_on_axis(c.value, inf.value)

    def _infinity_point(self, p, q):
        """(p v q) ^ (e1 v e2)."""
        key = ("inf", self.key(p), self.key(q))

        def compute():
            line = j_of(self.box, p, q)
            if not line.ok:
                return line
            return j_of(self.box, line.value, self.frame.e3)

        return self._cached(key, compute)

    def _land_on_axis(self, p, inf):
        """(p v inf) ^ (e1 v e3)."""
        line = j_of(self.box, p, inf)
        if not line.ok:
            return line
        return j_of(self.box, line.value, self.frame.e2)

    def mul(self, a, b, aux=None):
        """a * b through the auxiliary point (0, aux, 1); aux defaults to -One."""
        self.ops["mul"] += 1
        if self.is_zero(a) or self.is_zero(b):
            return Ok(self.zero)
        if self.is_one(a):
            return Ok(b)
        if self.is_one(b):
            return Ok(a)
        lam = self._minus_one if aux is None else aux
        key = ("mul", self.key(a), self.key(b), self.key(lam))
        return self._cached(key, lambda: self._mul(a, b, lam))

    def _mul(self, a, b, lam):
        box, f = self.box, self.frame
        c = self._cached(("c", self.key(lam)), lambda: point_from_coordinates(f, box, self.one, lam))
        if not c.ok:
            return c
        diag = self._cached(("diag", self.key(lam)), lambda: j_of(box, f.e3, c.value))
        if not diag.ok:
            return diag
        d = j_of(box, diag.value, box.mul(a, f.e2))
        if not d.ok:
            return d
        inf = self._infinity_point(b, c.value)
        if not inf.ok:
            return inf
        return self._land_on_axis(d.value, inf.value)

    # -- retries through other auxiliary points ------------------------------

    def aux_points(self, first=None):
        yield self.one if first is None else first
        yield self._minus_one if first is None else self.one
        draws = 0
        while len(self._aux_pool) < ROBUST_TRIES - 2 and draws < 4 * ROBUST_TRIES:
            draws += 1
            pt = self.random_element()
            if pt is None:
                continue
            k = self.key(pt)
            if k != self.key(self.one) and k != self.key(self._minus_one) and k not in self._aux_keys:
                self._aux_keys.add(k)
                self._aux_pool.append(pt)
        yield from self._aux_pool

    def _robust(self, op, variants, first=None):
        """Try each rewriting of the operation through each auxiliary point.

        ``variants`` holds (x, y, post) with op(x, y) followed by ``post``
        equal to the wanted value; a construction that fails for one
        ordering or sign often succeeds for another.
        """
        last = None
        for lam in self.aux_points(first):
            for x, y, post in variants:
                out = op(x, y, lam)
                if out.ok:
                    return Ok(post(out.value)) if post is not None else out
                last = out
        return last

    def add_robust(self, a, b):
        out = self.add(a, b)
        if out.ok:
            return out
        neg = self.neg
        variants = [(a, b, None), (b, a, None), (neg(a), neg(b), neg), (neg(b), neg(a), neg)]
        return self._robust(self.add, variants)

    def mul_robust(self, a, b):
        out = self.mul(a, b)
        if out.ok:
            return out
        neg = self.neg
        variants = [
            (a, b, None),
            (b, a, None),
            (neg(a), b, neg),
            (a, neg(b), neg),
            (neg(a), neg(b), None),
        ]
        if not self.is_zero(a) and not self.is_zero(b):
            variants.append((self.inv(a), self.inv(b), self.inv))
        return self._robust(self.mul, variants, first=self._minus_one)

    def random_element(self):
        """Projection of a random involution onto the axis, or None."""
        box, f = self.box, self.frame
        x = find_involution(box)
        if box.eq(x, f.e2):
            return None
        if box.commutes(x, f.e2):
            pt = x
        else:
            first = j_of(box, x, f.e2)
            if not first.ok:
                return None
            second = j_of(box, first.value, f.e2)
            if not second.ok:
                return None
            pt = second.value
        if box.eq(pt, self.infinity) or self.is_zero(pt):
            return None
        return pt

    # -- derived operations --------------------------------------------------

    def sub(self, a, b):
        return self.add_robust(a, self.neg(b))

    def pow(self, a, e: int):
        result = self.one
        base = a
        while e:
            if e & 1:
                out = self.mul_robust(result, base)
                if not out.ok:
                    return out
                result = out.value
            e >>= 1
            if e:
                out = self.mul_robust(base, base)
                if not out.ok:
                    return out
                base = out.value
        return Ok(result)

    def residue_image(self, r: int):
        """Image of the residue r under Z -> K, by double-and-add on One."""
        if r < 0:
            out = self.residue_image(-r)
            return out if not out.ok else Ok(self.neg(out.value))
        acc = self.zero
        for bit in bin(r)[2:]:
            out = self.add_robust(acc, acc)
            if not out.ok:
                return out
            acc = out.value
            if bit == "1":
                out = self.add_robust(acc, self.one)
                if not out.ok:
                    return out
                acc = out.value
        return Ok(acc)

    def sqrt_k(self, a, order: Optional[int] = None):
        """Ok(r) with r*r = a, Ok(None) for a non-square, or Unipotent when
        the roots are +-sqrt(-1), which have no point on the axis.

        q = 3 mod 4: r = a^((q+1)/4), and every value is on the axis.
        q = 1 mod 4: Tonelli-Shanks on fractions n/d of axis points.  Its
        2-power chain passes through +-sqrt(-1), which no single axis point
        represents, while a fraction can; a step whose product would be
        +-sqrt(-1) is redone after rescaling both parts.
        """
        q = order if order is not None else self.order
        if q is None:
            raise ValidationError("sqrt_k needs the field order")
        if self.is_zero(a):
            return Ok(self.zero)
        if q % 4 == 3:
            r = self.pow(a, (q + 1) // 4)
            if not r.ok:
                return r
            sq = self.mul_robust(r.value, r.value)
            if not sq.ok:
                return sq
            return Ok(r.value if self.eq(sq.value, a) else None)
        return self._tonelli_shanks(a, q)

    # -- fractions n/d of axis points ----------------------------------------

    def _rescale(self, x):
        budget = engine_for(self.box).budget(0.5)
        for _ in range(budget):
            s = self.random_element()
            if s is None:
                continue
            n, d = self.mul_robust(x[0], s), self.mul_robust(x[1], s)
            if n.ok and d.ok:
                return (n.value, d.value)
        raise BudgetExhausted("sqrt_k: could not rescale a fraction")

    def _fmul(self, x, y):
        for _ in range(engine_for(self.box).budget(0.5)):
            n, d = self.mul_robust(x[0], y[0]), self.mul_robust(x[1], y[1])
            if n.ok and d.ok:
                return (n.value, d.value)
            x = self._rescale(x)
        raise BudgetExhausted("sqrt_k: fraction product kept meeting the quadric")

    def _fpow(self, x, e: int):
        result, base = (self.one, self.one), x
        while e:
            if e & 1:
                result = self._fmul(result, base)
            e >>= 1
            if e:
                base = self._fmul(base, base)
        return result

    def _f_is(self, x, sign: int) -> bool:
        return self.eq(x[0], x[1] if sign > 0 else self.neg(x[1]))

    def _tonelli_shanks(self, a, q: int):
        frac = (a, self.one)
        if not self._f_is(self._fpow(frac, (q - 1) // 2), 1):
            return Ok(None)
        m, odd = 0, q - 1
        while odd % 2 == 0:
            m += 1
            odd //= 2
        z = None
        for _ in range(engine_for(self.box).budget(0.5)):
            cand = self.random_element()
            if cand is not None and self._f_is(self._fpow((cand, self.one), (q - 1) // 2), -1):
                z = cand
                break
        if z is None:
            raise BudgetExhausted("sqrt_k: no non-square found")
        c = self._fpow((z, self.one), odd)
        t = self._fpow(frac, odd)
        r = self._fpow(frac, (odd + 1) // 2)
        while not self._f_is(t, 1):
            i, cur = 0, t
            while not self._f_is(cur, 1):
                cur = self._fmul(cur, cur)
                i += 1
            b = self._fpow(c, 1 << (m - i - 1))
            r = self._fmul(r, b)
            c = self._fmul(b, b)
            t = self._fmul(t, c)
            m = i
        # n/d as an axis point; Unipotent exactly when the root is +-sqrt(-1)
        return self.mul_robust(r[0], self.inv(r[1]))



def standard_to_k(K: BlackBoxFieldK, p: int, a: int):
    """Prime-field element a mod p -> K, checking that p is char(K)."""
    check = K.residue_image(p)
    if check.ok and not K.is_zero(check.value):
        raise ValidationError(f"{p} is not the characteristic of K")
    return K.residue_image(a % p)


def residue_table(K: BlackBoxFieldK, p: int) -> dict:
    """Images of every residue mod p that has an involution (desk scale).

    Residues r with r^2 = -1 mod p lie on the quadric and are absent.
    """
    missing = {r for r in range(p) if (r * r + 1) % p == 0}
    wanted = set(range(p)) - missing
    table = {0: K.zero, 1: K.one}
    while True:
        grew = False
        for a in list(table):
            for r, make in (((-a) % p, K.neg), (pow(a, -1, p) if a else None, K.inv)):
                if r is not None and r not in table:
                    table[r] = make(table[a])
                    grew = True
        for r in sorted(wanted - set(table)):
            for b in sorted(table):
                a = (r - b) % p
                if a in table and b:
                    out = K.add_robust(table[a], table[b])
                    if out.ok:
                        table[r] = out.value
                        grew = True
                        break
        if wanted <= set(table):
            return table
        if not grew:
            raise ValidationError(f"residues {sorted(wanted - set(table))} unreachable")


def element_to_residue(K: BlackBoxFieldK, table: dict, x) -> Optional[int]:
    """Brute-force inverse of the residue map against a table."""
    key = K.key(x)
    for r, v in table.items():
        if K.key(v) == key:
            return r
    return None
