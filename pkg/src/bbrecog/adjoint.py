"""The adjoint morphisms X -> SO3(K) and SO3(K) -> X.

Matrix entries live on a line through e1 that misses the quadric, so that
every field value has an involution.  When q = 3 mod 4 this is the axis
e1 v e3 and the entries are elements of K itself; when q = 1 mod 4 the axis
loses +-sqrt(-1), and the entries sit on the parallel line x2 = c x3 for a c
making that line anisotropic.  Vertical projection through e2 matches the
two encodings.

Field operations on the line are the affine constructions through a random
auxiliary point X and the line at infinity e1 v e2:

    a + b:  D1 = (Z v X)^inf, Y = (B v D1) ^ (X v e1), D2 = (A v X)^inf
    a * b:  D1 = (E v X)^inf, Y = (Z v X) ^ (B v D1),  D2 = (A v X)^inf
    1 / b:  D1 = (B v X)^inf, Y = (Z v X) ^ (E v D1),  D2 = (E v X)^inf

and the result is (Y v D2) ^ line.  Coordinates of a point P are read by
projecting from two interior points on the line at infinity: no line through
an interior point is tangent, and every meet with an anisotropic line is
regular, so reading never hits the quadric.

An involution with coordinates v maps to the half-turn 2 v v^T / (v.v) - I;
other elements are written as a product of two involutions.  The inverse
map reads the axis of a half-turn from a column of M + I, and splits a
general rotation M as R1 (R1 M) with R1 a half-turn about an axis
orthogonal to the rotation axis of M.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Optional

from .blackbox import BlackBox, GroupElement
from .errors import BudgetExhausted, ValidationError
from .frame import point_from_coordinates
from .involutions import as_two_involutions, centralizer_of_involution, engine_for, find_involution, j_of, point_of
from .kfield import BlackBoxFieldK
from .outcomes import Ok, Unipotent

AUX_POOL = 8
CENTERS = 3


class _Degenerate(Exception):
    """A construction hit the quadric for every auxiliary point tried."""


class LineField:
    """Field structure on an anisotropic line through e1."""

    def __init__(self, K: BlackBoxFieldK, q: int):
        self.K = K
        self.q = q
        self.box = box = K.box
        f = K.frame
        self.frame = f
        self.infinity = f.e1
        self.inf_pole = f.e3  # pole of the line at infinity e1 v e2
        self._cache: dict = {}
        self._aux: list = []
        self._depth = 0
        if q % 4 == 3:
            self.zero, self.one, self.pole = f.e3, f.d2, f.e2
            self.c_axis = K.zero
        else:
            self.c_axis, self.zero, self.one, self.pole = self._anisotropic_parallel()
        self.minus_one = self.neg(self.one)
        self.two = self.add(self.one, self.one)
        self.c = self.from_k(self.c_axis) if q % 4 == 1 else self.zero

    # -- setup ----------------------------------------------------------------

    def _anisotropic_parallel(self):
        K, box, f = self.K, self.box, self.frame
        candidates = []
        for r in range(1, 8):
            img = K.residue_image(r)
            if img.ok:
                candidates.append(img.value)
        budget = engine_for(box).budget(0.5)
        for attempt in range(budget + len(candidates)):
            c = candidates[attempt] if attempt < len(candidates) else K.random_element()
            if c is None or K.is_zero(c):
                continue
            z = point_from_coordinates(f, box, K.zero, c)
            e = point_from_coordinates(f, box, K.one, c)
            if not (z.ok and e.ok):
                continue
            pole = j_of(box, f.e1, z.value)
            if pole.ok and self._interior(pole.value):
                return c, z.value, e.value, pole.value
        raise BudgetExhausted("no anisotropic line parallel to the axis")

    def _interior(self, s) -> bool:
        """True when the torus through s is non-split (order dividing q+1)."""
        box = self.box
        pt = point_of(box, s)
        return bool(pt.torus_gens) and all(box.is_identity(box.power(t, self.q + 1)) for t in pt.torus_gens)

    def from_k(self, a):
        """Vertical projection of the axis point (a, 0, 1) onto the line."""
        if self.q % 4 == 3:
            return a
        line = self._join(a, self.frame.e2)
        return self._meet(line, self.pole)

    def to_k(self, v):
        """Ok(axis point) or Unipotent when v is +-sqrt(-1)."""
        if self.q % 4 == 3:
            return Ok(v)
        line = j_of(self.box, v, self.frame.e2)
        if not line.ok:
            return line
        return j_of(self.box, line.value, self.frame.e2)

    # -- geometry helpers -----------------------------------------------------

    def _j(self, a, b):
        key = ("j",) + tuple(sorted((self.box.key(a), self.box.key(b)), key=repr))
        hit = self._cache.get(key)
        if hit is None:
            hit = j_of(self.box, a, b)
            self._cache[key] = hit
        if not hit.ok:
            raise _Degenerate()
        return hit.value

    _join = _j
    _meet = _j

    def _at_infinity(self, P, x):
        """(P v x)^(e1 v e2)."""
        return self._meet(self._join(P, x), self.inf_pole)

    def _new_aux(self) -> bool:
        box = self.box
        known = {box.key(x) for x in self._aux}
        for _ in range(engine_for(box).budget(0.25)):
            x = find_involution(box)
            if box.key(x) in known or box.commutes(x, self.pole) or box.commutes(x, self.inf_pole):
                continue
            self._aux.append(x)
            return True
        return False

    def _construct(self, variants):
        """Run each (build, post) variant through the auxiliary points."""
        i = 0
        while True:
            if i == len(self._aux) and (i >= 4 * AUX_POOL or not self._new_aux()):
                break
            for build, post in variants:
                try:
                    out = build(self._aux[i])
                except _Degenerate:
                    continue
                if i >= AUX_POOL:
                    # keep points that rescued a construction near the front
                    self._aux.insert(0, self._aux.pop(i))
                return post(out) if post is not None else out
            i += 1
        raise BudgetExhausted("line-field construction failed for every auxiliary point")

    # -- field operations -----------------------------------------------------

    def key(self, a):
        return self.box.key(a)

    def eq(self, a, b) -> bool:
        return self.box.eq(a, b)

    def is_zero(self, a) -> bool:
        return self.box.eq(a, self.zero)

    def is_one(self, a) -> bool:
        return self.box.eq(a, self.one)

    def neg(self, a):
        return self.box.conj(a, self.zero)

    def _cached(self, key, variants, fallbacks=()):
        """Geometric variants first, then algebraic rewrites of the same
        value (for q this small every geometric route can be blocked)."""
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        try:
            hit = self._construct(variants)
        except BudgetExhausted:
            if self._depth > 3:
                raise
            self._depth += 1
            try:
                hit = None
                for rewrite in fallbacks:
                    try:
                        hit = rewrite()
                        break
                    except (BudgetExhausted, ZeroDivisionError):
                        continue
                if hit is None:
                    raise
            finally:
                self._depth -= 1
        self._cache[key] = hit
        return hit

    def _add_build(self, a, b):
        def build(x):
            d1 = self._at_infinity(self.zero, x)
            y = self._meet(self._join(b, d1), self._join(x, self.infinity))
            d2 = self._at_infinity(a, x)
            return self._meet(self._join(y, d2), self.pole)

        return build

    def _mul_build(self, a, b):
        def build(x):
            d1 = self._at_infinity(self.one, x)
            y = self._meet(self._join(self.zero, x), self._join(b, d1))
            d2 = self._at_infinity(a, x)
            return self._meet(self._join(y, d2), self.pole)

        return build

    def _inv_build(self, b):
        def build(x):
            d1 = self._at_infinity(b, x)
            y = self._meet(self._join(self.zero, x), self._join(self.one, d1))
            d2 = self._at_infinity(self.one, x)
            return self._meet(self._join(y, d2), self.pole)

        return build

    def add(self, a, b):
        if self.is_zero(a):
            return b
        if self.is_zero(b):
            return a
        k = self.key
        if repr(k(a)) > repr(k(b)):
            a, b = b, a
        na, nb = self.neg(a), self.neg(b)
        variants = [
            (self._add_build(a, b), None),
            (self._add_build(b, a), None),
            (self._add_build(na, nb), self.neg),
            (self._add_build(nb, na), self.neg),
        ]
        fallbacks = [
            lambda: self.mul(a, self.two) if self.eq(a, b) and hasattr(self, "two") else self._fail(),
            lambda: self.add(self.add(a, self.one), self.add(b, self.minus_one)),
            lambda: self.add(self.add(a, self.minus_one), self.add(b, self.one)),
            lambda: self.mul(a, self.add(self.one, self.div(b, a))),
        ]
        return self._cached(("add", k(a), k(b)), variants, fallbacks)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.is_zero(a) or self.is_zero(b):
            return self.zero
        if self.is_one(a):
            return b
        if self.is_one(b):
            return a
        k = self.key
        if repr(k(a)) > repr(k(b)):
            a, b = b, a
        na, nb = self.neg(a), self.neg(b)
        variants = [
            (self._mul_build(a, b), None),
            (self._mul_build(b, a), None),
            (self._mul_build(na, b), self.neg),
            (self._mul_build(a, nb), self.neg),
            (self._mul_build(na, nb), None),
        ]
        fallbacks = [
            lambda: self.sub(self.mul(a, self.add(b, self.one)), a),
            lambda: self.sub(self.mul(a, self.add(b, self.minus_one)), self.neg(a)),
            lambda: self.inv(self.mul(self.inv(a), self.inv(b))),
        ]
        return self._cached(("mul", k(a), k(b)), variants, fallbacks)

    def inv(self, b):
        if self.is_zero(b):
            raise ZeroDivisionError("inverse of zero")
        if self.is_one(b) or self.eq(b, self.minus_one):
            return b
        variants = [(self._inv_build(b), None), (self._inv_build(self.neg(b)), self.neg)]
        return self._cached(("inv", self.key(b)), variants, [lambda: self._inv_by_search(b)])

    def _inv_by_search(self, b):
        """1/b by scanning a few values c with b c = 1."""
        for r in range(2, min(self.q, 64)):
            c = self.residue(r)
            for cand in (c, self.neg(c)):
                if self.is_one(self.mul(b, cand)):
                    return cand
        raise BudgetExhausted("no inverse found")

    def _fail(self):
        raise BudgetExhausted("rewrite does not apply")

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def residue(self, r: int):
        """Image of the integer r by double-and-add."""
        if r < 0:
            return self.neg(self.residue(-r))
        acc = self.zero
        for bit in bin(r)[2:]:
            acc = self.add(acc, acc)
            if bit == "1":
                acc = self.add(acc, self.one)
        return acc


# -- matrices ----------------------------------------------------------------


@dataclass(frozen=True)
class Matrix3K:
    """3x3 matrix over a LineField, row-major."""

    entries: tuple
    field: LineField

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[3 * i + j]

    def rows(self):
        return [self.entries[3 * i: 3 * i + 3] for i in range(3)]

    def transpose(self) -> "Matrix3K":
        e = self.entries
        return Matrix3K(tuple(e[3 * j + i] for i in range(3) for j in range(3)), self.field)

    def keys(self) -> tuple:
        return tuple(self.field.key(x) for x in self.entries)

    def eq(self, other: "Matrix3K") -> bool:
        return all(self.field.eq(a, b) for a, b in zip(self.entries, other.entries))

    def to_json(self, encode=lambda x: x) -> list:
        return [[encode(x) for x in row] for row in self.rows()]


def identity_matrix(F: LineField) -> Matrix3K:
    return Matrix3K(tuple(F.one if i == j else F.zero for i in range(3) for j in range(3)), F)


def diagonal(F: LineField, signs) -> Matrix3K:
    vals = [F.one if s > 0 else F.minus_one for s in signs]
    return Matrix3K(tuple(vals[i] if i == j else F.zero for i in range(3) for j in range(3)), F)


def so3k_mul(a: Matrix3K, b: Matrix3K) -> Matrix3K:
    if a.field is not b.field:
        raise ValidationError("matrices over different fields")
    F = a.field
    out = []
    for i in range(3):
        for j in range(3):
            acc = F.zero
            for k in range(3):
                acc = F.add(acc, F.mul(a[i, k], b[k, j]))
            out.append(acc)
    return Matrix3K(tuple(out), F)


def det3(m: Matrix3K):
    F = m.field
    total = F.zero
    for (i, j, k), sign in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((0, 2, 1), -1), ((1, 0, 2), -1), ((2, 1, 0), -1)):
        term = F.mul(F.mul(m[0, i], m[1, j]), m[2, k])
        total = F.add(total, term if sign > 0 else F.neg(term))
    return total


def so3k_check(m: Matrix3K) -> bool:
    F = m.field
    return so3k_mul(m, m.transpose()).eq(identity_matrix(F)) and F.is_one(det3(m))


def _dot(F, u, v):
    acc = F.zero
    for a, b in zip(u, v):
        acc = F.add(acc, F.mul(a, b))
    return acc


def _cross(F, u, v):
    return (
        F.sub(F.mul(u[1], v[2]), F.mul(u[2], v[1])),
        F.sub(F.mul(u[2], v[0]), F.mul(u[0], v[2])),
        F.sub(F.mul(u[0], v[1]), F.mul(u[1], v[0])),
    )


def half_turn(F: LineField, v) -> Matrix3K:
    """2 v v^T / (v.v) - I."""
    n = _dot(F, v, v)
    if F.is_zero(n):
        raise ValidationError("isotropic vector has no half-turn")
    scale = F.div(F.two, n)
    out = []
    for i in range(3):
        for j in range(3):
            e = F.mul(scale, F.mul(v[i], v[j]))
            out.append(F.sub(e, F.one) if i == j else e)
    return Matrix3K(tuple(out), F)


# -- the morphisms -------------------------------------------------------------


class AdjointRep:
    """rho and its inverse for one frame and field."""

    def __init__(self, K: BlackBoxFieldK, q: int):
        self.K = K
        self.box = K.box
        self.frame = K.frame
        self.F = LineField(K, q)
        self.centers = self._interior_centers()
        self._rho_cache: dict = {}

    def _interior_centers(self) -> list:
        """Interior points (k, 1, 0) of the line at infinity, with k."""
        F, box, f = self.F, self.box, self.frame
        if self.F.q % 4 == 3:
            w, c_minus_w = f.d1, F.minus_one
        else:
            w, c_minus_w = f.e3, F.c
        centers, seen = [], set()
        values = [F.residue(r) for r in range(0, min(F.q, 12))]
        budget = engine_for(box).budget(0.5) * 4
        for attempt in range(budget + len(values)):
            if attempt < len(values):
                a = values[attempt]
            else:
                a = self._random_value()
                if a is None:
                    continue
            if box.key(a) in seen:
                continue
            seen.add(box.key(a))
            line = j_of(box, w, a)
            if not line.ok:
                continue
            d = j_of(box, line.value, f.e3)
            if not d.ok or box.eq(d.value, f.e1) or not F._interior(d.value):
                continue
            centers.append((d.value, F.div(a, c_minus_w)))
            if len(centers) == CENTERS:
                return centers
        if len(centers) >= 2:
            return centers
        raise BudgetExhausted("too few interior points at infinity")

    def _random_value(self):
        F, box = self.F, self.box
        x = find_involution(box)
        if box.eq(x, self.frame.e2):
            return None
        if box.commutes(x, F.pole):
            return None if box.eq(x, F.pole) or box.eq(x, F.infinity) else x
        try:
            return F._meet(F._join(x, self.frame.e2), F.pole)
        except _Degenerate:
            return None

    # -- points <-> coordinates -------------------------------------------------

    def at_infinity(self, P) -> bool:
        box = self.box
        return not box.eq(P, self.frame.e3) and box.commutes(P, self.frame.e3)

    def coordinates(self, P):
        """Affine coordinates (x, y) of a finite involution P."""
        F, box = self.F, self.box
        if self.at_infinity(P):
            raise ValidationError("point at infinity")
        if box.commutes(P, F.pole) and not box.eq(P, F.pole):
            return P, F.c
        usable = [(Q, k) for Q, k in self.centers if not box.eq(Q, P)]
        reads = []
        for Q, k in usable:
            try:
                reads.append((F._meet(F._join(Q, P), F.pole), k))
            except _Degenerate:
                continue
            if len(reads) == 2:
                break
        if len(reads) < 2:
            raise BudgetExhausted("could not read the coordinates of a point")
        (s1, k1), (s2, k2) = reads
        t = F.div(F.sub(s1, s2), F.sub(k1, k2))  # c - y
        return F.sub(s1, F.mul(t, k1)), F.sub(F.c, t)

    def point_at(self, x, y):
        """The involution with affine coordinates (x, y); Unipotent on the quadric."""
        F = self.F
        t = F.sub(F.c, y)
        (Q1, k1), (Q2, k2) = self.centers[:2]
        s1 = F.add(x, F.mul(t, k1))
        if F.is_zero(t):
            return Ok(s1)
        s2 = F.add(x, F.mul(t, k2))
        l1 = j_of(self.box, Q1, s1)
        l2 = j_of(self.box, Q2, s2)
        if not (l1.ok and l2.ok):
            return l1 if not l1.ok else l2
        return j_of(self.box, l1.value, l2.value)

    # -- rho ----------------------------------------------------------------------

    def rho(self, x: GroupElement) -> Matrix3K:
        box, f, F = self.box, self.frame, self.F
        key = box.key(x)
        hit = self._rho_cache.get(key)
        if hit is not None:
            return hit
        if box.is_identity(x):
            out = identity_matrix(F)
        elif box.eq(x, f.e1):
            out = diagonal(F, (1, -1, -1))
        elif box.eq(x, f.e2):
            out = diagonal(F, (-1, 1, -1))
        elif box.eq(x, f.e3):
            out = diagonal(F, (-1, -1, 1))
        elif box.is_involution(x):
            out = self._rho_involution(x)
        else:
            r, r2 = as_two_involutions(box, x)
            out = so3k_mul(self.rho(r), self.rho(r2))
        self._rho_cache[key] = out
        return out

    def _rho_involution(self, P) -> Matrix3K:
        box, F = self.box, self.F
        if not self.at_infinity(P):
            x, y = self.coordinates(P)
            return half_turn(F, (x, y, F.one))
        # P = r (r P) with r, r P finite involutions on the polar of P
        cent = centralizer_of_involution(box, P)
        for _ in range(engine_for(box).budget(0.25)):
            r = cent.sample()
            if not box.is_involution(r) or box.eq(r, P):
                continue
            r2 = box.mul(r, P)
            if self.at_infinity(r) or self.at_infinity(r2):
                continue
            return so3k_mul(self._rho_involution(r), self._rho_involution(r2))
        raise BudgetExhausted("no finite factorization of an involution at infinity")

    # -- rho inverse ----------------------------------------------------------------

    def rho_inverse(self, m: Matrix3K) -> GroupElement:
        F, box, f = self.F, self.box, self.frame
        if m.field is not F:
            raise ValidationError("matrix over a different field")
        if not so3k_check(m):
            raise ValidationError("matrix is not in SO3(K)")
        ident = identity_matrix(F)
        if m.eq(ident):
            return box.identity
        for e, signs in ((f.e1, (1, -1, -1)), (f.e2, (-1, 1, -1)), (f.e3, (-1, -1, 1))):
            if m.eq(diagonal(F, signs)):
                return e
        if so3k_mul(m, m).eq(ident):
            return self._involution_from_matrix(m)
        axis = self._rotation_axis(m)
        for u in self._probe_vectors():
            w = _cross(F, axis, u)
            if F.is_zero(_dot(F, w, w)):
                continue
            r1 = half_turn(F, w)
            r2 = so3k_mul(r1, m)
            if not so3k_mul(r2, r2).eq(ident):
                continue
            return box.mul(self._involution_from_matrix(r1), self._involution_from_matrix(r2))
        raise BudgetExhausted("could not split the rotation into half-turns")

    def _probe_vectors(self):
        F = self.F
        o, z = F.one, F.zero
        yield from ((o, z, z), (z, o, z), (z, z, o), (o, o, z), (o, z, o), (z, o, o), (o, o, o), (o, F.two, z))
        for _ in range(engine_for(self.box).budget(0.5)):
            vals = [self._random_value() for _ in range(2)]
            if None not in vals:
                yield (vals[0], vals[1], o)

    def _rotation_axis(self, m: Matrix3K):
        F = self.F
        rows = [tuple(F.sub(v, F.one) if i == j else v for j, v in enumerate(row)) for i, row in enumerate(m.rows())]
        for a, b in ((0, 1), (0, 2), (1, 2)):
            v = _cross(F, rows[a], rows[b])
            if not all(F.is_zero(c) for c in v):
                return v
        raise ValidationError("rotation has no one-dimensional axis")

    def _involution_from_matrix(self, m: Matrix3K) -> GroupElement:
        F, box = self.F, self.box
        cols = [tuple(F.add(m[i, j], F.one) if i == j else m[i, j] for i in range(3)) for j in range(3)]
        v = next((c for c in cols if not all(F.is_zero(t) for t in c)), None)
        if v is None:
            raise ValidationError("matrix is minus the identity")
        if F.is_zero(v[2]):
            # axis at infinity: split into two half-turns with finite axes
            ident = identity_matrix(F)
            for u in self._probe_vectors():
                w = _cross(F, v, u)
                if F.is_zero(w[2]) or F.is_zero(_dot(F, w, w)):
                    continue
                r1 = half_turn(F, w)
                r2 = so3k_mul(r1, m)
                if not so3k_mul(r2, r2).eq(ident):
                    continue
                axis2 = _cross(F, v, w)
                if F.is_zero(axis2[2]):
                    continue
                return box.mul(self._involution_from_matrix(r1), self._involution_from_matrix(r2))
            raise BudgetExhausted("no finite split of a half-turn at infinity")
        x, y = F.div(v[0], v[2]), F.div(v[1], v[2])
        out = self.point_at(x, y)
        if not out.ok:
            raise ValidationError("half-turn axis lies on the quadric")
        return out.value


_reps: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def adjoint_for(K: BlackBoxFieldK, q: Optional[int] = None) -> AdjointRep:
    rep = _reps.get(K)
    if rep is None:
        q = q if q is not None else K.order
        if q is None:
            raise ValidationError("the adjoint map needs the field order")
        rep = AdjointRep(K, q)
        _reps[K] = rep
    return rep


def rho(frame, K: BlackBoxFieldK, x: GroupElement) -> Matrix3K:
    if frame is not K.frame:
        raise ValidationError("frame does not match the field")
    return adjoint_for(K).rho(x)


def rho_inverse(frame, K: BlackBoxFieldK, m: Matrix3K) -> GroupElement:
    if frame is not K.frame:
        raise ValidationError("frame does not match the field")
    return adjoint_for(K).rho_inverse(m)
