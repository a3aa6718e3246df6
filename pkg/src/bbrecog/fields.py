"""Explicit finite fields F_{p^k} given by structure constants.

Elements are stored internally as integers in ``[0, q)`` whose base-``p``
digits are the coordinates over the polynomial basis ``1, x, ..., x^{k-1}``.
:class:`FieldValue` wraps such an integer with its field for the public API;
the matrix oracle works directly on the integer encoding for speed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from sympy import factorint, isprime

from .errors import ValidationError

TABLE_LIMIT = 1 << 16
ADD_TABLE_LIMIT = 1 << 10


def _poly_mulmod(a: Sequence[int], b: Sequence[int], poly: Sequence[int], p: int) -> list[int]:
    """Multiply coefficient lists modulo a monic polynomial (low-to-high)."""
    k = len(poly) - 1
    prod = [0] * (2 * k - 1 if k > 0 else 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    prod[i + j] = (prod[i + j] + ai * bj) % p
    for d in range(len(prod) - 1, k - 1, -1):
        c = prod[d]
        if c:
            for i in range(k + 1):
                prod[d - k + i] = (prod[d - k + i] - c * poly[i]) % p
    return (prod + [0] * k)[:k]


def _is_primitive(poly: Sequence[int], p: int) -> bool:
    """True when x has multiplicative order p^k - 1 modulo ``poly``.

    A ring of size q whose unit group has an element of order q - 1 is a
    field, so this also certifies irreducibility.
    """
    k = len(poly) - 1
    if poly[0] % p == 0:
        return False
    order = p**k - 1
    x = [0] * k
    if k == 1:
        x = [(-poly[0]) % p]
    else:
        x[1] = 1
    one = [1] + [0] * (k - 1)

    def pw(base, e):
        result = one
        while e:
            if e & 1:
                result = _poly_mulmod(result, base, poly, p)
            base = _poly_mulmod(base, base, poly, p)
            e >>= 1
        return result

    if pw(x, order) != one:
        return False
    for r in factorint(order):
        if pw(x, order // r) == one:
            return False
    return True


@functools.lru_cache(maxsize=None)
def default_polynomial(p: int, k: int) -> tuple[int, ...]:
    """Deterministic primitive polynomial of degree ``k`` over F_p.

    Candidates are scanned in increasing order of their low-to-high
    coefficient vectors read as base-p numbers, which reproduces the same
    choice on every run.
    """
    if k == 1:
        return (0, 1)
    for code in range(1, p**k):
        coeffs = []
        c = code
        for _ in range(k):
            coeffs.append(c % p)
            c //= p
        poly = tuple(coeffs) + (1,)
        if _is_primitive(poly, p):
            return poly
    raise ValidationError(f"no primitive polynomial of degree {k} over F_{p}")


class ExplicitField:
    """The field F_q, q = p^k, with multiplication from structure constants."""

    def __init__(self, p: int, k: int = 1, poly: Optional[Sequence[int]] = None):
        if p < 2 or not isprime(p):
            raise ValidationError(f"characteristic {p} is not prime")
        if k < 1:
            raise ValidationError("extension degree must be at least 1")
        self.p = p
        self.k = k
        self.q = p**k
        if k == 1:
            self.poly = (0, 1)
        else:
            poly = tuple(int(c) % p for c in poly) if poly is not None else default_polynomial(p, k)
            if len(poly) != k + 1 or poly[-1] != 1:
                raise ValidationError("field polynomial must be monic of degree k")
            if not _is_primitive(poly, p) and not self._irreducible(poly):
                raise ValidationError("field polynomial is reducible")
            self.poly = poly
        self.structure_constants = self._structure_constants() if k > 1 else None
        self._exp: Optional[list[int]] = None
        self._log: Optional[list[int]] = None
        self._add_table: Optional[list[list[int]]] = None
        if k > 1 and self.q <= TABLE_LIMIT:
            self._build_tables()

    # -- construction helpers -------------------------------------------------

    def _irreducible(self, poly: Sequence[int]) -> bool:
        from sympy import Poly, symbols

        x = symbols("x")
        return Poly(list(reversed(poly)), x, modulus=self.p).is_irreducible

    def _structure_constants(self) -> tuple:
        k, p = self.k, self.p
        consts = []
        for i in range(k):
            row = []
            for j in range(k):
                si = [0] * k
                sj = [0] * k
                si[i] = 1
                sj[j] = 1
                row.append(tuple(_poly_mulmod(si, sj, self.poly, p)))
            consts.append(tuple(row))
        return tuple(consts)

    def _build_tables(self) -> None:
        q = self.q
        exp = [0] * (2 * q)
        log = [0] * q
        g = self._primitive_element()
        x = 1
        for e in range(q - 1):
            exp[e] = x
            log[x] = e
            x = self._mul_slow(x, g)
        if x != 1:
            raise ValidationError("field polynomial is not primitive")
        for e in range(q - 1, 2 * q):
            exp[e] = exp[e - (q - 1)]
        self._exp, self._log = exp, log
        if q <= ADD_TABLE_LIMIT:
            self._add_table = [[self._add_slow(a, b) for b in range(q)] for a in range(q)]

    def _primitive_element(self) -> int:
        order = self.q - 1
        primes = list(factorint(order))
        for g in range(2, self.q):
            if self._pow_slow(g, order) != 1:
                continue
            if all(self._pow_slow(g, order // r) != 1 for r in primes):
                return g
        raise ValidationError("no primitive element found")

    def _pow_slow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_slow(result, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return result

    # -- integer-level arithmetic ---------------------------------------------

    def digits(self, a: int) -> tuple[int, ...]:
        p = self.p
        out = []
        for _ in range(self.k):
            out.append(a % p)
            a //= p
        return tuple(out)

    def from_digits(self, coeffs: Sequence[int]) -> int:
        p = self.p
        v = 0
        for c in reversed(list(coeffs)):
            v = v * p + (int(c) % p)
        return v

    def _add_slow(self, a: int, b: int) -> int:
        p = self.p
        out, base = 0, 1
        for _ in range(self.k):
            out += ((a % p + b % p) % p) * base
            a //= p
            b //= p
            base *= p
        return out

    def _mul_slow(self, a: int, b: int) -> int:
        """Product through the structure constants s_i s_j = sum c_ijl s_l."""
        p, k = self.p, self.k
        da, db = self.digits(a), self.digits(b)
        acc = [0] * k
        for i in range(k):
            if da[i]:
                row = self.structure_constants[i]
                for j in range(k):
                    if db[j]:
                        c = da[i] * db[j]
                        for l, cijl in enumerate(row[j]):
                            if cijl:
                                acc[l] += c * cijl
        return self.from_digits([v % p for v in acc])

    def iadd(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        if self._add_table is not None:
            return self._add_table[a][b]
        return self._add_slow(a, b)

    def ineg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self.from_digits([-c for c in self.digits(a)])

    def isub(self, a: int, b: int) -> int:
        return self.iadd(a, self.ineg(b))

    def imul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        if not a or not b:
            return 0
        if self._log is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_slow(a, b)

    def ipow(self, a: int, e: int) -> int:
        if self.k == 1:
            return pow(a, e, self.p)
        if e == 0:
            return 1
        if not a:
            return 0
        if self._log is not None:
            return self._exp[(self._log[a] * e) % (self.q - 1)]
        result = 1
        while e:
            if e & 1:
                result = self.imul(result, a)
            a = self.imul(a, a)
            e >>= 1
        return result

    def iinv(self, a: int) -> int:
        if not a:
            raise ZeroDivisionError("inverse of zero")
        if self.k == 1:
            return pow(a, -1, self.p)
        if self._log is not None:
            return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]
        return self.ipow(a, self.q - 2)

    def iis_square(self, a: int) -> bool:
        if a == 0 or self.p == 2:
            return True
        return self.ipow(a, (self.q - 1) // 2) == 1

    def isqrt(self, a: int) -> Optional[int]:
        """Square root in F_q, or None for a non-residue."""
        q = self.q
        if a == 0:
            return 0
        if self.p == 2:
            return self.ipow(a, q // 2)
        if not self.iis_square(a):
            return None
        if q % 4 == 3:
            return self.ipow(a, (q + 1) // 4)
        # Tonelli-Shanks with q - 1 = 2^s * t
        s, t = 0, q - 1
        while t % 2 == 0:
            s += 1
            t //= 2
        z = 2 if self.k == 1 else self.p
        while self.iis_square(z):
            z = (z + 1) % q or 1
        c = self.ipow(z, t)
        x = self.ipow(a, (t + 1) // 2)
        b = self.ipow(a, t)
        m = s
        while b != 1:
            i, b2 = 0, b
            while b2 != 1:
                b2 = self.imul(b2, b2)
                i += 1
            gs = self.ipow(c, 1 << (m - i - 1))
            x = self.imul(x, gs)
            c = self.imul(gs, gs)
            b = self.imul(b, c)
            m = i
        return x

    def elements(self) -> Iterator[int]:
        return iter(range(self.q))

    # -- public value-level API -----------------------------------------------

    def __call__(self, value) -> "FieldValue":
        if isinstance(value, FieldValue):
            if value.field != self:
                raise ValidationError("field mismatch")
            return value
        if isinstance(value, int):
            if self.k == 1:
                return FieldValue(self, value % self.p)
            return FieldValue(self, self.from_digits([value]))
        return FieldValue(self, self.from_digits(value))

    def zero(self) -> "FieldValue":
        return FieldValue(self, 0)

    def one(self) -> "FieldValue":
        return FieldValue(self, 1)

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "poly": list(self.poly)}

    @classmethod
    def from_json(cls, data: dict) -> "ExplicitField":
        try:
            p = int(data["p"])
            k = int(data.get("k", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed field spec: {exc}") from exc
        poly = data.get("poly")
        if k == 1:
            poly = None
        return cls(p, k, poly)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExplicitField) and (self.p, self.k, self.poly) == (
            other.p,
            other.k,
            other.poly,
        )

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.poly))

    def __repr__(self) -> str:
        return f"ExplicitField(p={self.p}, k={self.k})"


@dataclass(frozen=True)
class FieldValue:
    """An element of an :class:`ExplicitField`."""

    field: ExplicitField
    value: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.digits(self.value)

    def _check(self, other: "FieldValue") -> None:
        if not isinstance(other, FieldValue) or other.field != self.field:
            raise ValidationError("field mismatch")

    def __add__(self, other):
        self._check(other)
        return FieldValue(self.field, self.field.iadd(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return FieldValue(self.field, self.field.isub(self.value, other.value))

    def __neg__(self):
        return FieldValue(self.field, self.field.ineg(self.value))

    def __mul__(self, other):
        self._check(other)
        return FieldValue(self.field, self.field.imul(self.value, other.value))

    def __pow__(self, e: int):
        return FieldValue(self.field, self.field.ipow(self.value, e))

    def is_zero(self) -> bool:
        return self.value == 0

    def __repr__(self) -> str:
        if self.field.k == 1:
            return f"F{self.field.p}({self.value})"
        return f"F{self.field.q}{self.coeffs}"


def add(a: FieldValue, b: FieldValue) -> FieldValue:
    return a + b


def mul(a: FieldValue, b: FieldValue) -> FieldValue:
    return a * b


def inv(a: FieldValue) -> FieldValue:
    if a.value == 0:
        raise ZeroDivisionError("inverse of zero")
    return FieldValue(a.field, a.field.iinv(a.value))


def sqrt(a: FieldValue) -> Optional[FieldValue]:
    r = a.field.isqrt(a.value)
    return None if r is None else FieldValue(a.field, r)
