# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for projective 2x2 matrices over prime fields.

Matrices are 4-tuples (a, b, c, d) of residues; results are normalized so
the first nonzero entry is 1.  Products use 128-bit intermediates, so any
modulus below 2^63 is supported.
"""

ctypedef unsigned long long u64

cdef extern from *:
    """
    static inline unsigned long long bb_mulmod(unsigned long long a,
                                               unsigned long long b,
                                               unsigned long long p) {
        return (unsigned long long)(((unsigned __int128)a * b) % p);
    }
    """
    u64 bb_mulmod(u64 a, u64 b, u64 p) nogil


cdef inline u64 mulmod(u64 a, u64 b, u64 p) nogil:
    return bb_mulmod(a, b, p)


cdef inline u64 addmod(u64 a, u64 b, u64 p) nogil:
    cdef u64 s = a + b
    if s >= p or s < a:
        s -= p
    return s


cdef u64 invmod(u64 a, u64 p) nogil:
    cdef long long t = 0, newt = 1, tmp
    cdef u64 r = p, newr = a, q, tmpr
    while newr != 0:
        q = r // newr
        tmp = t - <long long>q * newt
        t = newt
        newt = tmp
        tmpr = r - q * newr
        r = newr
        newr = tmpr
    if t < 0:
        t += <long long>p
    return <u64>t


cdef inline tuple _normalize(u64 a, u64 b, u64 c, u64 d, u64 p):
    cdef u64 s
    if a != 0:
        if a == 1:
            return (a, b, c, d)
        s = invmod(a, p)
        return (1, mulmod(b, s, p), mulmod(c, s, p), mulmod(d, s, p))
    if b != 0:
        s = invmod(b, p)
        return (0, 1, mulmod(c, s, p), mulmod(d, s, p))
    if c != 0:
        s = invmod(c, p)
        return (0, 0, 1, mulmod(d, s, p))
    if d != 0:
        return (0, 0, 0, 1)
    return (0, 0, 0, 0)


def normalize(tuple m, u64 p):
    return _normalize(m[0], m[1], m[2], m[3], p)


def mat_mul(tuple x, tuple y, u64 p):
    cdef u64 a = x[0], b = x[1], c = x[2], d = x[3]
    cdef u64 e = y[0], f = y[1], g = y[2], h = y[3]
    return _normalize(
        addmod(mulmod(a, e, p), mulmod(b, g, p), p),
        addmod(mulmod(a, f, p), mulmod(b, h, p), p),
        addmod(mulmod(c, e, p), mulmod(d, g, p), p),
        addmod(mulmod(c, f, p), mulmod(d, h, p), p),
        p,
    )


def mat_inv(tuple x, u64 p):
    cdef u64 a = x[0], b = x[1], c = x[2], d = x[3]
    return _normalize(d, (p - b) % p, (p - c) % p, a, p)


def mat_pow(tuple x, object e, u64 p):
    cdef u64 ra = 1, rb = 0, rc = 0, rd = 1
    cdef u64 a = x[0], b = x[1], c = x[2], d = x[3]
    cdef u64 t0, t1, t2, t3
    cdef int bit
    cdef int nbits
    e = int(e)
    nbits = e.bit_length()
    for bit in range(nbits):
        if (e >> bit) & 1:
            t0 = addmod(mulmod(ra, a, p), mulmod(rb, c, p), p)
            t1 = addmod(mulmod(ra, b, p), mulmod(rb, d, p), p)
            t2 = addmod(mulmod(rc, a, p), mulmod(rd, c, p), p)
            t3 = addmod(mulmod(rc, b, p), mulmod(rd, d, p), p)
            ra, rb, rc, rd = t0, t1, t2, t3
        if bit + 1 < nbits:
            t0 = addmod(mulmod(a, a, p), mulmod(b, c, p), p)
            t1 = addmod(mulmod(a, b, p), mulmod(b, d, p), p)
            t2 = addmod(mulmod(c, a, p), mulmod(d, c, p), p)
            t3 = addmod(mulmod(c, b, p), mulmod(d, d, p), p)
            a, b, c, d = t0, t1, t2, t3
    return _normalize(ra, rb, rc, rd, p)
