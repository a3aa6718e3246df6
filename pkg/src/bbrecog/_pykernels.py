"""Pure-Python kernels for projective 2x2 matrices over prime fields.

Same contract as the compiled module: 4-tuples of residues, results
normalized so the first nonzero entry is 1.
"""


def normalize(m, p):
    a, b, c, d = m
    if a:
        if a == 1:
            return m
        s = pow(a, -1, p)
        return (1, b * s % p, c * s % p, d * s % p)
    if b:
        s = pow(b, -1, p)
        return (0, 1, c * s % p, d * s % p)
    if c:
        s = pow(c, -1, p)
        return (0, 0, 1, d * s % p)
    if d:
        return (0, 0, 0, 1)
    return (0, 0, 0, 0)


def mat_mul(x, y, p):
    a, b, c, d = x
    e, f, g, h = y
    return normalize(
        ((a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p), p
    )


def mat_inv(x, p):
    a, b, c, d = x
    return normalize((d, -b % p, -c % p, a), p)


def mat_pow(x, e, p):
    ra, rb, rc, rd = 1, 0, 0, 1
    a, b, c, d = x
    while e:
        if e & 1:
            ra, rb, rc, rd = (
                (ra * a + rb * c) % p,
                (ra * b + rb * d) % p,
                (rc * a + rd * c) % p,
                (rc * b + rd * d) % p,
            )
        e >>= 1
        if e:
            a, b, c, d = (a * a + b * c) % p, (a * b + b * d) % p, (c * a + d * c) % p, (c * b + d * d) % p
    return normalize((ra, rb, rc, rd), p)
