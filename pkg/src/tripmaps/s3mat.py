"""Exact algebra underlying the triangle partition maps.

Everything here is exact: matrix entries are Python ints or Fractions, never
floats.  The six permutation matrices are hardcoded in the fixed convention
used throughout the package; group composition is *matrix* composition, so
``s3_mul(a, b)`` names the element whose matrix is ``perm_matrix(a) *
perm_matrix(b)`` (row vectors act on the right).
"""

from fractions import Fraction

S3_NAMES = ("e", "12", "13", "23", "123", "132")


class Mat3:
    """Immutable exact 3x3 matrix over int/Fraction entries."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(r) for r in rows)
        if len(self.rows) != 3 or any(len(r) != 3 for r in self.rows):
            raise ValueError("Mat3 needs 3x3 entries")

    def __repr__(self):
        return "Mat3(%r)" % (self.rows,)

    def __eq__(self, other):
        return isinstance(other, Mat3) and all(
            a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb)
        )

    def __hash__(self):
        return hash(tuple(tuple(Fraction(e) for e in r) for r in self.rows))

    def __mul__(self, other):
        a, b = self.rows, other.rows
        return Mat3(
            tuple(
                tuple(sum(a[i][m] * b[m][j] for m in range(3)) for j in range(3))
                for i in range(3)
            )
        )

    def col(self, j):
        return tuple(self.rows[i][j] for i in range(3))

    def transpose(self):
        return Mat3(tuple(zip(*self.rows)))

    def det(self):
        (a, b, c), (d, e, f), (g, h, i) = self.rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def adjugate(self):
        (a, b, c), (d, e, f), (g, h, i) = self.rows
        return Mat3(
            (
                (e * i - f * h, c * h - b * i, b * f - c * e),
                (f * g - d * i, a * i - c * g, c * d - a * f),
                (d * h - e * g, b * g - a * h, a * e - b * d),
            )
        )

    def inverse(self):
        d = self.det()
        if d == 0:
            raise ZeroDivisionError("singular matrix")
        adj = self.adjugate()
        if d == 1:
            return adj
        if d == -1:
            return Mat3(tuple(tuple(-e for e in r) for r in adj.rows))
        return Mat3(tuple(tuple(Fraction(e, d) for e in r) for r in adj.rows))

    def apply_row(self, v):
        """Row vector times matrix: v * M."""
        r = self.rows
        return tuple(
            v[0] * r[0][j] + v[1] * r[1][j] + v[2] * r[2][j] for j in range(3)
        )

    def char_poly(self):
        """Exact char poly det(tI - M) by cofactor expansion, as a CubicPoly."""
        # entries of tI - M as degree-1 polynomials (c0, c1) meaning c0 + c1*t
        m = self.rows
        ent = [
            [(-m[i][j], 1 if i == j else 0) for j in range(3)] for i in range(3)
        ]

        def pmul(p, q):
            out = [0] * (len(p) + len(q) - 1)
            for i, a in enumerate(p):
                for j, b in enumerate(q):
                    out[i + j] += a * b
            return out

        def padd(p, q):
            n = max(len(p), len(q))
            return [
                (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                for i in range(n)
            ]

        def psub(p, q):
            return padd(p, [-c for c in q])

        def minor(r0, r1, c0, c1):
            return psub(
                pmul(ent[r0][c0], ent[r1][c1]), pmul(ent[r0][c1], ent[r1][c0])
            )

        total = [0]
        for j, sign in ((0, 1), (1, -1), (2, 1)):
            cols = [c for c in range(3) if c != j]
            term = pmul(list(ent[0][j]), minor(1, 2, cols[0], cols[1]))
            total = padd(total, [sign * c for c in term])
        total = (total + [0, 0, 0, 0])[:4]
        return CubicPoly(tuple(total))


class CubicPoly:
    """Exact cubic c0 + c1*t + c2*t^2 + c3*t^3."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = tuple(coeffs)
        if len(self.coeffs) != 4:
            raise ValueError("need 4 coefficients")

    def __eq__(self, other):
        return isinstance(other, CubicPoly) and all(
            a == b for a, b in zip(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash(tuple(Fraction(c) for c in self.coeffs))

    def __call__(self, t):
        c0, c1, c2, c3 = self.coeffs
        return c0 + t * (c1 + t * (c2 + t * c3))

    def __repr__(self):
        return "CubicPoly(%r)" % (self.coeffs,)

    def __str__(self):
        parts = []
        for p in (3, 2, 1, 0):
            c = self.coeffs[p]
            if c == 0:
                continue
            mag = abs(c)
            if p == 0:
                body = str(mag)
            else:
                tp = "t" if p == 1 else "t^%d" % p
                body = tp if mag == 1 else "%s%s" % (mag, tp)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+" if c > 0 else "-") + body)
        return "".join(parts) if parts else "0"


IDENTITY = Mat3(((1, 0, 0), (0, 1, 0), (0, 0, 1)))

# the fixed matrix for each permutation name
_PERM_MATS = {
    "e": IDENTITY,
    "12": Mat3(((0, 1, 0), (1, 0, 0), (0, 0, 1))),
    "13": Mat3(((0, 0, 1), (0, 1, 0), (1, 0, 0))),
    "23": Mat3(((1, 0, 0), (0, 0, 1), (0, 1, 0))),
    "123": Mat3(((0, 1, 0), (0, 0, 1), (1, 0, 0))),
    "132": Mat3(((0, 0, 1), (1, 0, 0), (0, 1, 0))),
}

_MAT_TO_NAME = {m: n for n, m in _PERM_MATS.items()}

V = Mat3(((1, 1, 1), (0, 1, 1), (0, 0, 1)))
F0 = Mat3(((0, 0, 1), (1, 0, 0), (0, 1, 1)))
F1 = Mat3(((1, 0, 1), (0, 1, 0), (0, 0, 1)))


def check_s3_name(name):
    if name not in _PERM_MATS:
        raise ValueError("not an S3 element name: %r" % (name,))
    return name


def perm_matrix(name):
    return _PERM_MATS[check_s3_name(name)]


def s3_mul(a, b):
    """Name of the product: perm_matrix(a) * perm_matrix(b)."""
    return _MAT_TO_NAME[perm_matrix(a) * perm_matrix(b)]


def s3_inv(a):
    return _MAT_TO_NAME[perm_matrix(a).transpose()]


def f0_of(triple):
    """sigma * F0 * tau0 for triple = (sigma, tau0, tau1)."""
    sigma, tau0, _ = triple
    return perm_matrix(sigma) * F0 * perm_matrix(tau0)


def f1_of(triple):
    """sigma * F1 * tau1 for triple = (sigma, tau0, tau1)."""
    sigma, _, tau1 = triple
    return perm_matrix(sigma) * F1 * perm_matrix(tau1)


def mat_pow(m, k):
    """Exact m**k for integer k (negative k through the exact inverse)."""
    if k < 0:
        return mat_pow(m.inverse(), -k)
    result = IDENTITY
    base = m
    while k:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result
