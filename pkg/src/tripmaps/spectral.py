"""Exact polynomial / non-polynomial classification of the 216 maps.

The digit-index dependence of a map's branch matrices is governed by the
powers of A = F1(sigma,tau0,tau1)^T.  Its characteristic polynomial (exact,
integer coefficients) sorts A into one of six Jordan classes: J1-J3 are the
non-diagonalizable unit-magnitude classes whose powers grow linearly in k
(up to a (-1)^k factor), J4-J6 have an eigenvalue off the unit circle and
their powers grow exponentially.  No floating eigensolvers are involved.
"""

from fractions import Fraction

from .core import TRIPLES, branch_matrix, as_schedule
from .s3mat import S3_NAMES, f1_of, s3_inv, s3_mul

POLYNOMIAL = "Polynomial"
NONPOLYNOMIAL = "NonPolynomial"

JORDAN_CLASSES = ("J1", "J2", "J3", "J4", "J5", "J6")

# characteristic polynomial coefficients (c0, c1, c2, c3) per class
_CHAR_J1_J3 = (-1, 3, -3, 1)  # (t-1)^3
_CHAR_J2 = (1, -1, -1, 1)     # (t-1)^2 (t+1)
_CHAR_J4 = (1, 0, -2, 1)      # (t-1)(t^2-t-1)
_CHAR_J5 = (-1, 0, -1, 1)     # t^3-t^2-1
_CHAR_J6 = (-1, -1, 0, 1)     # t^3-t-1


class UnrecognizedClass(Exception):
    pass


def _minus_identity(m):
    return tuple(
        tuple(m.rows[i][j] - (1 if i == j else 0) for j in range(3))
        for i in range(3))


def _rank3(rows):
    if not any(v for r in rows for v in r):
        return 0
    det = (rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
           - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
           + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]))
    if det:
        return 3
    for i, p in ((0, 1), (0, 2), (1, 2)):
        for j, q in ((0, 1), (0, 2), (1, 2)):
            if rows[i][j] * rows[p][q] - rows[i][q] * rows[p][j]:
                return 2
    return 1


def classify_matrix(a):
    """Jordan class of an integer 3x3 Mat3 with one of the six known
    characteristic polynomials."""
    coeffs = a.char_poly().coeffs
    if coeffs == _CHAR_J1_J3:
        ami = _minus_identity(a)
        rank = _rank3(ami)
        if rank != 1:
            raise UnrecognizedClass(
                "char poly (t-1)^3 with rank(A-I)=%d" % rank)
        # both displayed forms have one 2-block; they differ only in where
        # the block sits, so split by the first basis vector A-I moves
        first_moved = min(
            j for j in range(3) if any(ami[i][j] for i in range(3)))
        return "J1" if first_moved <= 1 else "J3"
    if coeffs == _CHAR_J2:
        rank = _rank3(_minus_identity(a))
        if rank != 2:
            raise UnrecognizedClass(
                "char poly (t-1)^2(t+1) with rank(A-I)=%d" % rank)
        return "J2"
    if coeffs == _CHAR_J4:
        return "J4"
    if coeffs == _CHAR_J5:
        return "J5"
    if coeffs == _CHAR_J6:
        return "J6"
    raise UnrecognizedClass("characteristic polynomial %s" % (coeffs,))


def jordan_class(triple):
    return classify_matrix(f1_of(triple).transpose())


def behavior(triple):
    return POLYNOMIAL if jordan_class(triple) in ("J1", "J2", "J3") else (
        NONPOLYNOMIAL)


def is_polynomial(triple):
    return behavior(triple) == POLYNOMIAL


def census():
    counts = {POLYNOMIAL: 0, NONPOLYNOMIAL: 0}
    for t in TRIPLES:
        counts[behavior(t)] += 1
    return counts


def conjugation_invariance(triple, rho, gamma):
    """Behavior of the conjugated triple (rho*sigma, gamma, tau1*rho^-1).

    F1 of the new triple is rho (sigma F1 tau1) rho^-1, so the class is
    preserved; the test suite asserts equality across all combinations.
    """
    sigma, _, tau1 = triple
    return behavior((s3_mul(rho, sigma), gamma, s3_mul(tau1, s3_inv(rho))))


def combo_behavior(schedule, i):
    """Behavior of the i-th factor (1-based) of a composition schedule."""
    factors = as_schedule(schedule)
    if not 1 <= i <= len(factors):
        raise IndexError("factor index %d out of 1..%d" % (i, len(factors)))
    return behavior(factors[i - 1])


def denominator_parity_linear(triple, q, k_lo=0, k_hi=10):
    """True iff d(k) = first coordinate of (1,x,y)M(t,k) has vanishing
    second differences separately on even and odd k in [k_lo, k_hi]."""
    x, y = Fraction(q[0]), Fraction(q[1])
    vals = []
    for k in range(k_lo, k_hi + 1):
        m = branch_matrix(triple, k)
        c0 = m.col(0)
        vals.append(c0[0] + x * c0[1] + y * c0[2])
    for par in (0, 1):
        sub = vals[par::2]
        for i in range(len(sub) - 2):
            if sub[i + 2] - 2 * sub[i + 1] + sub[i] != 0:
                return False
    return True


def classification_rows():
    """One row per triple: (triple, behavior, jordan_class, char_poly)."""
    rows = []
    for t in TRIPLES:
        a = f1_of(t).transpose()
        rows.append((t, behavior(t), jordan_class(t), str(a.char_poly())))
    return rows
