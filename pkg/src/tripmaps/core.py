"""Triangle partition maps: subtriangle cones, digits, forward and inverse maps.

A map is named by a triple of S3 element names, e.g. ("e", "23", "132").  The
domain is the triangle 1 >= x >= y >= 0.  For digit k the subtriangle matrix
("cone") is V * F1(t)^k * F0(t); its columns, read projectively via
pi(a,b,c) = (b/a, c/a), are the subtriangle's vertices.  The forward map on
subtriangle k sends row vector (1,x,y) through (V F0(t)^-1 F1(t)^-k V^-1)^T
and projects; the inverse branch uses the inverse matrix

    M(t,k) = (V^T)^-1 * F0(t)^T * (F1(t)^T)^k * V^T.

Points are (x, y) pairs; Fraction coordinates select the exact path and float
coordinates the float path.  Exact results stay exact.
"""

from dataclasses import dataclass
from fractions import Fraction
import json
import math

from .s3mat import S3_NAMES, V, Mat3, f0_of, f1_of, mat_pow

TRIPLES = tuple(
    (s, t0, t1) for s in S3_NAMES for t0 in S3_NAMES for t1 in S3_NAMES
)

FLOAT_BOUNDARY_TOL = 1e-12
FLOAT_TERMINAL_BAND = 1e-13


class DegenerateVertex(Exception):
    """A cone column has first coordinate 0: projective point at infinity."""


class ZeroDenominator(Exception):
    """Projection denominator vanished at this point."""


class KMaxExceeded(Exception):
    """No digit found up to k_max but containment still looks plausible."""


class OutsideDomainError(Exception):
    """Expansion left the domain; .step is the failing step index."""

    def __init__(self, step, point=None):
        super().__init__("point left the domain at step %d" % step)
        self.step = step
        self.point = point


class _Outcome:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


TERMINATED = _Outcome("Terminated")
OUTSIDE_DOMAIN = _Outcome("OutsideDomain")


def parse_triple(text):
    parts = tuple(p.strip() for p in text.split(","))
    if len(parts) != 3 or any(p not in S3_NAMES for p in parts):
        raise ValueError("not a triple of S3 names: %r" % (text,))
    return parts


def format_triple(triple):
    return ",".join(triple)


def parse_point(text):
    """Parse "num/den,num/den" (exact) or decimal "0.7,0.2" (float)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError("point needs two coordinates: %r" % (text,))
    if any(("." in p) or ("e" in p.lower() and "/" not in p) for p in parts):
        return (float(parts[0]), float(parts[1]))
    return (Fraction(parts[0]), Fraction(parts[1]))


def format_point(p):
    if is_exact_point(p):
        return "%s,%s" % (p[0], p[1])
    return "%.10g,%.10g" % (p[0], p[1])


def is_exact_point(p):
    return not (isinstance(p[0], float) or isinstance(p[1], float))


_cone_cache = {}
_m_cache = {}
_n_cache = {}
_baryinv_cache = {}
_baryinv_float_cache = {}
_n_float_cache = {}
_m_float_cache = {}


def cone_matrix(triple, k):
    """V * F1(t)^k * F0(t), exact."""
    key = (triple, k)
    got = _cone_cache.get(key)
    if got is None:
        got = V * mat_pow(f1_of(triple), k) * f0_of(triple)
        _cone_cache[key] = got
    return got


def branch_matrix(triple, k):
    """M(t,k): the inverse-branch matrix (V^T)^-1 F0(t)^T (F1(t)^T)^k V^T."""
    key = (triple, k)
    got = _m_cache.get(key)
    if got is None:
        vt = V.transpose()
        got = (
            vt.inverse()
            * f0_of(triple).transpose()
            * mat_pow(f1_of(triple).transpose(), k)
            * vt
        )
        _m_cache[key] = got
    return got


def forward_matrix(triple, k):
    """N(t,k) = M(t,k)^-1: row vector (1,x,y) * N, projected, is the map."""
    key = (triple, k)
    got = _n_cache.get(key)
    if got is None:
        got = branch_matrix(triple, k).inverse()
        _n_cache[key] = got
    return got


def _float_mat(m):
    return tuple(tuple(float(e) for e in row) for row in m.rows)


def _forward_float(triple, k):
    key = (triple, k)
    got = _n_float_cache.get(key)
    if got is None:
        got = _float_mat(forward_matrix(triple, k))
        _n_float_cache[key] = got
    return got


def _branch_float(triple, k):
    key = (triple, k)
    got = _m_float_cache.get(key)
    if got is None:
        got = _float_mat(branch_matrix(triple, k))
        _m_float_cache[key] = got
    return got


def vertices(triple, k):
    """The three subtriangle vertices, exact, in cone column order."""
    c = cone_matrix(triple, k)
    out = []
    for j in range(3):
        a, b, cc = c.col(j)
        if a == 0:
            raise DegenerateVertex(
                "cone column %d of %s, k=%d projects to infinity"
                % (j, format_triple(triple), k)
            )
        out.append((Fraction(b, a), Fraction(cc, a)))
    return tuple(out)


def _bary_inverse(triple, k):
    """Inverse of the affine vertex matrix [[1,1,1],[x0,x1,x2],[y0,y1,y2]].

    Columns of the cone are normalized to first coordinate 1, so the solved
    coefficients are true barycentric coordinates summing to 1.
    """
    key = (triple, k)
    got = _baryinv_cache.get(key)
    if got is None:
        vs = vertices(triple, k)
        b = Mat3(
            (
                (1, 1, 1),
                (vs[0][0], vs[1][0], vs[2][0]),
                (vs[0][1], vs[1][1], vs[2][1]),
            )
        )
        d = b.det()
        if d == 0:
            raise DegenerateVertex(
                "degenerate subtriangle for %s, k=%d" % (format_triple(triple), k)
            )
        got = b.inverse()
        _baryinv_cache[key] = got
    return got


def _bary_inverse_float(triple, k):
    key = (triple, k)
    got = _baryinv_float_cache.get(key)
    if got is None:
        got = _float_mat(_bary_inverse(triple, k))
        _baryinv_float_cache[key] = got
    return got


def barycentric(triple, k, p):
    """Affine barycentric coordinates of p w.r.t. the subtriangle's vertices."""
    x, y = p
    if is_exact_point(p):
        x, y = Fraction(x), Fraction(y)
        inv = _bary_inverse(triple, k)
        r = inv.rows
    else:
        r = _bary_inverse_float(triple, k)
    return tuple(r[i][0] + r[i][1] * x + r[i][2] * y for i in range(3))


def _in_closed_domain(p, exact):
    x, y = p
    if exact:
        return 1 >= x >= y >= 0
    t = FLOAT_BOUNDARY_TOL
    return (1 + t >= x) and (x + t >= y) and (y >= -t)


def digit(triple, p, k_max=4096):
    """Digit of p: smallest k with p in the closed subtriangle k.

    Returns an int digit, or TERMINATED (p on the terminal edge y=0), or
    OUTSIDE_DOMAIN.  Raises KMaxExceeded when no k <= k_max contains p but
    float probes beyond k_max still see near-containment, i.e. a larger k_max
    would plausibly find the digit.  Ties on shared boundaries go to the
    smallest k.
    """
    exact = is_exact_point(p)
    if exact:
        if p[1] == 0:
            return TERMINATED
    elif abs(p[1]) < FLOAT_TERMINAL_BAND:
        return TERMINATED
    if not _in_closed_domain(p, exact):
        return OUTSIDE_DOMAIN
    tol = 0 if exact else -FLOAT_BOUNDARY_TOL
    for k in range(k_max + 1):
        a, b, c = barycentric(triple, k, p)
        if a >= tol and b >= tol and c >= tol:
            return k
    if _digit_plausible_beyond(triple, p, k_max):
        raise KMaxExceeded(
            "no digit of %s for %s with k_max=%d but containment beyond is "
            "plausible" % (format_point(p), format_triple(triple), k_max)
        )
    return OUTSIDE_DOMAIN


_PARITY_LINEAR_CHARS = {
    (-1, 3, -3, 1),  # (t-1)^3
    (1, -1, -1, 1),  # (t-1)^2 (t+1)
}


def _parity_linear(triple):
    """True when F1(t)^k is linear in k on each parity class (eigenvalues
    all of modulus 1), so cone columns are too."""
    return f1_of(triple).char_poly().coeffs in _PARITY_LINEAR_CHARS


def _quad_nonneg_intervals(coeffs):
    """Integer intervals of m >= 0 where a0 + a1 m + a2 m^2 >= 0.

    Returns a list of (lo, hi), hi None meaning unbounded.  Exact: roots are
    bracketed with integer square roots and every endpoint is confirmed by
    exact sign evaluation, so arbitrarily large digits are handled.
    """
    a0, a1, a2 = (Fraction(c) for c in coeffs)

    def q(m):
        return a0 + a1 * m + a2 * m * m >= 0

    if a2 == 0 and a1 == 0:
        return [(0, None)] if a0 >= 0 else []
    if a2 == 0:
        r = -a0 / a1
        if a1 > 0:
            return [(max(0, math.ceil(r)), None)]
        hi = math.floor(r)
        return [(0, hi)] if hi >= 0 else []
    disc = a1 * a1 - 4 * a0 * a2
    if disc < 0:
        return [(0, None)] if a2 > 0 else []
    # sqrt(disc) lies in [s/d, (s+1)/d]
    s = math.isqrt(disc.numerator * disc.denominator)
    brackets = [
        (-a1 + sgn * Fraction(s + off, disc.denominator)) / (2 * a2)
        for sgn in (-1, 1)
        for off in (0, 1)
    ]
    rlo_b, rhi_b = min(brackets), max(brackets)

    def walk_up(m, limit):
        for _ in range(32):
            if limit is not None and m > limit:
                return None
            if q(m):
                return m
            m += 1
        return None

    def walk_down(m, limit):
        for _ in range(32):
            if m < limit:
                return None
            if q(m):
                return m
            m -= 1
        return None

    if a2 > 0:
        # nonneg for m <= smaller root or m >= larger root
        out = []
        hi1 = walk_down(math.floor(rlo_b) + 1, 0)
        if hi1 is not None:
            out.append((0, hi1))
        lo2 = walk_up(max(0, math.floor(rhi_b) - 1), None)
        if lo2 is None:
            raise ArithmeticError("quadratic sign walk failed")
        out.append((lo2, None))
        if len(out) == 2 and out[0][1] + 1 >= out[1][0]:
            out = [(0, None)]
        return out
    # a2 < 0: nonneg between the roots
    if rhi_b < 0:
        return []
    lo = walk_up(max(0, math.floor(rlo_b) - 1), math.ceil(rhi_b) + 1)
    if lo is None:
        return []
    hi = walk_down(math.ceil(rhi_b) + 1, lo)
    return [(lo, hi)] if hi is not None else []


def _intersect_intervals(a, b):
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo = max(lo1, lo2)
            hi = hi1 if hi2 is None else (hi2 if hi1 is None else min(hi1, hi2))
            if hi is None or lo <= hi:
                out.append((lo, hi))
    return out


def _digit_plausible_beyond(triple, p, k_max):
    """Could some k > k_max contain p?

    For parity-linear triples the cone columns are exact affine functions of
    k on each parity class, so containment reduces to three quadratic sign
    conditions in k and the answer is exact.  Otherwise subtriangle diameters
    collapse geometrically and a short exact ladder of probes decides it up
    to points on the limit set, where "plausible" is the honest answer.
    """
    x, y = Fraction(p[0]), Fraction(p[1])
    v = (1, x, y)
    if _parity_linear(triple):
        decided = True
        for parity in (0, 1):
            r = k_max + 1
            if r % 2 != parity:
                r += 1
            cones = [cone_matrix(triple, r + 2 * i) for i in range(4)]
            affine = all(
                cones[i + 2].rows[a][b]
                - 2 * cones[i + 1].rows[a][b]
                + cones[i].rows[a][b]
                == 0
                for i in range(2)
                for a in range(3)
                for b in range(3)
            )
            if not affine:
                decided = False
                break
            cols = [[c.col(j) for j in range(3)] for c in cones[:3]]
            eps = 1 if cones[0].det() > 0 else -1
            acc = [(0, None)]
            for j in range(3):
                dj = []
                for i in range(3):
                    m = Mat3(
                        zip(*[v if jj == j else cols[i][jj] for jj in range(3)])
                    )
                    dj.append(m.det())
                a2 = Fraction(dj[2] - 2 * dj[1] + dj[0], 2)
                a1 = dj[1] - dj[0] - a2
                acc = _intersect_intervals(
                    acc, _quad_nonneg_intervals((eps * dj[0], eps * a1, eps * a2))
                )
                if not acc:
                    break
            if acc:
                return True
        if decided:
            return False
    # geometric fallback: subtriangle diameters collapse, so a short exact
    # ladder separates "digit just past k_max" from "outside the union",
    # with a near-zero band for points on the accumulation set
    for k in range(k_max + 1, k_max + 65):
        if min(barycentric(triple, k, (x, y))) >= 0:
            return True
    band = -Fraction(1, 10**9)
    for step in (128, 256, 512, 1024, 2048, 4096):
        if min(barycentric(triple, k_max + step, (x, y))) > band:
            return True
    return False


def _project_row(p, mat_rows, exact):
    x, y = p
    v0 = mat_rows[0][0] + x * mat_rows[1][0] + y * mat_rows[2][0]
    v1 = mat_rows[0][1] + x * mat_rows[1][1] + y * mat_rows[2][1]
    v2 = mat_rows[0][2] + x * mat_rows[1][2] + y * mat_rows[2][2]
    if v0 == 0:
        raise ZeroDenominator("projection denominator vanished")
    if exact:
        return (Fraction(v1, v0), Fraction(v2, v0))
    return (v1 / v0, v2 / v0)


def apply_map(triple, k, p):
    """Forward map with digit k at p (caller warrants p is in subtriangle k)."""
    if is_exact_point(p):
        p = (Fraction(p[0]), Fraction(p[1]))
        return _project_row(p, forward_matrix(triple, k).rows, True)
    return _project_row(p, _forward_float(triple, k), False)


def inverse_branch(triple, k, q):
    """The k-th inverse branch at q (the preimage lying in subtriangle k)."""
    if is_exact_point(q):
        q = (Fraction(q[0]), Fraction(q[1]))
        return _project_row(q, branch_matrix(triple, k).rows, True)
    return _project_row(q, _branch_float(triple, k), False)


def jacobian_recip(triple, q, k):
    """1/|Jac T| at the k-th preimage of q: |det M| / |(1,x,y) M e1|^3."""
    exact = is_exact_point(q)
    if exact:
        m = branch_matrix(triple, k)
        rows = m.rows
        detm = abs(m.det())
    else:
        rows = _branch_float(triple, k)
        detm = abs(
            branch_matrix(triple, k).det()
        )  # det is +-1; exact is cheap
    x, y = q
    d = rows[0][0] + x * rows[1][0] + y * rows[2][0]
    if d == 0:
        raise ZeroDenominator("branch denominator vanished")
    if exact:
        return Fraction(detm) / abs(Fraction(d)) ** 3
    return float(detm) / abs(d) ** 3


@dataclass
class DigitSequence:
    digits: list
    terminated: bool

    def to_json(self):
        return json.dumps({"digits": self.digits, "terminated": self.terminated})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(digits=list(d["digits"]), terminated=bool(d["terminated"]))


def as_schedule(triple_or_schedule):
    """Normalize to a non-empty list of triples, applied cyclically."""
    if (
        isinstance(triple_or_schedule, tuple)
        and len(triple_or_schedule) == 3
        and all(isinstance(s, str) for s in triple_or_schedule)
    ):
        return [triple_or_schedule]
    sched = list(triple_or_schedule)
    if not sched:
        raise ValueError("empty schedule")
    return sched


def parse_schedule(text):
    """Semicolon-separated triples, e.g. "e,e,e;23,23,23"."""
    return [parse_triple(part) for part in text.split(";") if part.strip()]


def expand(triple_or_schedule, p, n, k_max=4096):
    """Digit expansion of p for n steps (schedules cycle per step).

    Stops early with terminated=True when the orbit reaches the terminal edge
    or a projection denominator vanishes; the digit found at a step whose
    apply failed is kept.  Raises OutsideDomainError (with .step) if a point
    falls outside the subtriangle union.
    """
    sched = as_schedule(triple_or_schedule)
    digits = []
    cur = p
    for i in range(n):
        t = sched[i % len(sched)]
        d = digit(t, cur, k_max=k_max)
        if d is TERMINATED:
            return DigitSequence(digits, True)
        if d is OUTSIDE_DOMAIN:
            raise OutsideDomainError(i, cur)
        digits.append(d)
        try:
            cur = apply_map(t, d, cur)
        except ZeroDenominator:
            return DigitSequence(digits, True)
    return DigitSequence(digits, False)


def interior_grid(grid_n):
    """grid_n^2 float points strictly inside the domain triangle.

    Margin from every boundary scales like 1/(grid_n+2): x runs over
    [m, 1-m] and y/x over [m, 1-m], with m = 1/(grid_n+2).
    """
    m = 1.0 / (grid_n + 2)
    pts = []
    for i in range(grid_n):
        x = m + (1 - 2 * m) * (i / (grid_n - 1) if grid_n > 1 else 0.5)
        for j in range(grid_n):
            r = m + (1 - 2 * m) * (j / (grid_n - 1) if grid_n > 1 else 0.5)
            pts.append((x, x * r))
    return pts


def interior_rational_points(triple, k, count, salt=0):
    """Exact interior points of subtriangle k, via positive rational
    barycentric mixes of its vertices (deterministic in count and salt)."""
    vs = vertices(triple, k)
    pts = []
    for i in range(count):
        w = (
            Fraction(2 + ((i * 7 + salt * 3) % 11), 23),
            Fraction(3 + ((i * 5 + salt) % 13), 29),
            Fraction(5 + (i % 7), 31),
        )
        s = w[0] + w[1] + w[2]
        x = (w[0] * vs[0][0] + w[1] * vs[1][0] + w[2] * vs[2][0]) / s
        y = (w[0] * vs[0][1] + w[1] * vs[1][1] + w[2] * vs[2][1]) / s
        pts.append((x, y))
    return pts
