"""Adaptive numerical integration over intervals, the half line, triangles.

Interval integration is adaptive Simpson with the usual one-fifteenth
Richardson acceptance; the half line is folded onto [0, 1) by s = u/(1-u).
Triangles use a degree-5 seven-point rule under worst-cell-first refinement:
each cell carries the defect between its own rule value and the sum over its
four congruent children, and cells are split until the total defect drops
under the tolerance.  That grades the mesh automatically into corners where
the integrand blows up, as the densities here do (integrably) at a vertex.

All tolerances are absolute.  QuadratureFailure means the budget (recursion
depth or evaluation count) ran out before the tolerance was met.
"""

import heapq

__all__ = [
    "QuadratureFailure",
    "integrate_interval",
    "integrate_halfline",
    "integrate_triangle",
]


class QuadratureFailure(Exception):
    """The requested tolerance was not reached within the budget."""


def integrate_interval(f, a, b, tol, max_depth=48, min_depth=0):
    """Integrate f over [a, b] to absolute tolerance tol."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0
    if b < a:
        return -integrate_interval(f, b, a, tol, max_depth, min_depth)
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adapt(f, a, m, b, fa, fm, fb, whole, tol, max_depth, min_depth)


def _adapt(f, a, m, b, fa, fm, fb, whole, tol, depth, force):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if force <= 0 and abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureFailure(
            "interval [%g, %g] still has defect %g at full depth"
            % (a, b, abs(delta))
        )
    half = 0.5 * tol
    return _adapt(
        f, a, lm, m, fa, flm, fm, left, half, depth - 1, force - 1
    ) + _adapt(f, m, rm, b, fm, frm, fb, right, half, depth - 1, force - 1)


def integrate_halfline(f, tol, max_depth=48, min_depth=6):
    """Integrate f over [0, inf) to absolute tolerance tol.

    Uses the substitution s = u/(1-u).  The integrand must decay fast enough
    that f(s) * (1+s)^2 -> 0, which holds for everything integrated against
    the exponential-type weights in this package; the u = 1 endpoint is then
    an honest zero.  min_depth forces that many uniform halvings before the
    acceptance test may fire, so short oscillation in s cannot alias past a
    coarse Simpson check.
    """

    def g(u):
        if u >= 1.0:
            return 0.0
        w = 1.0 - u
        return f(u / w) / (w * w)

    return integrate_interval(g, 0.0, 1.0, tol, max_depth, min_depth)


# degree-5 rule: centroid weight 9/40 plus two three-point orbits
_ORBITS = (
    (0.10128650732345634, 0.12593918054482715),
    (0.47014206410511509, 0.13239415278850618),
)


def _rule7(f, v0, v1, v2, area):
    (x0, y0), (x1, y1), (x2, y2) = v0, v1, v2
    total = 0.225 * f((x0 + x1 + x2) / 3.0, (y0 + y1 + y2) / 3.0)
    for a, w in _ORBITS:
        b = 1.0 - 2.0 * a
        part = f(a * x0 + a * x1 + b * x2, a * y0 + a * y1 + b * y2)
        part += f(a * x0 + b * x1 + a * x2, a * y0 + b * y1 + a * y2)
        part += f(b * x0 + a * x1 + a * x2, b * y0 + a * y1 + a * y2)
        total += w * part
    return total * area


def _split(v0, v1, v2):
    (x0, y0), (x1, y1), (x2, y2) = v0, v1, v2
    m01 = (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    m12 = (0.5 * (x1 + x2), 0.5 * (y1 + y2))
    m20 = (0.5 * (x2 + x0), 0.5 * (y2 + y0))
    return (
        (v0, m01, m20),
        (m01, v1, m12),
        (m20, m12, v2),
        (m01, m12, m20),
    )


def integrate_triangle(f, v0, v1, v2, tol, max_evals=1_000_000):
    """Integrate f over the triangle v0 v1 v2 to absolute tolerance tol."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    v0 = (float(v0[0]), float(v0[1]))
    v1 = (float(v1[0]), float(v1[1]))
    v2 = (float(v2[0]), float(v2[1]))
    area = 0.5 * abs(
        (v1[0] - v0[0]) * (v2[1] - v0[1]) - (v2[0] - v0[0]) * (v1[1] - v0[1])
    )
    if area == 0.0:
        raise ValueError("degenerate triangle")
    used = [0]

    def rule(tri, cell_area):
        used[0] += 7
        if used[0] > max_evals:
            raise QuadratureFailure(
                "triangle refinement exceeded %d evaluations" % max_evals
            )
        return _rule7(f, tri[0], tri[1], tri[2], cell_area)

    def make(tri, cell_area, coarse):
        kids = _split(*tri)
        quarter = 0.25 * cell_area
        kid_values = [rule(t, quarter) for t in kids]
        fine = sum(kid_values)
        return [abs(fine - coarse), fine, quarter, kids, kid_values]

    root = make((v0, v1, v2), area, rule((v0, v1, v2), area))
    total = root[1]
    defect = root[0]
    heap = [(-root[0], 0, root)]
    tick = 1
    while defect > tol and heap:
        _, _, node = heapq.heappop(heap)
        est, fine, quarter, kids, kid_values = node
        if est <= 0.0:
            break
        total -= fine
        defect -= est
        for tri, coarse in zip(kids, kid_values):
            child = make(tri, quarter, coarse)
            total += child[1]
            defect += child[0]
            heapq.heappush(heap, (-child[0], tick, child))
            tick += 1
    return total
