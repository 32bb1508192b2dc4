"""Transfer-operator evaluation with certified truncation.

The operator attached to a triple sums weight(k,q) * f(branch(k,q)) over
the digit k.  Weights fall off cubically in k when the triple is polynomial
(branch denominators grow linearly per parity) and geometrically otherwise,
so the tail beyond a truncation point can be bounded from the computed
terms themselves.  Both bounds are validated against brute-force long sums
in the test suite.

For polynomial triples the branch-matrix entries are themselves linear in
k on each parity class, so the per-digit work is constant: the model
m(k) = E0 + k*E1 is extracted exactly from four matrices and re-verified
against two more before use.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import spectral
from .core import (
    ZeroDenominator,
    branch_matrix,
    interior_grid,
    inverse_branch,
    is_exact_point,
    jacobian_recip,
)
from .tables import lookup

ANALYTIC_CUBIC = "AnalyticCubic"
GEOMETRIC_RATIO = "GeometricRatio"
FIXED = "Fixed"

_POLICIES = (ANALYTIC_CUBIC, GEOMETRIC_RATIO, FIXED)


class NoConvergence(Exception):
    pass


class DivergenceSuspected(Exception):
    pass


@dataclass(frozen=True)
class BranchSystem:
    triple: tuple
    branch: Callable = field(repr=False, default=None)
    weight: Callable = field(repr=False, default=None)
    k_max: int = 1 << 21
    tail_policy: str = ANALYTIC_CUBIC
    denominator: Callable = field(repr=False, default=None)


class _ParityLinearModel:
    """Exact per-parity linear form of the branch matrices of a polynomial
    triple: entry (i,j) of m(k) equals e0[k%2][i][j] + k*e1[k%2][i][j]."""

    __slots__ = ("e0", "e1", "e0f", "e1f", "detm")

    def __init__(self, triple):
        ms = [branch_matrix(triple, k) for k in range(6)]
        self.e1 = []
        self.e0 = []
        for p in (0, 1):
            slope = tuple(
                tuple(Fraction(ms[p + 2].rows[i][j] - ms[p].rows[i][j], 2)
                      for j in range(3)) for i in range(3))
            base = tuple(
                tuple(ms[p].rows[i][j] - p * slope[i][j] for j in range(3))
                for i in range(3))
            self.e1.append(slope)
            self.e0.append(base)
        for k in (4, 5):
            got = self._exact_rows(k)
            if got != ms[k].rows:
                raise ValueError(
                    "branch matrices of %s are not parity-linear" % (triple,))
        self.detm = abs(ms[0].det())
        if any(abs(m.det()) != self.detm for m in ms[1:]):
            raise ValueError("branch determinant of %s varies" % (triple,))
        self.e0f = tuple(
            tuple(tuple(float(v) for v in row) for row in e) for e in self.e0)
        self.e1f = tuple(
            tuple(tuple(float(v) for v in row) for row in e) for e in self.e1)

    def _exact_rows(self, k):
        p = k & 1
        return tuple(
            tuple(self.e0[p][i][j] + k * self.e1[p][i][j] for j in range(3))
            for i in range(3))

    def rows(self, k, exact):
        if exact:
            return self._exact_rows(k)
        p = k & 1
        e0, e1 = self.e0f[p], self.e1f[p]
        return tuple(
            tuple(e0[i][j] + k * e1[i][j] for j in range(3))
            for i in range(3))

    def project(self, k, q):
        exact = is_exact_point(q)
        rows = self.rows(k, exact)
        x, y = (Fraction(q[0]), Fraction(q[1])) if exact else q
        d = rows[0][0] + x * rows[1][0] + y * rows[2][0]
        if d == 0:
            raise ZeroDenominator("branch denominator vanished")
        n1 = rows[0][1] + x * rows[1][1] + y * rows[2][1]
        n2 = rows[0][2] + x * rows[1][2] + y * rows[2][2]
        return (n1 / d, n2 / d)

    def den(self, k, q):
        exact = is_exact_point(q)
        rows = self.rows(k, exact)
        x, y = (Fraction(q[0]), Fraction(q[1])) if exact else q
        return abs(rows[0][0] + x * rows[1][0] + y * rows[2][0])

    def weight(self, k, q):
        d = self.den(k, q)
        if d == 0:
            raise ZeroDenominator("branch denominator vanished")
        return self.detm / d**3 if isinstance(d, Fraction) else (
            float(self.detm) / d**3)


def branch_system(triple, k_max=1 << 21, tail_policy=None):
    """Branch/weight pair of a triple, with a tail policy fitting its
    denominator growth unless overridden."""
    polynomial = spectral.is_polynomial(triple)
    if tail_policy is None:
        tail_policy = ANALYTIC_CUBIC if polynomial else GEOMETRIC_RATIO
    if tail_policy not in _POLICIES:
        raise ValueError("unknown tail policy %r" % (tail_policy,))
    if polynomial:
        model = _ParityLinearModel(triple)
        branch = model.project
        weight = model.weight
        den = model.den
    else:
        branch = lambda k, q: inverse_branch(triple, k, q)
        weight = lambda k, q: abs(jacobian_recip(triple, q, k))
        den = lambda k, q: _matrix_denominator(triple, k, q)
    return BranchSystem(
        triple=triple,
        branch=branch,
        weight=weight,
        k_max=k_max,
        tail_policy=tail_policy,
        denominator=den,
    )


def _matrix_denominator(triple, k, q):
    c0 = branch_matrix(triple, k).col(0)
    return abs(float(c0[0]) + float(q[0]) * float(c0[1])
               + float(q[1]) * float(c0[2]))


def _hurwitz(m, z):
    """zeta(m, z) = sum_{n>=0} 1/(z+n)^m for m in {2,3,4} and large z,
    by the Euler-Maclaurin asymptotic series (relative error < 1e-9 for
    z >= 40, far below the uncertainty the callers attach)."""
    zi = 1.0 / z
    if m == 2:
        return zi * (1 + zi * (0.5 + zi * (
            1 / 6 + zi * zi * (-1 / 30 + zi * zi * (1 / 42)))))
    if m == 3:
        return zi * zi * (0.5 + zi * (0.5 + zi * (0.25 + zi * zi * (-1 / 12))))
    if m == 4:
        return zi**3 * (1 / 3 + zi * (0.5 + zi * (1 / 3 + zi * zi * (-1 / 6))))
    raise ValueError("m must be 2, 3 or 4")


def _parity_tail(samples, z_min=40.0):
    """(tail, uncertainty) of sum_{j>=1} t(k+2j) from the last three
    same-parity samples [(t, d), ...] with d the branch denominator.

    t*d^3 is affine in d up to O(1/d): bounded f gives a flat t*d^3 (the
    cubic-decay regime) while f growing linearly along the branch points
    (the eigenfunctions) adds a slope.  Fitting A*d + B through the last
    two samples and summing A/d^2 + B/d^3 in closed Hurwitz form leaves a
    model error of order C * sum 1/d^4; the fit residual at the third
    sample is ~ 2*C*delta^2/d^3, which calibrates C.

    Below z_min the Hurwitz series itself loses digits, so the relative
    floor on the uncertainty widens from 1e-9 to 10/z^6 (the series error
    stays a couple of orders below that; the Fixed-policy callers accept
    the coarser estimate, the certified path keeps z_min=40)."""
    (t3, d3), (t2, d2), (t1, d1) = samples
    delta = d1 - d2
    if delta <= 0 or d3 >= d2:
        return None
    a_fit = (t1 * d1**3 - t2 * d2**3) / delta
    b_fit = t1 * d1**3 - a_fit * d1
    z = d1 / delta + 1.0
    if z < z_min:
        return None
    s2 = _hurwitz(2, z) / delta**2
    s3 = _hurwitz(3, z) / delta**3
    s4 = _hurwitz(4, z) / delta**4
    tail = a_fit * s2 + b_fit * s3
    c_est = abs(t3 * d3**3 - (a_fit * d3 + b_fit)) * d3**3 / (2 * delta**2)
    floor = 1e-9 if z >= 40 else 10.0 / z**6
    return tail, 4.0 * c_est * s4 + floor * abs(tail)


def _analytic_tail(even, odd, z_min=40.0):
    """Combined (tail, uncertainty) over both parity classes, or None
    until each holds three samples in the asymptotic regime."""
    if len(even) < 3 or len(odd) < 3:
        return None
    total = 0.0
    err = 0.0
    for samples in (tuple(even), tuple(odd)):
        got = _parity_tail(samples, z_min)
        if got is None:
            return None
        total += got[0]
        err += got[1]
    return total, err


def _geometric_tail(w_window, f_window):
    """Tail bound from the weight decay ratio, safety factor 2; None until
    the ratio settles below 0.9."""
    if len(w_window) < 2:
        return None
    w_prev, w_now = w_window[-2], w_window[-1]
    if w_prev <= 0 or w_now <= 0:
        return None
    r = w_now / w_prev
    if r >= 0.9:
        return None
    f_cap = max(f_window)
    return 2.0 * f_cap * w_now * r / (1.0 - r)


def transfer_apply(b, f, q, tol=1e-9):
    """(value, error bound) of sum_k weight(k,q) * f(branch(k,q)).

    AnalyticCubic truncates when the fitted parity tails carry an
    uncertainty below tol and folds the tails into the value;
    GeometricRatio truncates on the weight-decay bound.  The Fixed policy
    always sums k = 0..k_max, adds no correction, and reports the estimated
    dropped tail (used by the nested-power checks, where the truncation
    point must be identical across calls; exact inputs stay exact there).
    f must not outgrow the branch denominator along the branch points.
    """
    fixed = b.tail_policy == FIXED
    cubic = b.tail_policy == ANALYTIC_CUBIC or (
        fixed and spectral.is_polynomial(b.triple))
    total = None
    parities = (deque(maxlen=3), deque(maxlen=3))
    w_window = deque(maxlen=2)
    f_window = deque(maxlen=4)
    for k in range(b.k_max + 1):
        w = b.weight(k, q)
        fv = f(b.branch(k, q))
        term = w * fv
        total = term if total is None else total + term
        if cubic:
            parities[k & 1].append((float(term), float(b.denominator(k, q))))
        else:
            w_window.append(float(w))
            f_window.append(abs(float(fv)))
        if fixed or k < 6 or (k > 512 and k % 128):
            continue
        if cubic:
            got = _analytic_tail(*parities)
            if got is not None and got[1] <= tol:
                return total + got[0], got[1]
        else:
            bound = _geometric_tail(w_window, f_window)
            if bound is not None and bound <= tol:
                return total, bound
    if fixed:
        if cubic:
            got = _analytic_tail(*parities, z_min=4.0)
            return total, (abs(got[0]) + got[1] if got else None)
        return total, _geometric_tail(w_window, f_window)
    raise NoConvergence(
        "tail error above %g after %d terms for %s at %s"
        % (tol, b.k_max + 1, b.triple, (float(q[0]), float(q[1]))))


def eigenfunction(triple):
    row = lookup("eigenfunctions", triple)
    return row["eigenfunction"] if row else None


def banach_weight(triple):
    row = lookup("banach", triple)
    return row["g"] if row else None


def summand_form(triple):
    row = lookup("banach", triple)
    return row["summand"] if row else None


@dataclass(frozen=True)
class AppendixBForm:
    weight: object
    branch_x: object
    branch_y: object


def appendix_b_form(triple):
    """Closed-form weight and branch coordinates, present exactly for the
    polynomial-behavior triples."""
    row = lookup("appendix_b", triple)
    if row is None:
        return None
    return AppendixBForm(row["weight"], row["branch_x"], row["branch_y"])


def _vector_tail(terms, weights):
    """(tail, uncertainty) of the dropped terms of vectorized term/weight
    arrays; branch matrices are unimodular so |weight| = 1/d^3 recovers
    the denominator exactly."""
    k_last = len(terms) - 1
    total = 0.0
    err = 0.0
    for off in (0, 1):
        i = k_last - off
        samples = tuple(
            (float(terms[j]), float(weights[j]) ** (-1.0 / 3.0))
            for j in (i - 4, i - 2, i))
        got = _parity_tail(samples)
        if got is None:
            return None
        total += got[0]
        err += got[1]
    return total, err


def _table_operator_value(form, h, x, y, perturb, rel_tol, k_cap):
    """(L h)(x, y) through the tabulated weight/branch forms, truncated
    when the fitted tail uncertainty falls below rel_tol * |h + perturb|."""
    import numpy as np

    target = rel_tol * max(abs(h.eval_float(x=x, y=y) + perturb), 1e-30)
    k_hi = 1024
    while True:
        ks = np.arange(k_hi + 1, dtype=float)
        w = np.abs(form.weight.eval_numpy(x=x, y=y, k=ks))
        bx = form.branch_x.eval_numpy(x=x, y=y, k=ks)
        by = form.branch_y.eval_numpy(x=x, y=y, k=ks)
        hb = h.eval_numpy(x=bx, y=by) + perturb
        terms = w * hb
        got = _vector_tail(terms, w)
        if got is not None and got[1] <= target:
            return float(terms.sum()) + got[0], got[1]
        if k_hi >= k_cap:
            raise NoConvergence(
                "tail uncertainty above %g after %d terms" % (target, k_hi))
        k_hi *= 2


def check_eigen(triple, grid_n=15, tol=1e-6, perturb=0.0, k_cap=None):
    """Max over an interior grid of |(L h)(q) - h(q)| / |h(q)| for the
    triple's tabulated eigenfunction, with the operator truncation
    certified well below tol at every point.  perturb adds a constant to h
    (the negative control); k_cap bounds the branch index the truncation
    may reach.  Compare the result against tol yourself."""
    h = eigenfunction(triple)
    if h is None:
        raise ValueError("no tabulated eigenfunction for %s" % (triple,))
    form = appendix_b_form(triple)
    rel_tol = min(tol, 1e-6) / 10.0
    cap = (1 << 22) if k_cap is None else k_cap
    if form is not None:
        b = None
    elif k_cap is None:
        b = branch_system(triple)
    else:
        b = branch_system(triple, k_max=k_cap)
    worst = 0.0
    for x, y in interior_grid(grid_n):
        ref = h.eval_float(x=x, y=y) + perturb
        if form is not None:
            val, _ = _table_operator_value(form, h, x, y, perturb, rel_tol,
                                           cap)
        else:
            hf = lambda p: h.eval_float(x=p[0], y=p[1]) + perturb
            val, _ = transfer_apply(b, hf, (x, y), tol=rel_tol * abs(ref))
        worst = max(worst, abs(val - ref) / abs(ref))
    return worst


def banach_partial_sums(triple, grid_n=15, k_cap=10000, checkpoints=()):
    """Per-grid-point truncated sums of |summand| at k_cap, plus snapshots
    at the requested checkpoint digits."""
    import numpy as np

    s = summand_form(triple)
    if s is None:
        raise ValueError("no tabulated summand for %s" % (triple,))
    ks = np.arange(k_cap + 1, dtype=float)
    totals = []
    snaps = {c: [] for c in checkpoints}
    for x, y in interior_grid(grid_n):
        vals = np.abs(s.eval_numpy(x=x, y=y, k=ks))
        cum = np.cumsum(vals)
        totals.append(float(cum[-1]))
        for c in checkpoints:
            snaps[c].append(float(cum[min(c, k_cap)]))
    return totals, snaps


def check_banach_bound(triple, grid_n=15, k_cap=10000, ceiling=1e3,
                       summand=None):
    """Sup over the grid of the truncated sums of |summand|.

    Raises DivergenceSuspected when the sup exceeds the ceiling while the
    dyadic-window increments are not shrinking (a convergent cubic tail
    decays window over window; a log-divergent one does not).
    """
    import numpy as np

    s = summand if summand is not None else summand_form(triple)
    if s is None:
        raise ValueError("no tabulated summand for %s" % (triple,))
    ks = np.arange(k_cap + 1, dtype=float)
    sup = 0.0
    worst_cum = None
    for x, y in interior_grid(grid_n):
        vals = np.abs(s.eval_numpy(x=x, y=y, k=ks))
        cum = np.cumsum(vals)
        if float(cum[-1]) > sup:
            sup = float(cum[-1])
            worst_cum = cum
    if sup > ceiling and k_cap >= 8:
        inc_late = float(worst_cum[k_cap] - worst_cum[k_cap // 2])
        inc_mid = float(worst_cum[k_cap // 2] - worst_cum[k_cap // 4])
        if inc_late >= 0.75 * inc_mid:
            raise DivergenceSuspected(
                "partial sums reach %.3g and window increments are not "
                "shrinking (%.3g then %.3g)" % (sup, inc_mid, inc_late))
    return sup


def _power_sum(b, f, q, n):
    """(value, outer tail estimate) of the n-fold truncated operator."""
    inner = f if n == 1 else (lambda p: _power_sum(b, f, p, n - 1)[0])
    return transfer_apply(b, inner, q)


def check_positivity_monotonicity(triple, f, g, n=1, grid=4, k_trunc=48):
    """True iff L^n f < L^n g strictly at every grid point, with a margin
    larger than the accumulated truncation estimates on both sides.

    The truncated operator has positive weights, so it preserves strict
    order exactly; the margin requirement ties the verdict to the original
    operator.  n is capped at 3 (cost grows like k_trunc^n).
    """
    if not 1 <= n <= 3:
        raise ValueError("n must be 1..3")
    pts = interior_grid(grid) if isinstance(grid, int) else list(grid)
    for q in pts:
        if not f(q) < g(q):
            raise ValueError("precondition f < g fails at %s" % (q,))
    b = branch_system(triple, tail_policy=FIXED, k_max=k_trunc)
    for q in pts:
        lf, bf = _power_sum(b, f, q, n)
        lg, bg = _power_sum(b, g, q, n)
        if bf is None or bg is None:
            return False
        err = n * (bf + bg)
        if not lf < lg or not (lg - lf) > err:
            return False
    return True
