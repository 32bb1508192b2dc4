"""Digit statistics under the invariant densities.

For the 18 triples with a tabulated invariant density r, the long-run
frequency of digit k equals the area integral of r over the k-th
subtriangle.  This module computes those integrals by adaptive triangle
quadrature, evaluates the dilogarithm closed form available for (e, e, e),
and estimates the same frequencies empirically from long float orbits; the
three roads meet in the comparison report.
"""

import math
import random
from dataclasses import dataclass

from . import core
from .quadrature import QuadratureFailure, integrate_triangle
from .special import li2
from .tables import lookup

__all__ = [
    "QuadratureFailure",
    "OrbitTerminated",
    "DensityRow",
    "FrequencyRecord",
    "CompareRow",
    "density",
    "pk_integral",
    "pk_closed_form_eee",
    "orbit_frequencies",
    "compare",
]

_PI2 = math.pi**2


class OrbitTerminated(Exception):
    """The orbit left the open domain, so digit counting had to stop."""

    def __init__(self, step, point):
        super().__init__(
            "orbit reached the terminal set at step %d near (%g, %g)"
            % (step, point[0], point[1])
        )
        self.step = step
        self.point = point


@dataclass(frozen=True)
class DensityRow:
    triple: tuple
    r: object  # ClosedForm in x, y


def density(triple):
    """The invariant density row, or None when none is tabulated."""
    row = lookup("densities", triple)
    if row is None:
        return None
    return DensityRow(triple=tuple(triple), r=row["r"])


def pk_integral(triple, k, quad_tol=1e-9):
    """Digit-k frequency as the area integral of the density over cell k."""
    if k < 0:
        raise ValueError("digit index must be nonnegative")
    row = density(triple)
    if row is None:
        raise ValueError(
            "%s has no tabulated invariant density"
            % core.format_triple(triple)
        )
    f = row.r.compile_float()
    v0, v1, v2 = core.vertices(triple, k)
    return integrate_triangle(f, v0, v1, v2, quad_tol)


def pk_closed_form_eee(k, variant="k+1"):
    """Closed form for the (e, e, e) digit frequencies.

    p(0) = 1 - (6 Li2(1/4) + 12 ln^2 2) / pi^2, and for k >= 1 a dilogarithm
    expression whose first argument admits two candidate forms: 1/(k+1)^2
    (variant "k+1", the default) and 1/k^2 (variant "k").  The default is
    the variant that agrees with the direct area integrals; the tests
    adjudicate the two against pk_integral at k = 1..5.
    """
    if k < 0:
        raise ValueError("digit index must be nonnegative")
    if variant not in ("k+1", "k"):
        raise ValueError("variant must be 'k+1' or 'k'")
    if k == 0:
        return 1.0 - (6.0 * li2(0.25) + 12.0 * math.log(2.0) ** 2) / _PI2
    first = k + 1 if variant == "k+1" else k
    return (6.0 / _PI2) * (
        li2(1.0 / first**2)
        - li2(1.0 / (k + 2) ** 2)
        + 4.0 * math.log(k + 1.0) ** 2
        - 2.0 * math.log((k + 2.0) / (k + 1.0)) ** 2
        - 2.0 * math.log(k * (k + 2.0)) * math.log(k + 1.0)
    )


def _digit_eee(x, y):
    return int((1.0 - x) / y)


def _digit_e23e(x, y):
    return math.ceil((1.0 - x) / y) - 1


# closed-form digit maps, validated against core.digit in the tests
_FAST_DIGIT = {
    ("e", "e", "e"): _digit_eee,
    ("e", "23", "e"): _digit_e23e,
}


@dataclass(frozen=True)
class FrequencyRecord:
    triple: tuple
    start: tuple
    n: int
    burn_in: int
    seed: object
    counts: dict

    def frequency(self, k):
        return self.counts.get(k, 0) / self.n

    def merge(self, other):
        """Fold another record of the same map into this one.

        Counts and n add, so merging is associative and replica orbits
        computed independently can be combined in any order.  The merged
        record keeps the triple but drops start and seed, which no longer
        describe a single orbit.
        """
        if self.triple != other.triple:
            raise ValueError("records describe different maps")
        counts = dict(self.counts)
        for k, c in other.counts.items():
            counts[k] = counts.get(k, 0) + c
        return FrequencyRecord(
            triple=self.triple,
            start=None,
            n=self.n + other.n,
            burn_in=max(self.burn_in, other.burn_in),
            seed=None,
            counts=counts,
        )


def orbit_frequencies(triple, start="random", n=10**5, burn_in=1000, seed=None):
    """Digit frequencies along a float orbit of length n after burn-in.

    start is a point or "random" (uniform over the domain triangle, drawn
    from `seed`).  Raises OrbitTerminated if the orbit reaches the terminal
    edge or drifts out of the domain before n digits are counted.
    """
    triple = tuple(triple)
    if n <= 0 or burn_in < 0:
        raise ValueError("need n > 0 and burn_in >= 0")
    if start == "random":
        rng = random.Random(seed)
        u, v = rng.random(), rng.random()
        x, y = max(u, v), min(u, v)
    else:
        x, y = float(start[0]), float(start[1])
        if not 1.0 >= x >= y >= 0.0:
            raise ValueError("start point outside the domain triangle")
    started = (x, y)

    fast = _FAST_DIGIT.get(triple)
    band = core.FLOAT_TERMINAL_BAND
    forward = core._forward_float
    counts = {}
    total = burn_in + n
    for step in range(total):
        if y < band or x > 1.0 + 1e-9:
            raise OrbitTerminated(step, (x, y))
        if fast is not None:
            k = fast(x, y)
        else:
            try:
                k = core.digit(triple, (x, y))
            except core.KMaxExceeded as exc:
                # the digit scan gave out, which only happens in the extreme
                # corner of the domain; treat it as orbit degeneration
                raise OrbitTerminated(step, (x, y)) from exc
            if not isinstance(k, int):
                raise OrbitTerminated(step, (x, y))
        if step >= burn_in:
            counts[k] = counts.get(k, 0) + 1
        r0, r1, r2 = forward(triple, k)
        d = r0[0] + x * r1[0] + y * r2[0]
        x, y = (
            (r0[1] + x * r1[1] + y * r2[1]) / d,
            (r0[2] + x * r1[2] + y * r2[2]) / d,
        )
    return FrequencyRecord(
        triple=triple,
        start=started,
        n=n,
        burn_in=burn_in,
        seed=seed if start == "random" else None,
        counts=counts,
    )


@dataclass(frozen=True)
class CompareRow:
    k: int
    p_integral: float
    p_orbit: float
    abs_diff: float
    tolerance: float
    passed: bool


def compare(
    triple,
    ks,
    n=10**5,
    quad_tol=1e-9,
    start="random",
    burn_in=1000,
    seed=0,
    record=None,
):
    """Integral vs orbit digit frequencies, row per k.

    A row passes when the two agree within three binomial standard errors
    of the orbit estimate plus the quadrature tolerance.  Digits along one
    orbit are correlated, so the binomial model is approximate: for maps
    that mix slowly the realized error can exceed the band on a fair share
    of random starts even though the frequencies converge.

    Pass a pre-computed (possibly merged) record to reuse its orbit; its n
    then drives the standard errors and the orbit arguments are ignored.
    """
    triple = tuple(triple)
    if record is None:
        record = orbit_frequencies(
            triple, start=start, n=n, burn_in=burn_in, seed=seed
        )
    elif tuple(record.triple) != triple:
        raise ValueError("record describes a different map")
    n = record.n
    rows = []
    for k in ks:
        p_int = pk_integral(triple, k, quad_tol)
        p_orb = record.frequency(k)
        se = math.sqrt(max(p_int * (1.0 - p_int), 0.0) / n)
        tolerance = 3.0 * se + quad_tol
        diff = abs(p_int - p_orb)
        rows.append(
            CompareRow(
                k=k,
                p_integral=p_int,
                p_orbit=p_orb,
                abs_diff=diff,
                tolerance=tolerance,
                passed=diff <= tolerance,
            )
        )
    return rows
