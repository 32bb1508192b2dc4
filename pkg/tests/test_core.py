from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from tripmaps import core
from tripmaps.core import (
    OUTSIDE_DOMAIN,
    TERMINATED,
    TRIPLES,
    DigitSequence,
    KMaxExceeded,
    OutsideDomainError,
    apply_map,
    barycentric,
    cone_matrix,
    digit,
    expand,
    format_point,
    format_triple,
    interior_rational_points,
    inverse_branch,
    jacobian_recip,
    parse_point,
    parse_schedule,
    parse_triple,
    vertices,
)

EEE = ("e", "e", "e")


def fib_shift(n):
    # f(-2) = 1, f(-1) = 0, f(n) = f(n-1) + f(n-2)
    a, b = 1, 0
    for _ in range(n + 1):
        a, b = b, a + b
    return b if n >= -1 else 1


def test_parse_and_format():
    assert parse_triple("e,23,132") == ("e", "23", "132")
    assert format_triple(("12", "e", "123")) == "12,e,123"
    with pytest.raises(ValueError):
        parse_triple("e,badname,e")
    assert parse_point("7/10,1/5") == (F(7, 10), F(1, 5))
    assert parse_point("0.7,0.2") == (0.7, 0.2)
    assert parse_point("1,0") == (F(1), F(0))
    assert format_point((F(7, 10), F(1, 5))) == "7/10,1/5"
    assert parse_schedule("e,e,e;23,23,23") == [EEE, ("23", "23", "23")]


def test_digit_worked_example():
    assert digit(EEE, (F(7, 10), F(1, 5))) == 1


def test_apply_worked_example():
    assert apply_map(EEE, 1, (F(7, 10), F(1, 5))) == (F(2, 7), F(1, 7))


def test_jacobian_recip_worked_example():
    assert jacobian_recip(EEE, (F(1, 2), F(1, 4)), 0) == F(64, 125)


def test_terminating_edge():
    assert digit(EEE, (F(1, 2), F(0))) is TERMINATED
    assert digit(EEE, (0.5, 1e-14)) is TERMINATED
    # just outside the float terminal band: a (huge) digit exists instead
    with pytest.raises(KMaxExceeded):
        digit(EEE, (0.5, 1e-9))


def test_outside_domain_sentinel():
    assert digit(EEE, (F(1, 2), F(3, 4))) is OUTSIDE_DOMAIN
    assert digit(EEE, (F(3, 2), F(1, 4))) is OUTSIDE_DOMAIN
    assert digit(EEE, (F(1, 2), F(-1, 4))) is OUTSIDE_DOMAIN


def test_barycentric_worked_examples():
    assert barycentric(("e", "e", "13"), 0, (F(3, 4), F(1, 2))) == (
        F(1, 4),
        F(1, 4),
        F(1, 2),
    )
    assert barycentric(("e", "e", "13"), 1, (F(1, 2), F(1, 10))) == (
        F(2, 5),
        F(3, 10),
        F(3, 10),
    )


def test_barycentric_affine_normalization():
    for t in (EEE, ("12", "13", "23"), ("132", "123", "12")):
        for k in (0, 1, 3):
            for p in interior_rational_points(t, k, 3):
                lam = barycentric(t, k, p)
                assert sum(lam) == 1
                vs = vertices(t, k)
                x = sum(l * v[0] for l, v in zip(lam, vs))
                y = sum(l * v[1] for l, v in zip(lam, vs))
                assert (x, y) == p


def test_eee_cone_closed_form():
    for k in range(7):
        assert cone_matrix(EEE, k).rows == (
            (1, k + 1, k + 2),
            (1, 1, 1),
            (0, 1, 1),
        )


def test_e23e_shares_eee_subtriangles():
    # same subtriangles as (e,e,e), with two cone columns swapped
    for k in range(7):
        assert set(vertices(("e", "23", "e"), k)) == set(vertices(EEE, k))
    assert vertices(("e", "23", "e"), 0) == (
        (F(1), F(0)),
        (F(1, 2), F(1, 2)),
        (F(1), F(1)),
    )


def test_232323_vertices():
    for k in range(6):
        assert set(vertices(("23", "23", "23"), k)) == {
            (F(1), F(1)),
            (F(1, k + 1), F(0)),
            (F(1, k + 2), F(0)),
        }


def test_fibonacci_power_closed_form():
    from tripmaps.s3mat import f1_of, mat_pow

    t = ("e", "e", "13")
    for k in range(41):
        m = mat_pow(f1_of(t), k)
        assert m.rows == (
            (fib_shift(k), 0, fib_shift(k - 1)),
            (0, 1, 0),
            (fib_shift(k - 1), 0, fib_shift(k - 2)),
        )


def test_fibonacci_vertices():
    t = ("e", "e", "13")
    for k in range(12):
        r1 = F(fib_shift(k - 2), fib_shift(k))
        r2 = F(fib_shift(k), fib_shift(k + 2))
        assert vertices(t, k) == ((F(1), F(0)), (r1, r1), (r2, r2))


def test_eee_digit_is_floor_formula():
    # digit = floor((1-x)/y) off ties, and the smaller k on ties
    pts = [(F(7, 10), F(1, 5)), (F(3, 5), F(1, 7)), (F(9, 10), F(1, 11))]
    for x, y in pts:
        q, r = divmod(1 - x, y)
        want = int(q) if r != 0 else int(q) - 1
        assert digit(EEE, (x, y)) == want


def test_forward_map_closed_forms():
    x, y = F(5, 7), F(2, 7)
    for k in range(5):
        assert apply_map(EEE, k, (x, y)) == (y / x, (1 - x - k * y) / x)
        t = ("23", "23", "23")
        assert apply_map(t, k, (x, y)) == (
            (x - y) / x,
            (-1 + (2 + k) * x + (-1 - k) * y) / x,
        )
        assert inverse_branch(t, k, (x, y)) == (
            1 / (1 + (1 + k) * x - y),
            (1 - x) / (1 + (1 + k) * x - y),
        )


def test_branch_matrix_eee():
    assert core.branch_matrix(EEE, 3).rows == ((1, 1, 0), (3, 0, 1), (1, 0, 0))


def test_inverse_branch_lands_in_subtriangle():
    q = (F(1, 3), F(1, 7))
    for t in (EEE, ("13", "123", "132"), ("23", "12", "e")):
        for k in (0, 1, 2, 7):
            p = inverse_branch(t, k, q)
            assert digit(t, p) == k
            assert apply_map(t, k, p) == q


def test_branch_bijection_on_subtriangle():
    for t in (EEE, ("12", "132", "e"), ("123", "13", "132")):
        for k in (0, 2, 5):
            for p in interior_rational_points(t, k, 4):
                assert digit(t, p) == k
                q = apply_map(t, k, p)
                assert 1 > q[0] > q[1] > 0 or (1, 0) != q  # stays in closure
                assert inverse_branch(t, k, q) == p


def test_jacobian_matches_difference_quotient():
    # |T'| ~ area scaling of a tiny triangle around the preimage
    t = ("12", "e", "23")
    q = (0.41, 0.17)
    k = 1
    p = inverse_branch(t, k, q)
    h = 1e-6
    tri = [p, (p[0] + h, p[1]), (p[0], p[1] + h)]
    img = [apply_map(t, k, z) for z in tri]

    def area2(a, b, c):
        return abs(
            (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        )

    jac = area2(*img) / area2(*tri)
    assert jac * jacobian_recip(t, q, k) == pytest.approx(1.0, rel=1e-4)


def test_float_and_exact_agree():
    for t in (EEE, ("13", "23", "123")):
        for k in (0, 1, 4):
            pe = interior_rational_points(t, k, 2)
            for p in pe:
                pf = (float(p[0]), float(p[1]))
                assert digit(t, pf) == digit(t, p) == k
                qe = apply_map(t, k, p)
                qf = apply_map(t, k, pf)
                assert qf[0] == pytest.approx(float(qe[0]), abs=1e-12)
                assert qf[1] == pytest.approx(float(qe[1]), abs=1e-12)
                assert jacobian_recip(t, pf, k) == pytest.approx(
                    float(jacobian_recip(t, p, k)), rel=1e-12
                )


def test_expand_terminates_on_rational_orbit():
    seq = expand(EEE, (F(7, 10), F(1, 5)), 8)
    assert seq.digits[:1] == [1]
    assert seq.terminated


def test_expand_respects_n():
    seq = expand(EEE, (0.5403023058, 0.2431693712), 12)
    assert len(seq.digits) == 12
    assert seq.digits[:6] == [1, 1, 0, 5, 19, 10]
    assert not seq.terminated


def test_expand_schedule_cycles():
    sched = [EEE, ("23", "23", "23")]
    p = (0.5403023058, 0.2431693712)
    seq = expand(sched, p, 6)
    # replay by hand
    cur = p
    for i, d in enumerate(seq.digits):
        t = sched[i % 2]
        assert digit(t, cur) == d
        cur = apply_map(t, d, cur)


def test_expand_outside_domain_raises_with_step():
    with pytest.raises(OutsideDomainError) as ei:
        expand(EEE, (F(1, 2), F(3, 4)), 3)
    assert ei.value.step == 0


def test_digit_kmax_vs_outside():
    with pytest.raises(KMaxExceeded):
        digit(EEE, (F(1, 2), F(1, 100000)), k_max=10)
    with pytest.raises(KMaxExceeded):
        digit(EEE, (0.5, 1e-8), k_max=64)
    assert digit(EEE, (F(1, 2), F(3, 4)), k_max=10) is OUTSIDE_DOMAIN


def test_digit_sequence_json_roundtrip():
    seq = DigitSequence([3, 0, 2], False)
    assert DigitSequence.from_json(seq.to_json()) == seq


def test_interior_rational_points_are_interior():
    for t in (EEE, ("132", "12", "13")):
        for k in (0, 3):
            for p in interior_rational_points(t, k, 6):
                assert all(c > 0 for c in barycentric(t, k, p))


def test_all_triples_have_digits_on_coarse_grid():
    pts = core.interior_grid(4)
    for t in TRIPLES:
        for p in pts:
            d = digit(t, p, k_max=64)
            assert isinstance(d, int)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=0, max_value=5),
    st.integers(min_value=0, max_value=215),
    st.fractions(min_value=F(1, 100), max_value=F(99, 100)),
    st.fractions(min_value=F(1, 100), max_value=F(99, 100)),
)
def test_roundtrip_property(k, ti, a, b):
    t = TRIPLES[ti]
    # a point strictly inside the domain, then its digit-k preimage
    x = F(1, 100) + a * F(98, 100)
    y = x * b
    q = (x, y)
    p = inverse_branch(t, k, q)
    assert apply_map(t, k, p) == q
    lam = barycentric(t, k, p)
    assert all(c >= 0 for c in lam)
    d = digit(t, p, k_max=max(8, k + 1))
    assert d == k or (d < k and min(barycentric(t, d, p)) == 0)
