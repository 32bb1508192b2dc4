"""Transfer-operator evaluation against independent oracles.

Three kinds of ground truth anchor these tests: closed-form sums through
scipy's Hurwitz zeta, the exact fixed-point identity L h = h for the
tabulated eigenfunctions, and brute-force long sums accumulated with
math.fsum (naive float accumulation over 10^6 terms drifts by ~1e-11,
which would drown the certified bounds under test).
"""

import math
from fractions import Fraction

import pytest
import scipy.special as sp

from tripmaps import core, spectral, tables, transfer
from tripmaps.expressions import eval_exact, parse

POLY = tuple(t for t in core.TRIPLES if spectral.is_polynomial(t))
NONPOLY = tuple(t for t in core.TRIPLES if not spectral.is_polynomial(t))

EIGEN_TRIPLES = (
    ("e", "e", "e"), ("e", "23", "e"), ("e", "132", "e"),
    ("12", "12", "12"), ("12", "13", "12"), ("12", "123", "12"),
    ("13", "13", "13"), ("13", "23", "13"), ("13", "132", "13"),
    ("23", "e", "23"), ("23", "12", "23"), ("23", "23", "23"),
    ("123", "13", "132"), ("123", "123", "132"), ("123", "132", "132"),
    ("132", "e", "123"), ("132", "12", "123"), ("132", "123", "123"),
)

WORKED_SUM = 0.944816206566909  # 8 * zeta(3, 5/2), the k-sum of 64/(5+2k)^3


def interior_points(count, salt=0):
    pts = []
    for i in range(count):
        x = Fraction(3 + (i * 13 + salt * 7) % 93, 101)
        y = x * Fraction(1 + (i * 11 + salt * 3) % 89, 97)
        pts.append((x, y))
    return pts


def eigen_float(triple):
    h = transfer.eigenfunction(triple)
    return lambda p: h.eval_float(x=p[0], y=p[1])


def assert_same_form(form, expected_text, ks=(0, 2, 5)):
    want = parse(expected_text)
    for q in interior_points(3, salt=1):
        for k in ks:
            assert eval_exact(form.ast, x=q[0], y=q[1], k=k) == eval_exact(
                want, x=q[0], y=q[1], k=k), (expected_text, q, k)


class TestBranchSystem:
    def test_default_policy_follows_behavior(self):
        assert transfer.branch_system(
            ("e", "e", "e")).tail_policy == transfer.ANALYTIC_CUBIC
        assert transfer.branch_system(
            ("e", "e", "13")).tail_policy == transfer.GEOMETRIC_RATIO
        b = transfer.branch_system(("e", "e", "e"), tail_policy=transfer.FIXED)
        assert b.tail_policy == transfer.FIXED

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            transfer.branch_system(("e", "e", "e"), tail_policy="Sloppy")

    def test_matches_matrix_route_exactly(self):
        triples = (POLY[0], POLY[37], POLY[-1], NONPOLY[0], NONPOLY[-1])
        for t in triples:
            b = transfer.branch_system(t)
            ks = (0, 1, 2, 7, 40) if spectral.is_polynomial(t) else (0, 1, 5)
            for q in interior_points(2):
                for k in ks:
                    assert b.branch(k, q) == core.inverse_branch(t, k, q)
                    assert b.weight(k, q) == abs(core.jacobian_recip(t, q, k))

    def test_model_rows_exact_far_out(self):
        for t in (POLY[0], POLY[51], POLY[-1]):
            model = transfer._ParityLinearModel(t)
            for k in (0, 1, 2, 3, 17, 64, 119, 120):
                assert model._exact_rows(k) == core.branch_matrix(t, k).rows

    def test_model_rejects_nonpolynomial(self):
        with pytest.raises(ValueError):
            transfer._ParityLinearModel(("e", "e", "13"))

    def test_branch_matrices_unimodular(self):
        # the vectorized tail recovers denominators as weight^(-1/3),
        # which needs |det| == 1 across the whole polynomial family
        for t in POLY:
            assert transfer._ParityLinearModel(t).detm == 1

    def test_branch_lands_in_subtriangle(self):
        q = (0.47, 0.2)
        for t in (POLY[0], POLY[20], POLY[-1]):
            b = transfer.branch_system(t)
            for k in (0, 1, 5, 11):
                lam = core.barycentric(t, k, b.branch(k, q))
                assert min(lam) >= -1e-9, (t, k)

    def test_float_route_matches_exact(self):
        t = POLY[10]
        b = transfer.branch_system(t)
        for qx in interior_points(2, salt=3):
            qf = (float(qx[0]), float(qx[1]))
            for k in (0, 3, 10):
                ex = b.branch(k, qx)
                fl = b.branch(k, qf)
                assert abs(fl[0] - float(ex[0])) <= 1e-12
                assert abs(fl[1] - float(ex[1])) <= 1e-12
                assert abs(b.weight(k, qf) - float(b.weight(k, qx))) <= (
                    1e-12 * float(b.weight(k, qx)))


class TestHurwitzSeries:
    def test_against_scipy(self):
        for m in (2, 3, 4):
            for z in (4.0, 4.5, 5.0, 6.0, 8.0, 12.0, 20.0, 39.0, 40.0,
                      80.0, 1000.0):
                got = transfer._hurwitz(m, z)
                ref = sp.zeta(m, z)
                floor = 1e-9 if z >= 40 else 10.0 / z**6
                assert abs(got - ref) / ref < floor / 5, (m, z)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            transfer._hurwitz(5, 100.0)
        with pytest.raises(ValueError):
            transfer._hurwitz(1, 100.0)


class TestTransferApply:
    def test_worked_example(self):
        # at q = (1/2, 1/4) every weight is 64/(5+2k)^3 and f = 1 sums them
        b = transfer.branch_system(("e", "e", "e"))
        val, err = transfer.transfer_apply(b, lambda p: 1.0, (0.5, 0.25))
        assert err <= 1e-9
        assert abs(val - 8 * sp.zeta(3, 2.5)) <= err
        assert abs(val - WORKED_SUM) < 5e-12

    def test_zero_function(self):
        b = transfer.branch_system(("e", "e", "e"))
        val, err = transfer.transfer_apply(b, lambda p: 0.0, (0.5, 0.25))
        assert val == 0.0
        assert err == 0.0

    def test_eigenfunction_fixed_point_all_rows(self):
        # L h = h exactly, so the certified value must land within its own
        # reported bound of h(q); this exercises the tail fit in the regime
        # where the summed terms decay like 1/d^2, not 1/d^3
        for t in EIGEN_TRIPLES:
            b = transfer.branch_system(t)
            hf = eigen_float(t)
            for q in ((0.5, 0.25), (0.72, 0.31)):
                val, err = transfer.transfer_apply(b, hf, q)
                assert err <= 1e-9, (t, q)
                assert abs(val - hf(q)) <= err + 1e-12 * abs(hf(q)), (t, q)

    def test_geometric_policy_honest(self):
        # weights decay geometrically, so a 200-term fsum is exact to
        # double precision and serves as ground truth
        for t in (NONPOLY[0], NONPOLY[17]):
            b = transfer.branch_system(t)
            for q in ((0.55, 0.2), (0.3, 0.12)):
                for f in (lambda p: 1.0, lambda p: p[0] * p[1]):
                    val, err = transfer.transfer_apply(b, f, q)
                    brute = math.fsum(
                        abs(core.jacobian_recip(t, q, k))
                        * f(core.inverse_branch(t, k, q))
                        for k in range(200))
                    assert err <= 1e-9
                    assert abs(val - brute) <= err, (t, q)

    def test_fixed_policy_sums_exactly(self):
        t = ("e", "e", "e")
        b = transfer.branch_system(t, k_max=40, tail_policy=transfer.FIXED)
        q = (Fraction(1, 2), Fraction(1, 4))
        f = lambda p: p[0] + p[1] ** 2
        total, bound = transfer.transfer_apply(b, f, q)
        manual = sum(
            abs(core.jacobian_recip(t, q, k)) * f(core.inverse_branch(t, k, q))
            for k in range(41))
        assert isinstance(total, Fraction)
        assert total == manual
        assert bound > 0

    def test_fixed_tail_estimate_covers_dropped_mass(self):
        t = ("e", "e", "e")
        b = transfer.branch_system(t, k_max=40, tail_policy=transfer.FIXED)
        q = (Fraction(1, 2), Fraction(1, 4))
        total, bound = transfer.transfer_apply(b, lambda p: Fraction(1), q)
        dropped = 8 * sp.zeta(3, 2.5) - float(total)
        assert 0 < dropped <= bound <= 4 * dropped

    def test_no_convergence_raises(self):
        b = transfer.branch_system(("e", "e", "e"), k_max=64)
        with pytest.raises(transfer.NoConvergence):
            transfer.transfer_apply(b, lambda p: 1.0, (0.5, 0.25), tol=1e-16)

    def test_tolerances_consistent(self):
        b = transfer.branch_system(("12", "13", "12"))
        f = lambda p: p[0] * p[1]
        q = (0.41, 0.17)
        v1, e1 = transfer.transfer_apply(b, f, q, tol=1e-6)
        v2, e2 = transfer.transfer_apply(b, f, q, tol=1e-12)
        assert e1 <= 1e-6 and e2 <= 1e-12
        assert abs(v1 - v2) <= e1 + e2


class TestAccessors:
    def test_eigenfunction_examples(self):
        assert_same_form(transfer.eigenfunction(("e", "23", "e")),
                         "1/(x*(1-y))", ks=(0,))
        assert_same_form(transfer.eigenfunction(("13", "13", "13")),
                         "1/((x-2)*(1-y))", ks=(0,))
        assert transfer.eigenfunction(("e", "e", "13")) is None

    def test_banach_examples(self):
        assert transfer.banach_weight(("e", "e", "e")).text == "x"
        assert_same_form(transfer.summand_form(("e", "e", "e")),
                         "x/(k*x+y+1)^2")
        assert_same_form(transfer.summand_form(("23", "23", "23")),
                         "x/(k*x+x-y+1)^2")
        assert transfer.banach_weight(("e", "e", "13")) is None
        assert transfer.summand_form(("e", "e", "13")) is None

    def test_appendix_b_examples(self):
        form = transfer.appendix_b_form(("e", "e", "e"))
        assert_same_form(form.weight, "1/(k*x+y+1)^3")
        assert_same_form(form.branch_x, "1/(k*x+y+1)")
        assert_same_form(form.branch_y, "x/(k*x+y+1)")
        form = transfer.appendix_b_form(("23", "23", "23"))
        assert_same_form(form.weight, "1/(k*x+x-y+1)^3")
        assert_same_form(form.branch_x, "1/(k*x+x-y+1)")
        assert_same_form(form.branch_y, "(1-x)/(k*x+x-y+1)")

    def test_appendix_b_presence_matches_behavior(self):
        for t in core.TRIPLES:
            present = transfer.appendix_b_form(t) is not None
            assert present == spectral.is_polynomial(t), t

    def test_missing_table_dir_raises(self, monkeypatch, tmp_path):
        monkeypatch.setenv("TRIP_TABLES_DIR", str(tmp_path))
        with pytest.raises(tables.DataFileMissing):
            transfer.appendix_b_form(("e", "e", "e"))
        with pytest.raises(tables.DataFileMissing):
            transfer.eigenfunction(("e", "e", "e"))


class TestGenericVsTable:
    """The fast branch-system closures against the tabulated closed forms,
    term by term; any disagreement in either route shows up here."""

    def test_termwise_exact(self):
        table = tables.load_table("appendix_b")
        pts = interior_points(2, salt=9)
        for t, row in table.items():
            b = transfer.branch_system(t)
            for q in pts:
                x, y = q
                for k in range(51):
                    w = eval_exact(row["weight"].ast, x=x, y=y, k=k)
                    assert b.weight(k, q) == abs(w), (t, k)
                    bx = eval_exact(row["branch_x"].ast, x=x, y=y, k=k)
                    by = eval_exact(row["branch_y"].ast, x=x, y=y, k=k)
                    assert b.branch(k, q) == (bx, by), (t, k)

    def test_termwise_float(self):
        table = tables.load_table("appendix_b")
        pts = [(float(x), float(y)) for x, y in interior_points(10, salt=4)]
        for t, row in table.items():
            b = transfer.branch_system(t)
            for q in pts:
                x, y = q
                for k in (0, 1, 2, 3, 5, 9, 17, 33, 50):
                    w = abs(row["weight"].eval_float(x=x, y=y, k=k))
                    assert abs(b.weight(k, q) - w) <= 1e-12 * w, (t, k)
                    bx = row["branch_x"].eval_float(x=x, y=y, k=k)
                    by = row["branch_y"].eval_float(x=x, y=y, k=k)
                    gx, gy = b.branch(k, q)
                    assert abs(gx - bx) <= 1e-12 and abs(gy - by) <= 1e-12

    def test_truncated_sums_match(self):
        table = tables.load_table("appendix_b")
        fs = (lambda p: Fraction(1), lambda p: p[0] * p[1])
        for t in (("e", "e", "e"), ("23", "23", "23"), POLY[13], POLY[77]):
            row = table[t]
            b = transfer.branch_system(t, k_max=50, tail_policy=transfer.FIXED)
            for q in interior_points(10, salt=2):
                x, y = q
                for f in fs:
                    total, _ = transfer.transfer_apply(b, f, q)
                    want = sum(
                        abs(eval_exact(row["weight"].ast, x=x, y=y, k=k)) * f(
                            (eval_exact(row["branch_x"].ast, x=x, y=y, k=k),
                             eval_exact(row["branch_y"].ast, x=x, y=y, k=k)))
                        for k in range(51))
                    assert total == want, (t, q)


class TestCheckEigen:
    def test_all_rows_within_tolerance(self):
        for t in EIGEN_TRIPLES:
            resid = transfer.check_eigen(t, grid_n=15, tol=1e-6)
            assert resid <= 1e-6, (t, resid)

    def test_negative_control_fails_loudly(self):
        for t in (("e", "e", "e"), ("13", "13", "13")):
            resid = transfer.check_eigen(t, grid_n=7, perturb=0.1)
            assert resid > 1e-3, (t, resid)

    def test_requires_eigenfunction(self):
        with pytest.raises(ValueError):
            transfer.check_eigen(("e", "e", "13"))


class TestBanachBounds:
    def test_all_rows_bounded(self):
        banach = tables.load_table("banach")
        assert len(banach) == 31
        for t in banach:
            sup = transfer.check_banach_bound(t, grid_n=15, k_cap=10000)
            assert sup <= 10.0, (t, sup)

    def test_no_grid_outliers_early(self):
        # by digit 100 no grid point may run 10x past the grid median;
        # a wrong summand blows up near a vertex long before k_cap
        for t in tables.load_table("banach"):
            totals, _ = transfer.banach_partial_sums(t, grid_n=15, k_cap=100)
            med = sorted(totals)[len(totals) // 2]
            assert max(totals) <= 10.0 * med, t

    def test_partial_sums_monotone_in_cap(self):
        for t in (("e", "e", "e"), ("12", "132", "e")):
            totals, snaps = transfer.banach_partial_sums(
                t, grid_n=7, k_cap=10000, checkpoints=(100,))
            assert all(s <= tot + 1e-15
                       for s, tot in zip(snaps[100], totals))

    def test_divergent_summand_flagged(self):
        from tripmaps.expressions import ClosedForm
        with pytest.raises(transfer.DivergenceSuspected):
            transfer.check_banach_bound(
                ("e", "e", "e"), grid_n=3, k_cap=10000, ceiling=5.0,
                summand=ClosedForm("1/(k+2)"))

    def test_convergent_row_unfazed_by_low_ceiling(self):
        # exceeding the ceiling alone is not divergence; the dyadic
        # increments of a convergent row keep shrinking
        sup = transfer.check_banach_bound(
            ("e", "e", "e"), grid_n=5, k_cap=2000, ceiling=0.1)
        assert sup > 0.1

    def test_requires_summand(self):
        with pytest.raises(ValueError):
            transfer.check_banach_bound(("e", "e", "13"))


class TestPositivityMonotonicity:
    def test_order_preserved(self):
        assert transfer.check_positivity_monotonicity(
            ("e", "e", "e"), lambda p: 0.0, lambda p: 1.0, n=1)

    def test_eigen_sandwich_second_power(self):
        hf = eigen_float(("e", "e", "e"))
        assert transfer.check_positivity_monotonicity(
            ("e", "e", "e"), lambda p: -hf(p), hf, n=2)

    def test_third_power(self):
        assert transfer.check_positivity_monotonicity(
            ("e", "e", "e"), lambda p: 0.0, lambda p: 1.0, n=3, grid=2,
            k_trunc=20)

    def test_precondition_checked(self):
        with pytest.raises(ValueError):
            transfer.check_positivity_monotonicity(
                ("e", "e", "e"), lambda p: 1.0, lambda p: 0.0)

    def test_power_out_of_range(self):
        for n in (0, 4):
            with pytest.raises(ValueError):
                transfer.check_positivity_monotonicity(
                    ("e", "e", "e"), lambda p: 0.0, lambda p: 1.0, n=n)

    def test_gap_below_margin_is_inconclusive(self):
        # a 1e-14 separation cannot be certified through a k=48 truncation
        assert not transfer.check_positivity_monotonicity(
            ("e", "e", "e"), lambda p: 1.0, lambda p: 1.0 + 1e-14, n=1)


class TestMassConservation:
    """Summing |Jac| over branches is integration over the preimage, so
    the integral of L1 equals the area fraction covered by the branch
    triangles; a Monte-Carlo pairing of L1(q) against the covered-point
    indicator at shared sample points must agree within noise."""

    @pytest.mark.parametrize("triple", [("e", "e", "e"), ("e", "e", "13")])
    def test_paired_monte_carlo(self, triple):
        import random

        rng = random.Random(20260816)
        b = transfer.branch_system(triple)
        diffs = []
        for _ in range(600):
            u, v = rng.random(), rng.random()
            q = (max(u, v), min(u, v))
            l1, _ = transfer.transfer_apply(b, lambda p: 1.0, q, tol=1e-6)
            try:
                d = core.digit(triple, q)
                ind = 0.0 if d is core.OUTSIDE_DOMAIN else 1.0
            except core.KMaxExceeded:
                ind = 1.0
            diffs.append(l1 - ind)
        n = len(diffs)
        mean = sum(diffs) / n
        se = (sum((d - mean) ** 2 for d in diffs) / (n * (n - 1))) ** 0.5
        assert abs(mean) <= 3 * se, (triple, mean, se)

    def test_branch_areas_fill_domain(self):
        def area(vs):
            (x0, y0), (x1, y1), (x2, y2) = [
                (float(a), float(b)) for a, b in vs]
            return abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2

        s = sum(area(core.vertices(("e", "e", "e"), k)) for k in range(300))
        assert 0.5 - 2e-3 < s < 0.5
        s = sum(area(core.vertices(("e", "e", "13"), k)) for k in range(300))
        assert abs(s - 0.5) < 1e-9


class TestBoundedByEigenfunction:
    def test_powers_stay_under_envelope(self):
        # |f| <= B*h pointwise forces |L^n f| <= B*h, up to truncation
        for t in (("e", "e", "e"), ("23", "23", "23")):
            h = transfer.eigenfunction(t)
            hf = lambda p: h.eval_float(x=p[0], y=p[1])
            f = lambda p: 0.8 * hf(p) * (p[0] - p[1])
            bee = 0.8
            b = transfer.branch_system(t, tail_policy=transfer.FIXED,
                                       k_max=24)
            for q in ((0.52, 0.21), (0.8, 0.64)):
                for n in (1, 2, 3):
                    val, bound = transfer._power_sum(b, f, q, n)
                    assert bound is not None
                    assert abs(val) <= bee * hf(q) + n * bound + 1e-12, (t, n)
