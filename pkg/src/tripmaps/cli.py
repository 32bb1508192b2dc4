"""Command-line surface binding the library modules.

Subcommands:

  classify     behavior and Jordan class, one row per triple
  expand       digit expansion of a point (JSON)
  subtriangle  vertices of one digit cell, exact rationals
  transfer     eval | check-eigen | check-banach
  hilbert      verify (three-route agreement for the weighted transform)
  gk           pk | orbit | compare (digit statistics)
  tables       export (bundled data files, canonical text)

Conventions: floats print with 10 significant digits, exact rationals as
num/den, CSV with a header row.  Exit code 0 on success and on checks
that pass, 1 on domain errors (unknown triple, missing table row,
terminated orbit) and on checks that fail, 2 on usage errors.  The
TRIP_TABLES_DIR environment variable overrides the bundled table path.
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import core
from . import gauss_kuzmin
from . import hilbert_rep
from . import spectral
from . import tables
from . import transfer
from .quadrature import QuadratureFailure


def _fmt(x):
    return "%.10g" % x


def _parse_k_list(text):
    """A digit index or an inclusive range, "3" or "0..5"."""
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
        if lo < 0 or hi < lo:
            raise ValueError("bad digit range %r" % text)
        return list(range(lo, hi + 1))
    k = int(text)
    if k < 0:
        raise ValueError("digit index must be >= 0")
    return [k]


def _csv_writer():
    return csv.writer(sys.stdout, lineterminator="\n")


# ---------------------------------------------------------------------------
# classify


def _cmd_classify(args):
    rows = spectral.classification_rows()
    if args.triple is not None:
        t = core.parse_triple(args.triple)
        rows = [r for r in rows if r[0] == t]
    if args.format == "json":
        payload = {
            "census": {
                spectral.POLYNOMIAL: sum(
                    1 for r in rows if r[1] == spectral.POLYNOMIAL
                ),
                spectral.NONPOLYNOMIAL: sum(
                    1 for r in rows if r[1] == spectral.NONPOLYNOMIAL
                ),
            },
            "rows": [
                {
                    "triple": core.format_triple(r[0]),
                    "behavior": r[1],
                    "jordan_class": r[2],
                    "char_poly": r[3],
                }
                for r in rows
            ],
        }
        print(json.dumps(payload, indent=1))
    else:
        w = _csv_writer()
        w.writerow(["triple", "behavior", "jordan_class", "char_poly"])
        for t, behavior, jclass, char in rows:
            w.writerow([core.format_triple(t), behavior, jclass, char])
    return 0


# ---------------------------------------------------------------------------
# expand / subtriangle


def _cmd_expand(args):
    if args.schedule is not None:
        sched = core.parse_schedule(args.schedule)
        if not sched:
            raise ValueError("empty schedule")
    else:
        sched = [core.parse_triple(args.triple)]
    p = core.parse_point(args.point)
    seq = core.expand(sched, p, args.steps)
    print(seq.to_json())
    return 0


def _cmd_subtriangle(args):
    t = core.parse_triple(args.triple)
    if args.k < 0:
        raise ValueError("digit index must be >= 0")
    for v in core.vertices(t, args.k):
        print(core.format_point(v))
    return 0


# ---------------------------------------------------------------------------
# transfer


def _profile_function(triple, name):
    if name == "one":
        return lambda p: 1.0
    if name == "xy":
        return lambda p: p[0] * p[1]
    h = transfer.eigenfunction(triple)
    if h is None:
        raise ValueError(
            "no tabulated eigenfunction for %s; use --f one or --f xy"
            % core.format_triple(triple)
        )
    return lambda p: h.eval_float(x=p[0], y=p[1])


def _cmd_transfer_eval(args):
    t = core.parse_triple(args.triple)
    name = args.f
    if name == "auto":
        name = "eigen" if transfer.eigenfunction(t) is not None else "one"
    f = _profile_function(t, name)
    if args.kmax is None:
        b = transfer.branch_system(t)
    else:
        b = transfer.branch_system(t, k_max=args.kmax)
    w = _csv_writer()
    w.writerow(["x", "y", "Lf", "tail_bound"])
    for x, y in core.interior_grid(args.grid):
        val, bound = transfer.transfer_apply(b, f, (x, y), tol=args.tol)
        w.writerow([_fmt(x), _fmt(y), _fmt(val),
                    "" if bound is None else _fmt(bound)])
    return 0


def _cmd_transfer_check_eigen(args):
    t = core.parse_triple(args.triple)
    worst = transfer.check_eigen(
        t, grid_n=args.grid, tol=args.tol, k_cap=args.kmax
    )
    ok = worst <= args.tol
    print(
        "triple=%s grid=%d max_rel_residual=%s tol=%s verdict=%s"
        % (
            core.format_triple(t),
            args.grid,
            _fmt(worst),
            _fmt(args.tol),
            "pass" if ok else "fail",
        )
    )
    return 0 if ok else 1


def _cmd_transfer_check_banach(args):
    t = core.parse_triple(args.triple)
    kmax = 10000 if args.kmax is None else args.kmax
    sup = transfer.check_banach_bound(
        t, grid_n=args.grid, k_cap=kmax, ceiling=args.tol
    )
    print(
        "triple=%s grid=%d k_cap=%d sup_partial_sum=%s verdict=bounded"
        % (core.format_triple(t), args.grid, kmax, _fmt(sup))
    )
    return 0


# ---------------------------------------------------------------------------
# hilbert


def _cmd_hilbert_verify(args):
    t = core.parse_triple(args.triple)
    q = core.parse_point(args.point)
    phi = hilbert_rep.PHI_CHOICES[args.phi]
    report = hilbert_rep.representation_report(
        t, phi, q, tol=args.tol, reading=args.reading
    )
    ok = (
        report.residual_integral <= args.tol
        and report.residual_series <= args.tol
    )
    print(
        "triple=%s phi=%s point=%s reading=%s"
        % (core.format_triple(t), args.phi, args.point, args.reading)
    )
    print(
        "operator=%s integral=%s series=%s series_terms=%d"
        % (
            _fmt(report.operator_route),
            _fmt(report.integral_route),
            _fmt(report.series_route),
            report.series_terms,
        )
    )
    print(
        "residual_integral=%s residual_series=%s tol=%s verdict=%s"
        % (
            _fmt(report.residual_integral),
            _fmt(report.residual_series),
            _fmt(args.tol),
            "pass" if ok else "fail",
        )
    )
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# gk


def _replica_lengths(n, jobs):
    base, extra = divmod(n, jobs)
    return [base + (1 if i < extra else 0) for i in range(jobs)]


def _merged_orbit(triple, args):
    """One orbit, or --jobs independent replicas merged together.

    Replicas draw their starts from seeds seed, seed+1, ...; the merged
    frequencies depend on the number of jobs, but are deterministic given
    (seed, jobs).
    """
    if args.jobs <= 1:
        start = "random" if args.start is None else core.parse_point(args.start)
        return gauss_kuzmin.orbit_frequencies(
            triple,
            start=start,
            n=args.iters,
            burn_in=args.burn_in,
            seed=args.seed,
        )
    lengths = _replica_lengths(args.iters, args.jobs)
    seeds = [args.seed + i for i in range(args.jobs)]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        records = list(
            pool.map(
                _orbit_replica,
                [(triple, n_i, args.burn_in, s) for n_i, s in zip(lengths, seeds)],
            )
        )
    merged = records[0]
    for rec in records[1:]:
        merged = merged.merge(rec)
    return merged


def _orbit_replica(job):
    triple, n, burn_in, seed = job
    return gauss_kuzmin.orbit_frequencies(
        triple, start="random", n=n, burn_in=burn_in, seed=seed
    )


def _cmd_gk_pk(args):
    t = core.parse_triple(args.triple)
    ks = _parse_k_list(args.k)
    values = [
        gauss_kuzmin.pk_integral(t, k, quad_tol=args.quad_tol) for k in ks
    ]
    if len(ks) == 1 and ".." not in args.k:
        print(_fmt(values[0]))
        return 0
    w = _csv_writer()
    w.writerow(["k", "p_integral"])
    for k, p in zip(ks, values):
        w.writerow([k, _fmt(p)])
    return 0


def _cmd_gk_orbit(args):
    t = core.parse_triple(args.triple)
    rec = _merged_orbit(t, args)
    w = _csv_writer()
    w.writerow(["k", "count", "frequency"])
    for k in sorted(rec.counts):
        w.writerow([k, rec.counts[k], _fmt(rec.frequency(k))])
    return 0


def _cmd_gk_compare(args):
    t = core.parse_triple(args.triple)
    ks = _parse_k_list(args.k)
    rec = _merged_orbit(t, args)
    rows = gauss_kuzmin.compare(t, ks, quad_tol=args.quad_tol, record=rec)
    w = _csv_writer()
    w.writerow(["k", "p_integral", "p_orbit", "abs_diff", "pass"])
    all_pass = True
    for row in rows:
        w.writerow(
            [
                row.k,
                _fmt(row.p_integral),
                _fmt(row.p_orbit),
                _fmt(row.abs_diff),
                "true" if row.passed else "false",
            ]
        )
        all_pass = all_pass and row.passed
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# tables


_TABLE_FLAG_NAMES = {
    "appendix-a": "appendix_a",
    "appendix-b": "appendix_b",
    "banach": "banach",
    "densities": "densities",
    "eigenfunctions": "eigenfunctions",
    "ljh": "ljh",
}


def _cmd_tables_export(args):
    sys.stdout.write(tables.export_text(_TABLE_FLAG_NAMES[args.which]))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_triple(p, required=True):
    p.add_argument(
        "--triple",
        required=required,
        metavar="S,T0,T1",
        help="permutation triple, e.g. e,e,e or e,23,e",
    )


def _add_orbit_flags(p):
    p.add_argument("--iters", type=int, default=10**5,
                   help="orbit length after burn-in")
    p.add_argument("--burn-in", type=int, default=1000, help="steps discarded")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the random start")
    p.add_argument("--start", default=None, metavar="X,Y",
                   help="fixed start point instead of a seeded random one")
    p.add_argument("--jobs", type=int, default=1,
                   help="independent orbit replicas run in parallel and "
                        "merged; replica i uses seed+i")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tripmaps",
        description=__doc__.split("\n\n")[0],
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="behavior census or one triple's row")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true",
                       help="all triples (the default)")
    group.add_argument("--triple", default=None, metavar="S,T0,T1",
                       help="restrict to one triple")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("expand", help="digit expansion of a point")
    _add_triple(p)
    p.add_argument("--point", required=True, metavar="X,Y",
                   help="num/den,num/den (exact) or decimals (float)")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--schedule", default=None, metavar="T1;T2;...",
                   help="cycle these triples instead of --triple")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("subtriangle", help="vertices of digit cell k")
    _add_triple(p)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_subtriangle)

    p = sub.add_parser("transfer", help="operator evaluation and checks")
    tsub = p.add_subparsers(dest="transfer_command", required=True)

    q = tsub.add_parser("eval", help="tabulate (L f)(x,y) over a grid")
    _add_triple(q)
    q.add_argument("--tol", type=float, default=1e-9,
                   help="certified truncation error per point")
    q.add_argument("--grid", type=int, default=3, help="interior grid size")
    q.add_argument("--kmax", type=int, default=None,
                   help="cap on the branch index")
    q.add_argument("--f", choices=("auto", "eigen", "one", "xy"),
                   default="auto",
                   help="test function (auto: eigenfunction when tabulated)")
    q.set_defaults(func=_cmd_transfer_eval)

    q = tsub.add_parser("check-eigen",
                        help="eigenfunction residual on a grid")
    _add_triple(q)
    q.add_argument("--tol", type=float, default=1e-6,
                   help="residual bound for a pass")
    q.add_argument("--grid", type=int, default=15)
    q.add_argument("--kmax", type=int, default=None)
    q.set_defaults(func=_cmd_transfer_check_eigen)

    q = tsub.add_parser("check-banach",
                        help="uniform bound on weight partial sums")
    _add_triple(q)
    q.add_argument("--tol", type=float, default=1e3,
                   help="ceiling above which growth is investigated")
    q.add_argument("--grid", type=int, default=15)
    q.add_argument("--kmax", type=int, default=None,
                   help="partial-sum cap (default 10000)")
    q.set_defaults(func=_cmd_transfer_check_banach)

    p = sub.add_parser("hilbert", help="weighted-transform identities")
    hsub = p.add_subparsers(dest="hilbert_command", required=True)
    q = hsub.add_parser("verify",
                        help="operator vs integral vs series at a point")
    _add_triple(q)
    q.add_argument("--phi", choices=sorted(hilbert_rep.PHI_CHOICES),
                   default="exp")
    q.add_argument("--tol", type=float, default=1e-4)
    q.add_argument("--point", default="1/2,1/4", metavar="X,Y")
    q.add_argument("--reading", choices=("adjudicated", "displayed"),
                   default="adjudicated",
                   help="prefactor convention for the integral route")
    q.set_defaults(func=_cmd_hilbert_verify)

    p = sub.add_parser("gk", help="digit statistics")
    gsub = p.add_subparsers(dest="gk_command", required=True)

    q = gsub.add_parser("pk", help="cell probability from the density")
    _add_triple(q)
    q.add_argument("--k", required=True, metavar="K or K0..K1",
                   help="digit index or inclusive range")
    q.add_argument("--quad-tol", type=float, default=1e-9)
    q.set_defaults(func=_cmd_gk_pk)

    q = gsub.add_parser("orbit", help="digit frequencies along an orbit")
    _add_triple(q)
    _add_orbit_flags(q)
    q.set_defaults(func=_cmd_gk_orbit)

    q = gsub.add_parser("compare", help="orbit vs integral table")
    _add_triple(q)
    q.add_argument("--k", default="0..5", metavar="K or K0..K1")
    q.add_argument("--quad-tol", type=float, default=1e-9)
    _add_orbit_flags(q)
    q.set_defaults(func=_cmd_gk_compare)

    p = sub.add_parser("tables", help="bundled data files")
    xsub = p.add_subparsers(dest="tables_command", required=True)
    q = xsub.add_parser("export", help="canonical text of one table")
    q.add_argument("--which", required=True,
                   choices=sorted(_TABLE_FLAG_NAMES))
    q.set_defaults(func=_cmd_tables_export)

    return parser


_DOMAIN_ERRORS = (
    ValueError,
    KeyError,
    core.DegenerateVertex,
    core.ZeroDenominator,
    core.KMaxExceeded,
    core.OutsideDomainError,
    tables.DataFileMissing,
    hilbert_rep.RowMissing,
    transfer.NoConvergence,
    transfer.DivergenceSuspected,
    gauss_kuzmin.OrbitTerminated,
    QuadratureFailure,
)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) > 1 and getattr(args, "start", None):
        parser.error("--jobs > 1 needs random starts; drop --start")
    if getattr(args, "iters", 1) < 1 or getattr(args, "burn_in", 0) < 0:
        parser.error("need --iters >= 1 and --burn-in >= 0")
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
