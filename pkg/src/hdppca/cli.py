"""Command-line surface: estimate variances, select ranks, test fit, simulate.

Exit codes: 0 success, 2 input problems, 3 numeric/solver failures,
4 regime violations (tests that need p < n). Set --json for machine output;
the schema is versioned with a "schema" field.
"""

import argparse
import json
import os
import sys

from . import gof, mp, rank, simlab, variance
from .data import load_csv, spectrum
from .errors import HdppcaError, InputError, NumericError, RegimeError

SEED_ENV_VAR = "HDPPCA_SEED"

_EXIT_INPUT = 2
_EXIT_NUMERIC = 3
_EXIT_REGIME = 4


def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV_VAR, "0"))
    except ValueError:
        return 0


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        payload = {"schema": simlab.SCHEMA_VERSION, **payload}
        print(json.dumps(payload, indent=1))
        return
    for key, value in payload.items():
        if isinstance(value, dict):
            print(f"{key}:")
            for k, v in value.items():
                print(f"  {k:<18} {v}")
        else:
            print(f"{key:<20} {value}")


def _cmd_estimate(args) -> int:
    data = load_csv(args.input)
    spec = spectrum(data)
    methods = ("mle", "star", "kn", "us", "median") if args.method == "all" else (args.method,)
    results = {}
    for method in methods:
        if method == "mle":
            est = variance.mle_sigma2(spec, args.m)
        elif method == "star":
            est = variance.star_sigma2(spec, args.m)
        elif method == "kn":
            est = variance.kn_sigma2(spec, args.m)
        elif method == "us":
            est = variance.us_sigma2(spec, args.m)
        else:
            est = variance.median_sigma2(data)
        entry = {"value": est.value}
        if est.se is not None:
            entry["se"] = est.se
        results[method] = entry
    _emit({"p": spec.p, "n": spec.n, "c_n": spec.c_n, "m": args.m,
           "estimates": results}, args.json)
    return 0


def _cmd_rank(args) -> int:
    data = load_csv(args.input)
    payload = {"m_max": args.m_max, "criterion": args.criterion}
    if args.criterion in ("sure", "sure_star"):
        spec = spectrum(data)
        variant = "star" if args.criterion == "sure_star" else "us"
        if args.m_max >= min(spec.p, spec.n - 1):
            raise InputError(
                f"m-max must be below min(p, n-1) = {min(spec.p, spec.n - 1)}"
            )
        report = rank.sure(spec, args.m_max, variant=variant)
        payload["selected_m"] = report.selected_m
        payload["values"] = {int(m): float(v)
                             for m, v in zip(report.m_grid, report.values)}
        if report.selected_m == args.m_max:
            print("warning: selection hit m-max; consider a larger bound",
                  file=sys.stderr)
    else:
        family = "pcp" if args.criterion.startswith("pcp") else "icp"
        variant = "star" if args.criterion.endswith("_star") else "plain"
        reports = rank.bai_ng(data, m_max=args.m_max, family=family, variant=variant)
        payload["selected_m"] = {name: rep.selected_m for name, rep in reports.items()}
        payload["values"] = {
            name: {int(m): float(v) for m, v in zip(rep.m_grid, rep.values)}
            for name, rep in reports.items()
        }
        if any(rep.selected_m == args.m_max for rep in reports.values()):
            print("warning: selection hit m-max; consider a larger bound",
                  file=sys.stderr)
    _emit(payload, args.json)
    return 0


def _cmd_gof(args) -> int:
    data = load_csv(args.input)
    spec = spectrum(data)
    report = gof.clrt(spec, args.m, alpha_level=args.level)
    payload = {
        "p": spec.p,
        "n": spec.n,
        "m": args.m,
        "l_star": report.l_star,
        "delta_n": report.delta_n,
        "p_value": report.p_value_clrt,
        "decision": "reject" if report.reject else "accept",
        "level": args.level,
    }
    if args.classical:
        payload["bartlett"] = {
            "statistic": report.t_bartlett,
            "df": report.df,
            "p_value": report.p_value_lrt,
        }
    _emit(payload, args.json)
    return 0


def _simulate_design(args):
    if args.table in ("bias", "stats", "mse", "clrt"):
        model = args.model if args.model is not None else 1
        default_pn = {1: (100, 100), 2: (20, 100), 3: (150, 100), 4: (50, 500)}
        if args.table == "clrt":
            default_pn[1] = (90, 100)  # the c < 1 variant of the first design
        p0, n0 = default_pn[model]
        p = args.p if args.p is not None else p0
        n = args.n if args.n is not None else n0
        return simlab.model_spec(model, p, n)
    if args.table == "sure":
        m = args.m if args.m is not None else 5
        p = args.p if args.p is not None else 64
        n = args.n if args.n is not None else 96
        return simlab.sure_design(m, p, n)
    m = args.m if args.m is not None else 1
    theta = args.theta if args.theta is not None else float(m)
    n_series = args.N if args.N is not None else 100
    n_periods = args.T if args.T is not None else 60
    return simlab.FactorDesign(m=m, theta=theta, n_series=n_series,
                               n_periods=n_periods)


_TABLE_IDS = {
    "bias": "bias", "stats": "estimator_stats", "mse": "mse_ratios",
    "sure": "sure", "pcp": "pcp", "clrt": "clrt_size",
}


def _cmd_simulate(args) -> int:
    design = _simulate_design(args)
    config = simlab.SimConfig(design=design, reps=args.reps, seed=args.seed,
                              parallelism=args.threads)
    report = simlab.run_table(_TABLE_IDS[args.table], config,
                              m_max=args.m_max, level=args.level)
    if args.out:
        try:
            os.makedirs(args.out, exist_ok=True)
            base = os.path.join(args.out, f"{report.table}")
            simlab.write_records_csv(report, base + "_records.csv")
            simlab.write_aggregate_csv(report, base + "_aggregate.csv")
            simlab.write_json(report, base + ".json")
        except OSError as exc:
            raise InputError(f"cannot write output files: {exc}") from exc
    payload = {
        "table": report.table,
        "design": report.design_label,
        "reps": report.reps,
        "seed": report.seed,
        "aggregates": report.aggregates,
    }
    if report.diagnostics:
        payload["diagnostics"] = report.diagnostics
    _emit(payload, args.json)
    return 0


def _cmd_mp(args) -> int:
    law = mp.MpLaw(args.c, args.sigma2)
    a, b = mp.support_edges(law)
    payload = {
        "c": args.c,
        "sigma2": args.sigma2,
        "support": [a, b],
        "atom_at_zero": mp.atom_at_zero(law),
        "median": mp.median(law),
    }
    if args.c < 1:
        payload["log_moment"] = mp.log_moment(args.c)
    if args.x is not None:
        payload["density_at_x"] = mp.density(law, args.x)
        payload["cdf_at_x"] = mp.cdf(law, args.x)
    if args.quantile is not None:
        payload["quantile"] = mp.quantile(law, args.quantile)
    _emit(payload, args.json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdppca",
        description="Noise-variance estimation, PC-count selection and "
                    "goodness-of-fit for high-dimensional PCA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate the noise variance from a CSV")
    est.add_argument("--input", required=True, help="CSV, one observation per row")
    est.add_argument("--m", type=int, required=True, help="assumed spike count")
    est.add_argument("--method", default="all",
                     choices=["all", "mle", "star", "kn", "us", "median"])
    est.add_argument("--json", action="store_true")
    est.set_defaults(func=_cmd_estimate)

    rnk = sub.add_parser("rank", help="select the number of principal components")
    rnk.add_argument("--input", required=True)
    rnk.add_argument("--m-max", type=int, required=True, dest="m_max")
    rnk.add_argument("--criterion", required=True,
                     choices=["sure_star", "sure", "pcp", "pcp_star", "icp", "icp_star"])
    rnk.add_argument("--json", action="store_true")
    rnk.set_defaults(func=_cmd_rank)

    gf = sub.add_parser("gof", help="goodness-of-fit test for m principal components")
    gf.add_argument("--input", required=True)
    gf.add_argument("--m", type=int, required=True)
    gf.add_argument("--level", type=float, default=0.05)
    gf.add_argument("--classical", action="store_true",
                    help="also report the Bartlett-corrected chi-square test")
    gf.add_argument("--json", action="store_true")
    gf.set_defaults(func=_cmd_gof)

    sim = sub.add_parser("simulate", help="run one design cell of a benchmark table")
    sim.add_argument("--table", required=True, choices=sorted(_TABLE_IDS))
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=None,
                     help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
    sim.add_argument("--out", default=None, help="directory for CSV/JSON output")
    sim.add_argument("--model", type=int, choices=[1, 2, 3, 4], default=None)
    sim.add_argument("--p", type=int, default=None)
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--m", type=int, default=None, help="true m (sure/pcp tables)")
    sim.add_argument("--theta", type=float, default=None, help="noise variance (pcp)")
    sim.add_argument("--N", type=int, default=None, help="series count (pcp)")
    sim.add_argument("--T", type=int, default=None, help="period count (pcp)")
    sim.add_argument("--m-max", type=int, default=None, dest="m_max")
    sim.add_argument("--level", type=float, default=0.05)
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    mpp = sub.add_parser("mp", help="bulk-law quantities for an aspect ratio")
    mpp.add_argument("--c", type=float, required=True)
    mpp.add_argument("--sigma2", type=float, default=1.0)
    mpp.add_argument("--x", type=float, default=None)
    mpp.add_argument("--quantile", type=float, default=None)
    mpp.add_argument("--json", action="store_true")
    mpp.set_defaults(func=_cmd_mp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command == "simulate":
        args.seed = _default_seed()
    try:
        return args.func(args)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_REGIME
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except HdppcaError as exc:
        cause = exc.__cause__
        code = _EXIT_REGIME if isinstance(cause, RegimeError) else (
            _EXIT_NUMERIC if isinstance(cause, NumericError) else _EXIT_INPUT
        )
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
