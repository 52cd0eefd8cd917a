"""Seeded Monte-Carlo designs and table runners.

Each runner draws ``reps`` independent datasets from one design, applies the
estimators/criteria/tests under study, and aggregates the per-replication
records into the familiar table columns (mean, MAD, MSE, selection rate,
empirical size).  Replication r derives its generator from
``SeedSequence([master_seed, r])``, so results do not depend on scheduling
order or worker count.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from dataclasses import dataclass, field

from . import gof, rank, variance
from .data import DataMatrix, spectrum
from .errors import HdppcaError, InputError
from .spiked import SpikedModelSpec, bias_term

SCHEMA_VERSION = "1"

_MODEL_PARAMS = {
    1: dict(alphas=(25.0, 16.0, 9.0), mults=(1, 1, 1), sigma2=4.0),
    2: dict(alphas=(4.0, 3.0), mults=(1, 1), sigma2=2.0),
    3: dict(alphas=(12.0, 10.0, 8.0), mults=(1, 1, 2), sigma2=3.0),
    4: dict(alphas=(8.0, 7.0), mults=(1, 1), sigma2=1.0),
}


def model_spec(model: int, p: int, n: int) -> SpikedModelSpec:
    """The four benchmark spiked designs at a chosen (p, n)."""
    if model not in _MODEL_PARAMS:
        raise InputError(f"unknown model {model}; choose from {sorted(_MODEL_PARAMS)}")
    return SpikedModelSpec(p=p, n=n, **_MODEL_PARAMS[model])


def sure_design(m: int, p: int, n: int) -> SpikedModelSpec:
    """Spiked design for the risk-criterion study: spikes (m+1)^2, ..., 3^2, 1.5."""
    if m < 2:
        raise InputError("the selection study needs m >= 2")
    alphas = tuple(float((m + 1 - j) ** 2) for j in range(m - 1)) + (1.5,)
    return SpikedModelSpec(alphas=alphas, mults=(1,) * m, sigma2=1.0, p=p, n=n)


@dataclass(frozen=True)
class FactorDesign:
    """Panel factor design: X = F Lambda' + sqrt(theta) E with N(0,1) entries."""

    m: int
    theta: float
    n_series: int
    n_periods: int

    def __post_init__(self):
        if self.m < 1:
            raise InputError("need m >= 1")
        if not self.theta > 0:
            raise InputError("need theta > 0")


@dataclass(frozen=True)
class SimConfig:
    design: object  # SpikedModelSpec or FactorDesign
    reps: int
    seed: int
    parallelism: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise InputError("need reps >= 1")
        if self.seed < 0:
            raise InputError("seed must be non-negative")
        if self.parallelism < 1:
            raise InputError("parallelism must be >= 1")


@dataclass
class SimReport:
    table: str
    design_label: str
    reps: int
    seed: int
    records: list
    aggregates: dict
    diagnostics: dict = field(default_factory=dict)


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Generator for one replication, mixed from (master seed, index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, rep]))


def gen_spiked(spec: SpikedModelSpec, n: int, rng: np.random.Generator,
               rotate: bool = False) -> DataMatrix:
    """n draws from N(0, Sigma) with Sigma diagonal per the spiked design.

    ``rotate`` conjugates by a random orthogonal matrix; the spectrum (and so
    every estimator here) is unchanged, which is what the flag demonstrates.
    """
    scales = np.sqrt(spec.population_spectrum())
    x = rng.standard_normal((n, spec.p)) * scales
    if rotate:
        q, r = np.linalg.qr(rng.standard_normal((spec.p, spec.p)))
        q = q * np.sign(np.diag(r))  # fix signs so the draw is deterministic
        x = x @ q.T
    return DataMatrix(x)


def gen_factor(m: int, theta: float, n_series: int, n_periods: int,
               rng: np.random.Generator) -> DataMatrix:
    """T x N panel with m common factors and idiosyncratic variance theta."""
    loadings = rng.standard_normal((n_series, m))
    factors = rng.standard_normal((n_periods, m))
    noise = rng.standard_normal((n_periods, n_series))
    return DataMatrix(factors @ loadings.T + math.sqrt(theta) * noise)


def _design_label(design) -> str:
    if isinstance(design, SpikedModelSpec):
        alphas = ",".join(f"{a:g}" for a in design.spike_values())
        return f"spiked p={design.p} n={design.n} sigma2={design.sigma2:g} alphas=({alphas})"
    return (f"factor m={design.m} theta={design.theta:g} "
            f"N={design.n_series} T={design.n_periods}")


# ---------------------------------------------------------------------------
# per-replication work, one function per table family


def _rep_bias(design, opts, seed, rep):
    rng = replication_rng(seed, rep)
    spec = spectrum(gen_spiked(design, design.n, rng))
    return {"rep": rep, "mle": variance.mle_sigma2(spec, design.m).value}


def _rep_estimator_stats(design, opts, seed, rep):
    rng = replication_rng(seed, rep)
    spec = spectrum(gen_spiked(design, design.n, rng))
    star = variance.star_sigma2(spec, design.m, on_sub_edge="clamp")
    return {
        "rep": rep,
        "mle": variance.mle_sigma2(spec, design.m).value,
        "star": star.value,
        "star_clamped": int(bool(star.diagnostics.get("clamped_indices"))),
    }


def _rep_mse_ratios(design, opts, seed, rep):
    rng = replication_rng(seed, rep)
    data = gen_spiked(design, design.n, rng)
    spec = spectrum(data)
    m = design.m
    star = variance.star_sigma2(spec, m, on_sub_edge="clamp")
    kn = variance.kn_sigma2(spec, m, on_negative_discriminant="clamp")
    return {
        "rep": rep,
        "star": star.value,
        "kn": kn.value,
        "us": variance.us_sigma2(spec, m).value,
        "median": variance.median_sigma2(data).value,
        "star_clamped": int(bool(star.diagnostics.get("clamped_indices"))),
        "kn_clamped": int(bool(kn.diagnostics.get("clamped_discriminants"))),
    }


def _rep_sure(design, opts, seed, rep):
    rng = replication_rng(seed, rep)
    spec = spectrum(gen_spiked(design, design.n, rng))
    m_max = opts["m_max"]
    return {
        "rep": rep,
        "sure": rank.sure(spec, m_max, variant="us").selected_m,
        "sure_star": rank.sure(spec, m_max, variant="star").selected_m,
    }


def _rep_pcp(design, opts, seed, rep):
    rng = replication_rng(seed, rep)
    data = gen_factor(design.m, design.theta, design.n_series, design.n_periods, rng)
    m_max = opts["m_max"]
    record = {"rep": rep}
    for variant, suffix in (("plain", ""), ("star", "_star")):
        reports = rank.bai_ng(data, m_max=m_max, family="pcp", variant=variant)
        for name, report in reports.items():
            record[name + suffix] = report.selected_m
    return record


def _rep_clrt(design, opts, seed, rep):
    rng = replication_rng(seed, rep)
    spec = spectrum(gen_spiked(design, design.n, rng))
    report = gof.clrt(spec, design.m, alpha_level=opts["level"], on_sub_edge="clamp")
    return {
        "rep": rep,
        "delta_n": report.delta_n,
        "reject_clrt": int(report.reject),
        "reject_lrt": int(report.p_value_lrt < opts["level"]),
    }


_TABLES = {
    "bias": (_rep_bias, SpikedModelSpec),
    "estimator_stats": (_rep_estimator_stats, SpikedModelSpec),
    "mse_ratios": (_rep_mse_ratios, SpikedModelSpec),
    "sure": (_rep_sure, SpikedModelSpec),
    "pcp": (_rep_pcp, FactorDesign),
    "clrt_size": (_rep_clrt, SpikedModelSpec),
}


def _run_replications(worker, design, opts, config: SimConfig):
    func = partial(worker, design, opts, config.seed)
    records = []
    if config.parallelism == 1:
        iterator = map(func, range(config.reps))
    else:
        executor = ProcessPoolExecutor(max_workers=config.parallelism)
        iterator = executor.map(func, range(config.reps),
                                chunksize=max(1, config.reps // (4 * config.parallelism)))
    try:
        for rec in iterator:
            records.append(rec)
    except Exception as exc:
        raise HdppcaError(f"replication {len(records)} failed: {exc}") from exc
    finally:
        if config.parallelism > 1:
            executor.shutdown()
    return records


def _column(records, key):
    return np.array([rec[key] for rec in records], dtype=float)


def _mean_mad_mse(values, truth):
    mean = float(np.mean(values))
    return {
        "mean": mean,
        "mad": abs(mean - truth),
        "mse": float(np.mean((values - truth) ** 2)),
    }


def theoretical_bias(design: SpikedModelSpec) -> float:
    """Closed-form limit bias of the trailing-eigenvalue mean, no randomness.

    Uses the design ratio c = p/n; equals -c sigma2 (m + sigma2 sum 1/alpha)
    divided by p - m.
    """
    c = design.p / design.n
    b = bias_term(design.m, design.spike_values(), design.sigma2, c)
    return -design.sigma2 * math.sqrt(2.0 * c) * b / (design.p - design.m)


def run_table(table_id: str, config: SimConfig, *, m_max: int | None = None,
              level: float = 0.05) -> SimReport:
    """Run one design cell of a benchmark table and aggregate its columns."""
    if table_id not in _TABLES:
        raise InputError(f"unknown table {table_id!r}; choose from {sorted(_TABLES)}")
    worker, design_type = _TABLES[table_id]
    design = config.design
    if not isinstance(design, design_type):
        raise InputError(
            f"table {table_id!r} needs a {design_type.__name__} design, "
            f"got {type(design).__name__}"
        )

    opts = {"level": level}
    if table_id == "sure":
        opts["m_max"] = m_max if m_max is not None else 20
    elif table_id == "pcp":
        opts["m_max"] = m_max if m_max is not None else 8

    records = _run_replications(worker, design, opts, config)
    aggregates = {}
    diagnostics = {}

    if table_id == "bias":
        sigma2 = design.sigma2
        aggregates["empirical_bias"] = float(np.mean(_column(records, "mle"))) - sigma2
        aggregates["theoretical_bias"] = theoretical_bias(design)
        aggregates["abs_difference"] = abs(
            aggregates["empirical_bias"] - aggregates["theoretical_bias"]
        )
    elif table_id == "estimator_stats":
        sigma2 = design.sigma2
        for method in ("mle", "star"):
            stats = _mean_mad_mse(_column(records, method), sigma2)
            aggregates.update({f"{method}_{k}": v for k, v in stats.items()})
        diagnostics["star_clamped_reps"] = int(np.sum(_column(records, "star_clamped")))
    elif table_id == "mse_ratios":
        sigma2 = design.sigma2
        mses = {
            method: float(np.mean((_column(records, method) - sigma2) ** 2))
            for method in ("star", "kn", "us", "median")
        }
        aggregates.update({f"mse_{k}": v for k, v in mses.items()})
        for method in ("kn", "us", "median"):
            aggregates[f"ratio_{method}"] = mses[method] / mses["star"]
        diagnostics["star_clamped_reps"] = int(np.sum(_column(records, "star_clamped")))
        diagnostics["kn_clamped_reps"] = int(np.sum(_column(records, "kn_clamped")))
    elif table_id == "sure":
        true_m = design.m
        for key in ("sure", "sure_star"):
            selections = _column(records, key)
            aggregates[f"rate_{key}"] = float(np.mean(selections == true_m))
            aggregates[f"mean_{key}"] = float(np.mean(selections))
        diagnostics["m_max"] = opts["m_max"]
    elif table_id == "pcp":
        names = [f"pcp{i}{suffix}" for suffix in ("", "_star") for i in (1, 2, 3)]
        for name in names:
            selections = _column(records, name)
            aggregates[f"mean_{name}"] = float(np.mean(selections))
            aggregates[f"sd_{name}"] = float(np.std(selections, ddof=0))
        diagnostics["m_max"] = opts["m_max"]
    elif table_id == "clrt_size":
        for key, out in (("reject_clrt", "size_clrt"), ("reject_lrt", "size_lrt")):
            rate = float(np.mean(_column(records, key)))
            aggregates[out] = rate
            aggregates[f"{out}_ci_halfwidth"] = 1.96 * math.sqrt(
                max(rate * (1.0 - rate), 1e-12) / config.reps
            )
        aggregates["level"] = level

    return SimReport(
        table=table_id,
        design_label=_design_label(design),
        reps=config.reps,
        seed=config.seed,
        records=records,
        aggregates=aggregates,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# serialization


def write_records_csv(report: SimReport, path) -> None:
    """Long-format per-replication values: rep, design, statistic, value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "design", "statistic", "value"])
        for record in report.records:
            for key, value in record.items():
                if key == "rep":
                    continue
                writer.writerow([record["rep"], report.design_label, key, repr(value)])


def write_aggregate_csv(report: SimReport, path) -> None:
    """One row of aggregate columns for the design cell."""
    keys = list(report.aggregates)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table", "design", "reps", "seed"] + keys)
        writer.writerow(
            [report.table, report.design_label, report.reps, report.seed]
            + [repr(report.aggregates[k]) for k in keys]
        )


def report_to_json(report: SimReport) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "table": report.table,
        "design": report.design_label,
        "reps": report.reps,
        "seed": report.seed,
        "aggregates": report.aggregates,
        "diagnostics": report.diagnostics,
        "records": report.records,
    }


def write_json(report: SimReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_json(report), fh, indent=1)
        fh.write("\n")
