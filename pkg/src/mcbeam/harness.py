"""Monte-Carlo experiment orchestration and statistics.

A run sweeps the Cartesian grid of (Q, M, K, scenario) cells; every
realization of every cell derives its own 64-bit seed from the master
seed with splitmix64, so results are reproducible regardless of worker
count or execution order. The relaxation lower bound is computed for
every realization (every summary row reports it); the other methods run
only when requested.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import EQUIPARTITION, ONE_GROUP, equipartition, one_group
from .channel import SCENARIOS, ChannelGenConfig, generate
from .errors import ConvergenceError, InvalidInput, ParseError
from .rng import derive_seed
from .sca import sca_solve
from .sdr import randomize, sdr_solve

METHODS = ("sdr", "sca", ONE_GROUP, EQUIPARTITION)

SUMMARY_HEADER = (
    "Q,M,K,scenario,method,mean_power_db,mean_sdr_lb_db,"
    "ratio_min,ratio_max,ratio_mean,ratio_std,theta,failures"
)
REALIZATIONS_HEADER = "Q,M,K,scenario,realization,seed,method,power,v_sdr_lb,ratio,failed"
TRACES_HEADER = "Q,M,K,scenario,realization,outer_iter,cost,min_margin,step_norm"


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and knobs of one experiment run.

    The cells are the Cartesian product qs x ms x ks x scenarios in that
    nesting order (scenario fastest).
    """

    qs: tuple
    ms: tuple
    ks: tuple
    scenarios: tuple = ("homogeneous",)
    realizations: int = 500
    L: int = 1000
    dfgp_iters: int = 400
    seed: int = 0
    methods: tuple = METHODS
    sdr_tol: float = 1e-7
    sdr_max_iter: int = 50000
    qos_target_db: float = 3.0
    noise_variance: float = 1.0
    shadow_sigma_db: float = 0.5
    save_traces: bool = False

    def __post_init__(self):
        for name in ("qs", "ms", "ks", "scenarios", "methods"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.realizations < 1:
            raise InvalidInput("realizations must be >= 1")
        if not self.qs or not self.ms or not self.ks or not self.scenarios:
            raise InvalidInput("grid axes must be nonempty")
        if any(d < 1 for d in (*self.qs, *self.ms, *self.ks)):
            raise InvalidInput("grid dimensions must be >= 1")
        for s in self.scenarios:
            if s not in SCENARIOS:
                raise InvalidInput(f"unknown scenario {s!r}")
        for m in self.methods:
            if m not in METHODS:
                raise InvalidInput(f"unknown method {m!r}; choose from {METHODS}")

    def cells(self):
        """Grid cells as (Q, M, K, scenario) tuples, in deterministic order."""
        return [
            (q, m, k, s)
            for q in self.qs
            for m in self.ms
            for k in self.ks
            for s in self.scenarios
        ]


@dataclass
class RatioStats:
    """Sample statistics of per-realization ratios, plus the a-priori bound."""

    min: float
    max: float
    mean: float
    std: float
    theta_bound: float


def aggregate(ratios, bound) -> RatioStats:
    """min/max/mean and (N-1)-denominator standard deviation of a sample."""
    ratios = np.asarray(list(ratios), dtype=float)
    if ratios.size == 0:
        raise InvalidInput("cannot aggregate an empty sample")
    std = float(np.std(ratios, ddof=1)) if ratios.size > 1 else 0.0
    return RatioStats(
        min=float(ratios.min()),
        max=float(ratios.max()),
        mean=float(ratios.mean()),
        std=std,
        theta_bound=float(bound),
    )


def db_convert(p_linear) -> float:
    """Linear power to dB: 10*log10(p)."""
    p = float(p_linear)
    if not np.isfinite(p) or p <= 0.0:
        raise InvalidInput(f"power must be positive and finite, got {p!r}")
    return 10.0 * np.log10(p)


# ------------------------------------------------------------------
# Config file parsing: one `name = value` per line, lists comma-separated,
# '#' starts a comment. Keys: Q, M, K, scenario, realizations, L,
# dfgp_iters, seed, methods, sdr_tol, sdr_max_iter, qos_target_db,
# noise_variance, shadow_sigma_db, save_traces.
# ------------------------------------------------------------------

_INT_LIST_KEYS = {"q": "qs", "m": "ms", "k": "ks"}
_INT_KEYS = {"realizations", "l", "dfgp_iters", "seed", "sdr_max_iter"}
_FLOAT_KEYS = {"sdr_tol", "qos_target_db", "noise_variance", "shadow_sigma_db"}
_BOOL_KEYS = {"save_traces"}


def parse_config(text) -> ExperimentConfig:
    """Parse the flat key-value experiment config format."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'name = value'", line=lineno)
        name, _, value = line.partition("=")
        name = name.strip().lower()
        value = value.strip()
        items = [v.strip() for v in value.split(",") if v.strip()]
        known = (
            name in _INT_LIST_KEYS or name in _INT_KEYS or name in _FLOAT_KEYS
            or name in _BOOL_KEYS or name in ("scenario", "methods")
        )
        if not known:
            raise ParseError(f"unknown key {name!r}", line=lineno)
        try:
            if name in _INT_LIST_KEYS:
                kwargs[_INT_LIST_KEYS[name]] = tuple(int(v) for v in items)
            elif name == "scenario":
                kwargs["scenarios"] = tuple(items)
            elif name == "methods":
                kwargs["methods"] = tuple(items)
            elif name in _INT_KEYS:
                kwargs["L" if name == "l" else name] = int(value)
            elif name in _FLOAT_KEYS:
                kwargs[name] = float(value)
            elif name in _BOOL_KEYS:
                if value.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(f"expected boolean, got {value!r}")
                kwargs[name] = value.lower() in ("true", "1")
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    for required in ("qs", "ms", "ks"):
        if required not in kwargs:
            raise InvalidInput(f"config is missing the {required[:-1].upper()} key")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ------------------------------------------------------------------
# Execution
# ------------------------------------------------------------------


def _run_realization(args):
    """One (cell, realization) unit of work; must stay picklable."""
    cfg, ci, ri = args
    q, m, k, scenario = cfg.cells()[ci]
    seed = derive_seed(cfg.seed, ci, ri)
    cs = generate(
        ChannelGenConfig(
            M=m, K=k, Q=q, scenario=scenario,
            qos_target_db=cfg.qos_target_db,
            noise_variance=cfg.noise_variance,
            shadow_sigma_db=cfg.shadow_sigma_db,
            seed=derive_seed(seed, 1),
        )
    )
    record = {"ci": ci, "ri": ri, "seed": seed, "v_lb": None,
              "powers": {}, "errors": {}, "sca_trace": None}
    try:
        sol = sdr_solve(cs, tol=cfg.sdr_tol, max_iter=cfg.sdr_max_iter)
        record["v_lb"] = sol.value
    except ConvergenceError as exc:
        record["errors"]["sdr_lb"] = str(exc)
        return record

    for method in cfg.methods:
        try:
            if method == "sdr":
                rr = randomize(sol, cs, L=cfg.L, seed=derive_seed(seed, 2))
                record["powers"][method] = rr.best_power
            elif method == "sca":
                rep = sca_solve(cs, seed=derive_seed(seed, 3),
                                inner_iters=cfg.dfgp_iters)
                record["powers"][method] = rep.power
                record["sca_trace"] = rep.trace
            elif method == ONE_GROUP:
                record["powers"][method] = one_group(
                    cs, seed=derive_seed(seed, 4), L=cfg.L,
                    tol=cfg.sdr_tol, max_iter=cfg.sdr_max_iter,
                ).power
            elif method == EQUIPARTITION:
                record["powers"][method] = equipartition(
                    cs, seed=derive_seed(seed, 5), L=cfg.L,
                    tol=cfg.sdr_tol, max_iter=cfg.sdr_max_iter,
                ).power
        except ConvergenceError as exc:
            record["errors"][method] = str(exc)
    return record


@dataclass
class CellSummary:
    """Aggregated statistics of one (cell, method) pair."""

    Q: int
    M: int
    K: int
    scenario: str
    method: str
    mean_power_db: float
    mean_sdr_lb_db: float
    stats: RatioStats
    failures: int
    n: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list = field(repr=False)
    summaries: list = field(repr=False)

    def summary(self, q, m, k, scenario, method) -> CellSummary:
        for s in self.summaries:
            if (s.Q, s.M, s.K, s.scenario, s.method) == (q, m, k, scenario, method):
                return s
        raise KeyError((q, m, k, scenario, method))


def _summarize(cfg, records):
    cells = cfg.cells()
    theta = {
        ci: (5.0 * k ** (1.0 / q) if s == "homogeneous" else 5.0 * q * k)
        for ci, (q, m, k, s) in enumerate(cells)
    }
    summaries = []
    for ci, (q, m, k, s) in enumerate(cells):
        cell_records = [r for r in records if r["ci"] == ci]
        for method in cfg.methods:
            powers, lbs = [], []
            failures = 0
            for r in cell_records:
                if r["v_lb"] is None or method in r["errors"]:
                    failures += 1
                    continue
                if method in r["powers"]:
                    powers.append(r["powers"][method])
                    lbs.append(r["v_lb"])
            if powers:
                ratios = np.asarray(powers) / np.asarray(lbs)
                stats = aggregate(ratios, theta[ci])
                mean_power_db = db_convert(np.mean(powers))
                mean_lb_db = db_convert(np.mean(lbs))
            else:
                stats = RatioStats(np.nan, np.nan, np.nan, np.nan, theta[ci])
                mean_power_db = mean_lb_db = np.nan
            summaries.append(CellSummary(
                Q=q, M=m, K=k, scenario=s, method=method,
                mean_power_db=mean_power_db, mean_sdr_lb_db=mean_lb_db,
                stats=stats, failures=failures, n=len(powers),
            ))
    return summaries


def _fmt(x):
    return format(float(x), ".12g")


def _write_outputs(cfg, records, summaries, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cells = cfg.cells()

    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for s in summaries:
            fh.write(",".join([
                str(s.Q), str(s.M), str(s.K), s.scenario, s.method,
                _fmt(s.mean_power_db), _fmt(s.mean_sdr_lb_db),
                _fmt(s.stats.min), _fmt(s.stats.max), _fmt(s.stats.mean),
                _fmt(s.stats.std), _fmt(s.stats.theta_bound), str(s.failures),
            ]) + "\n")

    with open(os.path.join(out_dir, "realizations.csv"), "w", encoding="utf-8") as fh:
        fh.write(REALIZATIONS_HEADER + "\n")
        for r in records:
            q, m, k, s = cells[r["ci"]]
            lb = r["v_lb"]
            for method in cfg.methods:
                failed = lb is None or method in r["errors"]
                power = r["powers"].get(method)
                ratio = power / lb if (power is not None and lb) else None
                fh.write(",".join([
                    str(q), str(m), str(k), s, str(r["ri"]), str(r["seed"]), method,
                    _fmt(power) if power is not None else "nan",
                    _fmt(lb) if lb is not None else "nan",
                    _fmt(ratio) if ratio is not None else "nan",
                    "1" if failed else "0",
                ]) + "\n")

    if cfg.save_traces:
        with open(os.path.join(out_dir, "sca_traces.csv"), "w", encoding="utf-8") as fh:
            fh.write(TRACES_HEADER + "\n")
            for r in records:
                if not r["sca_trace"]:
                    continue
                q, m, k, s = cells[r["ci"]]
                for n, cost, margin, step in r["sca_trace"]:
                    fh.write(
                        f"{q},{m},{k},{s},{r['ri']},{n},"
                        f"{cost:.12g},{margin:.12g},{step:.12g}\n"
                    )


def run_experiment(cfg: ExperimentConfig, out_dir=None, jobs=1) -> ExperimentResult:
    """Run every realization of every grid cell and aggregate.

    Results are identical for any ``jobs`` value: each (cell,
    realization) pair derives its seed from the master seed alone, and
    aggregation is a deterministic reduce in task order. Solver
    non-convergence is recorded per realization and excluded from the
    statistics (the ``failures`` column), never fatal.
    """
    tasks = [
        (cfg, ci, ri)
        for ci in range(len(cfg.cells()))
        for ri in range(cfg.realizations)
    ]
    if jobs and jobs > 1:
        chunk = max(1, len(tasks) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_realization, tasks, chunksize=chunk))
    else:
        records = [_run_realization(t) for t in tasks]

    summaries = _summarize(cfg, records)
    if out_dir is not None:
        _write_outputs(cfg, records, summaries, out_dir)
    return ExperimentResult(config=cfg, records=records, summaries=summaries)
