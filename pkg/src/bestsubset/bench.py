"""Monte-Carlo benchmark harness: replicated scenarios, summary statistics.

Each replication draws a fresh training set and a held-out validation set
from the same planted truth, runs every requested method, and records wall
time (the fit only, no I/O), selected set quality (TP/FP), and a
family-specific predictive score: relative MSE (gaussian), classification
accuracy (binomial), or concordance (cox).  Replications use independent
RNG substreams derived from (seed, replication index), so serial and
parallel runs agree exactly.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset, destandardize_coefficients, standardize
from .datagen import GenConfig, gen_beta, gen_design, gen_response
from .families import ModelFamily, fit_active, predict
from .metrics import accuracy, concordance_index, relative_mse, tp_fp
from .oracle import exhaustive_best_subset
from .tuning import gpdas, spdas

METRIC_NAME = {"gaussian": "mse", "binomial": "accuracy", "cox": "cindex"}
KNOWN_METHODS = ("spdas", "gpdas", "oracle")


@dataclass(frozen=True)
class BenchScenario:
    """A replicated synthetic experiment."""

    family: str
    n: int
    p: int
    q: int
    reps: int
    methods: tuple[str, ...] = ("spdas",)
    criterion: str = "auto"
    k_max: int | None = None
    eta: float = 0.01
    epsilon: float = 0.0
    rho: float = 0.5
    sigma: float = 1.0
    censor_rate: float = 0.0
    holdout: int = 1000
    seed: int = 0
    b: float | None = None
    B: float | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("need at least one replication")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods: {unknown}")
        if "oracle" in self.methods and self.p > 25:
            raise ValueError(
                f"infeasible scenario: oracle requires p <= 25, got p={self.p}"
            )

    def gen_config(self) -> GenConfig:
        return GenConfig(
            n=self.n,
            p=self.p,
            q=self.q,
            family=self.family,
            rho=self.rho,
            sigma=self.sigma,
            b=self.b,
            B=self.B,
            censor_rate=self.censor_rate,
            seed=self.seed,
        )


def _holdout_metric(scn, family, meta, model, beta_star, X_test, resp_test):
    if scn.family == "gaussian":
        _, beta_orig = destandardize_coefficients(model.beta, meta, model.intercept)
        return relative_mse(X_test, beta_orig, beta_star)
    scores = predict(family, model, X_test, meta)
    if scn.family == "binomial":
        return accuracy(scores, resp_test.y)
    return concordance_index(scores, resp_test.time, resp_test.status)


def run_replication(scn: BenchScenario, rep: int) -> dict:
    """One replication; deterministic given (scenario.seed, rep)."""
    rng = np.random.default_rng([scn.seed, rep])
    cfg = scn.gen_config()
    b, B = cfg.magnitude_range()
    X = gen_design(scn.n, scn.p, scn.rho, rng)
    beta_star = gen_beta(scn.p, scn.q, b, B, "random", rng)
    response = gen_response(scn.family, X, beta_star, cfg, rng)
    X_test = gen_design(scn.holdout, scn.p, scn.rho, rng)
    resp_test = gen_response(scn.family, X_test, beta_star, cfg, rng)
    truth = tuple(int(j) for j in np.flatnonzero(beta_star))

    family = ModelFamily(scn.family)
    d = standardize(Dataset(X, response))

    record = {"rep": rep, "methods": {}}
    selected_ks = set()
    for name in scn.methods:
        if name == "oracle":
            continue
        start = time.perf_counter()
        if name == "spdas":
            _, report = spdas(
                family, d, k_max=scn.k_max, criterion=scn.criterion,
                epsilon=scn.epsilon,
            )
        else:
            report, _ = gpdas(family, d, k_max=scn.k_max, eta=scn.eta)
        elapsed = time.perf_counter() - start
        score = tp_fp(report.active_set, truth)
        model = fit_active(family, d, report.active_set)
        record["methods"][name] = {
            "k": report.k,
            "active": list(report.active_set),
            "loss": report.loss,
            "time": elapsed,
            "tp": score.tp,
            "fp": score.fp,
            "metric": _holdout_metric(
                scn, family, d, model, beta_star, X_test, resp_test
            ),
        }
        selected_ks.add(report.k)

    if "oracle" in scn.methods:
        start = time.perf_counter()
        best_set, best_loss = exhaustive_best_subset(family, d, scn.q)
        elapsed = time.perf_counter() - start
        model = fit_active(family, d, best_set)
        score = tp_fp(best_set, truth)
        # losses at every size any other method selected, for dominance checks
        losses = {scn.q: best_loss}
        for k in sorted(selected_ks - {scn.q}):
            _, losses[k] = exhaustive_best_subset(family, d, k)
        record["methods"]["oracle"] = {
            "k": scn.q,
            "active": list(best_set),
            "loss": best_loss,
            "time": elapsed,
            "tp": score.tp,
            "fp": score.fp,
            "metric": _holdout_metric(
                scn, family, d, model, beta_star, X_test, resp_test
            ),
        }
        record["oracle_losses"] = {str(k): v for k, v in losses.items()}
    return record


@dataclass(frozen=True, eq=False)
class BenchResult:
    scenario: BenchScenario
    records: tuple[dict, ...]
    summary: tuple[dict, ...]


def _mean_sd(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, sd


def summarize(scn: BenchScenario, records) -> tuple[dict, ...]:
    metric = METRIC_NAME[scn.family]
    rows = []
    for name in scn.methods:
        per = [r["methods"][name] for r in records]
        row = {"method": name, "reps": scn.reps, "metric": metric}
        for field_name, key in (
            ("time", "time"),
            (metric, "metric"),
            ("tp", "tp"),
            ("fp", "fp"),
            ("k", "k"),
        ):
            mean, sd = _mean_sd([p[key] for p in per])
            row[f"{field_name}_mean"] = mean
            row[f"{field_name}_sd"] = sd
        rows.append(row)
    return tuple(rows)


def run_bench(scn: BenchScenario, jobs: int = 1) -> BenchResult:
    """Run all replications, optionally across processes.

    Results are keyed by replication index, so the executor cannot affect
    the output.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if jobs == 1:
        records = [run_replication(scn, r) for r in range(scn.reps)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_replication, [scn] * scn.reps, range(scn.reps)))
    return BenchResult(scn, tuple(records), summarize(scn, records))
