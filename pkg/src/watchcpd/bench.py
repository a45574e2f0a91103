"""Benchmark harness: default and best-mode runs, baselines, rank statistics.

Default mode runs a single configuration per dataset. Best mode evaluates a
configuration grid and selects, per dataset and per target metric, the
configuration maximizing that metric (oracle selection, deterministic
tie-break by grid order). A trivial baseline predicting no change points is
included as a floor. Aggregation reports per-group means, average ranks,
and Holm-adjusted pairwise p-values from the rank post-hoc z test.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .data import TimeSeriesDataset, load_dataset, minmax_normalize
from .detector import WatchConfig, process_series
from .errors import ConfigError, InvalidInputError, WatchError
from .metrics import covering, f1 as f1_score, partition_from_changepoints, precision_recall
from .wasserstein import DistanceConfig

__all__ = [
    "RunSpec",
    "RunResult",
    "run_default",
    "run_best",
    "summarize",
    "average_ranks",
    "friedman_statistic",
    "pairwise_rank_pvalues",
    "holm_adjust",
    "default_grid",
    "load_grid",
    "config_to_dict",
    "bench_directory",
]

METHODS = ("watch", "zero")
TARGETS = ("f1", "cover")


@dataclass(frozen=True)
class RunSpec:
    """One benchmark task: a dataset plus the configs and protocol to run."""

    dataset: TimeSeriesDataset
    mode: str
    configs: tuple
    method: str = "watch"
    margin: int = 5
    timeout: float | None = None
    normalize: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("default", "best"):
            raise ConfigError(f"mode must be 'default' or 'best', got {self.mode!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mode == "best" and not self.configs:
            raise ConfigError("best mode needs a nonempty config grid")
        if self.mode == "default" and len(self.configs) != 1:
            raise ConfigError("default mode takes exactly one config")
        if self.timeout is not None and not self.timeout > 0:
            raise ConfigError("timeout must be positive")
        if int(self.margin) < 0:
            raise ConfigError("margin must be >= 0")


@dataclass
class RunResult:
    """Outcome of one run; metrics are present iff status == 'ok'.

    wall_time is carried for reporting but never serialized, so result
    files are byte-identical across repeated and parallel runs.
    """

    dataset: str
    group: str
    method: str
    mode: str
    target: str | None
    config: dict | None
    changepoints: list
    precision: float | None
    recall: float | None
    f1: float | None
    cover: float | None
    status: str
    wall_time: float | None = None

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "group": self.group,
            "method": self.method,
            "mode": self.mode,
            "target": self.target,
            "config": self.config,
            "changepoints": self.changepoints,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "cover": self.cover,
            "status": self.status,
        }


def config_to_dict(cfg: WatchConfig) -> dict:
    return {
        "omega": cfg.omega,
        "kappa": cfg.kappa,
        "mu": cfg.mu,
        "epsilon": cfg.epsilon,
        "p": cfg.distance.p,
        "slices": cfg.distance.n_projections,
        "seed": cfg.distance.seed,
        "eviction": cfg.eviction,
    }


def _group_of(ds: TimeSeriesDataset) -> str:
    return "univariate" if ds.n_dim == 1 else "multivariate"


def evaluate_predictions(dataset: TimeSeriesDataset, changepoints, margin: int):
    """Score a prediction against the dataset's annotations.

    Returns (precision, recall, f1, cover). A change point index equal to
    the series length marks a change at the very end; it is clamped to the
    last valid index for scoring.
    """
    if dataset.truth is None:
        raise InvalidInputError(
            f"dataset {dataset.name!r} has no annotations to evaluate against"
        )
    T = dataset.n_obs
    cps = sorted({min(int(c), T - 1) for c in changepoints})
    p, r = precision_recall(cps, dataset.truth, margin)
    cover = covering(
        partition_from_changepoints([c for c in cps if c > 0], T), dataset.truth
    )
    return p, r, f1_score(p, r), cover


def _execute(
    dataset: TimeSeriesDataset,
    method: str,
    cfg: WatchConfig | None,
    margin: int,
    timeout: float | None,
    normalize: bool,
    mode: str,
    target: str | None,
) -> RunResult:
    """Run one (dataset, method, config) task and score it.

    The timeout is cooperative: the run is not interrupted, but results
    arriving after the deadline are discarded and flagged.
    """
    t0 = time.perf_counter()
    try:
        if method == "zero":
            cps: list = []
        else:
            values = dataset.values
            if normalize:
                values = minmax_normalize(dataset, cfg.kappa).values
            cps = [c.index for c in process_series(values, cfg)]
        wall = time.perf_counter() - t0
        if timeout is not None and wall > timeout:
            return RunResult(
                dataset=dataset.name,
                group=_group_of(dataset),
                method=method,
                mode=mode,
                target=target,
                config=config_to_dict(cfg) if cfg is not None else None,
                changepoints=[],
                precision=None,
                recall=None,
                f1=None,
                cover=None,
                status="timeout",
                wall_time=wall,
            )
        p, r, f, cover = evaluate_predictions(dataset, cps, margin)
        return RunResult(
            dataset=dataset.name,
            group=_group_of(dataset),
            method=method,
            mode=mode,
            target=target,
            config=config_to_dict(cfg) if cfg is not None else None,
            changepoints=cps,
            precision=p,
            recall=r,
            f1=f,
            cover=cover,
            status="ok",
            wall_time=wall,
        )
    except WatchError:
        return RunResult(
            dataset=dataset.name,
            group=_group_of(dataset),
            method=method,
            mode=mode,
            target=target,
            config=config_to_dict(cfg) if cfg is not None else None,
            changepoints=[],
            precision=None,
            recall=None,
            f1=None,
            cover=None,
            status="failure",
            wall_time=time.perf_counter() - t0,
        )


def run_default(spec: RunSpec) -> RunResult:
    """Single-configuration run; metrics computed against the annotations."""
    if spec.mode != "default":
        raise ConfigError("run_default requires mode == 'default'")
    cfg = spec.configs[0] if spec.method == "watch" else None
    return _execute(
        spec.dataset, spec.method, cfg, spec.margin, spec.timeout, spec.normalize,
        "default", None,
    )


def run_best(spec: RunSpec, target: str = "f1") -> RunResult:
    """Grid run with oracle selection of the config maximizing the target.

    Every grid config is evaluated; the first config attaining the maximum
    target value is selected (ties resolved by grid order) and its full
    metric set is reported. All grid points failing or timing out yields a
    failure result.
    """
    if spec.mode != "best":
        raise ConfigError("run_best requires mode == 'best'")
    if target not in TARGETS:
        raise ConfigError(f"target must be one of {TARGETS}, got {target!r}")
    if spec.method == "zero":
        # the baseline has no parameters; the grid is irrelevant
        result = _execute(
            spec.dataset, "zero", None, spec.margin, spec.timeout, spec.normalize,
            "best", target,
        )
        return result
    t0 = time.perf_counter()
    best: RunResult | None = None
    total_wall = 0.0
    for cfg in spec.configs:
        res = _execute(
            spec.dataset, "watch", cfg, spec.margin, spec.timeout, spec.normalize,
            "best", target,
        )
        total_wall += res.wall_time or 0.0
        if res.status != "ok":
            continue
        score = getattr(res, target)
        if best is None or score > getattr(best, target):
            best = res
    if best is None:
        return RunResult(
            dataset=spec.dataset.name,
            group=_group_of(spec.dataset),
            method="watch",
            mode="best",
            target=target,
            config=None,
            changepoints=[],
            precision=None,
            recall=None,
            f1=None,
            cover=None,
            status="failure",
            wall_time=time.perf_counter() - t0,
        )
    best.wall_time = total_wall
    return best


def summarize(results, method: str = "watch") -> list:
    """Mean f1 and cover per (group, mode), counting contributing ok runs.

    Returns rows {group, mode, metric, mean, count}; a (group, mode) seen
    only through failed runs yields rows with count 0 and a blank mean.
    In best mode each metric averages the runs that targeted it.
    """
    rows = []
    keys = []
    for r in results:
        if r.method != method:
            continue
        key = (r.group, r.mode)
        if key not in keys:
            keys.append(key)
    for group, mode in sorted(keys):
        for metric in TARGETS:
            vals = [
                getattr(r, metric)
                for r in results
                if r.method == method
                and r.group == group
                and r.mode == mode
                and r.status == "ok"
                and (r.mode != "best" or r.target == metric)
            ]
            rows.append(
                {
                    "group": group,
                    "mode": mode,
                    "metric": metric,
                    "mean": float(np.mean(vals)) if vals else None,
                    "count": len(vals),
                }
            )
    return rows


def average_ranks(score_table) -> np.ndarray:
    """Mean rank per method over datasets; rank 1 is the highest score.

    Rows are datasets, columns methods. Ties receive the average of the
    tied ranks; missing (NaN) entries rank last. A single row may be given
    as a flat list.
    """
    arr = np.asarray(score_table, dtype=np.float64)
    if arr.size == 0:
        raise InvalidInputError("score table must be nonempty")
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise InvalidInputError("score table needs at least two methods")
    finite_per_row = np.isfinite(arr).sum(axis=1)
    if np.any(finite_per_row < 2):
        raise InvalidInputError("every dataset row needs at least two finite scores")
    filled = np.where(np.isfinite(arr), arr, -np.inf)
    ranks = stats.rankdata(-filled, axis=1, method="average")
    return ranks.mean(axis=0)


def friedman_statistic(score_table):
    """Friedman chi-square over the rank table and its p-value."""
    arr = np.asarray(score_table, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    mean_ranks = average_ranks(arr)
    n, k = arr.shape
    chi2 = 12.0 * n / (k * (k + 1)) * float(np.sum((mean_ranks - (k + 1) / 2) ** 2))
    pvalue = float(stats.chi2.sf(chi2, k - 1))
    return chi2, pvalue


def pairwise_rank_pvalues(score_table) -> list:
    """Two-sided post-hoc z tests on all method pairs of the rank table.

    z = (Rbar_i - Rbar_j) / sqrt(k (k+1) / (6 N)); returns one row
    (i, j, p_raw) per unordered pair in column order.
    """
    arr = np.asarray(score_table, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    mean_ranks = average_ranks(arr)
    n, k = arr.shape
    se = np.sqrt(k * (k + 1) / (6.0 * n))
    out = []
    for i in range(k):
        for j in range(i + 1, k):
            z = (mean_ranks[i] - mean_ranks[j]) / se
            out.append((i, j, float(2.0 * stats.norm.sf(abs(z)))))
    return out


def holm_adjust(pvalues) -> list:
    """Step-down Holm adjustment, returned in the input order.

    Sorting the m values ascending, adjusted_(i) is the running maximum of
    min(1, (m - i) * p_(i)) for 0-based sorted position i.
    """
    ps = [float(p) for p in pvalues]
    if any(not 0.0 <= p <= 1.0 for p in ps):
        raise InvalidInputError("p-values must lie in [0, 1]")
    m = len(ps)
    order = np.argsort(ps, kind="stable")
    adjusted = [0.0] * m
    running = 0.0
    for pos, idx in enumerate(order):
        running = max(running, min(1.0, (m - pos) * ps[idx]))
        adjusted[idx] = running
    return adjusted


def default_grid(T: int) -> tuple:
    """The built-in search grid, iterated omega, kappa, mu, epsilon.

    mu options are 10 omega, 20 omega, and unbounded capped at the series
    length; combinations that cannot activate on a series of length T are
    filtered out, and duplicate configs are kept once (first position).
    """
    seen = set()
    grid = []
    for omega in (5, 10, 20):
        for kappa in (2 * omega, 4 * omega, 6 * omega):
            for mu in (10 * omega, 20 * omega, max(int(T), kappa)):
                for epsilon in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
                    key = (omega, kappa, mu, epsilon)
                    if key in seen:
                        continue
                    seen.add(key)
                    grid.append(
                        WatchConfig(kappa=kappa, mu=mu, epsilon=epsilon, omega=omega)
                    )
    return tuple(grid)


def load_grid(path) -> tuple:
    """Read a JSON list of config objects into WatchConfigs."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read grid ({exc})") from exc
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: grid must be a nonempty JSON list")
    configs = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ConfigError(f"{path}: grid entry {i} must be an object")
        known = {"omega", "kappa", "mu", "epsilon", "p", "slices", "seed", "eviction"}
        unknown = set(entry) - known
        if unknown:
            raise ConfigError(f"{path}: grid entry {i} has unknown keys {sorted(unknown)}")
        try:
            dcfg = DistanceConfig(
                p=float(entry.get("p", 2.0)),
                n_projections=int(entry.get("slices", 128)),
                seed=int(entry.get("seed", 42)),
            )
            configs.append(
                WatchConfig(
                    kappa=int(entry["kappa"]),
                    mu=int(entry["mu"]),
                    epsilon=float(entry["epsilon"]),
                    omega=int(entry["omega"]),
                    distance=dcfg,
                    eviction=str(entry.get("eviction", "stop_adding")),
                )
            )
        except (KeyError, ValueError, TypeError, WatchError) as exc:
            raise ConfigError(f"{path}: grid entry {i} invalid ({exc})") from exc
    return tuple(configs)


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("WATCH_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"WATCH_THREADS must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def bench_directory(
    datasets_dir,
    out_dir,
    mode: str = "default",
    grid=None,
    default_config: WatchConfig | None = None,
    margin: int = 5,
    timeout: float | None = None,
    normalize: bool = False,
    threads: int | None = None,
) -> list:
    """Run the benchmark over every dataset file in a directory.

    Datasets are the ``*.json`` files (annotation sidecars excluded) and
    must carry annotations. Tasks run in a thread pool sized by the
    threads argument or the WATCH_THREADS environment variable; results
    are emitted in a canonical order, so output files are byte-identical
    regardless of parallelism. Writes results.json, summary.csv,
    summary_zero.csv, ranks.csv, pairwise.csv, and bench_meta.json into
    out_dir and returns the RunResult list.
    """
    datasets_dir = Path(datasets_dir)
    out_dir = Path(out_dir)
    paths = sorted(
        p
        for p in datasets_dir.glob("*.json")
        if not p.name.endswith(".annotations.json")
    )
    if not paths:
        raise InvalidInputError(f"{datasets_dir}: no dataset files found")
    datasets = []
    for p in paths:
        ds = load_dataset(p)
        if ds.truth is None:
            raise InvalidInputError(f"{p}: no annotation sidecar; cannot evaluate")
        datasets.append(ds)

    if default_config is None:
        default_config = WatchConfig()
    if mode == "best":
        grid_configs = tuple(grid) if grid is not None else default_grid(
            max(ds.n_obs for ds in datasets)
        )
    elif mode == "default":
        grid_configs = (default_config,)
    else:
        raise ConfigError(f"mode must be 'default' or 'best', got {mode!r}")

    tasks = []
    for ds in datasets:
        for method in METHODS:
            spec = RunSpec(
                dataset=ds,
                mode=mode,
                configs=grid_configs if method == "watch" else grid_configs[:1],
                method=method,
                margin=margin,
                timeout=timeout,
                normalize=normalize,
            )
            if mode == "default":
                tasks.append((spec, None))
            else:
                for target in TARGETS:
                    tasks.append((spec, target))

    def run_task(item):
        spec, target = item
        if spec.mode == "default":
            return run_default(spec)
        return run_best(spec, target)

    n_threads = _thread_count(threads)
    if n_threads == 1:
        results = [run_task(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(run_task, tasks))
    results.sort(key=lambda r: (r.dataset, r.method, r.mode, r.target or ""))

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "results.json", [r.to_dict() for r in results])
    _write_summary(out_dir / "summary.csv", summarize(results, "watch"))
    _write_summary(out_dir / "summary_zero.csv", summarize(results, "zero"))
    _write_ranks(out_dir, results, datasets, mode)
    meta = {
        "mode": mode,
        "margin": margin,
        "normalize": normalize,
        "timeout": timeout,
        "n_datasets": len(datasets),
        "n_grid_configs": len(grid_configs),
        "rank_metric": "f1",
        "posthoc": "friedman rank z test, two-sided, holm step-down adjustment",
    }
    _write_json(out_dir / "bench_meta.json", meta)
    return results


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _write_summary(path: Path, rows) -> None:
    lines = ["group,mode,metric,mean,count"]
    for row in rows:
        mean = "" if row["mean"] is None else repr(row["mean"])
        lines.append(f"{row['group']},{row['mode']},{row['metric']},{mean},{row['count']}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _result_score(results, dataset: str, method: str, mode: str):
    for r in results:
        if r.dataset == dataset and r.method == method and r.mode == mode:
            if mode == "best" and r.target != "f1":
                continue
            return r.f1 if r.status == "ok" else np.nan
    return np.nan


def _write_ranks(out_dir: Path, results, datasets, mode: str) -> None:
    names = [ds.name for ds in datasets]
    table = np.array(
        [
            [_result_score(results, name, method, mode) for method in METHODS]
            for name in sorted(names)
        ]
    )
    ranks = average_ranks(table)
    lines = ["method,mean_rank"]
    for method, rank in zip(METHODS, ranks):
        lines.append(f"{method},{float(rank)!r}")
    (out_dir / "ranks.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    raw = pairwise_rank_pvalues(table)
    adjusted = holm_adjust([p for _, _, p in raw])
    lines = ["method_a,method_b,p_raw,p_holm"]
    for (i, j, p), ph in zip(raw, adjusted):
        lines.append(f"{METHODS[i]},{METHODS[j]},{p!r},{ph!r}")
    (out_dir / "pairwise.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
