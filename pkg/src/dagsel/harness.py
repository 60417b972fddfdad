"""Replicated simulation experiments: data, posteriors over all DAGs, CSV summaries."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .bayes import DagPriorSpec, PriorSpec, class_posterior, dag_posterior, posterior_share
from .equivalence import distribution_equivalence_class
from .graph import Dag, enumerate_dags
from .scm import ScmSpec, nongaussian_set, sample_dataset
from .specs import CHAIN_ALT, COMPLETE_ALT, study1, study2, study3

DATA_STREAM = 0
EVIDENCE_STREAM = 1
HIST_WIDTH = 0.05

SCALES = {
    "full": {"replicates": 100, "n_list": (1600, 3200, 6400, 12800), "mc_samples": 10_000},
    "desk": {"replicates": 20, "n_list": (400, 1600, 6400), "mc_samples": 4000},
    "smoke": {"replicates": 2, "n_list": (200, 400), "mc_samples": 500},
}

# DAG-prior used by the complexity-prior studies: alpha = 0.99 and d_n from data,
# counting a log-likelihood gap only when it exceeds 3 paired standard errors
COMPLEXITY = DagPriorSpec("complexity", alpha=0.99, d=None, gap_sigma=3.0)


@dataclass(frozen=True)
class ExperimentConfig:
    scm: ScmSpec
    n_list: tuple[int, ...] = (1600, 3200, 6400, 12800)
    replicates: int = 100
    mc_samples: int = 10_000
    prior: DagPriorSpec = field(default_factory=DagPriorSpec)
    coef_prior: PriorSpec = field(default_factory=PriorSpec)
    master_seed: int = 0
    output_dir: str | None = None
    share_against: Dag | None = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list or list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("n_list must be non-empty, strictly ascending")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.scm.p > 5:
            raise ValueError("experiments enumerate all DAGs; p must be <= 5")
        if self.share_against is not None and self.share_against.p != self.scm.p:
            raise ValueError("share_against DAG has the wrong node count")

    def scaled(self, scale: str) -> ExperimentConfig:
        if scale not in SCALES:
            raise ValueError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
        return replace(self, **SCALES[scale])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scm": io.spec_to_dict(self.scm),
            "n_list": list(self.n_list),
            "replicates": self.replicates,
            "mc_samples": self.mc_samples,
            "dag_prior": io.dag_prior_to_dict(self.prior),
            "coef_prior": io.prior_to_dict(self.coef_prior),
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "share_against": None if self.share_against is None else str(self.share_against),
        }

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {
            "name", "scm", "n_list", "replicates", "mc_samples", "dag_prior",
            "coef_prior", "master_seed", "output_dir", "share_against", "study",
        }
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        base = builtin_study(str(d["study"])) if d.get("study") is not None else None
        kw = {}
        if "scm" in d:
            kw["scm"] = io.spec_from_dict(d["scm"])
        for key in ("n_list", "replicates", "mc_samples", "master_seed", "output_dir", "name"):
            if key in d and d[key] is not None:
                kw[key] = d[key]
        if "dag_prior" in d:
            kw["prior"] = io.dag_prior_from_dict(d["dag_prior"])
        if "coef_prior" in d:
            kw["coef_prior"] = io.prior_from_dict(d["coef_prior"])
        if d.get("share_against"):
            kw["share_against"] = Dag.parse(d["share_against"])
        if base is not None:
            return replace(base, **kw)
        if "scm" not in kw:
            raise ValueError("config needs either 'study' or 'scm'")
        return cls(**kw)


def builtin_study(study_id: str) -> ExperimentConfig:
    study_id = str(study_id)
    if study_id == "1":
        return ExperimentConfig(study1(), name="study1")
    if study_id == "2a":
        return ExperimentConfig(study2(), share_against=CHAIN_ALT, name="study2a")
    if study_id == "2b":
        return ExperimentConfig(study2(), prior=COMPLEXITY, share_against=CHAIN_ALT, name="study2b")
    if study_id == "3":
        return ExperimentConfig(study3(), prior=COMPLEXITY, share_against=COMPLETE_ALT, name="study3")
    raise ValueError(f"unknown study {study_id!r}; choose from 1, 2a, 2b, 3")


@dataclass(frozen=True)
class ReplicateResult:
    n: int
    replicate: int
    class_posterior: float
    true_posterior: float
    share: float | None
    d_n: float | None
    map_dag: str
    wall_time: float = field(default=0.0, compare=False)
    error: str | None = None


def replicate_seed(master_seed: int, n: int, replicate: int, stream: int) -> tuple[int, int, int, int]:
    return (int(master_seed), int(n), int(replicate), stream)


def run_replicate(cfg: ExperimentConfig, n: int, replicate: int) -> ReplicateResult:
    t0 = time.perf_counter()
    try:
        data = sample_dataset(cfg.scm, n, replicate_seed(cfg.master_seed, n, replicate, DATA_STREAM))
        table = dag_posterior(
            data,
            enumerate_dags(cfg.scm.p),
            cfg.coef_prior,
            cfg.prior,
            cfg.mc_samples,
            replicate_seed(cfg.master_seed, n, replicate, EVIDENCE_STREAM),
        )
        target = distribution_equivalence_class(cfg.scm.dag, nongaussian_set(cfg.scm))
        share = None
        if cfg.share_against is not None:
            share = posterior_share(table, cfg.scm.dag, cfg.share_against)
        return ReplicateResult(
            n,
            replicate,
            class_posterior(table, target),
            table.prob(cfg.scm.dag),
            share,
            table.d_n,
            str(table.map_dag()),
            time.perf_counter() - t0,
        )
    except Exception as exc:  # recorded per replicate, never fatal
        nan = math.nan
        return ReplicateResult(n, replicate, nan, nan, None, None, "", time.perf_counter() - t0, repr(exc))


def _task(args):
    cfg, n, r = args
    return run_replicate(cfg, n, r)


@dataclass
class ExperimentResult:
    rows: list[ReplicateResult]
    failures: list[ReplicateResult]
    output_dir: Path | None

    def by_n(self, n: int) -> list[ReplicateResult]:
        return [r for r in self.rows if r.n == n]


def run_experiment(cfg: ExperimentConfig, workers: int = 1, output_dir=None) -> ExperimentResult:
    tasks = [(cfg, n, r) for n in cfg.n_list for r in range(cfg.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    results.sort(key=lambda r: (r.n, r.replicate))
    rows = [r for r in results if r.error is None]
    failures = [r for r in results if r.error is not None]
    out = output_dir or cfg.output_dir
    out_path = None
    if out is not None:
        out_path = Path(out)
        out_path.mkdir(parents=True, exist_ok=True)
        write_outputs(out_path, cfg, rows, failures, results)
    return ExperimentResult(rows, failures, out_path)


def _opt(x) -> str:
    return "" if x is None else io.fmt(x)


REPLICATE_HEADER = ["n", "replicate", "class_posterior", "true_posterior", "share", "d_n", "map_dag"]


def write_outputs(out: Path, cfg: ExperimentConfig, rows, failures, all_results) -> None:
    with open(out / "replicates.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPLICATE_HEADER)
        for r in rows:
            w.writerow([r.n, r.replicate, io.fmt(r.class_posterior), io.fmt(r.true_posterior),
                        _opt(r.share), _opt(r.d_n), r.map_dag])
    with open(out / "failures.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "replicate", "error"])
        for r in failures:
            w.writerow([r.n, r.replicate, r.error])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "n", "count", "mean", "q1", "median", "q3"])
        for row in summarize(cfg, rows):
            w.writerow([row[0], row[1], row[2]] + [io.fmt(v) for v in row[3:]])
    with open(out / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "n", "bin_lo", "bin_hi", "count"])
        for row in histograms(cfg, rows):
            w.writerow(row)
    # wall times vary run to run, so they live apart from the reproducible outputs
    with open(out / "timings.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "replicate", "wall_time"])
        for r in all_results:
            w.writerow([r.n, r.replicate, f"{r.wall_time:.3f}"])
    io.dump_yaml(out / "config.yaml", cfg.to_dict())


QUANTITIES = ("class_posterior", "true_posterior", "share")


def _values(rows, quantity):
    vals = [getattr(r, quantity) for r in rows]
    return np.array([v for v in vals if v is not None], dtype=float)


def summarize(cfg: ExperimentConfig, rows) -> list[tuple]:
    out = []
    for q in QUANTITIES:
        for n in cfg.n_list:
            v = _values([r for r in rows if r.n == n], q)
            if v.size == 0:
                continue
            q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
            out.append((q, n, int(v.size), float(v.mean()), float(q1), float(med), float(q3)))
    return out


def histograms(cfg: ExperimentConfig, rows) -> list[tuple]:
    k = int(round(1.0 / HIST_WIDTH))
    edges = np.linspace(0.0, 1.0, k + 1)
    out = []
    for q in QUANTITIES:
        for n in cfg.n_list:
            v = _values([r for r in rows if r.n == n], q)
            if v.size == 0:
                continue
            counts, _ = np.histogram(np.clip(v, 0.0, 1.0), bins=edges)
            for i, c in enumerate(counts):
                out.append((q, n, f"{edges[i]:.2f}", f"{edges[i + 1]:.2f}", int(c)))
    return out


def load_config(path, scale: str | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig.from_dict(io.load_yaml(path))
    return cfg.scaled(scale) if scale else cfg


def resolve(study: str | None, config_path=None, scale: str | None = None, seed: int | None = None,
            output_dir=None) -> ExperimentConfig:
    if config_path:
        cfg = load_config(config_path)
    elif study:
        cfg = builtin_study(study)
    else:
        raise ValueError("need a study id or a config file")
    if scale:
        cfg = cfg.scaled(scale)
    if seed is not None:
        cfg = replace(cfg, master_seed=int(seed))
    if output_dir is not None:
        cfg = replace(cfg, output_dir=str(output_dir))
    return cfg


def replicate_table(rows: Sequence[ReplicateResult], n: int, quantity: str) -> np.ndarray:
    return _values([r for r in rows if r.n == n], quantity)
