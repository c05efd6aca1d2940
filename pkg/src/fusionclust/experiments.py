"""Seeded replication harness over the clustering pipeline.

Every replicate draws its sample from a stream seed mixed deterministically
out of (base_seed, replicate index), so results are reproducible and
independent of execution order or parallelism.  Summaries aggregate detected
cluster counts, multimodality rates, and mean squared distances to cluster
centers, with a population-level oracle partition for reference.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bmt import BmtConfig, run_bmt, run_bmt_multivariate
from .mixtures import MixtureModel
from .path import SortedSample, build_merge_path
from .population import find_population_split

__all__ = [
    "ExperimentSpec",
    "ReplicationSummary",
    "replicate_seed",
    "run_modality_experiment",
    "run_k_experiment",
    "run_scale_experiment",
    "oracle_partition_mse",
    "hausdorff_distance",
    "run_consistency_check",
]

_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    """splitmix64 finalizer; stable across platforms and versions."""
    z &= _MASK64
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replicate_seed(base_seed: int, replicate: int) -> int:
    """64-bit stream seed for one replicate; depends only on its arguments."""
    return _mix64(_mix64(base_seed) ^ (replicate + 0x0123456789ABCDEF))


def column_seed(rep_seed: int, column: int) -> int:
    """Per-dimension sub-seed for multivariate sampling."""
    return _mix64(rep_seed + 0x9E3779B97F4A7C15 * (column + 1))


@dataclass(frozen=True)
class ExperimentSpec:
    """One simulation scenario.

    ``mixture`` is a MixtureModel, or a sequence of them for a product
    density sampled independently per dimension.
    """

    mixture: object
    n: int
    replicates: int
    alpha: float = 0.1
    base_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        mix = self.mixture
        if isinstance(mix, MixtureModel):
            return
        mix = tuple(mix)
        if not mix or not all(isinstance(m, MixtureModel) for m in mix):
            raise TypeError("mixture must be a MixtureModel or a sequence of them")
        object.__setattr__(self, "mixture", mix)

    @property
    def config(self) -> BmtConfig:
        return BmtConfig(alpha=self.alpha)

    @property
    def columns(self) -> tuple[MixtureModel, ...]:
        mix = self.mixture
        return (mix,) if isinstance(mix, MixtureModel) else mix


@dataclass(frozen=True)
class ReplicationSummary:
    k_histogram: dict[int, int]
    multimodal_rate: float
    mse_mean: float | None = None
    mse_sd: float | None = None
    oracle_mse: float | None = None
    mean_runtime_seconds: float = 0.0
    replicates: int = 0

    def __post_init__(self):
        if sum(self.k_histogram.values()) != self.replicates:
            raise ValueError("histogram must account for every replicate")

    def modal_k(self) -> int:
        return max(sorted(self.k_histogram), key=lambda k: self.k_histogram[k])

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "k_histogram": {str(k): v for k, v in sorted(self.k_histogram.items())},
            "multimodal_rate": self.multimodal_rate,
            "mse_mean": self.mse_mean,
            "mse_sd": self.mse_sd,
            "oracle_mse": self.oracle_mse,
            "mean_runtime_seconds": self.mean_runtime_seconds,
        }


def sample_replicate(spec: ExperimentSpec, replicate: int) -> np.ndarray:
    """The replicate's n x p sample matrix, seeded from (base_seed, replicate)."""
    rep_seed = replicate_seed(spec.base_seed, replicate)
    cols = spec.columns
    if len(cols) == 1:
        return cols[0].sample(spec.n, rep_seed)[:, None]
    return np.column_stack(
        [m.sample(spec.n, column_seed(rep_seed, j)) for j, m in enumerate(cols)]
    )


def _jobs_from_env() -> int:
    raw = os.environ.get("FUSIONCLUST_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _replicate_k(args):
    spec, r = args
    t0 = time.perf_counter()
    data = sample_replicate(spec, r)
    if data.shape[1] == 1:
        res = run_bmt(SortedSample.from_data(data[:, 0]), spec.config)
        k = res.num_clusters
    else:
        k = run_bmt_multivariate(data, spec.config).num_clusters
    return k, time.perf_counter() - t0


def _run_counts(spec: ExperimentSpec, n_jobs: int | None):
    if n_jobs is None:
        n_jobs = _jobs_from_env()
    jobs = [(spec, r) for r in range(spec.replicates)]
    if n_jobs > 1 and spec.replicates > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_replicate_k, jobs))
    else:
        results = [_replicate_k(j) for j in jobs]
    ks = [k for k, _ in results]
    times = [t for _, t in results]
    hist = {}
    for k in ks:
        hist[k] = hist.get(k, 0) + 1
    return ks, hist, float(np.mean(times))


def run_modality_experiment(spec: ExperimentSpec, *,
                            n_jobs: int | None = None) -> ReplicationSummary:
    """Fraction of replicates in which at least one split survives."""
    ks, hist, mean_t = _run_counts(spec, n_jobs)
    rate = float(np.mean([k > 1 for k in ks]))
    return ReplicationSummary(
        k_histogram=hist,
        multimodal_rate=rate,
        mean_runtime_seconds=mean_t,
        replicates=spec.replicates,
    )


def run_k_experiment(spec: ExperimentSpec, *,
                     n_jobs: int | None = None) -> ReplicationSummary:
    """Distribution of the detected number of clusters across replicates."""
    return run_modality_experiment(spec, n_jobs=n_jobs)


def oracle_partition_mse(model: MixtureModel) -> tuple[float, list[float]]:
    """Population MSE of the partition cut at the density's interior minima.

    Cluster centers are the population conditional means of each piece; the
    value integrates the squared distance to the assigned center over the
    whole density (quadrature per piece).  Returns (mse, boundaries).
    """
    minima = model.density_minima()
    slo, shi = model.support()
    bounds = [slo] + minima + [shi]
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        center = model.truncated_mean(lo, hi)
        val, _ = integrate.quad(
            lambda x: (x - center) ** 2 * model.pdf(x), lo, hi,
            epsabs=1e-10, epsrel=1e-10, limit=400,
        )
        total += val
    return total, minima


def _replicate_scale(args):
    spec, r = args
    t0 = time.perf_counter()
    x = sample_replicate(spec, r)[:, 0]
    res = run_bmt(SortedSample.from_data(x), spec.config)
    labels = np.searchsorted(np.asarray(res.split_points), x, side="right")
    mse = 0.0
    for c in range(res.num_clusters):
        xs = x[labels == c]
        if xs.size:
            mse += float(((xs - xs.mean()) ** 2).sum())
    return res.num_clusters, mse / x.size, time.perf_counter() - t0


def run_scale_experiment(spec: ExperimentSpec, *,
                         n_jobs: int | None = None) -> ReplicationSummary:
    """Clustering MSE across replicates, with the population-oracle reference.

    The per-replicate MSE is the mean squared distance of each observation to
    its assigned cluster's sample mean.  The reported mean and SD cover the
    replicates that detected the true cluster count (one more than the number
    of interior density minima), matching how the reference partition is
    defined; the histogram covers all replicates.
    """
    if len(spec.columns) != 1:
        raise ValueError("scale experiment is univariate")
    model = spec.columns[0]
    oracle, minima = oracle_partition_mse(model)
    true_k = len(minima) + 1
    if n_jobs is None:
        n_jobs = _jobs_from_env()
    jobs = [(spec, r) for r in range(spec.replicates)]
    if n_jobs > 1 and spec.replicates > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_replicate_scale, jobs))
    else:
        results = [_replicate_scale(j) for j in jobs]
    hist = {}
    for k, _, _ in results:
        hist[k] = hist.get(k, 0) + 1
    matched = [m for k, m, _ in results if k == true_k]
    mse_mean = float(np.mean(matched)) if matched else None
    mse_sd = float(np.std(matched, ddof=1)) if len(matched) > 1 else None
    return ReplicationSummary(
        k_histogram=hist,
        multimodal_rate=float(np.mean([k > 1 for k, _, _ in results])),
        mse_mean=mse_mean,
        mse_sd=mse_sd,
        oracle_mse=float(oracle),
        mean_runtime_seconds=float(np.mean([t for _, _, t in results])),
        replicates=spec.replicates,
    )


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two nonempty point sets under the max norm.

    Points may be scalars or equal-length tuples.
    """
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    if pa.size == 0 or pb.size == 0:
        raise ValueError("both point sets must be nonempty")
    if pa.ndim == 1:
        pa = pa[:, None]
    if pb.ndim == 1:
        pb = pb[:, None]
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("point sets must share a dimension")
    diffs = np.max(np.abs(pa[:, None, :] - pb[None, :, :]), axis=2)
    return float(max(diffs.min(axis=1).max(), diffs.min(axis=0).max()))


def run_consistency_check(model: MixtureModel, n_list, reps: int,
                          base_seed: int, *, alpha: float = 0.1) -> dict:
    """Median distance of retained splits to the population split, per size.

    For each sample size the BMT splits of ``reps`` replicates are compared
    against the population split point via the Hausdorff distance (infinite
    when a replicate retains no split).  Returns the medians plus a flag for
    whether they are non-increasing in n.  When the model has no population
    split the check is skipped with an explicit status.
    """
    pop = find_population_split(model)
    if not pop.found:
        return {"status": "no-population-split", "rows": [], "monotone": None}
    target = [pop.split_point]
    rows = []
    for n in n_list:
        spec = ExperimentSpec(mixture=model, n=int(n), replicates=reps,
                              alpha=alpha, base_seed=base_seed)
        dists = []
        for r in range(reps):
            x = sample_replicate(spec, r)[:, 0]
            res = run_bmt(SortedSample.from_data(x), spec.config)
            if res.split_points:
                dists.append(hausdorff_distance(list(res.split_points), target))
            else:
                dists.append(math.inf)
        rows.append({"n": int(n), "median_error": float(np.median(dists))})
    meds = [r["median_error"] for r in rows]
    monotone = all(b <= a + 1e-12 for a, b in zip(meds[:-1], meds[1:]))
    return {"status": "ok", "rows": rows, "monotone": monotone}


def path_build_seconds(n: int, seed: int = 0, repeats: int = 3) -> float:
    """Median wall-clock seconds to build the path of a uniform sample.

    Times the whole construction from raw data, sorting included, since
    sorting is the algorithm's own first step.
    """
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    build_merge_path(SortedSample.from_data(x))  # warm-up (jit compile, caches)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        build_merge_path(SortedSample.from_data(x))
        times.append(time.perf_counter() - t0)
    return float(np.median(times))
