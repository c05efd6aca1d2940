"""Big-merge post-processing of the fusion solution path.

The raw path contains n - 1 merges, most of which glue negligible boundary
clusters onto large ones.  Post-processing keeps only the merges where both
clusters hold an appreciable share of the sample, places a split point
between their closest representatives, and reads the surviving split points
as the final clustering.  A safeguard drops everything when even the
highest-penalty surviving merge covers less than half the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .path import ClusterPath, MergeEvent, SortedSample, build_merge_path

__all__ = [
    "BmtConfig",
    "BigMerge",
    "BmtResult",
    "MultivariateBmtResult",
    "run_bmt",
    "assign_labels",
    "run_bmt_multivariate",
    "assess_modality",
]


@dataclass(frozen=True)
class BmtConfig:
    """Post-processing parameters.

    alpha is the minimum sample share of each merging cluster, in (0, 0.5].
    adjustment_enabled controls the 50%-mass safeguard on the last big merge.
    """

    alpha: float = 0.1
    adjustment_enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError("alpha must lie in (0, 0.5]")

    def min_cluster_size(self, n: int) -> int:
        """Both merging clusters must strictly exceed this count."""
        # guard against 1000 * 0.1 -> 100.00000000000001 style float fuzz
        return math.ceil(n * self.alpha - 1e-9)


@dataclass(frozen=True)
class BigMerge:
    """A merge whose two clusters both pass the size threshold."""

    event: MergeEvent
    mass_after: float
    split_point: float


@dataclass(frozen=True)
class BmtResult:
    split_points: tuple[float, ...]
    num_clusters: int
    big_merges: tuple[BigMerge, ...]
    adjustment_applied: bool = False

    def to_dict(self) -> dict:
        return {
            "split_points": list(self.split_points),
            "num_clusters": self.num_clusters,
            "adjustment_applied": self.adjustment_applied,
            "big_merges": [
                {
                    "lambda": b.event.lam,
                    "left_size": b.event.left_size,
                    "right_size": b.event.right_size,
                    "mass_after": b.mass_after,
                    "split_point": b.split_point,
                }
                for b in self.big_merges
            ],
        }


def run_bmt(sample: SortedSample, config: BmtConfig = BmtConfig(), *,
            path: ClusterPath | None = None) -> BmtResult:
    """Build the merge path and keep only its big merges.

    A merge qualifies when both clusters strictly exceed ``ceil(n * alpha)``
    observations.  Its split point is the size-weighted combination of the two
    closest representatives, which always falls strictly between two adjacent
    sample values.  If the safeguard is enabled and the qualifying merge with
    the largest penalty covers less than 50% of the sample, every split is
    discarded.

    ``path`` may supply a precomputed ClusterPath for the same sample.
    """
    if not isinstance(sample, SortedSample):
        raise TypeError("sample must be a SortedSample")
    if not isinstance(config, BmtConfig):
        raise TypeError("config must be a BmtConfig")
    if path is None:
        path = build_merge_path(sample)
    elif path.sample is not sample:
        raise ValueError("path was built for a different sample")
    n = sample.n
    threshold = config.min_cluster_size(n)
    left_sizes, right_sizes = path.pair_sizes()
    big = []
    for i in np.nonzero(np.minimum(left_sizes, right_sizes) > threshold)[0]:
        ev = path.event(int(i))
        total = ev.left_size + ev.right_size
        split = (ev.left_max * ev.left_size + ev.right_min * ev.right_size) / total
        big.append(BigMerge(event=ev, mass_after=total / n, split_point=split))
    adjusted = False
    if config.adjustment_enabled and big and big[-1].mass_after < 0.5:
        big = []
        adjusted = True
    points = tuple(sorted(b.split_point for b in big))
    return BmtResult(
        split_points=points,
        num_clusters=len(points) + 1,
        big_merges=tuple(big),
        adjustment_applied=adjusted,
    )


def assign_labels(sample: SortedSample, splits) -> np.ndarray:
    """0-based cluster label per sorted observation.

    An observation's label counts the split points at or below it, so a value
    equal to a split point joins the cluster on the right.
    """
    splits = np.asarray(splits, dtype=float)
    if splits.ndim != 1:
        raise ValueError("splits must be a 1-d sequence")
    if splits.size > 1 and not np.all(np.diff(splits) > 0):
        raise ValueError("splits must be strictly increasing")
    return np.searchsorted(splits, sample.expanded(), side="right")


@dataclass(frozen=True)
class MultivariateBmtResult:
    """Independent per-column runs combined by labeling rows with tuples."""

    per_dimension: tuple[BmtResult, ...]
    labels: tuple[tuple[int, ...], ...]
    num_clusters: int

    def to_dict(self) -> dict:
        return {
            "num_clusters": self.num_clusters,
            "per_dimension": [r.to_dict() for r in self.per_dimension],
            "labels": [list(t) for t in self.labels],
        }


def run_bmt_multivariate(data, config: BmtConfig = BmtConfig()) -> MultivariateBmtResult:
    """Run the post-processed path on each column of an n x p matrix.

    The criterion separates across dimensions, so each column is clustered on
    its own.  A row's joint label is the tuple of its per-column labels, and
    the joint cluster count is the product of the per-column counts.  Labels
    are reported in the original row order.
    """
    mat = np.asarray(data, dtype=float)
    if mat.ndim == 1:
        mat = mat[:, None]
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError("data must be a nonempty n x p matrix")
    if not np.all(np.isfinite(mat)):
        raise ValueError("data entries must be finite")
    results = []
    cols = []
    for j in range(mat.shape[1]):
        col = mat[:, j]
        res = run_bmt(SortedSample.from_data(col), config)
        results.append(res)
        cols.append(np.searchsorted(np.asarray(res.split_points), col, side="right"))
    label_mat = np.stack(cols, axis=1)
    k = 1
    for res in results:
        k *= res.num_clusters
    return MultivariateBmtResult(
        per_dimension=tuple(results),
        labels=tuple(tuple(int(v) for v in row) for row in label_mat),
        num_clusters=k,
    )


def assess_modality(sample: SortedSample, config: BmtConfig = BmtConfig()) -> bool:
    """True when the post-processed path retains at least one split."""
    return run_bmt(sample, config).num_clusters > 1
