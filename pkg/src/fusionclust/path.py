"""Exact solution path of the univariate l1-fusion clustering criterion.

The criterion penalizes all pairwise absolute differences of the cluster
centroids, which fuses centroids together as the penalty weight grows.  On
sorted univariate data the optimal partitions are nested and contiguous, so
the whole path can be stored as a sequence of adjacent-cluster merges with
their penalty values.

``build_merge_path`` is the fast bottom-up construction.
``split_sequence_oracle`` recovers the same tree top-down by brute force and
exists as an independent cross-check.  ``centroids_at`` reconstructs the
optimal centroid vector for any penalty value from the stored path.
"""

from __future__ import annotations

import gc
import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "SortedSample",
    "MergeEvent",
    "ClusterPath",
    "build_merge_path",
    "split_sequence_oracle",
    "centroids_at",
    "partition_at_k",
]

# Relative slack when checking that merge penalties are non-decreasing.
LAMBDA_MONOTONE_RTOL = 1e-12


@dataclass(frozen=True)
class SortedSample:
    """Sorted univariate observations with duplicate values folded into counts.

    Attributes
    ----------
    values : ndarray
        Strictly increasing distinct observation values.
    counts : ndarray
        Positive multiplicity of each value.
    n : int
        Total number of observations, ``counts.sum()``.
    """

    values: np.ndarray
    counts: np.ndarray
    n: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if values.ndim != 1 or counts.shape != values.shape:
            raise ValueError("values and counts must be 1-d arrays of equal length")
        if values.size == 0:
            raise ValueError("sample must contain at least one observation")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        if values.size > 1 and not np.all(np.diff(values) > 0):
            raise ValueError("values must be strictly increasing")
        if np.any(counts < 1):
            raise ValueError("counts must be positive")
        if int(counts.sum()) != self.n:
            raise ValueError("n must equal counts.sum()")
        values.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_data(cls, data) -> "SortedSample":
        """Sort raw observations and fold duplicates into multiplicities."""
        arr = np.asarray(data, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("sample must contain at least one observation")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        values, counts = np.unique(arr, return_counts=True)
        return cls(values=values, counts=counts.astype(np.int64), n=int(arr.size))

    @property
    def m(self) -> int:
        """Number of distinct values."""
        return int(self.values.size)

    def expanded(self) -> np.ndarray:
        """All observations in sorted order, duplicates repeated."""
        return np.repeat(self.values, self.counts)


class MergeEvent(NamedTuple):
    """One adjacent-cluster merge along the path.

    ``lam`` is the penalty value at which the two centroids collide; it equals
    ``(right_mean - left_mean) / (left_size + right_size)`` exactly.
    ``left_max``/``right_min`` are the closest representatives of the merging
    clusters, ``merged_span`` the value range of the merged cluster, and
    ``boundary`` the index (into the sorted distinct values) of the right
    cluster's first value, i.e. the cluster boundary this merge removes.
    """

    lam: float
    left_size: int
    right_size: int
    left_mean: float
    right_mean: float
    left_max: float
    right_min: float
    merged_span: tuple[float, float]
    boundary: int

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "left_size": self.left_size,
            "right_size": self.right_size,
            "left_mean": self.left_mean,
            "right_mean": self.right_mean,
            "left_max": self.left_max,
            "right_min": self.right_min,
            "merged_span": list(self.merged_span),
            "boundary": self.boundary,
        }


class ClusterPath:
    """Full merge path of a sample: ``m - 1`` events in chronological order.

    Immutable after construction and safe to share across threads.
    Construction verifies that the penalty sequence is non-decreasing and that
    the events remove every cluster boundary exactly once (so replaying them
    from singletons ends with a single all-inclusive cluster).

    Event records are stored as flat arrays and materialized into
    :class:`MergeEvent` tuples on first access of :attr:`events`.
    """

    __slots__ = ("sample", "_events", "_arrays", "_lams", "_boundaries")

    def __init__(self, sample: SortedSample, events=None, *, arrays=None):
        if not isinstance(sample, SortedSample):
            raise TypeError("sample must be a SortedSample")
        if (events is None) == (arrays is None):
            raise ValueError("provide either events or arrays")
        self.sample = sample
        if events is not None:
            self._events = tuple(events)
            self._arrays = None
            lams = np.array([e.lam for e in self._events], dtype=float)
            bnds = np.array([e.boundary for e in self._events], dtype=np.int64)
            n_ev = len(self._events)
        else:
            self._events = None
            self._arrays = arrays
            lams, bnds = arrays[0], arrays[9]
            n_ev = lams.size
        m = sample.m
        if n_ev != m - 1:
            raise ValueError(f"expected {m - 1} events, got {n_ev}")
        if lams.size:
            prev = lams[:-1]
            if np.any(lams[1:] < prev - LAMBDA_MONOTONE_RTOL * np.abs(prev)):
                raise ValueError("merge penalties must be non-decreasing along the path")
            counts = np.bincount(bnds, minlength=m)
            if counts[0] != 0 or np.any(counts[1:] != 1):
                raise ValueError("events must remove each cluster boundary exactly once")
        self._lams = lams
        self._boundaries = bnds

    @property
    def events(self) -> tuple[MergeEvent, ...]:
        if self._events is None:
            lam, lsz, rsz, lmean, rmean, lmax, rmin, span_lo, span_hi, bnd = self._arrays
            values = self.sample.values
            gc_was = gc.isenabled()
            gc.disable()  # bulk tuple allocation; avoid growth-triggered sweeps
            try:
                spans = list(zip(values[span_lo].tolist(), values[span_hi].tolist()))
                self._events = tuple(map(MergeEvent._make, zip(
                    lam.tolist(), lsz.tolist(), rsz.tolist(), lmean.tolist(),
                    rmean.tolist(), lmax.tolist(), rmin.tolist(), spans,
                    bnd.tolist(),
                )))
            finally:
                if gc_was:
                    gc.enable()
        return self._events

    def event(self, i: int) -> MergeEvent:
        """The i-th merge without materializing the whole event tuple."""
        if self._events is not None:
            return self._events[i]
        lam, lsz, rsz, lmean, rmean, lmax, rmin, span_lo, span_hi, bnd = self._arrays
        values = self.sample.values
        return MergeEvent(
            lam=float(lam[i]),
            left_size=int(lsz[i]),
            right_size=int(rsz[i]),
            left_mean=float(lmean[i]),
            right_mean=float(rmean[i]),
            left_max=float(lmax[i]),
            right_min=float(rmin[i]),
            merged_span=(float(values[span_lo[i]]), float(values[span_hi[i]])),
            boundary=int(bnd[i]),
        )

    def pair_sizes(self) -> tuple[np.ndarray, np.ndarray]:
        """(left, right) cluster sizes of every merge, as arrays."""
        if self._arrays is not None:
            return self._arrays[1].copy(), self._arrays[2].copy()
        lsz = np.array([e.left_size for e in self._events], dtype=np.int64)
        rsz = np.array([e.right_size for e in self._events], dtype=np.int64)
        return lsz, rsz

    def __len__(self) -> int:
        return self._lams.size

    def __repr__(self) -> str:
        return f"ClusterPath(n={self.sample.n}, merges={self._lams.size})"

    def lambdas(self) -> np.ndarray:
        """Merge penalty values in chronological order."""
        return self._lams.copy()


try:
    from ._mergecore import MAX_JIT_SLOTS as _MAX_JIT_SLOTS
    from ._mergecore import merge_core as _merge_core
except ImportError:  # pragma: no cover - numba missing
    _merge_core = None
    _MAX_JIT_SLOTS = 0


def _merge_core_py(vals, counts):
    """Pure-python fallback for the merge loop; same arithmetic, same order."""
    m = len(vals)
    out = []
    if m <= 1:
        return out
    vals = vals.tolist()
    sums = [v * c for v, c in zip(vals, counts.tolist())]
    cnts = counts.tolist()
    lo = list(range(m))
    hi = list(range(m))
    nxt = list(range(1, m)) + [-1]
    prv = [-1] + list(range(m - 1))
    stamp = [0] * m
    alive = [True] * m
    heap = [
        ((sums[j + 1] / cnts[j + 1] - sums[j] / cnts[j]) / (cnts[j] + cnts[j + 1]), j, 0)
        for j in range(m - 1)
    ]
    heapq.heapify(heap)
    push, pop = heapq.heappush, heapq.heappop
    nstamp = 0
    while len(out) < m - 1:
        d, a, st = pop(heap)
        if st != stamp[a] or not alive[a]:
            continue
        b = nxt[a]
        sa, ca, sb, cb = sums[a], cnts[a], sums[b], cnts[b]
        out.append((d, ca, cb, sa / ca, sb / cb, vals[hi[a]], vals[lo[b]], lo[a], hi[b], lo[b]))
        sa += sb
        ca += cb
        sums[a], cnts[a] = sa, ca
        hi[a] = hi[b]
        alive[b] = False
        nb = nxt[b]
        nxt[a] = nb
        nstamp += 1
        stamp[a] = nstamp
        if nb != -1:
            prv[nb] = a
            push(heap, ((sums[nb] / cnts[nb] - sa / ca) / (ca + cnts[nb]), a, nstamp))
        pa = prv[a]
        if pa != -1:
            nstamp += 1
            stamp[pa] = nstamp
            push(heap, ((sa / ca - sums[pa] / cnts[pa]) / (cnts[pa] + ca), pa, nstamp))
    return out


def build_merge_path(sample: SortedSample) -> ClusterPath:
    """Compute the merge path bottom-up.

    Starting from one cluster per distinct value, repeatedly merges the
    adjacent pair with the smallest size-standardized centroid distance
    ``(right_mean - left_mean) / (left_size + right_size)`` and records that
    distance as the merge penalty.  Ties are broken toward the leftmost pair.
    Runs in O(n log n) via a priority queue with lazy invalidation of stale
    entries; cluster means are maintained as (sum, count) pairs.
    """
    if not isinstance(sample, SortedSample):
        raise TypeError("sample must be a SortedSample")
    if _merge_core is not None and sample.m < _MAX_JIT_SLOTS:
        arrays = _merge_core(sample.values, sample.counts)
    else:
        rows = _merge_core_py(sample.values, sample.counts)
        cols = list(zip(*rows)) if rows else [()] * 10
        dtypes = (float, np.int64, np.int64, float, float, float, float,
                  np.int64, np.int64, np.int64)
        arrays = tuple(np.asarray(c, dtype=dt) for c, dt in zip(cols, dtypes))
    return ClusterPath(sample, arrays=arrays)


def split_sequence_oracle(sample: SortedSample) -> ClusterPath:
    """Recover the path top-down by exhaustive search; O(n^2) reference oracle.

    Starting from the whole sample, each cluster of size > 1 is split at the
    position maximizing the gap between the two sub-cluster means, with
    penalty value ``gap / cluster_size``.  The collected splits, reordered by
    ascending penalty, reproduce the merge path.  Sub-cluster means used for
    the recorded events are accumulated bottom-up over the induced tree so
    that the reported values are bit-identical to the merge algorithm's.
    """
    if not isinstance(sample, SortedSample):
        raise TypeError("sample must be a SortedSample")
    values = sample.values
    counts = sample.counts.astype(np.int64)
    m = values.size
    if m == 1:
        return ClusterPath(sample=sample, events=())

    # prefix sums drive the argmax decisions only
    csum = np.concatenate(([0.0], np.cumsum(values * counts)))
    ccnt = np.concatenate(([0], np.cumsum(counts)))

    events = []

    def recurse(i: int, j: int):
        """Split values[i:j]; returns the cluster's (sum, count) built bottom-up."""
        if j - i == 1:
            return float(values[i] * counts[i]), int(counts[i])
        gaps = np.empty(j - i - 1)
        for t in range(i + 1, j):
            left_mean = (csum[t] - csum[i]) / (ccnt[t] - ccnt[i])
            right_mean = (csum[j] - csum[t]) / (ccnt[j] - ccnt[t])
            gaps[t - i - 1] = right_mean - left_mean
        t = i + 1 + int(np.argmax(gaps))
        ls, lc = recurse(i, t)
        rs, rc = recurse(t, j)
        lam = (rs / rc - ls / lc) / (lc + rc)
        events.append(
            MergeEvent(
                lam=lam,
                left_size=lc,
                right_size=rc,
                left_mean=ls / lc,
                right_mean=rs / rc,
                left_max=float(values[t - 1]),
                right_min=float(values[t]),
                merged_span=(float(values[i]), float(values[j - 1])),
                boundary=t,
            )
        )
        return ls + rs, lc + rc

    recurse(0, m)
    events.sort(key=lambda e: e.lam)
    return ClusterPath(sample=sample, events=tuple(events))


def _active_boundaries(path: ClusterPath, applied: int) -> np.ndarray:
    """Cluster boundaries remaining after the first ``applied`` merges."""
    removed = path._boundaries[:applied]
    keep = np.ones(path.sample.m + 1, dtype=bool)
    keep[removed] = False
    keep[0] = keep[path.sample.m] = True
    return np.nonzero(keep)[0]


def centroids_at(path: ClusterPath, lam: float, *, applied: int | None = None) -> np.ndarray:
    """Optimal centroid vector at penalty ``lam``, one entry per observation.

    The partition in force is the one after all merges with penalty <= ``lam``
    (override with ``applied`` to force a specific number of merges).  Within
    that partition each cluster's centroid is its mean shifted by ``lam``
    times the difference between the observation counts above and below it.
    At ``lam = 0`` this returns the data itself.
    """
    if lam < 0:
        raise ValueError("penalty value must be nonnegative")
    if applied is None:
        applied = int(np.searchsorted(path._lams, lam, side="right"))
    elif not 0 <= applied <= len(path):
        raise ValueError("applied out of range")
    sample = path.sample
    edges = _active_boundaries(path, applied)
    ccnt = np.concatenate(([0], np.cumsum(sample.counts)))
    csizes = ccnt[edges[1:]] - ccnt[edges[:-1]]
    n = sample.n
    below = ccnt[edges[:-1]]
    above = n - ccnt[edges[1:]]
    means = np.empty(len(csizes))
    for k in range(len(csizes)):
        i, j = edges[k], edges[k + 1]
        if j - i == 1:
            means[k] = sample.values[i]
        else:
            means[k] = math.fsum(
                (sample.values[t] * sample.counts[t] for t in range(i, j))
            ) / csizes[k]
    cents = means + lam * (above - below)
    return np.repeat(cents, csizes)


def partition_at_k(path: ClusterPath, k: int) -> list[tuple[int, int]]:
    """Contiguous observation index ranges of the k-cluster partition.

    Applies the first ``m - k`` merges and returns ``k`` half-open
    ``(start, stop)`` ranges over the sorted observations.  ``k`` may range
    from 1 to the number of distinct values.
    """
    m = path.sample.m
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= m:
        raise ValueError(f"k must be an integer in [1, {m}]")
    edges = _active_boundaries(path, m - k)
    ccnt = np.concatenate(([0], np.cumsum(path.sample.counts)))
    return [(int(ccnt[edges[i]]), int(ccnt[edges[i + 1]])) for i in range(len(edges) - 1)]
