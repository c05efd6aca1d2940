
import numpy as np
import pytest

from fusionclust import (
    ClusterPath,
    MergeEvent,
    SortedSample,
    build_merge_path,
    centroids_at,
    partition_at_k,
    split_sequence_oracle,
)
from fusionclust.path import _merge_core_py


def brute_force_path(x):
    """Literal restatement of the merging procedure, O(n^2)."""
    values, counts = np.unique(np.asarray(x, dtype=float), return_counts=True)
    sums = [float(v * c) for v, c in zip(values, counts)]
    cnts = [int(c) for c in counts]
    los = list(range(len(values)))
    his = list(range(len(values)))
    events = []
    while len(cnts) > 1:
        ds = [
            (sums[j + 1] / cnts[j + 1] - sums[j] / cnts[j]) / (cnts[j] + cnts[j + 1])
            for j in range(len(cnts) - 1)
        ]
        j = int(np.argmin(ds))  # first minimum: smallest-index tie-break
        events.append(
            (ds[j], cnts[j], cnts[j + 1], sums[j] / cnts[j], sums[j + 1] / cnts[j + 1],
             float(values[his[j]]), float(values[los[j + 1]]), los[j + 1])
        )
        sums[j] += sums[j + 1]
        cnts[j] += cnts[j + 1]
        his[j] = his[j + 1]
        del sums[j + 1], cnts[j + 1], los[j + 1], his[j + 1]
    return events


def random_sample(rng, max_n=120):
    n = int(rng.integers(1, max_n))
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return rng.normal(0, 1, n)
    if kind == 1:
        return np.concatenate([rng.normal(-3, 1, n), rng.normal(3, 1, n)])
    if kind == 2:
        return rng.uniform(-5, 5, n)
    return rng.integers(0, 10, n).astype(float)  # duplicates and ties


class TestSortedSample:
    def test_from_data_folds_duplicates(self):
        s = SortedSample.from_data([3.0, 1.0, 3.0, 2.0, 3.0])
        assert s.values.tolist() == [1.0, 2.0, 3.0]
        assert s.counts.tolist() == [1, 1, 3]
        assert s.n == 5

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            SortedSample.from_data([])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SortedSample.from_data([1.0, np.nan])
        with pytest.raises(ValueError):
            SortedSample.from_data([1.0, np.inf])

    def test_rejects_unsorted_values(self):
        with pytest.raises(ValueError):
            SortedSample(values=np.array([2.0, 1.0]), counts=np.array([1, 1]), n=2)

    def test_rejects_wrong_n(self):
        with pytest.raises(ValueError):
            SortedSample(values=np.array([1.0, 2.0]), counts=np.array([1, 2]), n=2)


class TestBuildMergePath:
    def test_three_point_example(self):
        path = build_merge_path(SortedSample.from_data([0.0, 1.0, 3.0]))
        assert len(path.events) == 2
        first, second = path.events
        assert first.lam == pytest.approx(0.5, abs=0)
        assert (first.left_size, first.right_size) == (1, 1)
        assert first.merged_span == (0.0, 1.0)
        assert second.lam == pytest.approx(2.5 / 3)
        assert (second.left_mean, second.right_mean) == (0.5, 3.0)
        assert (second.left_max, second.right_min) == (1.0, 3.0)
        assert second.merged_span == (0.0, 3.0)

    def test_single_point(self):
        path = build_merge_path(SortedSample.from_data([4.2]))
        assert path.events == ()

    def test_two_points(self):
        path = build_merge_path(SortedSample.from_data([-1.0, 1.0]))
        assert len(path.events) == 1
        assert path.events[0].lam == 1.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1234)
        for _ in range(200):
            x = random_sample(rng)
            path = build_merge_path(SortedSample.from_data(x))
            got = [
                (e.lam, e.left_size, e.right_size, e.left_mean, e.right_mean,
                 e.left_max, e.right_min, e.boundary)
                for e in path.events
            ]
            assert got == brute_force_path(x)

    def test_python_fallback_matches_jit(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            x = random_sample(rng)
            s = SortedSample.from_data(x)
            rows = _merge_core_py(s.values, s.counts)
            path = build_merge_path(s)
            got = [
                (e.lam, e.left_size, e.right_size, e.left_mean, e.right_mean,
                 e.left_max, e.right_min)
                for e in path.events
            ]
            assert got == [r[:7] for r in rows]

    def test_lambda_monotone_large_samples(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = rng.normal(0, 1, 1000) * rng.uniform(0.5, 4)
            lams = build_merge_path(SortedSample.from_data(x)).lambdas()
            assert np.all(np.diff(lams) >= -1e-12 * np.abs(lams[:-1]))

    def test_mean_conservation_along_path(self):
        rng = np.random.default_rng(6)
        x = rng.normal(0, 2, 400)
        s = SortedSample.from_data(x)
        path = build_merge_path(s)
        grand = x.mean()
        # replay: size-weighted mean of cluster means stays the grand mean
        sums = dict(enumerate(s.values * s.counts))
        cnts = dict(enumerate(s.counts.tolist()))
        owner = list(range(s.m))
        for e in path.events:
            b = e.boundary
            left = owner[b - 1]
            right = owner[b]
            sums[left] += sums.pop(right)
            cnts[left] += cnts.pop(right)
            for i in range(b, s.m):
                if owner[i] == right:
                    owner[i] = left
                else:
                    break
            weighted = sum(sums.values()) / s.n
            assert weighted == pytest.approx(grand, rel=1e-10)


class TestSplitOracle:
    def test_three_point_first_split(self):
        # the split {0,1}|{3} (gap 2.5) beats {0}|{1,3} (gap 2.0)
        path = split_sequence_oracle(SortedSample.from_data([0.0, 1.0, 3.0]))
        top = path.events[-1]
        assert top.boundary == 2
        assert top.lam == pytest.approx(2.5 / 3)

    def test_two_points(self):
        path = split_sequence_oracle(SortedSample.from_data([-1.0, 1.0]))
        assert [e.lam for e in path.events] == [1.0]

    def test_matches_merge_path_exactly(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            n = int(rng.integers(1, 13))
            x = rng.normal(0, 1, n)
            s = SortedSample.from_data(x)
            assert split_sequence_oracle(s).events == build_merge_path(s).events


class TestCentroids:
    def test_examples(self):
        path = build_merge_path(SortedSample.from_data([0.0, 1.0, 3.0]))
        assert centroids_at(path, 0.2).tolist() == [0.4, 1.0, 2.6]
        assert centroids_at(path, 0.5).tolist() == [1.0, 1.0, 2.0]

    def test_zero_recovers_data(self):
        rng = np.random.default_rng(3)
        x = np.sort(rng.normal(0, 1, 50))
        path = build_merge_path(SortedSample.from_data(x))
        assert centroids_at(path, 0.0).tolist() == x.tolist()

    def test_negative_lambda_rejected(self):
        path = build_merge_path(SortedSample.from_data([0.0, 1.0]))
        with pytest.raises(ValueError):
            centroids_at(path, -0.1)

    def test_collision_at_merge_values(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            x = rng.normal(0, 1, int(rng.integers(2, 40)))
            s = SortedSample.from_data(x)
            path = build_merge_path(s)
            ccnt = np.concatenate(([0], np.cumsum(s.counts)))
            for k, e in enumerate(path.events):
                cents = centroids_at(path, e.lam, applied=k)
                # the two merging clusters collide exactly at this penalty
                left_rep = cents[ccnt[e.boundary] - 1]
                right_rep = cents[ccnt[e.boundary]]
                assert abs(left_rep - right_rep) <= 1e-9
                # just below, they are still separated
                lam_eps = e.lam * (1 - 1e-7)
                cents_before = centroids_at(path, lam_eps, applied=k)
                assert cents_before[ccnt[e.boundary] - 1] < cents_before[ccnt[e.boundary]]

    def test_order_preserved_for_any_lambda(self):
        rng = np.random.default_rng(8)
        x = rng.normal(0, 1, 60)
        path = build_merge_path(SortedSample.from_data(x))
        for lam in [0.0, 1e-4, 0.01, 0.1, 1.0, 10.0]:
            cents = centroids_at(path, lam)
            assert np.all(np.diff(cents) >= 0)


class TestPartitionAtK:
    def test_extremes(self):
        x = [0.0, 1.0, 3.0, 7.0]
        path = build_merge_path(SortedSample.from_data(x))
        assert partition_at_k(path, 4) == [(0, 1), (1, 2), (2, 3), (3, 4)]
        assert partition_at_k(path, 1) == [(0, 4)]

    def test_three_point_k2(self):
        path = build_merge_path(SortedSample.from_data([0.0, 1.0, 3.0]))
        assert partition_at_k(path, 2) == [(0, 2), (2, 3)]

    def test_out_of_range(self):
        path = build_merge_path(SortedSample.from_data([0.0, 1.0, 3.0]))
        for bad in (0, 4, -1):
            with pytest.raises(ValueError):
                partition_at_k(path, bad)

    def test_counts_duplicates(self):
        path = build_merge_path(SortedSample.from_data([0.0, 0.0, 5.0]))
        assert partition_at_k(path, 2) == [(0, 2), (2, 3)]


class TestClusterPathValidation:
    def test_rejects_decreasing_lambdas(self):
        s = SortedSample.from_data([0.0, 1.0, 3.0])
        good = build_merge_path(s)
        e0, e1 = good.events
        bad0 = MergeEvent(lam=1.0, left_size=e0.left_size, right_size=e0.right_size,
                          left_mean=e0.left_mean, right_mean=e0.right_mean,
                          left_max=e0.left_max, right_min=e0.right_min,
                          merged_span=e0.merged_span, boundary=e0.boundary)
        with pytest.raises(ValueError):
            ClusterPath(sample=s, events=(bad0, e1))

    def test_rejects_wrong_event_count(self):
        s = SortedSample.from_data([0.0, 1.0, 3.0])
        good = build_merge_path(s)
        with pytest.raises(ValueError):
            ClusterPath(sample=s, events=good.events[:1])

    def test_immutable(self):
        path = build_merge_path(SortedSample.from_data([0.0, 1.0]))
        with pytest.raises(Exception):
            path.events = ()
