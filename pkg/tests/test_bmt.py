import numpy as np
import pytest

from fusionclust import (
    BmtConfig,
    SortedSample,
    assess_modality,
    assign_labels,
    build_merge_path,
    run_bmt,
    run_bmt_multivariate,
)


def two_blob_sample(rng, n=1000, sep=4.0):
    half = n // 2
    return np.concatenate([rng.normal(-sep / 2, 1, half), rng.normal(sep / 2, 1, n - half)])


def adjustment_trap_sample():
    """49% in two tight clumps, 51% strung out as an absorbing chain.

    The only merge where both sides are big is the clump pair at combined
    mass 0.49; every later merge attaches a single far-away point, so the
    50% safeguard must wipe the lone split.
    """
    rng = np.random.default_rng(0)
    a = rng.uniform(0.0, 0.01, 25)
    b = rng.uniform(1.0, 1.01, 24)
    chain = 100.0 * 4.0 ** np.arange(51)
    return np.concatenate([a, b, chain])


class TestConfig:
    def test_alpha_bounds(self):
        for bad in (0.0, -0.1, 0.6, 1.0):
            with pytest.raises(ValueError):
                BmtConfig(alpha=bad)
        BmtConfig(alpha=0.5)

    def test_min_cluster_size_float_fuzz(self):
        assert BmtConfig(alpha=0.1).min_cluster_size(1000) == 100
        assert BmtConfig(alpha=0.1).min_cluster_size(999) == 100
        assert BmtConfig(alpha=0.25).min_cluster_size(4) == 1


class TestRunBmt:
    def test_four_point_example(self):
        sample = SortedSample.from_data([0.0, 0.1, 10.0, 10.1])
        res = run_bmt(sample, BmtConfig(alpha=0.25))
        assert len(res.big_merges) == 1
        bm = res.big_merges[0]
        assert bm.mass_after == 1.0
        assert bm.split_point == pytest.approx(5.05)
        assert res.split_points == (5.05,)
        assert res.num_clusters == 2

    def test_split_points_interior(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = two_blob_sample(rng, n=600)
            sample = SortedSample.from_data(x)
            res = run_bmt(sample)
            xs = np.sort(x)
            for sp in res.split_points:
                i = np.searchsorted(xs, sp)
                assert xs[i - 1] < sp < xs[i]

    def test_adjustment_wipes_low_mass_top_merge(self):
        x = adjustment_trap_sample()
        sample = SortedSample.from_data(x)
        kept = run_bmt(sample, BmtConfig(alpha=0.1, adjustment_enabled=False))
        assert kept.num_clusters == 2
        assert 0.0 < kept.split_points[0] < 1.01
        wiped = run_bmt(sample, BmtConfig(alpha=0.1, adjustment_enabled=True))
        assert wiped.split_points == ()
        assert wiped.num_clusters == 1
        assert wiped.adjustment_applied

    def test_threshold_monotone_without_adjustment(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = np.concatenate(
                [rng.normal(-3, 1, 300), rng.normal(0, 1, 200), rng.normal(3, 1, 300)]
            )
            sample = SortedSample.from_data(x)
            path = build_merge_path(sample)
            counts = [
                len(run_bmt(sample, BmtConfig(alpha=a, adjustment_enabled=False),
                            path=path).split_points)
                for a in (0.02, 0.05, 0.1, 0.2, 0.35, 0.5)
            ]
            assert counts == sorted(counts, reverse=True)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(12)
        x = two_blob_sample(rng, 500)
        res1 = run_bmt(SortedSample.from_data(x))
        res2 = run_bmt(SortedSample.from_data(rng.permutation(x)))
        assert res1.split_points == res2.split_points

    def test_tiny_samples_yield_no_split(self):
        assert run_bmt(SortedSample.from_data([1.0])).num_clusters == 1
        assert run_bmt(SortedSample.from_data([-1.0, 1.0])).num_clusters == 1

    def test_bimodal_sample_splits_near_zero(self):
        # one big merge, its split close to the density valley
        hits, locs = 0, []
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            x = two_blob_sample(rng, n=1000, sep=4.0)
            res = run_bmt(SortedSample.from_data(x))
            if res.num_clusters == 2:
                hits += 1
                locs.append(res.split_points[0])
        assert hits >= 14
        assert abs(np.median(locs)) < 0.4

    def test_unimodal_sample_keeps_nothing(self):
        for seed in range(10):
            rng = np.random.default_rng(2000 + seed)
            sample = SortedSample.from_data(rng.normal(0, 1, 10000))
            assert not assess_modality(sample)


class TestAssignLabels:
    def test_examples(self):
        sample = SortedSample.from_data([0.0, 0.1, 10.0, 10.1])
        assert assign_labels(sample, [5.05]).tolist() == [0, 0, 1, 1]
        assert assign_labels(sample, []).tolist() == [0, 0, 0, 0]
        sample2 = SortedSample.from_data([-3.0, -1.0, 2.0, 4.0])
        assert assign_labels(sample2, [-2.0, 3.0]).tolist() == [0, 1, 1, 2]

    def test_boundary_value_joins_right_cluster(self):
        sample = SortedSample.from_data([0.0, 5.0, 9.0])
        assert assign_labels(sample, [5.0]).tolist() == [0, 1, 1]

    def test_unsorted_splits_rejected(self):
        sample = SortedSample.from_data([0.0, 1.0])
        with pytest.raises(ValueError):
            assign_labels(sample, [2.0, 1.0])

    def test_label_count_matches_clusters(self):
        rng = np.random.default_rng(9)
        x = np.concatenate([rng.normal(-4, 1, 400), rng.normal(4, 1, 400)])
        sample = SortedSample.from_data(x)
        res = run_bmt(sample)
        labels = assign_labels(sample, list(res.split_points))
        assert len(np.unique(labels)) == res.num_clusters


class TestMultivariate:
    def test_single_column_matches_univariate(self):
        rng = np.random.default_rng(14)
        x = two_blob_sample(rng, 500)
        uni = run_bmt(SortedSample.from_data(x))
        multi = run_bmt_multivariate(x[:, None])
        assert multi.per_dimension[0].split_points == uni.split_points
        assert multi.num_clusters == uni.num_clusters

    def test_two_bimodal_dimensions_give_four_clusters(self):
        rng = np.random.default_rng(15)
        n = 2000
        col1 = np.concatenate([rng.normal(-5, 1, n // 2), rng.normal(5, 1, n // 2)])
        col2 = np.concatenate([rng.normal(-5, 1, n // 2), rng.normal(5, 1, n // 2)])
        rng.shuffle(col2)
        res = run_bmt_multivariate(np.column_stack([col1, col2]))
        assert res.num_clusters == 4
        assert len({lbl for lbl in res.labels}) == 4

    def test_labels_in_row_order(self):
        data = np.array([[10.0], [0.0], [10.1], [0.1]])
        res = run_bmt_multivariate(data, BmtConfig(alpha=0.25))
        assert [l[0] for l in res.labels] == [1, 0, 1, 0]

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            run_bmt_multivariate(np.array([[1.0], [np.inf]]))
