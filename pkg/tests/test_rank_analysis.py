import numpy as np
import pytest

from lvtensor.errors import ArgumentError
from lvtensor.generators import generate_signal, random_tucker_signal, table_model
from lvtensor.rank_analysis import (RankScanConfig, cell_seed, epsilon_rank, logrank_scan,
                                    median_ranks, scan_cell)


def test_rank_one_tensor():
    rng = np.random.default_rng(0)
    theta = np.einsum("i,j,k->ijk", *(rng.standard_normal(d) for d in (6, 7, 8)))
    res = epsilon_rank(theta, 0.01, 5)
    assert res.rank == 1 and res.error_at_rank < 1e-12


def test_tucker_rank_three():
    theta = random_tucker_signal((15, 15, 15), (3, 3, 3), seed=1)
    res = epsilon_rank(theta, 0.01, 6)
    assert res.rank == 3 and res.error_at_rank < 1e-8
    assert [r for r, _ in res.error_curve] == [1, 2, 3]


def test_full_curve_is_non_increasing():
    theta = generate_signal(table_model(1, 3), (15, 15, 15), seed=2)
    res = epsilon_rank(theta, 1e-6, 8, stop_early=False)
    errs = [e for _, e in res.error_curve]
    assert len(errs) == 8
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_more_iterations_agree():
    theta = generate_signal(table_model(1, 3), (20, 20, 20), seed=3)
    assert epsilon_rank(theta, 0.01, 10).rank == epsilon_rank(theta, 0.01, 10, max_iters=100).rank


def test_monotone_in_epsilon():
    theta = generate_signal(table_model(1, 4), (20, 20, 20), seed=4)
    ranks = [epsilon_rank(theta, eps, 15).rank for eps in (0.1, 0.03, 0.01, 0.003)]
    assert all(b >= a for a, b in zip(ranks, ranks[1:]))


def test_not_found_within_r_max():
    theta = np.random.default_rng(5).standard_normal((8, 8, 8))
    res = epsilon_rank(theta, 0.01, 3)
    assert not res.found and res.rank is None
    assert res.error_at_rank == res.error_curve[-1][1]


def test_invalid_inputs():
    with pytest.raises(ArgumentError):
        epsilon_rank(np.zeros((4, 4, 4)), 0.01, 2)
    with pytest.raises(ArgumentError):
        epsilon_rank(np.ones((4, 4, 4)), 1.5, 2)
    with pytest.raises(ArgumentError):
        RankScanConfig(r_max=30, d_grid=(20,))


def test_cell_seed_is_stable_and_distinct():
    assert cell_seed(0, "model1", 5) == cell_seed(0, "model1", 5)
    assert len({cell_seed(b, "model1", s) for b in range(5) for s in range(5)}) == 25


def test_single_cell_scan():
    cfg = RankScanConfig(d_grid=(12,), s_grid=(2,), seeds=(0,), r_max=12)
    rows = logrank_scan(cfg)
    assert len(rows) == 1
    row = rows[0]
    assert row == scan_cell("model1", 2, 12, 0, cfg)
    assert isinstance(row["rank"], int) and row["rel_err"] <= 0.01


def test_rank_grows_with_latent_dimension():
    cfg = RankScanConfig(d_grid=(20,), s_grid=(1, 3, 6), seeds=(0, 1, 2), r_max=20)
    med = median_ranks(logrank_scan(cfg))
    ranks = [med[("model1", s, 20)] for s in (1, 3, 6)]
    assert ranks == sorted(ranks) and ranks[0] < ranks[-1]


def test_median_ranks_na_counts_as_infinite():
    rows = [{"model": "m", "s": 1, "d": 5, "rank": r} for r in (2, "NA", "NA")]
    assert median_ranks(rows)[("m", 1, 5)] == np.inf


def test_rank_non_decreasing_over_full_d_grid():
    d_grid = tuple(range(20, 201, 20))
    cfg = RankScanConfig(d_grid=d_grid, s_grid=(5,), seeds=(0, 1, 2), r_max=20)
    med = median_ranks(logrank_scan(cfg))
    ranks = [med[("model1", 5, d)] for d in d_grid]
    assert ranks == sorted(ranks), ranks
