import numpy as np
import pytest

from conftest import all_allocations, direct_sinr, random_tensor, unit_noise_cfg
from mmcoord.channel import GainTensor
from mmcoord.config import SystemConfig
from mmcoord.coordinator import solve_greedy
from mmcoord.harness import (ExperimentSpec, OracleCapError, eval_orthogonal, exhaustive_size, make_drop,
                             make_tensor, rows_to_csv, run_experiment, save_results, solve_exhaustive,
                             solve_single_fdc, summarize)
from mmcoord.metrics import sinr_matrix


def test_hand_exhaustive(hand_tensor):
    cfg = unit_noise_cfg(2, 2)
    assert solve_exhaustive(hand_tensor, cfg).to_list() == [[0, 1], [0, 1]]
    values = {}
    for perm in all_allocations(2, 2):
        values[tuple(map(tuple, perm))] = direct_sinr(hand_tensor, perm, 1.0).min()
    assert values[((0, 1), (0, 1))] == pytest.approx(5 / 3)
    assert values[((0, 1), (1, 0))] == pytest.approx(0.25)
    assert values[((1, 0), (0, 1))] == pytest.approx(0.75)
    assert values[((1, 0), (1, 0))] == pytest.approx(0.5)


def test_hand_single_fdc(hand_tensor):
    assert solve_single_fdc(hand_tensor, unit_noise_cfg(2, 2)).to_list() == [[0, 1], [0, 1]]


def test_exhaustive_matches_loop_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(20):
        g = random_tensor(rng, 3, 3)
        best = max(direct_sinr(g, p, 1.0).min() for p in all_allocations(3, 3))
        alloc = solve_exhaustive(g, unit_noise_cfg(3, 3))
        assert sinr_matrix(g, alloc.perm, 1.0).min() == pytest.approx(best, rel=1e-12)


def test_greedy_never_beats_exhaustive():
    rng = np.random.default_rng(12)
    for _ in range(200):
        n, k = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        g = random_tensor(rng, n, k)
        cfg = unit_noise_cfg(n, k)
        opt = sinr_matrix(g, solve_exhaustive(g, cfg).perm, 1.0).min()
        assert solve_greedy(g, cfg).min_sinr <= opt * (1 + 1e-9)


def test_exhaustive_cap():
    assert exhaustive_size(4, 3) == 1296
    g = random_tensor(np.random.default_rng(0), 4, 3)
    with pytest.raises(OracleCapError):
        solve_exhaustive(g, unit_noise_cfg(4, 3), cap=1000)


def test_orthogonal_single_fdc_is_full_band():
    tx = np.array([[[3.0, 1.0], [1.0, 7.0]]])
    g = GainTensor(tx=tx, interference=np.zeros((1, 2, 1, 2, 2)))
    lo, total = eval_orthogonal(g, unit_noise_cfg(1, 2))
    assert lo == pytest.approx(2.0) and total == pytest.approx(5.0)


def test_orthogonal_divides_by_fdcs(hand_tensor):
    lo, total = eval_orthogonal(hand_tensor, unit_noise_cfg(2, 2))
    # Single-FDC allocation is the identity; SNRs 4, 5, 6, 8.
    assert lo == pytest.approx(np.log2(5) / 2)
    assert total == pytest.approx((np.log2(5) + np.log2(6) + np.log2(7) + np.log2(9)) / 2)


def test_seeding_is_per_drop_and_realization():
    cfg = SystemConfig(num_fdcs=2, users_per_fdc=2)
    _, a = make_drop(cfg, 5, 3)
    _, b = make_drop(cfg, 5, 3)
    _, c = make_drop(cfg, 5, 4)
    assert np.array_equal(a.path_loss, b.path_loss) and not np.array_equal(a.path_loss, c.path_loss)
    g1, g2 = make_tensor(cfg, a, 5, 3, 0), make_tensor(cfg, a, 5, 3, 1)
    assert not np.array_equal(g1.tx, g2.tx)
    assert np.array_equal(g1.tx, make_tensor(cfg, b, 5, 3, 0).tx)


def small_spec(**kw):
    base = SystemConfig(num_fdcs=2, users_per_fdc=2, area_radius=100.0, serving_radius=10.0, rng_seed=3)
    return ExperimentSpec(base=base, **({"power_sweep_dbm": [0, 20], "num_large_scale_drops": 2,
                                         "num_small_scale_per_drop": 3,
                                         "schemes": ("greedy", "exhaustive", "single_fdc", "orthogonal")} | kw))


def test_row_count_and_order():
    spec = small_spec()
    rows = list(run_experiment(spec))
    assert len(rows) == 2 * 2 * 3 * 4
    keys = [(r.drop, r.realization, r.power_dbm) for r in rows]
    assert keys == sorted(keys)
    assert all(r.status == "ok" for r in rows)
    assert {e["scheme"] for e in summarize(rows)} == {"greedy", "exhaustive", "single_fdc", "orthogonal"}


def test_rerun_is_byte_identical(tmp_path):
    spec = small_spec(output_path=str(tmp_path / "a.csv"))
    first = rows_to_csv(run_experiment(spec))
    assert first == rows_to_csv(run_experiment(spec))
    assert first == rows_to_csv(run_experiment(small_spec(workers=2)))
    csv_path, summary_path = save_results(spec, list(run_experiment(spec)))
    assert csv_path.read_text() == first and summary_path.exists()


def test_capped_exhaustive_rows_are_skipped():
    rows = list(run_experiment(small_spec(exhaustive_cap=1, num_large_scale_drops=1,
                                          num_small_scale_per_drop=1)))
    skipped = [r for r in rows if r.scheme == "exhaustive"]
    assert skipped and all(r.status.startswith("skipped") for r in skipped)
    assert all(r.status == "ok" for r in rows if r.scheme != "exhaustive")


def test_spec_validation():
    with pytest.raises(ValueError):
        small_spec(schemes=("magic",))
    with pytest.raises(ValueError):
        small_spec(num_large_scale_drops=0)
