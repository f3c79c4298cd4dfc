import csv
import json

import numpy as np
import pytest

from rdpgtest import (
    ScenarioConfig,
    VertexSetMismatch,
    run_celegans,
    run_community,
    run_dcsbm,
    run_scenario,
    run_table1,
    run_table2,
    sample_rdpg,
    write_edge_list,
    write_power_csv,
    write_samples_csv,
)
from rdpgtest.experiments import (
    DCSBM_BASE,
    DCSBM_DIAGONAL,
    community_sizes,
    shifted_blocks,
    _community_latents,
)

from conftest import two_block_latents


def tiny_config(**overrides):
    defaults = dict(
        scenario="table1",
        ns=(60,),
        epsilons=(0.0, 0.3),
        replicates=2,
        bs=4,
        alpha=0.05,
        seed=7,
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


class TestScenarioConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="table1", replicates=0)
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="table1", alpha=1.5)
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="mystery")

    def test_defaults_resolved(self):
        config = ScenarioConfig(scenario="table2")
        assert config.resolved("ns") == (100, 200, 500, 1000)
        assert config.resolved("epsilons") == (0.0, 0.1, 0.2, 0.4)


class TestPowerGrids:
    def test_grid_row_count_and_cell_arithmetic(self):
        run = run_table1(tiny_config())
        assert len(run.cells) == 1 * 2 * 2  # |ns| x |eps| x |methods|
        for cell in run.cells:
            assert cell.power * cell.replicates == pytest.approx(cell.rejections)
            assert cell.se == pytest.approx(
                np.sqrt(cell.power * (1 - cell.power) / cell.replicates)
            )
        assert len(run.samples) == 2 * 2  # cells x replicates

    def test_exactly_reproducible(self):
        first = run_table1(tiny_config())
        second = run_table1(tiny_config())
        assert first.cells == second.cells
        assert first.samples == second.samples

    def test_cells_stable_under_grid_subsetting(self):
        full = run_table1(tiny_config(epsilons=(0.0, 0.3)))
        subset = run_table1(tiny_config(epsilons=(0.3,)))
        full_cells = {
            (c.n, c.epsilon, c.method): c for c in full.cells if c.epsilon == 0.3
        }
        for cell in subset.cells:
            assert full_cells[(cell.n, cell.epsilon, cell.method)] == cell

    def test_table2_uses_scaling(self):
        run = run_table2(tiny_config(scenario="table2", epsilons=(0.0,)))
        assert len(run.cells) == 2
        assert all(0.0 <= c.power <= 1.0 for c in run.cells)

    def test_n_jobs_does_not_change_results(self):
        lone = run_table1(tiny_config())
        pooled = run_table1(tiny_config(n_jobs=2))
        assert lone.cells == pooled.cells


class TestCommunityScenario:
    def test_sizes(self):
        assert community_sizes(0) == (400, 400, 0)
        assert community_sizes(8) == (396, 396, 8)
        with pytest.raises(ValueError):
            community_sizes(5)

    def test_latents_shapes(self):
        before, after = _community_latents(8)
        assert before.matrix.shape == (800, 2)
        assert after.matrix.shape == (800, 2)  # rank-2 block matrix
        before0, after0 = _community_latents(0)
        assert np.allclose(before0.matrix, after0.matrix)

    @pytest.mark.slow
    def test_smoke_run(self):
        config = ScenarioConfig(
            scenario="community", epsilons=(0, 4), replicates=2, bs=3, seed=1
        )
        run = run_community(config)
        assert [c.epsilon for c in run.cells] == [0.0, 4.0]
        assert all(c.method == "bootstrap" for c in run.cells)
        assert len(run.samples) == 4


class TestDcsbmScenario:
    def test_diagonal_twin_matrix_entries(self):
        d = np.diag([1.2, 0.8])
        assert np.allclose(d @ DCSBM_BASE @ d, DCSBM_DIAGONAL, atol=1e-12)
        assert np.allclose(
            sorted(DCSBM_DIAGONAL.flatten().tolist()),
            sorted([0.72, 0.192, 0.192, 0.32]),
            atol=1e-12,
        )

    def test_smoke_run(self):
        # n large enough that bootstrap resamples cannot isolate a vertex
        # (the diagonal statistic rejects zero embedding rows by contract)
        config = ScenarioConfig(
            scenario="dcsbm", ns=(400,), epsilons=(0.0, 1.0), replicates=2, bs=3, seed=2
        )
        run = run_dcsbm(config)
        assert len(run.cells) == 2
        labels = {s.param for s in run.samples}
        assert labels == {"n=400,null", "n=400,alternative"}

    def test_shifted_blocks(self):
        assert np.allclose(shifted_blocks(0.2), [[0.7, 0.2], [0.2, 0.7]])


class TestScenarioDispatch:
    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            run_scenario(ScenarioConfig(scenario="custom"))

    def test_dispatch_matches_direct_call(self):
        config = tiny_config()
        assert run_scenario(config).cells == run_table1(config).cells


class TestCsvOutputs:
    def test_power_csv_schema(self, tmp_path):
        run = run_table1(tiny_config())
        path = tmp_path / "power.csv"
        write_power_csv(run.cells, path)
        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["n", "epsilon", "method", "power", "replicates", "se"]
        assert len(rows) == 1 + len(run.cells)

    def test_samples_csv_schema(self, tmp_path):
        run = run_table1(tiny_config())
        path = tmp_path / "samples.csv"
        write_samples_csv(run.samples, path)
        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["scenario", "param", "replicate", "statistic"]
        assert len(rows) == 1 + len(run.samples)
        floats = [float(r[3]) for r in rows[1:]]
        assert all(np.isfinite(floats))


class TestCelegans:
    def test_same_file_twice_gives_zero_statistic(self, tmp_path):
        g = sample_rdpg(two_block_latents(60, seed=3), 5)
        path = tmp_path / "g.edges"
        write_edge_list(g, path)
        outcome = run_celegans(path, path, dim=2, bs=5, seed=1)
        assert outcome.result.statistic < 1e-10
        assert outcome.result.p_value == 1.0
        assert outcome.edges_a == outcome.edges_b == g.edge_count

    def test_vertex_set_mismatch(self, tmp_path):
        g1 = sample_rdpg(two_block_latents(50, seed=4), 6)
        g2 = sample_rdpg(two_block_latents(60, seed=4), 7)
        p1, p2 = tmp_path / "a.edges", tmp_path / "b.edges"
        write_edge_list(g1, p1)
        write_edge_list(g2, p2)
        with pytest.raises(VertexSetMismatch):
            run_celegans(p1, p2, dim=2, bs=5, seed=1)
