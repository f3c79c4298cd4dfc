import json

import numpy as np
import pytest

from rdpgtest import Graph, sample_rdpg, write_edge_list
from rdpgtest.cli import main

from conftest import two_block_latents


def run_cli(*argv):
    return main(list(argv))


def write_graph(tmp_path, name, graph):
    path = tmp_path / name
    write_edge_list(graph, path)
    return str(path)


GENERATE = ["generate", "--sbm-b", "0.5,0.2;0.2,0.5", "--pi", "0.4,0.6",
            "--n", "120", "--seed", "7"]


class TestGenerate:
    def test_writes_graph_with_declared_size(self, tmp_path):
        out = tmp_path / "g.edges"
        assert run_cli(*GENERATE, "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "%n=120"
        assert len(lines) > 1

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a.edges", tmp_path / "b.edges"
        run_cli(*GENERATE, "--out", str(out1))
        run_cli(*GENERATE, "--out", str(out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_malformed_matrix_exits_2_without_output(self, tmp_path):
        out = tmp_path / "g.edges"
        with pytest.raises(SystemExit) as excinfo:
            run_cli("generate", "--sbm-b", "0.5,oops;0.2,0.5", "--pi", "1.0",
                    "--n", "10", "--seed", "1", "--out", str(out))
        assert excinfo.value.code == 2
        assert not out.exists()

    def test_latent_out_and_degree_corrections(self, tmp_path):
        out = tmp_path / "g.edges"
        latent = tmp_path / "latent.csv"
        code = run_cli("generate", "--sbm-b", "0.5,0.2;0.2,0.5", "--pi", "0.4,0.6",
                       "--degree-corrections", "uniform:0.2,1.0",
                       "--n", "50", "--seed", "3",
                       "--out", str(out), "--latent-out", str(latent))
        assert code == 0
        rows = latent.read_text().splitlines()
        assert len(rows) == 50

    def test_seedless_run_reports_seed(self, tmp_path, capsys):
        out = tmp_path / "g.edges"
        run_cli("generate", "--sbm-b", "0.3", "--pi", "1.0", "--n", "10",
                "--out", str(out))
        assert "seed:" in capsys.readouterr().err


class TestTestCommand:
    def test_identical_graphs_not_rejected(self, tmp_path, capsys):
        g = sample_rdpg(two_block_latents(100, seed=1), 2)
        path = write_graph(tmp_path, "g.edges", g)
        code = run_cli("test", "--graph-a", path, "--graph-b", path,
                       "--kind", "identity", "--dim", "2",
                       "--method", "theoretical", "--json")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema_version"] == 1
        assert payload["statistic"] < 1e-10
        assert payload["rejected"] is False
        assert payload["p_value"] is None

    def test_bootstrap_reports_p_value(self, tmp_path, capsys):
        ga = sample_rdpg(two_block_latents(90, seed=2), 3)
        gb = sample_rdpg(two_block_latents(90, seed=2), 4)
        pa = write_graph(tmp_path, "a.edges", ga)
        pb = write_graph(tmp_path, "b.edges", gb)
        code = run_cli("test", "--graph-a", pa, "--graph-b", pb, "--dim", "2",
                       "--method", "bootstrap", "--bs", "10", "--seed", "5",
                       "--json")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert 0.0 <= payload["p_value"] <= 1.0
        assert payload["bs"] == 10

    def test_isolated_vertex_diagonal_exits_1_naming_vertex(self, tmp_path, capsys):
        edges = np.asarray([(i, j) for i in range(1, 6) for j in range(i + 1, 6)])
        g = Graph(6, edges)  # vertex 0 isolated
        path = write_graph(tmp_path, "iso.edges", g)
        code = run_cli("test", "--graph-a", path, "--graph-b", path,
                       "--kind", "diagonal", "--dim", "2")
        assert code == 1
        err = capsys.readouterr().err
        assert "row 0" in err

    def test_size_mismatch_exits_1(self, tmp_path, capsys):
        pa = write_graph(tmp_path, "a.edges", sample_rdpg(two_block_latents(40), 1))
        pb = write_graph(tmp_path, "b.edges", sample_rdpg(two_block_latents(50), 1))
        assert run_cli("test", "--graph-a", pa, "--graph-b", pb, "--dim", "2") == 1

    def test_missing_file_exits_1(self, tmp_path):
        assert run_cli("test", "--graph-a", str(tmp_path / "no.edges"),
                       "--graph-b", str(tmp_path / "no.edges"), "--dim", "2") == 1


class TestEmbedAndDimselect:
    def test_embed_writes_latents_and_reports(self, tmp_path, capsys):
        g = sample_rdpg(two_block_latents(80, seed=5), 6)
        path = write_graph(tmp_path, "g.edges", g)
        out = tmp_path / "latent.csv"
        code = run_cli("embed", "--graph", path, "--dim", "2", "--out", str(out),
                       "--json")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["dim"] == 2
        assert set(payload["diagnostics"]) == {"delta", "gamma1", "gamma2", "sigma", "n", "d"}
        assert out.exists()

    def test_dimselect_reports_choice(self, tmp_path, capsys):
        from rdpgtest import sbm_latent_positions

        b = np.array([[0.6, 0.1], [0.1, 0.6]])
        x = sbm_latent_positions(b, np.repeat([0, 1], 100))
        path = write_graph(tmp_path, "g.edges", sample_rdpg(x, 3))
        code = run_cli("dimselect", "--graph", path, "--max-dim", "8", "--json")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["dim"] == 2


class TestPowerCommand:
    def test_grid_rows_and_determinism(self, tmp_path):
        out1 = tmp_path / "t1.csv"
        out2 = tmp_path / "t2.csv"
        args = ["power", "--scenario", "table1", "--reps", "1", "--bs", "1",
                "--seed", "1", "--threads", "1"]
        assert run_cli(*args, "--out", str(out1)) == 0
        assert run_cli(*args, "--out", str(out2)) == 0
        lines = out1.read_text().splitlines()
        assert len(lines) == 1 + 32  # header + 4n x 4eps x 2 methods
        assert lines[0] == "n,epsilon,method,power,replicates,se"
        assert out1.read_text() == out2.read_text()
        sidecar = json.loads((tmp_path / "t1.csv.config.json").read_text())
        assert sidecar["scenario"] == "table1"
        assert sidecar["rows"] == 32

    def test_zero_reps_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("power", "--scenario", "table1", "--reps", "0",
                    "--out", str(tmp_path / "x.csv"))
        assert excinfo.value.code == 2

    def test_samples_output(self, tmp_path):
        out = tmp_path / "p.csv"
        samples = tmp_path / "s.csv"
        code = run_cli("power", "--scenario", "community", "--reps", "1", "--bs", "1",
                       "--seed", "2", "--threads", "1", "--out", str(out),
                       "--samples-out", str(samples))
        assert code == 0
        lines = samples.read_text().splitlines()
        assert lines[0] == "scenario,param,replicate,statistic"
        assert len(lines) == 1 + 5  # five community sizes, one replicate each


class TestMisc:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("--version")
        assert excinfo.value.code == 0
        assert "rdpgtest" in capsys.readouterr().out

    def test_requires_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli()
        assert excinfo.value.code == 2
