"""Command line behavior, one test per subcommand plus the error paths.

Each command is run in-process through main() so exit codes and stream
separation (results on stdout, errors on stderr) are checked directly.
"""

import io
import json

import pytest

from conftest import make_graph
from maxflowprot.cli import main
from maxflowprot.exact import emit_model
from maxflowprot.graph import serialize_graph
from maxflowprot.harness import CSV_HEADER


def graph_file(tmp_path, g, name="graph.txt"):
    path = tmp_path / name
    path.write_text(serialize_graph(g), encoding="utf-8")
    return str(path)


class TestAnalyze:
    def test_full_report(self, tmp_path, branch_merge, capsys):
        assert main(["analyze", graph_file(tmp_path, branch_merge)]) == 0
        out = capsys.readouterr().out
        assert "max-flow: 2" in out
        assert "min-cut edges: a1->b1, a2->b2" in out
        assert "node classification:" in out
        assert "node,class,ec" in out
        assert "pre-cut plan:" in out
        assert "post-cut plan:" in out
        assert "protectable units (m): 2 [b1, b2]" in out
        assert "path,source,coding_node,units" in out

    def test_reads_stdin(self, double_fan, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(serialize_graph(double_fan)))
        assert main(["analyze", "-"]) == 0
        assert "max-flow: 2" in capsys.readouterr().out


class TestPlanPrecut:
    def test_json_plan(self, tmp_path, double_fan, capsys):
        assert main(["plan-precut", graph_file(tmp_path, double_fan)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["source"] == "S"
        assert doc["st_flow"] == 2
        assert doc["protected_count"] == 2
        assert len(doc["paths"]) == 2

    def test_seed_is_forwarded(self, tmp_path, layered_mesh, capsys):
        path = graph_file(tmp_path, layered_mesh)
        docs = []
        for seed in ("0", "1"):
            assert main(["plan-precut", path, "--seed", seed]) == 0
            docs.append(json.loads(capsys.readouterr().out))
        assert all(d["st_flow"] == 4 for d in docs)


class TestPlanPostcut:
    def test_summary_and_reach(self, tmp_path, split_reach_postcut, capsys):
        assert main(["plan-postcut", graph_file(tmp_path, split_reach_postcut)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("protectable units (m): 4")
        assert "path,source,coding_node,units" in out
        assert "3,A,P4,A;B;C;D" in out

    def test_nothing_to_protect_prints_no_table(self, tmp_path, double_fan, capsys):
        assert main(["plan-postcut", graph_file(tmp_path, double_fan)]) == 0
        out = capsys.readouterr().out
        assert "protectable units (m): 0" in out
        assert "path,source" not in out


class TestSolveExact:
    def test_solution_document(self, tmp_path, double_fan, capsys):
        assert main(["solve-exact", graph_file(tmp_path, double_fan)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["protected_count"] == 2
        assert doc["exhausted"] is False
        assert doc["x"] == sorted(doc["x"])
        for path in doc["paths"]:
            assert path[0] == "S"

    def test_emit_model(self, tmp_path, double_fan, capsys):
        assert main(
            ["solve-exact", graph_file(tmp_path, double_fan), "--emit-model"]
        ) == 0
        assert capsys.readouterr().out == emit_model(double_fan).to_text()

    def test_budget_shows_up_in_the_document(self, tmp_path, layered_mesh, capsys):
        assert main(
            [
                "solve-exact",
                graph_file(tmp_path, layered_mesh),
                "--budget-nodes",
                "1",
            ]
        ) == 0
        assert json.loads(capsys.readouterr().out)["exhausted"] is True


class TestBench:
    def test_csv_to_file_summary_to_stdout(self, tmp_path, capsys):
        out_path = tmp_path / "bench.csv"
        assert main(
            [
                "bench",
                "--nodes", "5",
                "--instances", "2",
                "--seed", "0",
                "--out", str(out_path),
            ]
        ) == 0
        lines = out_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3
        assert lines[1].startswith("V5-000,5,")
        assert "grand mean ratio:" in capsys.readouterr().out

    def test_csv_to_stdout_without_out(self, capsys):
        assert main(["bench", "--nodes", "5", "--instances", "1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith(CSV_HEADER)
        assert len(out.splitlines()) == 2


class TestSimulate:
    def test_delivery_report(self, tmp_path, double_fan, capsys):
        assert main(
            ["simulate", graph_file(tmp_path, double_fan), "--rounds", "5"]
        ) == 0
        out = capsys.readouterr().out
        assert out.startswith("rounds: 5\n")
        assert "unit 0 (A->T): 1.000" in out
        assert out.rstrip().endswith("overall: 1.000")


class TestErrors:
    def test_missing_file(self, capsys):
        assert main(["analyze", "/no/such/graph.txt"]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")

    def test_malformed_graph(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("vertex S\n", encoding="utf-8")
        assert main(["analyze", str(path)]) == 1
        assert "unknown directive 'vertex'" in capsys.readouterr().err

    def test_ambiguous_cut(self, tmp_path, diamond_ladder, capsys):
        assert main(["plan-postcut", graph_file(tmp_path, diamond_ladder)]) == 1
        assert "minimum cut is not unique" in capsys.readouterr().err

    def test_disconnected_graph(self, tmp_path, capsys):
        g = make_graph("S a,b T")
        assert main(["plan-precut", graph_file(tmp_path, g)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_subcommand_exits_via_argparse(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
