import json

import numpy as np
import pytest

from sloccwit.cli import format_value, main
from sloccwit.hierarchy import HierarchyGraph
from sloccwit.reference import PUBLISHED, published_cells
from sloccwit.states import PSI_IDS


@pytest.fixture(scope="module")
def published_graph():
    mask = np.array([[PUBLISHED[r][c] == 1 for c in PSI_IDS] for r in PSI_IDS])
    return HierarchyGraph.from_mask(PSI_IDS, mask)


class TestHierarchy:
    def test_psi15_reaches_everything(self, published_graph):
        assert published_graph.reachable("psi15") == set(PSI_IDS) - {"psi15"}

    def test_ghz_like_above_w_like(self, published_graph):
        assert ("psi6", "psi7") in published_graph.edges
        assert ("psi7", "psi6") not in published_graph.edges

    def test_edges_are_the_saturated_cells(self, published_graph):
        want = {(r, c) for r, c, _ in published_cells("saturated")}
        assert set(published_graph.edges) == want
        assert all(a != b for a, b in published_graph.edges)

    def test_empty_mask(self):
        g = HierarchyGraph.from_mask(["psi6", "psi7"], np.zeros((2, 2), bool))
        assert g.edges == frozenset()

    def test_reduction_keeps_reachability(self, published_graph):
        red = published_graph.transitive_reduction()
        assert red.reduced and red.edges <= published_graph.edges
        for n in PSI_IDS:
            assert red.reachable(n) == published_graph.reachable(n)

    def test_reduction_of_a_chain(self):
        mask = np.array([[0, 1, 1], [0, 0, 1], [0, 0, 0]], bool)
        g = HierarchyGraph.from_mask(["a", "b", "c"], mask, reduce=True)
        assert g.edges == {("a", "b"), ("b", "c")}

    def test_dot(self, published_graph):
        dot = published_graph.to_dot()
        assert dot.startswith("digraph") and dot.rstrip().endswith("}")
        assert '"psi6" -> "psi7";' in dot
        assert "GHZ-like" in dot and "W-like" in dot


class TestFormatting:
    @pytest.mark.parametrize("v,text", [(0.75, "3/4"), (2 / 3 + 1e-10, "2/3"), (0.5625, "9/16"),
                                        (0.853611, "0.853611"), (0.999, "0.999000")])
    def test_format_value(self, v, text):
        assert format_value(v) == text

    def test_saturated(self):
        assert format_value(0.5, saturated=True) == "1*"


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


class TestCli:
    def test_overlap(self, capsys):
        code, out = _run(capsys, "overlap", "--target", "ghz:3", "--orbit", "w:3", "--restarts", "5")
        doc = json.loads(out.out)
        assert code == 0 and doc["display"] == "3/4" and not doc["saturated"]
        assert "argmax" not in doc

    def test_overlap_self(self, capsys):
        code, out = _run(capsys, "overlap", "--target", "psi6", "--orbit", "psi6")
        assert code == 0 and json.loads(out.out)["lambda"] == 1.0

    def test_bad_id(self, capsys):
        code, out = _run(capsys, "overlap", "--target", "psi5", "--orbit", "psi6")
        assert code == 2 and "psi5" in out.err

    def test_dims_mismatch(self, capsys):
        code, _ = _run(capsys, "overlap", "--target", "ghz:3", "--orbit", "psi6")
        assert code == 3

    def test_table_is_deterministic(self, capsys, tmp_path):
        args = ["table233", "--ids", "psi6,psi7", "--restarts", "5", "--jobs", "1"]
        _, first = _run(capsys, *args)
        _, second = _run(capsys, *args)
        assert first.out == second.out
        rows = first.out.strip().splitlines()
        assert rows[1] == "psi6,self,1*"
        assert rows[2].split(",")[2] == "self"

    def test_seed_from_environment(self, capsys, monkeypatch):
        args = ["overlap", "--target", "psi8", "--orbit", "psi10", "--restarts", "2", "--max-sweeps", "3"]
        monkeypatch.setenv("SLOCCWIT_SEED", "5")
        env = json.loads(_run(capsys, *args)[1].out)["perRestartValues"]
        flag = json.loads(_run(capsys, *args, "--seed", "5")[1].out)["perRestartValues"]
        other = json.loads(_run(capsys, *args, "--seed", "6")[1].out)["perRestartValues"]
        assert env == flag and env != other

    def test_table_text_and_hierarchy_from_file(self, capsys, tmp_path):
        out = tmp_path / "t.csv"
        code, _ = _run(capsys, "table233", "--ids", "psi6,psi7,psi8", "--restarts", "5",
                       "--jobs", "1", "--out", str(out))
        assert code == 0
        code, res = _run(capsys, "hierarchy", str(out))
        assert code == 0 and '"psi6" -> "psi7";' in res.out
        code, res = _run(capsys, "table233", "--ids", "psi6,psi7", "--restarts", "5",
                         "--jobs", "1", "--format", "text")
        assert "self" in res.out and "1*" in res.out

    def test_hierarchy_json_input(self, capsys, tmp_path):
        out = tmp_path / "t.json"
        _run(capsys, "table233", "--ids", "psi6,psi7", "--restarts", "3", "--jobs", "1",
             "--format", "json", "--out", str(out))
        code, res = _run(capsys, "hierarchy", str(out), "--reduce")
        assert code == 0 and "transitive reduction" in res.out

    def test_hierarchy_published(self, capsys):
        code, res = _run(capsys, "hierarchy", "--published")
        assert code == 0 and res.out.count("->") == len(published_cells("saturated"))

    def test_malformed_table(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("orbit\\target,psi6\npsi7,self\n")
        assert _run(capsys, "hierarchy", str(bad))[0] == 6
        assert _run(capsys, "hierarchy", str(tmp_path / "missing.csv"))[0] == 6

    def test_witness_check_exit_codes(self, capsys):
        base = ["witness-check", "--phi", "ghz:3", "--orbit", "w:3", "--restarts", "5"]
        code, res = _run(capsys, *base, "--lambda", "0.75")
        assert code == 0 and json.loads(res.out)["verdict"] == "witness"
        code, res = _run(capsys, *base, "--lambda", "0.7")
        assert code == 1 and "certificate" in json.loads(res.out)["diagnostics"]
        assert _run(capsys, *base, "--lambda", "1.0")[0] == 4

    def test_sdp_bound_budget(self, capsys):
        code, res = _run(capsys, "sdp-bound", "--phi", "ghz:4", "--psi", "w:4", "--restarts", "2")
        assert code == 5 and "budget" in res.err

    def test_sdp_bound_bipartite(self, capsys):
        code, res = _run(capsys, "sdp-bound", "--phi", "bell", "--psi", "zero:2x2",
                         "--bisect-tol", "1e-4", "--restarts", "3")
        doc = json.loads(res.out)
        assert code == 0 and not doc["trivial"]
        assert doc["lowerBound"] <= doc["upperBound"] <= 0.5 + 1e-4

    def test_ghzw(self, capsys):
        code, res = _run(capsys, "ghzw", "--n", "3", "--trials", "5", "--restarts", "5")
        row = json.loads(res.out)["rows"][0]
        assert code == 0 and row["analytic"] == 0.75
        assert row["optimizer"] == pytest.approx(0.75, abs=1e-6)

    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
        assert capsys.readouterr().out.startswith("sloccwit")
