import json

import numpy as np
import pytest

from injnorm import __version__
from injnorm.cli import fmt, main, render_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestFormatting:
    def test_fmt(self):
        assert fmt(1 / 3) == "0.333333333333"
        assert fmt(None) == "---"
        assert fmt(True) == "true"
        assert fmt(3) == "3"
        assert fmt(float("nan")) == "nan"

    def test_render_csv(self):
        assert render_csv(["a", "b"], [[1, 0.5]]) == "a,b\n1,0.5\n"
        with pytest.raises(ValueError):
            render_csv(["a", "a"], [])
        with pytest.raises(ValueError):
            render_csv(["a", "b"], [[1]])


class TestBound:
    def test_header_and_value(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "a-complex", "--dims", "3", "--p", "3", "--optimize-k")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "model,dims,k,log_value,value,evaluations"
        assert lines[1].startswith("a-complex,3x3x3,8,")

    def test_multiple_k(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "bounded-rank", "--dims", "4,4,4", "--rank", "1", "--k", "1,2")
        assert code == 0
        row = out.splitlines()[1].split(",")
        assert float(row[4]) == pytest.approx(1.0)

    def test_json(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "sym", "--dims", "3,3", "--k", "1", "--json")
        assert code == 0
        assert json.loads(out)[0]["value"] == pytest.approx(2**0.5)

    @pytest.mark.parametrize(
        "argv",
        [
            ["bound", "--model", "a-real", "--dims", "3"],
            ["bound", "--model", "sym", "--dims", "2,3", "--k", "1"],
            ["bound", "--model", "a-real", "--dims", "3,x", "--k", "1"],
            ["bound", "--model", "a-real", "--dist", "steinhaus", "--dims", "3,3", "--k", "1"],
            ["bound", "--model", "a-real", "--k", "1"],
            ["frobnicate"],
        ],
    )
    def test_usage_errors(self, capsys, argv):
        assert main(argv) == 2


class TestAsymptotic:
    def test_normalizers(self, capsys):
        code, out, _ = run(capsys, "asymptotic", "--model", "a-real", "--p", "3", "--normalizers")
        assert code == 0
        header, row = out.splitlines()
        assert header == "model,p,eta,alpha,log_value,value,normalizer,normalized"
        assert row.split(",")[5].startswith("3.0442")

    def test_bounded_rank(self, capsys):
        code, out, _ = run(capsys, "asymptotic", "--model", "bounded-rank")
        assert code == 0
        assert out.splitlines()[1].split(",")[-1] == "1"


class TestCompare:
    def test_dinf(self, capsys):
        code, out, _ = run(capsys, "compare", "--regime", "dinf", "--p-range", "3:8")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "bound,p=3,p=4,p=5,p=6,p=7,p=8,note"
        rows = {line.split(",")[0]: line.split(",") for line in lines[1:]}
        assert rows["sudakov-fernique"][1:7] == ["3", "4", "5", "6", "7", "8"]
        assert rows["kac-rice-ref"][1:7] == ["2.87", "3.59", "4.22", "4.8", "5.33", "5.83"]
        assert rows["friedland-kemp"][1:7] == ["---"] * 6

    def test_rigid(self, capsys):
        code, out, _ = run(capsys, "compare", "--regime", "d=50", "--dist", "rigid", "--p-range", "3:4")
        assert code == 0
        rows = {line.split(",")[0]: line.split(",") for line in out.splitlines()[1:]}
        assert rows["sudakov-fernique"][1:3] == ["---", "---"]

    @pytest.mark.parametrize("bad", [["--regime", "d=1"], ["--p-range", "5:3"], ["--regime", "inf"]])
    def test_bad_flags(self, capsys, bad):
        assert main(["compare", *bad]) == 2


class TestEstimate:
    def test_sweep_grid(self, capsys):
        code, out, _ = run(
            capsys, "estimate", "--model", "a-complex", "--p", "3", "--d-grid", "2,3", "--realizations", "12", "--with-bound"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "model,dims,method,realizations,restarts,mean,stderr,dispersion,bound,bound_k"
        assert len(lines) == 3
        for line in lines[1:]:
            cells = line.split(",")
            assert float(cells[5]) < float(cells[8]) + 3 * float(cells[6])

    def test_dump_and_load(self, capsys, tmp_path):
        path = tmp_path / "t.txt"
        code, out1, _ = run(capsys, "estimate", "--model", "a-real", "--dims", "3,3", "--dump", str(path))
        assert code == 0 and path.exists()
        code, out2, _ = run(capsys, "estimate", "--load", str(path))
        assert code == 0
        from injnorm.tensor import load_text

        T = load_text(path)
        value = float(out2.splitlines()[1].split(",")[5])
        assert value == pytest.approx(np.linalg.svd(T.data, compute_uv=False)[0], rel=1e-8)

    def test_missing_file(self, capsys, tmp_path):
        assert main(["estimate", "--load", str(tmp_path / "missing.txt")]) == 2


class TestVerify:
    def test_single_case(self, capsys):
        code, out, _ = run(capsys, "verify", "--model", "a-complex", "--dims", "2,3", "--k", "2", "--n-samples", "20000")
        assert code == 0
        rep = json.loads(out)
        assert rep["all_pass"] and rep["instances"] == 1
        assert rep["reports"][0]["case"] == "A-complex-2x3-k2"

    def test_corrupted_grid_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--instances", "8", "--n-samples", "20000", "--corrupt-prefactor")
        assert code == 1
        assert json.loads(out)["all_pass"] is False


class TestOutputs:
    def test_manifest(self, capsys, tmp_path):
        out = tmp_path / "b.csv"
        code, _, _ = run(capsys, "bound", "--model", "a-real", "--dims", "3,3,3", "--k", "2", "--seed", "4", "--out", str(out))
        assert code == 0
        man = json.loads((tmp_path / "b.csv.manifest.json").read_text())
        assert man["version"] == __version__
        assert man["seed"] == 4
        assert man["argv"][0] == "bound"
        assert out.read_text().startswith("model,dims,k,")

    def test_replay(self, capsys, tmp_path):
        out = tmp_path / "e.csv"
        argv = ["estimate", "--model", "a-complex", "--dims", "3,3,3", "--realizations", "3", "--restarts", "2"]
        assert main([*argv, "--out", str(out), "--threads", "1"]) == 0
        again = tmp_path / "again.csv"
        assert main(["replay", str(out) + ".manifest.json", "--out", str(again), "--threads", "3"]) == 0
        assert again.read_bytes() == out.read_bytes()

    def test_replay_bad_manifest(self, capsys, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text("{}")
        assert main(["replay", str(bad)]) == 2

    def test_figure_svg(self, capsys, tmp_path):
        svg = tmp_path / "f.svg"
        code, out, _ = run(
            capsys, "figure", "steinhaus", "--p", "3", "--d-grid", "2,3", "--realizations", "2", "--restarts", "1", "--svg", str(svg)
        )
        assert code == 0
        assert out.splitlines()[0] == "d,mean,stderr,bound,bound_k"
        assert svg.read_text().lstrip().startswith("<svg")
