import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from matrixhc import cli, cube, qrac
from matrixhc.rng import make_rng

FIXTURES = Path(__file__).parents[1] / "fixtures"
CODE = str(FIXTURES / "hadamard4.gen")
DECODER = str(FIXTURES / "hadamard4_decoder.json")


def run(argv):
    out = io.StringIO()
    code = cli.run(argv, out=out)
    return code, out.getvalue()


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def last_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


class TestParsing:
    def test_grids(self):
        assert cli.parse_grid("1:2:0.25") == [1.0, 1.25, 1.5, 1.75, 2.0]
        assert cli.parse_grid("1,1.5") == [1.0, 1.5]
        assert cli.parse_int_list("1-3,7") == [1, 2, 3, 7]

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            cli.parse_grid("1:2:0")


class TestSweeps:
    def test_bcl_csv(self):
        code, out = run(["verify-bcl", "--trials", "5", "--dims", "2,3", "--p-grid", "1,1.5,2", "--seed", "4"])
        assert code == 0
        assert out.startswith("# verify-bcl seed=4 ")
        rows = csv_rows(out)
        assert len(rows) == 15
        assert set(rows[0]) == {"trial", "d", "p", "lhs", "rhs", "margin"}
        for r in rows:
            assert int(r["d"]) in (2, 3)
            assert float(r["margin"]) == pytest.approx(float(r["rhs"]) - float(r["lhs"]), abs=1e-15)

    def test_hc_parseval_margins(self):
        code, out = run(["verify-hc", "--trials", "20", "--p-grid", "2", "--n", "1-5", "--d", "1-4"])
        assert code == 0
        assert all(abs(float(r["margin"])) <= 1e-10 for r in csv_rows(out))

    def test_hc_single_ensemble(self):
        code, out = run(["verify-hc", "--trials", "6", "--ensemble", "rank1", "--p-grid", "1.5"])
        assert code == 0
        assert {r["ensemble"] for r in csv_rows(out)} == {"rank1"}

    def test_seed_changes_output(self):
        assert run(["verify-bcl", "--trials", "3", "--seed", "1"])[1] != run(["verify-bcl", "--trials", "3", "--seed", "2"])[1]

    def test_threads_do_not_change_output(self):
        argv = ["verify-hc", "--trials", "24", "--seed", "5"]
        assert run(["--threads", "1", *argv])[1] == run(["--threads", "4", *argv])[1]

    def test_p_out_of_range(self, capsys):
        code, _ = run(["verify-bcl", "--trials", "2", "--p-grid", "0.5"])
        assert code == 2 and last_error(capsys)["error"] == "usage"

    def test_unknown_ensemble(self, capsys):
        assert run(["verify-hc", "--ensemble", "gue"])[0] == 2

    def test_output_file(self, tmp_path):
        target = tmp_path / "sweep.csv"
        assert cli.run(["--output", str(target), "verify-bcl", "--trials", "2"]) == 0
        assert target.read_text().startswith("# verify-bcl")


class TestQrac:
    def test_search_example(self):
        code, out = run(["qrac", "search", "--n", "2", "--k", "2", "--m", "1"])
        assert code == 0 and json.loads(out)["p_star"] == 0.5

    def test_bias_report(self):
        code, out = run(["qrac", "bias", "--n", "3", "--k", "2", "--m", "1", "--seed", "8"])
        rep = json.loads(out)
        assert code == 0 and rep["seed"] == 8 and rep["bound_ok"]
        assert rep["max_helstrom_gap"] <= 1e-9
        assert len(rep["subsets"]) == 3

    def test_bias_from_encoding_file(self, tmp_path):
        enc = qrac.random_encoding(make_rng(1), 3, 1)
        cube.save(enc, tmp_path / "enc.bin")
        code, out = run(["qrac", "bias", "--encoding", str(tmp_path / "enc.bin"), "--k", "1"])
        assert code == 0
        assert json.loads(out)["xor_bias"] == pytest.approx(qrac.xor_bias(qrac.XorQrac(3, 1, 1, enc)), abs=1e-15)

    def test_reduce_from_directory(self):
        code, out = run(["qrac", "reduce", "--qrac", str(FIXTURES / "qrac_n4_k2_m1")])
        rep = json.loads(out)
        assert code == 0 and rep["identity_gap"] <= 1e-12

    def test_lemma43_rows(self):
        code, out = run(["qrac", "lemma43", "--n", "3", "--k", "1", "--m", "2", "--delta-grid", "0,0.5,1"])
        rows = json.loads(out)["rows"]
        assert code == 0 and [r["delta"] for r in rows] == [0.0, 0.5, 1.0]
        assert all(r["holds"] for r in rows)

    def test_bound_flags_vacuous(self):
        rep = json.loads(run(["qrac", "bound", "--n", "6", "--k", "1", "--m", "6"])[1])
        assert rep["bias_bound_vacuous"] and rep["bias_bound"] > 1

    def test_bound_rejects_small_eta(self, capsys):
        code, _ = run(["qrac", "bound", "--n", "10", "--k", "1", "--m", "1", "--eta", "1.2", "--c-eta", "1"])
        assert code == 2

    def test_search_guard(self, capsys):
        code, _ = run(["qrac", "search", "--n", "5", "--k", "1", "--m", "1"])
        assert code == 3 and last_error(capsys)["error"] == "guard"

    def test_missing_arguments(self, capsys):
        assert run(["qrac", "bias"])[0] == 2

    def test_missing_directory(self, tmp_path, capsys):
        code, _ = run(["qrac", "reduce", "--qrac", str(tmp_path / "absent")])
        assert code == 5 and last_error(capsys)["error"] == "io"


class TestLdc:
    @pytest.mark.parametrize("action", ["smooth", "match", "parity", "certify"])
    def test_stages(self, action):
        code, out = run(["ldc", action, "--code", CODE, "--decoder", DECODER, "--delta", "0.1", "--epsilon", "0.3"])
        assert code == 0
        assert json.loads(out)

    def test_malformed_decoder(self, tmp_path, capsys):
        bad = tmp_path / "d.json"
        bad.write_text("{not json")
        code, _ = run(["ldc", "smooth", "--code", CODE, "--decoder", str(bad), "--delta", "0.1", "--epsilon", "0.3"])
        assert code == 5

    def test_bad_delta(self, capsys):
        code, _ = run(["ldc", "smooth", "--code", CODE, "--decoder", DECODER, "--delta", "1.5", "--epsilon", "0.3"])
        assert code == 2

    def test_required_flags(self, capsys):
        assert run(["ldc", "certify", "--code", CODE])[0] == 2


class TestBounds:
    def test_block(self):
        rep = json.loads(run(["bounds", "block", "--k", "10", "--n", "8", "--ell", "3"])[1])
        assert rep["exact"] >= rep["lower"] == pytest.approx(0.343)

    def test_grid_csv(self):
        code, out = run(["bounds", "grid", "--kmax", "4", "--nmax", "3"])
        rows = csv_rows(out)
        assert code == 0 and len(rows) == 3 * (1 + 2 + 3 + 4)
        assert all(float(r["margin"]) >= 0 for r in rows)

    def test_nonfinite_values_are_strings(self):
        assert cli._clean({"a": float("inf")}) == {"a": "inf"}


class TestProcess:
    def test_show_config(self):
        code, out = run(["--show-config"])
        cfg = json.loads(out)
        assert code == 0
        assert cfg["guards"]["qrac_max_search_bits"] == qrac.MAX_SEARCH_BITS
        assert "verify-bcl" in cfg["defaults"] and cfg["tolerances"]["sweep"] == 1e-9

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv(cli.THREADS_ENV, "3")
        assert cli.default_threads() == 3
        monkeypatch.setenv(cli.THREADS_ENV, "zero")
        assert cli.default_threads() == 1

    def test_unknown_flag(self, capsys):
        assert run(["verify-bcl", "--bogus"])[0] == 2
        assert last_error(capsys)["error"] == "usage"

    def test_no_command(self, capsys):
        assert run([])[0] == 2

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "matrixhc", "qrac", "search", "--n", "2", "--k", "2", "--m", "1"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and json.loads(proc.stdout)["p_star"] == 0.5

    def test_error_is_one_json_line(self):
        proc = subprocess.run([sys.executable, "-m", "matrixhc", "qrac", "search", "--n", "6", "--k", "1", "--m", "1"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 3
        lines = proc.stderr.strip().splitlines()
        assert len(lines) == 1 and json.loads(lines[0])["error"] == "guard"


def test_success_bound_needs_explicit_constant(capsys):
    assert run(["qrac", "bound", "--n", "10", "--k", "2", "--m", "1", "--eta", "2"])[0] == 2
    code, out = run(["qrac", "bound", "--n", "10", "--k", "2", "--m", "1", "--eta", "2", "--c-eta", "1"])
    assert code == 0 and json.loads(out)["c_eta"] == 1.0
