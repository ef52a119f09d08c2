"""CLI tests: the executable is a thin adapter over the library."""

import json
from pathlib import Path

import numpy as np
import pytest

from hedgetest.cli import main
from hedgetest.harness import load_config, result_csv, result_json, run_experiment
from hedgetest.pricing import Contract, LatticeModel, lattice_price, solve_hedge_strike

CONFIGS = Path(__file__).parent.parent / "configs"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPrice:
    def test_lattice_call_golden(self, capsys):
        code, out, _ = run_cli(capsys, "price", "--model", "u=1.5,d=0.5",
                               "--contract", "call,S=1.25,tau=3",
                               "--method", "lattice")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == 17 / 64
        assert payload["std_error"] == 0.0
        assert payload["method"] == "lattice"

    def test_output_matches_library_exactly(self, capsys):
        code, out, _ = run_cli(capsys, "price", "--model", "u=1.5,d=0.5",
                               "--contract", "put,S=0.25,tau=3")
        library = lattice_price(LatticeModel(1.5, 0.5, 3), Contract.put(0.25, 3))
        assert json.loads(out)["value"] == library.value

    def test_mc_method_runs(self, capsys):
        code, out, _ = run_cli(capsys, "price", "--model", "u=1.5,d=0.5",
                               "--contract", "call,S=1.25,tau=3",
                               "--method", "mc", "--n", "2000", "--seed", "5")
        assert code == 0
        payload = json.loads(out)
        assert payload["method"] == "monte_carlo"
        assert abs(payload["value"] - 17 / 64) <= 4 * payload["std_error"]

    def test_black_scholes_method(self, capsys):
        code, out, _ = run_cli(capsys, "price", "--model", "u=1.5,d=0.5",
                               "--contract", "call,S=1.0,tau=1",
                               "--method", "black-scholes",
                               "--sigma", "1.0", "--time", "1.0")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(0.3829249225480262)

    def test_malformed_model_is_config_error(self, capsys):
        code, _, err = run_cli(capsys, "price", "--model", "u=1.5",
                               "--contract", "call,S=1.25,tau=3")
        assert code == 2
        assert "error" in err

    def test_arbitrage_model_is_solver_error(self, capsys):
        code, _, _ = run_cli(capsys, "price", "--model", "u=0.9,d=0.5",
                             "--contract", "call,S=1.25,tau=3")
        assert code == 3


class TestHedgeSolve:
    def test_known_roots(self, capsys):
        code, out, _ = run_cli(capsys, "hedge-solve", "--floor", "0.25",
                               "--horizon", "20")
        assert code == 0
        roots = json.loads(out)["roots"]
        assert roots[0] == pytest.approx(0.30866, abs=1e-4)
        assert roots[1] == pytest.approx(0.97285, abs=1e-4)

    def test_matches_library(self, capsys):
        _, out, _ = run_cli(capsys, "hedge-solve", "--floor", "0.25",
                            "--horizon", "20")
        library = solve_hedge_strike(LatticeModel(1.5, 0.5, 20), 0.25, 20)
        assert json.loads(out)["roots"] == library

    def test_unattainable_floor_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "hedge-solve", "--floor", "0.999",
                               "--horizon", "1")
        assert code == 3
        assert "error" in err


class TestSimulate:
    def _config(self, tmp_path, reps=200, seed=17):
        text = (CONFIGS / "table1_kelly.cfg").read_text()
        text = text.replace("replications = 10000", f"replications = {reps}")
        text = text.replace("seed = 271828", f"seed = {seed}")
        path = tmp_path / "small.cfg"
        path.write_text(text)
        return path

    def test_writes_csv_and_json(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        out = tmp_path / "run"
        code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                             "--out", str(out), "--workers", "1")
        assert code == 0
        csv_text = (tmp_path / "run.csv").read_text()
        json_text = (tmp_path / "run.json").read_text()
        assert "# seed = 17" in csv_text
        assert json.loads(json_text)["report"]["n"] == 200

    def test_byte_identical_across_runs_and_workers(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        outputs = []
        for name, workers in (("a", "1"), ("b", "1"), ("c", "3")):
            code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                                 "--out", str(tmp_path / name), "--workers", workers)
            assert code == 0
            outputs.append(((tmp_path / f"{name}.csv").read_bytes(),
                            (tmp_path / f"{name}.json").read_bytes()))
        assert outputs[0] == outputs[1] == outputs[2]

    def test_no_numeric_logic_in_adapter(self, tmp_path, capsys):
        # the CLI artifact equals the library's own serialization byte for byte
        cfg_path = self._config(tmp_path)
        out = tmp_path / "run"
        run_cli(capsys, "simulate", "--config", str(cfg_path), "--out", str(out),
                "--workers", "1")
        result = run_experiment(load_config(cfg_path), workers=1)
        assert (tmp_path / "run.csv").read_text() == result_csv(result)
        assert (tmp_path / "run.json").read_text() == result_json(result)

    def test_seed_override(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        _, out_a, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                              "--workers", "1")
        _, out_b, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                              "--seed", "18", "--workers", "1")
        assert json.loads(out_a)["config"]["seed"] == 17
        assert json.loads(out_b)["config"]["seed"] == 18
        assert out_a != out_b

    def test_missing_config_is_config_error(self, capsys):
        code, _, _ = run_cli(capsys, "simulate", "--config", "/nonexistent.cfg")
        assert code == 2

    def test_shift_requires_change_point(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        code, _, err = run_cli(capsys, "shift", "--config", str(cfg))
        assert code == 2
        assert "change_at" in err

    def test_shift_runs_shift_config(self, tmp_path, capsys):
        text = (CONFIGS / "table2_kelly.cfg").read_text()
        text = text.replace("replications = 10000", "replications = 100")
        path = tmp_path / "shift.cfg"
        path.write_text(text)
        code, out, _ = run_cli(capsys, "shift", "--config", str(path),
                               "--workers", "1")
        assert code == 0
        assert json.loads(out)["config"]["change_at"] == 10


class TestScreen:
    def test_synthetic_null_run(self, tmp_path, capsys):
        out = tmp_path / "screen"
        code, _, _ = run_cli(capsys, "screen", "--synthetic", "null",
                             "--genes", "300", "--samples", "30",
                             "--seed", "23", "--out", str(out))
        assert code == 0
        payload = json.loads((tmp_path / "screen.json").read_text())
        assert payload["report"]["n"] == 300
        lines = (tmp_path / "screen.csv").read_text().strip().split("\n")
        header = [l for l in lines if l.startswith("gene,")]
        assert header == ["gene,lambda,final_wealth,max_wealth,rejected,crossing_time"]
        assert sum(1 for l in lines if l.startswith("g") and "," in l
                   and not l.startswith("gene,")) == 300

    def test_matrix_and_synthetic_mutually_exclusive(self, capsys):
        code, _, _ = run_cli(capsys, "screen", "--synthetic", "null",
                             "--matrix", "x.csv")
        assert code == 2

    def test_matrix_file_run(self, tmp_path, capsys):
        rng = np.random.default_rng(7)
        lines = ["gene," + ",".join(["normal"] * 10 + ["tumor"] * 10)]
        for g in range(5):
            vals = rng.standard_normal(20)
            lines.append(f"g{g}," + ",".join(f"{v:.6f}" for v in vals))
        path = tmp_path / "matrix.csv"
        path.write_text("\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "screen", "--matrix", str(path),
                               "--no-log", "--seed", "29")
        assert code == 0
        assert json.loads(out)["report"]["n"] == 5


class TestIngest:
    def test_transforms_matrix_to_sequences(self, tmp_path, capsys):
        rng = np.random.default_rng(11)
        lines = ["gene," + ",".join(["normal"] * 6 + ["tumor"] * 6)]
        for g in range(4):
            vals = np.exp(rng.standard_normal(12))
            lines.append(f"g{g}," + ",".join(f"{v:.6f}" for v in vals))
        src = tmp_path / "matrix.csv"
        src.write_text("\n".join(lines) + "\n")
        dst = tmp_path / "sequences.csv"
        code, _, _ = run_cli(capsys, "ingest", "--input", str(src),
                             "--output", str(dst))
        assert code == 0
        out_lines = dst.read_text().strip().split("\n")
        assert out_lines[1].startswith("# held_out_columns = 6 7")
        data = [l for l in out_lines if l.startswith("g") and not l.startswith("gene,")]
        assert len(data) == 4
        fields = data[0].split(",")
        assert len(fields) == 2 + 10   # gene, lambda, ten test samples

    def test_bad_input_is_config_error(self, capsys):
        code, _, _ = run_cli(capsys, "ingest", "--input", "/nope.csv",
                             "--output", "/tmp/out.csv")
        assert code == 2
