import json

import numpy as np
import pytest
from click.testing import CliRunner

from haqt import (DensityMatrix, build_basis_set, born_probabilities,
                  density_matrix_from_json, infidelity, save_state)
from haqt.cli import main
from haqt.gellmann import a_block_size

import oracles
from conftest import conditioned_state


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, tmp_path, *args):
    return runner.invoke(main, ["--output-dir", str(tmp_path), *map(str, args)])


class TestBases:
    def test_d10_passes(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "bases", "--dim", 10)
        assert result.exit_code == 0, result.output
        assert "19 bases" in result.output and "PASS" in result.output

    def test_d4_coverage(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "bases", "--dim", 4)
        assert result.exit_code == 0
        payload = json.loads((tmp_path / "bases_d4.json").read_text())
        assert len(payload["bases"]) == 7
        pairs = [(t["alpha"], t["j"], t["k"])
                 for b in payload["bases"] for t in b["provenance"]
                 if t["kind"] == "pair" and t["sign"] == "+"]
        assert len(pairs) == len(set(pairs)) == 12

    def test_dim_one_is_usage_error(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "bases", "--dim", 1)
        assert result.exit_code == 2


class TestSimulate:
    def test_fixed_seed_reproducible(self, runner, tmp_path):
        args = ("--seed", 77, "simulate", "--dim", 2, "--protocol", "haqt",
                "--shots", 2000)
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        r1 = invoke(runner, tmp_path, *args, "--out", out_a)
        r2 = invoke(runner, tmp_path, *args, "--out", out_b)
        assert r1.exit_code == 0, r1.output
        assert r2.exit_code == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_missing_state_file(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "simulate", "--dim", 2, "--protocol",
                        "sqt", "--shots", 100, "--state", tmp_path / "nope.json")
        assert result.exit_code == 2

    def test_median_infidelity_near_qubit_bound(self, runner, tmp_path):
        # interior qubit state, 10^4 shots: median N*infidelity should sit
        # near the d=2 accuracy bound 2.25
        state_path = tmp_path / "state.json"
        save_state(conditioned_state(2, 800, min_eig=0.2), state_path)
        result = invoke(runner, tmp_path, "simulate", "--dim", 2,
                        "--protocol", "haqt", "--shots", 10 ** 4,
                        "--trials", 100, "--state", state_path,
                        "--out", tmp_path / "sim.json")
        assert result.exit_code == 0, result.output
        payload = json.loads((tmp_path / "sim.json").read_text())
        assert 2.25e-4 * 0.8 <= payload["median_infidelity"] <= 2.25e-4 * 1.2

    def test_save_counts_both_stages(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "simulate", "--dim", 2, "--protocol",
                        "haqt", "--shots", 1000, "--save-counts",
                        tmp_path / "run")
        assert result.exit_code == 0, result.output
        for stage in (1, 2):
            assert (tmp_path / f"run-stage{stage}.csv").exists()
            assert (tmp_path / f"run-stage{stage}.json").exists()

    def test_slit_state_source(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "simulate", "--dim", 3, "--protocol",
                        "sqt", "--shots", 900, "--slit-t", "1,1,1",
                        "--slit-phi", "0,0.5,1.0")
        assert result.exit_code == 0, result.output


class TestReconstruct:
    def test_round_trip_matches_simulate(self, runner, tmp_path):
        state_path = tmp_path / "state.json"
        save_state(conditioned_state(2, 801), state_path)
        sim_out = tmp_path / "sim.json"
        r = invoke(runner, tmp_path, "--seed", 3, "simulate", "--dim", 2,
                   "--protocol", "haqt", "--shots", 1500, "--state", state_path,
                   "--save-counts", tmp_path / "run", "--out", sim_out)
        assert r.exit_code == 0, r.output
        rec_out = tmp_path / "rec.json"
        r = invoke(runner, tmp_path, "reconstruct",
                   "--counts", tmp_path / "run-stage1.csv",
                   "--counts", tmp_path / "run-stage2.csv",
                   "--out", rec_out)
        assert r.exit_code == 0, r.output
        sim_est = density_matrix_from_json(
            json.loads(sim_out.read_text())["trials"][0]["result"]["estimate"])
        rec_est = density_matrix_from_json(
            json.loads(rec_out.read_text())["estimate"])
        assert infidelity(sim_est, rec_est) <= 1e-12

    def test_exact_frequency_counts(self, runner, tmp_path):
        d = 3
        rho = conditioned_state(d, 802)
        bs = build_basis_set(d)
        rows = ["basis_label,outcome_index,count"]
        for b, basis in enumerate(bs.bases):
            counts = oracles.exact_counts(born_probabilities(rho, basis).probs,
                                          10 ** 6)
            rows.extend(f"{b},{m},{counts[m]}" for m in range(d))
        (tmp_path / "exact.csv").write_text("\n".join(rows) + "\n")
        sidecar = {"dim": d, "n_bases": len(bs), "N": len(bs) * 10 ** 6,
                   "seed": None, "frame_hash": bs.frame_hash,
                   "frame": [[[1.0 if i == j else 0.0, 0.0] for j in range(d)]
                             for i in range(d)]}
        (tmp_path / "exact.json").write_text(json.dumps(sidecar))
        truth_path = tmp_path / "truth.json"
        save_state(rho, truth_path)
        result = invoke(runner, tmp_path, "reconstruct", "--counts",
                        tmp_path / "exact.csv", "--truth", truth_path,
                        "--out", tmp_path / "rec.json")
        assert result.exit_code == 0, result.output
        est = density_matrix_from_json(
            json.loads((tmp_path / "rec.json").read_text())["estimate"])
        assert infidelity(rho, est) <= 1e-6

    def test_malformed_row_is_usage_error(self, runner, tmp_path):
        r = invoke(runner, tmp_path, "--seed", 3, "simulate", "--dim", 2,
                   "--protocol", "sqt", "--shots", 300,
                   "--save-counts", tmp_path / "run")
        assert r.exit_code == 0
        csv_path = tmp_path / "run.csv"
        lines = csv_path.read_text().strip().split("\n")
        lines[2] = "0,zero,10"
        csv_path.write_text("\n".join(lines) + "\n")
        result = invoke(runner, tmp_path, "reconstruct", "--counts", csv_path)
        assert result.exit_code == 2
        assert "row 3" in result.output


class TestFisher:
    def test_bound_printout(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "fisher", "--dim", 10,
                        "--shots", 398100)
        assert result.exit_code == 0
        assert "gm_bound = 6.838734e-04" in result.output
        assert "alpha = 1.727273" in result.output

    def test_maximally_mixed_qubit_qfim(self, runner, tmp_path):
        state_path = tmp_path / "mixed.json"
        save_state(DensityMatrix.maximally_mixed(2), state_path)
        result = invoke(runner, tmp_path, "fisher", "--dim", 2, "--state",
                        state_path, "--out-prefix", tmp_path / "f")
        assert result.exit_code == 0, result.output
        qfim_matrix = np.loadtxt(tmp_path / "f_qfim.csv", delimiter=",")
        na = a_block_size(2)
        assert np.allclose(qfim_matrix[:na, :na], np.eye(na))

    def test_rank_deficient_is_domain_error(self, runner, tmp_path):
        state_path = tmp_path / "pure.json"
        save_state(DensityMatrix.from_matrix(np.diag([1.0, 0.0]).astype(complex)),
                   state_path)
        result = invoke(runner, tmp_path, "fisher", "--dim", 2,
                        "--state", state_path)
        assert result.exit_code == 1
        assert "QFIM singular" in result.output


class TestBench:
    def _write_spec(self, tmp_path, **overrides):
        spec = dict(dim=2, protocols=["sqt"], shot_grid=[300], trials=2,
                    master_seed=5, state={"type": "random_full_rank"})
        spec.update(overrides)
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        return path

    def test_dry_run(self, runner, tmp_path):
        path = self._write_spec(tmp_path)
        result = invoke(runner, tmp_path, "bench", "--spec", path, "--dry-run")
        assert result.exit_code == 0
        assert "dry run" in result.output

    def test_end_to_end(self, runner, tmp_path):
        path = self._write_spec(tmp_path, protocols=["sqt", "haqt"])
        out_dir = tmp_path / "out"
        result = invoke(runner, tmp_path, "bench", "--spec", path, "--out", out_dir)
        assert result.exit_code == 0, result.output
        for name in ("report.csv", "report.json", "report.svg"):
            assert (out_dir / name).exists()

    def test_invalid_spec_is_usage_error(self, runner, tmp_path):
        path = self._write_spec(tmp_path, protocols=["mystery"])
        result = invoke(runner, tmp_path, "bench", "--spec", path)
        assert result.exit_code == 2
