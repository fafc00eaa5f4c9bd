import json
import subprocess
import sys

import pytest

from pbitsim.cli import main


def run_cli(args):
    return main([str(a) for a in args])


class TestGenerators:
    def test_gen_hs_and_encode(self, tmp_path, capsys):
        assert run_cli(["gen-hs", "--n", 20, "--m", 8, "--k", 4, "--seed", 1, "--out", tmp_path]) == 0
        assert (tmp_path / "instance.hg").exists()
        assert (tmp_path / "manifest.json").exists()
        assert run_cli([
            "encode", "--kind", "hs", "--input", tmp_path / "instance.hg",
            "--out", tmp_path, "--name", "m.hubo",
        ]) == 0
        assert (tmp_path / "m.hubo").read_text().startswith("hubo 20")

    def test_gen_er(self, tmp_path):
        assert run_cli(["gen-er", "--n", 12, "--p", 0.5, "--seed", 2, "--out", tmp_path]) == 0
        text = (tmp_path / "instance.ising").read_text()
        assert text.splitlines()[0] == "12"

    def test_gen_hs_infeasible_is_domain_error(self, tmp_path, capsys):
        assert run_cli(["gen-hs", "--n", 3, "--m", 1, "--k", 9, "--out", tmp_path]) == 1
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["gen-hs", "--n", "not-a-number"])
        assert exc.value.code == 2


class TestSolveCommands:
    @pytest.fixture
    def model_file(self, tmp_path):
        run_cli(["gen-hs", "--n", 15, "--m", 6, "--k", 3, "--seed", 5, "--out", tmp_path])
        run_cli(["encode", "--kind", "hs", "--input", tmp_path / "instance.hg", "--out", tmp_path])
        return tmp_path / "model.hubo"

    def test_colour(self, model_file, tmp_path, capsys):
        assert run_cli(["colour", "--model", model_file, "--out", tmp_path]) == 0
        groups = json.loads((tmp_path / "groups.json").read_text())
        assert groups["num_groups"] >= 1

    def test_solve_sa_deterministic(self, model_file, tmp_path):
        cfg = tmp_path / "sa.cfg"
        cfg.write_text("[sa]\ntemp_range = 0.01-1.1\niters = 5*N\nsteps = 20\nreps = 3\n")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for out in (out1, out2):
            assert run_cli([
                "solve-sa", "--model", model_file, "--config", cfg,
                "--seed", 7, "--out", out,
            ]) == 0
        assert (out1 / "result.json").read_bytes() == (out2 / "result.json").read_bytes()
        assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()

    def test_solve_pt(self, model_file, tmp_path):
        cfg = tmp_path / "pt.cfg"
        cfg.write_text("[pt]\ntemp_range = 0.5-10\niters = 200\nrepls = 4\nswap = 25\nreps = 2\n")
        assert run_cli([
            "solve-pt", "--model", model_file, "--config", cfg, "--seed", 3, "--out", tmp_path / "pt",
        ]) == 0
        result = json.loads((tmp_path / "pt" / "result.json").read_text())
        assert result["method"] == "pt"

    def test_wrong_config_kind(self, model_file, tmp_path, capsys):
        cfg = tmp_path / "pt.cfg"
        cfg.write_text("[pt]\ntemp_range = 0.5-10\niters = 10\nrepls = 2\nswap = 5\n")
        assert run_cli(["solve-sa", "--model", model_file, "--config", cfg, "--out", tmp_path]) == 1

    def test_inputs_never_mutated(self, model_file, tmp_path):
        cfg = tmp_path / "sa.cfg"
        cfg.write_text("[sa]\ntemp_range = 0.01-1.1\niters = 100\nsteps = 10\nreps = 2\n")
        before = model_file.read_bytes()
        run_cli(["solve-sa", "--model", model_file, "--config", cfg, "--seed", 1,
                 "--out", tmp_path / "x"])
        assert model_file.read_bytes() == before

    def test_format_json_summary(self, model_file, tmp_path, capsys):
        cfg = tmp_path / "sa.cfg"
        cfg.write_text("[sa]\ntemp_range = 0.01-1.1\niters = 50\nsteps = 10\nreps = 2\n")
        assert run_cli(["solve-sa", "--model", model_file, "--config", cfg,
                        "--format", "json", "--out", tmp_path / "j"]) == 0
        summary = json.loads(capsys.readouterr().out.strip())
        assert "best_energy" in summary and summary["backend"] in ("compiled", "python")

    def test_format_csv_summary(self, model_file, tmp_path, capsys):
        assert run_cli(["colour", "--model", model_file, "--format", "csv",
                        "--out", tmp_path / "c"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "num_groups,avg_group_size,max_degree"


class TestTransformCommands:
    def test_quadratise_reports_aux(self, tmp_path, capsys):
        model = tmp_path / "m.hubo"
        model.write_text("hubo 5\n1.0 0 1 2 3 4\n")
        assert run_cli(["quadratise", "--model", model, "--out", tmp_path]) == 0
        out = capsys.readouterr().out
        assert "aux=3" in out  # k-2 rule for one order-5 term
        assert (tmp_path / "model_quadratic.hubo").exists()

    def test_sparsify(self, tmp_path, capsys):
        run_cli(["gen-er", "--n", 20, "--p", 1.0, "--seed", 1, "--out", tmp_path])
        assert run_cli([
            "sparsify", "--input", tmp_path / "instance.ising", "--budget", 5, "--out", tmp_path,
        ]) == 0
        assert (tmp_path / "sparse.ising").exists()
        metrics = (tmp_path / "sparsify_metrics.csv").read_text().splitlines()
        assert metrics[0] == "budget,physical_nodes,r_N,r_S"

    def test_tts_landmark(self, capsys):
        assert run_cli(["tts", "--iters", 2000, "--n", 1024, "--freq", 2.7e9]) == 0
        printed = float(capsys.readouterr().out.strip())
        assert 1.0e-5 <= printed <= 2.0e-5


class TestTspCommand:
    def test_kmc_on_packaged_instance(self, tmp_path, capsys):
        assert run_cli([
            "tsp-kmc", "--instance", "burma14", "--seed", 4, "--out", tmp_path,
        ]) == 0
        tour = (tmp_path / "tour.txt").read_text().splitlines()
        assert tour[0].startswith("tour cost=")
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert "levels" in manifest


class TestStudyCommand:
    def test_study_and_replay(self, tmp_path):
        spec = tmp_path / "s.cfg"
        spec.write_text(
            "[study]\nkind = groups-heatmap\nseed = 1\n"
            "[problem]\nn = 40\nk_range = 2 3\nm_range = 4 8\nsamples = 2\n"
        )
        assert run_cli(["study", "--spec", spec, "--out", tmp_path / "out"]) == 0
        assert run_cli(["study", "--replay", tmp_path / "out" / "manifest.json"]) == 0

    def test_study_requires_spec_or_replay(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["study"])
        assert exc.value.code == 2


class TestEntrypoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "pbitsim.cli", "tts", "--iters", "2000", "--n", "1024", "--freq", "2.7e9"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert float(proc.stdout.strip()) == pytest.approx(1.481e-5, rel=1e-3)
