import json

import pytest
import yaml

from tvmarkov.cli import main
from tvmarkov.config import ScenarioConfig, load_config, validate
from tvmarkov.errors import ConfigValidationError
from tvmarkov.presets import PRESET_NAMES


def write_config(tmp_path, name="scenario.yaml", **overrides):
    cfg = {
        "experiment": "bounds",
        "model": {"preset": "finite-affine"},
        "n_list": [50, 100],
        "u_grid": [0.0, 0.5, 1.0],
        "seed": 11,
        "output_dir": str(tmp_path / "out"),
        "figures": False,
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return path


class TestConfig:
    def test_load_round_trip(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        assert cfg.experiment == "bounds"
        assert cfg.n_list == [50, 100]
        assert cfg.bandwidth(100) == pytest.approx(100 ** -0.2)

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, typo_key=3)
        with pytest.raises(ConfigValidationError):
            load_config(path)

    def test_missing_required_key_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"experiment": "bounds"}))
        with pytest.raises(ConfigValidationError):
            load_config(path)

    def test_default_u_grid(self, tmp_path):
        path = tmp_path / "minimal.yaml"
        path.write_text(yaml.safe_dump({
            "experiment": "bounds",
            "model": {"preset": "finite-affine"},
            "n_list": [50]}))
        cfg = load_config(path)
        assert len(cfg.u_grid) == 21
        assert cfg.u_grid[0] == 0.0 and cfg.u_grid[-1] == 1.0

    def test_validate_diagnostics(self):
        cfg = ScenarioConfig(experiment="nope", model={"preset": "bogus"},
                             n_list=[10, 5], u_grid=[0.5, 1.5], replicates=0)
        problems = validate(cfg)
        assert len(problems) == 5

    def test_validate_inar_explosive(self):
        cfg = ScenarioConfig(experiment="bounds",
                             model={"preset": "inar1",
                                    "alpha": [{"poly": [0.9, 0.5]}]},
                             n_list=[50], u_grid=[0.5])
        assert any("model" in p for p in validate(cfg))


class TestCliCommands:
    def test_list_presets(self, capsys):
        assert main(["list-presets"]) == 0
        out = capsys.readouterr().out
        for name in PRESET_NAMES:
            assert name in out

    def test_validate_good_config(self, tmp_path, capsys):
        code = main(["validate", "--config", str(write_config(tmp_path))])
        assert code == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_reports_problems(self, tmp_path, capsys):
        path = write_config(tmp_path, u_grid=[0.5, 1.5])
        assert main(["validate", "--config", path.as_posix()]) == 1
        assert "u_grid" in capsys.readouterr().out

    def test_structural_error_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, typo_key=1)
        assert main(["validate", "--config", path.as_posix()]) == 2
        assert "error" in capsys.readouterr().err

    def test_run_bounds_passes_and_writes_outputs(self, tmp_path, capsys):
        path = write_config(tmp_path)
        assert main(["run", "--config", path.as_posix()]) == 0
        out = capsys.readouterr().out
        assert "PASS bounds/slope" in out
        out_dir = tmp_path / "out"
        report = json.loads((out_dir / "report.json").read_text())
        assert report["all_passed"] is True
        assert report["environment"]["seed"] == 11
        assert (out_dir / "data" / "bounds.csv").exists()
        assert (out_dir / "data" / "bounds_summary.csv").exists()
        assert (out_dir / "timings.csv").exists()

    def test_run_is_deterministic(self, tmp_path, capsys):
        path = write_config(tmp_path)
        for sub in ("a", "b"):
            assert main(["run", "--config", path.as_posix(),
                         "--out", str(tmp_path / sub)]) == 0
        capsys.readouterr()
        for rel in ("report.json", "data/bounds.csv", "data/bounds_summary.csv"):
            a = (tmp_path / "a" / rel).read_bytes()
            b = (tmp_path / "b" / rel).read_bytes()
            assert a == b, rel

    def test_threads_flag_matches_single_thread(self, tmp_path, capsys):
        path = write_config(tmp_path)
        assert main(["run", "--config", path.as_posix(),
                     "--out", str(tmp_path / "t1"), "--threads", "1"]) == 0
        assert main(["run", "--config", path.as_posix(),
                     "--out", str(tmp_path / "t4"), "--threads", "4"]) == 0
        capsys.readouterr()
        assert ((tmp_path / "t1" / "report.json").read_bytes()
                == (tmp_path / "t4" / "report.json").read_bytes())

    def test_seed_override_lands_in_report(self, tmp_path, capsys):
        path = write_config(tmp_path)
        assert main(["run", "--config", path.as_posix(), "--seed", "99",
                     "--out", str(tmp_path / "seeded")]) == 0
        capsys.readouterr()
        report = json.loads((tmp_path / "seeded" / "report.json").read_text())
        assert report["environment"]["seed"] == 99

    def test_figures_rendered_next_to_data(self, tmp_path, capsys):
        path = write_config(tmp_path, figures=True,
                            output_dir=str(tmp_path / "figs"))
        assert main(["run", "--config", path.as_posix()]) == 0
        capsys.readouterr()
        assert (tmp_path / "figs" / "figures" / "bounds.png").stat().st_size > 0

    def test_no_figures_flag(self, tmp_path, capsys):
        path = write_config(tmp_path, figures=True,
                            output_dir=str(tmp_path / "nofigs"))
        assert main(["run", "--config", path.as_posix(), "--no-figures"]) == 0
        capsys.readouterr()
        assert not (tmp_path / "nofigs" / "figures").exists()

    def test_run_mixing_experiment(self, tmp_path, capsys):
        path = write_config(tmp_path, experiment="mixing", n_list=[60],
                            j_max=20, output_dir=str(tmp_path / "mix"))
        assert main(["run", "--config", path.as_posix()]) == 0
        out = capsys.readouterr().out
        assert "PASS mixing/bound-dominates" in out
        assert "PASS mixing/decay-rate" in out
        lines = (tmp_path / "mix" / "data" / "mixing.csv").read_text().splitlines()
        assert lines[0] == "j,value,bound,se"
        assert len(lines) == 21
