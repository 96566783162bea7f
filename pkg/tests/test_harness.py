"""Unit tests for the config layer, experiment runners and CLI."""

import json

import numpy as np
import pytest

from otl import harness
from otl.errors import ArtifactError, ConfigError

FAST = {
    "geometry.h": "0.05",
    "metrics.radii": "dyadic:0.3:0.3",
}


def write_config(path, overrides=None):
    values = dict(FAST)
    values.update(overrides or {})
    with open(path, "w") as fh:
        for k, v in values.items():
            fh.write(f"{k} = {v}\n")
    return str(path)


class TestConfig:
    def test_defaults_and_hash_stability(self, tmp_path):
        path = write_config(tmp_path / "a.cfg")
        c1 = harness.ExperimentConfig.from_file(path)
        c2 = harness.ExperimentConfig.from_file(path)
        assert c1.config_hash() == c2.config_hash()
        assert len(c1.config_hash()) == 16

    def test_hash_changes_with_values(self, tmp_path):
        c1 = harness.ExperimentConfig.from_file(write_config(tmp_path / "a.cfg"))
        c2 = harness.ExperimentConfig.from_file(
            write_config(tmp_path / "b.cfg", {"seed": "5"}))
        assert c1.config_hash() != c2.config_hash()

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path / "a.cfg", {"geometry.weird": "1"})
        with pytest.raises(ConfigError):
            harness.ExperimentConfig.from_file(path)

    def test_invalid_geometry_names_key(self, tmp_path):
        path = write_config(tmp_path / "a.cfg", {"geometry.rho": "2.0"})
        with pytest.raises(ConfigError, match="geometry.rho"):
            harness.ExperimentConfig.from_file(path)

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "a.cfg"
        path.write_text("# comment\n\ngeometry.h = 0.05  # trailing\n")
        c = harness.ExperimentConfig.from_file(str(path))
        assert c.values["geometry.h"] == "0.05"

    def test_metric_center_specs(self, tmp_path):
        c = harness.ExperimentConfig.from_file(write_config(tmp_path / "a.cfg"))
        m = c.build_mesh()
        centers = c.metric_centers(m)
        assert centers.shape == (8, 2)
        assert np.allclose(np.linalg.norm(centers, axis=1), 0.5)
        c.values["metrics.centers"] = "grid:5"
        assert c.metric_centers(m).shape[1] == 2
        c.values["metrics.centers"] = "ring:3"
        with pytest.raises(ConfigError):
            c.metric_centers(m)

    def test_metric_radii_dyadic(self, tmp_path):
        c = harness.ExperimentConfig.from_file(write_config(tmp_path / "a.cfg"))
        c.values["metrics.radii"] = "dyadic:0.05:0.2"
        assert np.allclose(c.metric_radii(), [0.2, 0.1, 0.05])


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = harness.ExperimentConfig.from_file(write_config(tmp / "exp.cfg"))
    out = tmp / "out"
    harness.run_solve(cfg, out)
    return cfg, out


class TestRunners:
    def test_artifacts_exist(self, run_dir):
        cfg, out = run_dir
        for name in ("vertices.csv", "triangles.csv", "interface.csv",
                     "solution.csv", "gradient.csv", "trace.json",
                     "manifest.json"):
            assert (out / name).exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config_hash"] == cfg.config_hash()

    def test_metrics_report(self, run_dir):
        cfg, out = run_dir
        report = harness.run_metrics(cfg, out)
        assert report.alpha_hat_exploratory
        data = json.loads((out / "report.json").read_text())
        assert data["config_hash"] == cfg.config_hash()
        assert len(data["lb_ratios"]) > 0
        assert (out / "metrics.csv").read_text().startswith(
            f"# config_hash={cfg.config_hash()}")

    def test_metrics_rejects_foreign_artifacts(self, run_dir, tmp_path):
        cfg, out = run_dir
        other = harness.ExperimentConfig.from_file(
            write_config(tmp_path / "other.cfg", {"seed": "9"}))
        with pytest.raises(ArtifactError):
            harness.run_metrics(other, out)

    def test_convergence_single_h(self, run_dir, tmp_path):
        cfg, _ = run_dir
        rows = harness.run_convergence(cfg, [0.125], tmp_path)
        assert len(rows) == 1
        assert rows[0][3] == ""  # no EOC with a single resolution
        text = (tmp_path / "convergence.csv").read_text()
        assert text.splitlines()[1] == "h,l2_error,linf_error,eoc_l2,eoc_linf"

    def test_convergence_rejects_singular_data(self, tmp_path):
        cfg = harness.ExperimentConfig.from_file(write_config(
            tmp_path / "a.cfg",
            {"data.kind": "angular-power", "data.s": "0.3"}))
        with pytest.raises(ConfigError):
            harness.run_convergence(cfg, [0.125], tmp_path)


class TestCli:
    def test_validate_g(self, tmp_path, capsys):
        path = write_config(tmp_path / "a.cfg")
        assert harness.main(["validate-g", "--config", path]) == 0
        assert json.loads(capsys.readouterr().out)["pass"]

    def test_solve_and_rerun_identical(self, tmp_path):
        path = write_config(tmp_path / "a.cfg")
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert harness.main(["solve", "--config", path, "--out", str(out1)]) == 0
        assert harness.main(["solve", "--config", path, "--out", str(out2)]) == 0
        assert (out1 / "solution.csv").read_bytes() == \
            (out2 / "solution.csv").read_bytes()

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path / "a.cfg", {"geometry.rho": "2.0"})
        assert harness.main(["solve", "--config", path]) == 2
        assert "geometry.rho" in capsys.readouterr().err

    def test_missing_artifacts_exit_code(self, tmp_path):
        path = write_config(tmp_path / "a.cfg")
        assert harness.main(["metrics", "--config", path,
                             "--out", str(tmp_path / "empty")]) == 3

    def test_oracle_subcommand(self, tmp_path, capsys):
        path = write_config(tmp_path / "a.cfg")
        out = tmp_path / "o"
        assert harness.main(["oracle", "--config", path, "--out", str(out)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["u_inner"] == pytest.approx(np.sqrt(2.0) - 1.0)
        assert (out / "oracle_profile.csv").exists()

    def test_lemmas_serrin(self, capsys):
        assert harness.main(["lemmas", "serrin", "--trials", "10000"]) == 0
        assert json.loads(capsys.readouterr().out)["violations"] == []
