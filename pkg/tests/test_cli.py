import json
import os

import pytest

from optstrain.cli import main
from optstrain.flow import load_flow
from optstrain.pipeline import PipelineConfig, read_features_csv


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_synth")
    code = main([
        "synth", "--out", str(root), "--classes", "2", "--subjects", "2",
        "--videos-per-subject", "1", "--size", "48", "--frames", "10", "--seed", "3",
    ])
    assert code == 0
    return root


class TestSynth:
    def test_outputs_exist(self, synth_dir):
        manifest = synth_dir / "manifest.json"
        assert manifest.exists()
        records = json.loads(manifest.read_text())
        assert len(records) == 4
        for rec in records:
            assert os.path.isdir(rec["frame_dir"])
            assert len(os.listdir(rec["frame_dir"])) == 10


class TestExtract:
    def test_flow_stage(self, synth_dir, tmp_path):
        out = tmp_path / "flow_out"
        code = main([
            "extract", "--manifest", str(synth_dir / "manifest.json"),
            "--out", str(out), "--stage", "flow",
        ])
        assert code == 0
        dirs = sorted(os.listdir(out / "flow"))
        assert len(dirs) == 4
        files = sorted(os.listdir(out / "flow" / dirs[0]))
        assert len(files) == 9  # frames - 1 pairs
        flow = load_flow(out / "flow" / dirs[0] / files[0])
        assert flow.width == 48 and flow.height == 48

    def test_strain_stage(self, synth_dir, tmp_path):
        out = tmp_path / "strain_out"
        code = main([
            "extract", "--manifest", str(synth_dir / "manifest.json"),
            "--out", str(out), "--stage", "strain",
        ])
        assert code == 0
        dirs = sorted(os.listdir(out / "strain"))
        files = sorted(os.listdir(out / "strain" / dirs[0]))
        assert len(files) == 9
        assert files[0].endswith(".png")

    def test_lbptop_stage(self, synth_dir, tmp_path):
        out = tmp_path / "lbptop_out"
        code = main([
            "extract", "--manifest", str(synth_dir / "manifest.json"),
            "--out", str(out), "--stage", "lbptop",
        ])
        assert code == 0
        features = read_features_csv(out / "lbptop.csv")
        assert len(features) == 4
        assert features[0].values.shape == (5 * 5 * 3 * 15,)

    def test_all_stage_writes_matrices(self, synth_dir, tmp_path):
        out = tmp_path / "all_out"
        code = main([
            "extract", "--manifest", str(synth_dir / "manifest.json"),
            "--out", str(out), "--stage", "all", "--jobs", "2",
        ])
        assert code == 0
        for name in ("osf.csv", "osw.csv", "combined.csv"):
            assert (out / name).exists()
        combined = read_features_csv(out / "combined.csv")
        assert combined[0].values.shape == (3625,)


class TestEvaluateAndReport:
    def test_evaluate_writes_report(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "eval_out"
        code = main([
            "evaluate", "--manifest", str(synth_dir / "manifest.json"),
            "--out", str(out), "--jobs", "2",
        ])
        assert code == 0
        assert (out / "report.json").exists()
        printed = capsys.readouterr().out
        assert "micro accuracy" in printed

        code = main(["report", "--report", str(out / "report.json")])
        assert code == 0
        printed = capsys.readouterr().out
        assert "confusion matrix" in printed
        assert "macro_by_subject" in printed

    def test_config_flag_overrides(self, synth_dir, tmp_path):
        out = tmp_path / "override_out"
        code = main([
            "extract", "--manifest", str(synth_dir / "manifest.json"),
            "--out", str(out), "--stage", "osf",
            "--rho_l", "0.1", "--resample", "false", "--osf_size", "20",
        ])
        assert code == 0
        written = PipelineConfig.load(out / "config.txt")
        assert written.rho_l == 0.1
        assert written.resample is False
        features = read_features_csv(out / "osf.csv")
        assert features[0].values.shape == (400,)

    def test_config_file_plus_flag(self, synth_dir, tmp_path):
        cfg_path = tmp_path / "base.cfg"
        cfg_path.write_text("rho_l = 0.2\n")
        out = tmp_path / "cfgrun"
        code = main([
            "extract", "--manifest", str(synth_dir / "manifest.json"),
            "--config", str(cfg_path), "--out", str(out), "--stage", "osw",
            "--rho_u", "0.15",
        ])
        assert code == 0
        written = PipelineConfig.load(out / "config.txt")
        assert written.rho_l == 0.2   # from file
        assert written.rho_u == 0.15  # from flag
