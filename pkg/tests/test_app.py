import json
import os

import pytest

from app import REPORT_FILE, ModelSetApp
from data.experiment import parse_experiment
from main import EXIT_CONFIG, EXIT_OK, main


def small_config(tmp_path, tasks):
    return parse_experiment({
        "name": "small",
        "scheme": {"example": "fibonacci"},
        "region": {"radii": [25, 50, 100]},
        "comb": {"weight_model": "unit"},
        "diffraction": {"freq_box": [[0, 5]]},
        "tasks": tasks,
        "output": str(tmp_path / "out"),
        "seed": 1,
    })


def report(config):
    with open(os.path.join(config.output, REPORT_FILE)) as f:
        return f.read().splitlines()


def test_small_run(tmp_path):
    config = small_config(tmp_path, ["points", "autocorr", "decompose", "diffract"])
    app = ModelSetApp(config, threads=2)
    assert app.run() == 0
    lines = report(config)
    assert lines[:4] == ["TASK points OK", "TASK autocorr OK", "TASK decompose OK", "TASK diffract OK"]
    assert any(line.startswith("MEASURE packing_radius ") for line in lines)
    for name in ("patch.csv", "points_summary.csv", "autocorrelation.csv", "null_mean.csv",
                 "gamma_S.csv", "gamma_0.csv", "spectrum.csv", "spectrum_autocorr.csv"):
        assert os.path.exists(os.path.join(config.output, name)), name


def test_failed_task_is_isolated(tmp_path):
    config = small_config(tmp_path, ["autocorr", "points"])
    app = ModelSetApp(config, threads=1)

    def broken():
        raise RuntimeError("boom")

    app.tasks['autocorr'] = broken
    assert app.run() == 1
    assert report(config)[:2] == ["TASK autocorr FAILED", "TASK points OK"]


def test_main_list_examples(tmp_path, capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["--log-file", str(tmp_path / "run.log"), "list-examples"])
    assert exit_info.value.code == EXIT_OK
    assert "fibonacci" in capsys.readouterr().out


def test_main_bad_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"tasks": ["points"], "scheme": {"example": "fibonacci"},
                                "region": {"radii": [10, 5, 20]}}))
    with pytest.raises(SystemExit) as exit_info:
        main(["--log-file", str(tmp_path / "run.log"), "run", str(path)])
    assert exit_info.value.code == EXIT_CONFIG


def test_main_eta_reaches_window(tmp_path, monkeypatch):
    path = tmp_path / "points.json"
    path.write_text(json.dumps({"name": "eta", "scheme": {"example": "fibonacci"},
                                "region": {"radii": [10, 20, 40]}, "tasks": ["points"],
                                "thresholds": {"eta": 1e-9}}))
    seen = {}
    init = ModelSetApp.__init__

    def spy(self, config, *args, **kwargs):
        seen['eta'] = config.window.eta
        init(self, config, *args, **kwargs)

    monkeypatch.setattr(ModelSetApp, "__init__", spy)
    with pytest.raises(SystemExit) as exit_info:
        main(["--log-file", str(tmp_path / "run.log"), "run", str(path), "--eta", "0.001",
              "--out", str(tmp_path / "out")])
    assert exit_info.value.code == EXIT_OK
    assert seen['eta'] == 0.001


@pytest.mark.slow
@pytest.mark.parametrize("name", ["fibonacci_full", "fibonacci_bernoulli"])
def test_bundled_fibonacci_configs(tmp_path, name):
    path = os.path.join(os.path.dirname(__file__), os.pardir, "configs", f"{name}.json")
    out = tmp_path / name
    with pytest.raises(SystemExit) as exit_info:
        main(["--log-file", str(tmp_path / "run.log"), "run", path, "--out", str(out)])
    assert exit_info.value.code == EXIT_OK
    with open(out / REPORT_FILE) as f:
        lines = f.read().splitlines()
    claims = [line.split()[1:3] for line in lines if line.startswith("CLAIM ")]
    assert [claim for claim, _ in claims] == ["i", "ii", "iii", "v", "vi", "vii", "viii", "ix"]
    assert all(status in ("PASS", "N-A") for _, status in claims)
    assert not any(line.startswith("TASK ") and line.endswith("FAILED") for line in lines)
