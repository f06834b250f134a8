import subprocess
import sys

import numpy as np
import pytest

from tvbo.bench import config as cfg
from tvbo.cli import main

SMALL = ["--set", "horizon=12", "--set", "domain.resolution=8"]


def test_missing_config_exit_1(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 1
    assert "missing.toml" in capsys.readouterr().err


def test_bad_override_exit_1(capsys):
    assert main(["run", "--preset", "mc-eps0", "--set", "horizon=-3"]) == 1
    assert main(["run", "--preset", "mc-eps0", "--set", "nonsense.key=1"]) == 1
    assert main(["run", "--preset", "nope"]) == 1


def test_unknown_policy_exit_1(tmp_path):
    assert main(["run", "--preset", "mc-eps0", "--seeds", "0", "--policies", "Foo", "--out", str(tmp_path), *SMALL]) == 1


def test_runtime_error_exit_2(tmp_path, capsys):
    # an indefinite "covariance" matrix passes config validation but fails at load time
    (tmp_path / "k.csv").write_text("1,2\n2,1\n")
    (tmp_path / "c.toml").write_text(
        "horizon = 3\nnoise_var = 0.02\nseeds = [0]\n"
        "[domain]\nkind = 'arms'\nn_arms = 2\n"
        f"[kernel]\nkind = 'empirical'\npath = '{tmp_path / 'k.csv'}'\n"
        "[[policies]]\nkind = 'gp_ucb'\n"
    )
    assert main(["run", "--config", str(tmp_path / "c.toml"), "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_run_writes_outputs_and_echo(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--preset", "within-model-eps0.03", "--seeds", "0..1", "--out", str(out), *SMALL]) == 0
    for name in ("trace.csv", "summary.csv", "curves.csv", "config.toml"):
        assert (out / name).exists()
    echoed = cfg.load_config(out / "config.toml")
    assert echoed.seeds == [0, 1] and echoed.horizon == 12 and echoed.output == str(out)


def test_jobs_byte_identical(tmp_path):
    args = ["run", "--preset", "within-model-eps0.05", "--seeds", "0..2", *SMALL]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    for name in ("trace.csv", "summary.csv", "curves.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("name", ["within-model-eps0.01", "sudden-change", "sensitivity-eps0.03", "mc-eps0.1"])
def test_preset_roundtrip_via_config(tmp_path, capsys, name):
    assert main(["list-presets", name]) == 0
    (tmp_path / "p.toml").write_text(capsys.readouterr().out)
    common = ["--seeds", "3", *SMALL]
    assert main(["run", "--preset", name, *common, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(tmp_path / "p.toml"), *common, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out
    for name in cfg.PRESETS:
        assert name in out


def test_stopping_times(tmp_path, capsys):
    out = tmp_path / "st"
    assert main(["stopping-times", "--preset", "mc-eps0.1", "--runs", "5", "--out", str(out), *SMALL]) == 0
    hist = (out / "stopping_histogram.csv").read_text().splitlines()
    assert hist[0] == "tau,count" and hist[-1].startswith(">12,")
    assert sum(int(r.split(",")[1]) for r in hist[1:]) == 5
    assert (out / "stopping_summary.csv").exists()


def test_bound_labels_surrogate(tmp_path):
    out = tmp_path / "b"
    assert main(["bound", "--preset", "within-model-eps0.03", "--runs", "3", "--out", str(out), *SMALL]) == 0
    header = (out / "bound.csv").read_text().splitlines()[0]
    assert "gamma_surrogate_lower" in header
    assert len((out / "bound.csv").read_text().splitlines()) == 13


def test_ingest_check(tmp_path, capsys):
    rng = np.random.default_rng(0)
    lines = ["arm_id,time_index,value"]
    for t in range(30):
        for a in range(3):
            lines.append(f"a{a},{t},{rng.standard_normal()!r}")
    (tmp_path / "d.csv").write_text("\n".join(lines) + "\n")
    rc = main(["ingest-check", "--csv", str(tmp_path / "d.csv"), "--train", "0:20", "--test", "20:30",
               "--out", str(tmp_path / "o")])
    assert rc == 0
    assert "arms=3" in capsys.readouterr().out
    assert np.loadtxt(tmp_path / "o" / "covariance.csv", delimiter=",").shape == (3, 3)
    assert main(["ingest-check", "--csv", str(tmp_path / "d.csv"), "--train", "0-20", "--test", "20:30"]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tvbo", "list-presets"], capture_output=True, text=True)
    assert res.returncode == 0 and "sudden-change" in res.stdout
