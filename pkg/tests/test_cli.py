import csv
import os
import subprocess
import sys

import pytest
import yaml

from semdnav.cli.config import config_hash, dump_tree, load_config, resolve, to_tree
from semdnav.cli.main import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, main
from semdnav.snn import ConfigError


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def _write_cfg(tmp_path, tree):
    p = tmp_path / "cfg.yaml"
    p.write_text(yaml.safe_dump(tree))
    return str(p)


def test_defaults_resolve():
    cfg = load_config(None)
    assert cfg.network.n_connect == 4
    assert cfg.characterize.reps == 3


def test_resolved_tree_round_trips():
    cfg = resolve({"network": {"n_connect": 2, "tau_fac_ms": 5.0,
                               "params": {"OFI": {"tau_m_ms": 150.0}}},
                   "environment": {"kind": "corridor", "width_au": 12.5},
                   "seeds": {"env": 3, "network": 4}})
    again = resolve(yaml.safe_load(dump_tree(to_tree(cfg))))
    assert again.digest() == cfg.digest()
    assert again.network.params["OFI"].tau_m == 150.0
    assert again.environment == {"width_au": 12.5}


@pytest.mark.parametrize("tree, path", [
    ({"network": {"n_conect": 2}}, "network.n_conect"),
    ({"network": {"params": {"WTA": {"tau_m": 3}}}}, "network.params.WTA.tau_m"),
    ({"episode": {"budget_s": "long"}}, "episode.budget_s"),
    ({"environment": {"kind": "corridor", "density_pct": 5}}, "environment.density_pct"),
    ({"batch": {"parallelism": 0}}, "batch.parallelism"),
    ({"sedes": {}}, "sedes"),
])
def test_config_errors_name_the_key(tree, path):
    with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
        resolve(tree)


def test_hash_ignores_parallelism_and_output():
    a = to_tree(resolve({"batch": {"parallelism": 1}, "output": {"dir": "a"}}))
    b = to_tree(resolve({"batch": {"parallelism": 4}, "output": {"dir": "b"}}))
    c = to_tree(resolve({"network": {"n_connect": 3}}))
    assert config_hash(a) == config_hash(b) != config_hash(c)


def test_bad_config_exit_code(tmp_path, capsys):
    code = main(["dump-wiring", "--config", _write_cfg(tmp_path, {"network": {"x": 1}}),
                 "--out", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "network.x" in capsys.readouterr().err


def test_unwritable_output_is_a_config_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["dump-wiring", "--out", str(blocker / "sub")]) == EXIT_CONFIG


def test_dump_wiring(tmp_path):
    assert main(["dump-wiring", "--out", str(tmp_path)]) == EXIT_OK
    census = _rows(tmp_path / "census.csv")[0]
    wiring = _rows(tmp_path / "wiring.csv")
    assert int(census["synapses"]) == len(wiring)
    assert set(wiring[0]) == {"src_pop", "src_idx", "dst_pop", "dst_idx", "weight_nA",
                              "delay_ms", "kind"}
    head = (tmp_path / "census.csv").read_text().splitlines()
    assert head[0].startswith("# tool semdnav") and head[2].startswith("# config_hash")
    assert (tmp_path / "resolved_config.yaml").exists()


def test_episode_outputs(tmp_path):
    code = main(["episode", "--kind", "corridor", "--width", "12.5", "--budget-s", "1",
                 "--seed", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    for name in ("trajectory.csv", "raster.csv", "environment.csv", "metrics.csv",
                 "lateral.csv", "resolved_config.yaml"):
        assert (tmp_path / name).exists(), name
    m = _rows(tmp_path / "metrics.csv")[0]
    assert m["outcome"] == "timeout"
    traj = _rows(tmp_path / "trajectory.csv")
    assert len(traj) > 150 and set(traj[0]) == {"t_s", "x_m", "y_m", "heading_rad", "mode"}
    cfg = yaml.safe_load((tmp_path / "resolved_config.yaml").read_text())
    assert cfg["environment"] == {"kind": "corridor", "width_au": 12.5}
    assert cfg["episode"]["budget_s"] == 1.0


def test_episode_generation_failure_is_config_error(tmp_path):
    assert main(["episode", "--kind", "clutter", "--density", "90", "--budget-s", "1",
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_characterize_slice_and_rerun_identity(tmp_path):
    cfg = _write_cfg(tmp_path, {"characterize": {"duration_s": 0.5}})
    args = ["characterize", "--config", cfg, "--frequencies", "5", "--contrasts", "1",
            "--reps", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    runs = _rows(tmp_path / "a" / "tuning_runs.csv")
    assert len(runs) == 4
    curves = _rows(tmp_path / "a" / "tuning_curves.csv")
    assert [(r["direction"], r["n_reps"]) for r in curves] == [("preferred", "2"), ("null", "2")]
    for name in ("tuning_runs.csv", "tuning_curves.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_characterize_ingest(tmp_path):
    from semdnav.characterize import GratingSpec, synth_grating_events
    from semdnav.vision import save_events
    save_events(synth_grating_events(GratingSpec(5.0, duration_s=0.5, sampling="area")),
                tmp_path / "r.csv")
    (tmp_path / "m.csv").write_text("frequency_hz,contrast,direction,path\n5,1,preferred,r.csv\n")
    cfg = _write_cfg(tmp_path, {"characterize": {"duration_s": 0.5}})
    out = tmp_path / "o"
    assert main(["characterize", "--config", cfg, "--ingest", str(tmp_path / "m.csv"),
                 "--out", str(out)]) == EXIT_OK
    runs = _rows(out / "tuning_runs.csv")
    assert len(runs) == 1 and float(runs[0]["rate_lr_hz"]) > 0


def test_batch_rows_and_parallelism_invariance(tmp_path):
    base = ["batch", "--grid", "corridor", "--values", "12.5", "15", "--seeds", "2",
            "--budget-s", "0.5"]
    assert main(base + ["--out", str(tmp_path / "p1"), "--parallelism", "1"]) == EXIT_OK
    assert main(base + ["--out", str(tmp_path / "p2"), "--parallelism", "2"]) == EXIT_OK
    rows = _rows(tmp_path / "p1" / "batch_runs.csv")
    assert len(rows) == 4 and all(r["error"] == "" for r in rows)
    summary = _rows(tmp_path / "p1" / "batch_summary.csv")
    assert [s["value"] for s in summary] == ["12.5", "15", "all"]
    for name in ("batch_runs.csv", "batch_summary.csv"):
        assert (tmp_path / "p1" / name).read_bytes() == (tmp_path / "p2" / name).read_bytes()


def test_validate_subset_and_fault_injection(tmp_path):
    assert main(["validate", "--only", "network_census", "tde_monotonicity",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert main(["validate", "--only", "tde_monotonicity", "--inject", "tde-decay-sign",
                 "--out", str(tmp_path)]) == EXIT_VALIDATION
    report = _rows(tmp_path / "validate_report.csv")
    assert report[0]["check"] == "tde_monotonicity" and report[0]["passed"] == "0"
    assert main(["validate", "--only", "nonsense", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "semdnav", "--version"], capture_output=True,
                       text=True, env={**os.environ})
    assert r.returncode == 0 and r.stdout.startswith("semdnav ")
