import hashlib
import json

import numpy as np
import pytest
from click.testing import CliRunner

from orbitdens.cli import main
from orbitdens.config import PRESETS, load_config, parse_config
from orbitdens.errors import ConfigError


def invoke(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env, catch_exceptions=False)


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


@pytest.fixture(scope="module")
def fig1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    res = invoke("fig1", "--out", str(out))
    return res, out


def test_presets_list():
    res = invoke("presets", "list")
    assert res.exit_code == 0
    for name in PRESETS:
        assert name in res.output


def test_fig1_outputs(fig1_run):
    res, out = fig1_run
    assert res.exit_code == 0, res.output
    names = {p.name for p in out.iterdir()}
    assert {"densities.csv", "spectrum.csv", "metrics.json", "fig1_upper.svg", "fig1_lower.svg"} <= names
    body = json.loads((out / "metrics.json").read_text())
    assert body["metrics"]["rel_rms_drho"] <= 0.1
    assert body["checks"]["rel_rms_drho"]["passed"]
    for entry in body["files"]:
        payload = (out / entry["file"]).read_bytes()
        assert entry["bytes"] == len(payload)
        assert entry["sha256"] == hashlib.sha256(payload).hexdigest()
    raw = (out / "densities.csv").read_bytes()
    assert b"\r" not in raw
    header = raw.split(b"\n", 1)[0].decode()
    assert header == "x,V,rho_qm,rho_tf,drho_qm,drho_scl,drho_central,dtau_qm,dtau1_qm,dtau_virial"
    first_row = raw.split(b"\n")[1].decode().split(",")
    assert all(len(v.split("e")[0].lstrip("-")) == 14 or v == "nan" for v in first_row)


def test_reruns_are_byte_identical(fig1_run, tmp_path):
    _, out = fig1_run
    res = invoke("fig1", "--out", str(tmp_path), "--no-svg")
    assert res.exit_code == 0
    for name in ("densities.csv", "spectrum.csv", "oscillations.csv", "relations.csv", "actions.csv"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()
    assert not list(tmp_path.glob("*.svg"))


def test_box_preset_exactness(tmp_path):
    res = invoke("fig1", "--preset", "box", "--out", str(tmp_path))
    assert res.exit_code == 0, res.output
    m = json.loads((tmp_path / "metrics.json").read_text())["metrics"]
    assert m["rms_drho"] <= 1e-3


def test_run_with_config_file_and_overrides(tmp_path):
    cfg = write_cfg(tmp_path, {"potential": {"kind": "harmonic"}, "N": 12, "artifacts": ["densities"],
                               "checks": {"rel_rms_drho": 0.1}})
    res = invoke("run", cfg, "--out", str(tmp_path / "o"), "--kmax", "50")
    assert res.exit_code == 0, res.output
    m = json.loads((tmp_path / "o" / "metrics.json").read_text())["metrics"]
    assert m["k_max"] == 50
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["densities.csv", "metrics.json"]
    res = invoke("run", "--config", cfg, "--out", str(tmp_path / "o2"))
    assert res.exit_code == 0


def test_failing_check_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, {"potential": {"kind": "harmonic"}, "N": 12, "artifacts": [],
                               "checks": {"rel_rms_drho": 1e-9}})
    res = invoke("run", cfg, "--out", str(tmp_path / "o"))
    assert res.exit_code == 1
    assert "FAIL rel_rms_drho" in res.output


def test_strict_adds_default_checks(tmp_path):
    cfg = write_cfg(tmp_path, {"potential": {"kind": "quartic"}, "N": 20, "artifacts": []})
    res = invoke("run", cfg, "--out", str(tmp_path / "o"), "--strict")
    body = json.loads((tmp_path / "o" / "metrics.json").read_text())
    assert {"rel_rms_drho", "virial_rms", "wavelength_dev"} <= set(body["checks"])
    assert res.exit_code == (0 if all(c["passed"] for c in body["checks"].values()) else 1)


@pytest.mark.parametrize("data,path", [
    ({"potential": {"kind": "quartic"}, "N": 0}, "N"),
    ({"potential": {"kind": "quartic"}, "N": 4, "colour": 1}, "colour"),
    ({"potential": {"kind": "quartic"}, "N": 4, "semiclassical": {"turning_zone": 1.5}},
     "semiclassical.turning_zone"),
    ({"potential": {"kind": "quartic", "params": {"d": 1}}, "N": 4}, "potential.params"),
    ({"potential": {"kind": "cubic"}, "N": 4}, "potential.kind"),
])
def test_config_errors_name_the_field(tmp_path, data, path):
    cfg = write_cfg(tmp_path, data)
    res = invoke("run", cfg)
    assert res.exit_code == 2
    assert path in res.output
    with pytest.raises(ConfigError) as exc:
        parse_config(data)
    assert exc.value.path == path


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{N: 3,}")
    assert invoke("run", str(p)).exit_code == 2
    with pytest.raises(ConfigError):
        load_config(p)


def test_numerical_failure_exit_code(tmp_path):
    xs = list(np.linspace(-1, 1, 21))
    cfg = write_cfg(tmp_path, {"potential": {"kind": "tabulated", "params": {"x": xs, "V": [v * v for v in xs]}},
                               "N": 30, "artifacts": []})
    assert invoke("run", cfg, "--out", str(tmp_path / "o")).exit_code == 3


def test_open_shell_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, {"potential": {"kind": "harmonic", "D": 3}, "N": 100, "artifacts": []})
    assert invoke("run", cfg, "--out", str(tmp_path / "o")).exit_code == 2


def test_radial_run_and_env_root(tmp_path):
    res = invoke("fig1", "--preset", "ho3d", "--out", "ho", env={"ORBITDENS_OUT_ROOT": str(tmp_path)})
    assert res.exit_code == 0, res.output
    out = tmp_path / "ho"
    header = (out / "densities.csv").read_text().split("\n", 1)[0]
    assert header.startswith("r,V,rho_qm,rho_tf,drho_qm,drho_bessel")
    m = json.loads((out / "metrics.json").read_text())["metrics"]
    assert m["shells"] == 8 and m["sign_mismatch_r0"] == 0.0


def test_unknown_preset():
    assert invoke("fig1", "--preset", "nope").exit_code == 2
