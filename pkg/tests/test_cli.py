import csv
import json
import math
import time

import numpy as np
import pytest

from spinqsl.cli import main
from spinqsl.errors import ConfigError
from spinqsl.scenario import PRESETS, ScenarioConfig, preset, run_scenario


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_list_presets(capsys):
    code, out, _ = _run(["list-presets"], capsys)
    assert code == 0
    for name in PRESETS:
        assert name in out


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "bounds_table", "ratio_table"])
def test_presets_write_every_output(name, tmp_path, capsys):
    code, out, _ = _run(["run", "--preset", name, "--out", str(tmp_path)], capsys)
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest == json.loads(out)
    assert set(manifest["outputs"]) == set(PRESETS[name]["outputs"])
    for entry in manifest["outputs"].values():
        assert entry["status"] == "ok"
        assert (tmp_path / entry["path"]).exists()


def test_rerun_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(["run", "--preset", "fig3", "--out", str(d)], capsys)[0] == 0
    for f in ("manifest.json", "uncertainty_report.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_fig2_columns(tmp_path, capsys):
    _run(["run", "--preset", "fig2", "--out", str(tmp_path)], capsys)
    cols, data = _read_csv(tmp_path / "frenet.csv")
    names = [c.split("[")[0] for c in cols]
    for want in ("t", "S3", "curvature", "torsion", "V"):
        assert want in names
    assert cols[0] == "t[1/omega]"
    assert data.shape[0] == 4001
    assert data[0, 0] == 0.0 and data[-1, 0] == pytest.approx(math.pi)


def test_fig5_uncertainty_columns(tmp_path):
    cfg = ScenarioConfig.from_dict({**preset("fig5"), "n_steps": 2000, "sample_every": 5}, name="fig5")
    m = run_scenario(cfg, out_dir=tmp_path)
    assert m.ok()
    cols, data = _read_csv(tmp_path / "uncertainty_report.csv")
    for want in ("t[1/omega]", "S3[1]", "M12[1]", "Delta1|2[1]", "Var1|2[1]"):
        assert want in cols
    assert data.shape[0] == 401


def test_ratio_table_rows(tmp_path, capsys):
    _run(["run", "--preset", "ratio_table", "--out", str(tmp_path)], capsys)
    cols, data = _read_csv(tmp_path / "ratio_table.csv")
    assert cols == ["S[1]", "ratio[1]"]
    np.testing.assert_allclose(data[:4, 1], [1.0, 2.0, 2.25, 2.343], atol=1e-3)
    assert np.all(np.diff(data[3:, 1]) > 0)


def test_json_format(tmp_path, capsys):
    code, _, _ = _run(["run", "--preset", "ratio_table", "--out", str(tmp_path), "--format", "json"], capsys)
    assert code == 0
    payload = json.loads((tmp_path / "ratio_table.json").read_text())
    assert payload["columns"] == ["S[1]", "ratio[1]"]
    assert len(payload["data"]["S[1]"]) == len(PRESETS["ratio_table"]["spins"])


def test_config_file_and_not_applicable_output(tmp_path, capsys):
    cfg = {"spin": "3/2", "field": {"h1": 2, "h2": 2, "H": 1.0, "omega": 1.3},
           "t_end": 2.0, "n_steps": 400, "outputs": ["trajectory", "qsl_report"]}
    path = tmp_path / "off.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = _run(["run", "--config", str(path), "--out", str(tmp_path / "res")], capsys)
    assert code == 0
    manifest = json.loads(out)
    assert manifest["scenario"] == "off"
    assert manifest["outputs"]["trajectory"]["status"] == "ok"
    assert manifest["outputs"]["qsl_report"]["status"] == "not_applicable"
    assert manifest["outputs"]["qsl_report"]["reason"]


@pytest.mark.parametrize("raw,fragment", [
    ({"field": {"h1": 1, "h2": 1, "H": 1, "omega": 1}, "t_end": 1}, "spin: missing"),
    ({"spin": 0.3, "field": {"h1": 1, "h2": 1, "H": 1, "omega": 1}, "t_end": 1}, "spin:"),
    ({"spin": 1, "field": {"h1": 1, "h2": 1, "H": 1, "omega": 1, "k": 2}, "t_end": 1}, "field:"),
    ({"spin": 1, "field": {"h1": 1, "h2": 1, "H": 1, "omega": 1}, "t_end": -1}, "t_end:"),
    ({"spin": 1, "field": {"h1": 1, "h2": 1, "H": 1, "omega": 1}, "t_end": 1, "outputs": ["x"]},
     "unknown output"),
    ({"spin": 1, "field": {"h1": 1, "h2": 1, "H": 1, "omega": 1}, "t_end": 1, "bogus": 1},
     "unknown config keys"),
])
def test_config_errors(raw, fragment, tmp_path, capsys):
    with pytest.raises(ConfigError, match=fragment):
        ScenarioConfig.from_dict(raw)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    code, _, err = _run(["run", "--config", str(path)], capsys)
    assert code == 2 and "config error" in err


def test_config_error_collects_all_problems():
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict({"spin": 0.3, "t_end": 0, "format": "xml"})
    msg = str(info.value)
    for fragment in ("spin:", "field: missing", "t_end:", "format:"):
        assert fragment in msg


def test_unreadable_config(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert _run(["run", "--config", str(path)], capsys)[0] == 2


def test_validate_conservation_not_applicable(capsys):
    code, out, _ = _run(["validate", "--suite", "conservation", "--spin", "3", "--k", "0.5"], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["counts"]["not_applicable"] >= 1 and report["counts"]["fail"] == 0


def test_validate_rejects_spin_for_other_suites(capsys):
    assert _run(["validate", "--suite", "qsl", "--spin", "2"], capsys)[0] == 2


def test_validate_all(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code, out, _ = _run(["validate", "--suite", "all", "--report", str(report_path)], capsys)
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["passed"] and report["counts"]["fail"] == 0
    assert report == json.loads(out)


def test_all_presets_finish_quickly(tmp_path, capsys):
    start = time.perf_counter()
    for name in PRESETS:
        assert _run(["run", "--preset", name, "--out", str(tmp_path / name)], capsys)[0] == 0
    assert time.perf_counter() - start < 60.0
