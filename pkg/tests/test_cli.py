import json

import pytest

from laxflow.cli import dumps, main

ANSATZ = [{"place": "infinity", "n": 1, "m": -1}]


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_dumps_is_stable():
    obj = {"b": 0.1, "a": [1, 2.0, None, True], "c": 1 + 2j}
    assert dumps(obj) == dumps(json.loads(dumps(obj)) | {"c": 1 + 2j})
    assert dumps(0.1) == "0.10000000000000001"
    assert json.loads(dumps(obj))["c"] == [1.0, 2.0]


def test_bench_passes_and_is_deterministic(tmp_path, capsys):
    code, out = _run(["bench", "--out-dir", str(tmp_path / "a")], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["pass"] and summary["linearity"] is True
    assert summary["velocityAgreement"] < 1e-5
    code, _ = _run(["bench", "--out-dir", str(tmp_path / "b")], capsys)
    assert code == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    for name in ("trajectory.json", "tables/flow.csv", "tables/linearity.csv", "tables/abel.csv"):
        assert (tmp_path / "a" / name).exists()


def test_polynomial_generator_is_constant(tmp_path, capsys):
    scn = {"name": "poly", "lax": "mumford-g1", "generator": {"kind": "polynomial", "coeffs": [0, -1, 3]},
           "integration": {"tEnd": 1.0, "dt": 0.01, "stride": 10}, "analyses": ["validate", "flow", "linearity"]}
    code, out = _run(["run", _write(tmp_path / "poly.json", scn), "--out-dir", str(tmp_path / "out")], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["constancy"] is True
    assert rep["results"]["flow"]["stationaryDeviation"] < 1e-10


def test_curvature_generator_fails_linearity(tmp_path, capsys):
    scn = {"name": "curv", "lax": "mumford-g1", "ansatz": ANSATZ, "generator": {"kind": "curvature"},
           "integration": {"tEnd": 1.0, "dt": 0.001, "stride": 50}, "analyses": ["flow", "linearity", "abel"]}
    code, out = _run(["run", _write(tmp_path / "curv.json", scn)], capsys)
    assert code == 1 and json.loads(out)["linearity"] is False


@pytest.mark.parametrize("scn", [
    {"lax": "mumford-g1", "analyses": ["abel"]},
    {"lax": "mumford-g1", "analyses": ["flow"]},
    {"lax": "mumford-g1", "analyses": ["plot"]},
    {"analyses": ["validate"]},
    {"lax": "missing.json", "analyses": ["validate"]},
    {"lax": "mumford-g1", "ansatz": ANSATZ, "generator": {"kind": "magic"}, "analyses": ["validate"]},
])
def test_configuration_errors_exit_two(scn, tmp_path, capsys):
    code, out = _run(["run", _write(tmp_path / "s.json", scn)], capsys)
    assert code == 2
    assert json.loads(out)["error"]["type"] == "ConfigError"


def test_unreadable_scenario(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert _run(["run", str(p)], capsys)[0] == 2


def test_batch_run(tmp_path, capsys):
    good = {"name": "v", "lax": "mumford-g1", "analyses": ["validate", "spectral"]}
    bad = {"lax": "mumford-g1", "analyses": ["abel"]}
    code, out = _run(["run", _write(tmp_path / "g.json", good), _write(tmp_path / "b.json", bad),
                      "--out-dir", str(tmp_path / "out")], capsys)
    rows = json.loads(out)
    assert code == 2 and [r["exit"] for r in rows] == [0, 2]
    assert (tmp_path / "out" / "g" / "report.json").exists()


def test_single_analysis_subcommands(tmp_path, capsys):
    cfg = {"lax": "mumford-g1", "ansatz": ANSATZ, "tEnd": 0.5, "dt": 0.001, "stride": 50}
    out_dir = tmp_path / "fo"
    code, out = _run(["flow", _write(tmp_path / "flow.json", cfg), "--out-dir", str(out_dir)], capsys)
    assert code == 0
    traj = str(out_dir / "trajectory.json")
    for cmd in ("linearity", "abel", "hamiltonian"):
        code, out = _run([cmd, traj], capsys)
        assert code == 0, out
        assert json.loads(out)["pass"] is True
    code, out = _run(["abel", traj, "--format", "csv"], capsys)
    assert code == 0 and out.splitlines()[0].startswith("t,")


def test_validate_and_spectral_on_files(tmp_path, capsys, genus2_lax):
    path = _write(tmp_path / "lax.json", genus2_lax.to_json())
    code, out = _run(["validate", path], capsys)
    assert code == 0 and json.loads(out)["pass"]
    code, out = _run(["spectral", path], capsys)
    assert code == 0


def test_krichever_scenario(tmp_path, capsys):
    scn = {"name": "k", "lax": {"construct": {"curve": {"kind": "hyperelliptic", "f": [1, 1, 0, 0, 0, 1]}, "l": 2}},
           "ansatz": [{"place": {"chart": "infinity"}, "n": 1, "m": 0}],
           "integration": {"tEnd": 0.05, "dt": 0.0025, "stride": 4},
           "analyses": ["validate", "spectral", "flow", "hamiltonian"]}
    code, out = _run(["run", _write(tmp_path / "k.json", scn)], capsys)
    assert code == 0, out
