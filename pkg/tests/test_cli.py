import csv
import json
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundstate import build_grid, builtin_power_model, cubic_nls_model, minimize
from groundstate.analysis import gaussian_profile, scaling_probe_small_t
from groundstate.cli import (
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_REFUSED,
    ConfigError,
    emit_plot_data,
    main,
    parse_config,
    parse_config_text,
    to_json,
)
from oracles import sech_profile

MINIMAL = "[grid]\nN = 1\nL = 32\nn = 512\n\n[model]\nell = 2\n"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def strip_runtime(path):
    rep = json.loads(path.read_text())
    rep.pop("runtime")
    return rep


def test_minimal_config_fills_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    assert cfg.solver.tol == 1e-8 and cfg.solver.initial_step == 0.1
    assert cfg.probes.enable_small_t and cfg.probes.large_t == (1.0, 2.0, 4.0, 8.0, 16.0)
    assert cfg.output.formats == ("json", "csv")


def test_range_error_names_key():
    with pytest.raises(ConfigError, match=r"model\.ell \(line 7\)"):
        parse_config_text(MINIMAL.replace("ell = 2", "ell = -1"))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match=r"model\.alpha_decay"):
        parse_config_text(MINIMAL + "alpha_decay = 1\n")


def test_parse_error_reports_line():
    with pytest.raises(ConfigError, match="line"):
        parse_config_text("[grid\nN = 1\n")


def test_missing_section():
    with pytest.raises(ConfigError, match=r"\[model\]"):
        parse_config_text("[grid]\nN = 1\nL = 4\nn = 16\n")


def test_bad_types_and_lists():
    with pytest.raises(ConfigError, match=r"grid\.n"):
        parse_config_text(MINIMAL.replace("n = 512", "n = many"))
    with pytest.raises(ConfigError, match=r"probes\.small_t"):
        parse_config_text(MINIMAL + "[probes]\nsmall_t = 0.5, 0.25\n")
    with pytest.raises(ConfigError, match=r"output\.formats"):
        parse_config_text(MINIMAL + "[output]\nformats = xml\n")


def test_solver_section_parsed():
    cfg = parse_config_text(MINIMAL + "[solver]\ntol = 1e-9\nprecondition = false\nprecond_shift = 0.5\n")
    assert cfg.solver.tol == 1e-9 and cfg.solver.precondition is False and cfg.solver.precond_shift == 0.5


def test_cubic_run_reports_soliton(tmp_path):
    cfg = write(tmp_path, "[grid]\nN = 1\nL = 48\nn = 1024\n[model]\nbuiltin = cubic_nls\n[probes]\nenable_large_t = false\n")
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert rep["schema_version"] == 1
    gs = rep["ground_state"]
    assert abs(gs["I_c"] + 1 / 96) < 1e-4 and abs(gs["lambda_c"] + 1 / 16) < 1e-4
    assert gs["multiplier_sign_check"]["verdict"] == "pass"
    assert rep["probes"]["small_t"]["verdict"] == "NegativeNearZero"
    assert rep["runtime"]["timestamp"].endswith("Z")
    for name in ("history.csv", "probes.csv", "profile.csv"):
        assert (out / name).exists()


def test_supercritical_refused_but_probed(tmp_path):
    cfg = write(tmp_path, "[grid]\nN = 2\nL = 12\nn = 128\n[model]\nell = 3\nmu = 3\nGamma = 1\nc = 10\n"
                          "[probes]\nenable_small_t = false\n")
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_REFUSED
    rep = json.loads((out / "report.json").read_text())
    assert "ground_state" not in rep and rep["errors"]
    assert rep["probes"]["large_t"]["verdict"] == "DivergesToMinusInfinity"


def test_non_convergence_exit(tmp_path):
    cfg = write(tmp_path, MINIMAL + "[solver]\nmax_iter = 3\n[probes]\nenable_small_t = false\nenable_large_t = false\n")
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_NOT_CONVERGED
    rep = json.loads((out / "report.json").read_text())
    assert rep["ground_state"]["converged"] is False and rep["exit_status"] == 3


def test_probes_disabled_omits_section(tmp_path):
    cfg = write(tmp_path, MINIMAL + "[probes]\nenable_small_t = false\nenable_large_t = false\n")
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_OK
    assert "probes" not in json.loads((out / "report.json").read_text())


def test_validate_only(tmp_path):
    out = tmp_path / "out"
    assert main(["validate", str(write(tmp_path, MINIMAL)), "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert rep["criticality"]["overall"] == "WellPosedAllMass"
    assert "ground_state" not in rep and "probes" not in rep


def test_deterministic_reports(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", str(cfg), "--out", str(a), "--seed", "7"]) == EXIT_OK
    assert main(["solve", str(cfg), "--out", str(b), "--seed", "7"]) == EXIT_OK
    assert strip_runtime(a / "report.json") == strip_runtime(b / "report.json")
    assert (a / "history.csv").read_bytes() == (b / "history.csv").read_bytes()
    assert json.loads((a / "report.json").read_text())["config"]["solver"]["seed"] == 7


def test_config_error_exit(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, MINIMAL.replace("ell = 2", "ell = -1")))]) == 1
    assert "model.ell" in capsys.readouterr().err


def test_profile_csv_matches_sech(tmp_path):
    g = build_grid(1, 64, 2048)
    res = minimize(cubic_nls_model(), g)
    from groundstate.analysis import recenter

    res.field = recenter(g, res.field)
    emit_plot_data(res, tmp_path / "profile.csv", g)
    rows = list(csv.reader(open(tmp_path / "profile.csv")))
    assert rows[0] == ["r", "phi_1"]
    r = np.array([float(x[0]) for x in rows[1:]])
    phi = np.array([float(x[1]) for x in rows[1:]])
    assert r[0] == 0.0 and np.all(np.diff(r) > 0)
    assert np.max(np.abs(phi - sech_profile(r))) < 1e-3


def test_probe_plot_data(tmp_path):
    spec = builtin_power_model(1, 1, 2.0, 2.0, 0.5, 0.0, 1.0)
    ts = [2.0**-k for k in range(10, 0, -1)]
    rep = scaling_probe_small_t(spec, gaussian_profile(1, 1, 1.0), ts, build_grid(1, 16, 512))
    emit_plot_data(rep, tmp_path / "e.csv")
    rows = list(csv.reader(open(tmp_path / "e.csv")))
    e = np.array([float(x[1]) for x in rows[1:]])
    assert rows[0] == ["t", "energy"] and np.all(e < 0)
    # decreasing as t grows from 0 while still in the negative regime
    assert np.all(np.diff(e) < 0)


def test_empty_probe_data(tmp_path):
    emit_plot_data(None, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().strip() == "t,energy"


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_plot_data(None, tmp_path / "missing" / "e.csv")


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_json_floats_round_trip_with_17_digits(x):
    text = to_json({"x": x})
    assert json.loads(text)["x"] == x
    body = text.split(":")[1].strip().rstrip("}").strip()
    mantissa = body.lstrip("-").split("e")[0]
    if mantissa.endswith(".0"):
        mantissa = mantissa[:-2]
    assert len(mantissa.replace(".", "").strip("0")) <= 17
    assert float(body) == x


def test_json_nested_structures():
    obj = {"a": [1, 2.5, None, True], "b": {"c": "s"}, "d": [], "e": {}, "f": [{"g": 1}]}
    assert json.loads(to_json(obj)) == obj
