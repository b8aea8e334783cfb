"""End-to-end tests for the hyperlab command line."""
from __future__ import annotations

import json
import re

from main import main
from storage import read_series

SALAS = {"family": "step", "v_neg": 2.0, "v_pos": 0.5}
EXPANDING = {"family": "step", "v_neg": 4.0, "v_pos": 0.25}
BUMP = {"bump": {"center": [0], "radius": 5}}
CHI = {"indicator": {"interval": [0, 3]}}
# report.json keys are sorted, so the timing block is the one just before "version".
TIMING_BLOCK = re.compile(r'  "timing": \{.*?\n  \},\n', re.DOTALL)


def _summary(result) -> dict:
    return json.loads(result.stdout.strip().splitlines()[-1])


def _report(path) -> dict:
    return json.loads((path / "report.json").read_text())


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "hyperlab" in result.output


def test_check_hc_satisfied(runner, write_config, tmp_path):
    cfg = write_config({"command": "check-hc", "a": [1], "weights": [SALAS], "K": {"interval": [-10, 10]}})
    out = tmp_path / "hc"
    result = runner.invoke(main, ["check-hc", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    assert _summary(result) == {"command": "check-hc", "status": "Satisfied", "exit_code": 0}
    report = _report(out)
    assert report["version"] == "v1"
    assert report["result"]["verdicts"][0]["status"] == "Satisfied"
    header, rows = read_series(out / "witness_l1.csv")
    assert header[:2] == ["k", "n_k"]
    assert len(rows) == 10


def test_check_dhc_literal_mode_refuted(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "check-dhc",
            "a": [1],
            "weights": [SALAS, {"family": "step", "v_neg": 4.0, "v_pos": 0.25}],
            "K": {"interval": [-10, 10]},
        }
    )
    out = tmp_path / "dhc"
    result = runner.invoke(main, ["check-dhc", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 2
    report = _report(out)
    assert report["status"] == "Refuted"
    assert report["result"]["verdict"]["certificate"]["type"] == "ReciprocalObstruction"


def test_check_dhc_one_directional_from_flag(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "check-dhc",
            "a": [1],
            "weights": [{"family": "step", "v_neg": 4.0, "v_pos": 0.25}, SALAS],
            "K": {"interval": [-5, 5]},
            "pairs": [[2, 1]],
        }
    )
    out = tmp_path / "dhc1"
    result = runner.invoke(main, ["check-dhc", "--config", str(cfg), "--out", str(out), "--mode", "one-directional"])
    assert result.exit_code == 0
    assert _report(out)["result"]["verdict"]["details"]["mode"] == "one-directional"


def test_malformed_json_is_a_config_error(runner, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    result = runner.invoke(main, ["probe", "--config", str(cfg)])
    assert result.exit_code == 1


def test_validation_errors_exit_one(runner, write_config):
    cfg = write_config({"command": "check-hc", "a": [0], "weights": [], "p": 0.5})
    result = runner.invoke(main, ["check-hc", "--config", str(cfg)])
    assert result.exit_code == 1


def test_extract_premise_violated_exits_two(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "extract",
            "a": [1],
            "weights": [SALAS],
            "K": {"interval": [0, 3]},
            "payload": {"f": {"indicator": {"interval": [0, 3]}}, "m": 30, "eta": 0.1},
        }
    )
    out = tmp_path / "extract"
    result = runner.invoke(main, ["extract", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 2
    assert _report(out)["status"] == "PremiseViolated"


def test_extract_from_construct(runner, write_config, tmp_path):
    chi = {"indicator": {"interval": [0, 3]}}
    cfg = write_config(
        {
            "command": "extract",
            "a": [1],
            "weights": [SALAS],
            "K": {"interval": [0, 3]},
            "payload": {"f": {"from_construct": {"f": chi, "targets": [chi], "n": 60}}, "m": 60},
        }
    )
    out = tmp_path / "extract_ok"
    result = runner.invoke(main, ["extract", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    report = _report(out)
    assert report["result"]["eta"] == 0.5
    assert report["result"]["sets"]["E"] == [[0], [1], [2], [3]]


def test_aperiodicity(runner, write_config, tmp_path):
    cfg = write_config({"command": "aperiodicity", "a": [1], "K": {"interval": [-10, 10]}})
    out = tmp_path / "ap"
    result = runner.invoke(main, ["aperiodicity", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    res = _report(out)["result"]
    assert res["horizon"] == 20
    assert res["disjoint_beyond_horizon"] is True
    assert res["minimal"] is True


def test_orbit_series(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "orbit",
            "a": [1],
            "weights": [{"family": "constant", "c": 1.0}],
            "payload": {"u": {"delta": [0]}, "targets": [{"delta": [0]}], "n_max": 4, "eps": 0.5},
        }
    )
    out = tmp_path / "orbit"
    result = runner.invoke(main, ["orbit", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    header, rows = read_series(out / "orbit.csv")
    assert header == ["n", "d_n", "d_n_l1"]
    assert [r[0] for r in rows] == ["0", "1", "2", "3", "4"]
    assert float(rows[0][1]) == 0.0
    assert _report(out)["result"]["visits"] == [0]


def test_reports_are_deterministic_modulo_timing(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "probe",
            "a": [1],
            "weights": [SALAS, SALAS],
            "powers": [1, 2],
            "seed": 3,
            "payload": {"targets": [{"random": {"lo": -4, "hi": 4, "count": 6}}] * 3, "eps": 0.1},
        }
    )
    raw = []
    for name in ("first", "second"):
        out = tmp_path / name
        result = runner.invoke(main, ["probe", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0
        text, count = TIMING_BLOCK.subn("", (out / "report.json").read_bytes().decode("utf-8"))
        assert count == 1
        raw.append(text.encode("utf-8"))
    assert raw[0] == raw[1]
    assert json.loads(raw[0])["config"]["seed"] == 3


def _dcriterion_config(write_config, powers, n_seq, name):
    return write_config(
        {
            "command": "dcriterion",
            "a": [1],
            "weights": [SALAS, SALAS],
            "powers": powers,
            "payload": {"n_seq": n_seq, "suite_radius": 5},
        },
        name,
    )


def test_dcriterion_satisfied_on_suite(runner, write_config, tmp_path):
    cfg = _dcriterion_config(write_config, [1, 2], list(range(10, 201, 10)), "dc.json")
    out = tmp_path / "dc"
    result = runner.invoke(main, ["dcriterion", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    assert _summary(result) == {"command": "dcriterion", "status": "Satisfied-on-suite", "exit_code": 0}
    header, rows = read_series(out / "dcriterion.csv")
    assert header == ["k", "n", "term_i", "term_ii", "term_iii"]
    assert len(rows) == 20


def test_dcriterion_failed_for_identical_operators(runner, write_config, tmp_path):
    cfg = _dcriterion_config(write_config, [1, 1], list(range(10, 201, 10)), "dc_same.json")
    out = tmp_path / "dc_same"
    result = runner.invoke(main, ["dcriterion", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 2
    report = _report(out)
    assert report["status"] == "Failed"
    assert report["exit_code"] == 2


def test_dcriterion_rejects_repeated_times(runner, write_config):
    cfg = _dcriterion_config(write_config, [1, 2], [5, 5], "dc_bad.json")
    result = runner.invoke(main, ["dcriterion", "--config", str(cfg)])
    assert result.exit_code == 1
    assert "n_seq" in result.output


def test_synthesize_success_confirms_orbit(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "synthesize",
            "a": [1],
            "weights": [SALAS, SALAS],
            "powers": [1, 2],
            "payload": {"tuples": [[BUMP, BUMP]], "eps": 0.1},
        }
    )
    out = tmp_path / "synth"
    result = runner.invoke(main, ["synthesize", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    report = _report(out)
    assert report["status"] == "Success"
    assert report["result"]["orbit_confirmed"] == [True]
    assert report["result"]["u"]["model"]["kind"] == report["config"]["model"]["kind"]
    assert report["series"] == {"orbit_tuple1": "orbit_tuple1.csv"}


def test_synthesize_exhausted_exits_two(runner, write_config, tmp_path):
    cfg = write_config(
        {
            "command": "synthesize",
            "a": [1],
            "weights": [EXPANDING, SALAS],
            "payload": {"tuples": [[BUMP, BUMP]], "eps": 0.1, "budget": 100},
        }
    )
    out = tmp_path / "synth_x"
    result = runner.invoke(main, ["synthesize", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 2
    report = _report(out)
    assert report["status"] == "Exhausted"
    assert "u" not in report["result"]


def test_construct_writes_u_with_its_model(runner, write_config, tmp_path):
    cfg = write_config(
        {"command": "construct", "a": [1], "weights": [SALAS], "payload": {"f": CHI, "targets": [CHI], "n": 60}}
    )
    out = tmp_path / "construct"
    result = runner.invoke(main, ["construct", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    report = _report(out)
    assert report["status"] == "ok"
    u = report["result"]["u"]
    assert u["model"] == report["config"]["model"]
    assert u["points"]


def test_construct_rejects_non_integer_time(runner, write_config):
    cfg = write_config(
        {"command": "construct", "a": [1], "weights": [SALAS], "payload": {"f": CHI, "targets": [CHI], "n": "ten"}}
    )
    result = runner.invoke(main, ["construct", "--config", str(cfg)])
    assert result.exit_code == 1


def test_arithmetic_errors_exit_one(runner, write_config, monkeypatch):
    def _overflow(self, out_dir=None):
        raise OverflowError("math range error")

    monkeypatch.setattr("services.orchestrator.ExperimentOrchestrator.run", _overflow)
    cfg = write_config({"command": "orbit", "a": [1], "weights": [SALAS], "payload": {"u": CHI, "targets": [CHI]}})
    result = runner.invoke(main, ["orbit", "--config", str(cfg)])
    assert result.exit_code == 1
    assert "arithmetic" in result.output
