"""End-to-end tests of the command line entry point."""

import json
from pathlib import Path

import pytest

from gaussprg.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main
from gaussprg.config import get_settings
from gaussprg.schemas import ReportEnvelope
from gaussprg.services.logging import run_log_store

SMALL_PARAMS = ["--k", "1", "--d", "1", "--eps", "0.5", "--n", "4", "--override-R", "1", "--override-L", "2", "--override-M", "16"]


def _run(capsys, *argv: str):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_params_reports_moment_order(capsys) -> None:
    code, out, _ = _run(capsys, "params", "--k", "2", "--d", "2", "--eps", "0.1", "--n", "8", "--const-c", "1")

    report = json.loads(out)
    assert code == EXIT_PASS
    assert report["result"]["params"]["R"] == 6
    assert report["result"]["seed_length"] == report["result"]["params"]["L"] * 2 * 24 * report["result"]["params"]["bit_width"]
    assert report["schema_version"] == "1.0"
    assert report["config"]["options"]["settings"]["const_c"] == 1.0
    assert report["verdict"] is None


def test_missing_required_flag_is_a_usage_error(capsys) -> None:
    code, out, err = _run(capsys, "params", "--k", "2", "--d", "2", "--n", "8")

    assert code == EXIT_CONFIG
    assert out == ""
    assert "--eps" in err
    assert "usage" in err


def test_params_output_is_byte_identical(capsys) -> None:
    argv = ["params", "--k", "2", "--d", "2", "--eps", "0.1", "--n", "8"]

    first = _run(capsys, *argv)[1]
    second = _run(capsys, *argv)[1]

    assert first == second


def test_invalid_numbers_exit_with_error_body(capsys) -> None:
    code, _, err = _run(capsys, "params", "--k", "1", "--d", "1", "--eps", "1.5", "--n", "2")

    body = json.loads(err.strip().splitlines()[-1])
    assert code == EXIT_CONFIG
    assert body["error"] == "ParameterError"
    assert body["exit_code"] == EXIT_CONFIG


def test_gen_is_deterministic_across_thread_counts(capsys, monkeypatch) -> None:
    argv = ["gen", *SMALL_PARAMS, "--seed-hex", "c0ffee"]

    monkeypatch.setenv("GAUSSPRG_THREADS", "1")
    get_settings.cache_clear()
    first = _run(capsys, *argv)
    monkeypatch.setenv("GAUSSPRG_THREADS", "8")
    get_settings.cache_clear()
    second = _run(capsys, *argv)

    assert first[0] == second[0] == EXIT_PASS
    assert first[1] == second[1]
    report = json.loads(first[1])
    assert len(report["result"]["x"]) == 4
    assert report["master_seed"] == "c0ffee"


def test_gen_raw_seed_refuses_short_seed(capsys) -> None:
    code, _, err = _run(capsys, "gen", *SMALL_PARAMS, "--seed-hex", "00", "--raw-seed")

    assert code == EXIT_CONFIG
    assert "insufficient seed entropy" in err


def test_gen_rejects_bad_hex(capsys) -> None:
    code, _, _ = _run(capsys, "gen", *SMALL_PARAMS, "--seed-hex", "xyz")

    assert code == EXIT_CONFIG


def test_fool_with_constant_family_has_zero_gap(capsys) -> None:
    code, out, _ = _run(capsys, "fool", *SMALL_PARAMS, "--family-kind", "zero", "--N", "1000")

    report = json.loads(out)
    assert code == EXIT_PASS
    assert report["verdict"] == "pass"
    assert report["result"]["gap"]["gap"] == 0.0


def test_fool_is_deterministic_across_thread_counts(capsys, monkeypatch) -> None:
    argv = ["fool", "--k", "2", "--d", "2", "--eps", "0.1", "--n", "4", "--override-R", "2", "--override-L", "4",
            "--override-M", "20", "--N", "3000", "--master-seed", "01"]

    outputs = []
    for threads in ("1", "8"):
        monkeypatch.setenv("GAUSSPRG_THREADS", threads)
        monkeypatch.setenv("GAUSSPRG_CHUNK_SIZE", "256")
        get_settings.cache_clear()
        outputs.append(_run(capsys, *argv))

    assert outputs[0][:2] == outputs[1][:2]
    assert outputs[0][0] == EXIT_PASS


def test_under_independent_control_fails(capsys) -> None:
    code, out, _ = _run(
        capsys,
        "fool", "--k", "2", "--d", "1", "--eps", "0.1", "--n", "4", "--override-R", "2", "--override-L", "4",
        "--override-M", "16", "--family-kind", "control", "--sampler", "under-independent", "--N", "2000",
    )

    assert code == EXIT_FAIL
    assert json.loads(out)["result"]["gap"]["gap"] > 0.05


def test_diag_independence_passes(capsys) -> None:
    code, out, _ = _run(capsys, "diag", "independence", "--p", "13", "--t", "3")

    assert code == EXIT_PASS
    assert json.loads(out)["config"]["command"] == "diag"


def test_diag_independence_negative_control(capsys) -> None:
    code, _, _ = _run(capsys, "diag", "independence", "--p", "13", "--t", "2", "--order", "3")

    assert code == EXIT_FAIL


def test_diag_coupling_negative_control(capsys) -> None:
    code, out, _ = _run(capsys, "diag", "coupling", "--M", "2", "--N", "5000")

    assert code == EXIT_FAIL
    assert json.loads(out)["result"]["delta"] == 2.0**-7


def test_diag_coupling_passes_at_sixteen_bits(capsys) -> None:
    code, _, _ = _run(capsys, "diag", "coupling", "--M", "16", "--N", "20000")

    assert code == EXIT_PASS


def test_diag_mollifier_reports_points(capsys) -> None:
    code, out, _ = _run(
        capsys, "diag", "mollifier", "--eps", "0.1", "--n", "2", "--family-kind", "control",
        "--point", "0,0", "--point", "1,-1",
    )

    points = json.loads(out)["result"]["points"]
    assert code == EXIT_PASS
    assert len(points) == 2
    assert all(0.0 <= point["g"] <= 1.0 for point in points)


def test_config_file_is_merged_under_flags(capsys, tmp_path) -> None:
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"k": 2, "d": 2, "eps": 0.1, "n": 8, "const_c": 3.0}))

    code, out, _ = _run(capsys, "params", "--config", str(config), "--const-c", "1")

    report = json.loads(out)
    assert code == EXIT_PASS
    assert report["result"]["params"]["R"] == 6
    assert report["config"]["options"]["n"] == 8


def test_unknown_config_key_is_rejected(capsys, tmp_path) -> None:
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"k": 2, "colour": "blue"}))

    code, _, err = _run(capsys, "params", "--config", str(config))

    assert code == EXIT_CONFIG
    assert "colour" in err


def test_unknown_flag_is_rejected(capsys) -> None:
    code, _, _ = _run(capsys, "params", "--k", "1", "--bogus", "2")

    assert code == EXIT_CONFIG


def test_out_flag_writes_report_file(capsys, tmp_path) -> None:
    target = tmp_path / "report.json"

    code, out, _ = _run(capsys, "params", "--k", "1", "--d", "1", "--eps", "0.5", "--n", "2", "--out", str(target), "--pretty")

    assert code == EXIT_PASS
    assert out == ""
    assert json.loads(target.read_text())["config"]["out_path"] == str(target)


def test_schema_command_prints_envelope_schema(capsys) -> None:
    code, out, _ = _run(capsys, "schema")

    schema = json.loads(out)
    assert code == EXIT_PASS
    assert {"schema_version", "tool_version", "config", "result"} <= set(schema["properties"])


def test_schema_command_rejects_unknown_model(capsys) -> None:
    code, _, _ = _run(capsys, "schema", "--model", "NoSuchModel")

    assert code == EXIT_CONFIG


@pytest.mark.parametrize("argv", [[], ["diag"]])
def test_missing_subcommand_is_a_usage_error(capsys, argv) -> None:
    code, _, _ = _run(capsys, *argv)

    assert code == EXIT_CONFIG


SCHEMA_FILE = Path(__file__).resolve().parents[1] / "schemas" / "report_envelope.schema.json"


@pytest.mark.parametrize(
    ("command", "values"),
    [
        (["diag", "independence"], {"p": 13, "t": 2, "indices": 3}),
        (["params"], {"k": [1], "d": 1, "eps": 0.5, "n": 2}),
        (["params"], {"k": 1, "d": 1, "eps": "half", "n": 2}),
        (["fool"], {"family_kind": "triangle"}),
        (["params"], {"pretty": "yes"}),
    ],
)
def test_malformed_config_values_exit_with_config_code(capsys, tmp_path, command, values) -> None:
    config = tmp_path / "run.json"
    config.write_text(json.dumps(values))

    code, out, err = _run(capsys, *command, "--config", str(config))

    assert code == EXIT_CONFIG
    assert out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "ConfigError"


def test_config_lists_are_converted_like_flags(capsys, tmp_path) -> None:
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"p": 13, "t": 3, "indices": [0, "1", 2, 5]}))

    code, out, _ = _run(capsys, "diag", "independence", "--config", str(config))

    assert code == EXIT_PASS
    assert json.loads(out)["config"]["options"]["indices"] == [0, 1, 2, 5]


def test_milestones_are_written_outside_the_report(capsys, tmp_path) -> None:
    target = tmp_path / "milestones.json"

    code, out, _ = _run(capsys, "params", "--k", "1", "--d", "1", "--eps", "0.5", "--n", "2", "--milestones", str(target))

    milestones = json.loads(target.read_text())
    events = [entry["extra"]["event"] for entry in milestones]
    assert code == EXIT_PASS
    assert events[0] == "cli.command"
    assert events[-1] == "cli.verdict"
    assert "milestones" not in json.loads(out)["config"]["options"]
    assert run_log_store.get(milestones[0]["extra"]["run_id"]) == []


def test_milestone_store_is_drained_after_every_run(capsys) -> None:
    _run(capsys, "params", "--k", "1", "--d", "1", "--eps", "0.5", "--n", "2")
    _run(capsys, "params", "--k", "1", "--d", "1", "--eps", "1.5", "--n", "2")

    assert not run_log_store._records


def test_schema_command_matches_checked_in_schema(capsys) -> None:
    code, out, _ = _run(capsys, "schema")

    assert code == EXIT_PASS
    assert json.loads(out) == json.loads(SCHEMA_FILE.read_text())


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", *SMALL_PARAMS, "--seed-hex", "c0ffee"],
        ["fool", *SMALL_PARAMS, "--family-kind", "one", "--N", "500"],
        ["diag", "coupling", "--M", "16", "--N", "20000"],
    ],
)
def test_reports_conform_to_checked_in_schema(capsys, argv) -> None:
    schema = json.loads(SCHEMA_FILE.read_text())

    code, out, _ = _run(capsys, *argv)

    report = json.loads(out)
    assert code == EXIT_PASS
    assert set(schema["required"]) <= set(report)
    assert set(report) <= set(schema["properties"])
    assert report["config"]["command"] in schema["$defs"]["RunConfig"]["properties"]["command"]["enum"]
    assert report["verdict"] in (None, *schema["properties"]["verdict"]["anyOf"][0]["enum"])
    assert ReportEnvelope.model_validate(report).schema_version == schema["properties"]["schema_version"]["default"]
