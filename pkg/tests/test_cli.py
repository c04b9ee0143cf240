# tests/test_cli.py
import json
import os

import jsonschema
import pytest
import yaml

import cli
from cli import SCHEMA_DIR, RunConfig, build_parser, run
from diagram_core import parse_pd
from errors import ConfigError
from invariants import jones
from satellite import annular_embed
from tests.diagrams import GRANNY, HOPF, TREFOIL


def _schema(name):
    with open(os.path.join(SCHEMA_DIR, f"{name}.json"), "r", encoding="utf-8") as f:
        return json.load(f)


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def _stderr_error(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


@pytest.fixture
def pd_files(tmp_path):
    paths = {}
    for name, text in (("hopf", HOPF), ("trefoil", TREFOIL), ("granny", GRANNY)):
        path = tmp_path / f"{name}.pd"
        path.write_text(text + "\n", encoding="utf-8")
        paths[name] = str(path)
    garbage = tmp_path / "garbage.pd"
    garbage.write_text("это не PD-код\n", encoding="utf-8")
    paths["garbage"] = str(garbage)
    return paths


def test_bounds_command(capsys):
    assert run(["bounds"]) == 0
    payload = _stdout_json(capsys)
    assert payload["passed"] is True
    jsonschema.validate(payload, _schema("bounds"))


def test_budget_command(capsys):
    assert run(["budget", "--x", "3/4", "--card", "114"]) == 0
    payload = _stdout_json(capsys)
    assert payload == {"card": 114, "x": "3/4", "budget": "1"}
    jsonschema.validate(payload, _schema("budget"))


def test_budget_rejects_x_out_of_range(capsys):
    assert run(["budget", "--x", "2", "--card", "1"]) == 3
    error = _stderr_error(capsys)
    assert error["error"] == "XOutOfRange"
    jsonschema.validate(error, _schema("error"))


def test_garbage_input_is_a_usage_error(capsys, pd_files):
    assert run(["bracket", "--in", pd_files["garbage"]]) == 2
    error = _stderr_error(capsys)
    assert error["kind"] == "usage"


def test_missing_file_is_a_usage_error(capsys, tmp_path):
    assert run(["writhe", "--in", str(tmp_path / "нет.pd")]) == 2


def test_unknown_flag_exits_with_two():
    assert run(["bracket", "--no-such-flag"]) == 2


def test_bracket_and_jones(capsys, pd_files):
    assert run(["bracket", "--in", pd_files["trefoil"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["bracket"]["text"] == "-A^-5 - A^3 + A^7"
    jsonschema.validate(payload, _schema("bracket"))
    assert run(["jones", "--in", pd_files["trefoil"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["jones"]["text"] == "-t^-4 + t^-3 + t^-1"
    jsonschema.validate(payload, _schema("jones"))


def test_entangle_command(capsys, pd_files):
    assert run(["entangle", "--pattern", pd_files["hopf"], "--companion", pd_files["trefoil"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["reduced"] == 20
    assert payload["raw"] == 26
    assert payload["framing"] is True
    assert payload["wrapping"] == 2
    jsonschema.validate(payload, _schema("entangle"))


def test_entangle_without_reduction(capsys, pd_files):
    assert run(["entangle", "--pattern", pd_files["hopf"], "--companion", pd_files["trefoil"], "--no-reduce"]) == 0
    assert _stdout_json(capsys)["reduced"] == 26


def test_cable_command(capsys, pd_files):
    assert run(["cable", "--companion", pd_files["trefoil"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["reduced"] == 13
    jsonschema.validate(payload, _schema("cable"))


def test_prime_and_split(capsys, pd_files):
    assert run(["prime", "--in", pd_files["granny"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["prime"] is False
    jsonschema.validate(payload, _schema("prime"))
    assert run(["split", "--in", pd_files["granny"]]) == 0
    assert [f["crossings"] for f in _stdout_json(capsys)["factors"]] == [3, 3]


def test_validate_and_wrapping(capsys, pd_files):
    assert run(["validate", "--in", pd_files["hopf"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["components"] == 2
    jsonschema.validate(payload, _schema("validate"))
    assert run(["wrapping", "--in", pd_files["hopf"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["wrapping"] == 2
    jsonschema.validate(payload, _schema("wrapping"))


def test_config_file_budget(capsys, tmp_path, pd_files):
    conf = tmp_path / "run.conf"
    conf.write_text("# маленький бюджет\nstate_sum_budget = 2\n", encoding="utf-8")
    assert run(["bracket", "--in", pd_files["trefoil"], "--config", str(conf)]) == 4
    assert _stderr_error(capsys)["kind"] == "budget"
    # флаг перекрывает файл
    assert run(["bracket", "--in", pd_files["trefoil"], "--config", str(conf), "--state-sum-budget", "8"]) == 0


def test_unknown_config_key(capsys, tmp_path, pd_files):
    conf = tmp_path / "run.conf"
    conf.write_text("colour = blue\n", encoding="utf-8")
    assert run(["bracket", "--in", pd_files["trefoil"], "--config", str(conf)]) == 2
    assert _stderr_error(capsys)["error"] == "ConfigError"


def test_census_writes_table(capsys, tmp_path):
    out = tmp_path / "table.csk"
    assert run(["census", "--max-n", "2", "--workers", "1", "--out", str(out)]) == 0
    payload = _stdout_json(capsys)
    jsonschema.validate(payload, _schema("census"))
    text = out.read_text(encoding="utf-8")
    assert "n\tshadows\tprime_shadows\tdiagrams\tbuckets\tp_n\tP_n" in text
    assert [row["n"] for row in payload["rows"]] == [1, 2]


def test_census_over_budget(capsys):
    assert run(["census", "--max-n", "9", "--census-budget", "3"]) == 4


def test_out_writes_artifact_and_config(capsys, tmp_path, pd_files):
    out = tmp_path / "art" / "bracket.json"
    assert run(["bracket", "--in", pd_files["trefoil"], "--out", str(out)]) == 0
    printed = _stdout_json(capsys)
    assert json.loads(out.read_text(encoding="utf-8")) == printed
    saved = RunConfig.from_yaml((tmp_path / "art" / "bracket.json.yaml").read_text(encoding="utf-8"))
    assert saved.subcommand == "bracket"
    assert saved.inputs == {"input": pd_files["trefoil"]}


def test_pretty_output_is_yaml(capsys, pd_files):
    assert run(["writhe", "--in", pd_files["trefoil"], "--pretty"]) == 0
    data = yaml.safe_load(capsys.readouterr().out)
    assert data["writhe"] == -3


def test_run_config_validation():
    cfg = RunConfig(workers=0, clasp_sign=2)
    problems = cfg.validate()
    assert len(problems) == 2
    with pytest.raises(ConfigError):
        RunConfig().apply({"mirror_identify": "maybe"})
    with pytest.raises(ConfigError):
        RunConfig().apply({"colour": "blue"})


def test_parser_knows_every_command():
    parser = build_parser()
    args = parser.parse_args(["disk", "--in", "x.pd", "--crossing", "0", "--corner", "1"])
    assert (args.crossing, args.corner) == (0, 1)


# === КОЛЬЦЕВЫЕ ДИАГРАММЫ ИЗ ФАЙЛА ===

def test_wrapping_reads_saved_answer(capsys, tmp_path, pd_files):
    saved = tmp_path / "hopf.wrapping.json"
    assert run(["wrapping", "--in", pd_files["hopf"], "--out", str(saved)]) == 0
    first = _stdout_json(capsys)
    assert run(["wrapping", "--annular", str(saved)]) == 0
    again = _stdout_json(capsys)
    assert again["wrapping"] == first["wrapping"] == 2
    assert again["winding"] == first["winding"]
    assert again["disk"] == first["disk"]
    jsonschema.validate(again, _schema("wrapping"))


def test_wrapping_reads_annular_json(capsys, tmp_path):
    path = tmp_path / "trefoil.annular.json"
    path.write_text(annular_embed(parse_pd(TREFOIL)).to_json(), encoding="utf-8")
    assert run(["wrapping", "--annular", str(path)]) == 0
    payload = _stdout_json(capsys)
    assert payload["wrapping"] == 2
    assert payload["components"] == [2]
    assert payload["reliable"] is False


def test_wrapping_rejects_broken_annular(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"diagram": {"crossings": [[1, 2, 2, 1]]}}', encoding="utf-8")
    assert run(["wrapping", "--annular", str(path)]) == 2
    assert _stderr_error(capsys)["kind"] == "usage"


def test_wrapping_takes_one_source(pd_files, tmp_path):
    assert run(["wrapping", "--in", pd_files["hopf"], "--annular", str(tmp_path / "a.json")]) == 2
    assert run(["wrapping"]) == 2


# === SEED, OUTPUT_DIR, СХЕМЫ ===

def test_scramble_is_reproducible(capsys, pd_files):
    argv = ["scramble", "--in", pd_files["trefoil"], "--seed", "7", "--steps", "3"]
    assert run(argv) == 0
    first = _stdout_json(capsys)
    assert run(argv) == 0
    assert _stdout_json(capsys) == first
    assert first["seed"] == 7
    assert len(first["trace"]["moves"]) == 3
    assert jones(parse_pd(first["pd"])) == jones(parse_pd(TREFOIL))


def test_scramble_seed_from_config(capsys, tmp_path, pd_files):
    conf = tmp_path / "run.conf"
    conf.write_text("seed = 11\n", encoding="utf-8")
    assert run(["scramble", "--in", pd_files["hopf"], "--config", str(conf), "--steps", "2"]) == 0
    from_file = _stdout_json(capsys)
    assert run(["scramble", "--in", pd_files["hopf"], "--seed", "11", "--steps", "2"]) == 0
    assert _stdout_json(capsys) == from_file
    assert from_file["seed"] == 11


def test_scramble_rejects_negative_steps(capsys, pd_files):
    assert run(["scramble", "--in", pd_files["hopf"], "--steps", "-1"]) == 2


def test_relative_out_goes_to_output_dir(capsys, tmp_path, pd_files, monkeypatch):
    monkeypatch.chdir(tmp_path)
    conf = tmp_path / "run.conf"
    conf.write_text(f"output_dir = {tmp_path / 'arts'}\n", encoding="utf-8")
    assert run(["writhe", "--in", pd_files["trefoil"], "--config", str(conf), "--out", "w.json"]) == 0
    assert json.loads((tmp_path / "arts" / "w.json").read_text(encoding="utf-8"))["writhe"] == -3
    assert not (tmp_path / "w.json").exists()
    assert run(["writhe", "--in", pd_files["trefoil"], "--output-dir", str(tmp_path / "flag"), "--out", "w.json"]) == 0
    assert (tmp_path / "flag" / "w.json").exists()


def test_schema_mismatch_fails_the_run(capsys, monkeypatch):
    monkeypatch.setitem(cli.COMMANDS, "budget", lambda cfg, args: {"card": "сто"})
    assert run(["budget", "--x", "1/2", "--card", "1"]) == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    error = json.loads([line for line in captured.err.splitlines() if line.startswith("{")][-1])
    assert error["error"] == "SchemaMismatch"
    assert error["kind"] == "internal"
    jsonschema.validate(error, _schema("error"))
