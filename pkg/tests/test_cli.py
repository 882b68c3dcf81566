import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from conftest import data_path
from stagegraph.cli import main
from stagegraph.inference import parse_rules, serialize_rules, staging_rule_to_inference_rule
from stagegraph.mapcompiler import compile_edition, default_maps_dir
from stagegraph.ontology import build_cst


@pytest.fixture()
def runner():
    return CliRunner()


def test_compile_writes_axioms_and_rules(runner, tmp_path):
    out = tmp_path / "ajcc7.ttl"
    rules_path = tmp_path / "ajcc7.rules"
    result = runner.invoke(
        main, ["compile", "--edition", "ajcc7", "--out", str(out), "--rules", str(rules_path)]
    )
    assert result.exit_code == 0, result.output
    assert "19 total" in result.output
    first = out.read_bytes()

    parsed = parse_rules(rules_path.read_text())
    _, _, rules, _ = compile_edition(default_maps_dir("AJCC7"), build_cst())
    original = [staging_rule_to_inference_rule(r) for r in rules]
    assert parsed == original

    # re-entrancy: byte-identical on rerun
    result = runner.invoke(
        main, ["compile", "--edition", "ajcc7", "--out", str(out), "--rules", str(rules_path)]
    )
    assert result.exit_code == 0
    assert out.read_bytes() == first


def test_builtin_rules_survive_rule_file_round_trip():
    from stagegraph.inference import builtin_rules

    rules = builtin_rules()
    assert parse_rules(serialize_rules(rules)) == rules


def test_compile_fails_on_tampered_fixtures(runner, tmp_path):
    maps = tmp_path / "maps"
    shutil.copytree(data_path("maps/ajcc7"), maps)
    iiia = maps / "stage_IIIA.map"
    lines = iiia.read_text().splitlines()
    iiia.write_text("\n".join(lines[:-1]) + "\n")
    result = runner.invoke(
        main,
        ["compile", "--edition", "ajcc7", "--maps", str(maps), "--out", str(tmp_path / "x.ttl")],
    )
    assert result.exit_code == 1
    assert "IIIA" in result.output
    assert "expected 5, found 4" in result.output


@pytest.mark.slow
def test_cli_pipeline_is_reentrant(runner, tmp_path):
    """ingest/infer/restage on the engineered cohort: reruns change no bytes."""
    store = tmp_path / "store"
    patients = str(data_path("tables/engineered_iib.csv"))

    def run(*args):
        result = runner.invoke(main, list(args))
        assert result.exit_code == 0, result.output
        return result

    run("ingest", "--store", str(store), "--patients", patients)
    first_store = (store / "store.ttl").read_bytes()
    first_index = (store / "nanopubs.idx").read_bytes()
    run("ingest", "--store", str(store), "--patients", patients)
    assert (store / "store.ttl").read_bytes() == first_store
    assert (store / "nanopubs.idx").read_bytes() == first_index

    result = run("infer", "--store", str(store))
    assert "classified patients: 80" in result.output
    inferred_store = (store / "store.ttl").read_bytes()
    result = run("infer", "--store", str(store))
    assert "0 new quads" in result.output
    assert (store / "store.ttl").read_bytes() == inferred_store

    matrix_csv = tmp_path / "matrix.csv"
    matrix_json = tmp_path / "matrix.json"
    result = run(
        "restage", "--from", "ajcc7", "--to", "ajcc8",
        "--store", str(store), "--out", str(matrix_csv), "--json", str(matrix_json),
    )
    assert "staged both: 80" in result.output
    first_matrix = matrix_csv.read_bytes()
    run(
        "restage", "--from", "ajcc7", "--to", "ajcc8",
        "--store", str(store), "--out", str(matrix_csv), "--json", str(matrix_json),
    )
    assert matrix_csv.read_bytes() == first_matrix

    result = run("explain", "E0001", "--store", str(store), "--edition", "ajcc8")
    assert "was found to be AJCC8 Stage IB since the following are true:" in result.output
    assert result.output.count("- ") == 7
