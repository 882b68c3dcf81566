"""Command-line pipeline: compile map files, ingest tables, run inference,
re-stage the cohort, print explanations, and serve the HTTP API."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from stagegraph.analytics import export_matrix
from stagegraph.errors import StagegraphError
from stagegraph.inference import serialize_rules, stage, staging_rule_to_inference_rule
from stagegraph.ingest import nanopub_id
from stagegraph.kgraph.model import iri
from stagegraph.kgraph.turtle import serialize_turtle
from stagegraph.mapcompiler import compile_edition
from stagegraph.ontology import build_cst, cst
from stagegraph.pipeline import (
    classify_step,
    compile_rules,
    infer_step,
    load_config,
    load_world,
    restage_step,
    save_world,
)
from stagegraph.service.reports import edition_token, explanation_for_assertion

EDITION_CHOICE = click.Choice(["ajcc7", "ajcc8"], case_sensitive=False)


def _config(store: str | None, **overrides):
    if store is not None:
        overrides["store_dir"] = Path(store)
    return load_config(overrides)


@click.group()
def main():
    """Guideline-driven breast cancer staging over a knowledge graph."""


@main.command("compile")
@click.option("--edition", type=EDITION_CHOICE, required=True)
@click.option("--maps", "maps_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Map-file directory; defaults to the bundled fixtures.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Axiom output (.ttl).")
@click.option("--rules", "rules_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the compiled rules file.")
@click.option("--cst", "cst_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the staging-terms ontology as Turtle.")
def compile_cmd(edition, maps_dir, out_path, rules_path, cst_path):
    """Compile one edition's map files into axioms (and optionally rules)."""
    token = edition_token(edition)
    ontology = build_cst()
    if cst_path:
        Path(cst_path).write_text(serialize_turtle(ontology.quads()), encoding="utf-8")
        click.echo(f"wrote staging terms to {cst_path}")
    config = load_config()
    directory = Path(maps_dir) if maps_dir else (
        config.maps_ajcc7 if token == "AJCC7" else config.maps_ajcc8
    )
    _, axioms, rules, report = compile_edition(directory, ontology)
    click.echo(report.summary())
    if not report.passed:
        sys.exit(1)
    Path(out_path).write_text(serialize_turtle(axioms.quads), encoding="utf-8")
    click.echo(f"wrote {len(rules)} axioms to {out_path}")
    if rules_path:
        inference_rules = [staging_rule_to_inference_rule(r) for r in rules]
        Path(rules_path).write_text(serialize_rules(inference_rules), encoding="utf-8")
        click.echo(f"wrote {len(inference_rules)} rules to {rules_path}")


@main.command("ingest")
@click.option("--store", type=click.Path(file_okay=False), default=None,
              help="Store directory (default ./stagegraph-store).")
@click.option("--patients", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--evidence", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None, help="Name-assignment seed.")
@click.option("--lenient", is_flag=True, help="Skip rows with unmapped enumerated values.")
def ingest_cmd(store, patients, evidence, seed, lenient):
    """Convert the patient and evidence tables into nanopublications."""
    from stagegraph.pipeline import ingest_step

    config = _config(
        store,
        patients_table=Path(patients) if patients else None,
        evidence_table=Path(evidence) if evidence else None,
        names_seed=seed,
        strict_codebook=False if lenient else None,
    ).validated()
    world = compile_rules(config, build_cst())
    counts = ingest_step(world)
    save_world(world)
    for key, value in sorted(counts.items()):
        click.echo(f"{key}: {value}")
    click.echo(f"store written to {config.store_dir}")


@main.command("infer")
@click.option("--store", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--max-iterations", type=int, default=None)
def infer_cmd(store, max_iterations):
    """Classify profiles and run the rule fixpoint over the store."""
    config = _config(store, max_iterations=max_iterations)
    world = load_world(config)
    classified = classify_step(world)
    report = infer_step(world)
    save_world(world)
    click.echo(f"classified patients: {classified}")
    click.echo(report.summary())


@main.command("restage")
@click.option("--from", "from_edition", type=EDITION_CHOICE, default="ajcc7")
@click.option("--to", "to_edition", type=EDITION_CHOICE, default="ajcc8")
@click.option("--store", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "csv_path", type=click.Path(dir_okay=False), required=True)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
def restage_cmd(from_edition, to_edition, store, csv_path, json_path):
    """Re-stage the cohort between editions and write the transition matrix."""
    world = load_world(_config(store))
    result, matrix = restage_step(world, edition_token(from_edition), edition_token(to_edition))
    Path(csv_path).write_text(export_matrix(matrix, "csv"), encoding="utf-8")
    click.echo(f"staged both: {len(result.changes)}, excluded: {len(result.exclusions)}")
    for patient, reason in result.exclusions:
        click.echo(f"  excluded {patient}: {reason}")
    click.echo(f"matrix written to {csv_path}")
    if json_path:
        Path(json_path).write_text(export_matrix(matrix, "json"), encoding="utf-8")
        click.echo(f"matrix JSON written to {json_path}")


@main.command("explain")
@click.argument("patient_id")
@click.option("--store", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--edition", type=EDITION_CHOICE, default=None,
              help="Limit to one edition; default prints both.")
def explain_cmd(patient_id, store, edition):
    """Print the explanation text behind a patient's inferred stage(s)."""
    world = load_world(_config(store))
    np_id = nanopub_id(world.config.patients_dataset, patient_id)
    from stagegraph.analytics import tumor_of

    tumor = tumor_of(world.store, np_id)
    if tumor is None:
        raise click.ClickException(f"unknown patient {patient_id}")
    editions = [edition_token(edition)] if edition else ["AJCC7", "AJCC8"]
    for token in editions:
        assigned = stage(world.store, tumor, token, world.rules_by_name, world.ontology)
        if assigned is None:
            click.echo(f"[{token}] no stage inferred")
            continue
        quads = world.store.find(iri(tumor), iri(cst("hasAJCCStage")), iri(assigned))
        response = explanation_for_assertion(world, quads[0].graph.value)
        click.echo(f"[{token}] rule: {response.rule}")
        click.echo(response.text)
        click.echo("")


@main.command("serve")
@click.option("--store", type=click.Path(file_okay=False), default=None)
@click.option("--port", type=int, default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--bootstrap", is_flag=True,
              help="Build the knowledge graph in memory instead of loading a store.")
def serve_cmd(store, port, host, bootstrap):
    """Run the HTTP API (and the UI when a frontend build is present)."""
    import uvicorn

    from stagegraph.pipeline import bootstrap_world
    from stagegraph.service.app import create_app

    config = _config(store, port=port)
    world = bootstrap_world(config) if bootstrap else load_world(config)
    uvicorn.run(create_app(world=world, config=config), host=host, port=config.port)


def run():
    try:
        main(standalone_mode=True)
    except StagegraphError as error:
        click.echo(f"error: {error}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
