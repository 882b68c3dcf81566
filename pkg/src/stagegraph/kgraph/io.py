"""Store persistence: one Turtle-subset file segmented per named graph, plus a
line-oriented nanopublication index (id, version, retired flag, three graph IRIs).
"""

from __future__ import annotations

from pathlib import Path

from stagegraph.errors import StagegraphError
from stagegraph.kgraph.store import Nanopublication, QuadStore
from stagegraph.kgraph.turtle import parse_turtle, serialize_turtle

GRAPH_MARKER = "# graph "
STORE_FILE = "store.ttl"
INDEX_FILE = "nanopubs.idx"


def dump_store(store: QuadStore, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sections = []
    for graph in store.graphs():
        text = serialize_turtle(sorted(store.graph_quads(graph), key=lambda q: q.sort_key()))
        sections.append(f"{GRAPH_MARKER}<{graph}>\n{text}")
    (directory / STORE_FILE).write_text("\n".join(sections), encoding="utf-8")

    lines = []
    for record in store.nanopubs():
        lines.append(
            "\t".join(
                [
                    record.id,
                    str(record.version),
                    "1" if record.retired else "0",
                    record.assertion,
                    record.provenance,
                    record.pubinfo,
                ]
            )
        )
    (directory / INDEX_FILE).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_store(directory: str | Path) -> QuadStore:
    directory = Path(directory)
    store_path = directory / STORE_FILE
    if not store_path.exists():
        raise StagegraphError(f"no store dump at {store_path}")
    store = QuadStore()
    current_graph: str | None = None
    buffer: list[str] = []

    def flush():
        if current_graph is not None and buffer:
            for quad in parse_turtle("\n".join(buffer), graph=current_graph, blanks=store.blanks):
                store.insert_quad(quad)

    for line in store_path.read_text(encoding="utf-8").splitlines():
        if line.startswith(GRAPH_MARKER):
            flush()
            target = line[len(GRAPH_MARKER):].strip()
            if not (target.startswith("<") and target.endswith(">")):
                raise StagegraphError(f"malformed graph marker: {line!r}")
            current_graph = target[1:-1]
            buffer = []
        else:
            buffer.append(line)
    flush()

    index_path = directory / INDEX_FILE
    if index_path.exists():
        for raw in index_path.read_text(encoding="utf-8").splitlines():
            if not raw.strip():
                continue
            parts = raw.split("\t")
            if len(parts) != 6:
                raise StagegraphError(f"malformed nanopub index line: {raw!r}")
            np_id, version, retired, assertion, provenance, pubinfo = parts
            store.restore_nanopub_record(
                Nanopublication(np_id, assertion, provenance, pubinfo, int(version), retired == "1")
            )
    return store
