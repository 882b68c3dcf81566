"""Quad store with SPO/POS/graph indexes, conjunctive matching, and nanopublication lifecycle.

Concurrency contract: single writer, multiple readers. Mutations take the
store lock; reads are plain dict lookups and may run concurrently with each
other but not with a mutation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

from stagegraph.errors import NanopubError, UnboundVariableError
from stagegraph.kgraph.model import (
    Binding,
    BlankFactory,
    Quad,
    Term,
    TriplePattern,
    Variable,
    binding_sort_key,
    iri,
)

ASSERTION_SUFFIX = "#assertion"
PROVENANCE_SUFFIX = "#provenance"
PUBINFO_SUFFIX = "#pubinfo"


@dataclass(frozen=True, slots=True)
class Nanopublication:
    """Head metadata of one nanopublication version; graph content lives in the store."""

    id: str
    assertion: str
    provenance: str
    pubinfo: str
    version: int
    retired: bool

    @staticmethod
    def graph_iris(np_id: str) -> tuple[str, str, str]:
        return (
            np_id + ASSERTION_SUFFIX,
            np_id + PROVENANCE_SUFFIX,
            np_id + PUBINFO_SUFFIX,
        )


GraphContent = tuple[Sequence[tuple[Term, Term, Term]], Sequence[tuple[Term, Term, Term]], Sequence[tuple[Term, Term, Term]]]


class QuadStore:
    """Set-semantics quad store over named graphs."""

    def __init__(self):
        self._lock = threading.RLock()
        self._quads: set[Quad] = set()
        self._by_graph: dict[str, set[Quad]] = {}
        self._by_sp: dict[tuple[Term, Term], set[Quad]] = {}
        self._by_po: dict[tuple[Term, Term], set[Quad]] = {}
        self._by_s: dict[Term, set[Quad]] = {}
        self._by_p: dict[Term, set[Quad]] = {}
        self._by_o: dict[Term, set[Quad]] = {}
        self._nanopubs: dict[str, list[Nanopublication]] = {}
        self.blanks = BlankFactory()

    def __len__(self) -> int:
        return len(self._quads)

    def __contains__(self, q: Quad) -> bool:
        return q in self._quads

    def quads(self) -> set[Quad]:
        return set(self._quads)

    def graphs(self) -> list[str]:
        return sorted(g for g, quads in self._by_graph.items() if quads)

    def graph_quads(self, graph: str) -> set[Quad]:
        return set(self._by_graph.get(graph, ()))

    # -- mutation --------------------------------------------------------

    def insert_quad(self, q: Quad) -> bool:
        """Insert one quad; returns False when it was already present."""
        with self._lock:
            if q in self._quads:
                return False
            self._quads.add(q)
            self._by_graph.setdefault(q.graph.value, set()).add(q)
            self._by_sp.setdefault((q.subject, q.predicate), set()).add(q)
            self._by_po.setdefault((q.predicate, q.object), set()).add(q)
            self._by_s.setdefault(q.subject, set()).add(q)
            self._by_p.setdefault(q.predicate, set()).add(q)
            self._by_o.setdefault(q.object, set()).add(q)
            return True

    def insert_all(self, quads: Iterable[Quad]) -> int:
        return sum(1 for q in quads if self.insert_quad(q))

    def remove_quad(self, q: Quad) -> bool:
        with self._lock:
            if q not in self._quads:
                return False
            self._quads.discard(q)
            self._by_graph[q.graph.value].discard(q)
            self._by_sp[(q.subject, q.predicate)].discard(q)
            self._by_po[(q.predicate, q.object)].discard(q)
            self._by_s[q.subject].discard(q)
            self._by_p[q.predicate].discard(q)
            self._by_o[q.object].discard(q)
            return True

    def remove_graph(self, graph: str) -> int:
        with self._lock:
            doomed = list(self._by_graph.get(graph, ()))
            for q in doomed:
                self.remove_quad(q)
            return len(doomed)

    # -- matching --------------------------------------------------------

    def _candidates(self, pattern: TriplePattern) -> Iterable[Quad]:
        s = pattern.subject if isinstance(pattern.subject, Term) else None
        p = pattern.predicate if isinstance(pattern.predicate, Term) else None
        o = pattern.object if isinstance(pattern.object, Term) else None
        if s is not None and p is not None:
            found = self._by_sp.get((s, p), ())
        elif p is not None and o is not None:
            found = self._by_po.get((p, o), ())
        elif s is not None:
            found = self._by_s.get(s, ())
        elif o is not None:
            found = self._by_o.get(o, ())
        elif p is not None:
            found = self._by_p.get(p, ())
        else:
            found = self._quads
        for q in found:
            if s is not None and q.subject != s:
                continue
            if p is not None and q.predicate != p:
                continue
            if o is not None and q.object != o:
                continue
            yield q

    def _estimate(self, pattern: TriplePattern) -> int:
        s = pattern.subject if isinstance(pattern.subject, Term) else None
        p = pattern.predicate if isinstance(pattern.predicate, Term) else None
        o = pattern.object if isinstance(pattern.object, Term) else None
        if s is not None and p is not None:
            return len(self._by_sp.get((s, p), ()))
        if p is not None and o is not None:
            return len(self._by_po.get((p, o), ()))
        if s is not None:
            return len(self._by_s.get(s, ()))
        if o is not None:
            return len(self._by_o.get(o, ()))
        if p is not None:
            return len(self._by_p.get(p, ()))
        return len(self._quads)

    def find(
        self,
        subject: Term | None = None,
        predicate: Term | None = None,
        obj: Term | None = None,
        graph_scope: Iterable[str] | None = None,
    ) -> list[Quad]:
        """Quads matching the given constants, sorted canonically."""
        pattern = TriplePattern(
            subject if subject is not None else Variable("_s"),
            predicate if predicate is not None else Variable("_p"),
            obj if obj is not None else Variable("_o"),
        )
        scope = None if graph_scope is None else set(graph_scope)
        found = [
            q
            for q in self._candidates(pattern)
            if scope is None or q.graph.value in scope
        ]
        return sorted(found, key=lambda q: q.sort_key())

    def match(
        self,
        patterns: Sequence[TriplePattern],
        graph_scope: Iterable[str] | None = None,
    ) -> list[Binding]:
        """All bindings satisfying the conjunction of patterns (natural join on shared variables).

        Results are deterministic: sorted by binding serialization. An unknown
        graph in scope yields an empty result, not an error.
        """
        if not patterns:
            raise ValueError("pattern list must be non-empty")
        scope = None if graph_scope is None else {g for g in graph_scope}

        def extend(binding: Binding, pattern: TriplePattern) -> Iterable[Binding]:
            concrete = pattern.substitute(binding)
            for q in self._candidates(concrete):
                if scope is not None and q.graph.value not in scope:
                    continue
                out = dict(binding)
                ok = True
                for part, value in (
                    (concrete.subject, q.subject),
                    (concrete.predicate, q.predicate),
                    (concrete.object, q.object),
                ):
                    if isinstance(part, Variable):
                        bound = out.get(part.name)
                        if bound is None:
                            out[part.name] = value
                        elif bound != value:
                            ok = False
                            break
                if ok:
                    yield out

        solutions: list[Binding] = [{}]
        remaining = list(patterns)
        while remaining:
            bound_vars = set(solutions[0]) if solutions else set()

            # Greedy join order: prefer patterns whose constants (after the
            # bindings accumulated so far) give the smallest candidate set.
            def rank(pt: TriplePattern) -> tuple:
                probe = pt.substitute(solutions[0]) if solutions else pt
                return (self._estimate(probe), len(pt.variables() - bound_vars))

            remaining.sort(key=rank)
            pattern = remaining.pop(0)
            next_solutions: list[Binding] = []
            seen: set[tuple] = set()
            for binding in solutions:
                for extended in extend(binding, pattern):
                    key = binding_sort_key(extended)
                    if key not in seen:
                        seen.add(key)
                        next_solutions.append(extended)
            solutions = next_solutions
            if not solutions:
                return []
        return sorted(solutions, key=binding_sort_key)

    def construct(
        self,
        template: Sequence[TriplePattern],
        binding: Binding,
        target_graph: str,
    ) -> list[Quad]:
        """Instantiate a template under a binding, insert into target_graph, return the quads."""
        graph_term = iri(target_graph)
        quads = []
        for pattern in template:
            missing = pattern.variables() - set(binding)
            if missing:
                raise UnboundVariableError(
                    f"unbound variable(s) in construct template: {', '.join(sorted(missing))}"
                )
            concrete = pattern.substitute(binding)
            quads.append(
                Quad(concrete.subject, concrete.predicate, concrete.object, graph_term)
            )
        for q in quads:
            self.insert_quad(q)
        return quads

    # -- nanopublications -------------------------------------------------

    def nanopub_versions(self, np_id: str) -> list[Nanopublication]:
        return list(self._nanopubs.get(np_id, ()))

    def live_nanopub(self, np_id: str) -> Nanopublication | None:
        for record in self._nanopubs.get(np_id, ()):
            if not record.retired:
                return record
        return None

    def nanopubs(self) -> list[Nanopublication]:
        out = []
        for versions in self._nanopubs.values():
            out.extend(versions)
        return sorted(out, key=lambda r: (r.id, r.version))

    def live_nanopubs(self) -> list[Nanopublication]:
        return [r for r in self.nanopubs() if not r.retired]

    def _content_quads(self, np_id: str, content: GraphContent) -> list[Quad]:
        assertion_g, prov_g, pub_g = Nanopublication.graph_iris(np_id)
        quads = []
        for graph, triples in ((assertion_g, content[0]), (prov_g, content[1]), (pub_g, content[2])):
            graph_term = iri(graph)
            for s, p, o in triples:
                quads.append(Quad(s, p, o, graph_term))
        return quads

    def new_nanopub(
        self,
        assertion: Sequence[tuple[Term, Term, Term]],
        provenance: Sequence[tuple[Term, Term, Term]] = (),
        pubinfo: Sequence[tuple[Term, Term, Term]] = (),
        np_id: str = "",
    ) -> Nanopublication:
        """Create (or idempotently return) a nanopublication with the three content graphs."""
        if not np_id:
            raise NanopubError("a nanopublication id is required")
        if not assertion:
            raise NanopubError(f"empty assertion graph for {np_id}")
        with self._lock:
            content = (tuple(assertion), tuple(provenance), tuple(pubinfo))
            new_quads = self._content_quads(np_id, content)
            live = self.live_nanopub(np_id)
            if live is not None:
                existing = set()
                for g in Nanopublication.graph_iris(np_id):
                    existing |= self._by_graph.get(g, set())
                if existing == set(new_quads):
                    return live
                raise NanopubError(
                    f"{np_id} is live with different content; use retire_and_replace"
                )
            version = max((r.version for r in self._nanopubs.get(np_id, ())), default=0) + 1
            a, p, i = Nanopublication.graph_iris(np_id)
            record = Nanopublication(np_id, a, p, i, version, retired=False)
            self._nanopubs.setdefault(np_id, []).append(record)
            for q in new_quads:
                self.insert_quad(q)
            return record

    def _cites(self, provenance_graph: str, target: Term) -> bool:
        for q in self._by_graph.get(provenance_graph, ()):
            if q.subject == target or q.object == target:
                return True
        return False

    def _retire_record(self, record: Nanopublication) -> None:
        versions = self._nanopubs[record.id]
        versions[versions.index(record)] = Nanopublication(
            record.id, record.assertion, record.provenance, record.pubinfo,
            record.version, retired=True,
        )
        for g in (record.assertion, record.provenance, record.pubinfo):
            self.remove_graph(g)

    def _cascade_retire_dependents(self, assertion_graph: str) -> list[str]:
        """Retire every nanopub whose provenance cites the given assertion graph, transitively."""
        retired_ids = []
        frontier = [assertion_graph]
        while frontier:
            target = iri(frontier.pop())
            dependents = [
                r
                for r in self.live_nanopubs()
                if self._cites(r.provenance, target)
            ]
            for dep in dependents:
                frontier.append(dep.assertion)
                self._retire_record(dep)
                retired_ids.append(dep.id)
        return retired_ids

    def retire_and_replace(self, np_id: str, content: GraphContent) -> Nanopublication:
        """Retire the live version (cascading to inferences derived from it) and install a new one."""
        with self._lock:
            if np_id not in self._nanopubs:
                raise NanopubError(f"unknown nanopublication {np_id}")
            live = self.live_nanopub(np_id)
            if live is not None:
                self._retire_record(live)
            self._cascade_retire_dependents(np_id + ASSERTION_SUFFIX)
            return self.new_nanopub(content[0], content[1], content[2], np_id=np_id)

    def restore_nanopub_record(self, record: Nanopublication) -> None:
        """Re-attach head metadata during store load; graph content is loaded separately."""
        with self._lock:
            self._nanopubs.setdefault(record.id, []).append(record)

    def retire(self, np_id: str) -> list[str]:
        """Retire without replacement; returns ids retired by the cascade."""
        with self._lock:
            if np_id not in self._nanopubs:
                raise NanopubError(f"unknown nanopublication {np_id}")
            live = self.live_nanopub(np_id)
            if live is not None:
                self._retire_record(live)
            return [np_id] + self._cascade_retire_dependents(np_id + ASSERTION_SUFFIX)
