"""Forward-chaining fixpoint engine.

Built-in closure rules (class/instance/property subsumption, equivalence,
inversion) and compiled staging rules run until no new facts derive. Every
rule application that produces new knowledge is packaged as a fresh
nanopublication whose provenance cites the rule, the matched bindings, the
graphs the inputs came from, and a rendered natural-language explanation
attached with prov:used.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from stagegraph.errors import (
    AmbiguousStageError,
    IterationLimitError,
    StagegraphError,
)
from stagegraph.kgraph.model import (
    Binding,
    Quad,
    Term,
    TriplePattern,
    Variable,
    binding_sort_key,
    blank,
    iri,
    literal,
)
from stagegraph.kgraph.store import QuadStore
from stagegraph.mapcompiler import StagingRule
from stagegraph.namespaces import (
    NP,
    OWL_EQUIVALENT_CLASS,
    OWL_INVERSE_OF,
    PROV_USED,
    PROV_VALUE,
    PROV_WAS_ATTRIBUTED_TO,
    PROV_WAS_DERIVED_FROM,
    RDF_TYPE,
    RDFS_COMMENT,
    RDFS_LABEL,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    SIO_ATTRIBUTE_OF,
    SIO_HAS_VALUE,
    expand,
    local_name,
    shrink,
)
from stagegraph.ontology import EDITIONS, CstOntology, cst

PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class InferenceRule:
    """Declarative rule: match ``where``, assert ``construct`` for the resource."""

    name: str
    resource_var: str
    where: tuple[TriplePattern, ...]
    construct: tuple[TriplePattern, ...]
    explanation: str | None = None

    def __post_init__(self):
        where_vars = set()
        for pattern in self.where:
            where_vars |= pattern.variables()
        if self.resource_var not in where_vars:
            raise StagegraphError(f"rule {self.name}: resource ?{self.resource_var} not in where clause")
        for pattern in self.construct:
            missing = pattern.variables() - where_vars
            if missing:
                raise StagegraphError(
                    f"rule {self.name}: construct uses unbound {sorted(missing)}"
                )


@dataclass(frozen=True)
class ExplanationRecord:
    text: str
    rule_name: str
    bindings: Binding
    target_assertion: str

    def __post_init__(self):
        leftover = PLACEHOLDER.findall(self.text)
        if leftover:
            raise StagegraphError(f"unresolved placeholders in explanation: {leftover}")


@dataclass
class FixpointReport:
    iterations: int = 1
    inferred_quad_count: int = 0
    fired: dict[str, int] = field(default_factory=dict)
    nanopubs_created: int = 0

    def summary(self) -> str:
        lines = [
            f"fixpoint converged after {self.iterations} iteration(s): "
            f"{self.inferred_quad_count} new quads in {self.nanopubs_created} nanopublications"
        ]
        for name in sorted(self.fired):
            lines.append(f"  {name}: {self.fired[name]}")
        return "\n".join(lines)


def _v(name: str) -> Variable:
    return Variable(name)


def builtin_rules() -> list[InferenceRule]:
    """Closure rules for class/instance subsumption, equivalence, and inversion."""
    sub = iri(RDFS_SUBCLASSOF)
    rtype = iri(RDF_TYPE)
    eq = iri(OWL_EQUIVALENT_CLASS)
    subprop = iri(RDFS_SUBPROPERTYOF)
    inv = iri(OWL_INVERSE_OF)
    return [
        InferenceRule(
            "Class Subsumption Closure",
            "resource",
            (
                TriplePattern(_v("resource"), sub, _v("class")),
                TriplePattern(_v("class"), sub, _v("superClass")),
            ),
            (TriplePattern(_v("resource"), sub, _v("superClass")),),
            "Since {{class}} is a subclass of {{superClass}}, any class that is "
            "a subclass of {{class}} is also a subclass of {{superClass}}. "
            "Therefore, {{resource}} is a subclass of {{superClass}}.",
        ),
        InferenceRule(
            "Instance Type Closure",
            "resource",
            (
                TriplePattern(_v("resource"), rtype, _v("class")),
                TriplePattern(_v("class"), sub, _v("superClass")),
            ),
            (TriplePattern(_v("resource"), rtype, _v("superClass")),),
            "Since {{class}} is a subclass of {{superClass}}, every instance of "
            "{{class}} is also an instance of {{superClass}}. Therefore, "
            "{{resource}} is classified as {{superClass}}.",
        ),
        InferenceRule(
            "Class Equivalence Symmetry",
            "resource",
            (TriplePattern(_v("resource"), eq, _v("other")),),
            (TriplePattern(_v("other"), eq, _v("resource")),),
            "Since {{resource}} is equivalent to {{other}}, {{other}} is also "
            "equivalent to {{resource}}.",
        ),
        InferenceRule(
            "Class Equivalence Subsumption",
            "resource",
            (TriplePattern(_v("resource"), eq, _v("other")),),
            (TriplePattern(_v("resource"), sub, _v("other")),),
            "Since {{resource}} is equivalent to {{other}}, {{resource}} is in "
            "particular a subclass of {{other}}.",
        ),
        InferenceRule(
            "Property Subsumption Closure",
            "subject",
            (
                TriplePattern(_v("property"), subprop, _v("superProperty")),
                TriplePattern(_v("subject"), _v("property"), _v("value")),
            ),
            (TriplePattern(_v("subject"), _v("superProperty"), _v("value")),),
            "Since {{property}} is a subproperty of {{superProperty}}, "
            "{{subject}} also stands in {{superProperty}} to {{value}}.",
        ),
        InferenceRule(
            "Inverse Property Symmetry",
            "property",
            (TriplePattern(_v("property"), inv, _v("inverse")),),
            (TriplePattern(_v("inverse"), inv, _v("property")),),
            "Since {{property}} is the inverse of {{inverse}}, {{inverse}} is "
            "the inverse of {{property}}.",
        ),
        InferenceRule(
            "Inverse Property Closure",
            "subject",
            (
                TriplePattern(_v("property"), inv, _v("inverse")),
                TriplePattern(_v("subject"), _v("property"), _v("value")),
            ),
            (TriplePattern(_v("value"), _v("inverse"), _v("subject")),),
            "Since {{property}} is the inverse of {{inverse}}, and {{subject}} "
            "{{property}} {{value}}, it follows that {{value}} {{inverse}} {{subject}}.",
        ),
    ]


def staging_rule_to_inference_rule(rule: StagingRule) -> InferenceRule:
    return InferenceRule(
        rule.name,
        rule.resource_var(),
        tuple(rule.where()),
        tuple(rule.construct()),
        rule.explanation_template,
    )


class ExplanationRenderer:
    """Substitutes rule placeholders with readable descriptions of bound terms.

    Descriptions prefer a short rdfs:comment (< 80 chars) over the rdfs:label,
    falling back to the IRI local name; literals render as their value.
    """

    def __init__(self, store: QuadStore | None = None, ontology: CstOntology | None = None):
        self.store = store
        self.ontology = ontology

    def describe(self, term: Term) -> str:
        if term.is_literal:
            return term.value
        if self.store is not None:
            comments = [
                q.object.value
                for q in self.store.find(term, iri(RDFS_COMMENT))
                if q.object.is_literal
            ]
            short = [c for c in sorted(comments) if len(c) < 80]
            if short:
                return short[0]
            labels = [
                q.object.value
                for q in self.store.find(term, iri(RDFS_LABEL))
                if q.object.is_literal
            ]
            if labels:
                return sorted(labels)[0]
        if self.ontology is not None and term.is_iri and term.value in self.ontology.classes:
            return self.ontology.describe(term.value)
        return local_name(term.value)

    def render(self, rule: InferenceRule, binding: Binding, target_assertion: str = "") -> ExplanationRecord:
        if rule.explanation is not None:
            def fill(match: re.Match) -> str:
                name = match.group(1)
                if name not in binding:
                    raise StagegraphError(
                        f"rule {rule.name}: explanation references unbound ?{name}"
                    )
                return self.describe(binding[name])

            text = PLACEHOLDER.sub(fill, rule.explanation)
        else:
            lines = []
            for pattern in rule.where:
                concrete = pattern.substitute(binding)
                parts = (concrete.subject, concrete.predicate, concrete.object)
                if concrete.predicate == iri(RDF_TYPE):
                    lines.append(f"- {self.describe(parts[0])} is {self.describe(parts[2])}.")
                else:
                    lines.append(
                        f"- {self.describe(parts[0])} {self.describe(parts[1])} {self.describe(parts[2])}."
                    )
            text = "\n".join(lines)
        return ExplanationRecord(text, rule.name, dict(binding), target_assertion)


def _term_to_text(part) -> str:
    if isinstance(part, Variable):
        return f"?{part.name}"
    if part.is_iri:
        compact = shrink(part.value)
        return compact if compact != part.value else f"<{part.value}>"
    if part.is_literal:
        base = json.dumps(part.value)
        if part.datatype:
            return f"{base}^^{shrink(part.datatype)}"
        if part.language:
            return f"{base}@{part.language}"
        return base
    return f"_:{part.value}"


def _text_to_term(text: str):
    if text.startswith("?"):
        return Variable(text[1:])
    if text.startswith("<") and text.endswith(">"):
        return iri(text[1:-1])
    if text.startswith('"'):
        if "^^" in text:
            raw, _, dtype = text.rpartition("^^")
            return literal(json.loads(raw), datatype=expand(dtype))
        if text.rfind('"') < len(text) - 1 and "@" in text[text.rfind('"'):]:
            raw, _, lang = text.rpartition("@")
            return literal(json.loads(raw), language=lang)
        return literal(json.loads(text))
    if text.startswith("_:"):
        return blank(text[2:])
    expanded = expand(text)
    if expanded == text and ":" not in text:
        raise StagegraphError(f"cannot parse rule term {text!r}")
    return iri(expanded)


def _pattern_to_text(pattern: TriplePattern) -> str:
    return " ".join(
        _term_to_text(part) for part in (pattern.subject, pattern.predicate, pattern.object)
    )


def _text_to_pattern(text: str) -> TriplePattern:
    parts = text.split()
    if len(parts) != 3:
        raise StagegraphError(f"rule pattern needs three terms: {text!r}")
    return TriplePattern(*(_text_to_term(p) for p in parts))


def serialize_rules(rules: list[InferenceRule]) -> str:
    """Line-oriented keyed rule file: name, resource, where/construct patterns,
    explanation template (newlines escaped)."""
    blocks = []
    for rule in rules:
        lines = [f"rule: {rule.name}", f"resource: ?{rule.resource_var}"]
        lines += [f"where: {_pattern_to_text(p)}" for p in rule.where]
        lines += [f"construct: {_pattern_to_text(p)}" for p in rule.construct]
        if rule.explanation is not None:
            lines.append("explanation: " + rule.explanation.replace("\n", "\\n"))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def parse_rules(text: str) -> list[InferenceRule]:
    rules = []
    current: dict[str, list[str]] = {}

    def finish():
        if not current:
            return
        name = current["rule"][0]
        resource = current["resource"][0].lstrip("?")
        where = tuple(_text_to_pattern(t) for t in current.get("where", []))
        construct = tuple(_text_to_pattern(t) for t in current.get("construct", []))
        explanation = None
        if "explanation" in current:
            explanation = current["explanation"][0].replace("\\n", "\n")
        rules.append(InferenceRule(name, resource, where, construct, explanation))
        current.clear()

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            finish()
            continue
        key, _, value = line.partition(":")
        current.setdefault(key.strip(), []).append(value.strip())
    finish()
    return rules


class _DeltaIndex:
    """Per-round index over newly derived quads so each rule pattern probes
    only plausible candidates instead of scanning the whole delta."""

    def __init__(self, quads: list[Quad]):
        self.all = list(dict.fromkeys(quads))
        self.by_po: dict[tuple[Term, Term], list[Quad]] = {}
        self.by_p: dict[Term, list[Quad]] = {}
        for q in self.all:
            self.by_po.setdefault((q.predicate, q.object), []).append(q)
            self.by_p.setdefault(q.predicate, []).append(q)

    def candidates(self, pattern: TriplePattern) -> list[Quad]:
        p = pattern.predicate if isinstance(pattern.predicate, Term) else None
        o = pattern.object if isinstance(pattern.object, Term) else None
        if p is not None and o is not None:
            return self.by_po.get((p, o), [])
        if p is not None:
            return self.by_p.get(p, [])
        return self.all


def _rule_slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def _binding_digest(rule_name: str, binding: Binding) -> str:
    payload = rule_name + "|" + "|".join(
        f"{name}={binding[name]!r}" for name in sorted(binding)
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class InferenceEngine:
    """Runs a rule set to fixpoint over a store (single-writer contract)."""

    def __init__(
        self,
        store: QuadStore,
        rules: list[InferenceRule],
        ontology: CstOntology | None = None,
        max_iterations: int = 100,
        np_base: str = NP,
    ):
        names = [r.name for r in rules]
        if len(names) != len(set(names)):
            raise StagegraphError("rule names must be unique")
        self.store = store
        self.rules = sorted(rules, key=lambda r: r.name)
        self.renderer = ExplanationRenderer(store, ontology)
        self.max_iterations = max_iterations
        self.np_base = np_base

    # -- evaluation -------------------------------------------------------

    @staticmethod
    def _unify(pattern: TriplePattern, quad: Quad) -> Binding | None:
        binding: Binding = {}
        for part, value in (
            (pattern.subject, quad.subject),
            (pattern.predicate, quad.predicate),
            (pattern.object, quad.object),
        ):
            if isinstance(part, Variable):
                bound = binding.get(part.name)
                if bound is None:
                    binding[part.name] = value
                elif bound != value:
                    return None
            elif part != value:
                return None
        return binding

    def _rule_bindings(
        self,
        rule: InferenceRule,
        delta: "_DeltaIndex | None",
        scope: set[str] | None,
    ) -> list[Binding]:
        if delta is None:
            return self.store.match(list(rule.where), graph_scope=scope)
        # Semi-naive: only solutions supported by at least one delta quad.
        solutions: dict[tuple, Binding] = {}
        for index, pattern in enumerate(rule.where):
            for quad in delta.candidates(pattern):
                if scope is not None and quad.graph.value not in scope:
                    continue
                partial = self._unify(pattern, quad)
                if partial is None:
                    continue
                rest = [p.substitute(partial) for j, p in enumerate(rule.where) if j != index]
                if rest:
                    for extension in self.store.match(rest, graph_scope=scope):
                        merged = {**partial, **extension}
                        solutions[binding_sort_key(merged)] = merged
                else:
                    solutions[binding_sort_key(partial)] = partial
        return [solutions[key] for key in sorted(solutions)]

    def _support_graphs(self, rule: InferenceRule, binding: Binding, scope: set[str] | None) -> list[str]:
        graphs: set[str] = set()
        for pattern in rule.where:
            concrete = pattern.substitute(binding)
            if concrete.variables():
                continue
            for quad in self.store.find(concrete.subject, concrete.predicate, concrete.object, scope):
                graphs.add(quad.graph.value)
        return sorted(graphs)

    def _apply(
        self,
        rule: InferenceRule,
        binding: Binding,
        scope: set[str] | None,
        report: FixpointReport,
    ) -> list[Quad]:
        instantiated = [p.substitute(binding) for p in rule.construct]
        if all(
            self.store.find(t.subject, t.predicate, t.object) for t in instantiated
        ):
            return []
        np_id = f"{self.np_base}inference/{_rule_slug(rule.name)}/{_binding_digest(rule.name, binding)}"
        assertion_graph = np_id + "#assertion"
        assertion = [(t.subject, t.predicate, t.object) for t in instantiated]
        record = self.renderer.render(rule, binding, assertion_graph)
        explanation_node = iri(np_id + "#explanation")
        a_term = iri(assertion_graph)
        provenance = [
            (a_term, iri(cst("inferredBy")), literal(rule.name)),
            (
                a_term,
                iri(cst("matchedBindings")),
                literal("; ".join(f"{k}={binding[k]!r}" for k in sorted(binding))),
            ),
            (a_term, iri(PROV_USED), explanation_node),
            (explanation_node, iri(RDF_TYPE), iri(cst("Explanation"))),
            (explanation_node, iri(PROV_VALUE), literal(record.text)),
        ]
        for graph in self._support_graphs(rule, binding, scope):
            provenance.append((a_term, iri(PROV_WAS_DERIVED_FROM), iri(graph)))
        pubinfo = [(iri(np_id), iri(PROV_WAS_ATTRIBUTED_TO), literal("stagegraph-inference"))]
        before = len(self.store)
        record_np = self.store.new_nanopub(assertion, provenance, pubinfo, np_id=np_id)
        report.inferred_quad_count += len(self.store) - before
        report.nanopubs_created += 1
        # Feed every content quad back as delta; pre-existing ones only cost a
        # redundant (deduplicated) probe next round.
        content: list[Quad] = []
        for graph in (record_np.assertion, record_np.provenance, record_np.pubinfo):
            content.extend(self.store.graph_quads(graph))
        return content

    def run(self, graph_scope=None) -> FixpointReport:
        scope = None if graph_scope is None else set(graph_scope)
        report = FixpointReport(iterations=0)
        delta: _DeltaIndex | None = None
        while True:
            report.iterations += 1
            if report.iterations > self.max_iterations:
                last = sorted(
                    name for name, count in report.fired.items() if count
                )[-5:]
                raise IterationLimitError(self.max_iterations, last)
            round_new: list[Quad] = []
            for rule in self.rules:
                for binding in self._rule_bindings(rule, delta, scope):
                    produced = self._apply(rule, binding, scope, report)
                    if produced:
                        report.fired[rule.name] = report.fired.get(rule.name, 0) + 1
                        round_new.extend(produced)
            if not round_new:
                break
            delta = _DeltaIndex(round_new)
        return report


# -- stage lookup and treatment linking --------------------------------------


def _shadows(a: StagingRule, b: StagingRule, ontology: CstOntology) -> bool:
    """True when rule a's constraints are strictly more specific than rule b's."""
    if a.constraints == b.constraints:
        return False
    for axis, required in b.constraints.items():
        have = a.constraints.get(axis)
        if have is None or not ontology.is_subclass(have, required):
            return False
    return True


def stage(
    store: QuadStore,
    tumor: str,
    edition: str,
    staging_rules: dict[str, StagingRule],
    ontology: CstOntology,
) -> str | None:
    """The inferred stage for a tumor under one edition, or None when no rule fired.

    When subvariant subsumption makes several rules fire (an N1mi tumor also
    satisfies the broad N1 combinations), the strictly most specific rule wins;
    genuinely incomparable multi-stage outcomes raise AmbiguousStageError.
    """
    if edition not in EDITIONS:
        raise StagegraphError(f"unknown edition {edition!r}")
    has_stage = iri(cst("hasAJCCStage"))
    tumor_term = iri(tumor)
    prefix = cst(f"{edition}_Stage_")
    found = [
        q
        for q in store.find(tumor_term, has_stage)
        if q.object.is_iri and q.object.value.startswith(prefix)
    ]
    stages = sorted({q.object.value for q in found})
    if not stages:
        return None
    if len(stages) == 1:
        return stages[0]

    fired: list[tuple[StagingRule, str]] = []
    for quad in found:
        assertion_graph = quad.graph.value
        np_id = assertion_graph.removesuffix("#assertion")
        for prov_quad in store.find(
            iri(assertion_graph), iri(cst("inferredBy")), graph_scope={np_id + "#provenance"}
        ):
            rule = staging_rules.get(prov_quad.object.value)
            if rule is not None:
                fired.append((rule, quad.object.value))
    survivors = {
        stage_iri
        for rule, stage_iri in fired
        if not any(
            other_stage != stage_iri and _shadows(other_rule, rule, ontology)
            for other_rule, other_stage in fired
        )
    }
    if len(survivors) == 1:
        return survivors.pop()
    raise AmbiguousStageError(tumor, edition, sorted(survivors or set(stages)))


@dataclass(frozen=True)
class TreatmentLink:
    evidence_id: str
    disease: str
    explanation: str
    attributes: dict[str, str]


def link_treatments(
    store: QuadStore,
    class_iri: str,
    ontology: CstOntology,
) -> list[TreatmentLink]:
    """Evidence whose disease concept matches the class directly, via subclassing,
    or via a biomarker the disease concept is characterized by."""
    links: list[TreatmentLink] = []
    about = iri(cst("aboutFeature"))
    for ev_quad in store.find(None, iri(RDF_TYPE), iri(cst("Evidence"))):
        evidence = ev_quad.subject
        attributes: dict[str, str] = {}
        disease_values: list[str] = []
        for attr_quad in store.find(None, iri(SIO_ATTRIBUTE_OF), evidence):
            attr = attr_quad.subject
            types = [q.object.value for q in store.find(attr, iri(RDF_TYPE))]
            values = [q.object for q in store.find(attr, iri(SIO_HAS_VALUE))]
            if not types or not values:
                continue
            key = local_name(sorted(types)[0])
            attributes[key] = values[0].value
            if any(local_name(t) == "Disease" for t in types):
                for mapped in store.find(attr, iri(cst("hasMappedTerm"))):
                    if mapped.object.is_iri:
                        disease_values.append(mapped.object.value)
        for disease in disease_values:
            explanation = None
            if disease == class_iri:
                explanation = (
                    f"Evidence targets {ontology.describe(disease)} directly."
                )
            elif ontology.is_subclass(class_iri, disease):
                explanation = (
                    f"{ontology.describe(class_iri)} is a kind of "
                    f"{ontology.describe(disease)}, which this evidence targets."
                )
            else:
                for feature_quad in store.find(iri(disease), about):
                    feature = feature_quad.object.value
                    if feature == class_iri or ontology.is_subclass(class_iri, feature):
                        explanation = (
                            f"The evidence targets {ontology.describe(disease)}, "
                            f"characterized by {ontology.describe(feature)}, which "
                            f"this case exhibits."
                        )
                        break
            if explanation is not None:
                np_id = ev_quad.graph.value.removesuffix("#assertion")
                links.append(TreatmentLink(np_id, disease, explanation, attributes))
                break
    return sorted(links, key=lambda link: link.evidence_id)
