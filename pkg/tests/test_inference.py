import random

import pytest

from _oracles import transitive_closure
from stagegraph.errors import AmbiguousStageError, IterationLimitError, StagegraphError
from stagegraph.inference import (
    ExplanationRenderer,
    InferenceEngine,
    InferenceRule,
    TreatmentLink,
    builtin_rules,
    link_treatments,
    stage,
    staging_rule_to_inference_rule,
)
from stagegraph.kgraph import QuadStore, TriplePattern, Variable, iri, literal
from stagegraph.mapcompiler import compile_edition, default_maps_dir
from stagegraph.namespaces import (
    CST,
    OWL_EQUIVALENT_CLASS,
    OWL_INVERSE_OF,
    PROV_USED,
    RDF_TYPE,
    RDFS_LABEL,
    RDFS_SUBCLASSOF,
    SIO_ATTRIBUTE_OF,
    SIO_HAS_VALUE,
)
from stagegraph.ontology import build_cst, cst

TYPE = iri(RDF_TYPE)
SUB = iri(RDFS_SUBCLASSOF)
SCRATCH = "https://stagegraph.example/graph/scratch"


@pytest.fixture(scope="module")
def ontology():
    return build_cst()


@pytest.fixture(scope="module")
def ajcc7(ontology):
    return compile_edition(default_maps_dir("AJCC7"), ontology)


@pytest.fixture(scope="module")
def ajcc8(ontology):
    return compile_edition(default_maps_dir("AJCC8"), ontology)


@pytest.fixture(scope="module")
def all_rules(ajcc7, ajcc8):
    rules = builtin_rules()
    rules += [staging_rule_to_inference_rule(r) for r in ajcc7[2]]
    rules += [staging_rule_to_inference_rule(r) for r in ajcc8[2]]
    return rules


@pytest.fixture(scope="module")
def rules_by_name(ajcc7, ajcc8):
    return {r.name: r for r in ajcc7[2] + ajcc8[2]}


def fresh_store(ontology) -> QuadStore:
    store = QuadStore()
    store.insert_all(ontology.quads())
    return store


def add_tumor(store: QuadStore, n: int, classes: dict[str, str], label: str | None = None) -> str:
    """Minimal patient nanopub: typed tumor plus one typed feature node per axis."""
    np_id = f"https://stagegraph.example/np/test-patient-{n}"
    tumor = f"https://stagegraph.example/data/test/{n}/tumor"
    triples = [(iri(tumor), TYPE, iri(cst("Tumor")))]
    if label:
        triples.append((iri(tumor), iri(RDFS_LABEL), literal(label)))
    for axis, value in classes.items():
        node = iri(f"{tumor}/feature/{axis}")
        triples.append((node, TYPE, iri(cst(value))))
        triples.append((node, iri(SIO_ATTRIBUTE_OF), iri(tumor)))
    store.new_nanopub(triples, np_id=np_id)
    return tumor


# -- builtin closures ---------------------------------------------------------


def test_subsumption_closure_with_explanation(ontology):
    store = QuadStore()
    a, b, c = (iri(CST + x) for x in "ABC")
    g = iri(SCRATCH)
    from stagegraph.kgraph import Quad

    store.insert_quad(Quad(a, SUB, b, g))
    store.insert_quad(Quad(b, SUB, c, g))
    engine = InferenceEngine(store, [r for r in builtin_rules() if r.name == "Class Subsumption Closure"])
    engine.run()
    assert store.find(a, SUB, c)
    graphs = {q.graph.value for q in store.find(a, SUB, c)}
    np_id = next(iter(graphs)).removesuffix("#assertion")
    prov = store.graph_quads(np_id + "#provenance")
    texts = [q.object.value for q in prov if q.predicate.value.endswith("value")]
    assert len(texts) == 1
    assert texts[0].startswith("Since B is a subclass of C")
    assert "A is a subclass of C" in texts[0]


def test_instance_type_propagates_through_subvariant(ontology):
    store = fresh_store(ontology)
    x = iri("https://stagegraph.example/data/test/x")
    from stagegraph.kgraph import Quad

    store.insert_quad(Quad(x, TYPE, iri(cst("T1_am")), iri(SCRATCH)))
    engine = InferenceEngine(store, builtin_rules(), ontology)
    engine.run()
    assert store.find(x, TYPE, iri(cst("T1")))


def test_inverse_closure_hand_checked():
    store = QuadStore()
    from stagegraph.kgraph import Quad

    p, q = iri(CST + "p"), iri(CST + "q")
    a, b = iri(CST + "a"), iri(CST + "b")
    g = iri(SCRATCH)
    store.insert_quad(Quad(p, iri(OWL_INVERSE_OF), q, g))
    store.insert_quad(Quad(a, p, b, g))
    engine = InferenceEngine(store, builtin_rules())
    engine.run()
    assert store.find(b, q, a)
    assert store.find(q, iri(OWL_INVERSE_OF), p)


def _random_dag(rng: random.Random, max_nodes: int = 100):
    n = rng.randint(4, max_nodes)
    nodes = [f"{CST}n{k}" for k in range(n)]
    edges = set()
    for _ in range(int(n * 1.3)):
        i = rng.randrange(0, n - 1)
        j = min(n - 1, i + 1 + min(rng.randrange(1, 6), rng.randrange(1, 6)))
        if i != j:
            edges.add((nodes[i], nodes[j]))
    return edges


@pytest.mark.parametrize("seed", range(10))
def test_subsumption_closure_matches_bruteforce_on_random_dags(seed):
    rng = random.Random(seed)
    edges = _random_dag(rng, max_nodes=60)
    store = QuadStore()
    from stagegraph.kgraph import Quad

    g = iri(SCRATCH)
    for a, b in edges:
        store.insert_quad(Quad(iri(a), SUB, iri(b), g))
    engine = InferenceEngine(store, [r for r in builtin_rules() if r.name == "Class Subsumption Closure"])
    engine.run()
    derived = {(q.subject.value, q.object.value) for q in store.find(None, SUB, None)}
    assert derived == transitive_closure(edges)


def test_equivalence_closure_matches_oracle():
    rng = random.Random(7)
    edges = _random_dag(rng, max_nodes=30)
    nodes = sorted({x for e in edges for x in e})
    eq_pairs = {(nodes[0], nodes[-1]), (nodes[1], nodes[2])}
    store = QuadStore()
    from stagegraph.kgraph import Quad

    g = iri(SCRATCH)
    for a, b in edges:
        store.insert_quad(Quad(iri(a), SUB, iri(b), g))
    for a, b in eq_pairs:
        store.insert_quad(Quad(iri(a), iri(OWL_EQUIVALENT_CLASS), iri(b), g))
    rules = [
        r
        for r in builtin_rules()
        if r.name in ("Class Subsumption Closure", "Class Equivalence Symmetry", "Class Equivalence Subsumption")
    ]
    InferenceEngine(store, rules).run()
    expected_eq = set(eq_pairs) | {(b, a) for a, b in eq_pairs}
    derived_eq = {
        (q.subject.value, q.object.value)
        for q in store.find(None, iri(OWL_EQUIVALENT_CLASS), None)
    }
    assert derived_eq == expected_eq
    expected_sub = transitive_closure(set(edges) | expected_eq)
    derived_sub = {(q.subject.value, q.object.value) for q in store.find(None, SUB, None)}
    assert derived_sub == expected_sub


# -- fixpoint over staging rules ---------------------------------------------


def test_anatomic_profile_infers_stage_ia(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(store, 1, {"T": "T1", "N": "N0", "M": "M0"})
    engine = InferenceEngine(store, all_rules, ontology)
    engine.run()
    assert store.find(iri(tumor), iri(cst("hasAJCCStage")), iri(cst("AJCC7_Stage_IA")))
    assert stage(store, tumor, "AJCC7", rules_by_name, ontology) == cst("AJCC7_Stage_IA")


def test_seven_feature_profile_infers_ajcc8_ia(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(
        store,
        2,
        {"T": "T1", "N": "N0", "M": "M0", "Grade": "Grade1", "HER2": "HER2_Neg", "ER": "ER_Neg", "PR": "PR_Pos"},
    )
    InferenceEngine(store, all_rules, ontology).run()
    assert stage(store, tumor, "AJCC8", rules_by_name, ontology) == cst("AJCC8_Stage_IA")
    assert stage(store, tumor, "AJCC7", rules_by_name, ontology) == cst("AJCC7_Stage_IA")


def test_second_run_adds_nothing(ontology, all_rules):
    store = fresh_store(ontology)
    add_tumor(store, 3, {"T": "T3", "N": "N0", "M": "M0"})
    engine = InferenceEngine(store, all_rules, ontology)
    first = engine.run()
    assert first.inferred_quad_count > 0
    second = engine.run()
    assert second.inferred_quad_count == 0
    assert second.nanopubs_created == 0
    assert second.iterations == 1


def test_monotone_growth_and_termination(ontology, all_rules):
    store = fresh_store(ontology)
    add_tumor(store, 4, {"T": "T2", "N": "N1", "M": "M0"})
    before = len(store)
    report = InferenceEngine(store, all_rules, ontology).run()
    assert len(store) == before + report.inferred_quad_count
    assert report.iterations >= 1


def test_iteration_cap_raises_with_diagnostic(ontology):
    store = QuadStore()
    from stagegraph.kgraph import Quad

    g = iri(SCRATCH)
    chain = [iri(CST + f"c{k}") for k in range(6)]
    for a, b in zip(chain, chain[1:]):
        store.insert_quad(Quad(a, SUB, b, g))
    engine = InferenceEngine(
        store,
        [r for r in builtin_rules() if r.name == "Class Subsumption Closure"],
        max_iterations=1,
    )
    with pytest.raises(IterationLimitError) as exc:
        engine.run()
    assert "Class Subsumption Closure" in str(exc.value)


# -- explanations -------------------------------------------------------------


LISTING_PROFILE = {
    "T": "T3",
    "N": "N3",
    "M": "M0",
    "Grade": "Grade1",
    "HER2": "HER2_Pos",
    "ER": "ER_Pos",
    "PR": "PR_Pos",
}


def test_staging_explanation_has_seven_criterion_lines(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(store, 5, LISTING_PROFILE, label="Dana's tumor")
    InferenceEngine(store, all_rules, ontology).run()
    assigned = stage(store, tumor, "AJCC8", rules_by_name, ontology)
    assert assigned == cst("AJCC8_Stage_IIIA")
    quad = store.find(iri(tumor), iri(cst("hasAJCCStage")), iri(assigned))[0]
    np_id = quad.graph.value.removesuffix("#assertion")
    prov = store.graph_quads(np_id + "#provenance")
    used = [q for q in prov if q.predicate == iri(PROV_USED)]
    assert len(used) == 1
    text = next(q.object.value for q in prov if q.predicate.value.endswith("value"))
    lines = text.splitlines()
    assert lines[0] == "Dana's tumor was found to be AJCC8 Stage IIIA since the following are true:"
    criteria = [l for l in lines if l.startswith("- ")]
    assert len(criteria) == 7
    assert "- Primary Tumor size is T3." in criteria
    assert "- Degree of spread to lymph nodes is N3." in criteria
    assert "- Presence of distant metastasis is M0." in criteria
    assert "- Tumor Grade is Grade1." in criteria
    assert "- Human Epidermal growth factor Receptor 2 (HER2) is Positive." in criteria
    assert "- Estrogen Receptor (ER) is Positive." in criteria
    assert "- Progesterone Receptor (PR) is Positive." in criteria


def test_explanation_line_count_matches_constraint_count(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(store, 6, {"M": "M1"})
    InferenceEngine(store, all_rules, ontology).run()
    for edition in ("AJCC7", "AJCC8"):
        assigned = stage(store, tumor, edition, rules_by_name, ontology)
        assert assigned == cst(f"{edition}_Stage_IV")
        quad = store.find(iri(tumor), iri(cst("hasAJCCStage")), iri(assigned))[0]
        np_id = quad.graph.value.removesuffix("#assertion")
        prov = store.graph_quads(np_id + "#provenance")
        text = next(q.object.value for q in prov if q.predicate.value.endswith("value"))
        assert len([l for l in text.splitlines() if l.startswith("- ")]) == 1


def test_renderer_fallback_synthesizes_line():
    rule = InferenceRule(
        "No Explanation",
        "x",
        (TriplePattern(Variable("x"), TYPE, iri(cst("T1"))),),
        (TriplePattern(Variable("x"), TYPE, iri(cst("TumorFeature"))),),
        None,
    )
    renderer = ExplanationRenderer(None, build_cst())
    record = renderer.render(rule, {"x": iri(CST + "node7")}, "g")
    assert record.text == "- node7 is Primary Tumor size is T1."


def test_renderer_rejects_unbound_placeholder(ontology):
    rule = builtin_rules()[0]
    renderer = ExplanationRenderer(None, ontology)
    with pytest.raises(StagegraphError):
        renderer.render(rule, {"resource": iri(CST + "A")}, "g")


# -- stage() ------------------------------------------------------------------


def test_metastasized_tumor_is_stage_iv_in_both_editions(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(
        store,
        7,
        {"T": "T1", "N": "N0", "M": "M1", "Grade": "Grade2", "HER2": "HER2_Pos", "ER": "ER_Pos", "PR": "PR_Neg"},
    )
    InferenceEngine(store, all_rules, ontology).run()
    assert stage(store, tumor, "AJCC7", rules_by_name, ontology) == cst("AJCC7_Stage_IV")
    assert stage(store, tumor, "AJCC8", rules_by_name, ontology) == cst("AJCC8_Stage_IV")


def test_incomplete_profile_has_no_ajcc8_stage(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(store, 8, {"T": "T1", "N": "N0", "M": "M0"})  # no biomarkers
    InferenceEngine(store, all_rules, ontology).run()
    assert stage(store, tumor, "AJCC8", rules_by_name, ontology) is None
    assert stage(store, tumor, "AJCC7", rules_by_name, ontology) == cst("AJCC7_Stage_IA")


def test_micrometastasis_resolves_to_most_specific_stage(ontology, all_rules, rules_by_name):
    store = fresh_store(ontology)
    tumor = add_tumor(store, 9, {"T": "T1", "N": "N1mi", "M": "M0"})
    InferenceEngine(store, all_rules, ontology).run()
    # closure also types the node N1, firing the broad IIA combination; the
    # N1mi combination is strictly more specific and must win
    assert stage(store, tumor, "AJCC7", rules_by_name, ontology) == cst("AJCC7_Stage_IB")


def test_genuine_conflict_raises_ambiguity(ontology):
    from stagegraph.mapcompiler import StagingRule

    conflicting = [
        StagingRule("X #1", "AJCC7", cst("AJCC7_Stage_IA"), {"M": cst("M0")}, "{{Tumor}} x"),
        StagingRule("Y #1", "AJCC7", cst("AJCC7_Stage_IB"), {"M": cst("M0")}, "{{Tumor}} y"),
    ]
    store = fresh_store(ontology)
    tumor = add_tumor(store, 10, {"M": "M0"})
    rules = [staging_rule_to_inference_rule(r) for r in conflicting]
    InferenceEngine(store, rules, ontology).run()
    with pytest.raises(AmbiguousStageError) as exc:
        stage(store, tumor, "AJCC7", {r.name: r for r in conflicting}, ontology)
    assert len(exc.value.stages) == 2


# -- treatment linking --------------------------------------------------------


def add_evidence(store: QuadStore, n: int, disease_value: str, disease_label: str = "", drug: str = "tamoxifen") -> str:
    np_id = f"https://stagegraph.example/np/test-evidence-{n}"
    ev = iri(f"https://stagegraph.example/data/test/evidence/{n}")
    attr = iri(f"https://stagegraph.example/data/test/evidence/{n}/attr/disease")
    drug_attr = iri(f"https://stagegraph.example/data/test/evidence/{n}/attr/drug")
    triples = [
        (ev, TYPE, iri(cst("Evidence"))),
        (attr, TYPE, iri("http://semanticscience.org/resource/Disease")),
        (attr, iri(SIO_ATTRIBUTE_OF), ev),
        (attr, iri(SIO_HAS_VALUE), literal(disease_label or disease_value)),
        (attr, iri(cst("hasMappedTerm")), iri(disease_value)),
        (drug_attr, TYPE, iri("http://semanticscience.org/resource/Drug")),
        (drug_attr, iri(SIO_ATTRIBUTE_OF), ev),
        (drug_attr, iri(SIO_HAS_VALUE), literal(drug)),
    ]
    store.new_nanopub(triples, np_id=np_id)
    return np_id


def test_stage_links_to_broader_disease_evidence(ontology):
    store = fresh_store(ontology)
    np_id = add_evidence(store, 1, cst("Stage_II"))
    links = link_treatments(store, cst("AJCC8_Stage_IIA"), ontology)
    assert [l.evidence_id for l in links] == [np_id]
    assert "Stage II breast cancer" in links[0].explanation
    assert links[0].attributes["Drug"] == "tamoxifen"


def test_stage_with_no_evidence_links_to_nothing(ontology):
    store = fresh_store(ontology)
    assert link_treatments(store, cst("AJCC7_Stage_IA"), ontology) == []


def test_biomarker_characterized_evidence_matches_feature(ontology):
    store = fresh_store(ontology)
    np_id = add_evidence(store, 2, cst("HER2_Positive_Breast_Cancer"), drug="trastuzumab")
    links = link_treatments(store, cst("HER2_Pos"), ontology)
    assert [l.evidence_id for l in links] == [np_id]
    assert "HER2" in links[0].explanation
