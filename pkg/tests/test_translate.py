from goldens import GOLDEN
from reqlift.corpus import Glossary, GlossaryEntry
from reqlift.frontend import Mention, parse_dependencies, preprocess
from reqlift.ir import (PredicateGraph, apply_type_rules,
                        build_predicate_graph, shall_governed)
from reqlift.ltl import G, X, normalize, parse_formula, to_text
from reqlift.translate import Lexicon, report_disconnected, translate


def _translate(text, glossary, lexicon=None):
    pre = preprocess(text, glossary)
    deps = parse_dependencies(pre)
    graph = build_predicate_graph(apply_type_rules(deps), shall_governed(deps))
    return translate(graph, lexicon)


def test_req1_record_access_formula():
    # without flattening entries the of-chain becomes record access
    glossary = Glossary([
        GlossaryEntry(("Status", "attribute"), "Status_attribute"),
        GlossaryEntry(("Lower", "Desired", "Temperature"),
                      "Lower_Desired_Temperature"),
        GlossaryEntry(("Regulator", "Interface", "Failure"),
                      "Regulator_Interface_Failure"),
    ])
    f, warns = _translate("If the Status attribute of the Lower Desired "
                          "Temperature is Invalid, the Regulator Interface "
                          "Failure shall be set to True.", glossary)
    assert warns == []
    assert to_text(f) == ("G((Lower_Desired_Temperature.Status_attribute = "
                          "Invalid) => (Regulator_Interface_Failure = true))")


def test_initialize_formula_not_global(corpus, glossary, partition):
    lex = Lexicon.from_config(glossary, partition)
    f, _ = _translate(corpus[11].text, glossary, lex)
    assert to_text(f) == "Regulator_Mode = INIT"
    assert not isinstance(f, G)


def test_next_state_inserted_for_self_update(corpus, glossary, partition):
    lex = Lexicon.from_config(glossary, partition)
    f, _ = _translate(corpus[12].text, glossary, lex)
    assert normalize(f) == normalize(parse_formula(GOLDEN[13]))
    assert isinstance(f.child.rhs, X)


def test_no_next_state_for_other_variable(corpus, glossary, partition):
    lex = Lexicon.from_config(glossary, partition)
    f, _ = _translate(corpus[0].text, glossary, lex)
    assert not isinstance(f.child.rhs, X)


def test_flatten_distributes_over_disjunction(corpus, glossary, partition):
    lex = Lexicon.from_config(glossary, partition)
    f, _ = _translate(corpus[3].text, glossary, lex)
    assert normalize(f) == normalize(parse_formula(GOLDEN[4]))


def test_all_fifteen_translate_to_goldens(compiled):
    for cf in compiled.formulas:
        assert normalize(cf.formula) == \
            normalize(parse_formula(GOLDEN[cf.doc.id])), cf.doc.id


def test_translation_deterministic(corpus, glossary, partition):
    lex = Lexicon.from_config(glossary, partition)
    a, _ = _translate(corpus[9].text, glossary, lex)
    b, _ = _translate(corpus[9].text, glossary, lex)
    assert a == b


def test_report_disconnected_connected_graph(corpus, glossary):
    pre = preprocess(corpus[0].text, glossary)
    deps = parse_dependencies(pre)
    graph = build_predicate_graph(apply_type_rules(deps), shall_governed(deps))
    assert report_disconnected(graph) == []


def test_every_corpus_sentence_yields_a_connected_graph(corpus, glossary):
    for doc in corpus:
        pre = preprocess(doc.text, glossary)
        deps = parse_dependencies(pre)
        graph = build_predicate_graph(apply_type_rules(deps),
                                      shall_governed(deps))
        assert report_disconnected(graph) == [], doc.id


def test_report_disconnected_orphan(corpus, glossary):
    pre = preprocess(corpus[0].text, glossary)
    deps = parse_dependencies(pre)
    table = apply_type_rules(deps)
    table.entry(Mention("write", 5))  # never linked to anything
    graph = build_predicate_graph(table, shall_governed(deps))
    assert report_disconnected(graph) == [Mention("write", 5)]


def test_report_disconnected_empty_graph():
    assert report_disconnected(PredicateGraph({}, None)) == []
