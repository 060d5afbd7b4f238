"""reqlift: stylized requirements to LTL, transition models and GR(1) analysis."""

from .corpus import (Glossary, PerturbationRule, RequirementDoc,
                     VariablePartition, load_config, load_corpus, perturb)
from .frontend import (Mention, PreprocessedSentence, TypedDependency,
                       parse_dependencies, preprocess)
from .ir import IRTable, TypeRule, apply_type_rules, build_predicate_graph
from .ltl import Formula, normalize, parse_formula, to_text
from .translate import Lexicon, report_disconnected, translate

__all__ = [
    "Glossary", "PerturbationRule", "RequirementDoc", "VariablePartition",
    "load_config", "load_corpus", "perturb",
    "Mention", "PreprocessedSentence", "TypedDependency",
    "parse_dependencies", "preprocess",
    "IRTable", "TypeRule", "apply_type_rules", "build_predicate_graph",
    "Formula", "normalize", "parse_formula", "to_text",
    "Lexicon", "report_disconnected", "translate",
]
