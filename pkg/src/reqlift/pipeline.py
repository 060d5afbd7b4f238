"""End-to-end compilation: corpus text to formulas, symbol table and model."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import Glossary, RequirementDoc, VariablePartition
from .errors import ParseError
from .frontend import parse_with_notes, preprocess
from .infer import SymbolTable, gather_evidence, merge_types
from .ir import apply_type_rules, build_predicate_graph, shall_governed
from .ltl import Formula, to_text
from .model import (Placement, TransitionModel, demote_defined_inputs,
                    detect_nondeterminism, emit_model, place_formula)
from .translate import Lexicon, report_disconnected, translate

TEMPORAL_CUES = ("always", "eventually", "never")


@dataclass
class CompiledFormula:
    doc: RequirementDoc
    formula: Formula
    placement: Placement | None = None

    @property
    def origin(self) -> str:
        return self.doc.source_tag


@dataclass
class CompileResult:
    formulas: list[CompiledFormula]
    symbols: SymbolTable
    model: TransitionModel
    model_text: str
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def formulas_text(self) -> str:
        lines = ["# id | source | formula"]
        for cf in self.formulas:
            lines.append(f"{cf.doc.id} | {cf.doc.source_tag} | {to_text(cf.formula)}")
        return "\n".join(lines) + "\n"


def compile_sentence(doc: RequirementDoc, glossary: Glossary,
                     lexicon: Lexicon) -> tuple[Formula, list[str]]:
    """Run one sentence through preprocess, parse, IR and translation."""
    pre = preprocess(doc.text, glossary)
    deps, notes = parse_with_notes(pre)
    ir = apply_type_rules(deps)
    graph = build_predicate_graph(ir, shall_governed(deps))
    formula, warns = translate(graph, lexicon)
    orphans = report_disconnected(graph)
    warnings = [f"{doc.source_tag}: {n}" for n in notes]
    warnings += [f"{doc.source_tag}: {w}" for w in warns]
    if orphans:
        warnings.append(f"{doc.source_tag}: disconnected mentions "
                        + ", ".join(map(str, orphans)))
    return formula, warnings


def compile_corpus(docs: list[RequirementDoc], glossary: Glossary,
                   partition: VariablePartition,
                   model_name: str = "model_1") -> CompileResult:
    """Compile every sentence, infer types, place formulas and emit the model."""
    lexicon = Lexicon.from_config(glossary, partition)
    compiled: list[CompiledFormula] = []
    warnings: list[str] = []
    errors: list[str] = []
    for doc in docs:
        try:
            formula, warns = compile_sentence(doc, glossary, lexicon)
        except ParseError as exc:
            errors.append(f"{doc.source_tag} (sentence {doc.id}): {exc}")
            continue
        warnings.extend(warns)
        compiled.append(CompiledFormula(doc, formula))

    symbols, type_warnings = merge_types(
        gather_evidence([cf.formula for cf in compiled]), partition)
    warnings.extend(type_warnings)
    warnings.extend(demote_defined_inputs(
        [(cf.formula, cf.doc.source_tag) for cf in compiled], symbols))

    placed = []
    for cf in compiled:
        explicit = _explicitly_temporal(cf.doc.text)
        cf.placement = place_formula(cf.formula, symbols, explicit)
        placed.append((cf.formula, cf.placement, cf.doc.source_tag))
    model, text = emit_model(placed, symbols, name=model_name)

    for overlap in detect_nondeterminism(model):
        pairs = ", ".join(f"{k}={v}" for k, v in sorted(overlap.witness.items()))
        warnings.append(
            f"nondeterministic transitions {overlap.first_origin} vs "
            f"{overlap.second_origin}: both fire when {pairs}")
    return CompileResult(compiled, symbols, model, text, warnings, errors)


def _explicitly_temporal(text: str) -> bool:
    words = {w.lower() for w in re.findall(r"[A-Za-z]+", text)}
    return any(cue in words for cue in TEMPORAL_CUES)
