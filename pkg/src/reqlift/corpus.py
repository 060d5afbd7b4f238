"""Corpus, glossary and variable-partition ingestion plus perturbation rewrites."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum

from .errors import CorpusError

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class RequirementDoc:
    id: int
    source_tag: str
    text: str
    unaffected: bool = False  # set by perturb() when the rule did not apply


@dataclass(frozen=True)
class GlossaryEntry:
    phrase: tuple[str, ...]
    term: str


class Glossary:
    """Ordered phrase -> canonical-term table, longest phrase first.

    Entries whose phrase reduces to `FIELD of [the] BASE` after folding the
    plain entries do not rewrite text; they become flattening rules that
    rename a record access `BASE.FIELD` to the entry's term during formula
    emission.
    """

    def __init__(self, entries: list[GlossaryEntry]):
        self.entries = sorted(entries, key=lambda e: -len(e.phrase))
        self.fold_entries: list[GlossaryEntry] = []
        self.flatten: dict[tuple[str, str], str] = {}
        plain = [e for e in self.entries if "of" not in e.phrase]
        for entry in self.entries:
            reduced = _fold_tokens(list(entry.phrase), plain)
            if len(reduced) >= 3 and reduced[1] == "of":
                base = reduced[2] if reduced[2] != "the" else (
                    reduced[3] if len(reduced) > 3 else None)
                if base is not None and len(reduced) <= 4:
                    self.flatten[(base, reduced[0])] = entry.term
                    continue
            self.fold_entries.append(entry)
        self.terms = {e.term for e in self.entries}

    def fold(self, tokens: list[str]) -> list[str]:
        return _fold_tokens(tokens, self.fold_entries)

    def phrase_spans(self, tokens: list[str]) -> list[tuple[int, int]]:
        """Spans of tokens covered by any glossary phrase (for perturb protection)."""
        spans = []
        i = 0
        while i < len(tokens):
            for entry in self.entries:
                n = len(entry.phrase)
                if tuple(tokens[i:i + n]) == entry.phrase:
                    spans.append((i, i + n))
                    i += n - 1
                    break
            i += 1
        return spans


def _fold_tokens(tokens: list[str], entries: list[GlossaryEntry]) -> list[str]:
    out = []
    i = 0
    while i < len(tokens):
        for entry in entries:
            n = len(entry.phrase)
            if tuple(tokens[i:i + n]) == entry.phrase:
                out.append(entry.term)
                i += n
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


@dataclass(frozen=True)
class VariablePartition:
    inputs: frozenset[str]
    state_and_output: frozenset[str]
    pure_output: frozenset[str]

    def __post_init__(self):
        overlap = (self.inputs & self.state_and_output) | \
                  (self.inputs & self.pure_output) | \
                  (self.state_and_output & self.pure_output)
        if overlap:
            raise CorpusError(f"partition sets overlap on {sorted(overlap)}")

    def all_declared(self) -> frozenset[str]:
        return self.inputs | self.state_and_output | self.pure_output


class PerturbationRule(Enum):
    AndToOr_first = "AndToOr_first"
    AndToOr_all = "AndToOr_all"
    IsToIsNot_all = "IsToIsNot_all"
    IfThenSwap = "IfThenSwap"


def load_corpus(path) -> list[RequirementDoc]:
    """One requirement per line, `source_tag | sentence`; `#` starts a comment."""
    docs = []
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            doc_id = len(docs) + 1
            parts = [p.strip() for p in line.split("|")]
            if len(parts) >= 3 and parts[0].isdigit():
                # explicit numeric id prefix: `id | source | text`
                doc_id, tag = int(parts[0]), parts[1]
                text = "|".join(parts[2:]).strip()
            elif len(parts) >= 2:
                tag = parts[0]
                text = "|".join(parts[1:]).strip()
            else:
                tag, text = "", line
            if doc_id in seen_ids:
                raise CorpusError(f"duplicate requirement id {doc_id}")
            if not text:
                raise CorpusError(f"empty sentence for {tag or doc_id}")
            if not text.endswith("."):
                raise CorpusError(f"sentence must end with '.': {text!r}")
            seen_ids.add(doc_id)
            docs.append(RequirementDoc(doc_id, tag or f"REQ-{doc_id}", text))
    return docs


def save_corpus(docs: list[RequirementDoc], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(f"{doc.source_tag} | {doc.text}\n")


def load_config(path) -> tuple[Glossary, VariablePartition]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    entries = []
    for phrase, term in data.get("glossary", []):
        if not _IDENT.match(term):
            raise CorpusError(f"glossary term is not an identifier: {term!r}")
        entries.append(GlossaryEntry(tuple(phrase.split()), term))
    names = {}
    for key in ("inputs", "state_and_output", "pure_output"):
        vals = data.get(key, [])
        for v in vals:
            if not _IDENT.match(v):
                raise CorpusError(f"variable is not an identifier: {v!r}")
        names[key] = frozenset(vals)
    partition = VariablePartition(names["inputs"], names["state_and_output"],
                                  names["pure_output"])
    return Glossary(entries), partition


# ---------------------------------------------------------------------------
# perturbation

_WORD_RE = re.compile(r"[A-Za-z0-9_+\[\]]+|[.,]")


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text)


def _join(tokens: list[str]) -> str:
    out = ""
    for tok in tokens:
        if tok in ".,":
            out += tok
        else:
            out += (" " if out else "") + tok
    return out


def perturb(doc: RequirementDoc, rule: PerturbationRule,
            glossary: Glossary | None = None) -> RequirementDoc:
    """Rewrite the raw sentence text; glossary phrases are never touched."""
    tokens = _words(doc.text)
    protected = set()
    if glossary is not None:
        for lo, hi in glossary.phrase_spans(tokens):
            protected.update(range(lo, hi))

    changed = False
    if rule in (PerturbationRule.AndToOr_first, PerturbationRule.AndToOr_all):
        for i, tok in enumerate(tokens):
            if tok == "and" and i not in protected:
                tokens[i] = "or"
                changed = True
                if rule is PerturbationRule.AndToOr_first:
                    break
    elif rule is PerturbationRule.IsToIsNot_all:
        out = []
        i = 0
        while i < len(tokens):
            if tokens[i] == "is" and i not in protected:
                if i + 1 < len(tokens) and tokens[i + 1] == "not":
                    out.append("is")
                    i += 2
                else:
                    out.extend(["is", "not"])
                    i += 1
                changed = True
            else:
                out.append(tokens[i])
                i += 1
        tokens = out
    elif rule is PerturbationRule.IfThenSwap:
        if tokens and tokens[0].lower() == "if" and "," in tokens:
            last_comma = len(tokens) - 1 - tokens[::-1].index(",")
            cond = tokens[1:last_comma]
            main = tokens[last_comma + 1:]
            if main and main[-1] == ".":
                main = main[:-1]
            if cond and main:
                main = [main[0][0].upper() + main[0][1:]] + main[1:]
                cond = [cond[0][0].lower() + cond[0][1:]] + cond[1:]
                tokens = main + [",", "if"] + cond + ["."]
                changed = True

    if not changed:
        return RequirementDoc(doc.id, doc.source_tag, doc.text, unaffected=True)
    return RequirementDoc(doc.id, doc.source_tag, _join(tokens))
