"""Sentence preprocessing and the controlled-grammar dependency parser.

The preprocessor folds glossary phrases, arithmetic brackets and comparator
phrases into single tokens and repairs missing punctuation. The parser
covers the stylized requirement shapes

    sentence ::= [Cond ","] Main "." | Main ["," "if" Cond] "."
    Cond     ::= "if" Clause ([","] ("and"|"or") Clause)*
    Clause   ::= NP ("equals" Rhs | "is" ["not"] ["set to"] Rhs | ["not"] Cmp Rhs)
    Main     ::= NP "shall be" ("set to" | "initialized to") Rhs
    NP       ::= ["the"] Entity ("of" ["the"] Entity)* [("and"|"or") NP]

and emits Stanford-style typed-dependency triples `relation(governor-i,
dependent-j)` with 1-based word positions. Sentences outside the grammar
raise ParseError carrying the offending token span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Glossary
from .errors import ParseError

ARITH_OPS = {"+": "PLUS", "-": "MINUS", "*": "TIMES", "/": "DIV"}

# positive comparator phrases fold to a single token; the negated forms keep
# an explicit "not" token so the parser can emit a `neg` dependency
COMPARATOR_PHRASES = [
    (("is", "greater", "than", "or", "equal", "to"), "dominates"),
    (("is", "less", "than", "or", "equal", "to"), "CMP_LE"),
    (("is", "greater", "than"), "CMP_GT"),
    (("is", "less", "than"), "CMP_LT"),
]
COMPARATOR_OPS = {"dominates": ">=", "CMP_LE": "<=", "CMP_GT": ">", "CMP_LT": "<"}

KEYWORDS = {"if", "the", "shall", "be", "set", "initialized", "to", "is",
            "not", "and", "or", "equals"}

EVENT_LEMMAS = {"equals", "is", "set", "initialize"} | set(COMPARATOR_OPS)


@dataclass(frozen=True)
class Mention:
    lemma: str
    position: int  # 1-based word index in the preprocessed sentence

    def __str__(self):
        return f"{self.lemma}-{self.position}"


@dataclass(frozen=True)
class TypedDependency:
    relation: str
    governor: Mention
    dependent: Mention

    def __post_init__(self):
        assert self.governor != self.dependent

    def __str__(self):
        return f"{self.relation}({self.governor}, {self.dependent})"


@dataclass(frozen=True)
class PreprocessedSentence:
    tokens: tuple[str, ...]
    arith_decode: dict[str, str]

    def mention(self, index0: int) -> Mention:
        tok = self.tokens[index0]
        lemma = "initialize" if tok == "initialized" else tok
        return Mention(lemma, index0 + 1)


def _raw_tokens(text: str) -> list[str]:
    text = re.sub(r"\[([^\]]+)\]", lambda m: "\x00" + m.group(1).strip() + "\x00", text)
    out = []
    for piece in text.split():
        while piece and piece[0] in ".,":
            out.append(piece[0])
            piece = piece[1:]
        trail = ""
        while piece and piece[-1] in ".,":
            trail = piece[-1] + trail
            piece = piece[:-1]
        if piece:
            out.append(piece)
        out.extend(trail)
    # re-join bracketed arithmetic split across whitespace
    merged, inside, buf = [], False, []
    for tok in out:
        starts = tok.startswith("\x00")
        ends = tok.endswith("\x00")
        if starts and ends:
            merged.append("\x00" + tok.strip("\x00") + "\x00")
        elif starts:
            inside, buf = True, [tok.lstrip("\x00")]
        elif ends:
            buf.append(tok.rstrip("\x00"))
            merged.append("\x00" + " ".join(buf) + "\x00")
            inside, buf = False, []
        elif inside:
            buf.append(tok)
        else:
            merged.append(tok)
    return merged


def _encode_arith(tokens: list[str], decode: dict[str, str]) -> list[str]:
    out = []
    for tok in tokens:
        if tok.startswith("\x00"):
            expr = tok.strip("\x00")
            mangled = expr
            for op, name in ARITH_OPS.items():
                mangled = mangled.replace(op, f" {name} ")
            encoded = "ARITH_" + "_".join(mangled.split())
            decode[encoded] = expr
            out.append(encoded)
        else:
            out.append(tok)
    return out


def _fold_comparators(tokens: list[str], decode: dict[str, str]) -> list[str]:
    out = []
    i = 0
    while i < len(tokens):
        matched = False
        for phrase, encoded in COMPARATOR_PHRASES:
            n = len(phrase)
            if tuple(tokens[i:i + n]) == phrase:
                decode[encoded] = " ".join(phrase)
                out.append(encoded)
                i += n
                matched = True
                break
            # negated form: "is not <rest of phrase>"
            if tokens[i] == "is" and tuple(tokens[i + 1:i + 1 + n]) == ("not",) + phrase[1:]:
                decode[encoded] = " ".join(phrase)
                out.extend(["not", encoded])
                i += n + 1
                matched = True
                break
        if not matched:
            out.append(tokens[i])
            i += 1
    return out


def _entityish(tok: str) -> bool:
    return bool(tok) and tok not in KEYWORDS and tok not in ".," and \
        (tok[0].isalpha() or tok[0] == "_") and tok not in COMPARATOR_OPS


def _insert_missing_comma(tokens: list[str]) -> list[str]:
    if "shall" not in tokens:
        return tokens
    shall = tokens.index("shall")
    if tokens and tokens[0].lower() == "if" and "," not in tokens[:shall]:
        k = shall - 1
        if k >= 0 and _entityish(tokens[k]):
            while True:
                if k - 1 >= 0 and tokens[k - 1] == "the":
                    k -= 1
                if k - 2 >= 0 and tokens[k - 1] == "of" and _entityish(tokens[k - 2]):
                    k -= 2
                    continue
                break
            return tokens[:k] + [","] + tokens[k:]
    if "if" in tokens[1:]:
        j = tokens.index("if", 1)
        if j > 0 and tokens[j - 1] != ",":
            return tokens[:j] + [","] + tokens[j:]
    return tokens


def preprocess(text: str, glossary: Glossary | None = None) -> PreprocessedSentence:
    """Collapse phrases to canonical tokens and repair clause punctuation."""
    if not text.strip():
        raise ParseError("empty sentence")
    decode: dict[str, str] = {}
    tokens = _raw_tokens(text)
    tokens = _encode_arith(tokens, decode)
    if glossary is not None:
        tokens = glossary.fold(tokens)
    tokens = _fold_comparators(tokens, decode)
    tokens = _insert_missing_comma(tokens)
    return PreprocessedSentence(tuple(tokens), decode)


# ---------------------------------------------------------------------------
# parsing


@dataclass
class _NP:
    head: Mention  # first entity of the of-chain
    tail: Mention  # last entity (coordination attaches here)


class _SentenceParser:
    def __init__(self, pre: PreprocessedSentence):
        self.pre = pre
        self.tokens = pre.tokens
        self.i = 0
        self.deps: list[TypedDependency] = []
        self.notes: list[str] = []

    # -- token utilities

    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def at_keyword(self, word: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok is not None and tok.lower() == word

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of sentence")
        self.i += 1
        return tok

    def expect(self, word: str) -> Mention:
        if not self.at_keyword(word):
            self.fail(f"expected {word!r}")
        m = self.pre.mention(self.i)
        self.i += 1
        return m

    def fail(self, why: str):
        span = list(self.tokens[self.i:self.i + 3])
        raise ParseError(f"{why} at token {self.i + 1}: {' '.join(span) or '<end>'}",
                         tokens=span, position=self.i + 1)

    def dep(self, rel: str, gov: Mention, d: Mention):
        self.deps.append(TypedDependency(rel, gov, d))

    # -- grammar

    def parse(self) -> tuple[list[TypedDependency], list[str]]:
        if self.at_keyword("if"):
            if_m = self.pre.mention(self.i)
            self.i += 1
            cond_head = self.clause_list()
            self.dep("mark_if", cond_head, if_m)
            self.expect(",")
            main = self.main_clause()
            self.dep("advcl", main, cond_head)
        else:
            start = self.i
            if self._looks_like_main():
                main = self.main_clause()
                if self.at_keyword(","):
                    self.i += 1
                    if_m = self.expect("if")
                    cond_head = self.clause_list()
                    self.dep("mark_if", cond_head, if_m)
                    self.dep("advcl", main, cond_head)
            else:
                # bare clause group: useful for fragment-level debugging
                self.i = start
                self.clause_list()
        if self.at_keyword("."):
            self.i += 1
        if self.i != len(self.tokens):
            self.fail("trailing tokens after sentence")
        return self.deps, self.notes

    def _looks_like_main(self) -> bool:
        return "shall" in (t.lower() for t in self.tokens[self.i:])

    def clause_list(self) -> Mention:
        first = self.clause()
        while True:
            save = self.i
            if self.at_keyword(",") and (self.at_keyword("and", 1) or self.at_keyword("or", 1)):
                self.i += 1
            if self.at_keyword("and") or self.at_keyword("or"):
                rel = "conj_and" if self.at_keyword("and") else "conj_or"
                self.i += 1
                nxt = self.clause()
                self.dep(rel, first, nxt)
            else:
                self.i = save
                break
        return first

    def clause(self) -> Mention:
        """One condition clause; returns its predicate mention."""
        subj = self.np()
        negated_by: Mention | None = None
        if self.at_keyword("not") and self.peek(1) in COMPARATOR_OPS:
            negated_by = self.pre.mention(self.i)
            self.i += 1
        tok = self.peek()
        if tok in COMPARATOR_OPS:
            pred = self.pre.mention(self.i)
            self.i += 1
            self.dep("nsubj", pred, subj.head)
            operand = self.operand()
            self.dep("dobj", pred, operand)
            if negated_by is not None:
                self.dep("neg", pred, negated_by)
            return pred
        if self.at_keyword("equals"):
            pred = self.pre.mention(self.i)
            self.i += 1
            self.dep("nsubj", pred, subj.head)
            self.dep("dobj", pred, self.operand())
            return pred
        if self.at_keyword("is"):
            is_m = self.pre.mention(self.i)
            self.i += 1
            neg_m = None
            if self.at_keyword("not"):
                neg_m = self.pre.mention(self.i)
                self.i += 1
            if self.at_keyword("set"):
                pred = self.pre.mention(self.i)
                self.i += 1
                self.expect("to")
                if self.at_keyword("anything") and self.at_keyword("but", 1):
                    # "set to anything but V" negates the equation
                    neg_m = self.pre.mention(self.i)
                    self.i += 2
                self.dep("nsubjpass", pred, subj.head)
                self.dep("prep_to", pred, self.operand())
                if neg_m is not None:
                    self.dep("neg", pred, neg_m)
                self.notes.append(
                    f"passive condition clause at token {pred.position}; "
                    "prefer active voice ('equals')")
                return pred
            self.dep("nsubj", is_m, subj.head)
            self.dep("dobj", is_m, self.operand())
            if neg_m is not None:
                self.dep("neg", is_m, neg_m)
            return is_m
        self.fail("expected a predicate (equals / is / comparator)")

    def main_clause(self) -> Mention:
        subj = self.np()
        shall = self.expect("shall")
        self.expect("be")
        if self.at_keyword("set"):
            pred = self.pre.mention(self.i)
            self.i += 1
        elif self.at_keyword("initialized"):
            pred = self.pre.mention(self.i)
            self.i += 1
        else:
            self.fail("expected 'set to' or 'initialized to'")
        self.expect("to")
        self.dep("nsubjpass", pred, subj.head)
        self.dep("prep_to", pred, self.operand())
        self.dep("aux", pred, shall)
        return pred

    def np(self) -> _NP:
        if self.at_keyword("the"):
            self.i += 1
        tok = self.peek()
        if tok is None or not _entityish(tok):
            self.fail("expected an entity")
        head = self.pre.mention(self.i)
        self.i += 1
        tail = head
        while self.at_keyword("of"):
            holder = tail
            self.i += 1
            if self.at_keyword("the"):
                self.i += 1
            tok = self.peek()
            if tok is None or not _entityish(tok):
                self.fail("expected an entity after 'of'")
            tail = self.pre.mention(self.i)
            self.i += 1
            self.dep("prep_of", holder, tail)
        # entity-level coordination: only when no predicate follows the
        # conjunct, the shared predicate comes after the whole group
        if (self.at_keyword("and") or self.at_keyword("or")) and self._conj_is_entity_level():
            rel = "conj_and" if self.at_keyword("and") else "conj_or"
            self.i += 1
            rest = self.np()
            self.dep(rel, tail, rest.head)
        return _NP(head, tail)

    def _conj_is_entity_level(self) -> bool:
        # lookahead: "and|or [the] Entity (of ...)* <predicate>" means the
        # conjunct shares this clause's predicate; "... equals" right after a
        # complete clause means a clause-level conjunction instead
        j = self.i + 1
        if j < len(self.tokens) and self.tokens[j].lower() == "the":
            j += 1
        if j >= len(self.tokens) or not _entityish(self.tokens[j]):
            return False
        j += 1
        while j + 1 < len(self.tokens) and self.tokens[j].lower() == "of":
            j += 1
            if self.tokens[j].lower() == "the":
                j += 1
            if j >= len(self.tokens) or not _entityish(self.tokens[j]):
                return False
            j += 1
        if j >= len(self.tokens):
            return True
        nxt = self.tokens[j].lower()
        # a following predicate keyword closes the coordinated subject
        return nxt in ("equals", "is") or self.tokens[j] in COMPARATOR_OPS or \
            (nxt == "not" and j + 1 < len(self.tokens) and self.tokens[j + 1] in COMPARATOR_OPS)

    def operand(self) -> Mention:
        """Right-hand side of a predicate: a value token or a noun phrase."""
        if self.at_keyword("the"):
            return self.np().head
        tok = self.peek()
        if tok is None or tok in ".," or tok.lower() in KEYWORDS:
            self.fail("expected a value")
        m = self.pre.mention(self.i)
        self.i += 1
        holder = m
        while self.at_keyword("of"):
            self.i += 1
            if self.at_keyword("the"):
                self.i += 1
            tok = self.peek()
            if tok is None or not _entityish(tok):
                self.fail("expected an entity after 'of'")
            target = self.pre.mention(self.i)
            self.i += 1
            self.dep("prep_of", holder, target)
            holder = target
        return m


def parse_dependencies(pre: PreprocessedSentence) -> list[TypedDependency]:
    deps, _ = parse_with_notes(pre)
    return deps


def parse_with_notes(pre: PreprocessedSentence) -> tuple[list[TypedDependency], list[str]]:
    return _SentenceParser(pre).parse()


def format_dependencies(deps: list[TypedDependency]) -> str:
    return "\n".join(str(d) for d in deps)
