"""Formula scoring: typed edit distance, subformula matching, automation.

The token-level edit distance runs the usual dynamic program with unit
insert/delete cost and kind-aware substitution: logical symbols cost 1 when
different, string tokens cost their character edit distance normalized by
the longer length, and variable tokens are free to rename.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ReqliftError
from .ltl import (And, Atom, F, Formula, G, Implies, Not, Or, Prop,
                  VarRef, X)


@dataclass(frozen=True)
class FormulaToken:
    kind: str  # LogicalSymbol | StringToken | VariableToken
    text: str


def tokenize(f: Formula) -> list[FormulaToken]:
    """Flatten the AST; operators become logical symbols, enum values and
    record field names become string tokens, identifiers variable tokens."""
    out: list[FormulaToken] = []

    def sym(text):
        out.append(FormulaToken("LogicalSymbol", text))

    def walk(g: Formula):
        if isinstance(g, Prop):
            out.append(FormulaToken("VariableToken", g.name))
        elif isinstance(g, Atom):
            out.append(FormulaToken("VariableToken", g.var.name))
            for field in g.var.path:
                out.append(FormulaToken("StringToken", field))
            sym(g.op)
            rhs = g.rhs
            if isinstance(rhs, VarRef):
                out.append(FormulaToken("VariableToken", rhs.name))
                for field in rhs.path:
                    out.append(FormulaToken("StringToken", field))
            else:
                out.append(FormulaToken("StringToken", rhs.text()))
        elif isinstance(g, Not):
            sym("NOT")
            walk(g.child)
        elif isinstance(g, (And, Or)):
            word = "AND" if isinstance(g, And) else "OR"
            for i, c in enumerate(g.children):
                if i:
                    sym(word)
                walk(c)
        elif isinstance(g, Implies):
            walk(g.lhs)
            sym("=>")
            walk(g.rhs)
        elif isinstance(g, (G, F, X)):
            sym(type(g).__name__)
            walk(g.child)
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f)
    return out


def char_levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def substitution_cost(a: FormulaToken, b: FormulaToken) -> Fraction:
    if a.kind != b.kind:
        return Fraction(1)
    if a.kind == "LogicalSymbol":
        return Fraction(0) if a.text == b.text else Fraction(1)
    if a.kind == "VariableToken":
        return Fraction(0)
    longest = max(len(a.text), len(b.text))
    if longest == 0:
        return Fraction(0)
    return Fraction(char_levenshtein(a.text, b.text), longest)


def typed_levenshtein(a: list[FormulaToken], b: list[FormulaToken],
                      insert_cost: int = 1, delete_cost: int = 1) -> Fraction:
    """Token-level edit distance with kind-aware substitution costs."""
    n, m = len(a), len(b)
    prev = [Fraction(j) * insert_cost for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [Fraction(i) * delete_cost]
        for j in range(1, m + 1):
            if a[i - 1] == b[j - 1]:
                cur.append(prev[j - 1])
                continue
            cur.append(min(prev[j] + delete_cost,
                           cur[j - 1] + insert_cost,
                           prev[j - 1] + substitution_cost(a[i - 1], b[j - 1])))
        prev = cur
    return prev[m]


def subformulas(f: Formula) -> set[Formula]:
    """All AST subtrees, the formula itself and its atoms included."""
    out: set[Formula] = set()

    def walk(g):
        out.add(g)
        if isinstance(g, (Not, G, F, X)):
            walk(g.child)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c)
        elif isinstance(g, Implies):
            walk(g.lhs)
            walk(g.rhs)

    walk(f)
    return out


def similarity(x: Formula, y: Formula) -> Fraction:
    tx, ty = tokenize(x), tokenize(y)
    longest = max(len(tx), len(ty))
    if longest == 0:
        return Fraction(1)
    d = typed_levenshtein(tx, ty)
    return max(Fraction(0), Fraction(1) - d / longest)


@dataclass
class MatchReport:
    pairs: list[tuple[Formula, Formula, float]]
    precision: float
    recall: float
    f_measure: float

    def to_json(self) -> dict:
        from .ltl import to_text
        return {
            "pairs": [{"generated": to_text(g), "ground": to_text(t),
                       "similarity": s} for g, t, s in self.pairs],
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
        }


def fmeasure(ground: Formula, generated: Formula) -> MatchReport:
    """Relaxed max-weight matching between the two subformula sets: each
    side matches its best partner independently (reuse allowed)."""
    gsubs = sorted(subformulas(ground), key=_stable_key)
    asubs = sorted(subformulas(generated), key=_stable_key)
    pairs = []
    best_for_generated = []
    for s in asubs:
        scored = [(similarity(s, t), t) for t in gsubs]
        score, match = max(scored, key=lambda st: st[0])
        pairs.append((s, match, float(score)))
        best_for_generated.append(score)
    best_for_ground = []
    for t in gsubs:
        score = max(similarity(s, t) for s in asubs)
        best_for_ground.append(score)
    precision = float(sum(best_for_generated) / len(best_for_generated))
    recall = float(sum(best_for_ground) / len(best_for_ground))
    f = 0.0
    if precision > 0 and recall > 0:
        f = 2 * precision * recall / (precision + recall)
    return MatchReport(pairs, precision, recall, f)


def _stable_key(f: Formula) -> str:
    from .ltl import to_text
    return to_text(f)


def automation_score(results: list[str]) -> float:
    """Fraction of full credit: correct 1.0, partial 0.5, wrong 0."""
    if not results:
        raise ReqliftError("cannot score an empty result list")
    credit = {"Correct": 1.0, "Partial": 0.5, "Wrong": 0.0}
    try:
        total = sum(credit[r] for r in results)
    except KeyError as exc:
        raise ReqliftError(f"unknown result label {exc.args[0]!r}") from exc
    return total / len(results)


def automation_percent(results: list[str]) -> int:
    return round(automation_score(results) * 100)
