"""Recursive expression translation from predicate graphs to LTL formulas.

Emission follows a depth-first traversal from the graph root. Per node the
rewrite cascade is: logical level (impliedBy, conjunction folding, negation),
then arithmetic/assignment level (set/equal/initialize/comparison emit
`arg1 op arg2`), then unique-term level (a mention emits its own word).
`of` edges emit record access `base.field` unless the glossary flattens the
pair to a single name. Conjunction lists distribute over shared predicates
and respect and-over-or precedence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import StructureError
from .ir import GraphNode, PredicateGraph
from .ltl import (Atom, BoolVal, EnumVal, ExprVal, Formula, G, Implies,
                  IntVal, Not, VarRef, X, atoms_of, conj, disj)


@dataclass
class Lexicon:
    """Name resolution context carried from config into emission."""

    variables: set[str] = field(default_factory=set)
    flatten: dict[tuple[str, str], str] = field(default_factory=dict)
    decode: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_config(cls, glossary, partition) -> "Lexicon":
        return cls(variables=set(partition.all_declared()) | set(glossary.flatten.values()),
                   flatten=dict(glossary.flatten))


def translate(graph: PredicateGraph, lexicon: Lexicon | None = None
              ) -> tuple[Formula, list[str]]:
    """Emit the formula for one sentence; untranslatable nodes are skipped
    with a warning. The result is wrapped in G unless the root predicate is
    `initialize`; a conditional `set` of a variable that also occurs in its
    own condition gets X on the consequent (a next-state update)."""
    lex = lexicon or Lexicon()
    warnings: list[str] = []
    root = graph.node(graph.root)

    consequent = _clause(graph, root, lex, warnings)
    if consequent is None:
        raise StructureError(f"root {root.mention} is not translatable")
    if root.implied_by is None:
        body = consequent
    else:
        antecedent = _clause_group(graph, graph.node(root.implied_by), lex, warnings)
        if antecedent is None:
            body = consequent
        else:
            if root.predicate == "set" and _updates_condition_variable(consequent, antecedent):
                consequent = X(consequent)
            body = Implies(antecedent, consequent)
    if root.predicate == "initialize":
        return body, warnings
    return G(body), warnings


def report_disconnected(graph: PredicateGraph) -> list:
    """Mentions unreachable from the root, in sentence position order."""
    seen = set()
    stack = [graph.root]
    while stack:
        m = stack.pop()
        if m in seen or m not in graph.nodes:
            continue
        seen.add(m)
        n = graph.node(m)
        for nxt in ([n.implied_by, n.arg1, n.arg2] + n.of + n.and_group + n.or_group):
            if nxt is not None:
                stack.append(nxt)
    return sorted((m for m in graph.nodes if m not in seen),
                  key=lambda m: m.position)


def _updates_condition_variable(consequent: Formula, antecedent: Formula) -> bool:
    cond_vars = {a.var.text() for a in atoms_of(antecedent) if isinstance(a, Atom)}
    return any(a.var.text() in cond_vars for a in atoms_of(consequent)
               if isinstance(a, Atom))


def _clause_group(graph: PredicateGraph, node: GraphNode, lex: Lexicon,
                  warnings: list[str]) -> Formula | None:
    """Fold a clause and its conjunction list; `and` binds tighter than `or`."""
    items: list[tuple[GraphNode, str | None]] = [(node, None)]
    for m in node.and_group:
        items.append((graph.node(m), "and"))
    for m in node.or_group:
        items.append((graph.node(m), "or"))
    items.sort(key=lambda t: t[0].mention.position)
    groups: list[list[Formula]] = [[]]
    for n, connector in items:
        f = _clause(graph, n, lex, warnings)
        if f is None:
            continue
        if connector == "or" and groups[-1]:
            groups.append([f])
        else:
            groups[-1].append(f)
    groups = [g for g in groups if g]
    if not groups:
        return None
    return disj(conj(g) for g in groups)


def _clause(graph: PredicateGraph, node: GraphNode, lex: Lexicon,
            warnings: list[str]) -> Formula | None:
    if node.predicate in ("set", "equal", "initialize"):
        f = _distribute(graph, node, "=", lex, warnings)
    elif node.predicate == "cmp":
        f = _distribute(graph, node, node.cmp_op, lex, warnings)
    else:
        warnings.append(f"untranslatable node {node.mention} skipped")
        return None
    if f is None:
        return None
    return Not(f) if node.negated else f


def _distribute(graph: PredicateGraph, node: GraphNode, op: str, lex: Lexicon,
                warnings: list[str]) -> Formula | None:
    if node.arg1 is None or node.arg2 is None:
        warnings.append(f"predicate {node.mention} is missing an argument; skipped")
        return None
    lhs_terms = _term_group(graph, node.arg1, lex, as_variable=True)
    rhs_terms = _term_group(graph, node.arg2, lex,
                            as_variable=(op in ("<", ">", "<=", ">=")))

    def atoms_for(lhs):
        made = [(Atom(lhs, op, rhs), c) for rhs, c in rhs_terms]
        return _fold_terms(made)

    return _fold_terms([(atoms_for(lhs), c) for lhs, c in lhs_terms])


def _fold_terms(items: list[tuple[Formula, str | None]]) -> Formula:
    groups: list[list[Formula]] = [[]]
    for f, connector in items:
        if connector == "or":
            groups.append([f])
        else:
            groups[-1].append(f)
    return disj(conj(g) for g in groups if g)


def _term_group(graph: PredicateGraph, mention, lex: Lexicon,
                as_variable: bool) -> list[tuple[VarRef | object, str | None]]:
    """Resolve a mention to its term variants: the of-chain yields a record
    reference (or its flattened name), and coordination yields one variant
    per conjunct, tagged with its connector."""
    out: list[tuple[VarRef | object, str | None]] = []

    def emit(m, connector):
        node = graph.node(m)
        if node.of:
            for base, base_conn in _term_group(graph, node.of[0], lex, True):
                ref = _extend(base, m.lemma, lex)
                out.append((ref, base_conn if base_conn is not None else connector))
        else:
            out.append((_leaf(m, lex, as_variable), connector))
            for sib in sorted(node.and_group, key=lambda s: s.position):
                emit(sib, "and")
            for sib in sorted(node.or_group, key=lambda s: s.position):
                emit(sib, "or")

    emit(mention, None)
    return out


def _extend(base: VarRef, field_name: str, lex: Lexicon) -> VarRef:
    if isinstance(base, VarRef) and not base.path:
        flat = lex.flatten.get((base.name, field_name))
        if flat is not None:
            return VarRef(flat)
    if isinstance(base, VarRef):
        return VarRef(base.name, base.path + (field_name,))
    return VarRef(str(base), (field_name,))


def _leaf(m, lex: Lexicon, as_variable: bool):
    lemma = m.lemma
    if as_variable or lemma in lex.variables:
        return VarRef(lemma)
    if lemma in ("True", "true", "TRUE"):
        return BoolVal(True)
    if lemma in ("False", "false", "FALSE"):
        return BoolVal(False)
    if lemma.lstrip("-").isdigit():
        return IntVal(int(lemma))
    if lemma.startswith("ARITH_"):
        return ExprVal(lex.decode.get(lemma, lemma))
    return EnumVal(lemma)
