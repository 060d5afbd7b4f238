"""Intermediate representation: metadata tagging, type rules, predicate graph.

Type rules use the surface syntax

    pattern [& pattern]* : action [, action]*

where a pattern is a dependency template like `nsubj(?g,?d)` or a guard like
`event(?g)`, and an action is one of `implies(?x,?y)`, `rel(name,?x,?y)` or
`tag(?x,meta)`. `implies(?x,?y)` adds `impliedBy: ?x` to the entry for `?y`.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import ConflictError, StructureError
from .frontend import COMPARATOR_OPS, EVENT_LEMMAS, Mention, TypedDependency

logger = logging.getLogger(__name__)

# relations that hold a single target; writing two different targets is a
# rule conflict rather than a list extension
SINGLE_SLOT = {"agent", "object", "to", "impliedBy"}
LIST_SLOT = {"of", "and", "or"}


@dataclass
class IREntry:
    mention: Mention
    term_type: str = "entity"     # entity | event | numeric | predicate
    negated: bool = False
    quantifier: str = "none"      # unique | all | exists | none
    relations: dict[str, list[Mention]] = field(default_factory=dict)
    temporal: str | None = None
    written_by: dict[str, str] = field(default_factory=dict)

    def add_relation(self, name: str, target: Mention, rule=None):
        targets = self.relations.setdefault(name, [])
        if name in SINGLE_SLOT and targets and targets != [target]:
            prev = self.written_by.get(name)
            raise ConflictError(
                f"conflicting {name} for {self.mention}: {targets[0]} vs {target}"
                + (f" (rules {prev} and {rule})" if prev or rule else ""),
                first_rule=prev, second_rule=rule)
        if target not in targets:
            targets.append(target)
        if rule is not None:
            self.written_by[name] = rule

    def describe(self) -> str:
        rels = "; ".join(
            f"{k}: [{', '.join(map(str, v))}]" for k, v in sorted(self.relations.items()))
        flags = self.quantifier if self.quantifier != "none" else self.term_type
        return f"{self.mention}: {self.mention.lemma} | {flags} | {rels}"


class IRTable:
    """Per-sentence map from mentions to their metadata and relations."""

    def __init__(self):
        self.entries: dict[Mention, IREntry] = {}
        self.unmatched: list[TypedDependency] = []

    def entry(self, m: Mention) -> IREntry:
        if m not in self.entries:
            self.entries[m] = IREntry(m)
        return self.entries[m]

    def __iter__(self):
        return iter(self.entries.values())

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class RulePattern:
    kind: str           # "dep" or "guard"
    name: str           # relation name or guard predicate
    args: tuple[str, ...]


@dataclass(frozen=True)
class RuleAction:
    name: str           # implies | rel | tag
    args: tuple[str, ...]


@dataclass(frozen=True)
class TypeRule:
    text: str
    patterns: tuple[RulePattern, ...]
    actions: tuple[RuleAction, ...]

    def __str__(self):
        return self.text


_CALL = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\(([^)]*)\)")


def parse_rule(line: str) -> TypeRule:
    lhs, rhs = line.split(":", 1)
    patterns = []
    for part in lhs.split("&"):
        m = _CALL.match(part.strip())
        if not m:
            raise ValueError(f"bad rule pattern: {part.strip()!r}")
        name = m.group(1)
        args = tuple(a.strip() for a in m.group(2).split(","))
        kind = "guard" if len(args) == 1 else "dep"
        patterns.append(RulePattern(kind, name, args))
    actions = []
    for m in _CALL.finditer(rhs):
        actions.append(RuleAction(m.group(1), tuple(a.strip() for a in m.group(2).split(","))))
    if not actions:
        raise ValueError(f"rule has no actions: {line!r}")
    bound = {a for p in patterns for a in p.args if a.startswith("?")}
    for act in actions:
        for a in act.args:
            if a.startswith("?") and a not in bound:
                raise ValueError(f"unbound metavariable {a} in rule {line!r}")
    return TypeRule(line.strip(), tuple(patterns), tuple(actions))


def load_rules(path) -> list[TypeRule]:
    rules = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            rules.append(parse_rule(line))
    return rules


DEFAULT_RULES = [parse_rule(r) for r in [
    "nsubj(?g,?d) & event(?g) : rel(agent,?g,?d)",
    "nsubjpass(?g,?d) & event(?g) : rel(object,?g,?d)",
    "dobj(?g,?d) : rel(object,?g,?d)",
    "prep_to(?g,?d) : rel(to,?g,?d)",
    "prep_of(?g,?d) : rel(of,?g,?d)",
    "prep_upon(?g,?d) : implies(?d,?g)",
    "advcl(?g,?d) & mark_if(?d,?x) : implies(?d,?g)",
    "neg(?g,?d) : tag(?g,negated)",
    "conj_and(?g,?d) : rel(and,?g,?d)",
    "conj_or(?g,?d) : rel(or,?g,?d)",
]]


MACHINERY_LEMMAS = {"not", "if", "shall", "anything", "but"}  # function words


def tag_metadata(tds: list[TypedDependency], table: IRTable) -> None:
    """First pass: one entry per mention with term type and quantifier tags."""
    mentions = []
    for td in tds:
        mentions.extend([td.governor, td.dependent])
    coordinated = {td.dependent for td in tds if td.relation in ("conj_and", "conj_or")}
    coordinated |= {td.governor for td in tds if td.relation in ("conj_and", "conj_or")}
    for m in mentions:
        if m.lemma.lower() in MACHINERY_LEMMAS:
            continue
        e = table.entry(m)
        if m.lemma in EVENT_LEMMAS:
            e.term_type = "event"
        elif m.lemma.startswith("ARITH_") or m.lemma.lstrip("-").isdigit():
            e.term_type = "numeric"
        else:
            e.term_type = "entity"
            # capitalized singleton references are unique proper nouns;
            # coordinated mentions are groups, not unique references
            if m.lemma[:1].isupper() and m not in coordinated:
                e.quantifier = "unique"


def apply_type_rules(tds: list[TypedDependency],
                     rules: list[TypeRule] | None = None) -> IRTable:
    """Run rules in declaration order over the dependency set."""
    rules = DEFAULT_RULES if rules is None else rules
    table = IRTable()
    tag_metadata(tds, table)
    matched: set[TypedDependency] = set()
    for rule in rules:
        for binding, used in _match_rule(rule, tds, table):
            matched.update(used)
            _run_actions(rule, binding, table)
    table.unmatched = [td for td in tds if td not in matched and td.relation != "aux"]
    for td in table.unmatched:
        logger.debug("no type rule matched %s", td)
    return table


def _match_rule(rule: TypeRule, tds, table):
    dep_pats = [p for p in rule.patterns if p.kind == "dep"]
    guards = [p for p in rule.patterns if p.kind == "guard"]

    def extend(i, binding, used):
        if i == len(dep_pats):
            for g in guards:
                var = g.args[0]
                m = binding.get(var)
                if m is None or not _guard_holds(g.name, m, table):
                    return
            yield dict(binding), list(used)
            return
        pat = dep_pats[i]
        for td in tds:
            if td.relation != pat.name:
                continue
            trial = dict(binding)
            ok = True
            for var, val in zip(pat.args, (td.governor, td.dependent)):
                if var.startswith("?"):
                    if trial.get(var, val) != val:
                        ok = False
                        break
                    trial[var] = val
                elif var != val.lemma:
                    ok = False
                    break
            if ok:
                yield from extend(i + 1, trial, used + [td])

    yield from extend(0, {}, [])


def _guard_holds(name: str, m: Mention, table: IRTable) -> bool:
    e = table.entries.get(m)
    if e is None:
        return False
    if name in ("entity", "event", "numeric", "predicate"):
        return e.term_type == name
    if name == "unique":
        return e.quantifier == "unique"
    if name == "negated":
        return e.negated
    return False


def _run_actions(rule: TypeRule, binding: dict, table: IRTable):
    def resolve(arg: str):
        return binding[arg] if arg.startswith("?") else arg

    for act in rule.actions:
        if act.name == "implies":
            x, y = resolve(act.args[0]), resolve(act.args[1])
            table.entry(y).add_relation("impliedBy", x, rule=str(rule))
        elif act.name == "rel":
            name = act.args[0]
            x, y = resolve(act.args[1]), resolve(act.args[2])
            table.entry(x).add_relation(name, y, rule=str(rule))
        elif act.name == "tag":
            x, meta = resolve(act.args[0]), act.args[1]
            e = table.entry(x)
            if meta == "negated":
                e.negated = True
            elif meta in ("unique", "all", "exists"):
                e.quantifier = meta
            elif meta == "temporal":
                e.temporal = "temporal"
            else:
                raise ValueError(f"unknown tag {meta!r} in rule {rule}")
        else:
            raise ValueError(f"unknown action {act.name!r} in rule {rule}")


# ---------------------------------------------------------------------------
# predicate graph


@dataclass
class GraphNode:
    mention: Mention
    predicate: str | None = None   # set | equal | initialize | cmp
    cmp_op: str | None = None
    unique: bool = False
    negated: bool = False
    arg1: Mention | None = None
    arg2: Mention | None = None
    of: list[Mention] = field(default_factory=list)
    implied_by: Mention | None = None
    and_group: list[Mention] = field(default_factory=list)
    or_group: list[Mention] = field(default_factory=list)


PREDICATE_FOR_LEMMA = {"set": "set", "equals": "equal", "is": "equal",
                       "initialize": "initialize"}


class PredicateGraph:
    def __init__(self, nodes: dict[Mention, GraphNode], root: Mention):
        self.nodes = nodes
        self.root = root

    def node(self, m: Mention) -> GraphNode:
        return self.nodes[m]

    def predicate_nodes(self):
        return [n for n in self.nodes.values() if n.predicate]


def build_predicate_graph(ir: IRTable, aux_shall: set[Mention] | None = None) -> PredicateGraph:
    """Refine the IR into predicate nodes with arg1/arg2/impliedBy edges.

    The root is the predicate node without an incoming impliedBy/and/or
    edge; ties prefer the mention governed by "shall", then the rightmost
    predicate.
    """
    nodes: dict[Mention, GraphNode] = {}
    for entry in ir:
        node = GraphNode(entry.mention)
        node.unique = entry.quantifier == "unique"
        node.negated = entry.negated
        lemma = entry.mention.lemma
        if entry.term_type == "event":
            if lemma in PREDICATE_FOR_LEMMA:
                node.predicate = PREDICATE_FOR_LEMMA[lemma]
            elif lemma in COMPARATOR_OPS:
                node.predicate = "cmp"
                node.cmp_op = COMPARATOR_OPS[lemma]
        rel = entry.relations
        agent = rel.get("agent", [None])[0]
        obj = rel.get("object", [None])[0]
        to = rel.get("to", [None])[0]
        if node.predicate:
            if to is not None:
                node.arg1, node.arg2 = obj or agent, to
            else:
                node.arg1, node.arg2 = agent, obj
        node.of = list(rel.get("of", []))
        node.implied_by = rel.get("impliedBy", [None])[0]
        node.and_group = list(rel.get("and", []))
        node.or_group = list(rel.get("or", []))
        nodes[entry.mention] = node

    preds = [n for n in nodes.values() if n.predicate]
    if not preds:
        raise StructureError("no predicate node in sentence")
    pointed_to: set[Mention] = set()
    for n in nodes.values():
        if n.implied_by is not None:
            pointed_to.add(n.implied_by)
        pointed_to.update(n.and_group)
        pointed_to.update(n.or_group)
    candidates = [n for n in preds if n.mention not in pointed_to]
    if not candidates:
        raise StructureError("no root: every predicate has an incoming edge")
    if len(candidates) > 1:
        shall_governed = [n for n in candidates
                          if aux_shall and n.mention in aux_shall]
        if len(shall_governed) == 1:
            candidates = shall_governed
        else:
            candidates = [max(candidates, key=lambda n: n.mention.position)]
    return PredicateGraph(nodes, candidates[0].mention)


def shall_governed(tds: list[TypedDependency]) -> set[Mention]:
    return {td.governor for td in tds if td.relation == "aux" and td.dependent.lemma == "shall"}
