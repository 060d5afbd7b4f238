"""Counterstrategy-guided mining of environment assumptions.

Template shapes: G !(a & b), G(a -> X !b), G F !a. A template's negation
(F(a & b), F(a & X b), F G a) is checked against every play the
counterstrategy can induce; when all plays satisfy it, the assumption rules
that counterstrategy out. Candidate atoms are the user-meaningful boolean
atoms (declared booleans and comparison flags), not raw enum encoding bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .buchi import is_empty, ltl_to_buchi
from .errors import NoOpError
from .gr1 import (Counterstrategy, GR1Spec, Realizable, Unrealizable,
                  add_assumption, check_realizability)
from .ltl import (And, Atom, BoolVal, F, Formula, G, Implies, Not,
                  VarRef, X, conj, to_text)

TEMPLATE_ORDER = ("G_not_conj", "G_implies_next_not", "GF_not")


@dataclass(frozen=True)
class Candidate:
    formula: Formula          # typed assumption, e.g. G NOT(a AND b)
    english: str
    template: str
    atoms: tuple[str, ...]
    rank: int = 0


@dataclass
class MiningSession:
    base: GR1Spec
    accepted: list[Candidate] = field(default_factory=list)
    rejected: set[str] = field(default_factory=set)
    pending: list[Candidate] = field(default_factory=list)
    status: str = "unrealizable"
    result: Realizable | Unrealizable | None = None
    iterations: int = 0


# ---------------------------------------------------------------------------
# induced plays of a counterstrategy


@dataclass
class _Product:
    """Finite unfolding of counterstrategy memory against all legal replies."""

    nodes: list[tuple[int, tuple]]          # (position id, memory)
    roots: list[int]
    edges: dict[int, list[int]]
    terminal: set[int]                      # play ends: no legal reply


def induced_product(cs: Counterstrategy, spec: GR1Spec,
                    node_cap: int = 20000) -> _Product:
    arena = cs.arena
    ids: dict[tuple[int, tuple], int] = {}
    nodes: list[tuple[int, tuple]] = []

    def nid(p: int, mem: tuple) -> int:
        key = (p, mem)
        if key not in ids:
            ids[key] = len(nodes)
            nodes.append(key)
        return ids[key]

    i0 = arena.mask_of_inputs(cs.initial_move)
    mem0 = cs.start()
    roots = [nid(p, mem0) for p in arena.initial_positions(i0)]
    edges: dict[int, list[int]] = {}
    terminal: set[int] = set()
    pending = list(roots)
    seen = set()
    while pending:
        n = pending.pop()
        if n in seen:
            continue
        seen.add(n)
        if len(nodes) > node_cap:
            break
        p, mem = nodes[n]
        outputs = _outputs_of(arena, p)
        next_inputs, mem2 = cs.next_move(mem, outputs)
        i_mask = arena.mask_of_inputs(next_inputs)
        replies = arena.sys_replies(p, i_mask)
        if not replies:
            terminal.add(n)
            edges[n] = []
            continue
        outs = []
        for r in replies:
            m = nid(r, mem2)
            outs.append(m)
            if m not in seen:
                pending.append(m)
        edges[n] = outs
    return _Product(nodes, roots, edges, terminal)


def _outputs_of(arena, p: int) -> dict[str, bool]:
    pos = arena.positions[p]
    return {a: bool(pos >> (i + arena.n_inputs) & 1)
            for i, a in enumerate(arena.spec.outputs)}


# -- play-set checks for the negated templates


def _holds(arena, node_pos: int, atom: str) -> bool:
    return bool(arena.positions[node_pos] >> arena.index[atom] & 1)


def _all_plays_hit(product: _Product, arena, hit) -> bool:
    """Every maximal play visits a position where `hit` holds."""
    if not product.roots:
        return False  # the plays are empty; nothing is ever visited
    avoid = {n for n, (p, _) in enumerate(product.nodes) if not hit(p)}
    avoid_edges = {u: [v for v in vs if v in avoid]
                   for u, vs in product.edges.items() if u in avoid}
    reachable = _closure([r for r in product.roots if r in avoid], avoid_edges)
    if any(n in product.terminal for n in reachable):
        return False
    return not _has_cycle(reachable, avoid_edges)


def _all_plays_hit_edge(product: _Product, arena, a: str, b: str) -> bool:
    """Every maximal play contains consecutive positions with a then b."""
    if not product.roots:
        return False

    def good_edge(u, v):
        return _holds(arena, product.nodes[u][0], a) and \
            _holds(arena, product.nodes[v][0], b)

    allowed = {u: [v for v in vs if not good_edge(u, v)]
               for u, vs in product.edges.items()}
    reachable = _closure(list(product.roots), allowed)
    if any(n in product.terminal for n in reachable):
        return False
    return not _has_cycle(reachable, allowed)


def _all_plays_settle(product: _Product, arena, atom: str) -> bool:
    """Every play is infinite and eventually stays where `atom` holds."""
    if not product.roots:
        return False
    reachable = _closure(list(product.roots), product.edges)
    if any(n in product.terminal for n in reachable):
        return False
    # a reachable cycle through a !atom node defeats F G atom
    bad = {n for n in reachable if not _holds(arena, product.nodes[n][0], atom)}
    return not any(_on_cycle(n, product.edges, reachable) for n in bad)


def _closure(roots, edges) -> set[int]:
    seen = set()
    stack = list(roots)
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        stack.extend(m for m in edges.get(n, []) if m not in seen)
    return seen


def _has_cycle(nodes: set[int], edges) -> bool:
    color: dict[int, int] = {}

    def visit(start) -> bool:
        stack = [(start, iter(edges.get(start, [])))]
        color[start] = 1
        while stack:
            cur, it = stack[-1]
            advanced = False
            for m in it:
                if m not in nodes:
                    continue
                c = color.get(m)
                if c == 1:
                    return True
                if c is None:
                    color[m] = 1
                    stack.append((m, iter(edges.get(m, []))))
                    advanced = True
                    break
            if not advanced:
                color[cur] = 2
                stack.pop()
        return False

    return any(visit(n) for n in nodes if n not in color)


def _on_cycle(node: int, edges, nodes: set[int]) -> bool:
    return node in _closure(edges.get(node, []),
                            {u: [v for v in vs if v in nodes]
                             for u, vs in edges.items()})


# ---------------------------------------------------------------------------
# candidate enumeration


def _atom_pool(spec: GR1Spec, arena) -> list[str]:
    enc = spec.encoding
    pool = []
    for a in spec.atom_order():
        if enc is None or a in enc.bools or a in enc.cmp_atoms:
            pool.append(a)
    return pool


def _typed_atom(spec: GR1Spec, name: str) -> Formula:
    enc = spec.encoding
    if enc is not None and name in enc.cmp_atoms:
        return enc.cmp_atoms[name]
    return Atom(VarRef(name), "=", BoolVal(True))


def _english_atom(spec: GR1Spec, name: str, positive: bool = True) -> str:
    enc = spec.encoding
    if enc is not None and name in enc.cmp_atoms:
        a = enc.cmp_atoms[name]
        words = {"<": "is less than", ">": "is greater than",
                 "<=": "is at most", ">=": "is at least", "=": "equals"}
        lhs = a.var.text().replace("_", " ").replace(".", " ")
        rhs = a.rhs.text().replace("_", " ")
        return f"{lhs} {words[a.op]} {rhs}"
    noun = name.replace("_", " ").replace(".", " ")
    return f"{noun} is {'True' if positive else 'False'}"


def enumerate_candidates(cs: Counterstrategy, spec: GR1Spec) -> list[Candidate]:
    """Assumption candidates whose negation is satisfied by every play the
    counterstrategy induces, ranked by (atom count, template, atom names)."""
    arena = cs.arena
    product = induced_product(cs, spec)
    pool = _atom_pool(spec, arena)
    out: list[Candidate] = []

    for a, b in itertools.combinations(sorted(pool), 2):
        def hit(pid, _a=a, _b=b):
            return _holds(arena, pid, _a) and _holds(arena, pid, _b)
        if _all_plays_hit(product, arena, hit):
            ta, tb = _typed_atom(spec, a), _typed_atom(spec, b)
            out.append(Candidate(
                G(Not(And((ta, tb)))),
                "Globally, it is never the case that "
                f"{_english_atom(spec, a)} and {_english_atom(spec, b)}.",
                "G_not_conj", (a, b)))

    for a, b in itertools.permutations(sorted(pool), 2):
        if _all_plays_hit_edge(product, arena, a, b):
            ta, tb = _typed_atom(spec, a), _typed_atom(spec, b)
            out.append(Candidate(
                G(Implies(ta, X(Not(tb)))),
                f"Globally, if {_english_atom(spec, a)}, then in the next step "
                f"it is not the case that {_english_atom(spec, b)}.",
                "G_implies_next_not", (a, b)))

    for a in sorted(pool):
        if _all_plays_settle(product, arena, a):
            ta = _typed_atom(spec, a)
            out.append(Candidate(
                G(F(Not(ta))),
                f"Globally, it happens again and again that "
                f"{_english_atom(spec, a, positive=False)}.",
                "GF_not", (a,)))

    out = [c for c in out if _env_side_satisfiable(spec, c)]
    out.sort(key=lambda c: (len(c.atoms), TEMPLATE_ORDER.index(c.template), c.atoms))
    deduped: list[Candidate] = []
    seen = set()
    for c in out:
        key = to_text(c.formula)
        if key not in seen:
            seen.add(key)
            deduped.append(Candidate(c.formula, c.english, c.template,
                                     c.atoms, rank=len(deduped) + 1))
    return deduped


def _env_side_satisfiable(spec: GR1Spec, cand: Candidate) -> bool:
    """The environment must keep some legal behaviour under the assumption."""
    parts: list[Formula] = []
    for c in spec.alpha_e:
        parts.append(c.formula)
    for c in spec.beta_e:
        parts.append(G(c.formula))
    for c in spec.gamma_e:
        parts.append(G(F(c.formula)))
    parts.append(spec.encoding.encode(cand.formula) if spec.encoding
                 else cand.formula)
    formula = conj(parts)
    return is_empty(ltl_to_buchi(formula)) is not None


# ---------------------------------------------------------------------------
# the mining loop


def mine(spec: GR1Spec, responder, max_iterations: int = 10,
         bit_cap: int = 24) -> MiningSession:
    """Iterate counterstrategy, candidates, accept/reject until realizable.

    `responder(candidate)` returns True to accept. Raises NoOpError when
    the specification is already realizable.
    """
    result = check_realizability(spec, bit_cap=bit_cap)
    if isinstance(result, Realizable):
        raise NoOpError("specification is already realizable; nothing to mine")
    session = MiningSession(base=spec)
    current = spec
    while session.iterations < max_iterations:
        session.iterations += 1
        cs = result.counterstrategy
        candidates = [c for c in enumerate_candidates(cs, current)
                      if to_text(c.formula) not in session.rejected]
        session.pending = candidates
        chosen = None
        for cand in candidates:
            if responder(cand):
                chosen = cand
                break
            session.rejected.add(to_text(cand.formula))
        if chosen is None:
            session.status = "exhausted"
            session.result = result
            return session
        session.accepted.append(chosen)
        current = add_assumption(current, chosen.formula,
                                 origin=f"assumption[{len(session.accepted)}]")
        result = check_realizability(current, bit_cap=bit_cap)
        if isinstance(result, Realizable):
            session.status = "realizable"
            session.result = result
            return session
    session.status = "exhausted"
    session.result = result
    return session
