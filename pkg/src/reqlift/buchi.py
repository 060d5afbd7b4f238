"""Propositionalization, Büchi automata and explicit-state model checking.

Enum variables are encoded with little-endian bit vectors indexed by first
occurrence; unused codes are ruled out by a global validity constraint.
The automaton construction is the standard declarative tableau: states are
consistent obligation covers expanded on the fly, with one fairness set per
eventuality and a counter product to a single acceptance set. Emptiness is
decided by nested depth-first search and returns a witness lasso.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import ResourceError
from .infer import SymbolTable
from .ltl import (And, Atom, BoolVal, EnumVal, ExprVal, F, Formula, G,
                  Implies, IntVal, Not, Or, Prop, VarRef, X, nnf, to_text)
from .model import TransitionModel

CMP_WORD = {"<": "lt", ">": "gt", "<=": "le", ">=": "ge", "=": "eq"}


# ---------------------------------------------------------------------------
# bit encoding


@dataclass
class EnumCoding:
    bits: list[str]
    patterns: dict[str, tuple[bool, ...]]
    invalid: list[tuple[bool, ...]]


class BitEncoding:
    """Maps typed atoms onto propositional atoms.

    Booleans map to themselves; an enum with n values gets
    max(1, ceil(log2 n)) bits (a single-valued enum keeps one bit so the
    complement code can represent "any other value"); comparisons and
    numeric equations become fresh atoms.
    """

    def __init__(self, symbols: SymbolTable):
        self.symbols = symbols
        self.enums: dict[str, EnumCoding] = {}
        self.bools: dict[str, str] = {}
        self.cmp_atoms: dict[str, Atom] = {}
        self._cmp_names: dict[tuple, str] = {}
        for v in symbols.variables():
            info = symbols.info_for(v)
            name = v.text()
            if info.enum_values:
                self._add_enum(name, info.enum_values)
            elif info.boolean or not info.numeric:
                if not v.path and v.base() in symbols.records and \
                        not (info.boolean or info.numeric):
                    continue  # record base: only its fields carry values
                self.bools[name] = name

    def _add_enum(self, name: str, values: list[str]):
        nbits = max(1, math.ceil(math.log2(max(len(values), 2))))
        bits = [f"{name}_bit{i}" for i in range(nbits)]
        patterns = {val: tuple(bool((idx >> b) & 1) for b in range(nbits))
                    for idx, val in enumerate(values)}
        invalid = []
        if len(values) >= 2:
            for code in range(len(values), 2 ** nbits):
                invalid.append(tuple(bool((code >> b) & 1) for b in range(nbits)))
        self.enums[name] = EnumCoding(bits, patterns, invalid)

    def atoms(self) -> list[str]:
        out: list[str] = []
        for name in sorted(set(self.enums) | set(self.bools)):
            if name in self.enums:
                out.extend(self.enums[name].bits)
            else:
                out.append(self.bools[name])
        out.extend(sorted(self.cmp_atoms))
        return out

    def atoms_for_variable(self, name: str) -> list[str]:
        if name in self.enums:
            return list(self.enums[name].bits)
        if name in self.bools:
            return [self.bools[name]]
        return [a for a, atom in sorted(self.cmp_atoms.items())
                if atom.var.text() == name or
                (isinstance(atom.rhs, VarRef) and atom.rhs.text() == name)]

    def cmp_atom_name(self, atom: Atom) -> str:
        rhs = atom.rhs.text() if isinstance(atom.rhs, VarRef) else atom.rhs.text()
        key = (atom.var.text(), atom.op, rhs)
        if key not in self._cmp_names:
            name = f"{atom.var.text()}_{CMP_WORD[atom.op]}_{rhs}".replace(".", "_")
            self._cmp_names[key] = name
            self.cmp_atoms[name] = atom
        return self._cmp_names[key]

    def encode_atom(self, atom: Atom) -> Formula:
        name = atom.var.text()
        if atom.op != "=":
            return Prop(self.cmp_atom_name(atom))
        rhs = atom.rhs
        if isinstance(rhs, BoolVal):
            base = Prop(self.bools.get(name, name))
            return base if rhs.value else Not(base)
        if isinstance(rhs, (IntVal, ExprVal)):
            return Prop(self.cmp_atom_name(atom))
        if isinstance(rhs, EnumVal):
            coding = self.enums.get(name)
            if coding is None:
                self._add_enum(name, [rhs.name])
                coding = self.enums[name]
            if rhs.name not in coding.patterns:
                values = list(self.symbols.info_for(VarRef(name)).enum_values
                              or coding.patterns) + [rhs.name]
                self._add_enum(name, list(dict.fromkeys(values)))
                coding = self.enums[name]
            return self._pattern_formula(coding, coding.patterns[rhs.name])
        if isinstance(rhs, VarRef):
            other = rhs.text()
            if name in self.bools and other in self.bools:
                a, b = Prop(name), Prop(other)
                return Or((And((a, b)), And((Not(a), Not(b)))))
            if name in self.enums and other in self.enums:
                acod, bcod = self.enums[name], self.enums[other]
                cases = []
                for val, pat in acod.patterns.items():
                    if val in bcod.patterns:
                        cases.append(And((self._pattern_formula(acod, pat),
                                          self._pattern_formula(bcod, bcod.patterns[val]))))
                if len(cases) == 1:
                    return cases[0]
                if cases:
                    return Or(tuple(cases))
            return Prop(self.cmp_atom_name(atom))
        raise TypeError(f"cannot encode atom {to_text(atom)}")

    def _pattern_formula(self, coding: EnumCoding, pattern) -> Formula:
        lits = [Prop(b) if on else Not(Prop(b)) for b, on in zip(coding.bits, pattern)]
        return lits[0] if len(lits) == 1 else And(tuple(lits))

    def encode(self, f: Formula) -> Formula:
        if isinstance(f, Atom):
            return self.encode_atom(f)
        if isinstance(f, Prop):
            return f
        if isinstance(f, Not):
            return Not(self.encode(f.child))
        if isinstance(f, And):
            return And(tuple(self.encode(c) for c in f.children))
        if isinstance(f, Or):
            return Or(tuple(self.encode(c) for c in f.children))
        if isinstance(f, Implies):
            return Implies(self.encode(f.lhs), self.encode(f.rhs))
        if isinstance(f, G):
            return G(self.encode(f.child))
        if isinstance(f, F):
            return F(self.encode(f.child))
        if isinstance(f, X):
            return X(self.encode(f.child))
        raise TypeError(f"not a formula: {f!r}")

    def validity_constraints(self) -> list[Formula]:
        """Boolean constraints that every reachable valuation must satisfy."""
        out: list[Formula] = []
        for name in sorted(self.enums):
            coding = self.enums[name]
            for pattern in coding.invalid:
                out.append(Not(self._pattern_formula(coding, pattern)))
        return out

    def cmp_exclusions(self) -> list[Formula]:
        """A value cannot sit below a lower bound and above an upper bound
        at once (bounds are assumed ordered)."""
        out = []
        items = sorted(self.cmp_atoms.items())
        for (n1, a1), (n2, a2) in itertools.combinations(items, 2):
            if a1.var == a2.var and {a1.op, a2.op} == {"<", ">"}:
                out.append(Not(And((Prop(n1), Prop(n2)))))
        return out

    def global_constraints(self, cmp_exclusion: bool = True) -> list[Formula]:
        state = self.validity_constraints()
        if cmp_exclusion:
            state.extend(self.cmp_exclusions())
        return [G(c) for c in state]

    def state_constraints(self, cmp_exclusion: bool = True) -> list[Formula]:
        state = self.validity_constraints()
        if cmp_exclusion:
            state.extend(self.cmp_exclusions())
        return state

    def decode(self, valuation: dict[str, bool]) -> dict[str, object]:
        """Well-typed assignment for a propositional valuation."""
        out: dict[str, object] = {}
        for name, coding in sorted(self.enums.items()):
            pattern = tuple(bool(valuation.get(b, False)) for b in coding.bits)
            for val, pat in coding.patterns.items():
                if pat == pattern:
                    out[name] = val
                    break
            else:
                out[name] = f"<code {''.join('1' if b else '0' for b in pattern)}>"
        for name in sorted(self.bools):
            out[name] = bool(valuation.get(name, False))
        for name in sorted(self.cmp_atoms):
            out[name] = bool(valuation.get(name, False))
        return out


def propositionalize(f: Formula, symbols: SymbolTable,
                     encoding: BitEncoding | None = None,
                     include_constraints: bool = True
                     ) -> tuple[Formula, BitEncoding]:
    """Translate a typed formula to boolean atoms.

    With `include_constraints` the invalid enum codes (and the comparison
    exclusion) are ruled out by conjoined G constraints.
    """
    enc = encoding or BitEncoding(symbols)
    body = enc.encode(f)
    if include_constraints:
        constraints = enc.global_constraints()
        if constraints:
            body = And(tuple([body] + constraints))
    return body, enc


# ---------------------------------------------------------------------------
# tableau construction

# Formulas are interned into integer-indexed nodes so obligation sets and
# literal assignments are plain int bitmasks; this keeps the cover
# computation allocation-free on the hot path.

_LIT, _AND, _OR, _G, _F, _X = range(6)


class _Arena:
    def __init__(self, ap: list[str]):
        self.ap = ap
        self.ap_index = {a: i for i, a in enumerate(ap)}
        self.kinds: list[int] = []
        self.args: list[tuple] = []
        self._intern: dict[tuple, int] = {}
        self.eventualities: list[int] = []

    def add(self, kind: int, arg) -> int:
        key = (kind, arg)
        if key not in self._intern:
            self._intern[key] = len(self.kinds)
            self.kinds.append(kind)
            self.args.append(arg)
            if kind == _F:
                self.eventualities.append(self._intern[key])
        return self._intern[key]

    def index(self, f: Formula) -> int:
        if isinstance(f, Prop):
            return self.add(_LIT, (self.ap_index[f.name], True))
        if isinstance(f, Not):
            assert isinstance(f.child, Prop), "tableau input must be in NNF"
            return self.add(_LIT, (self.ap_index[f.child.name], False))
        if isinstance(f, And):
            return self.add(_AND, tuple(self.index(c) for c in f.children))
        if isinstance(f, Or):
            return self.add(_OR, tuple(self.index(c) for c in f.children))
        if isinstance(f, G):
            return self.add(_G, self.index(f.child))
        if isinstance(f, F):
            return self.add(_F, self.index(f.child))
        if isinstance(f, X):
            return self.add(_X, self.index(f.child))
        raise TypeError(f"unexpected node in tableau: {f!r}")


def _cover(obligations: int, arena: _Arena, cache: dict) -> list[tuple]:
    """All consistent ways to discharge the obligations now.

    Returns branches (assigned, values, nexts, deferred): bitmask of
    constrained atoms, their polarities, obligations pushed to the next
    position, and eventualities deferred rather than fulfilled.
    """
    hit = cache.get(obligations)
    if hit is not None:
        return hit
    kinds, args = arena.kinds, arena.args
    ev_bit = {node: 1 << i for i, node in enumerate(arena.eventualities)}
    results: dict[tuple, None] = {}

    def run(todo: list[int], assigned: int, values: int, nexts: int, deferred: int):
        while todo:
            node = todo.pop()
            kind = kinds[node]
            if kind == _LIT:
                idx, pol = args[node]
                bit = 1 << idx
                if assigned & bit:
                    if bool(values & bit) != pol:
                        return
                else:
                    assigned |= bit
                    if pol:
                        values |= bit
            elif kind == _AND:
                todo.extend(reversed(args[node]))
            elif kind == _OR:
                for child in args[node]:
                    run(todo + [child], assigned, values, nexts, deferred)
                return
            elif kind == _G:
                todo.append(args[node])
                nexts |= 1 << node
            elif kind == _F:
                run(todo + [args[node]], assigned, values, nexts, deferred)
                nexts |= 1 << node
                deferred |= ev_bit[node]
                # fall through: this branch defers the eventuality
            else:  # _X
                nexts |= 1 << args[node]
        results[(assigned, values, nexts, deferred)] = None

    todo0 = [n for n in range(len(kinds)) if obligations >> n & 1]
    run(sorted(todo0, reverse=True), 0, 0, 0, 0)
    out = _prune_subsumed(sorted(results))
    cache[obligations] = out
    return out


def _prune_subsumed(branches: list[tuple]) -> list[tuple]:
    """Drop any branch strictly implied by a weaker one (subset obligations,
    subset literal constraints, subset deferrals). Domination is a strict
    partial order on the deduplicated branches, so minima survive."""
    kept: list[tuple] = []
    for b in branches:
        ab, vb, nb, db = b
        dominated = any(
            a != b and a[2] & nb == a[2] and a[3] & db == a[3]
            and a[0] & ab == a[0] and a[1] == vb & a[0]
            for a in branches)
        if not dominated:
            kept.append(b)
    return kept


@dataclass
class BuchiAutomaton:
    """Edge-labeled Büchi automaton over partial valuations.

    `edges[q]` holds (assigned, values, q') triples: `assigned` is a bitmask
    over `ap` of the atoms the edge constrains and `values` their required
    polarity. A letter (total valuation) enables the edge when it agrees on
    the assigned atoms. `accepting` is the single acceptance set after
    degeneralization.
    """

    ap: list[str]
    n_states: int
    initial: list[int]
    edges: dict[int, list[tuple[int, int, int]]]
    accepting: set[int]

    def letter_mask(self, letter: dict[str, bool]) -> int:
        mask = 0
        for i, a in enumerate(self.ap):
            if letter.get(a, False):
                mask |= 1 << i
        return mask

    def label_items(self, assigned: int, values: int) -> tuple[tuple[str, bool], ...]:
        return tuple((a, bool(values >> i & 1))
                     for i, a in enumerate(self.ap) if assigned >> i & 1)

    def delta(self, q: int, letter: dict[str, bool]) -> set[int]:
        mask = self.letter_mask(letter)
        return {dst for assigned, values, dst in self.edges.get(q, [])
                if mask & assigned == values}

    def to_dot(self) -> str:
        lines = ["digraph buchi {", "  rankdir=LR;", "  init [shape=point];"]
        for q in range(self.n_states):
            shape = "doublecircle" if q in self.accepting else "circle"
            lines.append(f"  q{q} [shape={shape}];")
        for q in self.initial:
            lines.append(f"  init -> q{q};")
        for q, outs in sorted(self.edges.items()):
            for assigned, values, dst in outs:
                text = " & ".join(("" if v else "!") + a
                                  for a, v in self.label_items(assigned, values))
                lines.append(f'  q{q} -> q{dst} [label="{text or "true"}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def ltl_to_buchi(f: Formula, ap: list[str] | None = None) -> BuchiAutomaton:
    """Declarative tableau: states are (pending obligations, deferral) pairs
    expanded on the fly; incoming edges carry each cover branch's literals."""
    f = nnf(f)
    if ap is None:
        ap = sorted({a.name if isinstance(a, Prop) else a.child.name
                     for a in walk_literals(f)})
    arena = _Arena(ap)
    root = arena.index(f)
    cache: dict = {}

    # automaton states are (nexts mask, deferred mask); state 0 is the
    # virtual initial state whose outgoing edges read the first letter
    ids: dict[tuple[int, int], int] = {}
    edges: dict[int, list[tuple[int, int, int]]] = {}

    def state_id(key) -> int:
        if key not in ids:
            ids[key] = len(ids) + 1
        return ids[key]

    pending: list[tuple[int, int]] = []
    edges[0] = []
    for assigned, values, nexts, deferred in _cover(1 << root, arena, cache):
        key = (nexts, deferred)
        fresh = key not in ids
        dst = state_id(key)
        edges[0].append((assigned, values, dst))
        if fresh:
            pending.append(key)
    done = set()
    while pending:
        key = pending.pop()
        if key in done:
            continue
        done.add(key)
        src = state_id(key)
        outs = edges.setdefault(src, [])
        for assigned, values, nexts, deferred in _cover(key[0], arena, cache):
            dst_key = (nexts, deferred)
            fresh = dst_key not in ids
            outs.append((assigned, values, state_id(dst_key)))
            if fresh:
                pending.append(dst_key)

    n_ev = len(arena.eventualities)
    if n_ev == 0:
        return BuchiAutomaton(ap, len(ids) + 1, [0], edges,
                              set(range(1, len(ids) + 1)))
    acceptance_sets = [{state_id(k) for k in ids if not (k[1] >> i & 1)}
                       for i in range(n_ev)]
    aut = BuchiAutomaton(ap, len(ids) + 1, [0], edges, acceptance_sets[0])
    if n_ev == 1:
        return aut
    return _degeneralize(aut, acceptance_sets)


def walk_literals(f: Formula):
    if isinstance(f, Prop) or (isinstance(f, Not) and isinstance(f.child, Prop)):
        yield f
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from walk_literals(c)
    elif isinstance(f, (Not, G, F, X)):
        yield from walk_literals(f.child)
    elif isinstance(f, Implies):
        yield from walk_literals(f.lhs)
        yield from walk_literals(f.rhs)


def _degeneralize(aut: BuchiAutomaton, acceptance_sets: list[set[int]]
                  ) -> BuchiAutomaton:
    """Counter product collapsing generalized acceptance to a single set."""
    k = len(acceptance_sets)
    ids: dict[tuple[int, int], int] = {}

    def sid(q: int, c: int) -> int:
        if (q, c) not in ids:
            ids[(q, c)] = len(ids) + 1
        return ids[(q, c)]

    edges: dict[int, list[tuple[int, int, int]]] = {0: []}
    pending: list[tuple[int, int]] = []
    for assigned, values, dst in aut.edges.get(0, []):
        fresh = (dst, 0) not in ids
        edges[0].append((assigned, values, sid(dst, 0)))
        if fresh:
            pending.append((dst, 0))
    seen = set()
    while pending:
        q, c = pending.pop()
        if (q, c) in seen:
            continue
        seen.add((q, c))
        c2 = (c + 1) % k if q in acceptance_sets[c] else c
        outs = edges.setdefault(sid(q, c), [])
        for assigned, values, dst in aut.edges.get(q, []):
            fresh = (dst, c2) not in ids
            outs.append((assigned, values, sid(dst, c2)))
            if fresh:
                pending.append((dst, c2))
    accepting = {i for (q, c), i in ids.items()
                 if c == 0 and q in acceptance_sets[0]}
    return BuchiAutomaton(aut.ap, len(ids) + 1, [0], edges, accepting)


# ---------------------------------------------------------------------------
# emptiness (nested DFS)


@dataclass
class Lasso:
    """Ultimately periodic witness: `prefix` then `cycle` repeated forever.

    Entries are total valuations of the automaton's atomic propositions.
    """

    prefix: list[dict[str, bool]]
    cycle: list[dict[str, bool]]

    def __post_init__(self):
        assert self.cycle, "lasso cycle must be non-empty"


def _complete(label: tuple[int, int], ap) -> dict[str, bool]:
    assigned, values = label
    return {a: bool(values >> i & 1) for i, a in enumerate(ap)}


def is_empty(aut: BuchiAutomaton) -> Lasso | None:
    """Nested depth-first search for an accepting lasso.

    Returns None when the language is empty, otherwise a witness.
    """
    # iterative blue DFS with post-order seeding of red searches
    blue_seen: set[int] = set()
    on_stack: dict[int, int] = {}  # state -> index in path
    path: list[tuple[int, tuple[int, int]]] = []  # (state, label entering it)

    def red_search(seed: int):
        """Find a cycle from `seed` back to `seed` or to any stacked state."""
        parents: dict[int, tuple[int, tuple[int, int]]] = {}
        stack = [seed]
        visited = {seed}
        while stack:
            s = stack.pop()
            for assigned, values, dst in aut.edges.get(s, []):
                label = (assigned, values)
                if dst == seed or dst in on_stack:
                    # close the loop; rebuild the red path seed -> s -> dst
                    segment = []
                    cur = s
                    while cur != seed:
                        p, lab = parents[cur]
                        segment.append((cur, lab))
                        cur = p
                    segment.reverse()
                    segment.append((dst, label))
                    return segment
                if dst not in visited:
                    visited.add(dst)
                    parents[dst] = (s, label)
                    stack.append(dst)
        return None

    for q0 in aut.initial:
        if q0 in blue_seen:
            continue
        call: list[tuple[int, tuple[int, int], int]] = [(q0, (0, 0), 0)]
        while call:
            state, label, edge_idx = call.pop()
            if edge_idx == 0:
                if state not in on_stack:
                    on_stack[state] = len(path)
                    path.append((state, label))
                    blue_seen.add(state)
            outs = aut.edges.get(state, [])
            if edge_idx < len(outs):
                call.append((state, label, edge_idx + 1))
                assigned, values, dst = outs[edge_idx]
                if dst not in blue_seen:
                    call.append((dst, (assigned, values), 0))
                continue
            # post-order: run the red search from accepting states
            if state in aut.accepting:
                loop = red_search(state)
                if loop is not None:
                    return _build_lasso(aut, path, state, loop)
            on_stack.pop(state, None)
            path.pop()
    return None


def _build_lasso(aut: BuchiAutomaton, path, seed: int, loop) -> Lasso:
    # path: init .. seed (inclusive); loop: seed -> ... -> closing state
    prefix_states = path[1:]  # drop the virtual initial state's entry
    prefix = [_complete(lab, aut.ap) for _, lab in prefix_states]
    close_state = loop[-1][0]
    cycle = [_complete(lab, aut.ap) for _, lab in loop]
    if close_state != seed:
        # the loop reenters the blue stack above the seed: the cycle is the
        # stack segment from that state to the seed plus the red segment
        idx = next(i for i, (s, _) in enumerate(path) if s == close_state)
        seed_idx = next(i for i, (s, _) in enumerate(path) if s == seed)
        stack_part = [_complete(lab, aut.ap) for _, lab in path[idx + 1:seed_idx + 1]]
        cycle = cycle + stack_part
    return Lasso(prefix, cycle)


# ---------------------------------------------------------------------------
# semantic evaluation on lassos (shared by tests and witness checking)


def eval_on_lasso(f: Formula, prefix: list[dict], cycle: list[dict]) -> bool:
    """Truth of a propositional LTL formula on the word prefix . cycle^w."""
    word = prefix + cycle
    n, loop_start = len(word), len(prefix)

    cache: dict[tuple, bool] = {}

    def ev(g: Formula, i: int) -> bool:
        key = (id(g), i)
        if key in cache:
            return cache[key]
        if isinstance(g, Prop):
            r = bool(word[i].get(g.name, False))
        elif isinstance(g, Not):
            r = not ev(g.child, i)
        elif isinstance(g, And):
            r = all(ev(c, i) for c in g.children)
        elif isinstance(g, Or):
            r = any(ev(c, i) for c in g.children)
        elif isinstance(g, Implies):
            r = (not ev(g.lhs, i)) or ev(g.rhs, i)
        elif isinstance(g, X):
            r = ev(g.child, i + 1 if i + 1 < n else loop_start)
        elif isinstance(g, (F, G)):
            reach = _positions_from(i, n, loop_start)
            if isinstance(g, F):
                r = any(ev(g.child, j) for j in reach)
            else:
                r = all(ev(g.child, j) for j in reach)
        else:
            raise TypeError(f"not propositional LTL: {g!r}")
        cache[key] = r
        return r

    return ev(f, 0)


def _positions_from(i: int, n: int, loop_start: int) -> list[int]:
    return list(range(i, n)) + list(range(loop_start, min(i, n)))


# ---------------------------------------------------------------------------
# Kripke structure and model checking


@dataclass
class KripkeStructure:
    ap: list[str]
    states: list[dict[str, bool]]
    initial: list[int]
    succ: dict[int, list[int]]

    def label(self, idx: int) -> dict[str, bool]:
        return self.states[idx]


@dataclass
class Holds:
    pass


@dataclass
class Counterexample:
    lasso: Lasso


def _eval_bool(f: Formula, val: dict[str, bool]) -> bool:
    if isinstance(f, Prop):
        return bool(val.get(f.name, False))
    if isinstance(f, Not):
        return not _eval_bool(f.child, val)
    if isinstance(f, And):
        return all(_eval_bool(c, val) for c in f.children)
    if isinstance(f, Or):
        return any(_eval_bool(c, val) for c in f.children)
    if isinstance(f, Implies):
        return (not _eval_bool(f.lhs, val)) or _eval_bool(f.rhs, val)
    raise TypeError(f"not a boolean formula: {f!r}")


def build_kripke(model: TransitionModel, encoding: BitEncoding,
                 cap: int = 2 ** 22) -> KripkeStructure:
    """Explicit reachable-state structure for the generated model.

    Inputs are unconstrained each step; wires and outputs must satisfy the
    definitions; state variables follow one enabled guarded command per step
    (else they stutter).
    """
    sym = model.symbols
    constraints = [encoding.encode(c) for c in _definition_constraints(model)]
    constraints += encoding.state_constraints()
    ap = encoding.atoms()  # after encoding: comparison atoms are registered
    state_vars = sorted(b for b, c in sym.category.items()
                        if c in ("state_only", "state_and_output"))
    state_atoms = [a for v in state_vars for a in encoding.atoms_for_variable(v)
                   if a in ap]

    domains = _variable_domains(encoding)
    total = 1
    for _, codes in domains:
        total *= len(codes)
        if total > cap:
            raise ResourceError(f"state space above cap ({total} > {cap})")

    states: list[dict[str, bool]] = []
    index: dict[tuple, int] = {}
    by_state_part: dict[tuple, list[int]] = {}
    for parts in itertools.product(*(codes for _, codes in domains)):
        val: dict[str, bool] = {}
        for fragment in parts:
            val.update(fragment)
        if not all(_eval_bool(c, val) for c in constraints):
            continue
        idx = len(states)
        states.append(val)
        index[_key(val, ap)] = idx
        by_state_part.setdefault(_key(val, state_atoms), []).append(idx)

    init_constraints = [encoding.encode(Atom(VarRef(i.var), "=", _as_value(i.value)))
                        for i in model.initializations]
    initial = [i for i, v in enumerate(states)
               if all(_eval_bool(c, v) for c in init_constraints)]

    guards = [(encoding.encode(t.guard), t) for t in model.transitions]
    succ: dict[int, list[int]] = {}
    for i, v in enumerate(states):
        next_keys = set()
        enabled = [t for g, t in guards if _eval_bool(g, v)]
        for t in enabled:
            target = dict(v)
            _assign(target, encoding, t.var, t.value)
            next_keys.add(_key(target, state_atoms))
        if not enabled:
            next_keys.add(_key(v, state_atoms))
        outs: list[int] = []
        for key in sorted(next_keys):
            outs.extend(by_state_part.get(key, []))
        succ[i] = sorted(set(outs))
    return KripkeStructure(ap, states, initial, succ)


def _definition_constraints(model: TransitionModel):
    for d in model.definitions:
        yield d.value if d.guard is None else Implies(d.guard, d.value)


def _variable_domains(encoding: BitEncoding):
    domains = []
    for name in sorted(encoding.enums):
        coding = encoding.enums[name]
        codes = [dict(zip(coding.bits, pat)) for pat in coding.patterns.values()]
        if not coding.invalid and len(coding.patterns) < 2 ** len(coding.bits):
            # open enum: the unnamed complement code is a real possibility
            named = set(map(tuple, (c.values() for c in codes)))
            for raw in itertools.product([False, True], repeat=len(coding.bits)):
                if raw not in named:
                    codes.append(dict(zip(coding.bits, raw)))
        domains.append((name, codes))
    for name in sorted(encoding.bools):
        domains.append((name, [{name: False}, {name: True}]))
    for name in sorted(encoding.cmp_atoms):
        domains.append((name, [{name: False}, {name: True}]))
    return domains


def _key(val: dict, atoms: list[str]) -> tuple:
    return tuple(bool(val.get(a, False)) for a in atoms)


def _as_value(text: str):
    if text in ("TRUE", "FALSE"):
        return BoolVal(text == "TRUE")
    if text.lstrip("-").isdigit():
        return IntVal(int(text))
    return EnumVal(text)


def _assign(val: dict, encoding: BitEncoding, var: str, value: str):
    if var in encoding.enums:
        coding = encoding.enums[var]
        for bit, on in zip(coding.bits, coding.patterns[value]):
            val[bit] = on
    else:
        val[var] = value == "TRUE"


def model_check(model: TransitionModel, theorem: Formula,
                encoding: BitEncoding | None = None,
                cap: int = 2 ** 22) -> Holds | Counterexample:
    """Check the theorem over the model's Kripke structure by product with
    the Büchi automaton of its negation."""
    enc = encoding or BitEncoding(model.symbols)
    prop_theorem = enc.encode(theorem)
    kripke = build_kripke(model, enc, cap=cap)
    negated = ltl_to_buchi(nnf(Not(prop_theorem)), ap=kripke.ap)
    lasso = product_is_empty(kripke, negated)
    if lasso is None:
        return Holds()
    return Counterexample(lasso)


def product_is_empty(kripke: KripkeStructure, aut: BuchiAutomaton) -> Lasso | None:
    """Emptiness of traces(kripke) ∩ language(aut); witness uses the model's
    state valuations."""
    # product nodes: (model state, automaton state); automaton reads the
    # label of the model state it moves onto
    initial = []
    edges: dict[tuple, list] = {}
    accepting = set()
    pending = []
    seen = set()
    for s0 in kripke.initial:
        letter = kripke.label(s0)
        for q0 in aut.initial:
            for q1 in sorted(aut.delta(q0, letter)):
                node = (s0, q1)
                if node not in seen:
                    seen.add(node)
                    pending.append(node)
                initial.append(node)
    while pending:
        s, q = pending.pop()
        outs = []
        for s2 in kripke.succ.get(s, []):
            letter = kripke.label(s2)
            for q2 in sorted(aut.delta(q, letter)):
                node = (s2, q2)
                outs.append(node)
                if node not in seen:
                    seen.add(node)
                    pending.append(node)
        edges[(s, q)] = outs
        if q in aut.accepting:
            accepting.add((s, q))

    # map to the integer automaton shape and reuse the nested DFS
    ids = {node: i + 1 for i, node in enumerate(sorted(seen))}
    full = (1 << len(kripke.ap)) - 1
    flat = BuchiAutomaton(kripke.ap, len(ids) + 1, [0], {}, set())

    def mask_of(state_idx: int) -> int:
        val = kripke.label(state_idx)
        return sum(1 << i for i, a in enumerate(kripke.ap) if val.get(a, False))

    label_of = {ids[n]: (full, mask_of(n[0])) for n in seen}
    flat.edges = {0: [(full, label_of[ids[n]][1], ids[n])
                      for n in sorted(set(initial))]}
    for node, outs in edges.items():
        flat.edges[ids[node]] = [(full, label_of[ids[o]][1], ids[o]) for o in outs]
    flat.accepting = {ids[n] for n in accepting}
    return is_empty(flat)


def format_lasso(lasso: Lasso, encoding: BitEncoding | None = None) -> str:
    """Numbered valuation table; the cycle section repeats forever."""
    rows = []
    for idx, val in enumerate(lasso.prefix + lasso.cycle):
        marker = "cycle" if idx >= len(lasso.prefix) else "     "
        shown = encoding.decode(val) if encoding else val
        cells = ", ".join(f"{k}={v}" for k, v in sorted(shown.items()))
        rows.append(f"{idx:3d} {marker}  {cells}")
    return "\n".join(rows)
