"""GR(1) realizability over an explicit game arena.

The game: the environment picks the next inputs, then the system picks the
next outputs. Safety conjuncts relate a position to the next inputs (env
side) or to the full next position (system side); current-state-only
conjuncts constrain every position as it forms. The system also wins any
play in which the environment violates its own side first, so an assumption
may mention current-state outputs.

Realizability is decided by the three-nested fixpoint

    Z = nu Z. AND_j mu Y. OR_i nu X. (S_j & cpre Z) | cpre Y | (~E_i & cpre X)

over the arena; a Moore machine is read off the fixpoint ranks when the
initial check succeeds, and an environment counterstrategy is extracted
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .buchi import BitEncoding
from .errors import NonGR1Error, ProtocolError, ResourceError
from .infer import SymbolTable
from .ltl import And, F, Formula, G, Implies, Not, Or, Prop, X, to_text


# ---------------------------------------------------------------------------
# specification


@dataclass(frozen=True)
class GR1Conjunct:
    formula: Formula  # propositional; boolean over atoms plus X(atom)
    origin: str


@dataclass
class GR1Spec:
    inputs: list[str]
    outputs: list[str]
    alpha_e: list[GR1Conjunct] = field(default_factory=list)
    alpha_s: list[GR1Conjunct] = field(default_factory=list)
    beta_e: list[GR1Conjunct] = field(default_factory=list)
    beta_s: list[GR1Conjunct] = field(default_factory=list)
    gamma_e: list[GR1Conjunct] = field(default_factory=list)
    gamma_s: list[GR1Conjunct] = field(default_factory=list)
    input_legal: list[Formula] = field(default_factory=list)   # structural, over I
    output_legal: list[Formula] = field(default_factory=list)  # structural, over O
    encoding: BitEncoding | None = None

    def atom_order(self) -> list[str]:
        return list(self.inputs) + list(self.outputs)


def _push_x(f: Formula) -> Formula:
    """Distribute X over boolean connectives so X wraps atoms only."""
    if isinstance(f, X):
        inner = _push_x(f.child)
        if isinstance(inner, Prop):
            return X(inner)
        if isinstance(inner, Not):
            return Not(_push_x(X(inner.child)))
        if isinstance(inner, And):
            return And(tuple(_push_x(X(c)) for c in inner.children))
        if isinstance(inner, Or):
            return Or(tuple(_push_x(X(c)) for c in inner.children))
        if isinstance(inner, Implies):
            return Implies(_push_x(X(inner.lhs)), _push_x(X(inner.rhs)))
        if isinstance(inner, X):
            raise NonGR1Error("nested X is outside GR(1)", formula=f)
        raise NonGR1Error(f"X over unsupported node {inner!r}", formula=f)
    if isinstance(f, Not):
        return Not(_push_x(f.child))
    if isinstance(f, And):
        return And(tuple(_push_x(c) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_push_x(c) for c in f.children))
    if isinstance(f, Implies):
        return Implies(_push_x(f.lhs), _push_x(f.rhs))
    return f


def _atoms_and_xatoms(f: Formula) -> tuple[set[str], set[str]]:
    cur, nxt = set(), set()

    def walk(g, under_x=False):
        if isinstance(g, Prop):
            (nxt if under_x else cur).add(g.name)
        elif isinstance(g, X):
            walk(g.child, True)
        elif isinstance(g, Not):
            walk(g.child, under_x)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c, under_x)
        elif isinstance(g, Implies):
            walk(g.lhs, under_x)
            walk(g.rhs, under_x)
        else:
            raise NonGR1Error(f"temporal operator inside a transition formula: "
                              f"{to_text(g)}", formula=f)

    walk(f)
    return cur, nxt


def _is_boolean(f: Formula) -> bool:
    if isinstance(f, Prop):
        return True
    if isinstance(f, Not):
        return _is_boolean(f.child)
    if isinstance(f, (And, Or)):
        return all(_is_boolean(c) for c in f.children)
    if isinstance(f, Implies):
        return _is_boolean(f.lhs) and _is_boolean(f.rhs)
    return False


def classify(prop: Formula, origin: str, side: str, spec: GR1Spec) -> None:
    """Sort one propositional formula into the GR(1) conjunct lists."""
    inputs = set(spec.inputs)
    if isinstance(prop, G):
        body = prop.child
        if isinstance(body, F):
            if not _is_boolean(body.child):
                raise NonGR1Error("fairness body must be boolean", formula=prop)
            (spec.gamma_e if side == "e" else spec.gamma_s).append(
                GR1Conjunct(body.child, origin))
            return
        body = _push_x(body)
        cur, nxt = _atoms_and_xatoms(body)
        if side == "e":
            bad = nxt - inputs
            if bad:
                raise NonGR1Error(
                    f"environment transition constrains next outputs {sorted(bad)}",
                    formula=prop)
        conj = GR1Conjunct(body, origin)
        (spec.beta_e if side == "e" else spec.beta_s).append(conj)
        return
    if _is_boolean(prop):
        if side == "e":
            cur, _ = _atoms_and_xatoms(prop)
            if cur - inputs:
                raise NonGR1Error("initial environment condition mentions outputs",
                                  formula=prop)
            spec.alpha_e.append(GR1Conjunct(prop, origin))
        else:
            spec.alpha_s.append(GR1Conjunct(prop, origin))
        return
    raise NonGR1Error(f"formula fits no GR(1) shape: {to_text(prop)}", formula=prop)


def build_gr1(formulas: list[tuple[Formula, str]], symbols: SymbolTable,
              io_override: dict[str, str] | None = None,
              encoding: BitEncoding | None = None) -> GR1Spec:
    """Typed requirement formulas become system-side conjuncts.

    The input atoms are those of input-category variables; everything else
    (state, outputs, wires) is controlled by the system. `io_override` can
    force a variable to "input" or "output". Encoding validity constraints
    become structural arena legality, not spec conjuncts.
    """
    enc = encoding or BitEncoding(symbols)
    io_override = io_override or {}
    encoded = [(enc.encode(f), origin) for f, origin in formulas]
    inputs: list[str] = []
    outputs: list[str] = []
    for name in sorted(set(symbols.category) | set(enc.bools) | set(enc.enums)):
        side = io_override.get(name) or (
            "input" if symbols.category.get(name) == "input" else "output")
        atoms = enc.atoms_for_variable(name)
        (inputs if side == "input" else outputs).extend(
            a for a in atoms if a not in inputs and a not in outputs)
    for name, atom in sorted(enc.cmp_atoms.items()):
        if name not in inputs and name not in outputs:
            referenced = [atom.var.base()] + (
                [atom.rhs.base()] if hasattr(atom.rhs, "base") else [])
            side = "output" if any(
                io_override.get(b, symbols.category.get(b)) not in (None, "input")
                for b in referenced) else "input"
            (inputs if side == "input" else outputs).append(name)

    spec = GR1Spec(sorted(set(inputs)), sorted(set(outputs)), encoding=enc)
    input_set = set(spec.inputs)
    for constraint in enc.state_constraints():
        cur, _ = _atoms_and_xatoms(constraint)
        if cur <= input_set:
            spec.input_legal.append(constraint)
        else:
            spec.output_legal.append(constraint)
    for prop, origin in encoded:
        classify(prop, origin, "s", spec)
    return spec


def add_assumption(spec: GR1Spec, formula: Formula, origin: str = "assumption"
                   ) -> GR1Spec:
    """Conjoin a typed formula to the environment side of a copy of `spec`."""
    import copy
    out = copy.copy(spec)
    out.alpha_e = list(spec.alpha_e)
    out.beta_e = list(spec.beta_e)
    out.gamma_e = list(spec.gamma_e)
    classify(spec.encoding.encode(formula), origin, "e", out)
    return out


# ---------------------------------------------------------------------------
# arena


def _compile(f: Formula, index: dict[str, int]):
    """Compile a transition formula to fn(cur_mask, next_mask) -> bool."""
    if isinstance(f, Prop):
        bit = 1 << index[f.name]
        return lambda cur, nxt: bool(cur & bit)
    if isinstance(f, X):
        assert isinstance(f.child, Prop)
        bit = 1 << index[f.child.name]
        return lambda cur, nxt: bool(nxt & bit)
    if isinstance(f, Not):
        g = _compile(f.child, index)
        return lambda cur, nxt: not g(cur, nxt)
    if isinstance(f, And):
        parts = [_compile(c, index) for c in f.children]
        return lambda cur, nxt: all(p(cur, nxt) for p in parts)
    if isinstance(f, Or):
        parts = [_compile(c, index) for c in f.children]
        return lambda cur, nxt: any(p(cur, nxt) for p in parts)
    if isinstance(f, Implies):
        a, b = _compile(f.lhs, index), _compile(f.rhs, index)
        return lambda cur, nxt: (not a(cur, nxt)) or b(cur, nxt)
    raise NonGR1Error(f"cannot compile {f!r} into a transition predicate")


class GameArena:
    """Explicit positions (input valuation, output valuation) and the legal
    moves between them. Positions violating a current-state environment
    conjunct are system-winning sinks (`env_violated`)."""

    def __init__(self, spec: GR1Spec, bit_cap: int = 24):
        n_atoms = len(spec.inputs) + len(spec.outputs)
        if n_atoms > bit_cap:
            raise ResourceError(f"{n_atoms} atoms exceed the bit cap {bit_cap}")
        self.spec = spec
        self.n_inputs = len(spec.inputs)
        self.atoms = spec.atom_order()
        self.index = {a: i for i, a in enumerate(self.atoms)}

        cur_only_s, pair_s = self._split_side(spec.beta_s, set(spec.inputs))
        cur_only_e, pair_e = self._split_side(spec.beta_e, set(spec.inputs))
        self._pair_s = [(_compile(c.formula, self.index), c) for c in pair_s]
        self._pair_e = [(_compile(c.formula, self.index), c) for c in pair_e]
        self._cur_s = [(_compile(c.formula, self.index), c) for c in cur_only_s]
        self._cur_e = [(_compile(c.formula, self.index), c) for c in cur_only_e]
        in_legal = [_compile(c, self.index) for c in spec.input_legal]
        out_legal = [_compile(c, self.index) for c in spec.output_legal]

        self.legal_inputs = [m for m in self._enumerate(0, self.n_inputs)
                             if all(f(m, 0) for f in in_legal)]
        raw_outputs = [m << self.n_inputs
                       for m in self._enumerate(0, len(spec.outputs))]
        self.legal_outputs = [m for m in raw_outputs
                              if all(f(m, 0) for f in out_legal)]

        self.positions: list[int] = []
        self.pid: dict[int, int] = {}
        self._outputs_by_input: dict[int, list[int]] = {}
        for i_mask in self.legal_inputs:
            fitting = []
            for o_mask in self.legal_outputs:
                pos = i_mask | o_mask
                if all(f(pos, 0) for f, _ in self._cur_s):
                    self.pid[pos] = len(self.positions)
                    self.positions.append(pos)
                    fitting.append(o_mask)
            self._outputs_by_input[i_mask] = fitting
        self.env_violated = {p for p in range(len(self.positions))
                             if not all(f(self.positions[p], 0)
                                        for f, _ in self._cur_e)}
        self._succ: list[list[tuple[int, tuple[int, ...]]]] | None = None

    @staticmethod
    def _enumerate(base: int, nbits: int):
        return range(2 ** nbits)

    def _split_side(self, conjuncts, _inputs):
        cur_only, pair = [], []
        for c in conjuncts:
            _, nxt = _atoms_and_xatoms(c.formula)
            (pair if nxt else cur_only).append(c)
        return cur_only, pair

    # -- moves

    def env_moves(self, p: int) -> list[int]:
        pos = self.positions[p]
        return [i for i in self.legal_inputs
                if all(f(pos, i) for f, _ in self._pair_e)]

    def sys_replies(self, p: int, i_mask: int) -> list[int]:
        pos = self.positions[p]
        out = []
        for o_mask in self._outputs_by_input.get(i_mask, ()):
            nxt = i_mask | o_mask
            if all(f(pos, nxt) for f, _ in self._pair_s):
                out.append(self.pid[nxt])
        return out

    def initial_positions(self, i_mask: int) -> list[int]:
        alpha_s = [_compile(c.formula, self.index) for c in self.spec.alpha_s]
        out = []
        for o_mask in self._outputs_by_input.get(i_mask, ()):
            pos = i_mask | o_mask
            if all(f(pos, 0) for f in alpha_s):
                out.append(self.pid[pos])
        return out

    def initial_inputs(self) -> list[int]:
        alpha_e = [_compile(c.formula, self.index) for c in self.spec.alpha_e]
        return [i for i in self.legal_inputs if all(f(i, 0) for f in alpha_e)]

    def successors(self) -> list[list[tuple[int, tuple[int, ...]]]]:
        """succ[p] = [(input mask, (reply pids...)), ...], cached."""
        if self._succ is None:
            self._succ = []
            for p in range(len(self.positions)):
                row = [(i, tuple(self.sys_replies(p, i))) for i in self.env_moves(p)]
                self._succ.append(row)
        return self._succ

    def valuation(self, p: int) -> dict[str, bool]:
        pos = self.positions[p]
        return {a: bool(pos >> i & 1) for i, a in enumerate(self.atoms)}

    def input_valuation(self, i_mask: int) -> dict[str, bool]:
        return {a: bool(i_mask >> i & 1) for i, a in enumerate(self.spec.inputs)}

    def mask_of_inputs(self, valuation: dict[str, bool]) -> int:
        m = 0
        for i, a in enumerate(self.spec.inputs):
            if valuation.get(a, False):
                m |= 1 << i
        return m

    def mask_of_outputs(self, valuation: dict[str, bool]) -> int:
        m = 0
        for i, a in enumerate(self.spec.outputs):
            if valuation.get(a, False):
                m |= 1 << (i + self.n_inputs)
        return m

    def violated_sys_conjuncts(self, prev_pid: int | None, pos_mask: int
                               ) -> list[GR1Conjunct]:
        """System obligations broken by forming `pos_mask` after `prev_pid`."""
        out = [c for f, c in self._cur_s if not f(pos_mask, 0)]
        if prev_pid is not None:
            prev = self.positions[prev_pid]
            out += [c for f, c in self._pair_s if not f(prev, pos_mask)]
        return out

    def env_violated_at(self, pos_mask: int) -> bool:
        """True when a current-state environment conjunct fails here."""
        return not all(f(pos_mask, 0) for f, _ in self._cur_e)


# ---------------------------------------------------------------------------
# fixpoint solving


class _Fixpoint:
    def __init__(self, arena: GameArena):
        self.arena = arena
        spec = arena.spec
        idx = arena.index
        n = len(arena.positions)
        self.universe = frozenset(range(n)) - arena.env_violated
        self.sinks = set(arena.env_violated)
        self.succ = arena.successors()
        self.S = [_compile(c.formula, idx) for c in spec.gamma_s] or \
            [lambda cur, nxt: True]
        self.E = [_compile(c.formula, idx) for c in spec.gamma_e] or \
            [lambda cur, nxt: True]
        self.S_sets = [frozenset(p for p in self.universe
                                 if f(arena.positions[p], 0)) for f in self.S]
        self.E_sets = [frozenset(p for p in self.universe
                                 if f(arena.positions[p], 0)) for f in self.E]

    def cpre(self, target: set[int]) -> set[int]:
        """Positions where every env move admits a reply into the target
        (or into a sink)."""
        t = target | self.sinks
        out = set()
        for p in self.universe:
            ok = True
            for _i, replies in self.succ[p]:
                if not any(r in t for r in replies):
                    ok = False
                    break
            if ok:
                out.add(p)
        return out

    def epre(self, target: set[int]) -> set[int]:
        """Positions where some env move forces every reply into the target
        (a move with no replies kills the system outright)."""
        out = set()
        for p in self.universe:
            for _i, replies in self.succ[p]:
                if all(r in target for r in replies):
                    out.add(p)
                    break
        return out

    def solve_sys(self, record_ranks: bool = False):
        """Winning set of the system; optionally the strategy rank tables."""
        n_goals = len(self.S_sets)
        trivial_env = len(self.E_sets) == 1 and len(self.E_sets[0]) == len(self.universe)
        Z = set(self.universe)
        ranks = None
        while True:
            per_goal = []
            ranks = []
            for j in range(n_goals):
                base = self.S_sets[j] & self.cpre(Z)
                Y: set[int] = set()
                y_layers: list[tuple[set[int], list[set[int]]]] = []
                while True:
                    of_y = self.cpre(Y)
                    add = base | of_y
                    x_fixes: list[set[int]] = []
                    if not trivial_env:
                        for i, e_set in enumerate(self.E_sets):
                            not_e = self.universe - e_set
                            Xs = set(self.universe)
                            while True:
                                X2 = add | (not_e & self.cpre(Xs))
                                if X2 == Xs:
                                    break
                                Xs = X2
                            x_fixes.append(Xs)
                            add = add | Xs
                    new_y = Y | add
                    if new_y == Y:
                        break
                    y_layers.append((new_y - Y, x_fixes))
                    Y = new_y
                per_goal.append(Y)
                ranks.append(y_layers)
            Z2 = set.intersection(*per_goal) if per_goal else set(self.universe)
            if Z2 == Z:
                break
            Z = Z2
        if record_ranks:
            return Z, ranks
        return Z


# ---------------------------------------------------------------------------
# results


@dataclass
class MooreMachine:
    """Outputs depend on the state only; inputs drive transitions.

    A run starts in `initial`; reading the first input valuation moves to a
    state whose output is the machine's reply paired with that input.
    """

    inputs: list[str]
    outputs: list[str]
    initial: str
    output_fn: dict[str, dict[str, bool]]
    transitions: dict[str, dict[tuple, str]]

    def step(self, state: str, input_valuation: dict[str, bool]) -> str:
        key = tuple(bool(input_valuation.get(a, False)) for a in self.inputs)
        table = self.transitions[state]
        if key in table:
            return table[key]
        return table.get(("*",), state)  # assumption violated: stay put

    def to_json(self) -> dict:
        return {
            "inputs": self.inputs,
            "outputs": self.outputs,
            "initial": self.initial,
            "states": {s: {a: v for a, v in sorted(out.items())}
                       for s, out in self.output_fn.items()},
            "transitions": {
                s: {"".join("1" if b else "0" for b in k) if k != ("*",) else "*": dst
                    for k, dst in table.items()}
                for s, table in self.transitions.items()},
        }

    def to_dot(self) -> str:
        lines = ["digraph moore {", "  rankdir=LR;"]
        for s, out in self.output_fn.items():
            label = "\\n".join(f"{a}={'1' if v else '0'}"
                               for a, v in sorted(out.items()) if v) or "all-low"
            lines.append(f'  "{s}" [label="{s}\\n{label}"];')
        for s, table in self.transitions.items():
            for k, dst in table.items():
                key = "*" if k == ("*",) else "".join("1" if b else "0" for b in k)
                lines.append(f'  "{s}" -> "{dst}" [label="{key}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class Counterstrategy:
    """Environment strategy witnessing unrealizability.

    `initial_move` is the first input valuation; `next_move(memory,
    outputs)` consumes the system's output valuation for the position being
    formed and returns the following input valuation with updated memory.
    """

    arena: GameArena
    initial_move: dict[str, bool]
    _initial_mask: int
    _policy: "_EnvPolicy"

    def start(self):
        return ("after_env", self._initial_mask)

    def next_move(self, memory, outputs: dict[str, bool]):
        return self._policy.next_move(memory, outputs)


@dataclass
class Realizable:
    machine: MooreMachine


@dataclass
class Unrealizable:
    counterstrategy: Counterstrategy
    reason: str = ""


def check_realizability(spec: GR1Spec, bit_cap: int = 24
                        ) -> Realizable | Unrealizable:
    """Decide the GR(1) game; extract a Moore machine or a counterstrategy."""
    arena = GameArena(spec, bit_cap=bit_cap)
    fx = _Fixpoint(arena)
    win, ranks = fx.solve_sys(record_ranks=True)
    win_eff = win | fx.sinks

    bad_inputs = []
    for i_mask in arena.initial_inputs():
        if not any(p in win_eff for p in arena.initial_positions(i_mask)):
            bad_inputs.append(i_mask)
    if not bad_inputs:
        machine = _extract_machine(arena, fx, win, ranks)
        return Realizable(machine)
    policy = _EnvPolicy(arena, fx, win)
    first = min(bad_inputs)
    cs = Counterstrategy(arena, arena.input_valuation(first), first, policy)
    return Unrealizable(cs, reason="an initial environment move defeats every reply")


# -- system strategy


def _extract_machine(arena: GameArena, fx: _Fixpoint, win: set[int],
                     ranks) -> MooreMachine:
    spec = arena.spec
    win_eff = win | fx.sinks
    n_goals = len(fx.S_sets)
    cpre_win = fx.cpre(win)

    rank_of: list[dict[int, int]] = []
    for j in range(n_goals):
        table = {}
        for r, (layer, _xf) in enumerate(ranks[j]):
            for p in layer:
                table[p] = r
        rank_of.append(table)

    def pick_reply(p: int, j: int, replies) -> tuple[int, int]:
        """Choose a winning reply pid and the next goal memory.

        Goal hit: step anywhere inside the winning set and advance the goal
        pointer. Otherwise decrease the attractor rank toward the goal; if
        the rank is stuck the play sits in a region where some environment
        fairness is being starved, and the reply stays inside that region.
        """
        candidates = [r for r in sorted(replies) if r in win_eff]
        if not candidates:
            raise AssertionError("strategy called outside the winning set")
        if p in fx.S_sets[j] and p in cpre_win:
            return candidates[0], (j + 1) % n_goals
        my_rank = rank_of[j].get(p, len(ranks[j]))
        decreasing = [r for r in candidates
                      if r in fx.sinks or rank_of[j].get(r, my_rank) < my_rank]
        if decreasing:
            return decreasing[0], j
        _layer, x_fixes = ranks[j][my_rank]
        for i, xs in enumerate(x_fixes):
            if p in xs and p not in fx.E_sets[i]:
                stay = [r for r in candidates if r in fx.sinks or r in xs]
                if stay:
                    return stay[0], j
        return candidates[0], j

    states: dict[tuple[int, int], str] = {}
    output_fn: dict[str, dict[str, bool]] = {}
    transitions: dict[str, dict[tuple, str]] = {"s0": {}}

    def state_name(p: int, j: int) -> str:
        if (p, j) not in states:
            states[(p, j)] = f"s{len(states) + 1}"
            name = states[(p, j)]
            pos = arena.positions[p]
            output_fn[name] = {a: bool(pos >> (i + arena.n_inputs) & 1)
                               for i, a in enumerate(spec.outputs)}
            transitions[name] = {}
        return states[(p, j)]

    pending: list[tuple[int, int]] = []
    for i_mask in arena.initial_inputs():
        cands = [p for p in arena.initial_positions(i_mask) if p in win_eff]
        p0 = min(cands)
        key = tuple(bool(i_mask >> i & 1) for i in range(arena.n_inputs))
        transitions["s0"][key] = state_name(p0, 0)
        pending.append((p0, 0))
    output_fn["s0"] = {a: False for a in spec.outputs}

    done = set()
    while pending:
        p, j = pending.pop()
        if (p, j) in done:
            continue
        done.add((p, j))
        src = state_name(p, j)
        if p in fx.sinks:
            # the environment already violated its side; hold outputs
            transitions[src][("*",)] = src
            continue
        for i_mask, replies in fx.succ[p]:
            dst_p, j2 = pick_reply(p, j, replies)
            key = tuple(bool(i_mask >> i & 1) for i in range(arena.n_inputs))
            dst = state_name(dst_p, j2)
            transitions[src][key] = dst
            if (dst_p, j2) not in done:
                pending.append((dst_p, j2))
    return MooreMachine(list(spec.inputs), list(spec.outputs), "s0",
                        output_fn, transitions)


# -- environment strategy


class _EnvPolicy:
    """Winning environment policy on the complement of the system's set.

    Structure: an attractor toward dead-end moves, plus for each system goal
    j a region where the environment avoids that goal forever while visiting
    every environment goal infinitely often.
    """

    def __init__(self, arena: GameArena, fx: _Fixpoint, sys_win: set[int]):
        self.arena = arena
        self.fx = fx
        self.w_env = set(fx.universe) - sys_win
        self.succ = fx.succ

        # env moves that keep the play inside w_env (or kill the system)
        self.safe_moves: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
        for p in self.w_env:
            rows = []
            for i_mask, replies in self.succ[p]:
                if all(r in self.w_env for r in replies):
                    rows.append((i_mask, replies))
            self.safe_moves[p] = rows

        # attractor to immediate kills, with distance ranks
        self.kill_rank: dict[int, int] = {}
        frontier = {p for p in self.w_env
                    if any(not replies for _i, replies in self.safe_moves[p])}
        rank = 0
        reached = set(frontier)
        for p in frontier:
            self.kill_rank[p] = 0
        while True:
            rank += 1
            new = set()
            for p in self.w_env - reached:
                for _i, replies in self.safe_moves[p]:
                    if replies and all(r in reached for r in replies):
                        new.add(p)
                        break
            if not new:
                break
            for p in new:
                self.kill_rank[p] = rank
            reached |= new

        # starvation regions per system goal
        self.regions: list[set[int]] = []
        self.e_dist: list[list[dict[int, int]]] = []
        for j, s_set in enumerate(fx.S_sets):
            region = self._starvation_region(s_set)
            self.regions.append(region)
            self.e_dist.append([self._distance_within(region, e_set & region)
                                for e_set in fx.E_sets])

    def _starvation_region(self, s_set: frozenset) -> set[int]:
        region = {p for p in self.w_env if p not in s_set}
        while True:
            dists = [self._distance_within(region, set(e_set) & region)
                     for e_set in self.fx.E_sets]
            keep = set()
            for p in region:
                moves = [(i, rs) for i, rs in self.safe_moves[p]
                         if rs and all(r in region for r in rs)]
                if not moves:
                    continue
                # every env goal must stay env-reachable inside the region
                if all(p in d for d in dists):
                    keep.add(p)
            if keep == region:
                return region
            region = keep

    def _distance_within(self, region: set[int], targets: set[int]) -> dict[int, int]:
        """Env-forced distance to `targets` while staying in `region`."""
        dist = {p: 0 for p in targets}
        changed = True
        while changed:
            changed = False
            for p in region - set(dist):
                best = None
                for _i, replies in self.safe_moves[p]:
                    if replies and all(r in dist and r in region for r in replies):
                        worst = max(dist[r] for r in replies)
                        best = worst if best is None else min(best, worst)
                if best is not None:
                    dist[p] = best + 1
                    changed = True
        return dist

    # -- runtime moves

    def next_move(self, memory, outputs: dict[str, bool]):
        kind, i_mask = memory[0], memory[1]
        o_mask = self.arena.mask_of_outputs(outputs)
        pos = i_mask | o_mask
        pid = self.arena.pid.get(pos)
        if pid is None or pid not in self.w_env:
            # off-strategy or already-won position: play any legal move
            nxt = self._fallback(pid)
            return self.arena.input_valuation(nxt), ("after_env", nxt)
        move = self._choose(pid, memory)
        return self.arena.input_valuation(move[0]), move[1]

    def _fallback(self, pid: int | None) -> int:
        if pid is not None:
            moves = self.arena.env_moves(pid)
            if moves:
                return min(moves)
        return min(self.arena.legal_inputs) if self.arena.legal_inputs else 0

    def _choose(self, pid: int, memory) -> tuple[int, tuple]:
        # 1) a dead-end move wins immediately
        for i_mask, replies in sorted(self.safe_moves.get(pid, [])):
            if not replies:
                return i_mask, ("after_env", i_mask)
        # 2) walk the kill attractor when available
        if pid in self.kill_rank and self.kill_rank[pid] > 0:
            for i_mask, replies in sorted(self.safe_moves[pid]):
                if replies and all(r in self.kill_rank and
                                   self.kill_rank[r] < self.kill_rank[pid]
                                   for r in replies):
                    return i_mask, ("after_env", i_mask)
        # 3) starve a system goal while serving every env goal
        state = memory[2] if len(memory) > 2 else None
        for j, region in enumerate(self.regions):
            if pid not in region:
                continue
            e_ptr = state[1] if state and state[0] == j else 0
            dists = self.e_dist[j][e_ptr]
            if pid in self.fx.E_sets[e_ptr] or not self.fx.E_sets:
                e_ptr = (e_ptr + 1) % len(self.fx.E_sets)
                dists = self.e_dist[j][e_ptr]
            best = None
            for i_mask, replies in sorted(self.safe_moves[pid]):
                if not replies or not all(r in region for r in replies):
                    continue
                if not all(r in dists for r in replies):
                    continue
                worst = max(dists[r] for r in replies)
                if best is None or worst < best[1]:
                    best = (i_mask, worst)
            if best is not None:
                return best[0], ("after_env", best[0], (j, e_ptr))
        # 4) fall back to any w_env-preserving move
        for i_mask, replies in sorted(self.safe_moves.get(pid, [])):
            return i_mask, ("after_env", i_mask)
        return self._fallback(pid), ("after_env", self._fallback(pid))


# ---------------------------------------------------------------------------
# interactive game


@dataclass
class GameVerdict:
    ok: bool
    violated: list[GR1Conjunct] = field(default_factory=list)
    env_violated: bool = False
    error: str | None = None


class GameSession:
    """One debugging game: the tool plays inputs from the counterstrategy,
    the user plays outputs, and every system obligation is checked."""

    def __init__(self, cs: Counterstrategy, spec: GR1Spec):
        self.cs = cs
        self.spec = spec
        self.arena = cs.arena
        self.memory = cs.start()
        self.current_inputs = dict(cs.initial_move)
        self.prev_pid: int | None = None
        self.round = 0
        self.transcript: list[dict] = []

    def expected_outputs(self) -> list[str]:
        return list(self.spec.outputs)

    def check_outputs(self, outputs: dict[str, bool]) -> GameVerdict:
        missing = [a for a in self.spec.outputs if a not in outputs]
        if missing:
            raise ProtocolError(f"user move omits output atoms: {missing}")
        extra = [a for a in outputs if a not in self.spec.outputs]
        if extra:
            raise ProtocolError(f"user move sets unknown atoms: {extra}")
        i_mask = self.arena.mask_of_inputs(self.current_inputs)
        o_mask = self.arena.mask_of_outputs(outputs)
        pos = i_mask | o_mask
        violated = list(self.arena.violated_sys_conjuncts(self.prev_pid, pos))
        if self.round == 0:
            alpha = [(_compile(c.formula, self.arena.index), c)
                     for c in self.spec.alpha_s]
            violated += [c for f, c in alpha if not f(pos, 0)]
        return GameVerdict(ok=not violated, violated=violated,
                           env_violated=self.arena.env_violated_at(pos))


def simulate_machine(machine: MooreMachine, spec: GR1Spec, runs: int,
                     steps: int, seed: int = 0,
                     arena: GameArena | None = None) -> dict:
    """Drive the machine with random legal environment moves and count
    violated system obligations. Returns counters and the goal-visit trace
    of the last run."""
    import random
    rng = random.Random(seed)
    arena = arena or GameArena(spec)
    fx_goals = [_compile(c.formula, arena.index) for c in spec.gamma_s]
    violations = 0
    goal_hits = [0] * len(fx_goals)
    trace: list[int] = []
    initial_inputs = arena.initial_inputs()
    for _ in range(runs):
        state = machine.initial
        i_mask = rng.choice(initial_inputs)
        prev_pid = None
        trace = []
        for step in range(steps):
            state = machine.step(state, arena.input_valuation(i_mask))
            o_mask = arena.mask_of_outputs(machine.output_fn[state])
            pos = i_mask | o_mask
            broken = arena.violated_sys_conjuncts(prev_pid, pos)
            if step == 0:
                alpha = [_compile(c.formula, arena.index) for c in spec.alpha_s]
                broken = list(broken) + [c for f, c in
                                         zip(alpha, spec.alpha_s) if not f(pos, 0)]
            pid = arena.pid.get(pos)
            if broken or pid is None:
                violations += 1
                break
            for g, f in enumerate(fx_goals):
                if f(pos, 0):
                    goal_hits[g] += 1
            trace.append(pid)
            if pid in arena.env_violated:
                break  # assumption broken by the play; the system is off the hook
            moves = arena.env_moves(pid)
            if not moves:
                break
            i_mask = rng.choice(moves)
            prev_pid = pid
    return {"violations": violations, "goal_hits": goal_hits, "trace": trace}


def counterstrategy_refutes(cs: Counterstrategy, spec: GR1Spec, responders: int,
                            seed: int = 0, max_steps: int | None = None) -> bool:
    """Every random output responder loses within |positions| + 1 steps or
    ends up starving a system fairness goal."""
    import random
    rng = random.Random(seed)
    arena = cs.arena
    bound = (max_steps or len(arena.positions)) + 1
    goal_fns = [_compile(c.formula, arena.index) for c in spec.gamma_s]
    for _ in range(responders):
        memory = cs.start()
        inputs = dict(cs.initial_move)
        prev_pid = None
        lost = False
        goal_seen = [False] * len(goal_fns)
        for rnd in range(bound):
            i_mask = arena.mask_of_inputs(inputs)
            choices = (arena.initial_positions(i_mask) if rnd == 0 else
                       arena.sys_replies(prev_pid, i_mask))
            if not choices:
                lost = True  # no legal reply at all
                break
            pid = rng.choice(choices)
            pos = arena.positions[pid]
            for g, f in enumerate(goal_fns):
                if f(pos, 0):
                    goal_seen[g] = True
            prev_pid = pid
            outputs = {a: bool(pos >> (i + arena.n_inputs) & 1)
                       for i, a in enumerate(spec.outputs)}
            inputs, memory = cs.next_move(memory, outputs)
        if not lost and (not goal_fns or all(goal_seen)):
            return False
    return True


def game_step(cs: Counterstrategy, session: GameSession,
              user_outputs: dict[str, bool]
              ) -> tuple[GameVerdict, dict[str, bool]]:
    """Check the user's outputs, advance the environment, and return the
    verdict together with the next input valuation."""
    verdict = session.check_outputs(user_outputs)
    i_mask = session.arena.mask_of_inputs(session.current_inputs)
    o_mask = session.arena.mask_of_outputs(user_outputs)
    session.prev_pid = session.arena.pid.get(i_mask | o_mask)
    session.transcript.append({
        "round": session.round,
        "inputs": dict(session.current_inputs),
        "outputs": {a: bool(user_outputs[a]) for a in session.spec.outputs},
        "ok": verdict.ok,
        "violated": [c.origin for c in verdict.violated],
    })
    next_inputs, session.memory = cs.next_move(session.memory, user_outputs)
    session.current_inputs = dict(next_inputs)
    session.round += 1
    return verdict, next_inputs
