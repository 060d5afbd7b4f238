"""Transition-system assembly from placed formulas and SAL-style text I/O.

Placement heuristics: an explicitly temporal sentence is a theorem; an
assignment to a state variable is a guarded transition; a formula with no
global wrapper came from an initialization root; everything else constrains
a wire (or output) combinationally in the DEFINITION section.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import ModelError, PlacementError
from .infer import SymbolTable
from .ltl import (And, Atom, BoolVal, EnumVal, Formula, G, Implies,
                  Not, Or, VarRef, X, atoms_of, parse_formula, to_text)


class Placement(Enum):
    Theorem = "theorem"
    Transition = "transition"
    Initialization = "initialization"
    Definition = "definition"


def assigned_variable(f: Formula) -> VarRef | None:
    """Variable constrained by the formula's consequent (or by the whole
    formula when unconditional)."""
    body = f.child if isinstance(f, G) else f
    cons = body.rhs if isinstance(body, Implies) else body
    while isinstance(cons, X):
        cons = cons.child
    for a in atoms_of(cons):
        if isinstance(a, Atom):
            return a.var
    return None


def place_formula(f: Formula, symbols: SymbolTable,
                  explicit_temporal: bool = False) -> Placement:
    if explicit_temporal:
        return Placement.Theorem
    var = assigned_variable(f)
    if var is None:
        return Placement.Theorem
    category = symbols.category.get(var.base(), "wire")
    if category == "input":
        raise PlacementError(
            f"formula assigns input variable {var.text()}")
    if not isinstance(f, G):
        return Placement.Initialization
    if category in ("state_only", "state_and_output"):
        return Placement.Transition
    return Placement.Definition


def demote_defined_inputs(formulas, symbols: SymbolTable) -> list[str]:
    """Variables declared input but defined by a requirement become wires.

    Returns discrepancy warnings; mutates the symbol table's category map.
    """
    warnings = []
    for item in formulas:
        f, origin = item if isinstance(item, tuple) else (item, "?")
        var = assigned_variable(f)
        if var is not None and symbols.category.get(var.base()) == "input":
            symbols.category[var.base()] = "wire"
            warnings.append(
                f"{var.base()} is declared as an input but {origin} defines it; "
                "treating it as a wire")
    return warnings


@dataclass(frozen=True)
class DefinitionEntry:
    var: str
    guard: Formula | None
    value: Formula  # the defining atom, e.g. Regulator_Interface_Failure = true
    origin: str = ""


@dataclass(frozen=True)
class TransitionEntry:
    guard: Formula
    var: str
    value: str
    origin: str = ""


@dataclass(frozen=True)
class InitEntry:
    var: str
    value: str
    origin: str = ""


@dataclass
class TransitionModel:
    name: str
    symbols: SymbolTable
    definitions: list[DefinitionEntry] = field(default_factory=list)
    initializations: list[InitEntry] = field(default_factory=list)
    transitions: list[TransitionEntry] = field(default_factory=list)
    theorems: list[Formula] = field(default_factory=list)

    def structural_key(self):
        # definitions render grouped by wire, so their list order is free
        return (
            sorted((d.var, _txt(d.guard), _txt(d.value)) for d in self.definitions),
            [(i.var, i.value) for i in self.initializations],
            [(t.var, _txt(t.guard), t.value) for t in self.transitions],
            [to_text(t) for t in self.theorems],
        )


def _txt(f):
    return None if f is None else to_text(f)


def _value_text(v) -> str:
    if isinstance(v, BoolVal):
        return "TRUE" if v.value else "FALSE"
    return v.text() if hasattr(v, "text") else str(v)


def _split(f: Formula):
    body = f.child if isinstance(f, G) else f
    if isinstance(body, Implies):
        guard, cons = body.lhs, body.rhs
    else:
        guard, cons = None, body
    while isinstance(cons, X):
        cons = cons.child
    return guard, cons


def emit_model(placed: list[tuple[Formula, Placement, str]],
               symbols: SymbolTable, name: str = "model_1"
               ) -> tuple[TransitionModel, str]:
    """Assemble the model and render its context text."""
    model = TransitionModel(name, symbols)
    for f, placement, origin in placed:
        guard, cons = _split(f)
        if placement is Placement.Theorem:
            model.theorems.append(f)
            continue
        atom = next((a for a in atoms_of(cons) if isinstance(a, Atom)), None)
        if atom is None:
            raise ModelError(f"{origin}: cannot find an assignment in {to_text(f)}")
        if placement is Placement.Initialization:
            for prev in model.initializations:
                if prev.var == atom.var.text() and prev.value != _value_text(atom.rhs):
                    raise ModelError(
                        f"conflicting initializations for {prev.var}: "
                        f"{prev.value} ({prev.origin}) vs {_value_text(atom.rhs)} ({origin})")
            model.initializations.append(
                InitEntry(atom.var.text(), _value_text(atom.rhs), origin))
        elif placement is Placement.Transition:
            if guard is None:
                raise ModelError(f"{origin}: transition without a guard")
            model.transitions.append(
                TransitionEntry(guard, atom.var.text(), _value_text(atom.rhs), origin))
        else:
            model.definitions.append(
                DefinitionEntry(atom.var.text(), guard, cons, origin))
    return model, render_model(model)


# ---------------------------------------------------------------------------
# text rendering


def _model_formula_text(f: Formula) -> str:
    # SAL-style text spells boolean literals in upper case
    return re.sub(r"\b(true|false)\b", lambda m: m.group(1).upper(), to_text(f))


def _type_name(info) -> str:
    if info.enum_values:
        return None  # named enum type, handled by caller
    if info.numeric and not info.boolean:
        return "INTEGER"
    return "BOOLEAN"


def render_model(model: TransitionModel) -> str:
    sym = model.symbols
    lines = [f"{model.name} : CONTEXT =", "BEGIN"]
    decls: dict[str, str] = {}
    enum_types: dict[str, list[str]] = {}
    record_types: dict[str, dict[str, str]] = {}

    def type_of(ref: VarRef) -> str:
        info = sym.info_for(ref)
        if info.enum_values:
            tname = f"{ref.text().replace('.', '_')}_TYPE"
            enum_types[tname] = list(info.enum_values)
            return tname
        return _type_name(info)

    for base in sorted(sym.category):
        fields = sym.records.get(base)
        if fields:
            tname = f"{base}_RECORD"
            record_types[tname] = {fpath: type_of(ref)
                                   for fpath, ref in sorted(fields.items())}
            decls[base] = tname
        else:
            decls[base] = type_of(VarRef(base))

    for tname, values in sorted(enum_types.items()):
        lines.append(f"  {tname} : TYPE = {{{', '.join(values)}}};")
    for tname, fields in sorted(record_types.items()):
        body = ", ".join(f"{f} : {t}" for f, t in fields.items())
        lines.append(f"  {tname} : TYPE = [# {body} #];")
    lines += ["", "  main : MODULE =", "  BEGIN"]

    role_for = {"input": "INPUT", "state_and_output": "OUTPUT", "state_only": "LOCAL",
                "output_only": "OUTPUT", "wire": "LOCAL"}
    for base in sorted(sym.category):
        lines.append(f"    {role_for[sym.category[base]]} {base} : {decls[base]}")

    if model.definitions:
        lines.append("    DEFINITION")
        by_wire: dict[str, list[DefinitionEntry]] = {}
        for d in model.definitions:
            by_wire.setdefault(d.var, []).append(d)
        for wire in sorted(by_wire):
            entries = by_wire[wire]
            ztype = decls.get(wire.split(".")[0], "BOOLEAN")
            parts = []
            for d in entries:
                value = re.sub(rf"\b{re.escape(wire)}\b", "Z",
                               _model_formula_text(d.value), count=1)
                if d.guard is None:
                    parts.append(value)
                else:
                    parts.append(f"{_model_formula_text(d.guard)} => {value}")
            if len(parts) == 1:
                constraint = parts[0]
            else:
                constraint = " AND ".join(f"({p})" for p in parts)
            lines.append(f"      {wire} IN {{Z : {ztype} | {constraint}}};")

    if model.initializations:
        lines.append("    INITIALIZATION")
        for init in model.initializations:
            lines.append(f"      {init.var} = {init.value};")

    lines.append("    TRANSITION")
    lines.append("    [")
    for i, tr in enumerate(model.transitions):
        if i:
            lines.append("      []")
        lines.append(f"      {_model_formula_text(tr.guard)} --> {tr.var}' = {tr.value}")
    if model.transitions:
        lines.append("      []")
    lines.append("      ELSE -->")
    lines.append("    ]")

    for theorem in model.theorems:
        lines.append(f"    THEOREM main |- {_model_formula_text(theorem)};")
    lines += ["  END;", "END"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# text parsing (round trip)


def parse_model(text: str, symbols: SymbolTable) -> TransitionModel:
    """Re-parse rendered context text into a structural TransitionModel."""
    name = text.split(":", 1)[0].strip()
    model = TransitionModel(name, symbols)
    variables = {line.split(":")[0].split()[-1]
                 for line in text.splitlines()
                 if re.match(r"\s*(INPUT|OUTPUT|LOCAL)\s", line)}

    lowered = _lower_bools(text)
    for m in re.finditer(r"(\w[\w.]*) IN \{Z : \w+ \| (.*?)\};", lowered, re.S):
        wire, constraint = m.group(1), " ".join(m.group(2).split())
        parts = [p.strip() for p in _split_top_and(constraint)]
        for part in parts:
            part = part[1:-1] if part.startswith("(") and part.endswith(")") else part
            if "=>" in part:
                guard_text, value_text = part.split("=>", 1)
                guard = parse_formula(guard_text.strip(), variables)
            else:
                guard, value_text = None, part
            value_text = re.sub(r"\bZ\b", wire, value_text.strip(), count=1)
            value = parse_formula(value_text, variables)
            model.definitions.append(DefinitionEntry(wire, guard, value))

    init_block = re.search(r"INITIALIZATION\n(.*?)\n\s*TRANSITION", lowered, re.S)
    if init_block:
        for line in init_block.group(1).splitlines():
            line = line.strip().rstrip(";")
            if line:
                var, value = [s.strip() for s in line.split("=", 1)]
                model.initializations.append(InitEntry(var, _upper_bool(value)))

    tr_block = re.search(r"TRANSITION\n\s*\[\n(.*?)\n\s*\]", lowered, re.S)
    if tr_block:
        for cmd in re.split(r"\n\s*\[\]\n", tr_block.group(1)):
            cmd = cmd.strip()
            if not cmd or cmd.startswith("ELSE"):
                continue
            guard_text, assign = cmd.split("-->", 1)
            var, value = [s.strip() for s in assign.split("=", 1)]
            model.transitions.append(TransitionEntry(
                parse_formula(guard_text.strip(), variables),
                var.rstrip("'"), _upper_bool(value)))

    for m in re.finditer(r"THEOREM \w+ \|- (.*?);", lowered):
        model.theorems.append(parse_formula(m.group(1), variables))
    return model


def _lower_bools(text: str) -> str:
    return re.sub(r"\b(TRUE|FALSE)\b", lambda m: m.group(1).lower(), text)


def _upper_bool(value: str) -> str:
    return value.upper() if value.lower() in ("true", "false") else value


def _split_top_and(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    i = 0
    while i < len(text):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
        if depth == 0 and text[i:i + 5] == " AND " :
            parts.append(cur)
            cur = ""
            i += 5
            continue
        cur += text[i]
        i += 1
    parts.append(cur)
    return parts


# ---------------------------------------------------------------------------
# nondeterminism detection


@dataclass(frozen=True)
class Overlap:
    first_origin: str
    second_origin: str
    witness: dict
    distinct_atoms: tuple[str, ...]


def detect_nondeterminism(model: TransitionModel) -> list[Overlap]:
    """Pairs of transitions on one variable whose guards can hold together
    while commanding different next values."""
    out = []
    for a, b in itertools.combinations(model.transitions, 2):
        if a.var != b.var or a.value == b.value:
            continue
        witness = _joint_witness(a.guard, b.guard, model.symbols)
        if witness is None:
            continue
        atoms_a = {to_text(x) for x in atoms_of(a.guard)}
        atoms_b = {to_text(x) for x in atoms_of(b.guard)}
        distinct = tuple(sorted(atoms_a.symmetric_difference(atoms_b)))
        out.append(Overlap(a.origin, b.origin, witness, distinct))
    return out


def _domain(ref: VarRef, symbols: SymbolTable):
    info = symbols.info_for(ref)
    if info.enum_values:
        return [EnumVal(v) for v in info.enum_values]
    return [BoolVal(False), BoolVal(True)]


def _joint_witness(g1: Formula, g2: Formula, symbols: SymbolTable):
    both = And((g1, g2))
    eq_refs = sorted({a.var for a in atoms_of(both)
                      if isinstance(a, Atom) and a.op == "="},
                     key=lambda v: v.text())
    cmp_atoms = sorted({a for a in atoms_of(both)
                        if isinstance(a, Atom) and a.op != "="},
                       key=to_text)
    domains = [_domain(r, symbols) for r in eq_refs] + [[False, True]] * len(cmp_atoms)
    for combo in itertools.product(*domains):
        env = dict(zip(eq_refs, combo[:len(eq_refs)]))
        cmp_env = dict(zip(cmp_atoms, combo[len(eq_refs):]))
        if _eval_typed(both, env, cmp_env):
            witness = {r.text(): v.text() for r, v in env.items()}
            witness.update({to_text(a): v for a, v in cmp_env.items()})
            return witness
    return None


def _eval_typed(f: Formula, env, cmp_env) -> bool:
    if isinstance(f, Atom):
        if f.op != "=":
            return cmp_env[f]  # comparison atoms are free booleans here
        val = env[f.var]
        return val == f.rhs or (isinstance(val, EnumVal) and isinstance(f.rhs, EnumVal)
                                and val.name == f.rhs.name)
    if isinstance(f, Not):
        return not _eval_typed(f.child, env, cmp_env)
    if isinstance(f, And):
        return all(_eval_typed(c, env, cmp_env) for c in f.children)
    if isinstance(f, Or):
        return any(_eval_typed(c, env, cmp_env) for c in f.children)
    if isinstance(f, Implies):
        return (not _eval_typed(f.lhs, env, cmp_env)) or _eval_typed(f.rhs, env, cmp_env)
    raise ModelError(f"guard is not a boolean-state formula: {to_text(f)}")
