"""Type evidence gathering and union-find merging into equivalence classes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import VariablePartition
from .ltl import (Atom, BoolVal, EnumVal, ExprVal, Formula, IntVal, VarRef,
                  atoms_of)

CMP = ("<", ">", "<=", ">=")


@dataclass(frozen=True)
class TypeEvidence:
    subject: VarRef
    kind: str                   # IsNumber | HasEnumValue | SameTypeAs | IsBool
    value: str | None = None    # enum member name for HasEnumValue
    other: VarRef | None = None  # partner for SameTypeAs


def gather_evidence(formulas: list[Formula]) -> list[TypeEvidence]:
    """One evidence item per matching atom, in formula order."""
    out: list[TypeEvidence] = []
    for f in formulas:
        for a in atoms_of(f):
            if not isinstance(a, Atom):
                continue
            if a.op in CMP:
                out.append(TypeEvidence(a.var, "IsNumber"))
                if isinstance(a.rhs, VarRef):
                    out.append(TypeEvidence(a.rhs, "IsNumber"))
                continue
            rhs = a.rhs
            if isinstance(rhs, (IntVal, ExprVal)):
                out.append(TypeEvidence(a.var, "IsNumber"))
            elif isinstance(rhs, BoolVal):
                out.append(TypeEvidence(a.var, "IsBool"))
            elif isinstance(rhs, EnumVal):
                out.append(TypeEvidence(a.var, "HasEnumValue", value=rhs.name))
            elif isinstance(rhs, VarRef):
                out.append(TypeEvidence(a.var, "SameTypeAs", other=rhs))
    return out


@dataclass
class ClassInfo:
    """Inferred type of one equivalence class of variables."""

    members: list[VarRef] = field(default_factory=list)
    numeric: bool = False
    boolean: bool = False
    enum_values: list[str] = field(default_factory=list)
    conflict: bool = False

    def kind(self) -> str:
        if self.enum_values:
            return "Enum"
        if self.boolean:
            return "Bool"
        if self.numeric:
            return "Numeric"
        return "Bool"  # untyped variables default to boolean flags


CATEGORIES = ("input", "state_only", "state_and_output", "output_only", "wire")


class SymbolTable:
    """Equivalence classes with inferred types plus per-variable categories."""

    def __init__(self):
        self._parent: dict[VarRef, VarRef] = {}
        self.class_info: dict[VarRef, ClassInfo] = {}
        self.category: dict[str, str] = {}
        self.records: dict[str, dict[str, VarRef]] = {}

    # union-find over variable references
    def _find(self, v: VarRef) -> VarRef:
        self._parent.setdefault(v, v)
        root = v
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[v] != root:
            self._parent[v], v = root, self._parent[v]
        return root

    def _union(self, a: VarRef, b: VarRef) -> VarRef:
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return ra
        # keep the lexicographically smaller representative: deterministic
        if rb.text() < ra.text():
            ra, rb = rb, ra
        self._parent[rb] = ra
        ia, ib = self.class_info[ra], self.class_info[rb]
        ia.members = sorted(set(ia.members + ib.members), key=lambda m: m.text())
        ia.numeric |= ib.numeric
        ia.boolean |= ib.boolean
        for v in ib.enum_values:
            if v not in ia.enum_values:
                ia.enum_values.append(v)
        del self.class_info[rb]
        return ra

    def _touch(self, v: VarRef):
        root = self._find(v)
        info = self.class_info.setdefault(root, ClassInfo())
        if v not in info.members:
            info.members.append(v)
        return info

    def info_for(self, v: VarRef) -> ClassInfo:
        return self.class_info[self._find(v)]

    def classes(self) -> list[ClassInfo]:
        return [self.class_info[k] for k in sorted(self.class_info, key=lambda r: r.text())]

    def variables(self) -> list[VarRef]:
        return sorted(self._parent, key=lambda v: v.text())

    def category_of(self, v: VarRef | str) -> str:
        name = v.base() if isinstance(v, VarRef) else name_base(v)
        return self.category[name]

    def to_json(self) -> str:
        classes = []
        for info in self.classes():
            classes.append({
                "members": [m.text() for m in info.members],
                "type": info.kind(),
                "enum_values": info.enum_values,
                "numeric": info.numeric,
                "boolean": info.boolean,
                "conflict": info.conflict,
            })
        return json.dumps({
            "classes": classes,
            "categories": dict(sorted(self.category.items())),
            "records": {b: {f: m.text() for f, m in fs.items()}
                        for b, fs in sorted(self.records.items())},
        }, indent=2)


def name_base(name: str) -> str:
    return name.split(".")[0]


def merge_types(evidence: list[TypeEvidence], partition: VariablePartition
                ) -> tuple[SymbolTable, list[str]]:
    """Union classes by evidence; enum value order is first occurrence.

    Conflicting evidence (numeric vs enum, bool vs enum, numeric vs bool)
    keeps both annotations, flags the class and emits a warning. Category
    assignment follows the declared partition; everything else is a wire.
    """
    table = SymbolTable()
    warnings: list[str] = []
    for ev in evidence:
        info = table._touch(ev.subject)
        if ev.kind == "IsNumber":
            info.numeric = True
        elif ev.kind == "IsBool":
            info.boolean = True
        elif ev.kind == "HasEnumValue":
            if ev.value not in info.enum_values:
                info.enum_values.append(ev.value)
        elif ev.kind == "SameTypeAs":
            table._touch(ev.other)
            table._union(ev.subject, ev.other)

    for root, info in sorted(table.class_info.items(), key=lambda kv: kv[0].text()):
        flags = [info.numeric, info.boolean, bool(info.enum_values)]
        if sum(flags) > 1:
            info.conflict = True
            names = ", ".join(m.text() for m in info.members)
            warnings.append(f"type conflict for {{{names}}}: "
                            f"numeric={info.numeric} boolean={info.boolean} "
                            f"enum={info.enum_values}")

    declared = partition.all_declared()
    for v in table.variables():
        base = v.base()
        if base in partition.inputs:
            table.category[base] = "input"
        elif base in partition.state_and_output:
            table.category[base] = "state_and_output"
        elif base in partition.pure_output:
            table.category[base] = "output_only"
        else:
            table.category[base] = "wire"
        if v.path:
            table.records.setdefault(base, {})[".".join(v.path)] = v
    for name in sorted(declared):
        table.category.setdefault(
            name, "input" if name in partition.inputs else
            "state_and_output" if name in partition.state_and_output else "output_only")
        table._touch(VarRef(name))
    return table, warnings
