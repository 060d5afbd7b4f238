"""LTL abstract syntax, pretty printer, parser and normalization.

Two layers share one node family: typed formulas whose atoms compare a
variable against a value or another variable, and propositional formulas
whose atoms are bare `Prop` names (the output of bit encoding).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError


# ---------------------------------------------------------------------------
# values and variable references

@dataclass(frozen=True)
class VarRef:
    """Variable identifier with an optional record-field path."""

    name: str
    path: tuple[str, ...] = ()

    def text(self) -> str:
        return ".".join((self.name,) + self.path)

    def base(self) -> str:
        return self.name


@dataclass(frozen=True)
class EnumVal:
    name: str

    def text(self) -> str:
        return self.name


@dataclass(frozen=True)
class BoolVal:
    value: bool

    def text(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class IntVal:
    value: int

    def text(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class ExprVal:
    """Opaque arithmetic expression recovered from an encoded token."""

    text_: str

    def text(self) -> str:
        return "[" + self.text_ + "]"


Value = EnumVal | BoolVal | IntVal | ExprVal

CMP_OPS = ("<", ">", "<=", ">=")


# ---------------------------------------------------------------------------
# formula nodes

class Formula:
    pass


@dataclass(frozen=True)
class Prop(Formula):
    """Bare propositional atom (post-encoding layer)."""

    name: str


@dataclass(frozen=True)
class Atom(Formula):
    var: VarRef
    op: str  # '=', '<', '>', '<=', '>='
    rhs: VarRef | Value


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        assert len(self.children) >= 2


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        assert len(self.children) >= 2


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class G(Formula):
    child: Formula


@dataclass(frozen=True)
class F(Formula):
    child: Formula


@dataclass(frozen=True)
class X(Formula):
    child: Formula


def conj(children) -> Formula:
    cs = tuple(children)
    if not cs:
        raise ValueError("empty conjunction")
    return cs[0] if len(cs) == 1 else And(cs)


def disj(children) -> Formula:
    cs = tuple(children)
    if not cs:
        raise ValueError("empty disjunction")
    return cs[0] if len(cs) == 1 else Or(cs)


def walk(f: Formula):
    """Yield every node of the AST, parents before children."""
    yield f
    if isinstance(f, (Not, G, F, X)):
        yield from walk(f.child)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from walk(c)
    elif isinstance(f, Implies):
        yield from walk(f.lhs)
        yield from walk(f.rhs)


def atoms_of(f: Formula):
    return [n for n in walk(f) if isinstance(n, (Atom, Prop))]


def variables_of(f: Formula) -> set[VarRef]:
    out: set[VarRef] = set()
    for a in atoms_of(f):
        if isinstance(a, Atom):
            out.add(a.var)
            if isinstance(a.rhs, VarRef):
                out.add(a.rhs)
    return out


# ---------------------------------------------------------------------------
# printing

def to_text(f: Formula) -> str:
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Atom):
        rhs = f.rhs.text()
        return f"{f.var.text()} {f.op} {rhs}"
    if isinstance(f, Not):
        return f"NOT({to_text(f.child)})"
    if isinstance(f, And):
        return " AND ".join(_wrap(c) for c in f.children)
    if isinstance(f, Or):
        return " OR ".join(_wrap(c) for c in f.children)
    if isinstance(f, Implies):
        return f"{_paren(f.lhs)} => {_paren(f.rhs)}"
    if isinstance(f, G):
        return f"G({to_text(f.child)})"
    if isinstance(f, F):
        return f"F({to_text(f.child)})"
    if isinstance(f, X):
        return f"X({to_text(f.child)})"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula) -> str:
    # atoms read fine bare inside AND/OR chains; nested juncts need parens
    if isinstance(f, (And, Or, Implies)):
        return f"({to_text(f)})"
    return to_text(f)


def _paren(f: Formula) -> str:
    if isinstance(f, (Not, G, F, X, Prop)):
        return to_text(f)
    return f"({to_text(f)})"


# ---------------------------------------------------------------------------
# parsing

_KEYWORD_OPS = {"AND": "AND", "OR": "OR", "NOT": "NOT", "G": "G", "F": "F", "X": "X"}


def _tokenize(text: str) -> list[str]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()":
            out.append(ch)
            i += 1
            continue
        if text.startswith("=>", i) or text.startswith("->", i):
            out.append("=>")
            i += 2
            continue
        if text.startswith("<=", i) or text.startswith(">=", i):
            out.append(text[i:i + 2])
            i += 2
            continue
        if ch in "=<>":
            out.append(ch)
            i += 1
            continue
        if ch == "&":
            out.append("AND")
            i += 1
            continue
        if ch == "|":
            out.append("OR")
            i += 1
            continue
        if ch == "!":
            out.append("NOT")
            i += 1
            continue
        j = i
        while j < len(text) and (text[j].isalnum() or text[j] in "_."):
            j += 1
        if j == i:
            raise ParseError(f"unexpected character {ch!r} in formula", position=i)
        out.append(text[i:j])
        i = j
    return out


class _Parser:
    """Recursive descent over the printer's surface syntax.

    Also accepts `&`, `|`, `!`, `->` spellings and the `cmp = true` form
    that wraps a comparison in a boolean equation.
    """

    def __init__(self, tokens: list[str], variables: set[str] | None = None):
        self.toks = tokens
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula")
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", position=self.i)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implies()
        if self.peek() is not None:
            raise ParseError(f"trailing tokens in formula: {self.toks[self.i:]}",
                             position=self.i)
        return f

    def implies(self) -> Formula:
        lhs = self.or_()
        if self.peek() == "=>":
            self.take()
            return Implies(lhs, self.implies())
        return lhs

    def or_(self) -> Formula:
        parts = [self.and_()]
        while self.peek() == "OR":
            self.take()
            parts.append(self.and_())
        return disj(parts)

    def and_(self) -> Formula:
        parts = [self.unary()]
        while self.peek() == "AND":
            self.take()
            parts.append(self.unary())
        return conj(parts)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "NOT":
            self.take()
            return Not(self.unary())
        if tok in ("G", "F", "X"):
            nxt = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
            # G/F/X are also legal identifier starts; treat as operator only
            # when followed by something that can begin a formula
            if nxt == "(" or nxt in _KEYWORD_OPS or (nxt is not None and _is_word(nxt)):
                self.take()
                cls = {"G": G, "F": F, "X": X}[tok]
                return cls(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        if self.peek() == "(":
            self.take()
            f = self.implies()
            self.take(")")
            return self._bool_suffix(f)
        return self.atom()

    def _bool_suffix(self, f: Formula) -> Formula:
        # `(x < y) = true` and `(x < y) = false` collapse onto the comparison
        if self.peek() == "=" and self.i + 1 < len(self.toks) and \
                self.toks[self.i + 1].lower() in ("true", "false"):
            self.take()
            val = self.take().lower() == "true"
            return f if val else Not(f)
        return f

    def atom(self) -> Formula:
        tok = self.take()
        if not _is_word(tok):
            raise ParseError(f"expected identifier, found {tok!r}", position=self.i - 1)
        if tok.lower() in ("true", "false"):
            raise ParseError("bare boolean constant is not a formula")
        var = _varref(tok)
        op = self.peek()
        if op in ("=",) + CMP_OPS:
            self.take()
            rhs_tok = self.take()
            atom = Atom(var, op, self._operand(rhs_tok, op))
            if op in CMP_OPS:
                return self._bool_suffix(atom)
            return atom
        return Prop(tok)

    def _operand(self, tok: str, op: str) -> VarRef | Value:
        if tok.lower() == "true":
            return BoolVal(True)
        if tok.lower() == "false":
            return BoolVal(False)
        if tok.lstrip("-").isdigit():
            return IntVal(int(tok))
        if op in CMP_OPS:
            return _varref(tok)
        if self.variables is not None and tok.split(".")[0] in self.variables:
            return _varref(tok)
        return EnumVal(tok)


def _is_word(tok: str) -> bool:
    return bool(tok) and (tok[0].isalpha() or tok[0] == "_")


def _varref(tok: str) -> VarRef:
    parts = tok.split(".")
    return VarRef(parts[0], tuple(parts[1:]))


def parse_formula(text: str, variables: set[str] | None = None) -> Formula:
    """Parse a formula in the printer's surface syntax.

    `variables` names identifiers that should read as variable references
    when they appear on the right of `=`; everything else is a named value.
    """
    return _Parser(_tokenize(text), variables).parse()


# ---------------------------------------------------------------------------
# normalization and negation normal form

def normalize(f: Formula) -> Formula:
    """Canonical form for syntactic comparison.

    AND/OR chains are flattened, deduplicated and sorted by printed text,
    double negation is removed, and boolean literals are case-folded by
    construction. Comparisons equated with `true` are already collapsed by
    the parser.
    """
    if isinstance(f, (Prop, Atom)):
        return f
    if isinstance(f, Not):
        c = normalize(f.child)
        if isinstance(c, Not):
            return c.child
        return Not(c)
    if isinstance(f, (And, Or)):
        cls = type(f)
        flat: list[Formula] = []
        for c in f.children:
            cn = normalize(c)
            if isinstance(cn, cls):
                flat.extend(cn.children)
            else:
                flat.append(cn)
        uniq: dict[str, Formula] = {}
        for c in flat:
            uniq.setdefault(to_text(c), c)
        ordered = [uniq[k] for k in sorted(uniq)]
        return ordered[0] if len(ordered) == 1 else cls(tuple(ordered))
    if isinstance(f, Implies):
        return Implies(normalize(f.lhs), normalize(f.rhs))
    if isinstance(f, G):
        return G(normalize(f.child))
    if isinstance(f, F):
        return F(normalize(f.child))
    if isinstance(f, X):
        return X(normalize(f.child))
    raise TypeError(f"not a formula: {f!r}")


def equivalent(a: Formula, b: Formula) -> bool:
    return normalize(a) == normalize(b)


def nnf(f: Formula, negated: bool = False) -> Formula:
    """Push negations down to atoms; expand implications."""
    if isinstance(f, (Prop, Atom)):
        return Not(f) if negated else f
    if isinstance(f, Not):
        return nnf(f.child, not negated)
    if isinstance(f, And):
        kids = tuple(nnf(c, negated) for c in f.children)
        return Or(kids) if negated else And(kids)
    if isinstance(f, Or):
        kids = tuple(nnf(c, negated) for c in f.children)
        return And(kids) if negated else Or(kids)
    if isinstance(f, Implies):
        if negated:
            return And((nnf(f.lhs), nnf(f.rhs, True)))
        return Or((nnf(f.lhs, True), nnf(f.rhs)))
    if isinstance(f, G):
        return F(nnf(f.child, True)) if negated else G(nnf(f.child))
    if isinstance(f, F):
        return G(nnf(f.child, True)) if negated else F(nnf(f.child))
    if isinstance(f, X):
        return X(nnf(f.child, negated))
    raise TypeError(f"not a formula: {f!r}")
