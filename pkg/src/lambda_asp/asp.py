"""ASP fragment used for logic-grid puzzles.

Covers domain facts, the generation module, background definitions and clue
constraints, with a text serializer/parser for the concrete ASP syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from . import terms as lt

__all__ = [
    "Variable", "Constant", "Offset", "Range", "Literal", "Comparison",
    "Fact", "Constraint", "ChoiceRule", "DefRule", "AspRule", "PuzzleDomain",
    "DomainError", "AspSyntaxError", "encode_domain", "generation_module",
    "background_module", "serialize", "serialize_rule", "parse_rule",
    "parse_program", "validate_rule", "rule_from_term", "term_from_rule",
    "variables_of", "constants_of", "PREDICATE_ARITIES",
]


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Constant:
    value: Union[str, int]

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Offset:
    base: Variable
    delta: int

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("zero offset; use the variable itself")

    def __str__(self):
        return f"{self.base}{'+' if self.delta > 0 else '-'}{abs(self.delta)}"


@dataclass(frozen=True)
class Range:
    lo: int
    hi: int

    def __str__(self):
        return f"{self.lo}..{self.hi}"


AspTerm = Union[Variable, Constant, Offset, Range]


@dataclass(frozen=True)
class Literal:
    pred: str
    args: tuple = ()
    negated: bool = False

    def __str__(self):
        return self.text()

    def text(self, sep=", "):
        s = self.pred
        if self.args:
            s += "(" + sep.join(str(a) for a in self.args) + ")"
        return ("not " + s) if self.negated else s


@dataclass(frozen=True)
class Comparison:
    left: AspTerm
    op: str
    right: AspTerm

    def __str__(self):
        bare = not isinstance(self.left, Offset) and not isinstance(self.right, Offset)
        if self.op == "!=" and bare:
            return f"{self.left}!={self.right}"
        return f"{self.left} {self.op} {self.right}"


BodyItem = Union[Literal, Comparison]


@dataclass(frozen=True)
class Fact:
    atom: Literal


@dataclass(frozen=True)
class Constraint:
    body: tuple


@dataclass(frozen=True)
class ChoiceRule:
    head: Literal
    condition: Literal
    body: tuple = ()
    lower: int = 1
    upper: int = 1


@dataclass(frozen=True)
class DefRule:
    head: Literal
    body: tuple


AspRule = Union[Fact, Constraint, ChoiceRule, DefRule]

# predicate name -> admissible arities
PREDICATE_ARITIES = {
    "index": {1}, "eindex": {1}, "etype": {2}, "element": {2}, "tuple": {2},
    "notmax": {2}, "maximum": {2}, "notmin": {2}, "minimum": {2},
    "lowest": {1, 2}, "highest": {1, 2}, "first": {1, 2},
}


class DomainError(ValueError):
    pass


class AspSyntaxError(ValueError):
    def __init__(self, msg, text, pos):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos


def _const(value) -> Constant:
    if isinstance(value, str) and re.fullmatch(r"-?\d+", value):
        value = int(value)
    return Constant(value)


@dataclass(frozen=True)
class PuzzleDomain:
    """Element types with their elements, in index order.

    ``comparable`` names the type whose values are ordered (``rank`` unless
    configured otherwise); ``aliases`` are extra type names clues may use for
    it, e.g. ``time``.
    """
    types: tuple  # ((type_name, (element, ...)), ...)
    comparable: Optional[str] = "rank"
    aliases: tuple = ()

    def __post_init__(self):
        types = tuple((name, tuple(_const(e).value for e in elems)) for name, elems in self.types)
        object.__setattr__(self, "types", types)
        if not types:
            raise DomainError("domain has no element types")
        sizes = {len(elems) for _, elems in types}
        if len(sizes) != 1:
            raise DomainError(f"ragged domain: types have sizes {sorted(sizes)}")
        names = [name for name, _ in types]
        if len(set(names)) != len(names):
            raise DomainError("duplicate type name")
        for name, elems in types:
            if len(set(elems)) != len(elems):
                dup = next(e for e in elems if elems.count(e) > 1)
                raise DomainError(f"duplicate element {dup!r} in type {name!r}")

    @property
    def m(self) -> int:
        return len(self.types)

    @property
    def n(self) -> int:
        return len(self.types[0][1])

    def type_index(self, name: str) -> int:
        for i, (t, _) in enumerate(self.types, 1):
            if t == name:
                return i
        raise KeyError(name)

    @property
    def fixed_type(self) -> int:
        """Index of the type pinned by ``tuple(i, e_i)`` facts.

        Falls back to the first type when no comparable type exists.
        """
        if self.comparable is not None:
            try:
                return self.type_index(self.comparable)
            except KeyError:
                pass
        return 1

    @property
    def has_comparable(self) -> bool:
        return self.comparable is not None and any(t == self.comparable for t, _ in self.types)

    def elements(self, index: int) -> tuple:
        return self.types[index - 1][1]

    def all_elements(self) -> set:
        return {e for _, elems in self.types for e in elems}


# ---------------------------------------------------------------------------
# program modules

def encode_domain(d: PuzzleDomain) -> list:
    rules = [
        Fact(Literal("index", (Range(1, d.m),))),
        Fact(Literal("eindex", (Range(1, d.n),))),
    ]
    for i, (name, elems) in enumerate(d.types, 1):
        rules.append(Fact(Literal("etype", (Constant(i), Constant(name)))))
        for e in elems:
            rules.append(Fact(Literal("element", (Constant(i), Constant(e)))))
    for k, e in enumerate(d.elements(d.fixed_type), 1):
        rules.append(Fact(Literal("tuple", (Constant(k), Constant(e)))))
    return rules


def _v(*names):
    return tuple(Variable(n) for n in names)


def generation_module() -> list:
    I, X, A, J, K = _v("I", "X", "A", "J", "K")
    choice = ChoiceRule(
        head=Literal("tuple", (I, X)),
        condition=Literal("element", (A, X)),
        body=(Literal("eindex", (I,)), Literal("index", (A,))),
    )
    exclusive = Constraint((
        Literal("tuple", (I, X)), Literal("tuple", (J, X)),
        Literal("element", (K, X)), Comparison(I, "!=", J),
    ))
    return [choice, exclusive]


def background_module(comparable: str = "rank") -> list:
    A, X, Y = _v("A", "X", "Y")

    def el(a, x):
        return Literal("element", (a, x))

    rules = [
        DefRule(Literal("notmax", (A, X)),
                (el(A, X), el(A, Y), Comparison(X, "!=", Y), Comparison(Y, ">", X))),
        DefRule(Literal("maximum", (A, X)),
                (Literal("notmax", (A, X), negated=True), el(A, X))),
        DefRule(Literal("notmin", (A, X)),
                (el(A, X), el(A, Y), Comparison(X, "!=", Y), Comparison(Y, "<", X))),
        DefRule(Literal("minimum", (A, X)),
                (Literal("notmin", (A, X), negated=True), el(A, X))),
        DefRule(Literal("highest", (A, X)), (Literal("maximum", (A, X)),)),
        DefRule(Literal("lowest", (A, X)), (Literal("minimum", (A, X)),)),
        DefRule(Literal("first", (A, X)), (Literal("minimum", (A, X)),)),
    ]
    for name in ("highest", "lowest", "first"):
        rules.append(DefRule(Literal(name, (X,)),
                             (Literal(name, (A, X)), Literal("etype", (A, Constant(comparable))))))
    return rules


# ---------------------------------------------------------------------------
# text

def serialize_rule(r: AspRule) -> str:
    if isinstance(r, Fact):
        return f"{r.atom}."
    if isinstance(r, Constraint):
        return ":- " + ", ".join(str(b) for b in r.body) + "."
    if isinstance(r, DefRule):
        return f"{r.head} :- " + ", ".join(str(b) for b in r.body) + "."
    if isinstance(r, ChoiceRule):
        s = f"{r.lower}{{{r.head.text(',')}:{r.condition.text(',')}}}{r.upper}"
        if r.body:
            s += " :- " + ", ".join(str(b) for b in r.body)
        return s + "."
    raise TypeError(f"not a rule: {r!r}")


def serialize(rules: Iterable[AspRule]) -> str:
    return "".join(serialize_rule(r) + "\n" for r in rules)


_ASP_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<if>:-)
  | (?P<range>\.\.)
  | (?P<op>!=|<=|>=|=|<|>)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[-+.,(){}:])
""", re.VERBOSE)


class _AspParser:
    def __init__(self, text):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _ASP_TOKEN.match(text, pos)
            if not m:
                raise AspSyntaxError("unexpected character", text, pos)
            kind = m.lastgroup
            if kind != "ws":
                self.toks.append((m.group() if kind == "punct" else kind, m.group(), pos))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise AspSyntaxError(f"expected {kind!r}, found {tok[1] or tok[0]!r}", self.text, tok[2])
        return tok

    def at_end(self):
        return self.peek()[0] == "eof"

    def rule(self):
        kind = self.peek()[0]
        if kind == "if":
            self.next()
            body = self.body()
            self.expect(".")
            return Constraint(body)
        if kind == "int" and self.peek(1)[0] == "{":
            lower = int(self.next()[1])
            self.expect("{")
            head = self.literal()
            self.expect(":")
            cond = self.literal()
            self.expect("}")
            upper = int(self.expect("int")[1])
            body = ()
            if self.peek()[0] == "if":
                self.next()
                body = self.body()
            self.expect(".")
            return ChoiceRule(head, cond, body, lower, upper)
        head = self.literal()
        if self.peek()[0] == "if":
            self.next()
            body = self.body()
            self.expect(".")
            return DefRule(head, body)
        self.expect(".")
        return Fact(head)

    def body(self):
        items = [self.body_item()]
        while self.peek()[0] == ",":
            self.next()
            items.append(self.body_item())
        return tuple(items)

    def body_item(self):
        kind, val, _ = self.peek()
        if kind == "ident" and val == "not" and self.peek(1)[0] == "ident":
            self.next()
            lit = self.literal()
            return Literal(lit.pred, lit.args, negated=True)
        if kind == "ident" and self.peek(1)[0] != "op":
            return self.literal()
        left = self.term()
        op = self.expect("op")[1]
        return Comparison(left, op, self.term())

    def literal(self):
        name = self.expect("ident")[1]
        args = ()
        if self.peek()[0] == "(":
            self.next()
            args = [self.term()]
            while self.peek()[0] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            args = tuple(args)
        return Literal(name, args)

    def term(self):
        kind, val, pos = self.next()
        if kind == "int":
            if self.peek()[0] == "range":
                self.next()
                return Range(int(val), int(self.expect("int")[1]))
            return Constant(int(val))
        if kind == "-" and self.peek()[0] == "int":
            return Constant(-int(self.next()[1]))
        if kind == "ident":
            return Constant(val)
        if kind == "var":
            base = Variable(val)
            if self.peek()[0] in "+-" and self.peek(1)[0] == "int":
                sign = self.next()[0]
                n = int(self.next()[1])
                return Offset(base, n if sign == "+" else -n)
            return base
        raise AspSyntaxError(f"unexpected {val or kind!r}", self.text, pos)


def parse_rule(text: str) -> AspRule:
    """Parse one rule.  One-argument ``first(X)``/``highest(X)``/``lowest(X)`` are kept as written."""
    p = _AspParser(text)
    r = p.rule()
    if not p.at_end():
        tok = p.peek()
        raise AspSyntaxError("trailing input after rule", text, tok[2])
    return r


def parse_program(text: str) -> list:
    p = _AspParser(text)
    rules = []
    while not p.at_end():
        rules.append(p.rule())
    return rules


# ---------------------------------------------------------------------------
# validation

def _term_vars(t) -> set:
    if isinstance(t, Variable):
        return {t.name}
    if isinstance(t, Offset):
        return {t.base.name}
    return set()


def variables_of(items) -> set:
    out = set()
    for it in items:
        if isinstance(it, Literal):
            for a in it.args:
                out |= _term_vars(a)
        elif isinstance(it, Comparison):
            out |= _term_vars(it.left) | _term_vars(it.right)
    return out


def constants_of(r: AspRule) -> set:
    out = set()
    for it in _rule_items(r):
        args = it.args if isinstance(it, Literal) else (it.left, it.right)
        out |= {a.value for a in args if isinstance(a, Constant)}
    return out


def _rule_items(r):
    if isinstance(r, Fact):
        return [r.atom]
    if isinstance(r, Constraint):
        return list(r.body)
    if isinstance(r, DefRule):
        return [r.head, *r.body]
    if isinstance(r, ChoiceRule):
        return [r.head, r.condition, *r.body]
    return []


def _ordered_on_comparable(body, d: PuzzleDomain) -> bool:
    """Ordered comparisons and offsets may only touch values of the comparable type."""
    names = {d.comparable, *d.aliases} if d.has_comparable else set()
    index = d.type_index(d.comparable) if d.has_comparable else None
    type_vars = {b.args[0].name for b in body
                 if isinstance(b, Literal) and b.pred == "etype" and len(b.args) == 2
                 and isinstance(b.args[0], Variable) and isinstance(b.args[1], Constant)
                 and b.args[1].value in names}
    ranked = set()
    for b in body:
        if not isinstance(b, Literal) or b.negated:
            continue
        if b.pred == "element" and len(b.args) == 2 and isinstance(b.args[1], Variable):
            a = b.args[0]
            if (isinstance(a, Variable) and a.name in type_vars) or (isinstance(a, Constant) and a.value == index):
                ranked.add(b.args[1].name)
        elif b.pred in ("highest", "lowest", "first") and isinstance(b.args[-1], Variable) and names:
            ranked.add(b.args[-1].name)
    for b in body:
        if not isinstance(b, Comparison):
            continue
        ordered = b.op not in ("=", "!=")
        for t in (b.left, b.right):
            if isinstance(t, Offset) and t.base.name not in ranked:
                return False
            if ordered and isinstance(t, Variable) and t.name not in ranked:
                return False
            if ordered and isinstance(t, Constant) and not isinstance(t.value, int):
                return False
    return True


def validate_rule(r: AspRule, d: PuzzleDomain) -> bool:
    """Syntactic check: safety, predicate arities, constants known to ``d``.

    Ordered comparisons and offsets must range over the comparable type.
    """
    if not isinstance(r, (Fact, Constraint, ChoiceRule, DefRule)):
        return False
    items = _rule_items(r)
    for it in items:
        if isinstance(it, Literal):
            if len(it.args) not in PREDICATE_ARITIES.get(it.pred, ()):
                return False
            if any(isinstance(a, Range) for a in it.args) and not isinstance(r, Fact):
                return False
        elif isinstance(it, Comparison):
            if it.op not in lt.COMPARISON_OPS:
                return False
        else:
            return False
    if isinstance(r, Constraint) and not r.body:
        return False
    if isinstance(r, (Constraint, DefRule)):
        positive = variables_of([b for b in r.body if isinstance(b, Literal) and not b.negated])
        if not variables_of(r.body) <= positive:
            return False
        if isinstance(r, DefRule) and not variables_of([r.head]) <= positive:
            return False
    if isinstance(r, Fact) and variables_of([r.atom]):
        return False
    if isinstance(r, Constraint) and not _ordered_on_comparable(r.body, d):
        return False
    known = d.all_elements() | {name for name, _ in d.types} | set(d.aliases)
    if d.comparable:
        known.add(d.comparable)
    if isinstance(r, Fact):
        known |= set(range(1, max(d.m, d.n) + 1))
    return constants_of(r) <= known


# ---------------------------------------------------------------------------
# bridge to lambda terms

def _asp_term_from(t) -> Optional[AspTerm]:
    if isinstance(t, lt.Const):
        v = t.value
        if isinstance(v, str) and v[:1].isupper():
            return Variable(v)
        return Constant(v)
    if isinstance(t, lt.Offset) and t.delta != 0:
        base = _asp_term_from(t.base)
        if isinstance(base, Variable):
            return Offset(base, t.delta)
    return None


def _item_from(t) -> Optional[BodyItem]:
    if isinstance(t, lt.Atom):
        args = tuple(_asp_term_from(a) for a in t.args)
        return None if any(a is None for a in args) else Literal(t.pred, args)
    if isinstance(t, lt.Cmp):
        left, right = _asp_term_from(t.left), _asp_term_from(t.right)
        if left is None or right is None:
            return None
        return Comparison(left, t.op, right)
    return None


def rule_from_term(t: lt.Term) -> Optional[Constraint]:
    """Convert a closed, normal rule-valued term to a constraint (or ``None``)."""
    if not isinstance(t, lt.Rule) or not t.body:
        return None
    items = tuple(_item_from(i) for i in t.body)
    if any(i is None for i in items):
        return None
    return Constraint(items)


def _lambda_term(a) -> lt.Term:
    if isinstance(a, Variable):
        return lt.Const(a.name)
    if isinstance(a, Constant):
        return lt.Const(a.value)
    if isinstance(a, Offset):
        return lt.Offset(lt.Const(a.base.name), a.delta)
    raise ValueError(f"no lambda form for {a!r}")


def term_from_rule(r: Constraint) -> lt.Rule:
    items = []
    for b in r.body:
        if isinstance(b, Literal):
            if b.negated:
                raise ValueError("negated literals have no lambda form")
            items.append(lt.Atom(b.pred, tuple(_lambda_term(a) for a in b.args)))
        else:
            items.append(lt.Cmp(b.op, _lambda_term(b.left), _lambda_term(b.right)))
    return lt.Rule(tuple(items))
