"""Typed lambda terms whose base formulas are ASP rule fragments.

Terms are immutable.  Lambda-bound variables are lower-case identifiers;
upper-case identifiers (``I``, ``J``, ``X`` ...) are ASP variables and, from
the point of view of the calculus, ordinary constants of individual type.

The text syntax mirrors the usual notation::

    λx. tuple(x, earl)
    λx. λy. λz. :- z@I, x@J, tuple(I, X), y@X@Y.
    λy. λx. y@(tuple(x, X), highest(X))

``\\`` may be written instead of ``λ``, and ``≠ − ≤ ≥`` are accepted as
aliases for ``!= - <= >=``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Term", "Var", "Const", "App", "Lam", "Atom", "Cmp", "Offset", "Conj", "Rule",
    "TermType", "BaseType", "Arrow", "TypeVar", "IND", "RULE", "TypeMismatch",
    "TermSyntaxError", "parse_term", "to_text", "free_vars", "substitute",
    "normalize", "apply", "alpha_eq", "alpha_key", "subterms", "infer_type",
    "is_well_typed", "tidy", "fresh_name", "lam", "app", "COMPARISON_OPS",
]

COMPARISON_OPS = ("!=", "<=", ">=", "=", "<", ">")


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def __matmul__(self, other: "Term") -> "App":
        return App(self, other)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Const(Term):
    value: Union[str, int]

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, repr=False)
class App(Term):
    fun: Term
    arg: Term

    def __repr__(self):
        return f"App({self.fun!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class Lam(Term):
    var: str
    body: Term

    def __repr__(self):
        return f"Lam({self.var!r}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Atom(Term):
    """Predicate atom such as ``tuple(x, earl)``."""
    pred: str
    args: tuple

    def __repr__(self):
        return f"Atom({self.pred!r}, {self.args!r})"


@dataclass(frozen=True, repr=False)
class Cmp(Term):
    """Comparison literal ``left op right``."""
    op: str
    left: Term
    right: Term

    def __repr__(self):
        return f"Cmp({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Offset(Term):
    """Constant-offset arithmetic ``base + delta`` (only offsets occur in clues)."""
    base: Term
    delta: int

    def __repr__(self):
        return f"Offset({self.base!r}, {self.delta!r})"


@dataclass(frozen=True, repr=False)
class Conj(Term):
    """A comma-separated rule fragment, spliced into the enclosing rule body."""
    items: tuple

    def __repr__(self):
        return f"Conj({self.items!r})"


@dataclass(frozen=True, repr=False)
class Rule(Term):
    """Integrity-constraint skeleton ``:- body.``"""
    body: tuple

    def __repr__(self):
        return f"Rule({self.body!r})"


def lam(*names_and_body):
    """``lam("x", "y", body)`` builds ``λx. λy. body``."""
    *names, body = names_and_body
    for name in reversed(names):
        body = Lam(name, body)
    return body


def app(fun, *args):
    for a in args:
        fun = App(fun, a)
    return fun


def _children(t: Term) -> tuple:
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, Atom):
        return t.args
    if isinstance(t, Cmp):
        return (t.left, t.right)
    if isinstance(t, Offset):
        return (t.base,)
    if isinstance(t, (Conj, Rule)):
        return t.items if isinstance(t, Conj) else t.body
    return ()


def _rebuild(t: Term, kids) -> Term:
    kids = tuple(kids)
    if isinstance(t, App):
        return App(*kids)
    if isinstance(t, Lam):
        return Lam(t.var, kids[0])
    if isinstance(t, Atom):
        return Atom(t.pred, kids)
    if isinstance(t, Cmp):
        return Cmp(t.op, kids[0], kids[1])
    if isinstance(t, Offset):
        return Offset(kids[0], t.delta)
    if isinstance(t, Conj):
        return Conj(kids)
    if isinstance(t, Rule):
        return Rule(kids)
    return t


# ---------------------------------------------------------------------------
# variables and substitution

_fresh_counter = itertools.count(1)


def fresh_name(base: str = "v") -> str:
    base = base.split("_")[0] or "v"
    return f"{base}_{next(_fresh_counter)}"


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, Const):
        return frozenset()
    out = frozenset()
    for k in _children(t):
        out |= free_vars(k)
    return out


def _all_names(t: Term) -> set:
    names = set()
    for s in subterms(t):
        if isinstance(s, Var):
            names.add(s.name)
        elif isinstance(s, Lam):
            names.add(s.var)
        elif isinstance(s, Const) and isinstance(s.value, str):
            names.add(s.value)
    return names


def substitute(t: Term, name: str, value: Term, _fv=None) -> Term:
    """Capture-avoiding ``t[name := value]``."""
    if _fv is None:
        _fv = free_vars(value)
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Const):
        return t
    if isinstance(t, Lam):
        if t.var == name:
            return t
        body_fv = free_vars(t.body)
        if name not in body_fv:
            return t
        if t.var in _fv:
            new = fresh_name(t.var)
            body = substitute(t.body, t.var, Var(new))
            return Lam(new, substitute(body, name, value, _fv))
        return Lam(t.var, substitute(t.body, name, value, _fv))
    return _rebuild(t, (substitute(k, name, value, _fv) for k in _children(t)))


# ---------------------------------------------------------------------------
# reduction

def _splice(items) -> tuple:
    out = []
    for it in items:
        if isinstance(it, Conj):
            out.extend(it.items)
        else:
            out.append(it)
    return tuple(out)


def normalize(t: Term, order: str = "normal") -> Term:
    """beta-normal form.

    ``order="normal"`` contracts the leftmost-outermost redex first;
    ``order="applicative"`` normalises arguments before contracting.
    Conjunctions nested in rule bodies or other conjunctions are spliced.
    """
    if order not in ("normal", "applicative"):
        raise ValueError(f"unknown reduction order {order!r}")
    return _norm(t, order == "applicative")


def _norm(t: Term, eager: bool) -> Term:
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, App):
        f = _norm(t.fun, eager)
        a = _norm(t.arg, eager) if eager else t.arg
        if isinstance(f, Lam):
            return _norm(substitute(f.body, f.var, a), eager)
        return App(f, a if eager else _norm(a, eager))
    if isinstance(t, Lam):
        return Lam(t.var, _norm(t.body, eager))
    if isinstance(t, Offset):
        base = _norm(t.base, eager)
        if isinstance(base, Offset):
            delta = base.delta + t.delta
            return base.base if delta == 0 else Offset(base.base, delta)
        return Offset(base, t.delta)
    kids = [_norm(k, eager) for k in _children(t)]
    if isinstance(t, (Conj, Rule)):
        kids = _splice(kids)
    return _rebuild(t, kids)


# ---------------------------------------------------------------------------
# types

class TermType:
    __slots__ = ()


@dataclass(frozen=True)
class BaseType(TermType):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow(TermType):
    src: TermType
    dst: TermType

    def __str__(self):
        s = f"({self.src})" if isinstance(self.src, Arrow) else str(self.src)
        return f"{s} -> {self.dst}"


@dataclass(frozen=True)
class TypeVar(TermType):
    ident: int

    def __str__(self):
        return f"t{self.ident}"


IND = BaseType("Individual")
RULE = BaseType("Rule")


class TypeMismatch(TypeError):
    pass


class _Unifier:
    def __init__(self):
        self.subst = {}
        self.counter = itertools.count()

    def fresh(self):
        return TypeVar(next(self.counter))

    def resolve(self, t):
        while isinstance(t, TypeVar) and t in self.subst:
            t = self.subst[t]
        return t

    def deep(self, t):
        t = self.resolve(t)
        if isinstance(t, Arrow):
            return Arrow(self.deep(t.src), self.deep(t.dst))
        return t

    def occurs(self, v, t):
        t = self.resolve(t)
        if t == v:
            return True
        return isinstance(t, Arrow) and (self.occurs(v, t.src) or self.occurs(v, t.dst))

    def unify(self, a, b, where):
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, TypeVar):
            if self.occurs(a, b):
                raise TypeMismatch(f"infinite type in {to_text(where)}")
            self.subst[a] = b
        elif isinstance(b, TypeVar):
            self.unify(b, a, where)
        elif isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.src, b.src, where)
            self.unify(a.dst, b.dst, where)
        else:
            raise TypeMismatch(f"cannot match {self.deep(a)} with {self.deep(b)} in {to_text(where)}")


def _infer(t, env, u: _Unifier):
    if isinstance(t, Var):
        if t.name not in env:
            env[t.name] = u.fresh()
        return env[t.name]
    if isinstance(t, Const):
        return IND
    if isinstance(t, Lam):
        inner = dict(env)
        a = inner[t.var] = u.fresh()
        return Arrow(a, _infer(t.body, inner, u))
    if isinstance(t, App):
        f = _infer(t.fun, env, u)
        a = _infer(t.arg, env, u)
        r = u.fresh()
        u.unify(f, Arrow(a, r), t)
        return r
    if isinstance(t, (Atom, Cmp, Offset)):
        for k in _children(t):
            u.unify(_infer(k, env, u), IND, t)
        return IND if isinstance(t, Offset) else RULE
    if isinstance(t, (Conj, Rule)):
        for k in _children(t):
            u.unify(_infer(k, env, u), RULE, t)
        return RULE
    raise TypeError(f"not a term: {t!r}")


def infer_type(t: Term) -> TermType:
    """Most general simple type of ``t``; raises :class:`TypeMismatch`."""
    u = _Unifier()
    return u.deep(_infer(t, {}, u))


def is_well_typed(t: Term) -> bool:
    try:
        infer_type(t)
    except TypeMismatch:
        return False
    return True


def apply(fun: Term, arg: Term) -> Term:
    """Type-check ``fun@arg`` and return its beta-normal form."""
    term = App(fun, arg)
    infer_type(term)
    return normalize(term)


# ---------------------------------------------------------------------------
# alpha equivalence

def alpha_key(t: Term) -> str:
    """A string equal for exactly the alpha-equivalent terms."""
    out = []
    _key(t, {}, 0, out)
    return "".join(out)


def _key(t, bound, depth, out):
    if isinstance(t, Var):
        out.append(f"#{depth - bound[t.name]}" if t.name in bound else f"?{t.name}")
    elif isinstance(t, Const):
        out.append(f"{t.value}" if isinstance(t.value, int) else f"'{t.value}")
    elif isinstance(t, Lam):
        inner = dict(bound)
        inner[t.var] = depth + 1
        out.append("L(")
        _key(t.body, inner, depth + 1, out)
        out.append(")")
    else:
        if isinstance(t, Atom):
            out.append(f"A{t.pred}(")
        elif isinstance(t, Cmp):
            out.append(f"C{t.op}(")
        elif isinstance(t, Offset):
            out.append(f"O{t.delta}(")
        else:
            out.append({App: "@(", Conj: "&(", Rule: "R("}[type(t)])
        for i, k in enumerate(_children(t)):
            if i:
                out.append(",")
            _key(k, bound, depth, out)
        out.append(")")


def alpha_eq(a: Term, b: Term) -> bool:
    return alpha_key(a) == alpha_key(b)


def subterms(t: Term) -> Iterator[Term]:
    """All subterms, pre-order, left to right."""
    yield t
    for k in _children(t):
        yield from subterms(k)


_PRETTY = ("x", "y", "z", "w", "v", "u")


def tidy(t: Term) -> Term:
    """Rename bound variables to x, y, z, ... in binding order."""
    taken = {s.value for s in subterms(t) if isinstance(s, Const) and isinstance(s.value, str)}
    taken |= free_vars(t)
    pool = (n for n in itertools.chain(_PRETTY, (f"{p}{i}" for i in itertools.count(1) for p in _PRETTY))
            if n not in taken)

    def go(s, ren):
        if isinstance(s, Var):
            return Var(ren.get(s.name, s.name))
        if isinstance(s, Lam):
            new = next(pool)
            return Lam(new, go(s.body, {**ren, s.var: new}))
        if isinstance(s, Const):
            return s
        return _rebuild(s, (go(k, ren) for k in _children(s)))

    return go(t, {})


# ---------------------------------------------------------------------------
# printing

def _show_name(c: Const) -> str:
    return str(c.value)


def to_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return _show_name(t)
    if isinstance(t, Lam):
        return f"λ{t.var}. {to_text(t.body)}"
    if isinstance(t, App):
        f = to_text(t.fun)
        if not isinstance(t.fun, (Var, Const, Atom, App)):
            f = f"({f})"
        a = to_text(t.arg)
        if not isinstance(t.arg, (Var, Const, Atom)):
            a = f"({a})"
        return f"{f}@{a}"
    if isinstance(t, Atom):
        return f"{t.pred}({', '.join(_arg_text(a) for a in t.args)})"
    if isinstance(t, Offset):
        base = _arg_text(t.base)
        if isinstance(t.base, Offset):
            base = f"({base})"
        return f"{base}{'+' if t.delta > 0 else '-'}{abs(t.delta)}"
    if isinstance(t, Cmp):
        return f"{_arg_text(t.left)} {t.op} {_arg_text(t.right)}"
    if isinstance(t, Conj):
        return ", ".join(_item_text(i) for i in t.items)
    if isinstance(t, Rule):
        return ":- " + ", ".join(_item_text(i) for i in t.body) + "."
    raise TypeError(f"not a term: {t!r}")


def _arg_text(t):
    s = to_text(t)
    if isinstance(t, (Lam, Conj, Rule, Cmp)):
        return f"({s})"
    return s


def _item_text(t):
    s = to_text(t)
    if isinstance(t, (Lam, Conj, Rule)):
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# parsing

class TermSyntaxError(ValueError):
    def __init__(self, msg, text, pos):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<lam>λ|\\)
  | (?P<rule>:-)
  | (?P<op>!=|≠|<=|≤|>=|≥|=|<|>)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sign>[-−+])
  | (?P<punct>[.,@()])
""", re.VERBOSE)

_OP_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">="}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError("unexpected character", text, pos)
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            if kind == "punct":
                kind = val
            elif kind == "op":
                val = _OP_ALIASES.get(val, val)
            elif kind == "sign":
                val = "-" if val == "−" else val
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _TermParser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[self.i + k]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise TermSyntaxError(f"expected {kind!r}, found {tok[1] or tok[0]!r}", self.text, tok[2])
        return tok

    def error(self, msg):
        raise TermSyntaxError(msg, self.text, self.peek()[2])

    def parse(self):
        t = self.term(frozenset())
        if self.peek()[0] != "eof":
            self.error("trailing input")
        return t

    def term(self, scope):
        kind = self.peek()[0]
        if kind == "lam":
            return self.lam(scope)
        if kind == "rule":
            return self.rule(scope)
        items = [self.cmp(scope)]
        while self.peek()[0] == ",":
            self.next()
            items.append(self.cmp(scope))
        return items[0] if len(items) == 1 else Conj(tuple(items))

    def lam(self, scope):
        self.expect("lam")
        names = [self.expect("ident")[1]]
        while self.peek()[0] == ",":
            self.next()
            names.append(self.expect("ident")[1])
        self.expect(".")
        body = self.term(scope | set(names))
        return lam(*names, body)

    def rule(self, scope):
        self.expect("rule")
        items = [self.cmp(scope)]
        while self.peek()[0] == ",":
            self.next()
            items.append(self.cmp(scope))
        if self.peek()[0] == ".":
            self.next()
        return Rule(tuple(items))

    def cmp(self, scope):
        left = self.arith(scope)
        if self.peek()[0] == "op":
            op = self.next()[1]
            return Cmp(op, left, self.arith(scope))
        return left

    def arith(self, scope):
        base = self.app(scope)
        while self.peek()[0] == "sign" and self.peek(1)[0] == "int":
            sign = self.next()[1]
            n = int(self.next()[1])
            base = Offset(base, n if sign == "+" else -n)
        return base

    def app(self, scope):
        t = self.primary(scope)
        while self.peek()[0] == "@":
            self.next()
            t = App(t, self.primary(scope))
        return t

    def primary(self, scope):
        kind, val, _ = self.peek()
        if kind == "int":
            self.next()
            return Const(int(val))
        if kind == "ident":
            self.next()
            if self.peek()[0] == "(":
                self.next()
                args = [self.arith(scope)]
                while self.peek()[0] == ",":
                    self.next()
                    args.append(self.arith(scope))
                self.expect(")")
                return Atom(val, tuple(args))
            return Var(val) if val in scope else Const(val)
        if kind == "(":
            self.next()
            t = self.term(scope)
            self.expect(")")
            return t
        if kind == "lam":
            return self.lam(scope)
        if kind == "rule":
            return self.rule(scope)
        self.error(f"unexpected {val or kind!r}")


def parse_term(text: str) -> Term:
    """Parse the canonical text syntax.  Unbound identifiers become constants."""
    return _TermParser(text).parse()
