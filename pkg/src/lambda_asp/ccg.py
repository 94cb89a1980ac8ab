"""CCG categories, lexicon and a CKY chart parser over (category, term) pairs.

Only forward (``X/Y Y => X``) and backward (``Y X\\Y => X``) application are
used; semantics compose by :func:`lambda_asp.terms.apply`, and combinations
that are ill-typed are dropped from the chart.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .terms import Term, TypeMismatch, alpha_key, apply, parse_term, to_text

__all__ = [
    "Category", "CatAtom", "Forward", "Backward", "parse_category",
    "LexicalEntry", "Lexicon", "Derivation", "parse_all", "best_parse",
    "score", "LexiconFormatError", "LEXICON_HEADER",
]


class Category:
    __slots__ = ()

    def __str__(self):
        return _cat_text(self, top=True)


@dataclass(frozen=True)
class CatAtom(Category):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Forward(Category):
    """``result/arg``: looks for ``arg`` on the right."""
    result: Category
    arg: Category

    def __str__(self):
        return _cat_text(self, top=True)


@dataclass(frozen=True)
class Backward(Category):
    """``result\\arg``: looks for ``arg`` on the left."""
    result: Category
    arg: Category

    def __str__(self):
        return _cat_text(self, top=True)


def _cat_text(c, top=False):
    if isinstance(c, CatAtom):
        return c.name
    slash = "/" if isinstance(c, Forward) else "\\"
    s = f"{_cat_text(c.result)}{slash}{_cat_text(c.arg)}"
    return s if top else f"({s})"


_CAT_TOKEN = re.compile(r"\s*(?:([A-Za-z][A-Za-z0-9\[\]]*)|([/\\()]))")


def parse_category(text: str) -> Category:
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _CAT_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad category {text!r} at {pos}")
        toks.append(m.group(1) or m.group(2))
        pos = m.end()
    toks.append(None)
    i = 0

    def primary():
        nonlocal i
        tok = toks[i]
        i += 1
        if tok == "(":
            c = expr()
            if toks[i] != ")":
                raise ValueError(f"unbalanced parentheses in category {text!r}")
            i += 1
            return c
        if tok is None or tok in "/\\)":
            raise ValueError(f"bad category {text!r}")
        return CatAtom(tok)

    def expr():
        nonlocal i
        c = primary()
        while toks[i] in ("/", "\\"):
            slash = toks[i]
            i += 1
            arg = primary()
            c = Forward(c, arg) if slash == "/" else Backward(c, arg)
        return c

    c = expr()
    if toks[i] is not None:
        raise ValueError(f"trailing input in category {text!r}")
    return c


@dataclass(frozen=True, eq=False)
class LexicalEntry:
    """A phrase paired with a category and a meaning.

    Entries compare equal when the phrase and category match and the
    meanings are alpha-equivalent.
    """
    phrase: tuple
    category: Category
    semantics: Term

    @property
    def key(self):
        return (self.phrase, str(self.category), alpha_key(self.semantics))

    def __eq__(self, other):
        return isinstance(other, LexicalEntry) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return f"{' '.join(self.phrase)} := {self.category} : {to_text(self.semantics)}"

    @classmethod
    def make(cls, phrase, category, semantics):
        if isinstance(phrase, str):
            phrase = tuple(phrase.split())
        if isinstance(category, str):
            category = parse_category(category)
        if isinstance(semantics, str):
            semantics = parse_term(semantics)
        return cls(tuple(phrase), category, semantics)


LEXICON_HEADER = "# lexicon v1"
DEFAULT_WEIGHT = 0.1


class LexiconFormatError(ValueError):
    pass


class Lexicon:
    """Ordered set of entries with one real weight each."""

    def __init__(self, entries: Iterable = (), weight: float = DEFAULT_WEIGHT):
        self._entries: Dict[LexicalEntry, float] = {}
        self._by_phrase: Dict[tuple, List[LexicalEntry]] = {}
        for e in entries:
            if isinstance(e, tuple) and len(e) == 2 and isinstance(e[0], LexicalEntry):
                self.add(e[0], e[1])
            else:
                self.add(e, weight)

    def add(self, entry: LexicalEntry, weight: float = DEFAULT_WEIGHT) -> bool:
        if entry in self._entries:
            return False
        if not math.isfinite(weight):
            raise ValueError("lexicon weights must be finite")
        self._entries[entry] = float(weight)
        self._by_phrase.setdefault(entry.phrase, []).append(entry)
        return True

    def __contains__(self, entry):
        return entry in self._entries

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def entries_for(self, phrase) -> list:
        return list(self._by_phrase.get(tuple(phrase), ()))

    def phrases(self):
        return self._by_phrase.keys()

    def max_phrase_length(self) -> int:
        return max((len(p) for p in self._by_phrase), default=1)

    def weight(self, entry) -> float:
        return self._entries[entry]

    @property
    def weights(self) -> Dict[LexicalEntry, float]:
        return dict(self._entries)

    def set_weights(self, theta: Dict[LexicalEntry, float]):
        for e, w in theta.items():
            if e in self._entries:
                self._entries[e] = float(w)

    def copy(self) -> "Lexicon":
        return Lexicon(list(self._entries.items()))

    def categories(self) -> list:
        seen = {}
        for e in self._entries:
            seen.setdefault(str(e.category), e.category)
        return list(seen.values())

    # -- text format -------------------------------------------------------
    def dumps(self) -> str:
        lines = [LEXICON_HEADER]
        for e, w in self._entries.items():
            lines.append("\t".join((" ".join(e.phrase), str(e.category), to_text(e.semantics), repr(w))))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Lexicon":
        lex = cls()
        lines = text.splitlines()
        if not lines or lines[0].strip() != LEXICON_HEADER:
            raise LexiconFormatError(f"line 1: expected header {LEXICON_HEADER!r}")
        for no, line in enumerate(lines[1:], 2):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise LexiconFormatError(f"line {no}: expected 4 tab-separated fields, got {len(parts)}")
            phrase, cat, sem, weight = parts
            try:
                entry = LexicalEntry.make(phrase, cat, sem)
                w = float(weight)
            except ValueError as exc:
                raise LexiconFormatError(f"line {no}: {exc}") from None
            lex.add(entry, w)
        return lex

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


@dataclass(frozen=True, eq=False)
class Derivation:
    category: Category
    semantics: Term
    span: Tuple[int, int]
    rule: str  # "lex", ">" or "<"
    children: tuple = ()
    entry: Optional[LexicalEntry] = None

    def leaves(self) -> list:
        if self.rule == "lex":
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def entries(self) -> list:
        return [leaf.entry for leaf in self.leaves()]

    def features(self) -> Counter:
        return Counter(self.entries())

    def signature(self):
        """Identity of the tree: leaf entries, spans and combinators."""
        if self.rule == "lex":
            return ("lex", self.span, self.entry.key)
        return (self.rule, self.span) + tuple(c.signature() for c in self.children)

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        head = f"{pad}{self.category} : {to_text(self.semantics)}"
        if self.rule == "lex":
            return f"{head}   [{' '.join(self.entry.phrase)}]"
        return "\n".join([f"{head}   ({self.rule})"] + [c.pretty(indent + 1) for c in self.children])


def score(d: Derivation, weights) -> float:
    return sum(weights.get(e, 0.0) for e in d.entries())


def _combine(left: Derivation, right: Derivation):
    lc, rc = left.category, right.category
    span = (left.span[0], right.span[1])
    if isinstance(lc, Forward) and lc.arg == rc:
        try:
            yield Derivation(lc.result, apply(left.semantics, right.semantics), span, ">", (left, right))
        except TypeMismatch:
            pass
    if isinstance(rc, Backward) and rc.arg == lc:
        try:
            yield Derivation(rc.result, apply(right.semantics, left.semantics), span, "<", (left, right))
        except TypeMismatch:
            pass


def chart_parse(tokens: Sequence[str], lexicon: Lexicon, supertags: Optional[Sequence] = None,
                beam: Optional[int] = None, weights=None, extra: Iterable = ()) -> dict:
    """Fill the CKY chart; returns ``{(i, j): [Derivation, ...]}``.

    With ``supertags`` every token is restricted to entries of the given
    category (one category per token).  ``extra`` holds ``(i, j, entry)``
    triples that put ``entry`` on span ``(i, j)`` regardless of its phrase.
    """
    tokens = tuple(tokens)
    n = len(tokens)
    chart = {}
    maxlen = lexicon.max_phrase_length()
    if supertags is not None:
        tags = [parse_category(t) if isinstance(t, str) else t for t in supertags]
        if len(tags) != n:
            raise ValueError(f"{len(tags)} supertags for {n} tokens")
    for i in range(n):
        for j in range(i + 1, min(n, i + maxlen) + 1):
            if supertags is not None and j != i + 1:
                continue
            for e in lexicon.entries_for(tokens[i:j]):
                if supertags is not None and e.category != tags[i]:
                    continue
                chart.setdefault((i, j), []).append(Derivation(e.category, e.semantics, (i, j), "lex", (), e))
    for i, j, e in extra:
        chart.setdefault((i, j), []).append(Derivation(e.category, e.semantics, (i, j), "lex", (), e))
    if weights is None:
        weights = lexicon.weights
    for length in range(2, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            cell = chart.setdefault((i, j), [])
            for k in range(i + 1, j):
                for left in chart.get((i, k), ()):
                    for right in chart.get((k, j), ()):
                        cell.extend(_combine(left, right))
            if beam is not None and len(cell) > beam:
                ranked = sorted(range(len(cell)), key=lambda x: -score(cell[x], weights))
                keep = sorted(ranked[:beam])
                chart[(i, j)] = [cell[x] for x in keep]
    return chart


def parse_all(tokens: Sequence[str], lexicon: Lexicon, supertags=None, beam: Optional[int] = None,
              root: str = "S", weights=None) -> list:
    """Every complete derivation whose root category is ``root``."""
    tokens = tuple(tokens)
    if not tokens:
        return []
    chart = chart_parse(tokens, lexicon, supertags, beam, weights)
    goal = CatAtom(root) if isinstance(root, str) else root
    return [d for d in chart.get((0, len(tokens)), ()) if d.category == goal]


def best_parse(tokens: Sequence[str], lexicon: Lexicon, theta=None, **kw) -> Optional[Derivation]:
    """Highest-scoring derivation; ties go to the first in enumeration order."""
    weights = lexicon.weights if theta is None else theta
    best, best_score = None, -math.inf
    for d in parse_all(tokens, lexicon, weights=weights, **kw):
        s = score(d, weights)
        if s > best_score:
            best, best_score = d, s
    return best
