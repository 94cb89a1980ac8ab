"""Puzzle files, training pairs, the initial dictionary, tokenization and folds."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from .asp import Constraint, PuzzleDomain, parse_rule, serialize_rule, validate_rule
from .ccg import Category, LexicalEntry, Lexicon, parse_category
from .terms import Atom, Const, Term, _children, _rebuild, parse_term, to_text

__all__ = [
    "PuzzleInstance", "Clue", "TrainingPair", "CorpusFormatError", "preprocess",
    "load_puzzle", "loads_puzzle", "dumps_puzzle", "load_pairs", "loads_pairs",
    "dumps_pairs", "kfold_split", "InitialDictionary", "load_initial_dictionary",
    "loads_initial_dictionary", "load_corpus_dir", "data_path",
]

PUZZLE_HEADER = "# puzzle v1"
PAIRS_HEADER = "# training-pairs v1"
DICTIONARY_HEADER = "# initial-dictionary v1"


class CorpusFormatError(ValueError):
    pass


def data_path(name: str) -> Path:
    """Path of a fixture shipped with the package."""
    return Path(__file__).parent / "data" / name


# ---------------------------------------------------------------------------
# tokenization

_POSSESSIVE = re.compile(r"(?<=\w)['’]s\b")
_STRIP = re.compile(r"[^a-z0-9_\-\s]")


def _names(domain) -> list:
    if domain is None:
        return []
    if isinstance(domain, PuzzleDomain):
        return [str(e) for e in domain.all_elements()]
    return [str(x) for x in domain]


def preprocess(text: str, domain=None, multiwords: Iterable[str] = ()) -> list:
    """Lower-case, strip punctuation and merge multiword names into one token.

    ``domain`` is a :class:`PuzzleDomain` or an iterable of constant names;
    a constant like ``dr_miros`` absorbs the token pair ``dr miros``.
    ``multiwords`` adds phrases (``"fortune told"``) merged the same way.
    """
    text = _POSSESSIVE.sub("", text.lower().replace("’", "'"))
    text = _STRIP.sub(" ", text)
    tokens = [t.strip("-") for t in text.split()]
    tokens = [t for t in tokens if t]
    phrases = {}
    for name in _names(domain):
        parts = tuple(name.lower().split("_"))
        if len(parts) > 1:
            phrases[parts] = "_".join(parts)
    for mw in multiwords:
        parts = tuple(mw.lower().replace("_", " ").split())
        if len(parts) > 1:
            phrases[parts] = "_".join(parts)
    if not phrases:
        return tokens
    longest = max(len(p) for p in phrases)
    out, i = [], 0
    while i < len(tokens):
        for n in range(min(longest, len(tokens) - i), 1, -1):
            hit = phrases.get(tuple(tokens[i:i + n]))
            if hit:
                out.append(hit)
                i += n
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


# ---------------------------------------------------------------------------
# training pairs

@dataclass(frozen=True)
class TrainingPair:
    """A sentence with its gold constraint.

    ``supertags`` optionally fixes one syntactic category per token, standing
    in for the output of an external syntactic parser.
    """
    tokens: tuple
    gold: Constraint
    supertags: Optional[tuple] = None
    text: str = ""

    def __post_init__(self):
        if self.supertags is not None and len(self.supertags) != len(self.tokens):
            raise ValueError(f"{len(self.supertags)} supertags for {len(self.tokens)} tokens: {self.tokens}")

    def constants(self) -> set:
        from .asp import constants_of
        return {str(c) for c in constants_of(self.gold)}


def _gold_constants(rule) -> list:
    from .asp import constants_of
    return [str(c) for c in constants_of(rule)]


def loads_pairs(text: str, multiwords: Iterable[str] = ()) -> list:
    """Parse ``sentence ||| gold rule [||| supertags]`` lines."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != PAIRS_HEADER:
        raise CorpusFormatError(f"line 1: expected header {PAIRS_HEADER!r}")
    pairs = []
    for no, line in enumerate(lines[1:], 2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|||")]
        if len(fields) not in (2, 3):
            raise CorpusFormatError(f"line {no}: expected 2 or 3 '|||'-separated fields")
        try:
            gold = parse_rule(fields[1])
        except ValueError as exc:
            raise CorpusFormatError(f"line {no}: {exc}") from None
        tokens = tuple(preprocess(fields[0], _gold_constants(gold), multiwords))
        tags = None
        if len(fields) == 3 and fields[2]:
            try:
                tags = tuple(parse_category(t) for t in fields[2].split())
            except ValueError as exc:
                raise CorpusFormatError(f"line {no}: {exc}") from None
            if len(tags) != len(tokens):
                raise CorpusFormatError(f"line {no}: {len(tags)} supertags for tokens {list(tokens)}")
        pairs.append(TrainingPair(tokens, gold, tags, fields[0]))
    return pairs


def load_pairs(path, multiwords: Iterable[str] = ()) -> list:
    return loads_pairs(Path(path).read_text(encoding="utf-8"), multiwords)


def dumps_pairs(pairs: Sequence[TrainingPair]) -> str:
    out = [PAIRS_HEADER]
    for p in pairs:
        fields = [p.text or " ".join(p.tokens), serialize_rule(p.gold)]
        if p.supertags is not None:
            fields.append(" ".join(str(t) for t in p.supertags))
        out.append(" ||| ".join(fields))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# puzzles

@dataclass(frozen=True)
class Clue:
    text: str
    gold: Optional[Constraint] = None
    supertags: Optional[tuple] = None


@dataclass(frozen=True)
class PuzzleInstance:
    id: str
    domain: PuzzleDomain
    clues: tuple
    multiwords: tuple = ()

    def tokens(self, clue: Clue) -> list:
        return preprocess(clue.text, self.domain, self.multiwords)

    def training_pairs(self) -> list:
        pairs = []
        for c in self.clues:
            if c.gold is None:
                continue
            toks = tuple(self.tokens(c))
            tags = c.supertags if c.supertags is not None and len(c.supertags) == len(toks) else None
            pairs.append(TrainingPair(toks, c.gold, tags, c.text))
        return pairs

    def gold_rules(self) -> list:
        return [c.gold for c in self.clues if c.gold is not None]


_SECTION = re.compile(r"^\[(\w+)\]\s*$")
_NUMBERED = re.compile(r"^(\d+)[.)]\s*(.*)$")


def loads_puzzle(text: str, source: str = "<string>") -> PuzzleInstance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != PUZZLE_HEADER:
        raise CorpusFormatError(f"{source}:1: expected header {PUZZLE_HEADER!r}")
    pid = None
    section = None
    types, comparable, aliases, multiwords = [], None, [], []
    clues, golds, tags = {}, {}, {}
    for no, raw in enumerate(lines[1:], 2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            if section not in ("domain", "clues", "gold", "tags", "multiwords"):
                raise CorpusFormatError(f"{source}:{no}: unknown section [{section}]")
            continue
        where = f"{source}:{no}"
        if section is None:
            key, _, val = line.partition(":")
            if key.strip() != "id" or not val.strip():
                raise CorpusFormatError(f"{where}: expected 'id: <name>' before the first section")
            pid = val.strip()
        elif section == "domain":
            if line.startswith("@comparable"):
                comparable = line.split(None, 1)[1].strip()
                continue
            if line.startswith("@alias"):
                aliases.append(line.split(None, 1)[1].strip())
                continue
            name, sep, elems = line.partition(":")
            if not sep:
                raise CorpusFormatError(f"{where}: expected 'type: e1, e2, ...'")
            items = [e.strip() for e in elems.split(",") if e.strip()]
            if not items:
                raise CorpusFormatError(f"{where}: type {name.strip()!r} has no elements")
            if len(set(items)) != len(items):
                dup = next(e for e in items if items.count(e) > 1)
                raise CorpusFormatError(f"{where}: duplicate element {dup!r} in type {name.strip()!r}")
            types.append((name.strip(), tuple(items)))
        elif section == "multiwords":
            multiwords.append(line)
        else:
            m = _NUMBERED.match(line)
            if not m:
                raise CorpusFormatError(f"{where}: expected a numbered line 'N. ...'")
            idx, body = int(m.group(1)), m.group(2).strip()
            target = {"clues": clues, "gold": golds, "tags": tags}[section]
            if idx in target:
                raise CorpusFormatError(f"{where}: duplicate entry {idx} in [{section}]")
            if section == "gold":
                if body in ("", "-"):
                    continue
                try:
                    target[idx] = parse_rule(body)
                except ValueError as exc:
                    raise CorpusFormatError(f"{where}: {exc}") from None
            elif section == "tags":
                try:
                    target[idx] = tuple(parse_category(t) for t in body.split())
                except ValueError as exc:
                    raise CorpusFormatError(f"{where}: {exc}") from None
            else:
                target[idx] = body
    if pid is None:
        raise CorpusFormatError(f"{source}: missing 'id:' line")
    if not types:
        raise CorpusFormatError(f"{source}: empty [domain] section")
    if not clues:
        raise CorpusFormatError(f"{source}: puzzle has no clues")
    for idx in list(golds) + list(tags):
        if idx not in clues:
            raise CorpusFormatError(f"{source}: entry {idx} has no matching clue")
    try:
        domain = PuzzleDomain(tuple(types), comparable if comparable else "rank", tuple(aliases))
    except ValueError as exc:
        raise CorpusFormatError(f"{source}: {exc}") from None
    for idx, g in golds.items():
        if not validate_rule(g, domain):
            raise CorpusFormatError(f"{source}: gold rule {idx} does not validate against the domain")
    ordered = tuple(Clue(clues[i], golds.get(i), tags.get(i)) for i in sorted(clues))
    return PuzzleInstance(pid, domain, ordered, tuple(multiwords))


def load_puzzle(path) -> PuzzleInstance:
    path = Path(path)
    return loads_puzzle(path.read_text(encoding="utf-8"), str(path))


def dumps_puzzle(p: PuzzleInstance) -> str:
    out = [PUZZLE_HEADER, f"id: {p.id}", "[domain]"]
    for name, elems in p.domain.types:
        out.append(f"{name}: {', '.join(str(e) for e in elems)}")
    if p.domain.comparable and p.domain.comparable != "rank":
        out.append(f"@comparable {p.domain.comparable}")
    for a in p.domain.aliases:
        out.append(f"@alias {a}")
    if p.multiwords:
        out.append("[multiwords]")
        out.extend(p.multiwords)
    out.append("[clues]")
    out.extend(f"{i}. {c.text}" for i, c in enumerate(p.clues, 1))
    if any(c.gold is not None for c in p.clues):
        out.append("[gold]")
        out.extend(f"{i}. {serialize_rule(c.gold)}" for i, c in enumerate(p.clues, 1) if c.gold is not None)
    if any(c.supertags is not None for c in p.clues):
        out.append("[tags]")
        out.extend(f"{i}. {' '.join(map(str, c.supertags))}"
                   for i, c in enumerate(p.clues, 1) if c.supertags is not None)
    return "\n".join(out) + "\n"


def load_corpus_dir(path) -> list:
    """Every ``*.puz`` file below ``path``, sorted by file name."""
    files = sorted(Path(path).glob("*.puz"))
    if not files:
        raise CorpusFormatError(f"no .puz files in {path}")
    return [load_puzzle(f) for f in files]


# ---------------------------------------------------------------------------
# folds

def kfold_split(items: Sequence, k: int, seed: int = 0) -> list:
    """``k`` (train, test) pairs; test folds are disjoint and differ in size by at most one."""
    items = list(items)
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"k must be an integer >= 2, got {k!r}")
    if len(items) < k:
        raise ValueError(f"cannot split {len(items)} items into {k} folds")
    order = list(range(len(items)))
    random.Random(seed).shuffle(order)
    base, extra = divmod(len(items), k)
    folds, start = [], 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        test_idx = set(order[start:start + size])
        start += size
        train = [x for i, x in enumerate(items) if i not in test_idx]
        test = [x for i, x in enumerate(items) if i in test_idx]
        folds.append((train, test))
    return folds


# ---------------------------------------------------------------------------
# initial dictionary

PLACEHOLDER = "n"


def _instantiate(t: Term, word: str) -> Term:
    if isinstance(t, Const) and t.value == PLACEHOLDER:
        return Const(int(word) if word.isdigit() else word)
    if isinstance(t, Atom) and t.pred == PLACEHOLDER:
        return Atom(word, tuple(_instantiate(a, word) for a in t.args))
    kids = _children(t)
    if not kids:
        return t
    return _rebuild(t, (_instantiate(k, word) for k in kids))


@dataclass
class InitialDictionary:
    """Word-class templates plus the words known to belong to each class.

    A template meaning mentions the placeholder constant ``n`` (or predicate
    ``n``), replaced by the word when instantiated.
    """
    templates: list = field(default_factory=list)  # (word_class, Category, Term)
    words: dict = field(default_factory=dict)  # word_class -> [word, ...]

    def entries_for(self, word: str, word_class: str) -> list:
        return [LexicalEntry((word,), cat, _instantiate(sem, word))
                for cls, cat, sem in self.templates if cls == word_class]

    def lexicon(self, extra_nouns: Iterable[str] = ()) -> Lexicon:
        lex = Lexicon()
        words = {cls: list(ws) for cls, ws in self.words.items()}
        nouns = words.setdefault("noun", [])
        for w in extra_nouns:
            if w not in nouns:
                nouns.append(w)
        for cls, ws in words.items():
            for w in ws:
                for e in self.entries_for(w, cls):
                    lex.add(e)
        return lex

    def dumps(self) -> str:
        out = [DICTIONARY_HEADER, "[templates]"]
        out.extend("\t".join((cls, str(cat), to_text(sem))) for cls, cat, sem in self.templates)
        out.append("[words]")
        out.extend(f"{cls}: {', '.join(ws)}" for cls, ws in self.words.items())
        return "\n".join(out) + "\n"


def loads_initial_dictionary(text: str) -> InitialDictionary:
    lines = text.splitlines()
    if not lines or lines[0].strip() != DICTIONARY_HEADER:
        raise CorpusFormatError(f"line 1: expected header {DICTIONARY_HEADER!r}")
    d = InitialDictionary()
    section = None
    for no, raw in enumerate(lines[1:], 2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            continue
        if section == "templates":
            parts = raw.split("\t")
            if len(parts) != 3:
                raise CorpusFormatError(f"line {no}: expected 'class TAB category TAB term'")
            try:
                d.templates.append((parts[0].strip(), parse_category(parts[1]), parse_term(parts[2])))
            except ValueError as exc:
                raise CorpusFormatError(f"line {no}: {exc}") from None
        elif section == "words":
            cls, sep, ws = line.partition(":")
            if not sep:
                raise CorpusFormatError(f"line {no}: expected 'class: w1, w2, ...'")
            d.words.setdefault(cls.strip(), []).extend(w.strip() for w in ws.split(",") if w.strip())
        else:
            raise CorpusFormatError(f"line {no}: content outside [templates]/[words]")
    return d


def load_initial_dictionary(path) -> InitialDictionary:
    return loads_initial_dictionary(Path(path).read_text(encoding="utf-8"))
