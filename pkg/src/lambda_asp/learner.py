"""Lexicon induction and PCCG parameter estimation.

Training alternates two steps over the corpus: lexical generation proposes
new entries with the inverse operators (plus ``λx.x`` for modifiers and
noun templates instantiated on demand) and keeps only those that re-derive
the gold rule; parameter estimation then takes one gradient step per pair
on the conditional log-likelihood of the gold derivations.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from .asp import Constraint, rule_from_term, term_from_rule
from .ccg import (
    Backward, CatAtom, Category, Derivation, Forward, LexicalEntry, Lexicon,
    DEFAULT_WEIGHT, best_parse, parse_all, score,
)
from .corpus import TrainingPair
from .inverse import inverse_l, inverse_r
from .terms import (
    Const, Lam, Term, TypeMismatch, Var, alpha_eq, alpha_key, apply, normalize,
    subterms, tidy,
)

log = logging.getLogger(__name__)

__all__ = [
    "TrainingPair", "TrainedModel", "IterationStats", "derivation_log_prob",
    "lexical_generation", "update_parameters", "generalize", "train", "translate",
    "gold_derivations", "MODEL_HEADER", "IDENTITY",
]

IDENTITY = Lam("x", Var("x"))
MODEL_HEADER = "# lambda-asp model v1"

# at most this many syntactic trees are tried per sentence
MAX_TREES = 64
# without supertags, at most this many tokens may lack an entry
MAX_UNKNOWN = 2


def _logsumexp(xs):
    m = max(xs)
    return m + math.log(sum(math.exp(x - m) for x in xs))


def derivation_log_prob(d: Derivation, tokens, lexicon: Lexicon, theta=None) -> float:
    """log P(d | tokens) under the log-linear model over all parses."""
    weights = lexicon.weights if theta is None else theta
    parses = parse_all(tokens, lexicon)
    sig = d.signature()
    if not any(p.signature() == sig for p in parses):
        raise ValueError("derivation is not a parse of the given tokens")
    return score(d, weights) - _logsumexp([score(p, weights) for p in parses])


def _gold_term(gold) -> Term:
    if isinstance(gold, Constraint):
        return normalize(term_from_rule(gold))
    return normalize(gold)


def gold_derivations(parses: Sequence[Derivation], gold) -> list:
    g = alpha_key(_gold_term(gold))
    return [d for d in parses if alpha_key(d.semantics) == g]


# ---------------------------------------------------------------------------
# syntactic trees

@dataclass(frozen=True)
class _Node:
    category: Category
    span: tuple
    rule: str = "lex"
    children: tuple = ()

    def leaves(self):
        if self.rule == "lex":
            return [self]
        return self.children[0].leaves() + self.children[1].leaves()


def _is_modifier(c: Category) -> bool:
    return isinstance(c, (Forward, Backward)) and c.result == c.arg


def _subcategories(c: Category):
    yield c
    if isinstance(c, (Forward, Backward)):
        yield from _subcategories(c.result)
        yield from _subcategories(c.arg)


def _guess_categories(lexicon: Lexicon) -> list:
    """Categories tried for a token without entries: known ones and modifiers of their parts."""
    seen = {}
    for c in lexicon.categories():
        for s in _subcategories(c):
            seen.setdefault(str(s), s)
    base = list(seen.values())
    for s in base:
        for m in (Forward(s, s), Backward(s, s)):
            seen.setdefault(str(m), m)
    return list(seen.values())


def _syntax_trees(leaf_cats: Sequence[Sequence[Category]], root: Category, limit: int = MAX_TREES) -> list:
    n = len(leaf_cats)
    chart: Dict[tuple, Dict[Category, list]] = {}
    for i, cats in enumerate(leaf_cats):
        chart[(i, i + 1)] = {c: [_Node(c, (i, i + 1))] for c in cats}
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length
            cell: Dict[Category, list] = {}
            for k in range(i + 1, j):
                for lc, lnodes in chart[(i, k)].items():
                    for rc, rnodes in chart[(k, j)].items():
                        if isinstance(lc, Forward) and lc.arg == rc:
                            bucket = cell.setdefault(lc.result, [])
                            for a in lnodes:
                                for b in rnodes:
                                    if len(bucket) < limit:
                                        bucket.append(_Node(lc.result, (i, j), ">", (a, b)))
                        if isinstance(rc, Backward) and rc.arg == lc:
                            bucket = cell.setdefault(rc.result, [])
                            for a in lnodes:
                                for b in rnodes:
                                    if len(bucket) < limit:
                                        bucket.append(_Node(rc.result, (i, j), "<", (a, b)))
            chart[(i, j)] = cell
    return chart.get((0, n), {}).get(root, [])[:limit]


# ---------------------------------------------------------------------------
# solving a tree for its unknown leaves

class _TreeSolver:
    """Top-down inverse solving on one syntactic tree.

    ``alts`` maps each leaf start index to the candidate meanings of the
    leaf, or ``None`` when the leaf is the one being solved for.
    """

    def __init__(self, alts: Dict[int, Optional[list]]):
        self.alts = alts
        self._memo = {}

    def known(self, node) -> Optional[list]:
        """All meanings of a fully known subtree (``None`` if it holds the unknown leaf)."""
        key = node.span
        if key in self._memo:
            return self._memo[key]
        if node.rule == "lex":
            out = self.alts[node.span[0]]
        else:
            left, right = (self.known(c) for c in node.children)
            if left is None or right is None:
                out = None
            else:
                fun, arg = (left, right) if node.rule == ">" else (right, left)
                out, seen = [], set()
                for f in fun:
                    for a in arg:
                        try:
                            t = apply(f, a)
                        except TypeMismatch:
                            continue
                        k = alpha_key(t)
                        if k not in seen:
                            seen.add(k)
                            out.append(t)
        self._memo[key] = out
        return out

    def solve(self, node, target: Term) -> list:
        """Meanings for the unknown leaf under ``node`` that make it reduce to ``target``."""
        if node.rule == "lex":
            alts = self.alts[node.span[0]]
            if alts is None:
                return [target]
            return []
        left, right = node.children
        fun, arg = (left, right) if node.rule == ">" else (right, left)
        fun_known, arg_known = self.known(fun), self.known(arg)
        out = []
        if arg_known is not None and fun_known is None:
            for a in arg_known:
                f = inverse_l(target, a)
                if f is not None:
                    out.extend(self.solve(fun, f))
        elif fun_known is not None and arg_known is None:
            for f in fun_known:
                a = inverse_r(target, f)
                if a is not None:
                    out.extend(self.solve(arg, a))
        return out


def _entries_for(lexicon: Lexicon, token: str, cat: Category) -> list:
    return [e for e in lexicon.entries_for((token,)) if e.category == cat]


def _templates(lexicon: Lexicon) -> list:
    """Entries whose meaning mentions their own word: (category, word, semantics)."""
    out = []
    for e in lexicon:
        if len(e.phrase) != 1:
            continue
        word = e.phrase[0]
        if any(isinstance(s, Const) and str(s.value) == word for s in subterms(e.semantics)):
            out.append(e)
    return out


def _instantiate_template(e: LexicalEntry, word: str) -> LexicalEntry:
    old = e.phrase[0]
    value = int(word) if word.isdigit() else word

    def sub(t):
        if isinstance(t, Const) and str(t.value) == old:
            return Const(value)
        from .terms import _children, _rebuild
        kids = _children(t)
        return t if not kids else _rebuild(t, (sub(k) for k in kids))

    return LexicalEntry((word,), e.category, sub(e.semantics))


def _on_demand(lexicon: Lexicon, tokens, nouns: set) -> list:
    """Template entries for noun tokens that have none in the template's category."""
    temps = _templates(lexicon)
    out = []
    for tok in dict.fromkeys(tokens):
        if tok not in nouns:
            continue
        for e in temps:
            if e.phrase[0] == tok:
                continue
            new = _instantiate_template(e, tok)
            if new not in lexicon and new not in out:
                out.append(new)
    return out


def lexical_generation(pair: TrainingPair, lexicon: Lexicon, nouns: Iterable[str] = ()) -> set:
    """Verified new entries for one training pair.

    Each returned entry occurs in a derivation of the sentence whose root is
    alpha-equal to the gold rule; an already parseable sentence yields the
    empty set.
    """
    tokens = tuple(pair.tokens)
    if not tokens:
        return set()
    gold = _gold_term(pair.gold)
    gkey = alpha_key(gold)
    if gold_derivations(parse_all(tokens, lexicon, pair.supertags), gold):
        return set()

    nouns = set(nouns) | pair.constants()
    work = lexicon.copy()
    for e in _on_demand(lexicon, tokens, nouns):
        work.add(e)

    if pair.supertags is not None:
        per_token = [[c] for c in pair.supertags]
    else:
        guesses = None
        per_token = []
        unknown = 0
        for tok in tokens:
            cats = list({str(e.category): e.category for e in work.entries_for((tok,))}.values())
            if not cats:
                unknown += 1
                if guesses is None:
                    guesses = _guess_categories(work)
                cats = guesses
            per_token.append(cats)
        if unknown > MAX_UNKNOWN:
            return set()

    best, found = None, []
    for tree in _syntax_trees(per_token, CatAtom("S")):
        for level, entries in _solve_tree(tree, tokens, work, gold):
            if best is None or level < best:
                best, found = level, []
            if level == best:
                found.extend(e for e in entries if e not in found)
    if not found:
        return set()
    # keep entries that occur in some gold derivation, on-demand ones included
    trial = work.copy()
    for e in found:
        trial.add(e)
    used = []
    tags = pair.supertags
    for d in parse_all(tokens, trial, tags):
        if alpha_key(d.semantics) != gkey:
            continue
        for e in d.entries():
            if e not in lexicon and e not in used:
                used.append(e)
    return set(used)


def _configs(leaves, known):
    """(solved leaf or None, trivialized known leaves) in order of preference."""
    unknown = [l for l in leaves if not known[l.span[0]]]
    fixed = [l for l in unknown if not _is_modifier(l.category)]
    known_mods = [l for l in leaves if known[l.span[0]] and _is_modifier(l.category)]
    if len(fixed) > 1:
        return
    for n_triv in range(0, min(2, len(known_mods)) + 1):
        for triv in itertools.combinations(known_mods, n_triv):
            if not fixed:
                yield None, triv
            for t in fixed or unknown:
                yield t, triv
    # relearn a known leaf when nothing else works
    if not fixed:
        for l in leaves:
            if known[l.span[0]]:
                yield l, ()


def _solve_tree(tree, tokens, lexicon: Lexicon, gold: Term):
    leaves = tree.leaves()
    known = {l.span[0]: [e.semantics for e in _entries_for(lexicon, tokens[l.span[0]], l.category)]
             for l in leaves}
    gkey = alpha_key(gold)
    level_hits = None
    for target, triv in _configs(leaves, known):
        relearn = target is not None and bool(known[target.span[0]])
        level = (relearn, len(triv), target is not None)
        if level_hits is not None and level != level_hits:
            return
        alts = {}
        for l in leaves:
            i = l.span[0]
            if target is l:
                alts[i] = None
            elif l in triv or not known[i]:
                alts[i] = [IDENTITY] if _is_modifier(l.category) else []
            else:
                alts[i] = known[i]
        solver = _TreeSolver(alts)
        if target is None:
            sems = solver.known(tree) or []
            candidates = [[]] if any(alpha_key(s) == gkey for s in sems) else []
        else:
            candidates = [[s] for s in solver.solve(tree, gold)]
        for cand in candidates:
            entries = []
            for l in leaves:
                i = l.span[0]
                if target is l:
                    sem = tidy(cand[0])
                elif l in triv or not known[i]:
                    sem = IDENTITY
                else:
                    continue
                entries.append(LexicalEntry((tokens[i],), l.category, sem))
            if _verify(tokens, [l.category for l in leaves], lexicon, entries, gkey):
                level_hits = level
                yield level, entries


def _verify(tokens, cats, lexicon: Lexicon, entries, gkey) -> bool:
    trial = lexicon.copy()
    for e in entries:
        trial.add(e)
    return any(alpha_key(d.semantics) == gkey for d in parse_all(tokens, trial, cats))


# ---------------------------------------------------------------------------
# parameters

def update_parameters(theta: Dict[LexicalEntry, float], pairs: Sequence[TrainingPair], lexicon: Lexicon,
                      rate: float = 0.1, beam: Optional[int] = None):
    """One gradient step per pair on the marginal log-likelihood of gold derivations.

    Returns ``(new_theta, skipped)`` where ``skipped`` counts pairs without
    a gold-matching derivation.
    """
    theta = dict(theta)
    skipped = 0
    for pair in pairs:
        parses = parse_all(pair.tokens, lexicon, beam=beam, weights=theta)
        good = gold_derivations(parses, pair.gold)
        if not good:
            skipped += 1
            continue
        grad = _gradient(parses, good, theta)
        for e, g in grad.items():
            theta[e] = theta.get(e, DEFAULT_WEIGHT) + rate * g
    return theta, skipped


def _expectation(ds, theta) -> Counter:
    scores = [score(d, theta) for d in ds]
    z = _logsumexp(scores)
    out = Counter()
    for d, s in zip(ds, scores):
        p = math.exp(s - z)
        for e, c in d.features().items():
            out[e] += p * c
    return out


def _gradient(parses, good, theta) -> dict:
    pos, neg = _expectation(good, theta), _expectation(parses, theta)
    return {e: pos.get(e, 0.0) - neg.get(e, 0.0) for e in set(pos) | set(neg)}


def _gold_log_likelihood(pairs, lexicon: Lexicon, theta) -> float:
    total = 0.0
    for pair in pairs:
        parses = parse_all(pair.tokens, lexicon)
        good = gold_derivations(parses, pair.gold)
        if good:
            total += _logsumexp([score(d, theta) for d in good]) - _logsumexp([score(d, theta) for d in parses])
    return total


# ---------------------------------------------------------------------------
# generalization

def generalize(entries: Iterable[LexicalEntry], nouns: Iterable[str] = ()) -> set:
    """Entries plus template copies for nouns that lack them.

    A template is an entry whose meaning mentions the constant spelled like
    its own phrase (``earl ↦ λx.tuple(x,earl)``).
    """
    entries = list(entries)
    out = set(entries)
    templates = _templates(Lexicon(entries))
    for noun in nouns:
        for e in templates:
            if e.phrase == (noun,):
                continue
            out.add(_instantiate_template(e, noun))
    return out


# ---------------------------------------------------------------------------
# training

@dataclass
class IterationStats:
    iteration: int
    parseable: int
    learned: int
    skipped: int
    log_likelihood: float


@dataclass
class TrainedModel:
    lexicon: Lexicon
    iterations: int = 0
    seed: int = 0
    history: list = field(default_factory=list)

    @property
    def theta(self) -> Dict[LexicalEntry, float]:
        return self.lexicon.weights

    def dumps(self) -> str:
        head = [MODEL_HEADER, f"# iterations: {self.iterations}", f"# seed: {self.seed}"]
        return "\n".join(head) + "\n" + self.lexicon.dumps()

    def save(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "TrainedModel":
        lines = text.splitlines()
        if not lines or lines[0].strip() != MODEL_HEADER:
            raise ValueError(f"not a model file (expected {MODEL_HEADER!r} on line 1)")
        meta, i = {}, 1
        while i < len(lines) and lines[i].startswith("# ") and ":" in lines[i]:
            k, _, v = lines[i][2:].partition(":")
            meta[k.strip()] = v.strip()
            i += 1
        lex = Lexicon.loads("\n".join(lines[i:]))
        return cls(lex, int(meta.get("iterations", 0)), int(meta.get("seed", 0)))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def train(corpus: Sequence[TrainingPair], initial: Lexicon, iterations: int = 10, seed: int = 0,
          rate: float = 0.1, nouns: Iterable[str] = ()) -> TrainedModel:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    lex = initial.copy()
    nouns = set(nouns)
    rng = random.Random(seed)
    history = []
    corpus = list(corpus)
    for t in range(1, iterations + 1):
        learned = 0
        for pair in corpus:
            new = lexical_generation(pair, lex, nouns)
            for e in sorted(new, key=_entry_order):
                if lex.add(e, DEFAULT_WEIGHT):
                    learned += 1
        order = corpus[:]
        rng.shuffle(order)
        theta, skipped = update_parameters(lex.weights, order, lex, rate)
        lex.set_weights(theta)
        ll = _gold_log_likelihood(corpus, lex, lex.weights)
        stats = IterationStats(t, len(corpus) - skipped, learned, skipped, ll)
        log.info("iteration %d: %d parseable, %d learned, %d skipped, log-likelihood %.4f",
                 t, stats.parseable, learned, skipped, ll)
        history.append(stats)
    for e in sorted(generalize(list(lex), nouns), key=_entry_order):
        lex.add(e, DEFAULT_WEIGHT)
    return TrainedModel(lex, iterations, seed, history)


def _entry_order(e: LexicalEntry):
    from .terms import to_text
    return (e.phrase, str(e.category), to_text(e.semantics))


def translate(tokens: Sequence[str], model, nouns: Iterable[str] = ()) -> Optional[Constraint]:
    """Best-scoring translation as an ASP constraint, or ``None`` when there is none."""
    lex = model.lexicon if isinstance(model, TrainedModel) else model
    tokens = tuple(tokens)
    if not tokens:
        return None
    extra = _on_demand(lex, tokens, set(nouns)) if nouns else []
    if extra:
        lex = lex.copy()
        for e in extra:
            lex.add(e, DEFAULT_WEIGHT)
    d = best_parse(tokens, lex)
    if d is None:
        return None
    return rule_from_term(d.semantics)
