"""Clue and puzzle metrics, rule equivalence and the k-fold harness."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence

from .asp import (
    ChoiceRule, Comparison, Constant, Constraint, DefRule, Fact, Literal, Offset,
    Variable, serialize_rule, validate_rule,
)
from .ccg import Lexicon
from .corpus import InitialDictionary, PuzzleInstance, TrainingPair, kfold_split
from .learner import TrainedModel, train, translate
from .solver import solution_status, solve, solve_external

__all__ = [
    "rule_equivalent", "exact_match", "compound_accuracy", "evaluate_clues",
    "evaluate_puzzles", "ClueResult", "ClueScores", "PuzzleResult", "EvalReport",
    "cross_validate", "f_measure", "REPORT_FORMAT",
]

REPORT_FORMAT = "lambda-asp-eval v1"

_FLIP = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}
_SYMMETRIC = {"=", "!="}


# ---------------------------------------------------------------------------
# rule comparison

def _term_match(a, b, m: dict, used: set):
    """Extend the variable bijection ``m`` so that ``a`` maps onto ``b``."""
    if isinstance(a, Variable):
        if not isinstance(b, Variable):
            return None
        if a.name in m:
            return m if m[a.name] == b.name else None
        if b.name in used:
            return None
        return {**m, a.name: b.name}
    if isinstance(a, Offset):
        if not isinstance(b, Offset) or a.delta != b.delta:
            return None
        return _term_match(a.base, b.base, m, used)
    return m if a == b else None


def _terms_match(xs, ys, m):
    if len(xs) != len(ys):
        return None
    for x, y in zip(xs, ys):
        m = _term_match(x, y, m, set(m.values()))
        if m is None:
            return None
    return m


def _item_matches(a, b, m: dict) -> list:
    """Every way item ``a`` maps onto item ``b`` under an extension of ``m``."""
    if isinstance(a, Literal):
        if not isinstance(b, Literal) or (a.pred, len(a.args), a.negated) != (b.pred, len(b.args), b.negated):
            return []
        r = _terms_match(a.args, b.args, m)
        return [r] if r is not None else []
    if isinstance(a, Comparison) and isinstance(b, Comparison):
        out = []
        if a.op == b.op:
            r = _terms_match((a.left, a.right), (b.left, b.right), m)
            if r is not None:
                out.append(r)
        if _FLIP[a.op] == b.op and (a.op != b.op or a.op in _SYMMETRIC):
            r = _terms_match((a.left, a.right), (b.right, b.left), m)
            if r is not None and r not in out:
                out.append(r)
        return out
    return []


def _match_bag(xs, ys, m) -> bool:
    if not xs:
        return True
    first, rest = xs[0], xs[1:]
    for k, y in enumerate(ys):
        for m2 in _item_matches(first, y, m):
            if _match_bag(rest, ys[:k] + ys[k + 1:], m2):
                return True
    return False


def _parts(r):
    if isinstance(r, Constraint):
        return ("constraint", (), tuple(r.body))
    if isinstance(r, DefRule):
        return ("rule", (r.head,), tuple(r.body))
    if isinstance(r, Fact):
        return ("fact", (r.atom,), ())
    if isinstance(r, ChoiceRule):
        return (("choice", r.lower, r.upper), (r.head, r.condition), tuple(r.body))
    return (None, (), ())


def rule_equivalent(a, b) -> bool:
    """Equal up to body (and head) permutation and a consistent variable renaming."""
    if a is None or b is None:
        return False
    ka, ha, ba = _parts(a)
    kb, hb, bb = _parts(b)
    if ka is None or ka != kb or len(ha) != len(hb) or len(ba) != len(bb):
        return False
    if isinstance(a, ChoiceRule):
        m = _terms_match(ha[0].args + ha[1].args, hb[0].args + hb[1].args, {})
        if m is None or (ha[0].pred, ha[1].pred) != (hb[0].pred, hb[1].pred):
            return False
        return _match_bag(list(ba), list(bb), m)
    return _match_bag(list(ha) + list(ba), list(hb) + list(bb), {})


def exact_match(a, b) -> bool:
    """Equal up to variable renaming only; item order must agree."""
    if a is None or b is None:
        return False
    ka, ha, ba = _parts(a)
    kb, hb, bb = _parts(b)
    if ka is None or ka != kb:
        return False
    xs, ys = list(ha) + list(ba), list(hb) + list(bb)
    if len(xs) != len(ys):
        return False
    m = {}
    for x, y in zip(xs, ys):
        if isinstance(x, Comparison):
            ok = isinstance(y, Comparison) and x.op == y.op
            m = _terms_match((x.left, x.right), (y.left, y.right), m) if ok else None
        else:
            opts = _item_matches(x, y, m)
            m = opts[0] if opts else None
        if m is None:
            return False
    return True


def compound_accuracy(per_clue: float, clues_per_puzzle: int) -> float:
    """Chance that all clues of a puzzle are right when each one is right with ``per_clue``."""
    if not 0.0 <= per_clue <= 1.0:
        raise ValueError("per-clue accuracy must lie in [0, 1]")
    if clues_per_puzzle < 0:
        raise ValueError("number of clues must be non-negative")
    return per_clue ** clues_per_puzzle


def f_measure(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


# ---------------------------------------------------------------------------
# clue level

@dataclass
class ClueResult:
    sentence: str
    gold: str
    produced: Optional[str]
    equivalent: bool
    exact: bool


@dataclass
class ClueScores:
    precision: float
    recall: float
    produced: int
    equivalent: int
    exact: int
    total: int
    precision_defined: bool
    outcomes: list = field(default_factory=list)

    def __iter__(self):
        yield self.precision
        yield self.recall

    @property
    def f_measure(self) -> float:
        return f_measure(self.precision, self.recall)


def _translate_pair(model, pair: TrainingPair, nouns=(), domain=None):
    rule = translate(pair.tokens, model, nouns)
    if rule is not None and domain is not None and not validate_rule(rule, domain):
        return None
    return rule


def evaluate_clues(model, pairs: Sequence[TrainingPair], nouns: Iterable[str] = (), domain=None) -> ClueScores:
    nouns = list(nouns)
    outcomes = []
    for pair in pairs:
        rule = _translate_pair(model, pair, nouns, domain)
        outcomes.append(ClueResult(
            pair.text or " ".join(pair.tokens), serialize_rule(pair.gold),
            serialize_rule(rule) if rule is not None else None,
            rule_equivalent(rule, pair.gold), exact_match(rule, pair.gold)))
    return _scores(outcomes)


def _scores(outcomes) -> ClueScores:
    produced = sum(o.produced is not None for o in outcomes)
    eq = sum(o.equivalent for o in outcomes)
    ex = sum(o.exact for o in outcomes)
    total = len(outcomes)
    return ClueScores(eq / produced if produced else 0.0, ex / total if total else 0.0,
                      produced, eq, ex, total, produced > 0, outcomes)


# ---------------------------------------------------------------------------
# puzzle level

@dataclass
class PuzzleResult:
    id: str
    status: str
    solved: bool
    rules_used: int
    discarded: int


def _reference(p: PuzzleInstance, external=None):
    gold = p.gold_rules()
    if len(gold) != len(p.clues):
        return None
    models = solve_external(p.domain, gold, external) if external else solve(p.domain, gold)
    return models[0] if len(models) == 1 else None


def evaluate_puzzles(model, puzzles: Sequence[PuzzleInstance], use_gold: bool = False,
                     external: Optional[str] = None) -> list:
    """Solve every puzzle from translated clues (or its gold rules)."""
    results = []
    for p in puzzles:
        if use_gold:
            rules, discarded = p.gold_rules(), 0
        else:
            rules, discarded = [], 0
            nouns = sorted(str(e) for e in p.domain.all_elements())
            for c in p.clues:
                r = translate(p.tokens(c), model, nouns)
                if r is None or not validate_rule(r, p.domain):
                    discarded += 1
                else:
                    rules.append(r)
        models = solve_external(p.domain, rules, external) if external else solve(p.domain, rules)
        status = solution_status(models)
        ref = _reference(p, external)
        solved = status.kind == "unique" and ref is not None and models[0] == ref
        results.append(PuzzleResult(p.id, str(status), solved, len(rules), discarded))
    return results


# ---------------------------------------------------------------------------
# report

@dataclass
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    precision_defined: bool
    clues: list
    puzzles: list
    folds: list
    seed: int
    iterations: int

    @property
    def solved(self) -> int:
        return sum(p.solved for p in self.puzzles)

    @property
    def accuracy(self) -> float:
        return self.solved / len(self.puzzles) if self.puzzles else 0.0

    def to_json(self) -> str:
        data = {
            "format": REPORT_FORMAT,
            "seed": self.seed,
            "iterations": self.iterations,
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f_measure": round(self.f_measure, 6),
            "precision_defined": self.precision_defined,
            "puzzle_accuracy": {"solved": self.solved, "total": len(self.puzzles)},
            "folds": self.folds,
            "puzzles": [asdict(p) for p in self.puzzles],
            "clues": [asdict(c) for c in self.clues],
        }
        return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def format_table(self) -> str:
        lines = [
            f"{'Precision':<10} {'Recall':<10} {'F-measure':<10}",
            f"{100 * self.precision:<10.2f} {100 * self.recall:<10.2f} {100 * self.f_measure:<10.2f}",
        ]
        if not self.precision_defined:
            lines.append("(no clue was translated; precision reported as 0)")
        lines.append("")
        lines.append(f"Puzzles solved: {self.solved}/{len(self.puzzles)} ({100 * self.accuracy:.1f}%)")
        for p in self.puzzles:
            lines.append(f"  {p.id:<20} {p.status:<14} {'solved' if p.solved else '-'}")
        return "\n".join(lines) + "\n"


def _pairs_of(puzzles) -> list:
    out = []
    for p in puzzles:
        out.extend(p.training_pairs())
    return out


def _nouns_of(puzzles, dictionary: Optional[InitialDictionary]) -> list:
    nouns = set(dictionary.words.get("noun", ())) if dictionary else set()
    for p in puzzles:
        nouns |= {str(e) for e in p.domain.all_elements()}
    return sorted(nouns)


def _run_split(train_set, test_set, dictionary, iterations, seed, external):
    initial = dictionary.lexicon() if dictionary else Lexicon()
    model = train(_pairs_of(train_set), initial, iterations, seed, nouns=_nouns_of(train_set, dictionary))
    outcomes = []
    for p in test_set:
        nouns = sorted(str(e) for e in p.domain.all_elements())
        outcomes.extend(evaluate_clues(model, p.training_pairs(), nouns, p.domain).outcomes)
    puzzles = evaluate_puzzles(model, test_set, external=external)
    return outcomes, puzzles


def cross_validate(puzzles: Sequence[PuzzleInstance], folds: int = 10, seed: int = 0, iterations: int = 10,
                   dictionary: Optional[InitialDictionary] = None, train_ids: Optional[Sequence[str]] = None,
                   external: Optional[str] = None) -> EvalReport:
    """k-fold evaluation, or a single split when ``train_ids`` names the training puzzles."""
    puzzles = list(puzzles)
    if train_ids:
        wanted = set(train_ids)
        missing = wanted - {p.id for p in puzzles}
        if missing:
            raise ValueError(f"unknown puzzle ids: {', '.join(sorted(missing))}")
        splits = [([p for p in puzzles if p.id in wanted], [p for p in puzzles if p.id not in wanted])]
    else:
        splits = kfold_split(puzzles, folds, seed)
    clue_out, puzzle_out, fold_info = [], [], []
    for k, (tr, te) in enumerate(splits, 1):
        outcomes, results = _run_split(tr, te, dictionary, iterations, seed, external)
        clue_out.extend(outcomes)
        puzzle_out.extend(results)
        fold_info.append({"fold": k, "train": [p.id for p in tr], "test": [p.id for p in te]})
    s = _scores(clue_out)
    return EvalReport(s.precision, s.recall, f_measure(s.precision, s.recall), s.precision_defined,
                      clue_out, puzzle_out, fold_info, seed, iterations)
