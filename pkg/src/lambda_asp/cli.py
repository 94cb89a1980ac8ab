"""Command-line entry point: train, translate, solve, eval and inverse."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .asp import serialize_rule, validate_rule
from .ccg import Lexicon
from .corpus import (
    CorpusFormatError, data_path, load_corpus_dir, load_initial_dictionary,
    load_pairs, load_puzzle, preprocess,
)
from .evaluation import cross_validate, evaluate_puzzles
from .inverse import inverse_l, inverse_r
from .learner import TrainedModel, train, translate
from .solver import ExternalSolverError, solution_status, solve, solve_external
from .terms import TermSyntaxError, parse_term, to_text

log = logging.getLogger("lambda_asp")

DEFAULT_DICTIONARY = "table4.dict"


class UsageError(Exception):
    pass


def _dictionary(path):
    return load_initial_dictionary(path if path else data_path(DEFAULT_DICTIONARY))


def _training_data(corpus: str):
    """(pairs, nouns) from a .pairs file, a .puz file or a directory of puzzles."""
    path = Path(corpus)
    if not path.exists():
        raise UsageError(f"corpus not found: {corpus}")
    if path.is_dir():
        puzzles = load_corpus_dir(path)
    elif path.suffix == ".pairs":
        return load_pairs(path), []
    else:
        puzzles = [load_puzzle(path)]
    pairs, nouns = [], set()
    for p in puzzles:
        pairs.extend(p.training_pairs())
        nouns |= {str(e) for e in p.domain.all_elements()}
    return pairs, sorted(nouns)


def cmd_train(args) -> int:
    if not args.corpus:
        raise UsageError("train needs --corpus")
    if not args.model:
        raise UsageError("train needs --model (output path)")
    pairs, nouns = _training_data(args.corpus)
    d = _dictionary(args.dictionary)
    nouns = sorted(set(nouns) | set(d.words.get("noun", ())))
    model = train(pairs, d.lexicon(), args.iterations, args.seed, nouns=nouns)
    model.save(args.model)
    for h in model.history:
        print(f"iteration {h.iteration:>2}: parseable {h.parseable}/{len(pairs)}  "
              f"learned {h.learned}  skipped {h.skipped}  log-likelihood {h.log_likelihood:.4f}")
    print(f"wrote {args.model} ({len(model.lexicon)} entries)")
    return 0


def _load_model(path) -> TrainedModel:
    if not path:
        raise UsageError("--model is required")
    if not Path(path).exists():
        raise UsageError(f"model file not found: {path}")
    return TrainedModel.load(path)


def cmd_translate(args) -> int:
    model = _load_model(args.model)
    if args.sentence is None and not args.puzzle:
        raise UsageError("translate needs --sentence or --puzzle")
    if args.puzzle:
        p = load_puzzle(args.puzzle)
        nouns = sorted(str(e) for e in p.domain.all_elements())
        for i, c in enumerate(p.clues, 1):
            r = translate(p.tokens(c), model, nouns)
            ok = r is not None and validate_rule(r, p.domain)
            print(f"{i}. {serialize_rule(r) if ok else 'DISCARDED'}")
        return 0
    r = translate(preprocess(args.sentence), model)
    print(serialize_rule(r) if r is not None else "DISCARDED")
    return 0


def cmd_solve(args) -> int:
    if not args.puzzle:
        raise UsageError("solve needs --puzzle")
    p = load_puzzle(args.puzzle)
    if args.gold:
        rules = p.gold_rules()
        if len(rules) != len(p.clues):
            print(f"note: {len(p.clues) - len(rules)} clue(s) have no gold rule", file=sys.stderr)
    else:
        model = _load_model(args.model)
        nouns = sorted(str(e) for e in p.domain.all_elements())
        rules = []
        for c in p.clues:
            r = translate(p.tokens(c), model, nouns)
            if r is not None and validate_rule(r, p.domain):
                rules.append(r)
        print(f"{len(rules)}/{len(p.clues)} clues translated")
    models = solve_external(p.domain, rules, args.external_solver) if args.external_solver else solve(p.domain, rules)
    status = solution_status(models)
    print(f"status: {status}")
    if status.kind == "unique":
        print(models[0].format_table())
    return 0


def cmd_eval(args) -> int:
    if not args.corpus:
        raise UsageError("eval needs --corpus (a directory of .puz files)")
    path = Path(args.corpus)
    if not path.is_dir():
        raise UsageError(f"--corpus must be a directory of puzzles: {args.corpus}")
    puzzles = load_corpus_dir(path)
    train_ids = [x.strip() for x in args.train_ids.split(",") if x.strip()] if args.train_ids else None
    if not train_ids and len(puzzles) < args.folds:
        raise UsageError(f"{len(puzzles)} puzzles cannot be split into {args.folds} folds; lower --folds")
    report = cross_validate(puzzles, args.folds, args.seed, args.iterations, _dictionary(args.dictionary),
                            train_ids, args.external_solver)
    print(report.format_table(), end="")
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    return 0


def cmd_inverse(args) -> int:
    h, g = parse_term(args.h), parse_term(args.g)
    f = inverse_l(h, g) if args.side.upper() == "L" else inverse_r(h, g)
    print(to_text(f) if f is not None else "NONE")
    return 0 if f is not None else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lambda-asp", description="Translate puzzle clues into ASP and solve puzzles.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *names):
        if "corpus" in names:
            p.add_argument("--corpus", help="puzzle directory, .puz file or .pairs file")
        if "puzzle" in names:
            p.add_argument("--puzzle", help="puzzle file (.puz)")
        if "model" in names:
            p.add_argument("--model", help="model file")
        if "train" in names:
            p.add_argument("--iterations", type=int, default=10, help="training iterations T (default 10)")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--dictionary", help="initial dictionary file (default: bundled one)")
        if "external" in names:
            p.add_argument("--external-solver", metavar="CMD",
                           help="solve with an external ASP solver, e.g. 'clingo' or 'python3 -m clingo'")

    p = sub.add_parser("train", help="learn a model from training pairs")
    common(p, "corpus", "model", "train")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="translate a sentence or all clues of a puzzle")
    common(p, "model", "puzzle")
    p.add_argument("--sentence")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("solve", help="solve a puzzle from gold rules or a model's translations")
    common(p, "puzzle", "model", "external")
    p.add_argument("--gold", action="store_true", help="use the gold rules in the puzzle file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="k-fold evaluation over a puzzle corpus")
    common(p, "corpus", "train", "external")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--train-ids", help="comma-separated puzzle ids used for training (single split)")
    p.add_argument("--report", help="write the machine-readable report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inverse", help="run an inverse lambda operator")
    p.add_argument("--h", required=True, help="the result term")
    p.add_argument("--g", required=True, help="the known term")
    p.add_argument("--side", default="L", choices=["L", "R", "l", "r"])
    p.set_defaults(func=cmd_inverse)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(2, f"lambda-asp: error: {exc}\n")
    except (CorpusFormatError, TermSyntaxError, ValueError, ExternalSolverError, OSError) as exc:
        print(f"lambda-asp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
