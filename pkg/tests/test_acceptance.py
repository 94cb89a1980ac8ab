"""Acceptance criteria 1-10.

Run under pytest (one PASS/FAIL line per criterion is printed in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import functools
import importlib.util
import math
import random
import shutil
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lambda_asp.asp import (  # noqa: E402
    background_module, encode_domain, generation_module, parse_rule, serialize_rule,
)
from lambda_asp.ccg import Lexicon, parse_all  # noqa: E402
from lambda_asp.corpus import (  # noqa: E402
    data_path, load_initial_dictionary, load_pairs, load_puzzle, preprocess,
)
from lambda_asp.evaluation import compound_accuracy, rule_equivalent  # noqa: E402
from lambda_asp.inverse import inverse_l, inverse_r  # noqa: E402
from lambda_asp.learner import lexical_generation, train, translate  # noqa: E402
from lambda_asp.solver import brute_force, solution_status, solve, solve_external  # noqa: E402
from lambda_asp.terms import App, alpha_eq, normalize, parse_term  # noqa: E402
from puzzlegen import oracle_models, random_instance, sample_oracle  # noqa: E402
from termgen import random_pairs  # noqa: E402

RESULTS = {}

TABLE1 = "Earl arrived immediately before the man with the Rooster."
TABLE1_ROOT = (":- tuple(I,earl), tuple(J,rooster), tuple(I,X), tuple(J,Y), "
               "etype(A,rank), element(A,X), element(A,Y), X != Y-1.")
TABLE2 = "Miss Hanson is withdrawing more than the customer whose number is 3989."
TABLE2_ROOT = (":- tuple(I,hanson), tuple(J,3989), tuple(I,X), tuple(J,Y), "
               "etype(A,rank), element(A,X), element(A,Y), X > Y, I!=J.")
NOT = "λz. z@(λx. λy. :- x@I, y@I.)"
SAMPLE_ROWS = [("earl", "fire", "ox", 1), ("philip", "metal", "rooster", 2), ("tony", "water", "cow", 3),
               ("lucy", "earth", "dragon", 4), ("ivana", "wood", "horse", 5)]


def clingo_command():
    if shutil.which("clingo"):
        return "clingo"
    if importlib.util.find_spec("clingo") is not None:
        return f"{sys.executable} -m clingo"
    return None


@functools.lru_cache(maxsize=None)
def trained_table3():
    pairs = load_pairs(data_path("table3.pairs"))
    d = load_initial_dictionary(data_path("table4.dict"))
    return pairs, d, train(pairs, d.lexicon(), iterations=10, seed=0, nouns=d.words["noun"])


# ---------------------------------------------------------------------------
# checks, each returning (ok, detail)

def criterion_1():
    lex = Lexicon.load(data_path("table1.lex"))
    t0 = time.perf_counter()
    parses = parse_all(preprocess(TABLE1), lex)
    dt = time.perf_counter() - t0
    ok = len(parses) == 1 and alpha_eq(parses[0].semantics, parse_term(TABLE1_ROOT)) and dt < 1.0
    return ok, f"{len(parses)} derivation(s), root exact, {dt * 1000:.1f} ms"


def criterion_2():
    lex = Lexicon.load(data_path("table2.lex"))
    parses = parse_all(preprocess(TABLE2, multiwords=["miss hanson"]), lex)
    ok = len(parses) == 1 and alpha_eq(parses[0].semantics, parse_term(TABLE2_ROOT))
    return ok, f"{len(parses)} derivation(s)"


def criterion_3():
    n, violations, returned, recovered = 10000, 0, 0, 0
    for f, g in random_pairs(n, seed=2024):
        h = normalize(App(f, g))
        got = inverse_l(h, g)
        if got is None:
            continue
        returned += 1
        if not alpha_eq(normalize(App(got, g)), h):
            violations += 1
        elif alpha_eq(got, f):
            recovered += 1
    # worked example: "arrived immediately before ..." and "immediately"
    root = parse_term(TABLE1_ROOT)
    vp = inverse_l(root, parse_term("λx. tuple(x, earl)"))
    want_vp = parse_term("λz. :- z@I, tuple(J,rooster), tuple(I,X), tuple(J,Y), etype(A,rank), "
                         "element(A,X), element(A,Y), X != Y-1.")
    before = parse_term("λy. λz. :- z@I, tuple(J,rooster), tuple(I,X), tuple(J,Y), etype(A,rank), "
                        "element(A,X), element(A,Y), y@X@Y.")
    arrived_imm = inverse_r(want_vp, before)
    imm = inverse_l(arrived_imm, parse_term("λx. x")) if arrived_imm is not None else None
    worked = alpha_eq(vp, want_vp) and imm is not None and alpha_eq(imm, parse_term("λx. λy. λz. x@(y != z-1)"))
    ok = violations == 0 and worked
    return ok, (f"{n} pairs, {violations} violations, {returned / n:.1%} answered, "
                f"{recovered / n:.1%} recovered the generating term, worked example {'ok' if worked else 'FAILED'}")


def criterion_4():
    p = load_puzzle(data_path("puzzles/sample.puz"))
    t0 = time.perf_counter()
    models = solve(p.domain, p.gold_rules())
    dt = time.perf_counter() - t0
    oracle = sample_oracle()
    unique = str(solution_status(models)) == "unique"
    oracle_rows = [(n, e, a, i + 1) for i, (n, e, a) in enumerate(zip(*oracle[0]))] if len(oracle) == 1 else None
    matches = unique and models[0].rows() == SAMPLE_ROWS == oracle_rows
    ok = unique and matches and dt < 1.0
    return ok, f"status {solution_status(models)}, oracle models {len(oracle)}, {dt * 1000:.0f} ms"


def criterion_5():
    rng = random.Random(5)
    mismatches = 0
    for _ in range(200):
        d, clues = random_instance(rng)
        got = {m.table for m in solve(d, clues)}
        if got != {m.table for m in brute_force(d, clues)} or got != oracle_models(d, clues):
            mismatches += 1
    return mismatches == 0, f"200 instances, {mismatches} mismatches"


def criterion_6():
    pairs, _, model = trained_table3()
    good = sum(rule_equivalent(translate(p.tokens, model), p.gold) for p in pairs)
    return good == len(pairs) == 15, f"{good}/{len(pairs)} rule-equivalent after T=10"


def criterion_7():
    pairs, d, model = trained_table3()
    new = lexical_generation(pairs[0], d.lexicon(), d.words["noun"])
    found = any(e.phrase == ("not",) and alpha_eq(e.semantics, parse_term(NOT)) for e in new)
    has = [(e, w) for e, w in model.lexicon.weights.items() if e.phrase == ("has",)]
    constraint = [w for e, w in has if ":-" in str(e.semantics)]
    trivial = [w for e, w in has if ":-" not in str(e.semantics)]
    ordered = bool(constraint) and bool(trivial) and max(constraint) > max(trivial)
    return found and ordered, (f"'not' {'found' if found else 'missing'}; has: constraint "
                               f"{max(constraint, default=math.nan):.3f} vs trivial max "
                               f"{max(trivial, default=math.nan):.3f}")


def criterion_8():
    v = compound_accuracy(0.9, 10)
    return abs(v - 0.349) <= 0.0005, f"{v:.5f}"


def criterion_9():
    p = load_puzzle(data_path("puzzles/sample.puz"))
    rules = encode_domain(p.domain) + generation_module() + background_module() + p.gold_rules()
    rules += [pair.gold for pair in load_pairs(data_path("table3.pairs"))]
    bad = [r for r in rules if parse_rule(serialize_rule(r)) != r]
    cmd = clingo_command()
    if cmd is None:
        return not bad, f"{len(rules)} rules round-trip, {len(bad)} failures; external solver skipped (not installed)"
    ext = solve_external(p.domain, p.gold_rules(), cmd)
    ext_ok = len(ext) == 1 and ext[0].rows() == SAMPLE_ROWS
    return not bad and ext_ok, (f"{len(rules)} rules round-trip, {len(bad)} failures; "
                                f"external solver {'accepted' if ext_ok else 'REJECTED'} the program")


def criterion_10():
    with tempfile.TemporaryDirectory() as tmp:
        reports = []
        for k in range(2):
            out = Path(tmp) / f"r{k}.json"
            subprocess.run([sys.executable, "-m", "lambda_asp", "eval", "--corpus", str(data_path("puzzles")),
                            "--folds", "2", "--seed", "42", "--report", str(out)],
                           check=True, capture_output=True)
            reports.append(out.read_bytes())
    same = reports[0] == reports[1]
    return same, f"two eval runs, {len(reports[0])} bytes, {'identical' if same else 'DIFFERENT'}"


CHECKS = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}


def _line(n, ok, detail):
    return f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def _run(n):
    ok, detail = CHECKS[n]()
    RESULTS[n] = (ok, detail)
    print(_line(n, ok, detail))
    assert ok, detail


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n):
    _run(n)


if __name__ == "__main__":
    failed = 0
    for n in CHECKS:
        ok, detail = CHECKS[n]()
        failed += not ok
        print(_line(n, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
