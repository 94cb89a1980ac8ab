import importlib.util
import random
import shutil
import sys

import pytest

from lambda_asp.asp import PuzzleDomain, parse_rule
from lambda_asp.corpus import data_path, load_puzzle
from lambda_asp.solver import (
    UnknownConstant, all_assignments, brute_force, program_text, solution_status, solve,
    solve_external,
)
from puzzlegen import oracle_models, random_instance, sample_oracle


def clingo_command():
    if shutil.which("clingo"):
        return "clingo"
    if importlib.util.find_spec("clingo") is not None:
        return f"{sys.executable} -m clingo"
    return None


@pytest.fixture(scope="module")
def sample():
    return load_puzzle(data_path("puzzles/sample.puz"))


def test_sample_unique_and_matches_oracle(sample):
    models = solve(sample.domain, sample.gold_rules())
    assert str(solution_status(models)) == "unique"
    oracle = sample_oracle()
    assert len(oracle) == 1
    name, elem, anim = oracle[0]
    assert models[0].rows() == [(n, e, a, i + 1) for i, (n, e, a) in enumerate(zip(name, elem, anim))]
    assert models[0].rows()[0] == ("earl", "fire", "ox", 1)
    assert models[0].rows()[4] == ("ivana", "wood", "horse", 5)


def test_sample_under_constrained(sample):
    models = solve(sample.domain, sample.gold_rules()[1:])
    st = solution_status(models)
    assert st.kind == "multiple" and st.count == len(models) > 1


def test_contradiction_has_no_models():
    d = PuzzleDomain((("name", ("a", "b")), ("rank", (1, 2))))
    clues = [parse_rule(":- tuple(I, a), tuple(J, 1), I!=J."), parse_rule(":- tuple(I, a), tuple(I, 1).")]
    assert solve(d, clues) == []
    assert str(solution_status([])) == "none"


def test_no_clues_gives_every_assignment():
    d = PuzzleDomain((("name", ("a", "b", "c")), ("pet", ("x", "y", "z")), ("rank", (1, 2, 3))))
    assert len(solve(d, [])) == 36 == len(list(all_assignments(d)))


def test_unknown_constant_raises():
    d = PuzzleDomain((("name", ("a", "b")), ("rank", (1, 2))))
    with pytest.raises(UnknownConstant):
        solve(d, [parse_rule(":- tuple(I, zebra).")])


def test_extremes():
    d = PuzzleDomain((("name", ("a", "b", "c")), ("rank", (1, 2, 3))))
    rows = [m.rows() for m in solve(d, [parse_rule(":- tuple(I, a), tuple(I, X), highest(X)."),
                                        parse_rule(":- tuple(I, b), tuple(I, X), lowest(X).")])]
    assert all(("a", 3) not in r and ("b", 1) not in r for r in rows)
    assert len(rows) == 3


def test_format_table(sample):
    table = solve(sample.domain, sample.gold_rules())[0].format_table().splitlines()
    assert table[0].split() == ["tuple", "name", "element", "animal", "rank"]
    assert table[1].split() == ["1", "earl", "fire", "ox", "1"]


@pytest.mark.parametrize("seed", range(5))
def test_solve_matches_oracles(seed):
    rng = random.Random(seed)
    for _ in range(40):
        d, clues = random_instance(rng)
        got = {m.table for m in solve(d, clues)}
        assert got == {m.table for m in brute_force(d, clues)}
        assert got == oracle_models(d, clues)


def test_program_text_mentions_everything(sample):
    text = program_text(sample.domain, sample.gold_rules())
    assert "1{tuple(I,X):element(A,X)}1 :- eindex(I), index(A)." in text
    assert ":- tuple(I, tony), tuple(J, 3), I!=J." in text


@pytest.mark.skipif(clingo_command() is None, reason="no external ASP solver installed")
def test_external_solver_agrees(sample):
    ext = solve_external(sample.domain, sample.gold_rules(), clingo_command())
    assert [m.table for m in ext] == [m.table for m in solve(sample.domain, sample.gold_rules())]
