"""Grounding and model enumeration for the puzzle fragment.

Background definitions depend only on the domain, so they are evaluated once
into ground facts.  Models are then searched type by type, tuple by tuple;
clue bodies are negation-free, so a constraint already violated by a partial
assignment stays violated and the branch can be cut.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .asp import (
    Comparison, Constant, Constraint, DefRule, Fact, Literal, Offset,
    PuzzleDomain, Range, Variable, background_module, constants_of,
    encode_domain, generation_module, serialize,
)

__all__ = [
    "Assignment", "SolutionStatus", "UnknownConstant", "solve", "brute_force",
    "check_constraint", "solution_status", "ground_database", "solve_external",
    "all_assignments", "ExternalSolverError",
]


class UnknownConstant(ValueError):
    pass


class ExternalSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Assignment:
    """``table[a][i]`` is the element of type ``a + 1`` in tuple ``i + 1``."""
    domain: PuzzleDomain
    table: tuple

    def element(self, tuple_index: int, type_index: int):
        return self.table[type_index - 1][tuple_index - 1]

    def rows(self) -> list:
        return [tuple(col[i] for col in self.table) for i in range(self.domain.n)]

    def facts(self) -> set:
        return {(i + 1, x) for col in self.table for i, x in enumerate(col)}

    def __eq__(self, other):
        return isinstance(other, Assignment) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def format_table(self) -> str:
        header = ["tuple"] + [name for name, _ in self.domain.types]
        rows = [[str(i)] + [str(x) for x in row] for i, row in enumerate(self.rows(), 1)]
        widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [header] + rows]
        return "\n".join(lines)


@dataclass(frozen=True)
class SolutionStatus:
    kind: str  # "unique" | "none" | "multiple"
    count: int

    def __str__(self):
        return f"multiple({self.count})" if self.kind == "multiple" else self.kind


def solution_status(models: Sequence) -> SolutionStatus:
    n = len(models)
    if n == 0:
        return SolutionStatus("none", 0)
    if n == 1:
        return SolutionStatus("unique", 1)
    return SolutionStatus("multiple", n)


# ---------------------------------------------------------------------------
# body evaluation

def _order_key(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


def _value(t, binding):
    if isinstance(t, Constant):
        return t.value
    if isinstance(t, Variable):
        return binding.get(t.name)
    if isinstance(t, Offset):
        base = binding.get(t.base.name)
        if isinstance(base, int):
            return base + t.delta
        return None
    return None


def _bound(t, binding) -> bool:
    if isinstance(t, Variable):
        return t.name in binding
    if isinstance(t, Offset):
        return t.base.name in binding
    return True


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: _order_key(a) < _order_key(b),
    ">": lambda a, b: _order_key(a) > _order_key(b),
    "<=": lambda a, b: _order_key(a) <= _order_key(b),
    ">=": lambda a, b: _order_key(a) >= _order_key(b),
}


def _compare(c: Comparison, binding) -> bool:
    left, right = _value(c.left, binding), _value(c.right, binding)
    if left is None or right is None:
        # undefined arithmetic (offset on a symbol) makes the literal false
        return False
    return _CMP[c.op](left, right)


def _match(lit: Literal, fact: tuple, binding):
    new = None
    for a, v in zip(lit.args, fact):
        if isinstance(a, Variable):
            cur = binding.get(a.name) if new is None else new.get(a.name)
            if cur is None:
                if new is None:
                    new = dict(binding)
                new[a.name] = v
            elif cur != v:
                return None
        else:
            if _value(a, binding if new is None else new) != v:
                return None
    return binding if new is None else new


def groundings(body: Sequence, db: dict, binding: Optional[dict] = None) -> Iterator[dict]:
    """Yield every variable binding satisfying ``body`` over ``db``.

    ``db`` maps a predicate name and arity to a set of argument tuples.
    """
    yield from _ground(list(body), db, binding or {})


def _ready(item, binding) -> bool:
    if isinstance(item, Comparison):
        return _bound(item.left, binding) and _bound(item.right, binding)
    if isinstance(item, Literal) and item.negated:
        return all(_bound(a, binding) for a in item.args)
    return all(_bound(a, binding) or isinstance(a, Variable) for a in item.args)


def _ground(pending, db, binding):
    # run every check that is fully bound first
    rest = []
    for item in pending:
        if isinstance(item, Comparison) and _ready(item, binding):
            if not _compare(item, binding):
                return
        elif isinstance(item, Literal) and item.negated and _ready(item, binding):
            key = tuple(_value(a, binding) for a in item.args)
            if key in db.get((item.pred, len(item.args)), ()):
                return
        else:
            rest.append(item)
    positives = [it for it in rest if isinstance(it, Literal) and not it.negated and _ready(it, binding)]
    if not positives:
        if rest:
            # only unsafe leftovers remain; nothing can bind them
            return
        yield binding
        return
    # most constrained literal first
    lit = max(positives, key=lambda it: sum(_bound(a, binding) for a in it.args))
    rest.remove(lit)
    for fact in db.get((lit.pred, len(lit.args)), ()):
        b = _match(lit, fact, binding)
        if b is not None:
            yield from _ground(rest, db, b)


def _head_fact(head: Literal, binding) -> tuple:
    return tuple(_value(a, binding) for a in head.args)


def _expand_range_fact(lit: Literal):
    ranges = [a for a in lit.args if isinstance(a, Range)]
    if not ranges:
        yield tuple(a.value for a in lit.args)
        return
    (r,) = ranges
    for k in range(r.lo, r.hi + 1):
        yield tuple(k if isinstance(a, Range) else a.value for a in lit.args)


def ground_database(d: PuzzleDomain) -> dict:
    """Domain facts plus every background definition, as ground facts."""
    db = defaultdict(set)
    for r in encode_domain(d):
        if r.atom.pred == "tuple":
            continue
        for f in _expand_range_fact(r.atom):
            db[(r.atom.pred, len(f))].add(f)
    comparable = d.comparable if d.has_comparable else d.types[d.fixed_type - 1][0]
    # definitions are listed in dependency order and are not recursive
    for rule in background_module(comparable):
        derived = {_head_fact(rule.head, b) for b in groundings(rule.body, db)}
        db[(rule.head.pred, len(rule.head.args))] |= derived
    for alias in d.aliases:
        idx = d.fixed_type
        db[("etype", 2)].add((idx, alias))
    return dict(db)


def _with_tuples(base: dict, facts: Iterable) -> dict:
    db = dict(base)
    db[("tuple", 2)] = set(facts)
    return db


def _check_known(r: Constraint, d: PuzzleDomain):
    known = d.all_elements() | {name for name, _ in d.types} | set(d.aliases)
    if d.comparable:
        known.add(d.comparable)
    unknown = constants_of(r) - known
    if unknown:
        raise UnknownConstant(f"constants not in the domain: {sorted(map(str, unknown))}")


def check_constraint(a: Assignment, r: Constraint, d: PuzzleDomain, _db=None) -> bool:
    """True when no grounding of the body of ``r`` holds under ``a``."""
    if not isinstance(r, Constraint):
        raise TypeError("check_constraint expects a Constraint")
    if _db is None:
        _check_known(r, d)
        _db = ground_database(d)
    db = _with_tuples(_db, a.facts())
    for _ in groundings(r.body, db):
        return False
    return True


def _free_types(d: PuzzleDomain) -> list:
    return [i for i in range(1, d.m + 1) if i != d.fixed_type]


def all_assignments(d: PuzzleDomain) -> Iterator[Assignment]:
    """Every exclusive assignment, in lexicographic order of the per-type permutations."""
    from itertools import permutations, product
    free = _free_types(d)
    fixed = d.elements(d.fixed_type)
    for perms in product(*(permutations(d.elements(i)) for i in free)):
        cols = dict(zip(free, perms))
        cols[d.fixed_type] = fixed
        yield Assignment(d, tuple(tuple(cols[i]) for i in range(1, d.m + 1)))


def brute_force(d: PuzzleDomain, clues: Sequence[Constraint]) -> list:
    """Reference enumeration: every assignment filtered by ``check_constraint``."""
    for r in clues:
        _check_known(r, d)
    db = ground_database(d)
    return [a for a in all_assignments(d) if all(check_constraint(a, r, d, db) for r in clues)]


def _monotone(r: Constraint) -> bool:
    return not any(isinstance(b, Literal) and b.negated for b in r.body)


def solve(d: PuzzleDomain, clues: Sequence[Constraint]) -> list:
    """All assignments respecting every clue, in the order of :func:`all_assignments`."""
    clues = list(clues)
    for r in clues:
        if not isinstance(r, Constraint):
            raise TypeError(f"clue is not a constraint: {r!r}")
        _check_known(r, d)
    base = ground_database(d)
    free = _free_types(d)
    n = d.n
    fixed_col = d.elements(d.fixed_type)
    facts = {(i + 1, x) for i, x in enumerate(fixed_col)}
    prunable = [r for r in clues if _monotone(r)]
    models = []
    cols = {}

    def violated(rules):
        db = _with_tuples(base, facts)
        for r in rules:
            for _ in groundings(r.body, db):
                return True
        return False

    if violated(prunable):
        return []

    def place(ti, pos, col, used):
        if ti == len(free):
            if violated(clues):
                return
            cols[d.fixed_type] = fixed_col
            models.append(Assignment(d, tuple(tuple(cols[i]) for i in range(1, d.m + 1))))
            return
        t = free[ti]
        if pos == n:
            cols[t] = tuple(col)
            place(ti + 1, 0, [], set())
            return
        for x in d.elements(t):
            if x in used:
                continue
            fact = (pos + 1, x)
            added = fact not in facts
            facts.add(fact)
            col.append(x)
            used.add(x)
            if not violated(prunable):
                place(ti, pos + 1, col, used)
            used.discard(x)
            col.pop()
            if added:
                facts.discard(fact)

    place(0, 0, [], set())
    return models


# ---------------------------------------------------------------------------
# external ASP system

def program_text(d: PuzzleDomain, clues: Sequence) -> str:
    comparable = d.comparable if d.has_comparable else d.types[d.fixed_type - 1][0]
    rules = encode_domain(d) + generation_module() + background_module(comparable) + list(clues)
    text = serialize(rules)
    for alias in d.aliases:
        text += f"etype({d.fixed_type}, {alias}).\n"
    return text


def solve_external(d: PuzzleDomain, clues: Sequence, command: str, timeout: float = 60.0) -> list:
    """Run an external clingo-compatible solver on the serialized program.

    ``command`` is split like a shell command, e.g. ``"clingo"`` or
    ``"python3 -m clingo"``.
    """
    text = program_text(d, clues)
    with tempfile.NamedTemporaryFile("w", suffix=".lp", delete=False) as fh:
        fh.write(text)
        path = fh.name
    try:
        proc = subprocess.run(shlex.split(command) + [path, "0", "--outf=2"],
                              capture_output=True, text=True, timeout=timeout)
    finally:
        os.unlink(path)
    # clingo exits with 10/20/30 (sat/unsat/exhausted); the python front end exits 0
    if proc.returncode not in (0, 10, 20, 30):
        raise ExternalSolverError(f"solver exited with {proc.returncode}: {proc.stderr.strip()}")
    try:
        out = json.loads(proc.stdout)
    except json.JSONDecodeError as exc:
        raise ExternalSolverError(f"unreadable solver output: {exc}") from None
    if out.get("Result") not in ("SATISFIABLE", "UNSATISFIABLE", "OPTIMUM FOUND"):
        raise ExternalSolverError(f"solver result {out.get('Result')!r}: {proc.stderr.strip()}")
    models = []
    for call in out.get("Call", []):
        for w in call.get("Witnesses", []):
            models.append(_assignment_from_atoms(d, w.get("Value", [])))
    models.sort(key=_lex_key(d))
    return models


def _lex_key(d):
    positions = {i: {x: k for k, x in enumerate(d.elements(i))} for i in range(1, d.m + 1)}
    free = _free_types(d)
    return lambda a: tuple(positions[t][x] for t in free for x in a.table[t - 1])


def _assignment_from_atoms(d: PuzzleDomain, atoms: Sequence[str]) -> Assignment:
    from .asp import parse_rule
    pairs = set()
    for s in atoms:
        if s.startswith("tuple("):
            lit = parse_rule(s + ".").atom
            pairs.add((lit.args[0].value, lit.args[1].value))
    cols = []
    for i in range(1, d.m + 1):
        elems = set(d.elements(i))
        col = []
        for k in range(1, d.n + 1):
            hits = [x for (t, x) in pairs if t == k and x in elems]
            if len(hits) != 1:
                raise ExternalSolverError(f"tuple {k} has {len(hits)} elements of type {i}")
            col.append(hits[0])
        cols.append(tuple(col))
    return Assignment(d, tuple(cols))
