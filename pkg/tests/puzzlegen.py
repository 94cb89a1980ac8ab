"""Random small puzzles, an independent constraint evaluator and a sample-puzzle oracle.

The evaluator below does not share code with the package solver: it builds
the ground facts of one assignment directly and joins body literals left to
right, checking comparisons once all their variables are bound.
"""

import itertools
import random

from lambda_asp.asp import Comparison, Constant, Literal, Offset, PuzzleDomain, Variable, parse_rule

OPS = ["=", "!=", "<", ">", "<=", ">="]


def random_domain(rng: random.Random) -> PuzzleDomain:
    m = rng.randint(1, 3)
    n = rng.randint(1, 4)
    types = []
    with_rank = rng.random() < 0.7
    for k in range(m - (1 if with_rank else 0)):
        letter = "abc"[k]
        types.append((f"t{letter}", tuple(f"{letter}{i}" for i in range(1, n + 1))))
    if with_rank:
        types.append(("rank", tuple(range(1, n + 1))))
    return PuzzleDomain(tuple(types))


def _elem(rng, d):
    return rng.choice(sorted(d.all_elements(), key=str))


def random_constraint(rng: random.Random, d: PuzzleDomain):
    a, b = _elem(rng, d), _elem(rng, d)
    kinds = ["same", "apart"]
    if d.has_comparable:
        kinds += ["compare", "extreme"]
    kind = rng.choice(kinds)
    if kind == "same":
        return parse_rule(f":- tuple(I, {a}), tuple(J, {b}), I!=J.")
    if kind == "apart":
        return parse_rule(f":- tuple(I, {a}), tuple(I, {b}).")
    if kind == "extreme":
        pred = rng.choice(["highest", "lowest", "first"])
        return parse_rule(f":- tuple(I, {a}), tuple(I, X), {pred}(X).")
    op = rng.choice(OPS)
    d_ = rng.choice([0, 0, -1, 1, 2])
    rhs = "Y" if d_ == 0 else f"Y{'+' if d_ > 0 else '-'}{abs(d_)}"
    return parse_rule(f":- tuple(I, {a}), tuple(J, {b}), tuple(I, X), tuple(J, Y), etype(A, rank), "
                      f"element(A, X), element(A, Y), X {op} {rhs}.")


def random_instance(rng: random.Random):
    d = random_domain(rng)
    k = rng.randint(0, 5)
    return d, [random_constraint(rng, d) for _ in range(k)]


# ---------------------------------------------------------------------------
# oracle

def _facts(d: PuzzleDomain, table) -> list:
    """Ground atoms as (pred, args) for the assignment ``table[type][tuple]``."""
    out = []
    for a, (name, elems) in enumerate(d.types, 1):
        out.append(("etype", (a, name)))
        for x in elems:
            out.append(("element", (a, x)))
    for a, col in enumerate(table, 1):
        for i, x in enumerate(col, 1):
            out.append(("tuple", (i, x)))
    if d.has_comparable:
        a = d.type_index(d.comparable)
        vals = d.elements(a)
        hi, lo = max(vals), min(vals)
        out += [("highest", (hi,)), ("lowest", (lo,)), ("first", (lo,)),
                ("highest", (a, hi)), ("lowest", (a, lo)), ("first", (a, lo))]
    return out


def _val(t, env):
    if isinstance(t, Constant):
        return t.value
    if isinstance(t, Variable):
        return env[t.name]
    base = env[t.base.name]
    return base + t.delta if isinstance(base, int) else None


def _holds(c: Comparison, env) -> bool:
    x, y = _val(c.left, env), _val(c.right, env)
    if x is None or y is None:
        return False
    if c.op in ("=", "!="):
        return (x == y) == (c.op == "=")
    if not (isinstance(x, int) and isinstance(y, int)):
        raise AssertionError("ordered comparison on symbols")
    return {"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[c.op]


def body_satisfiable(body, facts) -> bool:
    lits = [b for b in body if isinstance(b, Literal)]
    cmps = [b for b in body if isinstance(b, Comparison)]

    def go(k, env):
        if k == len(lits):
            return all(_holds(c, env) for c in cmps)
        lit = lits[k]
        for pred, args in facts:
            if pred != lit.pred or len(args) != len(lit.args):
                continue
            new = dict(env)
            ok = True
            for t, v in zip(lit.args, args):
                if isinstance(t, Constant):
                    ok = t.value == v
                elif t.name in new:
                    ok = new[t.name] == v
                else:
                    new[t.name] = v
                if not ok:
                    break
            if ok and go(k + 1, new):
                return True
        return False

    return go(0, {})


def oracle_models(d: PuzzleDomain, clues) -> set:
    """Tables (per type, per tuple) that violate no clue.  Exhaustive."""
    fixed = d.fixed_type
    free = [i for i in range(1, d.m + 1) if i != fixed]
    out = set()
    for perms in itertools.product(*(itertools.permutations(d.elements(i)) for i in free)):
        cols = dict(zip(free, perms))
        cols[fixed] = d.elements(fixed)
        table = tuple(tuple(cols[i]) for i in range(1, d.m + 1))
        facts = _facts(d, table)
        if not any(body_satisfiable(r.body, facts) for r in clues):
            out.add(table)
    return out


def sample_oracle():
    """Plain-Python reading of the ten sample clues over all 5!^3 assignments."""
    names = ["earl", "ivana", "lucy", "philip", "tony"]
    hits = []
    for name in itertools.permutations(names):
        r = {p: i + 1 for i, p in enumerate(name)}
        if r["tony"] != 3:
            continue
        for elem in itertools.permutations(["earth", "fire", "metal", "water", "wood"]):
            e = {x: i + 1 for i, x in enumerate(elem)}
            if e["wood"] != 5 or e["fire"] != r["earl"] or e["water"] == 1 or e["earth"] != r["philip"] + 2:
                continue
            for anim in itertools.permutations(["cow", "dragon", "horse", "ox", "rooster"]):
                a = {x: i + 1 for i, x in enumerate(anim)}
                if (a["rooster"] == r["earl"] + 1 and a["dragon"] == 4 and a["ox"] <= e["metal"]
                        and a["horse"] == r["ivana"] and a["cow"] == e["water"]):
                    hits.append((name, elem, anim))
    return hits
