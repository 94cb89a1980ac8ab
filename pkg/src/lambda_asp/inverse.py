"""Inverse lambda operators.

``inverse_l(h, g)`` looks for ``f`` with ``f@g == h`` and ``inverse_r(h, g)``
for ``f`` with ``g@f == h`` (both up to beta/alpha).  Candidates are produced
by a fixed sequence of structural cases and each one is checked by
re-application, so a returned term always satisfies its equation.  ``None``
means no case applied.
"""

from __future__ import annotations

from typing import Iterator, Optional, Sequence

from .terms import (
    App, Atom, Cmp, Conj, Const, Lam, Offset, Rule, Term, TypeMismatch, Var,
    _children, _rebuild, alpha_eq, alpha_key, free_vars, fresh_name, infer_type,
    lam, normalize, tidy,
)

__all__ = ["replace", "inverse_l", "inverse_r"]


def replace(h: Term, a: Sequence[Term], b: Sequence[Term]) -> Term:
    """Simultaneously replace every occurrence of ``a[i]`` in ``h`` by ``b[i]``.

    Occurrences are found outermost first and replaced terms are not searched
    again.  An ``a[i]`` that does not occur is simply ignored.
    """
    if len(a) != len(b):
        raise ValueError(f"replace needs equal-length lists, got {len(a)} and {len(b)}")
    table = {alpha_key(x): y for x, y in zip(a, b)}

    def go(t):
        hit = table.get(alpha_key(t))
        if hit is not None:
            return hit
        if isinstance(t, (Var, Const)):
            return t
        return _rebuild(t, (go(k) for k in _children(t)))

    return go(h)


def _peel(t: Term):
    names = []
    while isinstance(t, Lam):
        names.append(t.var)
        t = t.body
    return names, t


def _spine(t: Term):
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    return t, args[::-1]


def _checked(f: Term, build, h: Term) -> Optional[Term]:
    """Return ``f`` if ``build(f)`` reduces to ``h`` and is well typed."""
    try:
        f = normalize(f)
        candidate = build(f)
        infer_type(candidate)
        if alpha_eq(normalize(candidate), h):
            return tidy(f)
    except TypeMismatch:
        pass
    return None


def _rename_vars(t: Term, mapping: dict) -> Term:
    if not mapping:
        return t
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name))
    if isinstance(t, Lam):
        inner = {k: v for k, v in mapping.items() if k != t.var}
        return Lam(t.var, _rename_vars(t.body, inner))
    if isinstance(t, Const):
        return t
    return _rebuild(t, (_rename_vars(k, mapping) for k in _children(t)))


# ---------------------------------------------------------------------------
# higher-order pattern matching used by inverse_r

def _hmatch(p, t, v, pmap, tbound, binding) -> Iterator:
    """Match pattern ``p`` (containing the unknown ``v``) against ``t``.

    Yields the value bound to ``v`` (``None`` when ``v`` was not met).
    ``pmap`` maps pattern binders to term binders, ``tbound`` holds the term
    binders crossed so far.
    """
    head, args = _spine(p)
    if isinstance(head, Var) and head.name == v and v not in pmap:
        if any(v in free_vars(a) for a in args):
            return
        args = [_rename_vars(a, pmap) for a in args]
        if args:
            us = [fresh_name("u") for _ in args]
            body = _replace_exact(t, args, [Var(u) for u in us])
            f = lam(*us, body)
        else:
            f = t
        if free_vars(f) & tbound:
            return
        if binding is not None:
            if alpha_eq(binding, f):
                yield binding
            return
        yield f
        return

    if isinstance(p, Var):
        if p.name in pmap:
            if isinstance(t, Var) and t.name == pmap[p.name]:
                yield binding
        elif isinstance(t, Var) and t.name == p.name and t.name not in tbound:
            yield binding
        return
    if isinstance(p, Const):
        if p == t:
            yield binding
        return
    if type(p) is not type(t):
        return
    if isinstance(p, Lam):
        yield from _hmatch(p.body, t.body, v, {**pmap, p.var: t.var}, tbound | {t.var}, binding)
        return
    if isinstance(p, Atom) and (p.pred != t.pred or len(p.args) != len(t.args)):
        return
    if isinstance(p, Cmp) and p.op != t.op:
        return
    if isinstance(p, Offset) and p.delta != t.delta:
        return
    if isinstance(p, (Rule, Conj)):
        yield from _hmatch_seq(list(_children(p)), list(_children(t)), v, pmap, tbound, binding)
        return
    yield from _hmatch_list(list(_children(p)), list(_children(t)), v, pmap, tbound, binding)


def _hmatch_list(ps, ts, v, pmap, tbound, binding):
    if not ps:
        yield binding
        return
    for b in _hmatch(ps[0], ts[0], v, pmap, tbound, binding):
        yield from _hmatch_list(ps[1:], ts[1:], v, pmap, tbound, b)


def _v_headed(p, v, pmap):
    head, _ = _spine(p)
    return isinstance(head, Var) and head.name == v and v not in pmap


def _hmatch_seq(ps, ts, v, pmap, tbound, binding):
    """Body items; an item headed by ``v`` may absorb a run of items."""
    if not ps:
        if not ts:
            yield binding
        return
    if len(ts) < len(ps):
        return
    p = ps[0]
    if _v_headed(p, v, pmap):
        for n in range(1, len(ts) - len(ps) + 2):
            target = ts[0] if n == 1 else Conj(tuple(ts[:n]))
            for b in _hmatch(p, target, v, pmap, tbound, binding):
                yield from _hmatch_seq(ps[1:], ts[n:], v, pmap, tbound, b)
        return
    for b in _hmatch(p, ts[0], v, pmap, tbound, binding):
        yield from _hmatch_seq(ps[1:], ts[1:], v, pmap, tbound, b)


def _replace_exact(t, a, b):
    return replace(t, a, b)


def inverse_r(h: Term, g: Term) -> Optional[Term]:
    """Find ``f`` such that ``g@f`` beta-reduces to ``h``.

    1. ``g = λv. v@j``: delegate to ``inverse_l(h, j)``.
    2. ``g = λv. h(j : v)`` for a subterm ``j`` of ``h``: ``f = j``.
    3. ``g = λw. h(j : w@j_p@...@j_q)``: ``f = λv_p...v_q. j(j_p,...,j_q : v_p,...,v_q)``.

    Cases 2 and 3 are found together by matching the body of ``g`` against
    ``h``; every occurrence of the bound variable fixes ``f``.
    """
    h = normalize(h)
    g = normalize(g)
    if not isinstance(g, Lam):
        return None
    v, body = g.var, g.body
    if isinstance(body, App) and body.fun == Var(v) and v not in free_vars(body.arg):
        return inverse_l(h, body.arg)
    seen = set()
    for f in _hmatch(body, h, v, {}, frozenset(), None):
        if f is None:
            # v does not occur: any f works if g's body already is h
            f = Lam("x", Var("x"))
        key = alpha_key(f)
        if key in seen:
            continue
        seen.add(key)
        ok = _checked(f, lambda x: App(g, x), h)
        if ok is not None:
            return ok
    return None


# ---------------------------------------------------------------------------
# first-order matching used by inverse_l

def _fo_match(p, t, pvars, pmap, inner, sigma):
    if isinstance(p, Var):
        if p.name in pmap:
            return sigma if isinstance(t, Var) and t.name == pmap[p.name] else None
        if p.name in pvars:
            if free_vars(t) & inner:
                return None
            if p.name in sigma:
                return sigma if alpha_eq(sigma[p.name], t) else None
            return {**sigma, p.name: t}
        return sigma if isinstance(t, Var) and t.name == p.name and t.name not in inner else None
    if isinstance(p, Const):
        return sigma if p == t else None
    if type(p) is not type(t):
        return None
    if isinstance(p, Lam):
        return _fo_match(p.body, t.body, pvars, {**pmap, p.var: t.var}, inner | {t.var}, sigma)
    if isinstance(p, Atom) and p.pred != t.pred:
        return None
    if isinstance(p, Cmp) and p.op != t.op:
        return None
    if isinstance(p, Offset) and p.delta != t.delta:
        return None
    pk, tk = _children(p), _children(t)
    if len(pk) != len(tk):
        return None
    for a, b in zip(pk, tk):
        sigma = _fo_match(a, b, pvars, pmap, inner, sigma)
        if sigma is None:
            return None
    return sigma


def _instances(h: Term, g: Term):
    """Places where ``h`` contains an instance of ``g``'s body.

    Yields ``(occurrence, args)``; ``occurrence`` is either a subterm or a
    tuple of consecutive body items (when ``g``'s body is a conjunction).
    """
    names, body = _peel(g)
    if not names:
        return
    pvars = set(names)
    for s in _subterms_with_context(h):
        if isinstance(body, Conj) and isinstance(s, (Rule, Conj)):
            items = _children(s)
            n = len(body.items)
            for i in range(len(items) - n + 1):
                run = Conj(tuple(items[i:i + n]))
                sigma = _fo_match(body, run, pvars, {}, frozenset(), {})
                if sigma is not None and set(sigma) == pvars:
                    yield tuple(items[i:i + n]), [sigma[x] for x in names]
        sigma = _fo_match(body, s, pvars, {}, frozenset(), {})
        if sigma is not None and set(sigma) == pvars:
            yield s, [sigma[x] for x in names]


def _subterms_with_context(t):
    yield t
    for k in _children(t):
        yield from _subterms_with_context(k)


def _replace_run(t, run, new):
    keys = [alpha_key(x) for x in run]
    n = len(run)

    def go(s):
        if isinstance(s, (Var, Const)):
            return s
        kids = [go(k) for k in _children(s)]
        if isinstance(s, (Rule, Conj)):
            out, i = [], 0
            while i < len(kids):
                if [alpha_key(x) for x in kids[i:i + n]] == keys:
                    out.append(new)
                    i += n
                else:
                    out.append(kids[i])
                    i += 1
            kids = out
        return _rebuild(s, kids)

    return go(t)


def _inverse_l_candidates(h: Term, g: Term):
    v = fresh_name("v")
    if alpha_eq(h, g):
        yield Lam(v, Var(v))
    if alpha_eq(g, Lam("x", Var("x"))):
        names, core = _peel(h)
        yield lam(v, *names, App(Var(v), core))
    if any(alpha_key(s) == alpha_key(g) for s in _subterms_with_context(h)):
        yield Lam(v, replace(h, [g], [Var(v)]))
    k = inverse_r(h, g)
    if k is not None:
        yield Lam(v, App(Var(v), k))
    seen = set()
    for occ, args in _instances(h, g):
        call = Var(v)
        for a in args:
            call = App(call, a)
        if isinstance(occ, tuple):
            key = ("run",) + tuple(alpha_key(x) for x in occ)
            body = _replace_run(h, occ, call)
        else:
            key = alpha_key(occ)
            body = replace(h, [occ], [call])
        if key in seen:
            continue
        seen.add(key)
        yield Lam(v, body)


def inverse_l(h: Term, g: Term) -> Optional[Term]:
    """Find ``f`` such that ``f@g`` beta-reduces to ``h``.

    Cases, in order: ``h == g`` gives ``λv.v``; ``g = λx.x`` gives
    ``λv.λx_1...x_k. v@core`` where ``h = λx_1...x_k.core``; ``g`` occurring
    in ``h`` is abstracted; type raising ``λv. v@inverse_r(h, g)``; finally
    instances ``g@a_1...a_k`` inside ``h`` are replaced by ``v@a_1...a_k``.
    """
    h = normalize(h)
    g = normalize(g)
    for f in _inverse_l_candidates(h, g):
        ok = _checked(f, lambda x: App(x, g), h)
        if ok is not None:
            return ok
    return None
