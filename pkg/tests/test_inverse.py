import pytest

from lambda_asp.inverse import inverse_l, inverse_r, replace
from lambda_asp.terms import App, Const, alpha_eq, normalize, parse_term
from termgen import random_pairs

P = parse_term

TABLE1_ROOT = P(":- tuple(I,earl), tuple(J,rooster), tuple(I,X), tuple(J,Y), "
                "etype(A,rank), element(A,X), element(A,Y), X != Y-1.")


def test_replace_single():
    assert replace(P("tuple(I, earl)"), [Const("earl")], [Const("v")]) == P("tuple(I, v)")


def test_replace_pair():
    got = replace(P("X != Y-1"), [Const("X"), Const("Y")], [Const("v1"), Const("v2")])
    assert got == P("v1 != v2-1")


def test_replace_is_simultaneous():
    got = replace(P("tuple(I, earl)"), [Const("earl"), Const("I")], [Const("a"), Const("b")])
    assert got == P("tuple(b, a)")
    # no cascading: the replacement for I is not itself rewritten
    got = replace(P("tuple(I, earl)"), [Const("I"), Const("earl")], [Const("earl"), Const("I")])
    assert got == P("tuple(earl, I)")


def test_replace_missing_is_ignored_and_lengths_checked():
    assert replace(P("tuple(I, earl)"), [Const("zebra")], [Const("v")]) == P("tuple(I, earl)")
    with pytest.raises(ValueError):
        replace(P("tuple(I, earl)"), [Const("I")], [])


def test_inverse_r_constant():
    assert inverse_r(P("tuple(I, earl)"), P("λv. tuple(I, v)")) == Const("earl")


def test_inverse_r_delegates_on_raised_functor():
    g = P("λx. tuple(x, earl)")
    h = TABLE1_ROOT
    f = inverse_r(h, P("λv. v@(λx. tuple(x, earl))"))
    assert f is not None
    assert alpha_eq(f, inverse_l(h, g))


def test_inverse_r_no_case():
    assert inverse_r(P("λx. x"), P("λy. tuple(y, cow)")) is None


def test_inverse_l_worked_example():
    f = inverse_l(TABLE1_ROOT, P("λx. tuple(x, earl)"))
    want = P("λz. :- z@I, tuple(J,rooster), tuple(I,X), tuple(J,Y), etype(A,rank), "
             "element(A,X), element(A,Y), X != Y-1.")
    assert alpha_eq(f, want)


def test_inverse_l_immediately():
    # vp = before_phrase @ (immediately @ arrived)
    before_phrase = P("λy. λz. :- z@I, tuple(J,rooster), tuple(I,X), tuple(J,Y), etype(A,rank), "
                      "element(A,X), element(A,Y), y@X@Y.")
    vp = P("λz. :- z@I, tuple(J,rooster), tuple(I,X), tuple(J,Y), etype(A,rank), "
           "element(A,X), element(A,Y), X != Y-1.")
    inner = inverse_r(vp, before_phrase)
    assert alpha_eq(inner, P("λy. λz. y != z-1"))
    imm = inverse_l(inner, P("λx. x"))
    assert alpha_eq(imm, P("λx. λy. λz. x@(y != z-1)"))


def test_inverse_l_identity_and_instance():
    t = P("tuple(J, rooster)")
    f = inverse_l(t, t)
    assert alpha_eq(normalize(App(f, t)), t)
    f = inverse_l(t, P("λx. tuple(x, rooster)"))
    assert alpha_eq(normalize(App(f, P("λx. tuple(x, rooster)"))), t)


def test_inverse_l_failure_is_none():
    assert inverse_l(P("tuple(I, earl)"), P("λx. λy. λz. tuple(z, z)")) is None


def test_deterministic():
    g = P("λx. tuple(x, earl)")
    assert inverse_l(TABLE1_ROOT, g) == inverse_l(TABLE1_ROOT, g)


@pytest.mark.parametrize("seed", range(4))
def test_inverse_l_sound_on_random_pairs(seed):
    for f, g in random_pairs(300, seed):
        h = normalize(App(f, g))
        got = inverse_l(h, g)
        if got is not None:
            assert alpha_eq(normalize(App(got, g)), h)


@pytest.mark.parametrize("seed", range(4))
def test_inverse_r_sound_on_random_pairs(seed):
    for f, g in random_pairs(300, 100 + seed):
        # swap roles: g is the functor, f the argument we try to recover
        h = normalize(App(f, g))
        got = inverse_r(h, f)
        if got is not None:
            assert alpha_eq(normalize(App(f, got)), h)
