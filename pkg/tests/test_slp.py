import numpy as np
import pytest
from hypothesis import given, strategies as st

from wordsat import Permutation
from wordsat.catalog import alternating
from wordsat.slp import (
    Overflow,
    SLPBuilder,
    StraightLineProgram,
    Word,
    distinct_letters,
    evaluate_slp,
    evaluate_slp_batch,
    evaluate_word,
    expand,
    exponent_sums,
    parse_word,
    word_to_slp,
)

syllable = st.tuples(st.integers(1, 3), st.integers(-3, 3))
words = st.lists(syllable, max_size=10).map(lambda s: Word(3, tuple(s)))
perms5 = st.permutations(range(5)).map(lambda p: Permutation(tuple(p)))


def test_free_reduction():
    w = Word(2, ((1, 1), (2, 1), (2, -1), (1, 2)))
    assert w.syllables == ((1, 3),)
    assert Word(2, ((1, 1), (1, -1))).is_identity()


def test_parse_grammar():
    assert str(parse_word("[x1,x2]")) == "x1^-1 x2^-1 x1 x2"
    assert parse_word("x1^60") == Word(1, ((1, 60),))
    assert parse_word("(x1 x2)^2") == parse_word("x1*x2*x1*x2")
    assert parse_word("1").is_identity()
    assert parse_word("x3", arity=5).arity == 5
    assert parse_word("[[x1,x2],x3]").arity == 3


@pytest.mark.parametrize("bad", ["x0", "x1^", "[x1,x2", "y1", "x1)"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_word(bad)


def test_str_round_trip():
    w = parse_word("x1^-2 x2 x3^4 [x1,x3]")
    assert parse_word(str(w), arity=w.arity) == w


@given(words, words)
def test_multiplication_is_reduced_concatenation(u, v):
    assert u * v == Word(3, u.syllables + v.syllables)
    assert len(u * v) == len(Word(3, u.syllables + v.syllables))
    assert (u * u.inverse()).is_identity()


@given(words, st.lists(perms5, min_size=3, max_size=3))
def test_word_and_program_agree(w, elems):
    slp = word_to_slp(w)
    assert evaluate_slp(slp, elems) == evaluate_word(w, elems)
    assert expand(slp) == w


@given(words, st.lists(perms5, min_size=3, max_size=3))
def test_json_round_trip(w, elems):
    slp = word_to_slp(w)
    back = StraightLineProgram.loads(slp.dumps())
    assert evaluate_slp(back, elems) == evaluate_slp(slp, elems)


def test_builder_ops():
    b = SLPBuilder(2)
    x, y = b.input(1), b.input(2)
    c = b.comm(x, y)
    p = b.pow(b.mul(x, y), 3)
    k = b.conj(x, y)
    A5 = alternating(5)
    g, h = A5.generators
    assert evaluate_slp(b.extract(c), [g, h]) == g.commutator(h)
    assert evaluate_slp(b.extract(p), [g, h]) == (g * h) ** 3
    assert evaluate_slp(b.extract(k), [g, h]) == h.inverse() * g * h
    assert b.mul(None, x) == x
    assert b.extract(None).output is None


def test_batch_evaluation_matches_scalar():
    A5 = alternating(5)
    rng = np.random.default_rng(1)
    w = parse_word("[x1, x2]^3 x1^-2 x2")
    slp = word_to_slp(w)
    xs = [A5.random_element(rng) for _ in range(20)]
    ys = [A5.random_element(rng) for _ in range(20)]
    out = evaluate_slp_batch(slp, [np.array([x.images for x in xs]), np.array([y.images for y in ys])])
    for i in range(20):
        assert tuple(out[i]) == evaluate_word(w, [xs[i], ys[i]]).images


def test_expansion_overflow():
    b = SLPBuilder(2)
    x = b.comm(b.input(1), b.input(2))
    for _ in range(12):
        x = b.comm(x, b.input(1))
    slp = b.extract(x)
    res = expand(slp, 1000)
    assert isinstance(res, Overflow) and not res
    letters = distinct_letters(slp, 1000)
    assert letters == {1, 2} and letters.upper_bound_only


def test_power_expansion_cyclic_reduction():
    b = SLPBuilder(2)
    u = b.conj(b.input(1), b.input(2))
    slp = b.extract(b.pow(u, 1000))
    w = expand(slp)
    assert w == Word(2, ((2, -1), (1, 1000), (2, 1)))


def test_distinct_letters_after_cancellation():
    w = parse_word("x1 x2 x1^-1 x3 x3^-1 x1 x2^-1 x1^-1")
    assert w.is_identity()
    assert distinct_letters(word_to_slp(parse_word("x1 x3 x3^-1"))) == {1}


def test_exponent_sums():
    assert exponent_sums(word_to_slp(parse_word("x1^3 x2^-1 [x1,x2]"))) == (3, -1)


def test_program_validation():
    with pytest.raises(ValueError):
        StraightLineProgram(1, (("input", 2),), 0)
    with pytest.raises(ValueError):
        StraightLineProgram(1, (("mul", 0, 1),), 0)
