from fractions import Fraction

import numpy as np
import pytest

from wordsat import CapExceeded, PermutationGroup, PreconditionError, Word
from wordsat.catalog import by_name, symmetric
from wordsat.probability import (
    exact_probability,
    mc_probability,
    quotient_monotonicity,
    satisfaction_profile,
    wilson_interval,
)
from wordsat.slp import parse_word, word_to_slp


def random_word(rng, letters, max_len):
    n = int(rng.integers(1, max_len + 1))
    syl = [(int(rng.integers(1, letters + 1)), int(rng.choice([-1, 1]))) for _ in range(n)]
    return Word(letters, tuple(syl))


@pytest.mark.parametrize("name", ["A5", "S4", "C6", "GL32"])
def test_single_letter_is_one_over_order(name):
    G = by_name(name)
    assert exact_probability(G, parse_word("x1")).exact == Fraction(1, G.order())


def test_commuting_probability(A5):
    res = exact_probability(A5, parse_word("[x1,x2]"))
    assert (res.num, res.den) == (300, 3600)
    assert res.exact == Fraction(1, 12)
    assert res.to_json()["exact"] == {"num": "300", "den": "3600", "reduced": "1/12"}


def test_exponent_law(A5):
    assert exact_probability(A5, parse_word("x1^60")).exact == 1
    assert exact_probability(A5, Word.identity(3)).exact == 1


def test_padding_invariance(A5):
    rng = np.random.default_rng(11)
    for _ in range(20):
        w = random_word(rng, 2, 8)
        base = exact_probability(A5, w).exact
        assert exact_probability(A5, w.with_arity(4)).exact == base
        assert exact_probability(A5, word_to_slp(w).with_arity(5)).exact == base


def test_unused_letters_do_not_count_toward_cap(A5):
    w = parse_word("x1^2 x7 x7^-1", arity=9)
    res = exact_probability(A5, w, cap=100)
    assert res.den == 60


def test_cap_exceeded(A5):
    with pytest.raises(CapExceeded, match="Monte Carlo"):
        exact_probability(A5, parse_word("x1 x2 x3 x4 x5"))


def test_profile_sums_to_numerator(A5):
    res = exact_probability(A5, parse_word("[x1,x2]^2 x1^3"), profile=True)
    assert sum(res.profile.values()) == res.num
    res = exact_probability(A5, Word.identity(2), profile=True)
    assert res.exact == 1 and res.profile == {"solvable": 1, "nonsolvable": 0}


def test_jobs_do_not_change_counts(A5):
    w = parse_word("[x1, x2]^3 x1^-2")
    assert exact_probability(A5, w, jobs=1).num == exact_probability(A5, w, jobs=3).num


def test_mc_identity_word_is_degenerate(A5):
    est = mc_probability(A5, Word.identity(2), 100, seed=0).estimate
    assert (est.p, est.lo, est.hi) == (1.0, 1.0, 1.0)


def test_mc_needs_samples(A5):
    with pytest.raises(PreconditionError):
        mc_probability(A5, parse_word("x1"), 0, seed=0)


def test_mc_single_letter(A5):
    est = mc_probability(A5, parse_word("x1"), 100_000, seed=4).estimate
    se = (1 / 60 * 59 / 60 / 100_000) ** 0.5
    assert abs(est.p - 1 / 60) <= 3 * se


def test_mc_deterministic_and_schedule_free(A5):
    w = parse_word("[x1,x2]")
    a = mc_probability(A5, w, 150_000, seed=9, jobs=1, chunk=40_000).estimate
    b = mc_probability(A5, w, 150_000, seed=9, jobs=3, chunk=40_000).estimate
    assert a == b


def test_exact_inside_mc_interval_for_random_words(A5):
    rng = np.random.default_rng(2024)
    inside = 0
    for i in range(10):
        w = random_word(rng, 2, 6)
        exact = float(exact_probability(A5, w).exact)
        est = mc_probability(A5, w, 100_000, seed=i).estimate
        inside += est.lo <= exact <= est.hi
    assert inside >= 9


def test_wilson_interval_basic():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(0, 10)[0] == 0.0


def test_satisfaction_profile_rows(A5):
    rows = satisfaction_profile(A5, parse_word("x1"), 2)
    assert sum(r["size"] for r in rows) == 3600
    for r in rows:
        assert r["satisfies"] == (r["representative"][0] == "()")
    assert all(r["satisfies"] for r in satisfaction_profile(A5, Word.identity(2), 2))


def test_quotient_monotonicity(A5xC2):
    K = PermutationGroup.from_cycles(["(5 6)"], 7)
    rep = quotient_monotonicity(A5xC2, K, parse_word("[x1,x2]"))
    assert rep.holds and rep.identity_holds
    assert rep.p_quotient == Fraction(1, 12)
    rep = quotient_monotonicity(A5xC2, A5xC2, parse_word("x1 x2^2"))
    assert rep.p_quotient == 1 and rep.holds
    rep = quotient_monotonicity(A5xC2, PermutationGroup([], 7), parse_word("x1^2 x2^3"))
    assert rep.p_group == rep.p_quotient


def test_monotonicity_on_s4_over_klein():
    S4 = symmetric(4)
    V = PermutationGroup.from_cycles(["(0 1)(2 3)", "(0 2)(1 3)"], 4)
    rep = quotient_monotonicity(S4, V, parse_word("x1^2"))
    assert rep.p_group == Fraction(5, 12) and rep.p_quotient == Fraction(2, 3)


def test_monotonicity_rejects_non_normal():
    S4 = symmetric(4)
    with pytest.raises(PreconditionError):
        quotient_monotonicity(S4, PermutationGroup.from_cycles(["(0 1)"], 4), parse_word("x1"))
