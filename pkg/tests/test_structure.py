import numpy as np
import pytest

from wordsat import Permutation, PermutationGroup, PreconditionError
from wordsat.catalog import alternating, by_name, cyclic, dihedral, symmetric
from wordsat.perm import is_solvable
from wordsat.structure import (
    aut_orbits_on_tuples,
    automorphism_count_by_diagonals,
    automorphism_group,
    automorphism_independent,
    classify_tuples,
    closure,
    conjugacy_classes,
    generating_tuples,
    is_just_nonsolvable,
    is_simple,
    just_nonsolvable_quotient,
    marked_isomorphic,
    maximal_subgroup_count,
    maximal_subgroups_from_lattice,
    minimal_normal_subgroups,
    quotient,
    simple_factor_decomposition,
    subgroup_lattice,
    witness_automorphism,
)


def test_conjugacy_classes():
    assert sorted(len(c) for c in conjugacy_classes(alternating(5))) == [1, 12, 12, 15, 20]
    assert len(conjugacy_classes(symmetric(4))) == 5


@pytest.mark.parametrize("name,simple", [("A5", True), ("C5", True), ("GL32", True), ("S5", False),
                                         ("A4", False), ("C6", False), ("A6", True)])
def test_is_simple(name, simple):
    assert is_simple(by_name(name)) == simple


@pytest.mark.parametrize("name,orders", [("S4", [4]), ("A5", [60]), ("C6", [2, 3]), ("S5", [60]),
                                         ("A5xA5", [60, 60])])
def test_minimal_normal_subgroups(name, orders):
    assert sorted(N.order() for N in minimal_normal_subgroups(by_name(name))) == orders


def test_minimal_normal_of_trivial_group():
    with pytest.raises(PreconditionError):
        minimal_normal_subgroups(PermutationGroup([], 3))


def test_simple_factors():
    G = by_name("A5xA5")
    N = minimal_normal_subgroups(G)[0]
    assert [S.order() for S in simple_factor_decomposition(N)] == [60]
    factors = simple_factor_decomposition(G)
    assert [S.order() for S in factors] == [60, 60]


@pytest.mark.parametrize("name,jns", [("A5", True), ("S5", True), ("GL32", True), ("A5xC2", False),
                                      ("A5xA5", False), ("S4", False), ("C2", False)])
def test_just_nonsolvable(name, jns):
    assert is_just_nonsolvable(by_name(name)) == jns


def test_jns_quotient_of_product_with_c2():
    G = by_name("A5xC2")
    q = just_nonsolvable_quotient(G)
    assert q.kernel.order() == 2
    assert q.image.order() == 60
    assert is_just_nonsolvable(q.image)
    q.check(np.random.default_rng(0), 50)


def test_jns_quotient_identity_for_jns_input():
    q = just_nonsolvable_quotient(symmetric(5))
    assert q.kernel.order() == 1
    assert q.image.order() == 120


def test_quotient_is_homomorphism():
    S4 = symmetric(4)
    V = PermutationGroup.from_cycles(["(0 1)(2 3)", "(0 2)(1 3)"], 4)
    q = quotient(S4, V)
    assert q.image.order() == 6
    rng = np.random.default_rng(3)
    for _ in range(30):
        a, b = S4.random_element(rng), S4.random_element(rng)
        assert q(a * b) == q(a) * q(b)


def test_quotient_rejects_non_normal():
    S4 = symmetric(4)
    with pytest.raises(PreconditionError):
        quotient(S4, PermutationGroup.from_cycles(["(0 1)"], 4))


@pytest.mark.parametrize("name,size", [("A5", 120), ("S3", 6), ("C2", 1), ("C5", 4), ("S4", 24),
                                       ("D10", 20)])
def test_automorphism_group_order(name, size):
    G = by_name(name)
    auts = automorphism_group(G)
    assert len(auts) == size
    assert all(a.is_valid() for a in auts)
    assert automorphism_count_by_diagonals(G) == size


def test_orbits_on_generating_pairs(A5, a5_auts):
    S = generating_tuples(A5, 2)
    assert len(S) == 2280
    orbits = aut_orbits_on_tuples(A5, S, a5_auts)
    assert len(orbits) == 19
    assert all(o.size == 120 for o in orbits)
    t0, t1 = orbits[0].representative, orbits[1].representative
    assert automorphism_independent(t0, t1, a5_auts)
    img = a5_auts[7].apply_tuple(t0)
    assert not automorphism_independent(t0, img, a5_auts)
    assert witness_automorphism(t0, img, a5_auts).apply_tuple(t0) == img


@pytest.mark.parametrize("name,m", [("A5", 21), ("S3", 4), ("C2", 1), ("S4", 8), ("C6", 2)])
def test_maximal_subgroup_count(name, m):
    G = by_name(name)
    count, _ = maximal_subgroup_count(G)
    assert count == m
    assert len(maximal_subgroups_from_lattice(G)) == m


def test_a5_lattice():
    assert len(subgroup_lattice(alternating(5))) == 59


def test_marked_isomorphism():
    A5 = alternating(5)
    a, b = A5.generators
    g = Permutation.from_cycles("(0 1)", 5)
    assert marked_isomorphic((a, b), (a.conjugate(g), b.conjugate(g)))
    assert not marked_isomorphic((a, b), (b, a))
    c3 = Permutation.from_cycles("(0 1 2)", 5)
    assert not marked_isomorphic((c3,), (Permutation.from_cycles("(0 1)(2 3)", 5),))


def test_classify_tuples_covers_and_agrees():
    A5 = alternating(5)
    classes = classify_tuples(A5, 2)
    assert sum(c.members for c in classes) == 3600
    assert len(classes) == 44
    assert sum(not c.solvable for c in classes) == 19
    for c in classes:
        assert c.solvable == is_solvable(c.subgroup)
        assert len(closure([x.images for x in c.representative], 5)) == c.generated_subgroup_order


def test_classes_respect_word_values():
    # any word takes the identity on one member iff on all members of the class
    from wordsat.slp import evaluate_word, parse_word
    from wordsat.structure import sorted_elements
    G = symmetric(4)
    els = sorted_elements(G)
    w = parse_word("x1^2 [x1,x2]^3")
    rng = np.random.default_rng(0)
    for c in classify_tuples(G, 2):
        ref = evaluate_word(w, c.representative).is_identity()
        for pos in rng.choice(c.member_indices, size=min(3, c.members), replace=False):
            t = (els[pos // 24], els[pos % 24])
            assert evaluate_word(w, t).is_identity() == ref


def test_generating_tuples_small():
    assert len(generating_tuples(cyclic(6), 1)) == 2
    assert len(generating_tuples(dihedral(3), 2)) == 18
