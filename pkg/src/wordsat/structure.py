"""Structural analysis of small finite permutation groups.

Everything here works at "desk scale": groups are enumerated element by
element when needed, and caps guard the exhaustive searches.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, InvariantViolation, PreconditionError
from .perm import (
    DEFAULT_ORACLE_CAP,
    Permutation,
    PermutationGroup,
    _closure_chain,
    _ident,
    _inv,
    _mul,
    derived_series,
    is_solvable,
    naive_enumerate,
    normal_closure,
)

__all__ = [
    "GroupAutomorphism",
    "QuotientMap",
    "TupleClass",
    "OrbitInfo",
    "sorted_elements",
    "closure",
    "conjugacy_classes",
    "perfect_core_group",
    "is_simple",
    "minimal_normal_subgroups",
    "simple_factor_decomposition",
    "is_just_nonsolvable",
    "centralizer_is_trivial",
    "quotient",
    "just_nonsolvable_quotient",
    "automorphism_group",
    "automorphism_count_by_diagonals",
    "aut_orbits_on_tuples",
    "automorphism_independent",
    "marked_isomorphic",
    "maximal_subgroup_count",
    "subgroup_lattice",
    "maximal_subgroups_from_lattice",
    "witness_automorphism",
    "tuple_index",
    "generating_tuples",
    "classify_tuples",
    "DEFAULT_TUPLE_CAP",
    "DEFAULT_STRUCTURE_CAP",
]

DEFAULT_TUPLE_CAP = 10**7
DEFAULT_STRUCTURE_CAP = 10**4


def sorted_elements(G: PermutationGroup, cap: int = DEFAULT_ORACLE_CAP) -> list[Permutation]:
    """Elements in lexicographic order of their image tuples (identity first)."""
    return sorted(naive_enumerate(G, cap))


def closure(gens: Iterable[tuple], degree: int, cap: int | None = None) -> set[tuple] | None:
    """Element set of ``<gens>`` as raw tuples, or ``None`` once it passes ``cap``."""
    gens = [g for g in gens if not all(i == x for i, x in enumerate(g))]
    ident = _ident(degree)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _mul(x, g)
                if y not in seen:
                    seen.add(y)
                    if cap is not None and len(seen) > cap:
                        return None
                    nxt.append(y)
        frontier = nxt
    return seen


def conjugacy_classes(G: PermutationGroup, cap: int = DEFAULT_ORACLE_CAP) -> list[list[Permutation]]:
    """Classes as sorted lists, ordered by their least element."""
    elements = sorted_elements(G, cap)
    gens = [g.images for g in G.generators]
    ginv = [_inv(g) for g in gens]
    assigned: set[tuple] = set()
    classes = []
    for e in elements:
        if e.images in assigned:
            continue
        cls = {e.images}
        frontier = [e.images]
        while frontier:
            nxt = []
            for x in frontier:
                for g, gi in zip(gens, ginv):
                    y = _mul(_mul(gi, x), g)
                    if y not in cls:
                        cls.add(y)
                        nxt.append(y)
            frontier = nxt
        assigned |= cls
        classes.append(sorted(Permutation._raw(x) for x in cls))
    return classes


def perfect_core_group(G: PermutationGroup) -> PermutationGroup:
    return derived_series(G)[-1]


def _subgroup_le(A: PermutationGroup, B: PermutationGroup) -> bool:
    return all(B.contains(g) for g in A.generators)


def is_simple(G: PermutationGroup) -> bool:
    if G.order() == 1:
        return False
    for cls in conjugacy_classes(G)[1:]:
        if normal_closure(G, [cls[0]]).order() != G.order():
            return False
    return True


def _normal_closures_of_classes(G: PermutationGroup) -> list[PermutationGroup]:
    out: list[PermutationGroup] = []
    for cls in conjugacy_classes(G)[1:]:
        N = normal_closure(G, [cls[0]])
        if not any(M.order() == N.order() and _subgroup_le(N, M) for M in out):
            out.append(N)
    return out


def minimal_normal_subgroups(G: PermutationGroup) -> list[PermutationGroup]:
    """Inclusion-minimal normal closures of single elements."""
    if G.order() == 1:
        raise PreconditionError("no normal subgroups below the group: it is trivial")
    closures = _normal_closures_of_classes(G)
    minimal = [N for N in closures
               if not any(M.order() < N.order() and _subgroup_le(M, N) for M in closures)]
    return sorted(minimal, key=lambda N: (N.order(), sorted(N.generators)))


def simple_factor_decomposition(N: PermutationGroup) -> list[PermutationGroup]:
    """The simple direct factors of ``N``, which must be a power of a nonabelian simple group."""
    fail = PreconditionError("not a product of nonabelian simples")
    if N.order() == 1 or derived_series(N)[-1].order() != N.order():
        raise fail
    factors = minimal_normal_subgroups(N)
    for F in factors:
        if not is_simple(F):
            raise fail
    for A, B in itertools.combinations(factors, 2):
        if any(a * b != b * a for a in A.generators for b in B.generators):
            raise fail
    if math.prod(F.order() for F in factors) != N.order():
        raise fail
    return factors


def is_just_nonsolvable(G: PermutationGroup) -> bool:
    """Non-solvable while every quotient by a nontrivial normal subgroup is solvable."""
    D = perfect_core_group(G)
    if D.order() == 1:
        return False
    for cls in conjugacy_classes(G)[1:]:
        K = normal_closure(G, [cls[0]])
        if not _subgroup_le(D, K):
            return False
    return True


def centralizer_is_trivial(G: PermutationGroup, N: PermutationGroup) -> bool:
    ngens = [n for n in N.generators]
    for g in naive_enumerate(G):
        if not g.is_identity() and all(g * n == n * g for n in ngens):
            return False
    return True


# -- quotients -----------------------------------------------------------------

@dataclass
class QuotientMap:
    """Surjection ``source -> image`` with kernel ``kernel``.

    When ``regular`` is true the image acts on the right cosets of the kernel
    (coset ``i`` has representative ``coset_reps[i]``); otherwise the kernel is
    trivial and the map is the identity on ``source``.
    """

    source: PermutationGroup
    kernel: PermutationGroup
    image: PermutationGroup
    images_of_generators: list[Permutation]
    regular: bool = True
    coset_reps: list[Permutation] = field(default_factory=list)
    _coset_of: dict = field(default_factory=dict, repr=False)

    def __call__(self, h: Permutation) -> Permutation:
        if not self.regular:
            return h
        idx = self._coset_of
        return Permutation._raw(tuple(idx[_mul(r.images, h.images)] for r in self.coset_reps))

    def check(self, rng: np.random.Generator | None = None, samples: int = 100) -> None:
        """Kernel normality, order factorisation and sampled homomorphism property."""
        for k in self.kernel.generators:
            for g in self.source.generators:
                if not self.kernel.contains(k.conjugate(g)):
                    raise InvariantViolation("kernel is not normal")
        if self.source.order() != self.kernel.order() * self.image.order():
            raise InvariantViolation("|source| != |kernel| * |image|")
        for g, img in zip(self.source.generators, self.images_of_generators):
            if self(g) != img:
                raise InvariantViolation("generator image mismatch")
        if rng is None:
            rng = np.random.default_rng(0)
        from .perm import random_element
        for _ in range(samples):
            a = random_element(self.source, rng)
            b = random_element(self.source, rng)
            if self(a * b) != self(a) * self(b):
                raise InvariantViolation("not a homomorphism")


def quotient(G: PermutationGroup, K: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> QuotientMap:
    """``G -> G/K`` realised by right multiplication on the right cosets ``Kg``."""
    for k in K.generators:
        for g in G.generators:
            if not K.contains(k.conjugate(g)):
                raise PreconditionError("K is not normal in G")
    elements = sorted_elements(G, cap)
    kel = [k.images for k in naive_enumerate(K, cap)]
    coset_of: dict[tuple, int] = {}
    reps: list[Permutation] = []
    for e in elements:
        if e.images in coset_of:
            continue
        i = len(reps)
        reps.append(e)
        for k in kel:
            coset_of[_mul(k, e.images)] = i
    qm = QuotientMap(G, K, None, [], True, reps, coset_of)  # type: ignore[arg-type]
    images = [qm(g) for g in G.generators]
    qm.images_of_generators = images
    qm.image = PermutationGroup(images, len(reps))
    return qm


def just_nonsolvable_quotient(H: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> QuotientMap:
    """A map onto a just non-solvable quotient of ``H`` by greedy kernel ascent.

    Elements are tried in order of (element order, images); a candidate
    enlargement of the kernel is kept while the quotient stays non-solvable,
    i.e. while the perfect core of ``H`` is not swallowed.
    """
    D = perfect_core_group(H)
    if D.order() == 1:
        raise PreconditionError("group is solvable; no just non-solvable quotient")
    elements = sorted(naive_enumerate(H, cap), key=lambda p: (p.order(), p.images))
    conj = [(g.images, None) for g in H.generators]
    kgens: list[tuple] = []
    kchain, _ = _closure_chain(H.degree, conj, [])
    for g in elements:
        if g.is_identity() or kchain.contains(g.images):
            continue
        chain, added = _closure_chain(H.degree, conj, [(x, None) for x in kgens + [g.images]])
        if not all(chain.contains(d.images) for d in D.generators):
            kchain = chain
            kgens = [x for x, _ in added]
    K = PermutationGroup([Permutation._raw(x) for x in kgens], H.degree)
    if not kgens:
        return QuotientMap(H, K, H, list(H.generators), regular=False)
    return quotient(H, K, cap)


# -- automorphisms ---------------------------------------------------------------

def _extend_hom(gens: Sequence[tuple], imgs: Sequence[tuple], degree: int,
                cap: int | None = None) -> dict[tuple, tuple] | None:
    """The injective homomorphism ``<gens> -> <imgs>`` sending gens to imgs, if it exists."""
    ident = _ident(degree)
    f = {ident: _ident(len(imgs[0])) if imgs else ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            fx = f[x]
            for g, c in zip(gens, imgs):
                y = _mul(x, g)
                fy = _mul(fx, c)
                got = f.get(y)
                if got is None:
                    f[y] = fy
                    nxt.append(y)
                    if cap is not None and len(f) > cap:
                        return None
                elif got != fy:
                    return None
        frontier = nxt
    if len(set(f.values())) != len(f):
        return None
    return f


class GroupAutomorphism:
    """An automorphism stored by the images of ``domain.generators``."""

    def __init__(self, domain: PermutationGroup, images: Sequence[Permutation]):
        self.domain = domain
        self.images = tuple(images)
        if len(self.images) != len(domain.generators):
            raise ValueError("need one image per generator")

    @cached_property
    def element_map(self) -> dict[tuple, tuple]:
        f = _extend_hom([g.images for g in self.domain.generators],
                        [c.images for c in self.images], self.domain.degree)
        if f is None or len(f) != self.domain.order() or \
                set(f.values()) != set(f.keys()):
            raise InvariantViolation("generator images do not define an automorphism")
        return f

    def __call__(self, g: Permutation) -> Permutation:
        return Permutation._raw(self.element_map[g.images])

    def apply_tuple(self, t: Sequence[Permutation]) -> tuple[Permutation, ...]:
        m = self.element_map
        return tuple(Permutation._raw(m[x.images]) for x in t)

    def compose(self, other: "GroupAutomorphism") -> "GroupAutomorphism":
        """``self`` first, then ``other``."""
        return GroupAutomorphism(self.domain, [other(self(g)) for g in self.domain.generators])

    def is_valid(self) -> bool:
        try:
            self.element_map
        except InvariantViolation:
            return False
        return True

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupAutomorphism) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def to_json(self) -> dict:
        return {"generators": [g.cycles() for g in self.domain.generators],
                "images": [c.cycles() for c in self.images]}

    @classmethod
    def from_json(cls, domain: PermutationGroup, data: dict) -> "GroupAutomorphism":
        return cls(domain, [Permutation.from_cycles(c, domain.degree) for c in data["images"]])


def _word_fingerprint(t: Sequence[tuple]) -> tuple:
    """Element orders of short words in ``t``; invariant under marked isomorphisms."""
    def order(x):
        return Permutation._raw(x).order()
    fp = [order(x) for x in t]
    for a, b in itertools.combinations(t, 2):
        ab = _mul(a, b)
        fp += [order(ab), order(_mul(a, _inv(b))), order(_mul(ab, b)), order(_mul(a, ab)),
               order(_mul(_mul(_inv(a), _inv(b)), ab))]
    return tuple(fp)


def automorphism_group(G: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> list[GroupAutomorphism]:
    """All automorphisms by backtracking over images of ``G.generators``.

    Candidates are filtered by element order and a short-word fingerprint;
    each partial assignment must extend consistently over the closure of the
    generators fixed so far.
    """
    n = G.order()
    if n > cap:
        raise CapExceeded(f"|G| = {n} exceeds the automorphism cap {cap}; "
                          "supply automorphism generators instead")
    gens = [g.images for g in G.generators if not g.is_identity()]
    elements = sorted(naive_enumerate(G, cap))
    by_order: dict[int, list[tuple]] = {}
    for e in elements:
        by_order.setdefault(e.order(), []).append(e.images)
    target_fp = _word_fingerprint(gens)
    results: list[list[tuple]] = []

    def search(chosen: list[tuple]):
        j = len(chosen)
        if j == len(gens):
            if _word_fingerprint(chosen) != target_fp:
                return
            f = _extend_hom(gens, chosen, G.degree)
            if f is not None and len(f) == n:
                results.append(list(chosen))
            return
        for c in by_order[Permutation._raw(gens[j]).order()]:
            nxt = chosen + [c]
            if _word_fingerprint(nxt) != _word_fingerprint(gens[: j + 1]):
                continue
            if j + 1 < len(gens) and _extend_hom(gens[: j + 1], nxt, G.degree) is None:
                continue
            search(nxt)

    search([])
    auts = []
    for imgs in results:
        it = iter(imgs)
        full = [Permutation._raw(next(it)) if not g.is_identity() else g for g in G.generators]
        auts.append(GroupAutomorphism(G, full))
    return auts


def automorphism_count_by_diagonals(G: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> int:
    """|Aut(G)| counted as generating tuples ``c`` with ``<(g_i, c_i)>`` a diagonal of order |G|.

    Shares no code with :func:`automorphism_group`; used as its cross-check.
    """
    n = G.order()
    if n > cap:
        raise CapExceeded(f"|G| = {n} exceeds cap {cap}")
    gens = [g.images for g in G.generators if not g.is_identity()]
    if not gens:
        return 1
    deg = G.degree
    elements = [e.images for e in naive_enumerate(G, cap)]
    count = 0
    for imgs in itertools.product(elements, repeat=len(gens)):
        sub = closure(imgs, deg, n)
        if sub is None or len(sub) != n:
            continue
        diag = [g + tuple(x + deg for x in c) for g, c in zip(gens, imgs)]
        if closure(diag, 2 * deg, n) is not None:
            count += 1
    return count


@dataclass(frozen=True)
class OrbitInfo:
    representative: tuple[Permutation, ...]
    size: int
    members: tuple[int, ...]  # positions in the input list


def _generates(t: Sequence[Permutation], G: PermutationGroup) -> bool:
    n = G.order()
    sub = closure([x.images for x in t], G.degree, n)
    return sub is not None and len(sub) == n


def aut_orbits_on_tuples(G: PermutationGroup, tuples: Sequence[Sequence[Permutation]],
                         auts: Sequence[GroupAutomorphism]) -> list[OrbitInfo]:
    """Partition ``tuples`` into orbits of the automorphism group.

    Representatives are lexicographic minima; orbits are returned in order of
    their representatives.  Orbits of generating tuples must be regular.
    """
    keys = [tuple(x.images for x in t) for t in tuples]
    position: dict[tuple, list[int]] = {}
    for i, k in enumerate(keys):
        position.setdefault(k, []).append(i)
    maps = [a.element_map for a in auts]
    done: set[tuple] = set()
    out = []
    for k in keys:
        if k in done:
            continue
        orbit = {tuple(m[x] for x in k) for m in maps} | {k}
        done |= orbit
        members = sorted(i for o in orbit for i in position.get(o, ()))
        rep = min(o for o in orbit if o in position)
        rep_t = tuple(Permutation._raw(x) for x in rep)
        if _generates(rep_t, G) and len(orbit) != len(auts):
            raise InvariantViolation(
                f"orbit of a generating tuple has size {len(orbit)}, expected |Aut| = {len(auts)}")
        out.append(OrbitInfo(rep_t, len(members), tuple(members)))
    out.sort(key=lambda o: tuple(x.images for x in o.representative))
    return out


def automorphism_independent(t1: Sequence[Permutation], t2: Sequence[Permutation],
                             auts: Sequence[GroupAutomorphism]) -> bool:
    """True iff no listed automorphism maps ``t1`` to ``t2`` coordinatewise."""
    return witness_automorphism(t1, t2, auts) is None


def witness_automorphism(t1, t2, auts) -> GroupAutomorphism | None:
    if len(t1) != len(t2):
        raise ValueError("tuples of different lengths")
    k1 = [x.images for x in t1]
    k2 = [x.images for x in t2]
    for a in auts:
        m = a.element_map
        if all(m[x] == y for x, y in zip(k1, k2)):
            return a
    return None


# -- subgroups -------------------------------------------------------------------

class _Table:
    """Multiplication table on the sorted element list, for bitmask subgroup work."""

    def __init__(self, G: PermutationGroup, cap: int):
        n = G.order()
        if n > cap:
            raise CapExceeded(f"|G| = {n} exceeds the subgroup-search cap {cap}")
        self.elements = sorted(naive_enumerate(G, cap))
        self.index = {e.images: i for i, e in enumerate(self.elements)}
        self.n = len(self.elements)
        self._rows: dict[int, list[int]] = {}

    def right(self, g: int) -> list[int]:
        """``[x * g for x]`` as indices."""
        if g not in self._rows:
            gi = self.elements[g].images
            self._rows[g] = [self.index[_mul(e.images, gi)] for e in self.elements]
        return self._rows[g]

    def closure(self, gens: Iterable[int]) -> int:
        gens = [g for g in set(gens) if g != 0]
        rows = [self.right(g) for g in gens]
        seen = 1
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for r in rows:
                    y = r[x]
                    if not (seen >> y) & 1:
                        seen |= 1 << y
                        nxt.append(y)
            frontier = nxt
        return seen


def _maximal_among(subgroups: dict[int, tuple], full: int) -> list[int]:
    proper = [s for s in subgroups if s != full]
    return [s for s in proper if not any(t != s and (s & t) == s for t in proper)]


def _assert_maximal(table: _Table, masks: Iterable[int], gens_of: dict[int, tuple], full: int) -> None:
    for s in masks:
        for x in range(table.n):
            if not (s >> x) & 1 and table.closure(gens_of[s] + (x,)) != full:
                raise InvariantViolation("a subgroup reported maximal is not maximal")


def maximal_subgroup_count(G: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> tuple[int, list[int]]:
    """Number of maximal subgroups and their indices (sorted).

    Candidates are closures of element pairs and of (pair-closure, element)
    triples, which is complete when every maximal subgroup is 3-generated.
    Each reported subgroup is re-checked for maximality.
    """
    T = _Table(G, cap)
    full = (1 << T.n) - 1
    found: dict[int, tuple] = {}
    for a in range(T.n):
        for b in range(a, T.n):
            s = T.closure((a, b))
            found.setdefault(s, (a, b))
    for s, gens in list(found.items()):
        if s == full:
            continue
        for x in range(T.n):
            if not (s >> x) & 1:
                t = T.closure(gens + (x,))
                found.setdefault(t, gens + (x,))
    if T.n == 1:
        return 0, []
    maxi = _maximal_among(found, full)
    _assert_maximal(T, maxi, found, full)
    indices = sorted(T.n // bin(s).count("1") for s in maxi)
    return len(maxi), indices


def subgroup_lattice(G: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> list[frozenset[Permutation]]:
    """Every subgroup, found by adjoining one element at a time starting from 1.

    Complete for any finite group (each subgroup is reached through a chain
    of one-element extensions); independent of :func:`maximal_subgroup_count`.
    """
    T = _Table(G, cap)
    start = T.closure(())
    seen = {start: ()}
    queue = [start]
    while queue:
        s = queue.pop()
        gens = seen[s]
        for x in range(T.n):
            if (s >> x) & 1:
                continue
            t = T.closure(gens + (x,))
            if t not in seen:
                seen[t] = gens + (x,)
                queue.append(t)
    return [frozenset(T.elements[i] for i in range(T.n) if (s >> i) & 1) for s in seen]


def maximal_subgroups_from_lattice(G: PermutationGroup, cap: int = DEFAULT_STRUCTURE_CAP) -> list[frozenset]:
    subs = subgroup_lattice(G, cap)
    n = G.order()
    proper = [s for s in subs if len(s) < n]
    return [s for s in proper if not any(len(t) > len(s) and s < t for t in proper)]


def generating_tuples(G: PermutationGroup, d: int, cap: int = DEFAULT_TUPLE_CAP) -> list[tuple[Permutation, ...]]:
    """All ``d``-tuples generating ``G``, in lexicographic order."""
    n = G.order()
    if n ** d > cap:
        raise CapExceeded(f"|G|^d = {n ** d} exceeds the enumeration cap {cap}; use Monte Carlo")
    elements = sorted_elements(G)
    out = []
    for t in itertools.product(elements, repeat=d):
        sub = closure([x.images for x in t], G.degree, n)
        if sub is not None and len(sub) == n:
            out.append(t)
    return out


# -- tuple classes up to marked isomorphism -----------------------------------------

def marked_isomorphic(t1: Sequence[Permutation], t2: Sequence[Permutation]) -> bool:
    """True iff ``t1[i] -> t2[i]`` extends to an isomorphism ``<t1> -> <t2>``.

    Equivalent to the diagonal ``<(t1[i], t2[i])>`` having the order of ``<t1>``
    and of ``<t2>``.
    """
    if len(t1) != len(t2):
        return False
    deg1, deg2 = t1[0].degree, t2[0].degree
    a = closure([x.images for x in t1], deg1)
    b = closure([x.images for x in t2], deg2)
    if len(a) != len(b):
        return False
    diag = [x.images + tuple(y + deg1 for y in z.images) for x, z in zip(t1, t2)]
    return closure(diag, deg1 + deg2, len(a)) is not None


@dataclass
class TupleClass:
    """``n``-tuples whose generated subgroups are marked-isomorphic to the representative's."""

    representative: tuple[Permutation, ...]
    members: int
    generated_subgroup_order: int
    solvable: bool
    member_indices: list[int] = field(default_factory=list, repr=False)
    quotient: QuotientMap | None = field(default=None, repr=False)

    @property
    def subgroup(self) -> PermutationGroup:
        return PermutationGroup(list(self.representative), self.representative[0].degree)


def tuple_index(t: Sequence[Permutation], index: dict[tuple, int], n_el: int) -> int:
    """Mixed-radix position of ``t`` in lexicographic enumeration of ``G^n``."""
    out = 0
    for x in t:
        out = out * n_el + index[x.images]
    return out


def classify_tuples(G: PermutationGroup, n: int, cap: int = DEFAULT_TUPLE_CAP) -> list[TupleClass]:
    """Group all of ``G^n`` into marked-isomorphism classes.

    Tuples are bucketed by subgroup order and a short-word fingerprint, then
    compared to the bucket's representatives with :func:`marked_isomorphic`.
    Classes come out in order of their first (least) member.
    """
    size = G.order()
    if size ** n > cap:
        raise CapExceeded(f"|G|^n = {size ** n} exceeds the enumeration cap {cap}")
    elements = sorted_elements(G)
    deg = G.degree
    buckets: dict[tuple, list[int]] = {}
    classes: list[TupleClass] = []
    for pos, t in enumerate(itertools.product(elements, repeat=n)):
        raw = [x.images for x in t]
        sub = closure(raw, deg)
        fp = (len(sub), _word_fingerprint(raw))
        home = None
        for ci in buckets.get(fp, ()):
            rep = classes[ci].representative
            diag = [x.images + tuple(y + deg for y in z) for x, z in zip(rep, raw)]
            if closure(diag, 2 * deg, len(sub)) is not None:
                home = ci
                break
        if home is None:
            home = len(classes)
            buckets.setdefault(fp, []).append(home)
            H = PermutationGroup(list(t), deg)
            classes.append(TupleClass(tuple(t), 0, len(sub), is_solvable(H)))
        classes[home].members += 1
        classes[home].member_indices.append(pos)
    return classes
