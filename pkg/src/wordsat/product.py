"""Direct products on disjoint domains and their SLP-tagged subgroups.

A :class:`ProductGroup` places coordinate ``i`` on points
``offset_i .. offset_i + degree_i - 1``; projections are restrictions to
those points.  Coordinates are numbered from 0.

A :class:`TaggedSubgroup` is generated by elements ``p_1 .. p_n`` of the
product, and every element it produces (strong generators, derived-series
generators, sifted members) carries a straight-line program over the letters
``x1 .. xn`` that evaluates to it at ``(p_1, .., p_n)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError
from .perm import (
    Permutation,
    PermutationGroup,
    StabilizerChain,
    _closure_chain,
    _inv,
    _is_ident,
    _mul,
)
from .slp import SLPBuilder, StraightLineProgram
from .structure import (
    GroupAutomorphism,
    is_simple,
    witness_automorphism,
)

__all__ = [
    "ProductGroup",
    "TaggedSubgroup",
    "assemble",
    "perfect_core",
    "coordinate_kernel",
    "projection",
    "subproduct_form",
    "verify_lemma_subdir",
    "verify_lemma_trukk",
    "diagonal_blocks",
    "pattern_element",
    "constructive_membership",
    "SubdirReport",
    "TrukkReport",
    "NONTRIVIAL",
    "TRIVIAL",
    "FREE",
]

NONTRIVIAL, TRIVIAL, FREE = "nontrivial", "trivial", "free"


class ProductGroup:
    """``G_0 x G_1 x ...`` acting on the disjoint union of the coordinate domains."""

    def __init__(self, coordinates: Sequence[PermutationGroup]):
        if not coordinates:
            raise ValueError("a product needs at least one coordinate")
        self.coordinates = list(coordinates)
        self.offsets = []
        off = 0
        for G in self.coordinates:
            self.offsets.append(off)
            off += G.degree
        self.degree = off

    def __len__(self) -> int:
        return len(self.coordinates)

    def domain(self, i: int) -> range:
        return range(self.offsets[i], self.offsets[i] + self.coordinates[i].degree)

    def element(self, entries: Sequence[Permutation]) -> Permutation:
        """The product element with coordinate ``i`` equal to ``entries[i]``."""
        if len(entries) != len(self.coordinates):
            raise ValueError(f"need {len(self.coordinates)} entries, got {len(entries)}")
        images: list[int] = []
        for off, G, e in zip(self.offsets, self.coordinates, entries):
            if e.degree != G.degree:
                raise PreconditionError(f"entry of degree {e.degree} for coordinate of degree {G.degree}")
            images.extend(x + off for x in e.images)
        return Permutation._raw(tuple(images))

    def embed(self, i: int, p: Permutation) -> Permutation:
        entries = [G.identity() for G in self.coordinates]
        entries[i] = p
        return self.element(entries)

    def project(self, i: int, p: Permutation) -> Permutation:
        off = self.offsets[i]
        return Permutation._raw(tuple(p.images[off + x] - off for x in range(self.coordinates[i].degree)))

    def components(self, p: Permutation) -> list[Permutation]:
        return [self.project(i, p) for i in range(len(self.coordinates))]

    def as_group(self) -> PermutationGroup:
        gens = [self.embed(i, g) for i, G in enumerate(self.coordinates) for g in G.generators]
        return PermutationGroup(gens, self.degree)


@dataclass
class TaggedSubgroup:
    """Subgroup of ``ambient`` whose generators carry SLP refs into ``builder``."""

    ambient: ProductGroup
    generators: list[Permutation]
    tags: list[int | None]
    builder: SLPBuilder
    base_prefix: tuple[int, ...] = ()
    _chain: StabilizerChain | None = field(default=None, repr=False)

    @property
    def arity(self) -> int:
        return self.builder.arity

    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            self._chain = StabilizerChain(self.ambient.degree, [g.images for g in self.generators],
                                          self.tags, self.builder, self.base_prefix)
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def contains(self, g: Permutation) -> bool:
        return self.chain.contains(g.images)

    def as_group(self) -> PermutationGroup:
        return PermutationGroup(self.generators, self.ambient.degree)

    def tag_program(self, tag) -> StraightLineProgram:
        return self.builder.extract(tag)

    def projection(self, coords: Sequence[int]) -> PermutationGroup:
        return projection(self, coords)


def assemble(ambient: ProductGroup, columns: Sequence[Sequence[Permutation]],
             check: bool = True) -> TaggedSubgroup:
    """``L = <p_1 .. p_n>`` where ``p_j`` has coordinate ``i`` equal to ``columns[j][i]``."""
    builder = SLPBuilder(len(columns))
    gens, tags = [], []
    for j, col in enumerate(columns):
        if check:
            for i, (G, u) in enumerate(zip(ambient.coordinates, col)):
                if not G.contains(u):
                    raise PreconditionError(f"entry {u.cycles()} of column {j} is not in coordinate {i}")
        gens.append(ambient.element(col))
        tags.append(builder.input(j + 1))
    return TaggedSubgroup(ambient, gens, tags, builder)


def _tagged_from_chain(H: TaggedSubgroup, chain: StabilizerChain, gens) -> TaggedSubgroup:
    out = TaggedSubgroup(H.ambient, [Permutation._raw(x) for x, _ in gens],
                         [t for _, t in gens], H.builder)
    out._chain = chain
    return out


def derived_step(H: TaggedSubgroup) -> TaggedSubgroup:
    """``H'``: normal closure in ``H`` of the commutators of generator pairs, tagged."""
    b = H.builder
    pairs = [(g.images, t) for g, t in zip(H.generators, H.tags) if not g.is_identity()]
    seeds = []
    for (x, tx), (y, ty) in itertools.combinations(pairs, 2):
        c = _mul(_mul(_inv(x), _inv(y)), _mul(x, y))
        if not _is_ident(c):
            seeds.append((c, b.comm(tx, ty)))
    chain, added = _closure_chain(H.ambient.degree, pairs, seeds, b)
    return _tagged_from_chain(H, chain, added)


def perfect_core(L: TaggedSubgroup) -> tuple[TaggedSubgroup, int]:
    """The terminal derived subgroup ``M = L^(r) = L^(r+1)`` and ``r``."""
    cur = L
    r = 0
    while True:
        nxt = derived_step(cur)
        if nxt.order() == cur.order():
            return cur, r
        cur = nxt
        r += 1


def coordinate_kernel(H: TaggedSubgroup, coords) -> TaggedSubgroup:
    """Elements of ``H`` trivial on every coordinate in ``coords``.

    Read off a chain of ``H`` whose base begins with those coordinate domains.
    """
    coords = sorted(set(coords))
    if not coords:
        return H
    prefix = tuple(p for i in coords for p in H.ambient.domain(i))
    chain = StabilizerChain(H.ambient.degree, [g.images for g in H.generators], H.tags,
                            H.builder, prefix)
    k = len(prefix)
    idx = chain.level_generators(k)
    gens = [(chain.strong[i], chain.strong_tags[i]) for i in idx]
    sub = _tail_chain(chain, k)
    return _tagged_from_chain(H, sub, gens)


def _tail_chain(chain: StabilizerChain, k: int) -> StabilizerChain:
    sub = object.__new__(StabilizerChain)
    sub.degree = chain.degree
    sub.builder = chain.builder
    sub.identity = chain.identity
    sub.strong = chain.strong
    sub.strong_tags = chain.strong_tags
    sub.levels = chain.levels[k:]
    return sub


def projection(H: TaggedSubgroup, coords: Sequence[int]) -> PermutationGroup:
    """Image of ``H`` under restriction to the listed coordinates (in the given order)."""
    amb = H.ambient
    pts = [p for i in coords for p in amb.domain(i)]
    where = {p: k for k, p in enumerate(pts)}
    gens = [Permutation._raw(tuple(where[g.images[p]] for p in pts)) for g in H.generators]
    return PermutationGroup(gens, len(pts))


def subproduct_form(K: TaggedSubgroup | PermutationGroup, ambient: ProductGroup) -> list[bool] | None:
    """Per coordinate, whether ``K`` contains the full factor; ``None`` unless ``K`` is a subproduct.

    ``K`` is a subproduct when it equals the product of its projections and
    each projection is trivial or the whole coordinate group.
    """
    if isinstance(K, PermutationGroup):
        K = TaggedSubgroup(ambient, list(K.generators), [None] * len(K.generators), SLPBuilder(1))
    flags = []
    total = 1
    for i, G in enumerate(ambient.coordinates):
        o = projection(K, [i]).order()
        if o not in (1, G.order()):
            return None
        flags.append(o != 1)
        total *= o
    return flags if K.order() == total else None


# -- structural checks ---------------------------------------------------------------

@dataclass
class SubdirReport:
    ok: bool
    left_order: int
    right_order: int
    nontrivial_coordinates: list[int]
    failures: list[str] = field(default_factory=list)


def _embedded_factor_group(ambient: ProductGroup, factors: Sequence[PermutationGroup],
                           coords: Sequence[int]) -> PermutationGroup:
    gens = [ambient.embed(i, g) for i in coords for g in factors[i].generators]
    if not gens:
        gens = [Permutation.identity(ambient.degree)]
    return PermutationGroup(gens, ambient.degree)


def verify_lemma_subdir(H: TaggedSubgroup, K: PermutationGroup,
                        normal_factors: Sequence[PermutationGroup], cap: int = 10**5) -> SubdirReport:
    """Compare ``K ∩ M`` with the product of the ``N_j`` on which ``K`` projects nontrivially.

    ``M`` is the product of ``normal_factors[j]`` (each normal in coordinate
    ``j``).  Hypotheses are verified, not assumed; failures are listed.
    """
    amb = H.ambient
    failures = []
    for j, G in enumerate(amb.coordinates):
        if projection(H, [j]).order() != G.order():
            failures.append(f"projection of H to coordinate {j} is not onto")
    M = _embedded_factor_group(amb, normal_factors, range(len(amb)))
    Hg = H.as_group()
    if not all(Hg.contains(m) for m in M.generators):
        failures.append("M is not contained in H")
    for k in K.generators:
        if not Hg.contains(k):
            failures.append("K is not contained in H")
            break
        if any(not K.contains(k.conjugate(h)) for h in H.generators):
            failures.append("K is not normal in H")
            break
    if failures:
        return SubdirReport(False, 0, 0, [], failures)

    def in_M(p: Permutation) -> bool:
        return all(normal_factors[j].contains(amb.project(j, p)) for j in range(len(amb)))

    if all(in_M(k) for k in K.generators):
        left = K
    else:
        from .perm import naive_enumerate
        members = [k for k in naive_enumerate(K, cap) if in_M(k)]
        left = PermutationGroup(members or [Permutation.identity(amb.degree)], amb.degree)
    nontriv = [j for j in range(len(amb))
               if any(not amb.project(j, k).is_identity() for k in K.generators)]
    right = _embedded_factor_group(amb, normal_factors, nontriv)
    ok = left.order() == right.order() and all(right.contains(x) for x in left.generators)
    return SubdirReport(ok, left.order(), right.order(), nontriv)


@dataclass
class TrukkReport:
    ok: bool
    H: TaggedSubgroup
    order: int
    missing: list[tuple[int, Permutation]] = field(default_factory=list)


def verify_lemma_trukk(G: PermutationGroup, tuples: Sequence[Sequence[Permutation]],
                       auts: Sequence[GroupAutomorphism], N: PermutationGroup) -> TrukkReport:
    """Check that ``H = <h_1 .. h_k>`` contains ``N^n`` for pairwise independent generating tuples.

    ``tuples[j]`` is the ``k``-tuple placed in coordinate ``j``;
    ``h_i = (tuples[0][i], .., tuples[n-1][i])``.  Raises
    :class:`PreconditionError` naming the offending tuple or automorphism.
    """
    from .structure import closure
    n = G.order()
    for j, t in enumerate(tuples):
        sub = closure([x.images for x in t], G.degree, n)
        if sub is None or len(sub) != n:
            raise PreconditionError(f"tuple {j} does not generate the group")
    for j, l in itertools.combinations(range(len(tuples)), 2):
        a = witness_automorphism(tuples[j], tuples[l], auts)
        if a is not None:
            raise PreconditionError(
                f"tuples {j} and {l} are automorphism dependent via generator images "
                f"{[c.cycles() for c in a.images]}")
    k = len(tuples[0])
    ambient = ProductGroup([G] * len(tuples))
    columns = [[t[i] for t in tuples] for i in range(k)]
    H = assemble(ambient, columns, check=False)
    missing = [(j, g) for j in range(len(tuples)) for g in N.generators
               if not H.contains(ambient.embed(j, g))]
    return TrukkReport(not missing, H, H.order(), missing)


# -- diagonal blocks and pattern elements -----------------------------------------

def diagonal_blocks(M: TaggedSubgroup, coords: Sequence[int] | None = None,
                    verify: bool = True) -> list[list[int]]:
    """Partition of coordinates into linked diagonal blocks.

    Every listed coordinate must carry a nonabelian simple projection
    ``pi_i(M)``; ``i`` and ``j`` are linked when the projection of ``M`` to the
    pair has order ``|pi_i(M)|``.  Coordinates not listed must be trivial in
    ``M`` for the block-order check to hold.
    """
    amb = M.ambient
    coords = list(range(len(amb))) if coords is None else list(coords)
    proj_order = {}
    for i in coords:
        P = projection(M, [i])
        if P.order() < 60 or not is_simple(P):
            raise PreconditionError(f"projection of M to coordinate {i} is not nonabelian simple")
        proj_order[i] = P.order()
    linked = {}
    for i, j in itertools.combinations(coords, 2):
        linked[i, j] = projection(M, [i, j]).order() == proj_order[i]
    parent = {i: i for i in coords}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, j), yes in linked.items():
        if yes:
            parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in coords:
        groups.setdefault(find(i), []).append(i)
    blocks = sorted(groups.values())
    for blk in blocks:
        for i, j in itertools.combinations(blk, 2):
            if not linked[i, j]:
                raise InvariantViolation(f"diagonal linkage is not transitive on block {blk}")
    if verify:
        total = 1
        for blk in blocks:
            others = [c for c in range(len(amb)) if c not in blk]
            total *= coordinate_kernel(M, others).order()
        if total != M.order():
            raise InvariantViolation("block subgroups do not multiply to |M|")
    return blocks


def _nontrivial_generator(H: TaggedSubgroup) -> tuple[tuple, object] | None:
    chain = H.chain
    for lv in chain.levels:
        for s in lv.gens:
            if not _is_ident(chain.strong[s]):
                return chain.strong[s], chain.strong_tags[s]
    return None


BLOCK_METHOD_LIMIT = 8


def pattern_element(M: TaggedSubgroup, pattern: Sequence[str], seed: int = 0,
                    method: str = "auto") -> tuple[Permutation, StraightLineProgram]:
    """An element of ``M`` that is nontrivial exactly where ``pattern`` demands.

    Coordinates where ``M`` projects trivially are set aside (they can only
    be trivial).  With ``method="blocks"`` the rest must be nonabelian simple
    and one nontrivial element is taken from each block subgroup with a
    nontrivial demand.  With ``method="sample"`` uniform elements of the
    kernel of the trivial-demand coordinates are drawn from a seeded
    generator until the pattern holds.  ``"auto"`` uses blocks for at most
    ``BLOCK_METHOD_LIMIT`` live coordinates, since every block costs a chain.
    """
    if method not in ("auto", "blocks", "sample"):
        raise ValueError(f"unknown method {method!r}")
    amb = M.ambient
    if len(pattern) != len(amb):
        raise ValueError("pattern length must equal the number of coordinates")
    live = [i for i in range(len(amb)) if projection(M, [i]).order() > 1]
    for i in range(len(amb)):
        if i not in live and pattern[i] == NONTRIVIAL:
            raise PreconditionError(f"infeasible pattern: M is trivial on coordinate {i}")
    want = [i for i in live if pattern[i] == NONTRIVIAL]
    if not want:
        return Permutation.identity(amb.degree), StraightLineProgram(M.arity, (), None)
    forced_trivial = [i for i in range(len(amb)) if pattern[i] == TRIVIAL]
    if method == "auto":
        method = "blocks" if len(live) <= BLOCK_METHOD_LIMIT else "sample"
    if method == "blocks":
        if not all(is_simple(projection(M, [i])) for i in live):
            raise PreconditionError("block construction needs simple coordinate projections")
        blocks = diagonal_blocks(M, live, verify=False)
        g = amb.element([G.identity() for G in amb.coordinates]).images
        for blk in blocks:
            demands = {pattern[i] for i in blk}
            if NONTRIVIAL not in demands:
                continue
            if TRIVIAL in demands:
                raise PreconditionError(f"infeasible pattern on diagonal block {blk}: "
                                        "coordinates in one block are trivial together")
            others = [c for c in range(len(amb)) if c not in blk]
            x = _nontrivial_generator(coordinate_kernel(M, others))
            if x is None:
                raise InvariantViolation(f"block subgroup of {blk} is trivial")
            g = _mul(g, x[0])
        g = Permutation._raw(g)
    else:
        K = coordinate_kernel(M, forced_trivial)
        for i in want:
            if projection(K, [i]).order() == 1:
                raise PreconditionError(f"infeasible pattern: coordinate {i} is trivial "
                                        "whenever the trivial-demand coordinates are")
        rng = np.random.default_rng(seed)
        chain = K.chain
        for _ in range(10_000):
            x = chain.identity
            for lv in chain.levels:
                b = lv.order[int(rng.integers(len(lv.order)))]
                x = _mul(lv.orbit[b], x)
            cand = Permutation._raw(x)
            if all(not amb.project(i, cand).is_identity() for i in want):
                g = cand
                break
        else:
            raise InvariantViolation("no pattern element found in 10000 uniform draws")
    return g, constructive_membership(M, g)


def constructive_membership(H: TaggedSubgroup, g: Permutation) -> StraightLineProgram:
    """SLP over ``x1..xn`` evaluating to ``g`` at ``H``'s defining generators.

    Raises :class:`NotInGroup` carrying the sift residue for non-members.
    """
    tag = H.chain.sift_tag(g.images)
    return H.builder.extract(tag)
