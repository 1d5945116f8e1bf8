"""Permutations, permutation groups and stabilizer chains.

Composition convention: ``a * b`` applies ``a`` first, then ``b``, so
``(a * b)(i) == b(a(i))``.  Points are ``0 .. degree-1``.

Stabilizer chains are built with the deterministic Schreier-Sims algorithm.
Each strong generator and transversal element carries a tag in an
:class:`~wordsat.slp.SLPBuilder`, so sifting yields a straight-line program
over the group's original generators (constructive membership).
"""

from __future__ import annotations

import json
import math
import re
from collections import deque
from operator import itemgetter
from typing import Iterable, Sequence

import numpy as np

from .errors import DegreeMismatch, NotInGroup, OracleTooLarge
from .slp import SLPBuilder, StraightLineProgram

__all__ = [
    "Permutation",
    "PermutationGroup",
    "StabilizerChain",
    "multiply",
    "inverse",
    "build_chain",
    "order",
    "contains",
    "sift",
    "normal_closure",
    "derived_subgroup",
    "derived_series",
    "is_solvable",
    "random_element",
    "naive_enumerate",
    "pointwise_stabilizer",
    "DEFAULT_ORACLE_CAP",
]

DEFAULT_ORACLE_CAP = 10**5


# -- raw tuple arithmetic -------------------------------------------------------

def _mul(a: tuple, b: tuple) -> tuple:
    if len(a) == 1:
        return a
    return itemgetter(*a)(b)


def _inv(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def _ident(n: int) -> tuple:
    return tuple(range(n))


def _first_moved(a: tuple) -> int | None:
    for i, x in enumerate(a):
        if i != x:
            return i
    return None


def _is_ident(a: tuple) -> bool:
    return all(i == x for i, x in enumerate(a))


_CYCLE = re.compile(r"\(([^()]*)\)")


class Permutation:
    """A bijection of ``{0, ..., degree-1}`` stored as its image tuple."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        images = tuple(int(x) for x in images)
        if not images:
            raise ValueError("degree must be positive")
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        self.images = images
        self._hash = None

    @classmethod
    def _raw(cls, images: tuple) -> "Permutation":
        p = object.__new__(cls)
        p.images = images
        p._hash = None
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._raw(_ident(degree))

    @classmethod
    def from_cycles(cls, text: str, degree: int) -> "Permutation":
        """Parse disjoint-cycle notation such as ``"(0 1 2)(3 4)"``; ``"()"`` is the identity."""
        images = list(range(degree))
        stripped = re.sub(r"\s+", "", text.replace(",", " ").strip())
        if _CYCLE.sub("", text).strip():
            raise ValueError(f"bad cycle notation: {text!r}")
        if not stripped:
            raise ValueError("empty cycle notation; use '()' for the identity")
        seen: set[int] = set()
        for body in _CYCLE.findall(text):
            pts = [int(x) for x in body.replace(",", " ").split()]
            for x in pts:
                if not 0 <= x < degree:
                    raise ValueError(f"point {x} outside degree {degree}")
                if x in seen:
                    raise ValueError(f"point {x} repeated in {text!r}")
                seen.add(x)
            for i, x in enumerate(pts):
                images[x] = pts[(i + 1) % len(pts)]
        return cls._raw(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __getitem__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if not isinstance(other, Permutation):
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeMismatch(f"degrees {self.degree} and {other.degree} differ")
        return Permutation._raw(_mul(self.images, other.images))

    def inverse(self) -> "Permutation":
        return Permutation._raw(_inv(self.images))

    def __invert__(self) -> "Permutation":
        return self.inverse()

    def __pow__(self, k: int) -> "Permutation":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = _ident(self.degree)
        b = base.images
        while k:
            if k & 1:
                result = _mul(result, b)
            k >>= 1
            if k:
                b = _mul(b, b)
        return Permutation._raw(result)

    def conjugate(self, by: "Permutation") -> "Permutation":
        """``by^-1 * self * by``."""
        return by.inverse() * self * by

    def commutator(self, other: "Permutation") -> "Permutation":
        """``[self, other] = self^-1 other^-1 self other``."""
        return self.inverse() * other.inverse() * self * other

    def is_identity(self) -> bool:
        return _is_ident(self.images)

    def support(self) -> list[int]:
        return [i for i, x in enumerate(self.images) if i != x]

    def cycle_list(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for i in range(self.degree):
            if i in seen or self.images[i] == i:
                continue
            cyc = [i]
            seen.add(i)
            j = self.images[i]
            while j != i:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycle_list())) if self.cycle_list() else 1

    def is_even(self) -> bool:
        return sum(len(c) - 1 for c in self.cycle_list()) % 2 == 0

    def cycles(self) -> str:
        cl = self.cycle_list()
        if not cl:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cl)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __lt__(self, other: "Permutation") -> bool:
        return self.images < other.images

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.images)
        return self._hash

    def __repr__(self) -> str:
        return f"Permutation({self.cycles()!r}, degree={self.degree})"

    def __str__(self) -> str:
        return self.cycles()


def multiply(a: Permutation, b: Permutation) -> Permutation:
    """``a`` then ``b``."""
    return a * b


def inverse(a: Permutation) -> Permutation:
    return a.inverse()


# -- stabilizer chains ----------------------------------------------------------

class _Level:
    __slots__ = ("point", "gens", "orbit", "order", "inv", "tags", "itags", "checked")

    def __init__(self, point: int, degree: int):
        self.point = point
        self.gens: list[int] = []
        ident = _ident(degree)
        self.orbit: dict[int, tuple] = {point: ident}
        self.order: list[int] = [point]
        self.inv: dict[int, tuple] = {point: ident}
        self.tags: dict[int, int | None] = {point: None}
        self.itags: dict[int, int | None] = {point: None}
        self.checked: set[tuple[int, int]] = set()


class StabilizerChain:
    """Base and strong generating set with SLP-tagged transversals.

    ``builder`` is an optional shared :class:`SLPBuilder`; when given, every
    strong generator and transversal element records a ref into it that
    evaluates (at the builder's inputs) to that element.
    """

    def __init__(self, degree: int, generators: Sequence[tuple] = (),
                 tags: Sequence[int | None] | None = None,
                 builder: SLPBuilder | None = None,
                 base_prefix: Sequence[int] = ()):
        self.degree = degree
        self.builder = builder
        self.identity = _ident(degree)
        self.strong: list[tuple] = []
        self.strong_tags: list[int | None] = []
        self.levels: list[_Level] = []
        for pt in base_prefix:
            if any(lv.point == pt for lv in self.levels):
                continue
            self.levels.append(_Level(pt, degree))
        if tags is None:
            tags = [None] * len(generators)
        gens = [(tuple(g), t) for g, t in zip(generators, tags) if not _is_ident(tuple(g))]
        for g, _ in gens:
            if all(g[lv.point] == lv.point for lv in self.levels):
                self.levels.append(_Level(_first_moved(g), degree))
        for g, t in gens:
            idx = self._new_strong(g, t)
            for lv in self.levels:
                lv.gens.append(idx)
                if g[lv.point] != lv.point:
                    break
        for i in range(len(self.levels)):
            self._rebuild_orbit(i)
        self._schreier_sims(len(self.levels) - 1)

    # tag helpers -------------------------------------------------------------
    def _tmul(self, a, b):
        return None if self.builder is None else self.builder.mul(a, b)

    def _tinv(self, a):
        return None if self.builder is None else self.builder.inv(a)

    def _new_strong(self, g: tuple, tag) -> int:
        self.strong.append(g)
        self.strong_tags.append(tag)
        return len(self.strong) - 1

    def _itag(self, lv: _Level, pt: int):
        if pt not in lv.itags:
            lv.itags[pt] = self._tinv(lv.tags[pt])
        return lv.itags[pt]

    # orbit maintenance -------------------------------------------------------
    def _rebuild_orbit(self, i: int) -> None:
        lv = self.levels[i]
        k = 0
        while k < len(lv.order):
            beta = lv.order[k]
            u = lv.orbit[beta]
            for s_idx in lv.gens:
                s = self.strong[s_idx]
                gamma = s[beta]
                if gamma not in lv.orbit:
                    v = _mul(u, s)
                    lv.orbit[gamma] = v
                    lv.inv[gamma] = _inv(v)
                    lv.tags[gamma] = self._tmul(lv.tags[beta], self.strong_tags[s_idx])
                    lv.order.append(gamma)
            k += 1

    def _add_to_levels(self, idx: int, upto: int) -> None:
        for i in range(upto + 1):
            lv = self.levels[i]
            lv.gens.append(idx)
            self._rebuild_orbit(i)

    # sifting -----------------------------------------------------------------
    def strip(self, g: tuple, start: int = 0) -> tuple[tuple, int, list[int]]:
        """Sift ``g`` from level ``start``; return residue, stop level and orbit path."""
        h = g
        path = []
        for i in range(start, len(self.levels)):
            lv = self.levels[i]
            b = h[lv.point]
            if b not in lv.orbit:
                return h, i, path
            if b != lv.point:
                h = _mul(h, lv.inv[b])
            path.append(b)
        return h, len(self.levels), path

    def _residue_tag(self, tag, start: int, path: list[int]):
        if self.builder is None:
            return None
        for off, b in enumerate(path):
            tag = self._tmul(tag, self._itag(self.levels[start + off], b))
        return tag

    def _schreier_sims(self, start: int) -> None:
        i = start
        while i >= 0:
            j = self._check_level(i)
            i = i - 1 if j is None else j

    def _check_level(self, i: int) -> int | None:
        lv = self.levels[i]
        k = 0
        while k < len(lv.order):
            beta = lv.order[k]
            u = lv.orbit[beta]
            for s_idx in lv.gens:
                key = (beta, s_idx)
                if key in lv.checked:
                    continue
                lv.checked.add(key)
                s = self.strong[s_idx]
                gamma = s[beta]
                sg = _mul(_mul(u, s), lv.inv[gamma])
                if sg == self.identity:
                    continue
                h, j, path = self.strip(sg, i + 1)
                if j == len(self.levels) and h == self.identity:
                    continue
                tag = None
                if self.builder is not None:
                    tag = self._tmul(self._tmul(lv.tags[beta], self.strong_tags[s_idx]),
                                     self._itag(lv, gamma))
                    tag = self._residue_tag(tag, i + 1, path)
                if j == len(self.levels):
                    self.levels.append(_Level(_first_moved(h), self.degree))
                idx = self._new_strong(h, tag)
                for lvl in range(i + 1, j + 1):
                    self.levels[lvl].gens.append(idx)
                    self._rebuild_orbit(lvl)
                return j
            k += 1
        return None

    def add_generator(self, g: tuple, tag=None) -> bool:
        """Enlarge the group by ``g``; returns ``False`` if ``g`` was already a member."""
        g = tuple(g)
        h, j, path = self.strip(g, 0)
        if j == len(self.levels) and h == self.identity:
            return False
        rtag = self._residue_tag(tag, 0, path)
        if j == len(self.levels):
            self.levels.append(_Level(_first_moved(h), self.degree))
        idx = self._new_strong(h, rtag)
        self._add_to_levels(idx, j)
        self._schreier_sims(j)
        return True

    # queries -----------------------------------------------------------------
    @property
    def base(self) -> list[int]:
        return [lv.point for lv in self.levels]

    def order(self) -> int:
        return math.prod(len(lv.orbit) for lv in self.levels)

    def contains(self, g: tuple) -> bool:
        h, j, _ = self.strip(tuple(g))
        return j == len(self.levels) and h == self.identity

    def sift_tag(self, g: tuple):
        """Builder ref evaluating to ``g``; raises :class:`NotInGroup` otherwise."""
        h, j, path = self.strip(tuple(g))
        if j < len(self.levels) or h != self.identity:
            raise NotInGroup(f"element is not in the group (sift stopped at level {j})",
                             residue=Permutation._raw(h), level=j)
        tag = None
        for off in range(len(path) - 1, -1, -1):
            tag = self._tmul(tag, self.levels[off].tags[path[off]])
        return tag

    def level_generators(self, i: int) -> list[int]:
        """Indices of strong generators generating the stabilizer of ``base[:i]``."""
        if i >= len(self.levels):
            return []
        return list(self.levels[i].gens)

    def transversal(self, i: int) -> list[tuple]:
        lv = self.levels[i]
        return [lv.orbit[b] for b in lv.order]

    def check(self) -> None:
        """Assert the structural invariants (used by tests)."""
        for i, lv in enumerate(self.levels):
            for s_idx in lv.gens:
                s = self.strong[s_idx]
                for prev in self.levels[:i]:
                    assert s[prev.point] == prev.point
            for b, u in lv.orbit.items():
                assert u[lv.point] == b


def _chain_for(gens: Sequence[Permutation], degree: int, track: bool = True,
               base_prefix: Sequence[int] = ()) -> StabilizerChain:
    builder = SLPBuilder(max(1, len(gens))) if track else None
    tags = [builder.input(i + 1) for i in range(len(gens))] if track else None
    return StabilizerChain(degree, [g.images for g in gens], tags, builder, base_prefix)


class PermutationGroup:
    """A group given by generating permutations of a common degree."""

    def __init__(self, generators: Sequence[Permutation], degree: int | None = None,
                 name: str | None = None):
        gens = list(generators)
        if degree is None:
            if not gens:
                raise ValueError("need a degree or at least one generator")
            degree = gens[0].degree
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatch(f"generator of degree {g.degree} in group of degree {degree}")
        if not gens:
            gens = [Permutation.identity(degree)]
        self.degree = degree
        self.generators: tuple[Permutation, ...] = tuple(gens)
        self.name = name
        self._chain: StabilizerChain | None = None

    @classmethod
    def from_cycles(cls, cycles: Sequence[str], degree: int, name: str | None = None):
        return cls([Permutation.from_cycles(c, degree) for c in cycles], degree, name)

    @classmethod
    def _with_chain(cls, gens, degree, chain, name=None) -> "PermutationGroup":
        G = cls(gens, degree, name)
        G._chain = chain
        return G

    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            self._chain = _chain_for(self.generators, self.degree)
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def __len__(self) -> int:
        return self.order()

    def is_trivial(self) -> bool:
        return all(g.is_identity() for g in self.generators)

    def identity(self) -> Permutation:
        return Permutation.identity(self.degree)

    def _check_degree(self, p: Permutation) -> None:
        if p.degree != self.degree:
            raise DegreeMismatch(f"permutation of degree {p.degree} vs group degree {self.degree}")

    def contains(self, p: Permutation) -> bool:
        self._check_degree(p)
        return self.chain.contains(p.images)

    __contains__ = contains

    def sift(self, p: Permutation) -> StraightLineProgram:
        """SLP over ``x1..xk`` (the generators) evaluating to ``p``."""
        self._check_degree(p)
        chain = self.chain
        tag = chain.sift_tag(p.images)
        return chain.builder.extract(tag, len(self.generators))

    def random_element(self, rng: np.random.Generator) -> Permutation:
        return random_element(self, rng)

    def elements(self, cap: int = DEFAULT_ORACLE_CAP) -> set[Permutation]:
        return naive_enumerate(self, cap)

    def is_subgroup_of(self, other: "PermutationGroup") -> bool:
        return all(other.contains(g) for g in self.generators)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PermutationGroup) or other.degree != self.degree:
            return False
        return self.order() == other.order() and self.is_subgroup_of(other)

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        label = self.name or "PermutationGroup"
        gens = ", ".join(g.cycles() for g in self.generators)
        return f"<{label} degree={self.degree} gens=[{gens}]>"

    # JSON group format
    def to_json(self) -> dict:
        return {"name": self.name or "", "degree": self.degree,
                "generators": [g.cycles() for g in self.generators]}

    @classmethod
    def from_json(cls, data: dict) -> "PermutationGroup":
        degree = int(data["degree"])
        gens = [Permutation.from_cycles(c, degree) for c in data["generators"]]
        return cls(gens, degree, data.get("name") or None)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "PermutationGroup":
        return cls.from_json(json.loads(text))


# -- module-level operations ----------------------------------------------------

def build_chain(G: PermutationGroup, seed: int = 0, *, base_prefix: Sequence[int] = ()) -> StabilizerChain:
    """A tagged chain for ``G``, optionally with a prescribed base prefix.

    Schreier-Sims here is deterministic, so ``seed`` only exists for
    interface stability and does not change the result.
    """
    if not base_prefix:
        return G.chain
    return _chain_for(G.generators, G.degree, base_prefix=base_prefix)


def order(G: PermutationGroup) -> int:
    return G.order()


def contains(G: PermutationGroup, p: Permutation) -> bool:
    return G.contains(p)


def sift(G: PermutationGroup, p: Permutation) -> StraightLineProgram:
    return G.sift(p)


def _closure_chain(degree: int, conjugators: Sequence[tuple[tuple, object]],
                   seeds: Iterable[tuple[tuple, object]],
                   builder: SLPBuilder | None = None) -> tuple[StabilizerChain, list[tuple[tuple, object]]]:
    """Chain of the normal closure of ``seeds`` under conjugation by ``conjugators``.

    Items are ``(images, tag)`` pairs.  Returns the chain and the generators
    actually added.
    """
    chain = StabilizerChain(degree, builder=builder)
    queue: deque = deque((s, t, None) for s, t in seeds)
    added: list[tuple[tuple, object]] = []
    while queue:
        x, t, by = queue.popleft()
        if by is not None:
            g, gt = by
            x = _mul(_mul(_inv(g), x), g)
            t = builder.conj(t, gt) if builder is not None else None
        if _is_ident(x) or chain.contains(x):
            continue
        chain.add_generator(x, t)
        added.append((x, t))
        for c in conjugators:
            queue.append((x, t, c))
    return chain, added


def normal_closure(G: PermutationGroup, elts: Sequence[Permutation]) -> PermutationGroup:
    """Smallest normal subgroup of ``G`` containing ``elts``."""
    for e in elts:
        if not G.contains(e):
            raise NotInGroup(f"{e.cycles()} is not an element of the group")
    chain, added = _closure_chain(G.degree, [(g.images, None) for g in G.generators],
                                  [(e.images, None) for e in elts])
    gens = [Permutation._raw(x) for x, _ in added]
    return PermutationGroup(gens, G.degree)


def derived_subgroup(G: PermutationGroup) -> PermutationGroup:
    gens = [g.images for g in G.generators]
    comms = [(_mul(_mul(_inv(a), _inv(b)), _mul(a, b)), None)
             for i, a in enumerate(gens) for b in gens[i + 1:]]
    chain, added = _closure_chain(G.degree, [(g, None) for g in gens], comms)
    return PermutationGroup([Permutation._raw(x) for x, _ in added], G.degree)


def derived_series(G: PermutationGroup) -> list[PermutationGroup]:
    """``[G, G', G'', ...]`` ending at the first term equal to its derived subgroup."""
    series = [G]
    while True:
        D = derived_subgroup(series[-1])
        if D.order() == series[-1].order():
            return series
        series.append(D)


def is_solvable(G: PermutationGroup) -> bool:
    return derived_series(G)[-1].order() == 1


def random_element(G: PermutationGroup, rng: np.random.Generator) -> Permutation:
    """Exactly uniform: one random transversal element per chain level."""
    chain = G.chain
    g = chain.identity
    for lv in chain.levels:
        b = lv.order[int(rng.integers(len(lv.order)))]
        g = _mul(lv.orbit[b], g)
    return Permutation._raw(g)


def naive_enumerate(G: PermutationGroup, cap: int = DEFAULT_ORACLE_CAP) -> set[Permutation]:
    """All elements by breadth-first closure; an independent oracle for the chain."""
    ident = _ident(G.degree)
    gens = [g.images for g in G.generators if not g.is_identity()]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _mul(x, g)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        raise OracleTooLarge(f"oracle too large: more than {cap} elements")
                    nxt.append(y)
        frontier = nxt
    return {Permutation._raw(x) for x in seen}


def pointwise_stabilizer(G: PermutationGroup, points: Iterable[int]) -> PermutationGroup:
    """Subgroup of ``G`` fixing every listed point, read off a chain based at ``points``."""
    pts = sorted(set(points))
    if not pts:
        return G
    chain = build_chain(G, base_prefix=pts)
    gens = [Permutation._raw(chain.strong[i]) for i in chain.level_generators(len(pts))]
    return PermutationGroup(gens, G.degree)
