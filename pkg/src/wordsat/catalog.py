"""Small named permutation groups used by the CLI examples and the tests."""

from __future__ import annotations

from typing import Sequence

from .perm import Permutation, PermutationGroup

__all__ = [
    "cyclic",
    "dihedral",
    "symmetric",
    "alternating",
    "gl32",
    "direct_product",
    "by_name",
]


def cyclic(n: int) -> PermutationGroup:
    return PermutationGroup([Permutation(tuple(range(1, n)) + (0,))], n, name=f"C{n}")


def dihedral(n: int) -> PermutationGroup:
    """Symmetries of the ``n``-gon, order ``2n``."""
    rot = Permutation(tuple((i + 1) % n for i in range(n)))
    ref = Permutation(tuple((-i) % n for i in range(n)))
    return PermutationGroup([rot, ref], n, name=f"D{2 * n}")


def symmetric(n: int) -> PermutationGroup:
    if n < 2:
        return PermutationGroup([], max(n, 1), name=f"S{n}")
    gens = [Permutation((1, 0) + tuple(range(2, n)))]
    if n > 2:
        gens.append(Permutation(tuple(range(1, n)) + (0,)))
    return PermutationGroup(gens, n, name=f"S{n}")


def alternating(n: int) -> PermutationGroup:
    if n < 3:
        return PermutationGroup([], max(n, 1), name=f"A{n}")
    gens = [Permutation((1, 2, 0) + tuple(range(3, n)))]
    if n > 3:
        # (0 1 .. n-1) if n odd, else (1 .. n-1)
        if n % 2:
            gens.append(Permutation(tuple(range(1, n)) + (0,)))
        else:
            gens.append(Permutation((0,) + tuple(range(2, n)) + (1,)))
    return PermutationGroup(gens, n, name=f"A{n}")


def _matrix_perm(rows: Sequence[int]) -> Permutation:
    # nonzero vectors of F_2^3 encoded as 1..7, point v-1; rows are bitmasks
    def apply(v: int) -> int:
        out = 0
        for i, r in enumerate(rows):
            if bin(r & v).count("1") % 2:
                out |= 1 << i
        return out
    return Permutation(tuple(apply(v) - 1 for v in range(1, 8)))


def gl32() -> PermutationGroup:
    """``GL(3, 2) = PSL(2, 7)`` on the seven points of the Fano plane, order 168."""
    cycle = _matrix_perm([0b010, 0b100, 0b011])  # companion of x^3 + x + 1
    trans = _matrix_perm([0b011, 0b010, 0b100])  # elementary transvection
    return PermutationGroup([cycle, trans], 7, name="GL(3,2)")


def direct_product(*groups: PermutationGroup) -> PermutationGroup:
    """External direct product acting on the disjoint union of the domains."""
    degree = sum(G.degree for G in groups)
    gens = []
    off = 0
    for G in groups:
        for g in G.generators:
            images = list(range(degree))
            for x in range(G.degree):
                images[off + x] = off + g.images[x]
            gens.append(Permutation(tuple(images)))
        off += G.degree
    name = "x".join(G.name or "G" for G in groups)
    return PermutationGroup(gens, degree, name=name)


def by_name(name: str) -> PermutationGroup:
    """``A5``, ``S4``, ``C6``, ``D10``, ``GL32`` and products such as ``A5xC2``."""
    parts = name.split("x")
    if len(parts) > 1:
        return direct_product(*(by_name(p) for p in parts))
    kind, num = name[0].upper(), name[1:]
    if name.upper() in ("GL32", "PSL27", "GL(3,2)"):
        return gl32()
    if not num.isdigit():
        raise ValueError(f"unknown group name {name!r}")
    n = int(num)
    if kind == "A":
        return alternating(n)
    if kind == "S":
        return symmetric(n)
    if kind == "C":
        return cyclic(n)
    if kind == "D":
        if n % 2:
            raise ValueError("dihedral groups are named by their order D2n")
        return dihedral(n // 2)
    raise ValueError(f"unknown group name {name!r}")
