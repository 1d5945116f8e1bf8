"""Word synthesis pipelines and their verification.

``synth_solvable_word`` builds ``w`` in ``F_n`` with ``w(t) = 1`` exactly when
``<t>`` is solvable.  ``synth_probability_word`` builds words for a just
non-solvable group that vanish on a prescribed number of automorphism
orbits of generating tuples.  Both return a :class:`SynthesisReport` whose
verification was computed by exhaustive evaluation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError
from .perm import Permutation, PermutationGroup, is_solvable
from .probability import (
    DEFAULT_EXACT_CAP,
    as_slp,
    element_array,
    tuple_values,
    _is_identity_rows,
)
from .product import (
    NONTRIVIAL,
    TRIVIAL,
    ProductGroup,
    assemble,
    constructive_membership,
    pattern_element,
    perfect_core,
    projection,
    verify_lemma_trukk,
)
from .slp import (
    DEFAULT_WORD_CAP,
    LetterSet,
    Overflow,
    StraightLineProgram,
    Word,
    evaluate_slp,
    expand,
)
from .structure import (
    DEFAULT_TUPLE_CAP,
    GroupAutomorphism,
    QuotientMap,
    TupleClass,
    aut_orbits_on_tuples,
    automorphism_group,
    classify_tuples,
    closure,
    generating_tuples,
    is_just_nonsolvable,
    just_nonsolvable_quotient,
    maximal_subgroup_count,
    minimal_normal_subgroups,
    simple_factor_decomposition,
    sorted_elements,
)

__all__ = [
    "SynthesisReport",
    "VerificationReport",
    "TupleClass",
    "synth_solvable_word",
    "verify_solvable_word",
    "synth_probability_word",
    "quotient_obstruction_check",
    "solvable_flags",
    "used_letters",
]

log = logging.getLogger(__name__)


def _frac_json(x: Fraction | None):
    return None if x is None else {"num": str(x.numerator), "den": str(x.denominator)}


@dataclass
class VerificationReport:
    passed: bool
    checked: int
    satisfied: int
    solvable: int
    counterexamples: list[tuple[str, ...]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "satisfied": self.satisfied,
                "solvable": self.solvable, "counterexamples": [list(c) for c in self.counterexamples]}


@dataclass
class SynthesisReport:
    """Certificate bundle for a synthesized word."""

    kind: str
    group: str
    arity: int
    word: StraightLineProgram
    word_flat: Word | None
    classes: list[dict]
    verification: dict
    exact: Fraction | None
    count: tuple[int, int] | None
    bounds: dict[str, Fraction | None]
    letters_used: LetterSet
    letters_certified: frozenset[int]
    verified: bool
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    target: Permutation | None = None
    tuple_elements: list[Permutation] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "group": self.group,
            "n_or_d": self.arity,
            "word_slp": self.word.to_json(),
            "word_slp_size": len(self.word),
            "classes": self.classes,
            "verification": self.verification,
            "verified": self.verified,
            "letters_used": sorted(self.letters_used),
            "letters_upper_bound_only": self.letters_used.upper_bound_only,
            "letters_certified": sorted(self.letters_certified),
            "notes": self.notes,
            "extra": self.extra,
        }
        if self.word_flat is not None:
            out["word_flat"] = str(self.word_flat)
            out["word_flat_length"] = len(self.word_flat)
        if self.count is not None:
            out["exact_probability"] = {"num": str(self.count[0]), "den": str(self.count[1]),
                                        "reduced": f"{self.exact.numerator}/{self.exact.denominator}"}
        out["bounds"] = {"lower": _frac_json(self.bounds.get("lower")),
                         "upper": _frac_json(self.bounds.get("upper"))}
        return out


# -- helpers -------------------------------------------------------------------------

def solvable_flags(G: PermutationGroup, n: int, cap: int = DEFAULT_TUPLE_CAP) -> np.ndarray:
    """For every ``n``-tuple (lexicographic order), whether it generates a solvable subgroup.

    Computed from the element set of each generated subgroup, independently
    of the marked-isomorphism classification.
    """
    import itertools
    size = G.order()
    if size ** n > cap:
        from .errors import CapExceeded
        raise CapExceeded(f"|G|^n = {size ** n} exceeds the enumeration cap {cap}")
    elements = sorted_elements(G)
    cache: dict[frozenset, bool] = {}
    out = np.zeros(size ** n, dtype=bool)
    for pos, t in enumerate(itertools.product(elements, repeat=n)):
        sub = frozenset(closure([x.images for x in t], G.degree))
        flag = cache.get(sub)
        if flag is None:
            flag = cache[sub] = is_solvable(PermutationGroup(list(t), G.degree))
        out[pos] = flag
    return out


def used_letters(values: np.ndarray, size: int, n: int) -> frozenset[int]:
    """Letters on which the word map really depends, read off a full value table.

    Letter ``j`` counts when some tuple's value changes after replacing its
    ``j``-th entry by the identity (element 0 in sorted order).
    """
    deg = values.shape[1]
    grid = values.reshape((size,) * n + (deg,))
    out = set()
    for j in range(n):
        base = np.take(grid, [0], axis=j)
        if (grid != base).any():
            out.add(j + 1)
    return frozenset(out)


def _fmt(t: Sequence[Permutation]) -> tuple[str, ...]:
    return tuple(x.cycles() for x in t)


def _letters(word: StraightLineProgram, flat) -> LetterSet:
    if isinstance(flat, Overflow):
        return LetterSet(word.input_letters(), upper_bound_only=True)
    return LetterSet(flat.letters())


def _identity_quotient(H: PermutationGroup) -> QuotientMap:
    return QuotientMap(H, PermutationGroup([], H.degree), H, list(H.generators), regular=False)


# -- solvability word --------------------------------------------------------------------

def verify_solvable_word(G: PermutationGroup, n: int, w: Word | StraightLineProgram,
                         cap: int = DEFAULT_TUPLE_CAP, max_counterexamples: int = 5,
                         flags: np.ndarray | None = None,
                         values: np.ndarray | None = None) -> VerificationReport:
    """Check ``w(t) = 1 <=> <t> solvable`` on every ``t`` in ``G^n``."""
    slp = as_slp(w)
    if slp.arity > n:
        raise ValueError(f"word uses {slp.arity} letters but n = {n}")
    slp = slp.with_arity(n)
    if values is None:
        values = tuple_values(G, slp, n, cap)
    sat = _is_identity_rows(values)
    if flags is None:
        flags = solvable_flags(G, n, cap)
    bad = np.nonzero(sat != flags)[0]
    elements = sorted_elements(G)
    size = len(elements)
    cex = []
    for pos in bad[:max_counterexamples]:
        digits = [(int(pos) // size ** (n - 1 - j)) % size for j in range(n)]
        cex.append(_fmt([elements[d] for d in digits]))
    return VerificationReport(len(bad) == 0, len(sat), int(sat.sum()), int(flags.sum()), cex)


def synth_solvable_word(G: PermutationGroup, n: int, cap: int = DEFAULT_TUPLE_CAP,
                        word_cap: int = DEFAULT_WORD_CAP) -> SynthesisReport:
    """A word in ``F_n`` vanishing on ``t`` exactly when ``<t>`` is solvable.

    Tuples are grouped into marked-isomorphism classes; class ``i`` becomes
    coordinate ``i`` of a product, mapped through the identity (solvable
    subgroup) or onto a just non-solvable quotient.  The word is the
    constructive-membership program of an element of the perfect core of
    ``L = <p_1 .. p_n>`` that is nontrivial exactly on the non-solvable
    coordinates.
    """
    name = G.name or "G"
    notes: list[str] = []
    size = G.order()
    if is_solvable(G):
        notes.append("group is solvable: every tuple generates a solvable subgroup, so the empty word works")
        word = StraightLineProgram(n, (), None)
        ver = verify_solvable_word(G, n, word, cap)
        return SynthesisReport("solvable", name, n, word, Word.identity(n), [], ver.to_json(),
                               Fraction(1), (size ** n, size ** n), {}, LetterSet(), frozenset(),
                               ver.passed, notes)

    classes = classify_tuples(G, n, cap)
    log.info("%d marked-isomorphism classes of %d-tuples", len(classes), n)
    kernel_cache: dict[frozenset, PermutationGroup] = {}
    for c in classes:
        H = c.subgroup
        if c.solvable:
            c.quotient = _identity_quotient(H)
            continue
        key = frozenset(closure([x.images for x in c.representative], G.degree))
        if key not in kernel_cache:
            kernel_cache[key] = just_nonsolvable_quotient(H).kernel
        K = kernel_cache[key]
        if K.order() == 1:
            c.quotient = _identity_quotient(H)
        else:
            from .structure import quotient
            c.quotient = quotient(H, K)

    coords = [c.quotient.image for c in classes]
    ambient = ProductGroup(coords)
    columns = [[c.quotient(c.representative[j]) for c in classes] for j in range(n)]
    L = assemble(ambient, columns, check=False)
    M, r = perfect_core(L)
    log.info("L has order %d; perfect core after %d steps has order %d", L.order(), r, M.order())

    # pi_i(M) must be the minimal normal subgroup N_i (trivial on solvable classes)
    pattern = []
    mnn_cache: dict[int, int] = {}
    for i, c in enumerate(classes):
        proj = projection(M, [i]).order()
        if c.solvable:
            if proj != 1:
                raise InvariantViolation(f"class {i}: perfect core is nontrivial on a solvable coordinate")
            pattern.append(TRIVIAL)
            continue
        img = coords[i]
        key = id(kernel_cache.get(frozenset(closure([x.images for x in c.representative], G.degree))))
        if key not in mnn_cache:
            mins = minimal_normal_subgroups(img)
            if len(mins) != 1:
                raise InvariantViolation(f"class {i}: quotient is not just non-solvable")
            mnn_cache[key] = mins[0].order()
        if proj != mnn_cache[key]:
            raise InvariantViolation(f"class {i}: projection of the perfect core is not N_i")
        pattern.append(NONTRIVIAL)

    g, _ = pattern_element(M, pattern)
    word = constructive_membership(L, g)
    if evaluate_slp(word, L.generators) != g:
        raise InvariantViolation("synthesized program does not evaluate to the pattern element")

    values = tuple_values(G, word, n, cap)
    flags = solvable_flags(G, n, cap)
    ver = verify_solvable_word(G, n, word, cap, flags=flags, values=values)
    sat = int(_is_identity_rows(values).sum())
    flat = expand(word, word_cap)
    if isinstance(flat, Overflow):
        notes.append(f"flat word longer than {word_cap} letters; only the SLP is emitted")
    report_classes = [{
        "representative": list(_fmt(c.representative)),
        "members": c.members,
        "generated_subgroup_order": c.generated_subgroup_order,
        "solvable": c.solvable,
        "kernel_order": c.quotient.kernel.order(),
        "image_order": c.quotient.image.order(),
        "image_degree": c.quotient.image.degree,
    } for c in classes]
    if sum(c.members for c in classes) != size ** n:
        raise InvariantViolation("class sizes do not cover G^n")
    return SynthesisReport(
        "solvable", name, n, word, None if isinstance(flat, Overflow) else flat,
        report_classes, ver.to_json(), Fraction(sat, size ** n), (sat, size ** n), {},
        _letters(word, flat), used_letters(values, size, n), ver.passed, notes,
        {"L_order": str(L.order()), "M_order": str(M.order()), "derived_steps": r,
         "product_degree": ambient.degree, "coordinates": len(classes)},
        target=g, tuple_elements=list(L.generators))


# -- probability pipeline -----------------------------------------------------------------

def _least_nontrivial_in_first_factor(G: PermutationGroup) -> tuple[PermutationGroup, Permutation]:
    N = minimal_normal_subgroups(G)
    if len(N) != 1:
        raise PreconditionError("group has more than one minimal normal subgroup")
    S1 = simple_factor_decomposition(N[0])[0]
    g = next(x for x in sorted_elements(S1) if not x.is_identity())
    return N[0], g


def synth_probability_word(G: PermutationGroup, d: int, k: int, s: int | None = None,
                           cap: int = DEFAULT_TUPLE_CAP,
                           auts: Sequence[GroupAutomorphism] | None = None,
                           exact_cap: int = DEFAULT_EXACT_CAP,
                           word_cap: int = DEFAULT_WORD_CAP) -> SynthesisReport:
    """A word in ``F_d`` vanishing on exactly ``k`` of ``s`` selected Aut-orbits of generating tuples.

    The first ``s`` orbit representatives (in lexicographic order) become the
    coordinates of ``H = <h_1 .. h_d>``; the word maps the ``h_i`` to the
    element that is trivial on the first ``k`` coordinates and equal to a
    fixed ``1 != g in N`` on the rest.
    """
    if not is_just_nonsolvable(G):
        raise PreconditionError("group is not just non-solvable")
    name = G.name or "G"
    size = G.order()
    auts = list(auts) if auts is not None else automorphism_group(G)
    S = generating_tuples(G, d, cap)
    orbits = aut_orbits_on_tuples(G, S, auts)
    r = len(orbits)
    s = r if s is None else s
    if s == 0:
        raise PreconditionError("no orbits selected: the product would be empty")
    if not 0 <= k <= s <= r:
        raise PreconditionError(f"need 0 <= k <= s <= r, got k={k}, s={s}, r={r}")
    chosen = orbits[:s]
    N, g = _least_nontrivial_in_first_factor(G)
    trukk = verify_lemma_trukk(G, [o.representative for o in chosen], auts, N)
    if not trukk.ok:
        raise InvariantViolation("H does not contain the product of the N_j")
    H = trukk.H
    h = H.ambient.element([G.identity()] * k + [g] * (s - k))
    word = constructive_membership(H, h)
    if evaluate_slp(word, H.generators) != h:
        raise InvariantViolation("synthesized program does not evaluate to h")

    total = size ** d
    values = tuple_values(G, word, d, min(cap, exact_cap))
    sat = _is_identity_rows(values)
    elements, _ = element_array(G)
    index = {e.images: i for i, e in enumerate(elements)}

    def pos(t):
        p = 0
        for x in t:
            p = p * size + index[x.images]
        return p

    gen_pos = np.array([pos(t) for t in S], dtype=np.int64)
    orbit_of = np.full(total, -1, dtype=np.int64)
    for oi, o in enumerate(orbits):
        orbit_of[gen_pos[list(o.members)]] = oi
    selected = (orbit_of >= 0) & (orbit_of < s)
    unselected = orbit_of >= s
    nongen = orbit_of < 0
    sat_selected = int((sat & selected).sum())
    aut_order = len(auts)
    if sat_selected != k * aut_order:
        raise InvariantViolation(f"{sat_selected} selected generating tuples satisfy w, expected {k * aut_order}")
    count = int(sat.sum())
    p = Fraction(count, total)
    lower = Fraction(k * aut_order, total)
    if p < lower:
        raise InvariantViolation("exact probability is below the lower bound")
    upper = None
    m = None
    if s == r:
        m, _ = maximal_subgroup_count(G)
        upper = lower + Fraction(m, 2 ** d)
        if p > upper:
            raise InvariantViolation("exact probability is above the upper bound")
    notes = []
    if s < r:
        notes.append(f"only {s} of {r} orbits selected: the upper bound is not guaranteed")
    per_orbit = [int(sat[gen_pos[list(o.members)]].sum()) for o in orbits]
    flat = expand(word, word_cap)
    if isinstance(flat, Overflow):
        notes.append(f"flat word longer than {word_cap} letters; only the SLP is emitted")
    return SynthesisReport(
        "probability", name, d, word, None if isinstance(flat, Overflow) else flat,
        [{"representative": list(_fmt(o.representative)), "size": o.size,
          "selected": i < s, "satisfying": per_orbit[i]} for i, o in enumerate(orbits)],
        {"selected_generating_satisfying": sat_selected,
         "unselected_generating_satisfying": int((sat & unselected).sum()),
         "nongenerating_satisfying": int((sat & nongen).sum()),
         "generating_tuples": len(S), "total": total},
        p, (count, total), {"lower": lower, "upper": upper},
        _letters(word, flat), used_letters(values, size, d), True, notes,
        {"k": k, "s": s, "r": r, "aut_order": aut_order, "maximal_subgroups": m,
         "H_order": str(trukk.order), "g": g.cycles()},
        target=h, tuple_elements=list(H.generators))


def quotient_obstruction_check(G: PermutationGroup, n: int, w: Word | StraightLineProgram,
                               cap: int = DEFAULT_TUPLE_CAP) -> bool:
    """True iff no generating ``n``-tuple of ``G`` satisfies ``w``.

    Equivalently, ``G`` is not a quotient of the one-relator group ``F_n / <<w>>``.
    """
    slp = as_slp(w)
    if slp.arity > n:
        raise ValueError(f"word uses {slp.arity} letters but n = {n}")
    slp = slp.with_arity(n)
    S = generating_tuples(G, n, cap)
    if not S:
        return True
    inputs = [np.array([t[j].images for t in S], dtype=np.intp) for j in range(n)]
    from .slp import evaluate_slp_batch
    vals = evaluate_slp_batch(slp, inputs)
    return not bool(_is_identity_rows(vals).any())
