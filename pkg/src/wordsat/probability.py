"""Exact and Monte Carlo satisfaction probabilities ``P(G, w)``.

Tuples of ``G^k`` are enumerated in lexicographic (mixed-radix) order of the
sorted element list, so position ``i`` of every value table refers to the
same tuple across the package.  Words are evaluated in numpy batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np
from scipy.stats import binomtest

from .errors import CapExceeded, PreconditionError
from .perm import Permutation, PermutationGroup
from .slp import StraightLineProgram, Word, evaluate_slp_batch, word_to_slp
from .structure import classify_tuples, naive_enumerate, quotient, sorted_elements

__all__ = [
    "ProbabilityResult",
    "Estimate",
    "MonotonicityReport",
    "as_slp",
    "compact_letters",
    "element_array",
    "iter_tuple_values",
    "tuple_values",
    "exact_probability",
    "mc_probability",
    "sample_elements",
    "wilson_interval",
    "satisfaction_profile",
    "quotient_monotonicity",
    "DEFAULT_EXACT_CAP",
]

DEFAULT_EXACT_CAP = 10**8
BATCH = 1 << 16


@dataclass(frozen=True)
class Estimate:
    p: float
    lo: float
    hi: float
    n: int
    seed: int


@dataclass
class ProbabilityResult:
    """Exact count ``num / den`` (``den = |G|^k`` unreduced) and/or a sampled estimate."""

    num: int | None = None
    den: int | None = None
    estimate: Estimate | None = None
    profile: dict[str, int] | None = None

    @property
    def exact(self) -> Fraction | None:
        return None if self.num is None else Fraction(self.num, self.den)

    def to_json(self) -> dict:
        out: dict = {}
        if self.num is not None:
            fr = self.exact
            out["exact"] = {"num": str(self.num), "den": str(self.den),
                            "reduced": f"{fr.numerator}/{fr.denominator}"}
        if self.estimate is not None:
            e = self.estimate
            out["estimate"] = {"p": e.p, "lo": e.lo, "hi": e.hi, "n": e.n, "seed": e.seed}
        if self.profile is not None:
            out["profile"] = self.profile
        return out


def as_slp(w: Word | StraightLineProgram) -> StraightLineProgram:
    return word_to_slp(w) if isinstance(w, Word) else w


def compact_letters(w: Word | StraightLineProgram) -> tuple[StraightLineProgram, list[int]]:
    """Renumber the letters a program actually reaches to ``x1..xk``.

    Returns the relabelled program and the original letter of each new one.
    """
    slp = as_slp(w).pruned()
    used = sorted(slp.input_letters())
    new = {old: i + 1 for i, old in enumerate(used)}
    instrs = tuple(("input", new[ins[1]]) if ins[0] == "input" else ins for ins in slp.instructions)
    return StraightLineProgram(len(used), instrs, slp.output), used


def element_array(G: PermutationGroup) -> tuple[list[Permutation], np.ndarray]:
    """Sorted elements and their image table, shape ``(|G|, degree)``."""
    elements = sorted_elements(G)
    dtype = np.uint8 if G.degree <= 256 else np.uint16 if G.degree <= 65536 else np.int64
    arr = np.array([e.images for e in elements], dtype=dtype)
    return elements, arr.astype(np.intp)


def _tuple_inputs(E: np.ndarray, k: int, start: int, stop: int) -> list[np.ndarray]:
    idx = np.arange(start, stop, dtype=np.int64)
    n = E.shape[0]
    out = []
    for j in range(k):
        digit = (idx // (n ** (k - 1 - j))) % n
        out.append(E[digit])
    return out


def iter_tuple_values(G: PermutationGroup, w: Word | StraightLineProgram, k: int | None = None,
                      cap: int = DEFAULT_EXACT_CAP, batch: int = BATCH,
                      E: np.ndarray | None = None) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, values)`` blocks of ``w`` over all of ``G^k`` in lexicographic order."""
    slp = as_slp(w)
    k = slp.arity if k is None else k
    if k < slp.arity:
        raise ValueError(f"program needs {slp.arity} letters, got k = {k}")
    if E is None:
        _, E = element_array(G)
    total = E.shape[0] ** k
    if total > cap:
        raise CapExceeded(f"|G|^{k} = {total} exceeds the exact-evaluation cap {cap}; use Monte Carlo")
    for start in range(0, total, batch):
        stop = min(total, start + batch)
        yield start, evaluate_slp_batch(slp, _tuple_inputs(E, k, start, stop) or
                                        [np.broadcast_to(np.arange(E.shape[1]), (stop - start, E.shape[1]))])


def tuple_values(G: PermutationGroup, w: Word | StraightLineProgram, k: int | None = None,
                 cap: int = DEFAULT_EXACT_CAP) -> np.ndarray:
    """All values of ``w`` on ``G^k``, shape ``(|G|^k, degree)``."""
    blocks = [v for _, v in iter_tuple_values(G, w, k, cap)]
    return np.concatenate(blocks) if blocks else np.empty((0, G.degree), dtype=np.intp)


def _is_identity_rows(v: np.ndarray) -> np.ndarray:
    return (v == np.arange(v.shape[1])).all(axis=1)


def exact_probability(G: PermutationGroup, w: Word | StraightLineProgram,
                      cap: int = DEFAULT_EXACT_CAP, profile: bool = False,
                      jobs: int = 1) -> ProbabilityResult:
    """``P(G, w)`` by exhaustive evaluation over the letters ``w`` actually uses.

    With ``profile`` the satisfying tuples are split by whether they generate
    a solvable subgroup (tuples over the used letters only).
    """
    slp, _ = compact_letters(w)
    k = slp.arity
    size = G.order()
    den = size ** k
    if den > cap:
        raise CapExceeded(f"|G|^{k} = {den} exceeds the exact-evaluation cap {cap}; use Monte Carlo")
    _, E = element_array(G)
    if k == 0:
        return ProbabilityResult(1, 1, profile={"solvable": 1, "nonsolvable": 0} if profile else None)

    def shard(start: int) -> tuple[int, np.ndarray]:
        stop = min(den, start + BATCH)
        ok = _is_identity_rows(evaluate_slp_batch(slp, _tuple_inputs(E, k, start, stop)))
        return start, ok

    starts = range(0, den, BATCH)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            parts = list(ex.map(shard, starts))
    else:
        parts = [shard(s) for s in starts]
    num = sum(int(ok.sum()) for _, ok in parts)
    prof = None
    if profile:
        solvable = np.zeros(den, dtype=bool)
        for c in classify_tuples(G, k, cap):
            if c.solvable:
                solvable[c.member_indices] = True
        sat = np.concatenate([ok for _, ok in parts])
        s_count = int((sat & solvable).sum())
        prof = {"solvable": s_count, "nonsolvable": num - s_count}
    return ProbabilityResult(num, den, profile=prof)


def sample_elements(G: PermutationGroup, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` exactly uniform elements as an image array, via the stabilizer chain."""
    chain = G.chain
    x = np.broadcast_to(np.arange(G.degree), (count, G.degree)).copy()
    for lv in chain.levels:
        U = np.array([lv.orbit[b] for b in lv.order], dtype=np.intp)
        pick = U[rng.integers(0, len(lv.order), size=count)]
        x = np.take_along_axis(x, pick, axis=1)
    return x


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, n).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def mc_probability(G: PermutationGroup, w: Word | StraightLineProgram, samples: int,
                   seed: int, jobs: int = 1, chunk: int = BATCH) -> ProbabilityResult:
    """Monte Carlo estimate with a 95% Wilson interval.

    Chunk ``c`` draws from ``default_rng([seed, c])``, so the result depends
    on ``seed`` and ``samples`` only, not on ``jobs``.
    """
    if samples < 1:
        raise PreconditionError("need at least one sample")
    slp, _ = compact_letters(w)
    if slp.output is None:
        return ProbabilityResult(estimate=Estimate(1.0, 1.0, 1.0, samples, seed))
    k = slp.arity

    def shard(c: int) -> int:
        rng = np.random.default_rng([seed, c])
        m = min(chunk, samples - c * chunk)
        inputs = [sample_elements(G, m, rng) for _ in range(k)]
        return int(_is_identity_rows(evaluate_slp_batch(slp, inputs)).sum())

    chunks = range(math.ceil(samples / chunk))
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            hits = sum(ex.map(shard, chunks))
    else:
        hits = sum(shard(c) for c in chunks)
    lo, hi = wilson_interval(hits, samples)
    return ProbabilityResult(estimate=Estimate(hits / samples, lo, hi, samples, seed))


def satisfaction_profile(G: PermutationGroup, w: Word | StraightLineProgram, n: int,
                         cap: int = 10**7) -> list[dict]:
    """One row per marked-isomorphism class of ``n``-tuples."""
    slp = as_slp(w)
    if slp.arity > n:
        raise ValueError(f"word uses {slp.arity} letters but n = {n}")
    rows = []
    for c in classify_tuples(G, n, cap):
        value = slp.with_arity(n).evaluate(list(c.representative))
        rows.append({
            "representative": [x.cycles() for x in c.representative],
            "size": c.members,
            "subgroup_order": c.generated_subgroup_order,
            "solvable": c.solvable,
            "satisfies": value.is_identity(),
        })
    return rows


@dataclass
class MonotonicityReport:
    p_group: Fraction
    p_quotient: Fraction
    p_value_in_kernel: Fraction
    holds: bool
    identity_holds: bool
    details: dict = field(default_factory=dict)


def _row_keys(v: np.ndarray) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.int32)
    return v.view(np.dtype((np.void, 4 * v.shape[1]))).ravel()


def quotient_monotonicity(G: PermutationGroup, K: PermutationGroup, w: Word | StraightLineProgram,
                          cap: int = DEFAULT_EXACT_CAP) -> MonotonicityReport:
    """Check ``P(G, w) <= P(G/K, w)`` and ``P(G/K, w) = Pr[w(t) in K]`` exactly."""
    q = quotient(G, K)
    pg = exact_probability(G, w, cap).exact
    pq = exact_probability(q.image, w, cap).exact
    slp, _ = compact_letters(w)
    kset = _row_keys(np.array([x.images for x in naive_enumerate(K)]))
    in_k = 0
    total = 0
    for _, vals in iter_tuple_values(G, slp, cap=cap):
        total += len(vals)
        in_k += int(np.isin(_row_keys(vals), kset).sum())
    if slp.arity == 0:
        in_k, total = 1, 1
    pk = Fraction(in_k, total)
    return MonotonicityReport(pg, pq, pk, pg <= pq, pq == pk,
                              {"quotient_order": q.image.order(), "kernel_order": K.order()})
