"""Free-group words and straight-line programs.

Letters are 1-based (``x1 .. xn``).  Group elements are combined with the
project-wide conventions of :mod:`wordsat.perm`: ``a * b`` applies ``a``
first, and the commutator is ``[a, b] = a^-1 b^-1 a b``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "Word",
    "StraightLineProgram",
    "SLPBuilder",
    "Overflow",
    "LetterSet",
    "parse_word",
    "reduce",
    "evaluate_word",
    "evaluate_slp",
    "evaluate_slp_batch",
    "expand",
    "distinct_letters",
    "word_to_slp",
    "exponent_sums",
    "DEFAULT_WORD_CAP",
]

DEFAULT_WORD_CAP = 10**6


def _reduce_syllables(syllables: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for letter, exp in syllables:
        if exp == 0:
            continue
        if out and out[-1][0] == letter:
            out[-1][1] += exp
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([letter, exp])
    return tuple((a, b) for a, b in out)


@dataclass(frozen=True)
class Word:
    """A freely reduced element of the free group ``F_arity``."""

    arity: int
    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        syl = _reduce_syllables((int(a), int(b)) for a, b in self.syllables)
        for letter, _ in syl:
            if not 1 <= letter <= self.arity:
                raise ValueError(f"letter x{letter} outside F_{self.arity}")
        object.__setattr__(self, "syllables", syl)
        object.__setattr__(self, "_length", sum(abs(e) for _, e in syl))

    @classmethod
    def _trusted(cls, arity: int, syllables: tuple, length: int) -> "Word":
        # syllables already reduced and in range
        w = object.__new__(cls)
        object.__setattr__(w, "arity", arity)
        object.__setattr__(w, "syllables", syllables)
        object.__setattr__(w, "_length", length)
        return w

    @classmethod
    def letter(cls, i: int, arity: int | None = None) -> "Word":
        return cls(arity if arity is not None else i, ((i, 1),))

    @classmethod
    def identity(cls, arity: int) -> "Word":
        return cls(arity, ())

    def __len__(self) -> int:
        return self._length

    def is_identity(self) -> bool:
        return not self.syllables

    def with_arity(self, arity: int) -> "Word":
        return Word(arity, self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        left, right = self.syllables, other.syllables
        i, j = len(left), 0
        length = self._length + other._length
        # cancel only across the junction; both halves are already reduced
        while i > 0 and j < len(right) and left[i - 1][0] == right[j][0]:
            a, e = left[i - 1]
            f = right[j][1]
            length -= abs(e) + abs(f)
            if e + f != 0:
                length += abs(e + f)
                return Word._trusted(max(self.arity, other.arity),
                                     left[:i - 1] + ((a, e + f),) + right[j + 1:], length)
            i -= 1
            j += 1
        return Word._trusted(max(self.arity, other.arity), left[:i] + right[j:], length)

    def inverse(self) -> "Word":
        return Word._trusted(self.arity, tuple((a, -e) for a, e in reversed(self.syllables)), self._length)

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        if len(self.syllables) == 1:
            (a, e), = self.syllables
            return Word(self.arity, ((a, e * k),))
        out = Word.identity(self.arity)
        for _ in range(k):
            out = out * self
        return out

    def commutator(self, other: "Word") -> "Word":
        return self.inverse() * other.inverse() * self * other

    def letters(self) -> frozenset[int]:
        return frozenset(a for a, _ in self.syllables)

    def evaluate(self, elements: Sequence[Any]):
        return evaluate_word(self, elements)

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        parts = []
        for a, e in self.syllables:
            parts.append(f"x{a}" if e == 1 else f"x{a}^{e}")
        return " ".join(parts)


def reduce(w: Word) -> Word:
    """Freely reduced normal form (words are kept reduced on construction)."""
    return Word(w.arity, w.syllables)


# -- word grammar ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(x)(\d+)|(\^)\s*([+-]?\d+)|([()\[\],*]))")


class _Parser:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, Any]] = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ValueError(f"cannot parse word at {text[pos:]!r}")
            if m.group(1):
                self.tokens.append(("letter", int(m.group(2))))
            elif m.group(3):
                self.tokens.append(("pow", int(m.group(4))))
            else:
                self.tokens.append((m.group(5), None))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, kind):
        if self.peek() != kind:
            raise ValueError(f"expected {kind!r}, found {self.peek()!r}")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def word(self) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        while self.peek() in ("letter", "(", "["):
            out.extend(self.term())
            if self.peek() == "*":
                self.i += 1
        return out

    def term(self):
        atom = self.atom()
        if self.peek() == "pow":
            k = self.take("pow")[1]
            w = Word(10**9, atom) ** k
            return list(w.syllables)
        return atom

    def atom(self):
        kind = self.peek()
        if kind == "letter":
            i = self.take("letter")[1]
            if i < 1:
                raise ValueError("letters are numbered from x1")
            return [(i, 1)]
        if kind == "(":
            self.take("(")
            inner = self.word()
            self.take(")")
            return inner
        if kind == "[":
            self.take("[")
            a = Word(10**9, self.word())
            self.take(",")
            b = Word(10**9, self.word())
            self.take("]")
            return list(a.commutator(b).syllables)
        raise ValueError(f"unexpected token {kind!r}")


def parse_word(text: str, arity: int | None = None) -> Word:
    """Parse ``x1 x2^-1 [x1,x2]^3 (x1 x2)^2``; ``1`` is the identity word."""
    if text.strip() in ("", "1"):
        return Word.identity(arity or 0)
    p = _Parser(text)
    syl = p.word()
    if p.peek() is not None:
        raise ValueError(f"trailing input in word {text!r}")
    w = Word(10**9, syl)
    n = max(w.letters(), default=0)
    if arity is not None:
        if n > arity:
            raise ValueError(f"word uses x{n} but arity is {arity}")
        n = arity
    return Word(n, w.syllables)


# -- straight-line programs -------------------------------------------------

_OPS = {"input": 1, "mul": 2, "inv": 1, "pow": 2, "comm": 2}


@dataclass(frozen=True)
class StraightLineProgram:
    """Instructions ``(op, *args)`` whose refs point to earlier instructions.

    ``output`` is ``None`` for the empty program, which denotes the identity.
    """

    arity: int
    instructions: tuple[tuple, ...] = ()
    output: int | None = None

    def __post_init__(self):
        instrs = tuple(tuple(ins) for ins in self.instructions)
        object.__setattr__(self, "instructions", instrs)
        for k, ins in enumerate(instrs):
            op = ins[0]
            if op not in _OPS or len(ins) != 1 + _OPS[op]:
                raise ValueError(f"bad instruction #{k}: {ins!r}")
            if op == "input":
                if not 1 <= ins[1] <= self.arity:
                    raise ValueError(f"input x{ins[1]} outside arity {self.arity}")
                continue
            refs = ins[1:] if op in ("mul", "comm") else ins[1:2]
            for r in refs:
                if not 0 <= r < k:
                    raise ValueError(f"instruction #{k} refers forward to #{r}")
        if self.output is not None and not 0 <= self.output < len(instrs):
            raise ValueError("output ref out of range")

    def __len__(self) -> int:
        return len(self.instructions)

    def is_empty(self) -> bool:
        return self.output is None

    def reachable(self) -> list[int]:
        if self.output is None:
            return []
        seen = {self.output}
        stack = [self.output]
        while stack:
            for r in _operands(self.instructions[stack.pop()]):
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return sorted(seen)

    def input_letters(self) -> frozenset[int]:
        return frozenset(self.instructions[k][1] for k in self.reachable()
                         if self.instructions[k][0] == "input")

    def pruned(self) -> "StraightLineProgram":
        keep = self.reachable()
        remap = {old: new for new, old in enumerate(keep)}
        out = []
        for old in keep:
            ins = self.instructions[old]
            op = ins[0]
            if op == "input":
                out.append(ins)
            elif op in ("mul", "comm"):
                out.append((op, remap[ins[1]], remap[ins[2]]))
            elif op == "inv":
                out.append((op, remap[ins[1]]))
            else:
                out.append((op, remap[ins[1]], ins[2]))
        return StraightLineProgram(self.arity, tuple(out),
                                   None if self.output is None else remap[self.output])

    def with_arity(self, arity: int) -> "StraightLineProgram":
        return StraightLineProgram(arity, self.instructions, self.output)

    # serialization
    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "output": self.output,
            "instructions": [{"op": ins[0], "args": list(ins[1:])} for ins in self.instructions],
        }

    @classmethod
    def from_json(cls, data: dict) -> "StraightLineProgram":
        instrs = tuple((d["op"], *d["args"]) for d in data["instructions"])
        return cls(int(data["arity"]), instrs, data.get("output"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "StraightLineProgram":
        return cls.from_json(json.loads(text))

    def evaluate(self, elements: Sequence[Any]):
        return evaluate_slp(self, elements)


class SLPBuilder:
    """Append-only instruction DAG shared by many tagged elements.

    Refs are plain integers; ``None`` stands for the identity so callers can
    fold it away without emitting instructions.
    """

    def __init__(self, arity: int):
        self.arity = arity
        self.instructions: list[tuple] = []
        self._inputs: dict[int, int] = {}
        self._inverses: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.instructions)

    def _emit(self, ins: tuple) -> int:
        self.instructions.append(ins)
        return len(self.instructions) - 1

    def input(self, i: int) -> int:
        if i not in self._inputs:
            if not 1 <= i <= self.arity:
                raise ValueError(f"input x{i} outside arity {self.arity}")
            self._inputs[i] = self._emit(("input", i))
        return self._inputs[i]

    def mul(self, a: int | None, b: int | None) -> int | None:
        if a is None:
            return b
        if b is None:
            return a
        return self._emit(("mul", a, b))

    def inv(self, a: int | None) -> int | None:
        if a is None:
            return None
        if a not in self._inverses:
            ins = self.instructions[a]
            if ins[0] == "inv":
                return ins[1]
            r = self._emit(("inv", a))
            self._inverses[a] = r
            self._inverses[r] = a
        return self._inverses[a]

    def pow(self, a: int | None, k: int) -> int | None:
        if a is None or k == 0:
            return None
        if k == 1:
            return a
        if k == -1:
            return self.inv(a)
        return self._emit(("pow", a, k))

    def comm(self, a: int | None, b: int | None) -> int | None:
        if a is None or b is None:
            return None
        return self._emit(("comm", a, b))

    def conj(self, a: int | None, by: int | None) -> int | None:
        """``by^-1 a by``."""
        if a is None or by is None:
            return a
        return self.mul(self.mul(self.inv(by), a), by)

    def product(self, refs: Iterable[int | None]) -> int | None:
        out = None
        for r in refs:
            out = self.mul(out, r)
        return out

    def extract(self, ref: int | None, arity: int | None = None) -> StraightLineProgram:
        """The pruned standalone program computing ``ref``."""
        n = self.arity if arity is None else arity
        if ref is None:
            return StraightLineProgram(n, (), None)
        full = StraightLineProgram(n, tuple(self.instructions[: ref + 1]), ref)
        return full.pruned()


def word_to_slp(w: Word) -> StraightLineProgram:
    b = SLPBuilder(w.arity)
    out = None
    for a, e in w.syllables:
        out = b.mul(out, b.pow(b.input(a), e))
    return b.extract(out)


# -- evaluation ---------------------------------------------------------------

def _identity_like(elements: Sequence[Any]):
    if not elements:
        raise ValueError("need at least one element to know the identity")
    x = elements[0]
    return x * x.inverse()


def _power(x, k: int, identity):
    if k < 0:
        x = x.inverse()
        k = -k
    result = identity
    base = x
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def evaluate_word(w: Word, elements: Sequence[Any]):
    """Substitute ``elements[i-1]`` for ``xi`` and multiply left to right.

    Elements need ``*`` and ``.inverse()``; the identity word returns the
    identity of the elements' group.
    """
    if len(elements) < w.arity:
        raise ValueError(f"word in F_{w.arity} needs {w.arity} elements, got {len(elements)}")
    identity = _identity_like(elements)
    out = identity
    for a, e in w.syllables:
        out = out * _power(elements[a - 1], e, identity)
    return out


def evaluate_slp(slp: StraightLineProgram, elements: Sequence[Any]):
    if len(elements) < slp.arity:
        raise ValueError(f"program of arity {slp.arity} needs {slp.arity} elements, got {len(elements)}")
    identity = _identity_like(elements)
    if slp.output is None:
        return identity
    vals: dict[int, Any] = {}
    for k in slp.reachable():
        ins = slp.instructions[k]
        op = ins[0]
        if op == "input":
            vals[k] = elements[ins[1] - 1]
        elif op == "mul":
            vals[k] = vals[ins[1]] * vals[ins[2]]
        elif op == "inv":
            vals[k] = vals[ins[1]].inverse()
        elif op == "pow":
            vals[k] = _power(vals[ins[1]], ins[2], identity)
        else:
            a, b = vals[ins[1]], vals[ins[2]]
            vals[k] = a.inverse() * b.inverse() * a * b
    return vals[slp.output]


def _operands(ins: tuple) -> tuple[int, ...]:
    if ins[0] in ("mul", "comm"):
        return ins[1:3]
    if ins[0] in ("inv", "pow"):
        return ins[1:2]
    return ()


def _last_uses(slp: "StraightLineProgram", order: Sequence[int]) -> dict[int, int]:
    """Index of the last instruction reading each value (the output is never freed)."""
    last: dict[int, int] = {}
    for k in order:
        for r in _operands(slp.instructions[k]):
            last[r] = k
    last[slp.output] = len(slp.instructions)
    return last


def _batch_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.take_along_axis(b, a, axis=1)


def _batch_inv(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    np.put_along_axis(out, a, np.broadcast_to(np.arange(a.shape[1], dtype=a.dtype), a.shape), axis=1)
    return out


def _batch_pow(a: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        a = _batch_inv(a)
        k = -k
    result = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else _batch_mul(result, base)
        k >>= 1
        if k:
            base = _batch_mul(base, base)
    if result is None:
        return np.broadcast_to(np.arange(a.shape[1], dtype=a.dtype), a.shape).copy()
    return result


def evaluate_slp_batch(slp: StraightLineProgram, inputs: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate on many permutation tuples at once.

    ``inputs[i]`` is a ``(batch, degree)`` integer array of images for letter
    ``x{i+1}``.  Intermediate values are freed after their last use.
    """
    if len(inputs) < slp.arity:
        raise ValueError(f"program of arity {slp.arity} needs {slp.arity} inputs")
    shape = inputs[0].shape
    if slp.output is None:
        return np.broadcast_to(np.arange(shape[1], dtype=inputs[0].dtype), shape).copy()
    order = slp.reachable()
    last_use = _last_uses(slp, order)
    vals: dict[int, np.ndarray] = {}
    for k in order:
        ins = slp.instructions[k]
        op = ins[0]
        if op == "input":
            v = inputs[ins[1] - 1]
        elif op == "mul":
            v = _batch_mul(vals[ins[1]], vals[ins[2]])
        elif op == "inv":
            v = _batch_inv(vals[ins[1]])
        elif op == "pow":
            v = _batch_pow(vals[ins[1]], ins[2])
        else:
            a, b = vals[ins[1]], vals[ins[2]]
            v = _batch_mul(_batch_mul(_batch_inv(a), _batch_inv(b)), _batch_mul(a, b))
        vals[k] = v
        for r in set(_operands(ins)):
            if last_use.get(r) == k:
                del vals[r]
    return vals[slp.output]


# -- expansion ----------------------------------------------------------------

@dataclass(frozen=True)
class Overflow:
    """Returned by :func:`expand` when the flat word would exceed the cap."""

    cap: int
    reason: str = ""

    def __bool__(self) -> bool:
        return False


class _TooLong(Exception):
    pass


def _cyclic_split(w: Word) -> tuple[Word, Word]:
    """``w = u c u^-1`` with ``c`` cyclically reduced; returns ``(u, c)``."""
    syl = list(w.syllables)
    head: list[tuple[int, int]] = []
    while len(syl) >= 2 and syl[0][0] == syl[-1][0]:
        a, e0 = syl[0]
        _, e1 = syl[-1]
        if e0 == -e1:
            head.append(syl.pop(0))
            syl.pop()
        else:
            # partial cancellation folds into a single leading syllable
            head.append((a, -e1))
            syl[0] = (a, e0 + e1)
            syl.pop()
            break
    return Word(w.arity, tuple(head)), Word(w.arity, tuple(syl))


def _checked_pow(w: Word, k: int, cap: int) -> Word:
    if k < 0:
        w = w.inverse()
        k = -k
    if k == 0:
        return Word.identity(w.arity)
    u, c = _cyclic_split(w)
    if len(c.syllables) == 1:
        (a, e), = c.syllables
        ck = Word(w.arity, ((a, e * k),))
    else:
        if len(c) * k > cap:
            raise _TooLong
        ck = Word(w.arity, c.syllables * k)
    out = u * ck * u.inverse()
    if len(out) > cap:
        raise _TooLong
    return out


def expand(slp: StraightLineProgram, length_cap: int = DEFAULT_WORD_CAP) -> Word | Overflow:
    """Flatten to a reduced word, or return :class:`Overflow` past ``length_cap``.

    Intermediate words are dropped after their last use, and the combined
    length of live intermediates is held to ``4 * length_cap``.
    """
    if slp.output is None:
        return Word.identity(slp.arity)
    order = slp.reachable()
    last_use = _last_uses(slp, order)
    vals: dict[int, Word] = {}
    live = 0
    try:
        for k in order:
            ins = slp.instructions[k]
            op = ins[0]
            if op == "input":
                v = Word.letter(ins[1], slp.arity)
            elif op == "mul":
                a, b = vals[ins[1]], vals[ins[2]]
                if len(a) + len(b) > 2 * length_cap:
                    raise _TooLong
                v = a * b
            elif op == "inv":
                v = vals[ins[1]].inverse()
            elif op == "pow":
                v = _checked_pow(vals[ins[1]], ins[2], length_cap)
            else:
                a, b = vals[ins[1]], vals[ins[2]]
                if 2 * (len(a) + len(b)) > 2 * length_cap:
                    raise _TooLong
                v = a.commutator(b)
            if len(v) > length_cap:
                raise _TooLong
            vals[k] = v
            live += len(v)
            for r in set(_operands(ins)):
                if last_use.get(r) == k:
                    live -= len(vals.pop(r))
            if live > 4 * length_cap:
                raise _TooLong
    except _TooLong:
        return Overflow(length_cap, "reduced length exceeds cap")
    return vals[slp.output]


class LetterSet(frozenset):
    """Set of letter indices; ``upper_bound_only`` marks an unexpanded program."""

    upper_bound_only: bool = False

    def __new__(cls, letters=(), upper_bound_only: bool = False):
        obj = super().__new__(cls, letters)
        obj.upper_bound_only = upper_bound_only
        return obj


def distinct_letters(w: Word | StraightLineProgram, length_cap: int = DEFAULT_WORD_CAP) -> LetterSet:
    if isinstance(w, Word):
        return LetterSet(w.letters())
    flat = expand(w, length_cap)
    if isinstance(flat, Overflow):
        return LetterSet(w.input_letters(), upper_bound_only=True)
    return LetterSet(flat.letters())


def exponent_sums(slp: StraightLineProgram) -> tuple[int, ...]:
    """Image of the program in the abelianization ``Z^arity``."""
    zero = (0,) * slp.arity
    if slp.output is None:
        return zero
    vals: dict[int, tuple[int, ...]] = {}
    for k in slp.reachable():
        ins = slp.instructions[k]
        op = ins[0]
        if op == "input":
            v = list(zero)
            v[ins[1] - 1] = 1
            vals[k] = tuple(v)
        elif op == "mul":
            vals[k] = tuple(x + y for x, y in zip(vals[ins[1]], vals[ins[2]]))
        elif op == "inv":
            vals[k] = tuple(-x for x in vals[ins[1]])
        elif op == "pow":
            vals[k] = tuple(x * ins[2] for x in vals[ins[1]])
        else:
            vals[k] = zero
    return vals[slp.output]
