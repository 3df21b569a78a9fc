"""Binary words, ultimately periodic points, exact rationals and intervals.

Everything downstream addresses Cantor space through the types here: finite
words over {0,1} (plain ``str``), lasso points ``prefix(cycle)`` for the
ultimately periodic elements, ``fractions.Fraction`` for all measure values,
and closed rational intervals for finite-depth measure knowledge.  No floats
anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

LT, EQ, GT = -1, 0, 1


# ---------------------------------------------------------------------------
# words


def check_word(w: str) -> str:
    if not isinstance(w, str) or any(c not in "01" for c in w):
        raise DomainError(f"not a binary word: {w!r}")
    return w


def double_word(w: str) -> str:
    return "".join(c + c for c in w)


def is_doubled(w: str) -> bool:
    return all(w[i] == w[i + 1] for i in range(0, len(w) - 1, 2))


def halve_word(w: str) -> str:
    # inverse of double_word on even-length doubled words
    return w[0::2]


def is_prefix(s: str, t: str) -> bool:
    return t.startswith(s)


def compatible(s: str, t: str) -> bool:
    return t.startswith(s) or s.startswith(t)


def tri_compare(s: str, t: str) -> int:
    """Length-lexicographic well order on words: shorter first, then lex."""
    check_word(s)
    check_word(t)
    if len(s) != len(t):
        return LT if len(s) < len(t) else GT
    if s == t:
        return EQ
    return LT if s < t else GT


def word_le(s: str, t: str) -> bool:
    return tri_compare(s, t) != GT


def words_in_order(max_len: int | None = None):
    """Enumerate all words in the (length, lex) well order, ε first."""
    lengths = range(max_len + 1) if max_len is not None else itertools.count()
    for n in lengths:
        for bits in itertools.product("01", repeat=n):
            yield "".join(bits)


def cylinder_measure(s: str) -> Fraction:
    return Fraction(1, 2 ** len(s))


# ---------------------------------------------------------------------------
# lasso points


@dataclass(frozen=True)
class LassoPoint:
    """An ultimately periodic point prefix⌢cycle⌢cycle⌢…

    Canonical form: the cycle is primitive and the prefix is shortest; build
    instances through :func:`lasso` so equality means equal points.
    """

    prefix: str
    cycle: str

    def bit(self, i: int) -> str:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def prefix_of(self, n: int) -> str:
        if n <= len(self.prefix):
            return self.prefix[:n]
        rest = n - len(self.prefix)
        reps = rest // len(self.cycle) + 1
        return (self.prefix + self.cycle * reps)[:n]

    def shift(self, n: int = 1) -> "LassoPoint":
        """The point with the first n bits removed."""
        p = self
        for _ in range(n):
            if p.prefix:
                p = lasso(p.prefix[1:], p.cycle)
            else:
                p = lasso("", p.cycle[1:] + p.cycle[0])
        return p

    def __str__(self) -> str:
        return f"{self.prefix}({self.cycle})"


def _primitive(cycle: str) -> str:
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle == cycle[:p] * (n // p):
            return cycle[:p]
    return cycle


def lasso(prefix: str, cycle: str) -> LassoPoint:
    check_word(prefix)
    check_word(cycle)
    if not cycle:
        raise DomainError("lasso cycle must be nonempty")
    cycle = _primitive(cycle)
    while prefix and prefix[-1] == cycle[-1]:
        prefix = prefix[:-1]
        cycle = cycle[-1] + cycle[:-1]
    return LassoPoint(prefix, cycle)


def parse_lasso(text: str) -> LassoPoint:
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise DomainError(f"lasso points are written prefix(cycle): {text!r}")
    head, _, tail = text[:-1].partition("(")
    return lasso(head, tail)


def double_lasso(x: LassoPoint) -> LassoPoint:
    return lasso(double_word(x.prefix), double_word(x.cycle))


def double(w):
    """Doubling map on words and lasso points: every entry repeated twice."""
    if isinstance(w, LassoPoint):
        return double_lasso(w)
    return double_word(check_word(w))


def halve_lasso(x: LassoPoint) -> LassoPoint:
    """Inverse of double_lasso; input must denote a doubled point."""
    pref = x.prefix
    cyc = x.cycle
    if len(pref) % 2:
        pref += cyc[0]
        cyc = cyc[1:] + cyc[0]
    if len(cyc) % 2:
        cyc = cyc * 2
    whole = pref + cyc * 2
    if not is_doubled(whole):
        raise DomainError(f"not a doubled point: {x}")
    return lasso(halve_word(pref), halve_word(cyc))


def lassos_in_order(max_prefix: int, max_cycle: int):
    """Canonical lasso points, deterministically ordered, no duplicates."""
    seen = set()
    for cl in range(1, max_cycle + 1):
        for pl in range(max_prefix + 1):
            for cyc in itertools.product("01", repeat=cl):
                for pre in itertools.product("01", repeat=pl):
                    p = lasso("".join(pre), "".join(cyc))
                    if p not in seen:
                        seen.add(p)
                        yield p


# ---------------------------------------------------------------------------
# rationals and intervals


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational p/q: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


@dataclass(frozen=True)
class MeasureInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if not (ZERO <= self.lo <= self.hi <= ONE):
            raise DomainError(f"bad measure interval [{self.lo}, {self.hi}]")

    @staticmethod
    def exact(q) -> "MeasureInterval":
        q = Fraction(q)
        return MeasureInterval(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, q: Fraction) -> bool:
        return self.lo <= q <= self.hi

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


IV_ZERO = MeasureInterval(ZERO, ZERO)
IV_ONE = MeasureInterval(ONE, ONE)
IV_FULLRANGE = MeasureInterval(ZERO, ONE)


def _clamp(q: Fraction) -> Fraction:
    return min(ONE, max(ZERO, q))


def iv_point(q: Fraction) -> MeasureInterval:
    return MeasureInterval(q, q)


def iv_add(*ivs: MeasureInterval) -> MeasureInterval:
    lo = _clamp(sum(i.lo for i in ivs))
    hi = _clamp(sum(i.hi for i in ivs))
    return MeasureInterval(lo, max(lo, hi))


def iv_scale(c: Fraction, iv: MeasureInterval) -> MeasureInterval:
    return MeasureInterval(c * iv.lo, c * iv.hi)


def iv_shift(c: Fraction, iv: MeasureInterval) -> MeasureInterval:
    return MeasureInterval(_clamp(c + iv.lo), _clamp(c + iv.hi))


def iv_avg(a: MeasureInterval, b: MeasureInterval) -> MeasureInterval:
    return MeasureInterval((a.lo + b.lo) / 2, (a.hi + b.hi) / 2)


def iv_complement(iv: MeasureInterval) -> MeasureInterval:
    return MeasureInterval(ONE - iv.hi, ONE - iv.lo)


def iv_mul(a: MeasureInterval, b: MeasureInterval) -> MeasureInterval:
    # both factors lie in [0,1], so the product is monotone in each
    return MeasureInterval(a.lo * b.lo, a.hi * b.hi)


def iv_meet(a: MeasureInterval, b: MeasureInterval) -> MeasureInterval:
    """Intersection of two enclosures of the same value."""
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        raise DomainError(f"incompatible enclosures {a} and {b}")
    return MeasureInterval(lo, hi)


# ---------------------------------------------------------------------------
# the canonical node u(r) and binary expansions


def u_node(r: Fraction) -> tuple[int, str]:
    """k = least h > 0 with r ≤ 1 − 2^(−h), and the word u = 0^(k−1)⌢1."""
    r = Fraction(r)
    if r < 0 or r >= 1:
        raise DomainError(f"u_node needs 0 ≤ r < 1, got {r}")
    k = 1
    while r > ONE - Fraction(1, 2**k):
        k += 1
    return k, "0" * (k - 1) + "1"


def expansion_indices(r: Fraction, count: int) -> tuple[int, ...]:
    """Greedy binary expansion r = Σ_k 2^(−n_k−1), first `count` indices.

    Dyadic inputs terminate (the finite expansion, never the all-ones tail),
    so the result may be shorter than `count`.
    """
    r = Fraction(r)
    if not (0 < r < 1):
        raise DomainError(f"expansion_indices needs 0 < r < 1, got {r}")
    out = []
    rest = r
    n = 0
    while len(out) < count and rest > 0:
        if rest >= Fraction(1, 2 ** (n + 1)):
            out.append(n)
            rest -= Fraction(1, 2 ** (n + 1))
        n += 1
    return tuple(out)


def is_dyadic(r: Fraction) -> bool:
    d = Fraction(r).denominator
    return d & (d - 1) == 0


# ---------------------------------------------------------------------------
# schedules


_DEF = "default"
_EXP = "explicit"


@dataclass(frozen=True)
class RateSchedule:
    """A strictly increasing sequence of rationals in (0,1) with sup = 1.

    kind "default" is r_n = 1 − 2^(−n−1); "explicit" takes the listed prefix
    and continues with the default formula past it.  `shift` views the
    schedule from index `shift` on (localization shifts it).
    """

    kind: str = _DEF
    values: tuple[Fraction, ...] = ()
    shift: int = 0

    def value(self, n: int) -> Fraction:
        i = n + self.shift
        if self.kind == _EXP and i < len(self.values):
            return self.values[i]
        return ONE - Fraction(1, 2 ** (i + 1))

    def shifted(self, k: int = 1) -> "RateSchedule":
        return RateSchedule(self.kind, self.values, self.shift + k)

    def base_key(self):
        return (self.kind, self.values)


DEFAULT_RATES = RateSchedule()


def make_rate_schedule(values) -> RateSchedule:
    vals = tuple(Fraction(v) for v in values)
    if not vals:
        return DEFAULT_RATES
    for v in vals:
        if not (0 < v < 1):
            raise DomainError(f"schedule value {v} outside (0,1)")
    for a, b in zip(vals, vals[1:]):
        if not a < b:
            raise DomainError("rate schedule must be strictly increasing")
    seam = ONE - Fraction(1, 2 ** (len(vals) + 1))
    if not vals[-1] < seam:
        raise DomainError("explicit rate prefix must stay below the default tail")
    return RateSchedule(_EXP, vals, 0)


@dataclass(frozen=True)
class IntSchedule:
    """Positive integer sequences: affine a·n+b, or a list with constant tail."""

    kind: str  # "affine" | "explicit"
    a: int = 0
    b: int = 1
    values: tuple[int, ...] = ()
    shift: int = 0

    def value(self, n: int) -> int:
        i = n + self.shift
        if self.kind == "affine":
            return self.a * i + self.b
        return self.values[i] if i < len(self.values) else self.values[-1]

    def shifted(self, k: int = 1) -> "IntSchedule":
        return IntSchedule(self.kind, self.a, self.b, self.values, self.shift + k)

    def base_key(self):
        return (self.kind, self.a, self.b, self.values)


def affine_schedule(a: int, b: int) -> IntSchedule:
    if a < 0 or b < 0:
        raise DomainError("affine schedule needs a ≥ 0 and b ≥ 0")
    return IntSchedule("affine", a=a, b=b)


def explicit_schedule(values) -> IntSchedule:
    vals = tuple(int(v) for v in values)
    if not vals or any(v < 0 for v in vals):
        raise DomainError("explicit schedule needs values ≥ 0")
    return IntSchedule("explicit", values=vals)
