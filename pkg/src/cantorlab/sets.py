"""Set expressions over Cantor space.

A set is an immutable expression tree.  The interesting constructions attach
clopen "slots" at the doubled image of every word, so all of them support one
fundamental operation: localization by a single bit, which rewrites the
expression into a disjoint union of simpler pieces.  Everything else (measure
intervals, membership of ultimately periodic points, cylinder statuses) is
built on repeated localization plus exact rational arithmetic on the leaves.

Expressions are hash-equal structurally; all helper tables are memo caches
keyed by the expressions themselves, so they are observationally pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    DEFAULT_RATES,
    ZERO,
    ONE,
    IntSchedule,
    LassoPoint,
    MeasureInterval,
    RateSchedule,
    check_word,
    cylinder_measure,
    double_word,
    halve_lasso,
    halve_word,
    is_dyadic,
    lassos_in_order,
    u_node,
    words_in_order,
)
from .errors import DomainError

IN = "In"
OUT = "Out"
UNKNOWN = "Unknown"

ALLIN = "AllIn"
ALLOUT = "AllOut"
MIXED = "Mixed"

# internal status flavors: strict AllOut vs AllOut-up-to-a-null-part
_S_IN, _S_OUT, _S_NULL, _S_MIX = "in", "out", "null", "mix"


def _flip(bit: str) -> str:
    return "1" if bit == "0" else "0"


# ---------------------------------------------------------------------------
# clopen trees

_FULLWORDS = frozenset({""})


def _canon(words) -> frozenset:
    ws = set(words)
    if "" in ws:
        return _FULLWORDS
    if not ws:
        return frozenset()
    c0 = _canon({w[1:] for w in ws if w[0] == "0"})
    c1 = _canon({w[1:] for w in ws if w[0] == "1"})
    if c0 == _FULLWORDS and c1 == _FULLWORDS:
        return _FULLWORDS
    return frozenset(
        itertools.chain(("0" + w for w in c0), ("1" + w for w in c1))
    )


def _br(ws: frozenset, bit: str) -> frozenset:
    if "" in ws:
        return _FULLWORDS
    return frozenset(w[1:] for w in ws if w[0] == bit)


def _inter(a: frozenset, b: frozenset) -> frozenset:
    if "" in a:
        return b
    if "" in b:
        return a
    if not a or not b:
        return frozenset()
    r0 = _inter(_br(a, "0"), _br(b, "0"))
    r1 = _inter(_br(a, "1"), _br(b, "1"))
    if r0 == _FULLWORDS and r1 == _FULLWORDS:
        return _FULLWORDS
    return frozenset(
        itertools.chain(("0" + w for w in r0), ("1" + w for w in r1))
    )


def _compl(ws: frozenset) -> frozenset:
    if "" in ws:
        return frozenset()
    if not ws:
        return _FULLWORDS
    c0 = _compl(_br(ws, "0"))
    c1 = _compl(_br(ws, "1"))
    return frozenset(
        itertools.chain(("0" + w for w in c0), ("1" + w for w in c1))
    )


class ClopenTree:
    """Finite union of cylinders kept in canonical antichain form.

    Canonical means: no terminal extends another, and no two sibling
    terminals are both present (they are merged upward).  Two trees denote
    the same set iff they are equal.
    """

    __slots__ = ("words",)

    def __init__(self, words=()):
        for w in words:
            check_word(w)
        self.words = _canon(words)

    @classmethod
    def _raw(cls, ws: frozenset) -> "ClopenTree":
        t = cls.__new__(cls)
        t.words = ws
        return t

    @property
    def terminals(self) -> list:
        return sorted(self.words, key=lambda w: (len(w), w))

    def is_empty(self) -> bool:
        return not self.words

    def is_full(self) -> bool:
        return self.words == _FULLWORDS

    def measure(self) -> Fraction:
        return sum((cylinder_measure(w) for w in self.words), ZERO)

    def branch(self, bit: str) -> "ClopenTree":
        return ClopenTree._raw(_br(self.words, bit))

    def localize(self, word: str) -> "ClopenTree":
        t = self
        for b in word:
            t = t.branch(b)
        return t

    def union(self, other: "ClopenTree") -> "ClopenTree":
        return ClopenTree._raw(_canon(self.words | other.words))

    def intersect(self, other: "ClopenTree") -> "ClopenTree":
        return ClopenTree._raw(_inter(self.words, other.words))

    def complement(self) -> "ClopenTree":
        return ClopenTree._raw(_compl(self.words))

    def contains_point(self, x: LassoPoint) -> bool:
        return any(x.prefix_of(len(w)) == w for w in self.words)

    def max_len(self) -> int:
        return max((len(w) for w in self.words), default=0)

    def __eq__(self, other):
        return isinstance(other, ClopenTree) and self.words == other.words

    def __hash__(self):
        return hash(("ClopenTree", self.words))

    def __repr__(self):
        return f"ClopenTree({self.terminals!r})"


def make_clopen(cylinders) -> SetExpr:
    tree = ClopenTree(cylinders)
    if tree.is_full():
        return FULL
    if tree.is_empty():
        return EMPTY
    return Clopen(tree)


def clopen_not_cyl(w: str) -> ClopenTree:
    """Complement of the cylinder at w, as a linear antichain."""
    check_word(w)
    return ClopenTree._raw(
        frozenset(w[:j] + _flip(w[j]) for j in range(len(w))) or _FULLWORDS
    )


def o_tree(r: Fraction) -> ClopenTree:
    """The clopen O(r): complement of the cylinder at u(r)."""
    _, u = u_node(r)
    return clopen_not_cyl(u)


def pad_sides(n: int) -> ClopenTree:
    """Everything outside the two cylinders at 0^n and 1^n."""
    words = set()
    for j in range(1, n):
        words.add("0" * j + "1")
        words.add("1" * j + "0")
    return ClopenTree._raw(frozenset(words))


# ---------------------------------------------------------------------------
# expression nodes


class SetExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Empty(SetExpr):
    pass


@dataclass(frozen=True)
class Full(SetExpr):
    pass


EMPTY = Empty()
FULL = Full()


@dataclass(frozen=True)
class Clopen(SetExpr):
    tree: ClopenTree


@dataclass(frozen=True)
class SingletonLasso(SetExpr):
    point: LassoPoint


@dataclass(frozen=True)
class Concat(SetExpr):
    word: str
    inner: SetExpr


@dataclass(frozen=True)
class Complement(SetExpr):
    inner: SetExpr


@dataclass(frozen=True)
class Union(SetExpr):
    parts: tuple


@dataclass(frozen=True)
class Intersect(SetExpr):
    parts: tuple


@dataclass(frozen=True)
class DUnion(SetExpr):
    """Union of parts known to be pairwise disjoint (internal)."""

    parts: tuple


@dataclass(frozen=True)
class Oplus(SetExpr):
    left: SetExpr
    right: SetExpr


@dataclass(frozen=True)
class DisjointExtend(SetExpr):
    dom: ClopenTree
    t: str
    attach: SetExpr


@dataclass(frozen=True)
class OStar(SetExpr):
    """∪_k N_{0^(n_k)1} for the binary expansion r = Σ 2^(−n_k−1); r nondyadic."""

    r: Fraction


@dataclass(frozen=True)
class Pad(SetExpr):
    n: int
    inner: SetExpr


@dataclass(frozen=True)
class Double(SetExpr):
    inner: SetExpr


@dataclass(frozen=True)
class SetFamily:
    """Sequence of sets: an explicit prefix, then constant-last or cycling."""

    items: tuple
    tail: str = "const"

    def value(self, n: int) -> SetExpr:
        if self.tail == "cycle":
            return self.items[n % len(self.items)]
        return self.items[min(n, len(self.items) - 1)]

    def shifted(self) -> "SetFamily":
        if self.tail == "cycle":
            return SetFamily(self.items[1:] + self.items[:1], "cycle")
        if len(self.items) > 1:
            return SetFamily(self.items[1:], "const")
        return self

    def tail_start(self) -> int:
        return 0 if self.tail == "cycle" else len(self.items) - 1

    def period(self) -> int:
        return len(self.items) if self.tail == "cycle" else 1


@dataclass(frozen=True)
class Rake(SetExpr):
    f: IntSchedule
    fam: SetFamily


@dataclass(frozen=True)
class RakePlus(SetExpr):
    """Rake with a pole: the tines plus every off-tine cylinder at the tine
    depth, plus the point 0^∞."""

    f: IntSchedule
    fam: SetFamily


@dataclass(frozen=True)
class Plus(SetExpr):
    a: SetExpr
    r: Fraction
    sched: RateSchedule


@dataclass(frozen=True)
class Sum(SetExpr):
    b: SetExpr
    a: SetExpr
    r: Fraction
    sched: RateSchedule


@dataclass(frozen=True)
class Natural(SetExpr):
    a: SetExpr
    sched: RateSchedule


@dataclass(frozen=True)
class Flat(SetExpr):
    a: SetExpr
    sched: RateSchedule


@dataclass(frozen=True)
class Exits(SetExpr):
    """∪ over all words s and both break pairs: s̄⌢η⌢u(q_s)⌢payload (internal)."""

    a: SetExpr
    r: Fraction
    sched: RateSchedule
    payload: SetExpr


@dataclass(frozen=True)
class FlatTail(SetExpr):
    """Level `level` exit blocks of the flat construction (internal)."""

    root: SetExpr
    sched: RateSchedule
    level: int
    a: SetExpr
    shift: int


@dataclass(frozen=True)
class FlatCore(SetExpr):
    """Doubled copy plus slots whose dead direction carries the next
    level's floor and chains to its padded core (internal)."""

    root: SetExpr
    sched: RateSchedule
    level: int
    a: SetExpr
    shift: int


@dataclass(frozen=True)
class ChainDouble(SetExpr):
    """Finite chains of (doubled word + break pair) blocks ending in a
    doubled member: the doubling-closure used as a game source (internal)."""

    orig: SetExpr
    a: SetExpr


@dataclass(frozen=True)
class WSlots(SetExpr):
    """At every doubled word s̄ and both next bits, attach the measure-r
    slot for r = localized measure of `inner` at s (internal)."""

    inner: SetExpr


@dataclass(frozen=True)
class Thinned(SetExpr):
    """Closed set left after removing a deterministic sparse sequence of
    cylinders from `base`; the removed nodes are generated on demand."""

    base: SetExpr
    ell: IntSchedule


@dataclass(frozen=True)
class ThinnedLoc(SetExpr):
    root: Thinned
    at: str


# ---------------------------------------------------------------------------
# smart constructors


def concat(word: str, inner: SetExpr) -> SetExpr:
    check_word(word)
    if not word:
        return inner
    if isinstance(inner, Empty):
        return EMPTY
    if isinstance(inner, Concat):
        return Concat(word + inner.word, inner.inner)
    if isinstance(inner, Full):
        return Clopen(ClopenTree._raw(frozenset({word})))
    if isinstance(inner, Clopen):
        return Clopen(ClopenTree._raw(frozenset(word + w for w in inner.tree.words)))
    return Concat(word, inner)


def dunion(*parts) -> SetExpr:
    flat = []
    clopens = []
    for p in parts:
        if isinstance(p, DUnion):
            ps = p.parts
        else:
            ps = (p,)
        for q in ps:
            if isinstance(q, Empty):
                continue
            if isinstance(q, Full):
                return FULL
            if isinstance(q, Clopen):
                clopens.append(q.tree)
            else:
                flat.append(q)
    if clopens:
        t = clopens[0]
        for o in clopens[1:]:
            t = t.union(o)
        if t.is_full():
            return FULL
        if not t.is_empty():
            flat.append(Clopen(t))
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return DUnion(tuple(sorted(flat, key=repr)))


def compl(e: SetExpr) -> SetExpr:
    if isinstance(e, Empty):
        return FULL
    if isinstance(e, Full):
        return EMPTY
    if isinstance(e, Complement):
        return e.inner
    if isinstance(e, Clopen):
        return Clopen(e.tree.complement())
    return Complement(e)


def union_of(*parts) -> SetExpr:
    flat = []
    clopens = []
    stack = list(parts)
    while stack:
        p = stack.pop(0)
        if isinstance(p, Union):
            stack = list(p.parts) + stack
        elif isinstance(p, Empty):
            continue
        elif isinstance(p, Full):
            return FULL
        elif isinstance(p, Clopen):
            clopens.append(p.tree)
        elif p not in flat:
            flat.append(p)
    if clopens:
        t = clopens[0]
        for o in clopens[1:]:
            t = t.union(o)
        if t.is_full():
            return FULL
        if not t.is_empty():
            flat.append(Clopen(t))
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(sorted(flat, key=repr)))


def intersect_of(*parts) -> SetExpr:
    flat = []
    clopens = []
    stack = list(parts)
    while stack:
        p = stack.pop(0)
        if isinstance(p, Intersect):
            stack = list(p.parts) + stack
        elif isinstance(p, Full):
            continue
        elif isinstance(p, Empty):
            return EMPTY
        elif isinstance(p, Clopen):
            clopens.append(p.tree)
        elif p not in flat:
            flat.append(p)
    if clopens:
        t = clopens[0]
        for o in clopens[1:]:
            t = t.intersect(o)
        if t.is_empty():
            return EMPTY
        if not t.is_full():
            flat.append(Clopen(t))
    if not flat:
        return FULL
    if len(flat) == 1:
        return flat[0]
    return Intersect(tuple(sorted(flat, key=repr)))


def oplus(left: SetExpr, right: SetExpr) -> SetExpr:
    if isinstance(left, Empty) and isinstance(right, Empty):
        return EMPTY
    if isinstance(left, Full) and isinstance(right, Full):
        return FULL
    return Oplus(left, right)


def _clopen_expr(tree: ClopenTree) -> SetExpr:
    if tree.is_full():
        return FULL
    if tree.is_empty():
        return EMPTY
    return Clopen(tree)


def pad(n: int, inner: SetExpr) -> SetExpr:
    if n < 1:
        raise DomainError("padding height must be >= 1")
    if isinstance(inner, Full):
        return Clopen(clopen_not_cyl("0" * n))
    if isinstance(inner, Empty):
        return _clopen_expr(pad_sides(n))
    return Pad(n, inner)


def double_set(inner: SetExpr) -> SetExpr:
    if isinstance(inner, Empty):
        return EMPTY
    return Double(inner)


def singleton(x: LassoPoint) -> SetExpr:
    return SingletonLasso(x)


def disjoint_extend(dom: ClopenTree, t: str, attach: SetExpr) -> SetExpr:
    check_word(t)
    if not dom.localize(t).is_empty():
        raise DomainError(f"cylinder at {t!r} meets the clopen part")
    return DisjointExtend(dom, t, attach)


def make_primitive(kind: str, *args) -> SetExpr:
    table = {
        "Concat": concat,
        "Complement": compl,
        "Union": union_of,
        "Intersect": intersect_of,
        "Oplus": oplus,
        "DisjointExtend": disjoint_extend,
        "Pad": pad,
        "Double": double_set,
        "SingletonLasso": singleton,
    }
    if kind not in table:
        raise DomainError(f"unknown primitive kind {kind!r}")
    return table[kind](*args)


def make_o(r) -> SetExpr:
    return Clopen(o_tree(Fraction(r)))


def make_ostar(r) -> SetExpr:
    r = Fraction(r)
    if not (0 < r < 1):
        raise DomainError(f"ostar needs 0 < r < 1, got {r}")
    if is_dyadic(r):
        # finite expansion: a plain clopen set
        acc = r
        words = []
        n = 0
        while acc > 0:
            if acc >= Fraction(1, 2 ** (n + 1)):
                words.append("0" * n + "1")
                acc -= Fraction(1, 2 ** (n + 1))
            n += 1
        return Clopen(ClopenTree._raw(frozenset(words)))
    return OStar(r)


def make_family(items, tail: str = "const") -> SetFamily:
    items = tuple(items)
    if not items:
        raise DomainError("a set family needs at least one member")
    if tail not in ("const", "cycle"):
        raise DomainError(f"family tail must be const or cycle, got {tail!r}")
    return SetFamily(items, tail)


def make_rake(kind: str, f: IntSchedule, fam: SetFamily) -> SetExpr:
    probe = max(len(f.values), 2) + 1
    if any(f.value(n) < 1 for n in range(probe)):
        raise DomainError("rake heights must be ≥ 1")
    if kind == "plain":
        return Rake(f, fam)
    if kind == "pole":
        return RakePlus(f, fam)
    raise DomainError(f"rake kind must be plain or pole, got {kind!r}")


def _gate_exact(a: SetExpr, what: str) -> None:
    if not exact_class(a):
        raise DomainError(
            f"the base of {what} must have exactly computable localized "
            f"measures; {type(a).__name__} only supports interval measures"
        )


def make_plus_sum(b, a: SetExpr, r, sched: RateSchedule = DEFAULT_RATES) -> SetExpr:
    r = Fraction(r)
    if not (0 <= r < 1):
        raise DomainError(f"floor must satisfy 0 <= r < 1, got {r}")
    _gate_exact(a, "plus/sum")
    if b is None or isinstance(b, Empty):
        return Plus(a, r, sched)
    return Sum(b, a, r, sched)


def make_plus(a, r=ZERO, sched: RateSchedule = DEFAULT_RATES) -> SetExpr:
    return make_plus_sum(None, a, r, sched)


def make_sum(b, a, r=ZERO, sched: RateSchedule = DEFAULT_RATES) -> SetExpr:
    return make_plus_sum(b, a, r, sched)


def make_natural_flat(kind: str, a: SetExpr, sched: RateSchedule = DEFAULT_RATES) -> SetExpr:
    _gate_exact(a, kind)
    if kind == "natural":
        return Natural(a, sched)
    if kind == "flat":
        return Flat(a, sched)
    raise DomainError(f"kind must be natural or flat, got {kind!r}")


def chain_double(a: SetExpr) -> SetExpr:
    if isinstance(a, Empty):
        return EMPTY
    return ChainDouble(a, a)


def w_slots(inner: SetExpr) -> SetExpr:
    _gate_exact(inner, "the slot construction")
    if exact_measure(inner) == 0:
        return EMPTY
    return WSlots(inner)


def make_thinned(base: SetExpr, ell: IntSchedule) -> Thinned:
    if not (exact_class(base) or isinstance(base, Thinned)):
        raise DomainError("thinning needs an exact-measure or thinned base")
    return Thinned(base, ell)


# ---------------------------------------------------------------------------
# exact measures

_exact_memo: dict = {}


def _exact(e: SetExpr):
    if e in _exact_memo:
        return _exact_memo[e]
    v = _exact_compute(e)
    _exact_memo[e] = v
    return v


def _exact_compute(e: SetExpr):
    if isinstance(e, Empty):
        return ZERO
    if isinstance(e, Full):
        return ONE
    if isinstance(e, Clopen):
        return e.tree.measure()
    if isinstance(e, (SingletonLasso, Double, ChainDouble)):
        return ZERO
    if isinstance(e, OStar):
        return e.r
    if isinstance(e, Concat):
        v = _exact(e.inner)
        return None if v is None else v * cylinder_measure(e.word)
    if isinstance(e, Complement):
        v = _exact(e.inner)
        return None if v is None else ONE - v
    if isinstance(e, DUnion):
        vs = [_exact(p) for p in e.parts]
        if any(v is None for v in vs):
            return None
        total = sum(vs, ZERO)
        if total > 1:
            raise DomainError("disjoint union over full measure; parts overlap")
        return total
    if isinstance(e, Oplus):
        va, vb = _exact(e.left), _exact(e.right)
        if va is None or vb is None:
            return None
        return (va + vb) / 2
    if isinstance(e, Pad):
        v = _exact(e.inner)
        if v is None:
            return None
        p = Fraction(1, 2**e.n)
        return ONE - p * (2 - v)
    if isinstance(e, DisjointExtend):
        v = _exact(e.attach)
        if v is None:
            return None
        return e.dom.measure() + v * cylinder_measure(e.t)
    if isinstance(e, (Rake, RakePlus)):
        ws = []
        for it in e.fam.items:
            v = _exact(it)
            if v is None:
                return None
            ws.append(v if isinstance(e, Rake) else ONE - v)
        s = _rake_series(e.f, e.fam, ws)
        return s if isinstance(e, Rake) else ONE - s
    return None


def _rake_series(f: IntSchedule, fam: SetFamily, weights) -> Fraction:
    """Σ_n 2^(−n−f(n)) · w(n) for eventually affine exponents and an
    eventually periodic weight sequence."""

    def w(n):
        if fam.tail == "cycle":
            return weights[n % len(weights)]
        return weights[min(n, len(weights) - 1)]

    if f.kind == "affine":
        n0_f = 0
    else:
        n0_f = max(0, len(f.values) - f.shift)
    n0 = max(n0_f, fam.tail_start())
    period = fam.period()
    head = sum(
        (Fraction(1, 2 ** (n + f.value(n))) * w(n) for n in range(n0)), ZERO
    )
    slope = f.value(n0 + period) - f.value(n0)  # per-period exponent growth
    step = period + slope
    base = Fraction(1, 1 - Fraction(1, 2**step))
    tail = ZERO
    for j in range(period):
        exp = (n0 + j) + f.value(n0 + j)
        tail += Fraction(1, 2**exp) * w(n0 + j)
    return head + tail * base


def _rake_tail(f: IntSchedule, N: int) -> Fraction:
    """Σ_{n≥N} 2^(−n−f(n)), the exact mass of all tines past the first N."""
    if f.kind == "affine":
        n0 = N
    else:
        n0 = max(N, len(f.values) - f.shift)
    head = sum((Fraction(1, 2 ** (n + f.value(n))) for n in range(N, n0)), ZERO)
    step = 1 + f.value(n0 + 1) - f.value(n0)
    base = Fraction(1, 1 - Fraction(1, 2**step))
    return head + Fraction(1, 2 ** (n0 + f.value(n0))) * base


def exact_class(e: SetExpr) -> bool:
    return _exact(e) is not None


def exact_measure(e: SetExpr) -> Fraction:
    v = _exact(e)
    if v is None:
        raise DomainError(
            f"{type(e).__name__} has no exact measure; use interval measures"
        )
    return v


# ---------------------------------------------------------------------------
# localization

_loc_memo: dict = {}


def localize_bit(e: SetExpr, bit: str) -> SetExpr:
    key = (e, bit)
    if key in _loc_memo:
        return _loc_memo[key]
    v = _loc_compute(e, bit)
    _loc_memo[key] = v
    return v


def _exit_q(e) -> Fraction:
    return max(e.r, e.sched.value(0) * exact_measure(e.a))


def _natural_form(e: Natural) -> Exits:
    payload = concat("1", dunion(Plus(e.a, ZERO, e.sched), e))
    return Exits(e.a, ZERO, e.sched, payload)


def flat_height(sched: RateSchedule, level: int) -> int:
    """Least h with 1 − 2^(1−h) at or above the level floor."""
    return u_node(sched.value(level))[0] + 1


def _flat_tail(e: Flat) -> FlatTail:
    return FlatTail(e.a, e.sched, 1, e.a, 0)


def _flat_payload(root: SetExpr, sched: RateSchedule, level: int) -> SetExpr:
    return pad(flat_height(sched, level), FlatCore(root, sched, level, root, 0))


def _flat_q(e) -> Fraction:
    # exit blocks at level n keep floor r_n; slots inside the level-n core
    # already guard the next level, so they carry floor r_(n+1)
    mu = exact_measure(e.a)
    drive = e.sched.value(e.shift) * mu
    floor = e.level if isinstance(e, FlatTail) else e.level + 1
    return max(e.sched.value(floor), drive)


def _flat_slot(e: FlatCore) -> SetExpr:
    q = _flat_q(e)
    u = u_node(q)[1]
    return dunion(Clopen(o_tree(q)), concat(u, _flat_payload(e.root, e.sched, e.level + 1)))


def _loc_compute(e: SetExpr, bit: str) -> SetExpr:
    other = _flip(bit)
    if isinstance(e, (Empty, Full)):
        return e
    if isinstance(e, Clopen):
        t = e.tree.branch(bit)
        if t.is_full():
            return FULL
        if t.is_empty():
            return EMPTY
        return Clopen(t)
    if isinstance(e, SingletonLasso):
        if e.point.bit(0) == bit:
            return SingletonLasso(e.point.shift(1))
        return EMPTY
    if isinstance(e, Concat):
        if e.word[0] != bit:
            return EMPTY
        return concat(e.word[1:], e.inner)
    if isinstance(e, Complement):
        return compl(localize_bit(e.inner, bit))
    if isinstance(e, Union):
        return union_of(*(localize_bit(p, bit) for p in e.parts))
    if isinstance(e, Intersect):
        return intersect_of(*(localize_bit(p, bit) for p in e.parts))
    if isinstance(e, DUnion):
        return dunion(*(localize_bit(p, bit) for p in e.parts))
    if isinstance(e, Oplus):
        return e.left if bit == "0" else e.right
    if isinstance(e, DisjointExtend):
        return dunion(
            _clopen_expr(e.dom.branch(bit)),
            localize_bit(concat(e.t, e.attach), bit),
        )
    if isinstance(e, OStar):
        if bit == "1":
            return FULL if e.r >= Fraction(1, 2) else EMPTY
        r2 = e.r * 2
        if r2 > 1:
            r2 -= 1
        return make_ostar(r2)
    if isinstance(e, Pad):
        if e.n == 1:
            return e.inner if bit == "1" else EMPTY
        if bit == "0":
            return Clopen(clopen_not_cyl("0" * (e.n - 1)))
        return dunion(pad(e.n - 1, e.inner), concat("0" * (e.n - 1), FULL))
    if isinstance(e, Double):
        return concat(bit, double_set(localize_bit(e.inner, bit)))
    if isinstance(e, Rake):
        if bit == "0":
            return Rake(e.f.shifted(), e.fam.shifted())
        return concat("1" * (e.f.value(0) - 1), e.fam.value(0))
    if isinstance(e, RakePlus):
        if bit == "0":
            return RakePlus(e.f.shifted(), e.fam.shifted())
        m = e.f.value(0) - 1
        if m == 0:
            return e.fam.value(0)
        return dunion(
            concat("1" * m, e.fam.value(0)), Clopen(clopen_not_cyl("1" * m))
        )
    if isinstance(e, Plus):
        q = _exit_q(e)
        return dunion(
            concat(other, Clopen(o_tree(q))),
            concat(bit, Plus(localize_bit(e.a, bit), e.r, e.sched.shifted())),
        )
    if isinstance(e, Sum):
        q = _exit_q(e)
        slot = dunion(Clopen(o_tree(q)), concat(u_node(q)[1], e.b))
        return dunion(
            concat(other, slot),
            concat(bit, Sum(e.b, localize_bit(e.a, bit), e.r, e.sched.shifted())),
        )
    if isinstance(e, Natural):
        return localize_bit(_natural_form(e), bit)
    if isinstance(e, Exits):
        q = _exit_q(e)
        return dunion(
            concat(other + u_node(q)[1], e.payload),
            concat(bit, Exits(localize_bit(e.a, bit), e.r, e.sched.shifted(), e.payload)),
        )
    if isinstance(e, Flat):
        return localize_bit(_flat_tail(e), bit)
    if isinstance(e, FlatTail):
        qn = _flat_q(e)
        return dunion(
            concat(other + u_node(qn)[1], _flat_payload(e.root, e.sched, e.level)),
            concat(bit, FlatTail(e.root, e.sched, e.level, localize_bit(e.a, bit), e.shift + 1)),
        )
    if isinstance(e, FlatCore):
        return dunion(
            concat(other, _flat_slot(e)),
            concat(bit, FlatCore(e.root, e.sched, e.level, localize_bit(e.a, bit), e.shift + 1)),
        )
    if isinstance(e, ChainDouble):
        return dunion(
            concat(other, ChainDouble(e.orig, e.orig)),
            concat(bit, ChainDouble(e.orig, localize_bit(e.a, bit))),
        )
    if isinstance(e, WSlots):
        mu = exact_measure(e.inner)
        slot = FULL if mu == 1 else make_ostar(mu)
        down = localize_bit(e.inner, bit)
        rest = EMPTY if _exact(down) == 0 else WSlots(down)
        return dunion(concat(other, slot), concat(bit, rest))
    if isinstance(e, Thinned):
        return _thinned_loc(e, bit)
    if isinstance(e, ThinnedLoc):
        return _thinned_loc(e.root, e.at + bit)
    raise DomainError(f"cannot localize {type(e).__name__}")


def localize(e: SetExpr, word: str) -> SetExpr:
    check_word(word)
    for b in word:
        e = localize_bit(e, b)
    return e


# ---------------------------------------------------------------------------
# thinned sequences: deterministic removal of sparse cylinders

_thinned_states: dict = {}


class ThinnedSeq:
    """Generator state for the removed cylinders of one Thinned node.

    Node n: take the least (length, then lex) base-tree node u_n incompatible
    with everything removed so far, and remove its leftmost extension t_n of
    the least admissible length that leaves a surviving witness node.

    The candidate pool (base nodes incompatible with everything removed so
    far) only ever shrinks as removals accumulate, so candidates are produced
    once per length and consumed through a cursor, revalidating each word
    against the removals added after its batch was built.  This keeps the
    scan linear in the number of removals instead of rescanning every word.
    """

    def __init__(self, node: Thinned):
        self.node = node
        self.ts: list = []
        self.us: list = []
        self.witnesses: list = []
        self._batches: dict = {}
        self._batch_gen: dict = {}
        self._cursor = (0, 0)

    def ensure_count(self, n: int) -> None:
        while len(self.ts) < n:
            self._step()

    def ensure_past_length(self, length: int) -> None:
        while not self.ts or len(self.ts[-1]) <= length:
            self._step()

    def covered(self, s: str) -> bool:
        self.ensure_past_length(len(s))
        return any(s.startswith(t) for t in self.ts)

    def _in_tree(self, s: str) -> bool:
        if isinstance(self.node.base, Full):
            return True
        return in_dtree(self.node.base, s)

    def _batch(self, length: int) -> list:
        got = self._batches.get(length)
        if got is None:
            got = self._batches[length] = self._gen_batch(length)
            self._batch_gen[length] = len(self.ts)
        return got

    def _gen_batch(self, length: int) -> list:
        # lexicographic walk over the length-`length` words that are
        # incompatible with every removed node known right now
        by_len: dict = {}
        pref = set()
        for t in self.ts:
            if len(t) < length:
                by_len.setdefault(len(t), set()).add(t)
            else:
                pref.add(t[:length])
        out: list = []
        stack = [""]
        while stack:
            p = stack.pop()
            if len(p) == length:
                if p not in pref and self._in_tree(p):
                    out.append(p)
                continue
            if p in by_len.get(len(p), ()):
                continue
            stack.append(p + "1")
            stack.append(p + "0")
        return out

    def _next_u(self, cap: int):
        length, i = self._cursor
        while length <= cap:
            batch = self._batch(length)
            gen = self._batch_gen[length]
            while i < len(batch):
                w = batch[i]
                i += 1
                if all(_incompatible(w, t) for t in self.ts[gen:]):
                    self._cursor = (length, i)
                    return w
            length += 1
            i = 0
            self._cursor = (length, i)
        return None

    def _step(self) -> None:
        n = len(self.ts)
        cap = (len(self.ts[-1]) if self.ts else 0) + 12
        u = self._next_u(cap)
        if u is None:
            raise DomainError("the thinned tree ran out of removable nodes")
        length = max(self.node.ell.value(n), (len(self.ts[-1]) + 1) if self.ts else 1, len(u))
        start = length
        while True:
            found = None
            for bits in itertools.product("01", repeat=length - len(u)):
                cand = u + "".join(bits)
                if not self._in_tree(cand):
                    continue
                wit = self._witness(cand, length + 8)
                if wit is not None:
                    found = (cand, wit)
                    break
            if found:
                self.ts.append(found[0])
                self.us.append(u)
                self.witnesses.append(found[1])
                return
            length += 1
            if length > start + 64:
                raise DomainError(
                    f"base tree is not perfect at {u!r}: no admissible "
                    "extension leaves a witness"
                )

    def _witness(self, cand: str, cap: int):
        length, i = self._cursor
        while length <= cap:
            batch = self._batch(length)
            gen = self._batch_gen[length]
            while i < len(batch):
                w = batch[i]
                i += 1
                if not all(_incompatible(w, t) for t in self.ts[gen:]):
                    continue
                if _incompatible(w, cand):
                    return w
            length += 1
            i = 0
        return None


def _incompatible(s: str, t: str) -> bool:
    return not (s.startswith(t) or t.startswith(s))


def thinned_seq(node: Thinned) -> ThinnedSeq:
    st = _thinned_states.get(node)
    if st is None:
        st = _thinned_states[node] = ThinnedSeq(node)
    return st


def _thinned_loc(root: Thinned, at: str) -> SetExpr:
    st = thinned_seq(root)
    if st.covered(at):
        return EMPTY
    return ThinnedLoc(root, at)


def _ell_geo_tail(ell: IntSchedule, start: int) -> Fraction | None:
    """Σ_{k >= start} 2^(−ell(k)) when the schedule grows affinely."""
    if ell.kind == "affine" and ell.a >= 1:
        first = Fraction(1, 2 ** ell.value(start))
        return first / (1 - Fraction(1, 2**ell.a))
    return None


def thinned_interval(root: Thinned, at: str, depth: int) -> MeasureInterval:
    st = thinned_seq(root)
    st.ensure_past_length(len(at) + depth)
    if any(at.startswith(t) for t in st.ts):
        return MeasureInterval(ZERO, ZERO)
    base_iv = _base_interval(root.base, at, depth)
    rem_lo = ZERO
    rem_hi = ZERO
    for t in st.ts:
        if t.startswith(at) and len(t) > len(at):
            scale = Fraction(1, 2 ** (len(t) - len(at)))
            piece = _base_interval(root.base, t, depth)
            rem_lo += scale * piece.lo
            rem_hi += scale * piece.hi
    n = len(st.ts)
    lam = len(st.ts[-1])
    # worst case: every future removal lands inside this cylinder with full
    # relative base measure
    future = Fraction(1, 2**lam)
    geo = _ell_geo_tail(root.ell, n)
    if geo is not None and geo < future:
        future = geo
    future *= 2 ** len(at)
    lo = base_iv.lo - rem_hi - future
    hi = base_iv.hi - rem_lo
    lo = max(ZERO, lo)
    hi = min(ONE, max(lo, hi))
    return MeasureInterval(lo, hi)


def _base_interval(base: SetExpr, at: str, depth: int) -> MeasureInterval:
    if isinstance(base, Thinned):
        return thinned_interval(base, at, depth)
    return MeasureInterval.exact(exact_measure(localize(base, at)))


def in_dtree(e: SetExpr, s: str) -> bool:
    """Certified positive localized measure at s."""
    if isinstance(e, Thinned):
        st = thinned_seq(e)
        if st.covered(s):
            return False
        return thinned_interval(e, s, 8).lo > 0
    if isinstance(e, ThinnedLoc):
        return in_dtree(e.root, e.at + s)
    return exact_measure(localize(e, s)) > 0


# ---------------------------------------------------------------------------
# membership of ultimately periodic points

_BIG_BARE = (Plus, Sum, Natural, Exits, FlatTail, FlatCore)
_contains_big_memo: dict = {}


def _contains_big(e: SetExpr) -> bool:
    if e in _contains_big_memo:
        return _contains_big_memo[e]
    if isinstance(e, _BIG_BARE) or isinstance(e, Flat):
        v = True
    elif isinstance(e, (Union, Intersect, DUnion)):
        v = any(_contains_big(p) for p in e.parts)
    elif isinstance(e, (Concat, Complement, Pad, Double)):
        v = _contains_big(e.inner)
    elif isinstance(e, Oplus):
        v = _contains_big(e.left) or _contains_big(e.right)
    elif isinstance(e, DisjointExtend):
        v = _contains_big(e.attach)
    else:
        v = False
    _contains_big_memo[e] = v
    return v


_strip_memo: dict = {}


def _strip(e: SetExpr) -> SetExpr:
    """Erase schedule shifts so that walk states can be compared."""
    if e in _strip_memo:
        return _strip_memo[e]
    v = _strip_compute(e)
    _strip_memo[e] = v
    return v


def _base_rate(s: RateSchedule) -> RateSchedule:
    return RateSchedule(s.kind, s.values, 0)


def _base_int(s: IntSchedule) -> IntSchedule:
    return IntSchedule(s.kind, s.a, s.b, s.values, 0)


def _strip_compute(e: SetExpr) -> SetExpr:
    if isinstance(e, Plus):
        return Plus(_strip(e.a), e.r, _base_rate(e.sched))
    if isinstance(e, Sum):
        return Sum(_strip(e.b), _strip(e.a), e.r, _base_rate(e.sched))
    if isinstance(e, Natural):
        return Natural(_strip(e.a), _base_rate(e.sched))
    if isinstance(e, Flat):
        return Flat(_strip(e.a), _base_rate(e.sched))
    if isinstance(e, Exits):
        return Exits(_strip(e.a), e.r, _base_rate(e.sched), _strip(e.payload))
    if isinstance(e, FlatTail):
        return FlatTail(_strip(e.root), _base_rate(e.sched), e.level, _strip(e.a), 0)
    if isinstance(e, FlatCore):
        return FlatCore(_strip(e.root), _base_rate(e.sched), e.level, _strip(e.a), 0)
    if isinstance(e, Rake):
        return Rake(_base_int(e.f), e.fam)
    if isinstance(e, RakePlus):
        return RakePlus(_base_int(e.f), e.fam)
    if isinstance(e, Concat):
        return Concat(e.word, _strip(e.inner))
    if isinstance(e, Complement):
        return Complement(_strip(e.inner))
    if isinstance(e, (Union, Intersect, DUnion)):
        return type(e)(tuple(_strip(p) for p in e.parts))
    if isinstance(e, Oplus):
        return Oplus(_strip(e.left), _strip(e.right))
    if isinstance(e, Pad):
        return Pad(e.n, _strip(e.inner))
    if isinstance(e, Double):
        return Double(_strip(e.inner))
    if isinstance(e, DisjointExtend):
        return DisjointExtend(e.dom, e.t, _strip(e.attach))
    if isinstance(e, ChainDouble):
        return ChainDouble(_strip(e.orig), _strip(e.a))
    if isinstance(e, WSlots):
        return WSlots(_strip(e.inner))
    return e


def _neg(v: str) -> str:
    if v == IN:
        return OUT
    if v == OUT:
        return IN
    return UNKNOWN


def member_at_depth(e: SetExpr, x: LassoPoint, d: int) -> str:
    if d < 0:
        raise DomainError("depth must be >= 0")
    return _member(e, x, d)


def _member(e: SetExpr, x: LassoPoint, d: int) -> str:
    if d < 0:
        return UNKNOWN
    if isinstance(e, Empty):
        return OUT
    if isinstance(e, Full):
        return IN
    if isinstance(e, Clopen):
        return IN if e.tree.contains_point(x) else OUT
    if isinstance(e, SingletonLasso):
        return IN if e.point == x else OUT
    if isinstance(e, Complement):
        return _neg(_member(e.inner, x, d))
    if isinstance(e, (Union, DUnion)):
        return _or_members(e.parts, x, d)
    if isinstance(e, Intersect):
        return _neg(_or_members([compl(p) for p in e.parts], x, d))
    if isinstance(e, Oplus):
        inner = e.left if x.bit(0) == "0" else e.right
        return _member(inner, x.shift(1), d - 1)
    if isinstance(e, DisjointExtend):
        if e.dom.contains_point(x):
            return IN
        if not e.t or x.prefix_of(len(e.t)) == e.t:
            return _member(e.attach, x.shift(len(e.t)), d - len(e.t))
        return OUT
    if isinstance(e, OStar):
        return _ostar_member(e.r, x)
    if isinstance(e, Pad):
        head = x.prefix_of(e.n)
        if head == "1" * e.n:
            return _member(e.inner, x.shift(e.n), d - e.n)
        if head == "0" * e.n:
            return OUT
        return IN
    if isinstance(e, Double):
        y = _try_halve(x)
        if y is None:
            return OUT
        return _member(e.inner, y, d - 1)
    if isinstance(e, ChainDouble):
        return _chain_double_member(e, x, d)
    if isinstance(e, Rake):
        return _rake_member(e, x, d, pole=False)
    if isinstance(e, RakePlus):
        return _rake_member(e, x, d, pole=True)
    if isinstance(e, WSlots):
        return _wslots_member(e, x, d)
    if isinstance(e, (Thinned, ThinnedLoc)):
        return _thinned_member(e, x, d)
    if isinstance(e, Concat) and not _contains_big(e):
        if x.prefix_of(len(e.word)) == e.word:
            return _member(e.inner, x.shift(len(e.word)), d - len(e.word))
        return OUT
    # exit-style constructions and wrappers around them
    return _walk(e, x, d)


def _or_members(parts, x: LassoPoint, d: int) -> str:
    saw_unknown = False
    for p in parts:
        v = _member(p, x, d)
        if v == IN:
            return IN
        if v == UNKNOWN:
            saw_unknown = True
    return UNKNOWN if saw_unknown else OUT


def _try_halve(x: LassoPoint):
    try:
        return halve_lasso(x)
    except DomainError:
        return None


def _first_one(x: LassoPoint):
    for i in range(len(x.prefix) + len(x.cycle)):
        if x.bit(i) == "1":
            return i
    return None


def _ostar_member(r: Fraction, x: LassoPoint) -> str:
    p = _first_one(x)
    if p is None:
        return OUT
    # index p contributes iff bit p+1 of the binary expansion of r is set
    return IN if int(r * 2 ** (p + 1)) % 2 == 1 else OUT


def _rake_member(e, x: LassoPoint, d: int, pole: bool) -> str:
    n = _first_one(x)
    if n is None:
        return IN if pole else OUT
    m = e.f.value(n)
    tine = "0" * n + "1" * m
    head = x.prefix_of(n + m)
    if head != tine:
        return IN if pole else OUT
    return _member(e.fam.value(n), x.shift(n + m), d - n - m)


def _pair_scan(x: LassoPoint):
    """Pair-break positions of a point, exploiting eventual periodicity.

    Returns (breaks_in_window, infinitely_many).  The pair pattern at pair
    index j is periodic in j once 2j passes the prefix, with period at most
    the cycle length, so one extra cycle-width window decides everything.
    """
    pre = len(x.prefix)
    cyc = len(x.cycle)
    tail_j0 = (pre + 1) // 2
    scan_to = tail_j0 + 2 * cyc + 2
    breaks = [j for j in range(scan_to) if x.bit(2 * j) != x.bit(2 * j + 1)]
    infinite = any(j >= tail_j0 for j in breaks)
    return breaks, infinite


def _chain_double_member(e: ChainDouble, x: LassoPoint, d: int) -> str:
    breaks, infinite = _pair_scan(x)
    if infinite:
        return OUT  # a break recurs in the cycle, so blocks never settle
    if not breaks:
        return _member(e.a, halve_lasso(x), d - 1)
    last = breaks[-1]
    return _member(e.orig, halve_lasso(x.shift(2 * last + 2)), d - 1)


def _wslots_member(e: WSlots, x: LassoPoint, d: int) -> str:
    breaks, _ = _pair_scan(x)
    if not breaks:
        return OUT  # doubled forever: never enters a slot
    j = breaks[0]
    s = halve_word(x.prefix_of(2 * j))
    mu = exact_measure(localize(e.inner, s))
    if mu == 0:
        return OUT
    if mu == 1:
        return IN
    z = x.shift(2 * j + 2)
    if is_dyadic(mu):
        return _member(make_ostar(mu), z, d)
    return _ostar_member(mu, z)


def _thinned_member(e, x: LassoPoint, d: int) -> str:
    root = e if isinstance(e, Thinned) else e.root
    at = "" if isinstance(e, Thinned) else e.at
    st = thinned_seq(root)
    word = at + x.prefix_of(max(d, 1))
    st.ensure_past_length(len(word))
    if any(word.startswith(t) for t in st.ts):
        return OUT
    base = root.base
    if not isinstance(base, Full):
        v = _member(localize(base, at) if at else base, x, d)
        if v == OUT:
            return OUT
    return UNKNOWN  # no finite certificate for staying clear of all removals


def _flatten_parts(p: SetExpr, direct: list, big: list) -> None:
    if isinstance(p, Empty):
        return
    if isinstance(p, (DUnion, Union)):
        for q in p.parts:
            _flatten_parts(q, direct, big)
        return
    if isinstance(p, Flat):
        big.append(_flat_tail(p))
        return
    if isinstance(p, _BIG_BARE):
        big.append(p)
        return
    if isinstance(p, (Concat, Pad, Oplus, DisjointExtend)) and _contains_big(p):
        big.append(p)
        return
    direct.append(p)


def _walk(e: SetExpr, x: LassoPoint, d: int) -> str:
    parts = [e]
    saw_unknown = False
    seen: dict = {}
    xs = x
    for step in range(d + 1):
        direct, big = [], []
        for p in parts:
            _flatten_parts(p, direct, big)
        for p in direct:
            v = _member(p, xs, d - step)
            if v == IN:
                return IN
            if v == UNKNOWN:
                saw_unknown = True
        if not big:
            return UNKNOWN if saw_unknown else OUT
        if all(type(p) in _BIG_BARE for p in big):
            key = (tuple(sorted(repr(_strip(p)) for p in big)), xs)
            if key in seen:
                v = _resolve_loop(seen[key], xs, d - step)
                if v == OUT and saw_unknown:
                    return UNKNOWN
                return v
            seen[key] = list(big)
        bit = xs.bit(0)
        parts = [localize_bit(p, bit) for p in big]
        xs = xs.shift(1)
    return UNKNOWN


def _resolve_loop(parts, xs: LassoPoint, budget: int) -> str:
    """Decide a walk state that recurs along the point's cycle.

    Every construction here is a countable union of cone-attached pieces;
    a recurring state means the point declined every attached cone during
    one full cycle, so the only way in is the doubled core (when the tail
    is a doubled point at all).
    """
    halved = _try_halve(xs)
    saw_unknown = False
    if halved is not None:
        for p in parts:
            if isinstance(p, (Plus, Sum, FlatCore)):
                v = _member(p.a, halved, budget)
                if v == IN:
                    return IN
                if v == UNKNOWN:
                    saw_unknown = True
    return UNKNOWN if saw_unknown else OUT


# ---------------------------------------------------------------------------
# cylinder status

_status_memo: dict = {}


def _status(e: SetExpr, d: int) -> str:
    key = (e, d)
    if key in _status_memo:
        return _status_memo[key]
    v = _status_compute(e, d)
    _status_memo[key] = v
    return v


def _status_compute(e: SetExpr, d: int) -> str:
    if isinstance(e, Empty):
        return _S_OUT
    if isinstance(e, Full):
        return _S_IN
    if isinstance(e, Clopen):
        if e.tree.is_full():
            return _S_IN
        if e.tree.is_empty():
            return _S_OUT
        return _S_MIX
    if isinstance(e, Complement):
        inner = _status(e.inner, d)
        return {_S_IN: _S_OUT, _S_OUT: _S_IN, _S_NULL: _S_MIX, _S_MIX: _S_MIX}[inner]
    if isinstance(e, _BIG_BARE) or isinstance(e, Flat):
        return _S_MIX  # strictly between empty and full in every cylinder
    if isinstance(e, (Thinned, ThinnedLoc)):
        return _S_MIX
    ex = _exact(e)
    if ex is not None:
        if ex == 0:
            return _S_NULL  # a symbolic null part (doubled image, point, ...)
        # full measure without being Full still misses a nonempty null part
        return _S_MIX
    if isinstance(e, (Union, DUnion)):
        subs = [_status(p, d) for p in e.parts]
        if any(s == _S_IN for s in subs):
            return _S_IN
        if all(s in (_S_OUT, _S_NULL) for s in subs):
            return _S_NULL if any(s == _S_NULL for s in subs) else _S_OUT
        return _descend(e, d)
    if isinstance(e, Intersect):
        subs = [_status(p, d) for p in e.parts]
        if any(s == _S_OUT for s in subs):
            return _S_OUT
        if any(s == _S_NULL for s in subs):
            return _S_NULL
        if all(s == _S_IN for s in subs):
            return _S_IN
        return _descend(e, d)
    return _descend(e, d)


def _descend(e: SetExpr, d: int) -> str:
    if d <= 0:
        return _S_MIX
    s0 = _status(localize_bit(e, "0"), d - 1)
    s1 = _status(localize_bit(e, "1"), d - 1)
    if s0 == _S_IN and s1 == _S_IN:
        return _S_IN
    outs = (_S_OUT, _S_NULL)
    if s0 in outs and s1 in outs:
        return _S_NULL if _S_NULL in (s0, s1) else _S_OUT
    return _S_MIX


def cylinder_status(e: SetExpr, s: str, d: int) -> str:
    loc = localize(e, s)
    v = _status(loc, d)
    if v == _S_IN:
        return ALLIN
    if v in (_S_OUT, _S_NULL):
        return ALLOUT
    return MIXED


# ---------------------------------------------------------------------------
# exit nodes

def exit_nodes(kind: str, a: SetExpr, *, r=ZERO, sched: RateSchedule = DEFAULT_RATES,
               level: int = 1, bound: int = 24) -> list:
    r = Fraction(r)
    _gate_exact(a, "exit enumeration")
    if kind == "plus":
        return _block_exits(a, r, sched, bound)
    if kind == "natural":
        blocks = _block_exits(a, ZERO, sched, bound)
        chains = blocks
        for _ in range(level - 1):
            chains = [
                e + "1" + v
                for e in chains
                for v in blocks
                if len(e) + 1 + len(v) <= bound
            ]
        return sorted(chains, key=lambda w: (len(w), w))
    if kind == "flat":
        chains = _block_exits(a, sched.value(1), sched, bound)
        for lvl in range(2, level + 1):
            h = flat_height(sched, lvl - 1)
            chains = [
                e + "1" * h + v
                for e in chains
                for v in _block_exits(a, sched.value(lvl), sched, bound)
                if len(e) + h + len(v) <= bound
            ]
        return sorted(chains, key=lambda w: (len(w), w))
    raise DomainError(f"exit kind must be plus, natural or flat, got {kind!r}")


def _block_exits(a: SetExpr, floor: Fraction, sched: RateSchedule, bound: int) -> list:
    out = []
    for m in range((bound - 2) // 2 + 1):
        if 2 * m + 3 > bound:
            break
        for bits in itertools.product("01", repeat=m):
            s = "".join(bits)
            q = max(floor, sched.value(m) * exact_measure(localize(a, s)))
            u = u_node(q)[1]
            if 2 * m + 2 + len(u) > bound:
                continue
            for eta in ("01", "10"):
                out.append(double_word(s) + eta + u)
    return sorted(out, key=lambda w: (len(w), w))


# ---------------------------------------------------------------------------
# membership witnesses


def find_witness(e: SetExpr, want_in: bool, depth: int = 48,
                 max_prefix: int = 4, max_cycle: int = 4) -> LassoPoint:
    """Least ultimately periodic point with a certified verdict."""
    target = IN if want_in else OUT
    for p in lassos_in_order(max_prefix, max_cycle):
        if member_at_depth(e, p, depth) == target:
            return p
    raise DomainError(
        f"no small {'member' if want_in else 'non-member'} witness found"
    )
