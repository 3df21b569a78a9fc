"""Measure evaluation and density analysis for set expressions.

Every quantity here is a rational or a rational interval that provably
brackets the true measure.  Expressions in the exact class collapse to
point intervals; slot constructions are evaluated through their exit
series with certified tails; everything else falls back to localized
bit recursion.  Intervals are nested in the depth parameter: deeper
evaluation never widens a bracket.

Density machinery (sequences along a point, the positive-measure tree,
level indices, climbing and descending searches, supports, and the
measure-algebra distance) sits on top of the same interval evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .core import (
    MeasureInterval,
    LassoPoint,
    RateSchedule,
    ONE,
    ZERO,
    check_word,
    format_rational,
    iv_avg,
    iv_complement,
    iv_mul,
    iv_point,
    u_node,
)
from .errors import DomainError, PrecisionError
from .sets import (
    Clopen,
    Complement,
    Concat,
    DisjointExtend,
    DUnion,
    Empty,
    Exits,
    Flat,
    FlatCore,
    FlatTail,
    Full,
    Intersect,
    Natural,
    Oplus,
    Pad,
    Plus,
    Rake,
    RakePlus,
    SetExpr,
    Sum,
    Thinned,
    ThinnedLoc,
    Union,
    exact_class,
    exact_measure,
    exit_nodes,
    in_dtree,
    localize,
    localize_bit,
    make_clopen,
    thinned_interval,
    thinned_seq,
    _exact,
    _flat_payload,
    _flat_tail,
    _rake_tail,
)

TO1 = "ConvergesTo1"
TO0 = "ConvergesTo0"
AWAY = "BoundedAwayFrom1"
INCONCLUSIVE = "Inconclusive"

CERTAINTY_EXPONENT = 6  # density "1" means certified lo >= 1 - 2^-6

_SERIES_CAP = 14  # exit series are expanded at most this many levels deep
_TAIL_WINDOW = 9  # lower-bound window beyond the expanded levels


def _k(r: Fraction) -> int:
    return u_node(r)[0]


# ---------------------------------------------------------------------------
# interval evaluator

_iv_memo: dict = {}


def measure_interval(e: SetExpr, d: int) -> MeasureInterval:
    """Certified bracket of mu(e), nested in d."""
    if d < 0:
        raise DomainError("depth must be >= 0")
    key = (e, d)
    hit = _iv_memo.get(key)
    if hit is None:
        hit = _iv_memo[key] = _interval(e, d)
    return hit


def _interval(e: SetExpr, d: int) -> MeasureInterval:
    ex = _exact(e)
    if ex is not None:
        return iv_point(ex)
    if isinstance(e, Plus):
        c = _exit_series(e.a, e.r, e.sched, 0, d)
        return MeasureInterval(1 - c.hi, 1 - c.lo)
    if isinstance(e, Sum):
        c = _exit_series(e.a, e.r, e.sched, 0, d)
        b = measure_interval(e.b, max(0, d - 3))
        # mu = 1 - c(1 - mu(B)): decreasing in c, increasing in mu(B)
        return MeasureInterval(1 - c.hi * (1 - b.lo), 1 - c.lo * (1 - b.hi))
    if isinstance(e, Natural):
        c = _exit_series(e.a, ZERO, e.sched, 0, d)
        return MeasureInterval(_natural_value(c.lo), _natural_value(c.hi))
    if isinstance(e, Exits):
        c = _exit_series(e.a, e.r, e.sched, 0, d)
        p = measure_interval(e.payload, max(0, d - 3))
        return iv_mul(c, p)
    if isinstance(e, Flat):
        return measure_interval(_flat_tail(e), d)
    if isinstance(e, FlatTail):
        c = _exit_series(e.a, e.sched.value(e.level), e.sched, e.shift, d)
        p = measure_interval(_flat_payload(e.root, e.sched, e.level), max(0, d - 3))
        return iv_mul(c, p)
    if isinstance(e, FlatCore):
        return _flat_core_interval(e, d)
    if isinstance(e, Concat):
        inner = measure_interval(e.inner, max(0, d - len(e.word)))
        w = Fraction(1, 2 ** len(e.word))
        return MeasureInterval(inner.lo * w, inner.hi * w)
    if isinstance(e, Complement):
        return iv_complement(measure_interval(e.inner, d))
    if isinstance(e, Pad):
        inner = measure_interval(e.inner, max(0, d - e.n))
        base = 1 - Fraction(2, 2**e.n)
        w = Fraction(1, 2**e.n)
        return MeasureInterval(base + w * inner.lo, base + w * inner.hi)
    if isinstance(e, Oplus):
        d1 = max(0, d - 1)
        return iv_avg(measure_interval(e.left, d1), measure_interval(e.right, d1))
    if isinstance(e, DUnion):
        lo = sum((measure_interval(p, d).lo for p in e.parts), ZERO)
        hi = sum((measure_interval(p, d).hi for p in e.parts), ZERO)
        return MeasureInterval(min(lo, ONE), min(hi, ONE))
    if isinstance(e, DisjointExtend):
        inner = measure_interval(e.attach, max(0, d - len(e.t)))
        w = Fraction(1, 2 ** len(e.t))
        base = e.dom.measure()
        return MeasureInterval(base + w * inner.lo, base + w * inner.hi)
    if isinstance(e, (Rake, RakePlus)):
        return _rake_interval(e, d)
    if isinstance(e, Thinned):
        return thinned_interval(e, "", d)
    if isinstance(e, ThinnedLoc):
        return thinned_interval(e.root, e.at, d)
    if isinstance(e, (Union, Intersect)):
        if d == 0:
            return _crude_combine(e)
        return iv_avg(
            measure_interval(localize_bit(e, "0"), d - 1),
            measure_interval(localize_bit(e, "1"), d - 1),
        )
    # WSlots and anything without a dedicated handler: bit recursion
    if d == 0:
        return MeasureInterval(ZERO, ONE)
    return iv_avg(
        measure_interval(localize_bit(e, "0"), d - 1),
        measure_interval(localize_bit(e, "1"), d - 1),
    )


def _crude_combine(e) -> MeasureInterval:
    parts = [measure_interval(p, 0) for p in e.parts]
    if isinstance(e, Union):
        lo = max(p.lo for p in parts)
        hi = min(ONE, sum((p.hi for p in parts), ZERO))
        return MeasureInterval(lo, hi)
    lo = max(ZERO, 1 - sum((1 - p.lo for p in parts), ZERO))
    hi = min(p.hi for p in parts)
    return MeasureInterval(lo, hi)


def _natural_value(c: Fraction) -> Fraction:
    # the chained-payload fixpoint c(1-c)/(2-c), increasing for c <= 1/2
    c = min(c, Fraction(1, 2))
    return c * (1 - c) / (2 - c)


def _exit_series(a: SetExpr, floor, sched: RateSchedule, shift0: int,
                 d: int) -> MeasureInterval:
    """Bracket of c = sum over s of 2^(-2 lh(s) - 1 - k(q_s)).

    q_s = max(floor, r_(shift0+lh(s)) * mu(a|s)); k(q_s) is monotone in q_s,
    so the per-level caps max(floor, r_m) give a valid lower tail and the
    global floor gives the upper tail.
    """
    floor = Fraction(floor)
    dd = min(d, _SERIES_CAP)
    partial = ZERO
    level = {a: 1}
    for m in range(dd):
        rm = sched.value(shift0 + m)
        for am, cnt in level.items():
            q = max(floor, rm * exact_measure(am))
            partial += cnt * Fraction(1, 2 ** (2 * m + 1 + _k(q)))
        nxt: dict = {}
        for am, cnt in level.items():
            for b in "01":
                ch = localize_bit(am, b)
                nxt[ch] = nxt.get(ch, 0) + cnt
        level = nxt
    lo_tail = ZERO
    for m in range(dd, dd + _TAIL_WINDOW):
        q_up = max(floor, sched.value(shift0 + m))
        lo_tail += Fraction(1, 2 ** (m + 1 + _k(q_up)))
    hi_tail = Fraction(1, 2 ** (dd + _k(floor)))
    return MeasureInterval(partial + lo_tail, min(partial + hi_tail, Fraction(1, 2)))


def _flat_core_interval(e: FlatCore, d: int) -> MeasureInterval:
    # every slot guards the next level: live part O(max(r_(n+1), drive)),
    # dead direction carrying the padded next core, so the shape is the
    # same as Sum with the padded core in the role of the summand
    if d == 0:
        return MeasureInterval(ZERO, ONE)
    c = _exit_series(e.a, e.sched.value(e.level + 1), e.sched, e.shift, d)
    p = measure_interval(_flat_payload(e.root, e.sched, e.level + 1), max(0, d - 3))
    return MeasureInterval(1 - c.hi * (1 - p.lo), 1 - c.lo * (1 - p.hi))


def _rake_interval(e, d: int) -> MeasureInterval:
    pole = isinstance(e, RakePlus)
    n_exp = min(d, 24)
    lo = hi = ZERO
    for n in range(n_exp):
        w = Fraction(1, 2 ** (n + e.f.value(n)))
        iv = measure_interval(e.fam.value(n), max(0, d - n - e.f.value(n)))
        if pole:
            lo += w * (1 - iv.hi)
            hi += w * (1 - iv.lo)
        else:
            lo += w * iv.lo
            hi += w * iv.hi
    tail = _rake_tail(e.f, n_exp)
    if pole:
        return MeasureInterval(1 - hi - tail, 1 - lo)
    return MeasureInterval(lo, min(hi + tail, ONE))


def measure_exact(e: SetExpr, tol):
    """Exact rational for the exact class, else the first bracket of width
    at most tol; raises with the best bracket when the depth budget ends."""
    tol = Fraction(tol)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if exact_class(e):
        return exact_measure(e)
    best = None
    for d in range(4, 49, 4):
        iv = measure_interval(e, d)
        if best is None or iv.width < best.width:
            best = iv
        if iv.width <= tol:
            return iv
    raise PrecisionError(
        f"no bracket of width <= {tol} within the depth budget", best=best
    )


# ---------------------------------------------------------------------------
# density along a point


@dataclass(frozen=True)
class DensityReport:
    point: LassoPoint
    values: tuple
    verdict: str
    bound: Fraction | None = None

    def to_record(self) -> dict:
        return {
            "point": str(self.point),
            "values": [
                [format_rational(v.lo), format_rational(v.hi)] for v in self.values
            ],
            "verdict": self.verdict,
            "bound": None if self.bound is None else format_rational(self.bound),
        }


def density_sequence(e: SetExpr, x: LassoPoint, n: int) -> DensityReport:
    """Brackets of mu(e | x restricted to i) for i = 0..n, with a verdict.

    The verdict reads the informative tail (brackets of width at most
    2^(-p-1) for the certainty exponent p): all lows past the threshold
    give ConvergesTo1, all highs below 2^(-p) give ConvergesTo0, and a
    tail-wide high bound at most 1 - 2^(-p) is reported as
    BoundedAwayFrom1 with that bound.
    """
    if n < 0:
        raise DomainError("budget must be >= 0")
    values = tuple(
        measure_interval(localize(e, x.prefix_of(i)), n - i) for i in range(n + 1)
    )
    verdict, bound = _verdict(values)
    return DensityReport(x, values, verdict, bound)


def density_verdict(e: SetExpr, x: LassoPoint, budget: int) -> str:
    return density_sequence(e, x, budget).verdict


def _verdict(values) -> tuple:
    p = CERTAINTY_EXPONENT
    gate = Fraction(1, 2 ** (p + 1))
    info = [v for v in values if v.width <= gate]
    if len(info) < 4:
        return INCONCLUSIVE, None
    tail = info[-max(3, len(info) // 3):]
    high = 1 - Fraction(1, 2**p)
    if all(v.lo >= high for v in tail):
        return TO1, None
    if all(v.hi <= Fraction(1, 2**p) for v in tail):
        return TO0, None
    b = max(v.hi for v in tail)
    if b <= high:
        return AWAY, b
    return INCONCLUSIVE, None


# ---------------------------------------------------------------------------
# the positive-measure tree and level indices


def density_tree(e: SetExpr, d: int) -> set:
    """Words s with lh(s) <= d and mu(e|s) > 0 certified; prefix closed.

    A node whose bracket pins neither mu > 0 nor mu = 0 is an error: the
    tree is only defined for expressions resolvable at this depth.
    """
    if d < 0:
        raise DomainError("depth must be >= 0")
    out: set = set()
    frontier = [""]
    while frontier:
        s = frontier.pop()
        iv = measure_interval(localize(e, s), d)
        if iv.lo > 0:
            out.add(s)
            if len(s) < d:
                frontier.extend((s + "0", s + "1"))
        elif iv.hi > 0:
            raise DomainError(f"unresolved measure sign at node {s!r}")
    return out


@dataclass(frozen=True)
class RhoLevel:
    n: int

    def __int__(self) -> int:
        return self.n


def _level_of(v: Fraction) -> int:
    n = 0
    while v >= 1 - Fraction(1, 2 ** (n + 1)):
        n += 1
    return n


def _pinned_level(iv: MeasureInterval) -> int | None:
    """The level index when the whole bracket sits inside one band."""
    if iv.hi >= 1:
        return None
    n = _level_of(iv.lo)
    if iv.hi < 1 - Fraction(1, 2 ** (n + 1)):
        return n
    return None


def _thinned_parts(e: SetExpr):
    if isinstance(e, Thinned):
        return e, ""
    if isinstance(e, ThinnedLoc):
        return e.root, e.at
    return None


def _strict_hi(e: SetExpr, s: str) -> bool:
    """Whether the upper end of every finite-horizon bracket of mu(e|s) is
    provably unattained.  Below a surviving node of a thinned tree the
    candidate supply never dries up while the relative measure is positive,
    and every candidate's fate (consumed, extended by a removal, or covered
    by one) puts a removal inside the cone, so mass keeps disappearing past
    any horizon: the true value sits strictly under each enumerated bound."""
    parts = _thinned_parts(e)
    if parts is None:
        return False
    root, at = parts
    w = at + s
    if thinned_seq(root).covered(w):
        return False
    base = root.base
    return isinstance(base, Full) or in_dtree(base, w)


def _refine_best(e: SetExpr, s: str, stop) -> MeasureInterval:
    """Refine the bracket of mu(e|s) until stop(iv) accepts it; on a value
    the brackets cannot separate (it sits exactly on the tested boundary)
    return the tightest bracket reached instead of failing."""
    iv = _node_iv(e, s, 4)
    for d in range(8, 49, 8):
        if stop(iv):
            return iv
        iv = _node_iv(e, s, d)
    return iv


def _refined(e: SetExpr, s: str, stop) -> MeasureInterval:
    """Refine the bracket of mu(e|s) until stop(iv) accepts it."""
    iv = _refine_best(e, s, stop)
    if stop(iv):
        return iv
    raise PrecisionError(f"bracket at node {s!r} will not resolve", best=iv)


def _strict_level(iv: MeasureInterval) -> int | None:
    """Level index when the bracket's upper end sits exactly on the next
    band edge; usable only when the true value is strictly below that end."""
    if iv.hi >= 1 or iv.lo <= 0:
        return None
    n = _level_of(iv.lo)
    if iv.hi == 1 - Fraction(1, 2 ** (n + 1)):
        return n
    return None


def rho(e: SetExpr, s: str) -> RhoLevel:
    """The unique n with mu(e|s) in [1 - 2^(-n), 1 - 2^(-n-1))."""
    check_word(s)
    strict = _strict_hi(e, s)

    def stop(v: MeasureInterval) -> bool:
        if v.hi == v.lo:
            return True
        if v.hi < 1 and _pinned_level(v) is not None:
            return True
        return strict and _strict_level(v) is not None

    iv = _refined(e, s, stop)
    if iv.lo == iv.hi:
        v = iv.lo
        if v == 1:
            raise DomainError("measure 1 has no level index")
        if v == 0:
            raise DomainError("node is outside the positive-measure tree")
        return RhoLevel(_level_of(v))
    n = _pinned_level(iv)
    if n is None and strict:
        n = _strict_level(iv)
    if n is None:
        raise DomainError("measure 1 has no level index")
    if iv.hi == 0:
        raise DomainError("node is outside the positive-measure tree")
    return RhoLevel(n)


def level_at_least(e: SetExpr, s: str, k: int) -> bool:
    """Certify mu(e|s) >= 1 - 2^(-k), hence rho(e, s) >= k."""
    k = int(k)
    if k < 0:
        raise DomainError("level must be >= 0")
    target = 1 - Fraction(1, 2**k)
    iv = _node_iv(e, s, max(_CLIMB_EVAL_DEPTH, k + 10))
    if iv.lo >= target:
        return True
    return _refine_best(e, s, lambda v: v.lo >= target).lo >= target


_CLIMB_EVAL_DEPTH = 16


def _node_iv(e: SetExpr, s: str, depth: int = _CLIMB_EVAL_DEPTH) -> MeasureInterval:
    parts = _thinned_parts(e)
    if parts is not None:
        root, at = parts
        return thinned_interval(root, at + s, depth)
    return measure_interval(localize(e, s), depth)


def climb(e: SetExpr, s: str, r, budget: int) -> str:
    """Least extension (breadth first, then lexicographic) of s whose
    measure certifiably reaches r without the path ever dipping below the
    starting measure."""
    r = Fraction(r)
    check_word(s)
    # certifying a target near 1 needs evaluation depth past its level
    depth = max(_CLIMB_EVAL_DEPTH, u_node(r)[0] + 10)
    start = _node_iv(e, s, depth)
    if start.lo >= r:
        return s
    queue = [s]
    while queue:
        u = queue.pop(0)
        if len(u) - len(s) >= budget:
            continue
        for b in "01":
            t = u + b
            iv = _node_iv(e, t, depth)
            if iv.lo >= r:
                return t
            if iv.lo >= start.hi:
                queue.append(t)
    raise PrecisionError(
        f"no certified climb to {r} from {s!r} within {budget} levels"
    )


def descend_to(e: SetExpr, s: str, j, budget: int) -> str:
    """Shortest extension of s (breadth first, then lexicographic) whose
    measure certifiably drops below the level-j ceiling 1 - 2^(-j-1).

    The first node past the threshold lands exactly in band j: its parent
    still has measure >= 1 - 2^(-j-1), a step at most doubles the
    co-measure, so the child keeps measure >= 1 - 2^(-j), and every node
    between s and the crossing stays at level >= j + 1.  Subtrees whose
    co-measure is so small that no node within the remaining budget could
    reach the threshold are pruned by the same doubling bound."""
    j = int(j)
    check_word(s)
    if j < 0:
        raise DomainError("level must be >= 0")
    ceiling = 1 - Fraction(1, 2 ** (j + 1))
    gap = Fraction(1, 2 ** (j + 1))
    here = _refine_best(e, s, lambda v: v.lo >= ceiling or v.hi < ceiling)
    if here.lo < ceiling:
        # not certifiably above the target band: fall back to exact levels
        lvl = rho(e, s).n
        if j >= lvl:
            raise DomainError(f"level {j} is not below the current level {lvl}")
    deep = _thinned_parts(e) is not None
    queue = [s]
    while queue:
        u = queue.pop(0)
        used = len(u) - len(s)
        if used >= budget:
            continue
        rem = budget - used - 1  # levels still available below the child
        # enumeration horizons are cheap for thinned trees, and the prune
        # below needs the future-mass bound 2^-depth to sit under the gap
        depth = max(_CLIMB_EVAL_DEPTH, rem + j + 2) if deep else _CLIMB_EVAL_DEPTH
        for b in "01":
            t = u + b
            iv = _node_iv(e, t, depth)
            if iv.lo < ceiling and iv.hi > ceiling:
                iv = _refine_best(
                    e, t, lambda v: v.hi < ceiling or v.lo >= ceiling)
            if iv.hi < ceiling or (iv.hi == ceiling and _strict_hi(e, t)):
                # crossed the threshold; alive means this is the landing
                if iv.lo > 0:
                    return t
                if iv.hi == 0:
                    continue  # dead branch, nothing below
                iv = _refine_best(e, t, lambda v: v.lo > 0 or v.hi == 0)
                if iv.lo > 0:
                    return t
                if iv.hi == 0:
                    continue
                raise DomainError(f"unresolved measure sign at node {t!r}")
            if (1 - iv.lo) * 2**rem <= gap:
                continue  # too close to 1 to cross within the budget
            if iv.lo >= ceiling:
                queue.append(t)
                continue
            raise PrecisionError(f"bracket at node {t!r} will not resolve", best=iv)
    raise PrecisionError(
        f"no certified descent to level {j} from {s!r} within {budget} levels"
    )


# ---------------------------------------------------------------------------
# supports and the measure-algebra distance


class SupportsApprox(NamedTuple):
    inner: frozenset
    outer: frozenset
    unknown: frozenset


def supports_approx(e: SetExpr, d: int) -> SupportsApprox:
    """inner: maximal cylinders of full relative measure (an antichain);
    outer: the positive-measure tree to depth d; unknown: nodes whose
    bracket pins neither side."""
    if d < 0:
        raise DomainError("depth must be >= 0")
    inner: set = set()
    outer: set = set()
    unknown: set = set()
    frontier = [""]
    while frontier:
        s = frontier.pop()
        iv = measure_interval(localize(e, s), d)
        if iv.hi == 0:
            continue
        if iv.lo > 0:
            outer.add(s)
            if iv.lo == 1:
                inner.add(s)
                # the whole cone keeps full measure: close out the subtree
                stack = [s]
                while stack:
                    u = stack.pop()
                    for b in "01":
                        t = u + b
                        if len(t) <= d:
                            outer.add(t)
                            stack.append(t)
                continue
        else:
            unknown.add(s)
        if len(s) < d:
            frontier.extend((s + "0", s + "1"))
    return SupportsApprox(frozenset(inner), frozenset(outer), frozenset(unknown))


_sym_memo: dict = {}


def _sym_interval(a: SetExpr, b: SetExpr, d: int) -> MeasureInterval:
    if a == b:
        return iv_point(ZERO)
    key = (a, b, d)
    hit = _sym_memo.get(key)
    if hit is not None:
        return hit
    iv = _sym_compute(a, b, d)
    _sym_memo[key] = iv
    _sym_memo[(b, a, d)] = iv
    return iv


def _sym_compute(a: SetExpr, b: SetExpr, d: int) -> MeasureInterval:
    if isinstance(b, (Full, Empty)) or (
        isinstance(b, Clopen) and not isinstance(a, Clopen)
    ):
        a, b = b, a
    if isinstance(a, Full):
        return iv_complement(measure_interval(b, d))
    if isinstance(a, Empty):
        return measure_interval(b, d)
    if isinstance(a, Clopen) and isinstance(b, Clopen):
        both = a.tree.intersect(b.tree)
        either = a.tree.union(b.tree)
        return iv_point(either.measure() - both.measure())
    if d == 0:
        va, vb = measure_interval(a, 2), measure_interval(b, 2)
        lo = max(ZERO, va.lo - vb.hi, vb.lo - va.hi)
        hi = min(ONE, va.hi + vb.hi, 2 - va.lo - vb.lo)
        return MeasureInterval(lo, hi)
    return iv_avg(
        _sym_interval(localize_bit(a, "0"), localize_bit(b, "0"), d - 1),
        _sym_interval(localize_bit(a, "1"), localize_bit(b, "1"), d - 1),
    )


def malg_distance(a: SetExpr, b: SetExpr, tol) -> MeasureInterval:
    """Bracket of the measure of the symmetric difference, width <= tol."""
    tol = Fraction(tol)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    best = None
    for d in range(0, 33, 4):
        iv = _sym_interval(a, b, d)
        if best is None or iv.width < best.width:
            best = iv
        if iv.width <= tol:
            return iv
    raise PrecisionError(
        f"no symmetric-difference bracket of width <= {tol}", best=best
    )


# ---------------------------------------------------------------------------
# crossing layers of the chained constructions


def crossing_layer(kind: str, a: SetExpr, level: int, *, bound: int = 24) -> SetExpr:
    """Clopen union of the enumerated level-n chain cylinders.

    Points of the chained constructions that cross infinitely many levels
    form a null set; this clopen set bounds the still-crossing mass after
    `level` levels, and its measure halves per level.
    """
    chains = exit_nodes(kind, a, level=level, bound=bound)
    return make_clopen(chains)

