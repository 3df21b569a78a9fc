"""Explicit constructions and reductions over positive-measure trees.

Sparse sequences of removed cylinders and the closed sets with empty
interior they leave behind; the regular open set whose frontier keeps
positive measure; two sets sharing all their supports while sitting at
positive distance; the slot construction W with its localized-measure
identity; clopen section codes; the matrix reduction that drives level
indices up or pins them down; and degree-dense approximation.  Every
certificate is an exact rational or a certified bracket.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .core import (
    IntSchedule,
    LassoPoint,
    MeasureInterval,
    ZERO,
    affine_schedule,
    check_word,
    cylinder_measure,
    lasso,
    words_in_order,
)
from .errors import DomainError, PrecisionError
from .measure import (
    climb,
    descend_to,
    level_at_least,
    malg_distance,
    measure_interval,
    rho,
    supports_approx,
)
from .sets import (
    FULL,
    ClopenTree,
    Full,
    SetExpr,
    Thinned,
    clopen_not_cyl,
    compl,
    disjoint_extend,
    exact_class,
    exact_measure,
    localize,
    make_thinned,
    thinned_seq,
    union_of,
    w_slots,
)


def _incomp(a: str, b: str) -> bool:
    return not (a.startswith(b) or b.startswith(a))


# ---------------------------------------------------------------------------
# sparse sequences


@dataclass(frozen=True)
class SparseSequence:
    """Removed-cylinder data: the nodes t_n, the pivots u_n they extend,
    and the order schedule; the five structural conditions are checkable
    against the base tree."""

    nodes: tuple
    pivots: tuple
    order: IntSchedule

    def records(self) -> list:
        return [
            {"n": i, "node": t, "pivot": u, "order": self.order.value(i)}
            for i, (t, u) in enumerate(zip(self.nodes, self.pivots))
        ]


def sparse_sequence(S: SetExpr, ell: IntSchedule, count: int) -> SparseSequence:
    """First `count` removed nodes of the base tree S under the order ell.

    Node n extends the least (length, then lex) S-node incompatible with
    everything removed before it, 0-padded to the least admissible length
    that still leaves a surviving witness."""
    count = int(count)
    if count < 0:
        raise DomainError("count must be >= 0")
    _check_base(S)
    st = thinned_seq(make_thinned(S, ell))
    st.ensure_count(count)
    seq = SparseSequence(tuple(st.ts[:count]), tuple(st.us[:count]), ell)
    report = sparse_conditions(S, seq)
    bad = [name for name, ok in report.items() if not ok]
    if bad:
        raise DomainError(f"sparse conditions failed: {', '.join(bad)}")
    return seq


def _check_base(S: SetExpr) -> None:
    if not exact_class(S):
        raise DomainError("the base tree must have exact measure")
    if exact_measure(S) == 0:
        raise DomainError("the base tree must carry positive measure")


def sparse_conditions(S: SetExpr, seq: SparseSequence, horizon: int = 8) -> dict:
    """The five structural checks: density against every base node of depth
    <= horizon (extending the enumeration as needed), pairwise
    incompatibility, strictly increasing lengths, length gaps > 1 at a
    fixed fraction of indices, and the order lower bound."""
    st = thinned_seq(make_thinned(S, seq.order))
    ts = seq.nodes
    out = {
        "dense": all(
            _comparable_index(st, s) is not None
            for s in words_in_order(horizon)
            if _in_base(S, s)
        ),
        "incompatible": all(
            _incomp(a, b) for a, b in itertools.combinations(ts, 2)
        ),
        "increasing": all(len(a) < len(b) for a, b in zip(ts, ts[1:])),
        "order_bound": all(
            seq.order.value(i) <= len(t) for i, t in enumerate(ts)
        ),
    }
    st.ensure_count(max(len(ts), 9))
    gaps = [len(b) - len(a) for a, b in zip(st.ts, st.ts[1:])]
    out["gaps"] = 3 * sum(1 for g in gaps if g > 1) >= len(gaps)
    return out


def _in_base(S: SetExpr, s: str) -> bool:
    if isinstance(S, Full):
        return True
    return exact_measure(localize(S, s)) > 0


def _comparable_index(st, s: str, cap: int = 4096):
    """Index of an enumerated removed node comparable with s, or None."""
    count = 64
    while True:
        st.ensure_count(count)
        for i, t in enumerate(st.ts[:count]):
            if t.startswith(s) or s.startswith(t):
                return i
        if count >= cap:
            return None
        count *= 2


# ---------------------------------------------------------------------------
# closed sets with empty interior, the large frontier, shared supports


def empty_interior_closed(S: SetExpr, eps) -> SetExpr:
    """S thinned by a sparse sequence cheap enough that the removed mass
    stays within eps, yet dense enough that no cone of S survives whole."""
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError("the measure allowance must be positive")
    _check_base(S)
    k = 1
    while Fraction(1, 2 ** (k - 1)) > eps:
        k += 1
    return make_thinned(S, affine_schedule(1, k))


def empty_interior_witnesses(T: Thinned, depth: int) -> dict:
    """For every base node of depth <= depth, the index of an enumerated
    removed node comparable with it: the finite shadow of empty interior."""
    st = thinned_seq(T)
    out = {}
    for s in words_in_order(depth):
        if not _in_base(T.base, s):
            continue
        i = _comparable_index(st, s)
        if i is None:
            raise PrecisionError(f"no removed node comparable with {s!r}")
        out[s] = i
    return out


def large_frontier_regular() -> SetExpr:
    """Complement of the order-2n thinned full tree: a regular open set
    whose frontier (the thinned tree itself) keeps measure 1/6."""
    return compl(make_thinned(FULL, affine_schedule(2, 0)))


class SupportsReport(NamedTuple):
    distance: MeasureInterval
    removed_mass: MeasureInterval
    depth: int
    no_allout: bool
    inner_match: bool
    inner: frozenset


def supports_counterexample():
    """Two sets with identical inner and outer supports at the horizon yet
    certified positive measure-algebra distance: the open set U with the
    large frontier, and U joined with a positive-measure thinning of its
    frontier."""
    T = make_thinned(FULL, affine_schedule(2, 0))
    A = compl(T)
    Tp = make_thinned(T, affine_schedule(3, 2))
    B = union_of(A, Tp)
    depth = 8
    mass = measure_interval(Tp, 24)
    dist = malg_distance(A, B, Fraction(1, 16))
    sa = supports_approx(A, depth)
    sb = supports_approx(B, depth)
    everything = set(words_in_order(depth))
    no_allout = (
        set(sa.outer | sa.unknown) == everything
        and set(sb.outer | sb.unknown) == everything
    )
    report = SupportsReport(
        distance=dist,
        removed_mass=mass,
        depth=depth,
        no_allout=no_allout,
        inner_match=sa.inner == sb.inner,
        inner=sa.inner,
    )
    return A, B, report


# ---------------------------------------------------------------------------
# the slot construction and its localized identity


def w_from_tree(T: SetExpr) -> SetExpr:
    """Open union of measure slots hung off both next bits of every doubled
    node of T; localizing at a doubled word reproduces T's measures."""
    return w_slots(T)


def doubled(word: str) -> str:
    check_word(word)
    return "".join(b + b for b in word)


def doubled_lasso(x: LassoPoint) -> LassoPoint:
    """The point with every bit of x written twice."""
    return lasso(doubled(x.prefix), doubled(x.cycle))


def w_identity(T: SetExpr, t: str, levels: int = 12) -> dict:
    """Check mu(W|doubled t) = mu(T|t) two ways: the per-level slot series
    with its exact geometric tail, and the interval evaluator on the
    doubled localization."""
    check_word(t)
    if not exact_class(T):
        raise DomainError("the slot construction needs an exact-measure tree")
    W = w_from_tree(T)
    target = exact_measure(localize(T, t))
    level_ok = []
    partial = ZERO
    nodes = [t]
    for lvl in range(levels + 1):
        m = sum((exact_measure(localize(T, s)) for s in nodes), ZERO)
        # two slots of relative mass 2^-(2*lvl+2) per node at this level
        contrib = m / 2 ** (2 * lvl + 1)
        level_ok.append(contrib == target / 2 ** (lvl + 1))
        partial += contrib
        nodes = [s + b for s in nodes for b in "01"]
    tail = target / 2 ** (levels + 1)
    iv = measure_interval(localize(W, doubled(t)), 2 * levels + 2)
    return {
        "node": t,
        "target": target,
        "partial": partial,
        "tail": tail,
        "levels_match": all(level_ok),
        "series_match": partial + tail == target,
        "bracket": iv,
        "bracketed": iv.lo <= target <= iv.hi,
    }


# ---------------------------------------------------------------------------
# clopen section codes


def pi03_section_code(e: SetExpr, k: int, n: int, m_max: int):
    """For m = 0..m_max, the clopen section
    {x : m >= n implies mu(e|x restricted to m) > 1 - 2^(-k-1)}
    as a canonical antichain tree of depth <= m."""
    if not exact_class(e):
        raise DomainError("section codes need an exact-measure expression")
    if k < 0 or n < 0 or m_max < 0:
        raise DomainError("indices must be >= 0")
    thr = 1 - Fraction(1, 2 ** (k + 1))
    out = []
    for m in range(m_max + 1):
        if m < n:
            out.append(ClopenTree(("",)))
            continue
        words = [
            "".join(bits)
            for bits in itertools.product("01", repeat=m)
            if exact_measure(localize(e, "".join(bits))) > thr
        ]
        out.append(ClopenTree(words))
    return tuple(out)


# ---------------------------------------------------------------------------
# the matrix reduction


@dataclass(frozen=True)
class Matrix01:
    """0/1 matrix data: a finite square, or an infinite generator whose
    rows are eventually zero with recorded bounds, at most one designated
    row being 1 everywhere."""

    order: int = 0
    rows: tuple = ()
    bounds: tuple = ()
    ones_row: int | None = None
    generator: bool = False

    def __post_init__(self):
        if self.generator:
            if self.rows or self.order:
                raise DomainError("a generator carries bounds, not entries")
            if any(int(m) != m or m < 0 for m in self.bounds):
                raise DomainError("row bounds must be integers >= 0")
            if self.ones_row is not None:
                if self.ones_row < 0:
                    raise DomainError("row index must be >= 0")
                if len(self.bounds) < self.ones_row:
                    raise DomainError(
                        "rows below the all-ones row need recorded bounds"
                    )
            return
        if self.bounds or self.ones_row is not None:
            raise DomainError("finite matrices carry entries only")
        if len(self.rows) != self.order or any(
            len(r) != self.order for r in self.rows
        ):
            raise DomainError("entries must form a square of the given order")
        if any(v not in (0, 1) for r in self.rows for v in r):
            raise DomainError("entries must be 0 or 1")

    def entry(self, i: int, j: int) -> int:
        if i < 0 or j < 0:
            raise DomainError("matrix indices must be >= 0")
        if self.generator:
            if i == self.ones_row:
                return 1
            if i < len(self.bounds):
                return 1 if j < self.bounds[i] else 0
            return 0
        if i >= self.order or j >= self.order:
            raise DomainError("entry outside the matrix")
        return self.rows[i][j]

    @property
    def in_p3(self) -> bool:
        """Whether every row is eventually zero (generators only)."""
        if not self.generator:
            raise DomainError("membership data lives on generators")
        return self.ones_row is None

    def p3_bound(self, k: int) -> int:
        """Least M such that columns M-1 onward are clear in rows <= k."""
        if not self.in_p3:
            raise DomainError("bounds exist only for eventually-zero rows")
        m = max(self.bounds[: k + 1], default=0)
        return m + 1 if m else 0

    def prefix(self, n: int) -> "Matrix01":
        """The finite n-by-n upper-left corner."""
        n = int(n)
        if n < 0:
            raise DomainError("order must be >= 0")
        rows = tuple(
            tuple(self.entry(i, j) for j in range(n)) for i in range(n)
        )
        return Matrix01(order=n, rows=rows)


def matrix_from_rows(rows) -> Matrix01:
    rows = tuple(tuple(int(v) for v in r) for r in rows)
    return Matrix01(order=len(rows), rows=rows)


def zero_generator() -> Matrix01:
    return Matrix01(generator=True)


def bounded_generator(bounds) -> Matrix01:
    return Matrix01(generator=True, bounds=tuple(int(m) for m in bounds))


def infinite_row_generator(n0: int, bounds=None) -> Matrix01:
    n0 = int(n0)
    if bounds is None:
        bounds = (0,) * n0
    return Matrix01(
        generator=True, bounds=tuple(int(m) for m in bounds), ones_row=n0
    )


@dataclass(frozen=True)
class P3Step:
    step: int
    case: int
    target: int
    node: str
    level_lb: int
    level_exact: int | None
    status: str

    def record(self) -> dict:
        return {
            "step": self.step,
            "case": self.case,
            "target": self.target,
            "node": self.node,
            "level_lb": self.level_lb,
            "level_exact": self.level_exact,
            "status": self.status,
        }


_P3_BUDGET = 1024


def _p3_case(entry, c: int):
    for j in range(c + 1):
        if entry(j, c) == 1:
            return 2, j
    return 1, c + 1


def _first_certified_child(e: SetExpr, s: str, k: int) -> str:
    for b in "01":
        if level_at_least(e, s + b, k):
            return s + b
    raise PrecisionError(f"no certified child of {s!r} at level {k}")


def _p3_run(e: SetExpr, entry, order: int, budget: int, stop_on_error: bool):
    if measure_interval(e, 8).hi == 0:
        raise DomainError("the reduction needs a nonempty set")
    lb = rho(e, "").n  # the walk needs a level index at the root
    node = ""
    steps = []
    for c in range(order):
        case, j = _p3_case(entry, c)
        try:
            if case == 1:
                r = 1 - Fraction(1, 2**j)
                t = climb(e, node, r, budget)
                if t == node:
                    t = _first_certified_child(e, node, j)
                node, lb, exact = t, j, None
            else:
                if lb <= j:
                    node = climb(
                        e, node, 1 - Fraction(1, 2 ** (j + 1)), budget
                    )
                    lb = j + 1
                node = descend_to(e, node, j, budget)
                lb = exact = j
        except PrecisionError:
            if not stop_on_error:
                raise
            steps.append(P3Step(c, case, j, node, lb, None, "exhausted"))
            return steps, node
        steps.append(P3Step(c, case, j, node, lb, exact, "ok"))
    return steps, node


def p3_phi(e: SetExpr, a: Matrix01, budget: int = _P3_BUDGET) -> str:
    """Node reached after playing every column of the finite matrix a:
    an all-zero column climbs one level higher, a column with a 1 in row
    j descends back to level j."""
    if a.generator:
        raise DomainError("phi consumes a finite matrix; take a prefix first")
    _, node = _p3_run(e, a.entry, a.order, budget, stop_on_error=False)
    return node


def p3_reduce_prefix(
    e: SetExpr, z: Matrix01, n: int, budget: int = _P3_BUDGET
) -> str:
    """phi of the n-by-n corner of the generator z."""
    if not z.generator:
        raise DomainError("prefix reduction consumes a generator")
    return p3_phi(e, z.prefix(n), budget)


def p3_trace(
    e: SetExpr, z: Matrix01, steps: int, budget: int = _P3_BUDGET
):
    """Per-column records of the reduction on z, stopping with a final
    'exhausted' record when a move runs out of certified budget."""
    if not z.generator:
        raise DomainError("traces consume generators")
    if steps < 0:
        raise DomainError("steps must be >= 0")
    got, _ = _p3_run(e, z.entry, steps, budget, stop_on_error=True)
    return tuple(got)


# ---------------------------------------------------------------------------
# degree-dense approximation


def approximate_in_degree(target: SetExpr, eps, B: SetExpr) -> SetExpr:
    """Clopen core within eps/2 of the target plus B hung on a cylinder
    outside the core of mass under eps/2: eps-close whatever B is."""
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError("the distance allowance must be positive")
    if not exact_class(target):
        raise DomainError("degree approximation needs an exact-measure target")
    want = eps / 2
    total = exact_measure(target)
    dom = None
    for d in range(0, 25, 2):
        tree = ClopenTree(supports_approx(target, d).inner)
        if total - tree.measure() >= want:
            continue
        if tree.is_full():
            # full-measure target: carve out one small cylinder for the slot
            dom = clopen_not_cyl("1" * _mass_exponent(want))
        else:
            dom = tree
        break
    if dom is None:
        raise PrecisionError(f"no clopen core within {want} of the target")
    return disjoint_extend(dom, _slot_word(dom, want), B)


def _mass_exponent(want: Fraction) -> int:
    k = 0
    while Fraction(1, 2**k) >= want:
        k += 1
    return k


def _slot_word(dom: ClopenTree, want: Fraction) -> str:
    cap = dom.max_len() + _mass_exponent(want) + 2
    for t in words_in_order(cap):
        if cylinder_measure(t) < want and dom.localize(t).is_empty():
            return t
    raise DomainError("no cylinder outside the clopen core")
