"""Tests for the explicit constructions and reductions.

Frozen expected values come from independent oracles in this module:
`brute_sparse_full` re-derives removal sequences for the full base by a
direct (length, lex) scan with zero-padding, the slot-series checks sum
exact per-level masses with a closed-form geometric tail, and the section
membership tests recompute every localized measure through the interval
evaluator.  The frozen literals were produced by those oracles and pinned.
"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cantorlab.core import (
    affine_schedule,
    cylinder_measure,
    lasso,
    lassos_in_order,
    words_in_order,
)
from cantorlab.errors import DomainError, PrecisionError
from cantorlab.measure import (
    TO0,
    TO1,
    density_tree,
    density_verdict,
    descend_to,
    level_at_least,
    malg_distance,
    measure_interval,
    rho,
)
from cantorlab.sets import (
    EMPTY,
    FULL,
    DisjointExtend,
    clopen_not_cyl,
    double_set,
    exact_measure,
    localize,
    make_clopen,
    make_ostar,
    make_thinned,
    thinned_seq,
)
from cantorlab.reductions import (
    Matrix01,
    SparseSequence,
    approximate_in_degree,
    bounded_generator,
    doubled,
    doubled_lasso,
    empty_interior_closed,
    empty_interior_witnesses,
    infinite_row_generator,
    large_frontier_regular,
    matrix_from_rows,
    p3_phi,
    p3_reduce_prefix,
    p3_trace,
    pi03_section_code,
    sparse_conditions,
    sparse_sequence,
    supports_counterexample,
    w_from_tree,
    w_identity,
    zero_generator,
)

F = Fraction

# the acceptance workhorse: full base thinned with order n + 3, loss 1/4
EI = empty_interior_closed(FULL, F(1, 4))


def incompatible(a, b):
    return not (a.startswith(b) or b.startswith(a))


def brute_sparse_full(ell, count):
    """Oracle for the full base: pivot = least word in the (length, lex)
    order incompatible with everything removed so far, node = the pivot
    0-padded to max(ell(n), previous length + 1, pivot length)."""
    ts, us = [], []
    for n in range(count):
        u = next(
            w
            for w in words_in_order(24)
            if all(incompatible(w, t) for t in ts)
        )
        need = max(ell.value(n), len(ts[-1]) + 1 if ts else 1, len(u))
        ts.append(u + "0" * (need - len(u)))
        us.append(u)
    return ts, us


class TestSparseSequence:
    def test_matches_oracle_and_frozen_literals(self):
        seq = sparse_sequence(FULL, affine_schedule(2, 2), 3)
        assert seq.nodes == ("00", "1000", "010000")
        assert seq.pivots == ("", "1", "01")
        ts, us = brute_sparse_full(affine_schedule(2, 2), 3)
        assert seq.nodes == tuple(ts)
        assert seq.pivots == tuple(us)

    def test_oracle_agreement_order_two_n(self):
        seq = sparse_sequence(FULL, affine_schedule(2, 0), 6)
        ts, us = brute_sparse_full(affine_schedule(2, 0), 6)
        assert seq.nodes == tuple(ts)
        assert seq.nodes == (
            "0", "10", "1100", "111000", "11010000", "1111000000",
        )
        assert seq.pivots == tuple(us)

    def test_conditions_report_all_hold(self):
        seq = sparse_sequence(FULL, affine_schedule(2, 2), 4)
        report = sparse_conditions(FULL, seq)
        assert report == {
            "dense": True,
            "incompatible": True,
            "increasing": True,
            "order_bound": True,
            "gaps": True,
        }

    def test_removed_mass_dominated_by_order(self):
        ell = affine_schedule(2, 2)
        seq = sparse_sequence(FULL, ell, 5)
        mass = sum((cylinder_measure(t) for t in seq.nodes), F(0))
        bound = sum(F(1, 2 ** ell.value(n)) for n in range(5))
        assert mass <= bound

    def test_clopen_base_respects_tree(self):
        S = make_clopen(["0", "11"])
        seq = sparse_sequence(S, affine_schedule(2, 2), 4)
        assert seq.nodes == ("00", "1100", "010000", "01100000")
        assert seq.pivots == ("", "1", "01", "011")
        for t in seq.nodes + seq.pivots:
            assert exact_measure(localize(S, t)) > 0

    def test_slope_one_gaps_fail(self):
        # consecutive lengths leave no room between removals: the padding
        # condition cannot hold and construction must refuse
        with pytest.raises(DomainError, match="gaps"):
            sparse_sequence(FULL, affine_schedule(1, 3), 3)

    def test_records_shape(self):
        seq = sparse_sequence(FULL, affine_schedule(2, 2), 2)
        assert seq.records() == [
            {"n": 0, "node": "00", "pivot": "", "order": 2},
            {"n": 1, "node": "1000", "pivot": "1", "order": 4},
        ]

    def test_count_zero_and_negative(self):
        seq = sparse_sequence(FULL, affine_schedule(2, 2), 0)
        assert seq.nodes == ()
        with pytest.raises(DomainError):
            sparse_sequence(FULL, affine_schedule(2, 2), -1)

    def test_rejects_inexact_and_null_bases(self):
        with pytest.raises(DomainError):
            sparse_sequence(make_thinned(FULL, affine_schedule(2, 0)),
                            affine_schedule(2, 2), 2)
        with pytest.raises(DomainError):
            sparse_sequence(EMPTY, affine_schedule(2, 2), 1)

    @given(st.sampled_from([(2, 0), (2, 1), (2, 2), (2, 3), (3, 0), (3, 2)]))
    @settings(max_examples=6, deadline=None, derandomize=True)
    def test_structure_across_orders(self, ab):
        ell = affine_schedule(*ab)
        seq = sparse_sequence(FULL, ell, 4)
        ts, us = brute_sparse_full(ell, 4)
        assert seq.nodes == tuple(ts) and seq.pivots == tuple(us)
        assert all(incompatible(a, b)
                   for a, b in itertools.combinations(seq.nodes, 2))
        assert all(len(a) < len(b) for a, b in zip(seq.nodes, seq.nodes[1:]))
        assert all(t.startswith(u)
                   for t, u in zip(seq.nodes, seq.pivots))


class TestEmptyInteriorClosed:
    def test_order_picked_for_quarter(self):
        assert [EI.ell.value(n) for n in range(4)] == [3, 4, 5, 6]

    def test_removed_mass_within_allowance(self):
        iv = measure_interval(EI, 16)
        assert iv.lo == F(3, 4)  # the removal lengths hit n+3 exactly
        assert 1 - iv.lo <= F(1, 4)
        assert iv.hi - iv.lo <= F(1, 2**12)

    def test_root_level_frozen(self):
        assert rho(EI, "").n == 2

    def test_no_surviving_interior_to_depth_four(self):
        wit = empty_interior_witnesses(EI, 4)
        assert len(wit) == 31
        st_seq = thinned_seq(EI)
        for s, i in wit.items():
            t = st_seq.ts[i]
            assert t.startswith(s) or s.startswith(t)

    def test_density_tree_matches_coverage(self):
        # brackets on one side, removal combinatorics on the other
        alive = density_tree(EI, 8)
        st_seq = thinned_seq(EI)
        for s in words_in_order(8):
            assert (s in alive) == (not st_seq.covered(s))

    def test_density_dips_below_every_node(self):
        # below every surviving node the relative measure drops under 3/4:
        # the parent of any removal in the cone has lost at least half
        st_seq = thinned_seq(EI)
        st_seq.ensure_count(192)
        for s in density_tree(EI, 6):
            t = next(t for t in st_seq.ts if t.startswith(s) and len(t) > len(s))
            iv = measure_interval(localize(EI, t[:-1]), 12)
            assert iv.hi < F(3, 4)
        # the level-search route finds such a dip as well
        assert descend_to(EI, "1", 1, 64) == "10"

    def test_clopen_base_keeps_its_mass(self):
        S = make_clopen(["0", "11"])
        e = empty_interior_closed(S, F(1, 8))
        iv = measure_interval(e, 16)
        assert iv.lo == F(5, 8)
        assert exact_measure(S) - iv.lo <= F(1, 8)
        for s, i in empty_interior_witnesses(e, 3).items():
            assert exact_measure(localize(S, s)) > 0

    def test_allowance_validation(self):
        with pytest.raises(DomainError):
            empty_interior_closed(FULL, 0)
        with pytest.raises(DomainError):
            empty_interior_closed(FULL, F(-1, 2))
        assert [empty_interior_closed(FULL, 1).ell.value(n)
                for n in range(2)] == [1, 2]


class TestLargeFrontierRegular:
    def test_open_set_measure_five_sixths(self):
        U = large_frontier_regular()
        iv = measure_interval(U, 16)
        assert iv.hi == F(5, 6)
        assert F(5, 6) - iv.lo <= F(1, 2**13)

    def test_frontier_keeps_one_sixth(self):
        T = make_thinned(FULL, affine_schedule(2, 0))
        iv = measure_interval(T, 16)
        assert iv.lo == F(1, 6)
        assert iv.hi - F(1, 6) <= F(1, 2**13)

    def test_relative_density_bound_on_frontier(self):
        # below every surviving node the open part never exceeds 2/3
        U = large_frontier_regular()
        T = make_thinned(FULL, affine_schedule(2, 0))
        alive = density_tree(T, 8)
        assert len(alive) == 90
        for s in alive:
            if not s:
                continue
            assert measure_interval(localize(U, s), 16).hi <= F(2, 3)
        assert measure_interval(localize(T, "1"), 16).lo == F(1, 3)
        assert measure_interval(localize(T, "11"), 16).lo == F(2, 3)

    def test_density_verdicts_split(self):
        U = large_frontier_regular()
        # inside the first removed cone the open set is everything
        assert density_verdict(U, lasso("", "0"), 32) == TO1
        # along the all-ones spine the frontier soaks up all the density
        assert density_verdict(U, lasso("", "1"), 32) == TO0
        assert density_verdict(U, lasso("", "10"), 48) == TO1


class TestSupportsCounterexample:
    def test_report(self):
        A, B, rep = supports_counterexample()
        assert rep.depth == 8
        assert rep.no_allout
        assert rep.inner_match
        assert rep.inner == frozenset(
            {"0", "10", "1100", "111000", "11010000"}
        )
        # same supports data, yet certified apart in the measure algebra
        assert rep.distance.lo > F(1, 16)
        assert F(89, 1000) < rep.removed_mass.lo
        assert rep.removed_mass.hi < F(9, 100)
        assert rep.distance.lo <= rep.removed_mass.hi
        assert rep.removed_mass.lo <= rep.distance.hi
        # inside a removed cone both sets have full relative measure
        assert measure_interval(localize(A, "0"), 4).lo == 1
        assert measure_interval(localize(B, "0"), 4).lo == 1


class TestWConstruction:
    T = make_clopen(["0"])

    def test_identity_frozen_targets(self):
        expect = {"": F(1, 2), "0": F(1), "01": F(1), "110": F(0)}
        for t, want in expect.items():
            r = w_identity(self.T, t, levels=8)
            assert r["target"] == want
            assert r["levels_match"] and r["series_match"] and r["bracketed"]
            assert r["partial"] + r["tail"] == want

    def test_identity_all_nodes_to_depth_twelve(self):
        T2 = make_clopen(["1", "00"])
        for t in words_in_order(6):  # doubled depth up to 12
            r = w_identity(T2, t, levels=6)
            assert r["levels_match"] and r["series_match"] and r["bracketed"]

    def test_measure_equals_tree_measure(self):
        W = w_from_tree(self.T)
        iv = measure_interval(W, 14)
        assert iv.lo == F(127, 256) and iv.hi == F(1, 2)

    def test_density_verdicts_agree_on_fifty_lassos(self):
        W = w_from_tree(self.T)
        pts = list(itertools.islice(lassos_in_order(4, 3), 50))
        assert len(pts) == 50
        for x in pts:
            assert density_verdict(self.T, x, 48) == density_verdict(
                W, doubled_lasso(x), 96
            )

    def test_rejects_inexact_tree_and_degenerates(self):
        with pytest.raises(DomainError):
            w_from_tree(make_thinned(FULL, affine_schedule(2, 0)))
        assert w_from_tree(EMPTY) == EMPTY

    def test_doubled_words(self):
        assert doubled("") == ""
        assert doubled("011") == "001111"
        with pytest.raises(DomainError):
            doubled("0x1")

    @given(st.builds(lasso, st.text(alphabet="01", max_size=4),
                     st.text(alphabet="01", min_size=1, max_size=3)),
           st.integers(0, 12))
    @settings(max_examples=60, deadline=None, derandomize=True)
    def test_doubled_lasso_bits(self, x, i):
        y = doubled_lasso(x)
        assert y.bit(2 * i) == y.bit(2 * i + 1) == x.bit(i)


class TestSectionCodes:
    def test_frozen_clopen_sections(self):
        e = make_clopen(["0", "11"])
        secs = pi03_section_code(e, 1, 2, 4)
        assert [c.terminals for c in secs] == [
            [""], [""], ["0", "11"], ["0", "11"], ["0", "11"],
        ]

    def test_frozen_slot_union_sections(self):
        secs = pi03_section_code(make_ostar(F(3, 5)), 0, 0, 5)
        assert [c.terminals for c in secs] == [
            [""], ["1"], ["1"], ["1", "000"], ["1", "000"],
            ["1", "0001", "00001"],
        ]

    def test_membership_matches_interval_route(self):
        e = make_ostar(F(3, 5))
        thr = 1 - F(1, 2)
        secs = pi03_section_code(e, 0, 1, 4)
        for m in range(1, 5):
            tree = secs[m]
            assert tree.max_len() <= m
            for bits in itertools.product("01", repeat=m):
                w = "".join(bits)
                iv = measure_interval(localize(e, w), 4)
                inside = not tree.localize(w).is_empty()
                assert inside == (iv.lo > thr)

    def test_validation(self):
        with pytest.raises(DomainError):
            pi03_section_code(make_thinned(FULL, affine_schedule(2, 0)),
                              1, 0, 2)
        with pytest.raises(DomainError):
            pi03_section_code(FULL, -1, 0, 2)


class TestMatrix01:
    def test_finite_entry_access(self):
        a = matrix_from_rows([[0, 1], [1, 0]])
        assert a.order == 2 and not a.generator
        assert a.entry(0, 1) == 1 and a.entry(1, 1) == 0
        with pytest.raises(DomainError):
            a.entry(2, 0)
        with pytest.raises(DomainError):
            a.entry(0, -1)

    def test_generator_entries(self):
        z = bounded_generator((1, 2))
        assert [z.entry(0, j) for j in range(4)] == [1, 0, 0, 0]
        assert [z.entry(1, j) for j in range(4)] == [1, 1, 0, 0]
        assert z.entry(7, 0) == 0
        r = infinite_row_generator(2, (1, 0))
        assert [r.entry(2, j) for j in range(5)] == [1] * 5
        assert r.entry(0, 0) == 1 and r.entry(1, 0) == 0

    def test_prefix_corner(self):
        z = bounded_generator((1, 2))
        assert z.prefix(3).rows == ((1, 0, 0), (1, 1, 0), (0, 0, 0))
        assert z.prefix(0).rows == ()

    def test_membership_and_bounds(self):
        assert zero_generator().in_p3
        assert bounded_generator((1, 2)).in_p3
        assert not infinite_row_generator(0).in_p3
        with pytest.raises(DomainError):
            matrix_from_rows([[0]]).in_p3
        z = bounded_generator((1, 2))
        assert zero_generator().p3_bound(5) == 0
        assert z.p3_bound(0) == 2
        assert z.p3_bound(1) == 3
        assert z.p3_bound(9) == 3
        with pytest.raises(DomainError):
            infinite_row_generator(0).p3_bound(1)

    def test_shape_validation(self):
        with pytest.raises(DomainError):
            Matrix01(order=2, rows=((0, 1),))
        with pytest.raises(DomainError):
            matrix_from_rows([[0, 2], [0, 0]])
        with pytest.raises(DomainError):
            Matrix01(generator=True, rows=((0,),), order=1)
        with pytest.raises(DomainError):
            Matrix01(generator=True, ones_row=2, bounds=(1,))


class TestP3Reduction:
    def test_phi_frozen_values(self):
        assert p3_phi(EI, matrix_from_rows([])) == ""
        assert p3_phi(EI, matrix_from_rows([[0]])) == "0"
        assert p3_phi(EI, matrix_from_rows([[1]])) == "00"
        assert p3_phi(EI, matrix_from_rows([[0, 0], [0, 0]])) == "01"

    def test_phi_level_semantics(self):
        # an all-zero column climbs exactly one band above the root
        node = p3_phi(EI, matrix_from_rows([[0]]))
        assert rho(EI, node).n == 1 and rho(EI, "").n == 2
        # a 1 in row zero descends to band zero, pinned exactly
        down = p3_phi(EI, matrix_from_rows([[1]]))
        assert rho(EI, down).n == 0

    def test_phi_prefix_monotone(self):
        full = p3_phi(EI, matrix_from_rows([[0, 0], [0, 0]]))
        one = p3_phi(EI, matrix_from_rows([[0, 0], [0, 0]]).prefix(1))
        assert full.startswith(one) and len(one) < len(full)

    def test_zero_generator_drives_level_up(self):
        tr = p3_trace(EI, zero_generator(), 24)
        assert [s.status for s in tr] == ["ok"] * 24
        assert [s.level_lb for s in tr] == list(range(1, 25))
        nodes = [s.node for s in tr]
        assert all(b.startswith(a) and len(b) == len(a) + 1
                   for a, b in zip(nodes, nodes[1:]))
        assert all(level_at_least(EI, s.node, s.level_lb) for s in tr[:8])

    def test_bounded_generators_recover(self):
        for bounds in [(1,), (1, 2), (2, 2)]:
            z = bounded_generator(bounds)
            tr = p3_trace(EI, z, 24)
            assert [s.status for s in tr] == ["ok"] * 24
            assert tr[-1].level_lb == 24
            # past the recorded bound every step certifies at least k
            for k in (1, 2, 3):
                n = max(k, z.p3_bound(k))
                assert all(s.level_lb >= k for s in tr[n:])

    def test_infinite_row_pins_level_zero(self):
        tr = p3_trace(EI, infinite_row_generator(0), 6)
        assert [s.node for s in tr[:2]] == ["00", "001000"]
        assert [s.level_exact for s in tr[:3]] == [0, 0, 0]
        assert len(tr[2].node) == 55
        assert tr[3].status == "exhausted"
        returns = [s for s in tr if s.status == "ok" and s.level_exact == 0]
        assert len(returns) >= 3

    def test_reduce_prefix_equals_phi_of_corner(self):
        z = bounded_generator((1, 2))
        for n in (0, 1, 3):
            assert p3_reduce_prefix(EI, z, n) == p3_phi(EI, z.prefix(n))

    def test_honest_failures(self):
        with pytest.raises(PrecisionError):
            p3_phi(EI, infinite_row_generator(0).prefix(6))
        with pytest.raises(DomainError, match="no level index"):
            p3_phi(FULL, matrix_from_rows([[0]]))
        with pytest.raises(DomainError, match="nonempty"):
            p3_phi(EMPTY, matrix_from_rows([[0]]))
        with pytest.raises(DomainError):
            p3_phi(EI, zero_generator())
        with pytest.raises(DomainError):
            p3_reduce_prefix(EI, matrix_from_rows([[0]]), 1)
        with pytest.raises(DomainError):
            p3_trace(EI, zero_generator(), -1)

    def test_clopen_root_frozen_traces(self):
        e = make_clopen(["1", "00", "010", "011000"])  # level 3 at the root
        tr = p3_trace(e, zero_generator(), 4)
        assert [(s.node, s.level_lb) for s in tr] == [
            ("0", 1), ("00", 2), ("000", 3), ("0000", 4),
        ]
        # interior cylinders end the walk honestly: below a full cone no
        # node ever drops back down
        tr2 = p3_trace(e, bounded_generator((2,)), 4)
        assert [(s.node, s.level_lb, s.status) for s in tr2] == [
            ("011", 0, "ok"), ("01100", 1, "exhausted"),
        ]

    @given(st.tuples(*[st.integers(0, 1)] * 4))
    @settings(max_examples=12, deadline=None, derandomize=True)
    def test_phi_prefix_property(self, bits):
        rows = [[bits[0], bits[1]], [bits[2], bits[3]]]
        a = matrix_from_rows(rows)
        full = p3_phi(EI, a)
        assert full.startswith(p3_phi(EI, a.prefix(1)))


class TestApproximateInDegree:
    def test_full_target_frozen_shape(self):
        B = make_clopen(["101"])
        out = approximate_in_degree(FULL, F(1, 4), B)
        assert isinstance(out, DisjointExtend)
        assert out.dom == clopen_not_cyl("1111")
        assert out.t == "1111"
        assert out.attach == B
        assert cylinder_measure(out.t) < F(1, 8)

    def test_distance_certified_below_eps(self):
        targets = [FULL, EMPTY, make_clopen(["0", "110"]),
                   double_set(make_clopen(["0"]))]
        for target in targets:
            for eps in (F(1, 4), F(1, 16)):
                out = approximate_in_degree(target, eps, make_clopen(["101"]))
                assert malg_distance(target, out, eps / 4).hi < eps

    def test_attachment_is_irrelevant_to_distance(self):
        target = make_clopen(["0", "110"])
        for B in (EMPTY, FULL, make_ostar(F(3, 5))):
            out = approximate_in_degree(target, F(1, 8), B)
            assert out.attach == B
            assert malg_distance(target, out, F(1, 32)).hi < F(1, 8)

    def test_core_never_full_and_slot_outside(self):
        for target in (FULL, make_clopen(["0"])):
            out = approximate_in_degree(target, F(1, 4), EMPTY)
            assert not out.dom.is_full()
            assert out.dom.localize(out.t).is_empty()

    def test_validation(self):
        with pytest.raises(DomainError):
            approximate_in_degree(FULL, 0, EMPTY)
        with pytest.raises(DomainError):
            approximate_in_degree(
                make_thinned(FULL, affine_schedule(2, 0)), F(1, 4), EMPTY
            )
