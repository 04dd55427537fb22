"""Event-application kernels: swap semantics, backends, coupled checks.

A deliberately naive single-event reference implementation lives in this
file; both the pure-Python and the compiled kernels must reproduce it
exactly on adversarial random inputs, and must agree with each other on
every exported entry point including the early-exit coupled scans.
"""

import numpy as np
import pytest

from aseplab import _kernel_py
from aseplab.clocks import make_rates, sample_clock_window
from aseplab.kernel import BACKEND, HOLE

_compiled = pytest.importorskip("aseplab._kernel", reason="compiled extension not built")

BACKENDS = {"python": _kernel_py, "compiled": _compiled}


def reference_apply(labels, lo, sites, dirs, start, stop):
    """One event at a time: occupant jumps onto its neighbor iff its class
    number is strictly smaller; jumps leaving the window are discarded."""
    lab = [int(v) for v in labels]
    n = len(lab)
    for i in range(start, stop):
        idx = int(sites[i]) - lo
        tgt = idx + (1 if dirs[i] == 1 else -1)
        if 0 <= tgt < n and lab[idx] < lab[tgt]:
            lab[idx], lab[tgt] = lab[tgt], lab[idx]
    return np.array(lab, dtype=np.int32)


def random_case(rng, n_sites=24, n_events=400, classes=(1, 2, 3)):
    lo = int(rng.integers(-50, 50))
    pool = np.array(list(classes) + [HOLE], dtype=np.int32)
    labels = pool[rng.integers(0, len(pool), size=n_sites)]
    sites = rng.integers(lo, lo + n_sites, size=n_events).astype(np.int64)
    dirs = (rng.random(n_events) < 0.5).astype(np.int8)
    return labels, lo, sites, dirs


class TestSwapSemantics:
    def test_hole_is_int32_max(self):
        assert HOLE == np.iinfo(np.int32).max
        assert _kernel_py.HOLE == _compiled.HOLE == HOLE

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_matches_reference_on_random_streams(self, name):
        mod = BACKENDS[name]
        rng = np.random.default_rng(2024)
        for _ in range(30):
            labels, lo, sites, dirs = random_case(rng)
            expect = reference_apply(labels, lo, sites, dirs, 0, len(sites))
            got = labels.copy()
            mod.apply_events(got, lo, sites, dirs, 0, len(sites))
            assert np.array_equal(got, expect)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_event_subranges(self, name):
        # applying [0, k) then [k, n) equals applying [0, n) in one call
        mod = BACKENDS[name]
        rng = np.random.default_rng(5)
        labels, lo, sites, dirs = random_case(rng, n_events=300)
        whole = labels.copy()
        mod.apply_events(whole, lo, sites, dirs, 0, 300)
        split = labels.copy()
        mod.apply_events(split, lo, sites, dirs, 0, 120)
        mod.apply_events(split, lo, sites, dirs, 120, 300)
        assert np.array_equal(whole, split)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_closed_boundary_discards_outward_jumps(self, name):
        mod = BACKENDS[name]
        labels = np.array([1, HOLE, 2], dtype=np.int32)
        sites = np.array([2, 0], dtype=np.int64)   # rightmost right, leftmost left
        dirs = np.array([1, 0], dtype=np.int8)
        got = labels.copy()
        mod.apply_events(got, 0, sites, dirs, 0, 2)
        assert np.array_equal(got, labels)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_class_hierarchy(self, name):
        # lower class number displaces higher; equal classes block
        mod = BACKENDS[name]
        for a, b, swaps in [(1, HOLE, True), (1, 2, True), (2, 1, False),
                            (HOLE, 1, False), (2, 2, False)]:
            lab = np.array([a, b], dtype=np.int32)
            mod.apply_events(lab, 0, np.array([0], dtype=np.int64),
                             np.array([1], dtype=np.int8), 0, 1)
            expect = [b, a] if swaps else [a, b]
            assert lab.tolist() == expect, (a, b)

    def test_conservation_of_class_counts(self):
        rng = np.random.default_rng(8)
        labels, lo, sites, dirs = random_case(rng, n_events=2000)
        before = np.sort(labels.copy())
        _kernel_py.apply_events(labels, lo, sites, dirs, 0, 2000)
        assert np.array_equal(np.sort(labels), before)


class TestBackendEquivalence:
    def test_apply_events_identical(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            labels, lo, sites, dirs = random_case(rng, n_sites=40, n_events=1500)
            a, b = labels.copy(), labels.copy()
            _kernel_py.apply_events(a, lo, sites, dirs, 0, len(sites))
            _compiled.apply_events(b, lo, sites, dirs, 0, len(sites))
            assert np.array_equal(a, b)

    def test_apply_events_on_real_clock(self):
        rates = make_rates(1.5, 0.5)
        clock = sample_clock_window(rates, -30, 30, 10.0, seed=21)
        labels = np.where(np.arange(-30, 31) <= 0, 1, HOLE).astype(np.int32)
        a, b = labels.copy(), labels.copy()
        _kernel_py.apply_events(a, clock.lo, clock.sites, clock.directions, 0, clock.n_events)
        _compiled.apply_events(b, clock.lo, clock.sites, clock.directions, 0, clock.n_events)
        assert np.array_equal(a, b)

    def test_batch_identical_and_matches_loop(self):
        rng = np.random.default_rng(123)
        n_rows, n_sites = 16, 20
        labels2d = np.where(rng.random((n_rows, n_sites)) < 0.5, 1, HOLE).astype(np.int32)
        lo = -7
        counts = rng.integers(0, 200, size=n_rows)
        offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        total = int(offsets[-1])
        sites = rng.integers(lo, lo + n_sites, size=total).astype(np.int64)
        dirs = (rng.random(total) < 0.6).astype(np.int8)

        py = labels2d.copy()
        cy = labels2d.copy()
        _kernel_py.apply_events_batch(py, lo, sites, dirs, offsets)
        _compiled.apply_events_batch(cy, lo, sites, dirs, offsets)
        assert np.array_equal(py, cy)
        for r in range(n_rows):
            row = labels2d[r].copy()
            _kernel_py.apply_events(row, lo, sites, dirs, int(offsets[r]), int(offsets[r + 1]))
            assert np.array_equal(py[r], row)

    def test_coupled_order_scan_identical(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n_sites, n_events = 18, 600
            lo = -4
            # ordered pair: b occupies a superset of a's sites
            occ_b = rng.random(n_sites) < 0.6
            occ_a = occ_b & (rng.random(n_sites) < 0.7)
            la = np.where(occ_a, 1, HOLE).astype(np.int32)
            lb = np.where(occ_b, 1, HOLE).astype(np.int32)
            sites = rng.integers(lo, lo + n_sites, size=n_events).astype(np.int64)
            dirs = (rng.random(n_events) < 0.5).astype(np.int8)
            # 0: first member only, 1: second only, 2: shared
            member = rng.integers(0, 3, size=n_events).astype(np.int8)

            a1, b1 = la.copy(), lb.copy()
            a2, b2 = la.copy(), lb.copy()
            h1 = _kernel_py.coupled_order_first_violation(
                a1, b1, lo, sites, dirs, 0, n_events, member)
            h2 = _compiled.coupled_order_first_violation(
                a2, b2, lo, sites, dirs, 0, n_events, member)
            assert h1 == h2
            assert np.array_equal(a1, a2) and np.array_equal(b1, b2)

    def test_coupled_height_scan_identical(self):
        rng = np.random.default_rng(70)
        for mode in (0, 1):
            for _ in range(10):
                n_sites, n_events = 14, 500
                lo = 0
                la = np.where(rng.random(n_sites) < 0.5, 1, HOLE).astype(np.int32)
                lb = np.where(rng.random(n_sites) < 0.5, 1, HOLE).astype(np.int32)
                d = np.cumsum((la != HOLE).astype(np.int64) - (lb != HOLE))[:-1]
                if mode == 0:
                    d = d - d.min()  # nonneg gap so the premise can hold
                sites = rng.integers(lo, lo + n_sites, size=n_events).astype(np.int64)
                dirs = (rng.random(n_events) < 0.5).astype(np.int8)
                member = rng.integers(0, 3, size=n_events).astype(np.int8)
                bound = int(max(d.max(), -d.min() if mode else 0) + 1)

                a1, b1, d1 = la.copy(), lb.copy(), d.copy()
                a2, b2, d2 = la.copy(), lb.copy(), d.copy()
                h1 = _kernel_py.coupled_height_first_violation(
                    a1, b1, lo, sites, dirs, 0, n_events, d1, mode, bound, member)
                h2 = _compiled.coupled_height_first_violation(
                    a2, b2, lo, sites, dirs, 0, n_events, d2, mode, bound, member)
                assert h1 == h2
                assert np.array_equal(a1, a2) and np.array_equal(b1, b2)


class TestCoupledScanSemantics:
    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_shared_events_never_violate_order(self, name):
        mod = BACKENDS[name]
        rng = np.random.default_rng(31)
        for _ in range(20):
            labels, lo, sites, dirs = random_case(rng, n_sites=30, n_events=800,
                                                  classes=(1,))
            la = labels.copy()
            lb = labels.copy()
            extra = rng.random(30) < 0.3
            lb[extra] = 1  # superset of la
            hit = mod.coupled_order_first_violation(
                la, lb, lo, sites, dirs, 0, len(sites), None)
            assert hit == -1
            assert np.all((la == HOLE) | (lb != HOLE))

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_decoupled_events_do_violate(self, name):
        # negative control: events applied to one member only break the
        # ordering eventually, and the reported index replays exactly
        mod = BACKENDS[name]
        rng = np.random.default_rng(13)
        lo, n_sites, n_events = 0, 12, 400
        occ = rng.random(n_sites) < 0.5
        la = np.where(occ, 1, HOLE).astype(np.int32)
        lb = la.copy()
        sites = rng.integers(lo, lo + n_sites, size=n_events).astype(np.int64)
        dirs = (rng.random(n_events) < 0.5).astype(np.int8)
        member = rng.integers(0, 2, size=n_events).astype(np.int8)

        ca, cb = la.copy(), lb.copy()
        hit = mod.coupled_order_first_violation(
            ca, cb, lo, sites, dirs, 0, n_events, member)
        assert hit >= 0
        # replay with the reference, one member at a time, up to the hit
        sel_a = member[: hit + 1] != 1
        sel_b = member[: hit + 1] != 0
        ra = reference_apply(la, lo, sites[: hit + 1][sel_a], dirs[: hit + 1][sel_a],
                             0, int(sel_a.sum()))
        rb = reference_apply(lb, lo, sites[: hit + 1][sel_b], dirs[: hit + 1][sel_b],
                             0, int(sel_b.sum()))
        assert np.array_equal(ca, ra) and np.array_equal(cb, rb)
        # the violation is real: somewhere a is occupied where b is not
        assert np.any((ra != HOLE) & (rb == HOLE))

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_height_scan_premise_rejection(self, name):
        mod = BACKENDS[name]
        la = np.array([1, HOLE, 1], dtype=np.int32)
        lb = np.array([HOLE, 1, 1], dtype=np.int32)
        d = np.array([1, 0], dtype=np.int64)  # gap already above bound 0
        hit = mod.coupled_height_first_violation(
            la.copy(), lb.copy(), 0, np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int8), 0, 0, d, 1, 0, None)
        assert hit == -2

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_height_scan_identical_members_stay_tight(self, name):
        mod = BACKENDS[name]
        rng = np.random.default_rng(17)
        labels, lo, sites, dirs = random_case(rng, n_sites=20, n_events=700, classes=(1,))
        la, lb = labels.copy(), labels.copy()
        d = np.zeros(19, dtype=np.int64)
        hit = mod.coupled_height_first_violation(
            la, lb, lo, sites, dirs, 0, 700, d, 1, 0, None)
        assert hit == -1
        assert np.array_equal(la, lb)

    def test_dispatch_exports_one_of_the_backends(self):
        assert BACKEND in BACKENDS
