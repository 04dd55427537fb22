# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event-application kernels.

Semantics contract shared with the pure Python twin ``_kernel_py``:
labels are int32 site occupants, holes encoded as HOLE (int32 max) so the
swap rule is a single strict comparison. An arrow at ``site`` moves its
occupant one step in ``direction`` iff the occupant's label is strictly
smaller than the target's; arrows pointing out of the window are ignored.
"""

import numpy as np

cimport numpy as cnp

HOLE = 2147483647

cdef int HOLE_C = 2147483647


cpdef void apply_events(
    int[::1] labels,
    long long lo,
    const long long[::1] sites,
    const signed char[::1] dirs,
    long long start,
    long long stop,
) noexcept:
    """Apply events [start, stop) in order to one configuration."""
    cdef long long i, idx, tgt
    cdef long long n = labels.shape[0]
    cdef int a, b
    for i in range(start, stop):
        idx = sites[i] - lo
        if dirs[i] == 1:
            tgt = idx + 1
            if tgt >= n:
                continue
        else:
            tgt = idx - 1
            if tgt < 0:
                continue
        a = labels[idx]
        b = labels[tgt]
        if a < b:
            labels[idx] = b
            labels[tgt] = a


cpdef void apply_events_batch(
    int[:, ::1] labels2d,
    long long lo,
    const long long[::1] sites,
    const signed char[::1] dirs,
    long long[::1] offsets,
) noexcept:
    """Row r of labels2d receives events [offsets[r], offsets[r+1])."""
    cdef long long r
    for r in range(labels2d.shape[0]):
        apply_events(labels2d[r], lo, sites, dirs, offsets[r], offsets[r + 1])


cpdef long long coupled_order_first_violation(
    int[::1] la,
    int[::1] lb,
    long long lo,
    const long long[::1] sites,
    const signed char[::1] dirs,
    long long start,
    long long stop,
    member=None,
):
    """Drive two configurations and watch pointwise occupation ordering.

    Maintains occ(la) <= occ(lb) sitewise while applying events; returns the
    absolute index of the first event after which the ordering fails, or -1.
    ``member`` (int8 per event: 0 apply to A, 1 to B, 2 both) defaults to a
    shared clock driving both members.
    """
    cdef long long i, idx, tgt
    cdef long long n = la.shape[0]
    cdef int a1, a2, b1, b2
    cdef bint to_a, to_b, have_member = member is not None
    cdef const signed char[::1] mem
    if have_member:
        mem = member
    for i in range(start, stop):
        idx = sites[i] - lo
        if dirs[i] == 1:
            tgt = idx + 1
            if tgt >= n:
                continue
        else:
            tgt = idx - 1
            if tgt < 0:
                continue
        if have_member:
            to_a = mem[i] != 1
            to_b = mem[i] != 0
        else:
            to_a = True
            to_b = True
        if to_a:
            a1 = la[idx]
            a2 = la[tgt]
            if a1 < a2:
                la[idx] = a2
                la[tgt] = a1
        if to_b:
            b1 = lb[idx]
            b2 = lb[tgt]
            if b1 < b2:
                lb[idx] = b2
                lb[tgt] = b1
        if (la[idx] != HOLE_C and lb[idx] == HOLE_C) or (
            la[tgt] != HOLE_C and lb[tgt] == HOLE_C
        ):
            return i
    return -1


cpdef long long coupled_height_first_violation(
    int[::1] la,
    int[::1] lb,
    long long lo,
    const long long[::1] sites,
    const signed char[::1] dirs,
    long long start,
    long long stop,
    long long[::1] d,
    int mode,
    long long bound,
    member=None,
):
    """Drive two configurations tracking their height difference field.

    ``d[x - lo]`` holds h_A(x) - h_B(x) for x in [lo, hi-1] (interior bond
    heights; the two boundary values are constants the caller checks once).
    mode 0 watches max d <= bound, mode 1 watches |d| <= bound. Returns the
    absolute index of the first event after which the watched inequality
    fails, or -1. Heights move by the net particle current: a particle
    crossing bond (x, x+1) rightward raises h(x) by one.
    """
    cdef long long i, idx, tgt, nd = d.shape[0]
    cdef long long n = la.shape[0]
    cdef int a1, a2, b1, b2, delta
    cdef bint to_a, to_b, have_member = member is not None
    cdef const signed char[::1] mem
    cdef long long old, new, bond
    if have_member:
        mem = member
    if nd == 0:
        apply_events(la, lo, sites, dirs, start, stop)
        apply_events(lb, lo, sites, dirs, start, stop)
        return -1

    # histogram of d values with running extrema; |d| <= 2n always
    cdef long long off = 2 * n + 2
    counts_np = np.zeros(4 * n + 5, dtype=np.int64)
    cdef long long[::1] counts = counts_np
    cdef long long curmax = d[0], curmin = d[0]
    for i in range(nd):
        counts[d[i] + off] += 1
        if d[i] > curmax:
            curmax = d[i]
        if d[i] < curmin:
            curmin = d[i]
    if mode == 0:
        if curmax > bound:
            return -2  # premise already broken at entry; caller screens this
    else:
        if curmax > bound or curmin < -bound:
            return -2

    for i in range(start, stop):
        idx = sites[i] - lo
        if dirs[i] == 1:
            tgt = idx + 1
            if tgt >= n:
                continue
            bond = idx
        else:
            tgt = idx - 1
            if tgt < 0:
                continue
            bond = tgt
        if have_member:
            to_a = mem[i] != 1
            to_b = mem[i] != 0
        else:
            to_a = True
            to_b = True
        delta = 0
        if to_a:
            a1 = la[idx]
            a2 = la[tgt]
            if a1 < a2:
                la[idx] = a2
                la[tgt] = a1
                delta += 1 if dirs[i] == 1 else -1
        if to_b:
            b1 = lb[idx]
            b2 = lb[tgt]
            if b1 < b2:
                lb[idx] = b2
                lb[tgt] = b1
                delta -= 1 if dirs[i] == 1 else -1
        if delta != 0:
            old = d[bond]
            new = old + delta
            d[bond] = new
            counts[old + off] -= 1
            counts[new + off] += 1
            if new > curmax:
                curmax = new
            elif old == curmax and counts[old + off] == 0:
                while counts[curmax + off] == 0:
                    curmax -= 1
            if new < curmin:
                curmin = new
            elif old == curmin and counts[old + off] == 0:
                while counts[curmin + off] == 0:
                    curmin += 1
            if mode == 0:
                if curmax > bound:
                    return i
            else:
                if curmax > bound or curmin < -bound:
                    return i
    return -1
