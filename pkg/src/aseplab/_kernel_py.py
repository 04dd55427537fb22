"""Pure Python twin of the compiled event kernels.

Same semantics as ``_kernel.pyx``, interpreted speed. Selected automatically
when the extension is unavailable, or explicitly via ASEPLAB_KERNEL=python.
Trajectories are bit-identical across the two backends because all
randomness is generated upstream; these loops only apply integer events.
"""

from __future__ import annotations

import numpy as np

HOLE = 2147483647


def apply_events(labels, lo, sites, dirs, start, stop):
    """Apply events [start, stop) in order to one configuration."""
    lab = labels.tolist()
    n = len(lab)
    site_l = sites.tolist()
    dir_l = dirs.tolist()
    for i in range(start, stop):
        idx = site_l[i] - lo
        if dir_l[i] == 1:
            tgt = idx + 1
            if tgt >= n:
                continue
        else:
            tgt = idx - 1
            if tgt < 0:
                continue
        a = lab[idx]
        b = lab[tgt]
        if a < b:
            lab[idx] = b
            lab[tgt] = a
    labels[:] = lab


def apply_events_batch(labels2d, lo, sites, dirs, offsets):
    """Row r of labels2d receives events [offsets[r], offsets[r+1])."""
    for r in range(labels2d.shape[0]):
        apply_events(labels2d[r], lo, sites, dirs, int(offsets[r]), int(offsets[r + 1]))


def _targets(idx, direction, n):
    if direction == 1:
        tgt = idx + 1
        return tgt if tgt < n else None
    tgt = idx - 1
    return tgt if tgt >= 0 else None


def coupled_order_first_violation(la, lb, lo, sites, dirs, start, stop, member=None):
    """See the compiled twin. Returns first violating event index or -1."""
    a = la.tolist()
    b = lb.tolist()
    n = len(a)
    site_l = sites.tolist()
    dir_l = dirs.tolist()
    mem_l = member.tolist() if member is not None else None
    hit = -1
    for i in range(start, stop):
        idx = site_l[i] - lo
        tgt = _targets(idx, dir_l[i], n)
        if tgt is None:
            continue
        to_a = mem_l is None or mem_l[i] != 1
        to_b = mem_l is None or mem_l[i] != 0
        if to_a and a[idx] < a[tgt]:
            a[idx], a[tgt] = a[tgt], a[idx]
        if to_b and b[idx] < b[tgt]:
            b[idx], b[tgt] = b[tgt], b[idx]
        if (a[idx] != HOLE and b[idx] == HOLE) or (a[tgt] != HOLE and b[tgt] == HOLE):
            hit = i
            break
    la[:] = a
    lb[:] = b
    return hit


def coupled_height_first_violation(
    la, lb, lo, sites, dirs, start, stop, d, mode, bound, member=None
):
    """See the compiled twin. Returns first violating event index, -1, or -2."""
    n = la.shape[0]
    if d.shape[0] == 0:
        apply_events(la, lo, sites, dirs, start, stop)
        apply_events(lb, lo, sites, dirs, start, stop)
        return -1
    dmax = int(d.max())
    dmin = int(d.min())
    if (mode == 0 and dmax > bound) or (mode == 1 and (dmax > bound or dmin < -bound)):
        return -2

    a = la.tolist()
    b = lb.tolist()
    dd = d.tolist()
    counts: dict[int, int] = {}
    for v in dd:
        counts[v] = counts.get(v, 0) + 1
    site_l = sites.tolist()
    dir_l = dirs.tolist()
    mem_l = member.tolist() if member is not None else None
    hit = -1
    for i in range(start, stop):
        idx = site_l[i] - lo
        di = dir_l[i]
        tgt = _targets(idx, di, n)
        if tgt is None:
            continue
        bond = idx if di == 1 else tgt
        to_a = mem_l is None or mem_l[i] != 1
        to_b = mem_l is None or mem_l[i] != 0
        delta = 0
        if to_a and a[idx] < a[tgt]:
            a[idx], a[tgt] = a[tgt], a[idx]
            delta += 1 if di == 1 else -1
        if to_b and b[idx] < b[tgt]:
            b[idx], b[tgt] = b[tgt], b[idx]
            delta -= 1 if di == 1 else -1
        if delta:
            old = dd[bond]
            new = old + delta
            dd[bond] = new
            counts[old] -= 1
            counts[new] = counts.get(new, 0) + 1
            if new > dmax:
                dmax = new
            elif old == dmax and counts[old] == 0:
                while counts.get(dmax, 0) == 0:
                    dmax -= 1
            if new < dmin:
                dmin = new
            elif old == dmin and counts[old] == 0:
                while counts.get(dmin, 0) == 0:
                    dmin += 1
            if (mode == 0 and dmax > bound) or (
                mode == 1 and (dmax > bound or dmin < -bound)
            ):
                hit = i
                break
    la[:] = a
    lb[:] = b
    d[:] = dd
    return hit
