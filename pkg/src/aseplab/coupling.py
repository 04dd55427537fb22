"""Couplings of exclusion processes sharing one arrow field.

Driving several configurations with the same clock realizes the basic
coupling. The checks here are pathwise: the kernels watch their invariant
after every single event and report the first violation (time, site, event
index), so a passing run certifies the whole trajectory, not a sample of
checkpoint times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .clocks import ClockWindow, JumpRates
from .core import SpeciesConfig, exact_distribution, exact_generator, validity_region
from .errors import (
    DominationBroken,
    InadmissibleAlpha,
    NotInitiallyOrdered,
    PremiseViolatedAtTimeZero,
    StateSpaceTooLarge,
    WindowMismatch,
)
from .height import height_initial
from .kernel import (
    HOLE,
    apply_events,
    coupled_height_first_violation,
    coupled_order_first_violation,
)


@dataclass(eq=False)
class CoupledRun:
    """Several configurations bound to one clock window."""

    clock: ClockWindow
    members: list[SpeciesConfig]


@dataclass(eq=False)
class CouplingReport:
    """Outcome of a pathwise check along one clock realization."""

    passed: bool
    property_name: str
    n_events: int
    first_violation: dict | None
    final: tuple[SpeciesConfig, SpeciesConfig] | None = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass(eq=False)
class SecondClassSet:
    """Domination decomposition: zeta = eta plus discrepancy particles.

    ``z`` holds the discrepancy positions in decreasing order, so z[0] is
    the rightmost.
    """

    eta: SpeciesConfig
    alpha: np.ndarray
    z: np.ndarray

    @property
    def n(self) -> int:
        return int(self.z.shape[0])


def couple(configs: list[SpeciesConfig], clock: ClockWindow) -> CoupledRun:
    """Bind configurations to one clock (windows must agree exactly)."""
    for c in configs:
        if (c.lo, c.hi) != (clock.lo, clock.hi):
            raise WindowMismatch(
                f"member window [{c.lo}, {c.hi}] vs clock [{clock.lo}, {clock.hi}]"
            )
    return CoupledRun(clock=clock, members=[c.copy() for c in configs])


def _violation_dict(clock: ClockWindow, idx: int) -> dict:
    return {
        "event_index": int(idx),
        "time": float(clock.times[idx]),
        "site": int(clock.sites[idx]),
        "direction": int(clock.directions[idx]),
        "seed": clock.seed,
    }


def check_attractivity(run: CoupledRun, pair: tuple[int, int] = (0, 1)) -> CouplingReport:
    """Verify sitewise occupation ordering survives every event.

    Premise: member ``pair[0]`` has a particle nowhere member ``pair[1]``
    lacks one. Raises NotInitiallyOrdered if that fails at time zero.
    """
    a = run.members[pair[0]]
    b = run.members[pair[1]]
    occ_a = a.occupation()
    occ_b = b.occupation()
    if np.any(occ_a > occ_b):
        site = int(a.lo + np.argmax(occ_a > occ_b))
        raise NotInitiallyOrdered(f"member {pair[0]} occupies site {site}, member {pair[1]} does not")
    la = a.labels.copy()
    lb = b.labels.copy()
    clock = run.clock
    hit = coupled_order_first_violation(
        la, lb, clock.lo, clock.sites, clock.directions, 0, clock.n_events
    )
    return CouplingReport(
        passed=hit < 0,
        property_name="attractivity",
        n_events=clock.n_events,
        first_violation=None if hit < 0 else _violation_dict(clock, hit),
        final=(
            SpeciesConfig(a.lo, a.hi, la),
            SpeciesConfig(b.lo, b.hi, lb),
        ),
    )


def _initial_height_gap(a: SpeciesConfig, b: SpeciesConfig) -> np.ndarray:
    """h_a - h_b over x in [lo-1, hi], both anchored at the origin."""
    ha = height_initial(a).values.astype(np.int64)
    hb = height_initial(b).values.astype(np.int64)
    return ha - hb


def check_monotonicity(
    run: CoupledRun,
    pair: tuple[int, int] = (0, 1),
    height_shift: int | None = None,
    closeness: int | None = None,
) -> CouplingReport:
    """Verify a height-gap property survives every event.

    Exactly one of ``height_shift`` (watch h_first <= h_second + H) or
    ``closeness`` (watch |h_first - h_second| <= K) must be given. The
    premise is checked at time zero over the whole window including its
    constant boundary values; PremiseViolatedAtTimeZero if it fails there.
    """
    if (height_shift is None) == (closeness is None):
        raise ValueError("pass exactly one of height_shift or closeness")
    mode = 0 if height_shift is not None else 1
    bound = int(height_shift if height_shift is not None else closeness)
    name = f"height-shift H={bound}" if mode == 0 else f"closeness K={bound}"

    a = run.members[pair[0]]
    b = run.members[pair[1]]
    d_full = _initial_height_gap(a, b)  # x in [lo-1, hi]
    if mode == 0:
        bad = d_full > bound
    else:
        bad = np.abs(d_full) > bound
    if bad.any():
        x = int(a.lo - 1 + np.argmax(bad))
        raise PremiseViolatedAtTimeZero(f"{name} already fails at x={x} (gap {int(d_full[np.argmax(bad)])})")

    la = a.labels.copy()
    lb = b.labels.copy()
    d = np.ascontiguousarray(d_full[1:-1])  # x in [lo, hi-1]: the evolving part
    clock = run.clock
    hit = coupled_height_first_violation(
        la, lb, clock.lo, clock.sites, clock.directions, 0, clock.n_events, d, mode, bound
    )
    if hit == -2:
        raise AssertionError("kernel premise disagreement; screened above")
    return CouplingReport(
        passed=hit < 0,
        property_name=name,
        n_events=clock.n_events,
        first_violation=None if hit < 0 else _violation_dict(clock, hit),
        final=(
            SpeciesConfig(a.lo, a.hi, la),
            SpeciesConfig(b.lo, b.hi, lb),
        ),
    )


def merged_events(clock_a: ClockWindow, clock_b: ClockWindow):
    """Interleave two clocks by time for decoupled (negative control) runs.

    Returns (sites, dirs, member, times) where member is 0 for events of
    clock_a and 1 for clock_b. The coupled checks accept this member mask;
    independent clocks are expected to break the pathwise properties.
    """
    if (clock_a.lo, clock_a.hi) != (clock_b.lo, clock_b.hi):
        raise WindowMismatch("decoupled clocks must share the window")
    times = np.concatenate([clock_a.times, clock_b.times])
    sites = np.concatenate([clock_a.sites, clock_b.sites])
    dirs = np.concatenate([clock_a.directions, clock_b.directions])
    member = np.concatenate(
        [np.zeros(clock_a.n_events, dtype=np.int8), np.ones(clock_b.n_events, dtype=np.int8)]
    )
    order = np.argsort(times, kind="stable")
    return sites[order], dirs[order], member[order], times[order]


def second_class_decompose(eta: SpeciesConfig, zeta: SpeciesConfig) -> SecondClassSet:
    """Read zeta as eta plus discrepancy particles (requires domination)."""
    if (eta.lo, eta.hi) != (zeta.lo, zeta.hi):
        raise WindowMismatch("decomposition needs matching windows")
    occ_e = eta.occupation()
    occ_z = zeta.occupation()
    if np.any(occ_e > occ_z):
        site = int(eta.lo + np.argmax(occ_e > occ_z))
        raise DominationBroken(f"eta occupies site {site} but zeta does not")
    alpha = (occ_z - occ_e).astype(np.int8)
    z = eta.lo + np.flatnonzero(alpha)[::-1].astype(np.int64)
    return SecondClassSet(eta=eta.copy(), alpha=alpha, z=z)


# ---------------------------------------------------------------------------
# single tagged discrepancy vs a block of discrepancies: exact and MC bounds


def _admissible_leq(eta: SpeciesConfig, x0: int, alpha_positions) -> np.ndarray:
    """Validate an N-site addition whose rightmost particle sits at x0."""
    pos = np.asarray(sorted(set(int(p) for p in alpha_positions)), dtype=np.int64)
    if pos.size == 0:
        raise InadmissibleAlpha("need at least one added particle")
    if pos.max() != x0:
        raise InadmissibleAlpha(f"rightmost addition must sit at x0={x0}, got {pos.max()}")
    if pos.min() < eta.lo or pos.max() > eta.hi:
        raise InadmissibleAlpha("additions must stay inside the window")
    occ = eta.occupation()
    if np.any(occ[pos - eta.lo] == 1):
        raise InadmissibleAlpha("additions must land on empty sites")
    return pos


def _with_seconds(eta: SpeciesConfig, positions: np.ndarray) -> SpeciesConfig:
    labels = eta.labels.copy()
    labels[positions - eta.lo] = 2
    return SpeciesConfig(eta.lo, eta.hi, labels)


def rez_bound_exact(
    eta: SpeciesConfig,
    x0: int,
    alpha_positions,
    y: int,
    t: float,
    rates: JumpRates,
):
    """Exact both sides of the tagged-particle comparison bound.

    Left side: probability the single discrepancy started at x0 sits at or
    left of y at time t. Right side: average over j of the probability that
    the j-th rightmost of the N added discrepancies sits at or left of y.
    Returns (lhs, rhs). Windows above 8 sites raise StateSpaceTooLarge.
    """
    if eta.n_sites > 8:
        raise StateSpaceTooLarge("exact bound limited to 8 sites")
    pos = _admissible_leq(eta, x0, alpha_positions)
    n = pos.size

    one = _with_seconds(eta, np.array([x0], dtype=np.int64))
    g1 = exact_generator(one, rates)
    p1 = exact_distribution(g1, np.eye(g1.n_states)[g1.index_of(one.labels)], t)
    pos2 = eta.lo + np.argmax(g1.states == 2, axis=1)
    lhs = float(p1[pos2 <= y].sum())

    many = _with_seconds(eta, pos)
    gn = exact_generator(many, rates)
    pn = exact_distribution(gn, np.eye(gn.n_states)[gn.index_of(many.labels)], t)
    rhs = 0.0
    is2 = gn.states == 2
    start = y + 1 - eta.lo
    if start <= 0:
        right_of_y = is2.sum(axis=1)
    elif start >= eta.n_sites:
        right_of_y = np.zeros(gn.n_states, dtype=np.int64)
    else:
        right_of_y = is2[:, start:].sum(axis=1)
    for j in range(n):
        # j-th rightmost discrepancy at or left of y  <=>  fewer than j+1
        # discrepancies strictly right of y
        rhs += float(pn[right_of_y < (j + 1)].sum())
    rhs /= n
    return lhs, rhs


def rez_bound_mc(
    eta: SpeciesConfig,
    x0: int,
    alpha_positions,
    y: int,
    t: float,
    rates: JumpRates,
    n_replicas: int = 2000,
    base_seed: int = 0,
    level: float = 0.99,
):
    """Monte Carlo version of :func:`rez_bound_exact` for large windows.

    Returns a dict with both estimates, their confidence radii at ``level``,
    and the verdict lhs <= rhs + joint radius.
    """
    from scipy.stats import norm

    from .lab.sequences import replica_rng, run_sequence

    if n_replicas < 1000:
        raise ValueError("need at least 1000 replicas for a meaningful interval")
    pos = _admissible_leq(eta, x0, alpha_positions)
    n = pos.size
    one = _with_seconds(eta, np.array([x0], dtype=np.int64))
    many = _with_seconds(eta, pos)

    hits_l = 0
    frac_r = 0.0
    fr2 = 0.0
    for rep in range(n_replicas):
        rng = replica_rng(base_seed, 0, rep)
        la = one.labels.copy()
        run_sequence(rng, rates, la, eta.lo, [t])
        if int(eta.lo + np.argmax(la == 2)) <= y:
            hits_l += 1
        rng = replica_rng(base_seed, 1, rep)
        lb = many.labels.copy()
        run_sequence(rng, rates, lb, eta.lo, [t])
        zpos = eta.lo + np.flatnonzero(lb == 2)
        f = float(np.mean(zpos <= y))  # = (1/N) sum_j 1[Z(j) <= y]
        frac_r += f
        fr2 += f * f
    lhs = hits_l / n_replicas
    rhs = frac_r / n_replicas
    zq = float(norm.isf((1 - level) / 2))
    se_l = math.sqrt(max(lhs * (1 - lhs), 1e-12) / n_replicas)
    var_r = max(fr2 / n_replicas - rhs * rhs, 1e-12)
    se_r = math.sqrt(var_r / n_replicas)
    radius = zq * (se_l + se_r)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "radius": radius,
        "level": level,
        "n_replicas": n_replicas,
        "n_added": n,
        "passed": lhs <= rhs + radius,
    }


# ---------------------------------------------------------------------------
# labeled discrepancy dynamics: drift part plus symmetric exchange part


def labeled_state_space(lo: int, hi: int, n_eta: int, n_labels: int):
    """All (eta occupation, labeled discrepancy placement) states.

    eta is an occupation tuple with n_eta particles; the n_labels labeled
    discrepancies occupy distinct empty sites, order mattering (z[j] is the
    position of label j).
    """
    w = hi - lo + 1
    if w > 6:
        raise StateSpaceTooLarge("labeled enumeration limited to 6 sites")
    states = []
    for eta_sites in combinations(range(w), n_eta):
        free = [s for s in range(w) if s not in eta_sites]
        for z in permutations(free, n_labels):
            states.append((eta_sites, z))
    return states


def labeled_generator(lo: int, hi: int, n_eta: int, n_labels: int, rates: JumpRates):
    """Generator of the labeled pair dynamics on the enumerated state space.

    The motion splits into a drift part at rate right - left = 1 (rightward
    moves obeying priorities: eta into empty, discrepancy into empty, eta
    displacing a discrepancy) and a symmetric exchange part at rate ``left``
    swapping the full contents of a bond, labels included. Projecting away
    the labels recovers the two-species generator; tests verify that lumping
    entrywise.
    """
    states = labeled_state_space(lo, hi, n_eta, n_labels)
    index = {s: i for i, s in enumerate(states)}
    w = hi - lo + 1
    drift = rates.right - rates.left
    ex = rates.left
    m = len(states)
    Q = np.zeros((m, m))

    for i, (eta_sites, z) in enumerate(states):
        eta_set = set(eta_sites)
        z_set = set(z)

        def add(eta_new, z_new, rate):
            j = index[(tuple(sorted(eta_new)), tuple(z_new))]
            Q[i, j] += rate

        # drift: eta particle steps right into an empty site
        for u in eta_sites:
            v = u + 1
            if v < w and v not in eta_set and v not in z_set:
                add((eta_set - {u}) | {v}, z, drift)
        # drift: discrepancy steps right into an empty site
        for jlab, zu in enumerate(z):
            v = zu + 1
            if v < w and v not in eta_set and v not in z_set:
                z_new = list(z)
                z_new[jlab] = v
                add(eta_set, z_new, drift)
        # drift: eta displaces the discrepancy on its right
        for jlab, zu in enumerate(z):
            u = zu - 1
            if u >= 0 and u in eta_set:
                z_new = list(z)
                z_new[jlab] = u
                add((eta_set - {u}) | {zu}, z_new, drift)
        # symmetric exchange of bond contents, labels ride along
        if ex > 0:
            for u in range(w - 1):
                v = u + 1
                eta_new = set(eta_set)
                if (u in eta_set) != (v in eta_set):
                    eta_new ^= {u, v}
                z_new = [v if s == u else u if s == v else s for s in z]
                if eta_new != eta_set or tuple(z_new) != z:
                    add(eta_new, z_new, ex)

    np.fill_diagonal(Q, Q.diagonal() - Q.sum(axis=1))
    return states, Q


def project_labeled_state(state, lo: int, hi: int) -> tuple:
    """Forget labels: map (eta, z) to the two-species label vector."""
    eta_sites, z = state
    w = hi - lo + 1
    lab = [HOLE] * w
    for s in eta_sites:
        lab[s] = 1
    for s in z:
        lab[s] = 2
    return tuple(lab)


def simulate_labeled(
    lo: int,
    hi: int,
    eta_sites: tuple,
    z0: tuple,
    rates: JumpRates,
    t: float,
    rng: np.random.Generator,
):
    """One Gillespie path of the labeled dynamics; returns (eta_sites, z)."""
    w = hi - lo + 1
    drift = rates.right - rates.left
    ex = rates.left
    eta = set(eta_sites)
    z = list(z0)
    now = 0.0
    while True:
        moves = []
        z_set = set(z)
        for u in eta:
            v = u + 1
            if v < w and v not in eta and v not in z_set:
                moves.append(("eta", u, drift))
        for jlab, zu in enumerate(z):
            v = zu + 1
            if v < w and v not in eta and v not in z_set:
                moves.append(("zfree", jlab, drift))
            if zu - 1 >= 0 and zu - 1 in eta:
                moves.append(("swap", jlab, drift))
        if ex > 0:
            for u in range(w - 1):
                moves.append(("exch", u, ex))
        total = sum(r for _, _, r in moves)
        if total == 0:
            return tuple(sorted(eta)), tuple(z)
        now += rng.exponential(1.0 / total)
        if now > t:
            return tuple(sorted(eta)), tuple(z)
        pick = rng.random() * total
        acc = 0.0
        for kind, arg, r in moves:
            acc += r
            if pick < acc:
                break
        if kind == "eta":
            eta.remove(arg)
            eta.add(arg + 1)
        elif kind == "zfree":
            z[arg] += 1
        elif kind == "swap":
            u = z[arg] - 1
            eta.remove(u)
            eta.add(z[arg])
            z[arg] = u
        else:
            u, v = arg, arg + 1
            if (u in eta) != (v in eta):
                eta ^= {u, v}
            z = [v if s == u else u if s == v else s for s in z]
