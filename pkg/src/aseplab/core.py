"""Multi-species exclusion configurations, trajectories, and exact solvers.

Site labels are positive integer classes with holes encoded as the maximal
int32 (:data:`HOLE`), so priority comparisons are plain ``<``. Lower class
numbers have higher priority: an arrow moves its occupant onto the target
site iff the occupant's label is strictly smaller, swapping the two. Arrows
pointing out of the window are ignored (closed boundary).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import poisson

from .clocks import RIGHT, ClockWindow, JumpRates
from .errors import (
    ClockTooShort,
    NonStochasticGenerator,
    ProfileOutOfRange,
    StateSpaceTooLarge,
    WindowExcludesOrigin,
    WindowMismatch,
)
from .kernel import HOLE, apply_events

_GEN_MAX_SITES = 10
_ROWSUM_TOL = 1e-10
VALIDITY_MARGIN = 20


@dataclass(eq=False)
class SpeciesConfig:
    """Occupancy of the window [lo, hi]; labels[i] is the class at site lo + i."""

    lo: int
    hi: int
    labels: np.ndarray
    boundary: str = "closed"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if self.labels.shape != (self.hi - self.lo + 1,):
            raise ValueError("labels length must match window size")
        if self.boundary != "closed":
            raise ValueError(f"only closed boundaries are supported, got {self.boundary!r}")
        bad = (self.labels < 1) & (self.labels != HOLE)
        if bad.any():
            raise ValueError("labels must be classes >= 1 or HOLE")

    @property
    def n_sites(self) -> int:
        return self.hi - self.lo + 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def label_at(self, site: int) -> int:
        if not (self.lo <= site <= self.hi):
            raise ValueError(f"site {site} outside window [{self.lo}, {self.hi}]")
        return int(self.labels[site - self.lo])

    def occupation(self, k: int | None = None) -> np.ndarray:
        """0/1 array: sites holding a particle of class <= k (all classes if None)."""
        cutoff = HOLE - 1 if k is None else int(k)
        return (self.labels <= cutoff).astype(np.int8)

    def positions_of_class(self, k: int) -> np.ndarray:
        return self.lo + np.flatnonzero(self.labels == k)

    def class_counts(self) -> dict[int, int]:
        vals, cnt = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def copy(self) -> "SpeciesConfig":
        return SpeciesConfig(self.lo, self.hi, self.labels.copy(), self.boundary, dict(self.meta))


@dataclass(eq=False)
class Trajectory:
    """Initial data plus configuration snapshots along one clock realization."""

    initial: SpeciesConfig
    clock_manifest: dict
    checkpoints: list[tuple[float, SpeciesConfig]]
    tagged: bool = False

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.checkpoints]

    def config_at(self, t: float) -> SpeciesConfig:
        for tc, cfg in self.checkpoints:
            if abs(tc - t) <= 1e-12:
                return cfg
        raise ValueError(f"no checkpoint at time {t}; have {self.times}")


@dataclass(eq=False)
class GeneratorMatrix:
    """Exact Markov generator on an enumerated state space.

    ``states`` is an (n_states, n_sites) int32 array of label vectors in
    lexicographic order; Q is sparse with off-diagonal entries in {left,
    right} and rows summing to zero.
    """

    lo: int
    hi: int
    states: np.ndarray
    Q: sp.csr_matrix
    rates: JumpRates

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    def index_of(self, labels: Sequence[int]) -> int:
        key = np.asarray(labels, dtype=np.int32)
        hits = np.nonzero((self.states == key).all(axis=1))[0]
        if hits.size != 1:
            raise ValueError("configuration not in this generator's state space")
        return int(hits[0])


def validity_region(
    lo: int, hi: int, rates: JumpRates, t_max: float, margin: int = VALIDITY_MARGIN
) -> tuple[int, int]:
    """Sites provably insulated from the closed boundary up to time t_max.

    Boundary effects travel at most 4*right per unit time apart from an
    exponentially small event, so statistics are only trusted on the window
    shrunk by ceil(4*right*t_max) + margin on each side.
    """
    pad = int(math.ceil(4.0 * rates.right * t_max)) + margin
    return lo + pad, hi - pad


def init_step(lo: int, hi: int, variant: str = "two-species") -> SpeciesConfig:
    """Step initial data around the origin.

    "two-species": first class on sites < 0, one second-class particle at the
    origin, holes to the right. "pure": first class on sites <= 0, holes
    right of the origin.
    """
    if not (lo <= 0 <= hi):
        raise WindowExcludesOrigin(f"step data needs 0 in [{lo}, {hi}]")
    sites = np.arange(lo, hi + 1)
    if variant == "two-species":
        labels = np.where(sites < 0, 1, HOLE).astype(np.int32)
        labels[sites == 0] = 2
    elif variant == "pure":
        labels = np.where(sites <= 0, 1, HOLE).astype(np.int32)
    else:
        raise ValueError(f"unknown step variant {variant!r}")
    return SpeciesConfig(lo, hi, labels, meta={"init": f"step-{variant}"})


def init_bernoulli(lo: int, hi: int, rho: float, lam: float, seed: int) -> SpeciesConfig:
    """Product measure: occupied w.p. rho at sites <= 0, w.p. lam at sites > 0."""
    for name, p in (("rho", rho), ("lam", lam)):
        if not (0.0 <= p <= 1.0):
            raise ProfileOutOfRange(f"{name}={p} outside [0, 1]")
    if not (lo <= 0 <= hi):
        raise WindowExcludesOrigin(f"two-sided product data needs 0 in [{lo}, {hi}]")
    sites = np.arange(lo, hi + 1)
    p = np.where(sites <= 0, rho, lam)
    u = np.random.default_rng(seed).random(sites.size)
    labels = np.where(u < p, 1, HOLE).astype(np.int32)
    return SpeciesConfig(lo, hi, labels, meta={"init": "bernoulli", "rho": rho, "lam": lam})


def init_profile(
    lo: int,
    hi: int,
    profile: Callable[[float], float],
    mode: str,
    seed: int,
) -> SpeciesConfig:
    """Product measure with site probabilities read off a density profile.

    mode "rescaled-on-interval": P[occupied at lo + j] = profile(j / (hi - lo)),
    the profile's unit interval stretched over the window. mode "direct":
    P[occupied at x] = profile(x). Probabilities outside [0, 1] raise
    ProfileOutOfRange.
    """
    sites = np.arange(lo, hi + 1)
    if mode == "rescaled-on-interval":
        if hi == lo:
            raise ValueError("rescaled mode needs a window of at least two sites")
        args = (sites - lo) / (hi - lo)
    elif mode == "direct":
        args = sites.astype(np.float64)
    else:
        raise ValueError(f"unknown profile mode {mode!r}")
    p = np.array([float(profile(z)) for z in args])
    if not np.all((p >= -1e-12) & (p <= 1 + 1e-12)):
        bad = int(sites[np.argmax((p < -1e-12) | (p > 1 + 1e-12))])
        raise ProfileOutOfRange(f"profile value at site {bad} outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    u = np.random.default_rng(seed).random(sites.size)
    labels = np.where(u < p, 1, HOLE).astype(np.int32)
    return SpeciesConfig(lo, hi, labels, meta={"init": f"profile-{mode}"})


def init_speed_process(lo: int, hi: int) -> SpeciesConfig:
    """Fully labeled data: site n carries class n - lo + 1 (no holes).

    The bijection class <-> site is recorded in meta so later positions can
    be reported per starting site.
    """
    labels = np.arange(1, hi - lo + 2, dtype=np.int32)
    meta = {"init": "speed-process", "class_of_site": "n - lo + 1", "lo": lo, "hi": hi}
    return SpeciesConfig(lo, hi, labels, meta=meta)


def evolve(
    config: SpeciesConfig,
    clock: ClockWindow,
    until: float,
    checkpoint_times: Iterable[float] | None = None,
    tagged: bool = False,
) -> Trajectory:
    """Run the configuration along the clock's arrows up to time ``until``.

    Checkpoints are snapshots at the requested times (``until`` is always
    included). The run is a pure function of (config, clock).
    """
    if (config.lo, config.hi) != (clock.lo, clock.hi):
        raise WindowMismatch(
            f"config window [{config.lo}, {config.hi}] vs clock [{clock.lo}, {clock.hi}]"
        )
    until = float(until)
    if until > clock.horizon + 1e-12:
        raise ClockTooShort(f"until={until} exceeds clock horizon {clock.horizon}")
    if until < 0:
        raise ValueError("until must be nonnegative")
    cps = sorted(set(float(t) for t in (checkpoint_times or [])) | {until})
    for t in cps:
        if t < 0 or t > until + 1e-12:
            raise ValueError(f"checkpoint {t} outside [0, until]")

    labels = config.labels.copy()
    checkpoints: list[tuple[float, SpeciesConfig]] = []
    done = 0
    for t in cps:
        stop = int(np.searchsorted(clock.times, t, side="right"))
        apply_events(labels, config.lo, clock.sites, clock.directions, done, stop)
        done = stop
        snap = SpeciesConfig(config.lo, config.hi, labels.copy(), meta=dict(config.meta))
        checkpoints.append((t, snap))
    return Trajectory(
        initial=config.copy(),
        clock_manifest=clock.to_manifest(),
        checkpoints=checkpoints,
        tagged=tagged,
    )


def _lexicographic_multiset_states(labels: np.ndarray) -> np.ndarray:
    """All distinct permutations of the label multiset, lexicographically."""
    cur = sorted(int(v) for v in labels)
    n = len(cur)
    out = [tuple(cur)]
    while True:
        # classic next-permutation
        i = n - 2
        while i >= 0 and cur[i] >= cur[i + 1]:
            i -= 1
        if i < 0:
            break
        j = n - 1
        while cur[j] <= cur[i]:
            j -= 1
        cur[i], cur[j] = cur[j], cur[i]
        cur[i + 1 :] = reversed(cur[i + 1 :])
        out.append(tuple(cur))
    return np.array(out, dtype=np.int32)


def exact_generator(config: SpeciesConfig, rates: JumpRates) -> GeneratorMatrix:
    """Markov generator on the reachable states of ``config`` (conserved multiset).

    Windows above 10 sites raise StateSpaceTooLarge.
    """
    n = config.n_sites
    if n > _GEN_MAX_SITES:
        raise StateSpaceTooLarge(f"{n} sites exceeds the exact limit of {_GEN_MAX_SITES}")
    states = _lexicographic_multiset_states(config.labels)
    return _generator_from_states(config.lo, config.hi, states, rates)


def exact_generator_product_space(
    lo: int, hi: int, n_classes: int, rates: JumpRates
) -> GeneratorMatrix:
    """Generator over every labeling of [lo, hi] with classes 1..n_classes or hole.

    One matrix covers all conserved sectors at once (it is block diagonal
    over label multisets), which makes whole-family exact computations a
    single pass.
    """
    w = hi - lo + 1
    if w > _GEN_MAX_SITES:
        raise StateSpaceTooLarge(f"{w} sites exceeds the exact limit of {_GEN_MAX_SITES}")
    base = n_classes + 1
    if base**w > 300_000:
        raise StateSpaceTooLarge(f"{base}**{w} states is too many")
    digits = np.stack(
        [(np.arange(base**w) // base ** (w - 1 - x)) % base for x in range(w)], axis=1
    )
    # digit d < n_classes is class d+1, digit n_classes is the hole
    states = np.where(digits < n_classes, digits + 1, HOLE).astype(np.int32)
    return _generator_from_states(lo, hi, states, rates, _digits=digits, _base=base)


def _generator_from_states(lo, hi, states, rates, _digits=None, _base=None):
    n_states, w = states.shape
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    if _digits is not None:
        # product space: target indices in closed form from digit arithmetic
        idx = np.arange(n_states, dtype=np.int64)
        for x in range(w - 1):
            a = _digits[:, x].astype(np.int64)
            b = _digits[:, x + 1].astype(np.int64)
            place = _base ** (w - 1 - x) - _base ** (w - 2 - x)
            tgt = idx + (b - a) * place
            right = a < b
            left = a > b
            rows += [idx[right], idx[left]]
            cols += [tgt[right], tgt[left]]
            vals += [
                np.full(int(right.sum()), rates.right),
                np.full(int(left.sum()), rates.left),
            ]
    else:
        index = {tuple(s): i for i, s in enumerate(states.tolist())}
        r_i: list[int] = []
        r_j: list[int] = []
        r_v: list[float] = []
        for i, s in enumerate(states.tolist()):
            for x in range(w - 1):
                a, b = s[x], s[x + 1]
                if a == b:
                    continue
                t = list(s)
                t[x], t[x + 1] = b, a
                j = index[tuple(t)]
                r_i.append(i)
                r_j.append(j)
                r_v.append(rates.right if a < b else rates.left)
        rows = [np.array(r_i, dtype=np.int64)]
        cols = [np.array(r_j, dtype=np.int64)]
        vals = [np.array(r_v)]
    ri = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    ci = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    vv = np.concatenate(vals) if vals else np.empty(0)
    Q = sp.coo_matrix((vv, (ri, ci)), shape=(n_states, n_states)).tocsr()
    Q = Q - sp.diags(np.asarray(Q.sum(axis=1)).ravel())
    return GeneratorMatrix(lo=lo, hi=hi, states=states, Q=Q.tocsr(), rates=rates)


def exact_distribution(gen: GeneratorMatrix, p0: np.ndarray, t: float, tol: float = 1e-10):
    """Distribution(s) exp(tQ) applied to p0, truncation error below ``tol``.

    Uses uniformization: p(t) = sum_k Poisson(Lambda t)(k) * p0 P^k with
    P = I + Q/Lambda, truncated once the Poisson tail drops under tol, so
    the total variation error is certified a priori. p0 may be a single
    distribution or a matrix of rows.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    rowsum = np.abs(np.asarray(gen.Q.sum(axis=1)).ravel())
    if rowsum.max(initial=0.0) > _ROWSUM_TOL:
        raise NonStochasticGenerator(f"max |row sum| = {rowsum.max():.3e}")
    p0 = np.asarray(p0, dtype=np.float64)
    single = p0.ndim == 1
    V = np.atleast_2d(p0).copy()
    if V.shape[1] != gen.n_states:
        raise ValueError("p0 length must equal the number of states")
    lam = float(np.max(-gen.Q.diagonal(), initial=0.0))
    if t == 0 or lam == 0:
        return p0.copy()
    mu = lam * t
    K = int(poisson.isf(tol, mu)) + 1
    weights = poisson.pmf(np.arange(K + 1), mu)
    P = (sp.eye(gen.n_states, format="csr") + gen.Q.multiply(1.0 / lam)).tocsr()
    acc = weights[0] * V
    for k in range(1, K + 1):
        V = V @ P
        acc += weights[k] * V
    return acc[0] if single else acc


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Rows (time, site, label) for every checkpoint; holes written as H."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "site", "label"])
        for t, cfg in traj.checkpoints:
            for site, lab in zip(range(cfg.lo, cfg.hi + 1), cfg.labels):
                w.writerow([f"{t:.12g}", site, "H" if lab == HOLE else int(lab)])


def snapshot_lines(config: SpeciesConfig) -> list[str]:
    """One "site,label" line per site, holes as H."""
    return [
        f"{site},{'H' if lab == HOLE else int(lab)}"
        for site, lab in zip(range(config.lo, config.hi + 1), config.labels)
    ]


def snapshot_from_lines(lines: Iterable[str]) -> SpeciesConfig:
    sites: list[int] = []
    labs: list[int] = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        s, lab = line.split(",")
        sites.append(int(s))
        labs.append(HOLE if lab.strip() == "H" else int(lab))
    order = np.argsort(sites)
    sites_a = np.asarray(sites)[order]
    if sites_a.size == 0 or not np.array_equal(sites_a, np.arange(sites_a[0], sites_a[-1] + 1)):
        raise ValueError("snapshot lines must cover a contiguous window")
    return SpeciesConfig(int(sites_a[0]), int(sites_a[-1]), np.asarray(labs, dtype=np.int32)[order])
