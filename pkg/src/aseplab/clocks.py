"""Poisson arrow fields driving exclusion dynamics on integer windows.

All randomness in a simulation comes from independent Poisson processes
attached to each (site, direction) pair: right arrows at rate ``right``,
left arrows at rate ``left``. A :class:`ClockWindow` materializes every
arrow up to a horizon, globally ordered in time, reproducible from
``(seed, window, horizon, rates)`` alone.

Streams are counter based: the j-th inter-arrival of the stream at
``(site, direction)`` is a pure function of ``(seed, site, direction, j)``.
Enlarging the window or extending the horizon appends new randomness
without perturbing existing streams. Simultaneous arrows (a measure-zero
event the float representation can still produce) are ordered by site,
left arrow first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import RateConstraintViolated

LEFT = 0
RIGHT = 1

_RATE_TOL = 1e-12

# splitmix64 / murmur-style finalizer constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SITE_MULT = np.uint64(0xD6E8FEB86659FD93)
_DIR_MULT = np.uint64(0xCA5A826395121157)
_SEED_SALT = np.uint64(0x8BADF00D5EEDC0DE)

_INV_2_53 = float(2.0**-53)


def _scramble(x):
    """splitmix64 output scrambler; elementwise on uint64 arrays (wraparound intended)."""
    x = x.astype(np.uint64, copy=True) if isinstance(x, np.ndarray) else np.uint64(x)
    with np.errstate(over="ignore"):
        x ^= x >> np.uint64(30)
        x *= _MIX1
        x ^= x >> np.uint64(27)
        x *= _MIX2
        x ^= x >> np.uint64(31)
    return x


def _stream_keys(seed: int, sites, directions):
    """One well-mixed 64-bit key per (site, direction) stream."""
    seed_k = _scramble(np.uint64(seed) ^ _SEED_SALT)
    site_u = np.asarray(sites, dtype=np.int64).astype(np.uint64)
    dir_u = np.asarray(directions, dtype=np.int64).astype(np.uint64)
    return _scramble(seed_k + site_u * _SITE_MULT + dir_u * _DIR_MULT)


def _counter_uniforms(keys, counters):
    """Uniform(0,1) variates indexed by (stream key, counter), vectorized."""
    bits = _scramble(keys + counters * _GOLDEN)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53


@dataclass(frozen=True)
class JumpRates:
    """Right/left jump rates of the asymmetric walk.

    Use :func:`make_rates` to construct; it enforces right > left >= 0 and
    right - left = 1 (the time normalization every formula here assumes).
    """

    right: float
    left: float

    @property
    def q(self) -> float:
        """Asymmetry parameter left/right, in [0, 1)."""
        return self.left / self.right

    @property
    def total(self) -> float:
        return self.right + self.left

    def rate_for(self, direction: int) -> float:
        return self.right if direction == RIGHT else self.left


def make_rates(right: float, left: float) -> JumpRates:
    """Validate and build :class:`JumpRates`.

    Raises
    ------
    RateConstraintViolated
        unless right > left >= 0 and |right - left - 1| <= 1e-12.
    """
    right = float(right)
    left = float(left)
    if not (math.isfinite(right) and math.isfinite(left)):
        raise RateConstraintViolated(f"rates must be finite, got ({right}, {left})")
    if not right > left:
        raise RateConstraintViolated(f"need right > left, got ({right}, {left})")
    if left < 0:
        raise RateConstraintViolated(f"need left >= 0, got {left}")
    if abs(right - left - 1.0) > _RATE_TOL:
        raise RateConstraintViolated(
            f"need right - left = 1 within {_RATE_TOL}, got {right - left}"
        )
    return JumpRates(right=right, left=left)


class ArrowEvent(NamedTuple):
    site: int
    time: float
    direction: int


@dataclass(frozen=True, eq=False)
class ClockWindow:
    """Materialized arrow field on sites [lo, hi] up to ``horizon``.

    Events are stored globally sorted by time (ties by site, left first)
    in three parallel arrays. The arrays are regenerable from the identity
    fields, which is all serialization stores.
    """

    lo: int
    hi: int
    horizon: float
    seed: int
    rates: JumpRates
    times: np.ndarray
    sites: np.ndarray
    directions: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.hi - self.lo + 1

    @property
    def n_events(self) -> int:
        return int(self.times.shape[0])

    def events_in_order(self) -> Iterator[ArrowEvent]:
        for s, t, d in zip(self.sites, self.times, self.directions):
            yield ArrowEvent(int(s), float(t), int(d))

    def stream_times(self, site: int, direction: int) -> np.ndarray:
        """Arrival times of one (site, direction) stream, regenerated exactly."""
        if not (self.lo <= site <= self.hi):
            raise ValueError(f"site {site} outside window [{self.lo}, {self.hi}]")
        rate = self.rates.rate_for(direction)
        if rate == 0.0:
            return np.empty(0, dtype=np.float64)
        key = _stream_keys(self.seed, [site], [direction])
        chunks = []
        t_cum = 0.0
        ctr = 0
        while t_cum <= self.horizon:
            j = np.arange(ctr + 1, ctr + 257, dtype=np.uint64)
            u = _counter_uniforms(key, j)
            dt = -np.log1p(-u) / rate
            t = np.cumsum(np.concatenate([[t_cum], dt]))[1:]
            chunks.append(t)
            t_cum = float(t[-1])
            ctr += 256
        all_t = np.concatenate(chunks)
        return all_t[all_t <= self.horizon]

    def to_manifest(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "horizon": self.horizon,
            "seed": self.seed,
            "right": self.rates.right,
            "left": self.rates.left,
        }

    @staticmethod
    def from_manifest(d: dict) -> "ClockWindow":
        rates = make_rates(d["right"], d["left"])
        return sample_clock_window(rates, d["lo"], d["hi"], d["horizon"], d["seed"])


def events_in_order(clock: ClockWindow) -> Iterator[ArrowEvent]:
    """Iterate the clock's arrows in global time order."""
    return clock.events_in_order()


def _generate_events(rates, lo, hi, horizon, seed, n_chunks):
    """Produce (times, streams) sorted by (time, stream).

    Stream index is 2*(site - lo) + direction with LEFT = 0, so the stable
    lexsort tie-break realizes the (site, left first) ordering. Generation
    walks fixed time slices so peak memory stays bounded regardless of the
    total event count; the emitted arrays are bit-identical for any slicing
    because every draw is a pure function of (stream, counter).
    """
    n_sites = hi - lo + 1
    n_streams = 2 * n_sites
    sites_per_stream = lo + np.arange(n_streams) // 2
    dirs_per_stream = np.arange(n_streams) % 2  # LEFT even, RIGHT odd
    keys = _stream_keys(seed, sites_per_stream, dirs_per_stream)
    rate_arr = np.where(dirs_per_stream == RIGHT, rates.right, rates.left)

    expected = n_sites * rates.total * horizon
    if n_chunks is None:
        n_chunks = max(1, int(math.ceil(expected / 3.0e6)))
    bounds = np.linspace(0.0, horizon, n_chunks + 1)

    state_t = np.zeros(n_streams)
    state_ctr = np.zeros(n_streams, dtype=np.uint64)
    live = np.nonzero(rate_arr > 0)[0]

    out_t: list[np.ndarray] = []
    out_s: list[np.ndarray] = []
    for c in range(n_chunks):
        hi_t = bounds[c + 1]
        chunk_t: list[np.ndarray] = []
        chunk_s: list[np.ndarray] = []
        active = live[state_t[live] <= hi_t]
        first = True
        while active.size:
            if first:
                lam = float(np.max(rate_arr[active])) * (hi_t - float(np.min(state_t[active])))
                block = min(1 << 20, max(8, int(lam + 4.0 * math.sqrt(lam + 1.0) + 8.0)))
                first = False
            else:
                block = 16
            j = state_ctr[active, None] + np.arange(1, block + 1, dtype=np.uint64)[None, :]
            u = _counter_uniforms(keys[active, None], j)
            dt = -np.log1p(-u) / rate_arr[active, None]
            # prepend the carried time so every partial sum is the exact
            # sequential left fold; makes output independent of chunking
            t = np.cumsum(np.concatenate([state_t[active, None], dt], axis=1), axis=1)[:, 1:]
            emit = t <= hi_t
            counts = emit.sum(axis=1)
            if counts.any():
                chunk_t.append(t[emit])
                chunk_s.append(np.repeat(active, counts))
                rows = counts > 0
                state_t[active[rows]] = t[rows, counts[rows] - 1]
            state_ctr[active] += counts.astype(np.uint64)
            active = active[counts == block]
        if chunk_t:
            tt = np.concatenate(chunk_t)
            ss = np.concatenate(chunk_s)
            perm = np.lexsort((ss, tt))
            out_t.append(tt[perm])
            out_s.append(ss[perm])

    if out_t:
        times = np.concatenate(out_t)
        streams = np.concatenate(out_s)
    else:
        times = np.empty(0, dtype=np.float64)
        streams = np.empty(0, dtype=np.int64)
    return times, streams


def sample_clock_window(
    rates: JumpRates,
    lo: int,
    hi: int,
    horizon: float,
    seed: int,
    n_chunks: int | None = None,
) -> ClockWindow:
    """Materialize the arrow field on [lo, hi] x [0, horizon].

    Deterministic: identical arguments give bit-identical event arrays.
    ``n_chunks`` only bounds generation working memory; it never changes
    the output.
    """
    if not isinstance(lo, (int, np.integer)) or not isinstance(hi, (int, np.integer)):
        raise TypeError("window endpoints must be integers")
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    horizon = float(horizon)
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ValueError(f"horizon must be positive and finite, got {horizon}")
    times, streams = _generate_events(rates, int(lo), int(hi), horizon, int(seed), n_chunks)
    sites = (int(lo) + (streams >> 1)).astype(np.int64)
    dirs = (streams & 1).astype(np.int8)
    for a in (times, sites, dirs):
        a.setflags(write=False)
    return ClockWindow(
        lo=int(lo),
        hi=int(hi),
        horizon=horizon,
        seed=int(seed),
        rates=rates,
        times=times,
        sites=sites,
        directions=dirs,
    )
