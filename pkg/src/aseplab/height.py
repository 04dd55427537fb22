"""Height functions of exclusion configurations and trajectories.

The height at x counts signed particle transport across the bond (x, x+1):
anchored to zero at the origin at time zero, it equals the number of
initially-left-of-origin particles now right of x minus the number of
initially-right particles now at or left of x. Because any particle crossing
the bond rightward raises the value by one regardless of its identity, the
count collapses to

    h_t(x) = B0 - #{particles at sites <= x at time t},

with B0 the number of particles at sites <= 0 at time zero. Heights of a
trajectory are only trusted inside the window's validity region, where the
closed boundary provably has not propagated.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import SpeciesConfig, Trajectory, validity_region
from .clocks import make_rates
from .errors import MissingTags, OutOfRegion, WindowExcludesOrigin


@dataclass(eq=False)
class HeightField:
    """Integer heights h(x) for x in [lo, hi], plus anchoring metadata."""

    time: float
    lo: int
    hi: int
    values: np.ndarray
    anchor: dict

    def at(self, x: int) -> int:
        if not (self.lo <= x <= self.hi):
            raise OutOfRegion(f"x={x} outside stored region [{self.lo}, {self.hi}]")
        return int(self.values[x - self.lo])

    def interpolate(self, x: float) -> float:
        """Piecewise-linear evaluation between integer sites."""
        if not (self.lo <= x <= self.hi):
            raise OutOfRegion(f"x={x} outside stored region [{self.lo}, {self.hi}]")
        x0 = int(np.floor(x))
        if x0 == self.hi:
            return float(self.values[-1])
        frac = x - x0
        v0 = self.values[x0 - self.lo]
        v1 = self.values[x0 - self.lo + 1]
        return float(v0) + frac * float(v1 - v0)


def height_initial(config: SpeciesConfig, k: int | None = None) -> HeightField:
    """Heights of the initial configuration, h(0) = 0.

    Counts particles of class <= k (all classes when k is None). Values are
    stored for x in [lo - 1, hi]; left of the window the height is constant.
    """
    if not (config.lo <= 0 <= config.hi):
        raise WindowExcludesOrigin("height anchoring needs the origin inside the window")
    xi = config.occupation(k)
    # c[j] = number of particles at sites <= lo + j - 1, so c[0] = 0
    c = np.concatenate([[0], np.cumsum(xi, dtype=np.int64)])
    h = c[0 - config.lo + 1] - c
    return HeightField(
        time=0.0,
        lo=config.lo - 1,
        hi=config.hi,
        values=h,
        anchor={"kind": "origin", "h_at_origin": 0, "class_cutoff": k},
    )


def height_at_time(traj: Trajectory, t: float, k: int | None = None) -> HeightField:
    """Heights of the checkpoint at time t, anchored at time zero.

    Requires a tagged trajectory (the anchoring refers to where particles
    started). Values are only materialized inside the validity region for
    time t; everything else raises OutOfRegion on access.
    """
    if not traj.tagged:
        raise MissingTags("trajectory was run without tagging; heights need time-zero anchoring")
    cfg0 = traj.initial
    if not (cfg0.lo <= 0 <= cfg0.hi):
        raise WindowExcludesOrigin("height anchoring needs the origin inside the window")
    cfg = traj.config_at(t)
    rates = make_rates(traj.clock_manifest["right"], traj.clock_manifest["left"])
    vlo, vhi = validity_region(cfg0.lo, cfg0.hi, rates, t)
    if vlo > vhi:
        raise OutOfRegion(
            f"validity region empty at t={t} for window [{cfg0.lo}, {cfg0.hi}]"
        )
    b0 = int(np.sum(cfg0.occupation(k)[: (0 - cfg0.lo + 1)]))
    xi = cfg.occupation(k)
    csum = np.cumsum(xi, dtype=np.int64)
    h = b0 - csum[(vlo - cfg0.lo) : (vhi - cfg0.lo + 1)]
    return HeightField(
        time=float(t),
        lo=vlo,
        hi=vhi,
        values=h,
        anchor={"kind": "origin", "b0": b0, "class_cutoff": k, "validity": (vlo, vhi)},
    )


def height_diff(field: HeightField, x: int, y: int) -> int:
    """h(x) - h(y); for x <= y this equals the particle count on [x+1, y]."""
    return field.at(x) - field.at(y)


def heights_to_csv(fields, path) -> None:
    """Rows (time, x, h) for one field or a list of fields."""
    if isinstance(fields, HeightField):
        fields = [fields]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "x", "h"])
        for f in fields:
            for x in range(f.lo, f.hi + 1):
                w.writerow([f"{f.time:.12g}", x, int(f.values[x - f.lo])])
