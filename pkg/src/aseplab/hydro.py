"""Macroscopic density profiles and their exact integrals.

Every profile knows its closed-form antiderivative, so window sums of
expected occupation reduce to exact arithmetic (no quadrature). Conventions:
``eval(z)`` is a density in [0, 1]; ``integral(a, b)`` is the signed
integral of the density between macroscopic coordinates a <= b.

A profile "rescaled on the window [A, B]" places occupation probability
profile((j - A) / (B - A)) at site j; profiles meant for that use live on
the unit interval. Fan and step profiles live on the whole line in units
where the ray z = x / t parameterizes space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import JOutOfRange, ParameterOutOfRange


def _check01(name: str, v: float) -> float:
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise ParameterOutOfRange(f"{name}={v} outside [0, 1]")
    return v


class ProfileFn:
    """Base class: a density profile with exact evaluation and integral."""

    kind: str = "abstract"

    def eval(self, z: float) -> float:
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        """Locations where the density has a kink or jump."""
        return ()

    def integral(self, a: float, b: float) -> float:
        """Signed integral of the density from a to b."""
        if b < a:
            return -self.integral(b, a)
        return self._integral_ordered(float(a), float(b))

    def _integral_ordered(self, a: float, b: float) -> float:
        raise NotImplementedError

    def __call__(self, z: float) -> float:
        return self.eval(z)


@dataclass(frozen=True)
class StepProfile(ProfileFn):
    """Constant ``left`` density at z <= 0, ``right`` density at z > 0."""

    left: float
    right: float
    kind = "step"

    def __post_init__(self):
        _check01("left", self.left)
        _check01("right", self.right)

    def breakpoints(self) -> tuple:
        return (0.0,)

    def eval(self, z: float) -> float:
        return self.left if z <= 0 else self.right

    def _integral_ordered(self, a: float, b: float) -> float:
        neg = max(0.0, min(b, 0.0) - a)
        pos = max(0.0, b - max(a, 0.0))
        return self.left * neg + self.right * pos


@dataclass(frozen=True)
class FanProfile(ProfileFn):
    """Rarefaction fan between step densities left >= right.

    Density ``left`` for z <= 1 - 2 left, the ramp (1 - z) / 2 in between,
    ``right`` for z >= 1 - 2 right.
    """

    left: float
    right: float
    kind = "fan"

    def __post_init__(self):
        _check01("left", self.left)
        _check01("right", self.right)
        if self.right > self.left:
            raise ParameterOutOfRange(
                f"fan needs left >= right, got ({self.left}, {self.right})"
            )

    @property
    def z_left(self) -> float:
        return 1.0 - 2.0 * self.left

    @property
    def z_right(self) -> float:
        return 1.0 - 2.0 * self.right

    def breakpoints(self) -> tuple:
        return (self.z_left, self.z_right)

    def eval(self, z: float) -> float:
        if z <= self.z_left:
            return self.left
        if z >= self.z_right:
            return self.right
        return (1.0 - z) / 2.0

    def _integral_ordered(self, a: float, b: float) -> float:
        def ramp_anti(z: float) -> float:
            return z / 2.0 - z * z / 4.0

        total = 0.0
        lo1 = min(b, self.z_left)
        if a < lo1:
            total += self.left * (lo1 - a)
        r0 = max(a, self.z_left)
        r1 = min(b, self.z_right)
        if r0 < r1:
            total += ramp_anti(r1) - ramp_anti(r0)
        hi0 = max(a, self.z_right)
        if hi0 < b:
            total += self.right * (b - hi0)
        return total


def parabola_profile() -> FanProfile:
    """The pure-step fan (density one left, zero right).

    Its height integral over [X/T, Y/T] scaled by T is the difference of the
    parabola (T - x)^2 / (4T), which tests pin down explicitly.
    """
    return FanProfile(1.0, 0.0)


@dataclass(frozen=True)
class RampProfile(ProfileFn):
    """Linear tilt rho + eps (1/2 - z) on the unit interval, zero outside."""

    rho: float
    eps: float
    kind = "ramp"

    def __post_init__(self):
        _check01("rho", self.rho)
        if self.eps < 0:
            raise ParameterOutOfRange(f"eps={self.eps} must be nonnegative")
        _check01("rho + eps/2", self.rho + self.eps / 2.0)
        _check01("rho - eps/2", self.rho - self.eps / 2.0)

    def breakpoints(self) -> tuple:
        return (0.0, 1.0)

    def eval(self, z: float) -> float:
        if 0.0 <= z <= 1.0:
            return self.rho + self.eps * (0.5 - z)
        return 0.0

    def _integral_ordered(self, a: float, b: float) -> float:
        a = min(max(a, 0.0), 1.0)
        b = min(max(b, 0.0), 1.0)

        def anti(z: float) -> float:
            return self.rho * z + self.eps * (z / 2.0 - z * z / 2.0)

        return anti(b) - anti(a)


@dataclass(frozen=True)
class PlateauRampProfile(ProfileFn):
    """Ramp flattened at level rho + eps beta from z = 1/2 - beta onward.

    Equals the ramp on [0, 1/2 - beta], the constant rho + eps beta on
    [1/2 - beta, 1], zero outside the unit interval (continuous at the knee).
    """

    rho: float
    eps: float
    beta: float
    kind = "plateau-ramp"

    def __post_init__(self):
        _check01("rho", self.rho)
        if self.eps < 0:
            raise ParameterOutOfRange(f"eps={self.eps} must be nonnegative")
        if not (0.0 <= self.beta <= 0.5):
            raise ParameterOutOfRange(f"beta={self.beta} outside [0, 1/2]")
        _check01("rho + eps/2", self.rho + self.eps / 2.0)
        _check01("rho + eps*beta", self.rho + self.eps * self.beta)

    @property
    def knee(self) -> float:
        return 0.5 - self.beta

    def breakpoints(self) -> tuple:
        return (0.0, self.knee, 1.0)

    def eval(self, z: float) -> float:
        if not (0.0 <= z <= 1.0):
            return 0.0
        if z <= self.knee:
            return self.rho + self.eps * (0.5 - z)
        return self.rho + self.eps * self.beta

    def _integral_ordered(self, a: float, b: float) -> float:
        a = min(max(a, 0.0), 1.0)
        b = min(max(b, 0.0), 1.0)

        def anti_ramp(z: float) -> float:
            return self.rho * z + self.eps * (z / 2.0 - z * z / 2.0)

        total = 0.0
        r1 = min(b, self.knee)
        if a < r1:
            total += anti_ramp(r1) - anti_ramp(a)
        p0 = max(a, self.knee)
        if p0 < b:
            total += (self.rho + self.eps * self.beta) * (b - p0)
        return total


@dataclass(frozen=True)
class EvolvedRampProfile(ProfileFn):
    """Ramp initial data on a window of scale S, evolved for time T.

    In ray coordinates z = x / T the density is
    rho + T (1 - 2 rho - z) / (2 (S + T)), linear with slope
    -T / (2 (S + T)). Its domain is the z range where the value stays a
    density in [0, 1]; since the slope is tiny for S >> T, that range is of
    width 2 (S + T) / T and comfortably covers any observation region that
    sits inside the initial data.
    """

    rho: float
    S: float
    T: float
    kind = "evolved-ramp"

    def __post_init__(self):
        _check01("rho", self.rho)
        if not (self.S > 0 and self.T > 0):
            raise ParameterOutOfRange("need S > 0 and T > 0")

    @property
    def slope_scale(self) -> float:
        return self.T / (2.0 * (self.S + self.T))

    @property
    def z_min(self) -> float:
        """Left domain edge: the value hits 1 here."""
        return 1.0 - 2.0 * self.rho - (1.0 - self.rho) / self.slope_scale

    @property
    def z_max(self) -> float:
        """Right domain edge: the value hits 0 here."""
        return 1.0 - 2.0 * self.rho + self.rho / self.slope_scale

    def eval(self, z: float) -> float:
        if not (self.z_min - 1e-9 <= z <= self.z_max + 1e-9):
            raise ParameterOutOfRange(
                f"evolved ramp at z={z} outside its density range "
                f"[{self.z_min:.4g}, {self.z_max:.4g}]")
        v = self.rho + self.slope_scale * (1.0 - 2.0 * self.rho - z)
        return min(max(v, 0.0), 1.0)

    def _integral_ordered(self, a: float, b: float) -> float:
        if a < self.z_min - 1e-9 or b > self.z_max + 1e-9:
            raise ParameterOutOfRange("evolved ramp integral outside its density range")
        c = self.slope_scale

        def anti(z: float) -> float:
            return self.rho * z + c * ((1.0 - 2.0 * self.rho) * z - z * z / 2.0)

        return anti(b) - anti(a)


@dataclass(frozen=True)
class EvolvedPlateauProfile(ProfileFn):
    """Evolution of the plateau ramp: pointwise max of the evolved ramp and
    the plateau level rho + eps beta.

    The max coincides with the evolved ramp exactly on
    z <= 1 - 2 rho - 2 eps beta (S + T) / T and with the plateau after, so
    the only domain limit is the evolved ramp's left edge where its value
    would leave [0, 1].
    """

    rho: float
    eps: float
    beta: float
    S: float
    T: float
    kind = "evolved-plateau"

    def __post_init__(self):
        PlateauRampProfile(self.rho, self.eps, self.beta)  # parameter screening
        if not (self.S > 0 and self.T > 0):
            raise ParameterOutOfRange("need S > 0 and T > 0")

    @property
    def ramp(self) -> EvolvedRampProfile:
        return EvolvedRampProfile(self.rho, self.S, self.T)

    @property
    def plateau(self) -> float:
        return self.rho + self.eps * self.beta

    @property
    def crossover(self) -> float:
        return 1.0 - 2.0 * self.rho - 2.0 * self.eps * self.beta * (self.S + self.T) / self.T

    def breakpoints(self) -> tuple:
        return (self.crossover,)

    def eval(self, z: float) -> float:
        if z > self.crossover:
            return self.plateau
        return max(self.ramp.eval(z), self.plateau)

    def _integral_ordered(self, a: float, b: float) -> float:
        zc = self.crossover
        total = 0.0
        r1 = min(b, zc)
        if a < r1:
            total += self.ramp._integral_ordered(a, r1)
        p0 = max(a, zc)
        if p0 < b:
            total += self.plateau * (b - p0)
        return total


@dataclass(frozen=True)
class PiecewiseLinearProfile(ProfileFn):
    """Densities interpolated linearly between breakpoints, zero outside."""

    xs: tuple
    ys: tuple
    kind = "piecewise-linear"

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ParameterOutOfRange("need matching xs/ys with at least two points")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ParameterOutOfRange("xs must be strictly increasing")
        for y in self.ys:
            _check01("y", y)

    def breakpoints(self) -> tuple:
        return tuple(self.xs)

    def eval(self, z: float) -> float:
        if z < self.xs[0] or z > self.xs[-1]:
            return 0.0
        for (x0, x1), (y0, y1) in zip(zip(self.xs, self.xs[1:]), zip(self.ys, self.ys[1:])):
            if z <= x1:
                return y0 + (y1 - y0) * (z - x0) / (x1 - x0)
        return float(self.ys[-1])

    def _integral_ordered(self, a: float, b: float) -> float:
        total = 0.0
        for (x0, x1), (y0, y1) in zip(zip(self.xs, self.xs[1:]), zip(self.ys, self.ys[1:])):
            lo = max(a, x0)
            hi = min(b, x1)
            if lo >= hi:
                continue
            slope = (y1 - y0) / (x1 - x0)

            def anti(z):
                return y0 * z + slope * (z - x0) ** 2 / 2.0

            total += anti(hi) - anti(lo)
        return total


def expected_height_increment(S: float, T: float, rho: float, x: float, y: float) -> float:
    """Expected height difference h(x) - h(y) after evolving the ramp data.

    Computed as T times the evolved-ramp density integral over [x/T, y/T],
    which expands to (rho + T (1 - 2 rho) / (2 (S + T))) (y - x) minus
    (y^2 - x^2) / (4 (S + T)).
    """
    return T * EvolvedRampProfile(rho, S, T).integral(x / T, y / T)


def characteristic_quantities(nu: float) -> dict:
    """Constants attached to the ray z = nu inside the pure-step fan.

    Returns the local density (1 - nu) / 2 (whose characteristic speed is nu
    itself), the squared density m = ((1 - nu) / 2)^2, and the flux factor
    f = ((1 - nu^2) / 4)^(2/3).
    """
    if not (-1.0 <= nu <= 1.0):
        raise ParameterOutOfRange(f"nu={nu} outside [-1, 1]")
    density = (1.0 - nu) / 2.0
    return {
        "density": density,
        "speed": 1.0 - 2.0 * density,
        "m": ((1.0 - nu) / 2.0) ** 2,
        # factored product: 1 - nu * nu loses relative accuracy near the
        # fan edges, the separate factors do not
        "f": ((1.0 - nu) * (1.0 + nu) / 4.0) ** (2.0 / 3.0),
    }


def injection_interval(S: float, gamma: float = 0.01) -> tuple[int, int]:
    """Integer sites [ceil(-2 S^(1-gamma)), -1] targeted by the injection."""
    return int(math.ceil(-2.0 * S ** (1.0 - gamma))), -1


def injection_probability(j: int, S: float, rho_s: float, gamma: float = 0.01) -> tuple[float, bool]:
    """Hole-filling probability at site j and whether it is a probability.

    p(j) = (S^-gamma + j / (2S)) / (1 - rho_s + j / (2S)) for j in the
    injection interval; JOutOfRange outside. The boolean flags p in [0, 1];
    it is False for every j iff rho_s exceeds 1 - S^-gamma (callers treat
    invalid injections as a hard skip, never clipping).
    """
    lo, hi = injection_interval(S, gamma)
    if not (lo <= j <= hi):
        raise JOutOfRange(f"j={j} outside injection interval [{lo}, {hi}]")
    num = S ** (-gamma) + j / (2.0 * S)
    den = 1.0 - rho_s + j / (2.0 * S)
    if den <= 0:
        return math.inf, False
    p = num / den
    return p, (0.0 <= p <= 1.0)


def injection_all_valid(S: float, rho_s: float, gamma: float = 0.01) -> bool:
    """True iff every p(j) over the injection interval is a probability."""
    return rho_s <= 1.0 - S ** (-gamma) + 1e-15
