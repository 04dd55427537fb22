"""Statistics shared by the experiments: KS distances, confidence
intervals, trend fits, and a uniform PASS/FAIL record.

Every check that rests on randomness reports its sample size, method, and
level next to the verdict; a bare boolean is never emitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


@dataclass(frozen=True)
class CheckResult:
    """One verdict with enough context to re-derive it."""

    name: str
    passed: bool
    statistic: float
    threshold: float
    n_samples: int
    method: str
    level: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def __str__(self) -> str:
        lvl = f" level={self.level}" if self.level is not None else ""
        return (f"[{self.verdict}] {self.name}: stat={self.statistic:.6g} "
                f"thr={self.threshold:.6g} n={self.n_samples} ({self.method}{lvl})")


def ks_uniform(samples, a: float = -1.0, b: float = 1.0) -> float:
    """Kolmogorov-Smirnov distance of samples to Uniform[a, b]."""
    res = sps.kstest(np.asarray(samples, dtype=float), "uniform", args=(a, b - a))
    return float(res.statistic)


def ks_two_sample(x, y) -> tuple[float, float]:
    """Two-sample KS statistic and p-value."""
    res = sps.ks_2samp(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(res.statistic), float(res.pvalue)


def mean_ci(samples, level: float = 0.99) -> tuple[float, float]:
    """Sample mean and normal-approximation CI half-width."""
    x = np.asarray(samples, dtype=float)
    z = sps.norm.isf((1.0 - level) / 2.0)
    se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else float("inf")
    return float(np.mean(x)), z * se


def proportion_ci(k: int, n: int, level: float = 0.99) -> tuple[float, float]:
    """Proportion estimate and normal CI half-width (Wald with 1/2n floor)."""
    p = k / n
    z = sps.norm.isf((1.0 - level) / 2.0)
    se = max(np.sqrt(p * (1.0 - p) / n), 0.5 / n)
    return p, z * se


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log ys against log xs."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def ecdf(samples):
    """Sorted support values and cumulative probabilities."""
    x = np.sort(np.asarray(samples, dtype=float))
    return x, np.arange(1, x.size + 1) / x.size
