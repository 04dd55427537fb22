"""Experiment specification and its plain-text config format.

A spec is a complete, hashable description of one experiment run: kind,
rates, horizon and checkpoints, replica count, base seed, and the
kind-specific parameters. Identical specs with identical seeds must
reproduce identical outputs, so everything influencing the run lives here.

Config files are INI: one section per experiment kind plus an optional
[common] section; command-line flags override file values.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field, replace

from ..clocks import JumpRates, make_rates
from ..errors import ParameterOutOfRange

KINDS = (
    "speed-law",
    "speed-process",
    "concentration",
    "perturbation",
    "qlaplace",
    "min-particle",
    "rez-check",
)

# experiments whose statistics divide by the checkpoint time
_VELOCITY_KINDS = {"speed-law", "speed-process"}

WINDOW_MARGIN = 100


def window_half_width(rates: JumpRates, horizon: float, core: int) -> int:
    """Half-width so the observation core survives the validity cut.

    Information from the closed boundary travels at most ~(R+L) per unit
    time; the 4R horizon cut plus a fixed margin keeps the windowed law
    indistinguishable from the full-line law on the core.
    """
    return int(math.ceil(4.0 * rates.right * horizon)) + core + WINDOW_MARGIN


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    rates: JumpRates
    horizon: float
    checkpoints: tuple[float, ...]
    replicas: int
    base_seed: int
    params: dict = field(default_factory=dict)
    out_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterOutOfRange(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.replicas < 1:
            raise ParameterOutOfRange("replicas must be >= 1")
        if self.threads < 1:
            raise ParameterOutOfRange("threads must be >= 1")
        if not self.checkpoints:
            raise ParameterOutOfRange("need at least one checkpoint")
        if list(self.checkpoints) != sorted(self.checkpoints):
            raise ParameterOutOfRange("checkpoints must be increasing")
        if self.checkpoints[-1] > self.horizon:
            raise ParameterOutOfRange("checkpoints must not exceed the horizon")
        if self.kind in _VELOCITY_KINDS and self.checkpoints[0] <= 0:
            raise ParameterOutOfRange(
                f"{self.kind} divides by t; checkpoint times must be positive"
            )
        if any(t < 0 for t in self.checkpoints):
            raise ParameterOutOfRange("checkpoint times must be nonnegative")

    @property
    def final_time(self) -> float:
        return self.checkpoints[-1]

    def param(self, name: str, default=None):
        return self.params.get(name, default)

    def window(self, core: int) -> tuple[int, int]:
        half = window_half_width(self.rates, self.horizon, core)
        return -half, half

    def canonical_text(self) -> str:
        lines = [
            f"kind = {self.kind}",
            f"right = {self.rates.right!r}",
            f"left = {self.rates.left!r}",
            f"horizon = {self.horizon!r}",
            f"checkpoints = {','.join(repr(t) for t in self.checkpoints)}",
            f"replicas = {self.replicas}",
            f"base_seed = {self.base_seed}",
        ]
        for k in sorted(self.params):
            lines.append(f"param.{k} = {self.params[k]!r}")
        return "\n".join(lines) + "\n"

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


_DEFAULTS = {
    "speed-law": dict(right=1.0, left=0.0, checkpoints="250,500,1000,2000", replicas=2000),
    "speed-process": dict(right=1.0, left=0.0, checkpoints="500", replicas=1000,
                          core=8, pairs="0:5"),
    "concentration": dict(right=1.0, left=0.0, checkpoints="", replicas=500,
                          initial="step", eps=0.2, tgrid="250,500,1000,2000"),
    "perturbation": dict(right=1.0, left=0.0, checkpoints="", replicas=200,
                         s_time=2000.0, gamma=0.01, eps=0.2),
    "qlaplace": dict(right=1.5, left=0.5, checkpoints="20", replicas=100000,
                     x=2, zetas="0.1,1,10"),
    "min-particle": dict(right=1.0, left=0.0, checkpoints="10,20", replicas=100000,
                         x=0),
    "rez-check": dict(right=1.0, left=0.0, checkpoints="1", replicas=2000,
                      mode="both"),
}


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def spec_from_options(kind: str, *, seed: int = 0, replicas: int | None = None,
                      out_dir: str | None = None, threads: int = 1,
                      overrides: dict | None = None) -> ExperimentSpec:
    """Build a spec for `kind` from defaults plus overrides."""
    if kind not in KINDS:
        raise ParameterOutOfRange(f"unknown kind {kind!r}")
    opts = dict(_DEFAULTS[kind])
    opts.update(overrides or {})
    rates = make_rates(float(opts.pop("right")), float(opts.pop("left")))
    checkpoints = opts.pop("checkpoints")
    if isinstance(checkpoints, str):
        checkpoints = _parse_floats(checkpoints)
    n_rep = int(opts.pop("replicas"))
    if replicas is not None:
        n_rep = replicas
    if kind == "concentration" and not checkpoints:
        tgrid = opts["tgrid"]
        if isinstance(tgrid, str):
            tgrid = _parse_floats(tgrid)
        opts["tgrid"] = tgrid
        checkpoints = tgrid
    if kind == "perturbation" and not checkpoints:
        s_time = float(opts["s_time"])
        checkpoints = (s_time,)
    horizon = float(opts.pop("horizon", max(checkpoints)))
    params = {k: v for k, v in opts.items()}
    return ExperimentSpec(kind=kind, rates=rates, horizon=horizon,
                          checkpoints=tuple(checkpoints), replicas=n_rep,
                          base_seed=int(seed), params=params,
                          out_dir=out_dir, threads=threads)


def load_config(path: str) -> dict[str, dict]:
    """Read an INI config; returns {section: {key: raw str}}."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    return {s: dict(parser.items(s)) for s in parser.sections()}


def spec_from_config(kind: str, config: dict[str, dict] | None, *, seed=None,
                     replicas=None, out_dir=None, threads=None) -> ExperimentSpec:
    """Merge [common] and [kind] config sections with CLI overrides."""
    overrides: dict = {}
    if config:
        overrides.update(config.get("common", {}))
        overrides.update(config.get(kind, {}))
    file_seed = overrides.pop("seed", None)
    file_replicas = overrides.pop("replicas", None)
    file_threads = overrides.pop("threads", None)
    return spec_from_options(
        kind,
        seed=int(seed if seed is not None else (file_seed or 0)),
        replicas=(int(replicas) if replicas is not None
                  else (int(file_replicas) if file_replicas else None)),
        out_dir=out_dir,
        threads=int(threads if threads is not None else (file_threads or 1)),
        overrides=overrides,
    )


def with_params(spec: ExperimentSpec, **params) -> ExperimentSpec:
    merged = dict(spec.params)
    merged.update(params)
    return replace(spec, params=merged)
