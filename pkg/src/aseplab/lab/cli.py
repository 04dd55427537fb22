"""Command line front end.

Subcommands: `simulate` (one trajectory, snapshots and CSV), `couple`
(pathwise coupling checks over replicas), the packaged experiments
(`speed-law`, `speed-process`, `concentration`, `perturbation`, `qlaplace`,
`min-particle`, `rez-check`), and `schedule` (observation time schedule).

Exit codes: 0 when every check passes or the experiment is skipped, 1 when
any check fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..clocks import make_rates, sample_clock_window
from ..core import (
    SpeciesConfig,
    evolve,
    init_bernoulli,
    init_speed_process,
    init_step,
    snapshot_lines,
    trajectory_to_csv,
)
from ..coupling import check_attractivity, check_monotonicity, couple
from ..errors import AsepLabError
from .config import KINDS, load_config, spec_from_config
from .experiments import run_experiment, schedule_times

EXPERIMENT_KINDS = KINDS


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="INI file with [common] and per-kind sections")
    sub.add_argument("--seed", type=int, help="base seed (overrides config)")
    sub.add_argument("--replicas", type=int, help="replica count (overrides config)")
    sub.add_argument("--out", help="output directory for CSVs and the manifest")
    sub.add_argument("--threads", type=int, help="worker threads (default 1)")


def _parse_window(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aseplab",
        description="multi-species exclusion process laboratory",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run one trajectory and dump snapshots")
    sim.add_argument("--rates", default="1,0", help="right,left jump rates")
    sim.add_argument("--window", default="-50:50", help="lo:hi site window")
    sim.add_argument("--init", default="step-pure",
                     choices=["step-pure", "step-two-species", "speed-process", "bernoulli"])
    sim.add_argument("--rho", type=float, default=0.5, help="bernoulli density left of origin")
    sim.add_argument("--lam", type=float, default=0.0, help="bernoulli density right of origin")
    sim.add_argument("--times", default="1", help="comma separated checkpoint times")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="directory for snapshots and trajectory CSV")

    cpl = subs.add_parser("couple", help="pathwise ordering and height-gap checks")
    cpl.add_argument("--rates", default="1,0")
    cpl.add_argument("--window", default="-40:40")
    cpl.add_argument("--horizon", type=float, default=5.0)
    cpl.add_argument("--replicas", type=int, default=200)
    cpl.add_argument("--seed", type=int, default=0)
    cpl.add_argument("--densities", default="0.3,0.6",
                     help="site-coupled Bernoulli densities eta,zeta with eta <= zeta")

    for kind in EXPERIMENT_KINDS:
        sub = subs.add_parser(kind, help=f"run the {kind} experiment")
        _add_common(sub)

    sch = subs.add_parser("schedule", help="print the observation time schedule")
    sch.add_argument("--s0", type=float, default=float(np.e))
    sch.add_argument("--count", type=int, default=20)

    return parser


def _cmd_simulate(args) -> int:
    right, left = (float(v) for v in args.rates.split(","))
    rates = make_rates(right, left)
    lo, hi = _parse_window(args.window)
    times = sorted(float(t) for t in args.times.split(","))
    if args.init == "step-pure":
        config = init_step(lo, hi, "pure")
    elif args.init == "step-two-species":
        config = init_step(lo, hi, "two-species")
    elif args.init == "speed-process":
        config = init_speed_process(lo, hi)
    else:
        config = init_bernoulli(lo, hi, args.rho, args.lam, args.seed)
    clock = sample_clock_window(rates, lo, hi, times[-1], args.seed)
    traj = evolve(config, clock, times[-1], checkpoint_times=times)
    print(f"window [{lo}, {hi}], {clock.n_events} events to t={times[-1]}")
    for t, snap in traj.checkpoints:
        counts = snap.class_counts()
        occupied = sum(v for k, v in counts.items() if k != 2147483647)
        print(f"  t={t:g}: {occupied} particles")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        trajectory_to_csv(traj, os.path.join(args.out, "trajectory.csv"))
        with open(os.path.join(args.out, "snapshots.txt"), "w") as fh:
            for t, snap in traj.checkpoints:
                fh.write(f"# t = {t!r}\n")
                fh.write("\n".join(snapshot_lines(snap)) + "\n")
        print(f"wrote {args.out}/trajectory.csv and snapshots.txt")
    return 0


def _cmd_couple(args) -> int:
    right, left = (float(v) for v in args.rates.split(","))
    rates = make_rates(right, left)
    lo, hi = _parse_window(args.window)
    p_eta, p_zeta = (float(v) for v in args.densities.split(","))
    if not (0 <= p_eta <= p_zeta <= 1):
        raise AsepLabError("densities must satisfy 0 <= eta <= zeta <= 1")
    n = hi - lo + 1
    HOLE = 2147483647
    bad_order = 0
    bad_gap = 0
    for rep in range(args.replicas):
        rng = np.random.default_rng((args.seed, rep))
        u = rng.random(n)
        zeta = SpeciesConfig(lo, hi, np.where(u < p_zeta, 1, HOLE).astype(np.int32))
        eta = SpeciesConfig(lo, hi, np.where(u < p_eta, 1, HOLE).astype(np.int32))
        clock = sample_clock_window(rates, lo, hi, args.horizon, args.seed * 1000003 + rep)
        run = couple([eta, zeta], clock)
        rep_a = check_attractivity(run)
        if not rep_a.passed:
            bad_order += 1
            print(f"replica {rep}: ordering broken at {rep_a.first_violation}")
        gap0 = int(np.abs(np.cumsum(eta.occupation()) - np.cumsum(zeta.occupation())).max())
        rep_m = check_monotonicity(run, closeness=gap0)
        if not rep_m.passed:
            bad_gap += 1
            print(f"replica {rep}: height gap grew at {rep_m.first_violation}")
    print(f"{args.replicas} replicas on [{lo}, {hi}] to t={args.horizon}: "
          f"{bad_order} ordering violations, {bad_gap} height-gap violations")
    return 0 if bad_order == 0 and bad_gap == 0 else 1


def _cmd_experiment(kind: str, args) -> int:
    config = load_config(args.config) if args.config else None
    spec = spec_from_config(kind, config, seed=args.seed, replicas=args.replicas,
                            out_dir=args.out, threads=args.threads)
    report = run_experiment(spec)
    for line in report.summary_lines():
        print(line)
    if report.spec.out_dir:
        print(f"outputs in {report.spec.out_dir}")
    return 0 if report.verdict in ("PASS", "SKIPPED") else 1


def _cmd_schedule(args) -> int:
    print("m,S,T")
    for m, (s, t) in enumerate(schedule_times(args.s0, args.count)):
        print(f"{m},{s!r},{t!r}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "couple":
            return _cmd_couple(args)
        if args.command == "schedule":
            return _cmd_schedule(args)
        return _cmd_experiment(args.command, args)
    except AsepLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
