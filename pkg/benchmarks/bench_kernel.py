"""Throughput comparison: compiled event kernel vs the pure-Python fallback.

Run as  python3 benchmarks/bench_kernel.py [--events N] [--sites W].
Spawns one subprocess per backend (the choice is fixed at import time via
ASEPLAB_KERNEL) and reports events/second on identical inputs, plus a
checksum so a silent divergence between the backends cannot hide.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, os, sys, time
import numpy as np

from aseplab.kernel import BACKEND, HOLE, apply_events
from aseplab.clocks import make_rates
from aseplab.core import init_step
from aseplab.lab.sequences import event_blocks, replica_rng

n_events = int(sys.argv[1])
n_sites = int(sys.argv[2])
rates = make_rates(1.5, 0.5)
lo = -(n_sites // 2)
hi = lo + n_sites - 1
labels = init_step(lo, hi, "two-species").labels.copy()

# fixed event stream: one long draw, identical across backends
rng = replica_rng(123, 0)
per_site = rates.right + rates.left
duration = n_events / (per_site * n_sites)
sites_all, dirs_all = [], []
drawn = 0
for sites, dirs in event_blocks(rng, rates, lo, hi, duration):
    sites_all.append(sites)
    dirs_all.append(dirs)
    drawn += sites.size
sites = np.concatenate(sites_all) if sites_all else np.empty(0, np.int64)
dirs = np.concatenate(dirs_all) if dirs_all else np.empty(0, np.int8)

t0 = time.perf_counter()
apply_events(labels, lo, sites, dirs, 0, sites.size)
dt = time.perf_counter() - t0
print(json.dumps({
    "backend": BACKEND,
    "events": int(sites.size),
    "seconds": dt,
    "events_per_second": sites.size / dt if dt > 0 else float("inf"),
    "checksum": int(np.bitwise_xor.reduce(
        (labels.astype(np.int64) * np.arange(1, labels.size + 1)) % (2**31 - 1))),
}))
"""


def run_backend(backend: str, n_events: int, n_sites: int) -> dict:
    env = dict(os.environ, ASEPLAB_KERNEL=backend)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(n_events), str(n_sites)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--events", type=int, default=20_000_000,
                    help="approximate event count for the compiled backend")
    ap.add_argument("--sites", type=int, default=4001)
    ap.add_argument("--python-events", type=int, default=400_000,
                    help="smaller count for the interpreter loop")
    args = ap.parse_args()

    rows = []
    for backend, n in (("compiled", args.events), ("python", args.python_events)):
        try:
            res = run_backend(backend, n, args.sites)
        except subprocess.CalledProcessError as exc:
            print(f"{backend}: unavailable ({exc.stderr.strip().splitlines()[-1]})")
            continue
        rows.append(res)
        print(f"{res['backend']:>8}: {res['events']:>12,} events in "
              f"{res['seconds']:8.3f}s = {res['events_per_second']:>14,.0f} ev/s "
              f"(checksum {res['checksum']})")

    if len(rows) == 2:
        speedup = rows[0]["events_per_second"] / rows[1]["events_per_second"]
        print(f"speedup: {speedup:,.0f}x")
        small = run_backend("compiled", args.python_events, args.sites)
        if small["checksum"] != rows[1]["checksum"]:
            print("CHECKSUM MISMATCH between backends on identical input")
            return 1
        print("checksums agree on the shared input")
    return 0


if __name__ == "__main__":
    sys.exit(main())
