#!/usr/bin/env python3
"""Compare the numba-compiled kernels against the pure-numpy fallback.

The hot paths are the per-climber body-state search (batched by the grading
engine) and the RK4 chaotic integrator. Each benchmark runs in a fresh
subprocess so CRUX_NUMBA is honored at import time.

Run:
    python benchmarks/bench_kernels.py [--climbers 400] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOAD = textwrap.dedent("""
    import json, time
    import numpy as np
    from crux import kernels
    from crux.climber import PopulationArrays, PopulationSpec, sample_population, success_profiles
    from crux.model import ClimberProfile, Hold, HoldType, Panel, Route, Wall
    from crux.planner import plan_beta

    n_climbers = {n_climbers}
    repeats = {repeats}

    rng = np.random.default_rng(3)
    holds = []
    ys = np.sort(rng.uniform(0.3, 4.2, 12))
    for i in range(12):
        hand = rng.random() < 0.75
        roles = frozenset({{"hand", "foot"}}) if hand else frozenset({{"foot"}})
        htype = HoldType.JUG if hand else HoldType.FOOTHOLD
        holds.append(Hold(f"h{{i:02d}}", float(rng.uniform(0.3, 2.7)), float(ys[i]),
                          htype, float(rng.uniform(0.1, 0.7)), roles))
    holds[0] = Hold("h00", holds[0].x, holds[0].y, HoldType.JUG, 0.2, frozenset({{"hand", "foot"}}))
    last = holds[-1]
    holds[-1] = Hold(last.id, last.x, last.y, HoldType.JUG, 0.2, frozenset({{"hand", "foot"}}))
    wall = Wall(3.0, 4.5, (Panel(0.0, 2.0, 90.0), Panel(2.0, 4.5, 105.0)), tuple(holds))
    route = Route(name="bench", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("h00",), finish_hold_id=last.id)

    pop = PopulationArrays(sample_population(
        PopulationSpec(size=n_climbers, ability_mean=1.2, ability_std=0.4,
                       fear_mean=0.5), seed=7))

    # warm-up triggers compilation on the numba path
    prof = success_profiles(route, wall, pop)
    checksum = float(np.nansum(np.where(np.isfinite(prof.total_cost), prof.total_cost, 0.0)))

    t0 = time.perf_counter()
    for _ in range(repeats):
        success_profiles(route, wall, pop)
    batch_s = (time.perf_counter() - t0) / repeats

    climber = ClimberProfile(ability=1.2, height=1.75, arm_span=1.75, fear_sensitivity=0.5)
    plan_beta(route, wall, climber)
    t0 = time.perf_counter()
    for _ in range(20):
        plan_beta(route, wall, climber)
    plan_s = (time.perf_counter() - t0) / 20

    out = np.empty((10_001, 3))
    kernels.lorenz_kernel(1.0, 1.0, 1.0, 10.0, 28.0, 8.0 / 3.0, 0.01, 10_000, out)
    t0 = time.perf_counter()
    for _ in range(repeats):
        kernels.lorenz_kernel(1.0, 1.0, 1.0, 10.0, 28.0, 8.0 / 3.0, 0.01, 10_000, out)
    lorenz_s = (time.perf_counter() - t0) / repeats

    print(json.dumps({{
        "backend": kernels.backend_name(),
        "batch_profiles_s": batch_s,
        "plan_beta_s": plan_s,
        "lorenz_10k_s": lorenz_s,
        "checksum": checksum,
    }}))
""")


def run_backend(flag: str, n_climbers: int, repeats: int) -> dict:
    env = dict(os.environ, CRUX_NUMBA=flag)
    code = WORKLOAD.format(n_climbers=n_climbers, repeats=repeats)
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True,
                          text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--climbers", type=int, default=400)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    print(f"workload: 12-hold mixed wall, {args.climbers} climbers, repeats={args.repeats}")
    rows = []
    for flag, label in (("1", "numba"), ("0", "numpy fallback")):
        print(f"running {label} ...", flush=True)
        rows.append((label, run_backend(flag, args.climbers, args.repeats)))

    if abs(rows[0][1]["checksum"] - rows[1][1]["checksum"]) > 1e-9:
        print("WARNING: backend checksums differ!")

    print(f"\n{'benchmark':<28}{'numba':>14}{'numpy':>14}{'speedup':>10}")
    for key, title in (("batch_profiles_s", "batch success profiles"),
                       ("plan_beta_s", "single plan_beta"),
                       ("lorenz_10k_s", "lorenz 10k steps")):
        fast = rows[0][1][key]
        slow = rows[1][1][key]
        print(f"{title:<28}{fast * 1e3:>12.2f}ms{slow * 1e3:>12.2f}ms{slow / fast:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
