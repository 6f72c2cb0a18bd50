"""Full versus effective trajectories for both schemes.

Scheme 1 uses the three-atom Fig. 2 parameters over [0, 200].  Scheme 2 runs
the first switching segments over [0, T] with and without compensation of the
second-order light shifts in the full model.

    python3 scripts/compare_full_effective.py scheme1
    python3 scripts/compare_full_effective.py scheme2 --t-end 100
"""

import argparse
import time

import numpy as np

from rydghz.core_ops import GER
from rydghz.lindblad import TimeSeries, integrate
from rydghz.scenario import compare
from rydghz.scheme1 import Scheme1Params, build_effective, build_full_3atom, mixed_initial_state
from rydghz.scheme1 import observables as s1_observables
from rydghz.scheme2 import Scheme2Params, build_switching_schedule, mixed_initial_state_6
from rydghz.scheme2 import observables as s2_observables


def scheme1(args):
    p = Scheme1Params()
    t0 = time.perf_counter()
    full = integrate(
        build_full_3atom(p), mixed_initial_state(3, GER), t_end=200.0, dt=1.5e-4,
        observables=s1_observables(3, GER), sample_stride=3333,
    )
    eff = integrate(build_effective(p), mixed_initial_state(3), t_end=200.0, observables=s1_observables(3), sample_stride=10)
    print(f"integrated in {time.perf_counter() - t0:.0f} s")
    for k, dev in compare(full, eff).items():
        print(f"{k}: max |full - eff| = {dev.max_abs:.4f} at t = {dev.at_time:.1f}")
    for t in (25, 50, 100, 200):
        print(f"t={t:>4}: full {full.at('P_GHZ-', t):.4f}  effective {eff.at('P_GHZ-', t):.4f}")


def fidelity_series(ts):
    return TimeSeries(ts.times, {"F": np.sqrt(np.clip(ts["P_GHZ-"], 0, None))})


def scheme2(args):
    p = Scheme2Params()
    rho0 = mixed_initial_state_6()
    eff = integrate(build_switching_schedule(p), rho0, t_end=args.t_end, dt=0.05, observables=s2_observables(), sample_stride=10)
    for cancel in (True, False):
        t0 = time.perf_counter()
        sched = build_switching_schedule(p, "full", cancel_light_shifts=cancel)
        full = integrate(sched, rho0, t_end=args.t_end, dt=1 / 3000, observables=s2_observables(), sample_stride=1500)
        dev = compare(fidelity_series(full), fidelity_series(eff))["F"]
        print(
            f"compensated={cancel}: max|dF| = {dev.max_abs:.2e} at t = {dev.at_time:g}"
            f"  ({time.perf_counter() - t0:.0f} s)"
        )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("scheme", choices=["scheme1", "scheme2"])
    ap.add_argument("--t-end", type=float, default=100.0, help="scheme 2 horizon")
    args = ap.parse_args()
    {"scheme1": scheme1, "scheme2": scheme2}[args.scheme](args)


if __name__ == "__main__":
    main()
