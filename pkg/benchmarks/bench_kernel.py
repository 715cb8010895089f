"""Time the compiled and pure-Python step loops on the same runs.

    python benchmarks/bench_kernel.py [--deals 15000] [--repeat 3]
"""

import argparse
import time

from dealer_sim import kernel
from dealer_sim.engine import run
from dealer_sim.scenarios import preset

PRESETS = ["fig4-baseline", "fig5-up", "fig7-unpremeditated", "fig8a-omega"]


def best_of(config, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        series = run(config, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), series


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--deals", type=int, default=15000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = sorted(kernel.BACKENDS)
    print(f"backends: {', '.join(backends)}; {args.deals} deals per run, best of {args.repeat}")
    print(f"{'preset':<22}{'steps':>9}" + "".join(f"{b + ' [s]':>14}" for b in backends)
          + f"{'speedup':>10}  identical")
    for name in PRESETS:
        config = preset(name).config.replace(target_deals=args.deals)
        results = {b: best_of(config, b, args.repeat) for b in backends}
        steps = next(iter(results.values()))[1].final_state.step
        digests = {s.final_state_digest for _, s in results.values()}
        row = f"{name:<22}{steps:>9}" + "".join(f"{results[b][0]:>14.4f}" for b in backends)
        if len(backends) == 2:
            row += f"{results['python'][0] / results['cython'][0]:>9.1f}x"
        else:
            row += f"{'n/a':>10}"
        print(row + f"  {len(digests) == 1}")


if __name__ == "__main__":
    main()
