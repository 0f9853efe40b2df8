"""Fair runs on atomic and strongly linearizable registers: rounds-to-exit statistics.

    python scripts/reproduce_termination.py --trials 10000 --workers 1
"""

import argparse
import math

from weakener_sim.harness import ExperimentSpec, run_experiment


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--ns", type=int, nargs="+", default=[3, 8])
    p.add_argument("--backends", nargs="+", default=["atomic", "strong", "linearizable"])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    print("backend,n,trials,all_returned_frac,mean_rounds,mean_3sigma,tail1,tail2,tail3,tail4,tail5")
    for backend in args.backends:
        for n in args.ns:
            s = run_experiment(ExperimentSpec(n=n, backend=backend, trials=args.trials, seed=args.seed),
                               workers=args.workers)
            sigma = s.std_rounds / math.sqrt(s.trials)
            tails = ",".join(f"{s.tail(k):.4f}" for k in range(1, 6))
            print(f"{backend},{n},{s.trials},{s.all_returned_frac},{s.mean_rounds:.4f},{3 * sigma:.4f},{tails}")


if __name__ == "__main__":
    main()
