"""Adversarial runs on merely linearizable registers: nobody ever returns.

    python scripts/reproduce_nontermination.py --rounds 200 --trials 100
"""

import argparse

from weakener_sim.adversary import adversary_steps_per_round
from weakener_sim.harness import ExperimentSpec, run_experiment


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--ns", type=int, nargs="+", default=[3, 5, 8])
    p.add_argument("--rounds", type=int, default=200)
    p.add_argument("--trials", type=int, default=100)
    args = p.parse_args()
    for n in args.ns:
        spec = ExperimentSpec(n=n, backend="linearizable", scheduler="weakener-adversary", trials=args.trials,
                              steps_cap=args.rounds * adversary_steps_per_round(n), rounds_cap=args.rounds)
        s = run_experiment(spec)
        print(f"n={n}: all_returned_frac={s.all_returned_frac} min_rounds={s.min_rounds} max_rounds={s.max_rounds}")


if __name__ == "__main__":
    main()
