"""Weakener in front of a one-write task: fair StrongLin runs finish, adversarial MerelyLin runs never start the task.

    python scripts/composition.py
"""

import argparse

from weakener_sim.harness import ExperimentSpec, run_experiment


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--rounds", type=int, default=200)
    args = p.parse_args()
    fair = run_experiment(ExperimentSpec(n=args.n, backend="strong", program="weakener+trivial", trials=args.trials))
    adv = run_experiment(ExperimentSpec(n=args.n, backend="linearizable", scheduler="weakener-adversary",
                                        program="weakener+trivial", trials=max(1, args.trials // 10),
                                        rounds_cap=args.rounds))
    print(f"strong+fair: all_returned_frac={fair.all_returned_frac} entered_task={fair.entered_main} "
          f"mean_total_rounds={fair.mean_rounds:.4f}")
    print(f"linearizable+adversary: entered_task={adv.entered_main} min_rounds={adv.min_rounds}")


if __name__ == "__main__":
    main()
