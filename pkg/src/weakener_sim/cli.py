"""Command-line entry point: ``weakener-sim`` / ``python -m weakener_sim``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .adversary import SCHEDULERS
from .harness import ExperimentSpec, iter_trials, record_from_result, run_experiment, summarize
from .minimax import minimax_round_value
from .registers import BackendKind
from .weakener import PROGRAMS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakener-sim", description=__doc__)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--backend", choices=[b.value for b in BackendKind], default="strong")
    p.add_argument("--scheduler", choices=SCHEDULERS, default="fair")
    p.add_argument("--program", choices=PROGRAMS, default="weakener")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps-cap", type=int, default=100_000)
    p.add_argument("--rounds-cap", type=int, default=None)
    p.add_argument("--record-history", action="store_true", help="record traces and run both checkers")
    p.add_argument("--trace-out", default=None, help="write NDJSON traces here (implies --record-history)")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--minimax", action="store_true", help="exact round-0 game value instead of Monte Carlo")
    p.add_argument("--bound", type=int, default=None, help="minimax step bound (default: full round 0)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.minimax:
        result = minimax_round_value(args.n, args.backend, args.bound)
        print(json.dumps(result.to_dict()))
        return 0

    spec = ExperimentSpec(
        n=args.n, backend=args.backend, scheduler=args.scheduler, program=args.program,
        trials=args.trials, seed=args.seed, steps_cap=args.steps_cap, rounds_cap=args.rounds_cap,
        record_history=args.record_history or args.trace_out is not None, out=args.out,
    )
    if args.trace_out:
        records = []
        with open(args.trace_out, "w") as fh:
            for record, result in iter_trials(spec):
                records.append(record)
                fh.write(result.trace.to_ndjson())
                fh.write("\n")  # blank line separates trials
        summary = summarize(spec, records)
    else:
        summary = run_experiment(spec, workers=args.workers)

    sys.stdout.write(summary.to_json() + "\n" if args.out == "json" else summary.to_csv())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
