"""Exact round-0 game value for each backend at n=3 (StrongLin takes a minute or two).

    python scripts/round_value.py
"""

import argparse
import json
import time

from weakener_sim.minimax import minimax_round_value


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--backends", nargs="+", default=["atomic", "linearizable", "strong"])
    p.add_argument("--bound", type=int, default=None)
    args = p.parse_args()
    for backend in args.backends:
        t = time.perf_counter()
        result = minimax_round_value(3, backend, args.bound)
        d = result.to_dict()
        d["seconds"] = round(time.perf_counter() - t, 1)
        print(json.dumps(d))


if __name__ == "__main__":
    main()
